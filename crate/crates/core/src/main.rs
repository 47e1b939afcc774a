use clap::Parser;

fn main() {
    let cli = cqesim::cli::Cli::parse();
    std::process::exit(cqesim::cli::execute(cli));
}
