//! FCIDUMP reader and writer (Molpro convention, 1-based spatial indices,
//! chemist-notation two-electron integrals).

use std::fmt::Write as _;

use crate::error::{CqeError, Result};
use crate::scalar::Real;

use super::integrals::{eri_images, IntegralSet};

fn perr<X>(line: usize, message: impl Into<String>) -> Result<X> {
    Err(CqeError::Parse {
        line,
        message: message.into(),
    })
}

#[derive(Default)]
struct Header {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: i32,
    orbsym: Vec<usize>,
}

fn parse_header(text: &str, line: usize) -> Result<Header> {
    let body = text
        .trim_start()
        .strip_prefix("&FCI")
        .or_else(|| text.trim_start().strip_prefix("&fci"))
        .unwrap_or(text);
    // glue "KEY = value" into "KEY=value"
    let mut norm = String::with_capacity(body.len());
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '=' {
            while norm.ends_with(' ') {
                norm.pop();
            }
            norm.push('=');
            while chars.peek().is_some_and(|c| c.is_whitespace()) {
                chars.next();
            }
        } else {
            norm.push(c);
        }
    }
    let mut header = Header::default();
    let mut key = String::new();
    for tok in norm.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let value = match tok.split_once('=') {
            Some((k, v)) => {
                key = k.to_ascii_uppercase();
                v
            }
            None => tok,
        };
        if value.is_empty() {
            continue;
        }
        let int = |v: &str| -> Result<i64> {
            v.parse::<i64>().or_else(|_| perr(line, format!("non-integer header value '{v}' for {key}")))
        };
        match key.as_str() {
            "NORB" => header.norb = Some(int(value)?.max(0) as usize),
            "NELEC" => header.nelec = Some(int(value)?.max(0) as usize),
            "MS2" => header.ms2 = int(value)? as i32,
            "ORBSYM" => header.orbsym.push(int(value)?.max(0) as usize),
            "" => return perr(line, format!("header token '{tok}' outside a KEY=value pair")),
            _ => {}
        }
    }
    Ok(header)
}

/// Parses FCIDUMP text into an [`IntegralSet`]. Symmetry-equivalent entries
/// are expanded; unlisted integrals are zero. Repeated entries must agree.
pub fn parse_fcidump<T: Real>(text: &str) -> Result<IntegralSet<T>> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l));

    let mut header_text = String::new();
    let mut header_line = 0;
    let mut started = false;
    let mut terminated = false;
    for (n, raw) in lines.by_ref() {
        let l = raw.trim();
        if !started {
            if l.is_empty() {
                continue;
            }
            if !l.to_ascii_uppercase().starts_with("&FCI") {
                return perr(n, "expected '&FCI' header");
            }
            started = true;
            header_line = n;
        }
        let upper = l.to_ascii_uppercase();
        if let Some(pos) = upper.find("&END") {
            header_text.push_str(&l[..pos]);
            terminated = true;
            break;
        }
        if l == "/" || l.ends_with(" /") || l.ends_with(",/") {
            header_text.push_str(l.trim_end_matches('/'));
            terminated = true;
            break;
        }
        header_text.push_str(l);
        header_text.push(' ');
    }
    if !started {
        return perr(1, "empty input");
    }
    if !terminated {
        return perr(header_line, "header not terminated by '&END' or '/'");
    }
    let header = parse_header(&header_text, header_line)?;
    let r = match header.norb {
        Some(r) if r > 0 => r,
        _ => return perr(header_line, "missing or zero NORB"),
    };
    let nelec = match header.nelec {
        Some(n) => n,
        None => return perr(header_line, "missing NELEC"),
    };

    let mut ints = IntegralSet::zeros(r, nelec, header.ms2);
    ints.orbsym = header.orbsym;
    let mut seen_core = false;
    let mut seen_h = vec![false; r * r];
    let mut seen_g = vec![false; r.pow(4)];
    let agree = |a: T, b: T| (a - b).abs() <= T::lit(1e-10) * T::one().max(a.abs());

    for (n, raw) in lines {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return perr(n, format!("expected 5 fields, found {}", fields.len()));
        }
        let value: f64 = match fields[0].replace(['D', 'd'], "E").parse() {
            Ok(v) => v,
            Err(_) => return perr(n, format!("non-numeric integral value '{}'", fields[0])),
        };
        let value = T::lit(value);
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            *slot = match f.parse::<usize>() {
                Ok(v) => v,
                Err(_) => return perr(n, format!("non-integer index '{f}'")),
            };
            if *slot > r {
                return perr(n, format!("index {} exceeds NORB={r}", *slot));
            }
        }
        match idx {
            [0, 0, 0, 0] => {
                if seen_core && !agree(ints.core_energy, value) {
                    return perr(n, "conflicting core energy");
                }
                seen_core = true;
                ints.core_energy = value;
            }
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let (p, q) = (i - 1, j - 1);
                if seen_h[p * r + q] && !agree(ints.h(p, q), value) {
                    return perr(n, format!("conflicting one-electron integral ({i},{j})"));
                }
                ints.set_h(p, q, value);
                seen_h[p * r + q] = true;
                seen_h[q * r + p] = true;
            }
            [_, 0, 0, 0] => {} // orbital energy
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (a, b, c, d) = (i - 1, j - 1, k - 1, l - 1);
                let at = ((a * r + b) * r + c) * r + d;
                if seen_g[at] && !agree(ints.g(a, b, c, d), value) {
                    return perr(n, format!("conflicting two-electron integral ({i}{j}|{k}{l})"));
                }
                ints.set_g(a, b, c, d, value);
                for (w, x, y, z) in eri_images(a, b, c, d) {
                    seen_g[((w * r + x) * r + y) * r + z] = true;
                }
            }
            _ => return perr(n, format!("unrecognised index pattern {idx:?}")),
        }
    }
    ints.validate().map_err(|e| CqeError::Parse {
        line: header_line,
        message: e.to_string(),
    })?;
    Ok(ints)
}

/// Serializes integrals as FCIDUMP text, listing each symmetry-unique nonzero
/// element once.
pub fn write_fcidump<T: Real>(ints: &IntegralSet<T>) -> String {
    let r = ints.n_spatial;
    let mut out = String::new();
    let _ = writeln!(
        out,
        " &FCI NORB={r},NELEC={},MS2={},",
        ints.n_electrons, ints.ms2
    );
    let orbsym = if ints.orbsym.len() == r {
        ints.orbsym.clone()
    } else {
        vec![1; r]
    };
    let syms: Vec<String> = orbsym.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "  ORBSYM={},", syms.join(","));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for i in 0..r {
        for j in 0..=i {
            for k in 0..r {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let v = ints.g(i, j, k, l);
                    if v != T::zero() {
                        let _ = writeln!(out, "{:.17e} {} {} {} {}", v.as_f64(), i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..r {
        for j in 0..=i {
            let v = ints.h(i, j);
            if v != T::zero() {
                let _ = writeln!(out, "{:.17e} {} {} 0 0", v.as_f64(), i + 1, j + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.17e} 0 0 0 0", ints.core_energy.as_f64());
    out
}
