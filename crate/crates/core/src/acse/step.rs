use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Real;

/// Energy increase tolerated when accepting a step.
pub const DESCENT_SLACK: f64 = 1e-12;

/// How the step scalar `ε` is chosen each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonStrategy<T> {
    Fixed(T),
    QuadraticTrustRegion,
}

impl<T: Real> std::str::FromStr for EpsilonStrategy<T> {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "trust" {
            return Ok(EpsilonStrategy::QuadraticTrustRegion);
        }
        if let Some(v) = s.strip_prefix("fixed:") {
            let x: f64 = v
                .parse()
                .map_err(|_| format!("fixed step '{v}' is not a number"))?;
            if !x.is_finite() {
                return Err(format!("fixed step '{v}' is not finite"));
            }
            return Ok(EpsilonStrategy::Fixed(T::lit(x)));
        }
        Err(format!("unknown epsilon strategy '{s}' (expected fixed:VAL|trust)"))
    }
}

/// Trust radius kept in units of the direction's largest element, so the
/// sampled step is `t = radius / ‖D‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegion<T> {
    pub radius: T,
}

impl<T: Real> Default for TrustRegion<T> {
    fn default() -> Self {
        TrustRegion {
            radius: T::lit(0.5),
        }
    }
}

/// Chosen step and the energy it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepChoice<T> {
    pub epsilon: T,
    pub energy: T,
}

/// Picks `ε` for the direction whose largest element is `scale`.
///
/// `energy(ε)` evaluates the energy after the trial step; `e0` is the energy
/// at `ε = 0`. The trust-region variant samples `{0, t, 2t}`, fits a
/// parabola and takes its minimizer clamped to `[-2t, 2t]` (the lower
/// endpoint when the fit is not convex). A step that would raise the energy
/// by more than [`DESCENT_SLACK`] falls back to the best sampled point. The
/// radius doubles when the step lands on the boundary and halves when it is
/// shorter than `t / 2`.
pub fn choose_epsilon<T, F>(
    strategy: EpsilonStrategy<T>,
    scale: T,
    trust: &mut TrustRegion<T>,
    e0: T,
    mut energy: F,
) -> Result<StepChoice<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let t = match strategy {
        EpsilonStrategy::Fixed(eps) => {
            let e = if eps == T::zero() { e0 } else { energy(eps)? };
            return Ok(StepChoice { epsilon: eps, energy: e });
        }
        EpsilonStrategy::QuadraticTrustRegion => {
            if !(scale > T::zero()) {
                return Ok(StepChoice { epsilon: T::zero(), energy: e0 });
            }
            trust.radius / scale
        }
    };
    let two = T::lit(2.0);
    let e1 = energy(t)?;
    let e2 = energy(two * t)?;
    let curvature = (e2 - two * e1 + e0) / (two * t * t);
    let slope = (T::lit(4.0) * e1 - T::lit(3.0) * e0 - e2) / (two * t);
    let model = |x: T| e0 + slope * x + curvature * x * x;
    let bound = two * t;
    let candidate = if curvature > T::zero() {
        (-slope / (two * curvature)).max(-bound).min(bound)
    } else if model(-bound) < model(bound) {
        -bound
    } else {
        bound
    };

    let slack = T::lit(DESCENT_SLACK);
    let sampled = [(T::zero(), e0), (t, e1), (two * t, e2)];
    let known = sampled.iter().find(|(x, _)| *x == candidate).map(|p| p.1);
    let e_cand = match known {
        Some(e) => e,
        None => energy(candidate)?,
    };
    let choice = if e_cand <= e0 + slack {
        StepChoice { epsilon: candidate, energy: e_cand }
    } else {
        let (x, e) = sampled
            .iter()
            .copied()
            .fold(sampled[0], |best, p| if p.1 < best.1 { p } else { best });
        StepChoice { epsilon: x, energy: e }
    };

    let mag = choice.epsilon.abs();
    if choice.epsilon == T::zero() {
        trust.radius *= T::lit(0.5);
    } else if mag >= bound * T::lit(1.0 - 1e-12) {
        trust.radius *= two;
    } else if mag < T::lit(0.5) * t {
        trust.radius *= T::lit(0.5);
    }
    Ok(choice)
}
