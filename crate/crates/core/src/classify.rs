//! Delayed / rushed verdicts: a time change delays `X` when the mean lifetime
//! of the time-changed process exceeds the base mean lifetime, and rushes it
//! when it falls below.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{welch_interval, MonteCarloEstimate};
use crate::formulas;
use crate::symbols::BernsteinSymbol;

type Symbol = BernsteinSymbol<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Label {
    Delayed,
    Rushed,
    Inconclusive,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Delayed => "delayed",
            Label::Rushed => "rushed",
            Label::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Base,
    Changed,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    MonteCarlo {
        mean_base: f64,
        se_base: f64,
        mean_changed: f64,
        se_changed: f64,
        confidence: f64,
        lower: f64,
        upper: f64,
    },
    Analytic {
        criterion: String,
        value: f64,
        threshold: f64,
    },
    InfiniteMean {
        which: Which,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub label: Label,
    pub evidence: Evidence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    fn new(label: Label, evidence: Evidence) -> Self {
        Self { label, evidence, note: None }
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

/// Compares two lifetime samples with a Welch interval on the difference of
/// means. Infinite-mean diagnostics decide before any interval is formed.
pub fn classify_mc(base: &[f64], changed: &[f64], confidence: f64) -> Result<Verdict> {
    if base.is_empty() || changed.is_empty() {
        return Err(Error::domain("both lifetime samples must be nonempty"));
    }
    classify_estimates(&MonteCarloEstimate::from_samples(base), &MonteCarloEstimate::from_samples(changed), confidence)
}

/// [`classify_mc`] on precomputed summaries.
pub fn classify_estimates(base: &MonteCarloEstimate, changed: &MonteCarloEstimate, confidence: f64) -> Result<Verdict> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!("confidence must lie in (0,1), got {confidence}")));
    }
    match (base.infinite_mean, changed.infinite_mean) {
        (true, true) => {
            return Ok(Verdict::new(Label::Inconclusive, Evidence::InfiniteMean { which: Which::Both })
                .with_note("both mean lifetimes appear infinite"))
        }
        (false, true) => return Ok(Verdict::new(Label::Delayed, Evidence::InfiniteMean { which: Which::Changed })),
        (true, false) => return Ok(Verdict::new(Label::Rushed, Evidence::InfiniteMean { which: Which::Base })),
        (false, false) => {}
    }
    let w = welch_interval(base, changed, confidence);
    let label = if w.lower > 0.0 {
        Label::Delayed
    } else if w.upper < 0.0 {
        Label::Rushed
    } else {
        Label::Inconclusive
    };
    Ok(Verdict::new(
        label,
        Evidence::MonteCarlo {
            mean_base: base.mean,
            se_base: base.std_error,
            mean_changed: changed.mean,
            se_changed: changed.std_error,
            confidence,
            lower: w.lower,
            upper: w.upper,
        },
    ))
}

/// Verdict for the inverse clock of `symbol` from its drift coefficient:
/// `E[ζ^L] = Φ'(0) E[ζ]` whenever the base mean is finite.
pub fn classify_inverse_analytic(symbol: &Symbol) -> Verdict {
    let c = symbol.drift_coefficient();
    let label = if c > 1.0 {
        Label::Delayed
    } else if c < 1.0 {
        Label::Rushed
    } else {
        Label::Inconclusive
    };
    let v = Verdict::new(
        label,
        Evidence::Analytic { criterion: "drift_coefficient".into(), value: c, threshold: 1.0 },
    );
    if label == Label::Inconclusive {
        v.with_note("coefficient exactly 1: the process runs with its natural velocity")
    } else {
        v
    }
}

/// Verdict for the α-stable subordinator clock on the ball `B_r ⊂ ℝ^d`,
/// comparing the subordinated and Brownian mean exit times at `x`.
pub fn classify_stable_ball(alpha: f64, d: usize, r: f64, x: &[f64]) -> Result<Verdict> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("α must lie in (0,1], got {alpha}")));
    }
    let n2: f64 = x.iter().map(|v| v * v).sum();
    if n2.sqrt() >= r {
        return Err(Error::domain("start point must lie strictly inside the ball"));
    }
    let changed = formulas::stable_ball_exit(alpha, d, r, x)?;
    let base = formulas::brownian_ball_exit(d, r, x)?;
    // α = 1 is the identity clock; the two formulas differ only by rounding
    let label = if alpha == 1.0 {
        Label::Inconclusive
    } else if changed > base {
        Label::Delayed
    } else if changed < base {
        Label::Rushed
    } else {
        Label::Inconclusive
    };
    Ok(Verdict::new(
        label,
        Evidence::Analytic { criterion: "stable_ball_exit_vs_brownian".into(), value: changed, threshold: base },
    ))
}

/// Verdict for the gamma subordinator clock `H` with symbol `a ln(1 + λ/b)`.
///
/// `H_{L_t} ≥ t` and Wald's identity give `E[L_t] ≥ (b/a) t`, so `E[ζ^H] =
/// E[L_ζ] > E[ζ]` whenever `a < b`. For `a ≥ b` the bound says nothing and
/// the verdict is left to Monte Carlo.
pub fn classify_gamma_subordinator(a: f64, b: f64) -> Result<Verdict> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain("gamma parameters must be positive"));
    }
    let ratio = b / a;
    let evidence = Evidence::Analytic { criterion: "wald_lower_bound".into(), value: ratio, threshold: 1.0 };
    if ratio > 1.0 {
        Ok(Verdict::new(Label::Delayed, evidence))
    } else {
        Ok(Verdict::new(Label::Inconclusive, evidence).with_note("a ≥ b: resolve by Monte Carlo"))
    }
}

/// Diffusion regime from the log-log slope of the mean squared displacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionType {
    Sub,
    Super,
    Natural,
}

impl fmt::Display for DiffusionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiffusionType::Sub => "sub",
            DiffusionType::Super => "super",
            DiffusionType::Natural => "natural",
        })
    }
}

/// Slopes within `tol` of 1 count as natural diffusion.
pub fn diffusion_type(slope: f64, tol: f64) -> DiffusionType {
    if slope < 1.0 - tol {
        DiffusionType::Sub
    } else if slope > 1.0 + tol {
        DiffusionType::Super
    } else {
        DiffusionType::Natural
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_analytic_examples() {
        assert_eq!(classify_inverse_analytic(&Symbol::gamma(1.0, 2.0).unwrap()).label, Label::Rushed);
        assert_eq!(classify_inverse_analytic(&Symbol::gamma(2.0, 1.0).unwrap()).label, Label::Delayed);
        assert_eq!(classify_inverse_analytic(&Symbol::tempered(0.5, 4.0).unwrap()).label, Label::Rushed);
        let v = classify_inverse_analytic(&Symbol::tempered(0.9, 0.1).unwrap());
        assert_eq!(v.label, Label::Delayed);
        match v.evidence {
            Evidence::Analytic { value, .. } => assert!((value - 0.9 * 0.1f64.powf(-0.1)).abs() < 1e-14),
            _ => unreachable!(),
        }
        assert_eq!(classify_inverse_analytic(&Symbol::stable(0.5).unwrap()).label, Label::Delayed);
        let lin = classify_inverse_analytic(&Symbol::Linear);
        assert_eq!(lin.label, Label::Inconclusive);
        assert!(lin.note.is_some());
    }

    #[test]
    fn stable_ball_regions() {
        assert_eq!(classify_stable_ball(0.6, 1, 1.0, &[0.0]).unwrap().label, Label::Delayed);
        assert_eq!(classify_stable_ball(0.6, 1, 3.0, &[0.0]).unwrap().label, Label::Rushed);
        assert_eq!(classify_stable_ball(0.6, 1, 3.0, &[2.5]).unwrap().label, Label::Delayed);
        assert!(classify_stable_ball(0.6, 1, 3.0, &[3.0]).is_err());
        assert_eq!(classify_stable_ball(1.0, 2, 3.0, &[1.0, 0.5]).unwrap().label, Label::Inconclusive);
        assert!(classify_stable_ball(1.2, 1, 3.0, &[0.0]).is_err());
    }

    #[test]
    fn exit_times_coincide_at_core_radius() {
        let rho: f64 = formulas::rho_threshold(0.6, 1).unwrap();
        let star = formulas::rho_star(3.0, rho).unwrap();
        let s = formulas::stable_ball_exit(0.6, 1, 3.0, &[star]).unwrap();
        let b = formulas::brownian_ball_exit(1, 3.0, &[star]).unwrap();
        assert!(((s - b) / b).abs() < 1e-8);
    }

    #[test]
    fn identical_samples_are_inconclusive() {
        let xs: Vec<f64> = (0..500).map(|i| 0.1 + (i % 17) as f64 * 0.05).collect();
        assert_eq!(classify_mc(&xs, &xs, 0.95).unwrap().label, Label::Inconclusive);
    }

    #[test]
    fn infinite_means_short_circuit() {
        let finite: Vec<f64> = (0..500).map(|i| 1.0 + (i % 7) as f64).collect();
        let mut heavy = finite.clone();
        heavy.push(f64::INFINITY);
        let v = classify_mc(&finite, &heavy, 0.95).unwrap();
        assert_eq!(v.label, Label::Delayed);
        assert_eq!(v.evidence, Evidence::InfiniteMean { which: Which::Changed });
        assert_eq!(classify_mc(&heavy, &finite, 0.95).unwrap().label, Label::Rushed);
        assert_eq!(classify_mc(&heavy, &heavy, 0.95).unwrap().label, Label::Inconclusive);
    }

    #[test]
    fn shifted_samples_are_separated() {
        let base: Vec<f64> = (0..1000).map(|i| 1.0 + (i % 10) as f64 * 0.1).collect();
        let up: Vec<f64> = base.iter().map(|x| x + 0.5).collect();
        assert_eq!(classify_mc(&base, &up, 0.95).unwrap().label, Label::Delayed);
        assert_eq!(classify_mc(&up, &base, 0.95).unwrap().label, Label::Rushed);
        assert!(classify_mc(&base, &[], 0.95).is_err());
        assert!(classify_mc(&base, &up, 1.0).is_err());
    }

    #[test]
    fn gamma_subordinator_criterion() {
        assert_eq!(classify_gamma_subordinator(0.5, 1.0).unwrap().label, Label::Delayed);
        assert_eq!(classify_gamma_subordinator(2.0, 1.0).unwrap().label, Label::Inconclusive);
    }

    #[test]
    fn verdict_json() {
        let v = classify_inverse_analytic(&Symbol::gamma(1.0, 2.0).unwrap());
        let j = serde_json::to_string(&v).unwrap();
        assert_eq!(
            j,
            r#"{"label":"Rushed","evidence":{"kind":"analytic","criterion":"drift_coefficient","value":0.5,"threshold":1.0}}"#
        );
    }

    #[test]
    fn diffusion_regimes() {
        assert_eq!(diffusion_type(0.6, 0.05), DiffusionType::Sub);
        assert_eq!(diffusion_type(1.4, 0.05), DiffusionType::Super);
        assert_eq!(diffusion_type(1.01, 0.05), DiffusionType::Natural);
    }
}
