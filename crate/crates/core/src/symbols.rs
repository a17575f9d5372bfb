//! Bernstein symbols `Φ(λ) = ∫ (1 - e^{-λz}) Π(dz)`: Laplace exponents of
//! the subordinators used as random clocks.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::specfun::{exp_integral_e1, gamma_fn, upper_incomplete_gamma};

/// The closed family of symbols the toolkit understands.
///
/// Build values through the checked constructors ([`Self::stable`],
/// [`Self::gamma`], ...) or by parsing the config syntax
/// (`stable(0.5)`, `gamma(2,1)`, `tempered(0.5,4)`, `telegraph(0.3)`, `linear`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BernsteinSymbol<T> {
    /// `Φ(λ) = λ`, the identity clock `H_t = L_t = t`.
    Linear,
    /// `Φ(λ) = λ^α`, `α ∈ (0, 1)`.
    Stable { alpha: T },
    /// `Φ(λ) = a ln(1 + λ/b)`.
    Gamma { a: T, b: T },
    /// `Φ(λ) = (λ + η)^α - η^α`.
    TemperedStable { alpha: T, eta: T },
    /// `Φ(λ) = λ^{2β} + λ^β`, `β ∈ (0, 1/2)`.
    TelegraphFractional { beta: T },
}

impl<T: Real> BernsteinSymbol<T> {
    pub fn linear() -> Self {
        Self::Linear
    }

    pub fn stable(alpha: T) -> Result<Self> {
        Self::Stable { alpha }.validated()
    }

    pub fn gamma(a: T, b: T) -> Result<Self> {
        Self::Gamma { a, b }.validated()
    }

    pub fn tempered(alpha: T, eta: T) -> Result<Self> {
        Self::TemperedStable { alpha, eta }.validated()
    }

    pub fn telegraph(beta: T) -> Result<Self> {
        Self::TelegraphFractional { beta }.validated()
    }

    /// Checks the parameter ranges of the variant.
    pub fn validated(self) -> Result<Self> {
        let open01 = |x: T| x > T::zero() && x < T::one();
        let ok = match self {
            Self::Linear => true,
            Self::Stable { alpha } => open01(alpha),
            Self::Gamma { a, b } => a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite(),
            Self::TemperedStable { alpha, eta } => open01(alpha) && eta > T::zero() && eta.is_finite(),
            Self::TelegraphFractional { beta } => beta > T::zero() && beta < T::lit(0.5),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::domain(format!("parameters of {self} out of range")))
        }
    }

    /// `Φ(λ)` for `λ ≥ 0`.
    pub fn evaluate(&self, lambda: T) -> Result<T> {
        if !(lambda >= T::zero()) {
            return Err(Error::domain(format!("Φ evaluated at λ = {lambda} < 0")));
        }
        if lambda == T::zero() {
            return Ok(T::zero());
        }
        Ok(match *self {
            Self::Linear => lambda,
            Self::Stable { alpha } => lambda.powf(alpha),
            Self::Gamma { a, b } => a * (lambda / b).ln_1p(),
            Self::TemperedStable { alpha, eta } => {
                // η^α ((1 + λ/η)^α - 1) without cancellation for small λ
                eta.powf(alpha) * (alpha * (lambda / eta).ln_1p()).exp_m1()
            }
            Self::TelegraphFractional { beta } => lambda.powf(T::lit(2.0) * beta) + lambda.powf(beta),
        })
    }

    /// `lim_{λ↓0} Φ(λ)/λ = Φ'(0)`; `+∞` when the limit diverges.
    pub fn drift_coefficient(&self) -> T {
        match *self {
            Self::Linear => T::one(),
            Self::Stable { .. } | Self::TelegraphFractional { .. } => T::infinity(),
            Self::Gamma { a, b } => a / b,
            Self::TemperedStable { alpha, eta } => alpha * eta.powf(alpha - T::one()),
        }
    }

    pub fn has_levy_measure(&self) -> bool {
        !matches!(self, Self::Linear)
    }

    /// Tail of the Lévy measure `Π̄(z) = Π((z, ∞))` for `z > 0`.
    pub fn levy_tail(&self, z: T) -> Result<T> {
        if !(z > T::zero()) {
            return Err(Error::domain(format!("Lévy tail evaluated at z = {z} ≤ 0")));
        }
        match *self {
            Self::Linear => Err(Error::NoLevyMeasure(self.to_string())),
            Self::Stable { alpha } => Ok(stable_tail(alpha, z)?),
            Self::Gamma { a, b } => Ok(a * exp_integral_e1(b * z)?),
            Self::TemperedStable { alpha, eta } => {
                // α/Γ(1-α) ∫_z^∞ e^{-ηu} u^{-α-1} du = α η^α Γ(-α, ηz) / Γ(1-α)
                let scale = alpha * eta.powf(alpha) / gamma_fn(T::one() - alpha)?;
                Ok(scale * upper_incomplete_gamma(-alpha, eta * z)?)
            }
            Self::TelegraphFractional { beta } => {
                Ok(stable_tail(T::lit(2.0) * beta, z)? + stable_tail(beta, z)?)
            }
        }
    }

    /// Power-law pieces `(c, p)` with `Π̄(z) = Σ c z^{-p}`, for the symbols
    /// whose tail is a finite sum of powers.
    pub fn power_tail_terms(&self) -> Option<Vec<(T, T)>> {
        let term = |p: T| -> Option<(T, T)> { Some((T::one() / gamma_fn(T::one() - p).ok()?, p)) };
        match *self {
            Self::Stable { alpha } => Some(vec![term(alpha)?]),
            Self::TelegraphFractional { beta } => Some(vec![term(T::lit(2.0) * beta)?, term(beta)?]),
            _ => None,
        }
    }

    /// Short config-style name (`"stable"`, `"gamma"`, ...).
    pub fn family(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Stable { .. } => "stable",
            Self::Gamma { .. } => "gamma",
            Self::TemperedStable { .. } => "tempered",
            Self::TelegraphFractional { .. } => "telegraph",
        }
    }

    /// Converts the parameters into another scalar type.
    pub fn cast<U: Real>(&self) -> BernsteinSymbol<U> {
        let c = |x: T| U::lit(x.as_f64());
        match *self {
            Self::Linear => BernsteinSymbol::Linear,
            Self::Stable { alpha } => BernsteinSymbol::Stable { alpha: c(alpha) },
            Self::Gamma { a, b } => BernsteinSymbol::Gamma { a: c(a), b: c(b) },
            Self::TemperedStable { alpha, eta } => BernsteinSymbol::TemperedStable { alpha: c(alpha), eta: c(eta) },
            Self::TelegraphFractional { beta } => BernsteinSymbol::TelegraphFractional { beta: c(beta) },
        }
    }
}

fn stable_tail<T: Real>(alpha: T, z: T) -> Result<T> {
    Ok(z.powf(-alpha) / gamma_fn(T::one() - alpha)?)
}

impl<T: Real> fmt::Display for BernsteinSymbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear => write!(f, "linear"),
            Self::Stable { alpha } => write!(f, "stable({alpha})"),
            Self::Gamma { a, b } => write!(f, "gamma({a},{b})"),
            Self::TemperedStable { alpha, eta } => write!(f, "tempered({alpha},{eta})"),
            Self::TelegraphFractional { beta } => write!(f, "telegraph({beta})"),
        }
    }
}

impl<T: Real> FromStr for BernsteinSymbol<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse symbol `{s}`"));
        if s == "linear" {
            return Ok(Self::Linear);
        }
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim();
        let args = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>().map(T::lit).map_err(|_| bad()))
            .collect::<Result<Vec<T>>>()?;
        let sym = match (name, args.as_slice()) {
            ("stable", [alpha]) => Self::Stable { alpha: *alpha },
            ("gamma", [a, b]) => Self::Gamma { a: *a, b: *b },
            ("tempered", [alpha, eta]) => Self::TemperedStable { alpha: *alpha, eta: *eta },
            ("telegraph", [beta]) => Self::TelegraphFractional { beta: *beta },
            _ => return Err(bad()),
        };
        sym.validated().map_err(|e| Error::Config(e.to_string()))
    }
}

impl<T: Real> Serialize for BernsteinSymbol<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    type S = BernsteinSymbol<f64>;

    fn all_with_measure() -> Vec<S> {
        vec![
            S::stable(0.5).unwrap(),
            S::stable(0.8).unwrap(),
            S::gamma(1.0, 1.0).unwrap(),
            S::gamma(2.0, 0.5).unwrap(),
            S::tempered(0.5, 1.0).unwrap(),
            S::tempered(0.3, 4.0).unwrap(),
            S::telegraph(0.3).unwrap(),
        ]
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(S::stable(0.5).unwrap().evaluate(4.0).unwrap(), 2.0);
        assert_relative_eq!(S::gamma(1.0, 1.0).unwrap().evaluate(std::f64::consts::E - 1.0).unwrap(), 1.0);
        assert_relative_eq!(S::tempered(0.5, 1.0).unwrap().evaluate(3.0).unwrap(), 1.0, max_relative = 1e-15);
        for s in all_with_measure().into_iter().chain([S::Linear]) {
            assert_eq!(s.evaluate(0.0).unwrap(), 0.0);
        }
        assert!(S::Linear.evaluate(-1.0).is_err());
    }

    #[test]
    fn constructors_reject_out_of_range() {
        assert!(S::stable(1.0).is_err());
        assert!(S::stable(0.0).is_err());
        assert!(S::gamma(-1.0, 1.0).is_err());
        assert!(S::tempered(0.5, 0.0).is_err());
        assert!(S::telegraph(0.5).is_err());
    }

    #[test]
    fn drift_examples() {
        assert_eq!(S::gamma(2.0, 1.0).unwrap().drift_coefficient(), 2.0);
        assert!(S::stable(0.5).unwrap().drift_coefficient().is_infinite());
        assert_relative_eq!(S::tempered(0.5, 4.0).unwrap().drift_coefficient(), 0.25);
        assert_eq!(S::Linear.drift_coefficient(), 1.0);
    }

    #[test]
    fn drift_matches_numerical_limit() {
        for s in [S::gamma(2.0, 1.0).unwrap(), S::tempered(0.5, 4.0).unwrap(), S::tempered(0.9, 0.1).unwrap(), S::Linear] {
            let d = s.drift_coefficient();
            let lam = 1e-8;
            assert!((s.evaluate(lam).unwrap() / lam - d).abs() < 1e-6, "{s}");
            // the sequence approaches monotonically from below (concavity)
            let seq: Vec<f64> = (2..=8).map(|k| s.evaluate(10f64.powi(-k)).unwrap() * 10f64.powi(k)).collect();
            assert!(seq.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
        let s = S::stable(0.5).unwrap();
        assert!(s.evaluate(1e-8).unwrap() / 1e-8 > 1e3);
    }

    #[test]
    fn tail_examples() {
        // oracle: 1/Γ(0.5) = 1/√π
        assert_relative_eq!(
            S::stable(0.5).unwrap().levy_tail(1.0).unwrap(),
            0.564_189_583_547_756_3,
            max_relative = 1e-13
        );
        assert_relative_eq!(S::gamma(1.0, 1.0).unwrap().levy_tail(1.0).unwrap(), 0.219_383_934_395_520_27, max_relative = 1e-13);
        assert!(matches!(S::Linear.levy_tail(1.0), Err(Error::NoLevyMeasure(_))));
        assert!(S::stable(0.5).unwrap().levy_tail(0.0).is_err());
    }

    #[test]
    fn stable_tail_recovered_by_laplace_inversion() {
        // Invert Φ(λ)/λ = λ^{α-1} along the collapsed Bromwich contour:
        // Π̄(z) = (1/π) ∫_0^∞ e^{-rz} Im[(r e^{-iπ})^{α-1}] dr.
        let alpha = 0.5f64;
        let z = 1.0;
        let im = -(std::f64::consts::PI * (alpha - 1.0)).sin();
        let q = quad::exp_sinh(|r: f64, _| (-r * z).exp() * r.powf(alpha - 1.0) * im, 0.0, 1e-13);
        let inverted = q.value / std::f64::consts::PI;
        assert_relative_eq!(inverted, 0.564_189_583_547_756_3, max_relative = 1e-10);
        assert_relative_eq!(S::stable(alpha).unwrap().levy_tail(z).unwrap(), inverted, max_relative = 1e-10);
    }

    #[test]
    fn tail_laplace_identity() {
        for s in all_with_measure() {
            for &lam in &[0.5, 1.0, 2.0, 5.0] {
                let q = quad::exp_sinh(|z: f64, _| (-lam * z).exp() * s.levy_tail(z).unwrap_or(0.0), 0.0, 1e-12);
                let target = s.evaluate(lam).unwrap() / lam;
                assert!(((q.value - target) / target).abs() < 1e-6, "{s} λ={lam}: {} vs {target}", q.value);
            }
        }
    }

    #[test]
    fn tempered_tail_matches_direct_quadrature() {
        let s = S::tempered(0.5, 1.0).unwrap();
        for &z in &[0.01, 0.5, 2.0, 8.0] {
            let q = quad::exp_sinh(|u: f64, _| (-u).exp() * u.powf(-1.5), z, 1e-13);
            let direct = 0.5 / gamma_fn(0.5).unwrap() * q.value;
            assert_relative_eq!(s.levy_tail(z).unwrap(), direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn parse_and_display() {
        let s: S = "gamma(2, 1)".parse().unwrap();
        assert_eq!(s, S::gamma(2.0, 1.0).unwrap());
        assert_eq!(s.to_string(), "gamma(2,1)");
        assert_eq!("linear".parse::<S>().unwrap(), S::Linear);
        assert!("stable(1.5)".parse::<S>().is_err());
        assert!("cauchy(1)".parse::<S>().is_err());
        assert!("stable(0.5".parse::<S>().is_err());
    }

    #[test]
    fn single_precision_symbol() {
        let s = BernsteinSymbol::<f32>::stable(0.5).unwrap();
        assert!((s.evaluate(4.0).unwrap() - 2.0).abs() < 1e-6);
        assert!((s.levy_tail(1.0).unwrap() - 0.564_189_6).abs() < 1e-5);
    }

    fn arb_symbol() -> impl Strategy<Value = S> {
        prop_oneof![
            Just(S::Linear),
            (0.05f64..0.95).prop_map(|a| S::stable(a).unwrap()),
            (0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, b)| S::gamma(a, b).unwrap()),
            (0.05f64..0.95, 0.1f64..5.0).prop_map(|(a, e)| S::tempered(a, e).unwrap()),
            (0.05f64..0.45).prop_map(|b| S::telegraph(b).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn nondecreasing_and_concave(s in arb_symbol(), l1 in 0.0f64..10.0, gap1 in 0.01f64..5.0, gap2 in 0.01f64..5.0) {
            let l2 = l1 + gap1;
            let l3 = l2 + gap2;
            let (f1, f2, f3) = (s.evaluate(l1).unwrap(), s.evaluate(l2).unwrap(), s.evaluate(l3).unwrap());
            prop_assert!(f2 >= f1 && f3 >= f2);
            let interp = f1 + (f3 - f1) * (l2 - l1) / (l3 - l1);
            prop_assert!(f2 >= interp - 1e-12 * f3.abs().max(1.0));
        }

        #[test]
        fn display_round_trips(s in arb_symbol()) {
            let back: S = s.to_string().parse().unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
