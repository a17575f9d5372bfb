//! Closed forms the Monte Carlo estimates are checked against.
//!
//! Functions whose moment diverges return `+∞` rather than an error, so
//! callers can compare against an infinite-mean diagnostic.

use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::quad;
use crate::real::Real;
use crate::specfun::{gamma_fn, ln_gamma, rgamma};
use crate::symbols::BernsteinSymbol;

fn open_unit<T: Real>(name: &str, alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in (0,1), got {alpha}")))
    }
}

fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

fn squared_norm<T: Real>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum()
}

/// `E[H_t^γ] = Γ(1 - γ/α) / Γ(1 - γ) · t^{γ/α}` for the α-stable subordinator;
/// `+∞` when `γ ≥ α`.
pub fn stable_moment_h<T: Real>(alpha: T, gamma: T, t: T) -> Result<T> {
    open_unit("α", alpha)?;
    positive("t", t)?;
    if gamma >= alpha {
        return Ok(T::infinity());
    }
    Ok(gamma_fn(T::one() - gamma / alpha)? * rgamma(T::one() - gamma) * t.powf(gamma / alpha))
}

/// `E[L_t] = t^α / Γ(α + 1)` for the inverse α-stable subordinator.
pub fn mean_inverse_stable<T: Real>(alpha: T, t: T) -> Result<T> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::domain(format!("α must lie in (0,1], got {alpha}")));
    }
    if t < T::zero() {
        return Err(Error::domain("t must be nonnegative"));
    }
    Ok(t.powf(alpha) * rgamma(alpha + T::one()))
}

/// `E[H_t^γ] = Γ(at + γ) / (b^γ Γ(at))` for the gamma subordinator.
pub fn gamma_moment_h<T: Real>(a: T, b: T, gamma: T, t: T) -> Result<T> {
    positive("a", a)?;
    positive("b", b)?;
    positive("t", t)?;
    let at = a * t;
    if !(at + gamma > T::zero()) {
        return Err(Error::domain(format!("gamma moment needs at + γ > 0, got {}", at + gamma)));
    }
    Ok((ln_gamma(at + gamma) - ln_gamma(at) - gamma * b.ln()).exp())
}

/// Mean exit time from the ball `B_r ⊂ ℝ^d` of Brownian motion (generator `Δ`)
/// time-changed by the α-stable subordinator:
/// `4^{-α} / Γ(α+1) · Γ(d/2) / Γ(α + d/2) · (r² - |x|²)^α`.
pub fn stable_ball_exit<T: Real>(alpha: T, d: usize, r: T, x: &[T]) -> Result<T> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::domain(format!("α must lie in (0,1], got {alpha}")));
    }
    positive("r", r)?;
    let gap = r * r - squared_norm(x);
    if gap < T::zero() {
        return Err(Error::domain("start point lies outside the ball"));
    }
    let half_d = T::from_index(d) * T::lit(0.5);
    let c = T::lit(4.0).powf(-alpha) * rgamma(alpha + T::one()) * gamma_fn(half_d)? * rgamma(alpha + half_d);
    Ok(c * gap.powf(alpha))
}

/// Mean exit time from `B_r` of Brownian motion with generator `Δ`: `(r² - |x|²) / (2d)`.
pub fn brownian_ball_exit<T: Real>(d: usize, r: T, x: &[T]) -> Result<T> {
    positive("r", r)?;
    let gap = r * r - squared_norm(x);
    if gap < T::zero() {
        return Err(Error::domain("start point lies outside the ball"));
    }
    Ok(gap / T::from_index(2 * d))
}

fn ln_rho<T: Real>(alpha: T, d: usize) -> T {
    let half_d = T::from_index(d) * T::lit(0.5);
    let num = ln_gamma(T::one() + half_d) - ln_gamma(alpha + T::one()) - ln_gamma(alpha + half_d);
    T::LN_2() + num / (T::lit(2.0) - T::lit(2.0) * alpha)
}

/// Radius at which the stable-subordinated and Brownian mean exit times from
/// a centered ball coincide:
/// `ρ(α, d) = 2 (Γ(1 + d/2) / (Γ(α+1) Γ(α + d/2)))^{1/(2-2α)}`.
pub fn rho_threshold<T: Real>(alpha: T, d: usize) -> Result<T> {
    open_unit("α", alpha)?;
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    Ok(ln_rho(alpha, d).exp())
}

/// `sup_{α ∈ (0,1)} ρ(α, d)`, found numerically.
///
/// Golden-section search on `[0.01, 0.999]`; when the maximizer sits at the
/// right end, the `α ↑ 1` limit is extrapolated from `α = 1 - h` by
/// Richardson steps in `h`.
pub fn rho_sup<T: Real>(d: usize) -> Result<T> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let f = |a: f64| ln_rho(a, d);
    let (mut lo, mut hi) = (0.01_f64, 0.999_f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = f(0.5 * (lo + hi)).max(f(0.01)).max(f(0.999));
    if 0.999 - hi < 1e-6 {
        // Richardson table on h = 1e-2 · 2^{-k}; the error expands in powers of h
        let hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let mut table: Vec<f64> = hs.iter().map(|&h| f(1.0 - h)).collect();
        for level in 1..table.len() {
            let p = 2f64.powi(level as i32);
            for k in (level..table.len()).rev() {
                table[k] = (p * table[k] - table[k - 1]) / (p - 1.0);
            }
        }
        best = best.max(*table.last().unwrap());
    }
    Ok(T::lit(best.exp()))
}

/// `ρ* = √(r² - ρ²)`, the radius of the rushed core of `B_r`.
pub fn rho_star<T: Real>(r: T, rho: T) -> Result<T> {
    positive("r", r)?;
    if !(rho < r) {
        return Err(Error::domain(format!("ρ = {rho} ≥ r = {r}: the whole ball is delayed")));
    }
    Ok((r * r - rho * rho).sqrt())
}

/// `κ = E[ζ^{-α}] / Γ(1 - α)` for the α-stable subordinator.
pub fn killing_measure_stable<T: Real>(alpha: T, moment_neg_alpha: T) -> Result<T> {
    open_unit("α", alpha)?;
    Ok(moment_neg_alpha * rgamma(T::one() - alpha))
}

/// `κ = E[Π̄(ζ)]`, estimated as the sample mean of the Lévy tail at the
/// lifetime draws. Zero for the linear clock.
pub fn killing_measure<T: Real>(symbol: &BernsteinSymbol<T>, zeta: &[T]) -> Result<T> {
    if !symbol.has_levy_measure() {
        return Ok(T::zero());
    }
    if zeta.is_empty() {
        return Err(Error::domain("killing measure needs at least one lifetime"));
    }
    let mut sum = T::zero();
    for &z in zeta {
        sum = sum + symbol.levy_tail(z)?;
    }
    Ok(sum / T::from_index(zeta.len()))
}

/// Long-time asymptote `t / (α η^{α-1})` of `E[L_t]` for the tempered clock.
pub fn tempered_mean_inverse_asymptote<T: Real>(alpha: T, eta: T, t: T) -> Result<T> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::domain(format!("α must lie in (0,1], got {alpha}")));
    }
    positive("η", eta)?;
    Ok(t / (alpha * eta.powf(alpha - T::one())))
}

/// `E[ζ^γ]` for the exit time of Brownian motion (generator `Δ`) from a
/// half-line at distance `c`. The exit time is `c²/4 · H_1` with `H` the
/// ½-stable subordinator, which gives `4^{-γ} Γ(½ - γ) / √π · c^{2γ}`;
/// `+∞` for `γ ≥ ½`.
pub fn halfline_moment<T: Real>(gamma: T, c: T) -> Result<T> {
    positive("c", c)?;
    let half = T::lit(0.5);
    if gamma >= half {
        return Ok(T::infinity());
    }
    Ok(T::lit(4.0).powf(-gamma) * gamma_fn(half - gamma)? / T::PI().sqrt() * c.powf(T::lit(2.0) * gamma))
}

/// The same moment with the constant `2^{-γ}` in place of `4^{-γ}`. It does
/// not match the exit-time density and is kept only for side-by-side reports.
pub fn halfline_moment_alt_constant<T: Real>(gamma: T, c: T) -> Result<T> {
    Ok(halfline_moment(gamma, c)? * T::lit(2.0).powf(gamma))
}

/// `E_x[τ^γ]` for the exit time of Brownian motion (generator `Δ`) from the
/// interval `(-r, r)`, by quadrature of its Laplace transform
/// `E_x[e^{-sτ}] = cosh(x√s) / cosh(r√s)`:
///
/// * `0 < γ < 1`: `γ/Γ(1-γ) ∫ (1 - E_x[e^{-sτ}]) s^{-γ-1} ds`,
/// * `γ < 0`: `1/Γ(-γ) ∫ E_x[e^{-sτ}] s^{-γ-1} ds`.
///
/// With `γ = α` and a division by `Γ(1 + α)` this is the mean lifetime of the
/// subordinate killed process under the α-stable clock.
pub fn interval_exit_moment<T: Real>(gamma: T, r: T, x: T) -> Result<T> {
    positive("r", r)?;
    let ax = x.abs();
    if !(ax < r) {
        return Err(Error::domain(format!("start point {x} must lie strictly inside (-{r}, {r})")));
    }
    if gamma == T::zero() {
        return Ok(T::one());
    }
    if gamma == T::one() {
        return Ok((r * r - x * x) * T::lit(0.5));
    }
    if gamma > T::one() {
        return Err(Error::domain(format!("γ must be below 1, got {gamma}")));
    }
    let two = T::lit(2.0);
    // E e^{-sτ}, and 1 - E e^{-sτ} without cancellation at small s
    let laplace = |u: T| (-(r - ax) * u).exp() * (T::one() + (-two * ax * u).exp()) / (T::one() + (-two * r * u).exp());
    let survival = |u: T| {
        if r * u < T::lit(20.0) {
            two * ((r + ax) * u * T::lit(0.5)).sinh() * ((r - ax) * u * T::lit(0.5)).sinh() / (r * u).cosh()
        } else {
            T::one() - laplace(u)
        }
    };
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(100.0));
    let q = if gamma > T::zero() {
        // the tail of 1 - E e^{-sτ} is algebraic; integrate its constant part
        // exactly past `cut` and keep only the decaying transform there
        let cut = (r - ax).powi(-2);
        // s = v^{1/(1-γ)} absorbs the s^{-γ} singularity at the origin
        let e = T::one() / (T::one() - gamma);
        let head = quad::tanh_sinh(
            |v: T, _, _| {
                let s = v.powf(e);
                let ratio = if s > T::zero() { survival(s.sqrt()) / s } else { (r * r - x * x) * T::lit(0.5) };
                ratio * e
            },
            T::zero(),
            cut.powf(T::one() - gamma),
            tol,
        );
        let tail = quad::exp_sinh(|s: T, _| laplace(s.sqrt()) * s.powf(-gamma - T::one()), cut, tol);
        (head.value + cut.powf(-gamma) / gamma - tail.value) * gamma * rgamma(T::one() - gamma)
    } else {
        let b = -gamma;
        let q = quad::exp_sinh(|s: T, _| laplace(s.sqrt()) * s.powf(b - T::one()), T::zero(), tol);
        q.value * rgamma(b)
    };
    if q.is_finite() {
        Ok(q)
    } else {
        Err(Error::numerical("interval exit moment quadrature did not converge"))
    }
}

/// A named closed-form value with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm<T> {
    pub name: String,
    pub parameters: BTreeMap<String, T>,
    pub value: T,
}

impl<T: Real> Serialize for ClosedForm<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let params: BTreeMap<&str, f64> = self.parameters.iter().map(|(k, v)| (k.as_str(), v.as_f64())).collect();
        let value = self.value.as_f64();
        let mut st = s.serialize_struct("ClosedForm", 3)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("parameters", &params)?;
        // JSON has no infinity; a diverging value is written as null
        st.serialize_field("value", &value.is_finite().then_some(value))?;
        st.end()
    }
}

/// Names accepted by [`closed_form`], with their parameters.
pub const CLOSED_FORMS: &[(&str, &[&str])] = &[
    ("stable_moment_h", &["alpha", "gamma", "t"]),
    ("mean_inverse_stable", &["alpha", "t"]),
    ("gamma_moment_h", &["a", "b", "gamma", "t"]),
    ("stable_ball_exit", &["alpha", "d", "r", "x"]),
    ("brownian_ball_exit", &["d", "r", "x"]),
    ("rho_threshold", &["alpha", "d"]),
    ("rho_sup", &["d"]),
    ("rho_star", &["r", "rho"]),
    ("killing_measure_stable", &["alpha", "moment"]),
    ("tempered_mean_inverse_asymptote", &["alpha", "eta", "t"]),
    ("halfline_moment", &["gamma", "c"]),
    ("halfline_moment_alt_constant", &["gamma", "c"]),
    ("interval_exit_moment", &["gamma", "r", "x"]),
];

/// Evaluates a closed form by name. The start point of the ball formulas is
/// `(x, 0, …, 0)`.
pub fn closed_form(name: &str, parameters: &BTreeMap<String, f64>) -> Result<ClosedForm<f64>> {
    let (_, keys) = CLOSED_FORMS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown closed form '{name}'")))?;
    let get = |k: &str| {
        parameters.get(k).copied().ok_or_else(|| Error::Config(format!("closed form '{name}' needs parameter '{k}'")))
    };
    let dim = |k: &str| -> Result<usize> {
        let v = get(k)?;
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::Config(format!("'{k}' must be a positive integer, got {v}")))
        }
    };
    let point = |d: usize| -> Result<Vec<f64>> {
        let mut x = vec![0.0; d];
        x[0] = get("x")?;
        Ok(x)
    };
    let value = match name {
        "stable_moment_h" => stable_moment_h(get("alpha")?, get("gamma")?, get("t")?)?,
        "mean_inverse_stable" => mean_inverse_stable(get("alpha")?, get("t")?)?,
        "gamma_moment_h" => gamma_moment_h(get("a")?, get("b")?, get("gamma")?, get("t")?)?,
        "stable_ball_exit" => {
            let d = dim("d")?;
            stable_ball_exit(get("alpha")?, d, get("r")?, &point(d)?)?
        }
        "brownian_ball_exit" => {
            let d = dim("d")?;
            brownian_ball_exit(d, get("r")?, &point(d)?)?
        }
        "rho_threshold" => rho_threshold(get("alpha")?, dim("d")?)?,
        "rho_sup" => rho_sup(dim("d")?)?,
        "rho_star" => rho_star(get("r")?, get("rho")?)?,
        "killing_measure_stable" => killing_measure_stable(get("alpha")?, get("moment")?)?,
        "tempered_mean_inverse_asymptote" => tempered_mean_inverse_asymptote(get("alpha")?, get("eta")?, get("t")?)?,
        "halfline_moment" => halfline_moment(get("gamma")?, get("c")?)?,
        "halfline_moment_alt_constant" => halfline_moment_alt_constant(get("gamma")?, get("c")?)?,
        "interval_exit_moment" => interval_exit_moment(get("gamma")?, get("r")?, get("x")?)?,
        _ => unreachable!(),
    };
    let parameters = keys.iter().filter_map(|k| parameters.get(*k).map(|v| (k.to_string(), *v))).collect();
    Ok(ClosedForm { name: name.to_string(), parameters, value })
}
