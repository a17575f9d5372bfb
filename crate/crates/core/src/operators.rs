//! The generalized Caputo operator `D^Φ_t u(t) = ∫_0^t u'(s) Π̄(t - s) ds`
//! on uniformly sampled functions.
//!
//! Product integration: on each cell `u'` is modelled as its exact cell
//! average (the secant of `u`) plus a linear correction through the sampled
//! derivatives, and the kernel moments `∫ Π̄` and `∫ (z - mid) Π̄` over each
//! cell are computed once. They are exact for power-law tails and come from
//! adaptive quadrature otherwise.

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::real::Real;
use crate::symbols::BernsteinSymbol;

/// Samples `u(0), u(dt), …` with derivatives on the same grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction<T> {
    dt: T,
    values: Vec<T>,
    derivative: Vec<T>,
}

impl<T: Real> SampledFunction<T> {
    /// Derivatives by central differences, one-sided at the ends.
    pub fn new(dt: T, values: Vec<T>) -> Result<Self> {
        Self::check(dt, values.len())?;
        let n = values.len();
        let two_dt = dt + dt;
        let mut derivative = Vec::with_capacity(n);
        derivative.push((values[1] - values[0]) / dt);
        for k in 1..n - 1 {
            derivative.push((values[k + 1] - values[k - 1]) / two_dt);
        }
        derivative.push((values[n - 1] - values[n - 2]) / dt);
        Ok(Self { dt, values, derivative })
    }

    pub fn with_derivative(dt: T, values: Vec<T>, derivative: Vec<T>) -> Result<Self> {
        Self::check(dt, values.len())?;
        if derivative.len() != values.len() {
            return Err(Error::domain("values and derivatives must have the same length"));
        }
        Ok(Self { dt, values, derivative })
    }

    /// Samples `u` (and `u'` when given) on `0, dt, …, n·dt`.
    pub fn from_fn(u: impl Fn(T) -> T, du: Option<&dyn Fn(T) -> T>, dt: T, n: usize) -> Result<Self> {
        let grid: Vec<T> = (0..=n).map(|k| T::from_index(k) * dt).collect();
        let values = grid.iter().map(|&t| u(t)).collect();
        match du {
            Some(du) => Self::with_derivative(dt, values, grid.iter().map(|&t| du(t)).collect()),
            None => Self::new(dt, values),
        }
    }

    fn check(dt: T, len: usize) -> Result<()> {
        if !(dt > T::zero()) {
            return Err(Error::domain("grid step must be positive"));
        }
        if len < 3 {
            return Err(Error::domain("a sampled function needs at least three points"));
        }
        Ok(())
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn derivative(&self) -> &[T] {
        &self.derivative
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid index of `t`, which must lie on the grid.
    pub fn index_of(&self, t: T) -> Result<usize> {
        let k = (t / self.dt).round();
        if t < T::zero() || (t - k * self.dt).abs() > T::lit(1e-6) * self.dt {
            return Err(Error::domain(format!("t = {t} is not a grid point")));
        }
        let k = k.to_usize().unwrap_or(usize::MAX);
        if k >= self.values.len() {
            return Err(Error::domain(format!("t = {t} lies beyond the sampled range")));
        }
        Ok(k)
    }
}

/// Per-cell kernel moments on `[k·dt, (k+1)·dt]`:
/// `m0[k] = ∫ Π̄`, `mc[k] = ∫ ((k + ½)dt - z) Π̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMoments<T> {
    pub m0: Vec<T>,
    pub mc: Vec<T>,
}

pub fn kernel_moments<T: Real>(symbol: &BernsteinSymbol<T>, dt: T, cells: usize) -> Result<KernelMoments<T>> {
    if !symbol.has_levy_measure() {
        return Err(Error::NoLevyMeasure(symbol.to_string()));
    }
    let mut m0 = Vec::with_capacity(cells);
    let mut mc = Vec::with_capacity(cells);
    if let Some(terms) = symbol.power_tail_terms() {
        // ∫_A^B z^{-p} dz and ∫_A^B z^{1-p} dz in closed form
        let prim = |e: T, z: T| if z == T::zero() { T::zero() } else { z.powf(e) / e };
        for k in 0..cells {
            let a = T::from_index(k) * dt;
            let b = a + dt;
            let mid = a + T::lit(0.5) * dt;
            let (mut s0, mut sc) = (T::zero(), T::zero());
            for &(c, p) in &terms {
                let i0 = prim(T::one() - p, b) - prim(T::one() - p, a);
                let i1 = prim(T::lit(2.0) - p, b) - prim(T::lit(2.0) - p, a);
                s0 = s0 + c * i0;
                sc = sc + c * (mid * i0 - i1);
            }
            m0.push(s0);
            mc.push(sc);
        }
        return Ok(KernelMoments { m0, mc });
    }
    let tail = |z: T| symbol.levy_tail(z).unwrap_or(T::nan());
    let rel = T::lit(1e-12).max(T::lit(100.0) * T::epsilon());
    let fail = || Error::numerical(format!("kernel quadrature failed for {symbol}"));
    for k in 0..cells {
        let a = T::from_index(k) * dt;
        let mid = a + T::lit(0.5) * dt;
        let (v0, vc) = if k == 0 {
            // integrable singularity of Π̄ at 0
            let q0 = quad::tanh_sinh(|_, da, _| tail(da), T::zero(), dt, rel);
            let qc = quad::tanh_sinh(|_, da, _| (mid - da) * tail(da), T::zero(), dt, rel);
            if !(q0.converged && qc.converged) {
                return Err(fail());
            }
            (q0.value, qc.value)
        } else {
            let tol = Tolerance { abs: T::min_positive_value(), rel, max_intervals: 200 };
            let q0 = quad::adaptive(tail, a, a + dt, tol);
            let qc = quad::adaptive(|z| (mid - z) * tail(z), a, a + dt, tol);
            (q0.value, qc.value)
        };
        if !(v0.is_finite() && vc.is_finite()) {
            return Err(fail());
        }
        m0.push(v0);
        mc.push(vc);
    }
    Ok(KernelMoments { m0, mc })
}

// Cell data of u': (exact cell average, slope of the linear correction).
fn cell_model<T: Real>(u: &SampledFunction<T>, j: usize) -> (T, T) {
    let secant = (u.values[j + 1] - u.values[j]) / u.dt;
    let slope = (u.derivative[j + 1] - u.derivative[j]) / u.dt;
    (secant, if slope.is_finite() { slope } else { T::zero() })
}

fn convolve<T: Real>(u: &SampledFunction<T>, km: &KernelMoments<T>, n: usize) -> T {
    // cell j = [s_j, s_{j+1}] sits at lag k = n - j - 1; s - mid_j = mid_k - z
    (0..n)
        .map(|j| {
            let (secant, slope) = cell_model(u, j);
            let k = n - j - 1;
            secant * km.m0[k] + slope * km.mc[k]
        })
        .sum()
}

/// `D^Φ_t u` at the grid point `t`. For the linear symbol this is `u'(t)`.
pub fn d_phi<T: Real>(symbol: &BernsteinSymbol<T>, u: &SampledFunction<T>, t: T) -> Result<T> {
    let n = u.index_of(t)?;
    if matches!(symbol, BernsteinSymbol::Linear) {
        return Ok(u.derivative[n]);
    }
    if n == 0 {
        return Ok(T::zero());
    }
    let km = kernel_moments(symbol, u.dt, n)?;
    Ok(convolve(u, &km, n))
}

/// `D^Φ_t u` at every grid point.
pub fn d_phi_grid<T: Real>(symbol: &BernsteinSymbol<T>, u: &SampledFunction<T>) -> Result<Vec<T>> {
    if matches!(symbol, BernsteinSymbol::Linear) {
        return Ok(u.derivative.clone());
    }
    let cells = u.len() - 1;
    let km = kernel_moments(symbol, u.dt, cells)?;
    Ok((0..=cells).map(|n| convolve(u, &km, n)).collect())
}

/// Grid step used by [`d_phi_of_symbol`].
pub const SYMBOL_GRID_STEP: f64 = 1e-4;

/// `D^Φ_λ Φ(λ)` for `Φ(λ) = λ^α` and the stable kernel of the same order,
/// evaluated at `λ`; analytically it is the constant `Γ(α + 1)`.
pub fn d_phi_of_symbol_at<T: Real>(alpha: T, lambda: T) -> Result<T> {
    let symbol = BernsteinSymbol::stable(alpha)?;
    let dt = T::lit(SYMBOL_GRID_STEP);
    let n = (lambda / dt).round().to_usize().ok_or_else(|| Error::domain("λ must be positive"))?;
    if n < 2 {
        return Err(Error::domain("λ must span at least two grid steps"));
    }
    let du = move |x: T| alpha * x.powf(alpha - T::one());
    let u = SampledFunction::from_fn(|x: T| x.powf(alpha), Some(&du), dt, n)?;
    d_phi(&symbol, &u, T::from_index(n) * dt)
}

/// [`d_phi_of_symbol_at`] at `λ = 1`.
pub fn d_phi_of_symbol<T: Real>(alpha: T) -> Result<T> {
    d_phi_of_symbol_at(alpha, T::one())
}

/// Trapezoidal `∫_0^{n·dt} e^{-λt} f(t) dt` over grid samples.
pub fn laplace_on_grid<T: Real>(values: &[T], dt: T, lambda: T) -> T {
    let n = values.len();
    let w = |k: usize| (-lambda * T::from_index(k) * dt).exp() * values[k];
    let inner: T = (1..n - 1).map(w).sum();
    dt * (inner + T::lit(0.5) * (w(0) + w(n - 1)))
}

/// Trapezoidal `∫ |f|^p` over grid samples.
pub fn lp_norm_pow<T: Real>(values: &[T], dt: T, p: T) -> T {
    let n = values.len();
    let w = |k: usize| values[k].abs().powf(p);
    let inner: T = (1..n - 1).map(w).sum();
    dt * (inner + T::lit(0.5) * (w(0) + w(n - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma_fn;

    type S = BernsteinSymbol<f64>;

    #[test]
    fn constant_function_has_zero_derivative() {
        let u = SampledFunction::new(0.01, vec![3.0; 101]).unwrap();
        for s in [S::stable(0.4).unwrap(), S::gamma(2.0, 1.0).unwrap(), S::tempered(0.5, 2.0).unwrap()] {
            assert_eq!(d_phi(&s, &u, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn caputo_of_identity() {
        let u = SampledFunction::from_fn(|t: f64| t, Some(&|_| 1.0), 1e-4, 10_000).unwrap();
        let v = d_phi(&S::stable(0.5).unwrap(), &u, 1.0).unwrap();
        assert!((v - 1.0 / gamma_fn(1.5).unwrap()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn caputo_of_square_is_second_order() {
        // D^β t² = 2 t^{2-β} / Γ(3-β)
        let b = 0.3;
        let exact = 2.0 / gamma_fn(3.0 - b).unwrap();
        let err = |dt: f64| {
            let n = (1.0 / dt).round() as usize;
            let u = SampledFunction::from_fn(|t: f64| t * t, Some(&|t| 2.0 * t), dt, n).unwrap();
            (d_phi(&S::stable(b).unwrap(), &u, 1.0).unwrap() - exact).abs()
        };
        assert!(err(1e-2) < 1e-10, "{}", err(1e-2));
        let u = SampledFunction::from_fn(|t: f64| t.powi(3), Some(&|t| 3.0 * t * t), 0.01, 100).unwrap();
        let exact3 = 6.0 / gamma_fn(4.0 - b).unwrap();
        let e1 = (d_phi(&S::stable(b).unwrap(), &u, 1.0).unwrap() - exact3).abs();
        let u = SampledFunction::from_fn(|t: f64| t.powi(3), Some(&|t| 3.0 * t * t), 0.005, 200).unwrap();
        let e2 = (d_phi(&S::stable(b).unwrap(), &u, 1.0).unwrap() - exact3).abs();
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn linear_symbol_is_ordinary_derivative() {
        let u = SampledFunction::from_fn(|t: f64| t * t, Some(&|t| 2.0 * t), 0.01, 300).unwrap();
        assert_eq!(d_phi(&S::Linear, &u, 2.0).unwrap(), 4.0);
        assert_eq!(d_phi_grid(&S::Linear, &u).unwrap(), u.derivative().to_vec());
    }

    #[test]
    fn zero_time_and_off_grid() {
        let u = SampledFunction::from_fn(|t: f64| t, None, 0.1, 10).unwrap();
        assert_eq!(d_phi(&S::stable(0.5).unwrap(), &u, 0.0).unwrap(), 0.0);
        assert!(d_phi(&S::stable(0.5).unwrap(), &u, 0.55).is_err());
        assert!(d_phi(&S::stable(0.5).unwrap(), &u, 5.0).is_err());
        assert!(SampledFunction::new(0.1, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn central_differences() {
        let u = SampledFunction::new(0.5, vec![0.0, 0.25, 1.0, 2.25]).unwrap();
        assert_eq!(u.derivative(), &[0.5, 1.0, 2.0, 2.5]);
    }

    #[test]
    fn grid_and_pointwise_agree() {
        let s = S::gamma(2.0, 1.0).unwrap();
        let u = SampledFunction::from_fn(|t: f64| (-t).exp(), Some(&|t: f64| -(-t).exp()), 0.05, 40).unwrap();
        let g = d_phi_grid(&s, &u).unwrap();
        for k in [1, 7, 40] {
            assert!((g[k] - d_phi(&s, &u, k as f64 * 0.05).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn power_kernel_moments_match_quadrature() {
        let s = S::stable(0.4).unwrap();
        let exact = kernel_moments(&s, 0.1, 5).unwrap();
        // same moments through the generic quadrature path
        let tail = |z: f64| s.levy_tail(z).unwrap();
        for k in 1..5 {
            let a = k as f64 * 0.1;
            let q = quad::adaptive(tail, a, a + 0.1, Tolerance::relative(1e-13));
            assert!((q.value - exact.m0[k]).abs() < 1e-12);
            let mid = a + 0.05;
            let q = quad::adaptive(|z| (mid - z) * tail(z), a, a + 0.1, Tolerance::relative(1e-13));
            assert!((q.value - exact.mc[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_precision_operator() {
        let u = SampledFunction::from_fn(|t: f32| t, Some(&|_| 1.0), 1e-2, 100).unwrap();
        let v = d_phi(&BernsteinSymbol::stable(0.5f32).unwrap(), &u, 1.0).unwrap();
        assert!((v - std::f32::consts::FRAC_2_SQRT_PI).abs() < 1e-4, "{v}");
    }
}
