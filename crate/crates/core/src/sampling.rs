//! Random variates and paths: subordinator increments, discretized
//! subordinator paths with their grid inverse, and fractional Brownian motion.
//!
//! Every Monte Carlo sample gets its own [`RngStream`], keyed by
//! `(seed, stream_id)`, so results do not depend on how samples are
//! partitioned across threads.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::symbols::BernsteinSymbol;

type Symbol = BernsteinSymbol<f64>;

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A child stream for sample `index` of the batch tagged `tag`.
    pub fn child(seed: u64, tag: u64, index: u64) -> Self {
        Self::new(seed, stream_id(tag, index))
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(self)
    }

    /// Uniform on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        loop {
            let u: f64 = self.random();
            if u > 0.0 {
                return u;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Packs a batch tag and a sample index into one stream id.
pub fn stream_id(tag: u64, index: u64) -> u64 {
    debug_assert!(index < 1 << 40);
    (tag << 40) | index
}

/// Evaluates `f(i)` for `i in 0..n` in parallel, preserving order.
pub fn par_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Like [`par_collect`] for fallible work.
pub fn try_par_collect<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Standard positive α-stable variate with `E[e^{-λS}] = e^{-λ^α}`
/// (Kanter's representation, as used by Chambers–Mallows–Stuck).
pub fn positive_stable(alpha: f64, rng: &mut RngStream) -> f64 {
    let u = PI * rng.open01();
    let w = rng.exp1();
    // in logs: the factors under- or overflow separately for small α
    let ln_s = (alpha * u).sin().ln() - (u.sin()).ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - w.ln());
    ln_s.exp()
}

/// Exact draw of the inverse stable clock `L_t = (t / S)^α`.
pub fn inverse_stable_exact(alpha: f64, t: f64, rng: &mut RngStream) -> f64 {
    (t / positive_stable(alpha, rng)).powf(alpha)
}

#[derive(Clone, Debug)]
enum Kind {
    Linear,
    Stable { alpha: f64, scale: f64 },
    Gamma(Gamma<f64>),
    Tempered { alpha: f64, eta: f64, pieces: usize, scale: f64 },
    Telegraph { beta: f64, scale_2b: f64, scale_b: f64 },
}

/// Draws increments `H_{dt}` of a subordinator with a fixed step.
#[derive(Clone, Debug)]
pub struct IncrementSampler {
    symbol: Symbol,
    dt: f64,
    kind: Kind,
}

impl IncrementSampler {
    pub fn new(symbol: &Symbol, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("time step must be positive, got {dt}")));
        }
        let symbol = symbol.validated()?;
        let kind = match symbol {
            Symbol::Linear => Kind::Linear,
            Symbol::Stable { alpha } => Kind::Stable { alpha, scale: dt.powf(1.0 / alpha) },
            Symbol::Gamma { a, b } => Kind::Gamma(
                Gamma::new(a * dt, 1.0 / b).map_err(|e| Error::domain(format!("gamma increment: {e}")))?,
            ),
            Symbol::TemperedStable { alpha, eta } => {
                // mean acceptance e^{-h η^α} ≥ 0.1 on each piece h = dt / pieces
                let pieces = (dt * eta.powf(alpha) / 10f64.ln()).ceil().max(1.0) as usize;
                let h = dt / pieces as f64;
                Kind::Tempered { alpha, eta, pieces, scale: h.powf(1.0 / alpha) }
            }
            Symbol::TelegraphFractional { beta } => {
                Kind::Telegraph { beta, scale_2b: dt.powf(0.5 / beta), scale_b: dt.powf(1.0 / beta) }
            }
        };
        Ok(Self { symbol, dt, kind })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    fn raw(&self, rng: &mut RngStream) -> f64 {
        match &self.kind {
            Kind::Linear => self.dt,
            Kind::Stable { alpha, scale } => scale * positive_stable(*alpha, rng),
            Kind::Gamma(g) => g.sample(rng),
            Kind::Tempered { alpha, eta, pieces, scale } => {
                let mut total = 0.0;
                for _ in 0..*pieces {
                    loop {
                        let s = scale * positive_stable(*alpha, rng);
                        if rng.open01() < (-eta * s).exp() {
                            total += s;
                            break;
                        }
                    }
                }
                total
            }
            Kind::Telegraph { beta, scale_2b, scale_b } => {
                scale_2b * positive_stable(2.0 * beta, rng) + scale_b * positive_stable(*beta, rng)
            }
        }
    }

    /// One increment; a non-finite draw is retried once before failing.
    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        for _ in 0..2 {
            let x = self.raw(rng);
            if x.is_finite() && x >= 0.0 {
                return Ok(x);
            }
        }
        Err(Error::numerical(format!("non-finite increment for {} at dt = {}", self.symbol, self.dt)))
    }

    /// A single draw of `H_t` for an arbitrary horizon `t`.
    pub fn sample_at(symbol: &Symbol, t: f64, rng: &mut RngStream) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        IncrementSampler::new(symbol, t)?.sample(rng)
    }

    /// Steps the subordinator until it first exceeds `level` and returns the
    /// number of steps taken, i.e. the grid inverse `L_level / dt`.
    pub fn first_passage(&self, level: f64, rng: &mut RngStream, max_steps: u64) -> Result<u64> {
        let mut h = 0.0;
        let mut k = 0u64;
        while h <= level {
            if k >= max_steps {
                return Err(Error::PathExhausted { t: level, last: h });
            }
            h += self.sample(rng)?;
            k += 1;
        }
        Ok(k)
    }
}

/// Draws `H_{dt}` once.
pub fn sample_increment(symbol: &Symbol, dt: f64, rng: &mut RngStream) -> Result<f64> {
    IncrementSampler::new(symbol, dt)?.sample(rng)
}

/// Number of grid steps of width `dt` needed to reach `t_max`.
pub fn grid_steps(t_max: f64, dt: f64) -> usize {
    (t_max / dt - 1e-9).ceil().max(1.0) as usize
}

/// A subordinator path on the grid `0, dt, 2dt, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubordinatorPath {
    symbol: Symbol,
    dt: f64,
    values: Vec<f64>,
}

impl SubordinatorPath {
    pub fn from_values(symbol: Symbol, dt: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values[0] != 0.0 {
            return Err(Error::domain("a path needs at least two values starting at 0"));
        }
        if values.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::domain("path values must be nondecreasing"));
        }
        Ok(Self { symbol, dt, values })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Grid index of the first value strictly above `t`.
    pub fn inverse_index(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("inverse requires t ≥ 0, got {t}")));
        }
        let last = self.last();
        // values within 1e-12 relative of t count as equal, so grid
        // arithmetic like 0.1 + … + 0.1 does not decide the answer
        let level = t + 1e-12 * t.max(self.dt);
        if level >= last {
            return Err(Error::PathExhausted { t, last });
        }
        Ok(self.values.partition_point(|&h| h <= level))
    }

    /// Right-continuous grid inverse: the first grid time `s` with `H_s > t`.
    pub fn inverse_at(&self, t: f64) -> Result<f64> {
        Ok(self.time(self.inverse_index(t)?))
    }

    /// Writes the path as CSV with columns `s,H_s`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "H_s"])?;
        for (k, h) in self.values.iter().enumerate() {
            w.write_record([format!("{}", self.time(k)), format!("{h}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cumulative sums of increments on a uniform grid covering `[0, t_max]`.
pub fn simulate_path(symbol: &Symbol, t_max: f64, dt: f64, rng: &mut RngStream) -> Result<SubordinatorPath> {
    if !(dt > 0.0 && dt <= t_max) {
        return Err(Error::domain(format!("need 0 < dt ≤ t_max, got dt = {dt}, t_max = {t_max}")));
    }
    let sampler = IncrementSampler::new(symbol, dt)?;
    let n = grid_steps(t_max, dt);
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut h = 0.0;
    for _ in 0..n {
        h += sampler.sample(rng)?;
        values.push(h);
    }
    Ok(SubordinatorPath { symbol: *symbol, dt, values })
}

/// Fractional Brownian motion on the grid `0, dt, …, n·dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct FbmPath {
    pub hurst: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

/// Covariance of fBM: `(t^{2H} + s^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_covariance(hurst: f64, t: f64, s: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.abs().powf(h2) + s.abs().powf(h2) - (t - s).abs().powf(h2))
}

/// Largest grid handled by the Cholesky fallback.
pub const FBM_CHOLESKY_MAX: usize = 1024;

#[derive(Clone)]
enum FbmMethod {
    Circulant { sqrt_eig: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Cholesky(DMatrix<f64>),
}

/// Reusable fBM generator for a fixed grid: Davies–Harte circulant
/// embedding, with a Cholesky fallback if the embedding fails.
#[derive(Clone)]
pub struct FbmSampler {
    hurst: f64,
    n: usize,
    dt: f64,
    method: FbmMethod,
}

impl FbmSampler {
    pub fn new(hurst: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::domain(format!("Hurst exponent must lie in (0,1), got {hurst}")));
        }
        if n < 2 || !(t_max > 0.0) {
            return Err(Error::domain("fBM needs n ≥ 2 and t_max > 0"));
        }
        let dt = t_max / n as f64;
        // autocovariance of unit-step fractional Gaussian noise
        let h2 = 2.0 * hurst;
        let acf = |k: usize| {
            let k = k as f64;
            0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
        };
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| Complex::new(acf(if j <= n { j } else { m - j }), 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let max_eig = row.iter().map(|c| c.re).fold(0.0, f64::max);
        let method = if row.iter().all(|c| c.re >= -1e-10 * max_eig) {
            let sqrt_eig = row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
            FbmMethod::Circulant { sqrt_eig, fft }
        } else if n <= FBM_CHOLESKY_MAX {
            Self::cholesky(hurst, n)?
        } else {
            return Err(Error::numerical(format!(
                "circulant embedding failed for n = {n} and the Cholesky fallback is limited to n ≤ {FBM_CHOLESKY_MAX}"
            )));
        };
        Ok(Self { hurst, n, dt, method })
    }

    fn cholesky(hurst: f64, n: usize) -> Result<FbmMethod> {
        let cov = DMatrix::from_fn(n, n, |i, j| fbm_covariance(hurst, (i + 1) as f64, (j + 1) as f64));
        let chol = cov.cholesky().ok_or_else(|| Error::numerical("fBM covariance is not positive definite"))?;
        Ok(FbmMethod::Cholesky(chol.l()))
    }

    /// Forces the Cholesky method (used to cross-check the embedding).
    pub fn with_cholesky(hurst: f64, t_max: f64, n: usize) -> Result<Self> {
        if n > FBM_CHOLESKY_MAX {
            return Err(Error::domain(format!("Cholesky fBM limited to n ≤ {FBM_CHOLESKY_MAX}")));
        }
        let mut s = Self::new(hurst, t_max, n)?;
        s.method = Self::cholesky(hurst, n)?;
        Ok(s)
    }

    pub fn uses_circulant(&self) -> bool {
        matches!(self.method, FbmMethod::Circulant { .. })
    }

    pub fn sample(&self, rng: &mut RngStream) -> FbmPath {
        let scale = self.dt.powf(self.hurst);
        let mut values = Vec::with_capacity(self.n + 1);
        values.push(0.0);
        match &self.method {
            FbmMethod::Circulant { sqrt_eig, fft } => {
                let mut w: Vec<Complex<f64>> =
                    sqrt_eig.iter().map(|&s| Complex::new(s * rng.normal(), s * rng.normal())).collect();
                fft.process(&mut w);
                let mut b = 0.0;
                for c in &w[..self.n] {
                    b += scale * c.re;
                    values.push(b);
                }
            }
            FbmMethod::Cholesky(l) => {
                // the Cholesky factor is built on unit-step positions
                let z = nalgebra::DVector::from_fn(self.n, |_, _| rng.normal());
                let x = l * z;
                values.extend(x.iter().map(|v| v * scale));
            }
        }
        FbmPath { hurst: self.hurst, dt: self.dt, values }
    }
}

/// One fBM path with `n` steps on `[0, t_max]`.
pub fn sample_fbm(hurst: f64, t_max: f64, n: usize, rng: &mut RngStream) -> Result<FbmPath> {
    Ok(FbmSampler::new(hurst, t_max, n)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_numbers_and_streams_differ() {
        let mut a = RngStream::new(5, 9);
        let mut b = RngStream::new(5, 9);
        let mut c = RngStream::new(5, 10);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn linear_increment_and_path() {
        let mut rng = RngStream::new(0, 0);
        assert_eq!(sample_increment(&Symbol::Linear, 0.3, &mut rng).unwrap(), 0.3);
        let p = simulate_path(&Symbol::Linear, 1.0, 0.25, &mut rng).unwrap();
        assert_eq!(p.values(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn linear_inverse_is_next_grid_point() {
        let mut rng = RngStream::new(0, 0);
        let p = simulate_path(&Symbol::Linear, 2.0, 0.1, &mut rng).unwrap();
        assert!((p.inverse_at(0.7).unwrap() - 0.8).abs() < 1e-12);
        assert!((p.inverse_at(0.0).unwrap() - 0.1).abs() < 1e-12);
        assert!(matches!(p.inverse_at(2.5), Err(Error::PathExhausted { .. })));
    }

    #[test]
    fn stable_paths_strictly_increase() {
        let s = Symbol::stable(0.5).unwrap();
        for i in 0..1000 {
            let mut rng = RngStream::child(1, 0, i);
            let p = simulate_path(&s, 1.0, 0.01, &mut rng).unwrap();
            assert!(p.values().windows(2).all(|w| w[1] > w[0]));
            assert!((p.inverse_at(0.0).unwrap() - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_consistency_on_grid() {
        let s = Symbol::gamma(2.0, 1.0).unwrap();
        let mut rng = RngStream::new(2, 0);
        let p = simulate_path(&s, 5.0, 0.05, &mut rng).unwrap();
        for k in 1..p.values().len() - 1 {
            let h = p.values()[k];
            let eps = 1e-9 * p.dt();
            assert!(p.inverse_at((h - eps).max(0.0)).unwrap() <= p.time(k) + 1e-12);
        }
    }

    #[test]
    fn tempered_subdivides_large_steps() {
        let s = Symbol::tempered(0.5, 4.0).unwrap();
        let sampler = IncrementSampler::new(&s, 10.0).unwrap();
        match sampler.kind {
            Kind::Tempered { pieces, .. } => assert_eq!(pieces, 9),
            _ => unreachable!(),
        }
    }

    #[test]
    fn fbm_starts_at_zero_and_has_right_length() {
        let mut rng = RngStream::new(3, 0);
        let p = sample_fbm(0.3, 2.0, 64, &mut rng).unwrap();
        assert_eq!(p.values.len(), 65);
        assert_eq!(p.values[0], 0.0);
        assert!((p.dt - 2.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn circulant_and_cholesky_agree_in_variance() {
        let n = 16;
        let circ = FbmSampler::new(0.7, 1.0, n).unwrap();
        let chol = FbmSampler::with_cholesky(0.7, 1.0, n).unwrap();
        assert!(circ.uses_circulant());
        assert!(!chol.uses_circulant());
        let m = 20_000;
        let var = |s: &FbmSampler, tag: u64| {
            (0..m).map(|i| s.sample(&mut RngStream::child(4, tag, i)).values[n].powi(2)).sum::<f64>() / m as f64
        };
        // Var(B_1) = 1, sampling SE ≈ √2/√m ≈ 0.01
        assert!((var(&circ, 0) - 1.0).abs() < 0.05);
        assert!((var(&chol, 1) - 1.0).abs() < 0.05);
    }

    #[test]
    fn path_csv_has_header_and_rows() {
        let p = SubordinatorPath::from_values(Symbol::Linear, 0.5, vec![0.0, 0.5, 1.0]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "s,H_s\n0,0\n0.5,0.5\n1,1\n");
    }

    #[test]
    fn rejects_bad_paths_and_steps() {
        assert!(SubordinatorPath::from_values(Symbol::Linear, 0.1, vec![0.0, 0.2, 0.1]).is_err());
        assert!(SubordinatorPath::from_values(Symbol::Linear, 0.1, vec![0.0]).is_err());
        assert!(IncrementSampler::new(&Symbol::Linear, 0.0).is_err());
        assert!(sample_fbm(1.0, 1.0, 8, &mut RngStream::new(0, 0)).is_err());
    }
}
