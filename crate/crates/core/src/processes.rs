//! Base processes, their exit times, and the lifetimes of the time-changed
//! processes `X∘H` (subordinator clock) and `X∘L` (inverse clock).

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::MonteCarloEstimate;
use crate::sampling::{self, IncrementSampler, RngStream};
use crate::symbols::BernsteinSymbol;

type Symbol = BernsteinSymbol<f64>;

/// Default number of Euler steps allowed for one exit time.
pub const DEFAULT_STEP_BUDGET: u64 = 100_000_000;

/// Killing region of the base process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `(-∞, a)`
    HalfLine { a: f64 },
    Ball { r: f64, d: usize },
    Annulus { r_inner: f64, r_outer: f64, d: usize },
}

impl Domain {
    pub fn half_line(a: f64) -> Result<Self> {
        Self::HalfLine { a }.validated()
    }

    pub fn ball(r: f64, d: usize) -> Result<Self> {
        Self::Ball { r, d }.validated()
    }

    pub fn annulus(r_inner: f64, r_outer: f64, d: usize) -> Result<Self> {
        Self::Annulus { r_inner, r_outer, d }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::HalfLine { a } => a.is_finite(),
            Self::Ball { r, d } => r > 0.0 && r.is_finite() && d >= 1,
            Self::Annulus { r_inner, r_outer, d } => {
                r_inner > 0.0 && r_inner < r_outer && r_outer.is_finite() && d >= 1
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::domain(format!("invalid domain {self:?}")))
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::HalfLine { .. } => 1,
            Self::Ball { d, .. } | Self::Annulus { d, .. } => d,
        }
    }

    /// Distance to the boundary, positive inside and negative outside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match *self {
            Self::HalfLine { a } => a - x[0],
            Self::Ball { r, .. } => r - norm(x),
            Self::Annulus { r_inner, r_outer, .. } => {
                let n = norm(x);
                (n - r_inner).min(r_outer - n)
            }
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!("start point has dimension {}, domain has {}", x.len(), self.dim())));
        }
        if self.signed_distance(x) < 0.0 {
            return Err(Error::domain(format!("start point {x:?} lies outside {self:?}")));
        }
        Ok(())
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The process being time-changed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseProcess {
    /// Brownian motion with per-coordinate variance `sigma2 · t`;
    /// `sigma2 = 2` gives generator `Δ`.
    BrownianDelta { d: usize, sigma2: f64 },
    Fbm { hurst: f64 },
}

impl BaseProcess {
    /// Brownian motion with generator `Δ`.
    pub fn brownian(d: usize) -> Self {
        Self::BrownianDelta { d, sigma2: 2.0 }
    }

    pub fn brownian_with_variance(d: usize, sigma2: f64) -> Result<Self> {
        if d == 0 || !(sigma2 > 0.0) {
            return Err(Error::domain("Brownian motion needs d ≥ 1 and sigma2 > 0"));
        }
        Ok(Self::BrownianDelta { d, sigma2 })
    }

    pub fn fbm(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::domain(format!("Hurst exponent must lie in (0,1), got {hurst}")));
        }
        Ok(Self::Fbm { hurst })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::BrownianDelta { d, .. } => d,
            Self::Fbm { .. } => 1,
        }
    }
}

/// How a lifetime draw was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LifetimeMethod {
    /// Exact draw from the exit-time law.
    Exact,
    /// Euler scheme with a Brownian-bridge crossing correction.
    Euler,
    /// Base process run at the jump times of the subordinator.
    Composed,
    /// Grid inverse of a simulated subordinator path.
    Grid,
    /// Subordinator sampled at the base lifetime.
    Subordinated,
    /// Base process observed only at the subordinator's grid values and
    /// killed at the first observation outside the domain.
    Skeleton,
}

impl fmt::Display for LifetimeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Exact => "exact",
            Self::Euler => "euler",
            Self::Composed => "composed",
            Self::Grid => "grid",
            Self::Subordinated => "subordinated",
            Self::Skeleton => "skeleton",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LifetimeSample {
    pub value: f64,
    pub method: LifetimeMethod,
}

impl LifetimeSample {
    pub fn new(value: f64, method: LifetimeMethod) -> Self {
        Self { value, method }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Values of a batch of lifetime draws.
pub fn values(samples: &[LifetimeSample]) -> Vec<f64> {
    samples.iter().map(|s| s.value).collect()
}

/// Writes lifetime draws as CSV with columns `sample_index,value,method,flags`.
pub fn write_lifetimes_csv<W: Write>(samples: &[LifetimeSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_index", "value", "method", "flags"])?;
    for (i, s) in samples.iter().enumerate() {
        let flags = if s.is_infinite() { "infinite" } else { "" };
        w.write_record([i.to_string(), format!("{}", s.value), s.method.to_string(), flags.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Exact exit time of `x + B` from `(-∞, a)` for generator `Δ`:
/// `ζ = (a - x)² / (2 Z²)`.
pub fn exit_halfline_exact(x: f64, a: f64, rng: &mut RngStream) -> Result<LifetimeSample> {
    if x > a {
        return Err(Error::domain(format!("start point {x} lies outside (-∞, {a})")));
    }
    let c = a - x;
    if c == 0.0 {
        return Ok(LifetimeSample::new(0.0, LifetimeMethod::Exact));
    }
    loop {
        let z = rng.normal();
        if z != 0.0 {
            return Ok(LifetimeSample::new(c * c / (2.0 * z * z), LifetimeMethod::Exact));
        }
    }
}

/// Euler walker for killed Brownian motion with a bridge crossing test.
///
/// Exit times are reported at the midpoint of the step in which the
/// crossing was detected, which removes the leading half-step bias.
#[derive(Clone, Debug)]
pub struct EulerWalker {
    domain: Domain,
    sd: f64,
    sigma2: f64,
    dt: f64,
    pos: Vec<f64>,
    dist: f64,
    steps: u64,
    budget: u64,
    exit: Option<f64>,
}

impl EulerWalker {
    pub fn new(domain: Domain, sigma2: f64, x: &[f64], dt: f64) -> Result<Self> {
        domain.check_point(x)?;
        if !(dt > 0.0) || !(sigma2 > 0.0) {
            return Err(Error::domain("Euler walker needs dt > 0 and sigma2 > 0"));
        }
        let dist = domain.signed_distance(x);
        Ok(Self {
            domain,
            sd: (sigma2 * dt).sqrt(),
            sigma2,
            dt,
            pos: x.to_vec(),
            dist,
            steps: 0,
            budget: DEFAULT_STEP_BUDGET,
            exit: if dist == 0.0 { Some(0.0) } else { None },
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn exit_time(&self) -> Option<f64> {
        self.exit
    }

    fn step(&mut self, rng: &mut RngStream) -> Result<()> {
        if self.steps >= self.budget {
            return Err(Error::StepBudget(self.budget));
        }
        for p in self.pos.iter_mut() {
            *p += self.sd * rng.normal();
        }
        self.steps += 1;
        let d1 = self.domain.signed_distance(&self.pos);
        let crossed = d1 <= 0.0 || {
            // probability that the bridge touched the boundary in between
            let p = (-2.0 * self.dist * d1 / (self.sigma2 * self.dt)).exp();
            rng.open01() < p
        };
        if crossed {
            self.exit = Some(self.time() - 0.5 * self.dt);
        }
        self.dist = d1;
        Ok(())
    }

    /// Steps until the walker has been killed or has reached time `t`.
    /// Returns the exit time if it is at most `t`.
    pub fn advance_to(&mut self, t: f64, rng: &mut RngStream) -> Result<Option<f64>> {
        while self.exit.is_none() && self.time() < t {
            self.step(rng)?;
        }
        Ok(self.exit.filter(|&e| e <= t))
    }

    /// Runs to the exit time.
    pub fn run(&mut self, rng: &mut RngStream) -> Result<f64> {
        while self.exit.is_none() {
            self.step(rng)?;
        }
        Ok(self.exit.unwrap())
    }
}

/// Exit time of Brownian motion with per-coordinate variance `sigma2·t`
/// from `domain`, by the Euler scheme with bridge correction.
pub fn exit_euler(domain: &Domain, sigma2: f64, x: &[f64], dt: f64, rng: &mut RngStream) -> Result<LifetimeSample> {
    let t = EulerWalker::new(*domain, sigma2, x, dt)?.run(rng)?;
    Ok(LifetimeSample::new(t, LifetimeMethod::Euler))
}

/// Exit time from a ball for generator `Δ`.
pub fn exit_ball_euler(x: &[f64], domain: &Domain, dt: f64, rng: &mut RngStream) -> Result<LifetimeSample> {
    if !matches!(domain, Domain::Ball { .. }) {
        return Err(Error::domain("exit_ball_euler expects a ball"));
    }
    exit_euler(domain, 2.0, x, dt, rng)
}

/// One draw of the base lifetime: exact on a half-line, Euler otherwise.
pub fn base_lifetime(
    base: &BaseProcess,
    domain: &Domain,
    x: &[f64],
    dt: f64,
    rng: &mut RngStream,
) -> Result<LifetimeSample> {
    match (*base, *domain) {
        (BaseProcess::BrownianDelta { sigma2: 2.0, .. }, Domain::HalfLine { a }) => {
            domain.check_point(x)?;
            exit_halfline_exact(x[0], a, rng)
        }
        (BaseProcess::BrownianDelta { d, sigma2 }, _) => {
            if d != domain.dim() {
                return Err(Error::domain("process and domain dimensions differ"));
            }
            exit_euler(domain, sigma2, x, dt, rng)
        }
        (BaseProcess::Fbm { .. }, _) => Err(Error::domain("exit times of fractional Brownian motion are not supported")),
    }
}

/// `ζ^L` realized as `H_ζ`: one subordinator draw at the random horizon `ζ`.
pub fn lifetime_inverse_change(zeta: LifetimeSample, symbol: &Symbol, rng: &mut RngStream) -> Result<LifetimeSample> {
    if !zeta.value.is_finite() {
        return Err(Error::domain("the base lifetime must be finite"));
    }
    let v = IncrementSampler::sample_at(symbol, zeta.value, rng)?;
    Ok(LifetimeSample::new(v, LifetimeMethod::Subordinated))
}

/// Path-based `ζ^L = inf{t : L_t ≥ ζ}`, which on the grid is `H` at the last
/// grid time before `ζ`.
pub fn lifetime_inverse_change_path(
    zeta: LifetimeSample,
    symbol: &Symbol,
    dt: f64,
    rng: &mut RngStream,
) -> Result<LifetimeSample> {
    if !zeta.value.is_finite() {
        return Err(Error::domain("the base lifetime must be finite"));
    }
    let sampler = IncrementSampler::new(symbol, dt)?;
    let k = (zeta.value / dt).ceil() as u64;
    let mut h = 0.0;
    for _ in 1..k {
        h += sampler.sample(rng)?;
    }
    Ok(LifetimeSample::new(h, LifetimeMethod::Grid))
}

/// `ζ^H` realized as the grid inverse `L_ζ`: the subordinator is stepped
/// until it first exceeds `ζ`.
pub fn lifetime_subordinator_change(
    zeta: LifetimeSample,
    symbol: &Symbol,
    dt: f64,
    rng: &mut RngStream,
) -> Result<LifetimeSample> {
    if !zeta.value.is_finite() {
        return Err(Error::domain("the base lifetime must be finite"));
    }
    let sampler = IncrementSampler::new(symbol, dt)?;
    let k = sampler.first_passage(zeta.value, rng, DEFAULT_STEP_BUDGET)?;
    Ok(LifetimeSample::new(k as f64 * dt, LifetimeMethod::Grid))
}

/// `ζ^H` by running Brownian motion at the subordinator's grid values
/// `H_{k·dt}` and killing at the first `k` whose `H` has passed the exit time.
pub fn lifetime_subordinator_composed(
    domain: &Domain,
    sigma2: f64,
    x: &[f64],
    symbol: &Symbol,
    dt: f64,
    dt_x: f64,
    clock_rng: &mut RngStream,
    walk_rng: &mut RngStream,
) -> Result<LifetimeSample> {
    let sampler = IncrementSampler::new(symbol, dt)?;
    let mut walker = EulerWalker::new(*domain, sigma2, x, dt_x)?;
    if walker.exit_time() == Some(0.0) {
        return Ok(LifetimeSample::new(0.0, LifetimeMethod::Composed));
    }
    let mut h = 0.0;
    for k in 1..=DEFAULT_STEP_BUDGET {
        h += sampler.sample(clock_rng)?;
        if walker.advance_to(h, walk_rng)?.is_some() {
            return Ok(LifetimeSample::new(k as f64 * dt, LifetimeMethod::Composed));
        }
    }
    Err(Error::StepBudget(DEFAULT_STEP_BUDGET))
}

/// Exit time of the subordinated process `X∘H` itself, killed at the first
/// grid time `k·dt` with `X_{H_k}` outside the domain. Between grid times the
/// Gaussian transition is drawn exactly, so only the monitoring is discrete
/// and the estimate is biased upward by excursions that leave and return
/// within one step.
///
/// This is not `L_ζ`: there the base process is killed first and excursions
/// of `X` during a jump of `H` count. For a stable clock on a ball this is the
/// exit time of the isotropic `2α`-stable process.
pub fn exit_subordinated_skeleton(
    domain: &Domain,
    sigma2: f64,
    x: &[f64],
    symbol: &Symbol,
    dt: f64,
    rng: &mut RngStream,
) -> Result<LifetimeSample> {
    domain.check_point(x)?;
    if !(sigma2 > 0.0) {
        return Err(Error::domain("sigma2 must be positive"));
    }
    if domain.signed_distance(x) == 0.0 {
        return Ok(LifetimeSample::new(0.0, LifetimeMethod::Skeleton));
    }
    let sampler = IncrementSampler::new(symbol, dt)?;
    let mut pos = x.to_vec();
    for k in 1..=DEFAULT_STEP_BUDGET {
        let sd = (sigma2 * sampler.sample(rng)?).sqrt();
        for p in pos.iter_mut() {
            *p += sd * rng.normal();
        }
        if domain.signed_distance(&pos) <= 0.0 {
            return Ok(LifetimeSample::new(k as f64 * dt, LifetimeMethod::Skeleton));
        }
    }
    Err(Error::StepBudget(DEFAULT_STEP_BUDGET))
}

/// Random clock driving an MSD estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Clock {
    None,
    H(Symbol),
    L(Symbol),
}

/// Mean squared displacement at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MsdPoint {
    pub t: f64,
    pub estimate: MonteCarloEstimate,
}

const MSD_TAG: u64 = 0x4d53;

/// Times at which the base process is observed for one realization of the
/// clock: `t`, `H_t`, or the grid inverse `L_t`, for each `t` in `t_grid`.
pub fn clock_times(clock: &Clock, t_grid: &[f64], dt: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    match clock {
        Clock::None => Ok(t_grid.to_vec()),
        Clock::H(symbol) => {
            let mut prev = 0.0;
            let mut h = 0.0;
            let mut out = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                h += IncrementSampler::sample_at(symbol, t - prev, rng)?;
                prev = t;
                out.push(h);
            }
            Ok(out)
        }
        Clock::L(symbol) => {
            let sampler = IncrementSampler::new(symbol, dt)?;
            let mut h = 0.0;
            let mut k = 0u64;
            let mut out = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                while h <= t {
                    if k >= DEFAULT_STEP_BUDGET {
                        return Err(Error::PathExhausted { t, last: h });
                    }
                    h += sampler.sample(rng)?;
                    k += 1;
                }
                out.push(k as f64 * dt);
            }
            Ok(out)
        }
    }
}

/// Squared displacements from the origin of one path of the base process at
/// nondecreasing times.
pub fn squared_displacements(base: &BaseProcess, times: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
    match *base {
        BaseProcess::BrownianDelta { d, sigma2 } => {
            let mut pos = vec![0.0; d];
            let mut prev = 0.0;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                let sd = (sigma2 * (t - prev)).sqrt();
                for p in pos.iter_mut() {
                    *p += sd * rng.normal();
                }
                prev = t;
                out.push(pos.iter().map(|v| v * v).sum());
            }
            Ok(out)
        }
        BaseProcess::Fbm { hurst } => {
            // joint Gaussian draw at the distinct positive times
            let mut distinct: Vec<f64> = Vec::new();
            for &t in times {
                if t > 0.0 && distinct.last() != Some(&t) {
                    distinct.push(t);
                }
            }
            let m = distinct.len();
            let mut vals = vec![0.0; m];
            if m > 0 {
                let cov = DMatrix::from_fn(m, m, |i, j| sampling::fbm_covariance(hurst, distinct[i], distinct[j]));
                let l = cholesky_with_jitter(cov)?;
                let z = DVector::from_fn(m, |_, _| rng.normal());
                vals = (l * z).iter().copied().collect();
            }
            Ok(times
                .iter()
                .map(|&t| match distinct.iter().position(|&s| s == t) {
                    Some(i) => vals[i] * vals[i],
                    None => 0.0,
                })
                .collect())
        }
    }
}

fn cholesky_with_jitter(cov: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = cov.diagonal().max();
    let mut jitter = 0.0;
    for _ in 0..6 {
        let m = &cov + DMatrix::identity(cov.nrows(), cov.ncols()) * jitter;
        if let Some(c) = m.cholesky() {
            return Ok(c.l());
        }
        jitter = if jitter == 0.0 { 1e-14 * scale } else { jitter * 100.0 };
    }
    Err(Error::numerical("covariance of fBM at the clock times is not positive definite"))
}

/// Mean squared displacement of `base ∘ clock` on free space.
///
/// `dt` is the grid step of the subordinator when `clock` is an inverse
/// clock and is ignored otherwise.
pub fn msd(base: &BaseProcess, clock: &Clock, t_grid: &[f64], n: usize, dt: f64, seed: u64) -> Result<Vec<MsdPoint>> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
        return Err(Error::domain("MSD time grid must be positive and increasing"));
    }
    if n < 2 {
        return Err(Error::domain("MSD needs at least two samples"));
    }
    let rows = sampling::try_par_collect(n, |i| {
        let mut clock_rng = RngStream::child(seed, MSD_TAG, 2 * i as u64);
        let mut walk_rng = RngStream::child(seed, MSD_TAG, 2 * i as u64 + 1);
        let times = clock_times(clock, t_grid, dt, &mut clock_rng)?;
        squared_displacements(base, &times, &mut walk_rng)
    })?;
    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            MsdPoint { t, estimate: MonteCarloEstimate::from_samples(&col) }
        })
        .collect())
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
