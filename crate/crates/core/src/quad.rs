//! Numerical quadrature.
//!
//! * [`adaptive`]: globally adaptive 21-point Gauss–Kronrod on a finite
//!   interval, bisecting the interval with the largest error estimate.
//! * [`tanh_sinh`]: double-exponential rule on a finite interval; tolerates
//!   integrable endpoint singularities.
//! * [`exp_sinh`]: double-exponential rule on `[a, ∞)` for integrands with an
//!   algebraic singularity at `a` and exponential decay at infinity.

use crate::real::Real;

/// Result of a quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

/// Tolerances and limits for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn relative(rel: T) -> Self {
        Self { abs: T::min_positive_value(), rel, max_intervals: 2000 }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_969_537_024,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights at XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gauss_kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let mut kronrod = T::lit(WGK[10]) * f(center);
    let mut gauss = T::zero();
    for i in 0..10 {
        let dx = radius * T::lit(XGK[i]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[i]) * pair;
        if i % 2 == 1 {
            gauss = gauss + T::lit(WG[i / 2]) * pair;
        }
    }
    let value = kronrod * radius;
    let error = ((kronrod - gauss) * radius).abs();
    (value, error)
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
pub fn adaptive<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: Tolerance<T>) -> Quadrature<T> {
    if a == b {
        return Quadrature { value: T::zero(), error: T::zero(), evaluations: 0, converged: true };
    }
    let mut intervals: Vec<(T, T, T, T)> = Vec::with_capacity(64);
    let (v, e) = gauss_kronrod(&f, a, b);
    intervals.push((a, b, v, e));
    let mut evaluations = 21;
    let eps = T::epsilon();
    loop {
        let total: T = intervals.iter().map(|iv| iv.2).sum();
        let err: T = intervals.iter().map(|iv| iv.3).sum();
        let target = tol.abs.max(tol.rel * total.abs());
        if err <= target {
            return Quadrature { value: total, error: err, evaluations, converged: true };
        }
        // Split the worst interval that is still wide enough to split.
        let worst = intervals
            .iter()
            .enumerate()
            .filter(|(_, iv)| (iv.1 - iv.0).abs() > T::lit(100.0) * eps * iv.0.abs().max(iv.1.abs()))
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Quadrature { value: total, error: err, evaluations, converged: false };
        };
        if intervals.len() >= tol.max_intervals {
            return Quadrature { value: total, error: err, evaluations, converged: false };
        }
        let (lo, hi, _, _) = intervals.swap_remove(i);
        let mid = T::lit(0.5) * (lo + hi);
        let (v1, e1) = gauss_kronrod(&f, lo, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, hi);
        evaluations += 42;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Adaptive quadrature over consecutive break points.
pub fn adaptive_pieces<T: Real, F: Fn(T) -> T>(f: F, breaks: &[T], tol: Tolerance<T>) -> Quadrature<T> {
    let mut out = Quadrature { value: T::zero(), error: T::zero(), evaluations: 0, converged: true };
    for w in breaks.windows(2) {
        let q = adaptive(&f, w[0], w[1], tol);
        out.value = out.value + q.value;
        out.error = out.error + q.error;
        out.evaluations += q.evaluations;
        out.converged &= q.converged;
    }
    out
}

const DE_MAX_LEVEL: usize = 10;

/// Tanh-sinh quadrature over a finite interval `[a, b]`.
///
/// The integrand receives the abscissa together with its distances to both
/// endpoints, so that singular factors such as `(x - a)^(-β)` can be formed
/// without cancellation.
pub fn tanh_sinh<T: Real, F: Fn(T, T, T) -> T>(f: F, a: T, b: T, rel_tol: T) -> Quadrature<T> {
    let half = T::lit(0.5);
    let h = half * (b - a);
    let pi_2 = T::FRAC_PI_2();
    // Run the transformed range out to where endpoint distances underflow,
    // so integrable endpoint singularities lose no tail mass.
    let t_max = (-T::min_positive_value().ln() * T::lit(0.45) / pi_2).asinh();
    // Node at parameter t: returns (x, dist_to_a, dist_to_b, weight).
    let node = |t: T| {
        let u = pi_2 * t.sinh();
        // 1 ∓ tanh(|u|) = 2 e^{∓|u|} / (e^{|u|} + e^{-|u|}), formed without overflow
        let en = (T::lit(-2.0) * u.abs()).exp();
        let small = T::lit(2.0) * en / (T::one() + en);
        let big = T::lit(2.0) / (T::one() + en);
        let (one_plus, one_minus) = if u >= T::zero() { (big, small) } else { (small, big) };
        let da = h * one_plus;
        let db = h * one_minus;
        let cu = u.cosh();
        let w = h * pi_2 * t.cosh() / (cu * cu);
        let x = if da < db { a + da } else { b - db };
        (x, da, db, w)
    };
    let eval = |t: T| -> T {
        let (x, da, db, w) = node(t);
        if da <= T::zero() || db <= T::zero() || !w.is_finite() || w == T::zero() {
            return T::zero();
        }
        let v = f(x, da, db) * w;
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    };
    de_refine(eval, -t_max, t_max, rel_tol)
}

/// Exp-sinh quadrature over `[a, ∞)`.
///
/// The integrand receives the abscissa and its distance to `a`.
pub fn exp_sinh<T: Real, F: Fn(T, T) -> T>(f: F, a: T, rel_tol: T) -> Quadrature<T> {
    let pi_2 = T::FRAC_PI_2();
    let log_max = T::max_value().ln() * T::lit(0.95);
    let log_min = T::min_positive_value().ln() * T::lit(0.95);
    let t_hi = (log_max / pi_2).asinh();
    let t_lo = (log_min / pi_2).asinh();
    let eval = |t: T| -> T {
        let s = pi_2 * t.sinh();
        let d = s.exp();
        let w = pi_2 * t.cosh() * d;
        if d <= T::zero() || !w.is_finite() {
            return T::zero();
        }
        let v = f(a + d, d) * w;
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    };
    de_refine(eval, t_lo, t_hi, rel_tol)
}

// Trapezoidal rule in the transformed variable with step halving.
fn de_refine<T: Real, G: Fn(T) -> T>(g: G, t_lo: T, t_hi: T, rel_tol: T) -> Quadrature<T> {
    let mut h = T::one();
    let mut evaluations = 0usize;
    // Level 0: integer nodes.
    let mut sum = T::zero();
    let k_lo = t_lo.ceil().to_i64().unwrap_or(0);
    let k_hi = t_hi.floor().to_i64().unwrap_or(0);
    for k in k_lo..=k_hi {
        sum = sum + g(T::from_i64(k).unwrap());
        evaluations += 1;
    }
    let mut estimate = sum * h;
    let mut error = estimate.abs();
    for _ in 1..=DE_MAX_LEVEL {
        h = h * T::lit(0.5);
        // New odd nodes at (2j + 1) h.
        let j_lo = ((t_lo / h - T::one()) * T::lit(0.5)).ceil().to_i64().unwrap_or(0);
        let j_hi = ((t_hi / h - T::one()) * T::lit(0.5)).floor().to_i64().unwrap_or(0);
        let mut add = T::zero();
        for j in j_lo..=j_hi {
            let t = T::from_i64(2 * j + 1).unwrap() * h;
            add = add + g(t);
            evaluations += 1;
        }
        sum = sum + add;
        let next = sum * h;
        error = (next - estimate).abs();
        estimate = next;
        if error <= rel_tol * estimate.abs() {
            return Quadrature { value: estimate, error, evaluations, converged: true };
        }
    }
    Quadrature { value: estimate, error, evaluations, converged: error <= T::lit(1e3) * rel_tol * estimate.abs() }
}
