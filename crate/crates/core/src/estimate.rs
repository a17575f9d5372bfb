//! Monte Carlo summaries: mean with standard error, a Hill tail-index
//! diagnostic for infinite means, and Welch intervals.

use serde::Serialize;

/// Tail index at or below which a sample is treated as having an infinite mean.
pub const INFINITE_MEAN_TAIL_INDEX: f64 = 1.05;

/// Fraction of the sample used by the Hill estimator.
pub const HILL_FRACTION: f64 = 0.01;

/// Mean, standard error and tail diagnostic of an i.i.d. sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Set when the Hill tail index is `≤ 1.05` or a sample is infinite.
    pub infinite_mean: bool,
    pub tail_index: Option<f64>,
}

impl MonteCarloEstimate {
    /// Summarizes `xs`. Summation runs in slice order so the result is
    /// reproducible bit for bit.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let has_inf = xs.iter().any(|x| x.is_infinite());
        let finite: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
        let m = finite.len();
        let mean = if m > 0 { finite.iter().sum::<f64>() / m as f64 } else { f64::NAN };
        let var = if m > 1 { finite.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64 } else { f64::NAN };
        let tail_index = hill_tail_index(&finite);
        let infinite_mean = has_inf || tail_index.is_some_and(|a| a <= INFINITE_MEAN_TAIL_INDEX);
        Self {
            mean: if has_inf { f64::INFINITY } else { mean },
            std_error: (var / m as f64).sqrt(),
            samples: n,
            infinite_mean,
            tail_index,
        }
    }

    /// `|mean - target| ≤ k · SE + slack`.
    pub fn within(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + slack
    }
}

/// Hill estimator of the tail index on the top `max(1%, 10)` order statistics.
///
/// Returns `None` when fewer than 50 positive samples are available.
pub fn hill_tail_index(xs: &[f64]) -> Option<f64> {
    let mut pos: Vec<f64> = xs.iter().copied().filter(|x| *x > 0.0 && x.is_finite()).collect();
    if pos.len() < 50 {
        return None;
    }
    let k = ((pos.len() as f64 * HILL_FRACTION) as usize).max(10).min(pos.len() - 1);
    // descending order statistics
    pos.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let threshold = pos[k];
    let xi: f64 = pos[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    if xi > 0.0 {
        Some(1.0 / xi)
    } else {
        Some(f64::INFINITY)
    }
}

/// Two-sided Welch interval for `mean(changed) - mean(base)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WelchInterval {
    pub difference: f64,
    pub std_error: f64,
    pub dof: f64,
    pub lower: f64,
    pub upper: f64,
}

impl WelchInterval {
    pub fn excludes_zero(&self) -> bool {
        self.lower > 0.0 || self.upper < 0.0
    }
}

pub fn welch_interval(base: &MonteCarloEstimate, changed: &MonteCarloEstimate, confidence: f64) -> WelchInterval {
    let vb = base.std_error.powi(2);
    let vc = changed.std_error.powi(2);
    let se = (vb + vc).sqrt();
    let nb = base.samples.saturating_sub(1).max(1) as f64;
    let nc = changed.samples.saturating_sub(1).max(1) as f64;
    let dof = if vb + vc > 0.0 { (vb + vc).powi(2) / (vb * vb / nb + vc * vc / nc) } else { f64::INFINITY };
    let q = student_t_quantile(0.5 + confidence / 2.0, dof);
    let difference = changed.mean - base.mean;
    WelchInterval { difference, std_error: se, dof, lower: difference - q * se, upper: difference + q * se }
}

/// Standard normal quantile (Wichura's AS 241, about 16 digits).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r + 6.726_577_092_700_87e4) * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r + 3.930_789_580_009_271e4) * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288e-7 * r + 2.711_555_568_743_487_6e-5) * r + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Student-t quantile by the Cornish–Fisher expansion around the normal
/// quantile; accurate to about `1e-4` for `dof ≥ 5`, which covers every
/// Welch interval built from Monte Carlo batches.
pub fn student_t_quantile(p: f64, dof: f64) -> f64 {
    let z = normal_quantile(p);
    if !dof.is_finite() {
        return z;
    }
    let v = dof.max(1.0);
    let z2 = z * z;
    let g1 = (z2 + 1.0) * z / 4.0;
    let g2 = ((5.0 * z2 + 16.0) * z2 + 3.0) * z / 96.0;
    let g3 = (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) * z / 384.0;
    let g4 = ((((79.0 * z2 + 776.0) * z2 + 1482.0) * z2 - 1920.0) * z2 - 945.0) * z / 92160.0;
    z + g1 / v + g2 / (v * v) + g3 / v.powi(3) + g4 / v.powi(4)
}
