//! Statistical checks of the samplers against known laws.

use timechange_core::estimate::{normal_quantile, MonteCarloEstimate};
use timechange_core::formulas;
use timechange_core::sampling::{self, FbmSampler, IncrementSampler, RngStream};
use timechange_core::Symbol;

fn estimate(xs: &[f64]) -> MonteCarloEstimate {
    MonteCarloEstimate::from_samples(xs)
}

#[test]
fn stable_fractional_moment() {
    let s = Symbol::stable(0.5).unwrap();
    let xs = sampling::try_par_collect(100_000, |i| {
        Ok(sampling::sample_increment(&s, 1.0, &mut RngStream::child(11, 1, i as u64))?.powf(0.25))
    })
    .unwrap();
    let e = estimate(&xs);
    let target = formulas::stable_moment_h(0.5, 0.25, 1.0).unwrap();
    assert!(e.within(target, 3.0, 0.0), "{} ± {} vs {target}", e.mean, e.std_error);
}

#[test]
fn stable_median() {
    // H_1 for α = 1/2 has the law of 1/(2Z²); its median is 1/(2 q²), q the 3/4 normal quantile
    let q = normal_quantile(0.75);
    let target = 0.5 / (q * q);
    let s = Symbol::stable(0.5).unwrap();
    let n = 40_000;
    let mut xs: Vec<f64> =
        sampling::par_collect(n, |i| sampling::sample_increment(&s, 1.0, &mut RngStream::child(12, 1, i as u64)).unwrap());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let below = xs.iter().filter(|&&x| x < target).count() as f64 / n as f64;
    // binomial SE of the empirical CDF at the median is 0.5/√n
    assert!((below - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt(), "{below}");
    assert!((target - 1.0990).abs() < 1e-4);
}

#[test]
fn gamma_path_terminal_mean() {
    let s = Symbol::gamma(2.0, 4.0).unwrap();
    let xs = sampling::try_par_collect(10_000, |i| {
        let p = sampling::simulate_path(&s, 3.0, 0.01, &mut RngStream::child(13, 1, i as u64))?;
        Ok(p.last())
    })
    .unwrap();
    let e = estimate(&xs);
    assert!(e.within(1.5, 3.0, 0.0), "{} ± {}", e.mean, e.std_error);
}

#[test]
fn tempered_increment_laplace_transform() {
    // E[e^{-λ H_dt}] = e^{-dt Φ(λ)}, checked with a dt that forces subdivision
    let s = Symbol::tempered(0.5, 4.0).unwrap();
    let dt = 2.0;
    let sampler = IncrementSampler::new(&s, dt).unwrap();
    let xs: Vec<f64> = (0..40_000u64).map(|i| sampler.sample(&mut RngStream::child(14, 1, i)).unwrap()).collect();
    for &lam in &[0.5, 2.0] {
        let ys: Vec<f64> = xs.iter().map(|x| (-lam * x).exp()).collect();
        let e = estimate(&ys);
        let target = (-dt * s.evaluate(lam).unwrap()).exp();
        assert!(e.within(target, 3.5, 0.0), "λ={lam}: {} ± {} vs {target}", e.mean, e.std_error);
    }
    // mean of H_dt is dt Φ'(0)
    let e = estimate(&xs);
    assert!(e.within(dt * s.drift_coefficient(), 3.5, 0.0), "{} ± {}", e.mean, e.std_error);
}

#[test]
fn telegraph_increment_laplace_transform() {
    let s = Symbol::telegraph(0.3).unwrap();
    let sampler = IncrementSampler::new(&s, 0.5).unwrap();
    let ys: Vec<f64> =
        (0..40_000u64).map(|i| (-sampler.sample(&mut RngStream::child(15, 1, i)).unwrap()).exp()).collect();
    let e = estimate(&ys);
    let target = (-0.5 * s.evaluate(1.0).unwrap()).exp();
    assert!(e.within(target, 3.5, 0.0), "{} ± {} vs {target}", e.mean, e.std_error);
}

#[test]
fn inverse_stable_mean_on_grid() {
    let s = Symbol::stable(0.5).unwrap();
    let dt = 1e-3;
    let sampler = IncrementSampler::new(&s, dt).unwrap();
    let xs = sampling::try_par_collect(20_000, |i| {
        let k = sampler.first_passage(1.0, &mut RngStream::child(16, 1, i as u64), 100_000_000)?;
        Ok(k as f64 * dt)
    })
    .unwrap();
    let e = estimate(&xs);
    let target = formulas::mean_inverse_stable(0.5, 1.0).unwrap();
    assert!(((e.mean - target) / target).abs() < 0.02, "{} vs {target}", e.mean);
}

#[test]
fn exact_inverse_stable_sampler() {
    let xs: Vec<f64> = (0..50_000u64).map(|i| sampling::inverse_stable_exact(0.5, 4.0, &mut RngStream::child(17, 1, i))).collect();
    let e = estimate(&xs);
    let target = formulas::mean_inverse_stable(0.5, 4.0).unwrap();
    assert!(e.within(target, 3.0, 0.0), "{} ± {} vs {target}", e.mean, e.std_error);
}

#[test]
fn duality_of_subordinator_and_inverse() {
    // P(H_t < s) = P(L_s > t), with t on the grid
    let s = Symbol::stable(0.7).unwrap();
    let dt = 0.01;
    let n = 10_000;
    let paths = sampling::try_par_collect(n, |i| sampling::simulate_path(&s, 2.0, dt, &mut RngStream::child(18, 1, i as u64)))
        .unwrap();
    for &(t, lvl) in &[(0.5, 0.4), (1.0, 1.0), (1.5, 0.8)] {
        let k = (t / dt).round() as usize;
        let p_h = paths.iter().filter(|p| p.values()[k] < lvl).count() as f64 / n as f64;
        let p_l = paths
            .iter()
            .filter(|p| match p.inverse_at(lvl) {
                Ok(l) => l > t + 0.5 * dt,
                // the level is not reached before the horizon, so L_s > t
                Err(_) => true,
            })
            .count() as f64
            / n as f64;
        let se = (p_h * (1.0 - p_h) / n as f64).sqrt();
        assert!((p_h - p_l).abs() <= 3.0 * se + 1e-12, "t={t} s={lvl}: {p_h} vs {p_l}");
    }
}

#[test]
fn paths_are_reproducible() {
    let s = Symbol::gamma(2.0, 1.0).unwrap();
    let a = sampling::simulate_path(&s, 1.0, 0.01, &mut RngStream::new(3, 77)).unwrap();
    let b = sampling::simulate_path(&s, 1.0, 0.01, &mut RngStream::new(3, 77)).unwrap();
    assert_eq!(a, b);
    let c = sampling::simulate_path(&s, 1.0, 0.01, &mut RngStream::new(3, 78)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn parallel_results_do_not_depend_on_thread_count() {
    let s = Symbol::stable(0.6).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            sampling::par_collect(500, |i| sampling::sample_increment(&s, 0.3, &mut RngStream::child(5, 2, i as u64)).unwrap())
        })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn brownian_fbm_increments_are_uncorrelated() {
    let n = 64;
    let sampler = FbmSampler::new(0.5, 1.0, n).unwrap();
    let paths = 10_000;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..paths {
        let p = sampler.sample(&mut RngStream::child(19, 1, i));
        let inc: Vec<f64> = p.values.windows(2).map(|w| w[1] - w[0]).collect();
        sxy += inc[10] * inc[11];
        sxx += inc[10] * inc[10];
    }
    let rho = sxy / sxx;
    assert!(rho.abs() < 4.0 / (paths as f64).sqrt(), "{rho}");
}

#[test]
fn fbm_unit_variance_and_scaling() {
    for &h in &[0.3, 0.7] {
        let n = 64;
        let t_max = 4.0;
        let sampler = FbmSampler::new(h, t_max, n).unwrap();
        let m = 100_000;
        let paths: Vec<Vec<f64>> =
            sampling::par_collect(m, |i| sampler.sample(&mut RngStream::child(20, (h * 10.0) as u64, i as u64)).values);
        // B at t = 1 is grid point n / t_max
        let at1: Vec<f64> = paths.iter().map(|p| p[n / 4].powi(2)).collect();
        let e = estimate(&at1);
        assert!(e.within(1.0, 3.0, 0.0), "H={h}: {} ± {}", e.mean, e.std_error);
        let ks: Vec<usize> = (8..=n).step_by(8).collect();
        let ts: Vec<f64> = ks.iter().map(|&k| k as f64 * t_max / n as f64).collect();
        let ms: Vec<f64> = ks.iter().map(|&k| paths.iter().map(|p| p[k] * p[k]).sum::<f64>() / m as f64).collect();
        let slope = timechange_core::processes::log_log_slope(&ts, &ms);
        assert!((slope - 2.0 * h).abs() < 0.05, "H={h}: slope {slope}");
    }
}

#[test]
fn fbm_circulant_for_non_power_of_two() {
    let s = FbmSampler::new(0.3, 1.0, 100).unwrap();
    assert!(s.uses_circulant());
    let p = s.sample(&mut RngStream::new(1, 1));
    assert_eq!(p.values.len(), 101);
}
