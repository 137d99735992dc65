//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use qchannel_core::discretizer::{self, EnergyConstraint, GridSpec};
use qchannel_core::gaussian::{self, GaussianChannelSpec, GaussianStates, OptimalGaussianPrior};
use qchannel_core::montecarlo::{self, trial_rng};
use qchannel_core::reliability as rel;
use qchannel_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn run(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Result<Verdict>) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let (pass, detail) = match outcome {
        Ok(v) => (v.pass && in_time, v.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {id} [{name}] {} ({:.1} s, limit {} s): {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

/// `(x + 1) ln(x + 1) - x ln x`, written out independently of the library.
fn g_entropy(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).ln() - x * x.ln()
    }
}

fn capacity_identity() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..100 {
        let e = 5.0 * (1.0 - rng.random::<f64>());
        let n = 5.0 * (1.0 - rng.random::<f64>());
        let c = gaussian::gaussian_capacity(&GaussianChannelSpec::new(n, e)?);
        let diff = gaussian::thermal_entropy(n + e) - gaussian::thermal_entropy(n);
        worst = worst.max((c - diff).abs());
        worst_oracle = worst_oracle.max((c - (g_entropy(n + e) - g_entropy(n))).abs());
    }
    Ok(Verdict {
        pass: worst < 1e-12 && worst_oracle < 1e-12,
        detail: format!("max |C - [g(N+E) - g(N)]| = {worst:.2e} (independent form {worst_oracle:.2e}), tol 1e-12"),
    })
}

fn photon_gaussian_equivalence() -> Result<Verdict> {
    let spec = GaussianChannelSpec::new(0.5, 1.0)?;
    let c = gaussian::gaussian_capacity(&spec);
    let photon = gaussian::photon_ensemble(&spec, 80)?.holevo_quantity()?;
    let prior = OptimalGaussianPrior::new(1.0)?;
    let states = GaussianStates::new(0.5, 80)?;
    let mut devs = Vec::new();
    for level in [1, 2, 3] {
        let d = discretizer::discretize(&prior, &states, &EnergyConstraint, 1.0, &GridSpec::new(level, 4.0))?;
        devs.push((c - d.ensemble.holevo_quantity()?).abs());
    }
    let monotone = devs.windows(2).all(|w| w[1] <= w[0]);
    let last = *devs.last().unwrap();
    Ok(Verdict {
        pass: (photon - c).abs() < 1e-3 && last < 5e-2 && monotone,
        detail: format!(
            "C = {c:.6}, photon |dH - C| = {:.2e} (tol 1e-3), grid |dH - C| at levels 1,2,3 = {:.2e}, {:.2e}, {:.2e} (tol 5e-2, monotone: {monotone})",
            (photon - c).abs(),
            devs[0],
            devs[1],
            devs[2]
        ),
    })
}

fn discretization_convergence() -> Result<Verdict> {
    let prior = OptimalGaussianPrior::new(1.0)?;
    let states = GaussianStates::new(0.0, 40)?;
    let levels: Vec<usize> = (2..=16).collect();
    let report = discretizer::convergence_report(
        &prior,
        &states,
        &EnergyConstraint,
        1.0,
        &levels,
        &GridSpec::new(2, 4.0),
    )?;
    let target = 2.0 * LN_2;
    let last = report.rows.last().unwrap().delta_h;
    let drop = report.max_decrease();
    Ok(Verdict {
        pass: drop <= 1e-6 && target - last < 5e-2,
        detail: format!(
            "dH(l=2) = {:.6}, dH(l=16) = {last:.6}, 2 ln 2 - dH(l=16) = {:.2e} (tol 5e-2), largest decrease {drop:.2e} (slack 1e-6), reference dH = {:.6}",
            report.rows[0].delta_h,
            target - last,
            report.target
        ),
    })
}

fn exponent_closed_forms() -> Result<Verdict> {
    let mut notes = Vec::new();
    let mut pass = true;

    // (a)
    let p = rel::solve_p_star(1.0, 1.0)?;
    let exact = (3.0 - 5f64.sqrt()) / 2.0;
    let residual = ((2.0 - p) * (1.0 - p) - 1.0).abs();
    let a = (p - exact).abs() < 1e-12 && residual < 1e-12;
    pass &= a;
    notes.push(format!("(a) |p* - (3-sqrt5)/2| = {:.1e}, residual {residual:.1e}", (p - exact).abs()));

    // (b)
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let e = 0.05 + 4.95 * rng.random::<f64>();
        let p = rng.random::<f64>() / e * 0.999;
        worst = worst.max((rel::mu_tilde_gauss(e, 1.0, p)? - rel::mu_gauss(e, 1.0, p)?).abs());
    }
    pass &= worst < 1e-12;
    notes.push(format!("(b) max |mu~ - mu| at s=1 = {worst:.1e}"));

    // (c)
    let mut worst: f64 = 0.0;
    for e in [0.5, 1.0, 2.0] {
        let h = 1e-6;
        let fd = (rel::mu_gauss(e, h, 0.0)? - rel::mu_gauss(e, 0.0, 0.0)?) / h;
        worst = worst.max((fd - g_entropy(e)).abs());
    }
    pass &= worst < 1e-6;
    notes.push(format!("(c) max |dmu/ds - C| = {worst:.1e}"));

    // (d)
    let c = g_entropy(1.0);
    let rates: Vec<f64> = (1..=50).map(|i| c * i as f64 / 51.0).collect();
    let curve = rel::exponent_curve(1.0, &rates)?;
    let values: Vec<f64> = curve.records.iter().map(|r| r.value()).collect();
    let nonincreasing = values.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let lo = rel::g(1.0).ln();
    let hi = rel::dmu_ds_one(1.0)?;
    let composite = |r: f64| -> Result<f64> {
        let (ex, _) = rel::expurgated_exponent(1.0, r)?;
        Ok(ex.value.max(rel::random_coding_exponent(1.0, r)?.value))
    };
    let eps = 1e-9;
    let jump_lo = (composite(lo - eps)? - composite(lo + eps)?).abs();
    let jump_hi = (composite(hi - eps)? - composite(hi + eps)?).abs();
    let mut order = true;
    for r in &curve.records {
        if r.rate < lo {
            order &= r.e_ex.value > r.e_r.value;
        }
        if r.rate > hi {
            order &= r.e_ex.value < r.e_r.value;
        }
    }
    let d = nonincreasing && jump_lo < 1e-6 && jump_hi < 1e-6 && order;
    pass &= d;
    notes.push(format!(
        "(d) nonincreasing {nonincreasing}, jumps at ln g / dmu_ds_one = {jump_lo:.1e} / {jump_hi:.1e}, E_ex vs E_r ordering {order}"
    ));
    Ok(Verdict { pass, detail: notes.join("; ") })
}

fn generic_vs_closed_form() -> Result<Verdict> {
    let prior = OptimalGaussianPrior::new(1.0)?;
    let states = GaussianStates::new(0.0, 60)?;
    let d = discretizer::discretize(&prior, &states, &EnergyConstraint, 1.0, &GridSpec::new(12, 4.0))?;
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0);
    for s in [0.25, 0.5, 1.0] {
        for p in [0.0, 0.3] {
            let diff = (rel::mu_generic(&d.ensemble, s, p)? - rel::mu_gauss(1.0, s, p)?).abs();
            if diff > worst {
                worst = diff;
                at = (s, p);
            }
        }
    }
    Ok(Verdict {
        pass: worst < 2e-3,
        detail: format!(
            "{} cells, max |mu_generic - mu_gauss| = {worst:.2e} at (s, p) = {at:?}, tol 2e-3",
            d.ensemble.len()
        ),
    })
}

fn entropy_bound_suite() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..500 {
        let d = rng.random_range(2..=6);
        let k = rng.random_range(1..=6);
        let ens = common::random_ensemble(&mut rng, d, k);
        let outcomes = rng.random_range(1..=6);
        let povm = common::random_povm(&mut rng, d, outcomes);
        let gap = ens.mutual_information(&povm)? - ens.holevo_quantity()?;
        worst_gap = worst_gap.max(gap);
    }

    let mut worst_concavity = f64::NEG_INFINITY;
    for _ in 0..200 {
        let d = rng.random_range(2..=4);
        let k = rng.random_range(2..=5);
        let ens = common::random_ensemble(&mut rng, d, k);
        let a = ens.with_weights(common::random_weights(&mut rng, k))?;
        let b = ens.with_weights(common::random_weights(&mut rng, k))?;
        let lambda: f64 = rng.random();
        let mixed: Vec<f64> =
            a.weights().iter().zip(b.weights()).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        let lhs = ens.with_weights(mixed)?.holevo_quantity()?;
        let rhs = lambda * a.holevo_quantity()? + (1.0 - lambda) * b.holevo_quantity()?;
        worst_concavity = worst_concavity.max(rhs - lhs);
    }

    let mut worst_subadd = f64::NEG_INFINITY;
    for _ in 0..100 {
        let d = rng.random_range(2..=4);
        let k = rng.random_range(2..=4);
        let ens = common::random_ensemble(&mut rng, d, k);
        let flat = common::random_weights(&mut rng, k * k);
        let joint: Vec<Vec<f64>> = flat.chunks(k).map(|r| r.to_vec()).collect();
        let first: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
        let second: Vec<f64> = (0..k).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
        let two = ens.two_letter(&joint)?.holevo_quantity()?;
        let one = ens.with_weights(first)?.holevo_quantity()? + ens.with_weights(second)?.holevo_quantity()?;
        worst_subadd = worst_subadd.max(two - one);
    }

    Ok(Verdict {
        pass: worst_gap <= 1e-9 && worst_concavity <= 1e-9 && worst_subadd <= 1e-9,
        detail: format!(
            "max I1 - dH = {worst_gap:.2e} over 500 pairs; max concavity violation {worst_concavity:.2e}; max dH2 - dH1 - dH1' = {worst_subadd:.2e}; tol 1e-9"
        ),
    })
}

fn monte_carlo_consistency() -> Result<Verdict> {
    let n_list = [2, 4, 6, 8];
    let seed = 20_240_601;
    let reports = montecarlo::run_experiment(1.0, 0.3, &n_list, 200, 1.0, seed)?;
    let rerun = montecarlo::run_experiment(1.0, 0.3, &n_list, 200, 1.0, seed)?;
    let identical = reports == rerun;

    let mut decreasing = true;
    let mut margins = Vec::new();
    for w in reports.windows(2) {
        let gap = w[0].mean_error - w[1].mean_error;
        let sigma = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        decreasing &= gap > 2.0 * sigma;
        margins.push(gap / sigma);
    }
    let (e_ex, _) = rel::expurgated_exponent(1.0, 0.3)?;
    let last = reports.last().unwrap();
    let empirical = last.empirical_exponent();
    let exponent_ok = empirical >= 0.5 * e_ex.value;

    let mut scaled = Vec::new();
    for n in [4, 16, 64] {
        let mut rng = trial_rng(seed, n, usize::MAX >> 32);
        let nu = montecarlo::estimate_shell_probability(1.0, n, 1.0, 100_000, &mut rng)?;
        scaled.push(nu * (n as f64).sqrt());
    }
    let max = scaled.iter().copied().fold(f64::MIN, f64::max);
    let min = scaled.iter().copied().fold(f64::MAX, f64::min);
    let band = max / min <= 4.0 && min > 0.0;

    let errors: Vec<String> = reports
        .iter()
        .map(|r| format!("n={} N={} {:.3e}+-{:.1e}", r.n, r.words, r.mean_error, r.stderr))
        .collect();
    Ok(Verdict {
        pass: identical && decreasing && exponent_ok && band,
        detail: format!(
            "mean SRM error [{}], gaps in sigma {:?}, strictly decreasing at 2 sigma {decreasing}; \
             -ln(err)/n at n=8 = {empirical:.4} vs 0.5 E_ex(0.3) = {:.4}; \
             nu*sqrt(n) at n=4,16,64 = {:.3}, {:.3}, {:.3} (ratio {:.2}, band 4); bit-identical rerun {identical}",
            errors.join(", "),
            margins.iter().map(|m| (m * 10.0).round() / 10.0).collect::<Vec<_>>(),
            0.5 * e_ex.value,
            scaled[0],
            scaled[1],
            scaled[2],
            max / min
        ),
    })
}

fn main() {
    let results = [
        run(1, "capacity identity", Duration::from_secs(1), capacity_identity),
        run(2, "photon-Gaussian equivalence", Duration::from_secs(30), photon_gaussian_equivalence),
        run(3, "discretization convergence", Duration::from_secs(60), discretization_convergence),
        run(4, "exponent closed forms", Duration::from_secs(10), exponent_closed_forms),
        run(5, "generic vs closed-form exponents", Duration::from_secs(60), generic_vs_closed_form),
        run(6, "entropy-bound property suite", Duration::from_secs(60), entropy_bound_suite),
        run(7, "Monte Carlo consistency", Duration::from_secs(300), monte_carlo_consistency),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
