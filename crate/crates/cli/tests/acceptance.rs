//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochstab::simulate_parallel;
use stochstab::RunManifest;
use stochstab_core::langmuir::{
    appendix_abscissa, appendix_dispersion_check, bound_state_energy, dispersion_complete_correlation,
    dispersion_from_eps, epsilon_k, find_growth_rate_k0, matching_function, mode_verdict_k,
    quartic_coefficients, stability_threshold_k, white_noise_growth, white_noise_threshold,
    BoundStateOptions, CorrelationProfile, LangmuirProblem, Stability, WellGrid,
};
use stochstab_core::moments::build_moment_operator;
use stochstab_core::sde::{fit_growth_rate, EnsembleConfig, Quantity};
use stochstab_core::spectral::{
    eigenpairs, eigenvalues, eval_polynomial, perturb_degenerate, perturb_simple, spectral_abscissa,
    Complex64,
};
use stochstab_core::LinearSDESystem;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, limit: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit, || {
        format!("runtime {:.2}s exceeds {limit}s", elapsed.as_secs_f64())
    })
}

fn c1_scalar_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for a in [0.5, 1.0, 2.0] {
        for rho in [0.25, 0.5, 1.0] {
            let sys = LinearSDESystem::scalar(a, rho).map_err(|e| e.to_string())?;
            for m in 1..=8usize {
                let op = build_moment_operator(&sys, m).map_err(|e| e.to_string())?;
                let got = spectral_abscissa(&op.matrix).map_err(|e| e.to_string())? / m as f64;
                let want = -a + (m as f64 - 1.0) * rho * rho / 2.0;
                worst = worst.max((got - want).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-12, || format!("max error {worst:e} > 1e-12"))?;
    within_budget(elapsed, 1.0)?;
    Ok(format!("max |error| = {worst:.1e}, {:.3}s", elapsed.as_secs_f64()))
}

fn c2_monte_carlo_rate() -> Outcome {
    let start = Instant::now();
    let sys = LinearSDESystem::scalar(1.0, 0.5).map_err(|e| e.to_string())?;
    let cfg = EnsembleConfig::new(sys, vec![1.0], 1e-3, 5.0, 100_000, 20_240_601);
    let trace = simulate_parallel(&cfg).map_err(|e| e.to_string())?;
    let fit = fit_growth_rate(&trace, &Quantity::NormPower(2), 0.5).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let rel = (fit.rate + 1.75).abs() / 1.75;
    check(rel <= 0.05, || format!("rate {} is {:.2}% from -1.75", fit.rate, 100.0 * rel))?;
    within_budget(elapsed, 30.0)?;
    Ok(format!(
        "rate {:.5} ({:.2}% from -1.75), {:.1}s",
        fit.rate,
        100.0 * rel,
        elapsed.as_secs_f64()
    ))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| scale * rng.random_range(-1.0..1.0))
}

fn c3_mean_dynamics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for s in 0..3 {
        let drift = random_matrix(&mut rng, 3, 1.0) - DMatrix::identity(3, 3);
        let noise = vec![random_matrix(&mut rng, 3, 0.4), random_matrix(&mut rng, 3, 0.4)];
        let sys = LinearSDESystem::new(drift.clone(), noise).map_err(|e| e.to_string())?;
        let x0 = vec![1.0, -0.5, 0.25];
        let cfg = EnsembleConfig::new(sys, x0.clone(), 1e-3, 2.0, 10_000, 100 + s)
            .with_degrees(vec![])
            .with_mean();
        let trace = simulate_parallel(&cfg).map_err(|e| e.to_string())?;
        let x0 = nalgebra::DVector::from_vec(x0);
        for j in 1..=10 {
            let target = 0.2 * j as f64;
            let idx = trace
                .times
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
                .unwrap()
                .0;
            let t = trace.times[idx];
            let exact = (&drift * t).exp() * &x0;
            for i in 0..3 {
                let (v, e) = trace.series(&Quantity::Monomial(vec![i])).unwrap();
                let z = (v[idx] - exact[i]).abs() / e[idx];
                worst = worst.max(z);
            }
        }
    }
    check(worst <= 3.0, || format!("largest deviation {worst:.2} standard errors"))?;
    Ok(format!("90 comparisons, largest deviation {worst:.2} standard errors"))
}

/// Greedy nearest matching; largest distance between paired elements.
fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut rest: Vec<Complex64> = b.to_vec();
    let mut worst = 0.0f64;
    for z in a {
        let (i, d) = rest
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        worst = worst.max(d);
        rest.swap_remove(i);
    }
    worst
}

fn c4_kronecker_sum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let drift = loop {
        let a = random_matrix(&mut rng, 3, 1.0) - DMatrix::identity(3, 3) * 2.0;
        if spectral_abscissa(&a).map_err(|e| e.to_string())? < 0.0 {
            break a;
        }
    };
    let sys = LinearSDESystem::deterministic(drift.clone()).map_err(|e| e.to_string())?;
    let op = build_moment_operator(&sys, 2).map_err(|e| e.to_string())?;
    let got = eigenvalues(&op.matrix).map_err(|e| e.to_string())?;
    let nu = eigenvalues(&drift).map_err(|e| e.to_string())?;
    let mut want = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            want.push(nu[i] + nu[j]);
        }
    }
    let d = multiset_distance(&got, &want);
    check(d <= 1e-9, || format!("multiset distance {d:e}"))?;
    Ok(format!("multiset distance {d:.1e}"))
}

fn c5_perturbation_order() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ratios = Vec::new();
    while ratios.len() < 5 {
        let m = random_matrix(&mut rng, 4, 1.0);
        let nu = eigenvalues(&m).map_err(|e| e.to_string())?;
        let mut gap = f64::INFINITY;
        for i in 0..4 {
            for j in i + 1..4 {
                gap = gap.min((nu[i] - nu[j]).norm());
            }
        }
        if gap < 0.3 {
            continue;
        }
        let dm = random_matrix(&mut rng, 4, 1.0);
        let base = eigenpairs(&m).map_err(|e| e.to_string())?;
        let k = 0;
        let d = perturb_simple(&base, &dm, k).map_err(|e| e.to_string())?;
        let err = |eps: f64| -> Result<f64, String> {
            let pred = base.eigenvalues[k] + d * eps;
            let moved = eigenvalues(&(&m + &dm * eps)).map_err(|e| e.to_string())?;
            Ok(moved.iter().map(|z| (z - pred).norm()).fold(f64::INFINITY, f64::min))
        };
        ratios.push(err(1e-2)? / err(5e-3)?);
    }
    let bad: Vec<&f64> = ratios.iter().filter(|r| !(3.0..=5.0).contains(*r)).collect();
    check(bad.is_empty(), || format!("ratios {ratios:?}"))?;
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Ok(format!("error ratios {}", shown.join(", ")))
}

fn c6_degenerate_split() -> Outcome {
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 2.0]));
    let mut worst = 0.0f64;
    for s in [0.1, 0.7, 3.0] {
        let dm = DMatrix::from_row_slice(3, 3, &[0.0, s, 0.0, s, 0.0, 0.0, 0.0, 0.0, 0.0]);
        // Spectrum order is descending, so the double eigenvalue 1 sits at index 1.
        let mut split = perturb_degenerate(&m, &dm, 1).map_err(|e| e.to_string())?;
        split.sort_by(|a, b| b.re.total_cmp(&a.re));
        check(split.len() == 2, || format!("{} values for a double eigenvalue", split.len()))?;
        worst = worst
            .max((split[0] - Complex64::new(s, 0.0)).norm())
            .max((split[1] - Complex64::new(-s, 0.0)).norm());
    }
    check(worst <= 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("s in {{0.1, 0.7, 3}}, max error {worst:.1e}"))
}

fn c7_langmuir_quartic() -> Outcome {
    let m = 1.0;
    let ks = [0.0, 0.3, 0.5, 1.0, 2.0];
    let sigmas = [0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];
    let mut worst = 0.0f64;
    for &k1 in &ks {
        for &k2 in &ks {
            for &s2 in &sigmas {
                let r = dispersion_complete_correlation(m, k1, k2, s2).map_err(|e| e.to_string())?;
                let co = quartic_coefficients(epsilon_k(m, k1), epsilon_k(m, k2), s2);
                for &z in &r.roots {
                    worst = worst.max(eval_polynomial(&co, z).0.norm());
                }
            }
        }
    }
    check(worst <= 1e-9, || format!("max residual {worst:e}"))?;

    let mut zero_noise = 0.0f64;
    for &k1 in &ks {
        for &k2 in &ks {
            let r = dispersion_complete_correlation(m, k1, k2, 0.0).map_err(|e| e.to_string())?;
            let (e1, e2) = (epsilon_k(m, k1), epsilon_k(m, k2));
            let want: Vec<Complex64> = [e1 + e2, e1 - e2, -e1 + e2, -e1 - e2]
                .iter()
                .map(|&w| Complex64::new(0.0, w))
                .collect();
            zero_noise = zero_noise.max(multiset_distance(&r.roots, &want));
        }
    }
    check(zero_noise <= 1e-9, || format!("zero-noise roots off by {zero_noise:e}"))?;

    for &k in &ks {
        for s2 in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
            let r = dispersion_complete_correlation(m, k, k, s2).map_err(|e| e.to_string())?;
            let positive_real = r
                .roots
                .iter()
                .filter(|z| z.re > 1e-12 && z.im.abs() <= 1e-10 * (1.0 + z.norm()))
                .count();
            check(positive_real == 1, || {
                format!("k = {k}, sigma2 = {s2}: {positive_real} positive real roots")
            })?;
        }
    }
    Ok(format!(
        "max residual {worst:.1e}; zero-noise roots within {zero_noise:.1e}; one positive real root for k1 = k2"
    ))
}

fn c8_small_noise_asymptotic() -> Outcome {
    let r = dispersion_complete_correlation(1.0, 0.0, 0.0, 1e-2).map_err(|e| e.to_string())?;
    let rel = (r.max_real - 5e-3).abs() / 5e-3;
    check(rel <= 0.01, || format!("max real root {} is {:.3}% from 5e-3", r.max_real, 100.0 * rel))?;
    Ok(format!("max real root {:.6e}, {:.4}% from 5e-3", r.max_real, 100.0 * rel))
}

fn c9_white_noise_threshold() -> Outcome {
    let m = 1.0;
    let mut worst = 0.0f64;
    for k in [0.5, 1.0, 2.0] {
        let t = white_noise_threshold(m, k);
        let exact = 4.0 * k * k * (4.0 * m * m + k * k);
        check((t - exact).abs() <= 1e-14 * exact, || format!("threshold {t} vs {exact}"))?;
        let verdict = |s4: f64| -> Result<Stability, String> {
            Ok(white_noise_growth(m, k, s4.sqrt()).map_err(|e| e.to_string())?.classification)
        };
        check(verdict(exact * (1.0 - 1e-6))? == Stability::Stable, || format!("k = {k}: not stable below"))?;
        check(verdict(exact * (1.0 + 1e-6))? == Stability::Unstable, || format!("k = {k}: not unstable above"))?;
        let (mut lo, mut hi) = (0.5 * exact, 2.0 * exact);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if verdict(mid)? == Stability::Unstable {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        worst = worst.max((0.5 * (lo + hi) - exact).abs() / exact);
    }
    check(worst <= 1e-6, || format!("flip point off by {worst:e} relative"))?;
    Ok(format!("k in {{0.5, 1, 2}}: flip located within {worst:.1e} relative"))
}

fn c10_appendix_identity() -> Outcome {
    let lin = |a: f64, b: f64| (0..5).map(move |i| a + (b - a) * i as f64 / 4.0);
    let (mut residual, mut gap) = (0.0f64, 0.0f64);
    for e1 in lin(0.5, 3.0) {
        for e2 in lin(0.5, 3.0) {
            for s2 in lin(0.0, 2.0) {
                residual = residual.max(appendix_dispersion_check(e1, e2, s2).map_err(|e| e.to_string())?);
                let matrix = appendix_abscissa(e1, e2, s2).map_err(|e| e.to_string())?;
                let quartic = dispersion_from_eps(e1, e2, s2).map_err(|e| e.to_string())?.max_real;
                gap = gap.max((matrix - quartic).abs());
            }
        }
    }
    check(residual <= 1e-9, || format!("max residual {residual:e}"))?;
    check(gap <= 1e-9, || format!("abscissa gap {gap:e}"))?;
    Ok(format!("max residual {residual:.1e}, abscissa gap {gap:.1e}"))
}

fn square_well_energy(v0: f64, d: f64) -> f64 {
    let f = |q: f64| q * (q * d).tan() - (v0 - q * q).sqrt();
    let (mut lo, mut hi) = (0.0, (std::f64::consts::PI / (2.0 * d)).min(v0.sqrt()) * (1.0 - 1e-15));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    q * q - v0
}

fn c11_bound_state() -> Outcome {
    let start = Instant::now();
    let opts = BoundStateOptions::default();
    check(opts.grid_points == 4096, || "default grid is not 4096 points".into())?;
    let gauss = CorrelationProfile::gaussian(1.0, 1.0).map_err(|e| e.to_string())?;

    let mut prev = f64::NEG_INFINITY;
    for i in 0..50 {
        let lambda = 0.05 + 1.95 * i as f64 / 49.0;
        let e = bound_state_energy(&gauss, lambda, &opts).map_err(|e| e.to_string())?.energy;
        check(e > prev + 1e-10 || i == 0, || format!("E not increasing at lambda = {lambda}"))?;
        prev = e;
    }

    let mut well_err = 0.0f64;
    for (c, lambda, d) in [(1.0, 0.5, 1.0), (2.0, 0.25, 0.5), (1.0, 2.0, 1.0)] {
        let p = CorrelationProfile::rectangular(c, d).map_err(|e| e.to_string())?;
        let got = bound_state_energy(&p, lambda, &opts).map_err(|e| e.to_string())?.energy;
        well_err = well_err.max((got - square_well_energy(c / (2.0 * lambda), d)).abs());
    }
    check(well_err <= 1e-6, || format!("rectangular well off by {well_err:e}"))?;

    let problem = LangmuirProblem::new(1.0, 0.0, gauss).map_err(|e| e.to_string())?;
    let root = find_growth_rate_k0(&problem, &opts).map_err(|e| e.to_string())?;
    check(root.lambda > 0.0, || "growth rate not positive".into())?;
    check(root.residual.abs() <= 1e-8, || format!("matching residual {:e}", root.residual))?;
    let grid = WellGrid::new(&gauss, root.half_width, root.grid_points).map_err(|e| e.to_string())?;
    let samples: Vec<f64> = (0..=200)
        .map(|i| 1e-6 * 10f64.powf(7.0 * i as f64 / 200.0))
        .map(|l| matching_function(&grid, 1.0, 0.0, l))
        .collect();
    let changes = samples.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count();
    check(changes == 1, || format!("{changes} sign changes of the matching function"))?;

    let elapsed = start.elapsed();
    within_budget(elapsed, 60.0)?;
    Ok(format!(
        "monotone on 50 points; square well within {well_err:.1e}; lambda* = {:.6} unique, residual {:.1e}; {:.1}s",
        root.lambda,
        root.residual,
        elapsed.as_secs_f64()
    ))
}

fn c12_threshold_k() -> Outcome {
    let opts = BoundStateOptions::default();
    let problem = LangmuirProblem::new(1.0, 0.0, CorrelationProfile::gaussian(0.2, 1.0).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut cs = Vec::new();
    for k in [0.25, 0.5, 1.0, 2.0] {
        cs.push(stability_threshold_k(&problem, k, &opts).map_err(|e| e.to_string())?.critical_amplitude);
    }
    check(cs.windows(2).all(|w| w[1] >= w[0]), || format!("c* not nondecreasing: {cs:?}"))?;
    for k in [5.0, 10.0, 20.0] {
        let v = mode_verdict_k(&problem, k, &opts).map_err(|e| e.to_string())?;
        check(v.stability == Stability::Stable, || format!("k = {k} not stable at c = 0.2"))?;
    }
    let shown: Vec<String> = cs.iter().map(|c| format!("{c:.4}")).collect();
    Ok(format!("c* = {} for k = 0.25, 0.5, 1, 2; stable at c = 0.2 for k = 5, 10, 20", shown.join(", ")))
}

fn c13_manifest_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/rotation.json");
    let spec = spec.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["moments", "--spec", spec, "--degree", "3"],
        vec!["simulate", "--spec", spec, "--degree", "2,3", "--paths", "2000", "--dt", "1e-2", "--horizon", "2", "--seed", "9"],
        vec!["langmuir", "dispersion", "--grid", "k=0:2:5", "sigma2=0:1:5"],
        vec!["langmuir", "whitenoise", "--grid", "k=0.5:2:4", "sigma2=0:40:9"],
        vec!["langmuir", "boundstate", "--profile", "gaussian", "--amplitude", "1", "--width", "1"],
        vec!["langmuir", "threshold", "--amplitude", "0.2", "--points", "1024", "--k", "0.5"],
        vec!["langmuir", "appendix", "--grid", "eps1=0.5:3:3", "eps2=0.5:3:3", "sigma2=0:2:3"],
    ];
    let exe = env!("CARGO_BIN_EXE_stochstab");
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let first = dir.path().join(format!("run{i}"));
        let status = Command::new(exe)
            .args(args)
            .arg("--out")
            .arg(&first)
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&status.stderr)))?;
        let manifest_path = first.join("manifest.json");
        let manifest = RunManifest::read(&manifest_path).map_err(|e| e.to_string())?;
        let second = dir.path().join(format!("rerun{i}"));
        let status = Command::new(exe)
            .arg("rerun")
            .arg("--manifest")
            .arg(&manifest_path)
            .arg("--out")
            .arg(&second)
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.success(), || format!("rerun of {args:?} failed"))?;
        for name in &manifest.outputs {
            let a = std::fs::read(first.join(name)).map_err(|e| e.to_string())?;
            let b = std::fs::read(second.join(name)).map_err(|e| e.to_string())?;
            check(a == b, || format!("{} differs after rerun", manifest.command))?;
            files += 1;
        }
    }
    Ok(format!("{} commands, {files} output files byte-identical after rerun", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("exact scalar moment exponents", c1_scalar_oracle),
        ("Monte Carlo vs operator rate", c2_monte_carlo_rate),
        ("mean follows the drift", c3_mean_dynamics),
        ("Kronecker-sum spectrum", c4_kronecker_sum),
        ("first-order perturbation", c5_perturbation_order),
        ("degenerate splitting", c6_degenerate_split),
        ("Langmuir dispersion quartic", c7_langmuir_quartic),
        ("small-noise asymptotic", c8_small_noise_asymptotic),
        ("white-noise threshold", c9_white_noise_threshold),
        ("appendix matrix identity", c10_appendix_identity),
        ("bound-state physics", c11_bound_state),
        ("k > 0 threshold behaviour", c12_threshold_k),
        ("determinism from manifests", c13_manifest_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
