//! Command execution: resolved config in, output files and a summary out.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use stochstab_core::langmuir::{
    appendix_abscissa, appendix_dispersion_check, dispersion_complete_correlation,
    dispersion_from_eps, find_growth_rate_k0, stability_threshold_k, white_noise_growth,
    white_noise_threshold, BoundStateOptions, LangmuirProblem, WellGrid,
};
use stochstab_core::moments::{basis_size, build_moment_operator_capped, MomentOperator};
use stochstab_core::sde::{
    fit_growth_rate, EnsembleConfig, EnsemblePlan, GrowthFit, MomentTrace, Quantity, SdeError,
};
use stochstab_core::spectral::{eigenvalues, spectral_abscissa};

use crate::config::{
    LangmuirConfig, MomentsConfig, ProfileConfig, RunConfig, SimulateConfig, WellConfig,
};
use crate::format::{csv_float, g6, table};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::CliError;

pub const UNITS_NOTE: &str =
    "# units: dimensionless; lengths rescaled by sqrt(3) V_thermal, plasma mass m = omega_pe";
pub const REDUCTION_NOTE: &str =
    "# reduction: one spatial dimension along k; the transverse Laplacian is dropped";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    fn new(name: &str, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
        }
    }
}

/// Files and terminal summary of one run. `error` is set when the run
/// failed after producing partial output.
#[derive(Debug)]
pub struct Report {
    pub files: Vec<OutputFile>,
    pub summary: String,
    pub error: Option<CliError>,
}

impl Report {
    fn ok(files: Vec<OutputFile>, summary: String) -> Self {
        Self {
            files,
            summary,
            error: None,
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    match config {
        RunConfig::Moments(c) => run_moments(c),
        RunConfig::Simulate(c) => run_simulate(c),
        RunConfig::Langmuir(c) => run_langmuir(c),
    }
}

/// Outcome of [`execute`].
#[derive(Debug)]
pub struct Execution {
    pub summary: String,
    pub manifest: RunManifest,
    pub error: Option<CliError>,
}

/// Runs `config` and writes its files plus `manifest.json` into `out_dir`.
pub fn execute(config: &RunConfig, out_dir: &Path) -> Result<Execution, CliError> {
    let start = Instant::now();
    let report = run(config)?;
    let elapsed = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    for f in &report.files {
        let path = out_dir.join(&f.name);
        std::fs::write(&path, &f.contents).map_err(|e| CliError::io(&path, e))?;
    }
    let manifest = RunManifest::new(
        config.clone(),
        report.files.iter().map(|f| f.name.clone()).collect(),
        elapsed,
    );
    let path = out_dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.to_json()).map_err(|e| CliError::io(&path, e))?;
    Ok(Execution {
        summary: report.summary,
        manifest,
        error: report.error,
    })
}

fn run_moments(c: &MomentsConfig) -> Result<Report, CliError> {
    let sys = c.system.to_system()?;
    if c.degree == 0 {
        return Err(CliError::input("degree must be ≥ 1"));
    }
    let op = build_moment_operator_capped(&sys, c.degree, c.max_basis)?;
    let mut eig = eigenvalues(&op.matrix)?;
    eig.sort_by(stochstab_core::spectral::spectrum_order);
    let abscissa = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let rate = abscissa / c.degree as f64;

    let mut spectrum = String::from("index,re,im\n");
    for (i, z) in eig.iter().enumerate() {
        writeln!(spectrum, "{i},{},{}", csv_float(z.re), csv_float(z.im)).unwrap();
    }

    let mut summary = String::new();
    writeln!(
        summary,
        "moment operator: dimension {}, degree {}, basis size {}",
        sys.dim,
        c.degree,
        op.basis.len()
    )
    .unwrap();
    writeln!(summary, "spectral abscissa = {}", g6(abscissa)).unwrap();
    writeln!(summary, "lambda_{} = abscissa / {} = {}", c.degree, c.degree, g6(rate)).unwrap();
    let shown = eig.len().min(10);
    let rows: Vec<Vec<String>> = eig[..shown]
        .iter()
        .enumerate()
        .map(|(i, z)| vec![i.to_string(), g6(z.re), g6(z.im)])
        .collect();
    writeln!(summary, "leading eigenvalues ({shown} of {}):", eig.len()).unwrap();
    summary.push_str(&table(&["index", "re", "im"], &rows));

    Ok(Report::ok(
        vec![
            OutputFile::new("operator.txt", operator_text(&op)),
            OutputFile::new("spectrum.csv", spectrum),
        ],
        summary,
    ))
}

/// Row-major matrix with the basis listed in `#` comment lines.
pub fn operator_text(op: &MomentOperator) -> String {
    let n = op.basis.len();
    let mut s = String::new();
    writeln!(
        s,
        "# moment operator: state dimension {}, degree {}, {n} x {n}",
        op.basis.dim(),
        op.degree()
    )
    .unwrap();
    writeln!(s, "# dY/dt = U Y; row r lists the coefficients of dY_r/dt").unwrap();
    writeln!(s, "# basis (zero-based index tuples, Y_r = E[x_k1 ... x_km]):").unwrap();
    for (r, t) in op.basis.iter().enumerate() {
        let idx: Vec<String> = t.iter().map(|k| k.to_string()).collect();
        writeln!(s, "# {r}: ({})", idx.join(",")).unwrap();
    }
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| csv_float(op.matrix[(r, c)])).collect();
        writeln!(s, "{}", row.join(" ")).unwrap();
    }
    s
}

/// Runs the ensemble with chunks spread over the rayon pool. The chunk
/// reduction order is fixed, so the result matches a sequential run bit for
/// bit.
pub fn simulate_parallel(cfg: &EnsembleConfig) -> Result<MomentTrace, SdeError> {
    let plan = EnsemblePlan::new(cfg)?;
    let chunks = (0..plan.chunk_count())
        .into_par_iter()
        .map(|c| plan.run_chunk(c))
        .collect();
    plan.finish(chunks)
}

/// Rate uncertainty from the sampling error of the two window endpoints.
pub fn endpoint_rate_stderr(trace: &MomentTrace, q: &Quantity, window: f64) -> Option<f64> {
    let (values, errs) = trace.series(q)?;
    let (&t0, &t1) = (trace.times.first()?, trace.times.last()?);
    let cut = t1 - window.clamp(0.0, 1.0) * (t1 - t0);
    let first = trace.times.iter().position(|&t| t >= cut)?;
    let last = trace.times.len() - 1;
    if first >= last {
        return None;
    }
    let rel = |i: usize| errs[i] / values[i];
    let span = trace.times[last] - trace.times[first];
    Some((rel(first).powi(2) + rel(last).powi(2)).sqrt() / span)
}

/// Spectral abscissa of the degree-`p` operator, when `|x|^p` is a
/// polynomial and the basis fits under the cap.
fn operator_rate(sys: &stochstab_core::LinearSDESystem, p: u32, cap: usize) -> Result<Option<f64>, CliError> {
    if p % 2 != 0 {
        return Ok(None);
    }
    match basis_size(sys.dim, p as usize) {
        Some(n) if n <= cap as u128 => {}
        _ => return Ok(None),
    }
    let op = build_moment_operator_capped(sys, p as usize, cap)?;
    Ok(Some(spectral_abscissa(&op.matrix)?))
}

pub fn trace_csv(trace: &MomentTrace) -> String {
    let mut s = String::from("t,p,estimate,stderr\n");
    for (q, quantity) in trace.quantities.iter().enumerate() {
        let Quantity::NormPower(p) = quantity else {
            continue;
        };
        for (i, &t) in trace.times.iter().enumerate() {
            writeln!(
                s,
                "{},{p},{},{}",
                csv_float(t),
                csv_float(trace.values[q][i]),
                csv_float(trace.stderr[q][i])
            )
            .unwrap();
        }
    }
    s
}

fn run_simulate(c: &SimulateConfig) -> Result<Report, CliError> {
    let sys = c.system.to_system()?;
    let cfg = EnsembleConfig {
        system: sys.clone(),
        initial_state: c.initial_state.clone(),
        dt: c.dt,
        horizon: c.horizon,
        paths: c.paths,
        seed: c.seed,
        moment_degrees: c.degrees.clone(),
        monomials: Vec::new(),
        sample_count: c.sample_count,
    };
    let (trace, error) = match simulate_parallel(&cfg) {
        Ok(t) => (t, None),
        Err(SdeError::Overflow { time, partial }) => (
            partial,
            Some(CliError::Overflow {
                message: format!(
                    "non-finite state at t = {time}; trace.csv holds the samples before it"
                ),
            }),
        ),
        Err(e) => return Err(e.into()),
    };

    let mut summary = String::new();
    writeln!(
        summary,
        "Euler-Maruyama ensemble: {} paths, dt = {}, horizon = {}, seed = {}",
        c.paths,
        g6(c.dt),
        g6(c.horizon),
        c.seed
    )
    .unwrap();
    for w in cfg.warnings() {
        writeln!(summary, "warning: {w}").unwrap();
    }
    writeln!(
        summary,
        "rates of E|x|^p fitted over the last {}% of the run; operator rate = spectral abscissa of U_p",
        g6(100.0 * c.fit_window)
    )
    .unwrap();
    let mut rows = Vec::new();
    for &p in &c.degrees {
        let q = Quantity::NormPower(p);
        let fit: Option<GrowthFit> = fit_growth_rate(&trace, &q, c.fit_window).ok();
        let mc_se = endpoint_rate_stderr(&trace, &q, c.fit_window);
        let op = operator_rate(&sys, p, c.max_basis)?;
        let na = || "n/a".to_string();
        let agree = match (fit, op, mc_se) {
            (Some(f), Some(o), Some(se)) => {
                let tol = (0.05 * o.abs()).max(3.0 * se);
                if (f.rate - o).abs() <= tol { "yes" } else { "no" }.to_string()
            }
            _ => na(),
        };
        rows.push(vec![
            p.to_string(),
            fit.map_or_else(na, |f| g6(f.rate)),
            mc_se.map_or_else(na, g6),
            fit.map_or_else(na, |f| g6(f.stderr)),
            op.map_or_else(na, g6),
            fit.map_or_else(na, |f| g6(f.rate / p as f64)),
            op.map_or_else(na, |o| g6(o / p as f64)),
            agree,
        ]);
    }
    summary.push_str(&table(
        &[
            "p",
            "mc_rate",
            "mc_stderr",
            "fit_stderr",
            "operator_rate",
            "lambda_p_mc",
            "lambda_p_operator",
            "agree",
        ],
        &rows,
    ));
    if trace.overflow {
        writeln!(summary, "trace truncated by overflow after t = {}", g6(*trace.times.last().unwrap_or(&0.0))).unwrap();
    }
    Ok(Report {
        files: vec![OutputFile::new("trace.csv", trace_csv(&trace))],
        summary,
        error,
    })
}

fn run_langmuir(c: &LangmuirConfig) -> Result<Report, CliError> {
    match c {
        LangmuirConfig::Dispersion { mass, k, k2, sigma2 } => dispersion(*mass, k.values(), *k2, sigma2.values()),
        LangmuirConfig::Whitenoise {
            mass,
            k,
            sigma2,
            at_threshold,
        } => whitenoise(*mass, k.values(), sigma2.values(), *at_threshold),
        LangmuirConfig::Boundstate {
            mass,
            profile,
            well,
            lambda,
        } => boundstate(*mass, profile, well, lambda.map(|a| a.values())),
        LangmuirConfig::Threshold {
            mass,
            profile,
            well,
            k,
        } => threshold(*mass, profile, well, k.values()),
        LangmuirConfig::Appendix { eps1, eps2, sigma2 } => appendix(eps1.values(), eps2.values(), sigma2.values()),
    }
}

fn cartesian(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

/// Collects results in input order, stopping at the first error.
fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, CliError> + Sync + Send,
{
    items.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

fn stability_rows_table(rows: &[(f64, f64, f64, &'static str)]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|&(k, s, r, v)| vec![g6(k), g6(s), g6(r), v.to_string()])
        .collect();
    table(&["k", "sigma2", "max_real_lambda", "verdict"], &cells)
}

const TABLE_ROWS: usize = 24;

fn verdict_counts(verdicts: impl Iterator<Item = &'static str>) -> String {
    let (mut s, mut m, mut u) = (0, 0, 0);
    for v in verdicts {
        match v {
            "stable" => s += 1,
            "marginal" => m += 1,
            _ => u += 1,
        }
    }
    format!("{s} stable, {m} marginal, {u} unstable")
}

fn dispersion(mass: f64, ks: Vec<f64>, k2: Option<f64>, s2: Vec<f64>) -> Result<Report, CliError> {
    let points = cartesian(&ks, &s2);
    let results = par_map(&points, |&(k, s)| {
        Ok(dispersion_complete_correlation(mass, k, k2.unwrap_or(k), s)?)
    })?;
    let mut head = String::new();
    writeln!(head, "{UNITS_NOTE}").unwrap();
    writeln!(head, "# constant correlation, plasma mass m = {mass}").unwrap();
    match k2 {
        Some(k2) => writeln!(head, "# second wavenumber k2 = {k2}").unwrap(),
        None => writeln!(head, "# mode pair k1 = k2 = k").unwrap(),
    }
    let mut map = head.clone();
    map.push_str("k,sigma2,max_real_lambda,verdict\n");
    let mut roots = head;
    roots.push_str("k,sigma2,re,im\n");
    let mut rows = Vec::new();
    for (&(k, s), r) in points.iter().zip(&results) {
        let v = r.classification.as_str();
        writeln!(map, "{},{},{},{v}", csv_float(k), csv_float(s), csv_float(r.max_real)).unwrap();
        for z in &r.roots {
            writeln!(roots, "{},{},{},{}", csv_float(k), csv_float(s), csv_float(z.re), csv_float(z.im)).unwrap();
        }
        rows.push((k, s, r.max_real, v));
    }

    let mut summary = String::from("constant-correlation dispersion quartic\n");
    if let [r] = results.as_slice() {
        let cells: Vec<Vec<String>> = r.roots.iter().map(|z| vec![g6(z.re), g6(z.im)]).collect();
        summary.push_str(&table(&["re", "im"], &cells));
    }
    summary.push_str(&summarize_map(&rows));
    Ok(Report::ok(
        vec![
            OutputFile::new("stability_map.csv", map),
            OutputFile::new("roots.csv", roots),
        ],
        summary,
    ))
}

fn summarize_map(rows: &[(f64, f64, f64, &'static str)]) -> String {
    if rows.len() <= TABLE_ROWS {
        stability_rows_table(rows)
    } else {
        format!(
            "{} grid points: {}\n",
            rows.len(),
            verdict_counts(rows.iter().map(|r| r.3))
        )
    }
}

fn whitenoise(mass: f64, ks: Vec<f64>, s2: Vec<f64>, at_threshold: bool) -> Result<Report, CliError> {
    let points: Vec<(f64, f64)> = if at_threshold {
        ks.iter().map(|&k| (k, white_noise_threshold(mass, k).sqrt())).collect()
    } else {
        cartesian(&ks, &s2)
    };
    let results = par_map(&points, |&(k, s)| Ok(white_noise_growth(mass, k, s)?))?;
    let mut csv = String::new();
    writeln!(csv, "{UNITS_NOTE}").unwrap();
    writeln!(
        csv,
        "# delta-correlated noise in one dimension, plasma mass m = {mass}; threshold sigma2^2 = 4 k^2 (4 m^2 + k^2)"
    )
    .unwrap();
    csv.push_str("k,sigma2,max_real_lambda,verdict\n");
    let mut rows = Vec::new();
    for (&(k, s), r) in points.iter().zip(&results) {
        let v = r.classification.as_str();
        writeln!(csv, "{},{},{},{v}", csv_float(k), csv_float(s), csv_float(r.max_real)).unwrap();
        rows.push((k, s, r.max_real, v));
    }
    let mut summary = String::from("white-noise growth rates\n");
    if let [(k, _)] = points.as_slice() {
        let t = white_noise_threshold(mass, *k);
        writeln!(summary, "threshold sigma2^2 = {} (sigma2 = {})", g6(t), g6(t.sqrt())).unwrap();
    }
    summary.push_str(&summarize_map(&rows));
    Ok(Report::ok(vec![OutputFile::new("stability_map.csv", csv)], summary))
}

fn bound_options(well: &WellConfig) -> BoundStateOptions {
    BoundStateOptions {
        half_width: well.half_width,
        grid_points: well.grid_points,
        ..BoundStateOptions::default()
    }
}

fn boundstate(
    mass: f64,
    profile: &ProfileConfig,
    well: &WellConfig,
    lambdas: Option<Vec<f64>>,
) -> Result<Report, CliError> {
    let prof = profile.build()?;
    let problem = LangmuirProblem::new(mass, 0.0, prof)?;
    let root = find_growth_rate_k0(&problem, &bound_options(well))?;
    let mut lambdas = lambdas.unwrap_or_else(|| {
        (1..=32).map(|i| root.lambda * i as f64 / 16.0).collect()
    });
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(CliError::input("lambda values must be positive"));
    }
    lambdas.push(root.lambda);
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();

    let grid = WellGrid::new(&prof, root.half_width, root.grid_points)?;
    let energies: Vec<f64> = lambdas.par_iter().map(|&l| grid.lowest(l, 1.0)).collect();
    let mut csv = String::new();
    writeln!(csv, "{UNITS_NOTE}").unwrap();
    writeln!(csv, "{REDUCTION_NOTE}").unwrap();
    writeln!(csv, "# k = 0 mode; {}; plasma mass m = {mass}", profile.describe()).unwrap();
    writeln!(
        csv,
        "# Dirichlet box |x| < {}, {} interior points; matching residual = E_lambda + m^2 + lambda^2/4",
        root.half_width, root.grid_points
    )
    .unwrap();
    writeln!(csv, "# growth rate lambda* = {}", csv_float(root.lambda)).unwrap();
    csv.push_str("lambda,E_lambda,matching_residual\n");
    for (&l, &e) in lambdas.iter().zip(&energies) {
        let r = e + mass * mass + l * l / 4.0;
        writeln!(csv, "{},{},{}", csv_float(l), csv_float(e), csv_float(r)).unwrap();
    }

    let mut summary = String::new();
    writeln!(summary, "k = 0 bound-state growth rate, {}", profile.describe()).unwrap();
    writeln!(summary, "lambda* = {}", g6(root.lambda)).unwrap();
    writeln!(summary, "E_lambda* = {}", g6(root.energy)).unwrap();
    writeln!(summary, "matching residual = {:.3e}", root.residual).unwrap();
    writeln!(
        summary,
        "grid: {} points on |x| < {}",
        root.grid_points,
        g6(root.half_width)
    )
    .unwrap();
    Ok(Report::ok(vec![OutputFile::new("boundstate.csv", csv)], summary))
}

fn threshold(mass: f64, profile: &ProfileConfig, well: &WellConfig, ks: Vec<f64>) -> Result<Report, CliError> {
    let problem = LangmuirProblem::new(mass, 0.0, profile.build()?)?;
    let opts = bound_options(well);
    let results = par_map(&ks, |&k| Ok(stability_threshold_k(&problem, k, &opts)?))?;
    let mut csv = String::new();
    writeln!(csv, "{UNITS_NOTE}").unwrap();
    writeln!(csv, "{REDUCTION_NOTE}").unwrap();
    writeln!(csv, "# {}; plasma mass m = {mass}", profile.describe()).unwrap();
    writeln!(
        csv,
        "# verdict at amplitude c; min_matching = min over lambda of E_k(lambda) + m^2 + k^2/4 + lambda^2/4"
    )
    .unwrap();
    csv.push_str("k,critical_amplitude,verdict,min_matching,argmin_lambda,half_width,grid_points\n");
    let mut rows = Vec::new();
    for (&k, r) in ks.iter().zip(&results) {
        let v = r.verdict.stability.as_str();
        writeln!(
            csv,
            "{},{},{v},{},{},{},{}",
            csv_float(k),
            csv_float(r.critical_amplitude),
            csv_float(r.verdict.min_matching),
            csv_float(r.verdict.argmin_lambda),
            csv_float(r.half_width),
            r.grid_points
        )
        .unwrap();
        rows.push(vec![
            g6(k),
            g6(r.critical_amplitude),
            v.to_string(),
            g6(r.verdict.min_matching),
        ]);
    }
    let mut summary = format!("k > 0 stability thresholds, {}\n", profile.describe());
    summary.push_str(&table(&["k", "critical_amplitude", "verdict", "min_matching"], &rows));
    Ok(Report::ok(vec![OutputFile::new("threshold.csv", csv)], summary))
}

fn appendix(e1: Vec<f64>, e2: Vec<f64>, s2: Vec<f64>) -> Result<Report, CliError> {
    let points: Vec<(f64, f64, f64)> = e1
        .iter()
        .flat_map(|&a| cartesian(&e2, &s2).into_iter().map(move |(b, s)| (a, b, s)))
        .collect();
    let results = par_map(&points, |&(a, b, s)| {
        let residual = appendix_dispersion_check(a, b, s)?;
        let matrix = appendix_abscissa(a, b, s)?;
        let quartic = dispersion_from_eps(a, b, s)?.max_real;
        Ok((residual, matrix, quartic))
    })?;
    let mut csv = String::new();
    writeln!(csv, "{UNITS_NOTE}").unwrap();
    writeln!(
        csv,
        "# 4x4 matrix E1 x 1 + 1 x E2 + sigma2 a x a; residual = max over its eigenvalues of the dispersion relation"
    )
    .unwrap();
    csv.push_str("eps1,eps2,sigma2,residual,matrix_abscissa,quartic_abscissa\n");
    let (mut worst, mut gap) = (0.0f64, 0.0f64);
    for (&(a, b, s), &(r, m, q)) in points.iter().zip(&results) {
        worst = worst.max(r);
        gap = gap.max((m - q).abs());
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            csv_float(a),
            csv_float(b),
            csv_float(s),
            csv_float(r),
            csv_float(m),
            csv_float(q)
        )
        .unwrap();
    }
    let mut summary = String::from("appendix matrix check\n");
    if let [(r, m, q)] = results.as_slice() {
        writeln!(summary, "matrix abscissa = {}, quartic abscissa = {}", g6(*m), g6(*q)).unwrap();
        writeln!(summary, "residual = {r:.3e}").unwrap();
    } else {
        writeln!(summary, "{} grid points", points.len()).unwrap();
        writeln!(summary, "max residual = {worst:.3e}").unwrap();
    }
    writeln!(summary, "max |matrix abscissa - quartic abscissa| = {gap:.3e}").unwrap();
    Ok(Report::ok(vec![OutputFile::new("appendix.csv", csv)], summary))
}
