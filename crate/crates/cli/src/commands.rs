use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use serde::Serialize;
use serde_json::json;
use sphereforge::design::{
    design_residual, evenly_spaced_circle, solve_uniform_design, solve_weights, verify_weighted_design,
    PerturbConfig, WeightOutcome,
};
use sphereforge::hermite::per_degree_gaussian_residual;
use sphereforge::mixture::{null_sample, SampleBatch};
use sphereforge::records::{artifact_kind, Artifact, Provenance};
use sphereforge::rng::{child_seed, sphere_points, Purpose};
use sphereforge::sq::{
    bonferroni_threshold, lowdeg_distinguisher, power_curve, write_power_csv, OracleMode,
    PowerFamily, Source, StatOracleConfig, Statistic,
};
use sphereforge::{MixtureInstance, WeightedDesign};

use crate::artifacts::*;
use crate::inputs::{read_design, read_instance, read_points, read_text};
use crate::{
    CliError, CliResult, DesignUniformArgs, DesignWeightedArgs, InstanceArgs, OracleArgs, PowerArgs, SampleArgs,
    SqArgs, VerifyArgs,
};

fn write_artifact<T: Serialize>(path: &Path, kind: &str, seed: Option<u64>, config: serde_json::Value, payload: T) -> Result<(), CliError> {
    let provenance = Provenance::new(seed, &config)?;
    Artifact::new(kind, provenance, payload)
        .write(path)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(CliError::failure)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(CliError::failure)
}

fn exit(ok: bool) -> CliResult {
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn design_uniform(a: &DesignUniformArgs) -> CliResult {
    let (points, initial) = match &a.points {
        Some(path) => {
            let p = read_points(path)?;
            (p.clone(), json!(p))
        }
        None => {
            let (Some(d), Some(r)) = (a.d, a.r) else {
                return Err(CliError::usage(anyhow!("--d and --r are required without --points")));
            };
            (sphere_points(a.seed, Purpose::InitialPoints, r, d), json!("seeded"))
        }
    };
    let (d, r) = (points[0].len(), points.len());
    if a.d.is_some_and(|x| x != d) || a.r.is_some_and(|x| x != r) {
        return Err(CliError::usage(anyhow!("--d/--r disagree with the point file ({r} points in dimension {d})")));
    }
    let config = PerturbConfig {
        delta: a.delta,
        damping: a.damping,
        tolerance: a.tolerance,
        max_iterations: a.max_iterations,
        ..PerturbConfig::default()
    };
    let (z, report) = solve_uniform_design(&points, a.t, &config)?;
    let design = WeightedDesign::uniform(z)?;
    for (deg, res) in &report.residuals {
        println!("degree {deg}: residual {res:.3e}");
    }
    println!(
        "converged: {} after {} iterations; max displacement {:.4e}; separation {:.4e} -> {:.4e}",
        report.converged,
        report.iterations(),
        report.max_displacement,
        report.separation_before,
        report.separation_after
    );
    let converged = report.converged;
    let cfg = json!({ "d": d, "t": a.t, "r": r, "initial_points": initial, "solver": config });
    write_artifact(&a.out, DESIGN, Some(a.seed), cfg, DesignFile { design, solve: Some(report) })?;
    exit(converged)
}

pub fn design_weighted(a: &DesignWeightedArgs) -> CliResult {
    if let Some(k) = a.circle {
        let design = evenly_spaced_circle(k)?;
        println!("evenly spaced circle, {k} points");
        write_artifact(&a.out, DESIGN, None, json!({ "circle": k }), DesignFile { design, solve: None })?;
        return exit(true);
    }
    let path = a.points.as_ref().expect("clap requires --points without --circle");
    let k = a.k.expect("clap requires --k without --circle");
    let points = read_points(path)?;
    let outcome = solve_weights(&points, k)?;
    match &outcome {
        WeightOutcome::Feasible { lp_residual, design } => {
            let positive = design.weights().iter().filter(|&&w| w > 0.0).count();
            println!("feasible: {positive} of {} weights positive, LP residual {lp_residual:.3e}", design.len());
        }
        WeightOutcome::Infeasible { certificate } => {
            println!("infeasible: certificate margin {:.6e}", certificate.margin);
        }
    }
    let cfg = json!({ "k": k, "points": points });
    write_artifact(&a.out, WEIGHT_SOLUTION, None, cfg, WeightSolutionFile { k, points, outcome })?;
    exit(true)
}

fn residual_report(design: &WeightedDesign, k: u32, tolerance: f64) -> Result<VerifyFile, CliError> {
    let sphere = verify_weighted_design(design, k)?.per_degree;
    let gaussian = per_degree_gaussian_residual(design, k);
    let passed = sphere.iter().chain(&gaussian).all(|&(_, v)| v <= tolerance);
    Ok(VerifyFile { k, tolerance, sphere, gaussian, passed })
}

pub fn verify(a: &VerifyArgs) -> CliResult {
    let text = read_text(&a.file)?;
    let kind = artifact_kind(&text)
        .with_context(|| format!("malformed record {}", a.file.display()))
        .map_err(CliError::usage)?;
    let k = a.k.or(a.t.map(|t| t + 1));
    if a.t.is_some_and(|t| t % 2 == 0) {
        return Err(CliError::usage(anyhow!("--t must be odd")));
    }
    if let Some(k) = k {
        if k < 2 {
            return Err(CliError::usage(anyhow!("--k must be at least 2")));
        }
        let design = read_design(&a.file)?;
        let report = residual_report(&design, k, a.tolerance)?;
        for ((deg, s), (_, g)) in report.sphere.iter().zip(&report.gaussian) {
            let mark = if *s <= a.tolerance && *g <= a.tolerance { "pass" } else { "FAIL" };
            println!("degree {deg}: sphere {s:.3e}, gaussian {g:.3e} {mark}");
        }
        println!("{}", if report.passed { "PASS" } else { "FAIL" });
        let passed = report.passed;
        if let Some(out) = &a.out {
            let cfg = json!({ "k": k, "tolerance": a.tolerance });
            write_artifact(out, VERIFY_REPORT, None, cfg, report)?;
        }
        return exit(passed);
    }
    let checks = check_artifact(&kind, &text, a.tolerance).map_err(CliError::usage)?;
    for (name, ok) in &checks {
        println!("{name}: {}", if *ok { "ok" } else { "FAIL" });
    }
    let passed = checks.iter().all(|c| c.1);
    println!("{kind}: {}", if passed { "PASS" } else { "FAIL" });
    exit(passed)
}

/// Named invariant checks for each artifact kind.
fn check_artifact(kind: &str, text: &str, tol: f64) -> anyhow::Result<Vec<(String, bool)>> {
    let mut out = Vec::new();
    match kind {
        DESIGN => {
            // loading validates unit norms and weights
            let file = Artifact::<DesignFile>::from_json(text, kind)?.payload;
            out.push(("points and weights".into(), true));
            if let Some(rep) = file.solve {
                let res = design_residual(file.design.points(), rep.t)?;
                let below = res.iter().all(|&(_, v)| v <= rep.tolerance);
                out.push(("stored residuals reproduce".into(), residuals_match(&res, &rep.residuals)));
                out.push(("converged flag agrees".into(), below == rep.converged));
                out.push((
                    "separation bound".into(),
                    rep.separation_after >= rep.separation_before - 2.0 * rep.max_displacement - 1e-12,
                ));
            }
        }
        WEIGHT_SOLUTION => {
            let file = Artifact::<WeightSolutionFile>::from_json(text, kind)?.payload;
            match &file.outcome {
                WeightOutcome::Feasible { design, .. } => {
                    out.push(("design matches its points".into(), design.points() == file.points.as_slice()));
                    let rep = verify_weighted_design(design, file.k)?;
                    out.push((format!("odd moments below {} vanish", file.k), rep.max <= tol.max(1e-9)));
                }
                WeightOutcome::Infeasible { certificate } => {
                    let margin = certificate.margin_on(&file.points);
                    out.push(("certificate positive on every point".into(), margin > 0.0));
                    out.push((
                        "margin above the numerical floor".into(),
                        margin > 1e-9 * certificate.coefficient_norm(),
                    ));
                    out.push((
                        "certificate is odd of degree < k".into(),
                        certificate.monomials.iter().all(|m| m.degree() % 2 == 1 && m.degree() < file.k),
                    ));
                }
            }
        }
        INSTANCE => {
            let file = Artifact::<InstanceFile>::from_json(text, kind)?.payload;
            let fresh = file.instance.checks();
            out.push(("rows of U orthonormal".into(), fresh.orthonormality_defect <= 1e-10));
            out.push(("pairwise distances preserved".into(), fresh.isometry_defect <= 1e-10));
            out.push(("stored checks reproduce".into(), fresh == file.checks));
        }
        SQ_REPORT => {
            let file = Artifact::<SqFile>::from_json(text, kind)?.payload;
            for r in &file.reports {
                let score = r.statistics.iter().map(Statistic::score).fold(0.0, f64::max);
                let ok = r.threshold == bonferroni_threshold(r.statistics.len())
                    && score == r.max_score
                    && r.detected == (score > r.threshold);
                out.push((format!("degree {} report consistent", r.degree), ok));
            }
        }
        POWER => {
            let file = Artifact::<PowerFile>::from_json(text, kind)?.payload;
            for r in &file.rows {
                let rate = if r.runs == 0 { 0.0 } else { r.detections as f64 / r.runs as f64 };
                out.push((format!("degree {} row consistent", r.degree), r.detections <= r.runs && r.rate == rate));
            }
        }
        VERIFY_REPORT => {
            let file = Artifact::<VerifyFile>::from_json(text, kind)?.payload;
            let passed = file.sphere.iter().chain(&file.gaussian).all(|&(_, v)| v <= file.tolerance);
            out.push(("verdict agrees with residuals".into(), passed == file.passed));
        }
        other => return Err(anyhow!("unknown record kind {other:?}")),
    }
    Ok(out)
}

fn residuals_match(a: &[(u32, f64)], b: &[(u32, f64)]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.0 == y.0 && (x.1 - y.1).abs() <= 1e-12 + 1e-6 * y.1)
}

fn write_samples(batch: &SampleBatch, path: &Path) -> Result<(), CliError> {
    let mut w = create(path)?;
    batch.write_csv(&mut w)?;
    w.flush().map_err(CliError::failure)
}

pub fn instance(a: &InstanceArgs) -> CliResult {
    let design = read_design(&a.design)?;
    let instance = MixtureInstance::build(&design, a.n, a.seed)?;
    let checks = instance.checks();
    println!(
        "instance: {} directions in R^{}, orthonormality defect {:.2e}, isometry defect {:.2e}",
        design.len(),
        a.n,
        checks.orthonormality_defect,
        checks.isometry_defect
    );
    let batch = instance.sample(a.count, child_seed(a.seed, 1));
    write_samples(&batch, &a.samples)?;
    let cfg = json!({ "n": a.n, "count": a.count, "sample_seed": child_seed(a.seed, 1) });
    write_artifact(&a.out, INSTANCE, Some(a.seed), cfg, InstanceFile { instance, checks })?;
    exit(true)
}

pub fn sample(a: &SampleArgs) -> CliResult {
    let batch = match (&a.instance, a.null_dim) {
        (Some(path), _) => read_instance(path)?.instance.sample(a.count, a.seed),
        (None, Some(n)) => null_sample(n, a.count, a.seed),
        (None, None) => unreachable!("clap requires a source"),
    };
    write_samples(&batch, &a.out)?;
    println!("{} samples written", batch.len());
    exit(true)
}

fn oracle_config(o: &OracleArgs) -> Result<StatOracleConfig, CliError> {
    let mode: OracleMode = o.mode.parse()?;
    if o.budget == 0 {
        return Err(CliError::usage(anyhow!("--budget must be positive")));
    }
    if o.degrees.contains(&0) {
        return Err(CliError::usage(anyhow!("degrees must be at least 1")));
    }
    let mut cfg = StatOracleConfig::with_mode(o.budget, mode, o.seed);
    if let Some(tau) = o.tau {
        if mode == OracleMode::Sampled {
            return Err(CliError::usage(anyhow!("--tau applies to adversarial mode; sampled mode derives it from --budget")));
        }
        if !(tau > 0.0) {
            return Err(CliError::usage(anyhow!("--tau must be positive")));
        }
        cfg = StatOracleConfig::adversarial(tau, o.seed);
    }
    Ok(cfg)
}

pub fn sq(a: &SqArgs) -> CliResult {
    let config = oracle_config(&a.oracle)?;
    let file = a.instance.as_ref().map(|p| read_instance(p)).transpose()?;
    let (source, name) = match (&file, a.null_dim) {
        (Some(f), _) => (Source::Instance(&f.instance), "instance"),
        (None, Some(n)) => (Source::Null { n }, "null"),
        (None, None) => unreachable!("clap requires a source"),
    };
    let mut reports = Vec::new();
    for &deg in &a.oracle.degrees {
        let r = lowdeg_distinguisher(source, deg, &config)?;
        println!(
            "degree {deg}: {} queries, max score {:.3} vs threshold {:.3}: {}",
            r.query_count,
            r.max_score,
            r.threshold,
            if r.detected { "detected" } else { "not detected" }
        );
        reports.push(r);
    }
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        for (i, r) in reports.iter().enumerate() {
            let mut buf = Vec::new();
            r.write_csv(&mut buf)?;
            let text = String::from_utf8(buf).expect("csv is utf-8");
            let body = if i == 0 { &text[..] } else { text.split_once('\n').map_or("", |s| s.1) };
            w.write_all(body.as_bytes()).map_err(CliError::failure)?;
        }
        w.flush().map_err(CliError::failure)?;
    }
    let cfg = json!({ "source": name, "degrees": a.oracle.degrees, "oracle": config });
    let n = source.dim();
    write_artifact(&a.out, SQ_REPORT, Some(config.seed), cfg, SqFile { source: name.into(), n, reports })?;
    exit(true)
}

pub fn power(a: &PowerArgs) -> CliResult {
    let config = oracle_config(&a.oracle)?;
    let (family, name) = match &a.design {
        Some(path) if !a.null => (PowerFamily::Design { design: read_design(path)?, n: a.n }, "design"),
        _ => (PowerFamily::Null { n: a.n }, "null"),
    };
    if let PowerFamily::Design { design, n } = &family {
        if design.dim() > *n {
            return Err(CliError::usage(anyhow!("design dimension {} exceeds n = {n}", design.dim())));
        }
    }
    let rows = power_curve(&family, &a.oracle.degrees, a.runs, &config)?;
    for r in &rows {
        println!("degree {}: {}/{} detections", r.degree, r.detections, r.runs);
    }
    let mut w = create(&a.out)?;
    write_power_csv(&rows, &mut w)?;
    w.flush().map_err(CliError::failure)?;
    if let Some(path) = &a.record {
        let cfg = json!({ "source": name, "n": a.n, "runs": a.runs, "degrees": a.oracle.degrees, "oracle": config });
        write_artifact(path, POWER, Some(config.seed), cfg, PowerFile { source: name.into(), rows })?;
    }
    exit(true)
}
