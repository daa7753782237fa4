//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

#[path = "../../core/tests/common.rs"]
mod common;
mod support;

use std::time::{Duration, Instant};

use common::{bridge_family, mean_se, random_unit_poly, rng};
use serde_json::Value;
use sphereforge::design::{
    concentration_check, default_delta, evenly_spaced_circle, increment_check, min_separation, solve_uniform_design,
    solve_weights, verify_weighted_design, PerturbConfig, WeightOutcome,
};
use sphereforge::hermite::mixture_gaussian_residual;
use sphereforge::poly::dim_homogeneous;
use sphereforge::rng::{sphere_point, sphere_points, Purpose};
use sphereforge::sq::{
    hoeffding_tolerance, lowdeg_distinguisher, power_curve, PowerFamily, Source, StatOracleConfig, StatisticKind,
};
use sphereforge::{MixtureInstance, WeightedDesign};
use support::{code, full_pipeline, run};
use tempfile::TempDir;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn circle_moments() -> Outcome {
    let start = Instant::now();
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let mut ok = true;
    let mut worst_lower: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for k in [3u32, 5, 7, 9, 11] {
        let file = format!("c{k}.json");
        ok &= code(&run(d, &["design-weighted", "--circle", &k.to_string(), "--out", &file])) == 0;
        let report = format!("v{k}.json");
        let out = run(d, &["verify", &file, "--t", &k.to_string(), "--tolerance", "1e-12", "--out", &report]);
        ok &= code(&out) == 1;
        ok &= code(&run(d, &["verify", &file, "--t", &(k - 2).to_string(), "--tolerance", "1e-12"])) == 0;
        let rec: Value = serde_json::from_str(&std::fs::read_to_string(d.join(&report)).unwrap()).unwrap();
        for entry in rec["sphere"].as_array().unwrap() {
            let (deg, res) = (entry[0].as_u64().unwrap() as u32, entry[1].as_f64().unwrap());
            if deg < k {
                worst_lower = worst_lower.max(res);
            } else {
                ok &= res > 1e-12;
            }
        }
        // mean of x₁^k over the k-th roots of unity: 2^{1-k}
        let design: Value = serde_json::from_str(&std::fs::read_to_string(d.join(&file)).unwrap()).unwrap();
        let flat: Vec<f64> = design["points"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let mean = flat.chunks(2).map(|p| p[0].powi(k as i32)).sum::<f64>() / k as f64;
        worst_oracle = worst_oracle.max((mean - 2f64.powi(1 - k as i32)).abs());
    }
    let elapsed = start.elapsed();
    ok &= worst_lower <= 1e-12 && worst_oracle <= 1e-14 && within(elapsed, 1);
    outcome(
        ok,
        format!("max residual below k {worst_lower:.1e}, degree-k mean off 2^(1-k) by {worst_oracle:.1e}, {elapsed:.2?}"),
    )
}

fn weight_lp() -> Outcome {
    let start = Instant::now();
    let (d, k) = (3usize, 4u32);
    // ten times C(7, 4)
    let r = 350;
    let mut feasible = 0;
    let mut certified = 0;
    for seed in 0..100u64 {
        let pts = sphere_points(seed, Purpose::InitialPoints, r, d);
        if let Ok(WeightOutcome::Feasible { design, .. }) = solve_weights(&pts, k) {
            if verify_weighted_design(&design, k).map(|v| v.max <= 1e-9).unwrap_or(false) {
                feasible += 1;
            }
        }
        let few = sphere_points(1000 + seed, Purpose::InitialPoints, 5, d);
        if let Ok(WeightOutcome::Infeasible { certificate }) = solve_weights(&few, k) {
            let odd = certificate.monomials.iter().all(|m| m.degree() % 2 == 1 && m.degree() < k);
            if odd && certificate.margin_on(&few) > 0.0 {
                certified += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        feasible >= 95 && certified >= 95 && within(elapsed, 30),
        format!("r={r}: {feasible}/100 feasible and verified; r=5: {certified}/100 certified; {elapsed:.2?}"),
    )
}

fn uniform_solver() -> Outcome {
    let start = Instant::now();
    let (mut converged, mut residual, mut displacement, mut separation, mut all) = (0, 0, 0, 0, 0);
    let mut worst_disp: f64 = 0.0;
    for seed in 0..100u64 {
        let y = sphere_points(seed, Purpose::InitialPoints, 500, 3);
        let Ok((_, rep)) = solve_uniform_design(&y, 3, &PerturbConfig::default()) else { continue };
        let c = rep.converged;
        let res = rep.residuals.iter().all(|&(_, v)| v <= 1e-8);
        let disp = rep.max_displacement <= 0.1;
        let sep = rep.separation_after >= rep.separation_before - 2.0 * rep.max_displacement;
        worst_disp = worst_disp.max(rep.max_displacement);
        converged += c as u32;
        residual += res as u32;
        displacement += disp as u32;
        separation += sep as u32;
        all += (c && res && disp && sep) as u32;
    }
    let elapsed = start.elapsed();
    outcome(
        all >= 90 && within(elapsed, 300),
        format!(
            "{all}/100 seeds meet every condition (converged {converged}, residual {residual}, \
             displacement ≤ 0.1 {displacement}, separation {separation}; largest displacement {worst_disp:.3}), {elapsed:.1?}"
        ),
    )
}

fn gradient_energy() -> Outcome {
    let start = Instant::now();
    let mut g = rng(4);
    let mut ok = true;
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper: f64 = 0.0;
    for (d, t) in [(2usize, 3u32), (3, 3), (4, 5)] {
        let pts = sphere_points(40 + d as u64, Purpose::Trials, 20_000, d);
        let upper = (t * (d as u32 + 2 * t - 2)) as f64;
        for _ in 0..100 {
            let p = random_unit_poly(&mut g, d, t);
            let tang: Vec<f64> =
                pts.iter().map(|x| p.tangential_gradient(x).unwrap().iter().map(|v| v * v).sum()).collect();
            let full: Vec<f64> = pts.iter().map(|x| p.gradient(x).unwrap().iter().map(|v| v * v).sum()).collect();
            let (mt, st) = mean_se(&tang);
            let (mf, sf) = mean_se(&full);
            // standard errors relative to the estimate
            ok &= mt >= (d - 1) as f64 * (1.0 - 3.0 * st / mt);
            ok &= mf <= upper * (1.0 + 3.0 * sf / mf);
            worst_lower = worst_lower.min(mt / (d - 1) as f64);
            worst_upper = worst_upper.max(mf / upper);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within(elapsed, 60),
        format!(
            "smallest E‖∇ₒp‖²/(d-1) {worst_lower:.3}, largest E‖∇p‖²/(t(d+2t-2)) {worst_upper:.3}, {elapsed:.1?}"
        ),
    )
}

fn increment() -> Outcome {
    let (d, t) = (3usize, 3u32);
    let delta = default_delta(t, d).unwrap();
    let mut g = rng(5);
    let mut held = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let p = random_unit_poly(&mut g, d, t);
        let y = sphere_point(&mut g, d);
        let (lhs, rhs) = increment_check(&p, &y, delta).unwrap();
        if lhs >= 0.5 * rhs {
            held += 1;
        }
        if rhs > 0.0 {
            worst = worst.min(lhs / rhs);
        }
    }
    outcome(held == 10_000, format!("{held}/10000 pairs, smallest ratio {worst:.4}"))
}

fn concentration() -> Outcome {
    let (d, t, eta) = (3usize, 3u32, 0.2);
    let n = dim_homogeneous(t, d).unwrap() as f64;
    let r = (100.0 * n / (eta * eta)).round() as usize;
    let trials = 200;
    let rep = concentration_check(r, t, d, eta, trials, 6).unwrap();
    let se = (0.01f64 * 0.99 / trials as f64).sqrt();
    outcome(
        rep.failure_rate <= 0.01 + 3.0 * se,
        format!("r={r}: violation rate {:.3} over {trials} trials (limit {:.3})", rep.failure_rate, 0.01 + 3.0 * se),
    )
}

fn total_variation() -> Outcome {
    let start = Instant::now();
    let single = WeightedDesign::new(vec![vec![0.6, 0.8]], vec![1.0]).unwrap();
    let (tv_single, _) = MixtureInstance::build(&single, 6, 1).unwrap().tv_lower_estimate(100_000, 2).unwrap();
    let pair = WeightedDesign::new(vec![vec![0.6, 0.8], vec![-0.6, -0.8]], vec![0.5, 0.5]).unwrap();
    let (tv_pair, _) = MixtureInstance::build(&pair, 6, 1).unwrap().tv_lower_estimate(100_000, 3).unwrap();
    let mut ratios = Vec::new();
    for k in [3usize, 5, 7, 9, 11] {
        let design = evenly_spaced_circle(k).unwrap();
        let (tv, _) = MixtureInstance::build(&design, 10, k as u64).unwrap().tv_lower_estimate(200_000, 4).unwrap();
        ratios.push(tv * k as f64 / min_separation(design.points()).unwrap());
    }
    let elapsed = start.elapsed();
    let ratio_text: Vec<String> = ratios.iter().map(|c| format!("{c:.3}")).collect();
    outcome(
        (tv_single - 0.5).abs() <= 0.005 && tv_pair == 0.0 && ratios.iter().all(|&c| c > 0.0) && within(elapsed, 60),
        format!(
            "halfspace {tv_single:.4}, antipodal pair {tv_pair}, tv·r/Δ for k=3..11 [{}], {elapsed:.1?}",
            ratio_text.join(", ")
        ),
    )
}

fn sq_phenomenology() -> Outcome {
    let start = Instant::now();
    let design = evenly_spaced_circle(5).unwrap();
    let family = PowerFamily::Design { design: design.clone(), n: 10 };
    let config = StatOracleConfig::sampled(1_000_000, 8);
    let low = power_curve(&family, &[1, 2, 3], 100, &config).unwrap();
    let high = power_curve(&family, &[5], 100, &config).unwrap();
    let low_ok = low.iter().all(|r| r.detections <= 5);
    let high_ok = high[0].detections >= 95;

    let mut exact = true;
    for seed in 0..10u64 {
        let inst = MixtureInstance::build(&design, 10, seed).unwrap();
        for tau in [hoeffding_tolerance(1_000_000), 1e-4] {
            let cfg = StatOracleConfig::adversarial(tau, seed);
            let a = lowdeg_distinguisher(Source::Instance(&inst), 5, &cfg).unwrap();
            let b = lowdeg_distinguisher(Source::Null { n: 10 }, 5, &cfg).unwrap();
            exact &= a
                .statistics
                .iter()
                .zip(&b.statistics)
                .filter(|(s, _)| s.kind == StatisticKind::Query && s.degree < 5)
                .all(|(s, u)| s.value == u.value);
        }
    }
    let elapsed = start.elapsed();
    let low_text: Vec<String> = low.iter().map(|r| format!("D={}: {}", r.degree, r.detections)).collect();
    outcome(
        low_ok && high_ok && exact && within(elapsed, 600),
        format!(
            "detections per 100 runs {}, D=5: {}; adversarial degree<5 answers equal null: {exact}; {elapsed:.0?}",
            low_text.join(", "),
            high[0].detections
        ),
    )
}

fn bridge() -> Outcome {
    let mut disagreements = 0;
    let mut mislabelled = 0;
    let family = bridge_family(50, 91);
    for (design, k, satisfying) in &family {
        let sphere = verify_weighted_design(design, *k).unwrap().max <= 1e-9;
        let gauss = mixture_gaussian_residual(design, *k) <= 1e-9;
        disagreements += (sphere != gauss) as u32;
        mislabelled += (sphere != *satisfying) as u32;
    }
    let satisfying = family.iter().filter(|f| f.2).count();
    outcome(
        disagreements == 0 && mislabelled == 0,
        format!("{} designs ({satisfying} satisfying), {disagreements} disagreements", family.len()),
    )
}

fn reproducibility() -> Outcome {
    let a = full_pipeline("1");
    let same = a == full_pipeline("1");
    let threads = a == full_pipeline("3");
    outcome(same && threads, format!("{} files; rerun identical: {same}; 1 vs 3 threads identical: {threads}", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("evenly spaced circle moments", circle_moments),
        ("weighted design LP dichotomy", weight_lp),
        ("uniform design solver", uniform_solver),
        ("gradient energy bounds", gradient_energy),
        ("increment lower bound", increment),
        ("uniform concentration", concentration),
        ("total variation estimates", total_variation),
        ("SQ degree phenomenology", sq_phenomenology),
        ("sphere/Gaussian bridge", bridge),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += !o.passed as u32;
        println!("{} criterion {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() as u32 - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
