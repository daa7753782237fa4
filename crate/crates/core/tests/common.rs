#![allow(dead_code)]

use rand::Rng;
use sphereforge::design::{evenly_spaced_circle, solve_weights, WeightOutcome};
use sphereforge::poly::{dim_homogeneous, sphere_norm, HomogeneousPoly};
use sphereforge::rng::{self, sphere_points, Purpose, StreamRng};
use sphereforge::WeightedDesign;

pub fn rng(seed: u64) -> StreamRng {
    rng::stream(seed, Purpose::Polynomials, 0)
}

/// Random polynomial with coefficients uniform in `[-1, 1]`.
pub fn random_poly(rng: &mut StreamRng, d: usize, t: u32) -> HomogeneousPoly {
    let n = dim_homogeneous(t, d).unwrap() as usize;
    let c = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    HomogeneousPoly::new(d, t, c).unwrap()
}

/// Random polynomial scaled to unit sphere norm.
pub fn random_unit_poly(rng: &mut StreamRng, d: usize, t: u32) -> HomogeneousPoly {
    let p = random_poly(rng, d, t);
    let s = sphere_norm(&p);
    p.scale(1.0 / s)
}

pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let v = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Designs alternating between moment-matching and violating, with the
/// degree bound `k` to check them at.
pub fn bridge_family(count: usize, seed: u64) -> Vec<(WeightedDesign, u32, bool)> {
    let mut out = Vec::with_capacity(count);
    let mut r = rng::stream(seed, Purpose::Trials, 0);
    let mut i = 0u64;
    while out.len() < count {
        let satisfying = out.len() % 2 == 0;
        let kind = (out.len() / 2) % 3;
        i += 1;
        let (design, k) = match (satisfying, kind) {
            (true, 0) => {
                let k = 3 + 2 * (r.random_range(0..5usize));
                (evenly_spaced_circle(k).unwrap(), k as u32)
            }
            (true, _) => {
                let d = 2 + kind;
                let pts = sphere_points(rng::child_seed(seed, i), Purpose::InitialPoints, 60, d);
                match solve_weights(&pts, 4).unwrap() {
                    WeightOutcome::Feasible { design, .. } => (design, 4),
                    WeightOutcome::Infeasible { .. } => continue,
                }
            }
            (false, _) => {
                let d = 2 + kind;
                let n = r.random_range(3..12);
                let pts = sphere_points(rng::child_seed(seed, i), Purpose::InitialPoints, n, d);
                (WeightedDesign::uniform(pts).unwrap(), 2 + 2 * r.random_range(0..2u32))
            }
        };
        out.push((design, k, satisfying));
    }
    out
}
