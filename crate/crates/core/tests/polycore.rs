mod common;

use approx::assert_relative_eq;
use common::*;
use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use sphereforge::poly::*;
use sphereforge::rng::{sphere_points, Purpose};

/// Trapezoid rule over the circle; exact for trigonometric polynomials of
/// degree below the node count.
fn circle_average(f: impl Fn(f64, f64) -> f64) -> f64 {
    let nodes = 256;
    (0..nodes)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / nodes as f64;
            f(a.cos(), a.sin())
        })
        .sum::<f64>()
        / nodes as f64
}

#[test]
fn moments_match_monte_carlo() {
    let pts = sphere_points(2024, Purpose::Trials, 10_000_000, 3);
    for alpha in [vec![4, 0, 0], vec![2, 2, 0], vec![2, 0, 0], vec![1, 1, 0], vec![2, 2, 2]] {
        let a = MultiIndex::new(alpha.clone());
        let vals: Vec<f64> = pts.iter().map(|p| a.eval(p)).collect();
        let (m, se) = mean_se(&vals);
        let exact = sphere_moment(&a, 3).unwrap();
        assert!((m - exact).abs() <= 4.0 * se + 1e-12, "{alpha:?}: mc {m} ± {se}, closed form {exact}");
    }
    assert_relative_eq!(sphere_moment(&MultiIndex::new(vec![4, 0, 0]), 3).unwrap(), 0.2, epsilon = 1e-15);
    assert_relative_eq!(sphere_moment(&MultiIndex::new(vec![2, 2, 0]), 3).unwrap(), 1.0 / 15.0, epsilon = 1e-15);
}

#[test]
fn circle_quadrature_agrees_with_moments() {
    let cube = HomogeneousPoly::monomial(&MultiIndex::new(vec![3, 0]), 1.0);
    let lin = HomogeneousPoly::linear(&[1.0, 0.0]);
    let quad = circle_average(|c, _| c.powi(4));
    assert_relative_eq!(sphere_inner(&cube, &lin).unwrap(), quad, epsilon = 1e-14);
    assert_relative_eq!(quad, 0.375, epsilon = 1e-14);
    let g = gram_matrix(2, 2);
    assert_relative_eq!(g[(0, 2)], circle_average(|c, s| c * c * s * s), epsilon = 1e-14);
    let g = gram_matrix(3, 2);
    for i in 0..4 {
        for j in 0..4 {
            let (a, b) = (3 - i as i32, 3 - j as i32);
            let q = circle_average(|c, s| c.powi(a + b) * s.powi(6 - a - b));
            assert_relative_eq!(g[(i, j)], q, epsilon = 1e-14);
        }
    }
}

#[test]
fn dimension_examples() {
    assert_eq!(dim_homogeneous(1, 7).unwrap(), 7);
    assert_eq!(dim_homogeneous(3, 2).unwrap(), 4);
    assert_eq!(dim_homogeneous(6, 3).unwrap(), 28);
    assert!(dim_homogeneous(200, 200).is_err());
}

#[test]
fn evaluation_examples() {
    let p = HomogeneousPoly::from_terms(2, 3, &[(MultiIndex::new(vec![2, 1]), 1.0), (MultiIndex::new(vec![0, 3]), -1.0)]).unwrap();
    assert_eq!(p.eval(&[1.0, 1.0]).unwrap(), 0.0);
    let cube = HomogeneousPoly::monomial(&MultiIndex::new(vec![3, 0]), 1.0);
    assert_eq!(cube.eval(&[2.0, 0.0]).unwrap(), 8.0);
    assert!(cube.eval(&[1.0]).is_err());
}

#[test]
fn tangential_gradient_examples() {
    let x2 = HomogeneousPoly::linear(&[0.0, 1.0]);
    assert_eq!(x2.tangential_gradient(&[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
    let x1 = HomogeneousPoly::linear(&[1.0, 0.0]);
    assert_eq!(x1.tangential_gradient(&[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    let cube = HomogeneousPoly::monomial(&MultiIndex::new(vec![3, 0]), 1.0);
    let h = 0.5f64.sqrt();
    let g = cube.tangential_gradient(&[h, h]).unwrap();
    assert_relative_eq!(g[0], 0.75, epsilon = 1e-14);
    assert_relative_eq!(g[1], -0.75, epsilon = 1e-14);
    assert!(matches!(cube.tangential_gradient(&[1.0, 1.0]), Err(sphereforge::Error::NonUnit { .. })));
}

#[test]
fn sup_norm_bound() {
    let mut r = rng(41);
    for (d, t) in [(2, 3), (3, 3), (3, 4), (4, 5)] {
        let bound = (dim_homogeneous(t, d).unwrap() as f64).sqrt();
        let pts = sphere_points(d as u64 * 100 + t as u64, Purpose::Trials, 100_000, d);
        for _ in 0..5 {
            let p = random_unit_poly(&mut r, d, t);
            let sup = pts.iter().map(|x| p.value(x).abs()).fold(0.0, f64::max);
            assert!(sup <= bound + 1e-9, "d={d} t={t}: {sup} > {bound}");
        }
    }
}

#[test]
fn gradient_energy_bounds() {
    let mut r = rng(42);
    for (d, t) in [(2, 3), (3, 3), (3, 4), (4, 5)] {
        let pts = sphere_points(7 + d as u64, Purpose::Trials, 20_000, d);
        let upper = (t * (d as u32 + 2 * t - 2)) as f64;
        for _ in 0..5 {
            let p = random_unit_poly(&mut r, d, t);
            let tang: Vec<f64> = pts.iter().map(|x| p.tangential_gradient(x).unwrap().iter().map(|v| v * v).sum()).collect();
            let full: Vec<f64> = pts.iter().map(|x| p.gradient(x).unwrap().iter().map(|v| v * v).sum()).collect();
            let (mt, st) = mean_se(&tang);
            let (mf, sf) = mean_se(&full);
            assert!(mt + 3.0 * st >= (d - 1) as f64, "tangential {mt} ± {st}");
            assert!(mf - 3.0 * sf <= upper, "full {mf} ± {sf} vs {upper}");
        }
    }
}

#[test]
fn divergence_identity() {
    let mut r = rng(43);
    for (d, t) in [(2, 3), (3, 3), (3, 4), (4, 2)] {
        let p = random_poly(&mut r, d, t);
        let q = random_poly(&mut r, d, t);
        let lhs = t as f64 * sphere_inner(&p, &q).unwrap();
        // exact route through sphere moments
        let grad: f64 = (0..d).map(|i| sphere_inner(&p.partial(i), &q.partial(i)).unwrap()).sum();
        let lap = if t >= 2 { sphere_inner(&p, &q.laplacian()).unwrap() } else { 0.0 };
        let rhs = (grad + lap) / (d as f64 + 2.0 * t as f64 - 2.0);
        assert_relative_eq!(lhs, rhs, epsilon = 1e-10, max_relative = 1e-10);
        // Monte-Carlo route
        let pts = sphere_points(99, Purpose::Trials, 200_000, d);
        let lapq = q.laplacian();
        let vals: Vec<f64> = pts
            .iter()
            .map(|x| {
                let gp = p.gradient(x).unwrap();
                let gq = q.gradient(x).unwrap();
                let g: f64 = gp.iter().zip(&gq).map(|(a, b)| a * b).sum();
                let l = if t >= 2 { p.value(x) * lapq.value(x) } else { 0.0 };
                (g + l) / (d as f64 + 2.0 * t as f64 - 2.0) - t as f64 * p.value(x) * q.value(x)
            })
            .collect();
        let (m, se) = mean_se(&vals);
        assert!(m.abs() <= 4.0 * se + 1e-12, "d={d} t={t}: {m} ± {se}");
    }
}

#[test]
fn higher_derivative_bounds() {
    let mut r = rng(44);
    for (d, t) in [(2, 3), (3, 3), (3, 5)] {
        let pts = sphere_points(5, Purpose::Trials, 20_000, d);
        for _ in 0..5 {
            let p = random_unit_poly(&mut r, d, t);
            for j in 1..=2u32 {
                let n = dim_homogeneous(2 * (t - j), d).unwrap() as f64;
                let bound = (t as f64).powi(j as i32) * (d as f64 + 2.0 * t as f64 - 2.0).powi(j as i32) * n;
                let partials: Vec<HomogeneousPoly> = if j == 1 {
                    (0..d).map(|i| p.partial(i)).collect()
                } else {
                    (0..d).flat_map(|i| (0..d).map(move |k| (i, k))).map(|(i, k)| p.partial(i).partial(k)).collect()
                };
                let sup = pts
                    .iter()
                    .map(|x| partials.iter().map(|q| q.value(x).powi(2)).sum::<f64>())
                    .fold(0.0, f64::max);
                assert!(sup <= bound, "d={d} t={t} j={j}: {sup} > {bound}");
            }
        }
    }
}

#[test]
fn gram_and_basis_round_trip() {
    let mut r = rng(45);
    for (d, t) in [(2, 1), (2, 4), (3, 3), (4, 3), (3, 6)] {
        let g = gram_matrix(t, d);
        assert_eq!(g, g.transpose());
        let eig = SymmetricEigen::new(g.clone());
        assert!(eig.eigenvalues.min() > 0.0);
        let basis = orthonormal_basis(t, d).unwrap();
        assert_eq!(basis.len() as u64, dim_homogeneous(t, d).unwrap());
        let p = random_poly(&mut r, d, t);
        let back = basis.combine(&basis.expand(&p).unwrap());
        for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}

#[test]
fn ill_conditioned_gram_is_reported() {
    assert!(matches!(OrthonormalBasis::new(6, 4, 10.0), Err(sphereforge::Error::IllConditioned { .. })));
}

fn poly_strategy(d: usize, t: u32) -> impl Strategy<Value = HomogeneousPoly> {
    let n = dim_homogeneous(t, d).unwrap() as usize;
    prop::collection::vec(-1.0f64..1.0, n).prop_map(move |c| HomogeneousPoly::new(d, t, c).unwrap())
}

fn point_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, d)
}

proptest! {
    #[test]
    fn euler_identity(p in poly_strategy(3, 4), x in point_strategy(3)) {
        let g = p.gradient(&x).unwrap();
        let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        let v = p.value(&x);
        prop_assert!((radial - 4.0 * v).abs() <= 1e-9 * (1.0 + v.abs()) * 100.0);
    }

    #[test]
    fn homogeneity(p in poly_strategy(2, 5), x in point_strategy(2), s in -3.0f64..3.0) {
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        let lhs = p.value(&scaled);
        let rhs = s.powi(5) * p.value(&x);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn gradient_matches_finite_differences(p in poly_strategy(3, 3), x in point_strategy(3)) {
        let g = p.gradient(&x).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (p.value(&a) - p.value(&b)) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()));
        }
    }

    #[test]
    fn tangential_decomposition(p in poly_strategy(3, 5), x in point_strategy(3)) {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let y: Vec<f64> = x.iter().map(|v| v / n).collect();
        let tg = p.tangential_gradient(&y).unwrap();
        let g = p.gradient(&y).unwrap();
        let ortho: f64 = tg.iter().zip(&y).map(|(a, b)| a * b).sum();
        prop_assert!(ortho.abs() <= 1e-10 * (1.0 + g.iter().map(|v| v.abs()).sum::<f64>()));
        let full: f64 = g.iter().map(|v| v * v).sum();
        let tang: f64 = tg.iter().map(|v| v * v).sum();
        let radial = 5.0 * p.value(&y);
        prop_assert!((full - tang - radial * radial).abs() <= 1e-9 * (1.0 + full));
    }

    #[test]
    fn inner_product_is_symmetric_bilinear(p in poly_strategy(3, 3), q in poly_strategy(3, 3), s in -2.0f64..2.0) {
        let a = sphere_inner(&p, &q).unwrap();
        prop_assert!((a - sphere_inner(&q, &p).unwrap()).abs() <= 1e-13);
        let ps = p.scale(s);
        prop_assert!((sphere_inner(&ps, &q).unwrap() - s * a).abs() <= 1e-12);
        prop_assert!(sphere_inner(&p, &p).unwrap() >= 0.0);
    }

    #[test]
    fn records_round_trip_exactly(p in poly_strategy(3, 3)) {
        let text = serde_json::to_string(&p).unwrap();
        let back: HomogeneousPoly = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, p);
    }
}
