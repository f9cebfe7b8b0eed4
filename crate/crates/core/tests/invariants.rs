//! Property tests of the algebraic and integration invariants.

use std::sync::Arc;

use lieevolve::curve::{CoefficientCurve, CoefficientSource, ScalarCurve};
use lieevolve::lie_core::{builtin_algebra, AlgebraElement, LieAlgebra, MatrixRep};
use lieevolve::linalg::Mat;
use lieevolve::quantum_gaussian::{flow, GaussianState, Generator, JacobiElement};
use lieevolve::wei_norman::{integrate, IntegrateOptions, Ordering};
use num_complex::Complex64;
use proptest::prelude::*;

const CATALOG: [&str; 4] = ["heisenberg3", "heisenberg4_central", "quadratic6", "sl2"];

fn catalog(name: &str) -> (LieAlgebra<f64>, MatrixRep<f64>) {
    let b = builtin_algebra::<f64>(name).unwrap();
    (b.algebra, b.rep.unwrap())
}

fn element(coords: &[f64], dim: usize) -> AlgebraElement<f64> {
    AlgebraElement::new(coords[..dim].to_vec())
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0_f64, 6)
}

fn sinusoid(offset: f64, cos_amp: f64, omega: f64) -> ScalarCurve<f64> {
    ScalarCurve::Sinusoid {
        offset,
        cos_amp,
        sin_amp: 0.0,
        omega,
    }
}

fn curve_from(params: &[(f64, f64, f64)]) -> Arc<dyn CoefficientSource<f64>> {
    CoefficientCurve::new(params.iter().map(|&(o, a, w)| sinusoid(o, a, w)).collect())
        .unwrap()
        .into_source()
}

fn curve_params(dim: usize) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.8..0.8_f64, -0.5..0.5_f64, 0.2..2.0_f64), dim)
}

fn solve(
    alg: &LieAlgebra<f64>,
    perm: Vec<usize>,
    curve: Arc<dyn CoefficientSource<f64>>,
    opts: &IntegrateOptions<f64>,
) -> lieevolve::Solution {
    integrate(alg, &Ordering::new(perm).unwrap(), curve, (0.0, 1.5), opts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(
        k in 0..CATALOG.len(), x in coords(), y in coords(), z in coords()
    ) {
        let (alg, _) = catalog(CATALOG[k]);
        let r = alg.dim();
        let (x, y, z) = (element(&x, r), element(&y, r), element(&z, r));
        let xy = alg.bracket(&x, &y).unwrap();
        let yx = alg.bracket(&y, &x).unwrap();
        prop_assert!(xy.add(&yx).norm_inf() < 1e-12);
        let j = alg.bracket(&x, &alg.bracket(&y, &z).unwrap()).unwrap()
            .add(&alg.bracket(&y, &alg.bracket(&z, &x).unwrap()).unwrap())
            .add(&alg.bracket(&z, &xy).unwrap());
        prop_assert!(j.norm_inf() < 1e-11);
    }

    #[test]
    fn representation_is_a_homomorphism(k in 0..CATALOG.len(), x in coords(), y in coords()) {
        let (alg, rep) = catalog(CATALOG[k]);
        let r = alg.dim();
        let (x, y) = (element(&x, r), element(&y, r));
        let lhs = rep.image(&alg.bracket(&x, &y).unwrap());
        let rhs = rep.image(&x).commutator(&rep.image(&y));
        prop_assert!((&lhs - &rhs).max_abs() < 1e-12);
        let back = rep.pullback(&rep.image(&x)).unwrap();
        prop_assert!(back.add(&x.scale(-1.0)).norm_inf() < 1e-12);
    }

    #[test]
    fn expm_round_trips(n in 1usize..6, entries in prop::collection::vec(-1.5..1.5_f64, 25), s in -1.0..1.0_f64) {
        let a = Mat::from_fn(n, n, |i, j| entries[i * 5 + j]);
        let id = Mat::identity(n);
        let inv = &a.expm().unwrap() * &a.scale(-1.0).expm().unwrap();
        prop_assert!((&inv - &id).max_abs() < 1e-12);
        let split = &a.scale(s).expm().unwrap() * &a.scale(1.0 - s).expm().unwrap();
        prop_assert!((&split - &a.expm().unwrap()).max_abs() < 1e-11 * a.expm().unwrap().max_abs().max(1.0));
    }

    #[test]
    fn adjoint_action_is_conjugation(k in 0..CATALOG.len(), x in coords(), y in coords()) {
        // exp(ad x) y = exp(x) y exp(-x) in any faithful representation.
        let (alg, rep) = catalog(CATALOG[k]);
        let r = alg.dim();
        let (x, y) = (element(&x, r).scale(0.5), element(&y, r));
        let ad = alg.ad_of(&x).unwrap().expm().unwrap();
        let lhs = rep.image(&AlgebraElement::new(ad.mul_vec(&y.coords)));
        let g = rep.image(&x).expm().unwrap();
        let rhs = &(&g * &rep.image(&y)) * &g.inverse().unwrap();
        prop_assert!((&lhs - &rhs).max_abs() < 1e-9 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn jacobi_group_is_associative_and_matches_matrices(
        a in prop::collection::vec(-1.0..1.0_f64, 6),
        b in prop::collection::vec(-1.0..1.0_f64, 6),
        c in prop::collection::vec(-1.0..1.0_f64, 6),
    ) {
        let make = |p: &[f64]| JacobiElement {
            s: Mat::from_rows(&[[p[0], p[1]], [p[2], -p[0]]]).expm().unwrap(),
            w: [p[3], p[4]],
            phi: p[5],
        };
        let (a, b, c) = (make(&a), make(&b), make(&c));
        let left = a.compose(&b).compose(&c);
        let right = a.compose(&b.compose(&c));
        prop_assert!((&left.s - &right.s).max_abs() < 1e-12);
        prop_assert!((left.phi - right.phi).abs() < 1e-12);
        let m = &a.to_matrix() * &b.to_matrix();
        prop_assert!((&m - &a.compose(&b).to_matrix()).max_abs() < 1e-12);
        prop_assert!((a.det_s() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_flows_are_one_parameter_groups(
        g in 0usize..6, s in -1.0..1.0_f64, t in -1.0..1.0_f64
    ) {
        let psi = GaussianState::new(Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.5), Complex64::new(0.1, 0.0)).unwrap();
        let gen = Generator::ALL[g];
        let two = flow(&flow(&psi, gen, s), gen, t);
        let one = flow(&psi, gen, s + t);
        for k in -20..=20 {
            let p = 0.2 * k as f64;
            prop_assert!((two.value(p) - one.value(p)).norm() < 1e-12);
        }
        prop_assert!((one.norm().unwrap() - psi.norm().unwrap()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn group_element_is_independent_of_ordering(
        params in curve_params(6), perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()
    ) {
        let (alg, rep) = catalog("quadratic6");
        let curve = curve_from(&params);
        let opts = IntegrateOptions::with_tol(1e-12);
        let a = solve(&alg, vec![3, 4, 5, 0, 1, 2], curve.clone(), &opts);
        let b = solve(&alg, perm, curve, &opts);
        for t in [0.0, 0.7, 1.5] {
            let (ga, gb) = (a.reconstruct(&rep, t).unwrap(), b.reconstruct(&rep, t).unwrap());
            prop_assert!((&ga - &gb).max_abs() < 1e-8 * ga.max_abs().max(1.0));
        }
    }

    #[test]
    fn forced_restarts_compose_to_the_same_element(
        params in curve_params(4), cuts in prop::collection::vec(0.05..1.45_f64, 1..4)
    ) {
        let (alg, rep) = catalog("heisenberg4_central");
        let curve = curve_from(&params);
        let plain = solve(&alg, vec![3, 1, 2, 0], curve.clone(), &IntegrateOptions::with_tol(1e-12));
        let mut cuts = cuts;
        cuts.sort_by(f64::total_cmp);
        let opts = IntegrateOptions { forced_restarts: cuts.clone(), ..IntegrateOptions::with_tol(1e-12) };
        let split = solve(&alg, vec![3, 1, 2, 0], curve, &opts);
        prop_assert!(split.segments().len() > 1);
        for t in [0.3, 0.9, 1.5] {
            let (g1, g2) = (plain.reconstruct(&rep, t).unwrap(), split.reconstruct(&rep, t).unwrap());
            prop_assert!((&g1 - &g2).max_abs() < 1e-9);
        }
    }

    #[test]
    fn coordinates_start_at_zero(params in curve_params(6)) {
        let (alg, rep) = catalog("quadratic6");
        let sol = solve(&alg, vec![3, 4, 5, 0, 1, 2], curve_from(&params), &IntegrateOptions::with_tol(1e-10));
        prop_assert!(sol.v(0.0).unwrap().iter().all(|&x| x == 0.0));
        prop_assert!((&sol.reconstruct(&rep, 0.0).unwrap() - &Mat::identity(4)).max_abs() == 0.0);
    }
}
