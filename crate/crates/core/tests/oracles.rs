//! Closed forms and quadrature oracles against independent evaluations.

use std::f64::consts::PI;

use lieevolve::closed_forms::{
    caldirola_kanai, classical_linear_potential, guedes_solution, inverse_square_frequency,
    mass_linear_potential, quantum_linear_potential, CaldirolaKanai, ClassicalLinearPotential,
    OracleSpec, SCENARIO_IDS,
};
use lieevolve::curve::ScalarCurve;
use lieevolve::lie_core::builtin_algebra;
use lieevolve::wei_norman::{integrate, solve_by_quadrature, IntegrateOptions, Ordering};
use lieevolve::Error;

fn cosine_affine(q: f64, eps0: f64, eps: f64, omega: f64) -> ScalarCurve<f64> {
    ScalarCurve::CosineAffine {
        q,
        eps0,
        eps,
        omega,
    }
}

/// Classical RK4 with a fixed step, used as an oracle independent of the
/// adaptive integrator.
fn rk4(f: impl Fn(f64, &[f64]) -> Vec<f64>, y0: &[f64], t1: f64, steps: usize) -> Vec<f64> {
    let h = t1 / steps as f64;
    let mut y = y0.to_vec();
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &axpy(&y, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &axpy(&y, &k2, h / 2.0));
        let k4 = f(t + h, &axpy(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

#[test]
fn classical_linear_matches_antiderivatives() {
    // f = 1 + cos t: F = t + sin t, ∫F = t²/2 + 1 - cos t.
    let f = cosine_affine(1.0, 1.0, 1.0, 1.0);
    for t in [0.5_f64, 2.0, 5.0] {
        let u = classical_linear_potential(1.0, &f, t).unwrap();
        let expected = [t, -(t + t.sin()), -(t * t / 2.0 + 1.0 - t.cos())];
        for k in 0..3 {
            assert!(
                (u[k] - expected[k]).abs() < 1e-12,
                "t={t} k={k}: {} vs {}",
                u[k],
                expected[k]
            );
        }
    }
}

#[test]
fn quantum_linear_phase_integral() {
    // f = cos t, m = 2: v4 = -(1/2m) ∫ sin² = -(t/2 - sin 2t/4)/4.
    let f = ScalarCurve::Sinusoid {
        offset: 0.0,
        cos_amp: 1.0,
        sin_amp: 0.0,
        omega: 1.0,
    };
    let t = 3.0_f64;
    let v = quantum_linear_potential(2.0, &f, t).unwrap();
    assert!((v[0] - 1.5).abs() < 1e-14);
    assert!((v[1] + t.sin()).abs() < 1e-12);
    assert!((v[2] + (1.0 - t.cos()) / 2.0).abs() < 1e-12);
    assert!((v[3] + (t / 2.0 - (2.0 * t).sin() / 4.0) / 4.0).abs() < 1e-12);
}

#[test]
fn mass_linear_constant_mass_reduces_to_polynomials() {
    // m = 1, S = 1, b = (1, 0, 0, 0, 1, 0): v4' = v5, v5' = 1 and
    // v6' = -v4 - v5²/2, so v1 = t, v4 = t²/2, v5 = t, v6 = -t³/3.
    let v = mass_linear_potential(
        &ScalarCurve::constant(1.0),
        &ScalarCurve::constant(1.0),
        2.0,
    )
    .unwrap();
    let t = 2.0;
    let expected = [t, 0.0, 0.0, t * t / 2.0, t, -t * t * t / 3.0];
    let rk = rk4(
        |_, v| vec![1.0, 0.0, 0.0, v[4], 1.0, -v[3] - 0.5 * v[4] * v[4]],
        &[0.0; 6],
        t,
        2000,
    );
    for k in 0..6 {
        assert!((v[k] - rk[k]).abs() < 1e-10, "k={k}: {} vs {}", v[k], rk[k]);
        assert!(
            (v[k] - expected[k]).abs() < 1e-10,
            "k={k}: {} vs {}",
            v[k],
            expected[k]
        );
    }
}

#[test]
fn guedes_v5_vanishing_sine_term() {
    let (q, eps0, eps, omega) = (1.3, 0.5, 0.9, 2.0);
    let t = PI / omega;
    let v = guedes_solution(1.0, q, eps0, eps, omega, t).unwrap();
    assert!((v[4] - q * eps0 * PI / omega).abs() < 1e-12);
}

#[test]
fn caldirola_kanai_frozen_values() {
    // High-precision solution of v1' = b1 + b3 v1², v2' = 2 b3 v1,
    // v3' = e^{v2} b3 with b1 = e^t, b3 = 0.04 e^{-t}.
    let frozen = [
        (
            1.0_f64,
            [
                1.7324499182330828,
                0.029556656729524839,
                0.025493308311083898,
            ],
        ),
        (
            2.0,
            [
                6.5231783133426205,
                0.091875635047759175,
                0.035312647385566120,
            ],
        ),
        (
            3.0,
            [
                19.674724454762080,
                0.16695834826263441,
                0.039181874061924972,
            ],
        ),
    ];
    for (t, expected) in frozen {
        let v: [f64; 3] = caldirola_kanai(1.0, 1.0, 0.2, t).unwrap();
        for k in 0..3 {
            assert!(
                (v[k] - expected[k]).abs() < 1e-12 * expected[k].abs().max(1.0),
                "t={t} k={k}: {} vs {}",
                v[k],
                expected[k]
            );
        }
    }
}

#[test]
fn caldirola_kanai_underdamped_against_rk4() {
    let ck = CaldirolaKanai::new(1.0_f64, 0.1, 1.0).unwrap();
    let end = ck.validity_end();
    assert!((end - 1.6228).abs() < 1e-3, "{end}");
    let t = 1.5;
    let rk = rk4(
        |t, v| {
            let (b1, b3) = ((0.1 * t).exp(), (-0.1 * t).exp());
            vec![b1 + b3 * v[0] * v[0], 2.0 * b3 * v[0], v[1].exp() * b3]
        },
        &[0.0; 3],
        t,
        20_000,
    );
    let v = ck.eval(t).unwrap();
    for k in 0..3 {
        assert!(
            (v[k] - rk[k]).abs() < 1e-8 * rk[k].abs().max(1.0),
            "k={k}: {} vs {}",
            v[k],
            rk[k]
        );
    }
    assert!(matches!(
        ck.eval(end + 0.1),
        Err(Error::OutsideDomain { .. })
    ));
}

#[test]
fn inverse_square_frozen_values() {
    let frozen = [
        (
            1.0_f64,
            [
                1.0011387093622332,
                0.0038652046775420163,
                0.0050056935468111659,
            ],
        ),
        (
            3.0,
            [
                3.0098178128930667,
                0.012748091956185504,
                0.0075245445322326666,
            ],
        ),
    ];
    for (t, expected) in frozen {
        let v: [f64; 3] = inverse_square_frequency(1.0, 0.1, 1.0, t).unwrap();
        for k in 0..3 {
            assert!(
                (v[k] - expected[k]).abs() < 1e-12,
                "t={t} k={k}: {} vs {}",
                v[k],
                expected[k]
            );
        }
    }
}

#[test]
fn corrected_second_constant_is_conserved_and_printed_one_is_not() {
    let f = cosine_affine(1.0, 1.0, 1.0, 1.0);
    let o = ClassicalLinearPotential::new(1.0, &f, 5.0).unwrap();
    // Exact trajectory for m = 1 with b = (1, -f, 0): p = p0 - F,
    // x = x0 + p0 t - ∫F.
    let (x0, p0) = (0.7, -0.4);
    let traj = |t: f64| {
        (
            x0 + p0 * t - (t * t / 2.0 + 1.0 - t.cos()),
            p0 - t - t.sin(),
        )
    };
    let (i1_0, i2_0) = o.constants(x0, p0, 0.0).unwrap();
    let (_, printed_0) = o.printed_constants(x0, p0, 0.0).unwrap();
    let mut printed_drift: f64 = 0.0;
    for t in [1.0, 2.5, 4.0] {
        let (x, p) = traj(t);
        let (i1, i2) = o.constants(x, p, t).unwrap();
        assert!((i1 - i1_0).abs() < 1e-12 && (i2 - i2_0).abs() < 1e-12);
        printed_drift =
            printed_drift.max((o.printed_constants(x, p, t).unwrap().1 - printed_0).abs());
    }
    assert!(printed_drift > 1.0);
}

#[test]
fn every_oracle_matches_its_own_integration() {
    let specs = [
        OracleSpec::ClassicalLinear {
            m: 1.5,
            f: cosine_affine(0.7, 1.0, -0.4, 2.0),
        },
        OracleSpec::QuantumLinear {
            m: 0.8,
            f: cosine_affine(1.0, 0.0, 1.0, 1.0),
        },
        OracleSpec::MassLinear {
            m: ScalarCurve::Exponential { c: 1.0, r: 0.2 },
            s: ScalarCurve::constant(0.5),
        },
        OracleSpec::Guedes {
            m: 2.0,
            q: -1.0,
            eps0: 0.3,
            eps: 0.6,
            omega: 1.7,
        },
        OracleSpec::CaldirolaKanai {
            m0: 1.2,
            r: 0.6,
            omega0: 0.25,
        },
        OracleSpec::InverseSquare {
            m: 0.7,
            omega0: 0.3,
            k: 2.0,
        },
    ];
    for spec in specs {
        let alg = builtin_algebra::<f64>(spec.algebra()).unwrap().algebra;
        let ordering = Ordering::from_one_based(&spec.ordering()).unwrap();
        let sol = integrate(
            &alg,
            &ordering,
            spec.curve().unwrap().into_source(),
            (0.0, 2.0),
            &IntegrateOptions::with_tol(1e-12),
        )
        .unwrap();
        let oracle = spec.build(2.0).unwrap();
        for t in [0.0, 0.4, 1.3, 2.0] {
            let v = sol.v(t).unwrap();
            let w = oracle.eval(t).unwrap();
            for k in 0..v.len() {
                assert!(
                    (v[k] - w[k]).abs() < 1e-8,
                    "{} t={t} k={k}: {} vs {}",
                    spec.id(),
                    v[k],
                    w[k]
                );
            }
        }
    }
    assert_eq!(SCENARIO_IDS.len(), 9);
}

#[test]
fn quadrature_solution_agrees_with_integration() {
    let spec = OracleSpec::MassLinear {
        m: ScalarCurve::Linear { a: 1.0, b: 0.1 },
        s: ScalarCurve::Sinusoid {
            offset: 0.0,
            cos_amp: 1.0,
            sin_amp: 0.0,
            omega: 1.0,
        },
    };
    let alg = builtin_algebra::<f64>("quadratic6").unwrap().algebra;
    let ordering = Ordering::from_one_based(&spec.ordering()).unwrap();
    let curve = spec.curve().unwrap().into_source();
    let quad = solve_by_quadrature(
        &alg,
        &ordering,
        curve.clone(),
        (0.0, 5.0),
        &Default::default(),
    )
    .unwrap();
    let ode = integrate(
        &alg,
        &ordering,
        curve,
        (0.0, 5.0),
        &IntegrateOptions::with_tol(1e-12),
    )
    .unwrap();
    for t in [0.0, 1.0, 3.3, 5.0] {
        let (a, b) = (quad.v(t).unwrap(), ode.v(t).unwrap());
        for k in 0..6 {
            assert!((a[k] - b[k]).abs() < 1e-9, "t={t} k={k}");
        }
    }
}

#[test]
fn non_triangular_system_is_refused_by_quadrature() {
    let spec = OracleSpec::CaldirolaKanai {
        m0: 1.0,
        r: 1.0,
        omega0: 0.2,
    };
    let alg = builtin_algebra::<f64>("quadratic6").unwrap().algebra;
    let ordering = Ordering::from_one_based(&spec.ordering()).unwrap();
    let err = solve_by_quadrature(
        &alg,
        &ordering,
        spec.curve().unwrap().into_source(),
        (0.0, 1.0),
        &Default::default(),
    );
    assert!(matches!(err, Err(Error::NotTriangular(_))));
}
