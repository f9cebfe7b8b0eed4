//! Gauge transformations and the `sl2` reduction on whole trajectories.

use std::sync::Arc;

use lieevolve::curve::{CoefficientCurve, CoefficientSource, FnCoefficients, ScalarCurve};
use lieevolve::lie_core::builtin_algebra;
use lieevolve::reduction::{
    oscillator_solve, projected_equation_residual, sl2_reduce, system_curve, transform_curve,
    FactorizedGauge, GaugeCurve, ProductGauge, TransformedSystem,
};
use lieevolve::wei_norman::{integrate, IntegrateOptions, Ordering};

fn quadratic6_curve() -> Arc<dyn CoefficientSource<f64>> {
    CoefficientCurve::new(vec![
        ScalarCurve::constant(1.0),
        ScalarCurve::Sinusoid {
            offset: 0.0,
            cos_amp: 0.0,
            sin_amp: 0.3,
            omega: 1.0,
        },
        ScalarCurve::Linear { a: 0.8, b: 0.1 },
        ScalarCurve::constant(0.2),
        ScalarCurve::Sinusoid {
            offset: 0.0,
            cos_amp: 0.5,
            sin_amp: 0.0,
            omega: 2.0,
        },
        ScalarCurve::constant(-0.1),
    ])
    .unwrap()
    .into_source()
}

fn gauge_a() -> FactorizedGauge<f64> {
    let rep = builtin_algebra::<f64>("quadratic6").unwrap().rep.unwrap();
    FactorizedGauge::new(rep)
        .factor(1, |t: f64| Ok((0.3 * t.sin(), 0.3 * t.cos())))
        .unwrap()
        .factor(3, |t: f64| Ok((t * t, 2.0 * t)))
        .unwrap()
}

fn gauge_b() -> FactorizedGauge<f64> {
    let rep = builtin_algebra::<f64>("quadratic6").unwrap().rep.unwrap();
    FactorizedGauge::new(rep)
        .factor(0, |t: f64| Ok((0.5 * t, 0.5)))
        .unwrap()
        .factor(4, |t: f64| Ok(((0.7 * t).cos(), -0.7 * (0.7 * t).sin())))
        .unwrap()
}

#[test]
fn gauges_compose() {
    let rep = builtin_algebra::<f64>("quadratic6").unwrap().rep.unwrap();
    let a = system_curve(quadratic6_curve());
    let first = Arc::new(gauge_a());
    let second = Arc::new(gauge_b());
    let product = ProductGauge {
        left: second.clone(),
        right: first.clone(),
    };
    let rep2 = rep.clone();
    let a2 = a.clone();
    let once: Arc<dyn CoefficientSource<f64>> = Arc::new(FnCoefficients::new(
        6,
        (0..6).collect(),
        move |t, out: &mut [f64]| {
            out.copy_from_slice(&transform_curve(&rep2, a2.as_ref(), first.as_ref(), t)?.coords);
            Ok(())
        },
    ));
    for t in [0.2, 1.0, 2.4] {
        let stepwise = transform_curve(&rep, once.as_ref(), second.as_ref(), t).unwrap();
        let direct = transform_curve(&rep, a.as_ref(), &product, t).unwrap();
        for k in 0..6 {
            assert!(
                (stepwise.coords[k] - direct.coords[k]).abs() < 1e-10,
                "t={t} k={k}"
            );
        }
    }
}

#[test]
fn gauged_system_solution_is_gauge_times_solution() {
    let b = builtin_algebra::<f64>("quadratic6").unwrap();
    let (alg, rep) = (b.algebra, b.rep.unwrap());
    let ordering = Ordering::from_one_based(&[4, 5, 6, 1, 2, 3]).unwrap();
    let curve = quadratic6_curve();
    let gauge: Arc<dyn GaugeCurve<f64>> = Arc::new(gauge_a());
    // ḡ(0) = 1, so both solutions start at the identity.
    let transformed =
        Arc::new(TransformedSystem::new(rep.clone(), curve.clone(), gauge.clone()).unwrap());
    let opts = IntegrateOptions::with_tol(1e-12);
    let g = integrate(&alg, &ordering, curve, (0.0, 2.0), &opts).unwrap();
    let g_prime = integrate(&alg, &ordering, transformed, (0.0, 2.0), &opts).unwrap();
    for t in [0.5, 1.3, 2.0] {
        let lhs = g_prime.reconstruct(&rep, t).unwrap();
        let rhs = &gauge.eval(t).unwrap() * &g.reconstruct(&rep, t).unwrap();
        assert!(
            (&lhs - &rhs).max_abs() < 1e-8 * rhs.max_abs().max(1.0),
            "t={t}"
        );
    }
}

#[test]
fn modulated_oscillator_reduction() {
    let omega = ScalarCurve::Sinusoid {
        offset: 1.0,
        cos_amp: 0.0,
        sin_amp: 0.2,
        omega: 1.0,
    };
    let osc = Arc::new(oscillator_solve(&omega, (0.0, 3.0)).unwrap());
    let red = sl2_reduce(osc).unwrap();
    let (lo, hi) = red.interval();
    assert!(hi > 1.0 && hi < 1.6, "{hi}");
    let b = builtin_algebra::<f64>("sl2").unwrap();
    let (alg, rep) = (b.algebra, b.rep.unwrap());
    let direct = integrate(
        &alg,
        &Ordering::from_one_based(&[1, 2, 3]).unwrap(),
        red.system(),
        (lo, hi),
        &IntegrateOptions::with_tol(1e-12),
    )
    .unwrap();
    let gauge = red.gauge();
    let system = red.system();
    for k in 1..=10 {
        let t = lo + (hi - lo) * k as f64 / 10.5;
        let a = red.reduced_curve(t).unwrap();
        let c = red.reduced_coefficient(t).unwrap();
        assert!(
            (a.coords[0] + c).abs() < 1e-8 && a.coords[1].abs() < 1e-8 && a.coords[2].abs() < 1e-8
        );
        assert!(projected_equation_residual(gauge.as_ref(), system.as_ref(), t).unwrap() < 1e-8);
        let g = red.reconstruct(t).unwrap();
        assert!(
            (&g - &direct.reconstruct(&rep, t).unwrap()).max_abs() < 1e-8,
            "t={t}"
        );
    }
}

#[test]
fn reduction_refuses_times_past_the_zero() {
    let osc = Arc::new(oscillator_solve(&ScalarCurve::constant(1.0), (0.0, 3.0)).unwrap());
    let zero = osc.first_zero().unwrap();
    assert!((zero - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
    let red = sl2_reduce(osc).unwrap();
    assert!(red.reduced_coefficient(zero + 0.1).is_err());
}
