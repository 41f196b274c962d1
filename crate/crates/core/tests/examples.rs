use lsys_core::examples::{
    bundle, delta_values, example3_functions, mollifier_check, ode_residual, resolvent_apply,
    sample_grid, transfer_via_resolvent, Boundary, IntervalOperatorParams, Variant,
};
use lsys_core::{Complex64, Role, I};

fn ex(n: u8) -> IntervalOperatorParams {
    match n {
        1 => IntervalOperatorParams::example1(1.0),
        2 => IntervalOperatorParams::example2(1.0),
        _ => IntervalOperatorParams::example4(1.0, -2.0),
    }
    .unwrap()
}

#[test]
fn parameter_validation() {
    assert!(IntervalOperatorParams::example1(0.0).is_err());
    assert!(IntervalOperatorParams::example4(1.0, -0.5).is_err());
    assert!(IntervalOperatorParams::example4(1.0, 2.0).is_err());
    assert!(IntervalOperatorParams::example4(1.0, 1f64.exp()).is_ok());
    assert!(IntervalOperatorParams::example3(1.0, Complex64::new(0.5, 0.0)).is_err());
    let p = IntervalOperatorParams::example4(1.0, -2.0).unwrap();
    assert!((p.kappa().value() - 0.733_043_605_245_445_3).abs() < 1e-15);
    assert_eq!(p.boundary(), Boundary::RhoFamily { rho: -2.0 });
}

#[test]
fn rho_at_e_is_example2() {
    let b4 = bundle(&IntervalOperatorParams::example4(1.0, 1f64.exp()).unwrap()).unwrap();
    let b2 = bundle(&ex(2)).unwrap();
    assert!(b4.kappa.value().abs() < 1e-15);
    let z = Complex64::new(0.7, 0.4);
    assert!((b4.v.eval(z).unwrap() - b2.v.eval(z).unwrap()).norm() < 1e-13);
}

#[test]
fn ode_residual_is_second_order() {
    let f = |t: f64| Complex64::new(t.cos(), t * t);
    for n in [1, 2, 4] {
        for v in [Variant::T, Variant::TStar] {
            let z = Complex64::new(-0.4, 1.3);
            let a = ode_residual(&ex(n), v, z, f, 400).unwrap();
            let b = ode_residual(&ex(n), v, z, f, 800).unwrap();
            let order = (a.l2 / b.l2).log2();
            assert!(
                (order - 2.0).abs() < 0.1,
                "example {n} {v:?}: order {order}"
            );
            assert!(b.boundary < 1e-13);
        }
    }
}

#[test]
fn example1_constant_input() {
    // i y' = z y + 1 with y(0) = 0.
    let z = Complex64::new(0.2, 1.1);
    let n = 2000;
    let y = resolvent_apply(
        &ex(1),
        Variant::T,
        z,
        &vec![Complex64::new(1.0, 0.0); n + 1],
    )
    .unwrap();
    for (k, &t) in sample_grid(1.0, n).iter().enumerate().step_by(97) {
        let exact = ((-I * z * t).exp() - 1.0) / z;
        assert!((y[k] - exact).norm() < 1e-9, "t={t}: {} vs {exact}", y[k]);
    }
}

#[test]
fn transfer_via_resolvent_matches_closed_forms() {
    for n in [1, 2, 4] {
        let p = ex(n);
        let w = bundle(&p).unwrap().w;
        for z in [
            Complex64::new(0.3, 0.7),
            Complex64::new(-2.0, 3.0),
            Complex64::new(4.0, 0.2),
        ] {
            let closed = w.eval(z).unwrap();
            let via = transfer_via_resolvent(&p, z).unwrap();
            assert!((via - closed).norm() <= 1e-12 * closed.norm().max(1.0));
        }
    }
    let p3 = IntervalOperatorParams::example3(1.0, I).unwrap();
    assert!(transfer_via_resolvent(&p3, I).is_err());
}

#[test]
fn delta_values_match_mollified_sources() {
    // z = i is a pole of example 2's resolvent (e^{-iℓz} = e^ℓ), so a nearby point is used.
    let z = Complex64::new(0.0, 2.0);
    for n in [1, 2, 4] {
        for v in [Variant::T, Variant::TStar] {
            for at_end in [false, true] {
                let (a0, al) = delta_values(&ex(n), v, z).unwrap();
                let exact = if at_end { al } else { a0 };
                if exact.norm() == 0.0 {
                    continue;
                }
                let c = mollifier_check(&ex(n), v, z, 0.05, at_end, 4000).unwrap();
                assert!(c.rel_err < 1e-2, "example {n} {v:?} end={at_end}: {c:?}");
            }
        }
    }
    assert!(delta_values(&ex(2), Variant::T, I).unwrap_err().is_pole());
}

#[test]
fn example3_phase_family() {
    for k in 0..8 {
        let mu = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 4.0);
        let b = example3_functions(1.0, mu).unwrap();
        assert!(b.get(Role::Characteristic).is_none());
        let nu = b.nu.unwrap().value();
        assert!((nu.norm() - 1.0).abs() < 1e-14);
        let z = Complex64::new(0.5, 0.5);
        // |W| > 1 in the upper half-plane for a dissipative main operator.
        assert!(b.w.eval(z).unwrap().norm() > 1.0);
    }
}
