//! Verification suites run by `lsys verify`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::biextension::{
    h_parameter, imaginary_part_channel, QuasiKernelPhase, ScalarBiExtension,
};
use crate::calculus::{
    char_from_livsic, impedance_from_transfer, livsic_from_char, livsic_from_weyl,
    transfer_from_char, transfer_from_impedance, weyl_from_livsic, UnimodularFactor,
    VonNeumannKappa,
};
use crate::donoghue::theorem21_algebra;
use crate::error::{Error, Result};
use crate::examples::{
    example1_functions, example2_functions, example3_functions, example4_functions, ExampleBundle,
};
use crate::grid::GridSpec;
use crate::model::{cross_check, DiscreteModel};
use crate::I;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    /// Expected failure: a known mismatch that is measured, not fixed.
    XFail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::XFail => "XFAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    pub threshold: f64,
    pub note: Option<String>,
}

impl Check {
    fn le(name: &str, residual: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            status: if residual <= threshold {
                Status::Pass
            } else {
                Status::Fail
            },
            residual,
            threshold,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

pub const SUITES: [&str; 5] = [
    "reciprocity",
    "cayley",
    "donoghue",
    "biextension",
    "examples",
];

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    let checks = match name {
        "reciprocity" => reciprocity()?,
        "cayley" => cayley()?,
        "donoghue" => donoghue()?,
        "biextension" => biextension()?,
        "examples" => examples()?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite {other}; available: {}",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        suite: name.into(),
        checks,
    })
}

/// A model with `1..=max_nodes` distinct nodes in `[-5, 5]` and weights
/// normalized for `κ`.
pub fn random_atom_model<R: Rng>(
    rng: &mut R,
    kappa: VonNeumannKappa,
    max_nodes: usize,
) -> DiscreteModel {
    let n = rng.gen_range(1..=max_nodes);
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    while nodes.len() < n {
        let x: f64 = rng.gen_range(-5.0..5.0);
        if nodes.iter().all(|y| (x - y).abs() > 1e-3) {
            nodes.push(x);
        }
    }
    nodes.sort_by(f64::total_cmp);
    let weights = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
    DiscreteModel::normalized(nodes, weights, kappa).expect("random model is valid")
}

fn max_over<F: Fn(Complex64) -> Result<f64>>(points: &[Complex64], f: F) -> Result<f64> {
    let mut m: f64 = 0.0;
    for &z in points {
        m = m.max(f(z)?);
    }
    Ok(m)
}

fn reciprocity() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = GridSpec::model_default();
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for k in [0.0, 0.3, 0.7] {
        let kappa = VonNeumannKappa::new(k)?;
        for _ in 0..8 {
            let m = random_atom_model(&mut rng, kappa, 10);
            let r = cross_check(&m, &grid, UnimodularFactor::one())?;
            worst = worst.max(r.max_reciprocity);
            compared += r.compared;
        }
    }
    let mut c = Check::le(
        "max |W_resolvent * S - 1| over 24 random models",
        worst,
        1e-10,
    );
    c.note = Some(format!("{compared} grid points compared"));
    Ok(vec![c])
}

fn cayley() -> Result<Vec<Check>> {
    let grid = GridSpec::fifty().points();
    let b1 = example1_functions(1.0)?;
    let b2 = example2_functions(1.0)?;

    let w2 = transfer_from_impedance(&b2.v)?;
    let v2 = impedance_from_transfer(&w2)?;
    let vw = max_over(&grid, |z| Ok((v2.eval(z)? - b2.v.eval(z)?).norm()))?;

    let m = weyl_from_livsic(&b1.s)?;
    let s_back = livsic_from_weyl(&m)?;
    let ms = max_over(&grid, |z| Ok((s_back.eval(z)? - b1.s.eval(z)?).norm()))?;

    let big_s = char_from_livsic(&b1.s, b1.kappa)?;
    let s_again = livsic_from_char(&big_s, b1.kappa)?;
    let inv = max_over(&grid, |z| Ok((s_again.eval(z)? - b1.s.eval(z)?).norm()))?;

    Ok(vec![
        Check::le("V -> W -> V on example 2", vw, 1e-12),
        Check::le("s -> M -> s on example 1", ms, 1e-12),
        Check::le("s -> S -> s on example 1", inv, 1e-12),
    ])
}

fn donoghue() -> Result<Vec<Check>> {
    let mut worst_zero: f64 = 0.0;
    let mut false_hits = 0usize;
    for j in 0..64 {
        let nu = UnimodularFactor::from_angle(2.0 * PI * j as f64 / 64.0);
        for i in 0..10 {
            let kappa = VonNeumannKappa::new(0.1 * i as f64)?;
            let r = theorem21_algebra(nu, kappa)?;
            let dist = r.q.abs().max((r.l - 1.0).abs());
            if i == 0 {
                worst_zero = worst_zero.max(dist);
            } else if dist <= 1e-12 {
                false_hits += 1;
            }
        }
    }
    let mut ident: f64 = 0.0;
    for i in 0..10 {
        let kappa = VonNeumannKappa::new(0.1 * i as f64)?;
        let r = theorem21_algebra(UnimodularFactor::one(), kappa)?;
        ident = ident.max(r.q.abs().max((r.l - kappa.class_normalization()).abs()));
    }
    let mut hits = Check::le(
        "(Q, L) = (0, 1) found only at kappa = 0",
        false_hits as f64,
        0.0,
    );
    hits.note = Some("64 nu x 9 nonzero kappa".into());
    Ok(vec![
        Check::le(
            "(Q, L) = (0, 1) at kappa = 0 for all 64 nu",
            worst_zero,
            1e-12,
        ),
        hits,
        Check::le("nu = 1 gives (0, (1 - k)/(1 + k))", ident, 1e-14),
    ])
}

fn biextension() -> Result<Vec<Check>> {
    let mut pattern: f64 = 0.0;
    let mut h_err: f64 = 0.0;
    for i in 0..10 {
        let kappa = VonNeumannKappa::new(0.1 * i as f64)?;
        let e = ScalarBiExtension::new(kappa, QuasiKernelPhase::identity());
        let ch = imaginary_part_channel(&e.s_a, &e.s_a_star)?;
        let k = kappa.value();
        pattern = pattern.max(
            ch.residual
                .max((ch.coefficient - (1.0 - k) / (2.0 + 2.0 * k)).abs()),
        );
        h_err =
            h_err.max((h_parameter(kappa, QuasiKernelPhase::identity()) - I / (1.0 + k)).norm());
    }
    Ok(vec![
        Check::le("(S_A - S_A*)/2i = (1 - k)/(2 + 2k) ones", pattern, 1e-14),
        Check::le("H(k, 1) = i/(1 + k)", h_err, 1e-14),
    ])
}

/// `max |W_{μ=-1}/W_ex2 + 1|` on the 50-point grid.
pub fn example3_mu_minus_one_ratio() -> Result<f64> {
    let b3 = example3_functions(1.0, Complex64::new(-1.0, 0.0))?;
    let b2 = example2_functions(1.0)?;
    max_over(&GridSpec::fifty().points(), |z| {
        Ok((b3.w.eval(z)? / b2.w.eval(z)? + 1.0).norm())
    })
}

fn examples() -> Result<Vec<Check>> {
    let grid = GridSpec::fifty().points();
    let b1 = example1_functions(1.0)?;
    let b2 = example2_functions(1.0)?;
    let b4 = example4_functions(1.0, -2.0)?;

    let mut v_at_i: f64 = (b2.v.eval(I)? - I).norm();
    for k in 0..8 {
        let b3 = example3_functions(1.0, Complex64::from_polar(1.0, PI * k as f64 / 4.0))?;
        v_at_i = v_at_i.max((b3.v.eval(I)? - I).norm());
    }
    for b in [&b1, &b4] {
        v_at_i = v_at_i.max((b.v.eval(I)? - I * b.kappa.class_normalization()).norm());
    }

    let scale = |b: &ExampleBundle| -> Result<f64> {
        let c = b.kappa.class_normalization();
        max_over(&grid, |z| Ok((b.v.eval(z)? - c * b2.v.eval(z)?).norm()))
    };
    let scaling = scale(&b1)?.max(scale(&b4)?);

    let recip = |b: &ExampleBundle| -> Result<f64> {
        let s = b.big_s.clone().expect("characteristic function");
        max_over(&grid, |z| Ok((b.w.eval(z)? * s.eval(z)? - 1.0).norm()))
    };
    let ws = recip(&b1)?.max(recip(&b4)?);

    let pipeline = pipeline_residual(&b1, &grid)?.max(pipeline_residual(&b4, &grid)?);

    let ratio = example3_mu_minus_one_ratio()?;
    let xfail = Check {
        name: "example 3 at mu = -1 coincides with example 2".into(),
        status: if ratio <= 1e-12 {
            Status::XFail
        } else {
            Status::Fail
        },
        residual: ratio,
        threshold: 1e-12,
        note: Some(
            "the displayed formulas give W(mu=-1) = -W_ex2; residual is |W/W_ex2 + 1|".into(),
        ),
    };
    Ok(vec![
        Check::le("V(i) normalizations of examples 1-4", v_at_i, 1e-12),
        Check::le("V_ex1, V_ex4 = ((1 - k)/(1 + k)) V_ex2", scaling, 1e-12),
        Check::le("W S = 1 for examples 1 and 4", ws, 1e-12),
        Check::le(
            "s -> S, S -> W, W -> V reproduce the closed forms",
            pipeline,
            1e-12,
        ),
        xfail,
    ])
}

/// Largest deviation of each transform `s → S`, `S → W`, `W → V`, applied
/// to the closed-form predecessor, from the closed-form result. `S` is
/// compared in absolute terms, `W` and `V` relative to `max(|value|, 1)` and
/// `|W|` respectively.
///
/// Chaining all three steps from `s` is not used here: where `|S|` is small
/// the absolute rounding of `S` becomes a large relative error of `W = 1/S`.
pub fn pipeline_residual(b: &ExampleBundle, points: &[Complex64]) -> Result<f64> {
    let closed_s = b.big_s.clone().expect("characteristic function");
    let big_s = char_from_livsic(&b.s, b.kappa)?;
    let w = transfer_from_char(&closed_s, UnimodularFactor::one())?;
    let v = impedance_from_transfer(&b.w)?;
    max_over(points, |z| {
        let ds = (big_s.eval(z)? - closed_s.eval(z)?).norm();
        let wc = b.w.eval(z)?;
        let dw = (w.eval(z)? - wc).norm() / wc.norm();
        let vc = b.v.eval(z)?;
        let dv = (v.eval(z)? - vc).norm() / vc.norm().max(1.0);
        Ok(ds.max(dw).max(dv))
    })
}

/// `max |W_chain/W - 1|` with `W_chain` computed from `s` through `S`.
pub fn chained_transfer_residual(b: &ExampleBundle, points: &[Complex64]) -> Result<f64> {
    let big_s = char_from_livsic(&b.s, b.kappa)?;
    let w = transfer_from_char(&big_s, UnimodularFactor::one())?;
    max_over(points, |z| {
        let wc = b.w.eval(z)?;
        Ok((w.eval(z)? - wc).norm() / wc.norm())
    })
}
