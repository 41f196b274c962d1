//! Donoghue classes.
//!
//! A Herglotz function `V(z) = Q + Lz + ∫ (1/(λ - z) - λ/(1 + λ²)) dμ` with
//! no linear term has `V(i) = Q + iL`. The class 𝔐 is `Q = 0, L = 1`; the
//! class 𝔐_κ is `Q = 0, L = (1 - κ)/(1 + κ)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::{AnalyticFn, Role, UnimodularFactor, VonNeumannKappa};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::measures::{herglotz_check, HerglotzReport, MeasureSpec, QuadratureConfig};
use crate::model::{build_model, DiscreteModel};
use crate::I;

/// Membership tolerance for closed-form inputs.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Membership tolerance for quadrature-backed inputs.
pub const QUADRATURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub q: f64,
    pub l: f64,
    /// `(1 - L)/(1 + L)` when `Q ≈ 0` and `0 < L <= 1`.
    pub kappa_hat: Option<f64>,
    pub in_m: bool,
    pub in_m_kappa: bool,
    pub herglotz: HerglotzReport,
    pub tol: f64,
}

/// Reads `Q` and `L` off `V(i)` and checks class membership.
pub fn classify_impedance(
    v: &AnalyticFn,
    grid: &GridSpec,
    tol: f64,
) -> Result<ClassificationReport> {
    if v.role() != Role::Impedance {
        return Err(Error::WrongRole {
            expected: Role::Impedance.as_str(),
            found: v.role().as_str(),
        });
    }
    let vi = v.eval(I)?;
    let (q, l) = (vi.re, vi.im);
    let herglotz = herglotz_check(v, grid, tol)?;
    let q_ok = q.abs() <= tol;
    let kappa_hat = if q_ok && l > 0.0 && l <= 1.0 + tol {
        Some(((1.0 - l) / (1.0 + l)).max(0.0))
    } else {
        None
    };
    let in_m_kappa = kappa_hat
        .map(|k| (l - (1.0 - k) / (1.0 + k)).abs() <= tol)
        .unwrap_or(false);
    Ok(ClassificationReport {
        q,
        l,
        kappa_hat,
        in_m: q_ok && (l - 1.0).abs() <= tol,
        in_m_kappa,
        herglotz,
        tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QlPair {
    pub q: f64,
    pub l: f64,
    /// Largest imaginary part discarded when reading `Q` and `L` as reals.
    pub im_residual: f64,
}

/// Imaginary residual above which a `(ν, κ)` pair is rejected.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// `Q` and `L` of the impedance of a system with `W = ν/S` and `S(i) = κ`:
///
/// ```text
/// L = (ν - κ²ν)/((ν + κ)(1 + κν))
/// Q = i(ν(1 - L) - κ(1 + L))/(ν + κ)
/// ```
pub fn theorem21_algebra(nu: UnimodularFactor, kappa: VonNeumannKappa) -> Result<QlPair> {
    let n = nu.value();
    let k = kappa.value();
    let sum = n + k;
    if sum.norm() == 0.0 {
        return Err(Error::Inconsistent("nu + kappa vanishes".into()));
    }
    let l = (n - k * k * n) / (sum * (1.0 + k * n));
    let q = I * (n * (1.0 - l.re) - k * (1.0 + l.re)) / sum;
    let im_residual = l.im.abs().max(q.im.abs());
    if im_residual > ALGEBRA_TOL {
        return Err(Error::Inconsistent(format!(
            "Q and L are not real (residual {im_residual:e})"
        )));
    }
    Ok(QlPair {
        q: q.re,
        l: l.re,
        im_residual,
    })
}

/// `V(i) = i(W(i) - 1)/(W(i) + 1)` with `W(i) = ν/κ`, i.e. `i(ν - κ)/(ν + κ)`.
pub fn impedance_at_i(nu: UnimodularFactor, kappa: VonNeumannKappa) -> Complex64 {
    let n = nu.value();
    let k = kappa.value();
    I * (n - k) / (n + k)
}

/// `z ↦ ((1 - κ)/(1 + κ)) V₀(z)`, taking 𝔐 to 𝔐_κ.
pub fn scale_between_classes(
    v0: &AnalyticFn,
    kappa: VonNeumannKappa,
    grid: &GridSpec,
    tol: f64,
) -> Result<AnalyticFn> {
    let report = classify_impedance(v0, grid, tol)?;
    if !report.in_m {
        return Err(Error::NotDonoghue {
            q: report.q,
            l: report.l,
        });
    }
    let factor = kappa.class_normalization();
    let inner = v0.clone();
    Ok(AnalyticFn::new(Role::Impedance, move |z| Ok(factor * inner.eval(z)?)).with_kappa(kappa))
}

/// Builds a finite model whose impedance reproduces the Weyl function of a
/// measure normalized to `(1 - κ)/(1 + κ)`.
pub fn realize(
    measure: &MeasureSpec,
    kappa: VonNeumannKappa,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<DiscreteModel> {
    build_model(measure, kappa, n, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn ex1_v() -> AnalyticFn {
        AnalyticFn::total(Role::Impedance, |z| {
            let e = (-I * z).exp();
            I * (e - 1.0) / (e + 1.0)
        })
    }

    fn ex2_v() -> AnalyticFn {
        AnalyticFn::total(Role::Impedance, |z| {
            let e = (-I * z).exp();
            I * ((E + 1.0) / (E - 1.0)) * (e - 1.0) / (e + 1.0)
        })
    }

    #[test]
    fn classify_examples() {
        let g = GridSpec::fifty();
        let r2 = classify_impedance(&ex2_v(), &g, CLOSED_FORM_TOL).unwrap();
        assert!(r2.in_m && r2.in_m_kappa);
        assert!(r2.herglotz.pass);
        let r1 = classify_impedance(&ex1_v(), &g, CLOSED_FORM_TOL).unwrap();
        assert!(!r1.in_m && r1.in_m_kappa);
        assert!((r1.l - 0.462_117_157_260_009_8).abs() < 1e-12);
        assert!((r1.kappa_hat.unwrap() - (-1.0f64).exp()).abs() < 1e-12);
        let two = AnalyticFn::constant(Role::Impedance, 2.0 * I);
        let r = classify_impedance(&two, &g, CLOSED_FORM_TOL).unwrap();
        assert!(!r.in_m && !r.in_m_kappa && r.kappa_hat.is_none());
    }

    #[test]
    fn algebra_reference_values() {
        let r =
            theorem21_algebra(UnimodularFactor::one(), VonNeumannKappa::new(0.3).unwrap()).unwrap();
        assert!((r.l - 0.91 / 1.69).abs() < 1e-15);
        assert!((r.l - 0.7 / 1.3).abs() < 1e-15);
        assert!(r.q.abs() < 1e-15);
        let r = theorem21_algebra(UnimodularFactor::one(), VonNeumannKappa::zero()).unwrap();
        assert_eq!((r.q, r.l), (0.0, 1.0));
    }

    #[test]
    fn algebra_matches_cayley_route() {
        for k in [0.0, 0.25, 0.8] {
            let kappa = VonNeumannKappa::new(k).unwrap();
            for phi in [PI / 3.0, 2.0, -0.7] {
                let nu = UnimodularFactor::from_angle(phi);
                let r = theorem21_algebra(nu, kappa).unwrap();
                let v = impedance_at_i(nu, kappa);
                assert!((r.q - v.re).abs() < 1e-14 && (r.l - v.im).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn scaling() {
        let g = GridSpec::fifty();
        let k = VonNeumannKappa::new((-1.0f64).exp()).unwrap();
        let v = scale_between_classes(&ex2_v(), k, &g, CLOSED_FORM_TOL).unwrap();
        for z in g.points() {
            assert!((v.eval(z).unwrap() - ex1_v().eval(z).unwrap()).norm() < 1e-12);
        }
        let ci = AnalyticFn::constant(Role::Impedance, I);
        let half = VonNeumannKappa::new(0.5).unwrap();
        let v = scale_between_classes(&ci, half, &g, CLOSED_FORM_TOL).unwrap();
        assert!((v.eval(I).unwrap() - I / 3.0).norm() < 1e-15);
        assert!(matches!(
            scale_between_classes(&ex1_v(), half, &g, CLOSED_FORM_TOL),
            Err(Error::NotDonoghue { .. })
        ));
    }
}
