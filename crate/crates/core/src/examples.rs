//! Closed forms for `i d/dt` on `[0, ℓ]`.
//!
//! The symmetric operator has domain `x(0) = x(ℓ) = 0`. The examples differ
//! in the boundary condition of the dissipative extension `T`:
//!
//! | example | `T`                 | `κ`                         |
//! |---------|---------------------|-----------------------------|
//! | 1       | `x(0) = 0`          | `e^{-ℓ}`                    |
//! | 2, 3    | `x(ℓ) = e^ℓ x(0)`   | `0`                         |
//! | 4       | `x(ℓ) = ρ x(0)`     | `(ρ - e^ℓ)/(ρe^ℓ - 1)`      |
//!
//! Example 3 varies the self-adjoint reference extension of Example 2 with a
//! unimodular `μ`. All four share the Livsic function
//! `s(z) = (e^ℓ - E)/(1 - e^ℓ E)` where `E = e^{-iℓz}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::{
    mobius_apply, AnalyticFn, Role, UnimodularFactor, VonNeumannKappa, POLE_TOL,
};
use crate::error::{Error, EvalError, Result};
use crate::I;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Boundary {
    /// Example 1.
    Dirichlet,
    /// Example 2.
    ExpT0,
    /// Example 3 with unimodular `μ`.
    PhaseFamily { mu: Complex64 },
    /// Example 4.
    RhoFamily { rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalOperatorParams {
    ell: f64,
    boundary: Boundary,
}

impl IntervalOperatorParams {
    pub fn new(ell: f64, boundary: Boundary) -> Result<Self> {
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ell must be positive, got {ell}"
            )));
        }
        match boundary {
            Boundary::PhaseFamily { mu } => {
                if (mu.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::NotUnimodular(mu));
                }
                if (mu * ell.exp() + 1.0).norm() <= POLE_TOL {
                    return Err(Error::InvalidArgument("mu e^ell = -1 is degenerate".into()));
                }
            }
            Boundary::RhoFamily { rho } => {
                let lower = ell.exp();
                if !(rho.is_finite() && (rho < -1.0 || rho >= lower)) {
                    return Err(Error::InadmissibleRho { rho, lower });
                }
            }
            Boundary::Dirichlet | Boundary::ExpT0 => {}
        }
        Ok(Self { ell, boundary })
    }

    pub fn example1(ell: f64) -> Result<Self> {
        Self::new(ell, Boundary::Dirichlet)
    }

    pub fn example2(ell: f64) -> Result<Self> {
        Self::new(ell, Boundary::ExpT0)
    }

    pub fn example3(ell: f64, mu: Complex64) -> Result<Self> {
        Self::new(ell, Boundary::PhaseFamily { mu })
    }

    pub fn example4(ell: f64, rho: f64) -> Result<Self> {
        Self::new(ell, Boundary::RhoFamily { rho })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn number(&self) -> u8 {
        match self.boundary {
            Boundary::Dirichlet => 1,
            Boundary::ExpT0 => 2,
            Boundary::PhaseFamily { .. } => 3,
            Boundary::RhoFamily { .. } => 4,
        }
    }

    pub fn kappa(&self) -> VonNeumannKappa {
        let el = self.ell.exp();
        let k = match self.boundary {
            Boundary::Dirichlet => (-self.ell).exp(),
            Boundary::ExpT0 | Boundary::PhaseFamily { .. } => 0.0,
            Boundary::RhoFamily { rho } => (rho - el) / (rho * el - 1.0),
        };
        VonNeumannKappa::new(k).expect("admissible parameters give kappa in [0, 1)")
    }

    /// Ratio `r` in the boundary condition `x(ℓ) = r x(0)` of `T` or `T*`;
    /// `None` stands for `x(0) = 0`.
    fn ratio(&self, variant: Variant) -> Option<f64> {
        let el = self.ell.exp();
        match (self.boundary, variant) {
            (Boundary::Dirichlet, Variant::T) => None,
            (Boundary::Dirichlet, Variant::TStar) => Some(0.0),
            (Boundary::ExpT0 | Boundary::PhaseFamily { .. }, Variant::T) => Some(el),
            (Boundary::ExpT0 | Boundary::PhaseFamily { .. }, Variant::TStar) => Some(1.0 / el),
            (Boundary::RhoFamily { rho }, Variant::T) => Some(rho),
            (Boundary::RhoFamily { rho }, Variant::TStar) => Some(1.0 / rho),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    T,
    TStar,
}

/// Functions attached to one example. Entries the example does not define
/// are `None`.
#[derive(Debug, Clone)]
pub struct ExampleBundle {
    pub params: IntervalOperatorParams,
    pub kappa: VonNeumannKappa,
    pub s: AnalyticFn,
    pub big_s: Option<AnalyticFn>,
    pub w: AnalyticFn,
    pub v: AnalyticFn,
    /// Example 3: quasi-kernel phase `U = e^{2iβ}`, `β`, and `ν`.
    pub u: Option<Complex64>,
    pub beta: Option<f64>,
    pub nu: Option<UnimodularFactor>,
}

impl ExampleBundle {
    pub fn get(&self, role: Role) -> Option<&AnalyticFn> {
        match role {
            Role::Livsic => Some(&self.s),
            Role::Characteristic => self.big_s.as_ref(),
            Role::Transfer => Some(&self.w),
            Role::Impedance => Some(&self.v),
            Role::Weyl | Role::Other => None,
        }
    }
}

fn cplx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `z ↦ (a E + b)/(c E + d)` with `E = e^{-iℓz}`.
fn exp_mobius(role: Role, ell: f64, m: [Complex64; 4]) -> AnalyticFn {
    AnalyticFn::new(role, move |z| mobius_apply(m, (-I * ell * z).exp(), z))
}

fn livsic(ell: f64) -> AnalyticFn {
    let el = ell.exp();
    exp_mobius(
        Role::Livsic,
        ell,
        [cplx(-1.0), cplx(el), cplx(-el), cplx(1.0)],
    )
}

/// `V = i c (E - 1)/(E + 1)`.
fn tangent_impedance(ell: f64, c: Complex64) -> AnalyticFn {
    exp_mobius(Role::Impedance, ell, [I * c, -I * c, cplx(1.0), cplx(1.0)])
}

pub fn example1_functions(ell: f64) -> Result<ExampleBundle> {
    let params = IntervalOperatorParams::example1(ell)?;
    let kappa = params.kappa();
    let z0 = cplx(0.0);
    Ok(ExampleBundle {
        params,
        kappa,
        s: livsic(ell),
        big_s: Some(
            exp_mobius(Role::Characteristic, ell, [z0, cplx(1.0), cplx(1.0), z0]).with_kappa(kappa),
        ),
        w: exp_mobius(Role::Transfer, ell, [cplx(1.0), z0, z0, cplx(1.0)]).with_kappa(kappa),
        v: tangent_impedance(ell, cplx(1.0)).with_kappa(kappa),
        u: None,
        beta: None,
        nu: Some(UnimodularFactor::one()),
    })
}

fn ex2_transfer_coeffs(ell: f64) -> [Complex64; 4] {
    let el = ell.exp();
    [cplx(el), cplx(-1.0), cplx(-1.0), cplx(el)]
}

pub fn example2_functions(ell: f64) -> Result<ExampleBundle> {
    let params = IntervalOperatorParams::example2(ell)?;
    let kappa = params.kappa();
    let el = ell.exp();
    Ok(ExampleBundle {
        params,
        kappa,
        s: livsic(ell),
        // S = -s.
        big_s: Some(
            exp_mobius(
                Role::Characteristic,
                ell,
                [cplx(1.0), cplx(-el), cplx(-el), cplx(1.0)],
            )
            .with_kappa(kappa),
        ),
        w: exp_mobius(Role::Transfer, ell, ex2_transfer_coeffs(ell)).with_kappa(kappa),
        v: tangent_impedance(ell, cplx((el + 1.0) / (el - 1.0))).with_kappa(kappa),
        u: None,
        beta: None,
        nu: Some(UnimodularFactor::one()),
    })
}

/// Example 3. `W` carries the unimodular prefactor `(e^ℓ + μ)/(μe^ℓ + 1)`,
/// so no characteristic function with `ν = 1` is attached.
pub fn example3_functions(ell: f64, mu: Complex64) -> Result<ExampleBundle> {
    let params = IntervalOperatorParams::example3(ell, mu)?;
    let el = ell.exp();
    let emk = (-ell).exp();
    let u = -(1.0 + mu * el) / (mu + el);
    let mut beta = 0.5 * u.arg();
    if beta < 0.0 {
        beta += PI;
    }
    if beta >= PI {
        beta -= PI;
    }
    let nu = (2.0 * mu * emk + emk * emk + 1.0) / (mu + 2.0 * emk + mu * emk * emk);
    let nu = UnimodularFactor::new(nu / nu.norm())
        .map_err(|_| Error::Inconsistent(format!("nu = {nu} is not unimodular")))?;
    let pre = (el + mu) / (mu * el + 1.0);
    let [a, b, c, d] = ex2_transfer_coeffs(ell);
    let w = exp_mobius(Role::Transfer, ell, [pre * a, pre * b, c, d]).with_kappa(params.kappa());
    let mb = mu.conj();
    let (e2p, e2m) = (el * el + 1.0, el * el - 1.0);
    // V = i[(μ̄E - 1)(e^{2ℓ} + 1) + 2e^ℓE - 2μ̄e^ℓ] / [(μ̄E + 1)(e^{2ℓ} - 1)]
    let v = exp_mobius(
        Role::Impedance,
        ell,
        [
            I * (mb * e2p + 2.0 * el),
            I * (-e2p - 2.0 * mb * el),
            mb * e2m,
            cplx(e2m),
        ],
    )
    .with_kappa(params.kappa());
    Ok(ExampleBundle {
        params,
        kappa: params.kappa(),
        s: livsic(ell),
        big_s: None,
        w,
        v,
        u: Some(u),
        beta: Some(beta),
        nu: Some(nu),
    })
}

pub fn example4_functions(ell: f64, rho: f64) -> Result<ExampleBundle> {
    let params = IntervalOperatorParams::example4(ell, rho)?;
    let kappa = params.kappa();
    Ok(ExampleBundle {
        params,
        kappa,
        s: livsic(ell),
        big_s: Some(
            exp_mobius(
                Role::Characteristic,
                ell,
                [cplx(-1.0), cplx(rho), cplx(rho), cplx(-1.0)],
            )
            .with_kappa(kappa),
        ),
        w: exp_mobius(
            Role::Transfer,
            ell,
            [cplx(rho), cplx(-1.0), cplx(-1.0), cplx(rho)],
        )
        .with_kappa(kappa),
        v: tangent_impedance(ell, cplx((rho + 1.0) / (rho - 1.0))).with_kappa(kappa),
        u: None,
        beta: None,
        nu: Some(UnimodularFactor::one()),
    })
}

pub fn bundle(params: &IntervalOperatorParams) -> Result<ExampleBundle> {
    match params.boundary {
        Boundary::Dirichlet => example1_functions(params.ell),
        Boundary::ExpT0 => example2_functions(params.ell),
        Boundary::PhaseFamily { mu } => example3_functions(params.ell, mu),
        Boundary::RhoFamily { rho } => example4_functions(params.ell, rho),
    }
}

fn boundary_denominator(r: f64, e: Complex64, z: Complex64) -> Result<Complex64, EvalError> {
    let den = r - e;
    if den.norm() <= POLE_TOL * (r.abs() + e.norm()) {
        return Err(EvalError::Pole { z });
    }
    Ok(den)
}

/// Uniform grid `t_k = kℓ/n`, `k = 0..=n`.
pub fn sample_grid(ell: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| ell * k as f64 / n as f64).collect()
}

/// Running integral `∫₀^{t_k} g` of samples on a uniform grid, third order
/// per interval.
fn cumulative_integral(g: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = g.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for k in 0..n {
        let step = if k + 2 <= n {
            5.0 * g[k] + 8.0 * g[k + 1] - g[k + 2]
        } else {
            -g[k - 1] + 8.0 * g[k] + 5.0 * g[k + 1]
        };
        out[k + 1] = out[k] + step * (h / 12.0);
    }
    out
}

/// `(T - z)⁻¹ f` (or `(T* - z)⁻¹ f`) for `f` sampled on [`sample_grid`].
///
/// ```text
/// y(t) = -i e^{-izt} (∫₀ᵗ f(s) e^{izs} ds + C),   C = E I/(r - E)
/// ```
///
/// with `I` the integral over the whole interval, so that `x(ℓ) = r x(0)`.
pub fn resolvent_apply(
    params: &IntervalOperatorParams,
    variant: Variant,
    z: Complex64,
    f: &[Complex64],
) -> Result<Vec<Complex64>> {
    if f.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 samples".into()));
    }
    if !z.is_finite() {
        return Err(EvalError::RealAxis { z }.into());
    }
    let n = f.len() - 1;
    let ell = params.ell;
    let h = ell / n as f64;
    let t = sample_grid(ell, n);
    let g: Vec<Complex64> = f
        .iter()
        .zip(&t)
        .map(|(fk, &tk)| fk * (I * z * tk).exp())
        .collect();
    let cum = cumulative_integral(&g, h);
    let big_e = (-I * ell * z).exp();
    let c = match params.ratio(variant) {
        None => Complex64::new(0.0, 0.0),
        Some(r) => big_e * cum[n] / boundary_denominator(r, big_e, z)?,
    };
    Ok(cum
        .iter()
        .zip(&t)
        .map(|(ck, &tk)| -I * (-I * z * tk).exp() * (ck + c))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeResidual {
    /// `‖i y' - z y - f‖` in `L²(0, ℓ)`.
    pub l2: f64,
    /// `|y(ℓ) - r y(0)|`, or `|y(0)|` for the Dirichlet condition.
    pub boundary: f64,
}

/// Checks the output of [`resolvent_apply`] against its differential
/// equation using second-order differences.
pub fn ode_residual<F: Fn(f64) -> Complex64>(
    params: &IntervalOperatorParams,
    variant: Variant,
    z: Complex64,
    f: F,
    n: usize,
) -> Result<OdeResidual> {
    let t = sample_grid(params.ell, n);
    let fs: Vec<Complex64> = t.iter().map(|&x| f(x)).collect();
    let y = resolvent_apply(params, variant, z, &fs)?;
    let h = params.ell / n as f64;
    let mut sum = 0.0;
    for k in 0..=n {
        let dy = if k == 0 {
            (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
        } else if k == n {
            (3.0 * y[n] - 4.0 * y[n - 1] + y[n - 2]) / (2.0 * h)
        } else {
            (y[k + 1] - y[k - 1]) / (2.0 * h)
        };
        let r = I * dy - z * y[k] - fs[k];
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        sum += w * h * r.norm_sqr();
    }
    let boundary = match params.ratio(variant) {
        None => y[0].norm(),
        Some(r) => (y[n] - r * y[0]).norm(),
    };
    Ok(OdeResidual {
        l2: sum.sqrt(),
        boundary,
    })
}

/// Coefficients `(a₀, a_ℓ)` with `R̂δ(t) = a₀ e^{-izt}` and
/// `R̂δ(t - ℓ) = a_ℓ e^{-izt}` for the extended resolvent.
pub fn delta_values(
    params: &IntervalOperatorParams,
    variant: Variant,
    z: Complex64,
) -> Result<(Complex64, Complex64), EvalError> {
    let big_e = (-I * params.ell * z).exp();
    match params.ratio(variant) {
        None => Ok((-I, Complex64::new(0.0, 0.0))),
        Some(r) => {
            let den = boundary_denominator(r, big_e, z)?;
            Ok((-I * r / den, -I / den))
        }
    }
}

/// Channel vector `χ = c₀ δ(t) + c_ℓ δ(t - ℓ)`.
pub fn channel(params: &IntervalOperatorParams) -> Result<(f64, f64)> {
    let el = params.ell.exp();
    let k = |ratio: f64| (ratio / 2.0).sqrt();
    match params.boundary {
        Boundary::Dirichlet => Ok((1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt())),
        Boundary::ExpT0 => {
            let c = k((el + 1.0) / (el - 1.0));
            Ok((-c, c))
        }
        Boundary::RhoFamily { rho } => {
            let c = k((rho + 1.0) / (rho - 1.0));
            Ok((-c, c))
        }
        Boundary::PhaseFamily { .. } => Err(Error::InvalidArgument(
            "the phase family has no channel with nu = 1; use the closed-form transfer function"
                .into(),
        )),
    }
}

/// `W(z) = 1 - 2i((T - z)⁻¹ χ, χ)` from the δ-values of the extended resolvent.
pub fn transfer_via_resolvent(params: &IntervalOperatorParams, z: Complex64) -> Result<Complex64> {
    let (c0, cl) = channel(params)?;
    let (a0, al) = delta_values(params, Variant::T, z)?;
    let big_e = (-I * params.ell * z).exp();
    let r_chi = c0 * a0 + cl * al;
    Ok(1.0 - 2.0 * I * r_chi * (c0 + cl * big_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollifierCheck {
    pub t: f64,
    pub exact: Complex64,
    pub coarse: Complex64,
    pub fine: Complex64,
    pub extrapolated: Complex64,
    pub rel_err: f64,
}

/// Applies the resolvent to a narrow bump of unit mass at `t = 0`
/// (`at_end = false`) or `t = ℓ` and compares `y(t)` with the δ-value,
/// extrapolating the bump width `η → 0` from `η` and `η/2`.
pub fn mollifier_check(
    params: &IntervalOperatorParams,
    variant: Variant,
    z: Complex64,
    eta: f64,
    at_end: bool,
    n: usize,
) -> Result<MollifierCheck> {
    let ell = params.ell;
    if !(eta > 0.0 && eta < 0.25 * ell) {
        return Err(Error::InvalidArgument(
            "bump width must lie in (0, ell/4)".into(),
        ));
    }
    let t_probe = 0.5 * ell;
    let k_probe = n / 2;
    let apply = |width: f64| -> Result<Complex64> {
        let bump = |x: f64| {
            let s = if at_end { ell - x } else { x };
            if (0.0..=width).contains(&s) {
                cplx(2.0 / width * (PI * s / width).sin().powi(2))
            } else {
                cplx(0.0)
            }
        };
        let fs: Vec<Complex64> = sample_grid(ell, n).iter().map(|&x| bump(x)).collect();
        Ok(resolvent_apply(params, variant, z, &fs)?[k_probe])
    };
    let coarse = apply(eta)?;
    let fine = apply(0.5 * eta)?;
    let extrapolated = 2.0 * fine - coarse;
    let (a0, al) = delta_values(params, variant, z)?;
    let exact = if at_end { al } else { a0 } * (-I * z * t_probe).exp();
    Ok(MollifierCheck {
        t: t_probe,
        exact,
        coarse,
        fine,
        extrapolated,
        rel_err: (extrapolated - exact).norm() / exact.norm(),
    })
}
