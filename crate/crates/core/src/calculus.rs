//! The Möbius chain linking the Weyl function `M`, the Livsic function `s`,
//! the characteristic function `S`, the transfer function `W` and the
//! impedance function `V`.
//!
//! ```text
//! s = (M - i)/(M + i)          M = (1/i)(s + 1)/(s - 1)
//! S = (s - κ)/(κs - 1)         s = (S - κ)/(κS - 1)
//! W = ν/S
//! V = i(W - 1)/(W + 1)         W = (1 - iV)/(1 + iV)
//! ```

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::I;

/// Relative size of a denominator below which a quotient is reported as a pole.
pub const POLE_TOL: f64 = 1e-12;

const UNIMODULAR_TOL: f64 = 1e-14;

type Evaluator = dyn Fn(Complex64) -> Result<Complex64, EvalError> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Weyl,
    Livsic,
    Characteristic,
    Transfer,
    Impedance,
    Other,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Weyl => "weyl",
            Role::Livsic => "livsic",
            Role::Characteristic => "characteristic",
            Role::Transfer => "transfer",
            Role::Impedance => "impedance",
            Role::Other => "other",
        }
    }

    /// Herglotz roles are continued to the lower half-plane by `f(z̄) = conj f(z)`.
    pub fn is_herglotz(self) -> bool {
        matches!(self, Role::Weyl | Role::Impedance)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Real von Neumann parameter `0 <= κ < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct VonNeumannKappa(f64);

impl VonNeumannKappa {
    pub fn new(kappa: f64) -> Result<Self> {
        if (0.0..1.0).contains(&kappa) {
            Ok(Self(kappa))
        } else {
            Err(Error::InvalidKappa(kappa))
        }
    }

    pub fn zero() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(1 - κ)/(1 + κ)`, the normalization of the generalized Donoghue class.
    pub fn class_normalization(self) -> f64 {
        (1.0 - self.0) / (1.0 + self.0)
    }
}

impl TryFrom<f64> for VonNeumannKappa {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<VonNeumannKappa> for f64 {
    fn from(k: VonNeumannKappa) -> f64 {
        k.0
    }
}

/// Complex number of modulus one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnimodularFactor(Complex64);

impl UnimodularFactor {
    pub fn new(nu: Complex64) -> Result<Self> {
        if (nu.norm() - 1.0).abs() <= UNIMODULAR_TOL {
            Ok(Self(nu))
        } else {
            Err(Error::NotUnimodular(nu))
        }
    }

    pub fn one() -> Self {
        Self(Complex64::new(1.0, 0.0))
    }

    pub fn from_angle(theta: f64) -> Self {
        Self(Complex64::from_polar(1.0, theta))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// A complex function on the open upper half-plane, tagged with the role it
/// plays in the function chain.
#[derive(Clone)]
pub struct AnalyticFn {
    f: Arc<Evaluator>,
    role: Role,
    kappa: Option<VonNeumannKappa>,
    nu: Option<UnimodularFactor>,
}

impl fmt::Debug for AnalyticFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFn")
            .field("role", &self.role)
            .field("kappa", &self.kappa)
            .field("nu", &self.nu)
            .finish_non_exhaustive()
    }
}

impl AnalyticFn {
    pub fn new<F>(role: Role, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64, EvalError> + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            role,
            kappa: None,
            nu: None,
        }
    }

    /// Wraps an evaluator that cannot fail.
    pub fn total<F>(role: Role, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(role, move |z| Ok(f(z)))
    }

    pub fn constant(role: Role, c: Complex64) -> Self {
        Self::total(role, move |_| c)
    }

    pub fn with_kappa(mut self, kappa: VonNeumannKappa) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn with_nu(mut self, nu: UnimodularFactor) -> Self {
        self.nu = Some(nu);
        self
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn kappa(&self) -> Option<VonNeumannKappa> {
        self.kappa
    }

    pub fn nu(&self) -> Option<UnimodularFactor> {
        self.nu
    }

    /// Evaluates at `z`. Herglotz roles are reflected into the upper
    /// half-plane; other roles call the evaluator directly.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
            return Err(EvalError::RealAxis { z });
        }
        if z.im < 0.0 && self.role.is_herglotz() {
            return (self.f)(z.conj()).map(|v| v.conj());
        }
        (self.f)(z)
    }

    fn expect(&self, role: Role) -> Result<()> {
        if self.role == role {
            Ok(())
        } else {
            Err(Error::WrongRole {
                expected: role.as_str(),
                found: self.role.as_str(),
            })
        }
    }

    /// `z ↦ (a f(z) + b)/(c f(z) + d)` with pole tagging.
    fn mobius(&self, role: Role, m: [Complex64; 4]) -> AnalyticFn {
        let inner = self.clone();
        AnalyticFn::new(role, move |z| mobius_apply(m, inner.eval(z)?, z))
    }
}

/// Applies `(a x + b)/(c x + d)`; a denominator that is tiny relative to its
/// terms is a pole at `z`.
pub fn mobius_apply(m: [Complex64; 4], x: Complex64, z: Complex64) -> Result<Complex64, EvalError> {
    let [a, b, c, d] = m;
    let cx = c * x;
    let den = cx + d;
    if !den.is_finite() || den.norm() <= POLE_TOL * (cx.norm() + d.norm()) {
        return Err(EvalError::Pole { z });
    }
    Ok((a * x + b) / den)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `s = (M - i)/(M + i)`.
pub fn livsic_from_weyl(m: &AnalyticFn) -> Result<AnalyticFn> {
    m.expect(Role::Weyl)?;
    Ok(m.mobius(Role::Livsic, [c(1.0), -I, c(1.0), I]))
}

/// `M = (1/i)(s + 1)/(s - 1)`.
pub fn weyl_from_livsic(s: &AnalyticFn) -> Result<AnalyticFn> {
    s.expect(Role::Livsic)?;
    Ok(s.mobius(Role::Weyl, [-I, -I, c(1.0), c(-1.0)]))
}

/// `S = (s - κ)/(κs - 1)`.
pub fn char_from_livsic(s: &AnalyticFn, kappa: VonNeumannKappa) -> Result<AnalyticFn> {
    s.expect(Role::Livsic)?;
    let k = c(kappa.value());
    Ok(s.mobius(Role::Characteristic, [c(1.0), -k, k, c(-1.0)])
        .with_kappa(kappa))
}

/// `s = (S - κ)/(κS - 1)`; the map is its own inverse.
pub fn livsic_from_char(big_s: &AnalyticFn, kappa: VonNeumannKappa) -> Result<AnalyticFn> {
    big_s.expect(Role::Characteristic)?;
    let k = c(kappa.value());
    Ok(big_s.mobius(Role::Livsic, [c(1.0), -k, k, c(-1.0)]))
}

/// `W = ν/S`. Zeros of `S` are reported as poles of `W`.
pub fn transfer_from_char(big_s: &AnalyticFn, nu: UnimodularFactor) -> Result<AnalyticFn> {
    big_s.expect(Role::Characteristic)?;
    let mut w = big_s
        .mobius(Role::Transfer, [c(0.0), nu.value(), c(1.0), c(0.0)])
        .with_nu(nu);
    w.kappa = big_s.kappa;
    Ok(w)
}

/// `V = i(W - 1)/(W + 1)`.
pub fn impedance_from_transfer(w: &AnalyticFn) -> Result<AnalyticFn> {
    w.expect(Role::Transfer)?;
    let mut v = w.mobius(Role::Impedance, [I, -I, c(1.0), c(1.0)]);
    v.kappa = w.kappa;
    v.nu = w.nu;
    Ok(v)
}

/// `W = (1 - iV)/(1 + iV)`.
pub fn transfer_from_impedance(v: &AnalyticFn) -> Result<AnalyticFn> {
    v.expect(Role::Impedance)?;
    let mut w = v.mobius(Role::Transfer, [-I, c(1.0), I, c(1.0)]);
    w.kappa = v.kappa;
    w.nu = v.nu;
    Ok(w)
}

/// `(cos α M - sin α)/(cos α + sin α M)` for `α ∈ [0, π)`.
pub fn weyl_extension_transform(m: &AnalyticFn, alpha: f64) -> Result<AnalyticFn> {
    m.expect(Role::Weyl)?;
    if !(0.0..std::f64::consts::PI).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, pi), got {alpha}"
        )));
    }
    let (sn, cs) = alpha.sin_cos();
    Ok(m.mobius(Role::Weyl, [c(cs), c(-sn), c(sn), c(cs)]))
}

/// `κ` read off a characteristic function as `S(i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaEstimate {
    pub kappa: VonNeumannKappa,
    /// `|Im S(i)|`; nonzero values mean the deficiency basis is rotated.
    pub im_residual: f64,
    pub convention_warning: bool,
}

pub fn kappa_from_char(big_s: &AnalyticFn, tol: f64) -> Result<KappaEstimate> {
    big_s.expect(Role::Characteristic)?;
    let v = big_s.eval(I)?;
    let kappa = VonNeumannKappa::new(v.re)?;
    Ok(KappaEstimate {
        kappa,
        im_residual: v.im.abs(),
        convention_warning: v.im.abs() > tol,
    })
}

/// Growth of `|z (s(z) - e^{2iα})|` along the imaginary axis for one `α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayProbe {
    pub alpha: f64,
    /// `(R, |iR (s(iR) - e^{2iα})|)` for each sampled radius.
    pub samples: Vec<(f64, f64)>,
    /// Strictly increasing across the sampled radii.
    pub increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LivsicReport {
    pub s_at_i: Complex64,
    pub vanishes_at_i: bool,
    pub rays: Vec<RayProbe>,
}

impl LivsicReport {
    /// All probes grow. This is a sampled diagnostic, not a proof of the limit.
    pub fn growth_consistent(&self) -> bool {
        self.rays.iter().all(|r| r.increasing)
    }
}

/// Checks `s(i) = 0` and samples the growth condition along `z = iR`.
pub fn livsic_class_check(
    s: &AnalyticFn,
    ray_radii: &[f64],
    alphas: &[f64],
    tol: f64,
) -> Result<LivsicReport> {
    s.expect(Role::Livsic)?;
    let s_at_i = s.eval(I)?;
    let mut radii = ray_radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let mut rays = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let target = Complex64::from_polar(1.0, 2.0 * alpha);
        let mut samples = Vec::with_capacity(radii.len());
        for &r in &radii {
            let z = Complex64::new(0.0, r);
            let g = match s.eval(z) {
                Ok(v) => (z * (v - target)).norm(),
                Err(e) if e.is_pole() => f64::INFINITY,
                Err(e) => return Err(e.into()),
            };
            samples.push((r, g));
        }
        let increasing = samples.windows(2).all(|w| w[1].1 > w[0].1);
        rays.push(RayProbe {
            alpha,
            samples,
            increasing,
        });
    }
    Ok(LivsicReport {
        s_at_i,
        vanishes_at_i: s_at_i.norm() <= tol,
        rays,
    })
}
