//! Finite functional model.
//!
//! The Hilbert space is `L²(μ₀)` for a discrete measure `μ₀` with nodes
//! `λ_j` and weights `w_j`. `B` is multiplication by `λ`, `Ḃ` its restriction
//! to `Σ w_j f_j = 0`, and `T` the dissipative extension with von Neumann
//! parameter `κ`, whose resolvent is a rank-one perturbation of `(B - z)⁻¹`:
//!
//! ```text
//! (T - z)⁻¹ f = (B - z)⁻¹ f - p(z) (f, g_z̄) g_z,   g_z(λ) = 1/(λ - z)
//! p(z) = 1/(M₀(z) + i(κ + 1)/(κ - 1))
//! ```
//!
//! `μ₀` is normalized so that its Weyl function `M₀` lies in 𝔐. The model
//! stores `μ = ((1 - κ)/(1 + κ)) μ₀`, whose Weyl function is the impedance.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    char_from_livsic, livsic_from_weyl, mobius_apply, transfer_from_char, AnalyticFn, Role,
    UnimodularFactor, VonNeumannKappa, POLE_TOL,
};
use crate::error::{Error, EvalError, Result};
use crate::grid::GridSpec;
use crate::measures::{DensityPiece, MeasureSpec, QuadratureConfig};
use crate::quadrature;
use crate::I;

/// Relative tolerance on `Σ w_j/(1 + λ_j²) = (1 - κ)/(1 + κ)`.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModel {
    #[serde(default = "schema_version")]
    schema: u32,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kappa: VonNeumannKappa,
}

fn schema_version() -> u32 {
    1
}

impl DiscreteModel {
    /// `weights` are those of `μ`, normalized to `(1 - κ)/(1 + κ)`.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, kappa: VonNeumannKappa) -> Result<Self> {
        let m = Self {
            schema: 1,
            nodes,
            weights,
            kappa,
        };
        m.validate()?;
        Ok(m)
    }

    /// Rescales arbitrary positive weights to the normalization required by `κ`.
    pub fn normalized(
        nodes: Vec<f64>,
        mut weights: Vec<f64>,
        kappa: VonNeumannKappa,
    ) -> Result<Self> {
        let l: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w / (1.0 + x * x))
            .sum();
        if !(l > 0.0) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        let c = kappa.class_normalization() / l;
        weights.iter_mut().for_each(|w| *w *= c);
        Self::new(nodes, weights, kappa)
    }

    fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::InvalidArgument(format!(
                "unsupported model schema {}",
                self.schema
            )));
        }
        if self.nodes.is_empty() || self.nodes.len() != self.weights.len() {
            return Err(Error::InvalidArgument(
                "model needs equally many nodes and weights, at least one".into(),
            ));
        }
        if self.nodes.iter().any(|x| !x.is_finite()) || self.nodes.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidArgument(
                "model nodes must be finite and strictly increasing".into(),
            ));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument(
                "model weights must be positive".into(),
            ));
        }
        let measured = self.normalization();
        let required = self.kappa.class_normalization();
        if (measured - required).abs() > NORMALIZATION_TOL * required {
            return Err(Error::Normalization { measured, required });
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kappa(&self) -> VonNeumannKappa {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_j/(1 + λ_j²)`.
    pub fn normalization(&self) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w / (1.0 + x * x))
            .sum()
    }

    /// `(1 + κ)/(1 - κ)`, the factor taking `μ` to `μ₀`.
    pub fn scale(&self) -> f64 {
        1.0 / self.kappa.class_normalization()
    }

    /// Weights of the reference measure `μ₀`.
    pub fn reference_weights(&self) -> Vec<f64> {
        let c = self.scale();
        self.weights.iter().map(|w| c * w).collect()
    }

    /// The same nodes with weights rescaled for another `κ`.
    pub fn with_kappa(&self, kappa: VonNeumannKappa) -> Self {
        let c = kappa.class_normalization() / self.kappa.class_normalization();
        Self {
            schema: 1,
            nodes: self.nodes.clone(),
            weights: self.weights.iter().map(|w| c * w).collect(),
            kappa,
        }
    }

    fn check_point(&self, z: Complex64) -> Result<(), EvalError> {
        if z.im == 0.0 || !z.is_finite() {
            return Err(EvalError::RealAxis { z });
        }
        Ok(())
    }

    /// `Σ w_j (1/(λ_j - z) - λ_j/(1 + λ_j²))`, the Weyl function of `μ`.
    pub fn weyl(&self, z: Complex64) -> Result<Complex64, EvalError> {
        self.check_point(z)?;
        Ok(self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * (1.0 / (x - z) - x / (1.0 + x * x)))
            .sum())
    }

    /// `M₀`, the Weyl function of `μ₀`. It equals the regularized pairing
    /// `((B - z)⁻¹ χ₀, χ₀)` with `χ₀ ≡ 1`.
    pub fn weyl_reference(&self, z: Complex64) -> Result<Complex64, EvalError> {
        Ok(self.scale() * self.weyl(z)?)
    }

    /// The unregularized pairing `Σ w₀_j/(λ_j - z)`.
    pub fn raw_pairing(&self, z: Complex64) -> Result<Complex64, EvalError> {
        self.check_point(z)?;
        let c = self.scale();
        Ok(self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| c * w / (x - z))
            .sum())
    }

    /// Weighted inner product in `L²(μ₀)`.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let c = self.scale();
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| c * w * a * b.conj())
            .sum()
    }

    fn check_len(&self, f: &[Complex64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "vector has {} components, model has {} nodes",
                f.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// `(B - z)⁻¹ f`.
    pub fn resolvent_b(&self, z: Complex64, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(f)?;
        if !z.is_finite() {
            return Err(EvalError::RealAxis { z }.into());
        }
        let mut out = Vec::with_capacity(f.len());
        for (&x, &fj) in self.nodes.iter().zip(f) {
            let d = x - z;
            if d.norm() <= POLE_TOL * (x.abs() + z.norm()).max(1.0) {
                return Err(EvalError::Pole { z }.into());
            }
            out.push(fj / d);
        }
        Ok(out)
    }

    /// `g_z = (B - z)⁻¹ 1`.
    pub fn deficiency_vector(&self, z: Complex64) -> Result<Vec<Complex64>> {
        self.resolvent_b(z, &vec![Complex64::new(1.0, 0.0); self.len()])
    }

    /// `p(z)`. `pole_tol` bounds `|M₀ - i(1 + κ)/(1 - κ)|` relative to its
    /// terms; below it `z` is reported as a pole.
    pub fn p(&self, z: Complex64, pole_tol: f64) -> Result<Complex64, EvalError> {
        let m0 = self.weyl_reference(z)?;
        let k = self.kappa.value();
        let shift = if k == 0.0 {
            -I
        } else {
            I * (k + 1.0) / (k - 1.0)
        };
        let den = m0 + shift;
        if !den.is_finite() || den.norm() <= pole_tol * (m0.norm() + shift.norm()) {
            return Err(EvalError::Pole { z });
        }
        Ok(1.0 / den)
    }

    /// `(T - z)⁻¹ f`.
    pub fn resolvent_t(&self, z: Complex64, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let rb = self.resolvent_b(z, f)?;
        let gz = self.deficiency_vector(z)?;
        let gzbar = self.deficiency_vector(z.conj())?;
        let p = self.p(z, POLE_TOL)?;
        let coef = p * self.inner(f, &gzbar);
        Ok(rb.iter().zip(&gz).map(|(r, g)| r - coef * g).collect())
    }

    /// `V(z) = ((1 - κ)/(1 + κ)) M₀(z)`, the Weyl function of `μ`.
    pub fn impedance(&self, z: Complex64) -> Result<Complex64, EvalError> {
        self.weyl(z)
    }

    /// `W(z) = 1 - 2i((T - z)⁻¹ χ, χ)` with `χ = sqrt((1 - κ)/(1 + κ)) χ₀`.
    /// Pairings against `χ₀` take the regularized value `M₀(z)`.
    pub fn transfer_resolvent_path(
        &self,
        z: Complex64,
        pole_tol: f64,
    ) -> Result<Complex64, EvalError> {
        if !(z.im > 0.0) {
            return Err(EvalError::RealAxis { z });
        }
        let m0 = self.weyl_reference(z)?;
        let p = self.p(z, pole_tol)?;
        let pairing = m0 - p * m0 * m0;
        Ok(1.0 - 2.0 * I * self.kappa.class_normalization() * pairing)
    }

    pub fn weyl_fn(&self) -> AnalyticFn {
        let m = self.clone();
        AnalyticFn::new(Role::Weyl, move |z| m.weyl(z))
    }

    pub fn impedance_fn(&self) -> AnalyticFn {
        let m = self.clone();
        AnalyticFn::new(Role::Impedance, move |z| m.impedance(z)).with_kappa(self.kappa)
    }

    pub fn reference_weyl_fn(&self) -> AnalyticFn {
        let m = self.clone();
        AnalyticFn::new(Role::Weyl, move |z| m.weyl_reference(z))
    }

    pub fn transfer_resolvent_fn(&self, pole_tol: f64) -> AnalyticFn {
        let m = self.clone();
        AnalyticFn::new(Role::Transfer, move |z| {
            m.transfer_resolvent_path(z, pole_tol)
        })
        .with_kappa(self.kappa)
        .with_nu(UnimodularFactor::one())
    }

    /// `S` from the Möbius chain `M₀ → s → S`.
    pub fn characteristic_fn(&self) -> AnalyticFn {
        let s = livsic_from_weyl(&self.reference_weyl_fn()).expect("weyl role");
        char_from_livsic(&s, self.kappa).expect("livsic role")
    }

    /// `W = ν/S` from the Möbius chain.
    pub fn transfer_mobius_fn(&self, nu: UnimodularFactor) -> AnalyticFn {
        transfer_from_char(&self.characteristic_fn(), nu).expect("characteristic role")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCheck {
    /// `max |W_resolvent - W_mobius|`.
    pub max_abs: f64,
    /// `max |W_mobius/W_resolvent - 1|`.
    pub max_rel: f64,
    /// `max |W_resolvent · S - 1|`.
    pub max_reciprocity: f64,
    pub compared: usize,
    pub poles: usize,
}

/// Compares the resolvent-path transfer function with `ν/S` from the Möbius
/// chain over a grid. Points where either path has a pole are skipped.
pub fn cross_check(
    model: &DiscreteModel,
    grid: &GridSpec,
    nu: UnimodularFactor,
) -> Result<CrossCheck> {
    cross_check_points(model, &grid.points(), nu)
}

pub fn cross_check_points(
    model: &DiscreteModel,
    points: &[Complex64],
    nu: UnimodularFactor,
) -> Result<CrossCheck> {
    let big_s = model.characteristic_fn();
    let mut out = CrossCheck {
        max_abs: 0.0,
        max_rel: 0.0,
        max_reciprocity: 0.0,
        compared: 0,
        poles: 0,
    };
    for &z in points {
        let w_res = model.transfer_resolvent_path(z, POLE_TOL);
        let s = big_s.eval(z);
        let w_mob = s
            .clone()
            .and_then(|s| mobius_apply([0.0.into(), nu.value(), 1.0.into(), 0.0.into()], s, z));
        match (w_res, s, w_mob) {
            (Ok(a), Ok(s), Ok(b)) => {
                out.max_abs = out.max_abs.max((a - b).norm());
                out.max_rel = out.max_rel.max((b / a - 1.0).norm());
                out.max_reciprocity = out.max_reciprocity.max((a * s - 1.0).norm());
                out.compared += 1;
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) if e.is_pole() => out.poles += 1,
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return Err(e.into()),
        }
    }
    if out.compared == 0 {
        return Err(Error::NoComparablePoints(points.len()));
    }
    Ok(out)
}

/// Discretizes a measure normalized to `(1 - κ)/(1 + κ)`.
///
/// Atoms are kept as nodes. The remaining `n - atoms` nodes are shared among
/// the density pieces and placed by Gauss–Legendre in `θ = atan λ` over the
/// part of each support inside `[-tail_cutoff, tail_cutoff]`, where
/// `dλ/(1 + λ²) = dθ`. Each piece of support beyond the cutoff becomes one
/// extra node at its θ-midpoint carrying the same `∫ dμ/(1 + λ²)`.
pub fn build_model(
    measure: &MeasureSpec,
    kappa: VonNeumannKappa,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<DiscreteModel> {
    measure.validate()?;
    cfg.validate()?;
    let measured = measure.normalization();
    let required = kappa.class_normalization();
    if (measured - required).abs() > NORMALIZATION_TOL * required {
        return Err(Error::Normalization { measured, required });
    }
    let atoms = measure.atoms.len();
    let density_nodes = n.saturating_sub(atoms);
    if n < atoms || (n == atoms && !measure.density.is_empty()) || n == 0 {
        return Err(Error::TooFewNodes { nodes: n, atoms });
    }

    let mut pairs: Vec<(f64, f64)> = measure.atoms.iter().map(|a| (a.lambda, a.weight)).collect();
    let t = cfg.tail_cutoff;
    let pieces = &measure.density;
    let compact_norms: Vec<f64> = pieces
        .iter()
        .map(|p| {
            let (a, b) = p.support();
            let (a, b) = (a.max(-t), b.min(t));
            if a < b {
                theta_mass(p, a.atan(), b.atan(), cfg)
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<_>>()?;
    let shares = allocate(density_nodes, &compact_norms);
    for ((piece, &share), _) in pieces.iter().zip(&shares).zip(&compact_norms) {
        let (a, b) = piece.support();
        let (ca, cb) = (a.max(-t), b.min(t));
        if ca < cb && share > 0 {
            for (theta, gw) in quadrature::gauss_legendre(share, ca.atan(), cb.atan()) {
                let x = theta.tan();
                let w = piece.density_at(x) * (1.0 + x * x) * gw;
                if w > 0.0 {
                    pairs.push((x, w));
                }
            }
        }
        for (ta, tb) in [(a, b.min(-t)), (a.max(t), b)] {
            if ta < tb {
                let (tha, thb) = (atan_ext(ta), atan_ext(tb));
                let mass = theta_mass(piece, tha, thb, cfg)?;
                if mass > 0.0 {
                    let x = (0.5 * (tha + thb)).tan();
                    pairs.push((x, mass * (1.0 + x * x)));
                }
            }
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut nodes: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
    for (x, w) in pairs {
        if nodes.last() == Some(&x) {
            *weights.last_mut().expect("paired with nodes") += w;
        } else {
            nodes.push(x);
            weights.push(w);
        }
    }
    if pieces.is_empty() {
        DiscreteModel::new(nodes, weights, kappa)
    } else {
        // Node placement integrates the density only approximately; the
        // normalization is restored exactly by a common rescaling.
        DiscreteModel::normalized(nodes, weights, kappa)
    }
}

fn atan_ext(x: f64) -> f64 {
    if x == f64::INFINITY {
        FRAC_PI_2
    } else if x == f64::NEG_INFINITY {
        -FRAC_PI_2
    } else {
        x.atan()
    }
}

/// `∫ ρ(tan θ) dθ = ∫ ρ dλ/(1 + λ²)` over a θ-interval.
fn theta_mass(piece: &DensityPiece, tha: f64, thb: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if let DensityPiece::Constant { value, .. } = piece {
        return Ok(value * (thb - tha));
    }
    let v = quadrature::integrate(
        |th| Complex64::new(piece.density_at(th.tan()), 0.0),
        tha,
        thb,
        cfg.abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
    )?;
    Ok(v.re)
}

/// Splits `n` nodes in proportion to `masses`, at least one per positive mass.
fn allocate(n: usize, masses: &[f64]) -> Vec<usize> {
    let total: f64 = masses.iter().filter(|m| **m > 0.0).sum();
    let live = masses.iter().filter(|m| **m > 0.0).count();
    if live == 0 || n == 0 {
        return vec![0; masses.len()];
    }
    let mut out: Vec<usize> = masses
        .iter()
        .map(|&m| {
            if m > 0.0 {
                ((n as f64) * m / total).floor().max(1.0) as usize
            } else {
                0
            }
        })
        .collect();
    let mut assigned: usize = out.iter().sum();
    let mut k = 0;
    while assigned < n {
        if masses[k % masses.len()] > 0.0 {
            out[k % masses.len()] += 1;
            assigned += 1;
        }
        k += 1;
    }
    while assigned > n {
        let j = out
            .iter()
            .enumerate()
            .max_by_key(|(_, v)| **v)
            .map(|(j, _)| j)
            .expect("nonempty");
        if out[j] <= 1 {
            break;
        }
        out[j] -= 1;
        assigned -= 1;
    }
    out
}
