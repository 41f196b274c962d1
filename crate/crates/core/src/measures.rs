//! Borel measures on the real line and their Weyl functions
//!
//! ```text
//! M(z) = ∫ (1/(λ - z) - λ/(1 + λ²)) dμ(λ)
//! ```
//!
//! A measure is a finite list of atoms plus density pieces of a few
//! registered kinds. Constant densities may have unbounded support and are
//! integrated in closed form, so infinite measures such as Lebesgue/π are
//! representable.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{AnalyticFn, Role};
use crate::error::{Error, EvalError, Result};
use crate::grid::GridSpec;
use crate::quadrature;
use crate::I;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Half-width of the window discretized node by node when a measure is
    /// turned into a finite model; mass outside is lumped.
    pub tail_cutoff: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 200,
            tail_cutoff: 50.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.tail_cutoff > 0.0) {
            return Err(Error::InvalidArgument(
                "quadrature tolerances and tail cutoff must be positive".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidArgument(
                "max_subdivisions must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A point off the real axis, stored in the upper half-plane together with
/// whether it was reflected from below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    upper: Complex64,
    reflected: bool,
}

impl HalfPlanePoint {
    pub fn new(z: Complex64) -> Result<Self, EvalError> {
        if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
            return Err(EvalError::RealAxis { z });
        }
        Ok(Self {
            upper: if z.im > 0.0 { z } else { z.conj() },
            reflected: z.im < 0.0,
        })
    }

    pub fn upper(self) -> Complex64 {
        self.upper
    }

    pub fn z(self) -> Complex64 {
        if self.reflected {
            self.upper.conj()
        } else {
            self.upper
        }
    }

    /// Maps a value computed at `upper()` to the value at `z()` for a
    /// function with real symmetry.
    pub fn restore(self, v: Complex64) -> Complex64 {
        if self.reflected {
            v.conj()
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub lambda: f64,
    pub weight: f64,
}

/// A density piece. Missing bounds of a constant piece mean infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityPiece {
    Constant {
        value: f64,
        #[serde(default)]
        lo: Option<f64>,
        #[serde(default)]
        hi: Option<f64>,
    },
    /// `(mass/π)·width/((λ - center)² + width²)` on the whole line.
    CauchyProfile { center: f64, width: f64, mass: f64 },
    /// Piecewise linear through `values` sampled uniformly on `[lo, hi]`.
    CompactTable { lo: f64, hi: f64, values: Vec<f64> },
}

impl DensityPiece {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMeasure(m));
        match self {
            DensityPiece::Constant { value, lo, hi } => {
                if !(value.is_finite() && *value > 0.0) {
                    return bad(format!("constant density must be positive, got {value}"));
                }
                let a = lo.unwrap_or(f64::NEG_INFINITY);
                let b = hi.unwrap_or(f64::INFINITY);
                if a.is_nan()
                    || b.is_nan()
                    || a >= b
                    || a == f64::INFINITY
                    || b == f64::NEG_INFINITY
                {
                    return bad(format!("constant density support [{a}, {b}] is empty"));
                }
            }
            DensityPiece::CauchyProfile {
                center,
                width,
                mass,
            } => {
                if !(center.is_finite() && width.is_finite() && mass.is_finite())
                    || *width <= 0.0
                    || *mass <= 0.0
                {
                    return bad(
                        "cauchy profile needs finite center, positive width and mass".into(),
                    );
                }
            }
            DensityPiece::CompactTable { lo, hi, values } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!(
                        "table support [{lo}, {hi}] must be finite and nonempty"
                    ));
                }
                if values.len() < 2 {
                    return bad("table needs at least two values".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("table values must be finite and nonnegative".into());
                }
            }
        }
        Ok(())
    }

    /// Density value at `x`.
    pub fn density_at(&self, x: f64) -> f64 {
        match self {
            DensityPiece::Constant { value, lo, hi } => {
                let inside = lo.is_none_or(|a| x >= a) && hi.is_none_or(|b| x <= b);
                if inside {
                    *value
                } else {
                    0.0
                }
            }
            DensityPiece::CauchyProfile {
                center,
                width,
                mass,
            } => mass / PI * width / ((x - center).powi(2) + width * width),
            DensityPiece::CompactTable { lo, hi, values } => {
                if x < *lo || x > *hi {
                    return 0.0;
                }
                let n = values.len() - 1;
                let t = (x - lo) / (hi - lo) * n as f64;
                let k = (t.floor() as usize).min(n - 1);
                let frac = t - k as f64;
                values[k] * (1.0 - frac) + values[k + 1] * frac
            }
        }
    }

    /// Support as an interval, infinite ends allowed.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DensityPiece::Constant { lo, hi, .. } => {
                (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY))
            }
            DensityPiece::CauchyProfile { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            DensityPiece::CompactTable { lo, hi, .. } => (*lo, *hi),
        }
    }

    fn weyl_upper(&self, z: Complex64, cfg: &QuadratureConfig) -> Result<Complex64, EvalError> {
        match self {
            DensityPiece::Constant { value, lo, hi } => {
                let upper = hi.map_or(Complex64::new(0.0, 0.0), |b| constant_primitive(b, z));
                let lower = lo.map_or(Complex64::new(0.0, -PI), |a| constant_primitive(a, z));
                Ok(*value * (upper - lower))
            }
            DensityPiece::CauchyProfile {
                center,
                width,
                mass,
            } => {
                let cauchy = *mass / (Complex64::new(*center, -width) - z);
                Ok(cauchy - mass * center / (center * center + (1.0 + width).powi(2)))
            }
            DensityPiece::CompactTable { lo, hi, values } => {
                let n = values.len() - 1;
                let h = (hi - lo) / n as f64;
                let mut total = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let a = lo + h * k as f64;
                    let b = if k + 1 == n { *hi } else { a + h };
                    let (va, vb) = (values[k], values[k + 1]);
                    total += quadrature::integrate(
                        |x| {
                            let rho = va + (vb - va) * (x - a) / (b - a);
                            rho * (1.0 / (x - z) - x / (1.0 + x * x))
                        },
                        a,
                        b,
                        cfg.abs_tol / n as f64,
                        cfg.rel_tol,
                        cfg.max_subdivisions,
                    )?;
                }
                Ok(total)
            }
        }
    }

    fn normalization(&self) -> f64 {
        match self {
            DensityPiece::Constant { value, .. } => {
                let (a, b) = self.support();
                value * (b.atan() - a.atan())
            }
            DensityPiece::CauchyProfile {
                center,
                width,
                mass,
            } => mass * (1.0 + width) / (center * center + (1.0 + width).powi(2)),
            DensityPiece::CompactTable { lo, hi, values } => {
                // Exact for piecewise linear densities: ∫ (α + βx)/(1 + x²).
                let n = values.len() - 1;
                let h = (hi - lo) / n as f64;
                (0..n)
                    .map(|k| {
                        let a = lo + h * k as f64;
                        let b = if k + 1 == n { *hi } else { a + h };
                        let beta = (values[k + 1] - values[k]) / (b - a);
                        let alpha = values[k] - beta * a;
                        alpha * (b.atan() - a.atan())
                            + 0.5 * beta * ((1.0 + b * b) / (1.0 + a * a)).ln()
                    })
                    .sum()
            }
        }
    }
}

/// `log(x - z) - ½ log(1 + x²)`, a primitive of the regularized kernel.
fn constant_primitive(x: f64, z: Complex64) -> Complex64 {
    (Complex64::new(x, 0.0) - z).ln() - 0.5 * (1.0 + x * x).ln()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(default = "schema_version")]
    pub schema: u32,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub density: Vec<DensityPiece>,
}

fn schema_version() -> u32 {
    1
}

impl MeasureSpec {
    /// Builds and validates a measure; atoms are put in increasing order.
    pub fn new(mut atoms: Vec<Atom>, density: Vec<DensityPiece>) -> Result<Self> {
        atoms.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let m = Self {
            schema: 1,
            atoms,
            density,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            atoms
                .iter()
                .map(|&(lambda, weight)| Atom { lambda, weight })
                .collect(),
            Vec::new(),
        )
    }

    /// Lebesgue measure scaled by `1/π`, whose Weyl function is `i`.
    pub fn lebesgue_over_pi() -> Self {
        Self {
            schema: 1,
            atoms: Vec::new(),
            density: vec![DensityPiece::Constant {
                value: 1.0 / PI,
                lo: None,
                hi: None,
            }],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        if m.schema != 1 {
            return Err(Error::InvalidMeasure(format!(
                "unsupported schema version {}",
                m.schema
            )));
        }
        Self::new(m.atoms, m.density)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure serializes")
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !(a.lambda.is_finite() && a.weight.is_finite() && a.weight > 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {} has weight {}; weights must be positive",
                    a.lambda, a.weight
                )));
            }
        }
        if let Some(w) = self.atoms.windows(2).find(|w| w[1].lambda <= w[0].lambda) {
            return Err(Error::InvalidMeasure(format!(
                "atom locations must be strictly increasing ({} then {})",
                w[0].lambda, w[1].lambda
            )));
        }
        for d in &self.density {
            d.validate()?;
        }
        if !self.normalization().is_finite() {
            return Err(Error::InvalidMeasure(
                "normalization integral diverges".into(),
            ));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_empty()
    }

    /// Total density at `x` (atoms excluded).
    pub fn density_at(&self, x: f64) -> f64 {
        self.density.iter().map(|d| d.density_at(x)).sum()
    }

    /// `L = ∫ dμ/(1 + λ²)`.
    pub fn normalization(&self) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .map(|a| a.weight / (1.0 + a.lambda * a.lambda))
            .sum();
        atoms
            + self
                .density
                .iter()
                .map(DensityPiece::normalization)
                .sum::<f64>()
    }

    /// `M(z)`; points below the axis are evaluated by reflection.
    pub fn eval_weyl(&self, z: Complex64, cfg: &QuadratureConfig) -> Result<Complex64, EvalError> {
        let p = HalfPlanePoint::new(z)?;
        let w = p.upper();
        let mut total: Complex64 = self
            .atoms
            .iter()
            .map(|a| a.weight * (1.0 / (a.lambda - w) - a.lambda / (1.0 + a.lambda * a.lambda)))
            .sum();
        for d in &self.density {
            total += d.weyl_upper(w, cfg)?;
        }
        Ok(p.restore(total))
    }

    /// A copy with every weight and density multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                lambda: a.lambda,
                weight: a.weight * c,
            })
            .collect();
        let density = self
            .density
            .iter()
            .map(|d| match d {
                DensityPiece::Constant { value, lo, hi } => DensityPiece::Constant {
                    value: value * c,
                    lo: *lo,
                    hi: *hi,
                },
                DensityPiece::CauchyProfile {
                    center,
                    width,
                    mass,
                } => DensityPiece::CauchyProfile {
                    center: *center,
                    width: *width,
                    mass: mass * c,
                },
                DensityPiece::CompactTable { lo, hi, values } => DensityPiece::CompactTable {
                    lo: *lo,
                    hi: *hi,
                    values: values.iter().map(|v| v * c).collect(),
                },
            })
            .collect();
        Self {
            schema: 1,
            atoms,
            density,
        }
    }

    /// The Weyl function as an [`AnalyticFn`].
    pub fn weyl_fn(&self, cfg: QuadratureConfig) -> AnalyticFn {
        let m = self.clone();
        AnalyticFn::new(Role::Weyl, move |z| m.eval_weyl(z, &cfg))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectedAtom {
    pub location: f64,
    pub weight: f64,
}

/// Output of [`stieltjes_invert`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionTable {
    pub lambdas: Vec<f64>,
    pub eps: Vec<f64>,
    /// `samples[j][k] = (1/π) Im f(λ_k + i ε_j)`.
    pub samples: Vec<Vec<f64>>,
    /// Atom-free density extrapolated to `ε = 0`.
    pub density: Vec<f64>,
    pub atoms: Vec<DetectedAtom>,
}

impl InversionTable {
    pub fn spacing(&self) -> f64 {
        if self.lambdas.len() < 2 {
            0.0
        } else {
            self.lambdas[1] - self.lambdas[0]
        }
    }
}

/// Boundary values `f(λ_k + iε_j)` on a uniform grid, for inversion without
/// live access to the function.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub lambdas: Vec<f64>,
    pub eps: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
}

/// Relative agreement of atom weights across the last two rungs.
const ATOM_STABILITY: f64 = 0.01;

/// Recovers atoms and density of the measure behind a Herglotz function from
/// `Im f` near the real axis.
pub fn stieltjes_invert(
    f: &AnalyticFn,
    window: (f64, f64),
    eps_ladder: &[f64],
    grid_n: usize,
) -> Result<InversionTable> {
    check_ladder(eps_ladder)?;
    if grid_n < 3 || !(window.0 < window.1) {
        return Err(Error::InvalidArgument(
            "inversion needs a nonempty window and at least 3 grid points".into(),
        ));
    }
    let h = (window.1 - window.0) / (grid_n - 1) as f64;
    let lambdas: Vec<f64> = (0..grid_n).map(|k| window.0 + h * k as f64).collect();
    let mut values = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        let row = lambdas
            .iter()
            .map(|&x| f.eval(Complex64::new(x, eps)))
            .collect::<Result<Vec<_>, _>>()?;
        values.push(row);
    }
    let table = SampleTable {
        lambdas,
        eps: eps_ladder.to_vec(),
        values,
    };
    invert_table(&table, Some(f))
}

/// As [`stieltjes_invert`], from precomputed samples.
pub fn stieltjes_invert_samples(table: &SampleTable) -> Result<InversionTable> {
    check_ladder(&table.eps)?;
    if table.lambdas.len() < 3 || table.values.len() != table.eps.len() {
        return Err(Error::InvalidArgument(
            "sample table needs at least 3 grid points and one row per eps".into(),
        ));
    }
    if table.values.iter().any(|r| r.len() != table.lambdas.len()) {
        return Err(Error::InvalidArgument("ragged sample table".into()));
    }
    let h = table.lambdas[1] - table.lambdas[0];
    let uniform = table
        .lambdas
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0) && w[1] > w[0]);
    if !uniform {
        return Err(Error::InvalidArgument(
            "sample grid must be uniform and increasing".into(),
        ));
    }
    invert_table(table, None)
}

fn check_ladder(eps: &[f64]) -> Result<()> {
    if eps.is_empty()
        || eps.iter().any(|e| !(e.is_finite() && *e > 0.0))
        || eps.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "eps ladder must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Vertex and weight of the Lorentzian through three equally spaced samples
/// of `Im f`. For `w ε/((x - x0)² + ε²)` the reciprocal is an exact parabola.
fn lorentz_fit(x: f64, h: f64, im: [f64; 3], eps: f64) -> Option<(f64, f64)> {
    let r = im.map(|v| 1.0 / v);
    let a = (r[0] - 2.0 * r[1] + r[2]) / (2.0 * h * h);
    let b = (r[2] - r[0]) / (2.0 * h);
    if !(a > 0.0) {
        return None;
    }
    let x0 = x - b / (2.0 * a);
    Some((x0, 1.0 / (a * eps)))
}

fn refine_live(f: &AnalyticFn, x0: f64, eps: f64, fallback: (f64, f64)) -> Result<(f64, f64)> {
    let mut best = fallback;
    for _ in 0..2 {
        let x = best.0;
        let mut im = [0.0; 3];
        for (k, dx) in [-eps, 0.0, eps].into_iter().enumerate() {
            im[k] = f.eval(Complex64::new(x + dx, eps))?.im;
        }
        match lorentz_fit(x, eps, im, eps) {
            Some(fit) if (fit.0 - x0).abs() <= 4.0 * eps.max((fallback.0 - x0).abs()) => best = fit,
            _ => break,
        }
    }
    Ok(best)
}

fn invert_table(table: &SampleTable, live: Option<&AnalyticFn>) -> Result<InversionTable> {
    let n = table.lambdas.len();
    let h = table.lambdas[1] - table.lambdas[0];
    for (j, row) in table.values.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            if !(v.im > 0.0) {
                return Err(Error::NotHerglotz {
                    z: Complex64::new(table.lambdas[k], table.eps[j]),
                    im: v.im,
                });
            }
        }
    }
    let samples: Vec<Vec<f64>> = table
        .values
        .iter()
        .map(|row| row.iter().map(|v| v.im / PI).collect())
        .collect();

    let rungs = table.eps.len();
    let mut atoms = Vec::new();
    if rungs >= 2 {
        let last = &table.values[rungs - 1];
        for k in 1..n - 1 {
            let (l, c, r) = (last[k - 1].im, last[k].im, last[k + 1].im);
            if !(c > l && c >= r) {
                continue;
            }
            let mut fits = Vec::with_capacity(2);
            for j in [rungs - 2, rungs - 1] {
                let row = &table.values[j];
                let eps = table.eps[j];
                let Some(grid_fit) = lorentz_fit(
                    table.lambdas[k],
                    h,
                    [row[k - 1].im, row[k].im, row[k + 1].im],
                    eps,
                ) else {
                    break;
                };
                let fit = match live {
                    Some(f) => refine_live(f, table.lambdas[k], eps, grid_fit)?,
                    None => grid_fit,
                };
                fits.push(fit);
            }
            if let [(_, w1), (x2, w2)] = fits[..] {
                let inside = x2 >= table.lambdas[0] - h && x2 <= table.lambdas[n - 1] + h;
                if inside && w2 > 0.0 && (w1 - w2).abs() <= ATOM_STABILITY * w2 {
                    atoms.push(DetectedAtom {
                        location: x2,
                        weight: w2,
                    });
                }
            }
        }
    }

    let atom_free = |j: usize, k: usize| -> f64 {
        let eps = table.eps[j];
        let x = table.lambdas[k];
        let lorentz: f64 = atoms
            .iter()
            .map(|a| a.weight * eps / ((x - a.location).powi(2) + eps * eps))
            .sum();
        samples[j][k] - lorentz / PI
    };
    let density = (0..n)
        .map(|k| {
            if rungs == 1 {
                atom_free(0, k)
            } else {
                let (e1, e2) = (table.eps[rungs - 2], table.eps[rungs - 1]);
                let (d1, d2) = (atom_free(rungs - 2, k), atom_free(rungs - 1, k));
                d2 + (d2 - d1) * e2 / (e1 - e2)
            }
        })
        .collect();

    Ok(InversionTable {
        lambdas: table.lambdas.clone(),
        eps: table.eps.clone(),
        samples,
        density,
        atoms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HerglotzReport {
    pub min_im: f64,
    pub symmetry_residual: f64,
    pub points: usize,
    pub poles: usize,
    pub pass: bool,
}

/// Samples `Im f >= 0` and `f(z̄) = conj f(z)` over a grid in the upper
/// half-plane. Poles are counted and skipped.
pub fn herglotz_check(f: &AnalyticFn, grid: &GridSpec, abs_tol: f64) -> Result<HerglotzReport> {
    grid.validate()?;
    let mut min_im = f64::INFINITY;
    let mut residual: f64 = 0.0;
    let mut poles = 0;
    let points = grid.points();
    for &z in &points {
        let pair = f.eval(z).and_then(|a| Ok((a, f.eval(z.conj())?)));
        match pair {
            Ok((up, down)) => {
                min_im = min_im.min(up.im);
                residual = residual.max((down - up.conj()).norm());
            }
            Err(e) if e.is_pole() => poles += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(HerglotzReport {
        min_im,
        symmetry_residual: residual,
        points: points.len(),
        poles,
        pass: min_im >= -abs_tol && residual <= abs_tol,
    })
}

/// `Im M(i)` computed through the Weyl function, for cross-checking
/// [`MeasureSpec::normalization`].
pub fn normalization_via_weyl(m: &MeasureSpec, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(m.eval_weyl(I, cfg)?.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn single_atom_at_i() {
        let m = MeasureSpec::from_atoms(&[(0.0, 1.0)]).unwrap();
        assert!((m.eval_weyl(I, &cfg()).unwrap() - I).norm() < 1e-15);
        assert_eq!(m.normalization(), 1.0);
    }

    #[test]
    fn lebesgue_is_constant_i() {
        let m = MeasureSpec::lebesgue_over_pi();
        for z in [I, Complex64::new(3.0, 0.2), Complex64::new(-40.0, 7.0)] {
            assert!((m.eval_weyl(z, &cfg()).unwrap() - I).norm() < 1e-14);
        }
        assert!((m.normalization() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_atoms_at_2i() {
        let m = MeasureSpec::from_atoms(&[(-1.0, 1.0), (1.0, 1.0)]).unwrap();
        let z = Complex64::new(0.0, 2.0);
        let direct = 1.0 / (-1.0 - z) + 1.0 / (1.0 - z);
        assert!((m.eval_weyl(z, &cfg()).unwrap() - direct).norm() < 1e-15);
        assert!((direct - 4.0 * I / 5.0).norm() < 1e-15);
    }

    #[test]
    fn kappa_half_atoms() {
        let w = 0.5 / 1.5;
        let m = MeasureSpec::from_atoms(&[(-1.0, w), (1.0, w)]).unwrap();
        assert!((m.normalization() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_atoms() {
        assert!(MeasureSpec::from_atoms(&[(0.0, -1.0)]).is_err());
        assert!(MeasureSpec::from_atoms(&[(0.0, 1.0), (0.0, 2.0)]).is_err());
        let sorted = MeasureSpec::from_atoms(&[(1.0, 1.0), (-1.0, 2.0)]).unwrap();
        assert_eq!(sorted.atoms[0].lambda, -1.0);
    }

    #[test]
    fn constant_piece_matches_quadrature() {
        let piece = DensityPiece::Constant {
            value: 0.7,
            lo: Some(-2.0),
            hi: Some(3.0),
        };
        let z = Complex64::new(0.5, 0.3);
        let closed = piece.weyl_upper(z, &cfg()).unwrap();
        let num = quadrature::integrate(
            |x| 0.7 * (1.0 / (x - z) - x / (1.0 + x * x)),
            -2.0,
            3.0,
            1e-13,
            1e-13,
            500,
        )
        .unwrap();
        assert!((closed - num).norm() < 1e-11, "{closed} vs {num}");
    }

    #[test]
    fn half_line_constant() {
        // Two half-lines add up to the full line.
        let left = DensityPiece::Constant {
            value: 1.0 / PI,
            lo: None,
            hi: Some(0.3),
        };
        let right = DensityPiece::Constant {
            value: 1.0 / PI,
            lo: Some(0.3),
            hi: None,
        };
        let z = Complex64::new(-1.0, 0.4);
        let sum = left.weyl_upper(z, &cfg()).unwrap() + right.weyl_upper(z, &cfg()).unwrap();
        assert!((sum - I).norm() < 1e-14);
    }

    #[test]
    fn cauchy_profile_closed_form() {
        let piece = DensityPiece::CauchyProfile {
            center: 0.4,
            width: 0.3,
            mass: 2.0,
        };
        let z = Complex64::new(-0.2, 0.5);
        let closed = piece.weyl_upper(z, &cfg()).unwrap();
        // Integrate on θ = atan λ to cover the whole line.
        let num = quadrature::integrate(
            |t: f64| {
                let x = t.tan();
                let jac = 1.0 / (t.cos() * t.cos());
                piece.density_at(x) * (1.0 / (x - z) - x / (1.0 + x * x)) * jac
            },
            -PI / 2.0 + 1e-9,
            PI / 2.0 - 1e-9,
            1e-12,
            1e-12,
            2000,
        )
        .unwrap();
        assert!((closed - num).norm() < 1e-7, "{closed} vs {num}");
        assert!((piece.normalization() - closed_norm(&piece)).abs() < 1e-15);
    }

    fn closed_norm(p: &DensityPiece) -> f64 {
        p.weyl_upper(I, &cfg()).unwrap().im
    }

    #[test]
    fn table_normalization_matches_weyl() {
        let piece = DensityPiece::CompactTable {
            lo: -1.0,
            hi: 2.0,
            values: vec![0.0, 1.0, 0.5, 0.2],
        };
        let m = MeasureSpec::new(vec![], vec![piece]).unwrap();
        let via = normalization_via_weyl(&m, &cfg()).unwrap();
        assert!((via - m.normalization()).abs() < 1e-10);
    }

    #[test]
    fn reflection() {
        let m = MeasureSpec::from_atoms(&[(-1.0, 0.5), (2.0, 1.5)]).unwrap();
        let z = Complex64::new(0.3, 0.7);
        assert_eq!(
            m.eval_weyl(z.conj(), &cfg()).unwrap(),
            m.eval_weyl(z, &cfg()).unwrap().conj()
        );
        assert!(m.eval_weyl(Complex64::new(0.3, 0.0), &cfg()).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"schema":1,"atoms":[{"lambda":1.0,"weight":0.5}],
            "density":[{"kind":"constant","value":0.3183098861837907},
                       {"kind":"compact_table","lo":0,"hi":1,"values":[1,2]}]}"#;
        let m = MeasureSpec::from_json(text).unwrap();
        assert_eq!(m.density.len(), 2);
        let back = MeasureSpec::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(MeasureSpec::from_json(r#"{"schema":2}"#).is_err());
        assert!(MeasureSpec::from_json(r#"{"density":[{"kind":"constant","value":-1}]}"#).is_err());
    }

    #[test]
    fn invert_single_atom() {
        let m = MeasureSpec::from_atoms(&[(0.0, 1.0)])
            .unwrap()
            .weyl_fn(cfg());
        let t = stieltjes_invert(&m, (-0.1, 0.1), &[0.04, 0.02, 0.01], 41).unwrap();
        assert_eq!(t.atoms.len(), 1);
        assert!(t.atoms[0].location.abs() <= t.spacing());
        assert!((t.atoms[0].weight - 1.0).abs() < 0.02);
    }

    #[test]
    fn invert_constant_i() {
        let f = AnalyticFn::constant(Role::Weyl, I);
        let t = stieltjes_invert(&f, (-1.0, 1.0), &[0.1, 0.05], 21).unwrap();
        assert!(t.atoms.is_empty());
        for d in &t.density {
            assert!((d - 1.0 / PI).abs() < 0.01 / PI);
        }
    }

    #[test]
    fn invert_two_atoms() {
        let m = MeasureSpec::from_atoms(&[(-1.0, 1.0), (1.0, 1.0)])
            .unwrap()
            .weyl_fn(cfg());
        let t = stieltjes_invert(&m, (-2.0, 2.0), &[0.05, 0.02, 0.01], 201).unwrap();
        assert_eq!(t.atoms.len(), 2, "{:?}", t.atoms);
        for (a, x) in t.atoms.iter().zip([-1.0, 1.0]) {
            assert!((a.location - x).abs() <= t.spacing());
            assert!((a.weight - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn invert_from_samples() {
        let m = MeasureSpec::from_atoms(&[(0.25, 0.7)]).unwrap();
        let lambdas: Vec<f64> = (0..41).map(|k| -1.0 + 0.05 * k as f64).collect();
        let eps = vec![0.02, 0.01];
        let values = eps
            .iter()
            .map(|&e| {
                lambdas
                    .iter()
                    .map(|&x| m.eval_weyl(Complex64::new(x, e), &cfg()).unwrap())
                    .collect()
            })
            .collect();
        let t = stieltjes_invert_samples(&SampleTable {
            lambdas,
            eps,
            values,
        })
        .unwrap();
        assert_eq!(t.atoms.len(), 1);
        assert!((t.atoms[0].location - 0.25).abs() < 1e-6);
        assert!((t.atoms[0].weight - 0.7).abs() < 1e-6);
    }

    #[test]
    fn invert_flags_non_herglotz() {
        let f = AnalyticFn::constant(Role::Other, Complex64::new(1.0, -0.5));
        assert!(matches!(
            stieltjes_invert(&f, (-1.0, 1.0), &[0.1], 5),
            Err(Error::NotHerglotz { .. })
        ));
        let f = AnalyticFn::constant(Role::Weyl, I);
        assert!(stieltjes_invert(&f, (-1.0, 1.0), &[0.1, 0.2], 5).is_err());
    }

    #[test]
    fn herglotz_simple() {
        let g = GridSpec::fifty();
        let ci = AnalyticFn::constant(Role::Weyl, I);
        let r = herglotz_check(&ci, &g, 1e-12).unwrap();
        assert!(r.pass);
        assert_eq!(r.min_im, 1.0);
        let id = AnalyticFn::total(Role::Other, |z| z);
        assert!(herglotz_check(&id, &g, 1e-12).unwrap().pass);
        let neg = AnalyticFn::total(Role::Other, |z| -z);
        assert!(!herglotz_check(&neg, &g, 1e-12).unwrap().pass);
    }
}
