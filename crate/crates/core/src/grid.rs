//! Rectangular evaluation grids in the upper half-plane.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::AnalyticFn;
use crate::error::{Error, EvalError, Result};

/// A rectangle `[re_min, re_max] × [im_min, im_max]` sampled with `n_re`
/// linearly spaced real parts and `n_im` geometrically spaced imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl GridSpec {
    pub fn new(re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Result<Self> {
        let grid = Self {
            re_min: re.0,
            re_max: re.1,
            im_min: im.0,
            im_max: im.1,
            n_re,
            n_im,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// 21 × 21 points over `[-5, 5] × [0.1, 10]`. The odd counts put `z = i`
    /// on the grid.
    pub fn cli_default() -> Self {
        Self {
            re_min: -5.0,
            re_max: 5.0,
            im_min: 0.1,
            im_max: 10.0,
            n_re: 21,
            n_im: 21,
        }
    }

    /// 10 × 10 points over `[-5, 5] × [0.1, 10]`.
    pub fn model_default() -> Self {
        Self {
            n_re: 10,
            n_im: 10,
            ..Self::cli_default()
        }
    }

    /// 10 × 5 points over `[-5, 5] × [0.1, 10]`.
    pub fn fifty() -> Self {
        Self {
            n_re: 10,
            n_im: 5,
            ..Self::cli_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("grid bounds must be finite".into()));
        }
        if !(self.im_min > 0.0) || self.im_max < self.im_min || self.re_max < self.re_min {
            return Err(Error::InvalidArgument(format!(
                "grid must satisfy 0 < im_min <= im_max and re_min <= re_max, got {self:?}"
            )));
        }
        if self.n_re == 0 || self.n_im == 0 {
            return Err(Error::InvalidArgument("grid counts must be >= 1".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn re_values(&self) -> Vec<f64> {
        linspace(self.re_min, self.re_max, self.n_re)
    }

    fn im_values(&self) -> Vec<f64> {
        if self.n_im == 1 {
            return vec![self.im_min];
        }
        let ratio = (self.im_max / self.im_min).ln();
        (0..self.n_im)
            .map(|k| {
                if k + 1 == self.n_im {
                    self.im_max
                } else {
                    self.im_min * (ratio * k as f64 / (self.n_im - 1) as f64).exp()
                }
            })
            .collect()
    }

    /// Grid points in row-major order: one row per imaginary part, real part
    /// increasing along each row.
    pub fn points(&self) -> Vec<Complex64> {
        let re = self.re_values();
        self.im_values()
            .into_iter()
            .flat_map(|y| re.iter().map(move |&x| Complex64::new(x, y)))
            .collect()
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { hi } else { lo + step * k as f64 })
        .collect()
}

/// Evaluates `f` at every grid point. Points are processed in parallel and
/// returned in grid order.
pub fn evaluate(
    f: &AnalyticFn,
    points: &[Complex64],
) -> Vec<(Complex64, std::result::Result<Complex64, EvalError>)> {
    points.par_iter().map(|&z| (z, f.eval(z))).collect()
}
