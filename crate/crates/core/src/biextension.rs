//! (*)-extensions for deficiency indices (1,1).
//!
//! In the basis `(φ, ψ)` of the two deficiency directions a (*)-extension is
//! described by a 2×2 matrix `S_A` and its adjoint counterpart `S_A*`, both
//! determined by `κ` and the operator parameter `H`. The latter depends on
//! the phase `U = e^{2iβ}` of the self-adjoint quasi-kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::VonNeumannKappa;
use crate::error::{Error, Result};
use crate::I;

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiKernelPhase {
    beta: f64,
}

impl QuasiKernelPhase {
    pub fn new(beta: f64) -> Result<Self> {
        if (0.0..PI).contains(&beta) {
            Ok(Self { beta })
        } else {
            Err(Error::InvalidArgument(format!(
                "beta must lie in [0, pi), got {beta}"
            )))
        }
    }

    /// The phase with `U = e^{2iβ}`, `β ∈ [0, π)`.
    pub fn from_u(u: Complex64) -> Result<Self> {
        if (u.norm() - 1.0).abs() > 1e-14 {
            return Err(Error::NotUnimodular(u));
        }
        let mut beta = 0.5 * u.arg();
        if beta < 0.0 {
            beta += PI;
        }
        if beta >= PI {
            beta = 0.0;
        }
        Ok(Self { beta })
    }

    pub fn identity() -> Self {
        Self { beta: 0.0 }
    }

    pub fn beta(self) -> f64 {
        self.beta
    }

    pub fn u(self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * self.beta)
    }
}

/// `H = i(1 - κ²)⁻¹ [(1 - κU)(1 - Ūκ)⁻¹ - κU] Ū`.
pub fn h_parameter(kappa: VonNeumannKappa, phase: QuasiKernelPhase) -> Complex64 {
    let k = kappa.value();
    let u = phase.u();
    let ub = u.conj();
    I / (1.0 - k * k) * ((1.0 - k * u) / (1.0 - ub * k) - k * u) * ub
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarBiExtension {
    pub kappa: VonNeumannKappa,
    pub phase: QuasiKernelPhase,
    pub h: Complex64,
    pub s_a: Mat2,
    pub s_a_star: Mat2,
}

impl ScalarBiExtension {
    pub fn new(kappa: VonNeumannKappa, phase: QuasiKernelPhase) -> Self {
        let h = h_parameter(kappa, phase);
        let (s_a, s_a_star) = s_matrices(kappa, h);
        Self {
            kappa,
            phase,
            h,
            s_a,
            s_a_star,
        }
    }
}

/// ```text
/// S_A  = [[-Hκ,       H      ], [κ(Hκ - i),  i - κH ]]
/// S_A* = [[-κH̄ - i, (κH̄ + i)κ], [H̄,        -H̄κ    ]]
/// ```
pub fn s_matrices(kappa: VonNeumannKappa, h: Complex64) -> (Mat2, Mat2) {
    let k = kappa.value();
    let hb = h.conj();
    let s_a = [[-h * k, h], [k * (h * k - I), I - k * h]];
    let s_a_star = [[-k * hb - I, (k * hb + I) * k], [hb, -hb * k]];
    (s_a, s_a_star)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImaginaryPart {
    pub rank: usize,
    /// `c` in `(1/2i)(S_A - S_A*) = c [[1, 1], [1, 1]]`.
    pub coefficient: f64,
    /// `sqrt(2c) = sqrt((1 - κ)/(1 + κ))`, the scale of the channel vector.
    pub channel_norm: f64,
    pub residual: f64,
}

/// Pattern tolerance for [`imaginary_part_channel`].
pub const PATTERN_TOL: f64 = 1e-14;

/// Computes `(1/2i)(S_A - S_A*)` and checks it is a nonnegative multiple of
/// the all-ones matrix.
pub fn imaginary_part_channel(s_a: &Mat2, s_a_star: &Mat2) -> Result<ImaginaryPart> {
    let mut d = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            d[r][c] = (s_a[r][c] - s_a_star[r][c]) / (2.0 * I);
        }
    }
    let coefficient = d[0][0].re;
    let residual = d
        .iter()
        .flatten()
        .map(|v| (v - coefficient).norm())
        .fold(0.0, f64::max);
    if residual > PATTERN_TOL || coefficient < -PATTERN_TOL {
        return Err(Error::Inconsistent(format!(
            "imaginary part is not a nonnegative multiple of ones (residual {residual:e})"
        )));
    }
    let coefficient = coefficient.max(0.0);
    Ok(ImaginaryPart {
        rank: usize::from(coefficient > 0.0),
        coefficient,
        channel_norm: (2.0 * coefficient).sqrt(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(v: f64) -> VonNeumannKappa {
        VonNeumannKappa::new(v).unwrap()
    }

    #[test]
    fn h_at_identity_phase() {
        for v in [0.0, 0.3, 0.9] {
            let h = h_parameter(k(v), QuasiKernelPhase::identity());
            assert!((h - I / (1.0 + v)).norm() < 1e-15);
        }
        assert_eq!(h_parameter(k(0.0), QuasiKernelPhase::identity()), I);
    }

    #[test]
    fn kappa_zero_matrices() {
        let (a, b) = s_matrices(k(0.0), I);
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(a, [[-I * 0.0, I], [z, I]]);
        assert_eq!(b, [[-I, z], [-I, z]]);
    }

    #[test]
    fn kappa_half_matrices() {
        let e = ScalarBiExtension::new(k(0.5), QuasiKernelPhase::identity());
        let expect = [[-I / 3.0, 2.0 * I / 3.0], [I / 6.0 - I / 2.0, I - I / 3.0]];
        for (row, want) in e.s_a.iter().zip(&expect) {
            for (a, b) in row.iter().zip(want) {
                assert!((a - b).norm() < 1e-15);
            }
        }
        let ch = imaginary_part_channel(&e.s_a, &e.s_a_star).unwrap();
        assert_eq!(ch.rank, 1);
        assert!((ch.coefficient - 1.0 / 6.0).abs() < 1e-15);
        assert!((ch.channel_norm - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn channel_at_zero_and_limit() {
        let e = ScalarBiExtension::new(k(0.0), QuasiKernelPhase::identity());
        let ch = imaginary_part_channel(&e.s_a, &e.s_a_star).unwrap();
        assert!((ch.coefficient - 0.5).abs() < 1e-15);
        assert!((ch.channel_norm - 1.0).abs() < 1e-15);
        // The general H formula loses digits as κ → 1; use its closed form.
        let kk = k(1.0 - 1e-9);
        let (a, b) = s_matrices(kk, I / (1.0 + kk.value()));
        let ch = imaginary_part_channel(&a, &b).unwrap();
        assert!(ch.coefficient < 1e-9);
    }

    #[test]
    fn phase_from_u() {
        let p = QuasiKernelPhase::from_u(Complex64::new(-1.0, 0.0)).unwrap();
        assert!((p.beta() - PI / 2.0).abs() < 1e-15);
        let p = QuasiKernelPhase::from_u(Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(p.beta(), 0.0);
        let p = QuasiKernelPhase::from_u(Complex64::from_polar(1.0, -0.4)).unwrap();
        assert!((p.u() - Complex64::from_polar(1.0, -0.4)).norm() < 1e-15);
        assert!(QuasiKernelPhase::new(PI).is_err());
    }
}
