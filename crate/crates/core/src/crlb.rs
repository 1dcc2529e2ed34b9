//! Fisher information and Cramér–Rao bounds for `z = [Re h, Im h, eta]`.
//!
//! With white noise of variance σ_w² the information matrix only depends on
//! the pilot energies `a = s_p1ᴴ s_p1` and `b = s_p2ᴴ s_p2`:
//!
//! ```text
//! F = (2/σ_w²) · | a+b   0   b |
//!                |  0   a+b  0 |
//!                |  b    0   b |
//! ```
//!
//! whose inverse has diagonal `σ_w²/(2a)`, `σ_w²/(2(a+b))` and
//! `σ_w²/(2a) + σ_w²/(2b)`. The off-diagonal (1,3) entry of the inverse is
//! `−σ_w²/(2a)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{invert_3x3, Mat3};
use crate::signal::{build_design_matrix, PilotFrame};

/// Variance lower bounds for the three real parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbBundle {
    pub re_h: f64,
    pub im_h: f64,
    pub eta: f64,
}

impl CrlbBundle {
    pub fn as_array(&self) -> [f64; 3] {
        [self.re_h, self.im_h, self.eta]
    }
}

fn check_positive(args: &[(&str, f64)]) -> Result<()> {
    for (name, v) in args {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    Ok(())
}

pub fn fim(energy1: f64, energy2: f64, sigma_w2: f64) -> Result<Mat3> {
    check_positive(&[("energy1", energy1), ("energy2", energy2), ("sigma_w2", sigma_w2)])?;
    let s = 2.0 / sigma_w2;
    let (a, b) = (energy1, energy2);
    Ok([
        [s * (a + b), 0.0, s * b],
        [0.0, s * (a + b), 0.0],
        [s * b, 0.0, s * b],
    ])
}

/// Information matrix of a linear Gaussian model with constant covariance
/// σ_w² I: `F_mn = (2/σ_w²) Re(j_mᴴ j_n)` for jacobian columns `j_m`.
pub fn fim_gaussian_linear(jacobian: &[[Complex64; 3]], sigma_w2: f64) -> Result<Mat3> {
    check_positive(&[("sigma_w2", sigma_w2)])?;
    let mut f = [[0.0; 3]; 3];
    for row in jacobian {
        for m in 0..3 {
            for n in 0..3 {
                f[m][n] += (row[m].conj() * row[n]).re;
            }
        }
    }
    let s = 2.0 / sigma_w2;
    Ok(f.map(|r| r.map(|x| s * x)))
}

/// ∂μ/∂z for the stacked pilots: columns `(a₁, j·a₁, a₂)` where `a₁`, `a₂`
/// are the design matrix columns.
pub fn pilot_jacobian(frame: &PilotFrame) -> Vec<[Complex64; 3]> {
    build_design_matrix(frame)
        .rows()
        .iter()
        .map(|r| [r[0], Complex64::i() * r[0], r[1]])
        .collect()
}

pub fn crlb_closed_form(energy1: f64, energy2: f64, sigma_w2: f64) -> Result<CrlbBundle> {
    check_positive(&[("energy1", energy1), ("energy2", energy2), ("sigma_w2", sigma_w2)])?;
    let re_h = sigma_w2 / (2.0 * energy1);
    Ok(CrlbBundle {
        re_h,
        im_h: sigma_w2 / (2.0 * (energy1 + energy2)),
        eta: re_h + sigma_w2 / (2.0 * energy2),
    })
}

/// Diagonal of the numerically inverted information matrix.
pub fn crlb_numeric(energy1: f64, energy2: f64, sigma_w2: f64) -> Result<CrlbBundle> {
    let inv = invert_3x3(&fim(energy1, energy2, sigma_w2)?)?;
    Ok(CrlbBundle {
        re_h: inv[0][0],
        im_h: inv[1][1],
        eta: inv[2][2],
    })
}

pub fn crlb_for_frame(frame: &PilotFrame, sigma_w2: f64) -> Result<CrlbBundle> {
    crlb_closed_form(frame.energy1(), frame.energy2(), sigma_w2)
}
