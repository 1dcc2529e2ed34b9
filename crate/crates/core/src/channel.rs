//! Channel realizations: the direct link `h` and the reflected link through
//! the surface, collapsed to the real assistant gain `eta`.
//!
//! The surface phases are assumed to cancel the phases of `f` and `g`
//! exactly, so only the element amplitudes survive.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{sample_complex_gaussian, RandomStream};

/// Second-order statistics of the three fading channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Variance of the direct channel `h`. Zero pins `h` to 0.
    pub sigma_h2: f64,
    /// Per-element variance of the base-station-to-surface channel.
    pub sigma_f2: f64,
    /// Per-element variance of the surface-to-user channel.
    pub sigma_g2: f64,
    pub n_elements: usize,
}

impl ChannelParams {
    /// σ_h² = 1/64, σ_f² = 1/25, σ_g² = 1/9, N = 32.
    pub fn reference() -> Self {
        Self {
            sigma_h2: 1.0 / 64.0,
            sigma_f2: 1.0 / 25.0,
            sigma_g2: 1.0 / 9.0,
            n_elements: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_h2 >= 0.0) || !self.sigma_h2.is_finite() {
            return Err(Error::invalid(format!("sigma_h2 must be >= 0, got {}", self.sigma_h2)));
        }
        for (name, v) in [("sigma_f2", self.sigma_f2), ("sigma_g2", self.sigma_g2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.n_elements == 0 {
            return Err(Error::invalid("n_elements must be >= 1"));
        }
        Ok(())
    }

    /// E[eta] = N · (π/4) · σ_f · σ_g for Rayleigh amplitudes.
    pub fn mean_assistant_gain(&self) -> f64 {
        self.n_elements as f64 * std::f64::consts::FRAC_PI_4 * (self.sigma_f2 * self.sigma_g2).sqrt()
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// One draw of the channel state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h: Complex64,
    f_amp: Vec<f64>,
    g_amp: Vec<f64>,
    eta: f64,
}

impl ChannelRealization {
    /// Builds a realization, computing `eta` from the amplitudes.
    pub fn new(h: Complex64, f_amp: Vec<f64>, g_amp: Vec<f64>) -> Result<Self> {
        let eta = assistant_channel(&f_amp, &g_amp)?;
        Ok(Self { h, f_amp, g_amp, eta })
    }

    /// Builds a realization from stored parts, rejecting an `eta` that
    /// disagrees with the amplitude vectors by more than 1e-12.
    pub fn from_parts(h: Complex64, f_amp: Vec<f64>, g_amp: Vec<f64>, eta: f64) -> Result<Self> {
        let expected = assistant_channel(&f_amp, &g_amp)?;
        if !((eta - expected).abs() <= 1e-12 * expected.max(1.0)) {
            return Err(Error::invalid(format!(
                "stored eta {eta} disagrees with amplitudes (expected {expected})"
            )));
        }
        Ok(Self { h, f_amp, g_amp, eta })
    }

    /// Noiseless-test constructor: a bare `(h, eta)` pair with a single
    /// surface element of amplitudes `(eta, 1)`.
    pub fn with_gains(h: Complex64, eta: f64) -> Result<Self> {
        Self::new(h, vec![eta], vec![1.0])
    }

    pub fn h(&self) -> Complex64 {
        self.h
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn f_amp(&self) -> &[f64] {
        &self.f_amp
    }

    pub fn g_amp(&self) -> &[f64] {
        &self.g_amp
    }

    /// Whether the realization satisfies `eta > |h|`.
    pub fn assistant_dominates(&self) -> bool {
        self.eta > self.h.norm()
    }
}

/// Inner product of the two amplitude vectors.
pub fn assistant_channel(f_amp: &[f64], g_amp: &[f64]) -> Result<f64> {
    if f_amp.len() != g_amp.len() {
        return Err(Error::Dimension {
            expected: f_amp.len(),
            found: g_amp.len(),
        });
    }
    if let Some(bad) = f_amp.iter().chain(g_amp).find(|a| !(**a >= 0.0) || !a.is_finite()) {
        return Err(Error::invalid(format!("amplitudes must be finite and >= 0, got {bad}")));
    }
    Ok(f_amp.iter().zip(g_amp).map(|(f, g)| f * g).sum())
}

/// Draws `h`, then the N entries of `f`, then the N entries of `g`.
pub fn sample_channel(params: &ChannelParams, rng: &mut RandomStream) -> Result<ChannelRealization> {
    params.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let h = sample_complex_gaussian(zero, params.sigma_h2, rng)?;
    let mut amps = |var: f64| -> Result<Vec<f64>> {
        (0..params.n_elements)
            .map(|_| sample_complex_gaussian(zero, var, rng).map(|z| z.norm()))
            .collect()
    };
    let f_amp = amps(params.sigma_f2)?;
    let g_amp = amps(params.sigma_g2)?;
    ChannelRealization::new(h, f_amp, g_amp)
}
