//! Pilot frames, the stacked design matrix and observation synthesis.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::numerics::{Mat2, RandomStream, Vec2};

/// Known pilots split by surface state: `s_p1` while the surface does not
/// reflect, `s_p2` while it does.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotFrame {
    s_p1: Vec<Complex64>,
    s_p2: Vec<Complex64>,
    slots_1: Option<Vec<usize>>,
    slots_2: Option<Vec<usize>>,
}

impl PilotFrame {
    pub fn new(s_p1: Vec<Complex64>, s_p2: Vec<Complex64>) -> Result<Self> {
        if s_p1.is_empty() || s_p2.is_empty() {
            return Err(Error::invalid(format!(
                "both pilot groups need at least one symbol (k1 = {}, k2 = {})",
                s_p1.len(),
                s_p2.len()
            )));
        }
        if s_p1.iter().chain(&s_p2).any(|s| !s.is_finite()) {
            return Err(Error::invalid("pilot symbols must be finite"));
        }
        let frame = Self {
            s_p1,
            s_p2,
            slots_1: None,
            slots_2: None,
        };
        if !(frame.energy1() > 0.0) || !(frame.energy2() > 0.0) {
            return Err(Error::invalid("both pilot groups need nonzero energy"));
        }
        Ok(frame)
    }

    /// Attaches the slot positions of each pilot inside the transmission
    /// slot. Layout only; nothing downstream depends on it.
    pub fn with_slots(mut self, slots_1: Vec<usize>, slots_2: Vec<usize>) -> Result<Self> {
        if slots_1.len() != self.s_p1.len() {
            return Err(Error::Dimension { expected: self.s_p1.len(), found: slots_1.len() });
        }
        if slots_2.len() != self.s_p2.len() {
            return Err(Error::Dimension { expected: self.s_p2.len(), found: slots_2.len() });
        }
        let mut all: Vec<usize> = slots_1.iter().chain(&slots_2).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("pilot slot indices must be distinct"));
        }
        self.slots_1 = Some(slots_1);
        self.slots_2 = Some(slots_2);
        Ok(self)
    }

    pub fn s_p1(&self) -> &[Complex64] {
        &self.s_p1
    }

    pub fn s_p2(&self) -> &[Complex64] {
        &self.s_p2
    }

    pub fn slots(&self) -> Option<(&[usize], &[usize])> {
        Some((self.slots_1.as_deref()?, self.slots_2.as_deref()?))
    }

    pub fn k1(&self) -> usize {
        self.s_p1.len()
    }

    pub fn k2(&self) -> usize {
        self.s_p2.len()
    }

    pub fn len(&self) -> usize {
        self.k1() + self.k2()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// s_p1ᴴ s_p1
    pub fn energy1(&self) -> f64 {
        self.s_p1.iter().map(|s| s.norm_sqr()).sum()
    }

    /// s_p2ᴴ s_p2
    pub fn energy2(&self) -> f64 {
        self.s_p2.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// All-ones pilots.
pub fn default_pilots(k1: usize, k2: usize) -> Result<PilotFrame> {
    let one = Complex64::new(1.0, 0.0);
    PilotFrame::new(vec![one; k1], vec![one; k2])
}

/// The `(K₁+K₂) × 2` matrix mapping `[h, eta]` to the noiseless pilots:
/// rows `(s_p1[i], 0)` followed by rows `(s_p2[j], s_p2[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: Vec<[Complex64; 2]>,
}

impl DesignMatrix {
    /// Builds a matrix from explicit rows; used for ad hoc instances.
    pub fn from_rows(rows: Vec<[Complex64; 2]>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("design matrix needs at least one row"));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[[Complex64; 2]] {
        &self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Aᴴ A
    pub fn gram(&self) -> Mat2 {
        let mut g = [[Complex64::new(0.0, 0.0); 2]; 2];
        for r in &self.rows {
            for i in 0..2 {
                for j in 0..2 {
                    g[i][j] += r[i].conj() * r[j];
                }
            }
        }
        g
    }

    /// Aᴴ y
    pub fn adjoint_mul(&self, y: &[Complex64]) -> Result<Vec2> {
        self.check_len(y.len())?;
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (r, yk) in self.rows.iter().zip(y) {
            out[0] += r[0].conj() * yk;
            out[1] += r[1].conj() * yk;
        }
        Ok(out)
    }

    /// A x
    pub fn mul(&self, x: &Vec2) -> Vec<Complex64> {
        self.rows.iter().map(|r| r[0] * x[0] + r[1] * x[1]).collect()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.rows.len() {
            return Err(Error::Dimension { expected: self.rows.len(), found: n });
        }
        Ok(())
    }
}

pub fn build_design_matrix(frame: &PilotFrame) -> DesignMatrix {
    let zero = Complex64::new(0.0, 0.0);
    let rows = frame
        .s_p1
        .iter()
        .map(|&s| [s, zero])
        .chain(frame.s_p2.iter().map(|&s| [s, s]))
        .collect();
    DesignMatrix { rows }
}

/// Stacked received pilots together with the noise level that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: Vec<Complex64>,
    pub sigma_w2: f64,
}

/// `y = A [h, eta]ᵀ + w` with `w ~ CN(0, σ_w² I)`.
///
/// One unit complex normal is consumed per pilot regardless of `sigma_w2`,
/// so the same stream gives common noise shapes across noise levels.
pub fn synthesize_observation(
    frame: &PilotFrame,
    channel: &ChannelRealization,
    sigma_w2: f64,
    rng: &mut RandomStream,
) -> Result<Observation> {
    if !(sigma_w2 >= 0.0) || !sigma_w2.is_finite() {
        return Err(Error::invalid(format!("sigma_w2 must be finite and >= 0, got {sigma_w2}")));
    }
    let a = build_design_matrix(frame);
    let x = [channel.h(), Complex64::new(channel.eta(), 0.0)];
    let scale = sigma_w2.sqrt();
    let y = a
        .mul(&x)
        .into_iter()
        .map(|clean| {
            let w = rng.standard_complex_normal();
            if sigma_w2 == 0.0 {
                clean
            } else {
                clean + w * scale
            }
        })
        .collect();
    Ok(Observation { y, sigma_w2 })
}

/// σ_w² for a given SNR in dB, with SNR = pilot symbol power / σ_w².
pub fn snr_to_noise_variance(snr_db: f64, pilot_symbol_power: f64) -> f64 {
    pilot_symbol_power / 10f64.powf(snr_db / 10.0)
}
