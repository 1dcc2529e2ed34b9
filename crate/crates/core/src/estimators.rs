//! Least-squares baseline and the dual-ascent constrained estimator.
//!
//! The constrained problem is
//!
//! ```text
//! minimize   ‖y − A x‖²              x = [h, eta]ᵀ
//! subject to bᵀx* ≤ 0                b = [0, −1]ᵀ      (eta ≥ 0)
//!            xᴴ C x ≤ 0              C = diag(1, −1)   (|eta| ≥ |h|)
//! ```
//!
//! Dual ascent alternates the exact Lagrangian minimizer
//! `x = (AᴴA + δC)⁻¹ (Aᴴy − bλ)` with projected gradient steps on the
//! multipliers `λ ← [λ + ε bᵀx*]⁺` and `δ ← [δ + τ xᴴCx]⁺`.
//!
//! `C` is indefinite, so `AᴴA + δC` stops being positive definite once δ
//! passes a pole that depends on the pilots; beyond it the Lagrangian has no
//! minimizer and the dual function is −∞. Each δ step is therefore halved
//! (at most `max_backoffs` times) until `det(AᴴA + δC) ≥ domain_margin ·
//! det(AᴴA)`; a run that cannot place δ inside that region stops and is
//! reported as not converged.
//!
//! `eta` stays complex through the iteration. The λ gradient reads
//! `bᵀx* = −Re(eta)` and `xᴴCx = |h|² − |eta|²` is real.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{det2, solve_2x2, Mat2, Vec2, SINGULARITY_THRESHOLD};
use crate::signal::DesignMatrix;

/// Estimate of `[h, eta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterVector {
    pub h: Complex64,
    pub eta: Complex64,
}

impl ParameterVector {
    pub fn new(h: Complex64, eta: Complex64) -> Self {
        Self { h, eta }
    }

    pub fn from_real(h: f64, eta: f64) -> Self {
        Self::new(Complex64::new(h, 0.0), Complex64::new(eta, 0.0))
    }

    pub fn as_array(&self) -> Vec2 {
        [self.h, self.eta]
    }

    fn from_array(v: Vec2) -> Self {
        Self { h: v[0], eta: v[1] }
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.h - other.h).norm().max((self.eta - other.eta).norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepSchedule {
    /// ε⁽ᵗ⁾ = ε₀, τ⁽ᵗ⁾ = τ₀
    #[default]
    Constant,
    /// ε⁽ᵗ⁾ = ε₀ / √(t+1), likewise τ
    Diminishing,
}

impl StepSchedule {
    fn factor(self, t: usize) -> f64 {
        match self {
            StepSchedule::Constant => 1.0,
            StepSchedule::Diminishing => 1.0 / ((t + 1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualAscentConfig {
    /// Stepsize for λ.
    pub eps0: f64,
    /// Stepsize for δ.
    pub tau0: f64,
    pub t_max: usize,
    /// Convergence threshold on max(|Δλ|, |Δδ|, ‖Δx‖∞).
    pub tol: f64,
    pub lambda0: f64,
    pub delta0: f64,
    /// Largest constraint value accepted at convergence.
    pub feas_tol: f64,
    pub schedule: StepSchedule,
    /// Fraction of det(AᴴA) that det(AᴴA + δC) must keep.
    pub domain_margin: f64,
    pub max_backoffs: usize,
}

impl Default for DualAscentConfig {
    fn default() -> Self {
        Self {
            eps0: 0.1,
            tau0: 0.1,
            t_max: 50,
            tol: 1e-3,
            lambda0: 0.0,
            delta0: 0.0,
            feas_tol: 2e-2,
            schedule: StepSchedule::Constant,
            domain_margin: 0.1,
            max_backoffs: 10,
        }
    }
}

impl DualAscentConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("eps0", self.eps0),
            ("tau0", self.tau0),
            ("lambda0", self.lambda0),
            ("delta0", self.delta0),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("tol", self.tol), ("feas_tol", self.feas_tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if self.t_max == 0 {
            return Err(Error::invalid("t_max must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.domain_margin) {
            return Err(Error::invalid(format!(
                "domain_margin must lie in [0, 1), got {}",
                self.domain_margin
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub x_hat: ParameterVector,
    pub iterations: usize,
    pub converged: bool,
    /// λ⁽⁰⁾ … λ⁽ᵀ⁾
    pub lambda_trace: Vec<f64>,
    /// δ⁽⁰⁾ … δ⁽ᵀ⁾
    pub delta_trace: Vec<f64>,
    /// Primal iterates; entry 0 is the minimizer at the initial multipliers,
    /// entry t ≥ 1 is x̂⁽ᵗ⁾.
    pub iterate_trace: Vec<ParameterVector>,
    /// −Re(eta) at the output; nonpositive when satisfied.
    pub c1_violation: f64,
    /// |h|² − |eta|² at the output; nonpositive when satisfied.
    pub c2_violation: f64,
    /// Set when the δ step could not be placed inside the dual domain.
    pub backoff_exhausted: bool,
}

impl EstimationResult {
    pub fn lambda(&self) -> f64 {
        *self.lambda_trace.last().expect("trace is never empty")
    }

    pub fn delta(&self) -> f64 {
        *self.delta_trace.last().expect("trace is never empty")
    }

    /// First iteration after which neither multiplier moves by `tol` or
    /// more for the rest of the trace.
    pub fn settling_iteration(&self, tol: f64) -> usize {
        let moves = |trace: &[f64]| {
            trace
                .windows(2)
                .rposition(|w| (w[1] - w[0]).abs() >= tol)
                .map_or(0, |i| i + 1)
        };
        moves(&self.lambda_trace).max(moves(&self.delta_trace))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub comp_slack_1: f64,
    pub comp_slack_2: f64,
}

/// Unconstrained least squares, `(AᴴA)⁻¹ Aᴴ y`.
pub fn ls_estimate(a: &DesignMatrix, y: &[Complex64]) -> Result<ParameterVector> {
    let rhs = a.adjoint_mul(y)?;
    Ok(ParameterVector::from_array(solve_2x2(&a.gram(), &rhs)?))
}

/// `(c1, c2) = (−Re eta, |h|² − |eta|²)`.
pub fn constraint_violation(x: &ParameterVector) -> (f64, f64) {
    (-x.eta.re, x.h.norm_sqr() - x.eta.norm_sqr())
}

fn shifted(gram: &Mat2, delta: f64) -> Mat2 {
    let mut m = *gram;
    m[0][0] += delta;
    m[1][1] -= delta;
    m
}

/// Lagrangian minimizer at `(λ, δ)`.
fn primal_update(gram: &Mat2, rhs: &Vec2, lambda: f64, delta: f64) -> Result<ParameterVector> {
    let v = [rhs[0], rhs[1] + lambda];
    solve_2x2(&shifted(gram, delta), &v).map(ParameterVector::from_array)
}

/// ‖(AᴴA + δC) x − (Aᴴy − λb)‖∞
pub fn stationarity_residual(
    a: &DesignMatrix,
    y: &[Complex64],
    x: &ParameterVector,
    lambda: f64,
    delta: f64,
) -> Result<f64> {
    let rhs = a.adjoint_mul(y)?;
    let m = shifted(&a.gram(), delta);
    let mx = crate::numerics::mul2(&m, &x.as_array());
    let r0 = mx[0] - rhs[0];
    let r1 = mx[1] - (rhs[1] + lambda);
    Ok(r0.norm().max(r1.norm()))
}

struct DualDomain {
    gram: Mat2,
    floor: f64,
}

impl DualDomain {
    fn new(gram: &Mat2, margin: f64) -> Self {
        Self {
            gram: *gram,
            floor: margin * det2(gram).re,
        }
    }

    fn contains(&self, delta: f64) -> bool {
        let m = shifted(&self.gram, delta);
        let det = det2(&m).re;
        let scale = m
            .iter()
            .map(|row| row.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .product::<f64>();
        m[0][0].re > 0.0 && m[1][1].re > 0.0 && det >= self.floor && det > SINGULARITY_THRESHOLD * scale
    }
}

/// Dual ascent on the constrained problem.
pub fn des_estimate(a: &DesignMatrix, y: &[Complex64], cfg: &DualAscentConfig) -> Result<EstimationResult> {
    cfg.validate()?;
    let gram = a.gram();
    let rhs = a.adjoint_mul(y)?;
    // AᴴA itself must be invertible; everything after stays inside the domain
    solve_2x2(&gram, &rhs)?;
    let domain = DualDomain::new(&gram, cfg.domain_margin);
    if !domain.contains(cfg.delta0) {
        return Err(Error::invalid(format!(
            "delta0 = {} leaves AᴴA + δC outside the dual domain",
            cfg.delta0
        )));
    }

    let mut lambda = cfg.lambda0;
    let mut delta = cfg.delta0;
    let mut lambda_trace = vec![lambda];
    let mut delta_trace = vec![delta];
    let mut iterate_trace = Vec::with_capacity(cfg.t_max + 1);
    let mut converged = false;
    let mut backoff_exhausted = false;
    let mut prev: Option<ParameterVector> = None;

    for t in 0..cfg.t_max {
        let x = primal_update(&gram, &rhs, lambda, delta)?;
        if t == 0 {
            iterate_trace.push(x);
        }
        let factor = cfg.schedule.factor(t);
        let (c1, c2) = constraint_violation(&x);

        let lambda_next = (lambda + cfg.eps0 * factor * c1).max(0.0);
        let mut step = cfg.tau0 * factor * c2;
        let mut delta_next = (delta + step).max(0.0);
        let mut backoffs = 0;
        while !domain.contains(delta_next) {
            if backoffs == cfg.max_backoffs {
                backoff_exhausted = true;
                break;
            }
            step *= 0.5;
            delta_next = (delta + step).max(0.0);
            backoffs += 1;
        }
        if backoff_exhausted {
            break;
        }

        let change = (lambda_next - lambda)
            .abs()
            .max((delta_next - delta).abs())
            .max(prev.map_or(0.0, |p| x.max_abs_diff(&p)));
        lambda = lambda_next;
        delta = delta_next;
        lambda_trace.push(lambda);
        delta_trace.push(delta);
        iterate_trace.push(x);
        prev = Some(x);

        if change < cfg.tol && c1 <= cfg.feas_tol && c2 <= cfg.feas_tol {
            converged = true;
            break;
        }
    }

    let x_hat = *iterate_trace.last().expect("at least one primal solve");
    let (c1_violation, c2_violation) = constraint_violation(&x_hat);
    Ok(EstimationResult {
        x_hat,
        iterations: lambda_trace.len() - 1,
        converged,
        lambda_trace,
        delta_trace,
        iterate_trace,
        c1_violation,
        c2_violation,
        backoff_exhausted,
    })
}

/// Stationarity and complementary slackness at the final multipliers.
pub fn kkt_residuals(a: &DesignMatrix, y: &[Complex64], result: &EstimationResult) -> Result<KktResiduals> {
    let (lambda, delta) = (result.lambda(), result.delta());
    let stationarity = stationarity_residual(a, y, &result.x_hat, lambda, delta)?;
    let (c1, c2) = constraint_violation(&result.x_hat);
    Ok(KktResiduals {
        stationarity,
        comp_slack_1: (lambda * c1).abs(),
        comp_slack_2: (delta * c2).abs(),
    })
}
