//! Seeded Monte Carlo sweeps: MSE versus SNR for the LS and dual-ascent
//! estimators, gain tables and multiplier traces.
//!
//! Trial `i` owns random stream `i` of the master seed. It draws the channel
//! first and then one unit complex normal per pilot, which is scaled by the
//! noise level of the SNR point. The same trial therefore sees the same
//! channel and noise shape at every SNR, and the LS numbers do not depend on
//! whether the dual-ascent estimator runs too.
//!
//! Trials are fanned out over a rayon pool and summed back in trial order,
//! so the output is bit-identical for any worker count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{sample_channel, ChannelParams};
use crate::crlb::{crlb_closed_form, CrlbBundle};
use crate::error::{Error, Result};
use crate::estimators::{des_estimate, ls_estimate, DualAscentConfig, EstimationResult, ParameterVector};
use crate::numerics::RandomStream;
use crate::signal::{build_design_matrix, default_pilots, snr_to_noise_variance, synthesize_observation, PilotFrame};

/// Share of non-converged dual-ascent trials above which a warning is raised.
pub const NONCONVERGED_WARN_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Ls,
    Des,
}

impl Estimator {
    pub const ALL: [Estimator; 2] = [Estimator::Ls, Estimator::Des];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Ls => "LS",
            Estimator::Des => "DES",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LS" => Ok(Estimator::Ls),
            "DES" => Ok(Estimator::Des),
            other => Err(Error::invalid(format!("unknown estimator `{other}`"))),
        }
    }
}

/// Real component of the parameter vector an MSE refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    ReH,
    ImH,
    Eta,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::ReH, Component::ImH, Component::Eta];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::ReH => "re_h",
            Component::ImH => "im_h",
            Component::Eta => "eta",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    fn of_bundle(self, b: &CrlbBundle) -> f64 {
        b.as_array()[self.index()]
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "re_h" => Ok(Component::ReH),
            "im_h" => Ok(Component::ImH),
            "eta" => Ok(Component::Eta),
            other => Err(Error::invalid(format!("unknown component `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel: ChannelParams,
    pub k1: usize,
    pub k2: usize,
    pub snr_db_list: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub dual_ascent: DualAscentConfig,
    /// Subset of estimators to run, kept in [`Estimator::ALL`] order.
    pub estimators: Vec<Estimator>,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    /// The reference setup: K₁ = K₂ = 1, SNR 0–8 dB in 2 dB steps, 10⁴ trials.
    fn default() -> Self {
        Self {
            channel: ChannelParams::reference(),
            k1: 1,
            k2: 1,
            snr_db_list: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            trials: 10_000,
            master_seed: 0,
            dual_ascent: DualAscentConfig::default(),
            estimators: Estimator::ALL.to_vec(),
            workers: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.dual_ascent.validate()?;
        self.pilots()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.snr_db_list.is_empty() {
            return Err(Error::invalid("snr_db list must not be empty"));
        }
        if let Some(bad) = self.snr_db_list.iter().find(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("snr_db values must be finite, got {bad}")));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("at least one estimator must be selected"));
        }
        Ok(())
    }

    pub fn pilots(&self) -> Result<PilotFrame> {
        default_pilots(self.k1, self.k2)
    }

    pub fn runs(&self, e: Estimator) -> bool {
        self.estimators.contains(&e)
    }

    /// σ_w² at a given SNR; pilots are unit modulus.
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        snr_to_noise_variance(snr_db, 1.0)
    }
}

/// Squared errors `(Re ĥ − Re h)², (Im ĥ − Im h)², (Re η̂ − η)²`.
pub type SquaredErrors = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub enum DesOutcome {
    Ok { errors: SquaredErrors, converged: bool, im_eta: f64 },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub ls: Option<std::result::Result<SquaredErrors, String>>,
    pub des: Option<DesOutcome>,
    /// Whether the true channel satisfies eta > |h|.
    pub truth_feasible: bool,
}

fn squared_errors(x: &ParameterVector, h: num_complex::Complex64, eta: f64) -> SquaredErrors {
    [(x.h.re - h.re).powi(2), (x.h.im - h.im).powi(2), (x.eta.re - eta).powi(2)]
}

/// One Monte Carlo trial at one SNR.
pub fn run_trial(cfg: &ExperimentConfig, snr_db: f64, trial_index: u64) -> Result<TrialOutcome> {
    let frame = cfg.pilots()?;
    let a = build_design_matrix(&frame);
    let mut rng = RandomStream::new(cfg.master_seed, trial_index);
    let channel = sample_channel(&cfg.channel, &mut rng)?;
    let obs = synthesize_observation(&frame, &channel, cfg.noise_variance(snr_db), &mut rng)?;
    let (h, eta) = (channel.h(), channel.eta());

    let ls = cfg.runs(Estimator::Ls).then(|| {
        ls_estimate(&a, &obs.y)
            .map(|x| squared_errors(&x, h, eta))
            .map_err(|e| e.to_string())
    });
    let des = cfg.runs(Estimator::Des).then(|| match des_estimate(&a, &obs.y, &cfg.dual_ascent) {
        Ok(r) => DesOutcome::Ok {
            errors: squared_errors(&r.x_hat, h, eta),
            converged: r.converged,
            im_eta: r.x_hat.eta.im,
        },
        Err(e) => DesOutcome::Failed(e.to_string()),
    });
    Ok(TrialOutcome {
        ls,
        des,
        truth_feasible: channel.assistant_dominates(),
    })
}

/// One row of the experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct MseRecord {
    pub snr_db: f64,
    pub estimator: Estimator,
    pub component: Component,
    pub mse: f64,
    pub crlb: f64,
    /// Trials that entered the average.
    pub trials: usize,
    /// Dual-ascent trials that hit `t_max` or exhausted their backoffs
    /// (always 0 for LS).
    pub nonconverged: usize,
    pub seed: u64,
}

/// Per-SNR bookkeeping that does not fit the record schema.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrDiagnostics {
    pub snr_db: f64,
    pub sigma_w2: f64,
    /// Trials whose true channel has eta ≤ |h|; they stay in the averages.
    pub truth_violations: usize,
    pub des_nonconverged: usize,
    pub des_failed: usize,
    pub ls_failed: usize,
    /// E|ĥ − h|² per estimator, i.e. the sum of the two real parts.
    pub h_mse: Vec<(Estimator, f64)>,
    /// Mean |Im η̂| of the dual-ascent output.
    pub des_mean_abs_im_eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<MseRecord>,
    pub diagnostics: Vec<SnrDiagnostics>,
    pub warnings: Vec<String>,
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))
}

/// Runs every trial at every SNR and averages the squared errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let frame = cfg.pilots()?;
    let pool = build_pool(cfg.workers)?;
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut warnings = Vec::new();

    for &snr_db in &cfg.snr_db_list {
        let outcomes: Vec<TrialOutcome> = pool.install(|| {
            (0..cfg.trials as u64)
                .into_par_iter()
                .map(|i| run_trial(cfg, snr_db, i))
                .collect::<Result<_>>()
        })?;

        let sigma_w2 = cfg.noise_variance(snr_db);
        let bounds = crlb_closed_form(frame.energy1(), frame.energy2(), sigma_w2)?;
        let mut diag = SnrDiagnostics {
            snr_db,
            sigma_w2,
            truth_violations: outcomes.iter().filter(|o| !o.truth_feasible).count(),
            des_nonconverged: 0,
            des_failed: 0,
            ls_failed: 0,
            h_mse: Vec::new(),
            des_mean_abs_im_eta: None,
        };

        for est in Estimator::ALL.into_iter().filter(|e| cfg.runs(*e)) {
            let mut sum = [0.0f64; 3];
            let mut count = 0usize;
            let mut nonconverged = 0usize;
            let mut im_eta = 0.0f64;
            for o in &outcomes {
                let errs = match est {
                    Estimator::Ls => match o.ls.as_ref().expect("LS selected") {
                        Ok(e) => Some(*e),
                        Err(_) => {
                            diag.ls_failed += 1;
                            None
                        }
                    },
                    Estimator::Des => match o.des.as_ref().expect("DES selected") {
                        DesOutcome::Ok { errors, converged, im_eta: im } => {
                            nonconverged += usize::from(!converged);
                            im_eta += im.abs();
                            Some(*errors)
                        }
                        DesOutcome::Failed(_) => {
                            diag.des_failed += 1;
                            None
                        }
                    },
                };
                if let Some(e) = errs {
                    for (s, v) in sum.iter_mut().zip(e) {
                        *s += v;
                    }
                    count += 1;
                }
            }
            if count == 0 {
                return Err(Error::IncompleteData(format!(
                    "every {est} trial failed at {snr_db} dB"
                )));
            }
            let mse = sum.map(|s| s / count as f64);
            if est == Estimator::Des {
                diag.des_nonconverged = nonconverged;
                diag.des_mean_abs_im_eta = Some(im_eta / count as f64);
                let frac = nonconverged as f64 / cfg.trials as f64;
                if frac > NONCONVERGED_WARN_FRACTION {
                    warnings.push(format!(
                        "{snr_db} dB: {nonconverged} of {} DES trials did not converge ({:.1}%)",
                        cfg.trials,
                        100.0 * frac
                    ));
                }
            }
            diag.h_mse.push((est, mse[0] + mse[1]));
            for comp in Component::ALL {
                records.push(MseRecord {
                    snr_db,
                    estimator: est,
                    component: comp,
                    mse: mse[comp.index()],
                    crlb: comp.of_bundle(&bounds),
                    trials: count,
                    nonconverged: if est == Estimator::Des { nonconverged } else { 0 },
                    seed: cfg.master_seed,
                });
            }
        }
        diagnostics.push(diag);
    }
    Ok(ExperimentReport {
        records,
        diagnostics,
        warnings,
    })
}

fn find(records: &[MseRecord], snr_db: f64, est: Estimator, comp: Component) -> Option<&MseRecord> {
    records
        .iter()
        .find(|r| r.snr_db == snr_db && r.estimator == est && r.component == comp)
}

/// Distinct SNRs in first-seen order.
fn snr_points(records: &[MseRecord]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for r in records {
        if !out.contains(&r.snr_db) {
            out.push(r.snr_db);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRow {
    pub snr_db: f64,
    pub component: Component,
    /// (MSE_LS − MSE_DES) / MSE_LS × 100
    pub gain_pct: f64,
}

/// Accuracy gain of DES over LS in percent.
pub fn gains_table(records: &[MseRecord]) -> Result<Vec<GainRow>> {
    if records.is_empty() {
        return Err(Error::IncompleteData("no records".into()));
    }
    let mut out = Vec::new();
    for snr_db in snr_points(records) {
        for comp in Component::ALL {
            let ls = find(records, snr_db, Estimator::Ls, comp);
            let des = find(records, snr_db, Estimator::Des, comp);
            let (Some(ls), Some(des)) = (ls, des) else {
                return Err(Error::IncompleteData(format!(
                    "missing LS/DES pair for {comp} at {snr_db} dB"
                )));
            };
            out.push(GainRow {
                snr_db,
                component: comp,
                gain_pct: (ls.mse - des.mse) / ls.mse * 100.0,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferencePair {
    /// MSE_LS − MSE_DES
    LsMinusDes,
    /// MSE_DES − CRLB
    DesMinusCrlb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceRow {
    pub snr_db: f64,
    pub component: Component,
    pub difference: f64,
}

pub fn mse_difference(records: &[MseRecord], pair: DifferencePair) -> Result<Vec<DifferenceRow>> {
    if records.is_empty() {
        return Err(Error::IncompleteData("no records".into()));
    }
    let mut out = Vec::new();
    for snr_db in snr_points(records) {
        for comp in Component::ALL {
            let des = find(records, snr_db, Estimator::Des, comp)
                .ok_or_else(|| Error::IncompleteData(format!("missing DES {comp} at {snr_db} dB")))?;
            let difference = match pair {
                DifferencePair::LsMinusDes => {
                    let ls = find(records, snr_db, Estimator::Ls, comp)
                        .ok_or_else(|| Error::IncompleteData(format!("missing LS {comp} at {snr_db} dB")))?;
                    ls.mse - des.mse
                }
                DifferencePair::DesMinusCrlb => des.mse - des.crlb,
            };
            out.push(DifferenceRow { snr_db, component: comp, difference });
        }
    }
    Ok(out)
}

/// Full dual-ascent traces of one trial.
pub fn convergence_trace(cfg: &ExperimentConfig, snr_db: f64, trial_index: u64) -> Result<EstimationResult> {
    cfg.validate()?;
    if !cfg.runs(Estimator::Des) {
        return Err(Error::invalid("trace requires DES in the estimator set"));
    }
    let frame = cfg.pilots()?;
    let mut rng = RandomStream::new(cfg.master_seed, trial_index);
    let channel = sample_channel(&cfg.channel, &mut rng)?;
    let obs = synthesize_observation(&frame, &channel, cfg.noise_variance(snr_db), &mut rng)?;
    des_estimate(&build_design_matrix(&frame), &obs.y, &cfg.dual_ascent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            trials,
            master_seed: 42,
            ..Default::default()
        }
    }

    fn record(snr: f64, est: Estimator, comp: Component, mse: f64) -> MseRecord {
        MseRecord {
            snr_db: snr,
            estimator: est,
            component: comp,
            mse,
            crlb: 0.5,
            trials: 1,
            nonconverged: 0,
            seed: 0,
        }
    }

    #[test]
    fn noiseless_ls_is_exact() {
        let cfg = small(1);
        for i in 0..20 {
            let o = run_trial(&cfg, 400.0, i).unwrap();
            let e = o.ls.unwrap().unwrap();
            assert!(e.iter().all(|v| *v < 1e-30), "{e:?}");
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = small(1);
        assert_eq!(run_trial(&cfg, 0.0, 17).unwrap(), run_trial(&cfg, 0.0, 17).unwrap());
        assert_ne!(run_trial(&cfg, 0.0, 17).unwrap(), run_trial(&cfg, 0.0, 18).unwrap());
    }

    #[test]
    fn record_cardinality() {
        let rep = run_experiment(&small(50)).unwrap();
        assert_eq!(rep.records.len(), 30);
        assert_eq!(rep.diagnostics.len(), 5);
    }

    #[test]
    fn ls_records_independent_of_des() {
        let both = run_experiment(&small(300)).unwrap();
        let ls_only = run_experiment(&ExperimentConfig {
            estimators: vec![Estimator::Ls],
            ..small(300)
        })
        .unwrap();
        let ls_rows: Vec<_> = both.records.iter().filter(|r| r.estimator == Estimator::Ls).cloned().collect();
        assert_eq!(ls_rows, ls_only.records);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let one = run_experiment(&ExperimentConfig { workers: 1, ..small(400) }).unwrap();
        let four = run_experiment(&ExperimentConfig { workers: 4, ..small(400) }).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn crlb_ordering_holds_per_snr() {
        let rep = run_experiment(&small(10)).unwrap();
        for snr in [0.0, 2.0, 4.0, 6.0, 8.0] {
            let get = |c| find(&rep.records, snr, Estimator::Ls, c).unwrap().crlb;
            assert!(get(Component::ReH) >= get(Component::ImH));
            assert!(get(Component::Eta) >= get(Component::ReH));
        }
    }

    #[test]
    fn gains_examples() {
        let mut recs = Vec::new();
        for c in Component::ALL {
            recs.push(record(0.0, Estimator::Ls, c, 1.0));
            recs.push(record(0.0, Estimator::Des, c, 0.9));
            recs.push(record(2.0, Estimator::Ls, c, 0.5));
            recs.push(record(2.0, Estimator::Des, c, 0.5));
        }
        let g = gains_table(&recs).unwrap();
        assert_eq!(g.len(), 6);
        for row in &g {
            let want = if row.snr_db == 0.0 { 10.0 } else { 0.0 };
            assert!((row.gain_pct - want).abs() < 1e-12, "{row:?}");
        }
    }

    #[test]
    fn gains_need_both_estimators() {
        assert!(matches!(gains_table(&[]), Err(Error::IncompleteData(_))));
        let recs: Vec<_> = Component::ALL.iter().map(|c| record(0.0, Estimator::Ls, *c, 1.0)).collect();
        assert!(matches!(gains_table(&recs), Err(Error::IncompleteData(_))));
    }

    #[test]
    fn differences() {
        let mut recs = Vec::new();
        for c in Component::ALL {
            recs.push(record(0.0, Estimator::Ls, c, 0.7));
            recs.push(record(0.0, Estimator::Des, c, 0.7));
        }
        let d = mse_difference(&recs, DifferencePair::LsMinusDes).unwrap();
        assert!(d.iter().all(|r| r.difference == 0.0));
        let d = mse_difference(&recs, DifferencePair::DesMinusCrlb).unwrap();
        assert!(d.iter().all(|r| (r.difference - 0.2).abs() < 1e-12));
        assert!(mse_difference(&recs[..1], DifferencePair::LsMinusDes).is_err());
    }

    #[test]
    fn trace_is_deterministic() {
        let cfg = small(1);
        let a = convergence_trace(&cfg, 0.0, 3).unwrap();
        assert_eq!(a, convergence_trace(&cfg, 0.0, 3).unwrap());
        let ls_only = ExperimentConfig { estimators: vec![Estimator::Ls], ..cfg };
        assert!(convergence_trace(&ls_only, 0.0, 3).is_err());
    }

    #[test]
    fn invalid_configs() {
        assert!(run_experiment(&ExperimentConfig { trials: 0, ..small(1) }).is_err());
        assert!(run_experiment(&ExperimentConfig { snr_db_list: vec![], ..small(1) }).is_err());
        assert!(run_experiment(&ExperimentConfig { k2: 0, ..small(1) }).is_err());
        assert!(run_experiment(&ExperimentConfig { estimators: vec![], ..small(1) }).is_err());
    }
}
