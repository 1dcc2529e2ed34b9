//! Front-end pieces shared by the `lisce` binary and the C API: config
//! files, the run manifest and the CSV formats.
//!
//! Floats are written with 17 significant digits so every value reads back
//! bit-exact.

pub mod config;

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use crate::crlb::crlb_closed_form;
use crate::error::{Error, Result};
use crate::estimators::EstimationResult;
use crate::harness::{Component, Estimator, ExperimentConfig, ExperimentReport, GainRow, MseRecord};
use crate::signal::{default_pilots, snr_to_noise_variance};

pub use config::{parse_config, render_config, ParsedConfig, DEFAULT_TRIALS};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SIMULATE_HEADER: [&str; 8] = [
    "snr_db",
    "estimator",
    "component",
    "mse",
    "crlb",
    "trials",
    "nonconverged",
    "seed",
];

/// Exit status for scripting: 0 success, 1 usage or config error, 2 runtime
/// or data error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidParameter(_) | Error::Dimension { .. } => 1,
        Error::SingularMatrix { .. } | Error::IncompleteData(_) | Error::Io(_) => 2,
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// What produced a CSV file: enough to rerun it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config: ExperimentConfig,
    pub tool_version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
    pub master_seed: u64,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Self {
            command: command.to_string(),
            config: config.clone(),
            tool_version: TOOL_VERSION.to_string(),
            timestamp,
            master_seed: config.master_seed,
        }
    }

    /// `#`-prefixed lines; stripping the prefix from the lines after
    /// `config:` yields a config file for the same run.
    pub fn render(&self) -> String {
        let mut s = format!(
            "# lisce {}\n# tool_version = {}\n# timestamp = {}\n# master_seed = {}\n# config:\n",
            self.command, self.tool_version, self.timestamp, self.master_seed
        );
        for line in render_config(&self.config).lines() {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        s
    }
}

/// Recovers the run configuration embedded in a CSV manifest.
pub fn config_from_manifest(text: &str) -> Result<ExperimentConfig> {
    let mut lines = text.lines().map_while(|l| l.strip_prefix('#')).map(str::trim);
    if !lines.any(|l| l == "config:") {
        return Err(Error::IncompleteData("no manifest config block".into()));
    }
    let body: Vec<&str> = lines.collect();
    Ok(parse_config(&body.join("\n"))?.config)
}

/// Writes through a temporary sibling and renames on success; the partial
/// file is removed on any error.
pub fn write_atomically<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?
        .to_string_lossy()
        .into_owned();
    tmp.set_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut file = io::BufWriter::new(fs::File::create(&tmp)?);
        fill(&mut file)?;
        file.flush()?;
        drop(file);
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::IncompleteData(format!("csv: {other:?}")),
    }
}

pub fn write_records_csv(out: &mut dyn Write, records: &[MseRecord]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SIMULATE_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            fmt_f64(r.snr_db),
            r.estimator.to_string(),
            r.component.to_string(),
            fmt_f64(r.mse),
            fmt_f64(r.crlb),
            r.trials.to_string(),
            r.nonconverged.to_string(),
            r.seed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Trailing comment lines with the per-SNR diagnostics.
pub fn render_diagnostics(report: &ExperimentReport) -> String {
    let mut s = String::new();
    for d in &report.diagnostics {
        s.push_str(&format!(
            "# diag snr_db={} sigma_w2={} truth_violations={} des_nonconverged={} des_failed={} ls_failed={}",
            fmt_f64(d.snr_db),
            fmt_f64(d.sigma_w2),
            d.truth_violations,
            d.des_nonconverged,
            d.des_failed,
            d.ls_failed
        ));
        for (est, v) in &d.h_mse {
            s.push_str(&format!(" h_mse_{}={}", est.as_str().to_ascii_lowercase(), fmt_f64(*v)));
        }
        if let Some(v) = d.des_mean_abs_im_eta {
            s.push_str(&format!(" des_mean_abs_im_eta={}", fmt_f64(v)));
        }
        s.push('\n');
    }
    s
}

/// Full `simulate` output: manifest, records, diagnostics.
pub fn write_simulation(out: &mut dyn Write, manifest: &RunManifest, report: &ExperimentReport) -> Result<()> {
    out.write_all(manifest.render().as_bytes())?;
    write_records_csv(out, &report.records)?;
    out.write_all(render_diagnostics(report).as_bytes())?;
    Ok(())
}

/// Reads `simulate` output, skipping `#` lines.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<MseRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.is_empty() {
        return Err(Error::IncompleteData("empty results file".into()));
    }
    if headers.iter().collect::<Vec<_>>() != SIMULATE_HEADER {
        return Err(Error::IncompleteData(format!(
            "unexpected header `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let bad = |what: &str| Error::IncompleteData(format!("record {}: bad {what}", i + 1));
        let real = |j: usize, what: &str| row[j].parse::<f64>().map_err(|_| bad(what));
        let int = |j: usize, what: &str| row[j].parse::<u64>().map_err(|_| bad(what));
        out.push(MseRecord {
            snr_db: real(0, "snr_db")?,
            estimator: row[1].parse::<Estimator>().map_err(|_| bad("estimator"))?,
            component: row[2].parse::<Component>().map_err(|_| bad("component"))?,
            mse: real(3, "mse")?,
            crlb: real(4, "crlb")?,
            trials: int(5, "trials")? as usize,
            nonconverged: int(6, "nonconverged")? as usize,
            seed: int(7, "seed")?,
        });
    }
    if out.is_empty() {
        return Err(Error::IncompleteData("results file has no records".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbRow {
    pub snr_db: f64,
    pub component: Component,
    pub crlb: f64,
}

/// Bounds for all-ones pilots at each SNR.
pub fn crlb_table(k1: usize, k2: usize, snr_db_list: &[f64]) -> Result<Vec<CrlbRow>> {
    let frame = default_pilots(k1, k2)?;
    let mut rows = Vec::with_capacity(3 * snr_db_list.len());
    for &snr_db in snr_db_list {
        let b = crlb_closed_form(frame.energy1(), frame.energy2(), snr_to_noise_variance(snr_db, 1.0))?;
        for c in Component::ALL {
            rows.push(CrlbRow {
                snr_db,
                component: c,
                crlb: b.as_array()[c.index()],
            });
        }
    }
    Ok(rows)
}

pub fn write_crlb_csv(out: &mut dyn Write, rows: &[CrlbRow]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["snr_db", "component", "crlb"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([fmt_f64(r.snr_db), r.component.to_string(), fmt_f64(r.crlb)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_gains_csv(out: &mut dyn Write, rows: &[GainRow]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["snr_db", "component", "gain_pct"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([fmt_f64(r.snr_db), r.component.to_string(), fmt_f64(r.gain_pct)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Gains laid out with SNR across and components down, two decimals.
pub fn render_gains_text(rows: &[GainRow]) -> String {
    let mut snrs: Vec<f64> = Vec::new();
    for r in rows {
        if !snrs.contains(&r.snr_db) {
            snrs.push(r.snr_db);
        }
    }
    let mut s = format!("{:<12}", "SNR (dB)");
    for snr in &snrs {
        s.push_str(&format!("{:>9}", format!("{snr}")));
    }
    s.push('\n');
    for c in Component::ALL {
        s.push_str(&format!("{:<12}", format!("gain {c} %")));
        for snr in &snrs {
            match rows.iter().find(|r| r.snr_db == *snr && r.component == c) {
                Some(r) => s.push_str(&format!("{:>9.2}", r.gain_pct)),
                None => s.push_str(&format!("{:>9}", "-")),
            }
        }
        s.push('\n');
    }
    s
}

/// One row per iteration, including the initial multipliers.
pub fn write_trace_csv(out: &mut dyn Write, trace: &EstimationResult) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["iteration", "lambda", "delta", "re_h", "im_h", "re_eta", "im_eta"])
        .map_err(csv_err)?;
    for t in 0..=trace.iterations {
        let x = trace.iterate_trace[t];
        w.write_record([
            t.to_string(),
            fmt_f64(trace.lambda_trace[t]),
            fmt_f64(trace.delta_trace[t]),
            fmt_f64(x.h.re),
            fmt_f64(x.h.im),
            fmt_f64(x.eta.re),
            fmt_f64(x.eta.im),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
