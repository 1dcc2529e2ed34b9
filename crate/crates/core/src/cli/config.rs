//! `key = value` experiment configuration files.
//!
//! One setting per line, `#` starts a comment, lists are comma separated and
//! numbers may be written as simple fractions (`1/64`). Missing keys take the
//! reference values; unknown or repeated keys are errors.

use std::fmt::Write as _;

use crate::cli::fmt_f64;
use crate::error::{Error, Result};
use crate::estimators::StepSchedule;
use crate::harness::{Estimator, ExperimentConfig};

/// Trial count used when the file does not set `trials`.
pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    /// Set when `trials` was absent and [`DEFAULT_TRIALS`] was used.
    pub trials_defaulted: bool,
}

const KEYS: &[&str] = &[
    "sigma_h2",
    "sigma_f2",
    "sigma_g2",
    "n_elements",
    "k1",
    "k2",
    "snr_db",
    "trials",
    "seed",
    "estimators",
    "workers",
    "eps",
    "tau",
    "t_max",
    "tol",
    "lambda0",
    "delta0",
    "feas_tol",
    "schedule",
    "domain_margin",
    "max_backoffs",
];

fn parse_real(line: usize, key: &str, raw: &str) -> Result<f64> {
    let raw = raw.trim();
    let value = match raw.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad_value(line, key, raw))?;
            let den: f64 = den.trim().parse().map_err(|_| bad_value(line, key, raw))?;
            num / den
        }
        None => raw.parse().map_err(|_| bad_value(line, key, raw))?,
    };
    if !value.is_finite() {
        return Err(bad_value(line, key, raw));
    }
    Ok(value)
}

fn parse_int<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| bad_value(line, key, raw.trim()))
}

fn bad_value(line: usize, key: &str, raw: &str) -> Error {
    Error::config(line, format!("invalid value `{raw}` for `{key}`"))
}

fn split_list(raw: &str) -> impl Iterator<Item = &str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses a configuration file body.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    let mut trials_set = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::config(line, format!("expected `key = value`, found `{content}`")));
        };
        let key = key.trim();
        let value = value.trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::config(line, format!("unknown key `{key}`")));
        };
        if seen.contains(&known) {
            return Err(Error::config(line, format!("duplicate key `{key}`")));
        }
        seen.push(known);
        if value.is_empty() {
            return Err(Error::config(line, format!("missing value for `{key}`")));
        }

        let da = &mut cfg.dual_ascent;
        match known {
            "sigma_h2" => cfg.channel.sigma_h2 = parse_real(line, key, value)?,
            "sigma_f2" => cfg.channel.sigma_f2 = parse_real(line, key, value)?,
            "sigma_g2" => cfg.channel.sigma_g2 = parse_real(line, key, value)?,
            "n_elements" => cfg.channel.n_elements = parse_int(line, key, value)?,
            "k1" => cfg.k1 = parse_int(line, key, value)?,
            "k2" => cfg.k2 = parse_int(line, key, value)?,
            "snr_db" => {
                cfg.snr_db_list = split_list(value)
                    .map(|v| parse_real(line, key, v))
                    .collect::<Result<_>>()?;
            }
            "trials" => {
                cfg.trials = parse_int(line, key, value)?;
                trials_set = true;
            }
            "seed" => cfg.master_seed = parse_int(line, key, value)?,
            "estimators" => {
                let mut set: Vec<Estimator> = split_list(value)
                    .map(|v| v.parse().map_err(|_| bad_value(line, key, v)))
                    .collect::<Result<_>>()?;
                set.sort();
                set.dedup();
                cfg.estimators = set;
            }
            "workers" => cfg.workers = parse_int(line, key, value)?,
            "eps" => da.eps0 = parse_real(line, key, value)?,
            "tau" => da.tau0 = parse_real(line, key, value)?,
            "t_max" => da.t_max = parse_int(line, key, value)?,
            "tol" => da.tol = parse_real(line, key, value)?,
            "lambda0" => da.lambda0 = parse_real(line, key, value)?,
            "delta0" => da.delta0 = parse_real(line, key, value)?,
            "feas_tol" => da.feas_tol = parse_real(line, key, value)?,
            "schedule" => {
                da.schedule = match value {
                    "constant" => StepSchedule::Constant,
                    "diminishing" => StepSchedule::Diminishing,
                    _ => return Err(bad_value(line, key, value)),
                }
            }
            "domain_margin" => da.domain_margin = parse_real(line, key, value)?,
            "max_backoffs" => da.max_backoffs = parse_int(line, key, value)?,
            _ => unreachable!("key table and match arms disagree"),
        }
    }
    if !trials_set {
        cfg.trials = DEFAULT_TRIALS;
    }
    cfg.validate()?;
    Ok(ParsedConfig {
        config: cfg,
        trials_defaulted: !trials_set,
    })
}

/// Renders a configuration that [`parse_config`] reads back unchanged.
pub fn render_config(cfg: &ExperimentConfig) -> String {
    let da = &cfg.dual_ascent;
    let list = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ");
    let estimators = cfg.estimators.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(", ");
    let schedule = match da.schedule {
        StepSchedule::Constant => "constant",
        StepSchedule::Diminishing => "diminishing",
    };
    let mut s = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    put("sigma_h2", fmt_f64(cfg.channel.sigma_h2));
    put("sigma_f2", fmt_f64(cfg.channel.sigma_f2));
    put("sigma_g2", fmt_f64(cfg.channel.sigma_g2));
    put("n_elements", cfg.channel.n_elements.to_string());
    put("k1", cfg.k1.to_string());
    put("k2", cfg.k2.to_string());
    put("snr_db", list(&cfg.snr_db_list));
    put("trials", cfg.trials.to_string());
    put("seed", cfg.master_seed.to_string());
    put("estimators", estimators);
    put("workers", cfg.workers.to_string());
    put("eps", fmt_f64(da.eps0));
    put("tau", fmt_f64(da.tau0));
    put("t_max", da.t_max.to_string());
    put("tol", fmt_f64(da.tol));
    put("lambda0", fmt_f64(da.lambda0));
    put("delta0", fmt_f64(da.delta0));
    put("feas_tol", fmt_f64(da.feas_tol));
    put("schedule", schedule.to_string());
    put("domain_margin", fmt_f64(da.domain_margin));
    put("max_backoffs", da.max_backoffs.to_string());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_setup() {
        let p = parse_config("# nothing here\n\n").unwrap();
        assert!(p.trials_defaulted);
        assert_eq!(p.config, ExperimentConfig::default());
        assert_eq!(p.config.trials, DEFAULT_TRIALS);
    }

    #[test]
    fn parses_all_kinds_of_values() {
        let text = "\
sigma_h2 = 1/64   # direct channel
sigma_f2 = 0.04
snr_db = 0, 2.5 ,4
trials = 123
seed = 99
estimators = des
schedule = diminishing
t_max = 80
";
        let p = parse_config(text).unwrap();
        assert!(!p.trials_defaulted);
        let c = p.config;
        assert_eq!(c.channel.sigma_h2, 1.0 / 64.0);
        assert_eq!(c.channel.sigma_f2, 0.04);
        assert_eq!(c.snr_db_list, vec![0.0, 2.5, 4.0]);
        assert_eq!(c.trials, 123);
        assert_eq!(c.master_seed, 99);
        assert_eq!(c.estimators, vec![Estimator::Des]);
        assert_eq!(c.dual_ascent.schedule, StepSchedule::Diminishing);
        assert_eq!(c.dual_ascent.t_max, 80);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("trials = 10\nbogus = 1\n", 2),
            ("\n\nk1 = one\n", 3),
            ("k1 = 1\nk1 = 2\n", 2),
            ("snr_db\n", 1),
            ("tol =\n", 1),
            ("sigma_f2 = 1/0\n", 1),
        ];
        for (text, want) in cases {
            match parse_config(text) {
                Err(Error::Config { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn semantic_errors_are_reported() {
        assert!(matches!(parse_config("k2 = 0\n"), Err(Error::InvalidParameter(_))));
        assert!(matches!(parse_config("trials = 0\n"), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn render_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.channel.sigma_g2 = 1.0 / 9.0;
        cfg.snr_db_list = vec![-3.0, 0.1, 7.25];
        cfg.dual_ascent.tol = 1e-7;
        cfg.trials = 77;
        let back = parse_config(&render_config(&cfg)).unwrap();
        assert_eq!(back.config, cfg);
    }
}
