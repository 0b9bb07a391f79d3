//! Flat `key = value` configuration files with `#` comments.
//!
//! Values are numbers with an optional unit suffix, sweep specifications,
//! or bare words. Frequencies accept the `MHz_2pi` family of suffixes,
//! meaning the quoted value is `omega / 2 pi`; internal storage is rad/s.
//! Unitless numbers on frequency-typed keys default to `MHz_2pi`, matching
//! how every rate is usually quoted.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::CliError;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    None,
    AngularFrequency,
    Length,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
    pub unit: Unit,
}

impl SweepSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = self.count as f64 - 1.0;
        (0..self.count)
            .map(|k| {
                if self.log {
                    let la = self.start.ln();
                    let lb = self.stop.ln();
                    (la + (lb - la) * k as f64 / n).exp()
                } else {
                    self.start + (self.stop - self.start) * k as f64 / n
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum Value {
    Number { value: f64, unit: Unit },
    Sweep(SweepSpec),
    Word(String),
}

/// Parse a numeric token with optional unit suffix, e.g. `34 MHz_2pi`,
/// `5 um`, `0.25`.
fn parse_number(tokens: &[&str], line_no: usize) -> Result<(f64, Unit), CliError> {
    if tokens.is_empty() || tokens.len() > 2 {
        return Err(CliError::config(format!(
            "line {line_no}: expected `number [unit]`, got `{}`",
            tokens.join(" ")
        )));
    }
    let value: f64 = tokens[0].parse().map_err(|_| {
        CliError::config(format!("line {line_no}: `{}` is not a number", tokens[0]))
    })?;
    if tokens.len() == 1 {
        return Ok((value, Unit::None));
    }
    let (scale, unit) = match tokens[1] {
        "Hz_2pi" => (TWO_PI, Unit::AngularFrequency),
        "kHz_2pi" => (TWO_PI * 1e3, Unit::AngularFrequency),
        "MHz_2pi" => (TWO_PI * 1e6, Unit::AngularFrequency),
        "GHz_2pi" => (TWO_PI * 1e9, Unit::AngularFrequency),
        "rad_s" => (1.0, Unit::AngularFrequency),
        "m" => (1.0, Unit::Length),
        "um" => (1e-6, Unit::Length),
        "nm" => (1e-9, Unit::Length),
        other => {
            return Err(CliError::config(format!(
                "line {line_no}: unknown unit `{other}`"
            )))
        }
    };
    Ok((value * scale, unit))
}

fn parse_value(raw: &str, line_no: usize) -> Result<Value, CliError> {
    let raw = raw.trim();
    if let Some(inner) = raw
        .strip_prefix("sweep(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(CliError::config(format!(
                "line {line_no}: sweep needs `sweep(start, stop, count[, log])`"
            )));
        }
        let toks_a: Vec<&str> = parts[0].split_whitespace().collect();
        let toks_b: Vec<&str> = parts[1].split_whitespace().collect();
        let (start, ua) = parse_number(&toks_a, line_no)?;
        let (stop, ub) = parse_number(&toks_b, line_no)?;
        if ua != ub && ua != Unit::None && ub != Unit::None {
            return Err(CliError::config(format!(
                "line {line_no}: sweep endpoints carry different units"
            )));
        }
        let count: usize = parts[2].parse().map_err(|_| {
            CliError::config(format!(
                "line {line_no}: sweep count `{}` is not an integer",
                parts[2]
            ))
        })?;
        if count == 0 {
            return Err(CliError::config(format!(
                "line {line_no}: sweep count must be >= 1"
            )));
        }
        let log = match parts.get(3) {
            None => false,
            Some(&"log") => true,
            Some(&"linear") => false,
            Some(other) => {
                return Err(CliError::config(format!(
                    "line {line_no}: sweep scale must be `linear` or `log`, got `{other}`"
                )))
            }
        };
        if log && (start <= 0.0 || stop <= 0.0) {
            return Err(CliError::config(format!(
                "line {line_no}: log sweep needs positive endpoints"
            )));
        }
        let unit = if ua != Unit::None { ua } else { ub };
        return Ok(Value::Sweep(SweepSpec {
            start,
            stop,
            count,
            log,
            unit,
        }));
    }
    let tokens: Vec<&str> = raw.split_whitespace().collect();
    if tokens.len() <= 2 && !tokens.is_empty() && tokens[0].parse::<f64>().is_ok() {
        let (value, unit) = parse_number(&tokens, line_no)?;
        return Ok(Value::Number { value, unit });
    }
    Ok(Value::Word(raw.to_string()))
}

/// Parsed configuration file: ordered key/value pairs plus bookkeeping of
/// which keys a scenario actually consumed.
#[derive(Debug, Default)]
pub struct Config {
    values: HashMap<String, Value>,
    order: Vec<String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "line {line_no}: expected `key = value`, got `{line}`"
                )));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CliError::config(format!("line {line_no}: empty key")));
            }
            if cfg.values.contains_key(&key) {
                return Err(CliError::config(format!(
                    "line {line_no}: duplicate key `{key}`"
                )));
            }
            let value = parse_value(value, line_no)?;
            cfg.order.push(key.clone());
            cfg.values.insert(key, value);
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Resolves scenario parameters from CLI flags (which win) and the config
/// file, recording every resolved value for the reproducibility header and
/// rejecting config keys the scenario does not know.
pub struct Resolver {
    cfg: Config,
    used: HashSet<String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(cfg: Config) -> Self {
        Resolver {
            cfg,
            used: HashSet::new(),
            resolved: BTreeMap::new(),
        }
    }

    /// Consume a config key (marking it as known to this scenario) and
    /// return its value, if present.
    fn take(&mut self, key: &str) -> Option<Value> {
        let v = self.cfg.values.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn record(&mut self, key: &str, text: String) {
        self.resolved.insert(key.to_string(), text);
    }

    /// Angular frequency in rad/s. CLI values and unitless config numbers
    /// are interpreted as MHz_2pi.
    pub fn freq(&mut self, key: &str, cli: Option<f64>, default: Option<f64>) -> Result<f64, CliError> {
        let from_cfg = self.take(key);
        let value = if let Some(v) = cli {
            Some(v * TWO_PI * 1e6)
        } else {
            match from_cfg {
                Some(Value::Number { value, unit }) => match unit {
                    Unit::AngularFrequency => Some(value),
                    Unit::None => Some(value * TWO_PI * 1e6),
                    Unit::Length => {
                        return Err(CliError::config(format!(
                            "key `{key}` expects a frequency, got a length"
                        )))
                    }
                },
                Some(_) => {
                    return Err(CliError::config(format!(
                        "key `{key}` expects a frequency value"
                    )))
                }
                None => default,
            }
        };
        let value = value
            .ok_or_else(|| CliError::config(format!("missing required key `{key}`")))?;
        self.record(key, format!("{value} rad_s"));
        Ok(value)
    }

    /// Length in meters. CLI values and unitless config numbers are
    /// interpreted as micrometers.
    pub fn length_um(&mut self, key: &str, cli: Option<f64>, default: Option<f64>) -> Result<f64, CliError> {
        let from_cfg = self.take(key);
        let value = if let Some(v) = cli {
            Some(v * 1e-6)
        } else {
            match from_cfg {
                Some(Value::Number { value, unit }) => match unit {
                    Unit::Length => Some(value),
                    Unit::None => Some(value * 1e-6),
                    Unit::AngularFrequency => {
                        return Err(CliError::config(format!(
                            "key `{key}` expects a length, got a frequency"
                        )))
                    }
                },
                Some(_) => {
                    return Err(CliError::config(format!(
                        "key `{key}` expects a length value"
                    )))
                }
                None => default,
            }
        };
        let value = value
            .ok_or_else(|| CliError::config(format!("missing required key `{key}`")))?;
        self.record(key, format!("{value} m"));
        Ok(value)
    }

    /// Dimensionless number.
    pub fn plain(&mut self, key: &str, cli: Option<f64>, default: Option<f64>) -> Result<f64, CliError> {
        let from_cfg = self.take(key);
        let value = if let Some(v) = cli {
            Some(v)
        } else {
            match from_cfg {
                Some(Value::Number {
                    value,
                    unit: Unit::None,
                }) => Some(value),
                Some(Value::Number { .. }) => {
                    return Err(CliError::config(format!(
                        "key `{key}` expects a dimensionless number"
                    )))
                }
                Some(_) => {
                    return Err(CliError::config(format!("key `{key}` expects a number")))
                }
                None => default,
            }
        };
        let value = value
            .ok_or_else(|| CliError::config(format!("missing required key `{key}`")))?;
        self.record(key, format!("{value}"));
        Ok(value)
    }

    pub fn count(&mut self, key: &str, cli: Option<usize>, default: Option<usize>) -> Result<usize, CliError> {
        if let Some(v) = cli {
            let _ = self.take(key);
            self.record(key, format!("{v}"));
            return Ok(v);
        }
        let v = self.plain(key, None, default.map(|d| d as f64))?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(CliError::config(format!(
                "key `{key}` expects a non-negative integer, got {v}"
            )));
        }
        self.record(key, format!("{}", v as usize));
        Ok(v as usize)
    }

    pub fn word(&mut self, key: &str, cli: Option<String>, default: Option<&str>) -> Result<String, CliError> {
        let from_cfg = self.take(key);
        let value = if let Some(v) = cli {
            Some(v)
        } else {
            match from_cfg {
                Some(Value::Word(w)) => Some(w),
                Some(_) => {
                    return Err(CliError::config(format!("key `{key}` expects a word")))
                }
                None => default.map(str::to_string),
            }
        };
        let value = value
            .ok_or_else(|| CliError::config(format!("missing required key `{key}`")))?;
        self.record(key, value.clone());
        Ok(value)
    }

    /// Sweep specification; CLI syntax `start:stop:count[:log]`.
    pub fn sweep(
        &mut self,
        key: &str,
        cli: Option<&str>,
        default: Option<SweepSpec>,
    ) -> Result<SweepSpec, CliError> {
        let from_cfg = self.take(key);
        let spec = if let Some(text) = cli {
            let parts: Vec<&str> = text.split(':').collect();
            if !(3..=4).contains(&parts.len()) {
                return Err(CliError::config(format!(
                    "flag sweep `{text}` needs start:stop:count[:log]"
                )));
            }
            let start: f64 = parts[0]
                .parse()
                .map_err(|_| CliError::config(format!("bad sweep start `{}`", parts[0])))?;
            let stop: f64 = parts[1]
                .parse()
                .map_err(|_| CliError::config(format!("bad sweep stop `{}`", parts[1])))?;
            let count: usize = parts[2]
                .parse()
                .map_err(|_| CliError::config(format!("bad sweep count `{}`", parts[2])))?;
            if count == 0 {
                return Err(CliError::config("sweep count must be >= 1".into()));
            }
            let log = parts.get(3) == Some(&"log");
            SweepSpec {
                start,
                stop,
                count,
                log,
                unit: Unit::None,
            }
        } else {
            match from_cfg {
                Some(Value::Sweep(s)) => s,
                Some(_) => {
                    return Err(CliError::config(format!(
                        "key `{key}` expects a sweep(start, stop, count[, log])"
                    )))
                }
                None => default.ok_or_else(|| {
                    CliError::config(format!("missing required sweep key `{key}`"))
                })?,
            }
        };
        let scale = if spec.log { "log" } else { "linear" };
        self.record(
            key,
            format!("sweep({}, {}, {}, {scale})", spec.start, spec.stop, spec.count),
        );
        Ok(spec)
    }

    /// Resolve a value but keep it out of the reproducibility echo (used
    /// for bookkeeping keys the CSV header handles separately).
    pub fn silent_count(
        &mut self,
        key: &str,
        cli: Option<usize>,
        default: usize,
    ) -> Result<usize, CliError> {
        let v = self.count(key, cli, Some(default))?;
        self.resolved.remove(key);
        Ok(v)
    }

    /// As [`Self::silent_count`] for word values.
    pub fn silent_word(
        &mut self,
        key: &str,
        cli: Option<String>,
        default: &str,
    ) -> Result<String, CliError> {
        let v = self.word(key, cli, Some(default))?;
        self.resolved.remove(key);
        Ok(v)
    }

    /// Reject config keys the scenario never consumed and hand back the
    /// resolved-parameter echo map.
    pub fn finish(self) -> Result<BTreeMap<String, String>, CliError> {
        let unknown: Vec<&String> = self
            .cfg
            .order
            .iter()
            .filter(|k| !self.used.contains(*k))
            .collect();
        if !unknown.is_empty() {
            let mut msg = String::from("unknown config key(s): ");
            for (i, k) in unknown.iter().enumerate() {
                if i > 0 {
                    msg.push_str(", ");
                }
                let _ = write!(msg, "`{k}`");
            }
            return Err(CliError::config(msg));
        }
        Ok(self.resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_numbers_units_and_sweeps() {
        let cfg = Config::parse(
            "# comment\n\
             g = 34 MHz_2pi\n\
             r = sweep(1 um, 10 um, 10)\n\
             mode = lockstep\n\
             count = 3\n",
        )
        .unwrap();
        let mut r = Resolver::new(cfg);
        let g = r.freq("g", None, None).unwrap();
        assert!((g - 34.0 * TWO_PI * 1e6).abs() < 1.0);
        let sweep = r.sweep("r", None, None).unwrap();
        assert_eq!(sweep.count, 10);
        assert!((sweep.start - 1e-6).abs() < 1e-18);
        assert_eq!(r.word("mode", None, None).unwrap(), "lockstep");
        assert_eq!(r.count("count", None, None).unwrap(), 3);
        r.finish().unwrap();
    }

    #[test]
    fn unknown_key_is_named() {
        let cfg = Config::parse("g = 1\nbogus = 2\n").unwrap();
        let mut r = Resolver::new(cfg);
        r.freq("g", None, None).unwrap();
        let err = r.finish().unwrap_err();
        assert!(err.message.contains("bogus"), "{}", err.message);
    }

    #[test]
    fn unit_mismatch_rejected() {
        let cfg = Config::parse("g = 5 um\n").unwrap();
        let mut r = Resolver::new(cfg);
        assert!(r.freq("g", None, None).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Config::parse("a = 1\nnot a pair\n").unwrap_err();
        assert!(err.message.contains("line 2"), "{}", err.message);
        let err = Config::parse("a = 1\na = 2\n").unwrap_err();
        assert!(err.message.contains("duplicate"), "{}", err.message);
    }

    #[test]
    fn cli_flag_overrides_config() {
        let cfg = Config::parse("g = 1\n").unwrap();
        let mut r = Resolver::new(cfg);
        let g = r.freq("g", Some(2.0), None).unwrap();
        assert!((g - 2.0 * TWO_PI * 1e6).abs() < 1.0);
        r.finish().unwrap();
    }

    #[test]
    fn log_sweep_points() {
        let spec = SweepSpec {
            start: 1.0,
            stop: 100.0,
            count: 3,
            log: true,
            unit: Unit::None,
        };
        let pts = spec.points();
        assert!((pts[1] - 10.0).abs() < 1e-9);
    }
}
