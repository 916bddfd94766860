//! Run configuration: a flat `key=value` file, overridden by flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Kernel,
    Solve,
    Verify,
    Evolve,
    Sweep,
    Appendix,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// A configuration problem; always maps to exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Partially specified configuration, as read from one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Partial {
    pub command: Option<Command>,
    pub c: Option<f64>,
    pub c_list: Option<Vec<f64>>,
    pub half_length: Option<f64>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub window: Option<(f64, f64)>,
    pub input: Option<PathBuf>,
    pub all: Option<bool>,
}

impl Partial {
    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: Partial) -> Partial {
        Partial {
            command: over.command.or(self.command),
            c: over.c.or(self.c),
            c_list: over.c_list.or(self.c_list),
            half_length: over.half_length.or(self.half_length),
            n: over.n.or(self.n),
            tol: over.tol.or(self.tol),
            dt: over.dt.or(self.dt),
            t_end: over.t_end.or(self.t_end),
            out: over.out.or(self.out),
            seed: over.seed.or(self.seed),
            window: over.window.or(self.window),
            input: over.input.or(self.input),
            all: over.all.or(self.all),
        }
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect()
}

pub fn parse_window(s: &str) -> Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected two comma-separated numbers, got '{s}'")),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true/false, got '{s}'")),
    }
}

fn wrap<T>(line: usize, key: &str, r: Result<T, String>) -> Result<T, ConfigError> {
    r.map_err(|e| ConfigError(format!("line {line}: field '{key}': {e}")))
}

fn field<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| ConfigError(format!("line {line}: field '{key}': {e}")))
}

/// Parses the text of a configuration file.
pub fn parse_config(text: &str) -> Result<Partial, ConfigError> {
    let mut p = Partial::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {line}: expected key=value, got '{body}'")))?;
        let (key, v) = (key.trim(), value.trim());
        match key {
            "command" => p.command = Some(field(line, key, v)?),
            "c" => p.c = Some(field(line, key, v)?),
            "c-list" | "c_list" => p.c_list = Some(wrap(line, key, parse_list(v))?),
            "L" => p.half_length = Some(field(line, key, v)?),
            "N" => p.n = Some(field(line, key, v)?),
            "tol" => p.tol = Some(field(line, key, v)?),
            "dt" => p.dt = Some(field(line, key, v)?),
            "T" => p.t_end = Some(field(line, key, v)?),
            "out" => p.out = Some(PathBuf::from(v)),
            "seed" => p.seed = Some(field(line, key, v)?),
            "window" => p.window = Some(wrap(line, key, parse_window(v))?),
            "input" => p.input = Some(PathBuf::from(v)),
            "all" => p.all = Some(wrap(line, key, parse_bool(v))?),
            _ => return Err(ConfigError(format!("line {line}: unknown field '{key}'"))),
        }
    }
    Ok(p)
}

pub fn read_config(path: &Path) -> Result<Partial, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub c: Option<f64>,
    pub c_list: Vec<f64>,
    pub half_length: f64,
    pub n: usize,
    pub tol: f64,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub window: Option<(f64, f64)>,
    pub input: Option<PathBuf>,
    pub all: bool,
}

pub const DEFAULT_L: f64 = 200.0;
pub const DEFAULT_N: usize = 1 << 16;
pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_T: f64 = 10.0;

impl RunConfig {
    pub fn resolve(p: Partial) -> Result<Self, ConfigError> {
        let command = p
            .command
            .ok_or_else(|| ConfigError("no command given (kernel, solve, verify, evolve, sweep, appendix)".into()))?;
        let cfg = RunConfig {
            command,
            c: p.c,
            c_list: p.c_list.unwrap_or_default(),
            half_length: p.half_length.unwrap_or(DEFAULT_L),
            n: p.n.unwrap_or(DEFAULT_N),
            tol: p.tol.unwrap_or(DEFAULT_TOL),
            dt: p.dt,
            t_end: p.t_end.unwrap_or(DEFAULT_T),
            out: p.out.unwrap_or_else(|| PathBuf::from("out")),
            seed: p.seed.unwrap_or(0),
            window: p.window,
            input: p.input,
            all: p.all.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        let speeds = self.c.iter().chain(&self.c_list);
        for &c in speeds {
            if !(c.is_finite() && c > 1.0) {
                return bad(format!("supercritical speed required: c > 1 (got {c})"));
            }
            if c > 3.0 && self.command != Command::Kernel {
                return bad(format!("field 'c': {c} outside (1, 3]"));
            }
        }
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return bad(format!("field 'L': must be positive (got {})", self.half_length));
        }
        if self.n < 16 || !self.n.is_power_of_two() {
            return bad(format!("field 'N': must be a power of two >= 16 (got {})", self.n));
        }
        if !(self.tol >= 1e-13) {
            return bad(format!("field 'tol': must be >= 1e-13 (got {})", self.tol));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad(format!("field 'dt': must be positive (got {dt})"));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("field 'T': must be >= 0 (got {})", self.t_end));
        }
        if let Some((a, b)) = self.window {
            if !(a < b) {
                return bad(format!("field 'window': need x_lo < x_hi (got {a}, {b})"));
            }
        }
        if self.c_list.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("field 'c-list': speeds must be strictly ascending".into());
        }
        let needs_c = matches!(self.command, Command::Solve | Command::Evolve)
            || (self.command == Command::Verify && self.input.is_none());
        if needs_c && self.c.is_none() {
            return bad("field 'c': required for this command".into());
        }
        if self.command == Command::Sweep && self.c_list.is_empty() {
            return bad("field 'c-list': required for sweep".into());
        }
        if self.command == Command::Kernel && self.c.is_none() && self.c_list.is_empty() {
            return bad("field 'c': kernel needs c or c-list".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let p = parse_config("# run\ncommand = solve\nc = 1.1 # speed\nN=4096\nwindow=2,8\n").unwrap();
        assert_eq!(p.command, Some(Command::Solve));
        assert_eq!(p.c, Some(1.1));
        assert_eq!(p.n, Some(4096));
        assert_eq!(p.window, Some((2.0, 8.0)));
    }

    #[test]
    fn reports_line_and_field() {
        let e = parse_config("c=1.1\nN=lots\n").unwrap_err();
        assert!(e.0.starts_with("line 2: field 'N'"), "{e}");
        let e = parse_config("speed=2\n").unwrap_err();
        assert_eq!(e.0, "line 1: unknown field 'speed'");
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("command=solve\nc=1.2\nL=50\n").unwrap();
        let flags = Partial {
            c: Some(1.1),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(file.merge(flags)).unwrap();
        assert_eq!(cfg.c, Some(1.1));
        assert_eq!(cfg.half_length, 50.0);
    }

    #[test]
    fn subcritical_speed_is_rejected() {
        let p = Partial {
            command: Some(Command::Solve),
            c: Some(0.9),
            ..Default::default()
        };
        let e = RunConfig::resolve(p).unwrap_err();
        assert!(e.0.starts_with("supercritical speed required: c > 1"));
    }
}
