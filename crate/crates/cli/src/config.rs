//! Run configuration: flat `key=value` text with command-specific defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use noisydk_core::{AverageSpec, DKParams, NoiseKind, NoiseSpec, T0Measure, Variant};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fig2Panel {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fig3Panel {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Command {
    Fig2(Fig2Panel),
    Fig3(Fig3Panel),
    Verify,
    Sweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Fig2(Fig2Panel::A) => "fig2 a",
            Command::Fig2(Fig2Panel::B) => "fig2 b",
            Command::Fig2(Fig2Panel::C) => "fig2 c",
            Command::Fig2(Fig2Panel::D) => "fig2 d",
            Command::Fig3(Fig3Panel::A) => "fig3 a",
            Command::Fig3(Fig3Panel::B) => "fig3 b",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        };
        f.write_str(s)
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        Ok(match words.as_slice() {
            ["fig2", "a"] => Command::Fig2(Fig2Panel::A),
            ["fig2", "b"] => Command::Fig2(Fig2Panel::B),
            ["fig2", "c"] => Command::Fig2(Fig2Panel::C),
            ["fig2", "d"] => Command::Fig2(Fig2Panel::D),
            ["fig3", "a"] => Command::Fig3(Fig3Panel::A),
            ["fig3", "b"] => Command::Fig3(Fig3Panel::B),
            ["verify"] => Command::Verify,
            ["sweep"] => Command::Sweep,
            _ => return Err(format!("unknown command `{s}`")),
        })
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self {
                    $($name::$variant => $text),+
                })
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => {
                        let names: Vec<String> = Self::ALL.iter().map(|v| v.to_string()).collect();
                        Err(format!("expected one of {}", names.join("|")))
                    }
                }
            }
        }
    };
}

keyword_enum!(Axis {
    Delta0 => "delta0",
    Delta1 => "delta1",
    J => "j",
    T0 => "t0",
    TauC => "tau-c",
    Sigma => "sigma",
});

keyword_enum!(Operation {
    NoiseFree => "noise-free",
    AllenEberly => "ae",
    RosenZener => "rz",
    Telegraph => "telegraph",
    TelegraphAverage => "telegraph-avg",
    Gaussian => "gaussian",
    GaussianAverage => "gaussian-avg",
    GaussianJAverage => "gaussian-j-avg",
    MonteCarlo => "monte-carlo",
    Oracle => "oracle",
});

keyword_enum!(Format {
    Csv => "csv",
    Json => "json",
});

keyword_enum!(Measure {
    Normalized => "normalized",
    PerTauC => "per-tau-c",
});

impl Operation {
    pub fn accepts(self, axis: Axis) -> bool {
        use Axis::*;
        use Operation::*;
        match (self, axis) {
            (AllenEberly, Delta0) | (RosenZener, Delta1) => false,
            (_, Delta0 | Delta1) => true,
            (MonteCarlo, J) => false,
            (_, J) => true,
            (Telegraph | Gaussian, T0) => true,
            (TelegraphAverage | GaussianAverage | GaussianJAverage | MonteCarlo, TauC) => true,
            (MonteCarlo, Sigma) => true,
            _ => false,
        }
    }
}

/// Everything a run depends on. Two equal configs produce identical output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub delta0: f64,
    pub delta1: f64,
    pub j: f64,
    pub t_cap: f64,
    pub t0: f64,
    pub noise: NoiseKind,
    pub tau_c: f64,
    pub sigma: f64,
    /// Half-width of the switch-time window in units of `tau_c`.
    pub window: f64,
    pub t0_points: usize,
    pub j_sigma: f64,
    pub quad_order: usize,
    pub trajectories: usize,
    pub avg_tol: f64,
    pub measure: Measure,
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub operation: Operation,
    pub j_values: Vec<f64>,
    /// Oracle cross-check on every n-th row of figure-3 tables; 0 disables.
    pub oracle_stride: usize,
    pub seed: u64,
    pub t_max: f64,
    pub tol: f64,
    pub variant: Variant,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// Recognised keys, in the order the resolved block lists them.
pub const KEYS: &[&str] = &[
    "command",
    "delta0",
    "delta1",
    "j",
    "t-cap",
    "t0",
    "noise",
    "tau-c",
    "sigma",
    "window",
    "t0-points",
    "j-sigma",
    "quad-order",
    "trajectories",
    "avg-tol",
    "measure",
    "axis",
    "lo",
    "hi",
    "points",
    "operation",
    "j-values",
    "oracle-stride",
    "seed",
    "t-max",
    "tol",
    "variant",
    "format",
    "out",
];

fn invalid(key: &str, msg: impl Into<String>) -> CliError {
    CliError::InvalidValue {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e: T::Err| invalid(key, format!("`{value}`: {e}")))
}

fn format_list(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let mut c = RunConfig {
            command,
            delta0: 4.0,
            delta1: 5.0,
            j: PI / 2.0,
            t_cap: 1.0,
            t0: 0.0,
            noise: NoiseKind::Telegraph,
            tau_c: 1.0,
            sigma: PI / 2.0,
            window: 5.0,
            t0_points: 41,
            j_sigma: 1.0,
            quad_order: 16,
            trajectories: 1000,
            avg_tol: 1e-6,
            measure: Measure::Normalized,
            axis: Axis::Delta1,
            lo: 0.0,
            hi: 8.0,
            points: 41,
            operation: Operation::NoiseFree,
            j_values: vec![1.0, 2.0, 3.0],
            oracle_stride: 5,
            seed: 0,
            t_max: 25.0,
            tol: 1e-10,
            variant: Variant::Validated,
            format: Format::Csv,
            out: None,
        };
        match command {
            Command::Fig2(Fig2Panel::A | Fig2Panel::B) => {
                c.axis = Axis::T0;
                c.lo = -10.0;
                c.hi = 10.0;
                c.points = 201;
            }
            Command::Fig3(_) => {
                c.lo = 2.0;
                c.hi = 7.0;
                c.points = 26;
            }
            _ => {}
        }
        c
    }

    /// Defaults for the command named in `pairs`, then every pair in order.
    pub fn from_pairs<'a, I>(command: Option<Command>, pairs: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let pairs: Vec<(&str, &str)> = pairs.into_iter().collect();
        let named = pairs
            .iter()
            .rev()
            .find(|(k, _)| *k == "command")
            .map(|(_, v)| parse::<Command>("command", v))
            .transpose()?;
        let command = command
            .or(named)
            .ok_or_else(|| invalid("command", "no command given"))?;
        let mut c = Self::defaults(command);
        for (k, v) in pairs {
            if k != "command" {
                c.set(k, v)?;
            }
        }
        c.validate()?;
        Ok(c)
    }

    /// Parses `key=value` lines; `#` starts a comment.
    pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Malformed {
                line: i + 1,
                text: raw.to_string(),
            })?;
            let key = k.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::UnknownKey(key.to_string()));
            }
            out.push((key.to_string(), v.trim().to_string()));
        }
        Ok(out)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "command" => self.command = parse(key, value)?,
            "delta0" => self.delta0 = parse(key, value)?,
            "delta1" => self.delta1 = parse(key, value)?,
            "j" => self.j = parse(key, value)?,
            "t-cap" => self.t_cap = parse(key, value)?,
            "t0" => self.t0 = parse(key, value)?,
            "noise" => self.noise = parse(key, value)?,
            "tau-c" => self.tau_c = parse(key, value)?,
            "sigma" => self.sigma = parse(key, value)?,
            "window" => self.window = parse(key, value)?,
            "t0-points" => self.t0_points = parse(key, value)?,
            "j-sigma" => self.j_sigma = parse(key, value)?,
            "quad-order" => self.quad_order = parse(key, value)?,
            "trajectories" => self.trajectories = parse(key, value)?,
            "avg-tol" => self.avg_tol = parse(key, value)?,
            "measure" => self.measure = parse(key, value)?,
            "axis" => self.axis = parse(key, value)?,
            "lo" => self.lo = parse(key, value)?,
            "hi" => self.hi = parse(key, value)?,
            "points" => self.points = parse(key, value)?,
            "operation" => self.operation = parse(key, value)?,
            "j-values" => {
                self.j_values = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse(key, s))
                    .collect::<Result<_, _>>()?
            }
            "oracle-stride" => self.oracle_stride = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "t-max" => self.t_max = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "variant" => self.variant = parse(key, value)?,
            "format" => self.format = parse(key, value)?,
            "out" => {
                self.out = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            other => return Err(CliError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// The resolved configuration as `(key, value)` pairs, in [`KEYS`] order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|&k| {
                let v = match k {
                    "command" => self.command.to_string(),
                    "delta0" => self.delta0.to_string(),
                    "delta1" => self.delta1.to_string(),
                    "j" => self.j.to_string(),
                    "t-cap" => self.t_cap.to_string(),
                    "t0" => self.t0.to_string(),
                    "noise" => self.noise.to_string(),
                    "tau-c" => self.tau_c.to_string(),
                    "sigma" => self.sigma.to_string(),
                    "window" => self.window.to_string(),
                    "t0-points" => self.t0_points.to_string(),
                    "j-sigma" => self.j_sigma.to_string(),
                    "quad-order" => self.quad_order.to_string(),
                    "trajectories" => self.trajectories.to_string(),
                    "avg-tol" => self.avg_tol.to_string(),
                    "measure" => self.measure.to_string(),
                    "axis" => self.axis.to_string(),
                    "lo" => self.lo.to_string(),
                    "hi" => self.hi.to_string(),
                    "points" => self.points.to_string(),
                    "operation" => self.operation.to_string(),
                    "j-values" => format_list(&self.j_values),
                    "oracle-stride" => self.oracle_stride.to_string(),
                    "seed" => self.seed.to_string(),
                    "t-max" => self.t_max.to_string(),
                    "tol" => self.tol.to_string(),
                    "variant" => self.variant.to_string(),
                    "format" => self.format.to_string(),
                    "out" => self
                        .out
                        .as_ref()
                        .map(|p| p.display().to_string())
                        .unwrap_or_default(),
                    _ => unreachable!("every key is listed"),
                };
                (k, v)
            })
            .collect()
    }

    pub fn to_kv(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params()
            .map_err(|e| invalid("delta0/delta1/j/t-cap", e.to_string()))?;
        let finite = [
            ("t0", self.t0, false),
            ("lo", self.lo, true),
            ("hi", self.hi, true),
        ];
        for (key, v, must_be_finite) in finite {
            if v.is_nan() || (must_be_finite && v.is_infinite()) {
                return Err(invalid(key, format!("{v} is not allowed")));
            }
        }
        let positive = [
            ("tau-c", self.tau_c),
            ("window", self.window),
            ("j-sigma", self.j_sigma),
            ("avg-tol", self.avg_tol),
            ("tol", self.tol),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(
                    key,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid(
                "sigma",
                format!("must be non-negative, got {}", self.sigma),
            ));
        }
        if !(self.t_max >= 10.0 * self.t_cap && self.t_max.is_finite()) {
            return Err(invalid("t-max", "must be finite and at least 10 t-cap"));
        }
        if self.points < 2 {
            return Err(invalid("points", "at least 2 sweep points are required"));
        }
        if self.lo > self.hi {
            return Err(invalid("lo", "must not exceed hi"));
        }
        if self.t0_points < 3 {
            return Err(invalid("t0-points", "must be at least 3"));
        }
        if self.quad_order < 2 {
            return Err(invalid("quad-order", "must be at least 2"));
        }
        if self.trajectories < 1 {
            return Err(invalid("trajectories", "must be at least 1"));
        }
        if self.j_values.iter().any(|j| !j.is_finite()) {
            return Err(invalid("j-values", "entries must be finite"));
        }
        let expected_axis = match self.command {
            Command::Fig2(Fig2Panel::A | Fig2Panel::B) => Some(Axis::T0),
            Command::Fig2(_) | Command::Fig3(_) => Some(Axis::Delta1),
            _ => None,
        };
        if let Some(axis) = expected_axis {
            if self.axis != axis {
                return Err(invalid("axis", format!("{} sweeps {axis}", self.command)));
            }
        }
        if self.command == Command::Fig3(Fig3Panel::A) && self.j_values.is_empty() {
            return Err(invalid("j-values", "fig3 a needs at least one coupling"));
        }
        if self.command == Command::Sweep && !self.operation.accepts(self.axis) {
            return Err(invalid(
                "axis",
                format!(
                    "operation {} cannot be swept along {}",
                    self.operation, self.axis
                ),
            ));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<DKParams, noisydk_core::ModelError> {
        DKParams::new(self.delta0, self.delta1, self.j, self.t_cap)
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            kind: self.noise,
            tau_c: self.tau_c,
            sigma: self.sigma,
            seed: self.seed,
        }
    }

    pub fn average_spec(&self) -> AverageSpec {
        AverageSpec {
            t0_window: (-self.window * self.tau_c, self.window * self.tau_c),
            t0_points: self.t0_points,
            j_sigma: self.j_sigma,
            quad_order: self.quad_order,
            mc_trajectories: self.trajectories,
            seed: self.seed,
            measure: match self.measure {
                Measure::Normalized => T0Measure::Normalized,
                Measure::PerTauC => T0Measure::PerTauC(self.tau_c),
            },
            tol: self.avg_tol,
        }
    }

    /// Sweep values, ascending, with both ends exact.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|k| {
                if k == n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * k as f64 / n as f64
                }
            })
            .collect()
    }
}

/// Resolved configuration as a sorted map, for output metadata.
pub fn meta_map(c: &RunConfig) -> BTreeMap<&'static str, String> {
    c.to_pairs().into_iter().collect()
}
