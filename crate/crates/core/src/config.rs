//! Run configuration: a flat `key = value` file, with command-line overrides
//! applied on top (later entries win).
//!
//! ```text
//! # comment
//! command = linear
//! profile = gate:1,0.1
//! times = 1,10,100
//! grid = -409.6,0.1,8192
//! ```

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::io;
use crate::kernel::{KernelMethod, KernelSpec};
use crate::nonlinear::NonlinearConfig;
use crate::profile::{ProfileSpec, Shape};
use crate::similarity::Normalisation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Attractor,
    Linear,
    Nonlinear,
    Converge,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Attractor => "attractor",
            Command::Linear => "linear",
            Command::Nonlinear => "nonlinear",
            Command::Converge => "converge",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attractor" => Ok(Command::Attractor),
            "linear" => Ok(Command::Linear),
            "nonlinear" => Ok(Command::Nonlinear),
            "converge" => Ok(Command::Converge),
            other => Err(Error::domain(format!("unknown command {other:?}"))),
        }
    }
}

/// Where a config entry came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

impl Entry {
    pub fn flag(key: &str, value: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            value: value.into(),
            origin: Origin::Flag,
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        let location = match self.origin {
            Origin::Line(n) => format!("line {n}, key {}", self.key),
            Origin::Flag => format!("--{}", self.key.replace('_', "-")),
        };
        Error::Config {
            location,
            msg: msg.to_string(),
        }
    }

    fn parse<T: std::str::FromStr>(&self) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.value.trim().parse::<T>().map_err(|e| self.err(e))
    }

    fn list<T: std::str::FromStr>(&self) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.value
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<T>().map_err(|e| self.err(e)))
            .collect()
    }
}

/// Splits a config file into entries. Blank lines and `#` comments are
/// skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
            location: format!("line {}", i + 1),
            msg: format!("expected key = value, got {line:?}"),
        })?;
        out.push(Entry {
            key: k.trim().replace('-', "_"),
            value: v.trim().to_string(),
            origin: Origin::Line(i + 1),
        });
    }
    Ok(out)
}

/// Nonlinear controls left unset fall back to [`NonlinearConfig::for_spacing`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NonlinearOverrides {
    pub dt_init: Option<f64>,
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
    pub newton_tol: Option<f64>,
    pub newton_max_iters: Option<usize>,
    pub dt_grow: Option<f64>,
    pub dt_shrink: Option<f64>,
}

impl NonlinearOverrides {
    pub fn resolve(&self, dx: f64) -> Result<NonlinearConfig> {
        let d = NonlinearConfig::for_spacing(dx);
        let cfg = NonlinearConfig {
            dt_init: self.dt_init.unwrap_or(d.dt_init),
            dt_min: self.dt_min.unwrap_or(d.dt_min),
            dt_max: self.dt_max.unwrap_or(d.dt_max),
            newton_tol: self.newton_tol.unwrap_or(d.newton_tol),
            newton_max_iters: self.newton_max_iters.unwrap_or(d.newton_max_iters),
            dt_grow: self.dt_grow.unwrap_or(d.dt_grow),
            dt_shrink: self.dt_shrink.unwrap_or(d.dt_shrink),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub m: u32,
    pub profile: ProfileSpec,
    pub times: Vec<f64>,
    /// `None` means auto-size from the profile and the latest time.
    pub grid: Option<Grid1D>,
    pub kernel: KernelSpec,
    pub nonlinear: NonlinearOverrides,
    pub output_dir: PathBuf,
    pub normalisation: Normalisation,
    /// Attractor sampling range `[-u_max, u_max]` and step.
    pub u_max: f64,
    pub du: f64,
    /// Extra derivative columns for the attractor table.
    pub derivs: Vec<u32>,
    /// Fit window for the decay rate; defaults to the full time range.
    pub rate_window: Option<(f64, f64)>,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            m: 2,
            profile: ProfileSpec {
                shape: Shape::Gate {
                    width: 1.0,
                    amplitude: 0.1,
                },
                center: 0.0,
            },
            times: vec![1.0, 10.0, 100.0, 1000.0],
            grid: None,
            kernel: KernelSpec::default(),
            nonlinear: NonlinearOverrides::default(),
            output_dir: PathBuf::from("."),
            normalisation: Normalisation::ByVolume,
            u_max: 10.0,
            du: 0.01,
            derivs: Vec::new(),
            rate_window: None,
        }
    }

    /// Builds a config from entries; `command` wins over any `command` key.
    pub fn from_entries(command: Option<Command>, entries: &[Entry]) -> Result<Self> {
        let file_command = entries
            .iter()
            .rev()
            .find(|e| e.key == "command")
            .map(|e| e.parse::<Command>())
            .transpose()?;
        let command = command.or(file_command).ok_or_else(|| Error::Config {
            location: "command".into(),
            msg: "no command given".into(),
        })?;
        let mut cfg = Self::defaults(command);
        let mut shape = None;
        let mut center = None;
        let (mut method, mut series_tol, mut quad_tol, mut u_switch) = (None, None, None, None);
        for e in entries {
            match e.key.as_str() {
                "command" => {}
                "m" => cfg.m = e.parse()?,
                "profile" => shape = Some(parse_shape(e)?),
                "center" => center = Some(e.parse::<f64>()?),
                "times" => cfg.times = e.list()?,
                "grid" => {
                    let v: Vec<f64> = e.list()?;
                    if v.len() != 3 || v[2].fract() != 0.0 || v[2] < 0.0 {
                        return Err(e.err("grid must be xmin,dx,n"));
                    }
                    cfg.grid = Some(Grid1D::new(v[0], v[1], v[2] as usize).map_err(|x| e.err(x))?);
                }
                "norm" => cfg.normalisation = e.parse()?,
                "out" => cfg.output_dir = PathBuf::from(e.value.trim()),
                "dt_init" => cfg.nonlinear.dt_init = Some(e.parse()?),
                "dt_min" => cfg.nonlinear.dt_min = Some(e.parse()?),
                "dt_max" => cfg.nonlinear.dt_max = Some(e.parse()?),
                "newton_tol" => cfg.nonlinear.newton_tol = Some(e.parse()?),
                "newton_max_iters" => cfg.nonlinear.newton_max_iters = Some(e.parse()?),
                "dt_grow" => cfg.nonlinear.dt_grow = Some(e.parse()?),
                "dt_shrink" => cfg.nonlinear.dt_shrink = Some(e.parse()?),
                "u_max" => cfg.u_max = e.parse()?,
                "du" => cfg.du = e.parse()?,
                "derivs" => cfg.derivs = e.list()?,
                "rate_window" => {
                    let v: Vec<f64> = e.list()?;
                    if v.len() != 2 || !(v[0] < v[1]) {
                        return Err(e.err("rate_window must be lo,hi with lo < hi"));
                    }
                    cfg.rate_window = Some((v[0], v[1]));
                }
                "method" => {
                    method = Some(match e.value.trim() {
                        "series" => KernelMethod::Series,
                        "quadrature" => KernelMethod::Quadrature,
                        "auto" => KernelMethod::Auto,
                        other => return Err(e.err(format!("unknown method {other:?}"))),
                    })
                }
                "series_tol" => series_tol = Some(e.parse()?),
                "quad_tol" => quad_tol = Some(e.parse()?),
                "u_switch" => u_switch = Some(e.parse()?),
                other => return Err(e.err(format!("unknown key {other:?}"))),
            }
        }
        let d = KernelSpec::default();
        let method = method.unwrap_or(if cfg.m == 2 {
            KernelMethod::Auto
        } else {
            KernelMethod::Quadrature
        });
        cfg.kernel = KernelSpec::new(
            cfg.m,
            method,
            series_tol.unwrap_or(d.series_tol()),
            quad_tol.unwrap_or(d.quad_tol()),
            u_switch.unwrap_or(d.u_switch()),
        )?;
        cfg.profile = ProfileSpec::new(
            shape.unwrap_or_else(|| cfg.profile.shape.clone()),
            center.unwrap_or(0.0),
        )?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Error::Config {
            location: "config".into(),
            msg: msg.into(),
        };
        if self.command != Command::Attractor {
            if self.times.is_empty() {
                return Err(bad("times must not be empty"));
            }
            if self.times.windows(2).any(|w| !(w[0] < w[1])) || !(self.times[0] > 0.0) {
                return Err(bad("times must be positive and strictly increasing"));
            }
        }
        if !(self.u_max > 0.0 && self.du > 0.0 && self.du <= self.u_max) {
            return Err(bad("need 0 < du <= u_max"));
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        self.times.last().copied().unwrap_or(1.0)
    }

    /// The configured grid, or one sized so kernel tails stay negligible at
    /// the edges up to the latest time.
    pub fn resolved_grid(&self) -> Result<Grid1D> {
        if let Some(g) = self.grid {
            return Ok(g);
        }
        match self.command {
            Command::Nonlinear => auto_grid_nonlinear(&self.profile, self.t_max(), self.m),
            _ => auto_grid_linear(&self.profile, self.t_max(), self.m),
        }
    }
}

fn parse_shape(e: &Entry) -> Result<Shape> {
    let v = e.value.trim();
    if let Some(path) = v.strip_prefix("custom:") {
        let samples = io::read_samples(std::path::Path::new(path.trim())).map_err(|x| e.err(x))?;
        return Ok(Shape::Custom(samples));
    }
    let shape = v.parse::<Shape>().map_err(|x| e.err(x))?;
    ProfileSpec::new(shape.clone(), 0.0).map_err(|x| e.err(x))?;
    Ok(shape)
}

/// Half-length `10·(support + 4·T_max^{1/(2m)})` at spacing
/// `min(0.1, support/10)`, rounded up to a power-of-two point count.
pub fn auto_grid_linear(profile: &ProfileSpec, t_max: f64, m: u32) -> Result<Grid1D> {
    let support = profile.extent() * 2.0;
    let dx = if support > 0.0 { (support / 10.0).min(0.1) } else { 0.1 };
    let half = 10.0 * (support + 4.0 * t_max.powf(1.0 / (2.0 * m as f64)));
    let n = ((2.0 * half / dx).ceil() as usize).next_power_of_two().max(64);
    Grid1D::centered(dx, n)
}

/// 512 points over `|X| <= extent + 24·T_max^{1/(2m)}`.
pub fn auto_grid_nonlinear(profile: &ProfileSpec, t_max: f64, m: u32) -> Result<Grid1D> {
    let n = 512;
    let half = profile.extent() + 24.0 * t_max.powf(1.0 / (2.0 * m as f64));
    Grid1D::centered(2.0 * half / n as f64, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let text = "# demo\ncommand = linear\nprofile = gaussian:0.1,0.5\ntimes = 1, 10\nm = 2 # inline\n";
        let mut entries = parse_config_text(text).unwrap();
        entries.push(Entry::flag("times", "2,20,200"));
        let cfg = RunConfig::from_entries(None, &entries).unwrap();
        assert_eq!(cfg.command, Command::Linear);
        assert_eq!(cfg.times, vec![2.0, 20.0, 200.0]);
        assert_eq!(
            cfg.profile.shape,
            Shape::Gaussian {
                volume: 0.1,
                std_dev: 0.5
            }
        );
    }

    #[test]
    fn errors_name_the_line() {
        let entries = parse_config_text("command = linear\n\nm = two\n").unwrap();
        match RunConfig::from_entries(None, &entries) {
            Err(Error::Config { location, .. }) => assert_eq!(location, "line 3, key m"),
            other => panic!("{other:?}"),
        }
        match parse_config_text("command linear") {
            Err(Error::Config { location, .. }) => assert_eq!(location, "line 1"),
            other => panic!("{other:?}"),
        }
        let flags = [Entry::flag("dt_max", "abc")];
        match RunConfig::from_entries(Some(Command::Nonlinear), &flags) {
            Err(Error::Config { location, .. }) => assert_eq!(location, "--dt-max"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_times_and_keys() {
        let e = [Entry::flag("times", "10,1")];
        assert!(RunConfig::from_entries(Some(Command::Linear), &e).is_err());
        let e = [Entry::flag("colour", "red")];
        assert!(RunConfig::from_entries(Some(Command::Linear), &e).is_err());
        assert!(RunConfig::from_entries(None, &[]).is_err());
    }

    #[test]
    fn auto_grid_covers_spreading() {
        let p = ProfileSpec::centered(Shape::Gate {
            width: 1.0,
            amplitude: 0.1,
        })
        .unwrap();
        let g = auto_grid_linear(&p, 1e4, 2).unwrap();
        assert!(g.length() / 2.0 >= 410.0);
        assert!(g.len().is_power_of_two());
        let g = auto_grid_nonlinear(&p, 1e3, 2).unwrap();
        assert_eq!(g.len(), 512);
    }

    #[test]
    fn nonlinear_overrides_resolve() {
        let o = NonlinearOverrides {
            dt_max: Some(0.5),
            ..Default::default()
        };
        let cfg = o.resolve(0.5).unwrap();
        assert_eq!(cfg.dt_max, 0.5);
        assert_eq!(cfg.dt_init, 0.1 * 0.0625);
        let bad = NonlinearOverrides {
            dt_max: Some(1e-12),
            ..Default::default()
        };
        assert!(bad.resolve(0.5).is_err());
    }
}
