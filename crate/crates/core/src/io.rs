//! CSV emission and parsing for profiles, rescaled profiles, convergence
//! reports and step diagnostics. Floats are written with 17 significant
//! digits so every value reads back bit-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind, Grid1D};
use crate::linear::raw_volume;
use crate::nonlinear::StepDiagnostics;
use crate::similarity::{ConvergenceReport, Normalisation, RescaledProfile};

pub const PROFILE_HEADER: &str = "x,value";
pub const RESCALED_HEADER: &str = "u,f";
pub const REPORT_HEADER: &str = "T,sup_distance,a_bound,l2_distance";
pub const DIAGNOSTICS_HEADER: &str = "time,dt,newton_iters,mass,energy,min_height";

/// Lossless scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `<command>_<label>_T<time>.csv` with the time in fixed point to 1e-6,
/// zero-padded so lexical order follows time up to T < 1e7.
pub fn snapshot_name(command: &str, label: &str, time: f64) -> String {
    format!("{command}_{label}_T{time:014.6}.csv")
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

pub fn profile_csv(field: &Field) -> String {
    let g = field.grid();
    let mut s = String::new();
    let _ = writeln!(s, "# kind={}", field.kind().as_str());
    let _ = writeln!(s, "# time={}", fmt_f64(field.time()));
    let _ = writeln!(
        s,
        "# grid={},{},{}",
        fmt_f64(g.x_min()),
        fmt_f64(g.dx()),
        g.len()
    );
    let volume = match field.kind() {
        FieldKind::Excess => raw_volume(field),
        FieldKind::Height => raw_volume(&field.to_excess()),
    };
    let _ = writeln!(s, "# volume={}", fmt_f64(volume));
    let _ = writeln!(s, "{PROFILE_HEADER}");
    for (i, v) in field.values().iter().enumerate() {
        let _ = writeln!(s, "{},{}", fmt_f64(g.x(i)), fmt_f64(*v));
    }
    s
}

pub fn write_profile(path: &Path, field: &Field) -> Result<()> {
    fs::write(path, profile_csv(field))?;
    Ok(())
}

fn meta<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l.trim_start_matches('#').trim().split_once('='))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim())
}

fn num(path: &Path, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| parse_err(path, format!("bad number {s:?}: {e}")))
}

/// Reads a profile CSV written by [`write_profile`].
pub fn read_profile(path: &Path) -> Result<Field> {
    let text = fs::read_to_string(path)?;
    let kind: FieldKind = meta(&text, "kind")
        .ok_or_else(|| parse_err(path, "missing kind"))?
        .parse()
        .map_err(|e: Error| parse_err(path, e.to_string()))?;
    let time = num(path, meta(&text, "time").ok_or_else(|| parse_err(path, "missing time"))?)?;
    let grid_spec = meta(&text, "grid").ok_or_else(|| parse_err(path, "missing grid"))?;
    let parts: Vec<&str> = grid_spec.split(',').collect();
    if parts.len() != 3 {
        return Err(parse_err(path, "grid must be xmin,dx,n"));
    }
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|e| parse_err(path, format!("bad n: {e}")))?;
    let grid = Grid1D::new(num(path, parts[0])?, num(path, parts[1])?, n)?;
    let (_, values) = read_columns(path, &text, PROFILE_HEADER)?;
    Field::new(grid, values, time, kind)
}

fn read_columns(path: &Path, text: &str, header: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => return Err(parse_err(path, format!("expected header {header:?}, got {other:?}"))),
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (row, line) in lines.enumerate() {
        let (x, v) = line
            .split_once(',')
            .ok_or_else(|| parse_err(path, format!("row {}: expected two columns", row + 1)))?;
        a.push(num(path, x)?);
        b.push(num(path, v)?);
    }
    Ok((a, b))
}

/// Reads two-column `x,value` samples without metadata, e.g. a custom
/// initial profile.
pub fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let (x, v) = read_columns(path, &text, PROFILE_HEADER)?;
    Ok(x.into_iter().zip(v).collect())
}

pub fn rescaled_csv(p: &RescaledProfile) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# normalisation={}", p.normalisation.as_str());
    let _ = writeln!(s, "# time={}", fmt_f64(p.time));
    let key = match p.normalisation {
        Normalisation::ByVolume => "M0",
        Normalisation::ByPeak => "center_value",
        Normalisation::ByFirstMoment => "M1",
    };
    let _ = writeln!(s, "# {key}={}", fmt_f64(p.coefficient));
    let _ = writeln!(s, "{RESCALED_HEADER}");
    for (u, f) in p.u.iter().zip(&p.f) {
        let _ = writeln!(s, "{},{}", fmt_f64(*u), fmt_f64(*f));
    }
    s
}

pub fn write_rescaled(path: &Path, p: &RescaledProfile) -> Result<()> {
    fs::write(path, rescaled_csv(p))?;
    Ok(())
}

pub fn read_rescaled(path: &Path) -> Result<RescaledProfile> {
    let text = fs::read_to_string(path)?;
    let norm: Normalisation = meta(&text, "normalisation")
        .ok_or_else(|| parse_err(path, "missing normalisation"))?
        .parse()
        .map_err(|e: Error| parse_err(path, e.to_string()))?;
    let time = num(path, meta(&text, "time").ok_or_else(|| parse_err(path, "missing time"))?)?;
    let coefficient = ["M0", "center_value", "M1"]
        .iter()
        .find_map(|k| meta(&text, k))
        .map(|v| num(path, v))
        .transpose()?
        .unwrap_or(f64::NAN);
    let (u, f) = read_columns(path, &text, RESCALED_HEADER)?;
    RescaledProfile::new(u, f, time, norm, coefficient)
}

pub fn report_csv(r: &ConvergenceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# normalisation={}", r.normalisation.as_str());
    let _ = writeln!(
        s,
        "# rate_window={},{}",
        fmt_f64(r.rate_window.0),
        fmt_f64(r.rate_window.1)
    );
    match r.fitted_rate {
        Some(rate) => {
            let _ = writeln!(s, "# fitted_rate={}", fmt_f64(rate));
        }
        None => {
            let _ = writeln!(s, "# fitted_rate=none");
        }
    }
    let _ = writeln!(s, "# a_bound column holds a(T)/(2*pi*|M0|); empty when undefined");
    let _ = writeln!(s, "{REPORT_HEADER}");
    for rec in &r.records {
        let bound = rec.a_bound_over_2pi_m0.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(rec.time),
            fmt_f64(rec.sup_distance),
            bound,
            fmt_f64(rec.l2_distance)
        );
    }
    s
}

pub fn write_report(path: &Path, r: &ConvergenceReport) -> Result<()> {
    fs::write(path, report_csv(r))?;
    Ok(())
}

pub fn diagnostics_csv(d: &[StepDiagnostics]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{DIAGNOSTICS_HEADER}");
    for r in d {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f64(r.time),
            fmt_f64(r.dt_used),
            r.newton_iters,
            fmt_f64(r.mass),
            fmt_f64(r.energy),
            fmt_f64(r.min_height)
        );
    }
    s
}

pub fn write_diagnostics(path: &Path, d: &[StepDiagnostics]) -> Result<()> {
    fs::write(path, diagnostics_csv(d))?;
    Ok(())
}

/// Attractor table with columns `u,f` followed by `d1,d2,...` for each
/// requested derivative.
pub fn attractor_csv(u: &[f64], columns: &[(String, Vec<f64>)]) -> String {
    let mut s = String::new();
    let header: Vec<&str> = std::iter::once("u")
        .chain(columns.iter().map(|(n, _)| n.as_str()))
        .collect();
    let _ = writeln!(s, "{}", header.join(","));
    for (i, ui) in u.iter().enumerate() {
        let _ = write!(s, "{}", fmt_f64(*ui));
        for (_, c) in columns {
            let _ = write!(s, ",{}", fmt_f64(c[i]));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn snapshot_names_sort_by_time() {
        let a = snapshot_name("linear", "profile", 9.5);
        let b = snapshot_name("linear", "profile", 10.0);
        let c = snapshot_name("linear", "profile", 1000.0);
        assert_eq!(b, "linear_profile_T0000010.000000.csv");
        assert!(a < b && b < c);
    }

    proptest! {
        #[test]
        fn float_format_round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }

        #[test]
        fn profile_round_trips(values in proptest::collection::vec(-1e3f64..1e3, 8..64), x0 in -10.0f64..10.0, dx in 1e-3f64..1.0, t in 0.0f64..1e4) {
            let dir = tempfile::tempdir().unwrap();
            let g = Grid1D::new(x0, dx, values.len()).unwrap();
            let f = Field::excess(g, values, t).unwrap();
            let path = dir.path().join("p.csv");
            write_profile(&path, &f).unwrap();
            prop_assert_eq!(read_profile(&path).unwrap(), f);
        }
    }

    #[test]
    fn rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "# kind=excess\n# time=0\n# grid=0,1,8\nfoo,bar\n").unwrap();
        assert!(matches!(read_profile(&path), Err(Error::Parse { .. })));
    }
}
