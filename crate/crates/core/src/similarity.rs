//! Self-similar frame, distances to the attractor, and the uniform
//! convergence bound.
//!
//! A solution at time T is mapped to `U = X T^{-α}` and, for non-zero volume
//! `M₀`, to `f(U, T) = T^β Δ(X, T) / M₀`, which converges uniformly to φ with
//!
//! ```text
//! sup_U |f - φ| ≤ a(T) / (2π |M₀|),
//! a(T) = ∫ dQ e^{-Q^{2m}} ∫ dY |e^{-iQY T^{-α}} - 1| |Δ₀(Y)|.
//! ```

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind};
use crate::kernel::{self, KernelSpec, SimilarityExponents};
use crate::linear::{self, raw_volume};
use crate::par::{self, Execution};
use crate::quadrature::{integrate, QuadOptions};

/// Beyond this `|U|` every supported φ_m^{(n)} is below 1e-30 and the
/// reference is taken as exactly zero.
pub const REFERENCE_U_CUTOFF: f64 = 60.0;

/// A volume below this fraction of `‖Δ‖₁` counts as zero.
pub const ZERO_VOLUME_RATIO: f64 = 1e-8;

/// Absolute quadrature tolerance for `a(T)`.
pub const A_BOUND_QUAD_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalisation {
    /// `f = T^β Δ / M₀`, converging to φ.
    ByVolume,
    /// `f = φ(0) Δ / Δ(U = 0)`, for plotting against φ.
    ByPeak,
    /// `f = T^{2β} Δ / M₁` with `M₁ = -∫ Y Δ₀ dY`, converging to φ' when
    /// `M₀ = 0`.
    ByFirstMoment,
}

impl Normalisation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalisation::ByVolume => "volume",
            Normalisation::ByPeak => "peak",
            Normalisation::ByFirstMoment => "moment1",
        }
    }

    /// The attractor this normalisation converges to.
    pub fn reference(&self) -> AttractorRef {
        match self {
            Normalisation::ByVolume | Normalisation::ByPeak => AttractorRef::Phi,
            Normalisation::ByFirstMoment => AttractorRef::Derivative(1),
        }
    }
}

impl FromStr for Normalisation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volume" | "by_volume" => Ok(Normalisation::ByVolume),
            "peak" | "by_peak" => Ok(Normalisation::ByPeak),
            "moment1" | "by_first_moment" => Ok(Normalisation::ByFirstMoment),
            other => Err(Error::domain(format!("unknown normalisation {other:?}"))),
        }
    }
}

/// Which attractor function a rescaled profile is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttractorRef {
    Phi,
    Derivative(u32),
}

impl AttractorRef {
    fn order(&self) -> u32 {
        match self {
            AttractorRef::Phi => 0,
            AttractorRef::Derivative(n) => *n,
        }
    }

    pub fn eval(&self, u: f64, spec: &KernelSpec) -> Result<f64> {
        if u.abs() > REFERENCE_U_CUTOFF {
            return Ok(0.0);
        }
        kernel::phi_nth(u, self.order(), spec)
    }
}

/// Samples `(U, f)` of a solution in the self-similar frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledProfile {
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub time: f64,
    pub normalisation: Normalisation,
    /// `M₀`, `Δ(U = 0)` or `M₁`, depending on the normalisation.
    pub coefficient: f64,
}

impl RescaledProfile {
    pub fn new(
        u: Vec<f64>,
        f: Vec<f64>,
        time: f64,
        normalisation: Normalisation,
        coefficient: f64,
    ) -> Result<Self> {
        if u.len() != f.len() || u.len() < 2 {
            return Err(Error::domain("rescaled profile needs matching u, f of length >= 2"));
        }
        if u.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("rescaled u must be strictly increasing"));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("rescaled f must be finite"));
        }
        Ok(Self {
            u,
            f,
            time,
            normalisation,
            coefficient,
        })
    }

    /// Linear interpolation of f at `x`, `None` outside the sampled range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        interp(&self.u, &self.f, x)
    }
}

fn interp(u: &[f64], f: &[f64], x: f64) -> Option<f64> {
    let (first, last) = (u[0], u[u.len() - 1]);
    if !(x >= first && x <= last) {
        return None;
    }
    let k = u.partition_point(|&v| v <= x).clamp(1, u.len() - 1);
    let (u0, u1) = (u[k - 1], u[k]);
    Some(f[k - 1] + (f[k] - f[k - 1]) * (x - u0) / (u1 - u0))
}

fn l1_norm(delta: &Field) -> f64 {
    delta.values().iter().map(|v| v.abs()).sum::<f64>() * delta.grid().dx()
}

/// Maps an excess field at `T > 0` into the self-similar frame.
pub fn rescale(delta: &Field, norm: Normalisation, m: u32) -> Result<RescaledProfile> {
    if delta.kind() != FieldKind::Excess {
        return Err(Error::domain("rescale expects an excess field"));
    }
    let t = delta.time();
    if !(t > 0.0) {
        return Err(Error::domain(format!("rescaling needs T > 0, got {t}")));
    }
    let e = SimilarityExponents::for_order(m);
    let g = delta.grid();
    let u: Vec<f64> = g.points().iter().map(|x| x * t.powf(-e.alpha)).collect();
    let l1 = l1_norm(delta);
    let (scale, coefficient) = match norm {
        Normalisation::ByVolume => {
            delta.check_decay()?;
            let m0 = raw_volume(delta);
            if !(m0.abs() > ZERO_VOLUME_RATIO * l1) {
                return Err(Error::ZeroVolume { volume: m0 });
            }
            (t.powf(e.beta) / m0, m0)
        }
        Normalisation::ByPeak => {
            let center = interp(&u, delta.values(), 0.0)
                .ok_or_else(|| Error::domain("U = 0 lies outside the grid"))?;
            if !(center.abs() > 1e-12 * delta.max_abs()) {
                return Err(Error::domain("profile vanishes at U = 0; cannot normalise by peak"));
            }
            (kernel::phi_at_origin(m) / center, center)
        }
        Normalisation::ByFirstMoment => {
            delta.check_decay()?;
            let m0 = raw_volume(delta);
            if m0.abs() > ZERO_VOLUME_RATIO * l1 {
                return Err(Error::domain(format!(
                    "first-moment normalisation needs zero volume, got {m0:.3e}"
                )));
            }
            let m1 = -linear::first_moment(delta)?;
            if m1 == 0.0 {
                return Err(Error::domain("first moment vanishes"));
            }
            (t.powf(2.0 * e.beta) / m1, m1)
        }
    };
    let f = delta.values().iter().map(|v| v * scale).collect();
    RescaledProfile::new(u, f, t, norm, coefficient)
}

/// Sup and L² distances from a rescaled profile to the reference attractor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    pub sup: f64,
    pub l2: f64,
}

/// Evaluates both distances over the profile's own U grid. Trapezoidal rule
/// for the L² part.
pub fn distances(
    p: &RescaledProfile,
    reference: AttractorRef,
    spec: &KernelSpec,
    exec: Execution,
) -> Result<Distances> {
    let refs = par::try_map(exec, &p.u, |&u| reference.eval(u, spec))?;
    let diff: Vec<f64> = p.f.iter().zip(&refs).map(|(a, b)| a - b).collect();
    let sup = diff.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let l2 = diff
        .windows(2)
        .zip(p.u.windows(2))
        .map(|(d, u)| 0.5 * (d[0] * d[0] + d[1] * d[1]) * (u[1] - u[0]))
        .sum::<f64>()
        .sqrt();
    Ok(Distances { sup, l2 })
}

/// `max_U |f(U) - reference(U)|` over the profile's grid image.
pub fn sup_distance(p: &RescaledProfile, reference: AttractorRef, spec: &KernelSpec) -> Result<f64> {
    Ok(distances(p, reference, spec, Execution::default())?.sup)
}

/// `a(T)` for the initial profile `delta0` and order `2m`, using
/// `|e^{iθ} - 1| = 2|sin(θ/2)|`.
pub fn a_bound(delta0: &Field, t: f64, m: u32) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("a(T) needs T > 0, got {t}")));
    }
    delta0.check_decay()?;
    let g = delta0.grid();
    let dx = g.dx();
    let inv_scale = t.powf(-SimilarityExponents::for_order(m).alpha);
    let support: Vec<(f64, f64)> = delta0
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (0.5 * g.x(i) * inv_scale, v.abs() * dx))
        .collect();
    if support.is_empty() {
        return Ok(0.0);
    }
    let y_max = support.iter().fold(0.0f64, |a, (y, _)| a.max(y.abs()));
    let p = 2 * m as i32;
    let integrand = |q: f64| {
        let inner: f64 = support.iter().map(|&(y, w)| (q * y).sin().abs() * w).sum();
        2.0 * (-q.powi(p)).exp() * inner
    };
    let opts = QuadOptions::new(A_BOUND_QUAD_TOL, PI / (4.0 * y_max + 1.0));
    // Integrand is even in Q.
    Ok(2.0 * integrate(integrand, 0.0, kernel::q_max(m), &opts)?)
}

/// One row of a convergence report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub time: f64,
    pub sup_distance: f64,
    /// `a(T) / (2π|M₀|)`; only defined for the volume normalisation.
    pub a_bound_over_2pi_m0: Option<f64>,
    pub l2_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub records: Vec<ConvergenceRecord>,
    pub normalisation: Normalisation,
    pub fitted_rate: Option<f64>,
    pub rate_window: (f64, f64),
}

/// Evolves `delta0` with the linear solver to every time in `times` and
/// records the distance of each rescaled snapshot to the attractor.
pub fn convergence_report(
    delta0: &Field,
    times: &[f64],
    norm: Normalisation,
    spec: &KernelSpec,
    rate_window: (f64, f64),
    exec: Execution,
) -> Result<ConvergenceReport> {
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("report times must increase strictly"));
    }
    let m = spec.m();
    let snapshots = linear::evolve_many(delta0, times, m, exec)?;
    let m0 = raw_volume(delta0);
    let records = par::try_map(exec, &snapshots, |snap| {
        let p = rescale(snap, norm, m)?;
        let d = distances(&p, norm.reference(), spec, Execution::Sequential)?;
        let bound = match norm {
            Normalisation::ByVolume => {
                Some(a_bound(delta0, snap.time() - delta0.time(), m)? / (2.0 * PI * m0.abs()))
            }
            _ => None,
        };
        Ok::<_, Error>(ConvergenceRecord {
            time: snap.time(),
            sup_distance: d.sup,
            a_bound_over_2pi_m0: bound,
            l2_distance: d.l2,
        })
    })?;
    let mut report = ConvergenceReport {
        records,
        normalisation: norm,
        fitted_rate: None,
        rate_window,
    };
    report.fitted_rate = fit_rate(&report).ok();
    Ok(report)
}

/// Least-squares slope of `log sup_distance` against `log T` over the
/// report's rate window.
pub fn fit_rate(report: &ConvergenceReport) -> Result<f64> {
    let (lo, hi) = report.rate_window;
    let slack = 1e-12;
    let pts: Vec<(f64, f64)> = report
        .records
        .iter()
        .filter(|r| r.time >= lo * (1.0 - slack) && r.time <= hi * (1.0 + slack))
        .map(|r| (r.time, r.sup_distance))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} records inside [{lo}, {hi}], need 4",
            pts.len()
        )));
    }
    if pts.iter().any(|(_, d)| !(*d > 0.0)) {
        return Err(Error::InsufficientData(
            "sup distance must be positive to take logs".into(),
        ));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, d)| d.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Max-norm gap between two rescaled profiles on their common U range, each
/// linearly interpolated onto the other's samples.
pub fn self_similarity_check(p1: &RescaledProfile, p2: &RescaledProfile) -> Result<f64> {
    if p1.time == p2.time {
        return Err(Error::domain("profiles must be taken at different times"));
    }
    if p1.normalisation != p2.normalisation {
        return Err(Error::domain("profiles use different normalisations"));
    }
    let lo = p1.u[0].max(p2.u[0]);
    let hi = p1.u[p1.u.len() - 1].min(p2.u[p2.u.len() - 1]);
    if !(lo < hi) {
        return Err(Error::NoOverlap);
    }
    let one_way = |a: &RescaledProfile, b: &RescaledProfile| {
        a.u.iter()
            .zip(&a.f)
            .filter(|(u, _)| **u >= lo && **u <= hi)
            .filter_map(|(u, f)| b.interpolate(*u).map(|g| (f - g).abs()))
            .fold(0.0f64, f64::max)
    };
    Ok(one_way(p1, p2).max(one_way(p2, p1)))
}

/// `max |Δ₀(kY) - k^α Δ₀(Y)|` over `points`. A profile that yields an
/// all-time self-similar solution must make this vanish.
pub fn homogeneity_check<F: Fn(f64) -> f64>(profile: F, k: f64, alpha: f64, points: &[f64]) -> f64 {
    points
        .iter()
        .map(|&y| (profile(k * y) - k.powf(alpha) * profile(y)).abs())
        .fold(0.0, f64::max)
}

/// Default probe points for [`homogeneity_check`]: `±0.05 … ±5`, excluding 0.
pub fn homogeneity_points() -> Vec<f64> {
    (1..=100)
        .flat_map(|i| {
            let y = 0.05 * i as f64;
            [-y, y]
        })
        .collect()
}
