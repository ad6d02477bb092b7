//! Full nonlinear thin film equation `∂_T H + ∂_X(H³ ∂_X³ H) = 0` for
//! perturbations of a flat film `H = 1`.
//!
//! Semi-discretisation in flux form on cells `i = 0..n`:
//!
//! ```text
//! dH_i/dT = -(F_{i+1/2} - F_{i-1/2}) / dx
//! F_{i+1/2} = M(H_i, H_{i+1}) (H_{i+2} - 3H_{i+1} + 3H_i - H_{i-1}) / dx³
//! ```
//!
//! with the face mobility `M(a, b) = 2a²b²/(a + b)` and two ghost cells per
//! side held at `H = 1`. The two outermost faces carry no flux, so the
//! discrete volume telescopes exactly. Each step is backward Euler solved by
//! Newton iteration on the pentadiagonal Jacobian.

use crate::banded::Pentadiagonal;
use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind};
use crate::par::{self, Execution};

/// Cells at each end that must stay flat.
pub const BOUNDARY_CELLS: usize = 2;
/// Allowed `|H - 1|` in the boundary cells.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Steps needing fewer Newton iterations than this let `dt` grow.
pub const EASY_SOLVE_ITERS: usize = 4;

/// Time-step and Newton controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Max-norm of the backward-Euler residual accepted by Newton.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub dt_grow: f64,
    pub dt_shrink: f64,
}

impl NonlinearConfig {
    /// Defaults scaled to the explicit-stability step `dx⁴`.
    pub fn for_spacing(dx: f64) -> Self {
        let scale = dx.powi(4);
        Self {
            dt_init: 0.1 * scale,
            dt_min: 1e-6 * scale,
            dt_max: 1e3 * scale,
            newton_tol: 1e-10,
            newton_max_iters: 20,
            dt_grow: 1.2,
            dt_shrink: 0.5,
        }
    }

    /// Fixed step `dt` (no growth, no room to shrink).
    pub fn fixed(dt: f64, newton_tol: f64) -> Self {
        Self {
            dt_init: dt,
            dt_min: dt,
            dt_max: dt,
            newton_tol,
            newton_max_iters: 20,
            dt_grow: 1.2,
            dt_shrink: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dt_min > 0.0
            && self.dt_min <= self.dt_init
            && self.dt_init <= self.dt_max
            && self.dt_max.is_finite()
            && self.newton_tol > 0.0
            && self.newton_max_iters > 0
            && self.dt_grow > 1.0
            && self.dt_shrink > 0.0
            && self.dt_shrink < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid nonlinear config {self:?}")))
        }
    }
}

/// Per-step record of an accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub time: f64,
    pub dt_used: f64,
    pub newton_iters: usize,
    /// Excess volume `Σ (H_i - 1) dx`.
    pub mass: f64,
    /// Capillary energy `Σ ((H_{i+1} - H_i)/dx)² dx / 2` over all faces.
    pub energy: f64,
    pub min_height: f64,
}

impl StepDiagnostics {
    pub fn of(h: &Field, dt_used: f64, newton_iters: usize) -> Self {
        Self {
            time: h.time(),
            dt_used,
            newton_iters,
            mass: mass(h),
            energy: energy(h),
            min_height: h.values().iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Entropy-consistent face mobility `2a²b²/(a + b)`.
pub fn mobility_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "mobility needs positive heights, got ({a}, {b})"
        )));
    }
    Ok(mobility(a, b))
}

#[inline]
fn mobility(a: f64, b: f64) -> f64 {
    2.0 * a * a * b * b / (a + b)
}

/// `∂M/∂a`.
#[inline]
fn mobility_da(a: f64, b: f64) -> f64 {
    let s = a + b;
    2.0 * a * b * b * (a + 2.0 * b) / (s * s)
}

pub fn mass(h: &Field) -> f64 {
    h.values().iter().map(|v| v - 1.0).sum::<f64>() * h.grid().dx()
}

pub fn energy(h: &Field) -> f64 {
    let dx = h.grid().dx();
    let v = h.values();
    let n = v.len() as isize;
    let at = |j: isize| if j < 0 || j >= n { 1.0 } else { v[j as usize] };
    (-1..n)
        .map(|j| {
            let d = (at(j + 1) - at(j)) / dx;
            d * d
        })
        .sum::<f64>()
        * dx
        / 2.0
}

fn check_boundary(v: &[f64]) -> Result<()> {
    let n = v.len();
    for i in (0..BOUNDARY_CELLS).chain(n - BOUNDARY_CELLS..n) {
        let deviation = (v[i] - 1.0).abs();
        if deviation > BOUNDARY_TOL {
            return Err(Error::Boundary {
                index: i,
                deviation,
            });
        }
    }
    Ok(())
}

struct Stepper<'a> {
    old: &'a [f64],
    dx: f64,
    dt: f64,
}

impl Stepper<'_> {
    fn residual(&self, h: &[f64]) -> Vec<f64> {
        let n = h.len();
        let dx3 = self.dx.powi(3);
        let at = |j: isize| {
            if j < 0 || j as usize >= n {
                1.0
            } else {
                h[j as usize]
            }
        };
        let s = self.dt / self.dx;
        let mut r: Vec<f64> = h.iter().zip(self.old).map(|(a, b)| a - b).collect();
        for i in 0..n - 1 {
            let j = i as isize;
            let third = third_difference(at(j - 1), h[i], h[i + 1], at(j + 2)) / dx3;
            let flux = mobility(h[i], h[i + 1]) * third;
            r[i] += s * flux;
            r[i + 1] -= s * flux;
        }
        r
    }

    fn jacobian(&self, h: &[f64]) -> Pentadiagonal {
        let n = h.len();
        let dx3 = self.dx.powi(3);
        let at = |j: isize| {
            if j < 0 || j as usize >= n {
                1.0
            } else {
                h[j as usize]
            }
        };
        let s = self.dt / self.dx;
        let mut jac = Pentadiagonal::zeros(n);
        for i in 0..n as isize {
            jac.add(i, i, 1.0);
        }
        for i in 0..n - 1 {
            let j = i as isize;
            let (a, b) = (h[i], h[i + 1]);
            let third = third_difference(at(j - 1), a, b, at(j + 2)) / dx3;
            let m = mobility(a, b);
            let c = m / dx3;
            let d = [
                (j - 1, -c),
                (j, 3.0 * c + mobility_da(a, b) * third),
                (j + 1, -3.0 * c + mobility_da(b, a) * third),
                (j + 2, c),
            ];
            for (col, v) in d {
                jac.add(j, col, s * v);
                jac.add(j + 1, col, -s * v);
            }
        }
        jac
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// One backward-Euler step of size `dt`.
/// `h2 - 3 h1 + 3 h0 - hm`, written as a sum of neighbour differences so that a
/// nearly flat film does not lose the signal to cancellation.
fn third_difference(hm: f64, h0: f64, h1: f64, h2: f64) -> f64 {
    (h2 - h1) - 2.0 * (h1 - h0) + (h0 - hm)
}

pub fn step_nonlinear(h: &Field, dt: f64, cfg: &NonlinearConfig) -> Result<(Field, StepDiagnostics)> {
    if h.kind() != FieldKind::Height {
        return Err(Error::domain("nonlinear evolution acts on height fields"));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("time step must be > 0, got {dt}")));
    }
    check_boundary(h.values())?;

    let stepper = Stepper {
        old: h.values(),
        dx: h.grid().dx(),
        dt,
    };
    let mut cur = h.values().to_vec();
    let mut r = stepper.residual(&cur);
    let mut iters = 0;
    while max_abs(&r) > cfg.newton_tol {
        if iters == cfg.newton_max_iters {
            return Err(Error::NewtonDivergence {
                iters,
                residual: max_abs(&r),
            });
        }
        let lu = stepper
            .jacobian(&cur)
            .factor()
            .map_err(|_| Error::NewtonDivergence {
                iters,
                residual: max_abs(&r),
            })?;
        for v in r.iter_mut() {
            *v = -*v;
        }
        lu.solve_in_place(&mut r);
        for (c, d) in cur.iter_mut().zip(&r) {
            *c += d;
        }
        iters += 1;
        // Once the update is below tolerance the residual sits at its
        // roundoff floor, which for small dx can exceed the tolerance.
        let converged = max_abs(&r) <= cfg.newton_tol;
        if let Some(i) = cur.iter().position(|v| !v.is_finite()) {
            return Err(Error::NewtonDivergence {
                iters,
                residual: cur[i],
            });
        }
        if let Some(i) = cur.iter().position(|&v| v <= 0.0) {
            return Err(Error::PositivityLoss {
                index: i,
                value: cur[i],
            });
        }
        r = stepper.residual(&cur);
        if converged {
            break;
        }
    }
    check_boundary(&cur)?;
    let out = Field::height(*h.grid(), cur, h.time() + dt)?;
    let diag = StepDiagnostics::of(&out, dt, iters);
    Ok((out, diag))
}

/// Snapshots and per-step diagnostics of an adaptive run.
#[derive(Debug, Clone)]
pub struct NonlinearRun {
    /// One field per requested snapshot time, in order.
    pub snapshots: Vec<Field>,
    /// Initial state followed by every accepted step.
    pub diagnostics: Vec<StepDiagnostics>,
    /// Steps retried with a smaller `dt`.
    pub rejected: usize,
}

impl NonlinearRun {
    pub fn final_diagnostics(&self) -> &StepDiagnostics {
        self.diagnostics.last().expect("run has an initial record")
    }
}

/// Integrates from `h0` to `t_end` with adaptive backward-Euler steps,
/// landing exactly on each requested snapshot time.
pub fn evolve_nonlinear(
    h0: &Field,
    t_end: f64,
    snapshots: &[f64],
    cfg: &NonlinearConfig,
) -> Result<NonlinearRun> {
    cfg.validate()?;
    if h0.kind() != FieldKind::Height {
        return Err(Error::domain("nonlinear evolution acts on height fields"));
    }
    let t0 = h0.time();
    if !(t_end > t0) || !t_end.is_finite() {
        return Err(Error::domain(format!("T_end = {t_end} must exceed start time {t0}")));
    }
    if snapshots.windows(2).any(|w| !(w[0] < w[1]))
        || snapshots.iter().any(|&s| !(s > t0 && s <= t_end))
    {
        return Err(Error::domain(
            "snapshot times must increase strictly within (start, T_end]",
        ));
    }
    check_boundary(h0.values())?;

    let mut targets: Vec<(f64, bool)> = snapshots.iter().map(|&s| (s, true)).collect();
    if snapshots.last() != Some(&t_end) {
        targets.push((t_end, false));
    }

    let mut run = NonlinearRun {
        snapshots: Vec::with_capacity(snapshots.len()),
        diagnostics: vec![StepDiagnostics::of(h0, 0.0, 0)],
        rejected: 0,
    };
    let mut h = h0.clone();
    let mut dt = cfg.dt_init;
    for (target, keep) in targets {
        while h.time() < target {
            let remaining = target - h.time();
            let landing = dt >= remaining;
            let step = if landing { remaining } else { dt };
            match step_nonlinear(&h, step, cfg) {
                Ok((next, mut diag)) => {
                    h = if landing { next.with_time(target) } else { next };
                    diag.time = h.time();
                    if diag.newton_iters < EASY_SOLVE_ITERS {
                        dt = (dt * cfg.dt_grow).min(cfg.dt_max);
                    }
                    run.diagnostics.push(diag);
                }
                Err(Error::NewtonDivergence { .. }) | Err(Error::PositivityLoss { .. }) => {
                    run.rejected += 1;
                    dt = step * cfg.dt_shrink;
                    if dt < cfg.dt_min {
                        return Err(Error::StepFailure {
                            time: h.time(),
                            dt_min: cfg.dt_min,
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        if keep {
            run.snapshots.push(h.clone());
        }
    }
    Ok(run)
}

/// Independent runs sharing `t_end`, snapshots and config, e.g. an amplitude
/// sweep.
pub fn evolve_nonlinear_batch(
    initials: &[Field],
    t_end: f64,
    snapshots: &[f64],
    cfg: &NonlinearConfig,
    exec: Execution,
) -> Result<Vec<NonlinearRun>> {
    par::try_map(exec, initials, |h0| evolve_nonlinear(h0, t_end, snapshots, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::linear::evolve_linear;
    use crate::profile::{ProfileSpec, Shape};

    fn grid() -> Grid1D {
        Grid1D::centered(0.1, 800).unwrap()
    }

    fn perturbed(eps: f64) -> Field {
        let p = ProfileSpec::centered(Shape::Gaussian {
            volume: eps * (2.0 * std::f64::consts::PI).sqrt(),
            std_dev: 1.0,
        })
        .unwrap();
        p.sample(&grid()).unwrap().to_height().unwrap()
    }

    #[test]
    fn mobility_values() {
        assert_eq!(mobility_mean(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(mobility_mean(0.5, 0.5).unwrap(), 0.125);
        assert!((mobility_mean(1.0, 2.0).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!(mobility_mean(0.0, 1.0).is_err());
        assert!(mobility_mean(1.0, -2.0).is_err());
    }

    #[test]
    fn mobility_derivative_matches_difference() {
        for &(a, b) in &[(1.0, 1.0), (0.3, 2.0), (1.7, 0.9)] {
            let h = 1e-6;
            let fd = (mobility(a + h, b) - mobility(a - h, b)) / (2.0 * h);
            assert!((fd - mobility_da(a, b)).abs() < 1e-8);
        }
    }

    #[test]
    fn jacobian_matches_residual_differences() {
        let h = perturbed(0.3);
        let old: Vec<f64> = h.values().to_vec();
        let cur: Vec<f64> = old
            .iter()
            .enumerate()
            .map(|(i, v)| v + 0.01 * (i as f64 * 0.37).sin() * (-(i as f64 - 200.0).powi(2) / 400.0).exp())
            .collect();
        let st = Stepper {
            old: &old,
            dx: 0.1,
            dt: 1e-3,
        };
        let jac = st.jacobian(&cur);
        let eps = 1e-7;
        for col in [150usize, 199, 200, 233] {
            let mut p = cur.clone();
            p[col] += eps;
            let mut m = cur.clone();
            m[col] -= eps;
            let (rp, rm) = (st.residual(&p), st.residual(&m));
            for row in col.saturating_sub(3)..col + 4 {
                let fd = (rp[row] - rm[row]) / (2.0 * eps);
                assert!(
                    (fd - jac.get(row, col)).abs() < 1e-5 * (1.0 + fd.abs()),
                    "({row},{col}): {fd} vs {}",
                    jac.get(row, col)
                );
            }
        }
    }

    #[test]
    fn flat_film_is_a_fixed_point() {
        let h = Field::height(grid(), vec![1.0; 800], 0.0).unwrap();
        let cfg = NonlinearConfig::for_spacing(0.1);
        let (out, diag) = step_nonlinear(&h, 1e-3, &cfg).unwrap();
        assert!(out.values().iter().all(|v| *v == 1.0));
        assert!(diag.newton_iters <= 1);
    }

    #[test]
    fn one_step_conserves_mass() {
        let h = perturbed(0.4);
        let cfg = NonlinearConfig::for_spacing(0.1);
        let (out, _) = step_nonlinear(&h, 1e-3, &cfg).unwrap();
        let (m0, m1) = (mass(&h), mass(&out));
        assert!(((m1 - m0) / m0).abs() < 1e-12, "{m0} -> {m1}");
        assert!(energy(&out) < energy(&h));
    }

    fn excess_after_step(eps: f64, dt: f64) -> Vec<f64> {
        let cfg = NonlinearConfig {
            newton_tol: 1e-14,
            ..NonlinearConfig::for_spacing(0.1)
        };
        let (out, _) = step_nonlinear(&perturbed(eps), dt, &cfg).unwrap();
        out.to_excess().values().to_vec()
    }

    #[test]
    fn small_amplitude_step_matches_linear() {
        let (eps, dt) = (1e-3, 1e-3);
        let out = excess_after_step(eps, dt);
        let lin = evolve_linear(&perturbed(eps).to_excess(), dt, 2).unwrap();
        let dev = out
            .iter()
            .zip(lin.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        // Dominated by the O(dx^2 dt) error of the discrete operator.
        assert!(dev <= 1e-4 * eps, "{dev}");
    }

    #[test]
    fn nonlinear_correction_is_quadratic_in_amplitude() {
        // The part of the response even in eps is purely nonlinear.
        let even = |eps: f64| {
            let (p, m) = (excess_after_step(eps, 1e-2), excess_after_step(-eps, 1e-2));
            p.iter().zip(&m).fold(0.0f64, |acc, (a, b)| acc.max((a + b).abs()))
        };
        let (e1, e2) = (even(1e-3), even(2e-3));
        let slope = (e2 / e1).log2();
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}, {e1} {e2}");
    }

    #[test]
    fn boundary_and_kind_errors() {
        let cfg = NonlinearConfig::for_spacing(0.1);
        let mut v = vec![1.0; 800];
        v[1] = 1.1;
        let h = Field::height(grid(), v, 0.0).unwrap();
        assert!(matches!(
            step_nonlinear(&h, 1e-3, &cfg),
            Err(Error::Boundary { index: 1, .. })
        ));
        let e = Field::zeros(grid());
        assert!(step_nonlinear(&e, 1e-3, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(NonlinearConfig::for_spacing(0.1).validate().is_ok());
        let bad = NonlinearConfig {
            dt_min: 1.0,
            ..NonlinearConfig::for_spacing(0.1)
        };
        assert!(bad.validate().is_err());
        let bad = NonlinearConfig {
            dt_grow: 1.0,
            ..NonlinearConfig::for_spacing(0.1)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn flat_run_stays_flat() {
        let h = Field::height(grid(), vec![1.0; 800], 0.0).unwrap();
        let run =
            evolve_nonlinear(&h, 1.0, &[0.25, 0.5, 1.0], &NonlinearConfig::for_spacing(0.1)).unwrap();
        assert_eq!(run.snapshots.len(), 3);
        for (s, t) in run.snapshots.iter().zip([0.25, 0.5, 1.0]) {
            assert_eq!(s.time(), t);
            assert!(s.values().iter().all(|v| *v == 1.0));
        }
    }

    #[test]
    fn adaptive_run_lands_on_snapshots_and_dissipates() {
        let h = perturbed(0.5);
        let cfg = NonlinearConfig::for_spacing(0.1);
        let run = evolve_nonlinear(&h, 2.0, &[0.5, 1.0], &cfg).unwrap();
        assert_eq!(run.snapshots[0].time(), 0.5);
        assert_eq!(run.snapshots[1].time(), 1.0);
        assert_eq!(run.final_diagnostics().time, 2.0);
        let m0 = run.diagnostics[0].mass;
        for w in run.diagnostics.windows(2) {
            assert!(w[1].energy <= w[0].energy + 10.0 * cfg.newton_tol);
            assert!(((w[1].mass - m0) / m0).abs() < 1e-10);
            assert!(w[1].min_height > 0.0);
        }
    }

    #[test]
    fn snapshot_validation() {
        let h = perturbed(0.1);
        let cfg = NonlinearConfig::for_spacing(0.1);
        assert!(evolve_nonlinear(&h, 1.0, &[0.5, 0.2], &cfg).is_err());
        assert!(evolve_nonlinear(&h, 1.0, &[2.0], &cfg).is_err());
        assert!(evolve_nonlinear(&h, 0.0, &[], &cfg).is_err());
    }

    #[test]
    fn tiny_dt_min_triggers_step_failure() {
        // Newton cannot converge in one iteration at this step size.
        let h = perturbed(0.5);
        let cfg = NonlinearConfig {
            newton_max_iters: 1,
            newton_tol: 1e-14,
            ..NonlinearConfig::fixed(1e-2, 1e-14)
        };
        assert!(matches!(
            evolve_nonlinear(&h, 1.0, &[], &cfg),
            Err(Error::StepFailure { .. })
        ));
    }
}
