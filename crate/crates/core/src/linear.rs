//! Linearised evolution `∂_T Δ + ∂_X^4 Δ = 0` (and its order-2m family) on a
//! periodic box, by exact multiplication of each Fourier mode with
//! `e^{-K^{2m} T}`. The K = 0 mode is never touched, so the algebraic volume
//! is conserved to round-off, and evolution composes exactly.

use std::f64::consts::{FRAC_2_PI, PI};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind, Grid1D, EDGE_RATIO};
use crate::kernel;
use crate::par::{self, Execution};
use crate::quadrature::{integrate, QuadOptions};

/// Absolute quadrature tolerance used by [`step_solution`].
pub const STEP_QUAD_TOL: f64 = 1e-13;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn forward(&self, values: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    fn inverse(&self, mut spectrum: Vec<Complex<f64>>) -> Vec<f64> {
        self.inverse.process(&mut spectrum);
        let scale = 1.0 / spectrum.len() as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }
}

/// Discrete angular wavenumbers of the periodic grid in FFT order.
pub fn wavenumbers(grid: &Grid1D) -> Vec<f64> {
    let n = grid.len();
    let base = 2.0 * PI / grid.length();
    (0..n)
        .map(|j| {
            let j = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            base * j
        })
        .collect()
}

fn damp(spectrum: &mut [Complex<f64>], k: &[f64], t: f64, m: u32) {
    let p = 2 * m as i32;
    for (c, &kk) in spectrum.iter_mut().zip(k).skip(1) {
        *c *= (-kk.powi(p) * t).exp();
    }
}

fn differentiate(spectrum: &mut [Complex<f64>], k: &[f64]) {
    let n = spectrum.len();
    for (c, &kk) in spectrum.iter_mut().zip(k) {
        *c *= Complex::new(0.0, kk);
    }
    if n.is_multiple_of(2) {
        spectrum[n / 2] = Complex::new(0.0, 0.0);
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("evolution time must be > 0, got {t}")))
    }
}

fn check_excess(f: &Field) -> Result<()> {
    if f.kind() != FieldKind::Excess {
        return Err(Error::domain("linear evolution acts on excess fields"));
    }
    f.check_decay()
}

fn finish(initial: &Field, values: Vec<f64>, t: f64) -> Result<Field> {
    let out = Field::excess(*initial.grid(), values, initial.time() + t)?;
    let (edge, overall) = out.edge_and_overall_max();
    if edge > EDGE_RATIO * overall {
        return Err(Error::WrapAround {
            time: out.time(),
            edge,
            overall,
        });
    }
    Ok(out)
}

/// Evolves an excess profile forward by `t` under the order-`2m` linear
/// equation. The result carries time `initial.time() + t`.
pub fn evolve_linear(initial: &Field, t: f64, m: u32) -> Result<Field> {
    check_time(t)?;
    check_excess(initial)?;
    let plans = Plans::new(initial.grid().len());
    let k = wavenumbers(initial.grid());
    let mut s = plans.forward(initial.values());
    damp(&mut s, &k, t, m);
    finish(initial, plans.inverse(s), t)
}

/// Evolves the same initial profile to each of `times`, sharing one forward
/// transform.
pub fn evolve_many(initial: &Field, times: &[f64], m: u32, exec: Execution) -> Result<Vec<Field>> {
    for &t in times {
        check_time(t)?;
    }
    check_excess(initial)?;
    let plans = Plans::new(initial.grid().len());
    let k = wavenumbers(initial.grid());
    let s0 = plans.forward(initial.values());
    par::try_map(exec, times, |&t| {
        let mut s = s0.clone();
        damp(&mut s, &k, t, m);
        finish(initial, plans.inverse(s), t)
    })
}

/// Max-norm gap between evolving by `t1 + t2` at once and in two legs.
pub fn evolve_semigroup_check(initial: &Field, t1: f64, t2: f64, m: u32) -> Result<f64> {
    let once = evolve_linear(initial, t1 + t2, m)?;
    let twice = evolve_linear(&evolve_linear(initial, t1, m)?, t2, m)?;
    Ok(once.max_distance(&twice))
}

/// Spectral `∂_X` of a field; the Nyquist mode is dropped.
pub fn spectral_derivative(field: &Field) -> Result<Field> {
    let plans = Plans::new(field.grid().len());
    let k = wavenumbers(field.grid());
    let mut s = plans.forward(field.values());
    differentiate(&mut s, &k);
    Field::excess(*field.grid(), plans.inverse(s), field.time())
}

/// Max-norm gap between `evolve(∂_X Δ₀)` and `∂_X evolve(Δ₀)`.
///
/// Only the initial profile is held to the decay invariant: the spectral
/// derivative of a discontinuous profile rings across the whole box until the
/// evolution smooths it.
pub fn derivative_evolution_check(initial: &Field, t: f64, m: u32) -> Result<f64> {
    check_time(t)?;
    check_excess(initial)?;
    let plans = Plans::new(initial.grid().len());
    let k = wavenumbers(initial.grid());

    let mut s = plans.forward(initial.values());
    differentiate(&mut s, &k);
    let derivative = plans.inverse(s);
    let mut s = plans.forward(&derivative);
    damp(&mut s, &k, t, m);
    let derive_then_evolve = plans.inverse(s);

    let mut s = plans.forward(initial.values());
    damp(&mut s, &k, t, m);
    let evolved = plans.inverse(s);
    let mut s = plans.forward(&evolved);
    differentiate(&mut s, &k);
    let evolve_then_derive = plans.inverse(s);

    Ok(derive_then_evolve
        .iter()
        .zip(&evolve_then_derive)
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// Self-similar solution for an initial step of height `theta0` rising at the
/// origin:
///
/// ```text
/// Δ(U) = (θ₀/2) (1 + (2/π) ∫₀^∞ e^{-Q⁴} sin(QU)/Q dQ)
/// ```
pub fn step_solution(u: f64, theta0: f64) -> Result<f64> {
    if !u.is_finite() || !theta0.is_finite() {
        return Err(Error::domain("step solution needs finite U and θ₀"));
    }
    let integrand = |q: f64| {
        let s = if q == 0.0 { u } else { (q * u).sin() / q };
        (-q.powi(4)).exp() * s
    };
    let opts = QuadOptions::new(STEP_QUAD_TOL, PI / (4.0 * u.abs() + 1.0));
    let integral = integrate(integrand, 0.0, kernel::q_max(2), &opts)?;
    Ok(0.5 * theta0 * (1.0 + FRAC_2_PI * integral))
}

/// Algebraic volume `M₀ = Σ Δ_i dx`.
pub fn algebraic_volume(f: &Field) -> Result<f64> {
    f.check_decay()?;
    Ok(raw_volume(f))
}

pub(crate) fn raw_volume(f: &Field) -> f64 {
    f.values().iter().sum::<f64>() * f.grid().dx()
}

/// First moment `∫ X Δ dX` (rectangle rule).
pub fn first_moment(f: &Field) -> Result<f64> {
    f.check_decay()?;
    let g = f.grid();
    Ok(f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| g.x(i) * v)
        .sum::<f64>()
        * g.dx())
}

/// Discrete `Σ |∂_X Δ|² dx` with the spectral derivative.
pub fn h1_seminorm(f: &Field) -> Result<f64> {
    let d = spectral_derivative(f)?;
    Ok(d.values().iter().map(|v| v * v).sum::<f64>() * f.grid().dx())
}

/// `|Δ̂(K)|` for every discrete wavenumber, in FFT order.
pub fn spectral_amplitudes(f: &Field) -> Vec<f64> {
    Plans::new(f.grid().len())
        .forward(f.values())
        .iter()
        .map(|c| c.norm())
        .collect()
}
