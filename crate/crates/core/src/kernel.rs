//! The Green's function of `∂_T Δ + (-1)^m ∂_X^{2m} Δ = 0` (Fourier symbol
//! `e^{-K^{2m} T}`) and its self-similar profile
//!
//! ```text
//! G(X, T) = T^{-1/(2m)} φ_m(X T^{-1/(2m)}),   φ_m(U) = (1/π) ∫₀^∞ e^{-Q^{2m}} cos(QU) dQ.
//! ```
//!
//! For the thin film case `m = 2`, φ also has a closed form as a difference of
//! two ₀H₂ hypergeometric series in `(U/4)^4`. That route is fast and accurate
//! near the origin but the two series grow like `exp(3 (U/4)^{4/3})` while
//! their difference decays, so beyond a crossover `|U|` the quadrature route
//! takes over.

use std::f64::consts::{FRAC_1_PI, PI};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::quadrature::{integrate, QuadOptions};

/// Largest `|U|` accepted by [`phi_series`]; the series magnitude there is
/// ~1e4, which still leaves ~1e-12 absolute accuracy after cancellation.
pub const SERIES_MAX_U: f64 = 10.0;

/// Hard cap on the number of terms summed per series.
pub const SERIES_MAX_TERMS: usize = 200;

/// Highest derivative order supported by [`phi_derivative`].
pub const MAX_DERIVATIVE: u32 = 4;

/// Which route evaluates φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    Series,
    Quadrature,
    /// Series for `|U| <= u_switch` (order 4 only), quadrature beyond.
    Auto,
}

/// Order and evaluation controls for φ_m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    m: u32,
    method: KernelMethod,
    series_tol: f64,
    quad_tol: f64,
    u_switch: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            m: 2,
            method: KernelMethod::Auto,
            series_tol: 1e-15,
            quad_tol: 1e-13,
            u_switch: 8.0,
        }
    }
}

impl KernelSpec {
    /// Validates the controls. In auto mode the two routes are compared on the
    /// band `[u_switch - 2, u_switch]` and must agree within their combined
    /// error model.
    pub fn new(
        m: u32,
        method: KernelMethod,
        series_tol: f64,
        quad_tol: f64,
        u_switch: f64,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("kernel order m must be at least 1"));
        }
        for (name, tol) in [("series_tol", series_tol), ("quad_tol", quad_tol)] {
            if !(tol > 0.0 && tol <= 1e-3) {
                return Err(Error::domain(format!("{name} = {tol} outside (0, 1e-3]")));
            }
        }
        if !(u_switch > 0.0 && u_switch <= SERIES_MAX_U) {
            return Err(Error::domain(format!(
                "u_switch = {u_switch} outside (0, {SERIES_MAX_U}]"
            )));
        }
        if method == KernelMethod::Series && m != 2 {
            return Err(Error::domain(
                "the hypergeometric series is only available for m = 2",
            ));
        }
        let spec = Self {
            m,
            method,
            series_tol,
            quad_tol,
            u_switch,
        };
        if method == KernelMethod::Auto && m == 2 {
            spec.check_crossover()?;
        }
        Ok(spec)
    }

    /// Default controls for order `2m`.
    pub fn order(m: u32) -> Result<Self> {
        let d = Self::default();
        Self::new(m, d.method, d.series_tol, d.quad_tol, d.u_switch)
    }

    pub fn with_method(self, method: KernelMethod) -> Result<Self> {
        Self::new(self.m, method, self.series_tol, self.quad_tol, self.u_switch)
    }

    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn method(&self) -> KernelMethod {
        self.method
    }
    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }
    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }
    pub fn u_switch(&self) -> f64 {
        self.u_switch
    }

    pub fn exponents(&self) -> SimilarityExponents {
        SimilarityExponents::for_order(self.m)
    }

    fn check_crossover(&self) -> Result<()> {
        let lo = (self.u_switch - 2.0).max(0.0);
        for i in 0..=8 {
            let u = lo + (self.u_switch - lo) * i as f64 / 8.0;
            let (s, magnitude) = series_parts(u, self.series_tol)?;
            let q = phi_quadrature(u, self)?;
            let allowed = (self.series_tol + 64.0 * f64::EPSILON) * magnitude + self.quad_tol;
            if (s - q).abs() > allowed {
                return Err(Error::Tolerance(format!(
                    "series and quadrature disagree by {:.3e} at U = {u} (allowed {allowed:.3e}); lower u_switch",
                    (s - q).abs()
                )));
            }
        }
        Ok(())
    }

    fn quad_options(&self, u: f64) -> QuadOptions {
        QuadOptions::new(self.quad_tol, PI / (4.0 * u.abs() + 1.0))
    }

    /// Upper integration limit where `e^{-Q^{2m}} < 1e-18`.
    pub fn q_max(&self) -> f64 {
        q_max(self.m)
    }
}

pub(crate) fn q_max(m: u32) -> f64 {
    (18.0 * std::f64::consts::LN_10).powf(1.0 / (2.0 * m as f64))
}

/// Space and amplitude exponents of `G = T^{-β} φ(X T^{-α})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityExponents {
    pub alpha: f64,
    pub beta: f64,
}

impl SimilarityExponents {
    pub fn for_order(m: u32) -> Self {
        let e = 1.0 / (2.0 * m as f64);
        Self { alpha: e, beta: e }
    }
}

/// Sums `₀H₂({a, b}; w)` until the next term drops below `tol` times the
/// running sum. Returns the sum.
fn hyp0f2(a: f64, b: f64, w: f64, tol: f64) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= w / ((kf + 1.0) * (a + kf) * (b + kf));
        if term.abs() < tol * sum.abs() {
            return Ok(sum + term);
        }
        sum += term;
    }
    Err(Error::Tolerance(format!(
        "0H2({a}, {b}; {w}) not converged after {SERIES_MAX_TERMS} terms"
    )))
}

/// Returns φ(U) and the magnitude of the larger of the two cancelling terms.
fn series_parts(u: f64, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::domain(format!("series tolerance {tol} outside (0, 1e-3]")));
    }
    if !u.is_finite() || u.abs() > SERIES_MAX_U {
        return Err(Error::domain(format!(
            "|U| = {} beyond the series validity range {SERIES_MAX_U}",
            u.abs()
        )));
    }
    let w = (u / 4.0).powi(4);
    let even = libm::tgamma(1.25) * FRAC_1_PI * hyp0f2(0.5, 0.75, w, tol)?;
    let odd = u * u * libm::tgamma(0.75) / (8.0 * PI) * hyp0f2(1.25, 1.5, w, tol)?;
    Ok((even - odd, even.abs().max(odd.abs())))
}

/// φ(U) for `m = 2` from its hypergeometric closed form.
pub fn phi_series(u: f64, tol: f64) -> Result<f64> {
    series_parts(u, tol).map(|(v, _)| v)
}

/// φ_m(U) by adaptive quadrature of the cosine transform of `e^{-Q^{2m}}`.
pub fn phi_quadrature(u: f64, spec: &KernelSpec) -> Result<f64> {
    phi_derivative(u, 0, spec)
}

/// n-th derivative of φ_m, differentiated under the integral sign.
pub fn phi_derivative(u: f64, n: u32, spec: &KernelSpec) -> Result<f64> {
    if n > MAX_DERIVATIVE {
        return Err(Error::domain(format!(
            "derivative order {n} exceeds {MAX_DERIVATIVE}"
        )));
    }
    if !u.is_finite() {
        return Err(Error::domain("U must be finite"));
    }
    let p = 2 * spec.m as i32;
    // d^n/dU^n cos(QU) = Q^n cos(QU + nπ/2)
    let trig = move |x: f64| match n % 4 {
        0 => x.cos(),
        1 => -x.sin(),
        2 => -x.cos(),
        _ => x.sin(),
    };
    let integrand = |q: f64| q.powi(n as i32) * (-q.powi(p)).exp() * trig(q * u);
    let value = integrate(integrand, 0.0, spec.q_max(), &spec.quad_options(u))?;
    Ok(value * FRAC_1_PI)
}

/// φ_m(U) through the route selected by `spec.method()`.
pub fn phi(u: f64, spec: &KernelSpec) -> Result<f64> {
    match spec.method {
        KernelMethod::Series => phi_series(u, spec.series_tol),
        KernelMethod::Quadrature => phi_quadrature(u, spec),
        KernelMethod::Auto => {
            if spec.m == 2 && u.abs() <= spec.u_switch {
                phi_series(u, spec.series_tol)
            } else {
                phi_quadrature(u, spec)
            }
        }
    }
}

/// φ_m^{(n)}(U), using [`phi`] for `n = 0`.
pub fn phi_nth(u: f64, n: u32, spec: &KernelSpec) -> Result<f64> {
    if n == 0 {
        phi(u, spec)
    } else {
        phi_derivative(u, n, spec)
    }
}

/// Green's function `G(X, T) = T^{-β} φ_m(X T^{-α})` for `T > 0`.
pub fn green(x: f64, t: f64, spec: &KernelSpec) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "Green's function needs T > 0, got {t}"
        )));
    }
    let e = spec.exponents();
    Ok(t.powf(-e.beta) * phi(x * t.powf(-e.alpha), spec)?)
}

/// Samples φ^{(n)} at every point of `us`.
pub fn sample_phi(us: &[f64], n: u32, spec: &KernelSpec, exec: Execution) -> Result<Vec<f64>> {
    par::try_map(exec, us, |&u| phi_nth(u, n, spec))
}

/// `∫₀^∞ e^{-Q^{2m}} dQ = Γ(1 + 1/(2m))`, so `φ_m(0) = Γ(1 + 1/(2m)) / π`.
pub fn phi_at_origin(m: u32) -> f64 {
    libm::tgamma(1.0 + 1.0 / (2.0 * m as f64)) * FRAC_1_PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(m: u32) -> KernelSpec {
        KernelSpec::order(m)
            .unwrap()
            .with_method(KernelMethod::Quadrature)
            .unwrap()
    }

    #[test]
    fn series_at_origin_is_gamma_ratio() {
        let v = phi_series(0.0, 1e-12).unwrap();
        assert_eq!(v, libm::tgamma(1.25) / PI);
        assert!((v - 0.288_517).abs() < 1e-6);
    }

    #[test]
    fn series_is_exactly_even() {
        for &u in &[0.3, 1.7, 4.0, 7.9] {
            assert_eq!(phi_series(u, 1e-12).unwrap(), phi_series(-u, 1e-12).unwrap());
        }
    }

    #[test]
    fn series_rejects_large_u() {
        assert!(matches!(phi_series(10.5, 1e-12), Err(Error::Domain(_))));
        assert!(matches!(phi_series(1.0, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn series_matches_quadrature_at_four() {
        let s = phi_series(4.0, 1e-10).unwrap();
        let q = phi_quadrature(4.0, &quad(2)).unwrap();
        assert!((s - q).abs() < 1e-9, "{s} vs {q}");
    }

    #[test]
    fn heat_kernel_closed_form() {
        let spec = quad(1);
        for i in 0..=20 {
            let u = -10.0 + i as f64;
            let exact = (-u * u / 4.0).exp() / (2.0 * PI.sqrt());
            let v = phi_quadrature(u, &spec).unwrap();
            assert!((v - exact).abs() < 1e-10, "U={u}: {v} vs {exact}");
        }
    }

    #[test]
    fn first_derivative_vanishes_at_origin() {
        assert!(phi_derivative(0.0, 1, &quad(2)).unwrap().abs() < 1e-15);
        assert!(phi_derivative(0.0, 3, &quad(2)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn zeroth_derivative_is_phi() {
        let spec = quad(2);
        for &u in &[0.0, 1.5, -3.0, 12.0] {
            assert_eq!(
                phi_derivative(u, 0, &spec).unwrap(),
                phi_quadrature(u, &spec).unwrap()
            );
        }
        assert!(phi_derivative(1.0, 5, &spec).is_err());
    }

    #[test]
    fn first_derivative_matches_central_difference() {
        let spec = quad(2);
        let h = 1e-5;
        for &u in &[-5.0, -1.2, 0.7, 2.0, 6.5] {
            let fd = (phi_quadrature(u + h, &spec).unwrap() - phi_quadrature(u - h, &spec).unwrap())
                / (2.0 * h);
            let d = phi_derivative(u, 1, &spec).unwrap();
            assert!((fd - d).abs() < 1e-6, "U={u}: {fd} vs {d}");
        }
    }

    #[test]
    fn green_requires_positive_time() {
        let spec = KernelSpec::default();
        assert!(matches!(green(0.0, 0.0, &spec), Err(Error::Domain(_))));
        assert!(matches!(green(0.0, -1.0, &spec), Err(Error::Domain(_))));
        let g0 = green(0.0, 1.0, &spec).unwrap();
        assert!((g0 - phi_at_origin(2)).abs() < 1e-14);
    }

    #[test]
    fn spec_validation() {
        assert!(KernelSpec::new(0, KernelMethod::Auto, 1e-12, 1e-12, 8.0).is_err());
        assert!(KernelSpec::new(2, KernelMethod::Auto, 1e-2, 1e-12, 8.0).is_err());
        assert!(KernelSpec::new(2, KernelMethod::Auto, 1e-12, 0.0, 8.0).is_err());
        assert!(KernelSpec::new(3, KernelMethod::Series, 1e-12, 1e-12, 8.0).is_err());
        assert!(KernelSpec::new(2, KernelMethod::Auto, 1e-12, 1e-12, 11.0).is_err());
        assert!(KernelSpec::new(3, KernelMethod::Auto, 1e-12, 1e-12, 8.0).is_ok());
        assert!(KernelSpec::new(2, KernelMethod::Auto, 1e-12, 1e-12, 8.0).is_ok());
    }

    #[test]
    fn exponents_follow_order() {
        let e = SimilarityExponents::for_order(2);
        assert_eq!((e.alpha, e.beta), (0.25, 0.25));
        assert_eq!(SimilarityExponents::for_order(1).alpha, 0.5);
    }

    #[test]
    fn q_max_truncates_at_1e_minus_18() {
        for m in 1..=4 {
            let q = q_max(m);
            assert!(((-q.powi(2 * m as i32)).exp() - 1e-18).abs() < 1e-30);
        }
    }
}
