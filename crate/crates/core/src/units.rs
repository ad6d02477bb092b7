//! Conversion between physical and dimensionless variables: lengths scale
//! with the reference film height `h₀`, time with `3ηh₀/γ`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScales {
    /// Surface tension γ (N/m).
    pub gamma: f64,
    /// Shear viscosity η (Pa·s).
    pub eta: f64,
    /// Reference film height h₀ (m).
    pub h0: f64,
}

impl PhysicalScales {
    pub fn new(gamma: f64, eta: f64, h0: f64) -> Result<Self> {
        let s = Self { gamma, eta, h0 };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("eta", self.eta), ("h0", self.h0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `3ηh₀/γ`.
    pub fn time_scale(&self) -> f64 {
        3.0 * self.eta * self.h0 / self.gamma
    }
}

/// `(X, T, H)` from physical `(x, t, h)`.
pub fn nondimensionalize(x: f64, t: f64, h: f64, scales: &PhysicalScales) -> Result<(f64, f64, f64)> {
    scales.validate()?;
    Ok((x / scales.h0, t * scales.gamma / (3.0 * scales.eta * scales.h0), h / scales.h0))
}

/// Inverse of [`nondimensionalize`].
pub fn redimensionalize(x: f64, t: f64, h: f64, scales: &PhysicalScales) -> Result<(f64, f64, f64)> {
    scales.validate()?;
    Ok((x * scales.h0, t * scales.time_scale(), h * scales.h0))
}
