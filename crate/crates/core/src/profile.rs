//! Canonical initial excess profiles.
//!
//! Profiles are sampled as cell averages over `[x - dx/2, x + dx/2]`, so the
//! discrete volume `Σ Δ_i dx` equals the continuous one up to round-off
//! whenever the profile fits inside the grid.

use std::f64::consts::{PI, SQRT_2};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Rectangle of the given width and height.
    Gate { width: f64, amplitude: f64 },
    /// Normal density scaled to the given volume.
    Gaussian { volume: f64, std_dev: f64 },
    /// Gaussian dip at `-separation/2` and bump at `+separation/2` with peak
    /// magnitude `amplitude`; zero volume by antisymmetry.
    DipBump {
        separation: f64,
        amplitude: f64,
        std_dev: f64,
    },
    /// Compactly supported `amplitude·cos²(πx/width)` on `|x| < width/2`.
    Bump { width: f64, amplitude: f64 },
    /// Single cell carrying `mass`.
    Dirac { mass: f64 },
    Zero,
    /// Piecewise-linear through `(x, value)` pairs, zero outside.
    Custom(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub shape: Shape,
    pub center: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

/// `P(a < N(0, σ²) < b)`, computed with `erfc` on the far side so the tails
/// keep their relative precision.
fn normal_mass(a: f64, b: f64, sigma: f64) -> f64 {
    let s = sigma * SQRT_2;
    if a >= 0.0 {
        0.5 * (libm::erfc(a / s) - libm::erfc(b / s))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b / s) - libm::erfc(-a / s))
    } else {
        0.5 * (libm::erf(b / s) - libm::erf(a / s))
    }
}

impl ProfileSpec {
    pub fn new(shape: Shape, center: f64) -> Result<Self> {
        match &shape {
            Shape::Gate { width, amplitude } => {
                positive("gate width", *width)?;
                finite("gate amplitude", *amplitude)?;
            }
            Shape::Gaussian { volume, std_dev } => {
                positive("gaussian std_dev", *std_dev)?;
                finite("gaussian volume", *volume)?;
            }
            Shape::DipBump {
                separation,
                amplitude,
                std_dev,
            } => {
                positive("dip_bump separation", *separation)?;
                positive("dip_bump std_dev", *std_dev)?;
                finite("dip_bump amplitude", *amplitude)?;
            }
            Shape::Bump { width, amplitude } => {
                positive("bump width", *width)?;
                finite("bump amplitude", *amplitude)?;
            }
            Shape::Dirac { mass } => finite("dirac mass", *mass)?,
            Shape::Zero => {}
            Shape::Custom(points) => {
                if points.len() < 2 {
                    return Err(Error::domain("custom profile needs at least two samples"));
                }
                if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return Err(Error::domain("custom profile x values must increase"));
                }
                if points.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
                    return Err(Error::domain("custom profile has non-finite samples"));
                }
            }
        }
        finite("center", center)?;
        Ok(Self { shape, center })
    }

    pub fn centered(shape: Shape) -> Result<Self> {
        Self::new(shape, 0.0)
    }

    /// Integral of `value_at` over a cell `[a, b]` in coordinates relative to
    /// the center.
    fn cell_integral(&self, a: f64, b: f64) -> f64 {
        match &self.shape {
            Shape::Gate { width, amplitude } => {
                let lo = a.max(-width / 2.0);
                let hi = b.min(width / 2.0);
                amplitude * (hi - lo).max(0.0)
            }
            Shape::Gaussian { volume, std_dev } => volume * normal_mass(a, b, *std_dev),
            Shape::DipBump {
                separation,
                amplitude,
                std_dev,
            } => {
                let scale = amplitude * std_dev * (2.0 * PI).sqrt();
                let h = separation / 2.0;
                scale
                    * (normal_mass(a - h, b - h, *std_dev) - normal_mass(a + h, b + h, *std_dev))
            }
            Shape::Bump { width, amplitude } => {
                let lo = a.max(-width / 2.0);
                let hi = b.min(width / 2.0);
                if hi <= lo {
                    return 0.0;
                }
                let prim = |y: f64| y / 2.0 + width / (4.0 * PI) * (2.0 * PI * y / width).sin();
                amplitude * (prim(hi) - prim(lo))
            }
            Shape::Dirac { .. } | Shape::Zero | Shape::Custom(_) => unreachable!(),
        }
    }

    /// Samples the profile on `grid` as an excess field at `T = 0`.
    pub fn sample(&self, grid: &Grid1D) -> Result<Field> {
        let dx = grid.dx();
        let values = match &self.shape {
            Shape::Zero => vec![0.0; grid.len()],
            Shape::Dirac { mass } => {
                let idx = ((self.center - grid.x_min()) / dx).round();
                if idx < 0.0 || idx >= grid.len() as f64 {
                    return Err(Error::domain("dirac center lies outside the grid"));
                }
                let mut v = vec![0.0; grid.len()];
                v[idx as usize] = mass / dx;
                v
            }
            Shape::Custom(_) => (0..grid.len()).map(|i| self.value_at(grid.x(i))).collect(),
            _ => (0..grid.len())
                .map(|i| {
                    let y = grid.x(i) - self.center;
                    self.cell_integral(y - dx / 2.0, y + dx / 2.0) / dx
                })
                .collect(),
        };
        Field::excess(*grid, values, 0.0)
    }

    /// Pointwise value Δ₀(x). A Dirac profile is infinite at its center.
    pub fn value_at(&self, x: f64) -> f64 {
        let y = x - self.center;
        match &self.shape {
            Shape::Gate { width, amplitude } => {
                if y.abs() < width / 2.0 {
                    *amplitude
                } else if y.abs() == width / 2.0 {
                    amplitude / 2.0
                } else {
                    0.0
                }
            }
            Shape::Gaussian { volume, std_dev } => {
                volume / (std_dev * (2.0 * PI).sqrt()) * (-y * y / (2.0 * std_dev * std_dev)).exp()
            }
            Shape::DipBump {
                separation,
                amplitude,
                std_dev,
            } => {
                let h = separation / 2.0;
                let g = |z: f64| (-z * z / (2.0 * std_dev * std_dev)).exp();
                amplitude * (g(y - h) - g(y + h))
            }
            Shape::Bump { width, amplitude } => {
                if y.abs() < width / 2.0 {
                    amplitude * (PI * y / width).cos().powi(2)
                } else {
                    0.0
                }
            }
            Shape::Dirac { .. } => {
                if y == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Shape::Zero => 0.0,
            Shape::Custom(points) => {
                let first = points[0];
                let last = points[points.len() - 1];
                if x < first.0 || x > last.0 {
                    return 0.0;
                }
                let k = points.partition_point(|p| p.0 <= x).clamp(1, points.len() - 1);
                let (x0, v0) = points[k - 1];
                let (x1, v1) = points[k];
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Analytic algebraic volume.
    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Gate { width, amplitude } => width * amplitude,
            Shape::Gaussian { volume, .. } => *volume,
            Shape::DipBump { .. } | Shape::Zero => 0.0,
            Shape::Bump { width, amplitude } => width * amplitude / 2.0,
            Shape::Dirac { mass } => *mass,
            Shape::Custom(p) => p
                .windows(2)
                .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
                .sum(),
        }
    }

    /// Width of the region where the profile is non-negligible.
    pub fn support_width(&self) -> f64 {
        match &self.shape {
            Shape::Gate { width, .. } | Shape::Bump { width, .. } => *width,
            Shape::Gaussian { std_dev, .. } => 16.0 * std_dev,
            Shape::DipBump {
                separation,
                std_dev,
                ..
            } => separation + 16.0 * std_dev,
            Shape::Dirac { .. } | Shape::Zero => 0.0,
            Shape::Custom(p) => p[p.len() - 1].0 - p[0].0,
        }
    }

    /// Largest `|x|` reached by the support, including the center offset.
    pub fn extent(&self) -> f64 {
        let c = match &self.shape {
            Shape::Custom(_) => 0.0,
            _ => self.center,
        };
        match &self.shape {
            Shape::Custom(p) => p[0].0.abs().max(p[p.len() - 1].0.abs()),
            _ => c.abs() + self.support_width() / 2.0,
        }
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite")))
    }
}

fn parse_params(s: &str, expected: usize, shape: &str) -> Result<Vec<f64>> {
    let params = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::domain(format!("{shape}: bad number {p:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if params.len() != expected {
        return Err(Error::domain(format!(
            "{shape} takes {expected} parameters, got {}",
            params.len()
        )));
    }
    Ok(params)
}

impl FromStr for Shape {
    type Err = Error;

    /// `gate:W,A`, `gaussian:V,S`, `dip_bump:SEP,A,S`, `bump:W,A`,
    /// `dirac[:MASS]`, `zero` (alias `flat`). Custom profiles are loaded from
    /// CSV by the config layer.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let shape = match name.trim() {
            "gate" => {
                let p = parse_params(rest, 2, "gate")?;
                Shape::Gate {
                    width: p[0],
                    amplitude: p[1],
                }
            }
            "gaussian" => {
                let p = parse_params(rest, 2, "gaussian")?;
                Shape::Gaussian {
                    volume: p[0],
                    std_dev: p[1],
                }
            }
            "dip_bump" => {
                let p = parse_params(rest, 3, "dip_bump")?;
                Shape::DipBump {
                    separation: p[0],
                    amplitude: p[1],
                    std_dev: p[2],
                }
            }
            "bump" => {
                let p = parse_params(rest, 2, "bump")?;
                Shape::Bump {
                    width: p[0],
                    amplitude: p[1],
                }
            }
            "dirac" if rest.is_empty() => Shape::Dirac { mass: 1.0 },
            "dirac" => Shape::Dirac {
                mass: parse_params(rest, 1, "dirac")?[0],
            },
            "zero" | "flat" => Shape::Zero,
            other => return Err(Error::domain(format!("unknown profile shape {other:?}"))),
        };
        Ok(shape)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::centered(0.1, 512).unwrap()
    }

    fn volume(f: &Field) -> f64 {
        f.values().iter().sum::<f64>() * f.grid().dx()
    }

    #[test]
    fn gate_volume_is_width_times_amplitude() {
        let p = ProfileSpec::centered(Shape::Gate {
            width: 1.0,
            amplitude: 0.1,
        })
        .unwrap();
        assert!((volume(&p.sample(&grid()).unwrap()) - 0.1).abs() < 1e-15);
        // Off-grid edges are handled by partial cell overlap.
        let p = ProfileSpec::new(
            Shape::Gate {
                width: 1.03,
                amplitude: 0.1,
            },
            0.017,
        )
        .unwrap();
        assert!((volume(&p.sample(&grid()).unwrap()) - 0.103).abs() < 1e-15);
    }

    #[test]
    fn gaussian_and_bump_volumes() {
        for sd in [0.05, 0.5, 2.0] {
            let p = ProfileSpec::centered(Shape::Gaussian {
                volume: 0.1,
                std_dev: sd,
            })
            .unwrap();
            assert!((volume(&p.sample(&grid()).unwrap()) - 0.1).abs() < 1e-12);
        }
        let b = ProfileSpec::new(
            Shape::Bump {
                width: 4.0,
                amplitude: 0.5,
            },
            0.33,
        )
        .unwrap();
        assert!((volume(&b.sample(&grid()).unwrap()) - 1.0).abs() < 1e-14);
        assert_eq!(b.volume(), 1.0);
    }

    #[test]
    fn dip_bump_has_zero_volume_and_negative_left_lobe() {
        let p = ProfileSpec::centered(Shape::DipBump {
            separation: 2.0,
            amplitude: 0.1,
            std_dev: 0.5,
        })
        .unwrap();
        let f = p.sample(&grid()).unwrap();
        assert!(volume(&f).abs() < 1e-12);
        assert!(p.value_at(-1.0) < 0.0 && p.value_at(1.0) > 0.0);
    }

    #[test]
    fn dirac_is_one_cell() {
        let p = ProfileSpec::centered(Shape::Dirac { mass: 1.0 }).unwrap();
        let f = p.sample(&grid()).unwrap();
        assert_eq!(f.values()[256], 10.0);
        assert_eq!(f.values().iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn custom_interpolates() {
        let p = ProfileSpec::centered(Shape::Custom(vec![(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)]))
            .unwrap();
        assert_eq!(p.value_at(0.5), 0.5);
        assert_eq!(p.value_at(2.0), 0.0);
        assert_eq!(p.volume(), 1.0);
        assert!(ProfileSpec::centered(Shape::Custom(vec![(1.0, 0.0), (0.0, 1.0)])).is_err());
    }

    #[test]
    fn parse_shapes() {
        assert_eq!(
            "gate:1,0.1".parse::<Shape>().unwrap(),
            Shape::Gate {
                width: 1.0,
                amplitude: 0.1
            }
        );
        assert_eq!("dirac".parse::<Shape>().unwrap(), Shape::Dirac { mass: 1.0 });
        assert_eq!("flat".parse::<Shape>().unwrap(), Shape::Zero);
        assert!("gate:1".parse::<Shape>().is_err());
        assert!("blob:1".parse::<Shape>().is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(ProfileSpec::centered(Shape::Gate {
            width: 0.0,
            amplitude: 1.0
        })
        .is_err());
        assert!(ProfileSpec::centered(Shape::Gaussian {
            volume: 1.0,
            std_dev: -1.0
        })
        .is_err());
    }
}
