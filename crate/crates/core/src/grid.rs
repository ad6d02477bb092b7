use crate::error::{Error, Result};

/// Fraction of points at each end of the grid checked by the decay test.
pub const EDGE_FRACTION: f64 = 0.05;
/// Edge values must stay below this fraction of the overall maximum.
pub const EDGE_RATIO: f64 = 1e-6;

/// Uniform one-dimensional grid `x_i = x_min + i·dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    dx: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, dx: f64, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::domain(format!("grid needs at least 8 points, got {n}")));
        }
        if !(dx > 0.0) || !dx.is_finite() || !x_min.is_finite() {
            return Err(Error::domain(format!(
                "invalid grid spacing {dx} or origin {x_min}"
            )));
        }
        Ok(Self { x_min, dx, n })
    }

    /// Grid of `n` points spaced `dx` with `x = 0` at index `n / 2`.
    pub fn centered(dx: f64, n: usize) -> Result<Self> {
        Self::new(-((n / 2) as f64) * dx, dx, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// Period of the spectral box, `n·dx`.
    pub fn length(&self) -> f64 {
        self.n as f64 * self.dx
    }
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }
    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// What a [`Field`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Excess Δ = H - 1 over the flat film.
    Excess,
    /// Film height H, strictly positive.
    Height,
}

impl FieldKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FieldKind::Excess => "excess",
            FieldKind::Height => "height",
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "excess" => Ok(FieldKind::Excess),
            "height" => Ok(FieldKind::Height),
            other => Err(Error::domain(format!("unknown field kind {other:?}"))),
        }
    }
}

/// A sampled profile at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
    time: f64,
    kind: FieldKind,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>, time: f64, kind: FieldKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if !(time >= 0.0) || !time.is_finite() {
            return Err(Error::domain(format!("field time must be >= 0, got {time}")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at index {i}")));
        }
        if kind == FieldKind::Height {
            if let Some(i) = values.iter().position(|&v| v <= 0.0) {
                return Err(Error::PositivityLoss {
                    index: i,
                    value: values[i],
                });
            }
        }
        Ok(Self {
            grid,
            values,
            time,
            kind,
        })
    }

    pub fn excess(grid: Grid1D, values: Vec<f64>, time: f64) -> Result<Self> {
        Self::new(grid, values, time, FieldKind::Excess)
    }

    pub fn height(grid: Grid1D, values: Vec<f64>, time: f64) -> Result<Self> {
        Self::new(grid, values, time, FieldKind::Height)
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
            time: 0.0,
            kind: FieldKind::Excess,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn time(&self) -> f64 {
        self.time
    }
    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// `H = 1 + Δ` for an excess field; errors if the film would touch zero.
    pub fn to_height(&self) -> Result<Field> {
        match self.kind {
            FieldKind::Height => Ok(self.clone()),
            FieldKind::Excess => Field::height(
                self.grid,
                self.values.iter().map(|v| 1.0 + v).collect(),
                self.time,
            ),
        }
    }

    /// `Δ = H - 1` for a height field.
    pub fn to_excess(&self) -> Field {
        match self.kind {
            FieldKind::Excess => self.clone(),
            FieldKind::Height => Field {
                grid: self.grid,
                values: self.values.iter().map(|v| v - 1.0).collect(),
                time: self.time,
                kind: FieldKind::Excess,
            },
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|value|` over the outer [`EDGE_FRACTION`] of points at both
    /// ends, and over the whole grid.
    pub fn edge_and_overall_max(&self) -> (f64, f64) {
        let n = self.values.len();
        let k = ((n as f64 * EDGE_FRACTION).ceil() as usize).max(1);
        let edge = self.values[..k]
            .iter()
            .chain(&self.values[n - k..])
            .fold(0.0f64, |m, v| m.max(v.abs()));
        (edge, self.max_abs())
    }

    /// Checks that an excess field vanishes near both grid ends.
    pub fn check_decay(&self) -> Result<()> {
        let (edge, overall) = self.edge_and_overall_max();
        if edge > EDGE_RATIO * overall {
            return Err(Error::Decay { edge, overall });
        }
        Ok(())
    }

    pub fn max_distance(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
