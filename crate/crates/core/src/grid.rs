//! Periodic sampling lattices on [-L, L)^n and complex fields living on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic lattice with `points` samples per axis on `[-half_width, half_width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if points < 8 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= 8, got {points}"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            points,
        })
    }

    /// Smallest even point count reaching at least `half_width` with the exact spacing `dx`.
    pub fn with_spacing(dim: usize, min_half_width: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {dx}"
            )));
        }
        let mut points = (2.0 * min_half_width / dx).ceil() as usize;
        points += points % 2;
        let points = points.max(8);
        Self::new(dim, 0.5 * points as f64 * dx, points)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coord(j)).collect()
    }

    /// Coordinates of flat (row-major) site `idx`; the second entry is 0 in 1D.
    pub fn site(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.coord(idx), 0.0],
            _ => [self.coord(idx / self.points), self.coord(idx % self.points)],
        }
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.site(idx);
        x.hypot(y)
    }

    /// Angular wavenumbers in FFT order: 2*pi*m/(2L), m = 0..N/2-1, -N/2..-1.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points as i64;
        let base = std::f64::consts::PI / self.half_width;
        (0..n)
            .map(|m| if m < n / 2 { m } else { m - n })
            .map(|m| base * m as f64)
            .collect()
    }

    /// |xi| at every site of the frequency lattice, row-major like the field.
    pub fn frequency_norms(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        match self.dim {
            1 => k.iter().map(|v| v.abs()).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.len());
                for a in &k {
                    for b in &k {
                        out.push(a.hypot(*b));
                    }
                }
                out
            }
        }
    }

    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// The lattice dilated by `1/rho` (same point count).
    pub fn dilated(&self, rho: f64) -> Result<Self> {
        Self::new(self.dim, self.half_width / rho, self.points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values, grid expects {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f(x, y)` at every site (`y = 0` in 1D).
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.site(i);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn from_real(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |x, y| Complex64::new(f(x, y), 0.0))
    }

    pub fn from_radial(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self::from_real(grid, |x, y| f(x.hypot(y)))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Lattice L^2 norm, sqrt(sum |u|^2 dx^n).
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum::<f64>() * self.grid.cell_volume()
    }

    /// Lattice pairing sum conj(u) v dx^n.
    pub fn inner(&self, other: &Field) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.cell_volume()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|z| c * z)
    }

    pub fn axpy(&self, a: Complex64, other: &Field) -> Field {
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
