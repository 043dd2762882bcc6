//! Fourier-multiplier evaluation on periodic lattices.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{Field, GridSpec};

/// Precomputed FFT plans and `|ξ|` table for one grid.
#[derive(Clone)]
pub struct SpectralOperator {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    norms: Vec<f64>,
}

impl std::fmt::Debug for SpectralOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOperator")
            .field("grid", &self.grid)
            .finish()
    }
}

impl SpectralOperator {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.points),
            inverse: planner.plan_fft_inverse(grid.points),
            norms: grid.frequency_norms(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `|ξ|` per frequency site, FFT order.
    pub fn frequency_norms(&self) -> &[f64] {
        &self.norms
    }

    /// Unnormalized forward DFT in place (all axes).
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse DFT in place, including the 1/N^n normalization.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        if self.grid.dim == 2 {
            transpose_square(data, n);
            plan.process_with_scratch(data, &mut scratch);
            transpose_square(data, n);
        }
    }

    /// Spectral coefficients of `f` (unnormalized DFT).
    pub fn spectrum(&self, f: &Field) -> Vec<Complex64> {
        let mut data = f.values.clone();
        self.forward_in_place(&mut data);
        data
    }

    /// `F^{-1} m(|ξ|) F f`.
    pub fn apply_symbol(&self, f: &Field, symbol: impl Fn(f64) -> Complex64) -> Field {
        let mut data = f.values.clone();
        self.forward_in_place(&mut data);
        for (z, &k) in data.iter_mut().zip(&self.norms) {
            *z *= symbol(k);
        }
        self.inverse_in_place(&mut data);
        Field {
            grid: self.grid,
            values: data,
        }
    }

    /// Multiply the spectrum by a precomputed per-site table.
    pub fn apply_table(&self, data: &mut [Complex64], table: &[Complex64]) {
        self.forward_in_place(data);
        for (z, m) in data.iter_mut().zip(table) {
            *z *= m;
        }
        self.inverse_in_place(data);
    }

    pub fn half_laplacian(&self, f: &Field) -> Field {
        self.apply_symbol(f, |k| Complex64::new(k, 0.0))
    }

    /// Free half-wave flow `e^{it|ξ|}`.
    pub fn propagate(&self, f: &Field, t: f64) -> Field {
        if t == 0.0 {
            return f.clone();
        }
        self.apply_symbol(f, |k| Complex64::cis(t * k))
    }

    /// Share of the spectral energy carried by `|ξ|` above half the Nyquist frequency.
    pub fn high_frequency_fraction(&self, f: &Field) -> f64 {
        let spec = self.spectrum(f);
        let cut = 0.5 * self.grid.nyquist();
        let (mut hi, mut all) = (0.0, 0.0);
        for (z, &k) in spec.iter().zip(&self.norms) {
            let e = z.norm_sqr();
            all += e;
            if k > cut {
                hi += e;
            }
        }
        if all == 0.0 {
            0.0
        } else {
            hi / all
        }
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Half Laplacian through the `|ξ|` multiplier on the field's own lattice.
pub fn frac_laplacian_spectral(f: &Field) -> Field {
    SpectralOperator::new(f.grid).half_laplacian(f)
}

/// Largest value over the lattice of `Λ(φ^2) - 2φΛφ` for real `φ`, `Λ` the
/// spectral half Laplacian. The pointwise inequality predicts a value `<= 0`.
pub fn cordoba_check(phi: &Field) -> f64 {
    let op = SpectralOperator::new(phi.grid);
    let real = phi.map(|z| Complex64::new(z.re, 0.0));
    let square = real.map(|z| z * z);
    let lap = op.half_laplacian(&real);
    let lap_sq = op.half_laplacian(&square);
    real.values
        .iter()
        .zip(lap.values.iter().zip(&lap_sq.values))
        .map(|(p, (l, ls))| ls.re - 2.0 * p.re * l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_is_annihilated() {
        let g = GridSpec::new(2, 3.0, 16).unwrap();
        let f = Field::from_real(g, |_, _| 2.5);
        let out = frac_laplacian_spectral(&f);
        assert!(out.sup_norm() < 1e-13);
    }

    #[test]
    fn fourier_mode_is_an_eigenfunction() {
        let g = GridSpec::new(1, PI, 64).unwrap();
        for k in [-31.0f64, -5.0, 1.0, 7.0, 32.0] {
            let f = Field::from_fn(g, |x, _| Complex64::cis(k * x));
            let out = frac_laplacian_spectral(&f);
            let expect = f.scale(Complex64::new(k.abs(), 0.0));
            assert!(out.max_abs_diff(&expect) < 1e-11, "k={k}");
        }
        let g2 = GridSpec::new(2, PI, 32).unwrap();
        let f = Field::from_fn(g2, |x, y| Complex64::cis(3.0 * x - 4.0 * y));
        let out = frac_laplacian_spectral(&f);
        assert!(out.max_abs_diff(&f.scale(Complex64::new(5.0, 0.0))) < 1e-11);
    }

    #[test]
    fn propagation_is_unitary_and_reversible() {
        let g = GridSpec::new(1, 20.0, 256).unwrap();
        let op = SpectralOperator::new(g);
        let f = Field::from_fn(g, |x, _| {
            Complex64::new((-x * x).exp(), x * (-x * x / 2.0).exp())
        });
        let out = op.propagate(&f, 1.7);
        assert!((out.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-14);
        let back = op.propagate(&out, -1.7);
        assert!(back.max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn zero_field_has_no_violation() {
        let g = GridSpec::new(1, 5.0, 64).unwrap();
        assert_eq!(cordoba_check(&Field::zeros(g)), 0.0);
    }
}
