use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use super::iq::apply_iq;
use super::test_fn::{Smoothness, TestFunction};
use crate::error::{Error, Result};
use crate::symbol::{CutoffKappa, FieldSymbol, Symbol, SymbolField};

/// Samples of a function on a uniform grid `y_j = start + j h`, `j < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction1D {
    grid: Vec<f64>,
    values: Vec<f64>,
    spacing: f64,
}

impl GridFunction1D {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::arg("grid and values must have equal length of at least 2"));
        }
        let n = grid.len();
        let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::arg("grid must be strictly increasing"));
        }
        let scale = grid[0].abs().max(grid[n - 1].abs()).max(h);
        for (j, y) in grid.iter().enumerate() {
            if (y - (grid[0] + j as f64 * h)).abs() > 1e-12 * scale {
                return Err(Error::arg(format!("grid is not uniform at index {j}")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("grid values must be finite"));
        }
        Ok(Self { grid, values, spacing: h })
    }

    /// `n` samples of `u` on `[lo, lo + n h)` with `h = (hi - lo)/n` (periodic grid).
    pub fn sample(u: &TestFunction, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if u.dim() != 1 {
            return Err(Error::Unsupported("Fourier grids are one-dimensional".into()));
        }
        if !(hi > lo) || n < 2 {
            return Err(Error::arg("empty sampling interval"));
        }
        let h = (hi - lo) / n as f64;
        let grid: Vec<f64> = (0..n).map(|j| lo + j as f64 * h).collect();
        let values = grid.iter().map(|y| u.value(&[*y])).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Relative size below which `|û(ξ)|(1+ξ²)` is dropped from the frequency window.
pub const SPECTRAL_TAIL_TOL: f64 = 1e-12;

/// Multiple of `ε √log₂(n) ‖u‖₂` (the rms FFT rounding error) treated as the rounding floor of a DFT coefficient.
pub const FFT_NOISE_FACTOR: f64 = 4.0;

/// `Au(x) = -∫ e^{ixξ} q(x,ξ) û(ξ) dξ` with `û(ξ) = (2π)^{-1} ∫ e^{-iyξ} u(y) dy`,
/// discretised by the DFT of the samples and summed directly for each `x`.
pub fn apply_pseudo_fourier<S: Symbol + ?Sized>(u: &GridFunction1D, symbol: &S, x_eval: &[f64]) -> Result<Vec<f64>> {
    if symbol.dim() != 1 {
        return Err(Error::Unsupported("Fourier side needs a one-dimensional symbol".into()));
    }
    let n = u.len();
    if !n.is_power_of_two() {
        return Err(Error::arg(format!("grid length {n} is not a power of two")));
    }
    let h = u.spacing();
    let y0 = u.grid()[0];
    let mut spec: Vec<Complex64> = u.values().iter().map(|v| Complex64::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut spec);

    let dxi = 2.0 * PI / (n as f64 * h);
    let half = n / 2;
    // Signed frequency index k' ∈ (-n/2, n/2); the Nyquist bin has no conjugate partner and is skipped.
    // u is real, so its exact transform is Hermitian; keep only that part of the computed one.
    for k in 1..half {
        let avg = 0.5 * (spec[k] + spec[n - k].conj());
        spec[k] = avg;
        spec[n - k] = avg.conj();
    }
    spec[0].im = 0.0;
    let coeff = |k: i64| spec[k.rem_euclid(n as i64) as usize];
    let weight = |k: i64| {
        let xi = k as f64 * dxi;
        coeff(k).norm() * (1.0 + xi * xi)
    };
    // Coefficients below the FFT rounding level carry no information and are amplified by |q|.
    let l2: f64 = u.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    let noise = FFT_NOISE_FACTOR * f64::EPSILON * (n as f64).log2().sqrt() * l2;
    let peak = (0..half as i64).map(weight).fold(0.0, f64::max);
    let mut kmax = half as i64 - 1;
    while kmax > 0 && (weight(kmax) <= SPECTRAL_TAIL_TOL * peak || coeff(kmax).norm() <= noise) {
        kmax -= 1;
    }

    let unorm = u.sup_norm();
    let out: Vec<Result<f64>> = x_eval
        .par_iter()
        .map(|&x| {
            let xis: Vec<f64> = (0..=kmax).map(|k| k as f64 * dxi).collect();
            let neg: Vec<f64> = xis.iter().map(|xi| -xi).collect();
            let qp = symbol.eval_line(&[x], &xis)?;
            let qn = symbol.eval_line(&[x], &neg)?;
            let term = |k: i64, xi: f64, q: Complex64| Complex64::from_polar(1.0, (x - y0) * xi) * q * coeff(k);
            let mut acc = term(0, 0.0, qp[0]);
            let mut mag = acc.norm();
            // ±k are added together so that conjugate pairs cancel before reaching the accumulator.
            for k in 1..=kmax {
                let j = k as usize;
                let (a, b) = (term(k, xis[j], qp[j]), term(-k, neg[j], qn[j]));
                mag += a.norm() + b.norm();
                acc += a + b;
            }
            let v = -acc / n as f64;
            // Cancellation among terms of size |q U| leaves rounding noise in the imaginary part.
            let floor = 64.0 * f64::EPSILON * mag / n as f64;
            if v.im.abs() > (1e-6 * unorm).max(floor).max(f64::MIN_POSITIVE) {
                return Err(Error::Numeric {
                    what: format!("imaginary residue of the Fourier operator at x = {x}"),
                    residual: v.im.abs(),
                });
            }
            Ok(v.re)
        })
        .collect();
    out.into_iter().collect()
}

/// Fourier grid used by [`operator_identity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierGrid {
    pub n: usize,
    /// Margin added beyond the jump reach on each side, so periodic images of `u` stay out of reach.
    pub padding: f64,
}

impl Default for FourierGrid {
    // A C² spline has O(h) spectral error, so the default grid is fine.
    fn default() -> Self {
        Self { n: 1 << 18, padding: 1.0 }
    }
}

/// `max_x |I_q u(x) - Au(x)|` over `sample_x`.
pub fn operator_identity_check(
    u: &TestFunction,
    field: &SymbolField,
    sample_x: &[f64],
    kappa: &CutoffKappa,
) -> Result<f64> {
    operator_identity_check_with(u, field, sample_x, kappa, FourierGrid::default())
}

pub fn operator_identity_check_with(
    u: &TestFunction,
    field: &SymbolField,
    sample_x: &[f64],
    kappa: &CutoffKappa,
    grid: FourierGrid,
) -> Result<f64> {
    if field.dim() != 1 || u.dim() != 1 {
        return Err(Error::Unsupported("operator identity is checked in one dimension".into()));
    }
    // Bounded functions qualify when they decay to zero and carry an effective support box.
    let Some((lo, hi)) = &u.support else {
        return Err(Error::arg(format!("test function '{}' has no support box", u.name())));
    };
    if u.smoothness == Smoothness::C2Bounded && !u.vanishes_at_infinity {
        return Err(Error::arg(format!("test function '{}' does not vanish at infinity", u.name())));
    }
    if !(grid.n.is_power_of_two() && grid.padding >= 0.0) {
        return Err(Error::arg("Fourier grid needs a power-of-two size and nonnegative padding"));
    }
    if sample_x.is_empty() {
        return Ok(0.0);
    }
    let (lo, hi) = (lo[0], hi[0]);
    let mut reach = 0.0f64;
    for x in sample_x {
        reach = reach.max(field.triplet_at(&[*x])?.jumps.reach());
    }
    let smin = sample_x.iter().cloned().fold(lo, f64::min);
    let smax = sample_x.iter().cloned().fold(hi, f64::max);
    let a = smin - reach - grid.padding;
    let b = smax + reach + grid.padding;
    let g = GridFunction1D::sample(u, a, b, grid.n)?;
    let sym = FieldSymbol { field, kappa: *kappa };
    let fourier = apply_pseudo_fourier(&g, &sym, sample_x)?;
    let mut gap = 0.0f64;
    for (x, f) in sample_x.iter().zip(&fourier) {
        let iq = apply_iq(u, &[*x], field, kappa)?;
        gap = gap.max((iq - f).abs());
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::space::StateSpace;
    use crate::symbol::{ClosureSymbol, JumpMeasure, LevyTriplet};

    fn bump_grid(n: usize) -> (TestFunction, GridFunction1D) {
        let u = TestFunction::gaussian_bump(vec![0.0], 1.0, 1.0);
        let g = GridFunction1D::sample(&u, -16.0, 16.0, n).unwrap();
        (u, g)
    }

    #[test]
    fn gaussian_symbol_is_half_second_derivative() {
        let (u, g) = bump_grid(1 << 10);
        let sym = ClosureSymbol { dim: 1, f: |_x: &[f64], xi: &[f64]| Complex64::new(0.5 * xi[0] * xi[0], 0.0) };
        let xs = [-1.0, -0.3, 0.0, 0.7, 2.0];
        let v = apply_pseudo_fourier(&g, &sym, &xs).unwrap();
        for (x, a) in xs.iter().zip(v) {
            assert!((a - 0.5 * u.hessian(&[*x])[0]).abs() < 1e-10, "{x}: {a}");
        }
    }

    #[test]
    fn drift_symbol_is_derivative() {
        let (u, g) = bump_grid(1 << 10);
        let sym = ClosureSymbol { dim: 1, f: |_x: &[f64], xi: &[f64]| Complex64::new(0.0, -xi[0]) };
        let xs = [-1.5, 0.2, 1.1];
        let v = apply_pseudo_fourier(&g, &sym, &xs).unwrap();
        for (x, a) in xs.iter().zip(v) {
            assert!((a - u.gradient(&[*x])[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn atom_symbol_is_shift_difference() {
        let (u, g) = bump_grid(1 << 10);
        let f = SymbolField::constant(
            StateSpace::all(1),
            LevyTriplet::scalar(0.0, 0.0, 0.0, JumpMeasure::single_atom(vec![1.0], 1.0)).unwrap(),
        );
        let k = CutoffKappa::indicator(0.5).unwrap();
        let sym = FieldSymbol { field: &f, kappa: k };
        let xs = [-1.0, 0.0, 0.5];
        let v = apply_pseudo_fourier(&g, &sym, &xs).unwrap();
        for (x, a) in xs.iter().zip(v) {
            assert!((a - (u.value(&[x + 1.0]) - u.value(&[*x]))).abs() < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_symbol_reports_residue() {
        let (_, g) = bump_grid(1 << 8);
        let sym = ClosureSymbol { dim: 1, f: |_x: &[f64], xi: &[f64]| Complex64::new(0.0, xi[0] * xi[0]) };
        assert!(matches!(apply_pseudo_fourier(&g, &sym, &[0.3]), Err(Error::Numeric { .. })));
    }

    #[test]
    fn grid_validation() {
        assert!(GridFunction1D::new(vec![0.0, 1.0, 3.0], vec![0.0; 3]).is_err());
        assert!(GridFunction1D::new(vec![0.0, 1.0], vec![0.0]).is_err());
        let (_, g) = bump_grid(1000);
        let sym = ClosureSymbol { dim: 1, f: |_x: &[f64], _xi: &[f64]| Complex64::new(0.0, 0.0) };
        assert!(apply_pseudo_fourier(&g, &sym, &[0.0]).is_err());
    }

    #[test]
    fn zero_function_has_zero_gap() {
        let mut z = TestFunction::zero(1);
        z.smoothness = Smoothness::CinfCompact;
        z.support = Some((vec![-1.0], vec![1.0]));
        let f = SymbolField::constant(StateSpace::all(1), LevyTriplet::brownian(1));
        let gap = operator_identity_check(&z, &f, &[0.0, 0.5], &CutoffKappa::default()).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn identity_on_brownian_cosine_bump() {
        let u = TestFunction::cosine_bump(0.0, 1.0, 1.0);
        let f = SymbolField::constant(StateSpace::all(1), LevyTriplet::brownian(1));
        let xs: Vec<f64> = (0..21).map(|i| -1.2 + 0.12 * i as f64).collect();
        let gap = operator_identity_check(&u, &f, &xs, &CutoffKappa::default()).unwrap();
        assert!(gap <= 1e-4 * (1.0 + u.norms.c2()), "gap {gap}");
    }

    #[test]
    fn identity_on_brownian_cubic_spline() {
        let u = TestFunction::cubic_spline_bump(0.0, 1.0, 1.0);
        let f = SymbolField::constant(StateSpace::all(1), LevyTriplet::brownian(1));
        let xs: Vec<f64> = (0..21).map(|i| -1.5 + 0.15 * i as f64).collect();
        let gap = operator_identity_check(&u, &f, &xs, &CutoffKappa::default()).unwrap();
        assert!(gap <= 1e-4, "gap {gap}");
    }

    #[test]
    fn decaying_gaussian_is_accepted_and_plain_bounded_is_not() {
        let u = TestFunction::gaussian_bump(vec![0.0], 1.0, 1.0);
        let f = SymbolField::constant(StateSpace::all(1), LevyTriplet::brownian(1));
        let gap = operator_identity_check(&u, &f, &[0.0, 0.4], &CutoffKappa::default()).unwrap();
        assert!(gap < 1e-6, "gap {gap}");
        let mut w = u.clone();
        w.vanishes_at_infinity = false;
        assert!(operator_identity_check(&w, &f, &[0.0], &CutoffKappa::default()).is_err());
    }
}
