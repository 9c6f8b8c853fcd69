use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::cutoff::CutoffKappa;
use super::jump::JumpMeasure;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureOptions;

/// Killing rate, drift, diffusion matrix and jump measure at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriplet {
    pub killing: f64,
    pub drift: DVector<f64>,
    pub diffusion: DMatrix<f64>,
    pub jumps: JumpMeasure,
}

const PSD_TOL: f64 = 1e-12;

pub(crate) fn check_psd(q: &DMatrix<f64>) -> Result<()> {
    let scale = 1.0 + q.amax();
    let asym = (q - q.transpose()).amax();
    if asym > PSD_TOL * scale {
        return Err(Error::arg(format!("diffusion matrix is not symmetric (max asymmetry {asym:e})")));
    }
    if q.nrows() == 0 {
        return Ok(());
    }
    let min_eig = if q.nrows() == 1 { q[(0, 0)] } else { q.clone().symmetric_eigen().eigenvalues.min() };
    if min_eig < -PSD_TOL * scale {
        return Err(Error::arg(format!("diffusion matrix is not positive semidefinite (eigenvalue {min_eig:e})")));
    }
    Ok(())
}

/// `e^{iθ} - 1` without cancellation for small θ.
#[inline]
pub(crate) fn expm1_i(theta: f64) -> Complex64 {
    let s = (0.5 * theta).sin();
    Complex64::new(-2.0 * s * s, theta.sin())
}

impl LevyTriplet {
    pub fn new(killing: f64, drift: DVector<f64>, diffusion: DMatrix<f64>, jumps: JumpMeasure) -> Result<Self> {
        let d = drift.len();
        if diffusion.nrows() != d || diffusion.ncols() != d {
            return Err(Error::arg(format!(
                "diffusion is {}x{}, drift has dimension {d}",
                diffusion.nrows(),
                diffusion.ncols()
            )));
        }
        if !(killing >= 0.0 && killing.is_finite()) {
            return Err(Error::arg(format!("killing rate must be finite and nonnegative, got {killing}")));
        }
        if drift.iter().chain(diffusion.iter()).any(|v| !v.is_finite()) {
            return Err(Error::arg("triplet contains non-finite entries"));
        }
        check_psd(&diffusion)?;
        jumps.validate(d)?;
        Ok(Self { killing, drift, diffusion, jumps })
    }

    pub fn zero(dim: usize) -> Self {
        Self { killing: 0.0, drift: DVector::zeros(dim), diffusion: DMatrix::zeros(dim, dim), jumps: JumpMeasure::None }
    }

    /// Standard Brownian motion: `Q = I`.
    pub fn brownian(dim: usize) -> Self {
        Self { diffusion: DMatrix::identity(dim, dim), ..Self::zero(dim) }
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(killing: f64, drift: f64, variance: f64, jumps: JumpMeasure) -> Result<Self> {
        Self::new(killing, DVector::from_element(1, drift), DMatrix::from_element(1, 1, variance), jumps)
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    pub fn with_killing(mut self, killing: f64) -> Self {
        self.killing = killing;
        self
    }

    /// Lévy-Khintchine exponent `a - iℓ'ξ + ½ξ'Qξ - ∫(e^{iy'ξ} - 1 - iy'ξκ(y)) N(dy)`.
    pub fn symbol(&self, xi: &[f64], kappa: &CutoffKappa, opts: QuadratureOptions) -> Result<Complex64> {
        let d = self.dim();
        if xi.len() != d {
            return Err(Error::arg(format!("frequency has dimension {}, triplet has {d}", xi.len())));
        }
        let xi_v = DVector::from_column_slice(xi);
        let drift = self.drift.dot(&xi_v);
        let quad = 0.5 * (&self.diffusion * &xi_v).dot(&xi_v);
        let mut q = Complex64::new(self.killing + quad, -drift);
        if !self.jumps.is_none() {
            let integral = self.jumps.integrate_complex(
                |y| {
                    let theta: f64 = y.iter().zip(xi).map(|(a, b)| a * b).sum();
                    expm1_i(theta) - Complex64::new(0.0, theta * kappa.eval(y))
                },
                &kappa.breakpoints(),
                opts,
            )?;
            q -= integral;
        }
        Ok(q)
    }

    /// `∫ y κ(y) N(dy)`: the truncated first moment that turns jump sums into compensated ones.
    pub fn truncated_jump_mean(&self, kappa: &CutoffKappa, opts: QuadratureOptions) -> Result<DVector<f64>> {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        if self.jumps.is_none() {
            return Ok(out);
        }
        for j in 0..d {
            out[j] = self.jumps.integrate(|y| y[j] * kappa.eval(y), &kappa.breakpoints(), opts)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::jump::{Atom, JumpLaw};
    use proptest::prelude::*;

    fn opts() -> QuadratureOptions {
        QuadratureOptions::default()
    }

    #[test]
    fn gaussian_part() {
        let t = LevyTriplet::scalar(0.0, 0.0, 1.0, JumpMeasure::None).unwrap();
        let q = t.symbol(&[2.0], &CutoffKappa::default(), opts()).unwrap();
        assert_eq!(q, Complex64::new(2.0, 0.0));
    }

    #[test]
    fn one_atom_outside_cutoff() {
        let t = LevyTriplet::scalar(0.0, 0.0, 0.0, JumpMeasure::single_atom(vec![3.0], 1.0)).unwrap();
        let q = t.symbol(&[1.0], &CutoffKappa::indicator(1.0).unwrap(), opts()).unwrap();
        // 1 - e^{3i}
        let expect = Complex64::new(1.0 - 3f64.cos(), -3f64.sin());
        assert!((q - expect).norm() < 1e-15);
        assert!((q.re - 1.98999).abs() < 1e-5 && (q.im + 0.14112).abs() < 1e-5);
    }

    #[test]
    fn rejects_indefinite_or_asymmetric_q() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(LevyTriplet::new(0.0, DVector::zeros(2), bad, JumpMeasure::None).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(LevyTriplet::new(0.0, DVector::zeros(2), asym, JumpMeasure::None).is_err());
        assert!(LevyTriplet::scalar(-1.0, 0.0, 1.0, JumpMeasure::None).is_err());
    }

    #[test]
    fn killing_is_the_value_at_zero() {
        let t = LevyTriplet::brownian(2).with_killing(0.7);
        assert_eq!(t.symbol(&[0.0, 0.0], &CutoffKappa::default(), opts()).unwrap(), Complex64::new(0.7, 0.0));
    }

    #[test]
    fn cutoff_forms_agree_off_the_annulus() {
        let n = JumpMeasure::atomic(vec![Atom::new(vec![0.4], 1.5), Atom::new(vec![-3.0], 0.5)]);
        let t = LevyTriplet::scalar(0.0, 0.3, 0.2, n).unwrap();
        let a = CutoffKappa::indicator(1.0).unwrap();
        let b = CutoffKappa::smooth_ramp(1.0).unwrap();
        for xi in [-3.0, -0.5, 0.7, 4.0] {
            assert_eq!(t.symbol(&[xi], &a, opts()).unwrap(), t.symbol(&[xi], &b, opts()).unwrap());
        }
    }

    #[test]
    fn normal_jumps_match_closed_form() {
        // ∫(e^{iyξ}-1) λ N(μ,σ²)(dy) = λ(e^{iμξ-σ²ξ²/2} - 1); the κ-term with R large
        // enough is -iξλ ∫_{|y|≤R} y φ(y) dy ≈ -iξλμ.
        let (rate, mu, sd) = (1.3, 0.2, 0.4);
        let law = JumpLaw::Normal1d { mean: mu, std: sd };
        let t = LevyTriplet::scalar(0.0, 0.0, 0.0, JumpMeasure::FiniteActivity { rate, law }).unwrap();
        let kappa = CutoffKappa::indicator(30.0).unwrap();
        for xi in [-2.0, 0.5, 3.0] {
            let q = t.symbol(&[xi], &kappa, opts()).unwrap();
            let cf = Complex64::new(-0.5 * sd * sd * xi * xi, mu * xi).exp();
            let expect = -(rate * (cf - 1.0) - Complex64::new(0.0, xi * rate * mu));
            assert!((q - expect).norm() < 1e-9, "{q} vs {expect}");
        }
    }

    proptest! {
        #[test]
        fn hermitian_symmetry(xi in -20.0f64..20.0, y in 0.1f64..4.0, w in 0.0f64..3.0, l in -2.0f64..2.0) {
            let t = LevyTriplet::scalar(0.0, l, 0.7, JumpMeasure::atomic(vec![Atom::new(vec![y], w), Atom::new(vec![-0.5 * y], w)])).unwrap();
            let k = CutoffKappa::default();
            let a = t.symbol(&[xi], &k, opts()).unwrap();
            let b = t.symbol(&[-xi], &k, opts()).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-12);
            prop_assert!(a.re >= -1e-12);
        }
    }
}
