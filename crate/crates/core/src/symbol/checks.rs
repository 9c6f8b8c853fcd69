//! Numerical checks of the growth and negative-definiteness properties of symbols.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::cutoff::{norm, CutoffKappa};
use super::field::Symbol;
use super::triplet::expm1_i;
use crate::error::{Error, Result};
use crate::rng::path_rng;
use rand::Rng;

/// `|y|² 1{|y| ≤ ε} + 1{|y| > ε}`.
pub fn b_epsilon(y: &[f64], eps: f64) -> f64 {
    let r = norm(y);
    if r <= eps {
        r * r
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub(crate) fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, holds: lhs <= rhs }
    }
}

/// `|e^{iy'ξ} - 1 - iy'ξκ(y)|` against `2(R+1)(1+|ξ|²) b_{R∧1}(y)`.
pub fn integrand_bound_check(xi: &[f64], y: &[f64], kappa: &CutoffKappa) -> BoundCheck {
    let theta: f64 = y.iter().zip(xi).map(|(a, b)| a * b).sum();
    let lhs = (expm1_i(theta) - Complex64::new(0.0, theta * kappa.eval(y))).norm();
    let r = kappa.radius();
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    let rhs = 2.0 * (r + 1.0) * (1.0 + xi2) * b_epsilon(y, r.min(1.0));
    BoundCheck::new(lhs, rhs)
}

/// Outcome of a randomised sweep of a pointwise bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen (`0` when every `rhs` vanishes with `lhs`).
    pub worst_ratio: f64,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub(crate) fn from_checks<I: IntoIterator<Item = BoundCheck>>(checks: I) -> Self {
        let mut r = SweepReport { samples: 0, violations: 0, worst_ratio: 0.0 };
        for c in checks {
            r.samples += 1;
            if !c.holds {
                r.violations += 1;
            }
            let ratio = if c.rhs > 0.0 {
                c.lhs / c.rhs
            } else if c.lhs > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            r.worst_ratio = r.worst_ratio.max(ratio);
        }
        r
    }
}

/// Signed jump size with log-uniform modulus in `[1e-6, 10]`, so both the small-jump and the
/// large-jump regime of `b_ε` are hit.
pub(crate) fn sample_jump_size<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let r = 10f64.powf(rng.random_range(-6.0..1.0));
    if rng.random::<bool>() {
        r
    } else {
        -r
    }
}

/// [`integrand_bound_check`] on `n` seeded samples with `|ξ_i| ≤ 20`.
pub fn integrand_bound_sweep(kappa: &CutoffKappa, dim: usize, n: usize, seed: u64) -> SweepReport {
    let mut rng = path_rng(seed, 0);
    SweepReport::from_checks((0..n).map(|_| {
        let xi: Vec<f64> = (0..dim).map(|_| rng.random_range(-20.0..20.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| sample_jump_size(&mut rng)).collect();
        integrand_bound_check(&xi, &y, kappa)
    }))
}

/// `max |q(x, ξ)| / (1 + |ξ|²)` over the sampled points and frequencies.
pub fn growth_constant<S: Symbol + ?Sized>(symbol: &S, points: &[Vec<f64>], xi_grid: &[Vec<f64>]) -> Result<f64> {
    if points.is_empty() || xi_grid.is_empty() {
        return Err(Error::arg("growth constant needs nonempty point and frequency grids"));
    }
    let mut c = 0.0f64;
    for x in points {
        for xi in xi_grid {
            let xi2: f64 = xi.iter().map(|v| v * v).sum();
            c = c.max(symbol.eval(x, xi)?.norm() / (1.0 + xi2));
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub c_k: f64,
    /// `max_x sup_{|η|≤1} |q(x, η)|` over the samples.
    pub unit_ball_sup: f64,
    pub holds: bool,
    pub worst_ratio: f64,
}

/// Checks `|q(x,ξ)| ≤ 2(1+|ξ|²) sup_{|η|≤1} |q(x,η)|` pointwise in `x`, and hence
/// `c_K ≤ 2 max_x sup_{|η|≤1} |q(x,η)|`. Sample frequencies inside the unit ball are
/// added to the η samples so the sampled supremum never misses them.
pub fn growth_bound_check<S: Symbol + ?Sized>(
    symbol: &S,
    points: &[Vec<f64>],
    xi_grid: &[Vec<f64>],
    eta_grid: &[Vec<f64>],
) -> Result<GrowthReport> {
    let c_k = growth_constant(symbol, points, xi_grid)?;
    let etas: Vec<&Vec<f64>> = eta_grid.iter().chain(xi_grid.iter().filter(|xi| norm(xi) <= 1.0)).collect();
    let mut unit_ball_sup = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for x in points {
        let mut sup = 0.0f64;
        for eta in &etas {
            sup = sup.max(symbol.eval(x, eta)?.norm());
        }
        unit_ball_sup = unit_ball_sup.max(sup);
        for xi in xi_grid {
            let xi2: f64 = xi.iter().map(|v| v * v).sum();
            let q = symbol.eval(x, xi)?.norm();
            let bound = 2.0 * (1.0 + xi2) * sup;
            let ratio = if bound > 0.0 {
                q / bound
            } else if q > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    let holds = worst_ratio <= 1.0 + 1e-12 && c_k <= 2.0 * unit_ball_sup * (1.0 + 1e-12);
    Ok(GrowthReport { c_k, unit_ball_sup, holds, worst_ratio })
}

/// Lattice points of `[-1, 1]^d` (with `per_axis` points per axis) that lie in the closed unit ball.
pub fn unit_ball_samples(dim: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(2);
    let step = 2.0 / (per_axis - 1) as f64;
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let p: Vec<f64> = idx.iter().map(|&i| -1.0 + step * i as f64).collect();
        if norm(&p) <= 1.0 + 1e-12 {
            out.push(p);
        }
        let mut k = 0;
        loop {
            if k == dim {
                return out;
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub const DEFAULT_PSD_TOL: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegDefReport {
    pub min_eigenvalue: f64,
    pub psd: bool,
    /// Frequency where `q(x, -ξ) ≠ conj q(x, ξ)`, with the size of the violation.
    pub hermitian_violation: Option<(Vec<f64>, f64)>,
}

impl NegDefReport {
    pub fn passed(&self) -> bool {
        self.psd && self.hermitian_violation.is_none()
    }
}

/// Smallest eigenvalue of a Hermitian matrix given as real and imaginary parts,
/// via the real symmetric embedding `[[A, -B], [B, A]]`.
pub fn hermitian_min_eigenvalue(h: &[Vec<Complex64>]) -> f64 {
    let m = h.len();
    let mut emb = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for j in 0..m {
        for k in 0..m {
            let v = 0.5 * (h[j][k] + h[k][j].conj());
            emb[(j, k)] = v.re;
            emb[(j + m, k + m)] = v.re;
            emb[(j, k + m)] = -v.im;
            emb[(j + m, k)] = v.im;
        }
    }
    emb.symmetric_eigen().eigenvalues.min()
}

pub fn negative_definiteness_check<S: Symbol + ?Sized>(
    symbol: &S,
    x: &[f64],
    xi_samples: &[Vec<f64>],
) -> Result<NegDefReport> {
    negative_definiteness_check_with(symbol, x, xi_samples, DEFAULT_PSD_TOL)
}

/// Builds `H_jk = q(ξ_j) + conj q(ξ_k) - q(ξ_j - ξ_k)` and tests it for positive semidefiniteness.
pub fn negative_definiteness_check_with<S: Symbol + ?Sized>(
    symbol: &S,
    x: &[f64],
    xi_samples: &[Vec<f64>],
    eig_tol: f64,
) -> Result<NegDefReport> {
    let m = xi_samples.len();
    if m < 2 {
        return Err(Error::arg("negative-definiteness check needs at least two frequencies"));
    }
    let q: Vec<Complex64> = xi_samples.iter().map(|xi| symbol.eval(x, xi)).collect::<Result<_>>()?;
    let mut hermitian_violation = None;
    for (xi, qv) in xi_samples.iter().zip(&q) {
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        let qn = symbol.eval(x, &neg)?;
        let gap = (qn - qv.conj()).norm();
        if gap > 1e-10 * (1.0 + qv.norm()) {
            hermitian_violation = Some((xi.clone(), gap));
            break;
        }
    }
    let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    for j in 0..m {
        for k in 0..m {
            let diff: Vec<f64> = xi_samples[j].iter().zip(&xi_samples[k]).map(|(a, b)| a - b).collect();
            h[j][k] = q[j] + q[k].conj() - symbol.eval(x, &diff)?;
        }
    }
    let min_eigenvalue = hermitian_min_eigenvalue(&h);
    Ok(NegDefReport { min_eigenvalue, psd: min_eigenvalue >= eig_tol, hermitian_violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::field::ClosureSymbol;

    #[test]
    fn b_epsilon_values() {
        assert_eq!(b_epsilon(&[0.5], 1.0), 0.25);
        assert_eq!(b_epsilon(&[0.0], 0.3), 0.0);
        assert_eq!(b_epsilon(&[3.0, 4.0], 1.0), 1.0);
    }

    #[test]
    fn integrand_bound_trivial_cases() {
        let k = CutoffKappa::default();
        let c = integrand_bound_check(&[0.0], &[2.5], &k);
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);
        let c = integrand_bound_check(&[7.0], &[0.0], &k);
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn integrand_bound_taylor_regime() {
        let c = integrand_bound_check(&[2.0], &[0.5], &CutoffKappa::indicator(1.0).unwrap());
        assert!(c.holds);
        assert!(c.lhs <= 0.5 * 4.0 * 0.25);
    }

    #[test]
    fn quartic_is_not_negative_definite() {
        let s = ClosureSymbol { dim: 1, f: |_: &[f64], xi: &[f64]| Complex64::new(xi[0].powi(4), 0.0) };
        let r = negative_definiteness_check(&s, &[0.0], &[vec![1.0], vec![2.0]]).unwrap();
        // H = [[2, 16], [16, 32]]
        assert!(!r.psd);
        assert!((r.min_eigenvalue - (17.0 - 481f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn gaussian_is_negative_definite() {
        let s = ClosureSymbol { dim: 1, f: |_: &[f64], xi: &[f64]| Complex64::new(0.5 * xi[0] * xi[0], 0.0) };
        let xs: Vec<Vec<f64>> = (-4..=4).map(|k| vec![0.7 * k as f64]).collect();
        assert!(negative_definiteness_check(&s, &[0.0], &xs).unwrap().passed());
    }

    #[test]
    fn linear_imaginary_symbol_gives_zero_h() {
        let s = ClosureSymbol { dim: 1, f: |x: &[f64], xi: &[f64]| Complex64::new(0.0, -x[0] * x[0] * xi[0]) };
        let r = negative_definiteness_check(&s, &[1.0], &[vec![-1.0], vec![0.0], vec![1.0]]).unwrap();
        assert!(r.passed());
        assert!(r.min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_symbol_flagged() {
        let s = ClosureSymbol { dim: 1, f: |_: &[f64], xi: &[f64]| Complex64::new(xi[0], 0.0) };
        let r = negative_definiteness_check(&s, &[0.0], &[vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(r.hermitian_violation.as_ref().map(|v| v.0.clone()), Some(vec![1.0]));
        assert!(!r.passed());
    }

    #[test]
    fn growth_constant_brownian() {
        let s = ClosureSymbol { dim: 1, f: |_: &[f64], xi: &[f64]| Complex64::new(0.5 * xi[0] * xi[0], 0.0) };
        let c = growth_constant(&s, &[vec![0.0], vec![3.0]], &[vec![2.0]]).unwrap();
        assert!((c - 0.4).abs() < 1e-15);
        assert!(growth_constant(&s, &[], &[vec![2.0]]).is_err());
    }

    #[test]
    fn unit_ball_lattice() {
        let s = unit_ball_samples(2, 5);
        assert!(s.iter().all(|p| norm(p) <= 1.0 + 1e-12));
        assert!(s.contains(&vec![1.0, 0.0]) && s.contains(&vec![0.0, -1.0]));
        assert_eq!(unit_ball_samples(1, 3), vec![vec![-1.0], vec![0.0], vec![1.0]]);
    }
}
