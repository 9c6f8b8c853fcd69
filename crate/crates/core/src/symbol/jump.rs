use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};

/// A point mass of a jump measure. `weight` is either an intensity
/// (for [`JumpMeasure::Atomic`]) or a probability (inside [`JumpLaw::Atoms`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub y: Vec<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(y: Vec<f64>, weight: f64) -> Self {
        Self { y, weight }
    }
}

/// Normalised law of a single jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum JumpLaw {
    Atoms { atoms: Vec<Atom> },
    Normal1d { mean: f64, std: f64 },
    Uniform1d { lo: f64, hi: f64 },
}

/// Lévy measure `N(x, dy)` at a fixed point; only finite-activity kinds are representable.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum JumpMeasure {
    #[default]
    None,
    /// Finite sum of weighted Dirac masses.
    Atomic { atoms: Vec<Atom> },
    /// `rate * law`.
    FiniteActivity { rate: f64, law: JumpLaw },
}

const NORMAL_TAIL_SDS: f64 = 40.0;

impl JumpLaw {
    fn density_support(&self) -> Option<(f64, f64)> {
        match *self {
            JumpLaw::Atoms { .. } => None,
            JumpLaw::Normal1d { mean, std } => Some((mean - NORMAL_TAIL_SDS * std, mean + NORMAL_TAIL_SDS * std)),
            JumpLaw::Uniform1d { lo, hi } => Some((lo, hi)),
        }
    }

    fn density(&self, y: f64) -> f64 {
        match *self {
            JumpLaw::Atoms { .. } => 0.0,
            JumpLaw::Normal1d { mean, std } => {
                let z = (y - mean) / std;
                (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
            }
            JumpLaw::Uniform1d { lo, hi } => {
                if y >= lo && y <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            JumpLaw::Atoms { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.weight;
                    if u < acc {
                        return a.y.clone();
                    }
                }
                atoms.last().map(|a| a.y.clone()).unwrap_or_default()
            }
            JumpLaw::Normal1d { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                vec![mean + std * z]
            }
            JumpLaw::Uniform1d { lo, hi } => vec![lo + (hi - lo) * rng.random::<f64>()],
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            JumpLaw::Atoms { atoms } => {
                validate_atoms(atoms, dim)?;
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::arg(format!("jump-law atom probabilities sum to {total}, not 1")));
                }
                Ok(())
            }
            JumpLaw::Normal1d { mean, std } => {
                if dim != 1 {
                    return Err(Error::Unsupported("density jump laws are one-dimensional".into()));
                }
                if !(mean.is_finite() && *std > 0.0 && std.is_finite()) {
                    return Err(Error::arg("normal jump law needs finite mean and std > 0"));
                }
                Ok(())
            }
            JumpLaw::Uniform1d { lo, hi } => {
                if dim != 1 {
                    return Err(Error::Unsupported("density jump laws are one-dimensional".into()));
                }
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::arg("uniform jump law needs finite lo < hi"));
                }
                Ok(())
            }
        }
    }
}

fn validate_atoms(atoms: &[Atom], dim: usize) -> Result<()> {
    for a in atoms {
        if a.y.len() != dim {
            return Err(Error::arg(format!("atom {:?} has dimension {}, expected {dim}", a.y, a.y.len())));
        }
        if a.y.iter().all(|&v| v == 0.0) {
            return Err(Error::arg("jump measure must not charge the origin"));
        }
        if !(a.weight >= 0.0 && a.weight.is_finite()) || a.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg(format!("atom {:?} has invalid weight or location", a)));
        }
    }
    Ok(())
}

impl JumpMeasure {
    pub fn atomic(atoms: Vec<Atom>) -> Self {
        JumpMeasure::Atomic { atoms }
    }

    pub fn single_atom(y: Vec<f64>, weight: f64) -> Self {
        JumpMeasure::Atomic { atoms: vec![Atom::new(y, weight)] }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            JumpMeasure::None => Ok(()),
            JumpMeasure::Atomic { atoms } => validate_atoms(atoms, dim),
            JumpMeasure::FiniteActivity { rate, law } => {
                if !(*rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::arg(format!("jump rate must be finite and nonnegative, got {rate}")));
                }
                law.validate(dim)
            }
        }
    }

    /// Largest `|y|` charged by the measure (sup-norm; densities use their quadrature support).
    pub fn reach(&self) -> f64 {
        let atoms_reach = |atoms: &[Atom]| {
            atoms.iter().filter(|a| a.weight > 0.0).flat_map(|a| a.y.iter()).fold(0.0f64, |m, v| m.max(v.abs()))
        };
        match self {
            JumpMeasure::None => 0.0,
            JumpMeasure::Atomic { atoms } => atoms_reach(atoms),
            JumpMeasure::FiniteActivity { rate, .. } if *rate == 0.0 => 0.0,
            JumpMeasure::FiniteActivity { law: JumpLaw::Atoms { atoms }, .. } => atoms_reach(atoms),
            JumpMeasure::FiniteActivity { law, .. } => law.density_support().map_or(0.0, |(a, b)| a.abs().max(b.abs())),
        }
    }

    pub fn is_none(&self) -> bool {
        self.total_mass() == 0.0
    }

    /// Total mass `N(x, U - U)`, i.e. the jump intensity.
    pub fn total_mass(&self) -> f64 {
        match self {
            JumpMeasure::None => 0.0,
            JumpMeasure::Atomic { atoms } => atoms.iter().map(|a| a.weight).sum(),
            JumpMeasure::FiniteActivity { rate, .. } => *rate,
        }
    }

    /// `∫ g(y) N(dy)`; atoms are summed exactly, densities go through adaptive quadrature
    /// split at `breakpoints` (radii, mirrored to both signs).
    pub fn integrate<G: Fn(&[f64]) -> f64>(&self, g: G, breakpoints: &[f64], opts: QuadratureOptions) -> Result<f64> {
        match self {
            JumpMeasure::None => Ok(0.0),
            JumpMeasure::Atomic { atoms } => Ok(atoms.iter().map(|a| a.weight * g(&a.y)).sum()),
            JumpMeasure::FiniteActivity { rate, law } => match law {
                JumpLaw::Atoms { atoms } => Ok(rate * atoms.iter().map(|a| a.weight * g(&a.y)).sum::<f64>()),
                _ => {
                    if *rate == 0.0 {
                        return Ok(0.0);
                    }
                    let (lo, hi) = law.density_support().expect("density law");
                    let mut cuts: Vec<f64> = breakpoints.iter().flat_map(|&b| [b, -b]).collect();
                    if let JumpLaw::Normal1d { mean, .. } = law {
                        cuts.push(*mean);
                    }
                    // the absolute tolerance applies to the rate-scaled integral
                    let inner = QuadratureOptions { abs_tol: opts.abs_tol / rate, ..opts };
                    let v = integrate(|y| g(&[y]) * law.density(y), lo, hi, &cuts, inner)?;
                    Ok(rate * v)
                }
            },
        }
    }

    pub fn integrate_complex<G: Fn(&[f64]) -> Complex64>(
        &self,
        g: G,
        breakpoints: &[f64],
        opts: QuadratureOptions,
    ) -> Result<Complex64> {
        let half = QuadratureOptions { abs_tol: opts.abs_tol / 2.0, ..opts };
        let re = self.integrate(|y| g(y).re, breakpoints, half)?;
        let im = self.integrate(|y| g(y).im, breakpoints, half)?;
        Ok(Complex64::new(re, im))
    }

    /// Draws one jump from the normalised measure. Callers ensure `total_mass() > 0`.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            JumpMeasure::None => Vec::new(),
            JumpMeasure::Atomic { atoms } => {
                let total = self.total_mass();
                let u: f64 = rng.random::<f64>() * total;
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.weight;
                    if u < acc {
                        return a.y.clone();
                    }
                }
                atoms.last().map(|a| a.y.clone()).unwrap_or_default()
            }
            JumpMeasure::FiniteActivity { law, .. } => law.sample(rng),
        }
    }

    /// Image measure under `y ↦ Φ y` for an `out_dim × in_dim` matrix given row-major.
    /// Jumps mapped onto the origin are dropped.
    pub fn push_forward(&self, phi: &nalgebra::DMatrix<f64>) -> Result<JumpMeasure> {
        let map = |y: &[f64]| -> Vec<f64> {
            let v = phi * nalgebra::DVector::from_column_slice(y);
            v.iter().copied().collect()
        };
        let map_atoms = |atoms: &[Atom]| -> Vec<Atom> {
            atoms
                .iter()
                .map(|a| Atom::new(map(&a.y), a.weight))
                .filter(|a| a.y.iter().any(|&v| v != 0.0) && a.weight > 0.0)
                .collect()
        };
        Ok(match self {
            JumpMeasure::None => JumpMeasure::None,
            JumpMeasure::Atomic { atoms } => {
                let mapped = map_atoms(atoms);
                if mapped.is_empty() {
                    JumpMeasure::None
                } else {
                    JumpMeasure::Atomic { atoms: mapped }
                }
            }
            JumpMeasure::FiniteActivity { rate, law } => {
                let scalar = || -> Result<f64> {
                    if phi.nrows() == 1 && phi.ncols() == 1 {
                        Ok(phi[(0, 0)])
                    } else {
                        Err(Error::Unsupported("density jump laws only map through scalar coefficients".into()))
                    }
                };
                match law {
                    JumpLaw::Atoms { atoms } => {
                        // weights are probabilities; mass landing on the origin is removed from the rate
                        let mapped = map_atoms(atoms);
                        let kept: f64 = mapped.iter().map(|a| a.weight).sum();
                        if mapped.is_empty() || kept == 0.0 {
                            JumpMeasure::None
                        } else {
                            let atoms = mapped.into_iter().map(|a| Atom::new(a.y, a.weight / kept)).collect();
                            JumpMeasure::FiniteActivity { rate: rate * kept, law: JumpLaw::Atoms { atoms } }
                        }
                    }
                    JumpLaw::Normal1d { mean, std } => {
                        let c = scalar()?;
                        if c == 0.0 {
                            JumpMeasure::None
                        } else {
                            JumpMeasure::FiniteActivity {
                                rate: *rate,
                                law: JumpLaw::Normal1d { mean: c * mean, std: c.abs() * std },
                            }
                        }
                    }
                    JumpLaw::Uniform1d { lo, hi } => {
                        let c = scalar()?;
                        if c == 0.0 {
                            JumpMeasure::None
                        } else {
                            let (a, b) = if c > 0.0 { (c * lo, c * hi) } else { (c * hi, c * lo) };
                            JumpMeasure::FiniteActivity { rate: *rate, law: JumpLaw::Uniform1d { lo: a, hi: b } }
                        }
                    }
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn origin_atom_rejected() {
        let m = JumpMeasure::single_atom(vec![0.0], 1.0);
        assert!(m.validate(1).is_err());
        let m = JumpMeasure::single_atom(vec![0.0, 1.0], 1.0);
        assert!(m.validate(2).is_ok());
        assert!(m.validate(1).is_err());
    }

    #[test]
    fn atom_probabilities_must_sum_to_one() {
        let law = JumpLaw::Atoms { atoms: vec![Atom::new(vec![1.0], 0.3)] };
        let m = JumpMeasure::FiniteActivity { rate: 1.0, law };
        assert!(m.validate(1).is_err());
    }

    #[test]
    fn normal_density_moments() {
        let m = JumpMeasure::FiniteActivity { rate: 2.0, law: JumpLaw::Normal1d { mean: 0.5, std: 0.3 } };
        let opts = QuadratureOptions::default();
        assert!((m.integrate(|_| 1.0, &[1.0], opts).unwrap() - 2.0).abs() < 1e-9);
        assert!((m.integrate(|y| y[0], &[1.0], opts).unwrap() - 1.0).abs() < 1e-9);
        let second = m.integrate(|y| y[0] * y[0], &[1.0], opts).unwrap();
        assert!((second - 2.0 * (0.09 + 0.25)).abs() < 1e-9);
    }

    #[test]
    fn uniform_truncated_first_moment() {
        // ∫_{|y|≤1} y dy/4 over [-1, 3] = 0
        let m = JumpMeasure::FiniteActivity { rate: 1.0, law: JumpLaw::Uniform1d { lo: -1.0, hi: 3.0 } };
        let v =
            m.integrate(|y| if y[0].abs() <= 1.0 { y[0] } else { 0.0 }, &[1.0], QuadratureOptions::default()).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn atomic_sampling_frequencies() {
        let m = JumpMeasure::atomic(vec![Atom::new(vec![1.0], 1.0), Atom::new(vec![-2.0], 3.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40_000;
        let ones = (0..n).filter(|_| m.sample_jump(&mut rng)[0] == 1.0).count();
        let p = ones as f64 / n as f64;
        assert!((p - 0.25).abs() < 4.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }

    #[test]
    fn push_forward_scales_atoms_and_drops_origin() {
        let m = JumpMeasure::atomic(vec![Atom::new(vec![1.0], 2.0)]);
        let phi = nalgebra::DMatrix::from_element(1, 1, -3.0);
        assert_eq!(m.push_forward(&phi).unwrap(), JumpMeasure::single_atom(vec![-3.0], 2.0));
        let zero = nalgebra::DMatrix::zeros(1, 1);
        assert_eq!(m.push_forward(&zero).unwrap(), JumpMeasure::None);
        let n = JumpMeasure::FiniteActivity { rate: 1.0, law: JumpLaw::Normal1d { mean: 1.0, std: 0.5 } };
        assert_eq!(
            n.push_forward(&phi).unwrap(),
            JumpMeasure::FiniteActivity { rate: 1.0, law: JumpLaw::Normal1d { mean: -3.0, std: 1.5 } }
        );
    }
}
