use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureOptions;
use crate::sim::Path;
use crate::symbol::SymbolField;

/// Jump kernel `g` for the records `(g ∗ ν)_t = ∫_0^t ∫ g(y) N(X_s, dy) ds`.
pub type Kernel<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Integral of grid values over the alive part of `[0, times[upto]]`: trapezoid on segments with
/// both ends alive, left value up to `ζ` on the segment where the path dies.
pub(crate) fn alive_integral(path: &Path, upto: usize, values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..upto {
        acc += segment(path, i, values);
    }
    acc
}

#[inline]
pub(crate) fn segment(path: &Path, i: usize, values: &[f64]) -> f64 {
    if !path.alive[i] {
        return 0.0;
    }
    let (t0, t1) = (path.times[i], path.times[i + 1]);
    if path.alive[i + 1] {
        0.5 * (values[i] + values[i + 1]) * (t1 - t0)
    } else {
        values[i] * (path.zeta.min(t1) - t0)
    }
}

/// Cumulative `B_t = ∫ ℓ(X_s) dF_s`, `C_t = ∫ Q(X_s) dF_s` and `(g ∗ ν)_t` on the path grid,
/// with `F_s = s` before `ζ`; the records are frozen from `ζ` on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicsRecord {
    pub times: Vec<f64>,
    /// Per grid time, `d` entries.
    pub b: Vec<Vec<f64>>,
    /// Per grid time, `d × d` row-major.
    pub c: Vec<Vec<f64>>,
    /// Per kernel, per grid time.
    pub nu: Vec<Vec<f64>>,
    pub zeta: f64,
}

impl CharacteristicsRecord {
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|s| *s <= t).saturating_sub(1)
    }
}

pub fn compute_characteristics(
    path: &Path,
    field: &SymbolField,
    kernels: &[Kernel<'_>],
) -> Result<CharacteristicsRecord> {
    let d = field.dim();
    if path.dim != d {
        return Err(Error::arg(format!("path has dimension {}, field has {d}", path.dim)));
    }
    let n = path.len();
    let mut ell = vec![vec![0.0; n]; d];
    let mut q = vec![vec![0.0; n]; d * d];
    let mut g = vec![vec![0.0; n]; kernels.len()];
    let opts = QuadratureOptions::default();
    for i in 0..n {
        let Some(x) = path.state(i) else { continue };
        let t = field.triplet_at(x)?;
        for j in 0..d {
            ell[j][i] = t.drift[j];
            for k in 0..d {
                q[j * d + k][i] = t.diffusion[(j, k)];
            }
        }
        for (gi, kern) in g.iter_mut().zip(kernels) {
            gi[i] = t.jumps.integrate(|y| kern(y), &[], opts)?;
        }
    }
    let cumulative = |vals: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..n - 1 {
            acc += segment(path, i, vals);
            out.push(acc);
        }
        out
    };
    let bcols: Vec<Vec<f64>> = ell.iter().map(|v| cumulative(v)).collect();
    let ccols: Vec<Vec<f64>> = q.iter().map(|v| cumulative(v)).collect();
    let nu: Vec<Vec<f64>> = g.iter().map(|v| cumulative(v)).collect();
    let b = (0..n).map(|i| bcols.iter().map(|c| c[i]).collect()).collect();
    let c = (0..n).map(|i| ccols.iter().map(|c| c[i]).collect()).collect();
    Ok(CharacteristicsRecord { times: path.times.clone(), b, c, nu, zeta: path.zeta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_levy, make_sign_drift, make_superdrift};
    use crate::sim::{simulate_path, SimulationConfig};
    use crate::symbol::{CutoffKappa, JumpMeasure, LevyTriplet};

    fn cfg(horizon: f64, dt: f64) -> SimulationConfig {
        SimulationConfig { horizon, dt, n_paths: 1, ..Default::default() }
    }

    #[test]
    fn superdrift_first_characteristic() {
        let m = make_superdrift();
        let c = SimulationConfig { observation_times: vec![0.25], ..cfg(0.5, 1e-4) };
        let p = simulate_path(&m, &[1.0], &c, 0).unwrap();
        let r = compute_characteristics(&p, m.field(), &[]).unwrap();
        let b = r.b[r.index_at(0.25)][0];
        assert!((b - 1.0 / 3.0).abs() < 1e-8, "{b}");
    }

    #[test]
    fn superdrift_records_freeze_at_zeta() {
        let m = make_superdrift();
        let p = simulate_path(&m, &[2.0], &cfg(1.0, 0.01), 0).unwrap();
        let r = compute_characteristics(&p, m.field(), &[]).unwrap();
        let after = r.index_at(0.6);
        assert_eq!(r.b[after], r.b[r.times.len() - 1]);
    }

    #[test]
    fn sign_drift_records() {
        let m = make_sign_drift();
        for x0 in [-1.0, 0.0, 2.0] {
            let p = simulate_path(&m, &[x0], &cfg(1.0, 1e-3), 0).unwrap();
            let r = compute_characteristics(&p, m.field(), &[&|_| 1.0]).unwrap();
            for i in 0..p.len() {
                let x = p.state(i).unwrap()[0];
                assert!((r.b[i][0] - (x - x0)).abs() < 1e-12);
                assert_eq!(r.c[i][0], 0.0);
                assert_eq!(r.nu[0][i], 0.0);
            }
        }
    }

    #[test]
    fn brownian_and_poisson_records() {
        let n = JumpMeasure::single_atom(vec![1.0], 2.0);
        let m = make_levy(LevyTriplet::scalar(0.0, 0.0, 1.0, n).unwrap(), CutoffKappa::default()).unwrap();
        let p = simulate_path(&m, &[0.0], &cfg(1.0, 1e-3), 2).unwrap();
        let r = compute_characteristics(&p, m.field(), &[&|y| y[0] * y[0]]).unwrap();
        for i in 0..p.len() {
            assert_eq!(r.b[i][0], 0.0);
            assert!((r.c[i][0] - p.times[i]).abs() < 1e-12);
            assert!((r.nu[0][i] - 2.0 * p.times[i]).abs() < 1e-12);
        }
    }
}
