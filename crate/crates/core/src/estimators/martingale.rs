use serde::Serialize;

use super::characteristics::{alive_integral, segment};
use crate::error::{Error, Result};
use crate::models::{Killing, ProcessModel};
use crate::operator::{iq_parts, IqParts, Smoothness, TestFunction};
use crate::sim::{map_paths, Path, SimulationConfig};
use crate::stats::{mean_se, within_bands};

/// Absolute tolerance for deterministic models, whose identities carry no Monte Carlo noise.
pub const DETERMINISTIC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub mean: f64,
    pub stderr: f64,
    pub pass: bool,
    pub n_paths: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynkinReport {
    /// `E ∫_0^{σ∧t} Au(X_s) ds`.
    pub lhs: f64,
    /// `E u(X_{σ∧t}) - u(x)`.
    pub rhs: f64,
    pub gap: f64,
    /// Standard error of the pathwise difference (common random numbers).
    pub stderr: f64,
    pub pass: bool,
    pub n_paths: usize,
}

fn check(model: &ProcessModel, u: &TestFunction, x: &[f64], t: f64) -> Result<()> {
    if let Killing::ExponentialClock { .. } = model.killing() {
        return Err(Error::Unsupported("martingale identities are tested for models without a killing clock".into()));
    }
    if u.dim() != model.dim() || x.len() != model.dim() {
        return Err(Error::arg("dimension mismatch between model, test function and start"));
    }
    if u.smoothness == Smoothness::C2Bounded && !u.vanishes_at_infinity {
        return Err(Error::arg(format!(
            "test function '{}' neither has compact support nor vanishes at infinity",
            u.name()
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::arg(format!("time must be positive, got {t}")));
    }
    model.space().check(x)
}

fn run_config(model: &ProcessModel, t: f64, k_radius: Option<f64>, cfg: &SimulationConfig) -> SimulationConfig {
    SimulationConfig {
        horizon: t,
        dt: cfg.dt.min(t),
        n_paths: if model.is_deterministic() { 1 } else { cfg.n_paths },
        k_radius,
        observation_times: vec![t],
        ..cfg.clone()
    }
}

/// `I_q u` split into its drift, diffusion and jump parts at the alive grid points up to `upto`.
fn generator_parts(model: &ProcessModel, u: &TestFunction, path: &Path, upto: usize) -> Result<Vec<IqParts>> {
    let zero = IqParts { drift: 0.0, diffusion: 0.0, jump: 0.0 };
    let constant = model.constant_triplet();
    let mut out = vec![zero; upto + 1];
    for (i, slot) in out.iter_mut().enumerate() {
        let Some(y) = path.state(i) else { continue };
        *slot = match &constant {
            Some(tr) => iq_parts(u, y, tr, model.kappa(), model.space())?,
            None => iq_parts(u, y, &model.field().triplet_at(y)?, model.kappa(), model.space())?,
        };
    }
    Ok(out)
}

fn value_or_cemetery(u: &TestFunction, path: &Path, i: usize, cemetery: f64) -> f64 {
    path.state(i).map_or(cemetery, |y| u.value(y))
}

/// Pathwise `M_t = u(X_t) - u(x) - ∫_0^t I_q u(X_s) ds` with `u(Δ) = 0`.
pub fn martingale_samples(
    model: &ProcessModel,
    u: &TestFunction,
    x: &[f64],
    t: f64,
    cfg: &SimulationConfig,
) -> Result<Vec<f64>> {
    check(model, u, x, t)?;
    let run = run_config(model, t, None, cfg);
    let ux = u.value(x);
    map_paths(model, x, &run, |path| {
        let end = path.len() - 1;
        let parts = generator_parts(model, u, path, end)?;
        let a: Vec<f64> = parts.iter().map(IqParts::total).collect();
        Ok(value_or_cemetery(u, path, end, 0.0) - ux - alive_integral(path, end, &a))
    })
}

/// Martingale check: the mean of `M_t` is zero.
pub fn martingale_test(
    model: &ProcessModel,
    u: &TestFunction,
    x: &[f64],
    t: f64,
    cfg: &SimulationConfig,
) -> Result<MartingaleReport> {
    let s = mean_se(&martingale_samples(model, u, x, t, cfg)?);
    Ok(MartingaleReport {
        mean: s.mean,
        stderr: s.se,
        pass: within_bands(s.mean, s.se, DETERMINISTIC_TOL),
        n_paths: s.n,
    })
}

/// Dynkin's formula at `σ ∧ t` for the first exit `σ` from the ball of radius `k_radius`.
pub fn dynkin_check(
    model: &ProcessModel,
    u: &TestFunction,
    x: &[f64],
    t: f64,
    k_radius: f64,
    cfg: &SimulationConfig,
) -> Result<DynkinReport> {
    check(model, u, x, t)?;
    let run = run_config(model, t, Some(k_radius), cfg);
    let ux = u.value(x);
    let pairs = map_paths(model, x, &run, |path| {
        let stop = path.index_at(path.sigma_k.min(t));
        let parts = generator_parts(model, u, path, stop)?;
        let a: Vec<f64> = parts.iter().map(IqParts::total).collect();
        Ok((alive_integral(path, stop, &a), value_or_cemetery(u, path, stop, 0.0) - ux))
    })?;
    let lhs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.1 - p.0).collect();
    let (l, r, d) = (mean_se(&lhs), mean_se(&rhs), mean_se(&diff));
    Ok(DynkinReport {
        lhs: l.mean,
        rhs: r.mean,
        gap: d.mean,
        stderr: d.se,
        pass: within_bands(d.mean, d.se, DETERMINISTIC_TOL),
        n_paths: d.n,
    })
}

/// Pathwise compensated process
/// `f(X_τ) - f(x) - ∇f(X_-)•B - ½ ∂²f(X_-)•C - (f(X_- + y) - f(X_-) - ∇f(X_-)'y κ(y)) ∗ ν`
/// at `τ = σ_K ∧ t` (`σ_K = ∞` without `cfg.k_radius`), each term integrated separately
/// against the characteristic densities `ℓ(X_s)`, `Q(X_s)`, `N(X_s, dy)`.
pub fn compensator_samples(
    model: &ProcessModel,
    f: &TestFunction,
    cemetery_value: f64,
    x: &[f64],
    t: f64,
    cfg: &SimulationConfig,
) -> Result<Vec<f64>> {
    check(model, f, x, t)?;
    let run = run_config(model, t, cfg.k_radius, cfg);
    let fx = f.value(x);
    map_paths(model, x, &run, |path| {
        let stop = path.index_at(path.sigma_k.min(t));
        let parts = generator_parts(model, f, path, stop)?;
        let db: Vec<f64> = parts.iter().map(|p| p.drift).collect();
        let dc: Vec<f64> = parts.iter().map(|p| p.diffusion).collect();
        let dn: Vec<f64> = parts.iter().map(|p| p.jump).collect();
        let (mut b, mut c, mut nu) = (0.0, 0.0, 0.0);
        for i in 0..stop {
            b += segment(path, i, &db);
            c += segment(path, i, &dc);
            nu += segment(path, i, &dn);
        }
        Ok(value_or_cemetery(f, path, stop, cemetery_value) - fx - b - c - nu)
    })
}

pub fn compensator_test(
    model: &ProcessModel,
    f: &TestFunction,
    cemetery_value: f64,
    x: &[f64],
    t: f64,
    cfg: &SimulationConfig,
) -> Result<MartingaleReport> {
    let s = mean_se(&compensator_samples(model, f, cemetery_value, x, t, cfg)?);
    Ok(MartingaleReport {
        mean: s.mean,
        stderr: s.se,
        pass: within_bands(s.mean, s.se, DETERMINISTIC_TOL),
        n_paths: s.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_killed_levy, make_levy, make_sign_drift, make_superdrift};
    use crate::symbol::{CutoffKappa, LevyTriplet};

    fn cfg(n: usize, dt: f64) -> SimulationConfig {
        SimulationConfig { n_paths: n, dt, seed: 1, ..Default::default() }
    }

    #[test]
    fn zero_function_gives_zero() {
        let m = make_levy(LevyTriplet::brownian(1), CutoffKappa::default()).unwrap();
        let mut z = TestFunction::zero(1);
        z.vanishes_at_infinity = true;
        let r = martingale_test(&m, &z, &[0.0], 0.2, &cfg(50, 1e-2)).unwrap();
        assert_eq!((r.mean, r.stderr, r.pass), (0.0, 0.0, true));
        let d = dynkin_check(&m, &z, &[0.0], 0.2, 1.0, &cfg(50, 1e-2)).unwrap();
        assert_eq!(d.gap, 0.0);
        let c = compensator_test(&m, &z, 0.0, &[0.0], 0.2, &cfg(50, 1e-2)).unwrap();
        assert_eq!(c.mean, 0.0);
    }

    #[test]
    fn superdrift_is_deterministic_identity() {
        let m = make_superdrift();
        let u = TestFunction::cosine_bump(1.0, 0.5, 1.0);
        let r = martingale_test(&m, &u, &[1.0], 0.3, &cfg(10, 1e-4)).unwrap();
        assert_eq!(r.n_paths, 1);
        assert!(r.mean.abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn sign_drift_dynkin_and_compensator() {
        let m = make_sign_drift();
        let u = TestFunction::cosine_bump(1.5, 1.0, 1.0);
        let d = dynkin_check(&m, &u, &[1.0], 0.8, 0.5, &cfg(1, 1e-4)).unwrap();
        assert!(d.pass && d.gap.abs() < 1e-6, "{d:?}");
        let c = compensator_test(&m, &u, 0.0, &[1.0], 0.8, &cfg(1, 1e-4)).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn clock_killing_and_unbounded_functions_rejected() {
        let k = make_killed_levy(LevyTriplet::brownian(1).with_killing(1.0), CutoffKappa::default()).unwrap();
        let u = TestFunction::cosine_bump(0.0, 1.0, 1.0);
        assert!(matches!(martingale_test(&k, &u, &[0.0], 0.1, &cfg(10, 1e-2)), Err(Error::Unsupported(_))));
        let m = make_levy(LevyTriplet::brownian(1), CutoffKappa::default()).unwrap();
        assert!(martingale_test(&m, &TestFunction::sine(), &[0.0], 0.1, &cfg(10, 1e-2)).is_err());
    }

    #[test]
    fn martingale_and_compensator_agree_pathwise() {
        let n = crate::symbol::JumpMeasure::single_atom(vec![0.6], 1.5);
        let m = make_levy(LevyTriplet::scalar(0.0, 0.2, 0.8, n).unwrap(), CutoffKappa::default()).unwrap();
        let u = TestFunction::gaussian_bump(vec![0.3], 0.7, 1.0);
        let c = cfg(64, 1e-2);
        let a = martingale_samples(&m, &u, &[0.0], 0.5, &c).unwrap();
        let b = compensator_samples(&m, &u, 0.0, &[0.0], 0.5, &c).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}
