use num_complex::Complex64;
use serde::Serialize;

use super::martingale::DETERMINISTIC_TOL;
use crate::error::{Error, Result};
use crate::models::ProcessModel;
use crate::sim::{map_paths, stopped_state, SimulationConfig};
use crate::stats::{mean_se, MeanSe};
use crate::symbol::triplet::expm1_i;

/// Monte Carlo estimate of `p(x, ξ) = -lim_{t→0} (E^x e^{iξ'(X_{t∧σ} - x)} - 1)/t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolEstimate {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Mean of `e^{iξ'(X_{t∧σ} - x)}`, the cemetery contributing 0.
    pub m_hat: Vec<Complex64>,
    /// Componentwise standard errors of `m_hat`.
    pub stderr: Vec<Complex64>,
    pub p_hat_per_t: Vec<Complex64>,
    /// Slope of the weighted least-squares fit `1 - m̂(t) = t p`.
    pub p_extrapolated: Complex64,
    /// Componentwise standard error of `p_extrapolated` (fit weights held fixed).
    pub p_stderr: Complex64,
    /// `max_t |1 - m̂(t) - t p| / t`: how far the data are from the fitted line.
    pub fit_residual: f64,
    pub survival: Vec<f64>,
    pub n_paths: usize,
    pub k_radius: f64,
    pub kappa: String,
    pub continuity_declared: bool,
}

impl SymbolEstimate {
    /// Modulus of the componentwise standard error of the extrapolated symbol.
    pub fn p_stderr_norm(&self) -> f64 {
        self.p_stderr.re.hypot(self.p_stderr.im)
    }
}

/// Default geometric observation grid `{T0, T0/2, T0/4, T0/8}`.
pub fn geometric_t_grid(t0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| t0 / (1u64 << k) as f64).collect()
}

fn check_inputs(model: &ProcessModel, x: &[f64], xis: &[Vec<f64>], t_grid: &[f64], k_radius: f64) -> Result<()> {
    model.space().check(x)?;
    if xis.is_empty() {
        return Err(Error::arg("no frequencies given"));
    }
    if xis.iter().any(|xi| xi.len() != model.dim()) {
        return Err(Error::arg("frequency dimension differs from the model dimension"));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::arg("t_grid must be nonempty and strictly positive"));
    }
    if !(k_radius > 0.0 && k_radius.is_finite()) {
        return Err(Error::arg(format!("K radius must be positive, got {k_radius}")));
    }
    Ok(())
}

/// Least squares through the origin for `y_t = t p` with weights `1/se_t²`
/// (equal weights when some `se_t` vanishes). Returns per-`t` coefficients `c_t`, `p = Σ c_t y_t`.
fn fit_coefficients(t_grid: &[f64], se: &[f64]) -> Vec<f64> {
    let w: Vec<f64> =
        if se.iter().all(|s| *s > 0.0) { se.iter().map(|s| 1.0 / (s * s)).collect() } else { vec![1.0; se.len()] };
    let denom: f64 = t_grid.iter().zip(&w).map(|(t, w)| w * t * t).sum();
    t_grid.iter().zip(&w).map(|(t, w)| w * t / denom).collect()
}

/// Estimates for several frequencies from one set of paths (common random numbers).
pub fn estimate_symbols(
    model: &ProcessModel,
    x: &[f64],
    xis: &[Vec<f64>],
    cfg: &SimulationConfig,
    t_grid: &[f64],
    k_radius: f64,
) -> Result<Vec<SymbolEstimate>> {
    check_inputs(model, x, xis, t_grid, k_radius)?;
    let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
    if t_max > cfg.horizon {
        return Err(Error::arg(format!("t_grid reaches {t_max}, beyond the horizon {}", cfg.horizon)));
    }
    let sim_cfg = SimulationConfig {
        horizon: t_max,
        dt: cfg.dt.min(t_max),
        // a deterministic model has a single path
        n_paths: if model.is_deterministic() { 1 } else { cfg.n_paths },
        k_radius: Some(k_radius),
        observation_times: t_grid.to_vec(),
        ..cfg.clone()
    };
    let nt = t_grid.len();
    let nx = xis.len();
    // per path: for each ξ and t, (re, im) of e - 1, then the alive flag per t
    let rows = map_paths(model, x, &sim_cfg, |path| {
        let mut row = vec![0.0; 2 * nx * nt + nt];
        for (it, &t) in t_grid.iter().enumerate() {
            let s = stopped_state(path, t);
            row[2 * nx * nt + it] = if s.is_some() { 1.0 } else { 0.0 };
            for (ix, xi) in xis.iter().enumerate() {
                let e = match &s {
                    Some(y) => {
                        let theta: f64 = xi.iter().zip(y.iter().zip(x)).map(|(k, (a, b))| k * (a - b)).sum();
                        expm1_i(theta)
                    }
                    None => Complex64::new(-1.0, 0.0),
                };
                let o = 2 * (ix * nt + it);
                row[o] = e.re;
                row[o + 1] = e.im;
            }
        }
        Ok(row)
    })?;
    let n = rows.len();
    let column = |j: usize| -> Vec<f64> { rows.iter().map(|r| r[j]).collect() };

    let survival: Vec<f64> = (0..nt).map(|it| mean_se(&column(2 * nx * nt + it)).mean).collect();
    let first = t_grid.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).expect("nonempty grid");
    if survival[first] == 0.0 {
        return Err(Error::DegenerateSample(format!("all {n} paths are dead before t = {}", t_grid[first])));
    }

    let mut out = Vec::with_capacity(nx);
    for (ix, xi) in xis.iter().enumerate() {
        let mut m_hat = Vec::with_capacity(nt);
        let mut stderr = Vec::with_capacity(nt);
        let mut p_hat = Vec::with_capacity(nt);
        let mut re_cols = Vec::with_capacity(nt);
        let mut im_cols = Vec::with_capacity(nt);
        for (it, &t) in t_grid.iter().enumerate() {
            let o = 2 * (ix * nt + it);
            let (re, im) = (column(o), column(o + 1));
            let (sr, si): (MeanSe, MeanSe) = (mean_se(&re), mean_se(&im));
            let em1 = Complex64::new(sr.mean, si.mean);
            m_hat.push(em1 + 1.0);
            stderr.push(Complex64::new(sr.se, si.se));
            p_hat.push(-em1 / t);
            re_cols.push(re);
            im_cols.push(im);
        }
        let c_re = fit_coefficients(t_grid, &stderr.iter().map(|s| s.re).collect::<Vec<_>>());
        let c_im = fit_coefficients(t_grid, &stderr.iter().map(|s| s.im).collect::<Vec<_>>());
        // per-path slope contributions keep the correlation across t in the standard error
        let z_re: Vec<f64> = (0..n).map(|k| -(0..nt).map(|it| c_re[it] * re_cols[it][k]).sum::<f64>()).collect();
        let z_im: Vec<f64> = (0..n).map(|k| -(0..nt).map(|it| c_im[it] * im_cols[it][k]).sum::<f64>()).collect();
        let (pr, pi) = (mean_se(&z_re), mean_se(&z_im));
        let p = Complex64::new(pr.mean, pi.mean);
        let fit_residual = t_grid
            .iter()
            .zip(&m_hat)
            .map(|(t, m)| ((Complex64::new(1.0, 0.0) - m) - p * t).norm() / t)
            .fold(0.0, f64::max);
        out.push(SymbolEstimate {
            x: x.to_vec(),
            xi: xi.clone(),
            t_grid: t_grid.to_vec(),
            m_hat,
            stderr,
            p_hat_per_t: p_hat,
            p_extrapolated: p,
            p_stderr: Complex64::new(pr.se, pi.se),
            fit_residual,
            survival: survival.clone(),
            n_paths: n,
            k_radius,
            kappa: model.kappa().label(),
            continuity_declared: model.field().continuity_declared,
        });
    }
    Ok(out)
}

pub fn estimate_symbol(
    model: &ProcessModel,
    x: &[f64],
    xi: &[f64],
    cfg: &SimulationConfig,
    t_grid: &[f64],
    k_radius: f64,
) -> Result<SymbolEstimate> {
    Ok(estimate_symbols(model, x, &[xi.to_vec()], cfg, t_grid, k_radius)?.remove(0))
}

/// An estimate set against a reference symbol value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolComparison {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub estimate: Complex64,
    pub analytic: Complex64,
    pub gap: f64,
    pub stderr: f64,
    /// `3 se + budget |q|`, floored at the deterministic tolerance.
    pub band: f64,
    pub pass: bool,
}

pub fn compare_estimate(est: &SymbolEstimate, analytic: Complex64, bias_budget: f64) -> SymbolComparison {
    let gap = (est.p_extrapolated - analytic).norm();
    let stderr = est.p_stderr_norm();
    let band = 3.0 * stderr + bias_budget * analytic.norm() + DETERMINISTIC_TOL;
    SymbolComparison {
        x: est.x.clone(),
        xi: est.xi.clone(),
        estimate: est.p_extrapolated,
        analytic,
        gap,
        stderr,
        band,
        pass: gap <= band,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSpread {
    pub radii: Vec<f64>,
    pub estimates: Vec<Complex64>,
    /// Largest pairwise distance between the extrapolated symbols.
    pub spread: f64,
    /// `3 √(se_i² + se_j²)` for the pair attaining the spread.
    pub band: f64,
    pub pass: bool,
}

/// The probabilistic symbol does not depend on the compact neighbourhood used for stopping.
pub fn independence_of_k_check(
    model: &ProcessModel,
    x: &[f64],
    xi: &[f64],
    cfg: &SimulationConfig,
    t_grid: &[f64],
    radii: &[f64],
) -> Result<KSpread> {
    if radii.len() < 2 {
        return Err(Error::arg("need at least two radii"));
    }
    let est: Vec<SymbolEstimate> =
        radii.iter().map(|r| estimate_symbol(model, x, xi, cfg, t_grid, *r)).collect::<Result<_>>()?;
    let mut spread = 0.0f64;
    let mut band = 0.0f64;
    let mut pass = true;
    for i in 0..est.len() {
        for j in i + 1..est.len() {
            let gap = (est[i].p_extrapolated - est[j].p_extrapolated).norm();
            let b = 3.0 * est[i].p_stderr_norm().hypot(est[j].p_stderr_norm());
            if gap > b {
                pass = false;
            }
            if gap >= spread {
                spread = gap;
                band = b;
            }
        }
    }
    Ok(KSpread { radii: radii.to_vec(), estimates: est.iter().map(|e| e.p_extrapolated).collect(), spread, band, pass })
}
