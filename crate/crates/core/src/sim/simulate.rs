use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::Path;
use crate::error::{Error, Result};
use crate::models::{Killing, ProcessModel, StateSpace};
use crate::rng::path_rng;
use crate::symbol::cutoff::norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Radius of the closed ball around the start that defines `K`; `None` disables exit tracking.
    pub k_radius: Option<f64>,
    /// Leaving `K_{n_max}` of the exhaustion declares explosion.
    pub n_max: f64,
    /// Extra grid points, e.g. the observation times of an estimator.
    pub observation_times: Vec<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            dt: 1e-3,
            n_paths: 1000,
            seed: 0,
            k_radius: None,
            n_max: 1e6,
            observation_times: Vec::new(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::arg(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::arg(format!("horizon {} must be at least dt = {}", self.horizon, self.dt)));
        }
        if self.n_paths == 0 {
            return Err(Error::arg("n_paths must be at least 1"));
        }
        if let Some(r) = self.k_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::arg(format!("K radius must be positive, got {r}")));
            }
        }
        if !(self.n_max >= 1.0) {
            return Err(Error::arg("n_max must be at least 1"));
        }
        if self.observation_times.iter().any(|t| !(*t >= 0.0 && *t <= self.horizon)) {
            return Err(Error::arg("observation times must lie in [0, horizon]"));
        }
        Ok(())
    }

    /// Union of `{k dt}`, the observation times and the horizon.
    pub fn time_grid(&self) -> Vec<f64> {
        let steps = (self.horizon / self.dt).floor() as usize;
        let mut g: Vec<f64> = (0..=steps).map(|k| k as f64 * self.dt).filter(|t| *t <= self.horizon).collect();
        g.extend(self.observation_times.iter().copied());
        g.push(self.horizon);
        g.sort_by(|a, b| a.total_cmp(b));
        let tol = 1e-12 * self.horizon.max(1e-300);
        let mut out: Vec<f64> = Vec::with_capacity(g.len());
        for t in g {
            match out.last_mut() {
                Some(last) if t - *last <= tol => {
                    // keep the exact observation/horizon value over the k·dt multiple
                    if self.observation_times.contains(&t) || t == self.horizon {
                        *last = t;
                    }
                }
                _ => out.push(t),
            }
        }
        out
    }
}

/// `K = {y : |y - x0| ≤ r, dist(y, U^c) ≥ dist(x0, U^c)/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactK {
    pub center: Vec<f64>,
    pub radius: f64,
    pub margin: f64,
}

impl CompactK {
    pub fn around(space: &StateSpace, x0: &[f64], radius: f64) -> Result<Self> {
        space.check(x0)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::arg(format!("K radius must be positive, got {radius}")));
        }
        Ok(Self { center: x0.to_vec(), radius, margin: 0.5 * space.dist_to_complement(x0) })
    }

    pub fn contains(&self, space: &StateSpace, x: &[f64]) -> bool {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        norm(&d) <= self.radius && space.dist_to_complement(x) >= self.margin
    }
}

/// Runs one path with substream `index` of `cfg.seed`.
pub fn simulate_path(model: &ProcessModel, x0: &[f64], cfg: &SimulationConfig, index: u64) -> Result<Path> {
    cfg.validate()?;
    let grid = cfg.time_grid();
    let k = match cfg.k_radius {
        Some(r) => Some(CompactK::around(model.space(), x0, r)?),
        None => None,
    };
    simulate_on_grid(model, x0, &grid, k.as_ref(), cfg, index)
}

pub(crate) fn simulate_on_grid(
    model: &ProcessModel,
    x0: &[f64],
    grid: &[f64],
    k: Option<&CompactK>,
    cfg: &SimulationConfig,
    index: u64,
) -> Result<Path> {
    let space = model.space();
    if x0.len() != model.dim() {
        return Err(Error::arg(format!("start has dimension {}, model has {}", x0.len(), model.dim())));
    }
    space.check(x0)?;
    let d = model.dim();
    let n = grid.len();
    let mut rng = path_rng(cfg.seed, index);
    let mut zeta = match model.killing() {
        Killing::ExponentialClock { rate } => {
            let e: f64 = Exp1.sample(&mut rng);
            e / rate
        }
        _ => model.closed_form_zeta(x0).unwrap_or(f64::INFINITY),
    };
    let mut states = vec![f64::NAN; n * d];
    let mut alive = vec![false; n];
    states[..d].copy_from_slice(x0);
    alive[0] = zeta > 0.0;

    if model.is_deterministic() {
        for i in 1..n {
            if grid[i] >= zeta {
                break;
            }
            if let Some(Some(x)) = model.closed_form(x0, grid[i]) {
                states[i * d..(i + 1) * d].copy_from_slice(&x);
                alive[i] = true;
            }
        }
    } else {
        let mut st = model.stepper(&mut rng);
        let mut x = x0.to_vec();
        for i in 1..n {
            if grid[i] >= zeta {
                break;
            }
            model.step(&mut st, &mut x, grid[i - 1], grid[i] - grid[i - 1], &mut rng)?;
            let exploded =
                x.iter().any(|v| !v.is_finite()) || !space.contains(&x) || space.exhaustion_index(&x) > cfg.n_max;
            if exploded {
                zeta = zeta.min(grid[i]);
                break;
            }
            states[i * d..(i + 1) * d].copy_from_slice(&x);
            alive[i] = true;
        }
    }
    if !alive[0] {
        states[..d].fill(f64::NAN);
    }

    let sigma_k = match k {
        None => f64::INFINITY,
        Some(k) => (0..n)
            .find(|&i| !alive[i] || !k.contains(space, &states[i * d..(i + 1) * d]))
            .map_or(f64::INFINITY, |i| grid[i]),
    };
    let path = Path { dim: d, times: grid.to_vec(), states, alive, sigma_k, zeta };
    debug_assert!(path.check_invariants().is_ok(), "{:?}", path.check_invariants());
    Ok(path)
}

/// Simulates `cfg.n_paths` paths in parallel and maps each through `f`; results are in path order,
/// so the output does not depend on scheduling.
pub fn map_paths<T, F>(model: &ProcessModel, x0: &[f64], cfg: &SimulationConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Path) -> Result<T> + Sync,
{
    cfg.validate()?;
    let grid = cfg.time_grid();
    let k = match cfg.k_radius {
        Some(r) => Some(CompactK::around(model.space(), x0, r)?),
        None => None,
    };
    model.space().check(x0)?;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_on_grid(model, x0, &grid, k.as_ref(), cfg, i).and_then(|p| f(&p)))
        .collect()
}

/// Serial twin of [`map_paths`]; used to check scheduling independence.
pub fn map_paths_serial<T, F>(model: &ProcessModel, x0: &[f64], cfg: &SimulationConfig, f: F) -> Result<Vec<T>>
where
    F: Fn(&Path) -> Result<T>,
{
    cfg.validate()?;
    let grid = cfg.time_grid();
    let k = match cfg.k_radius {
        Some(r) => Some(CompactK::around(model.space(), x0, r)?),
        None => None,
    };
    (0..cfg.n_paths as u64)
        .map(|i| simulate_on_grid(model, x0, &grid, k.as_ref(), cfg, i).and_then(|p| f(&p)))
        .collect()
}

pub fn simulate_paths(model: &ProcessModel, x0: &[f64], cfg: &SimulationConfig) -> Result<Vec<Path>> {
    map_paths(model, x0, cfg, |p| Ok(p.clone()))
}

/// `ρ_n = (first exit from K_n) ∧ n` for `n = 1..=n_max`. Deterministic models use their closed
/// forms; otherwise exits are read off the grid, a path that dies inside `K_n` contributes its
/// last alive grid time, and exits beyond the simulated horizon are reported as `+∞`.
pub fn announcing_sequence(model: &ProcessModel, path: &Path, n_max: usize) -> Result<Vec<f64>> {
    if let Killing::ExponentialClock { .. } = model.killing() {
        return Err(Error::Unsupported("exponential-clock killing is not predictable".into()));
    }
    if n_max == 0 {
        return Err(Error::arg("n_max must be at least 1"));
    }
    let x0 = path.start().to_vec();
    let mut out = Vec::with_capacity(n_max);
    if model.is_deterministic() {
        for n in 1..=n_max {
            let exit = model.closed_form_exhaustion_exit(&x0, n as f64).expect("deterministic model");
            out.push(exit.min(n as f64));
        }
    } else {
        let space = model.space();
        let alive_len = path.alive.iter().take_while(|a| **a).count();
        let died = alive_len < path.len();
        // first alive grid index at which the running max of the exhaustion index exceeds n
        let mut running = 0.0f64;
        let mut exits: Vec<(f64, f64)> = Vec::new();
        for i in 0..alive_len {
            let idx = space.exhaustion_index(path.state(i).expect("alive"));
            if idx > running {
                exits.push((idx, path.times[i]));
                running = idx;
            }
        }
        let mut j = 0;
        for n in 1..=n_max {
            let nf = n as f64;
            while j < exits.len() && exits[j].0 <= nf {
                j += 1;
            }
            let rho = if j < exits.len() {
                exits[j].1.min(nf)
            } else if died {
                path.times[alive_len - 1].min(nf)
            } else if nf <= path.horizon() {
                nf
            } else {
                f64::INFINITY
            };
            out.push(rho);
        }
    }
    if out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Numeric { what: "announcing sequence is not monotone".into(), residual: f64::NAN });
    }
    if path.zeta.is_finite() {
        if let Some(bad) = out.iter().find(|r| **r >= path.zeta) {
            return Err(Error::Numeric {
                what: "announcing time reaches the killing time".into(),
                residual: bad - path.zeta,
            });
        }
    }
    Ok(out)
}
