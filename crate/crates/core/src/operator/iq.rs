use serde::Serialize;

use super::test_fn::TestFunction;
use crate::error::{Error, Result};
use crate::models::space::StateSpace;
use crate::quadrature::QuadratureOptions;
use rand::Rng;

use crate::rng::path_rng;
use crate::symbol::checks::{b_epsilon, sample_jump_size, BoundCheck, SweepReport};
use crate::symbol::{CutoffKappa, LevyTriplet, SymbolField};

/// Quadrature tolerance for density jump integrals inside `I_q`.
pub const IQ_QUAD_TOL: f64 = 1e-9;

/// The three summands of `I_q u(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IqParts {
    pub drift: f64,
    pub diffusion: f64,
    pub jump: f64,
}

impl IqParts {
    pub fn total(&self) -> f64 {
        self.drift + self.diffusion + self.jump
    }
}

/// `I_q u(x)` for a triplet already evaluated at `x`. `u` is taken to be zero off `space`.
pub fn iq_parts(
    u: &TestFunction,
    x: &[f64],
    triplet: &LevyTriplet,
    kappa: &CutoffKappa,
    space: &StateSpace,
) -> Result<IqParts> {
    let d = x.len();
    if u.dim() != d || triplet.dim() != d {
        return Err(Error::arg("dimension mismatch between point, test function and triplet"));
    }
    if triplet.killing != 0.0 {
        return Err(Error::Unsupported("I_q is defined for triplets without killing rate".into()));
    }
    let mut grad = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    let ux = u.jet(x, &mut grad, &mut hess);
    let drift: f64 = triplet.drift.iter().zip(&grad).map(|(l, g)| l * g).sum();
    let mut diffusion = 0.0;
    for j in 0..d {
        for k in 0..d {
            diffusion += triplet.diffusion[(j, k)] * hess[j * d + k];
        }
    }
    diffusion *= 0.5;
    let jump = if triplet.jumps.is_none() {
        0.0
    } else {
        let integrand = |y: &[f64]| {
            let shifted: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
            let target = if space.contains(&shifted) { u.value(&shifted) } else { 0.0 };
            let lin: f64 = y.iter().zip(&grad).map(|(a, b)| a * b).sum();
            target - ux - lin * kappa.eval(y)
        };
        triplet.jumps.integrate(
            integrand,
            &kappa.breakpoints(),
            QuadratureOptions { abs_tol: IQ_QUAD_TOL, ..Default::default() },
        )?
    };
    Ok(IqParts { drift, diffusion, jump })
}

pub fn apply_iq_triplet(
    u: &TestFunction,
    x: &[f64],
    triplet: &LevyTriplet,
    kappa: &CutoffKappa,
    space: &StateSpace,
) -> Result<f64> {
    Ok(iq_parts(u, x, triplet, kappa, space)?.total())
}

/// `ℓ(x)'∇u(x) + ½ Σ Q^{jk}(x) ∂_j∂_k u(x) + ∫ (u(x+y) - u(x) - y'∇u(x) κ(y)) N(x, dy)`.
pub fn apply_iq(u: &TestFunction, x: &[f64], field: &SymbolField, kappa: &CutoffKappa) -> Result<f64> {
    let t = field.triplet_at(x)?;
    apply_iq_triplet(u, x, &t, kappa, field.space())
}

/// `max_{x∈K} |I_q u(x)|` against
/// `2R · max_K N b_ε · (‖u‖ + Σ_{|α|∈{1,2}} ‖∂^α u‖_{K+εB}) + max_K (|ℓ||∇u| + ½ Σ|Q_jk||∂_j∂_k u|)`.
/// The restricted norms are sampled on `x + ε·lattice` around every point of `K`.
pub fn norm_estimate_check(
    u: &TestFunction,
    field: &SymbolField,
    points: &[Vec<f64>],
    eps: f64,
    kappa: &CutoffKappa,
) -> Result<BoundCheck> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::arg(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if points.is_empty() {
        return Err(Error::arg("empty compact grid"));
    }
    let space = field.space();
    for x in points {
        if space.dist_to_complement(x) <= eps {
            return Err(Error::arg(format!("K + eps B leaves the state space near {x:?}")));
        }
    }
    let d = field.dim();
    let per_axis: usize = match d {
        1 => 201,
        2 => 21,
        _ => 7,
    };
    let offsets = crate::symbol::unit_ball_samples(d, per_axis);

    let mut lhs = 0.0f64;
    let mut nb = 0.0f64;
    let mut local = 0.0f64;
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    let mut grad = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    let opts = QuadratureOptions { abs_tol: IQ_QUAD_TOL, ..Default::default() };
    for x in points {
        let t = field.triplet_at(x)?;
        lhs = lhs.max(apply_iq_triplet(u, x, &t, kappa, space)?.abs());
        nb = nb.max(t.jumps.integrate(|y| b_epsilon(y, eps), &kappa.breakpoints(), opts)?);
        u.jet(x, &mut grad, &mut hess);
        let mut loc: f64 = t.drift.iter().zip(&grad).map(|(l, g)| l * g).sum::<f64>().abs();
        for j in 0..d {
            for k in 0..d {
                loc += 0.5 * (t.diffusion[(j, k)] * hess[j * d + k]).abs();
            }
        }
        local = local.max(loc);
        let mut shifted = vec![0.0; d];
        for o in &offsets {
            for ((s, xi), oi) in shifted.iter_mut().zip(x).zip(o) {
                *s = xi + eps * oi;
            }
            u.jet(&shifted, &mut grad, &mut hess);
            first = first.max(grad.iter().map(|g| g.abs()).sum());
            // multi-index sum: diagonal once, each unordered off-diagonal pair once
            let mut s2 = 0.0;
            for j in 0..d {
                for k in j..d {
                    s2 += hess[j * d + k].abs();
                }
            }
            second = second.max(s2);
        }
    }
    let rhs = 2.0 * kappa.radius() * nb * (u.norms.sup + first + second) + local;
    Ok(BoundCheck::new(lhs, rhs))
}

/// `|u(x+y) - u(x) - y'∇u(x)κ(y)|` against `2R b_ε(y) Σ_{|α|≤2} ‖∂^α u‖` (global norms).
pub fn integrand_estimate_check(u: &TestFunction, x: &[f64], y: &[f64], eps: f64, kappa: &CutoffKappa) -> BoundCheck {
    let d = x.len();
    let mut grad = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    let ux = u.jet(x, &mut grad, &mut hess);
    let shifted: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let lin: f64 = y.iter().zip(&grad).map(|(a, b)| a * b).sum();
    let lhs = (u.value(&shifted) - ux - lin * kappa.eval(y)).abs();
    let rhs = 2.0 * kappa.radius() * b_epsilon(y, eps) * u.norms.c2();
    BoundCheck::new(lhs, rhs)
}

/// [`integrand_estimate_check`] on `n` seeded samples: `x` uniform on `[-3, 3]^d`,
/// `ε` uniform on `(0, 1)` and signed log-uniform jump coordinates.
pub fn integrand_estimate_sweep(u: &TestFunction, kappa: &CutoffKappa, n: usize, seed: u64) -> SweepReport {
    let d = u.dim();
    let mut rng = path_rng(seed, 1);
    SweepReport::from_checks((0..n).map(|_| {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| sample_jump_size(&mut rng)).collect();
        let eps = rng.random_range(f64::EPSILON..1.0);
        integrand_estimate_check(u, &x, &y, eps, kappa)
    }))
}
