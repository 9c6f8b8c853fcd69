use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::Serialize;

use super::space::StateSpace;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureOptions;
use crate::sgn;
use crate::symbol::{evaluate_symbol, CutoffKappa, JumpLaw, JumpMeasure, LevyTriplet, SymbolField};

/// Matrix coefficient `Φ(x)` of a Lévy-driven SDE, `d × n`.
pub type PhiFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type AnalyticFn = dyn Fn(&[f64], &[f64]) -> Result<Complex64> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Killing {
    None,
    /// Predictable: the state leaves every compact of the exhaustion (or the state space).
    Explosion,
    /// Independent `Exp(rate)` clock; not predictable.
    ExponentialClock {
        rate: f64,
    },
}

/// Exact increment law of a Lévy process over a step.
#[derive(Debug, Clone)]
pub(crate) struct LevyIncrement {
    dim: usize,
    /// `ℓ - ∫ yκ(y) N(dy)`: drift once jumps are summed uncompensated.
    shift: Vec<f64>,
    sqrt_q: Option<DMatrix<f64>>,
    jumps: JumpMeasure,
    rate: f64,
}

fn psd_sqrt(q: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if q.iter().all(|v| *v == 0.0) {
        return None;
    }
    if q.nrows() == 1 {
        return Some(DMatrix::from_element(1, 1, q[(0, 0)].max(0.0).sqrt()));
    }
    let eig = q.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Some(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

impl LevyIncrement {
    pub(crate) fn new(triplet: &LevyTriplet, kappa: &CutoffKappa) -> Result<Self> {
        let trunc = triplet.truncated_jump_mean(kappa, QuadratureOptions::default())?;
        Ok(Self {
            dim: triplet.dim(),
            shift: (&triplet.drift - trunc).iter().copied().collect(),
            sqrt_q: psd_sqrt(&triplet.diffusion),
            jumps: triplet.jumps.clone(),
            rate: triplet.jumps.total_mass(),
        })
    }

    fn first_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / self.rate
        } else {
            f64::INFINITY
        }
    }

    /// Writes the increment over `(t, t + dt]` into `out`. `next_jump` carries the
    /// absolute time of the next jump between calls.
    fn sample<R: Rng + ?Sized>(&self, t: f64, dt: f64, next_jump: &mut f64, rng: &mut R, out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(&self.shift) {
            *o = s * dt;
        }
        if let Some(sq) = &self.sqrt_q {
            let root_dt = dt.sqrt();
            let z: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(rng)).collect();
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, zj) in z.iter().enumerate() {
                    acc += sq[(i, j)] * zj;
                }
                *o += root_dt * acc;
            }
        }
        let end = t + dt;
        while *next_jump <= end {
            let y = self.jumps.sample_jump(rng);
            for (o, yi) in out.iter_mut().zip(&y) {
                *o += yi;
            }
            let e: f64 = Exp1.sample(rng);
            *next_jump += e / self.rate;
        }
    }
}

#[derive(Clone)]
enum Dynamics {
    Levy(LevyIncrement),
    Superdrift,
    SignDrift,
    LevySde {
        phi: Arc<PhiFn>,
        driver: LevyIncrement,
    },
    /// Euler scheme read off the field at the current state.
    Euler,
}

/// Per-path sampler state.
#[derive(Debug, Clone)]
pub struct StepperState {
    next_jump: f64,
    buf: Vec<f64>,
}

#[derive(Clone)]
pub struct ProcessModel {
    name: String,
    description: String,
    field: SymbolField,
    kappa: CutoffKappa,
    killing: Killing,
    dynamics: Dynamics,
    analytic: Option<Arc<AnalyticFn>>,
    ito_only: bool,
}

impl fmt::Debug for ProcessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProcessModel")
            .field("name", &self.name)
            .field("description", &self.description)
            .field("space", self.field.space())
            .field("killing", &self.killing)
            .finish_non_exhaustive()
    }
}

fn constant_triplet_checks(triplet: &LevyTriplet) -> Result<()> {
    if let JumpMeasure::FiniteActivity { rate, .. } = &triplet.jumps {
        if !rate.is_finite() {
            return Err(Error::Unsupported("jump measures must have finite total mass".into()));
        }
    }
    Ok(())
}

fn describe_triplet(t: &LevyTriplet) -> String {
    format!("a={} l={:?} Q={:?} N={:?}", t.killing, t.drift.as_slice(), t.diffusion.as_slice(), t.jumps)
}

/// Lévy process with triplet `ψ`, sampled by exact increments.
pub fn make_levy(triplet: LevyTriplet, kappa: CutoffKappa) -> Result<ProcessModel> {
    if triplet.killing != 0.0 {
        return Err(Error::arg("make_levy expects a triplet without killing; use make_killed_levy"));
    }
    constant_triplet_checks(&triplet)?;
    let d = triplet.dim();
    let inc = LevyIncrement::new(&triplet, &kappa)?;
    let description = format!("levy d={d} {} kappa={}", describe_triplet(&triplet), kappa.label());
    Ok(ProcessModel {
        name: "levy".into(),
        description,
        field: SymbolField::constant(StateSpace::all(d), triplet),
        kappa,
        killing: Killing::None,
        dynamics: Dynamics::Levy(inc),
        analytic: None,
        ito_only: false,
    })
}

/// Lévy process killed at an independent exponential time with the triplet's rate `a > 0`.
pub fn make_killed_levy(triplet: LevyTriplet, kappa: CutoffKappa) -> Result<ProcessModel> {
    let a = triplet.killing;
    if !(a > 0.0) {
        return Err(Error::arg(format!("killed Lévy model needs a positive killing rate, got {a}")));
    }
    let mut m = make_levy(triplet.clone().with_killing(0.0), kappa)?;
    m.name = "killed-levy".into();
    m.description = format!("killed-{}", m.description.replace("a=0 ", &format!("a={a} ")));
    m.field = SymbolField::constant(StateSpace::all(triplet.dim()), triplet);
    m.killing = Killing::ExponentialClock { rate: a };
    Ok(m)
}

/// Positive-increment Lévy process on `(0, ∞)`: drift plus finite-activity positive jumps.
pub fn make_subordinator(drift: f64, jumps: JumpMeasure, kappa: CutoffKappa) -> Result<ProcessModel> {
    if !(drift >= 0.0) {
        return Err(Error::arg("subordinator drift must be nonnegative"));
    }
    let positive = match &jumps {
        JumpMeasure::None => true,
        JumpMeasure::Atomic { atoms } => atoms.iter().all(|a| a.y[0] > 0.0),
        JumpMeasure::FiniteActivity { law, .. } => match law {
            JumpLaw::Atoms { atoms } => atoms.iter().all(|a| a.y[0] > 0.0),
            JumpLaw::Uniform1d { lo, .. } => *lo >= 0.0,
            JumpLaw::Normal1d { .. } => false,
        },
    };
    if !positive {
        return Err(Error::arg("subordinator jumps must be positive"));
    }
    // drift in the cut-off convention: ℓ = b + ∫ yκ(y) N(dy)
    let bare = LevyTriplet::scalar(0.0, 0.0, 0.0, jumps.clone())?;
    let trunc = bare.truncated_jump_mean(&kappa, QuadratureOptions::default())?[0];
    let triplet = LevyTriplet::scalar(0.0, drift + trunc, 0.0, jumps)?;
    let mut m = make_levy(triplet.clone(), kappa)?;
    m.name = "subordinator".into();
    m.description = format!("subordinator drift={drift} {}", describe_triplet(&triplet));
    m.field = SymbolField::constant(StateSpace::positive_halfline(), triplet);
    m.killing = Killing::Explosion;
    Ok(m)
}

/// `X_t = 1/(1/x - t)` on `(0, ∞)`, explodes at `ζ = 1/x`; symbol `-ix²ξ`.
pub fn make_superdrift() -> ProcessModel {
    let space = StateSpace::positive_halfline();
    let field = SymbolField::new(space, true, |x| LevyTriplet::scalar(0.0, x[0] * x[0], 0.0, JumpMeasure::None));
    ProcessModel {
        name: "superdrift".into(),
        description: "superdrift".into(),
        field,
        kappa: CutoffKappa::default(),
        killing: Killing::Explosion,
        dynamics: Dynamics::Superdrift,
        analytic: Some(Arc::new(|x, xi| Ok(Complex64::new(0.0, -x[0] * x[0] * xi[0])))),
        ito_only: false,
    }
}

/// `X_t = x + t sgn(x)` on `R` with `sgn(0) = 0`; symbol `-i sgn(x) ξ`.
pub fn make_sign_drift() -> ProcessModel {
    // not continuous at 0, but finely continuous for this process
    let field =
        SymbolField::new(StateSpace::all(1), true, |x| LevyTriplet::scalar(0.0, sgn(x[0]), 0.0, JumpMeasure::None));
    ProcessModel {
        name: "sign-drift".into(),
        description: "sign-drift".into(),
        field,
        kappa: CutoffKappa::default(),
        killing: Killing::None,
        dynamics: Dynamics::SignDrift,
        analytic: Some(Arc::new(|x, xi| Ok(Complex64::new(0.0, -sgn(x[0]) * xi[0])))),
        ito_only: false,
    }
}

/// Triplet of `Φ(x) Z` for a Lévy driver `Z`, expressed in the same cut-off convention.
fn sde_triplet(phi: &DMatrix<f64>, driver: &LevyTriplet, kappa: &CutoffKappa) -> Result<LevyTriplet> {
    let mut drift = phi * &driver.drift;
    if !driver.jumps.is_none() {
        let d = phi.nrows();
        for i in 0..d {
            drift[i] += driver.jumps.integrate(
                |z| {
                    let y = phi * DVector::from_column_slice(z);
                    y[i] * (kappa.eval(y.as_slice()) - kappa.eval(z))
                },
                &kappa.breakpoints(),
                QuadratureOptions::default(),
            )?;
        }
    }
    let q = phi * &driver.diffusion * phi.transpose();
    let q = (&q + q.transpose()) * 0.5;
    LevyTriplet::new(0.0, drift, q, driver.jumps.push_forward(phi)?)
}

/// Euler scheme for `dX = Φ(X-) dZ` with a Lévy driver `Z` on `R^n`; `Φ(x)` is `d × n`.
/// `phi_bounded = false` marks the result as an Itô process only.
pub fn make_levy_sde(
    dim: usize,
    phi: Arc<PhiFn>,
    driver: LevyTriplet,
    kappa: CutoffKappa,
    phi_bounded: bool,
    phi_label: &str,
) -> Result<ProcessModel> {
    if driver.killing != 0.0 {
        return Err(Error::arg("SDE driver must not be killed"));
    }
    constant_triplet_checks(&driver)?;
    let n = driver.dim();
    let probe = phi(&vec![0.0; dim]);
    if probe.nrows() != dim || probe.ncols() != n {
        return Err(Error::arg(format!("Φ returns a {}x{} matrix, expected {dim}x{n}", probe.nrows(), probe.ncols())));
    }
    let inc = LevyIncrement::new(&driver, &kappa)?;
    let (pf, dr, kp) = (phi.clone(), driver.clone(), kappa);
    let field = SymbolField::new(StateSpace::all(dim), true, move |x| sde_triplet(&pf(x), &dr, &kp));
    let (pa, da) = (phi.clone(), driver.clone());
    // ψ(Φ(x)'ξ) straight from the driver, independent of the push-forward above
    let analytic: Arc<AnalyticFn> = Arc::new(move |x, xi| {
        let eta = pa(x).transpose() * DVector::from_column_slice(xi);
        da.symbol(eta.as_slice(), &kappa, QuadratureOptions::default())
    });
    Ok(ProcessModel {
        name: "levy-sde".into(),
        description: format!(
            "levy-sde d={dim} phi={phi_label} driver[{}] kappa={}",
            describe_triplet(&driver),
            kappa.label()
        ),
        field,
        kappa,
        killing: Killing::Explosion,
        dynamics: Dynamics::LevySde { phi, driver: inc },
        analytic: Some(analytic),
        ito_only: !phi_bounded,
    })
}

/// Generic Itô model stepped by Euler from an arbitrary field without killing rate.
pub fn make_ito(name: &str, description: &str, field: SymbolField, kappa: CutoffKappa) -> ProcessModel {
    ProcessModel {
        name: name.into(),
        description: description.into(),
        field,
        kappa,
        killing: Killing::Explosion,
        dynamics: Dynamics::Euler,
        analytic: None,
        ito_only: true,
    }
}

impl ProcessModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Canonical text of the model and its parameters; hashed into manifests.
    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn space(&self) -> &StateSpace {
        self.field.space()
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn field(&self) -> &SymbolField {
        &self.field
    }

    pub fn kappa(&self) -> &CutoffKappa {
        &self.kappa
    }

    pub fn killing(&self) -> Killing {
        self.killing
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.dynamics, Dynamics::Superdrift | Dynamics::SignDrift)
    }

    /// Unbounded coefficients: the symbol formula is only claimed for the Itô process.
    pub fn ito_only(&self) -> bool {
        self.ito_only
    }

    /// The triplet of a state-independent field, without evaluating the field.
    pub fn constant_triplet(&self) -> Option<LevyTriplet> {
        match self.dynamics {
            Dynamics::Levy(_) => self.field.triplet_at(&vec![0.0; self.dim()]).ok().or_else(|| {
                // positive half-line: probe inside the space
                self.field.triplet_at(&vec![1.0; self.dim()]).ok()
            }),
            _ => None,
        }
    }

    /// Closed-form symbol where the model has one, otherwise the field's Lévy-Khintchine formula.
    pub fn analytic_symbol(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        self.field.space().check(x)?;
        match &self.analytic {
            Some(f) => f(x, xi),
            None => evaluate_symbol(&self.field, x, xi, &self.kappa),
        }
    }

    /// Copy whose reference field (and hence analytic symbol) has its diffusion scaled by
    /// `factor`, while the sampler is untouched. Used as a sensitivity check.
    pub fn with_corrupted_diffusion(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.field = self.field.scale_diffusion(factor);
        m.analytic = None;
        m.description = format!("{} corrupted-Q*{factor}", self.description);
        m
    }

    /// Deterministic state at time `t` (`None` = cemetery); `None` overall for random models.
    pub fn closed_form(&self, x0: &[f64], t: f64) -> Option<Option<Vec<f64>>> {
        match self.dynamics {
            Dynamics::Superdrift => {
                let r = 1.0 / x0[0] - t;
                Some((r > 0.0).then(|| vec![1.0 / r]))
            }
            Dynamics::SignDrift => Some(Some(vec![x0[0] + t * sgn(x0[0])])),
            _ => None,
        }
    }

    /// Deterministic killing time; `Some(∞)` when a deterministic model never dies.
    pub fn closed_form_zeta(&self, x0: &[f64]) -> Option<f64> {
        match self.dynamics {
            Dynamics::Superdrift => Some(1.0 / x0[0]),
            Dynamics::SignDrift => Some(f64::INFINITY),
            _ => None,
        }
    }

    /// Closed-form first exit time from `K_n` (deterministic models only).
    pub fn closed_form_exhaustion_exit(&self, x0: &[f64], n: f64) -> Option<f64> {
        let x = x0[0];
        match self.dynamics {
            Dynamics::Superdrift => {
                // monotone increasing path; K_n = [1/n, n]
                if x < 1.0 / n || x > n {
                    Some(0.0)
                } else {
                    Some(1.0 / x - 1.0 / n)
                }
            }
            Dynamics::SignDrift => {
                if x.abs() > n {
                    Some(0.0)
                } else if x == 0.0 {
                    Some(f64::INFINITY)
                } else {
                    Some(n - x.abs())
                }
            }
            _ => None,
        }
    }

    pub fn stepper<R: Rng + ?Sized>(&self, rng: &mut R) -> StepperState {
        let next_jump = match &self.dynamics {
            Dynamics::Levy(inc) | Dynamics::LevySde { driver: inc, .. } => inc.first_jump(rng),
            _ => f64::INFINITY,
        };
        let n = match &self.dynamics {
            Dynamics::LevySde { driver, .. } => driver.dim,
            _ => self.dim(),
        };
        StepperState { next_jump, buf: vec![0.0; n] }
    }

    /// Advances `x` from `t` to `t + dt`. Deterministic models advance along their closed form.
    pub fn step<R: Rng + ?Sized>(
        &self,
        st: &mut StepperState,
        x: &mut [f64],
        t: f64,
        dt: f64,
        rng: &mut R,
    ) -> Result<()> {
        match &self.dynamics {
            Dynamics::Levy(inc) => {
                inc.sample(t, dt, &mut st.next_jump, rng, &mut st.buf);
                for (xi, b) in x.iter_mut().zip(&st.buf) {
                    *xi += b;
                }
            }
            Dynamics::Superdrift => {
                let r = 1.0 / x[0] - dt;
                x[0] = if r > 0.0 { 1.0 / r } else { f64::INFINITY };
            }
            Dynamics::SignDrift => x[0] += dt * sgn(x[0]),
            Dynamics::LevySde { phi, driver } => {
                driver.sample(t, dt, &mut st.next_jump, rng, &mut st.buf);
                let m = phi(x);
                let dx = &m * DVector::from_column_slice(&st.buf);
                for (xi, d) in x.iter_mut().zip(dx.iter()) {
                    *xi += d;
                }
            }
            Dynamics::Euler => {
                let trip = self.field.triplet_at(x)?;
                let inc = LevyIncrement::new(&trip, &self.kappa)?;
                // jump count over the step is Poisson with the frozen rate
                let count = if inc.rate > 0.0 {
                    Poisson::new(inc.rate * dt).map_err(|e| Error::arg(e.to_string()))?.sample(rng) as u64
                } else {
                    0
                };
                let mut never = f64::INFINITY;
                inc.sample(t, dt, &mut never, rng, &mut st.buf);
                for _ in 0..count {
                    let y = inc.jumps.sample_jump(rng);
                    for (b, yi) in st.buf.iter_mut().zip(&y) {
                        *b += yi;
                    }
                }
                for (xi, b) in x.iter_mut().zip(&st.buf) {
                    *xi += b;
                }
            }
        }
        Ok(())
    }
}
