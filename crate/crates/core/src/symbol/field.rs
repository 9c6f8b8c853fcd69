use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::cutoff::CutoffKappa;
use super::triplet::LevyTriplet;
use crate::error::{Error, Result};
use crate::models::space::StateSpace;
use crate::quadrature::QuadratureOptions;

pub type TripletFn = dyn Fn(&[f64]) -> Result<LevyTriplet> + Send + Sync;

/// State-dependent symbol `x ↦ (a(x), ℓ(x), Q(x), N(x, dy))` over an open state space.
#[derive(Clone)]
pub struct SymbolField {
    space: StateSpace,
    triplet_fn: Arc<TripletFn>,
    /// The model author's claim that `x ↦ q(x, ξ)` is finely continuous. Never verified.
    pub continuity_declared: bool,
}

impl fmt::Debug for SymbolField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolField")
            .field("space", &self.space)
            .field("continuity_declared", &self.continuity_declared)
            .finish_non_exhaustive()
    }
}

impl SymbolField {
    pub fn new<F>(space: StateSpace, continuity_declared: bool, triplet_fn: F) -> Self
    where
        F: Fn(&[f64]) -> Result<LevyTriplet> + Send + Sync + 'static,
    {
        Self { space, triplet_fn: Arc::new(triplet_fn), continuity_declared }
    }

    pub fn constant(space: StateSpace, triplet: LevyTriplet) -> Self {
        Self::new(space, true, move |_| Ok(triplet.clone()))
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn triplet_at(&self, x: &[f64]) -> Result<LevyTriplet> {
        self.space.check(x)?;
        let t = (self.triplet_fn)(x)?;
        if t.dim() != self.dim() {
            return Err(Error::arg(format!(
                "field returned a {}-dimensional triplet, expected {}",
                t.dim(),
                self.dim()
            )));
        }
        Ok(t)
    }

    /// Same field with every diffusion matrix multiplied by `factor`.
    pub fn scale_diffusion(&self, factor: f64) -> Self {
        let inner = self.triplet_fn.clone();
        Self::new(self.space.clone(), self.continuity_declared, move |x| {
            let mut t = inner(x)?;
            t.diffusion *= factor;
            Ok(t)
        })
    }
}

pub fn evaluate_symbol(field: &SymbolField, x: &[f64], xi: &[f64], kappa: &CutoffKappa) -> Result<Complex64> {
    evaluate_symbol_with(field, x, xi, kappa, QuadratureOptions::default())
}

pub fn evaluate_symbol_with(
    field: &SymbolField,
    x: &[f64],
    xi: &[f64],
    kappa: &CutoffKappa,
    opts: QuadratureOptions,
) -> Result<Complex64> {
    field.triplet_at(x)?.symbol(xi, kappa, opts)
}

/// Anything that can be evaluated as `q(x, ξ)`; lets the checks run on fields and on ad-hoc functions alike.
pub trait Symbol: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], xi: &[f64]) -> Result<Complex64>;

    /// `q(x, ξ_k)` for scalar frequencies at one point.
    fn eval_line(&self, x: &[f64], xis: &[f64]) -> Result<Vec<Complex64>> {
        xis.iter().map(|xi| self.eval(x, &[*xi])).collect()
    }
}

/// A field paired with the cut-off that fixes its drift convention.
#[derive(Debug, Clone)]
pub struct FieldSymbol<'a> {
    pub field: &'a SymbolField,
    pub kappa: CutoffKappa,
}

impl Symbol for FieldSymbol<'_> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn eval(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        evaluate_symbol(self.field, x, xi, &self.kappa)
    }

    fn eval_line(&self, x: &[f64], xis: &[f64]) -> Result<Vec<Complex64>> {
        let t = self.field.triplet_at(x)?;
        let opts = QuadratureOptions::default();
        xis.iter().map(|xi| t.symbol(&[*xi], &self.kappa, opts)).collect()
    }
}

pub struct ClosureSymbol<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> Symbol for ClosureSymbol<F>
where
    F: Fn(&[f64], &[f64]) -> Complex64 + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        Ok((self.f)(x, xi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::jump::JumpMeasure;

    #[test]
    fn domain_checked_before_evaluation() {
        let f = SymbolField::new(StateSpace::positive_halfline(), true, |x| {
            LevyTriplet::scalar(0.0, x[0] * x[0], 0.0, JumpMeasure::None)
        });
        let k = CutoffKappa::default();
        assert!(matches!(evaluate_symbol(&f, &[-1.0], &[1.0], &k), Err(Error::Domain { .. })));
        assert_eq!(evaluate_symbol(&f, &[1.0], &[1.0], &k).unwrap(), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn zero_frequency_is_exactly_zero_without_killing() {
        let f = SymbolField::constant(
            StateSpace::all(1),
            LevyTriplet::scalar(0.0, 2.0, 3.0, JumpMeasure::single_atom(vec![0.3], 4.0)).unwrap(),
        );
        let q = evaluate_symbol(&f, &[0.2], &[0.0], &CutoffKappa::default()).unwrap();
        assert_eq!(q, Complex64::new(0.0, 0.0));
    }
}
