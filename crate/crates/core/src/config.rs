//! Declarative field definitions (TOML).
//!
//! ```toml
//! name = "ou"
//! dim = 1
//! [state_space]
//! kind = "all"            # all | interval (a, b) | box (lo, hi) | positive-halfline
//! [kappa]
//! radius = 1.0
//! form = "indicator"      # indicator | smooth-ramp
//! [field]
//! killing = 0
//! drift = ["-x"]
//! diffusion = [["1"]]
//! [[field.jumps]]
//! y = ["0.5"]
//! weight = "1 + x^2"
//! ```
//! Coefficients are numbers or expressions in `x` (or `x1..xd`). A field whose coefficients are
//! all constant becomes a Lévy model (killed if `killing > 0`); otherwise an Euler-stepped Itô model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::models::{make_ito, make_killed_levy, make_levy, ProcessModel, StateSpace};
use crate::symbol::{Atom, CutoffForm, CutoffKappa, JumpMeasure, LevyTriplet, SymbolField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Number(f64),
    Text(String),
}

impl Coef {
    fn parse(&self, dim: usize) -> Result<Expr> {
        match self {
            Coef::Number(v) => Ok(Expr::constant(*v)),
            Coef::Text(s) => Expr::parse(s, dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaConfig {
    pub radius: f64,
    #[serde(default = "default_form")]
    pub form: String,
}

fn default_form() -> String {
    "indicator".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub y: Vec<Coef>,
    pub weight: Coef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default)]
    pub killing: Option<Coef>,
    pub drift: Vec<Coef>,
    pub diffusion: Vec<Vec<Coef>>,
    #[serde(default)]
    pub jumps: Vec<AtomConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub dim: usize,
    pub state_space: SpaceConfig,
    pub kappa: Option<KappaConfig>,
    pub field: FieldSpec,
    /// Model author's fine-continuity claim; recorded, never checked.
    #[serde(default = "yes")]
    pub continuity_declared: bool,
}

fn default_name() -> String {
    "ito".into()
}

fn yes() -> bool {
    true
}

fn cfg_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl SpaceConfig {
    pub fn build(&self, dim: usize) -> Result<StateSpace> {
        let need = |v: Option<f64>, k: &str| v.ok_or_else(|| Error::Config(format!("state_space.{k} is required")));
        let s = match self.kind.as_str() {
            "all" => StateSpace::all(dim),
            "interval" => StateSpace::interval(need(self.a, "a")?, need(self.b, "b")?).map_err(cfg_err)?,
            "box" => {
                let lo = self.lo.clone().ok_or_else(|| Error::Config("state_space.lo is required".into()))?;
                let hi = self.hi.clone().ok_or_else(|| Error::Config("state_space.hi is required".into()))?;
                StateSpace::open_box(lo, hi).map_err(cfg_err)?
            }
            "positive-halfline" => StateSpace::positive_halfline(),
            other => return Err(Error::Config(format!("unknown state space kind '{other}'"))),
        };
        if s.dim() != dim {
            return Err(Error::Config(format!("state space has dimension {}, config says {dim}", s.dim())));
        }
        Ok(s)
    }
}

struct CompiledField {
    dim: usize,
    killing: Expr,
    drift: Vec<Expr>,
    diffusion: Vec<Expr>,
    jumps: Vec<(Vec<Expr>, Expr)>,
}

impl CompiledField {
    fn compile(spec: &FieldSpec, dim: usize) -> Result<Self> {
        if spec.drift.len() != dim {
            return Err(Error::Config(format!("drift needs {dim} entries")));
        }
        if spec.diffusion.len() != dim || spec.diffusion.iter().any(|r| r.len() != dim) {
            return Err(Error::Config(format!("diffusion must be a {dim}x{dim} matrix")));
        }
        let killing = spec.killing.clone().unwrap_or(Coef::Number(0.0)).parse(dim)?;
        let drift = spec.drift.iter().map(|c| c.parse(dim)).collect::<Result<_>>()?;
        let diffusion = spec.diffusion.iter().flatten().map(|c| c.parse(dim)).collect::<Result<_>>()?;
        let jumps = spec
            .jumps
            .iter()
            .map(|a| {
                if a.y.len() != dim {
                    return Err(Error::Config(format!("jump location needs {dim} entries")));
                }
                Ok((a.y.iter().map(|c| c.parse(dim)).collect::<Result<_>>()?, a.weight.parse(dim)?))
            })
            .collect::<Result<_>>()?;
        Ok(Self { dim, killing, drift, diffusion, jumps })
    }

    fn is_constant(&self) -> bool {
        let all = std::iter::once(&self.killing)
            .chain(&self.drift)
            .chain(&self.diffusion)
            .chain(self.jumps.iter().flat_map(|(y, w)| y.iter().chain(std::iter::once(w))));
        all.into_iter().all(|e| e.as_constant().is_some())
    }

    fn triplet(&self, x: &[f64]) -> Result<LevyTriplet> {
        let d = self.dim;
        let atoms: Vec<Atom> = self
            .jumps
            .iter()
            .map(|(y, w)| Atom::new(y.iter().map(|e| e.eval(x)).collect(), w.eval(x)))
            .filter(|a| a.weight != 0.0)
            .collect();
        let jumps = if atoms.is_empty() { JumpMeasure::None } else { JumpMeasure::atomic(atoms) };
        LevyTriplet::new(
            self.killing.eval(x),
            DVector::from_iterator(d, self.drift.iter().map(|e| e.eval(x))),
            DMatrix::from_row_iterator(d, d, self.diffusion.iter().map(|e| e.eval(x))),
            jumps,
        )
        .map_err(|e| Error::Config(format!("field at {x:?}: {e}")))
    }

    fn describe(&self) -> String {
        let list = |v: &[Expr]| v.iter().map(|e| e.source().to_string()).collect::<Vec<_>>().join(";");
        let jumps: Vec<String> = self.jumps.iter().map(|(y, w)| format!("({})x{}", list(y), w.source())).collect();
        format!(
            "a={} l=[{}] Q=[{}] N=[{}]",
            self.killing.source(),
            list(&self.drift),
            list(&self.diffusion),
            jumps.join(",")
        )
    }
}

impl FieldConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid field config: {e}")))
    }

    pub fn kappa(&self) -> Result<CutoffKappa> {
        match &self.kappa {
            None => Ok(CutoffKappa::default()),
            Some(k) => {
                let form = match k.form.as_str() {
                    "indicator" => CutoffForm::IndicatorOfBall,
                    "smooth-ramp" => CutoffForm::SmoothRamp,
                    other => return Err(Error::Config(format!("unknown cut-off form '{other}'"))),
                };
                CutoffKappa::new(k.radius, form).map_err(cfg_err)
            }
        }
    }

    pub fn build_model(&self) -> Result<ProcessModel> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be at least 1".into()));
        }
        let space = self.state_space.build(self.dim)?;
        let kappa = self.kappa()?;
        let compiled = CompiledField::compile(&self.field, self.dim)?;
        let description =
            format!("{} {} space={} kappa={}", self.name, compiled.describe(), space.label(), kappa.label());
        if compiled.is_constant() && matches!(space.kind(), crate::models::SpaceKind::AllOfRd) {
            let t = compiled.triplet(&vec![0.0; self.dim])?;
            return if t.killing > 0.0 { make_killed_levy(t, kappa) } else { make_levy(t, kappa) };
        }
        match compiled.killing.as_constant() {
            Some(0.0) => {}
            _ => {
                return Err(Error::Config(
                    "state-dependent or positive killing rates are only supported for constant fields on R^d".into(),
                ))
            }
        }
        let probe_ok = {
            // reject grammatically valid but ill-formed fields early, at one interior point
            let p = match space.kind() {
                crate::models::SpaceKind::AllOfRd => vec![0.0; self.dim],
                crate::models::SpaceKind::OpenInterval { a, b } => vec![0.5 * (a + b)],
                crate::models::SpaceKind::OpenBox { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
                crate::models::SpaceKind::PositiveHalfline => vec![1.0],
            };
            compiled.triplet(&p)
        };
        probe_ok?;
        let declared = self.continuity_declared;
        let field = SymbolField::new(space, declared, move |x| compiled.triplet(x));
        Ok(make_ito(&self.name, &description, field, kappa))
    }
}

pub fn load_field_model(text: &str) -> Result<ProcessModel> {
    FieldConfig::from_toml(text)?.build_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::evaluate_symbol;
    use num_complex::Complex64;

    const OU: &str = r#"
name = "ou"
dim = 1
[state_space]
kind = "all"
[field]
drift = ["-x"]
diffusion = [["1"]]
[[field.jumps]]
y = [0.5]
weight = "1 + x^2"
"#;

    #[test]
    fn state_dependent_field() {
        let m = load_field_model(OU).unwrap();
        assert_eq!(m.name(), "ou");
        assert!(m.ito_only());
        let q = evaluate_symbol(m.field(), &[2.0], &[1.0], m.kappa()).unwrap();
        // -i(-2) + 1/2 - 5 (e^{i/2} - 1 - i/2)
        let want = Complex64::new(0.5, 2.0) - 5.0 * (Complex64::new(0.0, 0.5).exp() - 1.0 - Complex64::new(0.0, 0.5));
        assert!((q - want).norm() < 1e-14);
    }

    #[test]
    fn constant_fields_become_levy_models() {
        let text = r#"
dim = 1
[state_space]
kind = "all"
[field]
killing = 0.5
drift = [0]
diffusion = [[1]]
"#;
        let m = load_field_model(text).unwrap();
        assert_eq!(m.name(), "killed-levy");
        let q = m.analytic_symbol(&[0.0], &[2.0]).unwrap();
        assert!((q.re - 2.5).abs() < 1e-15);
    }

    #[test]
    fn errors_are_config_errors() {
        let bad = [
            "dim = 1\n[state_space]\nkind = \"moon\"\n[field]\ndrift=[0]\ndiffusion=[[0]]",
            "dim = 1\n[state_space]\nkind = \"all\"\n[field]\ndrift=[\"log(x)\"]\ndiffusion=[[0]]",
            "dim = 1\n[state_space]\nkind = \"all\"\n[field]\ndrift=[0, 1]\ndiffusion=[[0]]",
            "dim = 1\n[state_space]\nkind = \"all\"\n[field]\ndrift=[\"x\"]\ndiffusion=[[-1]]",
            "dim = 1\n[state_space]\nkind = \"all\"\n[field]\nkilling=\"x^2\"\ndrift=[\"x\"]\ndiffusion=[[1]]",
            "dim = 1\nbogus = 2\n[state_space]\nkind = \"all\"\n[field]\ndrift=[0]\ndiffusion=[[0]]",
        ];
        for b in bad {
            assert!(matches!(load_field_model(b), Err(Error::Config(_))), "{b}");
        }
    }

    #[test]
    fn interval_space() {
        let text = r#"
dim = 1
[state_space]
kind = "interval"
a = -1
b = 1
[field]
drift = ["x"]
diffusion = [["1 - x^2"]]
"#;
        let m = load_field_model(text).unwrap();
        assert!(m.field().triplet_at(&[1.5]).is_err());
    }
}
