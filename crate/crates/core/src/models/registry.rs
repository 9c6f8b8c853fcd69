//! Models addressable by name and a string parameter map.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::model::{
    make_killed_levy, make_levy, make_levy_sde, make_sign_drift, make_subordinator, make_superdrift, ProcessModel,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::symbol::{CutoffForm, CutoffKappa, JumpMeasure, LevyTriplet};

pub type Params = BTreeMap<String, String>;

pub const MODEL_NAMES: [&str; 6] = ["levy", "killed-levy", "superdrift", "sign-drift", "levy-sde", "subordinator"];

struct Reader<'a> {
    model: &'a str,
    params: &'a Params,
    used: Vec<&'static str>,
}

impl Reader<'_> {
    fn num(&mut self, key: &'static str, default: f64) -> Result<f64> {
        self.used.push(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{}: parameter '{key}' = '{v}' is not a number", self.model))),
        }
    }

    fn text(&mut self, key: &'static str) -> Option<&str> {
        self.used.push(key);
        self.params.get(key).map(|s| s.as_str())
    }

    fn finish(&self) -> Result<()> {
        for k in self.params.keys() {
            if !self.used.contains(&k.as_str()) {
                return Err(Error::Config(format!(
                    "{}: unknown parameter '{k}' (accepted: {})",
                    self.model,
                    self.used.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn kappa(&mut self) -> Result<CutoffKappa> {
        let r = self.num("kappa-radius", 1.0)?;
        let form = match self.text("kappa-form") {
            None | Some("indicator") => CutoffForm::IndicatorOfBall,
            Some("smooth-ramp") => CutoffForm::SmoothRamp,
            Some(other) => return Err(Error::Config(format!("unknown cut-off form '{other}'"))),
        };
        CutoffKappa::new(r, form).map_err(|e| Error::Config(e.to_string()))
    }

    /// One-dimensional triplet from `drift`, `variance`, `jump` (size) and `rate`.
    fn triplet(&mut self, killing: f64, default_variance: f64) -> Result<LevyTriplet> {
        let drift = self.num("drift", 0.0)?;
        let var = self.num("variance", default_variance)?;
        let rate = self.num("rate", 0.0)?;
        let jump = self.num("jump", 1.0)?;
        let jumps = if rate > 0.0 {
            JumpMeasure::single_atom(vec![jump], rate)
        } else if rate == 0.0 {
            JumpMeasure::None
        } else {
            return Err(Error::Config(format!("{}: jump rate must be nonnegative", self.model)));
        };
        LevyTriplet::scalar(killing, drift, var, jumps).map_err(|e| Error::Config(format!("{}: {e}", self.model)))
    }
}

/// Builds a one-dimensional model from the registry.
///
/// `levy`, `killed-levy`: `drift`, `variance`, `jump`, `rate`, `kappa-radius`, `kappa-form`
/// (plus `killing` for the killed model, default 0.5).
/// `levy-sde`: `phi` (expression in `x`, default `sin(x)+2`), `phi-bounded` (`true`/`false`)
/// and the driver parameters, with `variance` defaulting to 1.
/// `subordinator`: `drift`, `jump`, `rate`, `kappa-radius`, `kappa-form`.
pub fn build_model(name: &str, params: &Params) -> Result<ProcessModel> {
    let mut r = Reader { model: name, params, used: Vec::new() };
    let model = match name {
        "levy" => {
            let k = r.kappa()?;
            let t = r.triplet(0.0, 0.0)?;
            make_levy(t, k)?
        }
        "killed-levy" => {
            let k = r.kappa()?;
            let a = r.num("killing", 0.5)?;
            let t = r.triplet(a, 0.0)?;
            make_killed_levy(t, k).map_err(|e| Error::Config(e.to_string()))?
        }
        "superdrift" => make_superdrift(),
        "sign-drift" => make_sign_drift(),
        "levy-sde" => {
            let k = r.kappa()?;
            let src = r.text("phi").unwrap_or("sin(x)+2").to_string();
            let bounded = match r.text("phi-bounded") {
                None => default_bounded(&src),
                Some("true") => true,
                Some("false") => false,
                Some(v) => return Err(Error::Config(format!("phi-bounded must be true or false, got '{v}'"))),
            };
            let driver = r.triplet(0.0, 1.0)?;
            let e = Expr::parse(&src, 1)?;
            let phi = Arc::new(move |x: &[f64]| DMatrix::from_element(1, 1, e.eval(x)));
            make_levy_sde(1, phi, driver, k, bounded, &src)?
        }
        "subordinator" => {
            let k = r.kappa()?;
            let drift = r.num("drift", 0.0)?;
            let jump = r.num("jump", 1.0)?;
            let rate = r.num("rate", 1.0)?;
            let jumps = if rate > 0.0 { JumpMeasure::single_atom(vec![jump], rate) } else { JumpMeasure::None };
            make_subordinator(drift, jumps, k).map_err(|e| Error::Config(e.to_string()))?
        }
        other => {
            return Err(Error::Config(format!("unknown model '{other}' (known: {})", MODEL_NAMES.join(", "))));
        }
    };
    r.finish()?;
    Ok(model)
}

/// Only the two built-in bounded shapes are recognised; anything else is treated as unbounded.
fn default_bounded(src: &str) -> bool {
    let compact: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    matches!(compact.as_str(), "sin(x)+2" | "1")
}

/// Parses `key=value` pairs.
pub fn parse_params<'a, I: IntoIterator<Item = &'a str>>(pairs: I) -> Result<Params> {
    let mut out = Params::new();
    for p in pairs {
        let (k, v) =
            p.split_once('=').ok_or_else(|| Error::Config(format!("parameter '{p}' is not of the form key=value")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build() {
        for n in MODEL_NAMES {
            let m = build_model(n, &Params::new()).unwrap();
            assert_eq!(m.name(), n);
        }
    }

    #[test]
    fn parameters_are_checked() {
        let p = parse_params(["drift=0.5", "rate=1", "jump=1"]).unwrap();
        let m = build_model("levy", &p).unwrap();
        let q = m.analytic_symbol(&[0.0], &[0.0]).unwrap();
        assert_eq!(q.norm(), 0.0);
        assert!(build_model("levy", &parse_params(["bogus=1"]).unwrap()).is_err());
        assert!(build_model("levy", &parse_params(["drift=abc"]).unwrap()).is_err());
        assert!(build_model("killed-levy", &parse_params(["killing=0"]).unwrap()).is_err());
        assert!(build_model("nope", &Params::new()).is_err());
        assert!(parse_params(["novalue"]).is_err());
    }

    #[test]
    fn sde_from_expression() {
        let m = build_model("levy-sde", &parse_params(["phi=x"]).unwrap()).unwrap();
        assert!(m.ito_only());
        let q = m.analytic_symbol(&[2.0], &[1.0]).unwrap();
        assert!((q.re - 2.0).abs() < 1e-14);
        let m = build_model("levy-sde", &Params::new()).unwrap();
        assert!(!m.ito_only());
    }
}
