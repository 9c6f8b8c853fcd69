use fsl_core::estimators::{compensator_test, dynkin_check, martingale_test};
use fsl_core::models::SpaceKind;
use fsl_core::operator::{integrand_estimate_sweep, operator_identity_check, CATALOG};
use fsl_core::symbol::{
    growth_bound_check, integrand_bound_sweep, negative_definiteness_check, unit_ball_samples, ClosureSymbol,
    CutoffForm, FieldSymbol,
};
use fsl_core::{Complex64, CutoffKappa, Killing, ProcessModel, SimulationConfig, TestFunction};
use serde::Serialize;
use serde_json::{json, Value};

use crate::builtins::{builtin, sample_states, BUILTINS};
use crate::error::{CliError, CliResult};

pub const CHECK_NAMES: [&str; 8] = [
    "negative-definiteness",
    "growth-bound",
    "integrand-bound",
    "integrand-estimate",
    "operator-identity",
    "martingale",
    "dynkin",
    "compensator",
];

/// Relative tolerance of the operator identity, scaled by `1 + ‖u‖_{C²}`.
pub const OPERATOR_IDENTITY_TOL: f64 = 1e-4;
/// Horizon of the martingale-type checks.
pub const MARTINGALE_T: f64 = 0.25;

const NEGDEF_STATES: usize = 20;
const NEGDEF_FREQUENCIES: [f64; 8] = [-3.0, -2.0, -1.0, -0.5, 0.25, 1.0, 2.0, 3.5];
const GROWTH_STATES: usize = 20;
const OPERATOR_FIELDS: [&str; 3] = ["brownian", "drift-compound-poisson", "sin-sde"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub detail: Value,
}

/// Models a check runs on: the ones named on the command line, or the built-in set.
pub struct Subjects {
    pub models: Vec<(String, ProcessModel)>,
    pub builtin: bool,
}

impl Subjects {
    pub fn builtins() -> CliResult<Self> {
        let models = BUILTINS.iter().map(|b| Ok((b.label.to_string(), b.build()?))).collect::<CliResult<_>>()?;
        Ok(Self { models, builtin: true })
    }
}

pub struct VerifySettings {
    pub sim: SimulationConfig,
    pub deterministic_dt: f64,
    pub k_radius: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Expands `all` and rejects unknown names; an empty list runs nothing.
pub fn resolve_checks(requested: &[String]) -> CliResult<Vec<&'static str>> {
    let mut out: Vec<&'static str> = Vec::new();
    for r in requested {
        if r == "all" {
            for c in CHECK_NAMES {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            continue;
        }
        let Some(c) = CHECK_NAMES.iter().find(|c| **c == r.as_str()) else {
            return Err(CliError::usage(format!("unknown check '{r}' (known: all, {})", CHECK_NAMES.join(", "))));
        };
        if !out.contains(c) {
            out.push(c);
        }
    }
    Ok(out)
}

pub fn run_check(name: &str, subjects: &Subjects, s: &VerifySettings) -> CliResult<CheckOutcome> {
    match name {
        "negative-definiteness" => negative_definiteness(subjects),
        "growth-bound" => growth_bound(subjects),
        "integrand-bound" => integrand_bound(s),
        "integrand-estimate" => integrand_estimate(s),
        "operator-identity" => operator_identity(subjects),
        "martingale" | "dynkin" | "compensator" => martingale_family(name, subjects, s),
        other => Err(CliError::usage(format!("unknown check '{other}'"))),
    }
}

fn outcome(name: &str, pass: bool, summary: String, detail: Value) -> CheckOutcome {
    CheckOutcome { name: name.to_string(), pass, summary, detail }
}

fn negative_definiteness(subjects: &Subjects) -> CliResult<CheckOutcome> {
    let mut rows = Vec::new();
    let mut all = true;
    for (label, model) in &subjects.models {
        let sym = FieldSymbol { field: model.field(), kappa: *model.kappa() };
        let xis: Vec<Vec<f64>> = NEGDEF_FREQUENCIES.iter().map(|v| vec![*v; model.dim()]).collect();
        let mut min_eig = f64::INFINITY;
        let mut ok = true;
        for x in sample_states(model, NEGDEF_STATES) {
            let r = negative_definiteness_check(&sym, &x, &xis)?;
            min_eig = min_eig.min(r.min_eigenvalue);
            ok &= r.passed();
        }
        all &= ok;
        rows.push(json!({ "model": label, "min_eigenvalue": min_eig, "pass": ok }));
    }
    // ξ⁴ is not negative definite; the check has to notice.
    let planted = ClosureSymbol { dim: 1, f: |_x: &[f64], xi: &[f64]| Complex64::new(xi[0].powi(4), 0.0) };
    let xis: Vec<Vec<f64>> = NEGDEF_FREQUENCIES.iter().map(|v| vec![*v]).collect();
    let p = negative_definiteness_check(&planted, &[0.0], &xis)?;
    let detected = !p.passed();
    let pass = all && detected;
    let summary = format!(
        "{} fields PSD: {all}; planted quartic rejected: {detected} (min eigenvalue {:.3e})",
        subjects.models.len(),
        p.min_eigenvalue
    );
    Ok(outcome(
        "negative-definiteness",
        pass,
        summary,
        json!({ "fields": rows, "planted_min_eigenvalue": p.min_eigenvalue, "planted_rejected": detected }),
    ))
}

fn growth_bound(subjects: &Subjects) -> CliResult<CheckOutcome> {
    let mut rows = Vec::new();
    let mut all = true;
    for (label, model) in &subjects.models {
        let d = model.dim();
        let sym = FieldSymbol { field: model.field(), kappa: *model.kappa() };
        let xi_grid: Vec<Vec<f64>> = (0..=80).map(|i| vec![-20.0 + 0.5 * i as f64; d]).collect();
        let eta = unit_ball_samples(d, 21);
        let r = growth_bound_check(&sym, &sample_states(model, GROWTH_STATES), &xi_grid, &eta)?;
        all &= r.holds;
        rows.push(json!({ "model": label, "report": r }));
    }
    Ok(outcome("growth-bound", all, format!("{} fields, all within bound: {all}", rows.len()), Value::Array(rows)))
}

fn sweep_kappas() -> CliResult<Vec<CutoffKappa>> {
    Ok(vec![
        CutoffKappa::new(0.5, CutoffForm::IndicatorOfBall)?,
        CutoffKappa::new(1.0, CutoffForm::IndicatorOfBall)?,
        CutoffKappa::new(1.5, CutoffForm::SmoothRamp)?,
    ])
}

fn integrand_bound(s: &VerifySettings) -> CliResult<CheckOutcome> {
    let mut rows = Vec::new();
    let mut all = true;
    for (i, k) in sweep_kappas()?.iter().enumerate() {
        let r = integrand_bound_sweep(k, 1, s.samples, s.seed.wrapping_add(i as u64));
        all &= r.passed();
        rows.push(json!({ "kappa": k.label(), "report": r }));
    }
    let summary = format!("{} samples per cut-off, violations found: {}", s.samples, !all);
    Ok(outcome("integrand-bound", all, summary, Value::Array(rows)))
}

fn integrand_estimate(s: &VerifySettings) -> CliResult<CheckOutcome> {
    let mut rows = Vec::new();
    let mut all = true;
    // The bound needs R ≥ 1 for jumps between R and ε.
    let kappas = [CutoffKappa::new(1.0, CutoffForm::IndicatorOfBall)?, CutoffKappa::new(1.5, CutoffForm::SmoothRamp)?];
    for (i, k) in kappas.iter().enumerate() {
        for (j, name) in CATALOG.iter().enumerate() {
            let u = TestFunction::from_catalog(name, 0.0, 1.0, 1.0)?;
            let seed = s.seed.wrapping_add((10 * i + j) as u64);
            let r = integrand_estimate_sweep(&u, k, s.samples, seed);
            all &= r.passed();
            rows.push(json!({ "kappa": k.label(), "function": name, "report": r }));
        }
    }
    let summary = format!("{} samples per (cut-off, function), violations found: {}", s.samples, !all);
    Ok(outcome("integrand-estimate", all, summary, Value::Array(rows)))
}

fn identity_fields(subjects: &Subjects) -> CliResult<Vec<(String, ProcessModel)>> {
    let eligible = |m: &ProcessModel| {
        m.dim() == 1 && matches!(m.space().kind(), SpaceKind::AllOfRd) && m.killing() == Killing::None
    };
    if !subjects.builtin {
        return Ok(subjects.models.iter().filter(|(_, m)| eligible(m)).map(|(l, m)| (l.clone(), m.clone())).collect());
    }
    OPERATOR_FIELDS.iter().map(|l| Ok((l.to_string(), builtin(l).expect("listed built-in").build()?))).collect()
}

/// `|I_q u - Au|` for every catalog function on each field, sampled on 41 points around the support.
pub fn operator_identity_rows(fields: &[(String, ProcessModel)]) -> CliResult<Vec<Value>> {
    let mut rows = Vec::new();
    for (label, model) in fields {
        for name in CATALOG {
            let u = TestFunction::from_catalog(name, 0.0, 1.0, 1.0)?;
            let (lo, hi) = u.support.clone().expect("catalog functions carry a support box");
            let xs: Vec<f64> = (0..41).map(|i| lo[0] - 1.0 + (hi[0] - lo[0] + 2.0) * i as f64 / 40.0).collect();
            let gap = operator_identity_check(&u, model.field(), &xs, model.kappa())?;
            let tol = OPERATOR_IDENTITY_TOL * (1.0 + u.norms.c2());
            rows.push(json!({ "field": label, "function": name, "gap": gap, "tolerance": tol, "pass": gap <= tol }));
        }
    }
    Ok(rows)
}

fn operator_identity(subjects: &Subjects) -> CliResult<CheckOutcome> {
    let fields = identity_fields(subjects)?;
    let rows = operator_identity_rows(&fields)?;
    let pass = rows.iter().all(|r| r["pass"] == json!(true));
    let worst = rows.iter().filter_map(|r| r["gap"].as_f64()).fold(0.0, f64::max);
    let summary = format!("{} (field, function) pairs, largest gap {worst:.3e}", rows.len());
    Ok(outcome("operator-identity", pass, summary, Value::Array(rows)))
}

/// Start point and test function for the martingale-type checks on a model.
pub fn martingale_setup(model: &ProcessModel) -> CliResult<(Vec<f64>, TestFunction)> {
    let (x, r) = match model.space().kind() {
        SpaceKind::AllOfRd => (0.5, 1.0),
        SpaceKind::PositiveHalfline => (1.0, 0.5),
        SpaceKind::OpenInterval { a, b } => (0.5 * (a + b), 0.25 * (b - a)),
        SpaceKind::OpenBox { lo, hi } => (0.5 * (lo[0] + hi[0]), 0.25 * (hi[0] - lo[0])),
    };
    if model.dim() != 1 {
        return Err(CliError::usage("martingale checks use one-dimensional test functions"));
    }
    Ok((vec![x], TestFunction::cosine_bump(x, r, 1.0)))
}

fn martingale_family(name: &str, subjects: &Subjects, s: &VerifySettings) -> CliResult<CheckOutcome> {
    let mut rows = Vec::new();
    let mut all = true;
    let mut ran = 0;
    for (label, model) in &subjects.models {
        if let Killing::ExponentialClock { .. } = model.killing() {
            rows.push(json!({ "model": label, "skipped": "killing clock" }));
            continue;
        }
        let (x, u) = martingale_setup(model)?;
        let sim = if model.is_deterministic() {
            SimulationConfig { dt: s.deterministic_dt, ..s.sim.clone() }
        } else {
            s.sim.clone()
        };
        let (pass, value) = match name {
            "martingale" => {
                let r = martingale_test(model, &u, &x, MARTINGALE_T, &sim)?;
                (r.pass, serde_json::to_value(r).expect("plain data"))
            }
            "dynkin" => {
                let r = dynkin_check(model, &u, &x, MARTINGALE_T, s.k_radius, &sim)?;
                (r.pass, serde_json::to_value(r).expect("plain data"))
            }
            _ => {
                let cfg = SimulationConfig { k_radius: None, ..sim.clone() };
                let r = compensator_test(model, &u, 0.0, &x, MARTINGALE_T, &cfg)?;
                (r.pass, serde_json::to_value(r).expect("plain data"))
            }
        };
        ran += 1;
        all &= pass;
        rows.push(json!({
            "model": label,
            "x": x,
            "t": MARTINGALE_T,
            "dt": sim.dt,
            "function": u.name(),
            "pass": pass,
            "report": value,
        }));
    }
    let failed: Vec<&str> =
        rows.iter().filter(|r| r["pass"] == json!(false)).filter_map(|r| r["model"].as_str()).collect();
    let summary = if failed.is_empty() {
        format!("{ran} models within bands (dt = {}, {} paths)", s.sim.dt, s.sim.n_paths)
    } else {
        format!("outside bands: {} (dt = {}, {} paths)", failed.join(", "), s.sim.dt, s.sim.n_paths)
    };
    Ok(outcome(name, all, summary, Value::Array(rows)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_resolve() {
        assert!(resolve_checks(&[]).unwrap().is_empty());
        assert_eq!(resolve_checks(&["all".into()]).unwrap().len(), CHECK_NAMES.len());
        assert_eq!(resolve_checks(&["dynkin".into(), "dynkin".into()]).unwrap(), vec!["dynkin"]);
        assert!(resolve_checks(&["nope".into()]).is_err());
    }
}
