use fsl_core::estimators::{
    compare_estimate, compute_characteristics, estimate_symbols, CharacteristicsRecord, Kernel, SymbolComparison,
    SymbolEstimate,
};
use fsl_core::sim::{simulate_paths, write_binary, write_csv};
use fsl_core::{Complex64, ProcessModel};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{csv_table, num, sha256_hex, FileEntry, OutputDir, MANIFEST_SCHEMA};
use crate::spec::{Command, ExperimentSpec, Format, ModelSource};
use crate::verify::{resolve_checks, run_check, CheckOutcome, Subjects, VerifySettings};

/// What a command produced and whether every statistical or numerical check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub pass: bool,
    pub files: Vec<FileEntry>,
    /// One line per reported item, for the terminal.
    pub lines: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    command: &'static str,
    seed: u64,
    model: &'a ModelSource,
    model_description: &'a str,
    model_hash: String,
    config: &'a ExperimentSpec,
    files: Vec<FileEntry>,
}

/// Hash of the model definition together with the description the core derives from it.
pub fn model_hash(source: &ModelSource, model: &ProcessModel) -> String {
    let mut bytes = serde_json::to_vec(source).expect("model source serialises");
    bytes.extend_from_slice(model.description().as_bytes());
    sha256_hex(&bytes)
}

fn finish(
    spec: &ExperimentSpec,
    model: &ProcessModel,
    mut out: OutputDir,
    pass: bool,
    lines: Vec<String>,
) -> CliResult<RunSummary> {
    let files = out.entries();
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        command: spec.command.name(),
        seed: spec.sim.seed,
        model: &spec.model,
        model_description: model.description(),
        model_hash: model_hash(&spec.model, model),
        config: spec,
        files: files.clone(),
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(RunSummary { pass, files: out.entries(), lines })
}

pub fn run(spec: &ExperimentSpec) -> CliResult<RunSummary> {
    match spec.command {
        Command::Simulate => run_simulate(spec),
        Command::Symbol => run_symbol(spec),
        Command::Characteristics => run_characteristics(spec),
        Command::Verify => run_verify(spec),
        Command::Compare => run_compare(spec),
    }
}

fn single_start(spec: &ExperimentSpec) -> CliResult<&[f64]> {
    match spec.x.as_slice() {
        [x] => Ok(x),
        _ => Err(CliError::usage(format!("{} takes exactly one start point", spec.command.name()))),
    }
}

/// One file per simulated path under `paths/`, plus the manifest.
pub fn run_simulate(spec: &ExperimentSpec) -> CliResult<RunSummary> {
    let model = spec.model.build()?;
    let x0 = single_start(spec)?;
    let paths = simulate_paths(&model, x0, &spec.sim)?;
    let mut out = OutputDir::create(&spec.out_dir)?;
    let width = (paths.len().max(2) - 1).to_string().len().max(5);
    let mut dead = 0;
    for (i, p) in paths.iter().enumerate() {
        let mut buf = Vec::new();
        let ext = if spec.binary { "bin" } else { "csv" };
        let rel = format!("paths/path_{i:0width$}.{ext}");
        let written = if spec.binary { write_binary(p, &mut buf) } else { write_csv(p, &mut buf) };
        written.map_err(|e| CliError::io(spec.out_dir.join(&rel), e))?;
        out.write(&rel, &buf)?;
        if p.zeta.is_finite() {
            dead += 1;
        }
    }
    let lines = vec![format!(
        "{} paths of {} from {:?} to T = {}; {dead} killed before the horizon",
        paths.len(),
        model.name(),
        x0,
        spec.sim.horizon
    )];
    finish(spec, &model, out, true, lines)
}

fn complex_cells(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn coord_header(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|k| format!("{prefix}{k}")).collect()
}

fn symbol_csv(estimates: &[SymbolEstimate], d: usize) -> String {
    let mut header = coord_header("x", d);
    header.extend(coord_header("xi", d));
    for h in [
        "t",
        "m_re",
        "m_im",
        "se_re",
        "se_im",
        "p_t_re",
        "p_t_im",
        "survival",
        "p_re",
        "p_im",
        "p_se_re",
        "p_se_im",
        "fit_residual",
    ] {
        header.push(h.into());
    }
    let mut rows = Vec::new();
    for e in estimates {
        for (j, t) in e.t_grid.iter().enumerate() {
            let mut r: Vec<String> = e.x.iter().chain(&e.xi).map(|v| num(*v)).collect();
            r.push(num(*t));
            r.extend(complex_cells(e.m_hat[j]));
            r.extend(complex_cells(e.stderr[j]));
            r.extend(complex_cells(e.p_hat_per_t[j]));
            r.push(num(e.survival[j]));
            r.extend(complex_cells(e.p_extrapolated));
            r.extend(complex_cells(e.p_stderr));
            r.push(num(e.fit_residual));
            rows.push(r);
        }
    }
    csv_table(&header, &rows)
}

fn estimate_all(spec: &ExperimentSpec, model: &ProcessModel) -> CliResult<Vec<SymbolEstimate>> {
    let mut all = Vec::new();
    for x in &spec.x {
        all.extend(estimate_symbols(model, x, &spec.xi, &spec.sim, &spec.t_grid, spec.k_radius)?);
    }
    Ok(all)
}

#[derive(Serialize)]
struct SymbolReport<'a> {
    model: &'a str,
    estimates: &'a [SymbolEstimate],
}

/// Monte Carlo symbol estimates at every `(x, ξ)`.
pub fn run_symbol(spec: &ExperimentSpec) -> CliResult<RunSummary> {
    let model = spec.model.build()?;
    let estimates = estimate_all(spec, &model)?;
    let mut out = OutputDir::create(&spec.out_dir)?;
    match spec.format {
        Format::Json => out.write_json("symbol.json", &SymbolReport { model: model.name(), estimates: &estimates })?,
        Format::Csv => out.write("symbol.csv", symbol_csv(&estimates, model.dim()).as_bytes())?,
    };
    let lines = estimates
        .iter()
        .map(|e| {
            format!(
                "x = {:?} xi = {:?}: p = {:.6} {:+.6}i (se {:.2e})",
                e.x,
                e.xi,
                e.p_extrapolated.re,
                e.p_extrapolated.im,
                e.p_stderr_norm()
            )
        })
        .collect();
    finish(spec, &model, out, true, lines)
}

#[derive(Serialize)]
struct CharacteristicsReport<'a> {
    model: &'a str,
    x: &'a [f64],
    kernels: [&'static str; 2],
    records: &'a [CharacteristicsRecord],
}

fn characteristics_csv(records: &[CharacteristicsRecord], d: usize) -> String {
    let mut header: Vec<String> = vec!["path".into(), "t".into()];
    header.extend(coord_header("b", d));
    for i in 1..=d {
        header.extend(coord_header(&format!("c{i}_"), d));
    }
    header.extend(["nu_mass".into(), "nu_truncated_square".into(), "zeta".into()]);
    let mut rows = Vec::new();
    for (p, rec) in records.iter().enumerate() {
        for (j, t) in rec.times.iter().enumerate() {
            let mut r = vec![p.to_string(), num(*t)];
            r.extend(rec.b[j].iter().map(|v| num(*v)));
            r.extend(rec.c[j].iter().map(|v| num(*v)));
            r.extend(rec.nu.iter().map(|k| num(k[j])));
            r.push(num(rec.zeta));
            rows.push(r);
        }
    }
    csv_table(&header, &rows)
}

/// `(B, C, ν)` records along simulated paths; ν is reported through the kernels `1` and `|y|² ∧ 1`.
pub fn run_characteristics(spec: &ExperimentSpec) -> CliResult<RunSummary> {
    let model = spec.model.build()?;
    let x0 = single_start(spec)?;
    let paths = simulate_paths(&model, x0, &spec.sim)?;
    let mass = |_: &[f64]| 1.0;
    let truncated = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().min(1.0);
    let kernels: [Kernel<'_>; 2] = [&mass, &truncated];
    let records = paths
        .iter()
        .map(|p| compute_characteristics(p, model.field(), &kernels))
        .collect::<fsl_core::Result<Vec<_>>>()?;
    let mut out = OutputDir::create(&spec.out_dir)?;
    match spec.format {
        Format::Json => out.write_json(
            "characteristics.json",
            &CharacteristicsReport {
                model: model.name(),
                x: x0,
                kernels: ["mass", "truncated-square"],
                records: &records,
            },
        )?,
        Format::Csv => out.write("characteristics.csv", characteristics_csv(&records, model.dim()).as_bytes())?,
    };
    let lines = vec![format!("{} characteristic records of {} from {:?}", records.len(), model.name(), x0)];
    finish(spec, &model, out, true, lines)
}

#[derive(Serialize)]
struct CompareReport<'a> {
    model: &'a str,
    bias_budget: f64,
    analytic_q_scale: f64,
    all_pass: bool,
    failures: usize,
    points: &'a [SymbolComparison],
}

/// Estimated symbols against the analytic one; the band is `3 se + budget |q|`.
pub fn compare_points(spec: &ExperimentSpec, model: &ProcessModel) -> CliResult<Vec<SymbolComparison>> {
    // The sampler keeps the original dynamics; only the reference symbol is rescaled.
    let reference = if spec.analytic_q_scale == 1.0 {
        model.clone()
    } else {
        model.with_corrupted_diffusion(spec.analytic_q_scale)
    };
    let estimates = estimate_all(spec, model)?;
    estimates
        .iter()
        .map(|e| Ok(compare_estimate(e, reference.analytic_symbol(&e.x, &e.xi)?, spec.bias_budget)))
        .collect()
}

pub fn run_compare(spec: &ExperimentSpec) -> CliResult<RunSummary> {
    let model = spec.model.build()?;
    let points = compare_points(spec, &model)?;
    let failures = points.iter().filter(|p| !p.pass).count();
    let report = CompareReport {
        model: model.name(),
        bias_budget: spec.bias_budget,
        analytic_q_scale: spec.analytic_q_scale,
        all_pass: failures == 0,
        failures,
        points: &points,
    };
    let d = model.dim();
    let mut header = coord_header("x", d);
    header.extend(coord_header("xi", d));
    for h in ["p_re", "p_im", "q_re", "q_im", "gap", "stderr", "band", "pass"] {
        header.push(h.into());
    }
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            let mut r: Vec<String> = p.x.iter().chain(&p.xi).map(|v| num(*v)).collect();
            r.extend(complex_cells(p.estimate));
            r.extend(complex_cells(p.analytic));
            r.extend([num(p.gap), num(p.stderr), num(p.band), p.pass.to_string()]);
            r
        })
        .collect();
    let mut out = OutputDir::create(&spec.out_dir)?;
    out.write_json("compare.json", &report)?;
    out.write("compare.csv", csv_table(&header, &rows).as_bytes())?;
    let lines = points
        .iter()
        .map(|p| {
            format!(
                "{} x = {:?} xi = {:?}: gap {:.3e} band {:.3e}",
                if p.pass { "PASS" } else { "FAIL" },
                p.x,
                p.xi,
                p.gap,
                p.band
            )
        })
        .collect();
    finish(spec, &model, out, failures == 0, lines)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    all_pass: bool,
    checks: &'a [CheckOutcome],
}

/// Runs the selected checks against `subjects`.
pub fn verify_outcomes(spec: &ExperimentSpec, subjects: &Subjects) -> CliResult<Vec<CheckOutcome>> {
    let settings = VerifySettings {
        sim: spec.sim.clone(),
        deterministic_dt: spec.deterministic_dt,
        k_radius: spec.k_radius,
        samples: spec.samples,
        seed: spec.sim.seed,
    };
    resolve_checks(&spec.checks)?.into_iter().map(|c| run_check(c, subjects, &settings)).collect()
}

/// Runs on the built-in models unless a model was named explicitly.
pub fn run_verify(spec: &ExperimentSpec) -> CliResult<RunSummary> {
    let model = spec.model.build()?;
    let subjects = if spec.explicit_model {
        Subjects { models: vec![(model.name().to_string(), model.clone())], builtin: false }
    } else {
        Subjects::builtins()?
    };
    let outcomes = verify_outcomes(spec, &subjects)?;
    let all_pass = outcomes.iter().all(|c| c.pass);
    let mut out = OutputDir::create(&spec.out_dir)?;
    match spec.format {
        Format::Json => out.write_json("verify.json", &VerifyReport { all_pass, checks: &outcomes })?,
        Format::Csv => {
            let header = vec!["check".to_string(), "pass".into(), "summary".into()];
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|c| vec![c.name.clone(), c.pass.to_string(), format!("\"{}\"", c.summary.replace('"', "\"\""))])
                .collect();
            out.write("verify.csv", csv_table(&header, &rows).as_bytes())?
        }
    };
    let lines = outcomes
        .iter()
        .map(|c| format!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.summary))
        .collect();
    finish(spec, &model, out, all_pass, lines)
}
