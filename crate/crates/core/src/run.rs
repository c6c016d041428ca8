//! Experiment driver: takes a validated configuration, runs one
//! experiment, and writes the CSV/JSON/SVG artifacts.  Shared by the CLI
//! binary and the integration tests.
//!
//! Exit-code contract: 0 success, 2 validation error (a module
//! precondition was violated), 3 numerical failure.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;

use crate::centers::{
    concavity_probe, containment_report, convergence_experiment, find_centers, single_cluster,
    CentersError, ParametricFamily,
};
use crate::conebound::{e_profile, lower_bound_r_tilde, ConeError, EParams};
use crate::config::{ConfigError, ExperimentConfig};
use crate::potentials::{check_summability, evaluate, KernelSpec, KernelVariant, PotentialError};
use crate::quadrature::QuadOptions;
use crate::svg::emit_svg;
use crate::unfolded::{unfolded_region, UnfoldedError};

#[derive(Debug)]
pub enum RunError {
    /// Exit code 2.
    Validation(String),
    /// Exit code 3.
    Numerical(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "validation error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<PotentialError> for RunError {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::BoundaryPoint { .. } | PotentialError::Quadrature(_) => {
                RunError::Numerical(e.to_string())
            }
            _ => RunError::Validation(e.to_string()),
        }
    }
}

impl From<CentersError> for RunError {
    fn from(e: CentersError) -> Self {
        match e {
            CentersError::NonDecreasingParameters => RunError::Validation(e.to_string()),
            CentersError::Potential(pe) => pe.into(),
            CentersError::Cone(ce) => ce.into(),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<ConeError> for RunError {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::BracketingFailed { .. } => RunError::Numerical(e.to_string()),
            _ => RunError::Validation(e.to_string()),
        }
    }
}

impl From<UnfoldedError> for RunError {
    fn from(e: UnfoldedError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Numerical(format!("io: {e}"))
    }
}

/// 17 significant digits, `.` decimal separator.
fn sig(v: f64) -> String {
    format!("{v:.16e}")
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(cfg: &ExperimentConfig, header: &str) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# config {}", cfg.to_json());
        let _ = writeln!(text, "{header}");
        Csv { text }
    }

    fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    fn write(self, path: &Path) -> Result<(), RunError> {
        std::fs::write(path, self.text.as_bytes())?;
        Ok(())
    }
}

fn write_summary(
    cfg: &ExperimentConfig,
    experiment: &str,
    results: serde_json::Value,
    out: &Path,
) -> Result<(), RunError> {
    let doc = json!({
        "experiment": experiment,
        "config": serde_json::from_str::<serde_json::Value>(&cfg.to_json()).unwrap(),
        "results": results,
    });
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&doc).unwrap() + "\n")?;
    Ok(())
}

fn require<T: Copy>(v: Option<T>, field: &str) -> Result<T, RunError> {
    v.ok_or_else(|| RunError::Validation(format!("missing required field: {field}")))
}

/// The profile order of a kernel for cone-bound purposes (the normalized
/// solid-angle kernel behaves like order -1; the Gauss kernel has none).
fn alpha_for_bounds(spec: &KernelSpec) -> Result<f64, RunError> {
    match spec.variant {
        KernelVariant::Renormalized { alpha } => Ok(alpha),
        KernelVariant::Poisson { .. } => Ok(-1.0),
        _ => Err(RunError::Validation(
            "kernel.variant: containment bounds need a renormalized or poisson kernel \
             (no profile order is assigned to this kernel)"
                .into(),
        )),
    }
}

fn default_directions(dim: usize) -> usize {
    if dim == 2 {
        32
    } else {
        128
    }
}

pub fn run(
    cfg: &ExperimentConfig,
    experiment: &str,
    out: &Path,
    svg: bool,
) -> Result<(), RunError> {
    if let Some(e) = &cfg.experiment {
        if e != experiment {
            return Err(RunError::Validation(format!(
                "experiment: config says \"{e}\" but the \"{experiment}\" subcommand was invoked"
            )));
        }
    }
    std::fs::create_dir_all(out)?;
    match experiment {
        "eval" => run_eval(cfg, out),
        "centers.find" => run_centers_find(cfg, out, svg),
        "centers.converge" => run_converge(cfg, out),
        "centers.contain" => run_contain(cfg, out, svg),
        "centers.concavity" => run_concavity(cfg, out),
        "unfolded" => run_unfolded(cfg, out, svg),
        "conebound" => run_conebound(cfg, out),
        "summability" => run_summability(cfg, out),
        other => Err(RunError::Validation(format!(
            "experiment: unknown experiment \"{other}\""
        ))),
    }
}

fn run_eval(cfg: &ExperimentConfig, out: &Path) -> Result<(), RunError> {
    let body = cfg.build_body()?;
    let spec = cfg.build_kernel(body.dim)?;
    let point = cfg
        .point
        .clone()
        .ok_or_else(|| RunError::Validation("missing required field: point".into()))?;
    if point.len() != body.dim {
        return Err(RunError::Validation(format!(
            "point: expected {} coordinates, got {}",
            body.dim,
            point.len()
        )));
    }
    let v = evaluate(&body, &spec, &point, QuadOptions::for_dim(body.dim))?;
    let mut header: Vec<String> = (0..body.dim).map(|a| format!("x{a}")).collect();
    header.extend(
        ["value", "estimated_error", "renormalization_epsilon", "location"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut csv = Csv::new(cfg, &header.join(","));
    let mut row: Vec<String> = point.iter().map(|&c| sig(c)).collect();
    row.push(sig(v.value));
    row.push(sig(v.estimated_error));
    row.push(sig(v.renormalization_epsilon));
    row.push(format!("{:?}", v.location_class).to_lowercase());
    csv.row(&row);
    csv.write(&out.join("eval.csv"))?;
    write_summary(
        cfg,
        "eval",
        json!({
            "value": v.value,
            "estimated_error": v.estimated_error,
            "renormalization_epsilon": v.renormalization_epsilon,
            "location": format!("{:?}", v.location_class).to_lowercase(),
        }),
        out,
    )
}

fn centers_csv(cfg: &ExperimentConfig, dim: usize, points: &[Vec<f64>]) -> Csv {
    let header: Vec<String> = (0..dim).map(|a| format!("x{a}")).collect();
    let mut csv = Csv::new(cfg, &header.join(","));
    for p in points {
        csv.row(&p.iter().map(|&c| sig(c)).collect::<Vec<_>>());
    }
    csv
}

fn run_centers_find(cfg: &ExperimentConfig, out: &Path, svg: bool) -> Result<(), RunError> {
    let body = cfg.build_body()?;
    let spec = cfg.build_kernel(body.dim)?;
    let resolution = require(cfg.resolution, "resolution")?;
    let set = find_centers(&body, &spec, resolution, cfg.plateau_tolerance)?;
    centers_csv(cfg, body.dim, &set.points).write(&out.join("centers.csv"))?;
    write_summary(
        cfg,
        "centers.find",
        json!({
            "count": set.points.len(),
            "max_value": set.max_value,
            "plateau_tolerance": set.plateau_tolerance,
            "resolution": set.resolution,
            "search_region": set.search_region,
            "single_cluster": single_cluster(&set.points, set.resolution),
        }),
        out,
    )?;
    if svg && body.dim == 2 {
        emit_svg(&body, None, &[&set.points], &out.join("figure.svg"))
            .map_err(|e| RunError::Validation(e.to_string()))?;
    }
    Ok(())
}

fn run_converge(cfg: &ExperimentConfig, out: &Path) -> Result<(), RunError> {
    let body = cfg.build_body()?;
    let spec = cfg.build_kernel(body.dim)?;
    let family = match spec.variant {
        KernelVariant::Poisson { .. } => ParametricFamily::Poisson,
        KernelVariant::Heat { .. } => ParametricFamily::Heat,
        _ => {
            return Err(RunError::Validation(
                "kernel.variant: convergence experiments need poisson or heat".into(),
            ))
        }
    };
    let parameters = cfg
        .parameters
        .clone()
        .ok_or_else(|| RunError::Validation("missing required field: parameters".into()))?;
    let resolution = require(cfg.resolution, "resolution")?;
    let ref_alpha = cfg.reference_alpha.unwrap_or(-1.0);
    let ref_spec = KernelSpec {
        dim: body.dim,
        variant: KernelVariant::Renormalized { alpha: ref_alpha },
    };
    let reference = find_centers(&body, &ref_spec, resolution, cfg.plateau_tolerance)?;
    let records = convergence_experiment(
        &body,
        family,
        &parameters,
        &reference,
        resolution,
        cfg.plateau_tolerance,
    )?;
    let mut csv = Csv::new(cfg, "parameter,hausdorff_to_reference,center_count");
    for r in &records {
        csv.row(&[
            sig(r.parameter),
            sig(r.hausdorff_to_reference),
            r.center_set.points.len().to_string(),
        ]);
    }
    csv.write(&out.join("converge.csv"))?;
    write_summary(
        cfg,
        "centers.converge",
        json!({
            "reference_count": reference.points.len(),
            "final_hausdorff": records.last().map(|r| r.hausdorff_to_reference),
            "resolution": resolution,
        }),
        out,
    )
}

fn run_contain(cfg: &ExperimentConfig, out: &Path, svg: bool) -> Result<(), RunError> {
    let body = cfg.build_body()?;
    let spec = cfg.build_kernel(body.dim)?;
    let resolution = require(cfg.resolution, "resolution")?;
    let b = cfg.b.unwrap_or(0.9);
    if !(b > 0.0 && b < 1.0) {
        return Err(RunError::Validation(format!("b: must lie in (0, 1), got {b}")));
    }
    let alpha = alpha_for_bounds(&spec)?;
    let set = find_centers(&body, &spec, resolution, cfg.plateau_tolerance)?;
    let uf = unfolded_region(&body, cfg.direction_count.unwrap_or(default_directions(body.dim)))?;
    let params = EParams {
        alpha,
        kappa: body.cone.kappa,
        delta: body.cone.delta,
        d: body.diameter(),
        r0: body.inradius(),
        m: body.dim,
    };
    let r_tilde = crate::conebound::r_tilde(&params, 1e-6 * body.inradius())?;
    let report = containment_report(&body, &set, &uf, b, r_tilde);
    let mut header: Vec<String> = (0..body.dim).map(|a| format!("x{a}")).collect();
    header.extend(
        ["in_unfolded", "in_inner_parallel", "boundary_distance"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut csv = Csv::new(cfg, &header.join(","));
    for c in &report.per_center {
        let mut row: Vec<String> = c.point.iter().map(|&v| sig(v)).collect();
        row.push(c.in_unfolded.to_string());
        row.push(c.in_inner_parallel.to_string());
        row.push(sig(c.boundary_distance));
        csv.row(&row);
    }
    csv.write(&out.join("contain.csv"))?;
    write_summary(
        cfg,
        "centers.contain",
        json!({
            "r_tilde": r_tilde,
            "inner_radius": report.inner_radius,
            "uf_slack": report.uf_slack,
            "all_pass": report.all_pass,
            "center_count": set.points.len(),
            "direction_count": uf.direction_count,
        }),
        out,
    )?;
    if svg && body.dim == 2 {
        emit_svg(&body, Some(&uf), &[&set.points], &out.join("figure.svg"))
            .map_err(|e| RunError::Validation(e.to_string()))?;
    }
    Ok(())
}

fn run_concavity(cfg: &ExperimentConfig, out: &Path) -> Result<(), RunError> {
    let body = cfg.build_body()?;
    let spec = cfg.build_kernel(body.dim)?;
    let inner = require(cfg.inner_radius, "inner_radius")?;
    let trials = cfg.trials.unwrap_or(200);
    let seed = require(cfg.seed, "seed")?;
    let report = concavity_probe(&body, &spec, inner, None, trials, seed)?;
    let mut csv = Csv::new(cfg, "trials,violations,min_margin");
    csv.row(&[
        report.trials.to_string(),
        report.violations.to_string(),
        sig(report.min_margin),
    ]);
    csv.write(&out.join("concavity.csv"))?;
    write_summary(
        cfg,
        "centers.concavity",
        json!({
            "trials": report.trials,
            "violations": report.violations,
            "min_margin": report.min_margin,
        }),
        out,
    )
}

fn run_unfolded(cfg: &ExperimentConfig, out: &Path, svg: bool) -> Result<(), RunError> {
    let body = cfg.build_body()?;
    let n = cfg.direction_count.unwrap_or(default_directions(body.dim));
    let uf = unfolded_region(&body, n)?;
    let mut header: Vec<String> = (0..body.dim).map(|a| format!("v{a}")).collect();
    header.push("threshold".into());
    let mut csv = Csv::new(cfg, &header.join(","));
    for (v, &l) in uf.directions.iter().zip(&uf.thresholds) {
        let mut row: Vec<String> = v.iter().map(|&c| sig(c)).collect();
        row.push(sig(l));
        csv.row(&row);
    }
    csv.write(&out.join("unfolded.csv"))?;
    write_summary(
        cfg,
        "unfolded",
        json!({
            "direction_count": uf.direction_count,
            "tolerance": uf.tolerance,
        }),
        out,
    )?;
    if svg && body.dim == 2 {
        emit_svg(&body, Some(&uf), &[], &out.join("figure.svg"))
            .map_err(|e| RunError::Validation(e.to_string()))?;
    }
    Ok(())
}

fn run_conebound(cfg: &ExperimentConfig, out: &Path) -> Result<(), RunError> {
    let cb = cfg
        .conebound
        .as_ref()
        .ok_or_else(|| RunError::Validation("missing required field: conebound".into()))?;
    let params = EParams {
        alpha: cb.alpha,
        kappa: cb.kappa,
        delta: cb.delta.0,
        d: cb.d,
        r0: cb.r0,
        m: cb.m,
    };
    let tolerance = cb.tolerance.unwrap_or(1e-6 * cb.r0);
    let profile = e_profile(&params, cb.samples.unwrap_or(50), tolerance)?;
    let mut csv = Csv::new(cfg, "R,E");
    for (r, e) in profile.r_samples.iter().zip(&profile.e_values) {
        csv.row(&[sig(*r), sig(*e)]);
    }
    csv.write(&out.join("conebound.csv"))?;
    let lower_bound = if cb.alpha == -1.0
        && (cb.kappa - std::f64::consts::PI).abs() < 1e-12
        && cb.delta.0.is_infinite()
    {
        Some(lower_bound_r_tilde(cb.r0, cb.m))
    } else {
        None
    };
    write_summary(
        cfg,
        "conebound",
        json!({
            "r_tilde": profile.r_tilde,
            "lower_bound": lower_bound,
            "bracket": [profile.bracket.0, profile.bracket.1],
            "tolerance": profile.tolerance,
            "theta_min_numeric": profile.theta_min_numeric,
        }),
        out,
    )
}

fn run_summability(cfg: &ExperimentConfig, out: &Path) -> Result<(), RunError> {
    let dim = match cfg.body.as_ref() {
        Some(_) => cfg.build_body()?.dim,
        None => 2,
    };
    let spec = cfg.build_kernel(dim)?;
    let probe = cfg.probe_radius.unwrap_or(0.5);
    let params = cfg
        .parameters
        .clone()
        .unwrap_or_else(|| vec![0.1, 0.01, 1e-3]);
    if params.is_empty() || params.windows(2).any(|w| w[1] >= w[0]) || params.iter().any(|&p| p <= 0.0)
    {
        return Err(RunError::Validation(
            "parameters: summability needs a positive strictly decreasing sequence".into(),
        ));
    }
    let report = check_summability(&spec, probe, &params);
    let mut csv = Csv::new(cfg, "parameter,total_mass,outside_mass");
    for ((s, mass), (_, outside)) in report.masses.iter().zip(&report.outside_mass) {
        csv.row(&[sig(*s), sig(*mass), sig(*outside)]);
    }
    csv.write(&out.join("summability.csv"))?;
    write_summary(
        cfg,
        "summability",
        serde_json::to_value(&report).unwrap(),
        out,
    )
}
