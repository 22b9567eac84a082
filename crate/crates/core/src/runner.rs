//! Experiment configuration and the `measure`, `solve`, `check`,
//! `roundtrip` and `report` commands behind the `mixchris` binary.
//!
//! A config is one JSON document:
//!
//! ```json
//! {
//!   "bodies": [{"variant": "ellipsoid", "q": [1.0, 1.1, 1.2]}],
//!   "f": {"kind": "const", "value": 2.0},
//!   "grid": {"n_theta": 16, "n_phi": 32},
//!   "l_max": 16,
//!   "tolerances": {"compat": 1e-8, "residual": 1e-6, "psd": 1e-10},
//!   "checks": ["gm", "cond_n2"],
//!   "seed": 0
//! }
//! ```
//!
//! Body variants: `ball {r}`, `translated_ball {r, v}`, `ellipsoid {q}`,
//! `harmonic_perturbation {c, psi}`, `minkowski_sum {parts: [{body, weight}]}`.
//! Harmonic coefficient lists are `[[l, m, c], ...]`. Scalar fields use the
//! tag `kind`: `const`, `linear`, `harmonic`, `sum`, `product`,
//! `reciprocal`, `scaled`, `support`.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 inadmissible input
//! (body not C^{2,+}, incompatible or non-elliptic data), 3 solve converged but
//! `W[u]` is not positive definite, 4 a requested condition failed,
//! 5 solve did not converge or missed its accuracy target.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bodies::{is_c2plus, BodySpec, CofactorTensor, TensorFunction};
use crate::conditions::{
    check_cond_l, check_cond_n2, check_gm, check_matrix_convexity, check_new_form_3d,
    check_perturbation_bound, CheckOptions, ConditionVerdict,
};
use crate::diagnostics::{
    body_density, density_moments, eigen_csv, field_csv, mixed_volume_pairing, rank_profile,
    recovered_density, Pairing,
};
use crate::error::{Error, Result};
use crate::jets::{ScalarField, SphereFunction};
use crate::solver::{operator_apply, solution_weingarten, solve, SolveOptions, SolveReport};
use crate::sphere::{FramedGrid, GridSpec, NodalField, SphericalField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative compatibility tolerance on the first moments of `f`.
    pub compat: f64,
    /// Relative least-squares residual.
    pub residual: f64,
    /// `W` counts as positive definite when its smallest eigenvalue exceeds this.
    pub psd: f64,
    /// Rank threshold; `None` means `1e-6 ×` the largest eigenvalue.
    pub rank: Option<f64>,
    /// Margin tolerance of the condition checkers.
    pub condition: f64,
    /// Relative accuracy required by `roundtrip`.
    pub roundtrip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            compat: 1e-8,
            residual: 1e-6,
            psd: 1e-10,
            rank: None,
            condition: 1e-8,
            roundtrip: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    /// Directions per node for the n = 2 conditions.
    pub n_dirs: usize,
    /// Frames per node for the constant-rank condition.
    pub frames_per_node: usize,
    /// Samples for the matrix convexity test.
    pub n_samples: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        let d = CheckOptions::default();
        Self {
            n_dirs: d.n_dirs,
            frames_per_node: d.frames_per_node,
            n_samples: d.n_samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionName {
    Gm,
    CondN2,
    CondL,
    #[serde(rename = "new_form_3d")]
    NewForm3d,
    MatrixConvexity,
    PerturbationBound,
}

fn default_checks() -> Vec<ConditionName> {
    vec![ConditionName::Gm, ConditionName::CondN2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Two bodies for `measure`, one (the fixed body `Ω₁`) otherwise.
    pub bodies: Vec<BodySpec>,
    /// Prescribed density, for `solve` and `check`.
    #[serde(default)]
    pub f: Option<ScalarField>,
    /// Target solution `u*`, for `roundtrip`.
    #[serde(default)]
    pub target: Option<SphericalField>,
    pub grid: GridSpec,
    pub l_max: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_checks")]
    pub checks: Vec<ConditionName>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: Sampling,
}

impl ExperimentConfig {
    /// Schema-level checks that do not need the grid to be built.
    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("compat", t.compat),
            ("residual", t.residual),
            ("psd", t.psd),
            ("condition", t.condition),
            ("roundtrip", t.roundtrip),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        if let Some(r) = t.rank {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!("tolerances.rank must be positive, got {r}")));
            }
        }
        let s = &self.sampling;
        if s.n_dirs == 0 || s.frames_per_node == 0 || s.n_samples == 0 {
            return Err(Error::Config("sampling counts must be positive".into()));
        }
        for b in &self.bodies {
            b.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn check_options(&self) -> CheckOptions {
        CheckOptions {
            tol: self.tolerances.condition,
            n_dirs: self.sampling.n_dirs,
            frames_per_node: self.sampling.frames_per_node,
            n_samples: self.sampling.n_samples,
            seed: self.seed,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            compat_tol: self.tolerances.compat,
            residual_tol: self.tolerances.residual,
        }
    }

    fn build_grid(&self) -> Result<FramedGrid> {
        let grid = self.grid.build().map_err(|e| Error::Config(e.to_string()))?;
        if self.l_max > grid.max_collocation_degree() {
            return Err(Error::Config(format!(
                "l_max = {} exceeds {} for a {}x{} grid",
                self.l_max,
                grid.max_collocation_degree(),
                self.grid.n_theta,
                self.grid.n_phi
            )));
        }
        Ok(grid)
    }

    fn bodies_exactly(&self, n: usize, command: &str) -> Result<&[BodySpec]> {
        if self.bodies.len() != n {
            return Err(Error::Config(format!(
                "{command} needs {n} bodies, got {}",
                self.bodies.len()
            )));
        }
        Ok(&self.bodies)
    }

    fn density(&self) -> Result<&ScalarField> {
        self.f.as_ref().ok_or_else(|| Error::Config("missing key `f`".into()))
    }
}

/// Sets `path = value` in a JSON document, where `path` is dot-separated
/// and numeric segments index arrays. `value` is parsed as JSON, falling
/// back to a plain string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let segments: Vec<&str> = path.split('.').collect();
    for (k, seg) in segments.iter().enumerate() {
        let last = k + 1 == segments.len();
        cur = match cur {
            Value::Array(items) => {
                let i: usize = seg
                    .parse()
                    .map_err(|_| Error::Config(format!("`{seg}` in `{path}` is not an array index")))?;
                items
                    .get_mut(i)
                    .ok_or_else(|| Error::Config(format!("index {i} out of range in `{path}`")))?
            }
            Value::Object(map) => map.entry(seg.to_string()).or_insert(Value::Null),
            other => {
                if other.is_null() {
                    *other = Value::Object(Default::default());
                    other.as_object_mut().unwrap().entry(seg.to_string()).or_insert(Value::Null)
                } else {
                    return Err(Error::Config(format!("`{path}` descends into a non-object")));
                }
            }
        };
        if last {
            *cur = value;
            return Ok(());
        }
    }
    Ok(())
}

/// Parses a config from JSON text, applies `--set` overrides, and validates.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let config: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, overrides)
}

/// Exit code for an error raised while running a command.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::Aliasing { .. } | Error::Dimension { .. } => 1,
        Error::NotC2Plus { .. } | Error::Compatibility { .. } | Error::Ellipticity { .. } | Error::Domain(_) | Error::Geometry(_) => 2,
        Error::NonConvergence { .. } | Error::Conditioning(_) => 5,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        let kind = match e {
            Error::Config(_) => "config",
            Error::Dimension { .. } => "dimension",
            Error::Aliasing { .. } => "aliasing",
            Error::Geometry(_) => "geometry",
            Error::Domain(_) => "domain",
            Error::Ellipticity { .. } => "ellipticity",
            Error::Compatibility { .. } => "compatibility",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Conditioning(_) => "conditioning",
            Error::NotC2Plus { .. } => "not_c2plus",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        };
        ErrorReport {
            kind: kind.into(),
            message: e.to_string(),
        }
    }
}

/// `premise ⇒ conclusion`, evaluated on the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Implication {
    pub premise: String,
    pub conclusion: String,
    pub premise_pass: bool,
    pub conclusion_pass: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckResults {
    pub verdicts: Vec<ConditionVerdict>,
    pub implications: Vec<Implication>,
    /// Norm estimate of `ψ` when the perturbation bound was checked.
    pub c4_norm_estimate: Option<f64>,
}

impl CheckResults {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass) && self.implications.iter().all(|i| i.holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl FieldStats {
    fn of(field: &NodalField, grid: &FramedGrid) -> Result<Self> {
        let v = field.values();
        Ok(Self {
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: grid.integrate(v)? / (4.0 * std::f64::consts::PI),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    /// Smallest Weingarten eigenvalue of each body on the grid.
    pub body_min_eigs: Vec<f64>,
    /// Statistics of `2·D̃(W₁, W₂)`.
    pub density: FieldStats,
    pub moments: [f64; 3],
    /// Largest moment divided by `∫|density|`.
    pub relative_moment: f64,
    /// `∫u₁ dS(Ω₁, Ω₂)` against `∫u₂ dS(Ω₁, Ω₁)`.
    pub pairing: Pairing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub relative_error: f64,
    pub density_error: f64,
    pub tolerance: f64,
}

/// Everything a command produces. Serializes to the report JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommandReport {
    pub command: String,
    pub exit_code: i32,
    pub grid: GridSpec,
    pub l_max: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<CheckResults>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roundtrip: Option<RoundtripReport>,
}

/// A report plus CSV side files keyed by file name.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub report: CommandReport,
    pub files: Vec<(String, String)>,
}

impl CommandOutput {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.report)?)
    }

    /// Writes `report.json` and the CSV files into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()? + "\n")?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn empty_report(command: &str, config: &ExperimentConfig) -> CommandReport {
    CommandReport {
        command: command.into(),
        exit_code: 0,
        grid: config.grid,
        l_max: config.l_max,
        seed: config.seed,
        error: None,
        measure: None,
        checks: None,
        solve: None,
        roundtrip: None,
    }
}

fn finish(mut report: CommandReport, files: Vec<(String, String)>, outcome: Result<i32>) -> CommandOutput {
    match outcome {
        Ok(code) => report.exit_code = code,
        Err(e) => {
            report.exit_code = exit_code_for(&e);
            report.error = Some(ErrorReport::from(&e));
        }
    }
    CommandOutput { report, files }
}

fn require_c2plus(bodies: &[BodySpec], grid: &FramedGrid, psd: f64) -> Result<Vec<f64>> {
    bodies
        .iter()
        .map(|b| {
            let (ok, min_eig) = is_c2plus(b, grid, psd);
            if ok {
                Ok(min_eig)
            } else {
                Err(Error::NotC2Plus { min_eig })
            }
        })
        .collect()
}

/// Density of two bodies, its moments, and the mixed-volume pairing.
pub fn cmd_measure(config: &ExperimentConfig) -> CommandOutput {
    let mut report = empty_report("measure", config);
    let mut files = Vec::new();
    let outcome = (|| {
        let bodies = config.bodies_exactly(2, "measure")?;
        let grid = config.build_grid()?;
        let body_min_eigs = require_c2plus(bodies, &grid, config.tolerances.psd)?;
        let density = body_density(bodies, &grid)?;
        let moments = density_moments(&density, &grid)?;
        let mass = grid.integrate(&density.values().iter().map(|v| v.abs()).collect::<Vec<_>>())?;
        let relative_moment = moments.iter().fold(0.0f64, |m, v| m.max(v.abs())) / mass;
        let pairing = mixed_volume_pairing(&bodies[..1], &bodies[1], &bodies[0], &grid)?;
        files.push(("density.csv".to_string(), field_csv(density.values(), &grid)?));
        report.measure = Some(MeasureReport {
            body_min_eigs,
            density: FieldStats::of(&density, &grid)?,
            moments,
            relative_moment,
            pairing,
        });
        Ok(0)
    })();
    finish(report, files, outcome)
}

/// Runs the requested checkers with `A = cofactor_matrix(W₁)` and the config's `f`.
pub fn run_checks(config: &ExperimentConfig, grid: &FramedGrid) -> Result<CheckResults> {
    let body = &config.bodies_exactly(1, "checks")?[0];
    let f = config.density()?;
    let a = CofactorTensor::new(std::slice::from_ref(body))?;
    let opts = config.check_options();
    let mut out = CheckResults::default();
    for name in &config.checks {
        match name {
            ConditionName::Gm => out.verdicts.push(check_gm(f, grid, opts.tol)?),
            ConditionName::CondN2 => out.verdicts.push(check_cond_n2(&a, f, grid, &opts)?),
            ConditionName::CondL => out.verdicts.push(check_cond_l(&a, f, grid, &opts)?),
            ConditionName::NewForm3d => out.verdicts.push(check_new_form_3d(body, f, grid, &opts)?),
            ConditionName::MatrixConvexity => {
                let mc = check_matrix_convexity(body, f, grid, &opts)?;
                let nf = check_new_form_3d(body, f, grid, &opts)?;
                out.implications.push(Implication {
                    premise: mc.name.clone(),
                    conclusion: nf.name.clone(),
                    premise_pass: mc.pass,
                    conclusion_pass: nf.pass,
                    holds: !mc.pass || nf.pass,
                });
                out.verdicts.push(mc);
            }
            ConditionName::PerturbationBound => {
                let BodySpec::HarmonicPerturbation { c, psi } = body else {
                    return Err(Error::Config(
                        "perturbation_bound needs a harmonic_perturbation body".into(),
                    ));
                };
                let p = check_perturbation_bound(*c, psi, grid, &opts)?;
                out.c4_norm_estimate = Some(p.norm_estimate);
                out.implications.push(Implication {
                    premise: p.verdict.name.clone(),
                    conclusion: "new_form_3d".into(),
                    premise_pass: p.verdict.pass,
                    conclusion_pass: p.implied.as_ref().is_some_and(|v| v.pass),
                    holds: p.implication_holds,
                });
                out.verdicts.push(p.verdict);
            }
        }
    }
    Ok(out)
}

/// Only the condition checkers. Inadmissible inputs are configuration errors.
pub fn cmd_check(config: &ExperimentConfig) -> CommandOutput {
    let mut report = empty_report("check", config);
    let outcome = (|| {
        let grid = config.build_grid()?;
        report.checks = Some(run_checks(config, &grid)?);
        Ok(0)
    })()
    .map_err(|e| match e {
        Error::Io(_) | Error::Json(_) | Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    });
    finish(report, Vec::new(), outcome)
}

fn solve_files(solve: &SolveReport, u: &SphericalField, grid: &FramedGrid, tau: Option<f64>) -> Result<(SolveReport, Vec<(String, String)>)> {
    let w = solution_weingarten(u, grid);
    let profile = rank_profile(&w, tau)?;
    let mut solve = solve.clone();
    solve.rank_profile = Some(profile.summary());
    let files = vec![
        ("u.csv".to_string(), field_csv(&grid.nodes().iter().map(|x| u.value_at(x)).collect::<Vec<_>>(), grid)?),
        ("eigen.csv".to_string(), eigen_csv(&profile, grid)?),
    ];
    Ok((solve, files))
}

/// Compatibility, ellipticity, condition checks, solve, and diagnostics.
pub fn cmd_solve(config: &ExperimentConfig) -> CommandOutput {
    let mut report = empty_report("solve", config);
    let mut files = Vec::new();
    let outcome = (|| {
        let bodies = config.bodies_exactly(1, "solve")?;
        let f = config.density()?;
        let grid = config.build_grid()?;
        require_c2plus(bodies, &grid, config.tolerances.psd)?;
        let a = CofactorTensor::new(bodies)?.sample(&grid);
        let f_nodal = NodalField::new(grid.nodes().iter().map(|x| f.value(x)).collect());
        let checks = if config.checks.is_empty() {
            CheckResults::default()
        } else {
            run_checks(config, &grid)?
        };
        let checks_pass = checks.all_pass();
        report.checks = Some(checks);
        let mut solved = solve(&a, &f_nodal, &grid, config.l_max, &config.solve_options())?;
        solved.condition_verdicts = report.checks.as_ref().unwrap().verdicts.clone();
        let (solved, extra) = solve_files(&solved, &solved.u_coeffs.clone(), &grid, config.tolerances.rank)?;
        files = extra;
        let geometric = solved.w_min_eig > config.tolerances.psd;
        report.solve = Some(solved);
        Ok(if !geometric {
            3
        } else if !checks_pass {
            4
        } else {
            0
        })
    })();
    finish(report, files, outcome)
}

/// Generates `f` from `target`, solves, and compares.
pub fn cmd_roundtrip(config: &ExperimentConfig) -> CommandOutput {
    let mut report = empty_report("roundtrip", config);
    let mut files = Vec::new();
    let outcome = (|| {
        let bodies = config.bodies_exactly(1, "roundtrip")?;
        let target = config
            .target
            .as_ref()
            .ok_or_else(|| Error::Config("roundtrip needs `target`".into()))?;
        if target.l_max() > config.l_max {
            return Err(Error::Config(format!(
                "target degree {} exceeds l_max {}",
                target.l_max(),
                config.l_max
            )));
        }
        let grid = config.build_grid()?;
        require_c2plus(bodies, &grid, config.tolerances.psd)?;
        let a = CofactorTensor::new(bodies)?.sample(&grid);
        let f = operator_apply(&a, target, &grid)?;
        let solved = solve(&a, &f, &grid, config.l_max, &config.solve_options())?;

        let mut padded = target.clone();
        padded.resize(config.l_max);
        let diff: f64 = solved
            .u_coeffs
            .coeffs()
            .iter()
            .zip(padded.coeffs())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        let norm: f64 = padded.coeffs().iter().map(|c| c * c).sum();
        let relative_error = (diff / norm).sqrt();
        let recovered = recovered_density(bodies, &solved.u_coeffs, &grid)?;
        let density_error = recovered.l2_distance(&f, &grid)? / f.l2_norm(&grid)?;

        let (solved, extra) = solve_files(&solved, &solved.u_coeffs.clone(), &grid, config.tolerances.rank)?;
        files = extra;
        let geometric = solved.w_min_eig > config.tolerances.psd;
        report.solve = Some(solved);
        let tol = config.tolerances.roundtrip;
        report.roundtrip = Some(RoundtripReport {
            relative_error,
            density_error,
            tolerance: tol,
        });
        Ok(if !(relative_error <= tol && density_error <= tol) {
            5
        } else if !geometric {
            3
        } else {
            0
        })
    })();
    finish(report, files, outcome)
}

/// Plain-text summary of a report JSON written by one of the commands.
pub fn cmd_report(report_json: &str) -> Result<String> {
    let r: CommandReport = serde_json::from_str(report_json)?;
    let mut out = format!(
        "command {} on a {}x{} grid, l_max {}, seed {}: exit code {}\n",
        r.command, r.grid.n_theta, r.grid.n_phi, r.l_max, r.seed, r.exit_code
    );
    if let Some(e) = &r.error {
        out += &format!("error ({}): {}\n", e.kind, e.message);
    }
    if let Some(m) = &r.measure {
        out += &format!(
            "density in [{:.6}, {:.6}], mean {:.6}; relative moment {:.2e}; pairing {:.10} vs {:.10} (relative {:.2e})\n",
            m.density.min, m.density.max, m.density.mean, m.relative_moment, m.pairing.i1, m.pairing.i2, m.pairing.relative
        );
    }
    if let Some(c) = &r.checks {
        for v in &c.verdicts {
            out += &format!(
                "{:<20} {} margin {:+.6e} at node {} ({})\n",
                v.name,
                if v.pass { "pass" } else { "FAIL" },
                v.margin,
                v.witness.node,
                v.quantifier
            );
        }
        for i in &c.implications {
            out += &format!(
                "{} => {}: {} ({} / {})\n",
                i.premise,
                i.conclusion,
                if i.holds { "holds" } else { "VIOLATED" },
                i.premise_pass,
                i.conclusion_pass
            );
        }
    }
    if let Some(s) = &r.solve {
        out += &format!(
            "residual {:.3e} (tolerance {:.3e}); min eig W[u] {:.6} at node {}; {} dropped modes\n",
            s.residual_l2,
            s.residual_tolerance,
            s.w_min_eig,
            s.w_min_node,
            s.dropped_modes.len()
        );
        if let Some(p) = &s.rank_profile {
            out += &format!("rank histogram {:?}, smallest rank {}\n", p.histogram, p.l);
        }
    }
    if let Some(rt) = &r.roundtrip {
        out += &format!(
            "roundtrip relative error {:.3e}, density error {:.3e} (tolerance {:.1e})\n",
            rt.relative_error, rt.density_error, rt.tolerance
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Measure,
    Solve,
    Check,
    Roundtrip,
}

pub fn run(command: Command, config: &ExperimentConfig) -> CommandOutput {
    match command {
        Command::Measure => cmd_measure(config),
        Command::Solve => cmd_solve(config),
        Command::Check => cmd_check(config),
        Command::Roundtrip => cmd_roundtrip(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "bodies": [{"variant": "ball", "r": 1.0}],
            "f": {"kind": "const", "value": 2.0},
            "grid": {"n_theta": 16, "n_phi": 32},
            "l_max": 16
        })
    }

    #[test]
    fn overrides_follow_dot_paths() {
        let mut doc = base();
        apply_override(&mut doc, "grid.n_theta=24").unwrap();
        apply_override(&mut doc, "bodies.0.r=2.5").unwrap();
        apply_override(&mut doc, "tolerances.residual=1e-9").unwrap();
        apply_override(&mut doc, "checks=[\"gm\"]").unwrap();
        assert_eq!(doc["grid"]["n_theta"], 24);
        assert_eq!(doc["bodies"][0]["r"], 2.5);
        assert_eq!(doc["tolerances"]["residual"], 1e-9);
        let c = parse_config(&doc.to_string(), &[]).unwrap();
        assert_eq!(c.checks, vec![ConditionName::Gm]);
        assert!(apply_override(&mut doc, "bodies.7.r=1").is_err());
        assert!(apply_override(&mut doc, "no_equals_sign").is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let text = base().to_string();
        assert!(parse_config(&text, &["tolerances.compat=-1".into()]).is_err());
        assert!(parse_config(&text, &["unknown_key=1".into()]).is_err());
        assert!(parse_config(&text, &["bodies.0.r=-1".into()]).is_err());
        let c = parse_config(&text, &["l_max=40".into()]).unwrap();
        assert_eq!(cmd_solve(&c).exit_code(), 1);
    }

    #[test]
    fn ball_solve_and_report_summary() {
        let c = parse_config(&base().to_string(), &[]).unwrap();
        let out = cmd_solve(&c);
        assert_eq!(out.exit_code(), 0);
        let s = out.report.solve.as_ref().unwrap();
        assert!((s.u_coeffs.coeff(0, 0) - (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
        let text = cmd_report(&out.to_json().unwrap()).unwrap();
        assert!(text.contains("exit code 0"));
        assert!(text.contains("gm"));
        assert_eq!(out.files.len(), 2);
    }
}
