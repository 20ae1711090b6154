//! Command-line surface: argument parsing, command pipelines and output.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::observables::{
    delta_final, delta_final_bracket, einstein_a, extract_series_numerically, gamma_exact,
    gamma_leading, lamb_bracket, lamb_reference, lineshift_series, series_scale, shift_ratio,
    solve_normalization_with, z_factor, AtomParams, AtomPreset, ExtractionOptions,
    PhysicalConstants, ResonanceWeight,
};
use crate::report::{csv_document, document, to_json_string, Cell, RunFlags, Table};
use crate::selfenergy::{
    as_causal_distribution_dimensionless, r2_bracket, t2_prefactor, DimensionlessEnergy,
    NormalizationConstants, RetardedForm,
};
use crate::splitting::{retarded_part_central, BRANCH_EXCLUSION};
use crate::wavepacket::{bump_g, test_function_for_periods, z_numerical};
use crate::wworacle::{build_grid, evolve_trace, fit_decay, DecayFit};

pub const BUILTIN_PRESET: &str = "hydrogen-1s2p";
pub const HYDROGEN_PRESET_JSON: &str = include_str!("../presets/hydrogen-1s2p.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WeightArg {
    #[default]
    InverseU,
    Unity,
}

impl From<WeightArg> for ResonanceWeight {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::InverseU => ResonanceWeight::InverseU,
            WeightArg::Unity => ResonanceWeight::Unity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FormArg {
    #[default]
    HalfJump,
    FullJump,
}

impl From<FormArg> for RetardedForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::HalfJump => RetardedForm::HalfJump,
            FormArg::FullJump => RetardedForm::FullJump,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "causal-shift",
    version,
    about = "Causal splitting of the two-level atom self-energy: decay rate, line shift and numerical oracles"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Built-in preset name or path to a preset (or report) JSON file
    #[arg(long, global = true, default_value = BUILTIN_PRESET)]
    pub preset: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Resonance weight of the rate and line-shift factor
    #[arg(long, global = true, value_enum, default_value_t = WeightArg::InverseU)]
    pub weight: WeightArg,
    /// Closed form of the retarded part
    #[arg(long, global = true, value_enum, default_value_t = FormArg::HalfJump)]
    pub form: FormArg,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Decay rate
    Gamma(GammaArgs),
    /// Line shift
    Shift,
    /// Ratio of the final shift to the Lamb reference
    Ratio,
    /// Numerical central splitting against the closed retarded part
    SplitCheck(SplitArgs),
    /// Numerically fitted threshold series against the analytic coefficients
    SeriesCheck(SeriesArgs),
    /// Z from the p0 integral against the closed form
    WavepacketCheck(WavepacketArgs),
    /// Mode-discretized decay simulation
    WwSim(WwArgs),
    /// Physical constants and derived atom quantities
    Constants,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gamma(_) => "gamma",
            Command::Shift => "shift",
            Command::Ratio => "ratio",
            Command::SplitCheck(_) => "split-check",
            Command::SeriesCheck(_) => "series-check",
            Command::WavepacketCheck(_) => "wavepacket-check",
            Command::WwSim(_) => "ww-sim",
            Command::Constants => "constants",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GammaArgs {
    /// Also fit the rate of the default decay simulation
    #[arg(long)]
    pub ww: bool,
    /// Largest accepted relative difference between simulated and leading rate
    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 1.05)]
    pub u_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub u_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Largest accepted relative error of the imaginary part
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeriesArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c2: f64,
    /// Use the solved normalization constants instead of --c0/--c1/--c2
    #[arg(long)]
    pub solved: bool,
    /// Largest accepted relative coefficient error (scale max(|c|, 48))
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WavepacketArgs {
    /// Threshold offset of the synthetic atom
    #[arg(long, default_value_t = 1e-2)]
    pub delta_u: f64,
    /// Plateau lengths in optical periods
    #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 100.0, 1000.0, 10000.0])]
    pub periods: Vec<f64>,
    /// Use the preset atom and its t_g (ramp t_g/10) for a single evaluation
    #[arg(long)]
    pub one_shot: bool,
    /// Largest accepted relative error at the longest plateau
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WwArgs {
    /// Bandwidth in units of gamma
    #[arg(long, default_value_t = 200.0)]
    pub bandwidth: f64,
    #[arg(long, default_value_t = 4000)]
    pub modes: usize,
    /// Time step in units of 1/gamma
    #[arg(long, default_value_t = 5e-4)]
    pub dt: f64,
    /// Duration in units of 1/gamma
    #[arg(long, default_value_t = 6.0)]
    pub t_end: f64,
    /// Steps between stored samples
    #[arg(long, default_value_t = 40)]
    pub stride: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Computation(String),
    #[error("check failed: {message}")]
    CheckFailed { message: String, output: String },
    #[error("cannot write output: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Computation(_) => "computation",
            CliError::CheckFailed { .. } => "check-failed",
            CliError::Io(_) => "io",
        }
    }

    /// Diagnostic document for the error stream.
    pub fn diagnostic(&self) -> String {
        to_json_string(&json!({"error": self.kind(), "message": self.to_string()}))
            .expect("diagnostic serializes")
    }
}

fn computation<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Computation(e.to_string())
}

/// Resolves a preset name or path. Files may hold a bare preset or a report
/// document, whose metadata.preset is used.
pub fn resolve_preset(
    spec: &str,
    constants: &PhysicalConstants,
) -> Result<(AtomPreset, AtomParams), CliError> {
    let text = if spec == BUILTIN_PRESET {
        HYDROGEN_PRESET_JSON.to_string()
    } else {
        fs::read_to_string(spec).map_err(|e| CliError::Usage(format!("preset '{spec}': {e}")))?
    };
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("preset '{spec}': {e}")))?;
    let body = value
        .get("metadata")
        .and_then(|m| m.get("preset"))
        .cloned()
        .unwrap_or(value);
    let preset: AtomPreset = serde_json::from_value(body)
        .map_err(|e| CliError::Usage(format!("preset '{spec}': {e}")))?;
    let atom = AtomParams::from_preset(&preset, *constants)
        .map_err(|e| CliError::Usage(format!("preset '{spec}': {e}")))?;
    Ok((preset, atom))
}

/// Result of a pipeline before formatting.
struct CommandOutput {
    results: Map<String, Value>,
    table: Option<Table>,
    /// include the table rows in JSON output
    rows_in_json: bool,
    failure: Option<String>,
}

impl CommandOutput {
    fn scalars(results: Map<String, Value>) -> Self {
        Self {
            results,
            table: None,
            rows_in_json: false,
            failure: None,
        }
    }
}

fn complex_value(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn run_gamma(
    atom: &AtomParams,
    weight: ResonanceWeight,
    args: &GammaArgs,
) -> Result<CommandOutput, CliError> {
    let lead = gamma_leading(atom);
    let exact = gamma_exact(atom, weight);
    let du = atom.delta_u();
    let mut m = Map::new();
    m.insert("gamma_leading".into(), json!(lead));
    m.insert("gamma_exact".into(), json!(exact));
    m.insert("einstein_a".into(), json!(einstein_a(atom)));
    m.insert(
        "exact_over_leading_minus_one".into(),
        json!(exact / lead - 1.0),
    );
    m.insert("excess_window_upper".into(), json!(5.0 * du));
    m.insert(
        "excess_in_window".into(),
        json!(exact / lead - 1.0 > 0.0 && exact / lead - 1.0 < 5.0 * du),
    );
    m.insert("delta_u".into(), json!(du));
    let mut failure = None;
    if args.ww {
        let fit = simulate(
            atom,
            &WwArgs {
                bandwidth: 200.0,
                modes: 4000,
                dt: 5e-4,
                t_end: 6.0,
                stride: 40,
            },
        )?
        .1;
        let rel = fit.rate / lead - 1.0;
        m.insert("ww_rate".into(), json!(fit.rate));
        m.insert("ww_rel_diff".into(), json!(rel));
        if !(rel.abs() <= args.tol) {
            failure = Some(format!(
                "simulated rate differs from gamma_leading by {rel:e} (tolerance {:e})",
                args.tol
            ));
        }
    }
    Ok(CommandOutput {
        failure,
        ..CommandOutput::scalars(m)
    })
}

fn solved_constants(
    atom: &AtomParams,
    weight: ResonanceWeight,
) -> Result<NormalizationConstants, CliError> {
    Ok(
        solve_normalization_with(atom, weight, &ExtractionOptions::default())
            .map_err(computation)?
            .constants,
    )
}

fn run_shift(atom: &AtomParams, weight: ResonanceWeight) -> Result<CommandOutput, CliError> {
    let k = &atom.constants;
    let c = solved_constants(atom, weight)?;
    let z = z_factor(atom, &c, weight).map_err(computation)?;
    let mut m = Map::new();
    m.insert("delta_final".into(), json!(delta_final(atom)));
    m.insert(
        "delta_final_bracket".into(),
        json!(delta_final_bracket(atom.delta_u())),
    );
    m.insert("lamb_reference".into(), json!(lamb_reference(k)));
    m.insert("lamb_bracket".into(), json!(lamb_bracket(k)));
    m.insert("delta_u".into(), json!(atom.delta_u()));
    m.insert(
        "normalization".into(),
        serde_json::to_value(c).expect("constants serialize"),
    );
    m.insert("z_factor".into(), complex_value(z));
    m.insert("z_shift_rate".into(), json!(z.re / atom.t_g));
    // rounding of the O(1) normalization polynomial at the threshold
    let poly_scale = 2.5 + 11.0 / 6.0 + 1.0 + c.c0.abs() + c.c1.abs() + c.c2.abs();
    let floor = t2_prefactor(atom)
        * 2.0
        * (2.0 * std::f64::consts::PI).powi(2)
        * k.c
        * f64::EPSILON
        * poly_scale;
    m.insert("z_shift_rate_noise_floor".into(), json!(floor));
    m.insert(
        "z_shift_resolved".into(),
        json!((z.re / atom.t_g).abs() > 10.0 * floor),
    );
    m.insert("z_decay_rate".into(), json!(z.im / atom.t_g));
    Ok(CommandOutput::scalars(m))
}

fn run_ratio(atom: &AtomParams) -> Result<CommandOutput, CliError> {
    let r = shift_ratio(atom, &atom.constants).map_err(computation)?;
    let mut m = Map::new();
    m.insert("ratio_signed".into(), json!(r.signed));
    m.insert("ratio_magnitude".into(), json!(r.magnitude));
    m.insert("ratio_log_form".into(), json!(r.log_form));
    m.insert("delta_final".into(), json!(r.delta_final));
    m.insert("lamb_reference".into(), json!(r.lamb_reference));
    Ok(CommandOutput::scalars(m))
}

fn run_constants(atom: &AtomParams) -> Result<CommandOutput, CliError> {
    let mut m = Map::new();
    m.insert(
        "constants".into(),
        serde_json::to_value(atom.constants).expect("constants serialize"),
    );
    m.insert("lambda_bar_g".into(), json!(atom.lambda_bar_g()));
    m.insert("lambda_bar_e".into(), json!(atom.lambda_bar_e()));
    m.insert("delta_u".into(), json!(atom.delta_u()));
    m.insert("u_res".into(), json!(atom.u_res()));
    m.insert(
        "spectral_prefactor".into(),
        json!(atom.spectral_prefactor()),
    );
    Ok(CommandOutput::scalars(m))
}

/// Rows of the splitting check on a uniform u grid (bracket units).
pub fn split_check_rows(
    u_min: f64,
    u_max: f64,
    points: usize,
    form: RetardedForm,
) -> Result<Vec<[f64; 6]>, CliError> {
    if points < 2 || !(u_max > u_min) || !u_min.is_finite() || !u_max.is_finite() {
        return Err(CliError::Usage(format!(
            "split-check grid [{u_min}, {u_max}] with {points} points"
        )));
    }
    let d = as_causal_distribution_dimensionless();
    let us: Vec<f64> = (0..points)
        .map(|i| u_min + (u_max - u_min) * i as f64 / (points - 1) as f64)
        .collect();
    us.par_iter()
        .map(|&u| {
            let e = DimensionlessEnergy::new(u).map_err(computation)?;
            let closed = r2_bracket(e, form).map_err(computation)?.bracket() / std::f64::consts::PI;
            let numeric = retarded_part_central(&d, u, BRANCH_EXCLUSION).map_err(computation)?;
            let im_rel = if closed.im != 0.0 {
                (numeric.im - closed.im).abs() / closed.im.abs()
            } else {
                (numeric.im).abs()
            };
            Ok([u, closed.re, closed.im, numeric.re, numeric.im, im_rel])
        })
        .collect()
}

fn run_split(form: RetardedForm, args: &SplitArgs) -> Result<CommandOutput, CliError> {
    let rows = split_check_rows(args.u_min, args.u_max, args.points, form)?;
    let mut t = Table::new(&[
        "u",
        "re_closed",
        "im_closed",
        "re_numeric",
        "im_numeric",
        "im_rel_err",
    ]);
    for r in &rows {
        t.push(r.iter().map(|&x| Cell::Real(x)).collect());
    }
    let max_im = rows.iter().map(|r| r[5]).fold(0.0, f64::max);
    let max_re = rows.iter().map(|r| (r[3] - r[1]).abs()).fold(0.0, f64::max);
    let mut m = Map::new();
    m.insert("max_im_rel_err".into(), json!(max_im));
    m.insert("max_re_abs_diff".into(), json!(max_re));
    m.insert("points".into(), json!(rows.len()));
    let failure = (!(max_im <= args.tol))
        .then(|| format!("max im_rel_err {max_im:e} exceeds {:e}", args.tol));
    Ok(CommandOutput {
        results: m,
        table: Some(t),
        rows_in_json: true,
        failure,
    })
}

fn run_series(
    atom: &AtomParams,
    weight: ResonanceWeight,
    args: &SeriesArgs,
) -> Result<CommandOutput, CliError> {
    let c = if args.solved {
        solved_constants(atom, weight)?
    } else {
        NormalizationConstants::new(args.c0, args.c1, args.c2)
    };
    let analytic = lineshift_series(atom, &c, weight);
    let numeric = extract_series_numerically(atom, &c, weight).map_err(computation)?;
    let names = ["c0", "c1", "c2", "c3", "c_log3"];
    let mut t = Table::new(&["coefficient", "analytic", "numeric", "rel_err"]);
    let mut worst: f64 = 0.0;
    for ((name, a), n) in names
        .iter()
        .zip(analytic.coefficients())
        .zip(numeric.series.coefficients())
    {
        let rel = (a - n).abs() / series_scale(a);
        worst = worst.max(rel);
        t.push(vec![
            Cell::Text(name.to_string()),
            Cell::Real(a),
            Cell::Real(n),
            Cell::Real(rel),
        ]);
    }
    let mut m = Map::new();
    m.insert(
        "normalization".into(),
        serde_json::to_value(c).expect("constants serialize"),
    );
    m.insert("max_rel_err".into(), json!(worst));
    m.insert("bracket_prefactor".into(), json!(analytic.prefactor));
    m.insert("fit_condition".into(), json!(numeric.condition));
    let failure = (!(worst <= args.tol))
        .then(|| format!("max coefficient error {worst:e} exceeds {:e}", args.tol));
    Ok(CommandOutput {
        results: m,
        table: Some(t),
        rows_in_json: true,
        failure,
    })
}

fn run_wavepacket(atom: &AtomParams, args: &WavepacketArgs) -> Result<CommandOutput, CliError> {
    let (work, cases): (AtomParams, Vec<f64>) = if args.one_shot {
        (*atom, vec![f64::NAN])
    } else {
        if args.periods.is_empty() || args.periods.iter().any(|p| !(*p > 0.0)) {
            return Err(CliError::Usage("--periods must be positive".into()));
        }
        (
            atom.with_delta_u(args.delta_u)
                .map_err(|e| CliError::Usage(e.to_string()))?,
            args.periods.clone(),
        )
    };
    let c = solved_constants(&work, ResonanceWeight::Unity)?;
    let results: Vec<Result<_, CliError>> = cases
        .par_iter()
        .map(|&n| {
            let g = if n.is_nan() {
                bump_g(work.t_g, work.t_g / 10.0, work.constants.c).map_err(computation)?
            } else {
                test_function_for_periods(&work, n).map_err(computation)?
            };
            let z = z_numerical(&work, &c, &g).map_err(computation)?;
            Ok((g.t_g, z))
        })
        .collect();
    let mut t = Table::new(&[
        "t_g",
        "rel_error",
        "regime_flag",
        "regime_ratio",
        "rel_error_plateau",
        "z_numerical_re",
        "z_numerical_im",
        "z_closed_re",
        "z_closed_im",
        "z_closed_inverse_u_im",
        "z_dispersion_im",
        "gamma_numerical",
    ]);
    let mut last_rel = f64::NAN;
    for r in results {
        let (t_g, z) = r?;
        last_rel = z.rel_error;
        t.push(vec![
            Cell::Real(t_g),
            Cell::Real(z.rel_error),
            Cell::Bool(!z.regime_ok),
            Cell::Real(z.regime_ratio),
            Cell::Real(z.rel_error_plateau),
            Cell::Real(z.z_numerical.re),
            Cell::Real(z.z_numerical.im),
            Cell::Real(z.z_closed.re),
            Cell::Real(z.z_closed.im),
            Cell::Real(z.z_closed_inverse_u.im),
            Cell::Real(z.z_numerical_dispersion.im),
            Cell::Real(z.z_numerical.im / z.effective_duration),
        ]);
    }
    let mut m = Map::new();
    m.insert("delta_u".into(), json!(work.delta_u()));
    m.insert("gamma_leading".into(), json!(gamma_leading(&work)));
    m.insert(
        "normalization".into(),
        serde_json::to_value(c).expect("constants serialize"),
    );
    m.insert("final_rel_error".into(), json!(last_rel));
    let failure =
        (!(last_rel <= args.tol)).then(|| format!("rel_error {last_rel:e} exceeds {:e}", args.tol));
    Ok(CommandOutput {
        results: m,
        table: Some(t),
        rows_in_json: true,
        failure,
    })
}

fn simulate(
    atom: &AtomParams,
    args: &WwArgs,
) -> Result<(crate::wworacle::DecayTrace, DecayFit), CliError> {
    let gamma = gamma_leading(atom);
    let grid = build_grid(atom, args.bandwidth * gamma, args.modes)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let trace = evolve_trace(
        &grid,
        atom,
        args.t_end / gamma,
        args.dt / gamma,
        args.stride,
    )
    .map_err(computation)?;
    let fit = fit_decay(&trace).map_err(computation)?;
    Ok((trace, fit))
}

fn run_ww(atom: &AtomParams, args: &WwArgs) -> Result<CommandOutput, CliError> {
    let (trace, fit) = simulate(atom, args)?;
    let gamma = gamma_leading(atom);
    let mut t = Table::new(&["t", "pop_e", "re_c_e", "im_c_e"]);
    for (tt, c) in trace.t.iter().zip(&trace.c_e) {
        t.push(vec![
            Cell::Real(*tt),
            Cell::Real(c.norm_sqr()),
            Cell::Real(c.re),
            Cell::Real(c.im),
        ]);
    }
    let mut m = Map::new();
    m.insert("rate".into(), json!(fit.rate));
    m.insert("shift".into(), json!(fit.shift));
    m.insert("residual".into(), json!(fit.residual));
    m.insert("gamma_leading".into(), json!(gamma));
    m.insert("rate_rel_diff".into(), json!(fit.rate / gamma - 1.0));
    m.insert("fit_window".into(), json!([fit.t_lo, fit.t_hi]));
    m.insert("max_norm_drift".into(), json!(trace.max_norm_drift));
    m.insert("samples".into(), json!(trace.t.len()));
    Ok(CommandOutput {
        results: m,
        table: Some(t),
        rows_in_json: false,
        failure: None,
    })
}

/// Runs a parsed command and returns the formatted output. A failed check
/// returns `CheckFailed` carrying the output, which is still written.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let constants = PhysicalConstants::CODATA_2018;
    let (preset, atom) = resolve_preset(&cli.common.preset, &constants)?;
    let weight: ResonanceWeight = cli.common.weight.into();
    let form: RetardedForm = cli.common.form.into();
    let out = match &cli.command {
        Command::Gamma(a) => run_gamma(&atom, weight, a)?,
        Command::Shift => run_shift(&atom, weight)?,
        Command::Ratio => run_ratio(&atom)?,
        Command::SplitCheck(a) => run_split(form, a)?,
        Command::SeriesCheck(a) => run_series(&atom, weight, a)?,
        Command::WavepacketCheck(a) => run_wavepacket(&atom, a)?,
        Command::WwSim(a) => run_ww(&atom, a)?,
        Command::Constants => run_constants(&atom)?,
    };
    let mut extra = vec![
        (
            "common".to_string(),
            serde_json::to_value(&cli.common).expect("flags serialize"),
        ),
        (
            "command".to_string(),
            serde_json::to_value(&cli.command).expect("flags serialize"),
        ),
    ];
    extra.sort_by(|a, b| a.0.cmp(&b.0));
    let flags = RunFlags {
        weight,
        form,
        preset_name: cli.common.preset.clone(),
        preset,
        extra,
    };
    let name = cli.command.name();
    let text = match cli.common.format {
        Format::Json => {
            let mut results = out.results;
            if let (Some(t), true) = (&out.table, out.rows_in_json) {
                results.insert("rows".into(), t.to_value());
            }
            to_json_string(&document(name, &flags, Value::Object(results))).map_err(computation)?
        }
        Format::Csv => {
            let table = match out.table {
                Some(t) => t,
                None => scalar_table(&out.results),
            };
            csv_document(name, &flags, &table)
        }
    };
    match out.failure {
        Some(message) => Err(CliError::CheckFailed {
            message,
            output: text,
        }),
        None => Ok(text),
    }
}

/// One-row table of the scalar results, columns in key order.
fn scalar_table(results: &Map<String, Value>) -> Table {
    let mut cols = Vec::new();
    let mut row = Vec::new();
    for (k, v) in results {
        let cell = match v {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Cell::Int(i)
                } else {
                    Cell::Real(n.as_f64().unwrap_or(f64::NAN))
                }
            }
            Value::Bool(b) => Cell::Bool(*b),
            Value::String(s) => Cell::Text(s.clone()),
            Value::Null => Cell::Real(f64::NAN),
            Value::Object(o) if o.len() == 2 && o.contains_key("re") && o.contains_key("im") => {
                for part in ["re", "im"] {
                    cols.push(format!("{k}_{part}"));
                    row.push(Cell::Real(o[part].as_f64().unwrap_or(f64::NAN)));
                }
                continue;
            }
            _ => continue,
        };
        cols.push(k.clone());
        row.push(cell);
    }
    let names: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&names);
    t.push(row);
    t
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Parses arguments, runs, writes output; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli);
    let err = match result {
        Ok(text) => match write_output(&cli.common.out, &text) {
            Ok(()) => return 0,
            Err(e) => e,
        },
        Err(CliError::CheckFailed { message, output }) => {
            match write_output(&cli.common.out, &output) {
                Ok(()) => CliError::CheckFailed {
                    message,
                    output: String::new(),
                },
                Err(e) => e,
            }
        }
        Err(e) => e,
    };
    eprint!("{}", err.diagnostic());
    err.exit_code()
}
