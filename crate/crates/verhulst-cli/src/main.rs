//! Command-line front end for the logistic growth model.
//!
//! Subcommands evaluate the closed-form solution, sample curves onto a grid,
//! cross-check against a numerical integrator, fit parameters to CSV time
//! series, and describe the branch structure of a parameter set.
//!
//! Exit codes: 0 success, 1 input error, 2 flag error, 3 fit did not
//! converge (results are still written), 4 singular evaluation.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use verhulst::{
    fit_full, fit_ratio_linear, integrate_logistic, EvalError, FitError, FitResult,
    IntegratorConfig, LogisticParams, Method, OdeError, ParamError, SeriesError, TimeSeries,
};

#[derive(Parser)]
#[command(
    name = "verhulst",
    version,
    about = "Logistic growth model: closed forms, integration cross-checks, and fitting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the population at a single time.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        /// Evaluation time.
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sample population, ratio, and growth rate on a uniform time grid.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        /// First grid time.
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        /// Last grid time (must exceed --from).
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        /// Number of grid points (at least 2).
        #[arg(long)]
        points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Integrate the growth equation numerically and report the error
    /// against the closed form.
    Integrate {
        #[command(flatten)]
        model: ModelArgs,
        /// Fixed step size (> 0).
        #[arg(long = "h", value_name = "STEP")]
        step: f64,
        /// End of the integration span [0, t-end].
        #[arg(long = "t-end")]
        t_end: f64,
        /// Integration scheme.
        #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
        method: MethodArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fit logistic parameters to a CSV time series.
    Fit {
        /// Input CSV path, or '-' for standard input. Header must start
        /// with `t,P`; extra columns are ignored.
        #[arg(long, value_name = "PATH")]
        input: String,
        /// Known carrying capacity: uses the linearized ratio fit.
        /// Without it the full nonlinear fit estimates all parameters.
        #[arg(long)]
        capacity: Option<f64>,
        /// Sort rows by time before fitting instead of rejecting
        /// out-of-order input.
        #[arg(long)]
        sort: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Describe the branch, ratio, transition time, and maximum growth
    /// point for a parameter set.
    Info {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Carrying capacity M (> 0).
    #[arg(long = "M", value_name = "CAPACITY")]
    m: f64,
    /// Growth rate k (> 0).
    #[arg(long = "k", value_name = "RATE")]
    k: f64,
    /// Starting population P0 (any finite value).
    #[arg(long = "P0", value_name = "START", allow_negative_numbers = true)]
    p0: f64,
}

impl ModelArgs {
    fn build(&self) -> Result<LogisticParams, CliError> {
        LogisticParams::new(self.m, self.k, self.p0).map_err(param_error)
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this path instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Euler,
}

impl From<MethodArg> for Method {
    fn from(value: MethodArg) -> Self {
        match value {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Euler => Method::Euler,
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn flags(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn singular(message: impl Into<String>) -> Self {
        Self { code: 4, message: message.into() }
    }
}

fn param_error(err: ParamError) -> CliError {
    CliError::flags(err.to_string())
}

fn eval_error(err: EvalError) -> CliError {
    match err {
        EvalError::SingularInput { .. } => CliError::singular(err.to_string()),
        EvalError::WrongBranch { .. } => CliError::flags(err.to_string()),
    }
}

fn ode_error(err: OdeError) -> CliError {
    match err {
        OdeError::InvalidStep { .. } | OdeError::InvalidSpan { .. } | OdeError::StepOverflow { .. } => {
            CliError::flags(err.to_string())
        }
        OdeError::SingularRegion { .. }
        | OdeError::MapSingularity { .. }
        | OdeError::RatioUndefined => CliError::singular(err.to_string()),
    }
}

fn fit_error(err: FitError) -> CliError {
    match err {
        FitError::InvalidCapacity { .. } | FitError::InvalidInit(_) => {
            CliError::flags(err.to_string())
        }
        _ => CliError::input(err.to_string()),
    }
}

fn series_error(err: SeriesError) -> CliError {
    CliError::input(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (text, out, exit) = match cli.command {
        Command::Eval { model, t, out } => (cmd_eval(&model, t, out.format)?, out, 0u8),
        Command::Sample { model, from, to, points, out } => {
            (cmd_sample(&model, from, to, points, out.format)?, out, 0)
        }
        Command::Integrate { model, step, t_end, method, out } => {
            (cmd_integrate(&model, step, t_end, method, out.format)?, out, 0)
        }
        Command::Fit { input, capacity, sort, out } => {
            let (text, converged) = cmd_fit(&input, capacity, sort, out.format)?;
            (text, out, if converged { 0 } else { 3 })
        }
        Command::Info { model, out } => (cmd_info(&model, out.format)?, out, 0),
    };
    write_output(&out, &text)?;
    if exit == 3 {
        eprintln!("warning: fit did not converge");
    }
    Ok(ExitCode::from(exit))
}

fn write_output(out: &OutputArgs, text: &str) -> Result<(), CliError> {
    match &out.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Fixed 12-significant-digit scientific notation: deterministic and
/// locale-independent.
fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn json_opt(x: Option<f64>) -> Value {
    x.map(Value::from).unwrap_or(Value::Null)
}

/// The `meta` object attached to every JSON payload.
fn meta(params: &LogisticParams) -> Value {
    let branch = params.classify();
    json!({
        "branch": branch.name(),
        "tau0": json_opt(branch.tau0()),
    })
}

fn render_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON rendering cannot fail");
    text.push('\n');
    text
}

fn cmd_eval(model: &ModelArgs, t: f64, format: Format) -> Result<String, CliError> {
    let params = model.build()?;
    let p = params.eval(t).map_err(eval_error)?;
    Ok(match format {
        Format::Csv => format!("t,P\n{},{}\n", num(t), num(p)),
        Format::Json => render_json(&json!({
            "meta": meta(&params),
            "t": t,
            "P": p,
        })),
    })
}

fn cmd_sample(
    model: &ModelArgs,
    from: f64,
    to: f64,
    points: usize,
    format: Format,
) -> Result<String, CliError> {
    let params = model.build()?;
    if points < 2 {
        return Err(CliError::flags(format!("--points must be at least 2, got {points}")));
    }
    // partial_cmp keeps NaN flag values out: anything but Greater is refused.
    if to.partial_cmp(&from) != Some(std::cmp::Ordering::Greater) {
        return Err(CliError::flags(format!("--to ({to}) must exceed --from ({from})")));
    }

    let step = (to - from) / (points - 1) as f64;
    let mut csv = String::from("t,P,R,dPdt\n");
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        // Final point lands on `to` exactly; no accumulated stepping.
        let t = if i + 1 == points { to } else { from + step * i as f64 };
        let (p, dpdt) = match params.eval(t) {
            Ok(p) => (Some(p), Some(params.growth_rate(p))),
            Err(EvalError::SingularInput { .. }) => (None, None),
            Err(err) => return Err(eval_error(err)),
        };
        // The ratio stays finite across the asymptote; it is undefined only
        // for the frozen-zero branch.
        let r = params.ratio(t).ok();

        match format {
            Format::Csv => {
                let cell = |v: Option<f64>| v.map(num).unwrap_or_else(|| "singular".into());
                let r_cell = r.map(num).unwrap_or_default();
                csv.push_str(&format!("{},{},{},{}\n", num(t), cell(p), r_cell, cell(dpdt)));
            }
            Format::Json => rows.push(json!({
                "t": t,
                "P": json_opt(p),
                "R": json_opt(r),
                "dPdt": json_opt(dpdt),
            })),
        }
    }

    Ok(match format {
        Format::Csv => csv,
        Format::Json => render_json(&json!({
            "meta": meta(&params),
            "rows": rows,
        })),
    })
}

fn cmd_integrate(
    model: &ModelArgs,
    step: f64,
    t_end: f64,
    method: MethodArg,
    format: Format,
) -> Result<String, CliError> {
    let params = model.build()?;
    let config = IntegratorConfig { step_h: step, method: method.into(), t_end };
    let report = integrate_logistic(&params, &config).map_err(ode_error)?;

    let mut csv = String::from("t,P,err\n");
    let mut rows = Vec::with_capacity(report.trajectory.samples.len());
    for &(t, p) in &report.trajectory.samples {
        // A successful integration proves the grid is clear of the asymptote.
        let err = p - params.eval(t).map_err(eval_error)?;
        match format {
            Format::Csv => csv.push_str(&format!("{},{},{}\n", num(t), num(p), num(err))),
            Format::Json => rows.push(json!({ "t": t, "P": p, "err": err })),
        }
    }

    Ok(match format {
        Format::Csv => csv,
        Format::Json => {
            let branch = params.classify();
            render_json(&json!({
                "meta": {
                    "branch": branch.name(),
                    "tau0": json_opt(branch.tau0()),
                    "method": config.method.name(),
                    "step_h": config.step_h,
                    "t_end": config.t_end,
                    "steps": report.steps,
                    "max_abs_error": report.max_abs_error,
                    "l2_error": report.l2_error,
                },
                "rows": rows,
            }))
        }
    })
}

fn cmd_fit(
    input: &str,
    capacity: Option<f64>,
    sort: bool,
    format: Format,
) -> Result<(String, bool), CliError> {
    let raw = read_input(input)?;
    let mut points = parse_points(&raw)?;
    if sort {
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    }
    let data = TimeSeries::new(points).map_err(series_error)?;

    let result = match capacity {
        Some(m) => fit_ratio_linear(&data, m),
        None => fit_full(&data, None),
    }
    .map_err(fit_error)?;

    Ok((render_fit(&result, format), result.converged))
}

fn render_fit(result: &FitResult, format: Format) -> String {
    let p = &result.params;
    match format {
        Format::Csv => format!(
            "field,value\nM,{}\nk,{}\nP0,{}\nmethod,{}\nrss,{}\nconverged,{}\niterations,{}\n",
            num(p.capacity()),
            num(p.rate()),
            num(p.initial()),
            result.method.name(),
            num(result.rss),
            result.converged,
            result.iterations,
        ),
        Format::Json => render_json(&json!({
            "meta": meta(p),
            "M": p.capacity(),
            "k": p.rate(),
            "P0": p.initial(),
            "method": result.method.name(),
            "rss": result.rss,
            "converged": result.converged,
            "iterations": result.iterations,
        })),
    }
}

fn cmd_info(model: &ModelArgs, format: Format) -> Result<String, CliError> {
    let params = model.build()?;
    let branch = params.classify();
    let growth = params.max_growth_point().ok();

    let fields: [(&str, Option<f64>); 6] = [
        ("R0", branch.ratio_r0()),
        ("S0", branch.s0()),
        ("tau0", branch.tau0()),
        ("max_growth_time", growth.map(|g| g.time)),
        ("max_growth_population", growth.map(|g| g.population)),
        ("max_growth_rate", growth.map(|g| g.rate)),
    ];

    Ok(match format {
        Format::Csv => {
            let mut csv = format!("field,value\nbranch,{}\n", branch.name());
            for (name, value) in fields {
                csv.push_str(&format!("{name},{}\n", value.map(num).unwrap_or_default()));
            }
            csv
        }
        Format::Json => {
            let mut object = serde_json::Map::new();
            object.insert("meta".into(), meta(&params));
            object.insert("branch".into(), branch.name().into());
            for (name, value) in fields {
                object.insert(name.into(), json_opt(value));
            }
            render_json(&Value::Object(object))
        }
    })
}

fn read_input(input: &str) -> Result<String, CliError> {
    if input == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::input(format!("cannot read standard input: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(input).map_err(|e| CliError::input(format!("cannot read {input}: {e}")))
    }
}

/// Parse the `t,P` CSV contract: comma-separated, `.` decimal point, header
/// first. Columns beyond the second are ignored; blank lines are skipped.
fn parse_points(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty());

    let Some((_, header)) = lines.next() else {
        return Err(CliError::input("empty input: expected a `t,P` CSV"));
    };
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.len() < 2 || names[0] != "t" || names[1] != "P" {
        return Err(CliError::input(format!(
            "bad header {header:?}: expected columns starting with `t,P`"
        )));
    }

    let mut points = Vec::new();
    for (index, line) in lines {
        let row = index + 1;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 2 {
            return Err(CliError::input(format!("line {row}: expected at least two fields")));
        }
        let t = parse_field(cols[0], row, "t")?;
        let p = parse_field(cols[1], row, "P")?;
        points.push((t, p));
    }
    Ok(points)
}

fn parse_field(field: &str, row: usize, name: &str) -> Result<f64, CliError> {
    field
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("line {row}: cannot parse {name} value {:?}", field.trim())))
}
