//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 when the
//! pipeline fails, 2 for usage and input errors.
//!
//! Every output file starts with (CSV) or contains (JSON) the run
//! configuration and master seed. Worker count and output paths are left
//! out so that reruns compare byte for byte.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ensemble::{
    distance_profile, generate_frequencies, null_degree_distribution, stability_diagnostic, compare_with_null,
    write_profiles_csv, EnsembleConfig,
};
use crate::error::{Error, Result};
use crate::garch::{fit, presets, simulate, FitOptions, GjrGarchParams, NoiseKind};
use crate::stats::{rank_correlation, NoiseFamily};
use crate::timeseries::{compute_returns, historical_volatility, load_csv, ColumnConfig, PriceSeries, ReturnScale, Slice};
use crate::validation::{
    conditional_volatility_series, quantize_sigma0, FitScope, FrequencyMode, IndicatorSeries, NullModel, Runner,
    ValidationConfig,
};
use crate::visibility::{degree_histogram, degrees, ivg_build, vg_build, GraphKind, IvgMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesSource {
    Price,
    Returns,
    Volatility,
}

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "vgval",
    version,
    about = "Validate visibility-graph links against a GJR-GARCH null ensemble"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output file (or directory for `sweep` and `probe`); stdout by default.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip)]
    pub quiet: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "close")]
    pub price_column: String,
    #[arg(long, default_value = "date")]
    pub date_column: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value = "t")]
    pub noise: NoiseKind,
    /// Use a built-in parameter set (sp500, merval, ase, cac40, dax, ibex,
    /// smi, ukx) instead of fitting.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidationArgs {
    #[arg(long, default_value_t = 500)]
    pub window: usize,
    #[arg(long, default_value_t = 60)]
    pub shift: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 3000)]
    pub ensemble_size: usize,
    #[arg(long, default_value = "literal")]
    pub ivg_mode: IvgMode,
    #[arg(long, default_value = "global")]
    pub fit_scope: FitScope,
    #[arg(long, default_value = "per-pair")]
    pub frequency_mode: FrequencyMode,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Fit GJR-GARCH by maximum likelihood and print the parameter table.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "t")]
        noise: NoiseKind,
        /// Also write the report as JSON.
        #[arg(long)]
        #[serde(skip)]
        json: Option<PathBuf>,
    },
    /// Simulate a GJR-GARCH path as a price CSV.
    Simulate {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, requires_all = ["alpha1", "beta1", "gamma1"], conflicts_with = "preset")]
        alpha0: Option<f64>,
        #[arg(long)]
        alpha1: Option<f64>,
        #[arg(long)]
        beta1: Option<f64>,
        #[arg(long)]
        gamma1: Option<f64>,
        /// Degrees of freedom of standardized t noise; normal noise if absent.
        #[arg(long)]
        dof: Option<f64>,
        #[arg(long, default_value_t = 3000)]
        length: usize,
        /// Initial volatility; the stationary level by default.
        #[arg(long)]
        sigma0: Option<f64>,
        #[arg(long, default_value_t = 100.0)]
        start_price: f64,
    },
    /// Build the VG or IVG of a series and write its edge list.
    Graph {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "volatility")]
        series: SeriesSource,
        #[arg(long, value_enum, default_value = "vg")]
        kind: GraphKindArg,
        #[arg(long, default_value = "literal")]
        ivg_mode: IvgMode,
        /// First sample of the sub-range (1-based).
        #[arg(long, default_value_t = 1)]
        start: usize,
        #[arg(long)]
        length: Option<usize>,
    },
    /// Sliding-window validated link counts and validated visibility.
    Indicator {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        validation: ValidationArgs,
        /// File with one event date per line, echoed into the output.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Indicator over a grid of thresholds, windows and shifts.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        validation: ValidationArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
        rhos: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "500")]
        windows: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "60")]
        shifts: Vec<usize>,
    },
    /// Null-model diagnostics: degree comparison, distance profile, stability.
    Probe {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        validation: ValidationArgs,
        /// Null graphs of full series length pooled for the degree comparison.
        #[arg(long, default_value_t = 100)]
        null_samples: usize,
        /// Ensemble sizes for the stability table; empty to skip.
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        stability_sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKindArg {
    Vg,
    Ivg,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyInput
            | Error::MissingColumn(_)
            | Error::InvalidRow { .. }
            | Error::TooShort { .. }
            | Error::InvalidParameter(_)
            | Error::Csv(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.into())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Regular output goes to `out` unless `--output` is given.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config_file(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match cli.common.workers {
        Some(0) => Err(Failure::Usage("--workers must be >= 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, out, err)),
            Err(e) => Err(Failure::Usage(e.to_string())),
        },
        None => dispatch(&cli, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(err, "error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let _ = writeln!(err, "  caused by: {s}");
                source = s.source();
            }
            1
        }
    }
}

fn config_value(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Reads `key=value` lines; `#` starts a comment and `_` in keys reads as `-`.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::InvalidRow {
            row: k + 1,
            reason: format!("expected key=value, got `{line}`"),
        })?;
        pairs.push((key.trim().replace('_', "-"), value.trim().to_string()));
    }
    Ok(pairs)
}

fn merge_config_file(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_value(&args) else {
        return Ok(args);
    };
    let pairs = parse_config_file(&std::fs::read_to_string(&path)?)?;
    let mut cmd = Cli::command();
    cmd.build();
    let Some((pos, sub)) = args.iter().enumerate().skip(1).find_map(|(i, a)| {
        let name = a.to_string_lossy();
        cmd.find_subcommand(name.as_ref()).map(|s| (i, s.clone()))
    }) else {
        return Ok(args);
    };
    let given = |key: &str, args: &[OsString]| {
        let flag = format!("--{key}");
        let prefix = format!("--{key}=");
        args.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&prefix)
        })
    };
    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            continue;
        }
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown config key `{key}`")))?;
        if given(&key, &args) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => {
                if value.parse::<bool>().map_err(|_| Error::InvalidParameter(format!("{key}: expected true or false")))? {
                    injected.push(OsString::from(format!("--{key}")));
                }
            }
            _ => injected.push(OsString::from(format!("--{key}={value}"))),
        }
    }
    let tail = args.split_off(pos + 1);
    args.extend(injected);
    args.extend(tail);
    Ok(args)
}

fn provenance_json(cli: &Cli) -> Outcome<String> {
    serde_json::to_string(cli).map_err(|e| Failure::Run(e.into()))
}

fn header_lines(cli: &Cli) -> Outcome<String> {
    Ok(format!(
        "# vgval={}\n# seed={}\n# run={}\n",
        env!("CARGO_PKG_VERSION"),
        cli.common.seed,
        provenance_json(cli)?
    ))
}

fn open_output<'a>(path: Option<&Path>, out: &'a mut dyn Write) -> Outcome<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(out),
    })
}

fn output_dir(cli: &Cli) -> Outcome<PathBuf> {
    let dir = cli
        .common
        .output
        .clone()
        .ok_or_else(|| Failure::Usage("this subcommand needs --output DIR".into()))?;
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn load_prices(input: &InputArgs) -> Outcome<PriceSeries> {
    let file = File::open(&input.input)
        .map_err(|e| Failure::Usage(format!("cannot open {}: {e}", input.input.display())))?;
    let columns = ColumnConfig {
        price: input.price_column.clone(),
        date: Some(input.date_column.clone()),
    };
    Ok(load_csv(std::io::BufReader::new(file), &columns)?)
}

fn preset(name: &str) -> Outcome<GjrGarchParams> {
    presets::by_name(name).ok_or_else(|| Failure::Usage(format!("unknown preset `{name}`")))
}

fn validation_config(v: &ValidationArgs, noise: NoiseKind, seed: u64) -> ValidationConfig {
    ValidationConfig {
        rho: v.rho,
        window: v.window,
        shift: v.shift,
        ensemble_size: v.ensemble_size,
        fit_scope: v.fit_scope,
        ivg_mode: v.ivg_mode,
        frequency_mode: v.frequency_mode,
        noise,
        seed,
    }
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Outcome<()> {
    match &cli.command {
        Command::Fit { input, noise, json } => cmd_fit(cli, input, *noise, json.as_deref(), out, err),
        Command::Simulate { .. } => cmd_simulate(cli, out),
        Command::Graph { .. } => cmd_graph(cli, out, err),
        Command::Indicator { .. } => cmd_indicator(cli, out, err),
        Command::Sweep { .. } => cmd_sweep(cli, err),
        Command::Probe { .. } => cmd_probe(cli, err),
    }
}

fn cmd_fit(
    cli: &Cli,
    input: &InputArgs,
    noise: NoiseKind,
    json: Option<&Path>,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> Outcome<()> {
    let prices = load_prices(input)?;
    let returns = compute_returns(&prices, ReturnScale::Percent);
    let report = fit(&returns, noise, &FitOptions::default())?;
    if !report.converged && !cli.common.quiet {
        writeln!(err, "warning: optimizer stopped before convergence")?;
    }
    let mut value = serde_json::to_value(&report).map_err(|e| Failure::Run(e.into()))?;
    value["run"] = serde_json::from_str(&provenance_json(cli)?).map_err(|e| Failure::Run(e.into()))?;
    if let Some(path) = json {
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &value).map_err(|e| Failure::Run(e.into()))?;
        f.flush()?;
    }
    let mut w = open_output(cli.common.output.as_deref(), out)?;
    match cli.common.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &value).map_err(|e| Failure::Run(e.into()))?;
            writeln!(w)?;
        }
        Format::Csv => {
            write!(w, "{}", header_lines(cli)?)?;
            report.write_table(&mut w)?;
            writeln!(
                w,
                "sigma0 {:.6}  persistence std. error {}",
                report.sigma0,
                report
                    .persistence_std_error()
                    .map_or("n/a".to_string(), |se| format!("{se:.4}"))
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_simulate(cli: &Cli, out: &mut (dyn Write + Send)) -> Outcome<()> {
    let Command::Simulate {
        preset: name,
        alpha0,
        alpha1,
        beta1,
        gamma1,
        dof,
        length,
        sigma0,
        start_price,
    } = &cli.command
    else {
        unreachable!()
    };
    let params = match (name, alpha0) {
        (_, Some(a0)) => {
            let noise = match dof {
                Some(nu) => NoiseFamily::StandardizedT { dof: *nu },
                None => NoiseFamily::StandardNormal,
            };
            GjrGarchParams::new(
                *a0,
                alpha1.unwrap_or(0.0),
                beta1.unwrap_or(0.0),
                gamma1.unwrap_or(0.0),
                noise,
            )?
        }
        (Some(n), None) => preset(n)?,
        (None, None) => presets::SP500,
    };
    let sigma0 = match sigma0 {
        Some(s) => *s,
        None => params.unconditional_variance()?.sqrt(),
    };
    let (returns, vol) = simulate(&params, *length, sigma0, cli.common.seed)?;
    let mut w = open_output(cli.common.output.as_deref(), out)?;
    write!(w, "{}", header_lines(cli)?)?;
    writeln!(w, "t,close,return,sigma")?;
    let mut price = *start_price;
    writeln!(w, "0,{price},,")?;
    for (t, (r, s)) in returns.values().iter().zip(vol.values()).enumerate() {
        price *= 1.0 + r / 100.0;
        if !(price > 0.0) {
            return Err(Failure::Run(Error::NonFinite { index: t + 1 }));
        }
        writeln!(w, "{},{price},{r},{s}", t + 1)?;
    }
    w.flush()?;
    Ok(())
}

fn model_params(model: &ModelArgs) -> Outcome<Option<GjrGarchParams>> {
    model.preset.as_deref().map(preset).transpose()
}

fn cmd_graph(cli: &Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Outcome<()> {
    let Command::Graph {
        input,
        model,
        series,
        kind,
        ivg_mode,
        start,
        length,
    } = &cli.command
    else {
        unreachable!()
    };
    let prices = load_prices(input)?;
    let values: Vec<f64> = match series {
        SeriesSource::Price => prices.values().to_vec(),
        SeriesSource::Returns => compute_returns(&prices, ReturnScale::Percent).values().to_vec(),
        SeriesSource::Volatility => {
            let params = model_params(model)?;
            let (_, vol, _) = conditional_volatility_series(&prices, params.as_ref(), model.noise, &FitOptions::default())?;
            vol.values().to_vec()
        }
    };
    if *start == 0 {
        return Err(Failure::Usage("--start is 1-based".into()));
    }
    let len = length.unwrap_or(values.len().saturating_sub(start - 1));
    let sub = crate::timeseries::VolatilitySeries::new(values, None, crate::timeseries::VolatilityKind::Historical)
        .map_err(Failure::from)?
        .slice(start - 1, len)?;
    let y = sub.values();
    let g = match kind {
        GraphKindArg::Vg => vg_build(y)?,
        GraphKindArg::Ivg => ivg_build(y, *ivg_mode)?,
    };
    let d = degrees(&g);
    if !cli.common.quiet {
        writeln!(err, "nodes {}  edges {}  mean degree {}", g.node_count(), g.edge_count(), d.mean)?;
    }
    let mut w = open_output(cli.common.output.as_deref(), out)?;
    match cli.common.format {
        Format::Csv => {
            write!(w, "{}", header_lines(cli)?)?;
            g.write_edge_list(&mut w)?;
        }
        Format::Json => {
            let edges: Vec<[usize; 2]> = g.edges().map(|(i, j)| [i + 1, j + 1]).collect();
            let value = serde_json::json!({
                "run": serde_json::from_str::<serde_json::Value>(&provenance_json(cli)?).map_err(|e| Failure::Run(e.into()))?,
                "nodes": g.node_count(),
                "mean_degree": d.mean,
                "degree_histogram": degree_histogram(&d.per_node)?,
                "edges": edges,
            });
            serde_json::to_writer_pretty(&mut w, &value).map_err(|e| Failure::Run(e.into()))?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Prepared {
    returns: crate::timeseries::ReturnSeries,
    vol: Option<crate::timeseries::VolatilitySeries>,
    null: NullModel,
}

fn prepare(prices: &PriceSeries, cfg: &ValidationConfig, model: &ModelArgs) -> Outcome<Prepared> {
    let params = model_params(model)?;
    Ok(match cfg.fit_scope {
        FitScope::Global => {
            let (returns, vol, report) =
                conditional_volatility_series(prices, params.as_ref(), cfg.noise, &FitOptions::default())?;
            let p = params.or(report.map(|r| r.params)).ok_or(Failure::Run(Error::EmptyInput))?;
            Prepared {
                returns,
                vol: Some(vol),
                null: NullModel::Global(p),
            }
        }
        FitScope::PerWindow => Prepared {
            returns: compute_returns(prices, ReturnScale::Percent),
            vol: None,
            null: NullModel::PerWindow(FitOptions::default()),
        },
    })
}

fn runner(quiet: bool) -> Runner {
    if quiet {
        Runner::new()
    } else {
        Runner::new().with_progress(|done, total| eprintln!("window {done}/{total}"))
    }
}

fn write_series(cli: &Cli, s: &IndicatorSeries, w: &mut dyn Write) -> Outcome<()> {
    match cli.common.format {
        Format::Csv => {
            write!(w, "# run={}\n", provenance_json(cli)?)?;
            s.write_csv(&mut *w)?;
        }
        Format::Json => {
            let mut value = serde_json::to_value(s).map_err(|e| Failure::Run(e.into()))?;
            value["run"] = serde_json::from_str(&provenance_json(cli)?).map_err(|e| Failure::Run(e.into()))?;
            serde_json::to_writer_pretty(&mut *w, &value).map_err(|e| Failure::Run(e.into()))?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_events(path: &Path) -> Outcome<Vec<String>> {
    Ok(std::fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn report_flags(s: &IndicatorSeries, err: &mut (dyn Write + Send), quiet: bool) -> Outcome<()> {
    if quiet {
        return Ok(());
    }
    let flagged = s.records.iter().filter(|r| !r.flags.is_empty()).count();
    if flagged > 0 {
        writeln!(err, "{flagged} of {} windows flagged", s.records.len())?;
    }
    Ok(())
}

fn cmd_indicator(cli: &Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Outcome<()> {
    let Command::Indicator {
        input,
        model,
        validation,
        labels,
    } = &cli.command
    else {
        unreachable!()
    };
    let cfg = validation_config(validation, model.noise, cli.common.seed);
    cfg.validate()?;
    let prices = load_prices(input)?;
    let prep = prepare(&prices, &cfg, model)?;
    let mut series = runner(cli.common.quiet)
        .run(prep.vol.as_ref(), &prep.returns, &cfg, &prep.null, &[cfg.rho])?
        .remove(0);
    if let Some(path) = labels {
        series.provenance.events = read_events(path)?;
    }
    report_flags(&series, err, cli.common.quiet)?;
    let mut w = open_output(cli.common.output.as_deref(), out)?;
    write_series(cli, &series, &mut w)
}

/// Name of the sweep output for one grid point.
pub fn sweep_file_name(rho: f64, window: usize, shift: usize, format: Format) -> String {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    format!("indicator_rho{rho}_w{window}_l{shift}.{ext}")
}

fn cmd_sweep(cli: &Cli, err: &mut (dyn Write + Send)) -> Outcome<()> {
    let Command::Sweep {
        input,
        model,
        validation,
        rhos,
        windows,
        shifts,
    } = &cli.command
    else {
        unreachable!()
    };
    if rhos.is_empty() || windows.is_empty() || shifts.is_empty() {
        return Err(Failure::Usage("sweep grids must be nonempty".into()));
    }
    let dir = output_dir(cli)?;
    let base = validation_config(validation, model.noise, cli.common.seed);
    for &rho in rhos {
        ValidationConfig { rho, ..base.clone() }.validate()?;
    }
    for (&window, &shift) in windows.iter().flat_map(|w| shifts.iter().map(move |l| (w, l))) {
        ValidationConfig { window, shift, ..base.clone() }.validate()?;
    }
    let prices = load_prices(input)?;
    let prep = prepare(&prices, &base, model)?;
    let runner = runner(cli.common.quiet);

    let mut summary = String::new();
    summary.push_str(&header_lines(cli)?);
    summary.push_str("window,shift,rho_a,rho_b,rank_correlation\n");
    for &window in windows {
        for &shift in shifts {
            let cfg = ValidationConfig { window, shift, ..base.clone() };
            let all = runner.run(prep.vol.as_ref(), &prep.returns, &cfg, &prep.null, rhos)?;
            for s in &all {
                report_flags(s, err, cli.common.quiet)?;
                let path = dir.join(sweep_file_name(s.provenance.config.rho, window, shift, cli.common.format));
                let mut w = BufWriter::new(File::create(path)?);
                write_series(cli, s, &mut w)?;
            }
            for a in 0..all.len() {
                for b in (a + 1)..all.len() {
                    let na: Vec<f64> = all[a].n_series().iter().map(|&x| x as f64).collect();
                    let nb: Vec<f64> = all[b].n_series().iter().map(|&x| x as f64).collect();
                    let rc = if na.len() < 2 {
                        None
                    } else {
                        rank_correlation(&na, &nb)?
                    };
                    summary.push_str(&format!(
                        "{window},{shift},{},{},{}\n",
                        rhos[a],
                        rhos[b],
                        rc.map(|v| v.to_string()).unwrap_or_default()
                    ));
                }
            }
        }
    }
    std::fs::write(dir.join("summary.csv"), summary)?;
    Ok(())
}

fn cmd_probe(cli: &Cli, err: &mut (dyn Write + Send)) -> Outcome<()> {
    let Command::Probe {
        input,
        model,
        validation,
        null_samples,
        stability_sizes,
        repeats,
    } = &cli.command
    else {
        unreachable!()
    };
    let dir = output_dir(cli)?;
    let cfg = validation_config(validation, model.noise, cli.common.seed);
    cfg.validate()?;
    let prices = load_prices(input)?;
    let params = model_params(model)?;
    let (returns, vol, report) =
        conditional_volatility_series(&prices, params.as_ref(), model.noise, &FitOptions::default())?;
    let params = params.or(report.map(|r| r.params)).ok_or(Failure::Run(Error::EmptyInput))?;
    let sigma0 = quantize_sigma0(historical_volatility(&returns, returns.len())?);
    let header = header_lines(cli)?;
    let quiet = cli.common.quiet;

    // empirical VG of the whole series against pooled null graphs of equal length
    let empirical = degree_histogram(&degrees(&vg_build(vol.values())?).per_node)?;
    let full = EnsembleConfig {
        size: *null_samples,
        length: vol.len(),
        sigma0,
        seed: cfg.seed,
        params,
        ivg_mode: cfg.ivg_mode,
    };
    if !quiet {
        writeln!(err, "sampling {null_samples} null graphs of length {}", vol.len())?;
    }
    let null_hist = null_degree_distribution(&full, *null_samples)?;
    let test = compare_with_null(&empirical, &null_hist)?;
    let mut text = header.clone();
    text.push_str("degree,empirical,null\n");
    let top = empirical.counts().len().max(null_hist.counts().len());
    for d in 0..top {
        let e = empirical.counts().get(d).copied().unwrap_or(0);
        let n = null_hist.counts().get(d).copied().unwrap_or(0);
        if e + n > 0 {
            text.push_str(&format!("{d},{e},{n}\n"));
        }
    }
    std::fs::write(dir.join("degrees.csv"), text)?;

    let window = EnsembleConfig {
        size: cfg.ensemble_size,
        length: cfg.window,
        ..full.clone()
    };
    if !quiet {
        writeln!(err, "building distance profile from {} null graphs", cfg.ensemble_size)?;
    }
    let freq = generate_frequencies(&window)?;
    let mut f = BufWriter::new(File::create(dir.join("profile.csv"))?);
    f.write_all(header.as_bytes())?;
    write_profiles_csv(&distance_profile(&freq, GraphKind::Vg), &distance_profile(&freq, GraphKind::Ivg), &mut f)?;
    f.flush()?;

    let stability = if stability_sizes.is_empty() {
        Vec::new()
    } else {
        if !quiet {
            writeln!(err, "stability over sizes {stability_sizes:?}, {repeats} repeats")?;
        }
        stability_diagnostic(&window, stability_sizes, *repeats)?
    };
    let mut text = header;
    text.push_str("ensemble_size,repeats,mean_distance,coefficient_of_variation\n");
    for r in &stability {
        text.push_str(&format!(
            "{},{},{},{}\n",
            r.ensemble_size, r.repeats, r.mean_distance, r.coefficient_of_variation
        ));
    }
    std::fs::write(dir.join("stability.csv"), text)?;

    let summary = serde_json::json!({
        "run": serde_json::from_str::<serde_json::Value>(&provenance_json(cli)?).map_err(|e| Failure::Run(e.into()))?,
        "params": params,
        "sigma0": sigma0,
        "empirical_mean_degree": empirical.mean(),
        "null_mean_degree": null_hist.mean(),
        "rank_sum": test,
        "stability": stability,
    });
    let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &summary).map_err(|e| Failure::Run(e.into()))?;
    f.flush()?;
    if !quiet {
        writeln!(err, "rank-sum p-value {}", test.p_value)?;
    }
    Ok(())
}
