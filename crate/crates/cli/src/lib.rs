//! `rzchart` command line: design, tarl, tables, monitor, simulate, serve.
//!
//! Exit codes: 0 success, 1 invalid input (flags, files, samples),
//! 2 domain or numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rzchart::design::{design_chart, sampling_frequency, ChartConfig, DesignRequest, RunPlan, Side};
use rzchart::monitor::{chart_status, create_chart, replay, ChartState};
use rzchart::run_length::{error_probabilities, tarl1, ShiftScenario};
use rzchart::samples::parse_samples;
use rzchart::simulation::{estimate_tarl, SimulationSpec, DEFAULT_REPLICATIONS};
use rzchart::tables::{gen_limits_table, gen_tarl_table, render, Format, GridSpec};
use rzchart::Error;

#[derive(Debug, Parser)]
#[command(name = "rzchart", version, about = "One-sided Shewhart charts for the ratio of two correlated normals over a short run")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve α₀ for the TARL₀ target and print the control limit.
    Design(DesignArgs),
    /// TARL₁ of a designed chart over a grid of shifts.
    Tarl(TarlArgs),
    /// Regenerate the limit or TARL₁ tables.
    Tables(TablesArgs),
    /// Replay a sample CSV against a chart.
    Monitor(MonitorArgs),
    /// Monte-Carlo check of the analytic TARL₁.
    Simulate(SimulateArgs),
    /// Run the local HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Lower,
    Upper,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Lower => Side::Lower,
            SideArg::Upper => Side::Upper,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ChartArgs {
    #[arg(long, value_enum)]
    pub side: SideArg,
    /// Sample size per inspection.
    #[arg(long)]
    pub n: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_x: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_y: f64,
    /// In-control ratio.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub z0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub rho0: f64,
    /// Number of inspections in the run.
    #[arg(long = "I", visible_alias = "inspections")]
    pub horizon: u32,
    /// TARL₀ target; defaults to I.
    #[arg(long, allow_negative_numbers = true)]
    pub tarl0_target: Option<f64>,
}

impl ChartArgs {
    fn request(&self) -> DesignRequest {
        DesignRequest {
            side: self.side.into(),
            n: self.n,
            gamma_x: self.gamma_x,
            gamma_y: self.gamma_y,
            z0: self.z0,
            rho0: self.rho0,
            horizon_inspections: self.horizon,
            tarl0_target: self.tarl0_target,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    /// Production run length in hours; adds the inspection interval H/(I+1).
    #[arg(long)]
    pub horizon_hours: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TarlArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    /// Comma-separated shift multipliers τ.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub taus: Vec<f64>,
    /// Out-of-control correlation; defaults to rho0.
    #[arg(long, allow_negative_numbers = true)]
    pub rho1: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// (LCL, UCL) per grid cell.
    Limits,
    /// TARL₁ with ρ1 = ρ0.
    Tarl,
    /// TARL₁ with the correlation also shifting, τ = 1 included.
    TarlShift,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    /// Comma-separated horizons; defaults to 10,30,50.
    #[arg(long = "I", value_delimiter = ',')]
    pub horizons: Vec<u32>,
    /// Optional JSON grid overriding the defaults.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonitorArgs {
    /// Chart JSON: a designed chart or a design request.
    #[arg(long)]
    pub chart: PathBuf,
    /// Sample CSV with header `inspection,label,x,y`.
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Also write the resulting run state as JSON.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
    /// Defaults to rho0.
    #[arg(long, allow_negative_numbers = true)]
    pub rho1: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    pub replications: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated μY per inspection (length I).
    #[arg(long, value_delimiter = ',')]
    pub mu_y_schedule: Vec<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8642)]
    pub port: u16,
    /// Directory holding one JSON file per chart run.
    #[arg(long, default_value = "rzchart-data")]
    pub data_dir: PathBuf,
    /// Static assets of the browser UI, served at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Domain(_)) { 2 } else { 1 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

/// Parses `argv` and runs the command, writing results to `stdout` and a
/// one-line diagnostic to `stderr` on failure. Returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if help {
                let _ = stdout.write_all(text.as_bytes());
                return 0;
            }
            let _ = stderr.write_all(text.as_bytes());
            return 1;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn json_line<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| invalid(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn execute(command: Command, stdout: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Design(a) => design(a, stdout),
        Command::Tarl(a) => tarl(a, stdout),
        Command::Tables(a) => tables(a, stdout),
        Command::Monitor(a) => monitor(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Serve(a) => serve(a),
    }
}

fn limit_text(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        "inf".into()
    }
}

fn design(a: DesignArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = design_chart(&a.chart.request())?;
    let interval = a
        .horizon_hours
        .map(|h| {
            sampling_frequency(&RunPlan {
                horizon_hours: h,
                inspections: cfg.horizon_inspections,
                lot_size: 0,
            })
        })
        .transpose()?;
    let bytes = match a.format {
        OutputFormat::Json => json_line(&cfg)?,
        OutputFormat::Text | OutputFormat::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "side          {}", cfg.side);
            let _ = writeln!(s, "n             {}", cfg.n);
            let _ = writeln!(s, "I             {}", cfg.horizon_inspections);
            let _ = writeln!(s, "gamma_x       {}", cfg.gamma_x);
            let _ = writeln!(s, "gamma_y       {}", cfg.gamma_y);
            let _ = writeln!(s, "z0            {}", cfg.z0);
            let _ = writeln!(s, "rho0          {}", cfg.rho0);
            let _ = writeln!(s, "tarl0_target  {}", cfg.tarl0_target);
            let _ = writeln!(s, "alpha0        {:.10}", cfg.alpha0);
            let _ = writeln!(s, "lcl           {}", limit_text(cfg.lcl));
            let _ = writeln!(s, "ucl           {}", limit_text(cfg.ucl));
            if let Some(h) = interval {
                let _ = writeln!(s, "interval_h    {h:.4}");
            }
            s.into_bytes()
        }
    };
    emit(&a.out, stdout, &bytes)
}

#[derive(serde::Serialize)]
struct TarlLine {
    tau: f64,
    rho1: f64,
    alpha: f64,
    beta: f64,
    tarl1: f64,
}

fn tarl(a: TarlArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = design_chart(&a.chart.request())?;
    let rho1 = a.rho1.unwrap_or(cfg.rho0);
    let mut taus = a.taus.clone();
    if taus.is_empty() {
        return Err(invalid("--taus needs at least one value"));
    }
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let lines = taus
        .into_iter()
        .map(|tau| {
            let sc = ShiftScenario::new(tau, rho1)?;
            let probs = error_probabilities(&cfg, &sc)?;
            Ok(TarlLine {
                tau,
                rho1,
                alpha: probs.alpha,
                beta: probs.beta,
                tarl1: tarl1(&cfg, &sc)?,
            })
        })
        .collect::<rzchart::Result<Vec<_>>>()?;
    let bytes = match a.format {
        OutputFormat::Json => json_line(&lines)?,
        OutputFormat::Csv | OutputFormat::Text => {
            let mut s = String::from("tau,rho1,alpha,beta,tarl1\n");
            for l in &lines {
                let _ = writeln!(s, "{},{},{:.6e},{:.6},{:.4}", l.tau, l.rho1, l.alpha, l.beta, l.tarl1);
            }
            s.into_bytes()
        }
    };
    emit(&a.out, stdout, &bytes)
}

fn tables(a: TablesArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut grid = match &a.grid {
        Some(path) => {
            let text = fs::read(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            serde_json::from_slice(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        }
        None if a.which == Which::TarlShift => GridSpec::correlation_shift(),
        None => GridSpec::default(),
    };
    if !a.horizons.is_empty() {
        grid.horizons = a.horizons.clone();
    }
    let mut bytes = Vec::new();
    match a.format {
        OutputFormat::Json => {
            bytes = if a.which == Which::Limits {
                json_line(&gen_limits_table(&grid)?)?
            } else {
                json_line(&gen_tarl_table(&grid)?)?
            };
        }
        OutputFormat::Csv | OutputFormat::Text => {
            let format = if a.format == OutputFormat::Csv {
                Format::Csv
            } else {
                Format::AlignedText
            };
            if a.which == Which::Limits {
                render(&gen_limits_table(&grid)?, format, &mut bytes)?;
            } else {
                render(&gen_tarl_table(&grid)?, format, &mut bytes)?;
            }
        }
    }
    emit(&a.out, stdout, &bytes)
}

/// Accepts either a designed chart or a design request.
fn load_chart(path: &PathBuf) -> CliResult<ChartConfig> {
    let text = fs::read(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if let Ok(cfg) = serde_json::from_slice::<ChartConfig>(&text) {
        cfg.validate()?;
        return Ok(cfg);
    }
    let req: DesignRequest = serde_json::from_slice(&text)
        .map_err(|e| invalid(format!("{}: neither a chart nor a design request: {e}", path.display())))?;
    Ok(design_chart(&req)?)
}

fn monitor(a: MonitorArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = load_chart(&a.chart)?;
    let file = File::open(&a.samples).map_err(|e| invalid(format!("{}: {e}", a.samples.display())))?;
    let inputs = parse_samples(file)?;
    let mut state: ChartState = create_chart(cfg)?;
    let records = replay(&mut state, &inputs)?;
    let summary = chart_status(&state);
    if let Some(path) = &a.state {
        fs::write(path, json_line(&state)?)?;
    }
    let bytes = match a.format {
        OutputFormat::Json => json_line(&serde_json::json!({
            "cfg": state.cfg,
            "records": records,
            "status": summary.status,
            "signals": summary.signals,
            "remaining": summary.remaining,
        }))?,
        OutputFormat::Text | OutputFormat::Csv => {
            let limit = state.cfg.active_limit();
            let mut s = String::new();
            let _ = writeln!(s, "# {} chart, limit {limit:.5}", state.cfg.side);
            let _ = writeln!(s, "inspection,label,x_bar,y_bar,z_hat,signal");
            for r in &records {
                let _ = writeln!(
                    s,
                    "{},{},{:.3},{:.3},{:.3},{}",
                    r.index,
                    r.label.as_deref().unwrap_or(""),
                    r.x_bar,
                    r.y_bar,
                    r.z_hat,
                    if r.signal { "yes" } else { "no" }
                );
            }
            let list: Vec<String> = summary.signals.iter().map(u32::to_string).collect();
            let _ = writeln!(s, "# signals: {}", if list.is_empty() { "none".into() } else { list.join(",") });
            let _ = writeln!(s, "# status: {:?}, remaining: {}", summary.status, summary.remaining);
            s.into_bytes()
        }
    };
    emit(&a.out, stdout, &bytes)
}

fn simulate(a: SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = design_chart(&a.chart.request())?;
    let scenario = ShiftScenario::new(a.tau, a.rho1.unwrap_or(cfg.rho0))?;
    let analytic = tarl1(&cfg, &scenario)?;
    let mut spec = SimulationSpec::new(cfg, scenario, a.replications, a.seed);
    if !a.mu_y_schedule.is_empty() {
        spec.mu_y_schedule = Some(a.mu_y_schedule.clone());
    }
    let est = estimate_tarl(&spec)?;
    let z = if est.standard_error > 0.0 {
        (est.mean - analytic).abs() / est.standard_error
    } else if est.mean == analytic {
        0.0
    } else {
        f64::INFINITY
    };
    let pass = z <= 3.0;
    let bytes = match a.format {
        OutputFormat::Json => json_line(&serde_json::json!({
            "analytic": analytic,
            "estimate": est,
            "z": if z.is_finite() { Some(z) } else { None },
            "pass": pass,
        }))?,
        OutputFormat::Text | OutputFormat::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "analytic_tarl1   {analytic:.6}");
            let _ = writeln!(s, "empirical_mean   {:.6}", est.mean);
            let _ = writeln!(s, "standard_error   {:.6}", est.standard_error);
            let _ = writeln!(s, "replications     {}", est.replications);
            let _ = writeln!(s, "seed             {}", a.seed);
            let _ = writeln!(s, "signal_fraction  {:.6}", est.signal_fraction);
            let _ = writeln!(s, "degenerate       {}", est.degenerate_signals);
            let _ = writeln!(s, "deviation_se     {z:.3}");
            let _ = writeln!(s, "{} (|empirical - analytic| <= 3 SE)", if pass { "PASS" } else { "FAIL" });
            s.into_bytes()
        }
    };
    emit(&a.out, stdout, &bytes)
}

fn serve(a: ServeArgs) -> CliResult<()> {
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| invalid(format!("bad address {}:{}: {e}", a.host, a.port)))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(rzchart_server::serve(addr, a.data_dir, a.ui_dir))?;
    Ok(())
}
