mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand};
use giantcz::interference::{df_general, df_three_point, df_two_point, DfSolution};
use giantcz::protocol::{
    calibrate_omega2, run_cz, run_dynamics, sweep_g, GateConfig, PhaseConvention, Preset,
};
use giantcz::{build_effective_hamiltonian, CouplingPoint};
use serde::Serialize;

use config::{ConfigError, RunConfig};
use output::{format_float, sink, write_gnuplot, write_json, Csv};

const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "giantcz", version, about = "CZ gates between three-level giant atoms in a coupled-cavity array")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "GIANTCZ_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in parameter presets.
    Presets,
    /// Dark (decoherence-free) frequencies of a coupling geometry.
    Df(DfArgs),
    /// Populations of |11> and |20> after starting in |11>.
    Dynamics(RunArgs),
    /// CZ process fidelity over time and its maximum.
    Fidelity(FidelityArgs),
    /// Lamb-shift calibration of omega2.
    Calibrate(CalibrateArgs),
    /// Best gate fidelity versus coupling strength, with decay.
    Sweep(SweepArgs),
    /// Dump the Hamiltonian of one excitation sector in coordinate format.
    Hamiltonian(HamiltonianArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("layout").required(true).args(["two_point", "three_point", "points"])))]
struct DfArgs {
    /// Two equal-strength points `dx` apart.
    #[arg(long)]
    two_point: bool,
    /// Three points with strengths (1, zeta, 1), `dx` apart.
    #[arg(long)]
    three_point: bool,
    /// Arbitrary points as `site:strength` pairs, e.g. `1:1,4:0.5,9:1`.
    #[arg(long, value_delimiter = ',')]
    points: Vec<String>,
    #[arg(long, default_value_t = 2)]
    dx: usize,
    #[arg(long, default_value_t = 1.0)]
    zeta: f64,
    /// Also list roots at the band edges (k = 0 or pi).
    #[arg(long)]
    include_edges: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "config"])))]
struct Source {
    /// Preset name or alias (see `giantcz presets`).
    #[arg(long)]
    preset: Option<String>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<RunConfig, ConfigError> {
        match (&self.preset, &self.config) {
            (Some(id), None) => Ok(RunConfig::from_preset(id)),
            (None, Some(path)) => RunConfig::from_path(path),
            _ => unreachable!("clap enforces exactly one source"),
        }
    }
}

#[derive(Args)]
struct Emit {
    /// Output file (stdout if omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Emit one JSON document instead of CSV.
    #[arg(long)]
    json: bool,
    /// Also write a gnuplot script plotting the CSV.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    t_max: Option<f64>,
    #[command(flatten)]
    emit: Emit,
}

#[derive(Args)]
struct FidelityArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Local-phase handling before comparing with CZ: `none` or `optimal`.
    #[arg(long)]
    convention: Option<PhaseConvention>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    source: Source,
    /// Search half-width around omega1 + alpha1, at most 0.1.
    #[arg(long, default_value_t = 0.05)]
    halfwidth: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    /// Coupling strengths g/J, increasing.
    #[arg(long, value_delimiter = ',')]
    g_list: Option<Vec<f64>>,
    #[arg(long)]
    gamma_q: Option<f64>,
    #[arg(long)]
    gamma_c: Option<f64>,
    #[command(flatten)]
    emit: Emit,
}

#[derive(Args)]
struct HamiltonianArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 2)]
    sector: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Maps library and config errors onto the documented exit codes.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() || cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<giantcz::Error>() {
            return match e {
                giantcz::Error::Convergence { .. }
                | giantcz::Error::NumericalIntegrity(_)
                | giantcz::Error::Calibration(_) => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            };
        }
    }
    EXIT_CONFIG
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: thread count must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Presets => presets(),
        Command::Df(args) => df(args),
        Command::Dynamics(args) => dynamics(args),
        Command::Fidelity(args) => fidelity(args),
        Command::Calibrate(args) => calibrate(args),
        Command::Sweep(args) => sweep(args),
        Command::Hamiltonian(args) => hamiltonian(args),
    }
}

fn presets() -> anyhow::Result<()> {
    println!("{:<22} {:<6} {:<26} {:>6} {:>8} {:>8}", "name", "alias", "geometry", "g/J", "w1/J", "w2/J");
    for p in Preset::ALL {
        let c = p.config();
        let geometry = match c.geometry {
            giantcz::protocol::Geometry::TwoPoint { dx } => format!("two-point dx={dx}"),
            giantcz::protocol::Geometry::ThreePoint { dx, zeta } => format!("three-point dx={dx} zeta={zeta}"),
        };
        println!(
            "{:<22} {:<6} {:<26} {:>6} {:>8.4} {:>8.4}",
            p.name(),
            p.alias(),
            geometry,
            c.g,
            c.omega1,
            c.omega2
        );
    }
    Ok(())
}

fn parse_points(items: &[String]) -> Result<Vec<CouplingPoint>, ConfigError> {
    items
        .iter()
        .map(|item| {
            let (site, g) = item
                .split_once(':')
                .ok_or_else(|| ConfigError(format!("point `{item}` is not `site:strength`")))?;
            let site: usize = site
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("bad site in `{item}`")))?;
            if site == 0 {
                return Err(ConfigError("sites are 1-based".into()));
            }
            let g: f64 = g
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("bad strength in `{item}`")))?;
            Ok(CouplingPoint::new(site - 1, g))
        })
        .collect()
}

#[derive(Serialize)]
struct DfReport {
    layout: String,
    solutions: Vec<DfSolution>,
}

fn df(args: DfArgs) -> anyhow::Result<()> {
    let (layout, sols) = if args.two_point {
        (format!("two-point dx={}", args.dx), df_two_point(args.dx)?)
    } else if args.three_point {
        (
            format!("three-point dx={} zeta={}", args.dx, args.zeta),
            df_three_point(args.dx, args.zeta)?,
        )
    } else {
        let points = parse_points(&args.points)?;
        (format!("points {}", args.points.join(",")), df_general(&points)?)
    };
    let solutions: Vec<DfSolution> = sols.into_iter().filter(|s| args.include_edges || !s.band_edge).collect();
    let mut w = sink(None)?;
    if args.json {
        write_json(&mut *w, "df", &DfReport { layout, solutions })?;
        return Ok(());
    }
    writeln!(w, "# {layout}")?;
    writeln!(w, "{:>8} {:>14} {:>14} {:>10}", "branch", "k_DF", "omega_DF/J", "band_edge")?;
    for s in &solutions {
        writeln!(
            w,
            "{:>8} {:>14.10} {:>14.10} {:>10}",
            s.branch, s.wavenumber, s.frequency, s.band_edge
        )?;
    }
    w.flush()?;
    Ok(())
}

fn load_config(source: &Source, t_max: Option<f64>) -> anyhow::Result<GateConfig> {
    let mut cfg = source.load()?.gate_config()?;
    if let Some(t) = t_max {
        cfg.t_max = t;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn gnuplot(emit: &Emit, ylabel: &str, columns: &[(usize, &str)]) -> anyhow::Result<()> {
    if let Some(script) = &emit.gnuplot {
        if emit.json {
            bail!(ConfigError("--gnuplot needs CSV output".into()));
        }
        write_gnuplot(script, emit.out.as_deref(), "tJ", ylabel, columns)
            .with_context(|| format!("writing {}", script.display()))?;
    }
    Ok(())
}

fn dynamics(args: RunArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.source, args.t_max)?;
    let trace = run_dynamics(&cfg)?;
    if let Some((t, n)) = trace.first_revival() {
        eprintln!("first n11 revival {n:.4} at tJ = {t:.2}");
    }
    let mut w = sink(args.emit.out.as_deref()).context("opening output")?;
    if args.emit.json {
        #[derive(Serialize)]
        struct Doc<'a> {
            config: &'a GateConfig,
            trace: &'a giantcz::protocol::DynamicsTrace,
        }
        write_json(&mut *w, "dynamics", &Doc { config: &cfg, trace: &trace })?;
    } else {
        let mut csv = Csv::new(&mut *w, &["t_J", "n11", "n20", "norm"])?;
        for i in 0..trace.times.len() {
            csv.row(&[trace.times[i], trace.n11[i], trace.n20[i], trace.norm[i]])?;
        }
        csv.finish()?;
    }
    gnuplot(&args.emit, "population", &[(2, "n11"), (3, "n20")])
}

fn fidelity(args: FidelityArgs) -> anyhow::Result<()> {
    let mut cfg = load_config(&args.run.source, args.run.t_max)?;
    if let Some(c) = args.convention {
        cfg.phase_convention = c;
    }
    let run = run_cz(&cfg)?;
    let r = run.result;
    eprintln!(
        "max process fidelity {:.4} (average {:.4}) at tJ = {:.2}, phases ({:.4}, {:.4})",
        r.process_fidelity, r.average_fidelity, r.gate_time, r.local_phases.0, r.local_phases.1
    );
    let emit = &args.run.emit;
    let mut w = sink(emit.out.as_deref()).context("opening output")?;
    if emit.json {
        #[derive(Serialize)]
        struct Doc<'a> {
            config: &'a GateConfig,
            result: &'a giantcz::GateResult,
            samples: &'a [giantcz::protocol::FidelitySample],
        }
        write_json(
            &mut *w,
            "fidelity",
            &Doc {
                config: &cfg,
                result: &run.result,
                samples: &run.samples,
            },
        )?;
    } else {
        let mut csv = Csv::new(
            &mut *w,
            &["t", "process_fidelity", "average_fidelity", "phi1", "phi2", "trace_deficit"],
        )?;
        for s in &run.samples {
            csv.row(&[s.t, s.process_fidelity, s.average_fidelity, s.phi1, s.phi2, s.trace_deficit])?;
        }
        csv.finish()?;
    }
    gnuplot(emit, "fidelity", &[(2, "process"), (3, "average")])
}

fn calibrate(args: CalibrateArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.source, None)?;
    let cal = calibrate_omega2(&cfg, args.halfwidth)?;
    let mut w = sink(None)?;
    if args.json {
        write_json(&mut *w, "calibrate", &cal)?;
    } else {
        writeln!(w, "omega2_over_J,transfer,transfer_time_J")?;
        writeln!(
            w,
            "{},{},{}",
            format_float(cal.omega2),
            format_float(cal.transfer),
            format_float(cal.transfer_time)
        )?;
        w.flush()?;
    }
    Ok(())
}

const DEFAULT_SWEEP: [f64; 5] = [0.03, 0.05, 0.08, 0.1, 0.175];

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let doc = args.source.load()?;
    let cfg = doc.gate_config()?;
    let g_values = args
        .g_list
        .or(doc.sweep.g_over_J.clone())
        .unwrap_or_else(|| DEFAULT_SWEEP.to_vec());
    let gamma_q = args.gamma_q.or(doc.sweep.gamma_q_over_J).unwrap_or(cfg.gamma_q);
    let gamma_c = args.gamma_c.or(doc.sweep.gamma_c_over_J).unwrap_or(cfg.gamma_c);
    let rows = sweep_g(&cfg, &g_values, gamma_q, gamma_c)?;

    let mut failures = 0;
    for (g, row) in &rows {
        if let Err(e) = row {
            failures += 1;
            eprintln!("g = {g}: {e}");
        }
    }
    let mut w = sink(args.emit.out.as_deref()).context("opening output")?;
    if args.emit.json {
        #[derive(Serialize)]
        #[allow(non_snake_case)]
        struct Row {
            g_over_J: f64,
            #[serde(skip_serializing_if = "Option::is_none")]
            point: Option<giantcz::protocol::SweepPoint>,
            #[serde(skip_serializing_if = "Option::is_none")]
            error: Option<String>,
        }
        #[derive(Serialize)]
        #[allow(non_snake_case)]
        struct Doc {
            gamma_q_over_J: f64,
            gamma_c_over_J: f64,
            rows: Vec<Row>,
        }
        let rows = rows
            .into_iter()
            .map(|(g, r)| match r {
                Ok(p) => Row { g_over_J: g, point: Some(p), error: None },
                Err(e) => Row { g_over_J: g, point: None, error: Some(e.to_string()) },
            })
            .collect();
        write_json(
            &mut *w,
            "sweep",
            &Doc {
                gamma_q_over_J: gamma_q,
                gamma_c_over_J: gamma_c,
                rows,
            },
        )?;
    } else {
        let mut csv = Csv::new(
            &mut *w,
            &[
                "g_over_J",
                "fidelity_process",
                "fidelity_average",
                "tau_J",
                "omega2_calibrated",
                "phi1",
                "phi2",
            ],
        )?;
        for (g, row) in &rows {
            match row {
                Ok(p) => {
                    let r = &p.result;
                    csv.row(&[
                        *g,
                        r.process_fidelity,
                        r.average_fidelity,
                        r.gate_time,
                        p.omega2,
                        r.local_phases.0,
                        r.local_phases.1,
                    ])?;
                }
                Err(_) => csv.row(&[*g, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN])?,
            }
        }
        csv.finish()?;
    }
    if let Some(script) = &args.emit.gnuplot {
        if args.emit.json {
            bail!(ConfigError("--gnuplot needs CSV output".into()));
        }
        write_gnuplot(script, args.emit.out.as_deref(), "g/J", "process fidelity", &[(2, "F_pro")])?;
    }
    if failures > 0 {
        bail!(giantcz::Error::Calibration(format!("{failures} sweep point(s) failed")));
    }
    Ok(())
}

fn hamiltonian(args: HamiltonianArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.source, None)?;
    let spec = cfg.system_spec()?;
    let h = build_effective_hamiltonian(&spec, args.sector)?;
    let w = sink(args.out.as_deref()).context("opening output")?;
    h.write_coordinate(w)?;
    Ok(())
}
