//! Command-line front end. `main.rs` only forwards to [`run_cli`].

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::circuit::measure_sample;
use crate::config::{load_config, resolve_config, Config, Experiment, Overrides, ResolvedConfig, TauSetting};
use crate::error::{Error, Result};
use crate::multislice::{
    field_relative_error, gate_report_with, logrange, run_simulation, truncation_sweep, ClassicalEngine, EngineKind,
    ErrorReport, QuantumEngine, Representation, SimulationPlan, Spectra, Truncation, Vary,
};
use crate::output::{csv_matrix, csv_table, pgm, RunDir, RunManifest};
use crate::synthesis::{build_2d_transform, Direction};

#[derive(Debug, Parser)]
#[command(
    name = "qmultislice",
    version,
    about = "Multislice electron diffraction on classical and quantum-circuit engines"
)]
pub struct Cli {
    /// Run configuration (JSON). Defaults to the bundled gold setup.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed recorded in the manifest and used for sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Directory that receives `<command>-<timestamp>-<seed>/`.
    #[arg(long, global = true, default_value = "runs")]
    pub outdir: PathBuf,
    /// Grid bits per axis (overrides `grid.bits`).
    #[arg(long, global = true)]
    pub bits: Option<u32>,
    /// Unit cells along the beam (overrides `specimen.cells[2]`).
    #[arg(long, global = true)]
    pub cells_z: Option<usize>,
    /// Accelerating voltage in volts (overrides `beam.voltage`).
    #[arg(long, global = true)]
    pub voltage: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate and write the trajectory, cross-section and error report.
    Run(RunArgs),
    /// Sweep one truncation threshold and tabulate error and kept terms.
    Sweep(SweepArgs),
    /// Gate counts with and without truncation.
    Gates(GatesArgs),
    /// Sample the final state.
    Sample(SampleArgs),
    /// Check a configuration and print derived quantities.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Classical,
    QuantumExact,
    QuantumTruncated,
}

impl From<EngineArg> for EngineKind {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Classical => EngineKind::Classical,
            EngineArg::QuantumExact => EngineKind::QuantumExact,
            EngineArg::QuantumTruncated => EngineKind::QuantumTruncated,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value_t = EngineArg::Classical)]
    pub engine: EngineArg,
    /// Potential threshold, a number or `auto`.
    #[arg(long)]
    pub tau_v: Option<TauSetting>,
    /// Kinetic threshold.
    #[arg(long)]
    pub tau_p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VaryArg {
    Potential,
    Kinetic,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Which threshold the sweep varies.
    #[arg(long, value_enum)]
    pub vary: VaryArg,
    /// Comma-separated thresholds, or `logrange(a,b,k)`.
    #[arg(long)]
    pub taus: String,
}

#[derive(Debug, Args)]
pub struct GatesArgs {
    /// Potential threshold, a number or `auto`.
    #[arg(long)]
    pub tau_v: Option<TauSetting>,
    /// Kinetic threshold.
    #[arg(long)]
    pub tau_p: Option<f64>,
    /// Also write every circuit in text form.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RepresentationArg {
    Coord,
    Momentum,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Number of measurements.
    #[arg(long)]
    pub shots: u64,
    /// Basis the final state is measured in.
    #[arg(long, value_enum, default_value_t = RepresentationArg::Momentum)]
    pub representation: RepresentationArg,
    #[arg(long, value_enum, default_value_t = EngineArg::Classical)]
    pub engine: EngineArg,
    /// Potential threshold, a number or `auto`.
    #[arg(long)]
    pub tau_v: Option<TauSetting>,
    /// Kinetic threshold.
    #[arg(long)]
    pub tau_p: Option<f64>,
}

/// Exit status for configuration problems.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failures during computation or output.
pub const EXIT_RUNTIME: i32 = 1;

/// Parses `args` (without the program name) and runs the command, writing
/// human-readable output to `out` and diagnostics to `err`.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(std::iter::once("qmultislice".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return e.exit_code();
        }
    };
    match execute(&cli, args, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParameter { .. } | Error::Json(_) => EXIT_CONFIG,
                _ => EXIT_RUNTIME,
            }
        }
    }
}

fn execute(cli: &Cli, arguments: Vec<String>, out: &mut dyn Write) -> Result<()> {
    let (tau_v, tau_p) = match &cli.command {
        Command::Run(a) => (a.tau_v, a.tau_p),
        Command::Gates(a) => (a.tau_v, a.tau_p),
        Command::Sample(a) => (a.tau_v, a.tau_p),
        _ => (None, None),
    };
    let overrides = Overrides {
        bits: cli.bits,
        cells_z: cli.cells_z,
        voltage: cli.voltage,
        tau_v,
        tau_p,
        seed: cli.seed,
    };
    let resolved = resolve(cli.config.as_deref(), &overrides)?;
    if let Command::Validate = cli.command {
        return validate(&resolved, out);
    }
    let experiment = resolved.experiment()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::param("jobs", e.to_string()))?;
    let started = timestamp();
    let name = match &cli.command {
        Command::Run(_) => "run",
        Command::Sweep(_) => "sweep",
        Command::Gates(_) => "gates",
        Command::Sample(_) => "sample",
        Command::Validate => unreachable!(),
    };
    let run_dir = RunDir::create(&cli.outdir, name, &started, resolved.config.seed)?;
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| match &cli.command {
        Command::Run(a) => cmd_run(&resolved, &experiment, a.engine.into(), &run_dir, &mut buf),
        Command::Sweep(a) => cmd_sweep(&experiment, a, &run_dir, &mut buf),
        Command::Gates(a) => cmd_gates(&experiment, a.dump, &run_dir, &mut buf),
        Command::Sample(a) => cmd_sample(&resolved, &experiment, a, &run_dir, &mut buf),
        Command::Validate => unreachable!(),
    });
    out.write_all(&buf)?;
    result?;
    let mut manifest = RunManifest::new(
        name,
        arguments,
        resolved.config.clone(),
        resolved.inputs.clone(),
        started,
    );
    manifest.finished = timestamp();
    run_dir.write_json("manifest.json", &manifest)?;
    let path = run_dir.publish()?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

fn resolve(config: Option<&Path>, overrides: &Overrides) -> Result<ResolvedConfig> {
    match config {
        Some(path) => load_config(path, overrides),
        None => {
            let mut c = Config::default_au();
            c.apply(overrides);
            resolve_config(c, Path::new("."))
        }
    }
}

fn timestamp() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string()
}

fn validate(resolved: &ResolvedConfig, out: &mut dyn Write) -> Result<()> {
    let e = resolved.experiment()?;
    let pixel = e.grid.pixel();
    writeln!(out, "wavelength        {:.6} A", e.beam.wavelength)?;
    writeln!(out, "wavenumber        {:.6} 1/A", e.beam.wavenumber)?;
    writeln!(out, "mass ratio        {:.6}", e.beam.mass_ratio)?;
    writeln!(out, "sigma             {:.6e} rad/(V A)", e.beam.sigma)?;
    writeln!(out, "slice thickness   {:.6} A", e.specimen.slice_thickness())?;
    writeln!(out, "slices            {}", e.specimen.slice_count())?;
    writeln!(
        out,
        "grid              {0}x{0} ({1} qubits)",
        e.grid.axis_len(),
        e.grid.qubits()
    )?;
    writeln!(out, "pixel size        {:.6} x {:.6} A", pixel[0], pixel[1])?;
    writeln!(out, "tau_v, tau_p      {}, {}", e.truncation.tau_v, e.truncation.tau_p)?;
    writeln!(out, "thickness limit   {:.6} A", e.advisory.limit)?;
    match &e.advisory.warning {
        Some(w) => writeln!(out, "advisory: {w}")?,
        None => writeln!(out, "advisory: none")?,
    }
    Ok(())
}

fn truncation_of(e: &Experiment, engine: EngineKind) -> Truncation {
    match engine {
        EngineKind::QuantumTruncated => e.truncation,
        _ => Truncation::EXACT,
    }
}

fn cmd_run(
    resolved: &ResolvedConfig,
    e: &Experiment,
    engine: EngineKind,
    dir: &RunDir,
    out: &mut dyn Write,
) -> Result<()> {
    let setup = e.setup()?;
    let plan = e.plan(engine, &resolved.config);
    let traj = run_simulation(&setup, &plan)?;
    let n = setup.grid.axis_len();
    let final_probability = traj.final_probability();
    dir.write("final_probability.csv", csv_matrix(n, final_probability.values())?)?;
    let cross = traj.cross_section_values();
    dir.write("cross_section.csv", csv_matrix(n, &cross)?)?;
    dir.write("cross_section.pgm", pgm(n, traj.cross_section.len(), &cross)?)?;
    if plan.record_slices {
        dir.subdir("slices")?;
        for (t, grid) in traj.slice_grids.iter().enumerate() {
            dir.write(&format!("slices/slice_{t:05}.csv"), csv_matrix(n, grid.values())?)?;
        }
    }

    let (epsilon, reference) = if engine == EngineKind::Classical {
        (0.0, "classical")
    } else {
        let classical = run_simulation(
            &setup,
            &SimulationPlan {
                engine: EngineKind::Classical,
                ..plan
            },
        )?;
        (
            field_relative_error(&final_probability, &classical.final_probability())?,
            "classical",
        )
    };
    let gates = if engine == EngineKind::Classical {
        None
    } else {
        Some(gate_report_with(&setup, &truncation_of(e, engine))?)
    };
    let truncation = truncation_of(e, engine);
    let report = ErrorReport {
        engine: format!("{engine:?}"),
        reference: reference.into(),
        epsilon,
        tau_v: truncation.tau_v,
        tau_p: truncation.tau_p,
        s_v: traj.s_v,
        s_v_total: traj.s_v_total,
        s_p: traj.s_p,
        norm_drift: traj.norm_drift,
        census_untruncated: gates.map(|g| g.untruncated),
        census_truncated: gates.map(|g| g.truncated),
    };
    dir.write_json("report.json", &report)?;
    writeln!(out, "engine            {engine:?}")?;
    writeln!(out, "slices            {}", setup.stack.slice_count())?;
    writeln!(out, "cross-section row {}", traj.cross_section_row)?;
    writeln!(out, "norm drift        {:.3e}", traj.norm_drift)?;
    writeln!(out, "epsilon vs {reference} {epsilon:.6e}")?;
    if let (Some(sv), Some(sp)) = (traj.s_v, traj.s_p) {
        writeln!(out, "s_v, s_p          {sv}, {sp}")?;
    }
    Ok(())
}

/// Parses a comma-separated mix of numbers and `logrange(a,b,k)` terms.
pub fn parse_taus(spec: &str) -> Result<Vec<f64>> {
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in spec.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                items.push(&spec[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(&spec[start..]);

    let number = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|_| Error::param("taus", format!("`{}` is not a number", p.trim())))
    };
    let mut taus = Vec::new();
    for item in items.iter().map(|s| s.trim()) {
        if let Some(inner) = item.strip_prefix("logrange(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::param("taus", "logrange takes (start, stop, count)"));
            }
            let count = parts[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::param("taus", format!("`{}` is not a count", parts[2].trim())))?;
            taus.extend(logrange(number(parts[0])?, number(parts[1])?, count)?);
        } else {
            taus.push(number(item)?);
        }
    }
    Ok(taus)
}

fn cmd_sweep(e: &Experiment, a: &SweepArgs, dir: &RunDir, out: &mut dyn Write) -> Result<()> {
    let taus = parse_taus(&a.taus)?;
    let vary = match a.vary {
        VaryArg::Potential => Vary::Potential,
        VaryArg::Kinetic => Vary::Kinetic,
    };
    let setup = e.setup()?;
    let rows = truncation_sweep(&setup, &taus, vary)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.tau.to_string(),
                r.epsilon.to_string(),
                r.s.to_string(),
                r.one_qubit_gates.to_string(),
                r.two_qubit_gates.to_string(),
            ]
        })
        .collect();
    let header = ["tau", "epsilon", "s", "one_qubit_gates", "two_qubit_gates"];
    dir.write("sweep.csv", csv_table(&header, &table))?;
    writeln!(
        out,
        "{:>12} {:>14} {:>6} {:>10} {:>10}",
        "tau", "epsilon", "s", "1q", "2q"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{:>12.4e} {:>14.6e} {:>6} {:>10} {:>10}",
            r.tau, r.epsilon, r.s, r.one_qubit_gates, r.two_qubit_gates
        )?;
    }
    Ok(())
}

fn cmd_gates(e: &Experiment, dump: bool, dir: &RunDir, out: &mut dyn Write) -> Result<()> {
    let setup = e.setup()?;
    let report = gate_report_with(&setup, &e.truncation)?;
    dir.write_json("gates.json", &report)?;
    let rows: Vec<Vec<String>> = [("untruncated", &report.untruncated), ("truncated", &report.truncated)]
        .iter()
        .map(|(label, c)| {
            vec![
                label.to_string(),
                c.one_qubit.to_string(),
                c.two_qubit.to_string(),
                c.total.to_string(),
                c.hadamard.to_string(),
                c.parity_phase.to_string(),
                c.controlled_phase.to_string(),
                c.cnot.to_string(),
                c.swap.to_string(),
            ]
        })
        .collect();
    let header = [
        "circuit",
        "one_qubit",
        "two_qubit",
        "total",
        "h",
        "parity_phase",
        "cp",
        "cnot",
        "swap",
    ];
    dir.write("gates.csv", csv_table(&header, &rows))?;
    writeln!(out, "tau_v, tau_p      {}, {}", report.tau_v, report.tau_p)?;
    writeln!(out, "untruncated       {}", report.untruncated.total)?;
    writeln!(out, "truncated         {}", report.truncated.total)?;
    writeln!(out, "ratio             {:.3}", report.ratio)?;

    if dump {
        let spectra = Spectra::compute(&setup.stack)?;
        for (label, truncation) in [("exact", Truncation::EXACT), ("truncated", e.truncation)] {
            let engine = QuantumEngine::from_spectra(&spectra, &truncation)?;
            dir.subdir(&format!("circuits/{label}"))?;
            for (i, v) in engine.potentials().iter().enumerate() {
                dir.write(&format!("circuits/{label}/potential_{i:02}.txt"), v.circuit.to_text())?;
            }
            dir.write(
                &format!("circuits/{label}/kinetic.txt"),
                engine.kinetic().circuit.to_text(),
            )?;
            dir.write(&format!("circuits/{label}/forward.txt"), engine.forward().to_text())?;
            dir.write(&format!("circuits/{label}/inverse.txt"), engine.inverse().to_text())?;
            dir.write(
                &format!("circuits/{label}/preparation.txt"),
                engine.preparation().to_text(),
            )?;
        }
    }
    Ok(())
}

fn cmd_sample(
    resolved: &ResolvedConfig,
    e: &Experiment,
    a: &SampleArgs,
    dir: &RunDir,
    out: &mut dyn Write,
) -> Result<()> {
    let setup = e.setup()?;
    let engine: EngineKind = a.engine.into();
    let traj = run_simulation(&setup, &e.plan(engine, &resolved.config))?;
    let mut wave = traj.final_wave;
    let representation = match a.representation {
        RepresentationArg::Coord => Representation::Coordinate,
        RepresentationArg::Momentum => Representation::Momentum,
    };
    let n = wave.size();
    let state = if representation == Representation::Momentum {
        if engine == EngineKind::Classical {
            ClassicalEngine::new(n).to_momentum(&mut wave)?;
            wave.to_state()?
        } else {
            let mut state = wave.to_state()?;
            build_2d_transform(setup.grid.bits() as usize, Direction::Forward)?.apply_to(&mut state)?;
            state
        }
    } else {
        wave.to_state()?
    };
    let hist = measure_sample(&state, a.shots, resolved.config.seed)?;
    let rows: Vec<Vec<String>> = hist
        .counts
        .iter()
        .enumerate()
        .map(|(r, c)| vec![r.to_string(), (r % n).to_string(), (r / n).to_string(), c.to_string()])
        .collect();
    dir.write("histogram.csv", csv_table(&["index", "x", "y", "count"], &rows))?;
    let mut top: Vec<(usize, u64)> = hist.counts.iter().copied().enumerate().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    writeln!(out, "shots {} ({representation:?}), most frequent pixels:", hist.shots)?;
    for (r, c) in top.iter().take(8) {
        writeln!(out, "  ({:>3}, {:>3})  {c}", r % n, r / n)?;
    }
    Ok(())
}
