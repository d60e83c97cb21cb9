use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kdee::io::{self, Format, Meta};
use kdee::{Error, Result};
use kdee_core::density::estimate_kde;
use kdee_core::detector::{detect, Representation, Sidedness, WindowConfig, ZScoreMode, MIN_STREAMING_HISTORY};
use kdee_core::evaluation::{
    db_grid, f1_overlap, sweep_delta_ke, sweep_detection, DeltaKeSweepConfig, DetectionSweepConfig, OverlapBasis,
    SweepResult, DEFAULT_MIN_OVERLAP,
};
use kdee_core::kdee::{kdee_profile, DEFAULT_TAU_MAX};
use kdee_core::simulators::background::{background_record, make_injection_record, noisy_signal};
use kdee_core::simulators::{
    abs_sine_insert, lorenz_x, random_abs_sine_insert, sine_record, InterferenceLayout, LorenzConfig, ModulationFormat,
    RfSimConfig, SineConfig,
};
use kdee_core::{takens_embed, DensityGrid, LabeledInterval, LabeledRecord};
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "kdee",
    version,
    about = "Delay-embedding KDE entropy and sliding-baseline change detection"
)]
struct Cli {
    /// Cap on worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format; defaults to the output file's extension, else CSV.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Modulated-signal records: injection over interference and noise.
    SimulateRf(SimRfArgs),
    /// The x coordinate of the Lorenz system.
    SimulateLorenz(SimLorenzArgs),
    /// A noisy sinusoid, optionally with a rectified |sin| segment.
    SimulateSine(SimSineArgs),
    /// Entropy profile KE_tau for tau = 1..tau_max and its range.
    Kdee(KdeeArgs),
    /// Sliding-baseline change detection on one record.
    Detect(DetectArgs),
    /// Simulation sweeps: delta-KE against SNR, or detection F1.
    Sweep(SweepArgs),
    /// Window-level F1 of saved detections against a truth record.
    Score(ScoreArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RfMode {
    /// Interference + noise with a labeled modulated injection.
    Injection,
    /// Interference + noise only.
    Background,
    /// Modulated signal + noise over the whole record.
    Signal,
}

#[derive(Args, Debug)]
struct SimRfArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "injection")]
    mode: RfMode,
    #[arg(long, default_value = "QPSK")]
    modulation: ModulationFormat,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    sir: f64,
    #[arg(long, default_value_t = 100)]
    symbols: usize,
    #[arg(long, default_value_t = 5000.0)]
    sample_rate: f64,
    #[arg(long, default_value_t = 50)]
    samples_per_symbol: usize,
    #[arg(long, default_value_t = 100.0)]
    carrier: f64,
    #[arg(long, default_value_t = 0.25)]
    rolloff: f64,
}

#[derive(Args, Debug)]
struct SimLorenzArgs {
    /// Recorded in the metadata; the integration itself is deterministic.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 166.18)]
    rho: f64,
    #[arg(long, default_value_t = 150.0)]
    sample_rate: f64,
    #[arg(long, default_value_t = 1000.0)]
    duration: f64,
    #[arg(long, default_value_t = 93.0)]
    discard: f64,
}

#[derive(Args, Debug)]
struct SimSineArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4096)]
    len: usize,
    #[arg(long, default_value_t = 128.0)]
    sample_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    freq: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Rectified segment length; defaults to one period.
    #[arg(long)]
    insert_len: Option<usize>,
    /// Rectified segment start; defaults to a seeded draw from the second half.
    #[arg(long)]
    insert_start: Option<usize>,
    /// Plain sinusoid without a rectified segment.
    #[arg(long, conflicts_with_all = ["insert_len", "insert_start"])]
    no_insert: bool,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Record file (.json, else CSV).
    #[arg(long = "in")]
    input: PathBuf,
    /// Sample rate in Hz; overrides the file's own.
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args, Debug)]
struct KdeeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_TAU_MAX)]
    tau_max: usize,
    /// Keep every k-th sample before the analysis.
    #[arg(long, default_value_t = 1)]
    decimate: usize,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the density grid at --dump-tau as a CSV matrix (rows are y cells).
    #[arg(long)]
    dump_grid: Option<PathBuf>,
    #[arg(long, default_value_t = 1, requires = "dump_grid")]
    dump_tau: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Upper,
    Both,
}

#[derive(Args, Debug)]
struct WindowArgs {
    #[arg(long, default_value_t = 256)]
    window: usize,
    #[arg(long, default_value_t = 128)]
    stride: usize,
    #[arg(long, default_value_t = 10)]
    baseline_count: usize,
    #[arg(long, default_value_t = 3.5)]
    threshold: f64,
    /// Embedding delay of the KDE representation.
    #[arg(long, default_value_t = kdee_core::detector::DEFAULT_DETECTOR_TAU)]
    tau: usize,
    /// Delay bound of the delta-KE sweep (default --tau in detectors, 50 in
    /// the delta-ke experiment).
    #[arg(long)]
    tau_max: Option<usize>,
    #[arg(long, default_value_t = kdee_core::density::DEFAULT_GRID_CELLS)]
    grid_cells: usize,
    /// Score against the trailing HISTORY statistics instead of the whole record.
    #[arg(long, num_args = 0..=1, default_missing_value = "50", value_name = "HISTORY")]
    streaming: Option<usize>,
    /// Flag z > threshold (upper) or |z| > threshold (both); defaults per representation.
    #[arg(long, value_enum)]
    sidedness: Option<SideArg>,
}

impl WindowArgs {
    fn config(&self, representation: Representation) -> WindowConfig {
        WindowConfig {
            window_len: self.window,
            stride: self.stride,
            baseline_count: self.baseline_count,
            z_threshold: self.threshold,
            representation,
            tau: self.tau,
            tau_max: self.tau_max.unwrap_or(self.tau),
            grid_cells: self.grid_cells,
            z_mode: match self.streaming {
                Some(history) => ZScoreMode::Streaming { history },
                None => ZScoreMode::Batch,
            },
            sidedness: self.sidedness.map(|s| match s {
                SideArg::Upper => Sidedness::Upper,
                SideArg::Both => Sidedness::Both,
            }),
            ..WindowConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "kde")]
    representation: Representation,
    #[command(flatten)]
    window: WindowArgs,
    /// Per-window table (CSV) or full report (JSON); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Detections JSON with the flagged windows and merged intervals.
    #[arg(long)]
    intervals: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Experiment {
    DeltaKe,
    Detection,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BasisArg {
    Window,
    Truth,
}

impl From<BasisArg> for OverlapBasis {
    fn from(b: BasisArg) -> OverlapBasis {
        match b {
            BasisArg::Window => OverlapBasis::Window,
            BasisArg::Truth => OverlapBasis::Truth,
        }
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Comma-separated modulation formats; all 14 if absent.
    #[arg(long, value_delimiter = ',')]
    formats: Vec<ModulationFormat>,
    /// dB grid as START:STOP:STEP (default -10:11:3 for delta-ke, -10:10:2 for detection).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Decimation factors of the delta-ke sweep.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    decimate: Vec<usize>,
    /// Record length of the delta-ke sweep.
    #[arg(long, default_value_t = 3000)]
    length: usize,
    /// Detectors of the detection sweep.
    #[arg(long, value_delimiter = ',', default_value = "kde,psd,delta-ke")]
    methods: Vec<Representation>,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value_t = DEFAULT_MIN_OVERLAP)]
    min_overlap: f64,
    #[arg(long, value_enum, default_value = "window")]
    basis: BasisArg,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// Detections JSON written by `detect --intervals`.
    #[arg(long)]
    detections: PathBuf,
    /// Record carrying the ground-truth intervals.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MIN_OVERLAP)]
    min_overlap: f64,
    #[arg(long, value_enum, default_value = "window")]
    basis: BasisArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_runtime() { 2 } else { 1 })
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    kdee_core::Error::Parameter(msg.into()).into()
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(e.to_string()))?;
    }
    let format = cli.format.map(Format::from);
    match cli.command {
        Command::SimulateRf(a) => simulate_rf(a, format),
        Command::SimulateLorenz(a) => simulate_lorenz(a, format),
        Command::SimulateSine(a) => simulate_sine(a, format),
        Command::Kdee(a) => kdee(a, format),
        Command::Detect(a) => detect_cmd(a, format),
        Command::Sweep(a) => sweep(a, format),
        Command::Score(a) => score(a, format),
    }
}

fn out_format(format: Option<Format>, out: Option<&Path>) -> Format {
    format.unwrap_or_else(|| out.map(Format::from_path).unwrap_or_default())
}

fn meta_of(value: Value) -> Meta {
    match value {
        Value::Object(m) => m,
        _ => Meta::new(),
    }
}

/// Writes `fill` to `out` atomically (with a config sidecar for CSV), or to
/// stdout.
fn emit<F>(out: Option<&Path>, format: Format, config: &Value, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match out {
        Some(path) => {
            io::write_atomic(path, fill)?;
            if format == Format::Csv {
                io::write_json(&io::sidecar_path(path), &json!({ "config": config }))?;
            }
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock).map_err(|source| Error::Write {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn write_json_value(w: &mut dyn Write, v: &Value) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    w.write_all(b"\n")
}

fn simulate_rf(a: SimRfArgs, format: Option<Format>) -> Result<()> {
    let cfg = RfSimConfig {
        fs_hz: a.sample_rate,
        symbols: a.symbols,
        samples_per_symbol: a.samples_per_symbol,
        carrier_hz: a.carrier,
        rolloff: a.rolloff,
        snr_db: a.snr,
        sir_db: a.sir,
        ..RfSimConfig::default()
    };
    cfg.validate()?;
    let layout = InterferenceLayout::default();
    layout.validate()?;
    let record = match a.mode {
        RfMode::Injection => make_injection_record(a.modulation, &layout, &cfg, a.seed)?,
        RfMode::Background => LabeledRecord::unlabeled(background_record(&layout, &cfg, a.seed)?),
        RfMode::Signal => LabeledRecord::unlabeled(noisy_signal(a.modulation, &cfg, a.seed)?),
    };
    let meta = meta_of(json!({
        "command": "simulate-rf",
        "seed": a.seed,
        "mode": format!("{:?}", a.mode).to_lowercase(),
        "modulation": a.modulation,
        "rf": cfg,
        "interference": layout,
    }));
    io::write_record(&record, &meta, &a.out, out_format(format, Some(&a.out)))
}

fn simulate_lorenz(a: SimLorenzArgs, format: Option<Format>) -> Result<()> {
    let cfg = LorenzConfig {
        rho: a.rho,
        rate_hz: a.sample_rate,
        duration_s: a.duration,
        discard_s: a.discard,
        ..LorenzConfig::default()
    };
    cfg.validate()?;
    let series = lorenz_x(&cfg)?;
    let meta = meta_of(json!({ "command": "simulate-lorenz", "seed": a.seed, "lorenz": cfg }));
    io::write_record(
        &LabeledRecord::unlabeled(series),
        &meta,
        &a.out,
        out_format(format, Some(&a.out)),
    )
}

fn simulate_sine(a: SimSineArgs, format: Option<Format>) -> Result<()> {
    let cfg = SineConfig {
        freq_hz: a.freq,
        amplitude: a.amplitude,
        noise_sigma: a.noise,
        len: a.len,
        sample_rate_hz: a.sample_rate,
    };
    let insert_len = a
        .insert_len
        .unwrap_or_else(|| cfg.period_samples().round().max(1.0) as usize);
    let record = match (a.no_insert, a.insert_start) {
        (true, _) => LabeledRecord::unlabeled(sine_record(&cfg, a.seed)?),
        (false, Some(start)) => abs_sine_insert(&cfg, a.seed, start, insert_len)?,
        (false, None) => random_abs_sine_insert(&cfg, a.seed, insert_len)?,
    };
    let meta = meta_of(json!({
        "command": "simulate-sine",
        "seed": a.seed,
        "sine": cfg,
        "insert": if a.no_insert { Value::Null } else { json!(record.truth()) },
    }));
    io::write_record(&record, &meta, &a.out, out_format(format, Some(&a.out)))
}

fn read_input(input: &InputArgs) -> Result<io::Document> {
    if let Some(r) = input.rate {
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid("--rate must be positive"));
        }
    }
    io::read_record(&input.input, Format::from_path(&input.input), input.rate)
}

fn kdee(a: KdeeArgs, format: Option<Format>) -> Result<()> {
    if a.tau_max == 0 || a.decimate == 0 {
        return Err(invalid("--tau-max and --decimate must be positive"));
    }
    if a.dump_grid.is_some() && !(1..=a.tau_max).contains(&a.dump_tau) {
        return Err(invalid("--dump-tau must lie in 1..=tau-max"));
    }
    let doc = read_input(&a.input)?;
    let series = doc.record.series().decimate(a.decimate)?;
    let profile = kdee_profile(&series, a.tau_max)?;
    if let Some(path) = &a.dump_grid {
        let grid = estimate_kde(&takens_embed(&series, a.dump_tau, a.tau_max)?, None)?;
        dump_grid(path, &grid, a.dump_tau)?;
    }
    let format = out_format(format, a.out.as_deref());
    let config = json!({
        "command": "kdee",
        "input": a.input.input,
        "sample_rate_hz": series.sample_rate_hz(),
        "tau_max": a.tau_max,
        "decimate": a.decimate,
    });
    emit(a.out.as_deref(), format, &config, |w| match format {
        Format::Json => write_json_value(w, &json!({ "config": config, "profile": profile })),
        Format::Csv => {
            writeln!(w, "tau,ke_bits")?;
            for (t, ke) in profile.taus.iter().zip(&profile.ke_values) {
                writeln!(w, "{t},{:?}", ke.0)?;
            }
            writeln!(w, "delta_ke,{:?}", profile.delta_ke.0)
        }
    })
}

fn dump_grid(path: &Path, grid: &DensityGrid, tau: usize) -> Result<()> {
    let nx = grid.spec().nx;
    io::write_atomic(path, |w| {
        for row in grid.values().chunks(nx) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    })?;
    io::write_json(&io::sidecar_path(path), &json!({ "tau": tau, "spec": grid.spec() }))
}

fn detect_cmd(a: DetectArgs, format: Option<Format>) -> Result<()> {
    let cfg = a.window.config(a.representation);
    if let ZScoreMode::Streaming { history } = cfg.z_mode {
        if history < MIN_STREAMING_HISTORY {
            return Err(invalid(format!(
                "--streaming history must be at least {MIN_STREAMING_HISTORY}"
            )));
        }
    }
    cfg.validate()?;
    let doc = read_input(&a.input)?;
    let series = doc.record.series();
    let report = detect(series, &cfg)?;
    if report.degenerate_scale {
        eprintln!("warning: statistics have zero MAD; no window was flagged");
    }
    let config = json!({
        "command": "detect",
        "input": a.input.input,
        "sample_rate_hz": series.sample_rate_hz(),
        "samples": series.len(),
        "window": cfg,
    });
    let detections = json!({ "config": config, "report": report });
    if let Some(path) = &a.intervals {
        io::write_json(path, &detections)?;
    }
    let format = out_format(format, a.out.as_deref());
    emit(a.out.as_deref(), format, &config, |w| match format {
        Format::Json => write_json_value(w, &detections),
        Format::Csv => {
            writeln!(w, "start,statistic,z,flag")?;
            for k in 0..report.window_starts.len() {
                writeln!(
                    w,
                    "{},{:?},{:?},{}",
                    report.window_starts[k],
                    report.statistic[k],
                    report.z_scores[k],
                    u8::from(report.flagged[k])
                )?;
            }
            Ok(())
        }
    })
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| invalid(format!("--grid {s:?} is not START:STOP:STEP")))?;
    match parts.as_slice() {
        [start, stop, step] if *step > 0.0 && stop >= start && parts.iter().all(|v| v.is_finite()) => {
            Ok(db_grid(*start, *stop, *step))
        }
        _ => Err(invalid(format!("--grid {s:?} needs START <= STOP and STEP > 0"))),
    }
}

fn sweep(a: SweepArgs, format: Option<Format>) -> Result<()> {
    let formats = if a.formats.is_empty() {
        ModulationFormat::ALL.to_vec()
    } else {
        a.formats.clone()
    };
    let grid = a.grid.as_deref().map(parse_grid).transpose()?;
    let (config, results) = match a.experiment {
        Experiment::DeltaKe => {
            let d = DeltaKeSweepConfig::default();
            let cfg = DeltaKeSweepConfig {
                formats,
                snr_grid: grid.unwrap_or(d.snr_grid),
                trials: a.trials,
                decimations: a.decimate.clone(),
                length: a.length,
                tau_max: a.window.tau_max.unwrap_or(DEFAULT_TAU_MAX),
                seed: a.seed,
            };
            if cfg.decimations.contains(&0) || cfg.tau_max == 0 {
                return Err(invalid("--decimate and --tau-max must be positive"));
            }
            let config = json!({ "command": "sweep", "experiment": "delta-ke", "sweep": cfg });
            (config, sweep_delta_ke(&cfg)?)
        }
        Experiment::Detection => {
            let d = DetectionSweepConfig::default();
            let cfg = DetectionSweepConfig {
                formats,
                snr_sir_grid: grid.unwrap_or(d.snr_sir_grid),
                trials: a.trials,
                methods: a.methods.clone(),
                window: a.window.config(Representation::Kde),
                min_overlap: a.min_overlap,
                basis: a.basis.into(),
                seed: a.seed,
                ..d
            };
            cfg.window.validate()?;
            let config = json!({ "command": "sweep", "experiment": "detection", "sweep": cfg });
            (config, sweep_detection(&cfg)?)
        }
    };
    let format = out_format(format, Some(&a.out));
    emit(Some(&a.out), format, &config, |w| match format {
        Format::Json => write_json_value(w, &json!({ "config": config, "results": results })),
        Format::Csv => write_sweep_csv(w, &results),
    })
}

fn write_sweep_csv(w: &mut dyn Write, results: &[SweepResult]) -> std::io::Result<()> {
    let axis = results.first().map_or("axis", |r| r.axis_name.as_str());
    writeln!(
        w,
        "curve,{axis},mean,std,trials,pooled_precision,pooled_recall,pooled_f1"
    )?;
    for r in results {
        for p in &r.points {
            write!(w, "{},{:?},{:?},{:?},{}", r.label, p.axis, p.mean, p.std, p.trials)?;
            match &p.pooled {
                Some(f) => writeln!(w, ",{:?},{:?},{:?}", f.precision, f.recall, f.f1)?,
                None => writeln!(w, ",,,")?,
            }
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct SavedDetections {
    report: SavedReport,
}

#[derive(Deserialize)]
struct SavedReport {
    window_len: usize,
    window_starts: Vec<usize>,
    flagged: Vec<bool>,
    #[serde(default)]
    intervals: Vec<LabeledInterval>,
}

fn score(a: ScoreArgs, format: Option<Format>) -> Result<()> {
    if !(a.min_overlap > 0.0 && a.min_overlap <= 1.0) {
        return Err(invalid("--min-overlap must lie in (0, 1]"));
    }
    let saved: SavedDetections = io::read_json(&a.detections)?;
    let r = saved.report;
    if r.window_starts.len() != r.flagged.len() {
        return Err(invalid("detections have mismatched window_starts and flagged lengths"));
    }
    let truth = io::read_record(&a.truth, Format::from_path(&a.truth), a.rate)?;
    let windows: Vec<(usize, usize)> = r.window_starts.iter().map(|&s| (s, r.window_len)).collect();
    let f1 = f1_overlap(
        &windows,
        &r.flagged,
        truth.record.truth(),
        a.min_overlap,
        a.basis.into(),
    )?;
    let config = json!({
        "command": "score",
        "detections": a.detections,
        "truth": a.truth,
        "min_overlap": a.min_overlap,
        "basis": OverlapBasis::from(a.basis),
    });
    let format = out_format(format, a.out.as_deref());
    emit(a.out.as_deref(), format, &config, |w| match format {
        Format::Json => write_json_value(
            w,
            &json!({ "config": config, "f1": f1, "detected_intervals": r.intervals }),
        ),
        Format::Csv => {
            writeln!(w, "precision,recall,f1,tp,fp,fn")?;
            writeln!(
                w,
                "{:?},{:?},{:?},{},{},{}",
                f1.precision, f1.recall, f1.f1, f1.tp, f1.fp, f1.fn_
            )
        }
    })
}
