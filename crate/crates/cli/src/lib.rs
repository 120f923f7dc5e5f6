//! `hsimg`: synthesize MSR datasets, image them, score and export the maps.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage or
//! validation failure (including an unknown preset).

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use halfspace_imaging::dataset::MsrDataset;
use halfspace_imaging::export::{write_csv, write_pgm, write_png};
use halfspace_imaging::forward::ForwardModel;
use halfspace_imaging::imaging::{make_grid, ImageMap, Rect, SearchGrid, SteeringConfig};
use halfspace_imaging::metrics::{peak_metrics, PeakMetrics};
use halfspace_imaging::pipeline::{
    image_dataset, longest_wavelength, resolve_steering, synthesize, ImageRun,
};
use halfspace_imaging::scenario::{preset, preset_names, Scenario, Severity};
use halfspace_imaging::{Error, Vec2};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const DEFAULT_DOMAIN: Rect = Rect {
    x1_min: -1.0,
    x1_max: 1.0,
    x2_min: -3.0,
    x2_max: -1.0,
};

#[derive(Parser, Debug)]
#[command(name = "hsimg", version, about = "Thin-inclusion imaging in a lower half-space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the MSR dataset of a scenario.
    Synthesize {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Output dataset directory.
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        data: DataFlags,
    },
    /// Image a dataset and write the map files and a report.
    Image {
        /// Dataset directory.
        dataset: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Scenario supplying the domain, truth curves and output settings.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Search domain `x1_min,x1_max,x2_min,x2_max`.
        #[arg(long, value_parser = parse_domain, allow_hyphen_values = true)]
        domain: Option<Rect>,
        #[command(flatten)]
        imaging: ImageFlags,
    },
    /// Score a map CSV against a scenario's curves.
    Metrics {
        /// Map CSV written by `image`.
        map: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        level: Option<f64>,
        /// Tube width for the background mean (default: longest wavelength).
        #[arg(long)]
        tube: Option<f64>,
    },
    /// Run synthesize, image and metrics for a preset.
    Reproduce {
        preset: String,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        imaging: ImageFlags,
    },
    /// List the preset names, or print one preset as JSON.
    Presets { name: Option<String> },
}

#[derive(Args, Debug, Default, Clone)]
pub struct DataFlags {
    #[arg(long)]
    pub seed: Option<u64>,
    /// SNR in dB; `inf` for noiseless data.
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long, value_parser = parse_forward)]
    pub forward: Option<ForwardModel>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ImageFlags {
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Steering weights `a,b1,b2`.
    #[arg(long, value_parser = parse_steering, allow_hyphen_values = true)]
    pub steering: Option<SteeringConfig>,
    #[arg(long)]
    pub level: Option<f64>,
}

fn parse_forward(s: &str) -> Result<ForwardModel, String> {
    ForwardModel::parse(s).ok_or_else(|| format!("expected fine, coarse or foldylax, got `{s}`"))
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_steering(s: &str) -> Result<SteeringConfig, String> {
    let [a, b1, b2] = parse_floats::<3>(s)?;
    SteeringConfig::new(a, b1, b2).map_err(|e| e.to_string())
}

fn parse_domain(s: &str) -> Result<Rect, String> {
    let [a, b, c, d] = parse_floats::<4>(s)?;
    Ok(Rect::new(a, b, c, d))
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn usage(error: anyhow::Error) -> Self {
        Self { code: 2, error }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Invalid(_) | Error::UnknownPreset { .. }) => 2,
            _ => 1,
        };
        Self { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyReport {
    pub omega: f64,
    pub retained: usize,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct RunReport {
    /// SHA-256 of the scenario JSON (or of the dataset metadata when no
    /// scenario was given).
    pub scenario_hash: String,
    pub retained: Vec<usize>,
    pub frequencies: Vec<FrequencyReport>,
    pub steering: Option<[f64; 3]>,
    pub peak: Option<f64>,
    pub peak_location: Option<[f64; 2]>,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub paths: Vec<String>,
    pub metrics: Option<PeakMetrics>,
    pub warnings: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

fn execute(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Synthesize { scenario, out, data } => {
            let mut s = load_scenario(&scenario)?;
            apply_data_flags(&mut s, &data);
            check_scenario(&s)?;
            let start = Instant::now();
            let dataset = synthesize(&s).context("synthesize")?;
            let paths = write_dataset(&s, &dataset, &out)?;
            eprintln!(
                "wrote {} matrices of size {n}x{n} in {:.2}s",
                dataset.matrices.len(),
                start.elapsed().as_secs_f64(),
                n = dataset.n_plus()
            );
            for p in paths {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Image { dataset, out, scenario, domain, imaging } => {
            let s = scenario.as_deref().map(load_scenario).transpose()?;
            let report = cmd_image(&dataset, &out, s.as_ref(), domain, &imaging)?;
            print_summary(&report);
            Ok(())
        }
        Command::Metrics { map, scenario, level, tube } => {
            let s = load_scenario(&scenario)?;
            let map = read_map_csv(&map)?;
            let tube = tube.unwrap_or_else(|| longest_wavelength(&s.medium, &s.frequency_list()));
            let m = peak_metrics(&map, &s.truth_curves(), level.unwrap_or(s.imaging.metric_level), tube)
                .map_err(|e| Failure::usage(e.into()))?;
            println!("{}", serde_json::to_string_pretty(&m).map_err(anyhow::Error::from)?);
            Ok(())
        }
        Command::Reproduce { preset: name, out, data, imaging } => {
            let report = cmd_reproduce(&name, &out, &data, &imaging)?;
            print_summary(&report);
            Ok(())
        }
        Command::Presets { name } => {
            match name {
                Some(n) => print!("{}", preset(&n)?.to_json()),
                None => preset_names().iter().for_each(|n| println!("{n}")),
            }
            Ok(())
        }
    }
}

fn print_summary(r: &RunReport) {
    println!("retained per frequency: {:?}", r.retained);
    if let (Some(peak), Some(loc)) = (r.peak, r.peak_location) {
        println!("peak {peak:.6} at ({:.4}, {:.4})", loc[0], loc[1]);
    }
    if let Some(m) = &r.metrics {
        println!(
            "level {}: false-alarm {:.4}, coverage {:.4}, background ratio {:.4}",
            m.level, m.false_alarm, m.coverage, m.background_ratio
        );
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
}

fn load_scenario(path: &Path) -> CliResult<Scenario> {
    Scenario::load(path)
        .with_context(|| format!("reading scenario {}", path.display()))
        .map_err(Failure::usage)
}

fn check_scenario(s: &Scenario) -> CliResult<()> {
    let diagnostics = s.validate();
    for d in &diagnostics {
        eprintln!("{d}");
    }
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(Failure::usage(anyhow!("scenario `{}` failed validation", s.name)));
    }
    Ok(())
}

pub fn apply_data_flags(s: &mut Scenario, f: &DataFlags) {
    if let Some(seed) = f.seed {
        s.noise.seed = seed;
    }
    if let Some(snr) = f.snr_db {
        s.noise.snr_db = (snr != f64::INFINITY).then_some(snr);
    }
    if let Some(model) = f.forward {
        s.forward.model = model;
    }
}

pub fn apply_image_flags(s: &mut Scenario, f: &ImageFlags) {
    if let Some(t) = f.threshold {
        s.imaging.svd_threshold = t;
    }
    if let Some(g) = f.grid_step {
        s.imaging.grid_step = g;
    }
    if f.steering.is_some() {
        s.imaging.steering = f.steering;
    }
    if let Some(l) = f.level {
        s.imaging.metric_level = l;
    }
}

fn write_dataset(s: &Scenario, dataset: &MsrDataset, out: &Path) -> CliResult<Vec<PathBuf>> {
    let mut paths = dataset
        .write_dir(out)
        .with_context(|| format!("writing dataset to {}", out.display()))?;
    if s.output.dataset_csv {
        let p = out.join("msr.csv");
        std::fs::write(&p, dataset.to_csv()).context("writing dataset CSV")?;
        paths.push(p);
    }
    Ok(paths)
}

/// Writes `map.csv`, `map.pgm` (+ sidecar) and optionally `map.png`.
fn write_maps(map: &ImageMap, out: &Path, depth: u8, png: bool) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let csv = out.join("map.csv");
    let pgm = out.join("map.pgm");
    write_csv(map, &csv)?;
    write_pgm(map, &pgm, depth)?;
    let mut paths = vec![csv, pgm.clone(), PathBuf::from(format!("{}.txt", pgm.display()))];
    if png {
        let p = out.join("map.png");
        write_png(map, &p, depth)?;
        paths.push(p);
    }
    Ok(paths)
}

fn fill_image_report(report: &mut RunReport, run: &ImageRun, dataset: &MsrDataset) {
    report.retained = run.retained().to_vec();
    report.frequencies = dataset
        .frequencies
        .iter()
        .zip(run.retained())
        .zip(&run.singular_values)
        .map(|((&omega, &retained), sv)| FrequencyReport {
            omega,
            retained,
            singular_values: sv.clone(),
        })
        .collect();
    report.steering = Some([run.steering.a, run.steering.b1, run.steering.b2]);
    let (_, peak) = run.map.max();
    let loc = run.map.argmax_point();
    report.peak = Some(peak);
    report.peak_location = Some([loc.x, loc.y]);
    report.warnings.extend(run.map.warnings.iter().cloned());
}

fn write_report(report: &mut RunReport, out: &Path) -> CliResult<()> {
    let path = out.join("report.json");
    report.paths.push(path.display().to_string());
    let text = serde_json::to_string_pretty(report).map_err(anyhow::Error::from)?;
    std::fs::write(&path, text + "\n").context("writing report")?;
    Ok(())
}

pub fn cmd_image(
    dataset_dir: &Path,
    out: &Path,
    scenario: Option<&Scenario>,
    domain: Option<Rect>,
    flags: &ImageFlags,
) -> CliResult<RunReport> {
    let mut report = RunReport::default();
    let t = Instant::now();
    let dataset = MsrDataset::read_dir(dataset_dir)
        .with_context(|| format!("reading dataset {}", dataset_dir.display()))?;
    report.timings.insert("read".into(), t.elapsed().as_secs_f64());

    let mut s = scenario.cloned();
    if let Some(s) = &mut s {
        apply_image_flags(s, flags);
        report.scenario_hash = sha256_hex(s.to_json().as_bytes());
    } else {
        let meta = std::fs::read(dataset_dir.join(halfspace_imaging::dataset::METADATA_FILE))
            .context("reading dataset metadata")?;
        report.scenario_hash = sha256_hex(&meta);
    }
    let domain = domain
        .or(s.as_ref().map(|s| s.imaging.domain))
        .unwrap_or(DEFAULT_DOMAIN);
    let step = flags
        .grid_step
        .or(s.as_ref().map(|s| s.imaging.grid_step))
        .unwrap_or(halfspace_imaging::imaging::DEFAULT_GRID_STEP);
    let threshold = flags
        .threshold
        .or(s.as_ref().map(|s| s.imaging.svd_threshold))
        .unwrap_or(halfspace_imaging::imaging::DEFAULT_SVD_THRESHOLD);
    let grid = make_grid(domain, step).map_err(|e| Failure::usage(e.into()))?;
    let steering = resolve_steering(
        flags.steering.or(s.as_ref().and_then(|s| s.imaging.steering)),
        &dataset.medium,
        &dataset.materials,
    );

    let t = Instant::now();
    let run = image_dataset(&dataset, steering, &grid, threshold).context("image")?;
    report.timings.insert("image".into(), t.elapsed().as_secs_f64());
    fill_image_report(&mut report, &run, &dataset);

    let (depth, png) = s
        .as_ref()
        .map_or((8, true), |s| (s.output.pgm_depth, s.output.png));
    let paths = write_maps(&run.map, out, depth, png)?;
    report.paths.extend(paths.iter().map(|p| p.display().to_string()));

    if let Some(s) = &s {
        let t = Instant::now();
        let tube = longest_wavelength(&s.medium, &dataset.frequencies);
        report.metrics = Some(
            peak_metrics(&run.map, &s.truth_curves(), s.imaging.metric_level, tube)
                .context("metrics")?,
        );
        report.timings.insert("metrics".into(), t.elapsed().as_secs_f64());
    }
    write_report(&mut report, out)?;
    Ok(report)
}

/// Full chain for a preset under `out`: `scenario.json`, `dataset/`, the
/// map files and `report.json`.
pub fn cmd_reproduce(
    name: &str,
    out: &Path,
    data: &DataFlags,
    flags: &ImageFlags,
) -> CliResult<RunReport> {
    let mut s = preset(name)?;
    apply_data_flags(&mut s, data);
    apply_image_flags(&mut s, flags);
    check_scenario(&s)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let scenario_path = out.join("scenario.json");
    std::fs::write(&scenario_path, s.to_json()).context("writing scenario")?;

    let mut report = RunReport {
        scenario_hash: sha256_hex(s.to_json().as_bytes()),
        ..Default::default()
    };
    report.paths.push(scenario_path.display().to_string());

    let t = Instant::now();
    let dataset = synthesize(&s).context("synthesize")?;
    report.timings.insert("synthesize".into(), t.elapsed().as_secs_f64());
    let paths = write_dataset(&s, &dataset, &out.join("dataset"))
        .map_err(|f| Failure { error: f.error.context("synthesize"), ..f })?;
    report.paths.extend(paths.iter().map(|p| p.display().to_string()));

    let t = Instant::now();
    let grid = make_grid(s.imaging.domain, s.imaging.grid_step).context("image")?;
    let steering = resolve_steering(s.imaging.steering, &s.medium, &s.materials());
    let run = image_dataset(&dataset, steering, &grid, s.imaging.svd_threshold).context("image")?;
    report.timings.insert("image".into(), t.elapsed().as_secs_f64());
    fill_image_report(&mut report, &run, &dataset);
    let paths = write_maps(&run.map, out, s.output.pgm_depth, s.output.png)
        .map_err(|f| Failure { error: f.error.context("export"), ..f })?;
    report.paths.extend(paths.iter().map(|p| p.display().to_string()));

    let t = Instant::now();
    let tube = longest_wavelength(&s.medium, &dataset.frequencies);
    report.metrics = Some(
        peak_metrics(&run.map, &s.truth_curves(), s.imaging.metric_level, tube).context("metrics")?,
    );
    report.timings.insert("metrics".into(), t.elapsed().as_secs_f64());
    write_report(&mut report, out)?;
    Ok(report)
}

/// Rebuild a map from the `x1,x2,w` CSV written by `image`.
pub fn read_map_csv(path: &Path) -> CliResult<ImageMap> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let [x1, x2, w] = parse_floats::<3>(line)
            .map_err(|e| Failure::usage(anyhow!("{}:{}: {e}", path.display(), i + 1)))?;
        points.push(Vec2::new(x1, x2));
        values.push(w);
    }
    let grid = infer_grid(&points)
        .ok_or_else(|| Failure::usage(anyhow!("{} is not a grid map", path.display())))?;
    Ok(ImageMap {
        grid,
        values,
        retained: Vec::new(),
        warnings: Vec::new(),
    })
}

fn infer_grid(points: &[Vec2]) -> Option<SearchGrid> {
    let first = points.first()?;
    let cols = points.iter().take_while(|p| p.y == first.y).count();
    if cols < 2 || points.len() % cols != 0 || points.len() / cols < 2 {
        return None;
    }
    let last = points.last()?;
    let domain = Rect::new(first.x, last.x, last.y, first.y);
    let rows = points.len() / cols;
    let step = ((domain.x1_max - domain.x1_min) / (cols - 1) as f64)
        .max((domain.x2_max - domain.x2_min) / (rows - 1) as f64);
    let grid = SearchGrid { domain, step, cols, rows };
    let consistent = points
        .iter()
        .enumerate()
        .all(|(i, p)| (grid.point(i) - p).norm() <= 1e-9 * (1.0 + p.norm()));
    consistent.then_some(grid)
}
