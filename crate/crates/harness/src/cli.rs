//! Command-line interface.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use slicealign::io::{read_swim_image, read_swv, write_swim, Grid};
use slicealign::metrics::root;
use slicealign::polar::Projector;
use slicealign::tomo::{viewing_sweep, Volume};
use slicealign::{Aligner, Image, Metric, MetricKind, NufftConfig, PolarGrid, Sinogram};

use crate::bench::{run_timing_bench, BenchConfig};
use crate::data;
use crate::error::{HarnessError, Result};
use crate::experiment::{run_alignment_experiment, run_noise_experiment, ExperimentConfig, ExperimentKind};
use crate::report::{self, Format, Manifest, OutputDir};
use crate::studies::{convergence_study, SweepPoint};

#[derive(Debug, Parser)]
#[command(name = "slicealign", version, about = "Rotational image alignment with sliced optimal transport")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for reports.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between two SWIM images.
    Dist(PairArgs),
    /// Best rotation of the second image onto the first.
    Align(AlignArgs),
    /// Sinogram of a SWIM image.
    Radon(RadonArgs),
    /// Rotated and shifted MNIST alignment accuracy.
    MnistExp(ExpArgs),
    /// MNIST alignment accuracy under additive noise.
    NoiseExp(ExpArgs),
    /// Rotation-minimized distances between tilted projections of a volume.
    TomoSweep(SweepArgs),
    /// Timing of single distances and rotation profiles.
    Bench(BenchArgs),
    /// Discretization error of the sliced distance against a fine reference.
    Convergence(ConvergenceArgs),
}

fn parse_metric(s: &str) -> std::result::Result<MetricKind, String> {
    s.parse::<MetricKind>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long, value_parser = parse_metric, default_value = "sw2")]
    pub metric: MetricKind,
    /// Projection or rotation angles (default: image size).
    #[arg(long)]
    pub angles: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Sinkhorn regularization.
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    /// Sinkhorn sweeps.
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
}

impl MetricArgs {
    fn metric(&self, size: usize, seed: u64) -> Metric {
        let mut m = Metric::new(self.metric, self.angles.unwrap_or(size));
        m.nufft = NufftConfig::with_eps(self.eps);
        m.lambda = self.lambda;
        m.iters = self.iters;
        m.seed = seed;
        m
    }
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Reference image (SWIM).
    pub f: PathBuf,
    /// Target image (SWIM).
    pub g: PathBuf,
    #[command(flatten)]
    pub metric: MetricArgs,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Also write the full profile to `<out-dir>/profile.csv`.
    #[arg(long)]
    pub profile: bool,
}

#[derive(Debug, Args)]
pub struct RadonArgs {
    pub image: PathBuf,
    #[arg(long)]
    pub angles: Option<usize>,
    /// Ramp-filter the projections and write positive and negative parts.
    #[arg(long)]
    pub ramp: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct ExpArgs {
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub digits: Vec<u8>,
    #[arg(long, value_delimiter = ',')]
    pub shifts: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', default_value = "100,10,1,0.1")]
    pub snrs: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_metric, default_value = "euclidean,sw2,rfsw2")]
    pub metrics: Vec<MetricKind>,
    #[arg(long, default_value_t = data::MNIST_SIZE)]
    pub size: usize,
    /// Rotation grid size (default: image size).
    #[arg(long)]
    pub angles: Option<usize>,
    /// Directory with the t10k IDX files.
    #[arg(long)]
    pub mnist_dir: Option<PathBuf>,
    /// Also write per-image outcomes.
    #[arg(long)]
    pub records: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Cubic SWV volume; a random 3-component mixture is used when absent.
    #[arg(long)]
    pub volume: Option<PathBuf>,
    /// Seeds of random mixtures (default: the global seed).
    #[arg(long, value_delimiter = ',')]
    pub mixture_seeds: Option<Vec<u64>>,
    /// Tilt axis.
    #[arg(long, value_delimiter = ',', default_value = "1,0,0", allow_hyphen_values = true)]
    pub axis: Vec<f64>,
    #[arg(long, default_value_t = 45.0)]
    pub theta_max_deg: f64,
    #[arg(long, default_value_t = 46)]
    pub steps: usize,
    #[arg(long, default_value_t = 96)]
    pub size: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_metric, default_value = "sw2")]
    pub metrics: Vec<MetricKind>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "32,64,96,128")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_metric, default_value = "euclidean,sw2,rfsw2")]
    pub metrics: Vec<MetricKind>,
    #[arg(long)]
    pub no_rotations: bool,
    #[arg(long)]
    pub no_single: bool,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    pub levels: Vec<usize>,
    #[arg(long, default_value_t = 512)]
    pub reference_size: usize,
    #[arg(long, default_value_t = 1024)]
    pub reference_angles: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
}

fn load_image(path: &Path) -> Result<Image> {
    if !path.exists() {
        return Err(HarnessError::MissingFile(path.display().to_string()));
    }
    Ok(read_swim_image(path)?.normalize_to_probability(false)?)
}

fn load_pair(args: &PairArgs) -> Result<(Image, Image)> {
    let f = load_image(&args.f)?;
    let g = load_image(&args.g)?;
    if f.size() != g.size() {
        return Err(HarnessError::Args(format!(
            "images differ in size: {} vs {}",
            f.size(),
            g.size()
        )));
    }
    Ok((f, g))
}

fn print_record<T: Serialize>(format: Format, value: &T) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string(value)?),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.serialize(value)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Flat form of [`DistJson`] for CSV output.
#[derive(Debug, Serialize)]
struct DistRow {
    metric: MetricKind,
    value: f64,
    value_sqrt: f64,
    n_angles: usize,
    eps: f64,
    lambda: f64,
    iters: usize,
    wall_time_s: f64,
}

#[derive(Debug, Serialize)]
struct DistJson {
    metric: MetricKind,
    value: f64,
    value_sqrt: f64,
    params: Metric,
    wall_time_s: f64,
}

#[derive(Debug, Serialize)]
struct AlignOutput {
    angle_rad: f64,
    angle_deg: f64,
    value: f64,
    metric: MetricKind,
    wall_time_s: f64,
}

fn default_out(cli: &Cli) -> PathBuf {
    cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("results"))
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(HarnessError::Args("--threads must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Dist(args) => {
            let (f, g) = load_pair(args)?;
            let metric = args.metric.metric(f.size(), cli.seed);
            let start = Instant::now();
            let value = metric.squared(&f, &g)?;
            let wall_time_s = start.elapsed().as_secs_f64();
            match cli.format {
                Format::Json => print_record(
                    cli.format,
                    &DistJson {
                        metric: metric.kind,
                        value,
                        value_sqrt: root(value),
                        params: metric,
                        wall_time_s,
                    },
                ),
                Format::Csv => print_record(
                    cli.format,
                    &DistRow {
                        metric: metric.kind,
                        value,
                        value_sqrt: root(value),
                        n_angles: metric.n_angles,
                        eps: metric.nufft.eps,
                        lambda: metric.lambda,
                        iters: metric.iters,
                        wall_time_s,
                    },
                ),
            }
        }
        Command::Align(args) => {
            let (f, g) = load_pair(&args.pair)?;
            let metric = args.pair.metric.metric(f.size(), cli.seed);
            let start = Instant::now();
            let profile = Aligner::new(&f, metric)?.profile(&g)?;
            let out = AlignOutput {
                angle_rad: profile.best_angle(),
                angle_deg: profile.best_angle().to_degrees(),
                value: profile.best_value(),
                metric: metric.kind,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            if args.profile {
                let mut dir = OutputDir::create(&default_out(&cli))?;
                dir.write("profile.csv", &report::profile_csv(&profile)?)?;
                dir.finish("align", Manifest::new("align", cli.seed, metric))?;
            }
            print_record(cli.format, &out)
        }
        Command::Radon(args) => run_radon(&cli, args),
        Command::MnistExp(args) | Command::NoiseExp(args) => {
            let kind = if matches!(cli.command, Command::MnistExp(_)) {
                ExperimentKind::Alignment
            } else {
                ExperimentKind::Noise
            };
            run_experiment(&cli, args, kind)
        }
        Command::TomoSweep(args) => run_sweep(&cli, args),
        Command::Bench(args) => {
            let cfg = BenchConfig {
                sizes: args.sizes.clone(),
                trials: args.trials,
                metrics: args.metrics.clone(),
                rotations: !args.no_rotations,
                single: !args.no_single,
                seed: cli.seed,
            };
            let table = run_timing_bench(&cfg)?;
            let mut dir = OutputDir::create(&default_out(&cli))?;
            match cli.format {
                Format::Csv => dir.write("timing.csv", &report::timing_csv(&table)?)?,
                Format::Json => dir.write_json("timing.json", &table)?,
            };
            dir.finish("bench", Manifest::new("bench", cli.seed, cfg))?;
            Ok(())
        }
        Command::Convergence(args) => {
            let levels: Vec<(usize, usize)> = args.levels.iter().map(|&l| (l, l)).collect();
            let study = convergence_study((args.reference_size, args.reference_angles), &levels, args.eps)?;
            let mut dir = OutputDir::create(&default_out(&cli))?;
            match cli.format {
                Format::Csv => dir.write("convergence.csv", &report::convergence_csv(&study)?)?,
                Format::Json => dir.write_json("convergence.json", &study)?,
            };
            let cfg = serde_json::json!({
                "levels": args.levels,
                "reference_size": args.reference_size,
                "reference_angles": args.reference_angles,
                "eps": args.eps,
                "slope": study.slope,
            });
            dir.finish("convergence", Manifest::new("convergence", cli.seed, cfg))?;
            Ok(())
        }
    }
}

fn sinogram_json(s: &Sinogram) -> serde_json::Value {
    serde_json::json!({
        "size": s.size(),
        "n_angles": s.n_angles(),
        "extent": s.extent(),
        "columns": s.data(),
    })
}

fn run_radon(cli: &Cli, args: &RadonArgs) -> Result<()> {
    let img = load_image(&args.image)?;
    let n = args.angles.unwrap_or(img.size());
    let grid = PolarGrid::new(img.size(), n)?;
    let cfg = NufftConfig::with_eps(args.eps);
    let mut dir = OutputDir::create(&default_out(cli))?;
    let parts: Vec<(&str, Sinogram)> = if args.ramp {
        let s = Projector::padded(grid, cfg, slicealign::metrics::RAMP_PADDING)?.ramp_sinogram(&img)?;
        vec![("sinogram_pos", s.pos), ("sinogram_neg", s.neg)]
    } else {
        vec![("sinogram", Projector::new(grid, cfg)?.sinogram(&img)?)]
    };
    for (stem, s) in &parts {
        match cli.format {
            Format::Csv => {
                let path = dir.write(&format!("{stem}.swim"), "")?;
                write_swim(&path, &s.to_grid())?;
            }
            Format::Json => {
                dir.write_json(&format!("{stem}.json"), &sinogram_json(s))?;
            }
        }
    }
    let manifest = serde_json::json!({ "image": args.image, "angles": n, "ramp": args.ramp, "eps": args.eps });
    dir.finish("radon", Manifest::new("radon", cli.seed, manifest))?;
    Ok(())
}

fn run_experiment(cli: &Cli, args: &ExpArgs, kind: ExperimentKind) -> Result<()> {
    let base = match kind {
        ExperimentKind::Alignment => ExperimentConfig::alignment(),
        ExperimentKind::Noise => ExperimentConfig::noise(),
    };
    let out_dir = default_out(cli);
    let cfg = ExperimentConfig {
        kind,
        digits: args.digits.clone(),
        size: args.size,
        shifts: args.shifts.clone().unwrap_or(base.shifts),
        snrs: match kind {
            ExperimentKind::Alignment => Vec::new(),
            ExperimentKind::Noise => args.snrs.clone(),
        },
        n_angles: args.angles.unwrap_or(args.size),
        metrics: args.metrics.clone(),
        seed: cli.seed,
        mnist_dir: args.mnist_dir.clone().unwrap_or_else(data::mnist_dir),
        out_dir: Some(out_dir.clone()),
    };
    cfg.validate()?;
    let reports = match kind {
        ExperimentKind::Alignment => run_alignment_experiment(&cfg)?,
        ExperimentKind::Noise => run_noise_experiment(&cfg)?,
    };
    let (stem, with_snr) = match kind {
        ExperimentKind::Alignment => ("alignment", false),
        ExperimentKind::Noise => ("noise", true),
    };
    let mut dir = OutputDir::create(&out_dir)?;
    for r in &reports {
        let digit = r.digit.expect("experiment reports carry their digit");
        match cli.format {
            Format::Csv => {
                dir.write(&format!("{stem}_digit{digit}.csv"), &report::alignment_csv(r, with_snr)?)?;
                if args.records {
                    dir.write(&format!("{stem}_digit{digit}_records.csv"), &report::records_csv(r)?)?;
                }
            }
            Format::Json => {
                dir.write_json(&format!("{stem}_digit{digit}.json"), r)?;
            }
        }
        for s in &r.summary {
            let snr = s.snr.map(|v| format!(" snr {v}")).unwrap_or_default();
            eprintln!(
                "digit {digit} {:<9} shift {}{snr}: {:.1}% within 15 deg, {:.1}% within 45 deg",
                s.metric.name(),
                s.shift_px,
                s.within_15,
                s.within_45
            );
        }
    }
    dir.finish(stem, Manifest::new(stem, cli.seed, &cfg))?;
    Ok(())
}

fn run_sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let axis: [f64; 3] = args
        .axis
        .clone()
        .try_into()
        .map_err(|_| HarnessError::Args("--axis needs three comma-separated numbers".into()))?;
    let metrics: Vec<Metric> = args.metrics.iter().map(|&k| Metric::new(k, args.size)).collect();
    let theta_max = args.theta_max_deg.to_radians();
    let c = slicealign::tomo::viewing_constant_p2();
    let mut points = Vec::new();
    let mut sweep = |vol: &Volume, seed: u64| -> Result<()> {
        let rows = viewing_sweep(vol, axis, theta_max, args.steps, args.size, &metrics)?;
        points.extend(rows.into_iter().map(|r| SweepPoint {
            seed,
            bound: c * r.theta_deg.to_radians(),
            theta_deg: r.theta_deg,
            metric: r.metric,
            value_sqrt: r.value_sqrt,
        }));
        Ok(())
    };
    match &args.volume {
        Some(path) => {
            if !path.exists() {
                return Err(HarnessError::MissingFile(path.display().to_string()));
            }
            sweep(&Volume::from_file(read_swv(path)?)?, cli.seed)?;
        }
        None => {
            for &seed in args.mixture_seeds.as_deref().unwrap_or(&[cli.seed]) {
                sweep(&Volume::random_mixture(3, seed)?, seed)?;
            }
        }
    }
    let mut dir = OutputDir::create(&default_out(cli))?;
    match cli.format {
        Format::Csv => dir.write("sweep.csv", &report::sweep_csv(&points)?)?,
        Format::Json => dir.write_json("sweep.json", &points)?,
    };
    let cfg = serde_json::json!({
        "volume": args.volume,
        "mixture_seeds": args.mixture_seeds,
        "axis": args.axis,
        "theta_max_deg": args.theta_max_deg,
        "steps": args.steps,
        "size": args.size,
        "metrics": args.metrics,
    });
    dir.finish("tomo_sweep", Manifest::new("tomo-sweep", cli.seed, cfg))?;
    Ok(())
}

/// Writes an image as SWIM, for preparing CLI inputs.
pub fn save_image(path: &Path, img: &Image) -> Result<()> {
    write_swim(path, &Grid::from(img))?;
    Ok(())
}
