use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod ppm;

/// Geometry engine for mask-based scene text detection.
#[derive(Parser)]
#[command(name = "textgeom", version)]
struct Cli {
    /// Worker threads; 0 picks one per core. TEXTGEOM_THREADS takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Log filter passed to env_logger (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GtFormatArg {
    Icdar15,
    Td500,
}

impl From<GtFormatArg> for textgeom::datasets::GtFormat {
    fn from(f: GtFormatArg) -> Self {
        match f {
            GtFormatArg::Icdar15 => Self::Icdar15,
            GtFormatArg::Td500 => Self::Td500,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NmsModeArg {
    Standard,
    Mask,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalModeArg {
    Box,
    Mask,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ScenarioArg {
    InclinedPair,
    LineWord,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum BenchOp {
    Nms,
    MaskNms,
    Rasterize,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize ground-truth quads into instance masks (JSON lines)
    Rasterize {
        #[arg(long, value_enum)]
        gt_format: GtFormatArg,
        /// Directory of annotation files
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write one PPM image per annotation file into this directory
        #[arg(long)]
        dump_masks: Option<PathBuf>,
    },
    /// Suppress overlapping detections and fit a quad to each survivor
    Nms {
        #[arg(long, value_enum, default_value = "mask")]
        mode: NmsModeArg,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 0.05)]
        score_floor: f64,
        /// Merge each kept mask with its suppressed partners
        #[arg(long, overrides_with = "no_vote")]
        vote: bool,
        #[arg(long)]
        no_vote: bool,
        /// Minimum mask IoU for a suppressed detection to take part in voting
        #[arg(long, default_value_t = 0.5)]
        vote_iou: f64,
        /// Weighted-average level at which a voted pixel is set
        #[arg(long, default_value_t = 0.5)]
        vote_binarize: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score detections against ground truth
    Eval {
        #[arg(long, value_enum, default_value = "mask")]
        mode: EvalModeArg,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, value_enum, default_value = "icdar15")]
        gt_format: GtFormatArg,
        #[arg(long)]
        det: PathBuf,
        /// JSON report destination
        #[arg(long)]
        report: PathBuf,
        /// Per-image counts as CSV
        #[arg(long)]
        per_image_csv: Option<PathBuf>,
        /// Print a table instead of the JSON summary
        #[arg(long)]
        pretty: bool,
    },
    /// Dump the anchor grid for an image size as JSON lines
    Anchors {
        #[arg(long)]
        width: u32,
        #[arg(long)]
        height: u32,
        #[arg(long, default_value_t = 16)]
        stride: u32,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic scenes: IC15 ground truth plus detection JSON lines
    Synth {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of scenes, seeded seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 512)]
        width: u32,
        #[arg(long, default_value_t = 512)]
        height: u32,
        /// Instances per random scene
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Vertex jitter of random-scene detections, in pixels
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[arg(long, default_value_t = -45.0, allow_negative_numbers = true)]
        angle_min: f64,
        #[arg(long, default_value_t = 45.0, allow_negative_numbers = true)]
        angle_max: f64,
        #[arg(long, default_value_t = 24.0)]
        size_min: f64,
        #[arg(long, default_value_t = 100.0)]
        size_max: f64,
    },
    /// Time an operation on seeded random input and print ops/sec
    Bench {
        #[arg(long, value_enum)]
        op: BenchOp,
        /// Detections per image (nms) or quads (rasterize)
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Error raised by bad flag values rather than bad data.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn init_threads(flag: usize) -> anyhow::Result<()> {
    let threads = match std::env::var("TEXTGEOM_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| UsageError(format!("TEXTGEOM_THREADS must be a non-negative integer, got {v:?}")))?,
        Err(_) => flag,
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    log::debug!("worker threads: {}", rayon::current_num_threads());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Rasterize { gt_format, input, out, dump_masks } => {
            commands::rasterize(gt_format.into(), &input, &out, dump_masks.as_deref())
        }
        Command::Nms { mode, threshold, score_floor, vote, no_vote: _, vote_iou, vote_binarize, input, out } => {
            let mode = match mode {
                NmsModeArg::Standard => textgeom::nms::NmsMode::Standard,
                NmsModeArg::Mask => textgeom::nms::NmsMode::Mask,
            };
            let cfg = textgeom::nms::NmsConfig::new(mode, threshold, score_floor).map_err(usage)?;
            let vote = vote.then_some(textgeom::nms::VoteConfig { iou_gate: vote_iou, binarize_at: vote_binarize });
            commands::nms(&cfg, vote.as_ref(), &input, &out)
        }
        Command::Eval { mode, iou, gt, gt_format, det, report, per_image_csv, pretty } => {
            let mode = match mode {
                EvalModeArg::Box => textgeom::eval::EvalMode::Box,
                EvalModeArg::Mask => textgeom::eval::EvalMode::Mask,
            };
            let cfg = textgeom::eval::EvalConfig::new(mode, iou).map_err(usage)?;
            commands::eval(&cfg, &gt, gt_format.into(), &det, &report, per_image_csv.as_deref(), pretty)
        }
        Command::Anchors { width, height, stride, out } => {
            let cfg = textgeom::anchors::AnchorConfig { stride, ..Default::default() };
            cfg.validate().map_err(usage)?;
            commands::anchors(width, height, &cfg, out.as_deref())
        }
        Command::Synth {
            scenario,
            seed,
            count,
            out,
            width,
            height,
            n,
            jitter,
            angle_min,
            angle_max,
            size_min,
            size_max,
        } => {
            let scenario = match scenario {
                ScenarioArg::InclinedPair => textgeom::synth::Scenario::InclinedPair,
                ScenarioArg::LineWord => textgeom::synth::Scenario::LineWord,
                ScenarioArg::Random => textgeom::synth::Scenario::Random {
                    n,
                    angle_range: (angle_min, angle_max),
                    size_range: (size_min, size_max),
                    jitter,
                },
            };
            let specs: Vec<_> = (0..count)
                .map(|k| textgeom::synth::SceneSpec {
                    seed: seed.wrapping_add(k),
                    image_w: width,
                    image_h: height,
                    scenario: scenario.clone(),
                })
                .collect();
            commands::synth(&specs, &out)
        }
        Command::Bench { op, n, iters, seed } => commands::bench(op, n, iters.max(1), seed),
    }
}

fn usage(e: textgeom::Error) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log_level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
