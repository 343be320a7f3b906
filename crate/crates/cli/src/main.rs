//! `morigeo` command-line front end.
//!
//! Exit status is 0 on success, 1 for invalid arguments, invalid values or
//! a failed gradient check, and 2 when a file cannot be read, written or
//! decoded.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morigeo_core::gradcheck::LossKind;
use morigeo_core::grid::Connectivity;
use morigeo_core::morphology::StructuringElement;
use morigeo_core::split::SplitMethod;
use morigeo_core::synth::ShapeKind;

#[derive(Debug, Parser)]
#[command(
    name = "morigeo",
    version,
    about = "Geometric instance targets, splitters and mask mAP"
)]
struct Cli {
    /// Worker threads for per-image work (defaults to all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive distance and boundary targets from ground-truth instances.
    GenTargets(GenTargetsArgs),
    /// Split a semantic mask into instances.
    Split(SplitArgs),
    /// Score predicted instance grids against ground truth.
    Eval(EvalArgs),
    /// Compare analytic loss gradients with finite differences.
    GradCheck(GradCheckArgs),
    /// Generate synthetic scenes of touching ellipses.
    Synth(SynthArgs),
}

/// Settings shared by commands that read the JSON config. Flags override
/// values from the file.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Half-width of the boundary band in pixels.
    #[arg(long)]
    band_width: Option<usize>,
    /// Structuring element: square or diamond.
    #[arg(long = "se")]
    se_shape: Option<StructuringElement>,
    /// Foreground connectivity: four or eight.
    #[arg(long)]
    connectivity: Option<Connectivity>,
    #[arg(long)]
    seed_threshold: Option<f64>,
    #[arg(long)]
    min_seed_area: Option<usize>,
    #[arg(long)]
    min_instance_area: Option<usize>,
    #[arg(long)]
    boundary_suppression: Option<f64>,
    #[arg(long)]
    opening_radius: Option<usize>,
}

#[derive(Debug, Args)]
struct GenTargetsArgs {
    /// Ground-truth instance grid (PGM).
    #[arg(long = "in", value_name = "FILE", conflicts_with = "in_dir", requires_all = ["out_dist", "out_bnd"])]
    input: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    out_dist: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    out_bnd: Option<PathBuf>,
    /// Directory of `gt_<stem>.pgm` files; writes `dist_<stem>.mgf` and
    /// `bnd_<stem>.mgf` to `--out-dir`.
    #[arg(long, value_name = "DIR", requires = "out_dir")]
    in_dir: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    method: SplitMethod,
    /// Semantic label grid (PGM).
    #[arg(long = "in", value_name = "FILE", conflicts_with = "in_dir", requires = "out")]
    input: Option<PathBuf>,
    /// Class id to split.
    #[arg(long = "class", default_value_t = 1)]
    class_id: u16,
    /// Distance field (MGF1), for the geometry method.
    #[arg(long, value_name = "FILE", requires = "bnd")]
    dist: Option<PathBuf>,
    /// Boundary field (MGF1), for the geometry method.
    #[arg(long, value_name = "FILE", requires = "dist")]
    bnd: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Directory of `sem_<stem>.pgm` files; writes `pred_<stem>.pgm` and
    /// `pred_<stem>.scores.json` to `--out-dir`.
    #[arg(long, value_name = "DIR", requires = "out_dir")]
    in_dir: Option<PathBuf>,
    /// Directory holding `dist_<stem>.mgf` and `bnd_<stem>.mgf`.
    #[arg(long, value_name = "DIR")]
    fields_dir: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Directory of `pred_<stem>.pgm` grids with optional score sidecars.
    #[arg(long, value_name = "DIR")]
    pred: PathBuf,
    /// Directory of `gt_<stem>.pgm` grids.
    #[arg(long, value_name = "DIR")]
    gt: PathBuf,
    /// JSON object mapping class ids to names.
    #[arg(long, value_name = "FILE")]
    classes: Option<PathBuf>,
    /// Report path; the report goes to standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    max_dets: usize,
}

#[derive(Debug, Args)]
struct GradCheckArgs {
    /// disentangle, dist, boundary or all.
    #[arg(long, default_value = "all")]
    loss: String,
    /// Random configurations per loss.
    #[arg(long, default_value_t = 50)]
    seeds: usize,
    /// Largest grid side.
    #[arg(long, default_value_t = 16)]
    size: usize,
    /// Largest embedding width.
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Relative error tolerance.
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    num_scenes: usize,
    #[arg(long, default_value_t = 128)]
    height: usize,
    #[arg(long, default_value_t = 128)]
    width: usize,
    /// disc, ellipse or mixed.
    #[arg(long, default_value = "ellipse")]
    shapes: ShapeKind,
    #[arg(long, default_value_t = 2)]
    min_instances: usize,
    #[arg(long, default_value_t = 5)]
    max_instances: usize,
    #[arg(long, default_value_t = 0.5)]
    touch_probability: f64,
    /// Output directory for `sem_<i>.pgm` and `gt_<i>.pgm`.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn parse_loss(name: &str) -> morigeo_core::Result<Vec<LossKind>> {
    if name == "all" {
        Ok(LossKind::ALL.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
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
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::GenTargets(a) => commands::gen_targets(a),
        Command::Split(a) => commands::split(a),
        Command::Eval(a) => commands::eval(a),
        Command::GradCheck(a) => commands::grad_check(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
