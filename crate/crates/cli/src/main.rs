//! Command-line driver for the dataset pipeline.
//!
//! Every stage is runnable standalone on intermediate files for
//! debuggability, and `pipeline` chains them all. Exit codes: 0 success,
//! 1 usage error, 2 data error, 3 internal invariant violation.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use graspgrid::cluster::{cluster_grasps, GraspDistanceParams};
use graspgrid::codec::{augment_sample, encode_ground_truth, AugmentMode, GridSpec};
use graspgrid::io::formats::{read_tensor, write_depth_pfm, write_mask_pgm, write_tensor};
use graspgrid::io::{
    load_config, load_json, load_trials, save_json, save_trials, stage_rng, PipelineConfig,
};
use graspgrid::learn::{compute_loss, evaluate, loss_gradient, policy_select, EvalThresholds};
use graspgrid::pipeline::{generate_candidates, run_pipeline};
use graspgrid::scene::{compute_visibilities, generate_scene, SceneGenParams};
use graspgrid::trials::{
    scene_labels, synthesize_trial_log, InstanceLabels, ReachabilityParams, TrialSynthesisParams,
};
use graspgrid::{GraspSet, LossWeights, ObjectModel, Result, SceneSample};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Surface points used when a command needs the symmetry-aware pose metric.
const POSE_CONTEXT_POINTS: usize = 256;

#[derive(Parser)]
#[command(
    name = "graspgrid",
    version,
    about = "Grasp families, synthetic bin scenes, and grid ground-truth tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage end to end and write a dataset with a manifest.
    Pipeline {
        /// Pipeline configuration (TOML; mesh paths resolve against its directory).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for all dataset files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the dense grasp candidate set for the configured object.
    GenGrasps {
        #[arg(long)]
        config: PathBuf,
        /// Candidate set output (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Thin a candidate set to k representative grasps (k-medoids).
    ClusterGrasps {
        /// Configuration naming the object (sets the grasp-distance scale).
        #[arg(long)]
        config: PathBuf,
        /// Number of representatives; clamped to the candidate count.
        #[arg(long, default_value_t = 500)]
        k: usize,
        /// Ignored: clustering is deterministic. Accepted so invocations may
        /// pin a seed uniformly across subcommands.
        #[arg(long)]
        seed: Option<u64>,
        /// Candidate grasp set (JSON).
        input: PathBuf,
        /// Clustered family output (JSON); medoids keep their candidate ids.
        output: PathBuf,
    },
    /// Generate cluttered scenes (annotations only; no rendering).
    GenScenes {
        #[arg(long)]
        config: PathBuf,
        /// Directory receiving scene_NNNN_scene.json files.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render a scene to depth + mask and fill per-instance visibilities.
    Render {
        #[arg(long)]
        config: PathBuf,
        /// Scene annotation (JSON) to render.
        #[arg(long)]
        scene: PathBuf,
        /// Depth image output (PFM).
        #[arg(long)]
        depth: PathBuf,
        /// Instance mask output (16-bit PGM, instance id + 1).
        #[arg(long)]
        mask: PathBuf,
        /// Optional path for the scene annotation updated with visibilities.
        #[arg(long)]
        annotated: Option<PathBuf>,
    },
    /// Synthesize a pick trial log for a scene and grasp family.
    Trials {
        #[arg(long)]
        config: PathBuf,
        /// Scene annotation (JSON), ideally visibility-annotated.
        #[arg(long)]
        scene: PathBuf,
        /// Grasp family (JSON).
        #[arg(long)]
        grasps: PathBuf,
        /// Trial log output (JSON lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute per-instance graspability and grasp-success labels from a log.
    Metrics {
        /// Scene annotation (JSON).
        #[arg(long)]
        scene: PathBuf,
        /// Trial log (JSON lines).
        #[arg(long)]
        trials: PathBuf,
        /// Grasp family (JSON; fixes the per-instance grasp count).
        #[arg(long)]
        grasps: PathBuf,
        /// Labels output (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a labeled scene into the grid ground-truth tensor.
    Encode {
        /// Configuration (grid size and object symmetry).
        #[arg(long)]
        config: PathBuf,
        /// Visibility-annotated scene (JSON).
        #[arg(long)]
        scene: PathBuf,
        /// Per-instance labels (JSON).
        #[arg(long)]
        labels: PathBuf,
        /// Grasp family (JSON).
        #[arg(long)]
        grasps: PathBuf,
        /// Tensor output (.pqt).
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a grid-exact augmentation to a tensor file.
    Augment {
        /// Input tensor (.pqt; self-describing).
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long, value_enum)]
        mode: AugmentArg,
        /// Augmented tensor output (.pqt).
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the multi-task loss of a prediction against a target.
    LossEval {
        /// Prediction tensor (.pqt).
        #[arg(long)]
        pred: PathBuf,
        /// Target tensor (.pqt).
        #[arg(long)]
        target: PathBuf,
        /// Optional output (JSON) for the analytic gradient.
        #[arg(long)]
        gradient: Option<PathBuf>,
    },
    /// Pick the best cell/grasp pair from a tensor.
    Policy {
        /// Tensor (.pqt) to select from.
        #[arg(long)]
        tensor: PathBuf,
    },
    /// Score predicted tensors against targets (detection and pose metrics).
    Evaluate {
        /// Configuration naming the object (sets the pose metric).
        #[arg(long)]
        config: PathBuf,
        /// Prediction tensors, one per scene, paired with targets in order.
        #[arg(long, num_args = 1.., required = true)]
        pred: Vec<PathBuf>,
        /// Target tensors, one per scene.
        #[arg(long, num_args = 1.., required = true)]
        target: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AugmentArg {
    /// Quarter turn about the camera axis.
    Rot90,
    /// Half turn about the camera axis.
    Rot180,
    /// Three-quarter turn about the camera axis.
    Rot270,
    /// Left-right mirror (needs a plane-symmetric object).
    Mirror,
}

impl From<AugmentArg> for AugmentMode {
    fn from(a: AugmentArg) -> AugmentMode {
        match a {
            AugmentArg::Rot90 => AugmentMode::RotateZ { quarter_turns: 1 },
            AugmentArg::Rot180 => AugmentMode::RotateZ { quarter_turns: 2 },
            AugmentArg::Rot270 => AugmentMode::RotateZ { quarter_turns: 3 },
            AugmentArg::Mirror => AugmentMode::Mirror,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(if err.is_internal() { 3 } else { 2 });
    }
}

/// Loads the configuration and the object model it describes; mesh paths
/// resolve against the configuration file's directory.
fn load_setup(config_path: &Path) -> Result<(PipelineConfig, ObjectModel)> {
    let config = load_config(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let model = config.object.load_model(base)?;
    Ok((config, model))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Pipeline { config, out } => {
            let cfg = load_config(&config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let manifest = run_pipeline(&cfg, base, &out)?;
            println!(
                "wrote {} scenes for object '{}' to {}",
                manifest.scenes.len(),
                manifest.object,
                out.display()
            );
        }
        Command::GenGrasps { config, out } => {
            let (cfg, model) = load_setup(&config)?;
            let candidates = generate_candidates(&model, &cfg)?;
            save_json(&out, &candidates)?;
            println!("wrote {} grasp candidates to {}", candidates.len(), out.display());
        }
        Command::ClusterGrasps { config, k, seed: _, input, output } => {
            let (_, model) = load_setup(&config)?;
            let candidates: GraspSet = load_json(&input)?;
            if k > candidates.len() {
                eprintln!(
                    "warning: {} candidates < k = {k}; keeping all of them",
                    candidates.len()
                );
            }
            let family = cluster_grasps(&candidates, k, &GraspDistanceParams::for_model(&model))?;
            save_json(&output, &family)?;
            println!("wrote {} representative grasps to {}", family.len(), output.display());
        }
        Command::GenScenes { config, out_dir } => {
            let (cfg, model) = load_setup(&config)?;
            let camera = graspgrid::CameraModel::top_down(&cfg.bin);
            let params = SceneGenParams {
                count: cfg.scenes.instances,
                max_attempts: cfg.scenes.max_attempts,
            };
            for i in 0..cfg.scenes.count {
                let mut rng = stage_rng(cfg.seed, &format!("scene-{i}"));
                let scene = generate_scene(i, &model, &cfg.bin, &camera, &params, &mut rng)?;
                save_json(&out_dir.join(format!("scene_{i:04}_scene.json")), &scene)?;
            }
            println!("wrote {} scenes to {}", cfg.scenes.count, out_dir.display());
        }
        Command::Render { config, scene, depth, mask, annotated } => {
            let (_, model) = load_setup(&config)?;
            let mut sample: SceneSample = load_json(&scene)?;
            let raster = compute_visibilities(&mut sample, &model)?;
            write_depth_pfm(&depth, &raster)?;
            write_mask_pgm(&mask, &raster)?;
            if let Some(path) = annotated {
                save_json(&path, &sample)?;
            }
            println!("wrote {} and {}", depth.display(), mask.display());
        }
        Command::Trials { config, scene, grasps, out } => {
            let (cfg, model) = load_setup(&config)?;
            let sample: SceneSample = load_json(&scene)?;
            let family: GraspSet = load_json(&grasps)?;
            let params = TrialSynthesisParams {
                hook_capable: cfg.object.hook_capable,
                reachability: ReachabilityParams::default(),
            };
            let records = synthesize_trial_log(&sample, &model, &family, &params);
            save_trials(&out, &records)?;
            println!("wrote {} trial records to {}", records.len(), out.display());
        }
        Command::Metrics { scene, trials, grasps, out } => {
            let sample: SceneSample = load_json(&scene)?;
            let records = load_trials(&trials)?;
            let family: GraspSet = load_json(&grasps)?;
            let labels = scene_labels(&records, &sample, family.len() as u32)?;
            save_json(&out, &labels)?;
            println!("wrote labels for {} instances to {}", labels.len(), out.display());
        }
        Command::Encode { config, scene, labels, grasps, out } => {
            let cfg = load_config(&config)?;
            let sample: SceneSample = load_json(&scene)?;
            let label_map: BTreeMap<u32, InstanceLabels> = load_json(&labels)?;
            let family: GraspSet = load_json(&grasps)?;
            let spec =
                GridSpec::new(cfg.grid, family.len() as u32, cfg.object.symmetry, sample.camera)?;
            let tensor = encode_ground_truth(&sample, &label_map, &spec)?;
            write_tensor(&out, &tensor)?;
            println!("wrote {}x{}x{} tensor to {}", spec.s, spec.s, spec.channels(), out.display());
        }
        Command::Augment { tensor, mode, out } => {
            let input = read_tensor(&tensor)?;
            let augmented = augment_sample(&input, mode.into())?;
            write_tensor(&out, &augmented)?;
            println!("wrote {}", out.display());
        }
        Command::LossEval { pred, target, gradient } => {
            let p = read_tensor(&pred)?;
            let t = read_tensor(&target)?;
            let weights = LossWeights::default();
            let loss = compute_loss(&p, &t, &weights)?;
            if let Some(path) = gradient {
                let grad = loss_gradient(&p, &t, &weights)?;
                save_json(&path, &grad)?;
            }
            println!("{}", serde_json::json!({ "loss": loss }));
        }
        Command::Policy { tensor } => {
            let t = read_tensor(&tensor)?;
            let choice = policy_select(&t);
            println!("{}", serde_json::to_string(&choice)?);
        }
        Command::Evaluate { config, pred, target } => {
            let (_, model) = load_setup(&config)?;
            let context = model.pose_context(POSE_CONTEXT_POINTS)?;
            let preds = pred.iter().map(|p| read_tensor(p)).collect::<Result<Vec<_>>>()?;
            let targets = target.iter().map(|p| read_tensor(p)).collect::<Result<Vec<_>>>()?;
            let report = evaluate(&preds, &targets, &context, &EvalThresholds::default())?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}
