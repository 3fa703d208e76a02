//! End-to-end dataset builder: object loading, grasp family construction,
//! scene synthesis, rendering, trial synthesis, labeling, tensor encoding,
//! and augmentation, all driven by one configuration and one seed.
//!
//! Every stage failure is wrapped with the stage name, outputs are written
//! atomically, and everything downstream of the master seed is
//! deterministic, so reruns produce byte-identical files.

use crate::cluster::{cluster_grasps, GraspDistanceParams};
use crate::codec::{augment_sample, encode_ground_truth, AugmentMode, GridSpec};
use crate::grasp::{
    generate_parallel_jaw, generate_suction, GraspSet, GripperKind, JawGenParams,
    SuctionGenParams,
};
use crate::io::formats::{
    tensor_from_bytes, tensor_to_bytes, write_depth_pfm, write_mask_pgm, write_tensor,
};
use crate::io::{
    save_json, save_trials, stage_rng, stage_seed, ManifestEntry, PipelineConfig,
    SampleManifest,
};
use crate::model::ObjectModel;
use crate::scene::{compute_visibilities, generate_scene, CameraModel, SceneGenParams};
use crate::trials::{scene_labels, synthesize_trial_log, ReachabilityParams, TrialSynthesisParams};
use crate::Result;
use std::path::Path;

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

/// Generates the dense grasp candidate set for a model with the configured
/// gripper, seeding the sampler from the master seed's stage substream.
pub fn generate_candidates(model: &ObjectModel, config: &PipelineConfig) -> Result<GraspSet> {
    stage(
        "generate-grasps",
        match config.gripper.kind() {
            GripperKind::ParallelJaw => generate_parallel_jaw(
                model,
                &config.gripper,
                &JawGenParams {
                    seed: stage_seed(config.seed, "generate-grasps"),
                    ..JawGenParams::default()
                },
            ),
            GripperKind::Suction | GripperKind::Magnetic => generate_suction(
                model,
                &config.gripper,
                &SuctionGenParams {
                    seed: stage_seed(config.seed, "generate-grasps"),
                    ..SuctionGenParams::default()
                },
            ),
        },
    )
}

/// Builds the grasp family for a model: generate candidates with the
/// configured gripper, then thin them to `size` representatives.
pub fn build_family(model: &ObjectModel, config: &PipelineConfig) -> Result<GraspSet> {
    let candidates = generate_candidates(model, config)?;
    stage(
        "cluster-grasps",
        cluster_grasps(&candidates, config.family.size, &GraspDistanceParams::for_model(model)),
    )
}

/// Runs the full dataset pipeline. Mesh paths in the configuration resolve
/// against `base_dir`; all outputs land under `out_dir`. Returns the
/// manifest that was also written to `out_dir/manifest.json`.
pub fn run_pipeline(
    config: &PipelineConfig,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<SampleManifest> {
    let model = stage("load-object", config.object.load_model(base_dir))?;
    let family = build_family(&model, config)?;
    let grasp_set_name = "grasps.json".to_string();
    stage("cluster-grasps", save_json(&out_dir.join(&grasp_set_name), &family))?;

    let camera = CameraModel::top_down(&config.bin);
    let spec = stage(
        "encode",
        GridSpec::new(config.grid, family.len() as u32, config.object.symmetry, camera),
    )?;
    let scene_params = SceneGenParams {
        count: config.scenes.instances,
        max_attempts: config.scenes.max_attempts,
    };
    let trial_params = TrialSynthesisParams {
        hook_capable: config.object.hook_capable,
        reachability: ReachabilityParams::default(),
    };

    let mut entries = Vec::with_capacity(config.scenes.count as usize);
    for i in 0..config.scenes.count {
        let mut rng = stage_rng(config.seed, &format!("scene-{i}"));
        let mut scene = stage(
            "generate-scenes",
            generate_scene(i, &model, &config.bin, &camera, &scene_params, &mut rng),
        )?;
        let raster = stage("render", compute_visibilities(&mut scene, &model))?;

        let stem = format!("scene_{i:04}");
        let entry = ManifestEntry {
            scene: i,
            annotation: format!("{stem}_scene.json"),
            depth: format!("{stem}_depth.pfm"),
            mask: format!("{stem}_mask.pgm"),
            trials: format!("{stem}_trials.jsonl"),
            labels: format!("{stem}_labels.json"),
            tensor: format!("{stem}.pqt"),
            augmented: Vec::new(),
        };
        stage("render", write_depth_pfm(&out_dir.join(&entry.depth), &raster))?;
        stage("render", write_mask_pgm(&out_dir.join(&entry.mask), &raster))?;
        stage("annotate", save_json(&out_dir.join(&entry.annotation), &scene))?;

        let records = synthesize_trial_log(&scene, &model, &family, &trial_params);
        stage("trials", save_trials(&out_dir.join(&entry.trials), &records))?;
        let labels = stage("labels", scene_labels(&records, &scene, family.len() as u32))?;
        stage("labels", save_json(&out_dir.join(&entry.labels), &labels))?;

        let tensor = stage("encode", encode_ground_truth(&scene, &labels, &spec))?;
        stage("encode", write_tensor(&out_dir.join(&entry.tensor), &tensor))?;

        let mut entry = entry;
        if config.augment.rotations || config.augment.mirror {
            // Augment the tensor as consumers will read it — after container
            // quantization — so every augmented file can be regenerated
            // byte-for-byte from the published base file alone.
            let bytes = stage("augment", tensor_to_bytes(&tensor))?;
            let tensor = stage("augment", tensor_from_bytes(&bytes))?;
            if config.augment.rotations {
                for m in 1..=3u8 {
                    let name = format!("{stem}_rot{}.pqt", u32::from(m) * 90);
                    let aug = stage(
                        "augment",
                        augment_sample(&tensor, AugmentMode::RotateZ { quarter_turns: m }),
                    )?;
                    stage("augment", write_tensor(&out_dir.join(&name), &aug))?;
                    entry.augmented.push(name);
                }
            }
            if config.augment.mirror {
                let name = format!("{stem}_mirror.pqt");
                let aug = stage("augment", augment_sample(&tensor, AugmentMode::Mirror))?;
                stage("augment", write_tensor(&out_dir.join(&name), &aug))?;
                entry.augmented.push(name);
            }
        }
        entries.push(entry);
    }

    let manifest = SampleManifest {
        object: config.object.id.clone(),
        seed: config.seed,
        grid: config.grid,
        family_size: family.len(),
        grasp_set: grasp_set_name,
        scenes: entries,
    };
    stage("manifest", save_json(&out_dir.join("manifest.json"), &manifest))?;
    Ok(manifest)
}
