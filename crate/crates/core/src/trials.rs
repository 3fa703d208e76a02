//! Pick-trial records and the graspability metrics derived from them.
//!
//! A trial log holds one record per (scene, instance, grasp). Outcomes form
//! a ladder: a grasp can only be lifted if it was collision-free, and only
//! placed if it was lifted. `None` marks outcomes that were never evaluated
//! (e.g. lift results for unreachable grasps).
//!
//! Three per-instance scores summarize a complete log:
//!
//! * **accessibility**: fraction of the grasp family that is collision-free;
//! * **unrest**: `1 - min(total neighbor displacement, 1)`, taken from the
//!   executed record (worst one if several), else the worst collision-free
//!   estimate, else zero;
//! * **entanglement**: zero if any record observed entanglement, else one.

use crate::error::Error;
use crate::grasp::{check_gripper_collision, GraspSet};
use crate::model::ObjectModel;
use crate::scene::{instance_sphere_center, SceneSample};
use crate::Result;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Outcome of one grasp attempt (real or synthesized) on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scene: u64,
    pub instance: u32,
    pub grasp: u32,
    /// The tool reached the grasp pose without hitting the bin or neighbors.
    pub collision_free: bool,
    /// The object left the clutter when lifted; `None` if never attempted.
    pub lifted: Option<bool>,
    /// The object was set down in the target zone; `None` if never attempted.
    pub placed: Option<bool>,
    /// Neighbors got dragged along or hooked; `None` if never attempted.
    pub entangled: Option<bool>,
    /// This record comes from a physically executed pick (displacements are
    /// measurements rather than estimates).
    pub executed: bool,
    /// Displacement magnitudes of disturbed neighbors, in meters.
    pub displacements: Vec<f64>,
}

impl TrialRecord {
    /// Checks the outcome ladder: placed implies lifted implies
    /// collision-free.
    pub fn check_ladder(&self) -> Result<()> {
        let lifted = self.lifted == Some(true);
        let placed = self.placed == Some(true);
        if (placed && !lifted) || (lifted && !self.collision_free) {
            return Err(Error::OutcomeLadder {
                scene: self.scene,
                instance: self.instance,
                grasp: self.grasp,
            });
        }
        Ok(())
    }
}

/// The three per-instance graspability scores, each in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspabilityTriple {
    pub accessibility: f64,
    pub unrest: f64,
    pub entanglement: f64,
}

impl GraspabilityTriple {
    pub fn product(&self) -> f64 {
        self.accessibility * self.unrest * self.entanglement
    }

    /// Sum of the three scores (the basis of the pose-loss weighting).
    pub fn sum(&self) -> f64 {
        self.accessibility + self.unrest + self.entanglement
    }
}

/// Ground-truth labels for one instance: its graspability triple and the
/// per-family-grasp success flags (placed without incident).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceLabels {
    pub graspability: GraspabilityTriple,
    pub grasp_success: Vec<bool>,
}

/// Computes the graspability triple for one instance from a complete,
/// ladder-consistent set of records covering grasps `0..grasp_count`.
pub fn compute_graspabilities(
    records: &[TrialRecord],
    scene: u64,
    instance: u32,
    grasp_count: u32,
) -> Result<GraspabilityTriple> {
    let by_grasp = collect_instance_records(records, scene, instance, grasp_count)?;

    let free = by_grasp.values().filter(|r| r.collision_free).count();
    let accessibility = free as f64 / grasp_count as f64;

    let total = |r: &TrialRecord| r.displacements.iter().sum::<f64>();
    let worst_executed = by_grasp
        .values()
        .filter(|r| r.executed)
        .map(|r| total(r))
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_free = by_grasp
        .values()
        .filter(|r| r.collision_free)
        .map(|r| total(r))
        .fold(f64::NEG_INFINITY, f64::max);
    let unrest = if worst_executed > f64::NEG_INFINITY {
        1.0 - worst_executed.min(1.0)
    } else if worst_free > f64::NEG_INFINITY {
        1.0 - worst_free.min(1.0)
    } else {
        0.0
    };

    let entangled = by_grasp.values().any(|r| r.entangled == Some(true));
    let entanglement = if entangled { 0.0 } else { 1.0 };

    Ok(GraspabilityTriple { accessibility, unrest, entanglement })
}

/// Labels (triple plus per-grasp success) for every instance of a scene.
pub fn scene_labels(
    records: &[TrialRecord],
    scene: &SceneSample,
    grasp_count: u32,
) -> Result<BTreeMap<u32, InstanceLabels>> {
    let known: Vec<u32> = scene.instances.iter().map(|i| i.id).collect();
    for r in records.iter().filter(|r| r.scene == scene.id) {
        if !known.contains(&r.instance) {
            return Err(Error::UnknownInstance(r.instance));
        }
    }
    let mut out = BTreeMap::new();
    for &id in &known {
        let triple = compute_graspabilities(records, scene.id, id, grasp_count)?;
        let by_grasp = collect_instance_records(records, scene.id, id, grasp_count)?;
        let grasp_success =
            (0..grasp_count).map(|g| by_grasp[&g].placed == Some(true)).collect();
        out.insert(id, InstanceLabels { graspability: triple, grasp_success });
    }
    Ok(out)
}

/// Gathers the records of one instance keyed by grasp id, enforcing
/// exactly-once coverage of `0..grasp_count` and the outcome ladder.
fn collect_instance_records(
    records: &[TrialRecord],
    scene: u64,
    instance: u32,
    grasp_count: u32,
) -> Result<BTreeMap<u32, &TrialRecord>> {
    let mut by_grasp: BTreeMap<u32, &TrialRecord> = BTreeMap::new();
    for r in records {
        if r.scene != scene || r.instance != instance {
            continue;
        }
        r.check_ladder()?;
        if by_grasp.insert(r.grasp, r).is_some() {
            return Err(Error::DuplicateTrialRecord { scene, instance, grasp: r.grasp });
        }
    }
    for g in 0..grasp_count {
        if !by_grasp.contains_key(&g) {
            return Err(Error::IncompleteTrialLog { scene, instance, grasp: g });
        }
    }
    Ok(by_grasp)
}

/// Collision-query knobs for reachability sweeps.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ReachabilityParams {
    /// Safety margin added around every tool face.
    pub clearance: f64,
    /// Grid spacing for the bin floor/wall point sampling.
    pub wall_spacing: f64,
}

impl Default for ReachabilityParams {
    fn default() -> Self {
        ReachabilityParams { clearance: 0.002, wall_spacing: 0.005 }
    }
}

/// Sweeps every (instance, grasp) pair and reports which tool placements
/// avoid the bin and all *other* instances. The grasped instance itself is
/// exempt: candidate generation already verified the tool against it.
pub fn evaluate_reachability(
    scene: &SceneSample,
    model: &ObjectModel,
    grasps: &GraspSet,
    params: &ReachabilityParams,
) -> Vec<Vec<bool>> {
    let bin_points = scene.bin.collision_points(params.wall_spacing);
    let world_samples: Vec<Vec<Vector3<f64>>> = scene
        .instances
        .iter()
        .map(|inst| model.samples().iter().map(|s| inst.pose.apply(&s.position)).collect())
        .collect();
    let mut out = Vec::with_capacity(scene.instances.len());
    for (idx, inst) in scene.instances.iter().enumerate() {
        let mut environment = bin_points.clone();
        for (j, pts) in world_samples.iter().enumerate() {
            if j != idx {
                environment.extend_from_slice(pts);
            }
        }
        let row = grasps
            .grasps
            .iter()
            .map(|g| {
                let world_pose = inst.pose.compose(&g.pose);
                !check_gripper_collision(
                    &grasps.gripper,
                    &world_pose,
                    &environment,
                    params.clearance,
                )
            })
            .collect();
        out.push(row);
    }
    out
}

/// Knobs for the synthetic trial log.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[derive(Default)]
pub struct TrialSynthesisParams {
    /// Whether the object shape can hook onto neighbors (drives the
    /// entanglement outcome).
    pub hook_capable: bool,
    pub reachability: ReachabilityParams,
}


/// Neighbor proximity factor (times the summed radii) below which
/// hook-capable objects count as entangled.
const ENTANGLE_REACH: f64 = 1.25;

/// Neighbor proximity factor (times the summed radii) within which an
/// executed pick nudges neighbors.
const DISTURB_REACH: f64 = 1.5;

/// Displacement magnitude scale for disturbed neighbors.
const DISTURB_SCALE: f64 = 0.02;

/// Produces a complete synthetic trial log for one scene.
///
/// Deterministic proxies replace real robot rollouts: reachability is the
/// box-collision sweep; a lift succeeds when no neighbor's bounding sphere
/// overhangs the instance; a place additionally needs at least half the
/// instance visible; entanglement triggers for hook-capable objects with a
/// near-contact neighbor. The first collision-free grasp per instance is
/// marked executed, and neighbor displacements fall off linearly with
/// distance.
pub fn synthesize_trial_log(
    scene: &SceneSample,
    model: &ObjectModel,
    grasps: &GraspSet,
    params: &TrialSynthesisParams,
) -> Vec<TrialRecord> {
    let reach = evaluate_reachability(scene, model, grasps, &params.reachability);
    let r = model.bounding().radius;
    let centers: Vec<Vector3<f64>> =
        scene.instances.iter().map(|i| instance_sphere_center(model, i)).collect();

    let mut records = Vec::with_capacity(scene.instances.len() * grasps.len());
    for (idx, inst) in scene.instances.iter().enumerate() {
        let c = centers[idx];
        let blocked = centers.iter().enumerate().any(|(j, cj)| {
            j != idx && (cj.x - c.x).hypot(cj.y - c.y) <= 2.0 * r && cj.z + r > c.z + r
        });
        let near_contact = centers
            .iter()
            .enumerate()
            .any(|(j, cj)| j != idx && (cj - c).norm() <= 2.0 * r * ENTANGLE_REACH);
        let displacements: Vec<f64> = centers
            .iter()
            .enumerate()
            .filter(|&(j, cj)| j != idx && (cj - c).norm() <= 2.0 * r * DISTURB_REACH)
            .map(|(_, cj)| {
                let d = (cj - c).norm();
                DISTURB_SCALE * (1.0 - d / (2.0 * r * DISTURB_REACH))
            })
            .collect();
        let mut executed_one = false;
        for (gid, &free) in reach[idx].iter().enumerate() {
            let record = if free {
                let lifted = !blocked;
                let placed = lifted && inst.visibility >= 0.5;
                let executed = !executed_one;
                executed_one = true;
                TrialRecord {
                    scene: scene.id,
                    instance: inst.id,
                    grasp: gid as u32,
                    collision_free: true,
                    lifted: Some(lifted),
                    placed: Some(placed),
                    entangled: Some(params.hook_capable && near_contact),
                    executed,
                    displacements: displacements.clone(),
                }
            } else {
                TrialRecord {
                    scene: scene.id,
                    instance: inst.id,
                    grasp: gid as u32,
                    collision_free: false,
                    lifted: None,
                    placed: None,
                    entangled: None,
                    executed: false,
                    displacements: Vec::new(),
                }
            };
            records.push(record);
        }
    }
    records
}
