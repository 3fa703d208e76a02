//! Gripper models and grasp candidate generation.
//!
//! Grasp poses are expressed in the object frame. The gripper frame puts the
//! grasp point at the origin with the tool z-axis pointing from the object
//! toward the gripper body, so the approach direction is the tool's -z. For
//! parallel jaws the x-axis is the closing direction.

use crate::error::Error;
use crate::geom::{stable_orthonormal, Pose, SurfaceSample};
use crate::model::ObjectModel;
use crate::Result;
use nalgebra::{Rotation3, UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Gripper family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripperKind {
    ParallelJaw,
    Suction,
    Magnetic,
}

/// Contact footprint of a suction cup or magnet pad, in the tool x-y plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Footprint {
    Cylinder { radius: f64 },
    Cuboid { half_x: f64, half_y: f64 },
}

impl Footprint {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Footprint::Cylinder { radius } => x.hypot(y) <= radius,
            Footprint::Cuboid { half_x, half_y } => x.abs() <= half_x && y.abs() <= half_y,
        }
    }

    pub fn bounding_half_extents(&self) -> (f64, f64) {
        match *self {
            Footprint::Cylinder { radius } => (radius, radius),
            Footprint::Cuboid { half_x, half_y } => (half_x, half_y),
        }
    }
}

/// Compliant standoff below which contact-face grippers tolerate material
/// (the cup or pad itself), so their own seal points never register as
/// collisions.
const CONTACT_STANDOFF: f64 = 0.002;

/// How far fingertips reach past the contact plane (z = 0) along -z. The
/// rest of the finger extends toward the palm.
const FINGER_TIP_OVERSHOOT: f64 = 0.005;

/// Geometric gripper description. All lengths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GripperModel {
    /// Two-finger gripper closing along the tool x-axis. Finger boxes are
    /// centered on the grasp plane (z = 0); the palm sits above them.
    ParallelJaw {
        name: String,
        /// Maximum jaw opening (inner face to inner face).
        opening: f64,
        /// Finger box size: thickness (x), width (y), length (z).
        finger_extents: [f64; 3],
        /// Palm box size, centered above the fingers.
        palm_extents: [f64; 3],
    },
    /// Single-point suction cup sealing against a locally flat patch.
    Suction { name: String, footprint: Footprint, body_height: f64 },
    /// Magnet pad; geometrically identical to suction (flat-contact tool).
    Magnetic { name: String, footprint: Footprint, body_height: f64 },
}

impl GripperModel {
    /// An RG2-class two-finger gripper with an 85 mm stroke.
    pub fn default_parallel_jaw(name: impl Into<String>) -> Self {
        GripperModel::ParallelJaw {
            name: name.into(),
            opening: 0.085,
            finger_extents: [0.01, 0.02, 0.04],
            palm_extents: [0.105, 0.03, 0.03],
        }
    }

    pub fn default_suction(name: impl Into<String>) -> Self {
        GripperModel::Suction {
            name: name.into(),
            footprint: Footprint::Cylinder { radius: 0.008 },
            body_height: 0.06,
        }
    }

    pub fn default_magnetic(name: impl Into<String>) -> Self {
        GripperModel::Magnetic {
            name: name.into(),
            footprint: Footprint::Cuboid { half_x: 0.01, half_y: 0.01 },
            body_height: 0.05,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            GripperModel::ParallelJaw { name, .. }
            | GripperModel::Suction { name, .. }
            | GripperModel::Magnetic { name, .. } => name,
        }
    }

    pub fn kind(&self) -> GripperKind {
        match self {
            GripperModel::ParallelJaw { .. } => GripperKind::ParallelJaw,
            GripperModel::Suction { .. } => GripperKind::Suction,
            GripperModel::Magnetic { .. } => GripperKind::Magnetic,
        }
    }

    /// Jaw opening for parallel jaws, zero otherwise.
    pub fn opening(&self) -> f64 {
        match self {
            GripperModel::ParallelJaw { opening, .. } => *opening,
            _ => 0.0,
        }
    }

    /// Finger boxes at jaw width `width`, as (center, half-extents) in the
    /// tool frame. The boxes sit just outside the inner jaw faces and run
    /// from slightly below the contact plane up toward the palm.
    pub fn jaw_boxes_at(&self, width: f64) -> Vec<(Vector3<f64>, Vector3<f64>)> {
        match self {
            GripperModel::ParallelJaw { finger_extents: f, .. } => {
                let half = Vector3::new(f[0] / 2.0, f[1] / 2.0, f[2] / 2.0);
                let cx = width / 2.0 + f[0] / 2.0;
                let cz = f[2] / 2.0 - FINGER_TIP_OVERSHOOT;
                vec![(Vector3::new(cx, 0.0, cz), half), (Vector3::new(-cx, 0.0, cz), half)]
            }
            _ => Vec::new(),
        }
    }

    /// Conservative collision volume of the tool in its own frame: jaws at
    /// full opening plus the palm, or the contact-tool body above its
    /// compliant standoff.
    pub fn collision_boxes(&self) -> Vec<(Vector3<f64>, Vector3<f64>)> {
        match self {
            GripperModel::ParallelJaw { opening, finger_extents: f, palm_extents: p, .. } => {
                let mut boxes = self.jaw_boxes_at(*opening);
                let palm_half = Vector3::new(p[0] / 2.0, p[1] / 2.0, p[2] / 2.0);
                let palm_center =
                    Vector3::new(0.0, 0.0, f[2] - FINGER_TIP_OVERSHOOT + p[2] / 2.0);
                boxes.push((palm_center, palm_half));
                boxes
            }
            GripperModel::Suction { footprint, body_height, .. }
            | GripperModel::Magnetic { footprint, body_height, .. } => {
                let (hx, hy) = footprint.bounding_half_extents();
                let hz = (body_height - CONTACT_STANDOFF) / 2.0;
                vec![(Vector3::new(0.0, 0.0, CONTACT_STANDOFF + hz), Vector3::new(hx, hy, hz))]
            }
        }
    }
}

/// True when any point intrudes into the tool's collision boxes (inflated by
/// `clearance` on every face, boundary counts as contact). `pose` places the
/// tool frame in the frame of `points`.
pub fn check_gripper_collision(
    gripper: &GripperModel,
    pose: &Pose,
    points: &[Vector3<f64>],
    clearance: f64,
) -> bool {
    let boxes = gripper.collision_boxes();
    collides_with_boxes(&boxes, pose, points, clearance)
}

/// Box-set collision query shared by generation-time jaw checks and the
/// public gripper query.
fn collides_with_boxes(
    boxes: &[(Vector3<f64>, Vector3<f64>)],
    pose: &Pose,
    points: &[Vector3<f64>],
    clearance: f64,
) -> bool {
    if boxes.is_empty() || points.is_empty() {
        return false;
    }
    // Cull by a sphere around the tool origin before the exact per-box test.
    let cull = boxes
        .iter()
        .map(|(c, h)| c.norm() + h.norm())
        .fold(0.0f64, f64::max)
        + clearance;
    let cull_sq = cull * cull;
    let inv = pose.inverse();
    for p in points {
        if (p - pose.translation).norm_squared() > cull_sq {
            continue;
        }
        let local = inv.apply(p);
        for (center, half) in boxes {
            let d = local - center;
            if d.x.abs() <= half.x + clearance
                && d.y.abs() <= half.y + clearance
                && d.z.abs() <= half.z + clearance
            {
                return true;
            }
        }
    }
    false
}

/// A single grasp candidate: dense id plus the tool pose in the object frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grasp {
    pub id: u32,
    #[serde(flatten)]
    pub pose: Pose,
}

/// Grasp candidates for one object/gripper combination.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraspSet {
    pub object: String,
    pub gripper: GripperModel,
    pub grasps: Vec<Grasp>,
}

impl GraspSet {
    pub fn len(&self) -> usize {
        self.grasps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grasps.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&Grasp> {
        self.grasps.get(id as usize).filter(|g| g.id == id)
    }
}

/// Parameters for antipodal parallel-jaw candidate generation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct JawGenParams {
    pub seed: u64,
    /// Max angle between a contact normal and the closing line (degrees).
    pub antipodal_tol_deg: f64,
    /// Evenly spaced tool rolls about the closing axis per contact pair.
    pub orientation_steps: u32,
    /// Minimum pair separation as a fraction of the jaw opening.
    pub min_width_fraction: f64,
    /// Extra width per side when closing the jaws for the self-check, so
    /// exact contact points never count as collisions.
    pub contact_gap: f64,
    /// Contact pairs kept (subsampled when more qualify).
    pub max_pairs: usize,
    /// Final candidate cap (subsampled when more survive).
    pub max_candidates: usize,
}

impl Default for JawGenParams {
    fn default() -> Self {
        JawGenParams {
            seed: 0,
            antipodal_tol_deg: 15.0,
            orientation_steps: 18,
            min_width_fraction: 0.2,
            contact_gap: 0.0005,
            max_pairs: 800,
            max_candidates: 3000,
        }
    }
}

/// Parameters for suction/magnet candidate generation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SuctionGenParams {
    pub seed: u64,
    /// Max out-of-plane deviation of sealed surface points.
    pub seal_tolerance: f64,
    /// Max angle between any patch normal and the mean patch normal (deg).
    pub flatness_tol_deg: f64,
    /// Minimum surface samples under the footprint for a stable seal.
    pub min_patch_points: usize,
    /// Height above the seal that must be free of material.
    pub clearance_height: f64,
    pub max_candidates: usize,
}

impl Default for SuctionGenParams {
    fn default() -> Self {
        SuctionGenParams {
            seed: 0,
            seal_tolerance: 0.002,
            flatness_tol_deg: 10.0,
            min_patch_points: 5,
            clearance_height: 0.04,
            max_candidates: 3000,
        }
    }
}

/// Keeps at most `cap` items, subsampling uniformly with `rng` while
/// preserving the original order.
fn cap_in_order<T>(items: Vec<T>, cap: usize, rng: &mut ChaCha12Rng) -> Vec<T> {
    if items.len() <= cap {
        return items;
    }
    let mut keep = rand::seq::index::sample(rng, items.len(), cap).into_vec();
    keep.sort_unstable();
    let mut keep_iter = keep.into_iter().peekable();
    items
        .into_iter()
        .enumerate()
        .filter(|(i, _)| {
            if keep_iter.peek() == Some(i) {
                keep_iter.next();
                true
            } else {
                false
            }
        })
        .map(|(_, item)| item)
        .collect()
}

/// Generates antipodal parallel-jaw grasp candidates on the object's cached
/// surface samples.
///
/// Contact pairs must be separated by `[min_width_fraction, 1) * opening`
/// and have outward normals within the antipodal tolerance of the closing
/// line (each normal opposing its own closing direction). Each kept pair
/// spawns evenly spaced tool rolls about the closing axis; candidates whose
/// fingers (closed to the pair width plus the contact gap) or palm would hit
/// the object are rejected.
pub fn generate_parallel_jaw(
    model: &ObjectModel,
    gripper: &GripperModel,
    params: &JawGenParams,
) -> Result<GraspSet> {
    let opening = match gripper {
        GripperModel::ParallelJaw { opening, .. } => *opening,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "parallel-jaw generation needs a parallel-jaw gripper, got {:?}",
                gripper.kind()
            )))
        }
    };
    let samples = model.samples();
    let cos_tol = params.antipodal_tol_deg.to_radians().cos();
    let min_width = params.min_width_fraction * opening;

    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let delta = samples[j].position - samples[i].position;
            let d = delta.norm();
            if d < min_width || d >= opening {
                continue;
            }
            let u = delta / d;
            // Outward normals must oppose their closing directions: the i
            // side closes along +u, the j side along -u.
            if samples[i].normal.dot(&-u) >= cos_tol && samples[j].normal.dot(&u) >= cos_tol {
                pairs.push((i, j, d));
            }
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let pairs = cap_in_order(pairs, params.max_pairs, &mut rng);

    let points: Vec<Vector3<f64>> = samples.iter().map(|s| s.position).collect();
    let palm_boxes: Vec<_> = gripper
        .collision_boxes()
        .into_iter()
        .skip(2) // the palm; jaws are re-derived at the pair width below
        .collect();

    let mut grasps: Vec<Grasp> = Vec::new();
    for (i, j, d) in pairs {
        let u = (samples[j].position - samples[i].position) / d;
        let center = (samples[i].position + samples[j].position) / 2.0;
        let (a0, b0) = stable_orthonormal(&u);
        let mut boxes = gripper.jaw_boxes_at(d + 2.0 * params.contact_gap);
        boxes.extend(palm_boxes.iter().copied());
        for step in 0..params.orientation_steps {
            let theta = TAU * step as f64 / params.orientation_steps as f64;
            let z = a0 * theta.cos() + b0 * theta.sin();
            let y = z.cross(&u);
            let rot = Rotation3::from_matrix_unchecked(nalgebra::Matrix3::from_columns(&[
                u, y, z,
            ]));
            let pose = Pose::new(UnitQuaternion::from_rotation_matrix(&rot), center);
            if !collides_with_boxes(&boxes, &pose, &points, 0.0) {
                grasps.push(Grasp { id: 0, pose });
            }
        }
    }

    let mut grasps = cap_in_order(grasps, params.max_candidates, &mut rng);
    if grasps.is_empty() {
        return Err(Error::NoFeasibleGrasps);
    }
    for (id, g) in grasps.iter_mut().enumerate() {
        g.id = id as u32;
    }
    Ok(GraspSet { object: model.id().to_string(), gripper: gripper.clone(), grasps })
}

/// Generates suction (or magnet) grasp candidates: one per surface sample
/// whose neighborhood seals flat under the footprint.
///
/// The tool z-axis is the outward surface normal at the anchor. A candidate
/// is kept when the footprint patch has enough support points, every patch
/// point lies within the seal tolerance of the contact plane, no material
/// intrudes into the body clearance above the seal, and all patch normals
/// stay inside the flatness cone around their mean.
pub fn generate_suction(
    model: &ObjectModel,
    gripper: &GripperModel,
    params: &SuctionGenParams,
) -> Result<GraspSet> {
    let footprint = match gripper {
        GripperModel::Suction { footprint, .. } | GripperModel::Magnetic { footprint, .. } => {
            *footprint
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "suction generation needs a contact-face gripper, got {:?}",
                gripper.kind()
            )))
        }
    };
    let samples = model.samples();
    let cos_flat = params.flatness_tol_deg.to_radians().cos();

    let mut grasps: Vec<Grasp> = Vec::new();
    for anchor in samples {
        let z = anchor.normal;
        let (x_axis, y_axis) = stable_orthonormal(&z);
        let rot = Rotation3::from_matrix_unchecked(nalgebra::Matrix3::from_columns(&[
            x_axis, y_axis, z,
        ]));
        let pose = Pose::new(UnitQuaternion::from_rotation_matrix(&rot), anchor.position);
        if suction_seal_ok(&pose, &footprint, samples, params, cos_flat) {
            grasps.push(Grasp { id: 0, pose });
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let mut grasps = cap_in_order(grasps, params.max_candidates, &mut rng);
    if grasps.is_empty() {
        return Err(Error::NoFeasibleGrasps);
    }
    for (id, g) in grasps.iter_mut().enumerate() {
        g.id = id as u32;
    }
    Ok(GraspSet { object: model.id().to_string(), gripper: gripper.clone(), grasps })
}

fn suction_seal_ok(
    pose: &Pose,
    footprint: &Footprint,
    samples: &[SurfaceSample],
    params: &SuctionGenParams,
    cos_flat: f64,
) -> bool {
    let inv = pose.inverse();
    let mut patch_normals: Vec<Vector3<f64>> = Vec::new();
    for s in samples {
        let local = inv.apply(&s.position);
        if !footprint.contains(local.x, local.y) {
            continue;
        }
        if local.z.abs() <= params.seal_tolerance {
            patch_normals.push(s.normal);
        } else if local.z > params.seal_tolerance && local.z <= params.clearance_height {
            // Material above the seal would collide with the tool body.
            return false;
        }
        // Points below the seal plane beyond tolerance belong to other parts
        // of the object (e.g. the far side) and do not block the tool.
    }
    if patch_normals.len() < params.min_patch_points {
        return false;
    }
    let mean: Vector3<f64> = patch_normals.iter().sum::<Vector3<f64>>();
    let norm = mean.norm();
    if norm == 0.0 {
        return false;
    }
    let mean = mean / norm;
    patch_normals.iter().all(|n| n.dot(&mean) >= cos_flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{box_mesh, icosphere};
    use crate::symmetry::SymmetryClass;

    fn box_model() -> ObjectModel {
        let mesh = box_mesh(0.04, 0.04, 0.04).unwrap();
        ObjectModel::from_mesh("box", mesh, SymmetryClass::none()).unwrap()
    }

    #[test]
    fn parallel_jaw_finds_grasps_on_a_box() {
        let model = box_model();
        let gripper = GripperModel::default_parallel_jaw("jaw");
        let params = JawGenParams::default();
        let set = generate_parallel_jaw(&model, &gripper, &params).unwrap();
        assert!(!set.is_empty());
        assert!(set.len() <= params.max_candidates);
        assert_eq!(set.object, "box");
        for (i, g) in set.grasps.iter().enumerate() {
            assert_eq!(g.id, i as u32, "ids must be dense");
            // Grasp centers stay inside the box's bounding sphere.
            assert!(model.bounding().contains(&g.pose.translation, 1e-9));
        }
    }

    #[test]
    fn parallel_jaw_is_deterministic_per_seed() {
        let model = box_model();
        let gripper = GripperModel::default_parallel_jaw("jaw");
        let params = JawGenParams::default();
        let a = generate_parallel_jaw(&model, &gripper, &params).unwrap();
        let b = generate_parallel_jaw(&model, &gripper, &params).unwrap();
        assert_eq!(a.len(), b.len());
        for (ga, gb) in a.grasps.iter().zip(&b.grasps) {
            assert_eq!(ga.pose, gb.pose);
        }
    }

    #[test]
    fn parallel_jaw_rejects_oversized_objects() {
        // A 120 mm sphere: all chords short enough for an 85 mm opening are
        // far from diametral, so no normal pair passes the antipodal cone.
        let mesh = icosphere(0.06, 3).unwrap();
        let model = ObjectModel::from_mesh("ball", mesh, SymmetryClass::revolution()).unwrap();
        let gripper = GripperModel::default_parallel_jaw("jaw");
        let err = generate_parallel_jaw(&model, &gripper, &JawGenParams::default()).unwrap_err();
        assert!(matches!(err, Error::NoFeasibleGrasps));
    }

    #[test]
    fn parallel_jaw_requires_matching_gripper() {
        let model = box_model();
        let gripper = GripperModel::default_suction("cup");
        assert!(generate_parallel_jaw(&model, &gripper, &JawGenParams::default()).is_err());
    }

    #[test]
    fn suction_seals_on_flat_faces() {
        // Box faces are perfectly flat, so face-interior anchors seal while
        // edge-straddling patches fail the flatness cone.
        let model = box_model();
        let gripper = GripperModel::default_suction("cup");
        let set = generate_suction(&model, &gripper, &SuctionGenParams::default()).unwrap();
        assert!(!set.is_empty());
        for g in &set.grasps {
            // Tool z must be the outward normal: one of the face normals.
            let z = g.pose.rotation * Vector3::z();
            let m = z.x.abs().max(z.y.abs()).max(z.z.abs());
            assert!(m > 1.0 - 1e-9, "tool z {z:?} is not a face normal");
        }
    }

    #[test]
    fn suction_rejects_sharp_curvature() {
        // The same sphere with a 30 mm cup: the patch reaches normals tilted
        // far beyond the flatness cone and seal points sag out of tolerance.
        let mesh = icosphere(0.05, 3).unwrap();
        let model = ObjectModel::from_mesh("ball", mesh, SymmetryClass::revolution()).unwrap();
        let gripper = GripperModel::Suction {
            name: "bigcup".into(),
            footprint: Footprint::Cylinder { radius: 0.03 },
            body_height: 0.06,
        };
        let err = generate_suction(&model, &gripper, &SuctionGenParams::default()).unwrap_err();
        assert!(matches!(err, Error::NoFeasibleGrasps));
    }

    #[test]
    fn magnetic_pads_share_the_suction_path() {
        let model = box_model();
        let gripper = GripperModel::default_magnetic("pad");
        let set = generate_suction(&model, &gripper, &SuctionGenParams::default()).unwrap();
        assert!(!set.is_empty());
    }

    #[test]
    fn collision_query_matches_hand_built_cases() {
        let gripper = GripperModel::default_parallel_jaw("jaw");
        let pose = Pose::identity();
        // Inside the +x finger at full opening: x in (42.5, 52.5) mm.
        let hit = vec![Vector3::new(0.047, 0.0, 0.0)];
        assert!(check_gripper_collision(&gripper, &pose, &hit, 0.0));
        // Between the jaws: free.
        let free = vec![Vector3::new(0.0, 0.0, 0.0)];
        assert!(!check_gripper_collision(&gripper, &pose, &free, 0.0));
        // Just outside a finger face: clearance inflation catches it.
        let near = vec![Vector3::new(0.0425 - 0.0005, 0.0, 0.0)];
        assert!(!check_gripper_collision(&gripper, &pose, &near, 0.0));
        assert!(check_gripper_collision(&gripper, &pose, &near, 0.001));
        // In the palm above the fingers (palm spans z in [35, 65] mm).
        let palm = vec![Vector3::new(0.0, 0.0, 0.05)];
        assert!(check_gripper_collision(&gripper, &pose, &palm, 0.0));
        // Below the fingertip overshoot: free.
        assert!(!check_gripper_collision(
            &gripper,
            &pose,
            &[Vector3::new(0.047, 0.0, -0.01)],
            0.0
        ));
        // The same palm point relative to a translated tool.
        let moved = Pose::translation_xyz(1.0, 0.0, 0.0);
        assert!(!check_gripper_collision(&gripper, &moved, &palm, 0.0));
        assert!(check_gripper_collision(
            &gripper,
            &moved,
            &[Vector3::new(1.0, 0.0, 0.05)],
            0.0
        ));
    }

    #[test]
    fn suction_body_spares_its_own_seal_points() {
        let gripper = GripperModel::default_suction("cup");
        // A seal-plane contact point at the tool origin must not collide.
        assert!(!check_gripper_collision(
            &gripper,
            &Pose::identity(),
            &[Vector3::new(0.0, 0.0, 0.0)],
            0.0
        ));
        // Material above the standoff does.
        assert!(check_gripper_collision(
            &gripper,
            &Pose::identity(),
            &[Vector3::new(0.0, 0.0, 0.01)],
            0.0
        ));
    }

    #[test]
    fn grasp_set_serde_layout() {
        let set = GraspSet {
            object: "box".into(),
            gripper: GripperModel::default_parallel_jaw("jaw"),
            grasps: vec![Grasp { id: 0, pose: Pose::identity() }],
        };
        let text = serde_json::to_string(&set).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["object"], "box");
        assert_eq!(value["gripper"]["kind"], "parallel_jaw");
        assert_eq!(value["grasps"][0]["id"], 0);
        assert_eq!(value["grasps"][0]["q"][0], 1.0);
        assert_eq!(value["grasps"][0]["t"].as_array().unwrap().len(), 3);
        let back: GraspSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back.grasps[0].pose, set.grasps[0].pose);
    }

    #[test]
    fn capped_subsets_preserve_order() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let items: Vec<u32> = (0..100).collect();
        let kept = cap_in_order(items, 10, &mut rng);
        assert_eq!(kept.len(), 10);
        assert!(kept.windows(2).all(|w| w[0] < w[1]));
    }
}
