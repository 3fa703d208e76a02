//! Grid ground-truth tensor: encoding scenes into an S x S x C target,
//! decoding object estimates back out, and grid-exact augmentation.
//!
//! Each grid cell describes at most one object instance (the most visible
//! one whose projected origin falls inside the cell):
//!
//! | channel        | meaning                                             |
//! |----------------|-----------------------------------------------------|
//! | `p`            | cell holds an instance (0/1 in ground truth)        |
//! | `v`            | visibility fraction                                 |
//! | `x`, `y`       | projected origin, fractional within the cell        |
//! | `z`            | depth, normalized over the camera window            |
//! | `phi1`, `phi2` | Z-Y-Z Euler angles of the canonical camera-frame    |
//! |                | rotation, normalized by 2 pi                        |
//! | `phi3`         | final Euler angle normalized by its symmetry-folded |
//! |                | range; omitted for revolution objects               |
//! | `ga, gu, ge`   | graspability triple                                 |
//! | `s_1..s_J`     | per-family-grasp success flags                      |
//!
//! All values live in `[0, 1]`. Cell-local fractions are nudged into the
//! open interval so a decoded point never lands exactly on a cell edge.

use crate::error::Error;
use crate::geom::{euler_from_rotation, rotation_from_euler, EulerTriple, Pose};
use crate::scene::{matrix_rotation, CameraModel, SceneSample};
use crate::symmetry::{canonicalize_pose, SymmetryClass};
use crate::trials::{GraspabilityTriple, InstanceLabels};
use crate::Result;
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Margin keeping encoded fractions strictly inside the open unit interval.
const FRACTION_NUDGE: f64 = 1e-7;

/// Shape and conventions of a grid tensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Grid side length (the image is split into `s x s` cells).
    pub s: u32,
    /// Family size J (number of per-grasp success channels).
    pub grasp_count: u32,
    /// Object symmetry; controls the Euler channel layout.
    pub symmetry: SymmetryClass,
    /// Camera the tensor is expressed against.
    pub camera: CameraModel,
}

impl GridSpec {
    pub fn new(
        s: u32,
        grasp_count: u32,
        symmetry: SymmetryClass,
        camera: CameraModel,
    ) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidArgument("grid size must be positive".into()));
        }
        if grasp_count == 0 {
            return Err(Error::InvalidArgument("grasp family must be non-empty".into()));
        }
        Ok(GridSpec { s, grasp_count, symmetry, camera })
    }

    pub fn layout(&self) -> ChannelLayout {
        ChannelLayout {
            has_phi3: !self.symmetry.is_revolution(),
            grasp_count: self.grasp_count,
        }
    }

    /// Total channel count `C`.
    pub fn channels(&self) -> u32 {
        self.layout().channels()
    }

    /// Fold range of the final Euler angle under the cyclic order.
    pub fn phi3_range(&self) -> f64 {
        TAU / self.symmetry.cyclic_order() as f64
    }
}

/// Channel index helper; all fixed channels precede the `J` grasp channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelLayout {
    pub has_phi3: bool,
    pub grasp_count: u32,
}

impl ChannelLayout {
    pub const P: usize = 0;
    pub const V: usize = 1;
    pub const X: usize = 2;
    pub const Y: usize = 3;
    pub const Z: usize = 4;
    pub const PHI1: usize = 5;
    pub const PHI2: usize = 6;

    pub fn phi3(&self) -> Option<usize> {
        self.has_phi3.then_some(7)
    }

    pub fn ga(&self) -> usize {
        if self.has_phi3 {
            8
        } else {
            7
        }
    }

    pub fn gu(&self) -> usize {
        self.ga() + 1
    }

    pub fn ge(&self) -> usize {
        self.ga() + 2
    }

    /// Index of the first grasp-success channel.
    pub fn grasp_base(&self) -> usize {
        self.ga() + 3
    }

    pub fn grasp(&self, j: u32) -> usize {
        self.grasp_base() + j as usize
    }

    pub fn channels(&self) -> u32 {
        self.grasp_base() as u32 + self.grasp_count
    }
}

/// Dense `S x S x C` ground-truth (or prediction) tensor, row-major with
/// channels last.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthTensor {
    pub spec: GridSpec,
    /// `(row * S + col) * C + channel`.
    pub data: Vec<f64>,
    /// False on augmented tensors whose per-grasp success channels were
    /// dropped (zeroed) because the trial outcomes no longer apply.
    pub grasp_labels_valid: bool,
}

impl GroundTruthTensor {
    pub fn zeros(spec: GridSpec) -> Self {
        let n = spec.s as usize * spec.s as usize * spec.channels() as usize;
        GroundTruthTensor { spec, data: vec![0.0; n], grasp_labels_valid: true }
    }

    #[inline]
    pub fn index(&self, row: u32, col: u32, channel: usize) -> usize {
        (row as usize * self.spec.s as usize + col as usize) * self.spec.channels() as usize
            + channel
    }

    pub fn get(&self, row: u32, col: u32, channel: usize) -> f64 {
        self.data[self.index(row, col, channel)]
    }

    pub fn set(&mut self, row: u32, col: u32, channel: usize, value: f64) {
        let i = self.index(row, col, channel);
        self.data[i] = value;
    }

    /// Slice of all channels of one cell.
    pub fn cell(&self, row: u32, col: u32) -> &[f64] {
        let c = self.spec.channels() as usize;
        let start = (row as usize * self.spec.s as usize + col as usize) * c;
        &self.data[start..start + c]
    }

    fn cell_mut(&mut self, row: u32, col: u32) -> &mut [f64] {
        let c = self.spec.channels() as usize;
        let start = (row as usize * self.spec.s as usize + col as usize) * c;
        &mut self.data[start..start + c]
    }
}

/// Everything decoded from one occupied grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectEstimate {
    pub row: u32,
    pub col: u32,
    pub presence: f64,
    pub visibility: f64,
    /// Canonicalized camera-frame pose.
    pub pose_camera: Pose,
    pub graspability: GraspabilityTriple,
    /// Per-family-grasp success scores.
    pub grasp_scores: Vec<f64>,
}

impl ObjectEstimate {
    pub fn pose_world(&self, camera: &CameraModel) -> Pose {
        camera.pose.compose(&self.pose_camera)
    }
}

/// Encodes a scene (with visibilities filled in) and its per-instance labels
/// into the ground-truth tensor.
///
/// Instances whose projected origin falls outside the image or outside the
/// camera depth window are skipped. When several instances share a cell the
/// most visible one wins; exact ties go to the lower instance id.
pub fn encode_ground_truth(
    scene: &SceneSample,
    labels: &BTreeMap<u32, InstanceLabels>,
    spec: &GridSpec,
) -> Result<GroundTruthTensor> {
    if scene.camera != spec.camera {
        return Err(Error::InvalidArgument(
            "grid spec and scene disagree about the camera".into(),
        ));
    }
    let layout = spec.layout();
    let cam_inv = spec.camera.pose.inverse();
    let mut tensor = GroundTruthTensor::zeros(*spec);
    // Winning (visibility, id) per occupied cell.
    let mut winners: BTreeMap<(u32, u32), (f64, u32)> = BTreeMap::new();

    for inst in &scene.instances {
        let cam_pose = cam_inv.compose(&inst.pose);
        let canon = canonicalize_pose(&cam_pose, &spec.symmetry);
        let t = canon.translation;
        if t.z < spec.camera.near || t.z > spec.camera.far {
            continue;
        }
        let u = spec.camera.fx * t.x / t.z + spec.camera.cx;
        let v = spec.camera.fy * t.y / t.z + spec.camera.cy;
        if u < 0.0 || u >= spec.camera.width as f64 || v < 0.0 || v >= spec.camera.height as f64
        {
            continue;
        }
        let s = spec.s as f64;
        let fu = u * s / spec.camera.width as f64;
        let fv = v * s / spec.camera.height as f64;
        let col = (fu as u32).min(spec.s - 1);
        let row = (fv as u32).min(spec.s - 1);

        match winners.get(&(row, col)) {
            Some(&(best_vis, best_id))
                if best_vis > inst.visibility
                    || (best_vis == inst.visibility && best_id < inst.id) =>
            {
                continue
            }
            _ => {}
        }
        winners.insert((row, col), (inst.visibility, inst.id));

        let l = labels.get(&inst.id).ok_or(Error::MissingLabels(inst.id))?;
        if l.grasp_success.len() != spec.grasp_count as usize {
            return Err(Error::ShapeMismatch(format!(
                "instance {} has {} grasp flags, family has {}",
                inst.id,
                l.grasp_success.len(),
                spec.grasp_count
            )));
        }

        let x = (fu - col as f64).clamp(FRACTION_NUDGE, 1.0 - FRACTION_NUDGE);
        let y = (fv - row as f64).clamp(FRACTION_NUDGE, 1.0 - FRACTION_NUDGE);
        let z = ((t.z - spec.camera.near) / (spec.camera.far - spec.camera.near))
            .clamp(0.0, 1.0 - FRACTION_NUDGE);
        let e = euler_from_rotation(&canon.rotation, spec.symmetry.cyclic_order());

        let cell = tensor.cell_mut(row, col);
        cell.fill(0.0);
        cell[ChannelLayout::P] = 1.0;
        cell[ChannelLayout::V] = inst.visibility.clamp(0.0, 1.0);
        cell[ChannelLayout::X] = x;
        cell[ChannelLayout::Y] = y;
        cell[ChannelLayout::Z] = z;
        cell[ChannelLayout::PHI1] = e.phi1 / TAU;
        cell[ChannelLayout::PHI2] = e.phi2 / TAU;
        if let Some(idx) = layout.phi3() {
            cell[idx] = e.phi3 / spec.phi3_range();
        }
        cell[layout.ga()] = l.graspability.accessibility.clamp(0.0, 1.0);
        cell[layout.gu()] = l.graspability.unrest.clamp(0.0, 1.0);
        cell[layout.ge()] = l.graspability.entanglement.clamp(0.0, 1.0);
        for (j, &ok) in l.grasp_success.iter().enumerate() {
            cell[layout.grasp(j as u32)] = if ok { 1.0 } else { 0.0 };
        }
    }
    Ok(tensor)
}

/// Decodes one cell into an object estimate, or `None` when the presence
/// score is below one half.
pub fn decode_cell(tensor: &GroundTruthTensor, row: u32, col: u32) -> Option<ObjectEstimate> {
    let spec = &tensor.spec;
    let layout = spec.layout();
    let cell = tensor.cell(row, col);
    if cell[ChannelLayout::P] < 0.5 {
        return None;
    }
    let s = spec.s as f64;
    let u = (col as f64 + cell[ChannelLayout::X]) * spec.camera.width as f64 / s;
    let v = (row as f64 + cell[ChannelLayout::Y]) * spec.camera.height as f64 / s;
    let depth = spec.camera.near + cell[ChannelLayout::Z] * (spec.camera.far - spec.camera.near);
    let translation = Vector3::new(
        (u - spec.camera.cx) / spec.camera.fx * depth,
        (v - spec.camera.cy) / spec.camera.fy * depth,
        depth,
    );
    let e = EulerTriple {
        phi1: cell[ChannelLayout::PHI1] * TAU,
        phi2: cell[ChannelLayout::PHI2] * TAU,
        phi3: layout.phi3().map_or(0.0, |idx| cell[idx] * spec.phi3_range()),
        order: spec.symmetry.cyclic_order(),
    };
    let pose = Pose::new(rotation_from_euler(&e), translation);
    let pose_camera = canonicalize_pose(&pose, &spec.symmetry);
    Some(ObjectEstimate {
        row,
        col,
        presence: cell[ChannelLayout::P],
        visibility: cell[ChannelLayout::V],
        pose_camera,
        graspability: GraspabilityTriple {
            accessibility: cell[layout.ga()],
            unrest: cell[layout.gu()],
            entanglement: cell[layout.ge()],
        },
        grasp_scores: (0..spec.grasp_count).map(|j| cell[layout.grasp(j)]).collect(),
    })
}

/// Decodes every occupied cell, scanning rows then columns.
pub fn decode_tensor(tensor: &GroundTruthTensor) -> Vec<ObjectEstimate> {
    let mut out = Vec::new();
    for row in 0..tensor.spec.s {
        for col in 0..tensor.spec.s {
            if let Some(est) = decode_cell(tensor, row, col) {
                out.push(est);
            }
        }
    }
    out
}

/// Grid-preserving data augmentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AugmentMode {
    /// Rotate the camera view by `quarter_turns * 90` degrees about its
    /// optical axis. Zero turns is the identity (bit-exact copy).
    RotateZ { quarter_turns: u8 },
    /// Mirror the image horizontally. Only legal for objects with a mirror
    /// symmetry (a declared plane or a surface of revolution).
    Mirror,
}

/// Applies an augmentation to a ground-truth tensor.
///
/// Pose channels are recomputed through the corresponding rigid (or
/// reflective) camera transform; `p`, `v`, and graspability channels ride
/// along unchanged. Per-grasp success channels stay valid only for the
/// identity: any real augmentation zeroes them and clears
/// [`GroundTruthTensor::grasp_labels_valid`], because recorded trial
/// outcomes are tied to the original robot-relative geometry.
pub fn augment_sample(
    tensor: &GroundTruthTensor,
    mode: AugmentMode,
) -> Result<GroundTruthTensor> {
    match mode {
        AugmentMode::RotateZ { quarter_turns } => {
            if quarter_turns > 3 {
                return Err(Error::InvalidArgument(format!(
                    "quarter turns must be 0..=3, got {quarter_turns}"
                )));
            }
            if quarter_turns == 0 {
                return Ok(tensor.clone());
            }
            if !tensor.spec.camera.supports_quarter_turns() {
                return Err(Error::InvalidArgument(
                    "quarter-turn augmentation needs a square image with equal focal \
                     lengths and a centered principal point"
                        .into(),
                ));
            }
            let theta = quarter_turns as f64 * std::f64::consts::FRAC_PI_2;
            let rot = crate::geom::rotation_z(theta);
            augment_cells(tensor, quarter_turns, false, |r| rot * r)
        }
        AugmentMode::Mirror => {
            if !tensor.spec.symmetry.mirror_capable() {
                return Err(Error::MirrorWithoutPlane);
            }
            if !tensor.spec.camera.supports_mirror() {
                return Err(Error::InvalidArgument(
                    "mirror augmentation needs a centered principal point".into(),
                ));
            }
            // Each factor alone is a reflection, so the product is formed in
            // matrix space; the camera x-flip and the object's own mirror
            // plane cancel into a proper rotation.
            let m = Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0));
            let s_obj = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
            augment_cells(tensor, 0, true, move |r| {
                matrix_rotation(m * r.to_rotation_matrix().into_inner() * s_obj)
            })
        }
    }
}

/// Shared cell-shuffling core: `quarter_turns` drives the index map (with
/// `mirror` flipping columns instead), `rotate` maps each reconstructed
/// camera-frame rotation to its augmented counterpart.
fn augment_cells(
    tensor: &GroundTruthTensor,
    quarter_turns: u8,
    mirror: bool,
    rotate: impl Fn(nalgebra::UnitQuaternion<f64>) -> nalgebra::UnitQuaternion<f64>,
) -> Result<GroundTruthTensor> {
    let spec = &tensor.spec;
    let layout = spec.layout();
    let s = spec.s;
    let mut out = GroundTruthTensor::zeros(*spec);
    out.grasp_labels_valid = false;
    for row in 0..s {
        for col in 0..s {
            let src = tensor.cell(row, col);
            if src.iter().all(|&v| v == 0.0) {
                continue;
            }
            // Destination cell and in-cell fractions.
            let (mut r2, mut c2) = (row, col);
            let (mut x, mut y) = (src[ChannelLayout::X], src[ChannelLayout::Y]);
            if mirror {
                c2 = s - 1 - col;
                x = 1.0 - x;
            } else {
                for _ in 0..quarter_turns {
                    let (nr, nc) = (c2, s - 1 - r2);
                    let (nx, ny) = (1.0 - y, x);
                    r2 = nr;
                    c2 = nc;
                    x = nx;
                    y = ny;
                }
            }
            let e = EulerTriple {
                phi1: src[ChannelLayout::PHI1] * TAU,
                phi2: src[ChannelLayout::PHI2] * TAU,
                phi3: layout.phi3().map_or(0.0, |idx| src[idx] * spec.phi3_range()),
                order: spec.symmetry.cyclic_order(),
            };
            let rotated = rotate(rotation_from_euler(&e));
            let canon =
                canonicalize_pose(&Pose::new(rotated, Vector3::zeros()), &spec.symmetry);
            let e2 = euler_from_rotation(&canon.rotation, spec.symmetry.cyclic_order());

            let dst = out.cell_mut(r2, c2);
            dst[ChannelLayout::P] = src[ChannelLayout::P];
            dst[ChannelLayout::V] = src[ChannelLayout::V];
            dst[ChannelLayout::X] = x;
            dst[ChannelLayout::Y] = y;
            dst[ChannelLayout::Z] = src[ChannelLayout::Z];
            dst[ChannelLayout::PHI1] = e2.phi1 / TAU;
            dst[ChannelLayout::PHI2] = e2.phi2 / TAU;
            if let Some(idx) = layout.phi3() {
                dst[idx] = e2.phi3 / spec.phi3_range();
            }
            dst[layout.ga()] = src[layout.ga()];
            dst[layout.gu()] = src[layout.gu()];
            dst[layout.ge()] = src[layout.ge()];
            // Grasp channels stay zeroed: outcomes do not transfer.
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::random_rotation;
    use crate::scene::{BinSpec, SceneInstance};
    use crate::symmetry::{pose_distance, PoseDistanceContext};
    use nalgebra::UnitQuaternion;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn test_camera() -> CameraModel {
        CameraModel::top_down(&BinSpec::default())
    }

    fn test_spec(symmetry: SymmetryClass) -> GridSpec {
        GridSpec::new(8, 4, symmetry, test_camera()).unwrap()
    }

    fn labels(j: u32) -> InstanceLabels {
        InstanceLabels {
            graspability: GraspabilityTriple {
                accessibility: 0.5,
                unrest: 0.75,
                entanglement: 1.0,
            },
            grasp_success: (0..j).map(|i| i % 2 == 0).collect(),
        }
    }

    fn scene_with(instances: Vec<SceneInstance>) -> SceneSample {
        SceneSample {
            id: 0,
            object: "test".into(),
            bin: BinSpec::default(),
            camera: test_camera(),
            instances,
        }
    }

    #[test]
    fn channel_layout_matches_symmetry() {
        let with = test_spec(SymmetryClass::none());
        assert_eq!(with.channels(), 11 + 4);
        assert_eq!(with.layout().phi3(), Some(7));
        assert_eq!(with.layout().ga(), 8);
        assert_eq!(with.layout().grasp_base(), 11);
        let without = test_spec(SymmetryClass::revolution());
        assert_eq!(without.channels(), 10 + 4);
        assert_eq!(without.layout().phi3(), None);
        assert_eq!(without.layout().ga(), 7);
        assert_eq!(without.layout().grasp_base(), 10);
    }

    #[test]
    fn encode_places_a_centered_instance_in_the_middle_cell() {
        let spec = test_spec(SymmetryClass::none());
        // Identity rotation at the bin center, 0.1 above the floor.
        let inst = SceneInstance {
            id: 0,
            pose: Pose::translation_xyz(0.0, 0.0, 0.1),
            visibility: 0.8,
        };
        let scene = scene_with(vec![inst]);
        let mut l = BTreeMap::new();
        l.insert(0, labels(4));
        let t = encode_ground_truth(&scene, &l, &spec).unwrap();
        // u = v = 64 exactly: cell (4, 4) with zero (nudged) fractions.
        let cell = t.cell(4, 4);
        assert_eq!(cell[ChannelLayout::P], 1.0);
        assert_eq!(cell[ChannelLayout::V], 0.8);
        assert_eq!(cell[ChannelLayout::X], FRACTION_NUDGE);
        assert_eq!(cell[ChannelLayout::Y], FRACTION_NUDGE);
        // depth 0.9 in window [0.65, 1.2].
        let z = (0.9 - 0.65) / 0.55;
        assert!((cell[ChannelLayout::Z] - z).abs() < 1e-12);
        assert_eq!(cell[t.spec.layout().ga()], 0.5);
        assert_eq!(cell[t.spec.layout().gu()], 0.75);
        assert_eq!(cell[t.spec.layout().ge()], 1.0);
        assert_eq!(cell[t.spec.layout().grasp(0)], 1.0);
        assert_eq!(cell[t.spec.layout().grasp(1)], 0.0);
        // Only one occupied cell.
        let occupied: f64 = (0..8)
            .flat_map(|r| (0..8).map(move |c| (r, c)))
            .map(|(r, c)| t.get(r, c, ChannelLayout::P))
            .sum();
        assert_eq!(occupied, 1.0);
    }

    #[test]
    fn cell_conflicts_prefer_visibility_then_lower_id() {
        let spec = test_spec(SymmetryClass::none());
        let mut l = BTreeMap::new();
        for id in 0..3 {
            l.insert(id, labels(4));
        }
        // Three instances projecting into the same cell.
        let mk = |id, x_off: f64, vis| SceneInstance {
            id,
            pose: Pose::translation_xyz(x_off, 0.0, 0.1),
            visibility: vis,
        };
        let scene = scene_with(vec![mk(0, 0.0, 0.4), mk(1, 0.002, 0.9), mk(2, 0.004, 0.9)]);
        let t = encode_ground_truth(&scene, &l, &spec).unwrap();
        // Instance 1 wins: highest visibility, lower id than 2.
        let cell = t.cell(4, 4);
        assert_eq!(cell[ChannelLayout::V], 0.9);
        let (u, _, _) = spec.camera.project(&Vector3::new(0.002, 0.0, 0.1)).unwrap();
        let expected_x = u * 8.0 / 128.0 - 4.0;
        assert!((cell[ChannelLayout::X] - expected_x).abs() < 1e-12);
    }

    #[test]
    fn encode_skips_out_of_frame_and_out_of_depth_instances() {
        let spec = test_spec(SymmetryClass::none());
        let mut l = BTreeMap::new();
        for id in 0..3 {
            l.insert(id, labels(4));
        }
        let scene = scene_with(vec![
            // Far outside the horizontal field of view.
            SceneInstance { id: 0, pose: Pose::translation_xyz(5.0, 0.0, 0.1), visibility: 1.0 },
            // Above the near plane (too close to the camera).
            SceneInstance { id: 1, pose: Pose::translation_xyz(0.0, 0.0, 0.5), visibility: 1.0 },
            // Valid.
            SceneInstance { id: 2, pose: Pose::translation_xyz(0.05, 0.0, 0.1), visibility: 1.0 },
        ]);
        let t = encode_ground_truth(&scene, &l, &spec).unwrap();
        let occupied: f64 = (0..64).map(|i| t.data[i as usize * 15]).sum();
        assert_eq!(occupied, 1.0);
    }

    #[test]
    fn missing_labels_are_an_error() {
        let spec = test_spec(SymmetryClass::none());
        let scene = scene_with(vec![SceneInstance {
            id: 0,
            pose: Pose::translation_xyz(0.0, 0.0, 0.1),
            visibility: 1.0,
        }]);
        let err = encode_ground_truth(&scene, &BTreeMap::new(), &spec).unwrap_err();
        assert!(matches!(err, Error::MissingLabels(0)));
    }

    fn roundtrip_case(symmetry: SymmetryClass, seed: u64) {
        let spec = GridSpec::new(8, 4, symmetry, test_camera()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let points: Vec<Vector3<f64>> = (0..48)
            .map(|_| {
                Vector3::new(
                    rng.random::<f64>() * 0.06 - 0.03,
                    rng.random::<f64>() * 0.06 - 0.03,
                    rng.random::<f64>() * 0.06 - 0.03,
                )
            })
            .collect();
        let ctx = PoseDistanceContext::new(points, symmetry, 0.08).unwrap();
        let cam_inv = spec.camera.pose.inverse();
        for trial in 0..40 {
            let world = Pose::new(
                random_rotation(&mut rng),
                Vector3::new(
                    rng.random::<f64>() * 0.2 - 0.1,
                    rng.random::<f64>() * 0.2 - 0.1,
                    rng.random::<f64>() * 0.1 + 0.02,
                ),
            );
            let scene = scene_with(vec![SceneInstance { id: 0, pose: world, visibility: 1.0 }]);
            let mut l = BTreeMap::new();
            l.insert(0, labels(4));
            let t = encode_ground_truth(&scene, &l, &spec).unwrap();
            let decoded = decode_tensor(&t);
            assert_eq!(decoded.len(), 1, "trial {trial}");
            let est = &decoded[0];
            let truth_cam = cam_inv.compose(&world);
            let d = pose_distance(&est.pose_camera, &truth_cam, &ctx);
            assert!(d < 1e-6, "trial {trial}: roundtrip distance {d}");
            assert_eq!(est.grasp_scores, vec![1.0, 0.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn decode_inverts_encode_for_every_symmetry_kind() {
        roundtrip_case(SymmetryClass::none(), 100);
        roundtrip_case(SymmetryClass::cyclic(2).unwrap(), 101);
        roundtrip_case(SymmetryClass::cyclic(6).unwrap(), 102);
        roundtrip_case(SymmetryClass::revolution(), 103);
        roundtrip_case(SymmetryClass::revolution_with_plane(), 104);
    }

    #[test]
    fn identity_rotation_augment_is_bit_exact() {
        let spec = test_spec(SymmetryClass::none());
        let scene = scene_with(vec![SceneInstance {
            id: 0,
            pose: Pose::new(
                UnitQuaternion::from_euler_angles(0.4, 0.2, 0.9),
                Vector3::new(0.03, -0.06, 0.08),
            ),
            visibility: 0.7,
        }]);
        let mut l = BTreeMap::new();
        l.insert(0, labels(4));
        let t = encode_ground_truth(&scene, &l, &spec).unwrap();
        let same = augment_sample(&t, AugmentMode::RotateZ { quarter_turns: 0 }).unwrap();
        assert_eq!(t, same);
        assert!(same.grasp_labels_valid);
    }

    #[test]
    fn quarter_turn_moves_cells_and_rotates_poses() {
        let spec = test_spec(SymmetryClass::none());
        let world = Pose::new(
            UnitQuaternion::from_euler_angles(0.3, -0.5, 1.1),
            Vector3::new(0.07, 0.04, 0.09),
        );
        let scene = scene_with(vec![SceneInstance { id: 0, pose: world, visibility: 0.6 }]);
        let mut l = BTreeMap::new();
        l.insert(0, labels(4));
        let t = encode_ground_truth(&scene, &l, &spec).unwrap();
        let turned = augment_sample(&t, AugmentMode::RotateZ { quarter_turns: 1 }).unwrap();
        assert!(!turned.grasp_labels_valid);

        // Find source and destination cells.
        let decoded = decode_tensor(&t);
        let (row, col) = (decoded[0].row, decoded[0].col);
        let rotated = decode_tensor(&turned);
        assert_eq!(rotated.len(), 1);
        assert_eq!((rotated[0].row, rotated[0].col), (col, spec.s - 1 - row));
        // Grasp channels are dropped.
        assert!(rotated[0].grasp_scores.iter().all(|&v| v == 0.0));
        // The decoded pose matches the explicitly rotated camera pose.
        let ctx = PoseDistanceContext::new(
            vec![
                Vector3::new(0.03, 0.0, 0.0),
                Vector3::new(0.0, 0.02, 0.0),
                Vector3::new(0.0, 0.0, 0.04),
                Vector3::new(0.01, 0.02, 0.03),
            ],
            SymmetryClass::none(),
            0.08,
        )
        .unwrap();
        let cam = spec.camera.pose.inverse().compose(&world);
        let expected = Pose::rotation_z(std::f64::consts::FRAC_PI_2).compose(&cam);
        let d = pose_distance(&rotated[0].pose_camera, &expected, &ctx);
        assert!(d < 1e-9, "rotated pose off by {d}");
        // Depth is unchanged by a rotation about the optical axis.
        assert!((rotated[0].pose_camera.translation.z - cam.translation.z).abs() < 1e-12);
    }

    #[test]
    fn four_quarter_turns_return_home() {
        let spec = test_spec(SymmetryClass::cyclic(3).unwrap());
        let world = Pose::new(
            UnitQuaternion::from_euler_angles(0.2, 0.7, -0.4),
            Vector3::new(-0.05, 0.08, 0.11),
        );
        let scene = scene_with(vec![SceneInstance { id: 0, pose: world, visibility: 0.5 }]);
        let mut l = BTreeMap::new();
        l.insert(0, labels(4));
        let t = encode_ground_truth(&scene, &l, &spec).unwrap();
        let mut current = t.clone();
        for _ in 0..4 {
            current = augment_sample(&current, AugmentMode::RotateZ { quarter_turns: 1 }).unwrap();
        }
        let layout = spec.layout();
        for row in 0..spec.s {
            for col in 0..spec.s {
                let a = t.cell(row, col);
                let b = current.cell(row, col);
                for ch in 0..layout.grasp_base() {
                    assert!(
                        (a[ch] - b[ch]).abs() < 1e-9,
                        "cell ({row},{col}) channel {ch}: {} vs {}",
                        a[ch],
                        b[ch]
                    );
                }
            }
        }
    }

    #[test]
    fn mirror_needs_symmetry_and_flips_columns() {
        let asym = test_spec(SymmetryClass::none());
        let t = GroundTruthTensor::zeros(asym);
        assert!(matches!(
            augment_sample(&t, AugmentMode::Mirror),
            Err(Error::MirrorWithoutPlane)
        ));

        let spec = test_spec(SymmetryClass::revolution());
        let world = Pose::new(
            UnitQuaternion::from_euler_angles(0.8, 0.3, 0.2),
            Vector3::new(0.06, -0.03, 0.07),
        );
        let scene = scene_with(vec![SceneInstance { id: 0, pose: world, visibility: 0.9 }]);
        let mut l = BTreeMap::new();
        l.insert(0, labels(4));
        let t = encode_ground_truth(&scene, &l, &spec).unwrap();
        let mirrored = augment_sample(&t, AugmentMode::Mirror).unwrap();
        let src = decode_tensor(&t);
        let dst = decode_tensor(&mirrored);
        assert_eq!(dst.len(), 1);
        assert_eq!(dst[0].row, src[0].row);
        assert_eq!(dst[0].col, spec.s - 1 - src[0].col);
        // The mirrored translation is the x-flip of the original.
        let a = src[0].pose_camera.translation;
        let b = dst[0].pose_camera.translation;
        assert!((a.x + b.x).abs() < 1e-9);
        assert!((a.y - b.y).abs() < 1e-9);
        assert!((a.z - b.z).abs() < 1e-9);
        // Mirroring twice restores the pose channels.
        let twice = augment_sample(&mirrored, AugmentMode::Mirror).unwrap();
        let back = decode_tensor(&twice);
        let ctx = PoseDistanceContext::new(
            vec![Vector3::new(0.02, 0.01, 0.03), Vector3::new(-0.01, 0.02, -0.02)],
            SymmetryClass::revolution(),
            0.06,
        )
        .unwrap();
        let d = pose_distance(&back[0].pose_camera, &src[0].pose_camera, &ctx);
        assert!(d < 1e-9, "double mirror off by {d}");
    }

    #[test]
    fn rotation_augment_requires_symmetric_intrinsics() {
        let mut camera = test_camera();
        camera.fx = 150.0;
        let spec = GridSpec::new(8, 4, SymmetryClass::none(), camera).unwrap();
        let t = GroundTruthTensor::zeros(spec);
        assert!(augment_sample(&t, AugmentMode::RotateZ { quarter_turns: 1 }).is_err());
        assert!(augment_sample(&t, AugmentMode::RotateZ { quarter_turns: 4 }).is_err());
    }
}
