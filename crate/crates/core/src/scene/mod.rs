//! Synthetic cluttered scenes: bin geometry, sequential-drop settling, a
//! top-down pinhole camera, and per-instance visibility.
//!
//! Settling is deliberately simple and exactly reproducible: each instance
//! is dropped at a uniformly random spot inside the bin with a uniformly
//! random orientation, then slid straight down until its bounding sphere
//! rests on the floor or touches an earlier sphere tangentially. Spheres
//! never interpenetrate and never cross the bin walls.

mod raster;

pub use raster::{render_bin, render_instance_alone, render_scene, Raster};

use crate::error::Error;
use crate::geom::{random_rotation, Pose, TriangleMesh};
use crate::model::ObjectModel;
use crate::Result;
use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Open-top rectangular bin. The floor's upper surface is the plane z = 0;
/// the inner cavity spans `[-inner_x/2, inner_x/2] x [-inner_y/2, inner_y/2]`
/// and the walls rise to `wall_height`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub inner_x: f64,
    pub inner_y: f64,
    pub wall_height: f64,
    pub wall_thickness: f64,
}

impl Default for BinSpec {
    fn default() -> Self {
        BinSpec { inner_x: 0.3, inner_y: 0.3, wall_height: 0.15, wall_thickness: 0.01 }
    }
}

impl BinSpec {
    /// Solid bin geometry (floor slab plus four wall slabs) for rendering
    /// and collision sampling.
    pub fn mesh(&self) -> TriangleMesh {
        let hx = self.inner_x / 2.0;
        let hy = self.inner_y / 2.0;
        let t = self.wall_thickness;
        let h = self.wall_height;
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        // Floor slab under the cavity and walls.
        append_box(
            &mut vertices,
            &mut triangles,
            Vector3::new(0.0, 0.0, -t / 2.0),
            Vector3::new(hx + t, hy + t, t / 2.0),
        );
        // Walls along +-x (full depth in y), then +-y between them.
        for sx in [-1.0, 1.0] {
            append_box(
                &mut vertices,
                &mut triangles,
                Vector3::new(sx * (hx + t / 2.0), 0.0, h / 2.0),
                Vector3::new(t / 2.0, hy + t, h / 2.0),
            );
        }
        for sy in [-1.0, 1.0] {
            append_box(
                &mut vertices,
                &mut triangles,
                Vector3::new(0.0, sy * (hy + t / 2.0), h / 2.0),
                Vector3::new(hx, t / 2.0, h / 2.0),
            );
        }
        TriangleMesh::new(vertices, triangles).expect("bin mesh is never degenerate")
    }

    /// Regular point sampling of the surfaces a tool could hit: the floor
    /// and the four inner wall faces, at the given grid spacing.
    pub fn collision_points(&self, spacing: f64) -> Vec<Vector3<f64>> {
        let hx = self.inner_x / 2.0;
        let hy = self.inner_y / 2.0;
        let xs = grid_1d(-hx, hx, spacing);
        let ys = grid_1d(-hy, hy, spacing);
        let zs = grid_1d(0.0, self.wall_height, spacing);
        let mut points = Vec::new();
        for &x in &xs {
            for &y in &ys {
                points.push(Vector3::new(x, y, 0.0));
            }
        }
        for &y in &ys {
            for &z in &zs {
                points.push(Vector3::new(-hx, y, z));
                points.push(Vector3::new(hx, y, z));
            }
        }
        for &x in &xs {
            for &z in &zs {
                points.push(Vector3::new(x, -hy, z));
                points.push(Vector3::new(x, hy, z));
            }
        }
        points
    }
}

/// Inclusive endpoints, spacing at most `step`.
fn grid_1d(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Appends an axis-aligned box (given by center and half-extents) to a
/// vertex/triangle soup.
fn append_box(
    vertices: &mut Vec<Vector3<f64>>,
    triangles: &mut Vec<[u32; 3]>,
    center: Vector3<f64>,
    half: Vector3<f64>,
) {
    let base = vertices.len() as u32;
    let boxe = crate::geom::box_mesh(half.x * 2.0, half.y * 2.0, half.z * 2.0)
        .expect("box extents are positive");
    vertices.extend(boxe.vertices().iter().map(|v| v + center));
    triangles.extend(boxe.triangles().iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
}

/// Pinhole camera with an image-convention frame: x right, y down, z along
/// the view direction. `pose` places the camera frame in the world.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Fragments closer than this z-depth are discarded.
    pub near: f64,
    /// Fragments farther than this z-depth are discarded.
    pub far: f64,
    /// World-from-camera transform.
    pub pose: Pose,
}

/// Height of the default top-down camera above the bin floor.
pub const CAMERA_HEIGHT: f64 = 1.0;

impl CameraModel {
    /// Straight-down camera over the bin center: world +x maps to image
    /// right, world +y to image up, and depth grows downward. The depth
    /// window brackets the working volume from just above the walls'
    /// clutter headroom down to slightly below the floor.
    pub fn top_down(bin: &BinSpec) -> Self {
        // Exactly a half turn about x: `from_axis_angle` would leave
        // cos(pi/2) ~ 6e-17 in the scalar part and smear ~1e-16 into every
        // projection, which matters when points sit on cell boundaries.
        let rotation =
            UnitQuaternion::new_unchecked(Quaternion::new(0.0, 1.0, 0.0, 0.0));
        CameraModel {
            width: 128,
            height: 128,
            fx: 160.0,
            fy: 160.0,
            cx: 64.0,
            cy: 64.0,
            near: CAMERA_HEIGHT - bin.wall_height - 0.2,
            far: CAMERA_HEIGHT + 0.2,
            pose: Pose::new(rotation, Vector3::new(0.0, 0.0, CAMERA_HEIGHT)),
        }
    }

    /// Projects a world point to continuous pixel coordinates and z-depth.
    /// Returns `None` for points at or behind the camera plane.
    pub fn project(&self, world: &Vector3<f64>) -> Option<(f64, f64, f64)> {
        let q = self.pose.inverse().apply(world);
        if q.z <= 0.0 {
            return None;
        }
        Some((self.fx * q.x / q.z + self.cx, self.fy * q.y / q.z + self.cy, q.z))
    }

    /// Inverse of [`project`](Self::project): pixel coordinates and z-depth
    /// back to a world point.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Vector3<f64> {
        let q = Vector3::new(
            (u - self.cx) / self.fx * depth,
            (v - self.cy) / self.fy * depth,
            depth,
        );
        self.pose.apply(&q)
    }

    /// World-from-camera rotation matrix.
    pub fn rotation(&self) -> Rotation3<f64> {
        self.pose.rotation.to_rotation_matrix()
    }

    /// True when the intrinsics are symmetric enough for grid-exact image
    /// rotations: square image, equal focal lengths, centered principal
    /// point.
    pub fn supports_quarter_turns(&self) -> bool {
        self.width == self.height
            && self.fx == self.fy
            && self.cx * 2.0 == self.width as f64
            && self.cy * 2.0 == self.height as f64
    }

    /// True when the intrinsics allow grid-exact horizontal mirroring.
    pub fn supports_mirror(&self) -> bool {
        self.cx * 2.0 == self.width as f64
    }
}

/// One settled object instance in a scene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneInstance {
    pub id: u32,
    /// World-from-object transform.
    pub pose: Pose,
    /// Fraction of this instance's projected silhouette left uncovered by
    /// the rest of the scene; filled in by [`compute_visibilities`].
    pub visibility: f64,
}

/// A generated scene: bin, camera, and settled instances of one object.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneSample {
    pub id: u64,
    /// Object id shared by all instances.
    pub object: String,
    pub bin: BinSpec,
    pub camera: CameraModel,
    pub instances: Vec<SceneInstance>,
}

/// Scene generation knobs.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SceneGenParams {
    /// Instances to drop.
    pub count: usize,
    /// Placement attempts per instance before giving up.
    pub max_attempts: usize,
}

impl Default for SceneGenParams {
    fn default() -> Self {
        SceneGenParams { count: 8, max_attempts: 1000 }
    }
}

/// Drops `params.count` instances of `model` into the bin.
///
/// Each attempt samples a bounding-sphere center uniformly over the region
/// where the sphere clears the walls, plus a uniform orientation, and
/// settles the sphere downward to rest on the floor or the first earlier
/// sphere it meets (exact tangency). Attempts whose rest height would float
/// the whole sphere above the rim are retried; exhausting the attempt
/// budget reports the bin as full.
pub fn generate_scene(
    scene_id: u64,
    model: &ObjectModel,
    bin: &BinSpec,
    camera: &CameraModel,
    params: &SceneGenParams,
    rng: &mut impl Rng,
) -> Result<SceneSample> {
    let r = model.bounding().radius;
    let free_x = bin.inner_x / 2.0 - r;
    let free_y = bin.inner_y / 2.0 - r;
    let mut placed: Vec<Vector3<f64>> = Vec::new(); // sphere centers
    let mut instances = Vec::new();
    for id in 0..params.count {
        let mut done = false;
        for _ in 0..params.max_attempts {
            if free_x < 0.0 || free_y < 0.0 {
                break; // the sphere cannot fit between the walls at all
            }
            let x = (rng.random::<f64>() * 2.0 - 1.0) * free_x;
            let y = (rng.random::<f64>() * 2.0 - 1.0) * free_y;
            let rotation = random_rotation(rng);
            let mut z = r;
            for c in &placed {
                let h = (x - c.x).hypot(y - c.y);
                if h < 2.0 * r {
                    let rest = c.z + (4.0 * r * r - h * h).sqrt();
                    if rest > z {
                        z = rest;
                    }
                }
            }
            if z - r > bin.wall_height {
                continue; // would sit entirely above the rim; try elsewhere
            }
            let center = Vector3::new(x, y, z);
            let translation = center - rotation * model.bounding().center;
            placed.push(center);
            instances.push(SceneInstance {
                id: id as u32,
                pose: Pose::new(rotation, translation),
                visibility: 0.0,
            });
            done = true;
            break;
        }
        if !done {
            return Err(Error::BinFull { instance: id, attempts: params.max_attempts });
        }
    }
    Ok(SceneSample {
        id: scene_id,
        object: model.id().to_string(),
        bin: *bin,
        camera: *camera,
        instances,
    })
}

/// World-space bounding sphere center of an instance.
pub fn instance_sphere_center(model: &ObjectModel, instance: &SceneInstance) -> Vector3<f64> {
    instance.pose.apply(&model.bounding().center)
}

/// Renders the full scene once and each instance alone (no bin, no
/// neighbors), storing per-instance visibility: visible pixels in the full
/// render divided by silhouette pixels when unoccluded. Instances that
/// project entirely off-image (or outside the depth window) get zero.
/// Returns the full-scene raster for reuse.
pub fn compute_visibilities(scene: &mut SceneSample, model: &ObjectModel) -> Result<Raster> {
    let full = render_scene(scene, model)?;
    for idx in 0..scene.instances.len() {
        let id = scene.instances[idx].id;
        let alone = render_instance_alone(scene, model, id)?;
        let full_count = full.tag.iter().filter(|&&t| t == id).count();
        let alone_count = alone.tag.iter().filter(|&&t| t == id).count();
        scene.instances[idx].visibility = if alone_count == 0 {
            0.0
        } else {
            full_count as f64 / alone_count as f64
        };
    }
    Ok(full)
}

/// Proper rotation matrix helper used by mirror-related code paths.
pub(crate) fn matrix_rotation(m: Matrix3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
}
