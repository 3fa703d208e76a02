//! Software z-buffer rasterizer for depth and instance-tag images.
//!
//! Conventions chosen for exact reproducibility:
//!
//! * Coverage is decided at pixel centers `(px + 0.5, py + 0.5)` with edge
//!   functions and a top-left fill rule, so triangles sharing an edge cover
//!   every pixel exactly once.
//! * Depth is the camera z-depth, interpolated perspective-correctly via
//!   `1/z`, stored as `f32`. Fragments outside `[near, far]` are dropped
//!   before the depth test, which makes compositing a pure per-pixel
//!   minimum.
//! * The depth test keeps the strictly nearer fragment; exact depth ties go
//!   to the lower tag. Rendering meshes in any grouping or order therefore
//!   produces bit-identical images.
//!
//! There is no near-plane clipping: triangles touching or behind the camera
//! plane are dropped whole. Top-down bin scenes never create such geometry
//! inside the depth window.

use crate::error::Error;
use crate::geom::{Pose, TriangleMesh};
use crate::model::ObjectModel;
use crate::scene::{CameraModel, SceneSample};
use crate::Result;
use nalgebra::Vector2;
#[cfg(test)]
use nalgebra::Vector3;

/// Depth/tag image pair. `depth` is `f32::INFINITY` and `tag` is
/// [`Raster::BACKGROUND`] where nothing rendered; bin surfaces also carry
/// the background tag but a finite depth.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    /// Row-major z-depth per pixel.
    pub depth: Vec<f32>,
    /// Row-major instance id per pixel, or [`Raster::BACKGROUND`].
    pub tag: Vec<u32>,
}

impl Raster {
    /// Tag for pixels not covered by any instance (empty or bin).
    pub const BACKGROUND: u32 = u32::MAX;

    pub fn new(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Raster { width, height, depth: vec![f32::INFINITY; n], tag: vec![Self::BACKGROUND; n] }
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn depth_at(&self, x: u32, y: u32) -> f32 {
        self.depth[self.index(x, y)]
    }

    pub fn tag_at(&self, x: u32, y: u32) -> u32 {
        self.tag[self.index(x, y)]
    }

    /// Instance mask value: `id + 1`, with `0` for background and bin.
    pub fn mask_at(&self, x: u32, y: u32) -> u32 {
        match self.tag_at(x, y) {
            Self::BACKGROUND => 0,
            id => id + 1,
        }
    }

    /// Full mask image (`id + 1`, `0` background), row-major.
    pub fn mask(&self) -> Vec<u32> {
        self.tag.iter().map(|&t| if t == Self::BACKGROUND { 0 } else { t + 1 }).collect()
    }

    /// Per-pixel minimum under the depth-then-tag order. Because fragments
    /// are range-rejected before the depth test, rendering meshes together
    /// or compositing their individual renders is bit-identical.
    pub fn composite(&self, other: &Raster) -> Result<Raster> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::ShapeMismatch(format!(
                "composite of {}x{} with {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let mut out = self.clone();
        for i in 0..out.depth.len() {
            let nearer = other.depth[i] < out.depth[i]
                || (other.depth[i] == out.depth[i] && other.tag[i] < out.tag[i]);
            if nearer {
                out.depth[i] = other.depth[i];
                out.tag[i] = other.tag[i];
            }
        }
        Ok(out)
    }

    /// Accepts one fragment through the range check and depth test.
    #[inline]
    fn fragment(&mut self, idx: usize, depth: f32, tag: u32) {
        if depth < self.depth[idx] || (depth == self.depth[idx] && tag < self.tag[idx]) {
            self.depth[idx] = depth;
            self.tag[idx] = tag;
        }
    }
}

/// Triangles closer to the camera plane than this are dropped whole.
const MIN_CAMERA_Z: f64 = 1e-6;

fn check_camera(camera: &CameraModel) -> Result<()> {
    if camera.width == 0 || camera.height == 0 {
        return Err(Error::InvalidArgument("camera image must be non-empty".into()));
    }
    let window_ordered =
        camera.near.is_finite() && camera.far.is_finite() && camera.near < camera.far;
    if !window_ordered {
        return Err(Error::InvalidArgument(format!(
            "camera depth window is empty: near {} far {}",
            camera.near, camera.far
        )));
    }
    if camera.fx == 0.0 || camera.fy == 0.0 {
        return Err(Error::InvalidArgument("camera focal lengths must be nonzero".into()));
    }
    Ok(())
}

/// Rasterizes one posed mesh into the target under the camera.
pub fn rasterize_mesh(
    target: &mut Raster,
    mesh: &TriangleMesh,
    pose: &Pose,
    camera: &CameraModel,
    tag: u32,
) {
    let cam_inv = camera.pose.inverse();
    let width = target.width as i64;
    let height = target.height as i64;
    for t in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.corners(t);
        let q = [
            cam_inv.apply(&pose.apply(&a)),
            cam_inv.apply(&pose.apply(&b)),
            cam_inv.apply(&pose.apply(&c)),
        ];
        if q.iter().any(|v| v.z < MIN_CAMERA_Z) {
            continue;
        }
        let mut s = [Vector2::zeros(); 3];
        let mut inv_z = [0.0f64; 3];
        for i in 0..3 {
            s[i] = Vector2::new(
                camera.fx * q[i].x / q[i].z + camera.cx,
                camera.fy * q[i].y / q[i].z + camera.cy,
            );
            inv_z[i] = 1.0 / q[i].z;
        }
        let mut area2 = cross2(&(s[1] - s[0]), &(s[2] - s[0]));
        if area2 == 0.0 {
            continue;
        }
        if area2 < 0.0 {
            s.swap(1, 2);
            inv_z.swap(1, 2);
            area2 = -area2;
        }
        // Directed edges keeping the interior on the positive side; edge i
        // is opposite vertex i.
        let edges = [(s[1], s[2]), (s[2], s[0]), (s[0], s[1])];
        let umin = s.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let umax = s.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let vmin = s.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let vmax = s.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let px0 = ((umin - 0.5).floor() as i64).max(0);
        let px1 = ((umax - 0.5).ceil() as i64).min(width - 1);
        let py0 = ((vmin - 0.5).floor() as i64).max(0);
        let py1 = ((vmax - 0.5).ceil() as i64).min(height - 1);
        for py in py0..=py1 {
            for px in px0..=px1 {
                let center = Vector2::new(px as f64 + 0.5, py as f64 + 0.5);
                let mut w = [0.0f64; 3];
                let mut inside = true;
                for i in 0..3 {
                    let (from, to) = edges[i];
                    let e = to - from;
                    let wi = cross2(&e, &(center - from));
                    if wi < 0.0 {
                        inside = false;
                        break;
                    }
                    if wi == 0.0 {
                        // Top-left rule (image y grows downward): boundary
                        // pixels belong to the triangle above / to the right.
                        let top = e.y == 0.0 && e.x > 0.0;
                        let left = e.y < 0.0;
                        if !(top || left) {
                            inside = false;
                            break;
                        }
                    }
                    w[i] = wi;
                }
                if !inside {
                    continue;
                }
                let iz =
                    (w[0] * inv_z[0] + w[1] * inv_z[1] + w[2] * inv_z[2]) / area2;
                let depth = 1.0 / iz;
                if depth < camera.near || depth > camera.far {
                    continue;
                }
                let idx = target.index(px as u32, py as u32);
                target.fragment(idx, depth as f32, tag);
            }
        }
    }
}

#[inline]
fn cross2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Renders the bin and every instance into one depth/tag image.
pub fn render_scene(scene: &SceneSample, model: &ObjectModel) -> Result<Raster> {
    check_camera(&scene.camera)?;
    let mut raster = Raster::new(scene.camera.width, scene.camera.height);
    rasterize_mesh(
        &mut raster,
        &scene.bin.mesh(),
        &Pose::identity(),
        &scene.camera,
        Raster::BACKGROUND,
    );
    for inst in &scene.instances {
        rasterize_mesh(&mut raster, model.mesh(), &inst.pose, &scene.camera, inst.id);
    }
    Ok(raster)
}

/// Renders a single instance with no bin and no neighbors (its unoccluded
/// silhouette).
pub fn render_instance_alone(
    scene: &SceneSample,
    model: &ObjectModel,
    instance_id: u32,
) -> Result<Raster> {
    check_camera(&scene.camera)?;
    let inst = scene
        .instances
        .iter()
        .find(|i| i.id == instance_id)
        .ok_or(Error::UnknownInstance(instance_id))?;
    let mut raster = Raster::new(scene.camera.width, scene.camera.height);
    rasterize_mesh(&mut raster, model.mesh(), &inst.pose, &scene.camera, inst.id);
    Ok(raster)
}

/// Renders only the bin geometry.
pub fn render_bin(scene: &SceneSample) -> Result<Raster> {
    check_camera(&scene.camera)?;
    let mut raster = Raster::new(scene.camera.width, scene.camera.height);
    rasterize_mesh(
        &mut raster,
        &scene.bin.mesh(),
        &Pose::identity(),
        &scene.camera,
        Raster::BACKGROUND,
    );
    Ok(raster)
}
