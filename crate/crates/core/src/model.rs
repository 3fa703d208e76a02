//! Object model: a mesh plus the derived data the rest of the pipeline
//! needs (symmetry class, bounding sphere, cached surface samples).

use crate::geom::{bounding_sphere, sample_surface, BoundingSphere, SurfaceSample, TriangleMesh};
use crate::symmetry::{PoseDistanceContext, SymmetryClass};
use crate::Result;

/// Number of cached surface samples; grasp generation and pose distances
/// draw from this shared set so results are reproducible per object.
pub const MODEL_SAMPLE_COUNT: usize = 2000;

/// Seed offset mixed into the per-object sampling stream.
const MODEL_SAMPLE_SEED: u64 = 0x6d6f64656c; // "model"

/// A rigid object: identity, geometry, symmetry, and cached derived data.
#[derive(Clone, Debug)]
pub struct ObjectModel {
    id: String,
    mesh: TriangleMesh,
    symmetry: SymmetryClass,
    bounding: BoundingSphere,
    samples: Vec<SurfaceSample>,
}

impl ObjectModel {
    /// Builds a model from a mesh, computing the bounding sphere and a
    /// deterministic surface sample set.
    pub fn from_mesh(id: impl Into<String>, mesh: TriangleMesh, symmetry: SymmetryClass) -> Result<Self> {
        let bounding = bounding_sphere(&mesh);
        let samples = sample_surface(&mesh, MODEL_SAMPLE_COUNT, MODEL_SAMPLE_SEED);
        Ok(ObjectModel { id: id.into(), mesh, symmetry, bounding, samples })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn symmetry(&self) -> &SymmetryClass {
        &self.symmetry
    }

    pub fn bounding(&self) -> &BoundingSphere {
        &self.bounding
    }

    pub fn samples(&self) -> &[SurfaceSample] {
        &self.samples
    }

    pub fn diameter(&self) -> f64 {
        self.bounding.diameter()
    }

    /// Pose-distance context over a fixed-size subset of the cached samples
    /// (enough for stable RMS values without quadratic-in-samples cost).
    pub fn pose_context(&self, point_count: usize) -> Result<PoseDistanceContext> {
        let step = (self.samples.len() / point_count.max(1)).max(1);
        let points = self
            .samples
            .iter()
            .step_by(step)
            .take(point_count.max(1))
            .map(|s| s.position)
            .collect();
        PoseDistanceContext::new(points, self.symmetry, self.diameter())
    }
}
