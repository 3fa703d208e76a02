//! Grasp planning and ground-truth synthesis for bin picking.
//!
//! The crate covers the non-learned half of a pick-quality estimation stack:
//!
//! 1. **Geometry** ([`geom`]): rigid poses on unit quaternions, intrinsic
//!    Z-Y-Z Euler factorization, triangle meshes, area-weighted surface
//!    sampling, and minimal bounding spheres.
//! 2. **Symmetry** ([`symmetry`]): pose equivalence classes for cyclic and
//!    revolution objects, a point-set pose distance that quotients them out,
//!    and a deterministic canonical representative per class.
//! 3. **Grasp generation** ([`grasp`]): antipodal parallel-jaw sampling and
//!    flatness-tested suction anchors on a mesh, plus box-based gripper
//!    collision queries.
//! 4. **Clustering** ([`cluster`]): k-medoids (greedy seed + best-swap
//!    passes) used to thin thousands of grasp candidates to a fixed family.
//! 5. **Scenes** ([`scene`]): sequential-drop bin filling with bounding-sphere
//!    settling, a software z-buffer renderer for depth and instance masks,
//!    and per-instance visibility ratios.
//! 6. **Trials** ([`trials`]): reachability sweeps, synthetic pick outcome
//!    logs, and the graspability triple (accessibility, unrest, entanglement).
//! 7. **Tensor codec** ([`codec`]): the S x S grid ground-truth tensor,
//!    its decoder, and grid-exact data augmentation.
//! 8. **Learning utilities** ([`learn`]): the multi-task training loss with
//!    analytic gradient, the grasp selection policy, and dataset evaluation.
//! 9. **I/O** ([`io`] and [`pipeline`]): descriptors, configuration, file
//!    formats (OBJ subset, PFM depth, PGM masks, grid tensors, JSON records),
//!    and the end-to-end dataset pipeline.
//!
//! Everything downstream of a single 64-bit seed is deterministic: stages
//! draw from named substreams so that outputs are byte-identical across runs.

pub mod cluster;
pub mod codec;
pub mod error;
pub mod geom;
pub mod grasp;
pub mod io;
pub mod learn;
pub mod model;
pub mod pipeline;
pub mod scene;
pub mod symmetry;
pub mod trials;

pub use cluster::{pam_cluster, GraspDistanceParams};
pub use codec::{AugmentMode, GridSpec, GroundTruthTensor, ObjectEstimate};
pub use error::Error;
pub use geom::{
    bounding_sphere, sample_surface, BoundingSphere, EulerTriple, Pose, SurfaceSample,
    TriangleMesh,
};
pub use grasp::{Grasp, GraspSet, GripperKind, GripperModel};
pub use learn::{EvalReport, EvalThresholds, LossWeights};
pub use model::ObjectModel;
pub use scene::{BinSpec, CameraModel, Raster, SceneInstance, SceneSample};
pub use symmetry::{PoseDistanceContext, SymmetryClass, SymmetryKind};
pub use trials::{GraspabilityTriple, TrialRecord};

/// Result alias for all fallible operations in this crate.
pub type Result<T> = std::result::Result<T, Error>;
