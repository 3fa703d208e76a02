//! Crate-wide error type.
//!
//! Variants are deliberately fine-grained: callers (and the CLI exit-code
//! mapping) distinguish malformed inputs from violated internal contracts.

use thiserror::Error;

/// Errors produced by geometry, generation, codec, and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Mesh has no vertices or no non-degenerate triangles.
    #[error("empty mesh")]
    EmptyMesh,

    /// OBJ text could not be parsed.
    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    /// Grasp generation filtered every candidate away.
    #[error("no feasible grasps")]
    NoFeasibleGrasps,

    /// Scene generation could not place an instance after the attempt budget.
    #[error("bin full: instance {instance} rejected after {attempts} attempts")]
    BinFull { instance: usize, attempts: usize },

    /// A trial log does not cover every grasp of an instance.
    #[error("incomplete trial log: scene {scene} instance {instance} missing grasp {grasp}")]
    IncompleteTrialLog { scene: u64, instance: u32, grasp: u32 },

    /// A trial log contains more than one record for the same grasp.
    #[error("duplicate trial record: scene {scene} instance {instance} grasp {grasp}")]
    DuplicateTrialRecord { scene: u64, instance: u32, grasp: u32 },

    /// Trial outcomes must satisfy placed => lifted => collision-free.
    #[error("trial outcome ladder violated: scene {scene} instance {instance} grasp {grasp}")]
    OutcomeLadder { scene: u64, instance: u32, grasp: u32 },

    /// Mirror augmentation needs a declared reflection symmetry.
    #[error("mirror augmentation requested without declared plane symmetry")]
    MirrorWithoutPlane,

    /// Tensor file starts with the wrong magic bytes.
    #[error("bad magic in tensor file")]
    BadMagic,

    /// Tensor file version is not supported.
    #[error("unsupported tensor file version {0}")]
    UnsupportedVersion(u16),

    /// Header channel count contradicts the declared symmetry layout.
    #[error("layout mismatch: header declares {declared} channels, layout requires {expected}")]
    LayoutMismatch { declared: u32, expected: u32 },

    /// Tensor payload ends before the declared grid is complete.
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    /// Tensor payload continues past the declared grid.
    #[error("trailing data after payload: expected {expected} bytes, found {found}")]
    TrailingData { expected: usize, found: usize },

    /// Tensor element is not a finite number in the unit interval.
    #[error("tensor value out of range at element {index}: {value}")]
    TensorValue { index: usize, value: f64 },

    /// Raster file (PFM/PGM) is malformed.
    #[error("raster format error: {0}")]
    RasterFormat(String),

    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A record references an unknown scene instance.
    #[error("unknown instance {0}")]
    UnknownInstance(u32),

    /// Labels are missing for an instance that must be encoded.
    #[error("missing labels for instance {0}")]
    MissingLabels(u32),

    /// Two tensors that must share a layout do not.
    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Configuration file is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Descriptor file is malformed or references missing data.
    #[error("descriptor error: {0}")]
    Descriptor(String),

    /// Failure inside a named pipeline stage.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Underlying filesystem failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// An internal invariant was violated; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Wraps an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// True when the error indicates a crate bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        match self {
            Error::Internal(_) => true,
            Error::Stage { source, .. } => source.is_internal(),
            _ => false,
        }
    }
}
