//! Object symmetry classes and symmetry-aware pose math.
//!
//! The symmetry axis is fixed to the object-frame z-axis. A pose is treated
//! as the equivalence class `{ p * Rz(theta) }` over the object's proper
//! symmetry rotations; distance quotients that class out and
//! canonicalization picks one representative deterministically: the one that
//! maximizes the z-component of the rotated object x-axis in the pose's
//! parent frame (ties broken toward the smallest rotation).

use crate::error::Error;
use crate::geom::{Pose, SurfaceSample};
use crate::Result;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Proper symmetry of an object about its z-axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryKind {
    /// No rotational symmetry.
    None,
    /// Invariant under z-rotations by multiples of `2pi/k`, `k >= 2`.
    Cyclic(u32),
    /// Invariant under every z-rotation (surface of revolution).
    Revolution,
    /// Surface of revolution that is additionally mirror symmetric across a
    /// plane; treated as `Revolution` for representatives and distance.
    RevolutionWithPlane,
}

/// Declared symmetry of an object: the proper rotation kind plus an optional
/// reflection plane (fixed to the object's x-z plane) used by augmentation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymmetryWire", into = "SymmetryWire")]
pub struct SymmetryClass {
    pub kind: SymmetryKind,
    pub mirror_plane: bool,
}

#[derive(Serialize, Deserialize, Clone)]
struct SymmetryWire {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<u32>,
    #[serde(default)]
    mirror_plane: bool,
}

impl TryFrom<SymmetryWire> for SymmetryClass {
    type Error = Error;
    fn try_from(w: SymmetryWire) -> Result<Self> {
        let kind = match w.kind.as_str() {
            "none" => SymmetryKind::None,
            "cyclic" => {
                let k = w.order.ok_or_else(|| {
                    Error::InvalidArgument("cyclic symmetry needs an order".into())
                })?;
                if k < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "cyclic order must be >= 2, found {k}"
                    )));
                }
                SymmetryKind::Cyclic(k)
            }
            "revolution" => SymmetryKind::Revolution,
            "revolution_with_plane" => SymmetryKind::RevolutionWithPlane,
            other => {
                return Err(Error::InvalidArgument(format!("unknown symmetry kind {other:?}")))
            }
        };
        Ok(SymmetryClass { kind, mirror_plane: w.mirror_plane })
    }
}

impl From<SymmetryClass> for SymmetryWire {
    fn from(s: SymmetryClass) -> Self {
        let (kind, order) = match s.kind {
            SymmetryKind::None => ("none", None),
            SymmetryKind::Cyclic(k) => ("cyclic", Some(k)),
            SymmetryKind::Revolution => ("revolution", None),
            SymmetryKind::RevolutionWithPlane => ("revolution_with_plane", None),
        };
        SymmetryWire { kind: kind.into(), order, mirror_plane: s.mirror_plane }
    }
}

impl SymmetryClass {
    pub fn none() -> Self {
        SymmetryClass { kind: SymmetryKind::None, mirror_plane: false }
    }

    pub fn cyclic(order: u32) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidArgument(format!(
                "cyclic order must be >= 2, found {order}"
            )));
        }
        Ok(SymmetryClass { kind: SymmetryKind::Cyclic(order), mirror_plane: false })
    }

    pub fn revolution() -> Self {
        SymmetryClass { kind: SymmetryKind::Revolution, mirror_plane: false }
    }

    pub fn revolution_with_plane() -> Self {
        SymmetryClass { kind: SymmetryKind::RevolutionWithPlane, mirror_plane: false }
    }

    pub fn with_mirror_plane(mut self) -> Self {
        self.mirror_plane = true;
        self
    }

    /// Order of the discrete z-rotation group: 1 for `None` and the
    /// revolution kinds (whose continuous part is handled separately).
    pub fn cyclic_order(&self) -> u32 {
        match self.kind {
            SymmetryKind::Cyclic(k) => k,
            _ => 1,
        }
    }

    pub fn is_revolution(&self) -> bool {
        matches!(self.kind, SymmetryKind::Revolution | SymmetryKind::RevolutionWithPlane)
    }

    /// Whether mirror augmentation is legal: either a plane is declared or
    /// the object is a surface of revolution (every plane through the axis
    /// is then a reflection symmetry).
    pub fn mirror_capable(&self) -> bool {
        self.mirror_plane || self.is_revolution()
    }
}

/// Enumerates poses equivalent to `p` under the symmetry. `None` yields
/// `[p]`, `Cyclic(k)` its `k` rotations, and the revolution kinds `m` poses
/// evenly discretizing the continuous axis rotation.
pub fn symmetry_representatives(p: &Pose, s: &SymmetryClass, m: usize) -> Result<Vec<Pose>> {
    if m < 1 {
        return Err(Error::InvalidArgument("representative count must be >= 1".into()));
    }
    let steps: Vec<f64> = match s.kind {
        SymmetryKind::None => vec![0.0],
        SymmetryKind::Cyclic(k) => (0..k).map(|j| TAU * j as f64 / k as f64).collect(),
        SymmetryKind::Revolution | SymmetryKind::RevolutionWithPlane => {
            (0..m).map(|j| TAU * j as f64 / m as f64).collect()
        }
    };
    Ok(steps
        .into_iter()
        .map(|theta| if theta == 0.0 { *p } else { p.compose(&Pose::rotation_z(theta)) })
        .collect())
}

/// Context for symmetry-aware pose distances: a representative point set in
/// the object frame, the symmetry class, and the object diameter used by
/// success thresholds.
#[derive(Clone, Debug)]
pub struct PoseDistanceContext {
    points: Vec<Vector3<f64>>,
    symmetry: SymmetryClass,
    diameter: f64,
}

impl PoseDistanceContext {
    pub fn new(
        points: Vec<Vector3<f64>>,
        symmetry: SymmetryClass,
        diameter: f64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("pose distance needs a non-empty point set".into()));
        }
        let diameter_ok = diameter.is_finite() && diameter > 0.0;
        if !diameter_ok {
            return Err(Error::InvalidArgument(format!("diameter must be positive: {diameter}")));
        }
        Ok(PoseDistanceContext { points, symmetry, diameter })
    }

    pub fn from_samples(
        samples: &[SurfaceSample],
        symmetry: SymmetryClass,
        diameter: f64,
    ) -> Result<Self> {
        Self::new(samples.iter().map(|s| s.position).collect(), symmetry, diameter)
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn symmetry(&self) -> &SymmetryClass {
        &self.symmetry
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }
}

/// RMS distance between the two transformed point sets.
fn rms(a: &Pose, b: &Pose, points: &[Vector3<f64>]) -> f64 {
    let total: f64 = points.iter().map(|x| (a.apply(x) - b.apply(x)).norm_squared()).sum();
    (total / points.len() as f64).sqrt()
}

/// One-sided distance: minimum RMS over symmetry representatives of `b`.
fn one_sided(a: &Pose, b: &Pose, ctx: &PoseDistanceContext) -> f64 {
    match ctx.symmetry.kind {
        SymmetryKind::None => rms(a, b, &ctx.points),
        SymmetryKind::Cyclic(k) => (0..k)
            .map(|j| {
                let rep = b.compose(&Pose::rotation_z(TAU * j as f64 / k as f64));
                rms(a, &rep, &ctx.points)
            })
            .fold(f64::INFINITY, f64::min),
        SymmetryKind::Revolution | SymmetryKind::RevolutionWithPlane => {
            // Minimize over the continuous z-rotation analytically:
            // sum ||a x - b Rz(t) x||^2 = Q - 2K - 2(C cos t + S sin t),
            // maximized by the phase of (C, S).
            let inv_rb = b.rotation.inverse();
            let (mut c, mut s, mut k, mut q) = (0.0, 0.0, 0.0, 0.0);
            for x in &ctx.points {
                let u = a.apply(x) - b.translation;
                let w = inv_rb * u;
                c += x.x * w.x + x.y * w.y;
                s += x.x * w.y - x.y * w.x;
                k += x.z * w.z;
                q += u.norm_squared() + x.norm_squared();
            }
            let total = (q - 2.0 * k - 2.0 * c.hypot(s)).max(0.0);
            (total / ctx.points.len() as f64).sqrt()
        }
    }
}

/// Symmetry-aware pose distance: the smaller of the two one-sided RMS
/// minima, which makes the function symmetric even though the sampled point
/// set is not exactly invariant under the symmetry group.
pub fn pose_distance(a: &Pose, b: &Pose, ctx: &PoseDistanceContext) -> f64 {
    one_sided(a, b, ctx).min(one_sided(b, a, ctx))
}

/// Tie window when comparing candidate representatives' objective values.
const CANONICAL_TIE: f64 = 1e-9;

/// Deterministic class representative: rotates `p` about the object z-axis
/// so the object x-axis gains the largest z-component in the parent frame.
///
/// Exactly idempotent: re-canonicalizing returns a bit-identical pose.
pub fn canonicalize_pose(p: &Pose, s: &SymmetryClass) -> Pose {
    match s.kind {
        SymmetryKind::None => *p,
        SymmetryKind::Cyclic(k) => {
            let m = p.rotation.to_rotation_matrix();
            // z-component of R * Rz(theta) * ex = A cos(theta) + B sin(theta).
            let a = m[(2, 0)];
            let b = m[(2, 1)];
            let mut best_j = 0usize;
            let mut best_v = f64::NEG_INFINITY;
            for j in 0..k as usize {
                let theta = TAU * j as f64 / k as f64;
                let v = a * theta.cos() + b * theta.sin();
                if v > best_v + CANONICAL_TIE {
                    best_v = v;
                    best_j = j;
                }
            }
            if best_j == 0 {
                *p
            } else {
                p.compose(&Pose::rotation_z(TAU * best_j as f64 / k as f64))
            }
        }
        SymmetryKind::Revolution | SymmetryKind::RevolutionWithPlane => {
            let m = p.rotation.to_rotation_matrix();
            let a = m[(2, 0)];
            let b = m[(2, 1)];
            let h = a.hypot(b);
            // Max of A cos + B sin is h at atan2(B, A); skip when already
            // there (or when the x-axis cannot leave the horizontal plane),
            // which also makes the operation exactly idempotent.
            if h - a <= h * 1e-12 {
                return *p;
            }
            let theta = b.atan2(a);
            p.compose(&Pose::rotation_z(theta))
        }
    }
}
