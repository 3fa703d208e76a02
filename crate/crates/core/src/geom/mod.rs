//! Rigid-body poses and intrinsic Z-Y-Z Euler factorization.
//!
//! Conventions used throughout the crate:
//!
//! | item        | convention                                              |
//! |-------------|---------------------------------------------------------|
//! | rotation    | unit quaternion, `(w, x, y, z)` on the wire             |
//! | pose        | maps object-frame points into the parent frame          |
//! | Euler triple| intrinsic Z-Y-Z: `Rz(phi1) * Ry(phi2) * Rz(phi3)`       |
//! | angle ranges| `phi1, phi2` in `[0, 2pi)`, `phi3` in `[0, 2pi/order)`  |
//! | units       | meters and radians                                      |

mod mesh;
mod shapes;
mod sphere;

pub use mesh::{load_obj, parse_obj, sample_surface, save_obj, SurfaceSample, TriangleMesh};
pub use shapes::{box_mesh, icosphere, parallel_plates, plate};
pub use sphere::{bounding_sphere, bounding_sphere_of_points, BoundingSphere};

use nalgebra::{Quaternion, Rotation3, Unit, UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Rigid transform: rotation followed by translation.
///
/// The rotation is kept unit-norm by construction; [`Pose::compose`]
/// renormalizes so that chained transforms cannot drift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PoseWire", into = "PoseWire")]
pub struct Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

/// Wire form of a pose: quaternion as `[w, x, y, z]`, translation `[x, y, z]`.
#[derive(Clone, Copy, Serialize, Deserialize)]
struct PoseWire {
    q: [f64; 4],
    t: [f64; 3],
}

impl From<PoseWire> for Pose {
    fn from(w: PoseWire) -> Self {
        let q = Quaternion::new(w.q[0], w.q[1], w.q[2], w.q[3]);
        // Preserve bits for well-formed input; repair drifted quaternions.
        let rotation = if (q.norm() - 1.0).abs() <= 1e-9 {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::new_normalize(q)
        };
        Pose { rotation, translation: Vector3::new(w.t[0], w.t[1], w.t[2]) }
    }
}

impl From<Pose> for PoseWire {
    fn from(p: Pose) -> Self {
        let q = p.rotation.quaternion();
        PoseWire { q: [q.w, q.i, q.j, q.k], t: [p.translation.x, p.translation.y, p.translation.z] }
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

impl Pose {
    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Pose { rotation, translation }
    }

    pub fn identity() -> Self {
        Pose { rotation: UnitQuaternion::identity(), translation: Vector3::zeros() }
    }

    /// Pure rotation about the frame z-axis.
    pub fn rotation_z(angle: f64) -> Self {
        Pose::new(rotation_z(angle), Vector3::zeros())
    }

    /// Pure translation.
    pub fn translation_xyz(x: f64, y: f64, z: f64) -> Self {
        Pose::new(UnitQuaternion::identity(), Vector3::new(x, y, z))
    }

    /// `self` applied after `other`: maps `other`'s source frame into
    /// `self`'s target frame. The composed rotation is renormalized.
    pub fn compose(&self, other: &Pose) -> Pose {
        let q = self.rotation.quaternion() * other.rotation.quaternion();
        Pose {
            rotation: UnitQuaternion::new_normalize(q),
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// Transforms a point from the pose's source frame into its target frame.
    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Rotates a direction vector (no translation).
    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.rotation.inverse();
        Pose { rotation: inv, translation: -(inv * self.translation) }
    }
}

/// Rotation by `angle` about the z-axis.
pub fn rotation_z(angle: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vector3::z_axis(), angle)
}

/// Geodesic angle between two rotations, in `[0, pi]`.
pub fn rotation_angle_between(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    (a.inverse() * b).angle()
}

/// Draws a rotation uniformly over SO(3) (Shoemake's method).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<f64> {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let u3: f64 = rng.random();
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let q = Quaternion::new(
        b * (TAU * u3).cos(),
        a * (TAU * u2).sin(),
        a * (TAU * u2).cos(),
        b * (TAU * u3).sin(),
    );
    UnitQuaternion::new_normalize(q)
}

/// Intrinsic Z-Y-Z Euler angles with the third angle folded into the
/// fundamental domain of a cyclic symmetry of the given order.
///
/// Invariant: `phi1, phi2` in `[0, 2pi)` and `phi3` in `[0, 2pi/order)`;
/// converting to a rotation and back reproduces the triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerTriple {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    /// Cyclic order that bounds `phi3`; 1 means the full `[0, 2pi)` range.
    pub order: u32,
}

impl EulerTriple {
    /// Upper bound of the `phi3` range, `2pi / order`.
    pub fn phi3_range(&self) -> f64 {
        TAU / self.order as f64
    }
}

/// Wraps an angle into `[0, bound)`, mapping float-noise hits of the upper
/// bound back to zero.
fn wrap_half_open(x: f64, bound: f64) -> f64 {
    let r = x.rem_euclid(bound);
    if r >= bound {
        0.0
    } else {
        r
    }
}

/// Near-degenerate threshold on `sin(phi2)` below which the first and third
/// rotations share an axis and the azimuth is folded into `phi3`.
const EULER_DEGENERATE_SIN: f64 = 1e-7;

/// Factors a rotation into the canonical intrinsic Z-Y-Z triple.
///
/// When `sin(phi2)` vanishes the factorization is ambiguous; the canonical
/// choice sets `phi1 = 0` and folds the whole azimuth into `phi3`. `phi3` is
/// always reduced modulo `2pi/order`, so the reconstruction matches the input
/// only up to a z-rotation by a multiple of `2pi/order`.
///
/// Panics if `order == 0`.
pub fn euler_from_rotation(r: &UnitQuaternion<f64>, order: u32) -> EulerTriple {
    assert!(order >= 1, "cyclic order must be at least 1");
    let m: Rotation3<f64> = r.to_rotation_matrix();
    let fold = TAU / order as f64;

    // For R = Rz(p1) Ry(p2) Rz(p3):
    //   m[(2,2)] = cos p2
    //   m[(0,2)] = cos p1 sin p2, m[(1,2)] = sin p1 sin p2
    //   m[(2,0)] = -sin p2 cos p3, m[(2,1)] = sin p2 sin p3
    let s2 = m[(2, 0)].hypot(m[(2, 1)]);
    let c2 = m[(2, 2)].clamp(-1.0, 1.0);

    if s2 >= EULER_DEGENERATE_SIN {
        let phi1 = wrap_half_open(m[(1, 2)].atan2(m[(0, 2)]), TAU);
        let phi2 = s2.atan2(c2);
        let phi3 = wrap_half_open(m[(2, 1)].atan2(-m[(2, 0)]), fold);
        EulerTriple { phi1, phi2, phi3, order }
    } else if c2 > 0.0 {
        // phi2 ~ 0: R ~ Rz(phi1 + phi3).
        let total = m[(1, 0)].atan2(m[(0, 0)]);
        EulerTriple { phi1: 0.0, phi2: 0.0, phi3: wrap_half_open(total, fold), order }
    } else {
        // phi2 ~ pi: with phi1 = 0, m[(0,0)] = -cos p3 and m[(0,1)] = sin p3.
        let total = m[(0, 1)].atan2(-m[(0, 0)]);
        EulerTriple {
            phi1: 0.0,
            phi2: std::f64::consts::PI,
            phi3: wrap_half_open(total, fold),
            order,
        }
    }
}

/// Rebuilds the rotation `Rz(phi1) * Ry(phi2) * Rz(phi3)`.
pub fn rotation_from_euler(e: &EulerTriple) -> UnitQuaternion<f64> {
    let rz1 = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), e.phi1);
    let ry = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), e.phi2);
    let rz3 = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), e.phi3);
    rz1 * ry * rz3
}

/// Deterministic orthonormal pair `(a, b)` completing `axis` (assumed unit)
/// to the right-handed frame `(a, b, axis)`.
pub fn stable_orthonormal(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let reference = if axis.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let v = reference - axis * reference.dot(axis);
    let a = Unit::new_normalize(v).into_inner();
    let b = axis.cross(&a);
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn compose_with_identity_is_identity_map() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = Pose::new(random_rotation(&mut rng), Vector3::new(0.3, -0.2, 1.1));
            let left = Pose::identity().compose(&p);
            let right = p.compose(&Pose::identity());
            assert_relative_eq!(left.translation, p.translation, epsilon = 1e-15);
            assert!(rotation_angle_between(&left.rotation, &p.rotation) < 1e-12);
            assert!(rotation_angle_between(&right.rotation, &p.rotation) < 1e-12);
        }
    }

    #[test]
    fn quarter_turn_about_z_moves_x_to_y() {
        let p = Pose::rotation_z(FRAC_PI_2);
        let out = p.apply(&Vector3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(out, Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn compose_keeps_quaternion_unit() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut p = Pose::identity();
        for _ in 0..1000 {
            let q = Pose::new(random_rotation(&mut rng), Vector3::new(0.01, 0.02, 0.03));
            p = p.compose(&q);
            assert!((p.rotation.quaternion().norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_undoes_apply() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..50 {
            let p = Pose::new(random_rotation(&mut rng), Vector3::new(0.4, 0.5, -0.6));
            let x = Vector3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
            let back = p.inverse().apply(&p.apply(&x));
            assert_relative_eq!(back, x, epsilon = 1e-12);
        }
    }

    #[test]
    fn euler_of_identity_is_zero_triple() {
        let e = euler_from_rotation(&UnitQuaternion::identity(), 1);
        assert_eq!((e.phi1, e.phi2, e.phi3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn euler_of_pure_z_rotation_folds_into_phi3() {
        let e = euler_from_rotation(&rotation_z(FRAC_PI_2), 1);
        assert_eq!(e.phi1, 0.0);
        assert_eq!(e.phi2, 0.0);
        assert_relative_eq!(e.phi3, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn euler_fold_respects_cyclic_order() {
        // A z-rotation by pi + 0.1 under a 2-fold symmetry reduces to 0.1.
        let e = euler_from_rotation(&rotation_z(PI + 0.1), 2);
        assert_eq!(e.phi1, 0.0);
        assert_eq!(e.phi2, 0.0);
        assert_relative_eq!(e.phi3, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn euler_ranges_and_symmetry_aware_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let r = random_rotation(&mut rng);
            for order in 1..=4u32 {
                let e = euler_from_rotation(&r, order);
                assert!((0.0..TAU).contains(&e.phi1), "phi1 out of range: {}", e.phi1);
                assert!((0.0..TAU).contains(&e.phi2), "phi2 out of range: {}", e.phi2);
                assert!(
                    (0.0..e.phi3_range()).contains(&e.phi3),
                    "phi3 out of range: {} (order {order})",
                    e.phi3
                );
                let rebuilt = rotation_from_euler(&e);
                let best = (0..order)
                    .map(|j| {
                        let rep = rebuilt * rotation_z(TAU * j as f64 / order as f64);
                        rotation_angle_between(&rep, &r)
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!(best < 1e-9, "roundtrip missed all representatives: {best}");
            }
        }
    }

    #[test]
    fn euler_roundtrip_reproduces_canonical_triple() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let mut triples: Vec<EulerTriple> = (0..200)
            .map(|_| euler_from_rotation(&random_rotation(&mut rng), 3))
            .collect();
        // Constructed degenerate cases: phi2 = 0 and phi2 = pi.
        triples.push(EulerTriple { phi1: 0.0, phi2: 0.0, phi3: 1.25, order: 3 });
        triples.push(EulerTriple { phi1: 0.0, phi2: PI, phi3: 0.75, order: 3 });
        for e in triples {
            let again = euler_from_rotation(&rotation_from_euler(&e), e.order);
            assert_relative_eq!(e.phi1, again.phi1, epsilon = 1e-9, max_relative = 1e-9);
            assert_relative_eq!(e.phi2, again.phi2, epsilon = 1e-9, max_relative = 1e-9);
            assert_relative_eq!(e.phi3, again.phi3, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn pose_serde_uses_wxyz_layout_and_roundtrips() {
        let p = Pose::new(rotation_z(0.3), Vector3::new(0.1, 0.2, 0.3));
        let text = serde_json::to_string(&p).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let q = value.get("q").unwrap().as_array().unwrap();
        assert_eq!(q.len(), 4);
        assert_relative_eq!(q[0].as_f64().unwrap(), (0.3f64 / 2.0).cos(), epsilon = 1e-15);
        let back: Pose = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn stable_orthonormal_is_a_right_handed_unit_frame() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..100 {
            let axis = random_rotation(&mut rng) * Vector3::x();
            let (a, b) = stable_orthonormal(&axis);
            assert_relative_eq!(a.norm(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(b.norm(), 1.0, epsilon = 1e-12);
            assert!(a.dot(&axis).abs() < 1e-12);
            assert!(b.dot(&axis).abs() < 1e-12);
            assert!(a.dot(&b).abs() < 1e-12);
            assert_relative_eq!(a.cross(&b).dot(&axis), 1.0, epsilon = 1e-12);
        }
    }
}
