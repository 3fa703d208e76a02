//! Minimal enclosing spheres.
//!
//! Welzl's algorithm over a deterministically shuffled copy of the input
//! computes the exact optimum in expected linear time. A final cover pass
//! sets the radius to the exact covering radius of the computed center, so
//! containment of every input point never depends on the recursion's
//! tolerance choices.

use crate::error::Error;
use crate::geom::TriangleMesh;
use crate::Result;
use nalgebra::{Matrix3, Vector3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Enclosing sphere of a vertex set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingSphere {
    pub center: Vector3<f64>,
    pub radius: f64,
}

impl BoundingSphere {
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, p: &Vector3<f64>, tolerance: f64) -> bool {
        (p - self.center).norm() <= self.radius + tolerance
    }
}

/// Bounding sphere of a mesh's vertices.
pub fn bounding_sphere(mesh: &TriangleMesh) -> BoundingSphere {
    // A mesh is non-empty by construction.
    bounding_sphere_of_points(mesh.vertices()).expect("mesh has vertices")
}

/// Minimal enclosing sphere of a point set. Errors on an empty slice.
pub fn bounding_sphere_of_points(points: &[Vector3<f64>]) -> Result<BoundingSphere> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("bounding sphere of no points".into()));
    }
    // A fixed-seed shuffle gives the expected-linear-time guarantee while
    // keeping the result reproducible across runs and platforms.
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha12Rng::seed_from_u64(0x5057));
    let mut support = Vec::with_capacity(4);
    let sphere = welzl(&pts, pts.len(), &mut support);
    let radius = cover_radius(points, &sphere.center);
    Ok(BoundingSphere { center: sphere.center, radius })
}

/// Recursion over the first `m` shuffled points with the current boundary
/// support set: either the sphere of the support alone already covers the
/// prefix, or some point is outside and must itself be on the boundary.
fn welzl(pts: &[Vector3<f64>], m: usize, support: &mut Vec<Vector3<f64>>) -> BoundingSphere {
    if m == 0 || support.len() == 4 {
        return support_sphere(support);
    }
    let p = pts[m - 1];
    let s = welzl(pts, m - 1, support);
    if contains_loose(&s, &p) {
        return s;
    }
    support.push(p);
    let s = welzl(pts, m - 1, support);
    support.pop();
    s
}

/// Containment with a small relative slack; any slack admitted here is
/// absorbed by the final cover pass.
fn contains_loose(s: &BoundingSphere, p: &Vector3<f64>) -> bool {
    s.radius >= 0.0 && (p - s.center).norm() <= s.radius * (1.0 + 1e-10) + 1e-14
}

/// Max distance from `center` to any point.
fn cover_radius(points: &[Vector3<f64>], center: &Vector3<f64>) -> f64 {
    points.iter().map(|p| (p - center).norm()).fold(0.0, f64::max)
}

/// Smallest sphere with all support points on its boundary (up to four).
/// The empty support yields a negative radius that contains nothing.
fn support_sphere(support: &[Vector3<f64>]) -> BoundingSphere {
    match support {
        [] => BoundingSphere { center: Vector3::zeros(), radius: -1.0 },
        [a] => BoundingSphere { center: *a, radius: 0.0 },
        [a, b] => diametral(a, b),
        [a, b, c] => circumcircle(a, b, c)
            .map(|(center, radius)| BoundingSphere { center, radius })
            .unwrap_or_else(|| widest_pair(support)),
        [a, b, c, d] => {
            if let Some((center, radius)) = circumsphere(a, b, c, d) {
                return BoundingSphere { center, radius };
            }
            // Near-coplanar support: the best three-point sphere that still
            // covers the remaining point, or the widest pair as a last
            // resort. Exact arithmetic never reaches this branch.
            let triples = [[a, b, c, d], [a, b, d, c], [a, c, d, b], [b, c, d, a]];
            triples
                .iter()
                .filter_map(|[x, y, z, rest]| {
                    let s = support_sphere(&[**x, **y, **z]);
                    contains_loose(&s, rest).then_some(s)
                })
                .min_by(|s, t| s.radius.total_cmp(&t.radius))
                .unwrap_or_else(|| widest_pair(support))
        }
        _ => unreachable!("support sets never exceed four points"),
    }
}

fn diametral(a: &Vector3<f64>, b: &Vector3<f64>) -> BoundingSphere {
    BoundingSphere { center: (a + b) * 0.5, radius: (b - a).norm() * 0.5 }
}

fn widest_pair(points: &[Vector3<f64>]) -> BoundingSphere {
    let mut best = diametral(&points[0], &points[0]);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let s = diametral(a, b);
            if s.radius > best.radius {
                best = s;
            }
        }
    }
    best
}

/// Center and radius of the circle through three points, inside their plane.
fn circumcircle(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
) -> Option<(Vector3<f64>, f64)> {
    let u = b - a;
    let v = c - a;
    let uu = u.dot(&u);
    let uv = u.dot(&v);
    let vv = v.dot(&v);
    let det = uu * vv - uv * uv;
    if det <= (uu * vv) * 1e-14 {
        return None;
    }
    let alpha = (0.5 * (uu * vv - vv * uv)) / det;
    let beta = (0.5 * (uu * vv - uu * uv)) / det;
    let center = a + u * alpha + v * beta;
    Some((center, (center - a).norm()))
}

/// Center and radius of the sphere through four points.
fn circumsphere(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
    d: &Vector3<f64>,
) -> Option<(Vector3<f64>, f64)> {
    let rows = [b - a, c - a, d - a];
    let m = Matrix3::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()]);
    let rhs = Vector3::new(
        0.5 * (b.norm_squared() - a.norm_squared()),
        0.5 * (c.norm_squared() - a.norm_squared()),
        0.5 * (d.norm_squared() - a.norm_squared()),
    );
    // Perpendicular-bisector planes; rhs already absorbs the a-offset.
    let center = m.lu().solve(&rhs)?;
    Some((center, (center - a).norm()))
}
