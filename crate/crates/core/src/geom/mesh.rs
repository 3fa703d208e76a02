//! Triangle meshes, an ASCII OBJ subset, and area-weighted surface sampling.

use crate::error::Error;
use crate::Result;
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::path::Path;

/// Triangles below this area (square meters) are dropped at construction.
const DEGENERATE_AREA: f64 = 1e-12;

/// Indexed triangle mesh in meters.
///
/// Invariants: every index is in range, vertex positions are finite, and no
/// retained triangle is degenerate (area below `1e-12 m^2`).
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh, dropping degenerate triangles. Errors if no vertices or
    /// no non-degenerate triangles remain, or an index is out of range.
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for v in &vertices {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(Error::InvalidArgument("non-finite vertex position".into()));
            }
        }
        let n = vertices.len() as u32;
        let mut kept = Vec::with_capacity(triangles.len());
        for t in triangles {
            if t.iter().any(|&i| i >= n) {
                return Err(Error::InvalidArgument(format!(
                    "triangle index out of range: {t:?} with {n} vertices"
                )));
            }
            let area = triangle_area(
                &vertices[t[0] as usize],
                &vertices[t[1] as usize],
                &vertices[t[2] as usize],
            );
            if area >= DEGENERATE_AREA {
                kept.push(t);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyMesh);
        }
        Ok(TriangleMesh { vertices, triangles: kept })
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    /// Corner positions of triangle `i`.
    pub fn corners(&self, i: usize) -> [Vector3<f64>; 3] {
        let t = self.triangles[i];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.corners(i);
        triangle_area(&a, &b, &c)
    }

    /// Unit normal of triangle `i` (right-hand rule over the winding).
    pub fn triangle_normal(&self, i: usize) -> Vector3<f64> {
        let [a, b, c] = self.corners(i);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }
}

fn triangle_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Point drawn from a mesh surface, with the flat normal of its triangle.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceSample {
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub triangle: u32,
}

/// Draws `count` points uniformly by area. Deterministic for a fixed seed.
pub fn sample_surface(mesh: &TriangleMesh, count: usize, seed: u64) -> Vec<SurfaceSample> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut cumulative = Vec::with_capacity(mesh.triangles().len());
    let mut total = 0.0;
    for i in 0..mesh.triangles().len() {
        total += mesh.triangle_area(i);
        cumulative.push(total);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let r: f64 = rng.random::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1);
        let [a, b, c] = mesh.corners(idx);
        // Uniform barycentric draw via the square-root trick.
        let s = rng.random::<f64>().sqrt();
        let t: f64 = rng.random();
        let position = a * (1.0 - s) + b * (s * (1.0 - t)) + c * (s * t);
        out.push(SurfaceSample { position, normal: mesh.triangle_normal(idx), triangle: idx as u32 });
    }
    out
}

/// Parses the ASCII OBJ subset: `v x y z` and triangular `f` records.
/// Face indices are 1-based; `i/j/k` attribute suffixes are ignored.
/// Unknown record types are skipped.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut fields = raw.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .map(|f| {
                        f.parse::<f64>().map_err(|_| Error::MeshParse {
                            line,
                            msg: format!("bad vertex coordinate {f:?}"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(Error::MeshParse {
                        line,
                        msg: format!("vertex record needs 3 coordinates, found {}", coords.len()),
                    });
                }
                vertices.push(Vector3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = fields
                    .map(|f| {
                        let head = f.split('/').next().unwrap_or("");
                        let i: i64 = head.parse().map_err(|_| Error::MeshParse {
                            line,
                            msg: format!("bad face index {f:?}"),
                        })?;
                        if i < 1 {
                            return Err(Error::MeshParse {
                                line,
                                msg: format!("face index must be positive, found {i}"),
                            });
                        }
                        Ok(i as u32 - 1)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(Error::MeshParse {
                        line,
                        msg: format!("only triangular faces supported, found {} corners", idx.len()),
                    });
                }
                triangles.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, triangles).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::MeshParse { line: 0, msg },
        other => other,
    })
}

/// Loads a mesh from an OBJ file.
pub fn load_obj(path: &Path) -> Result<TriangleMesh> {
    parse_obj(&std::fs::read_to_string(path)?)
}

/// Writes the OBJ subset emitted by this crate: `v` and `f` records only,
/// floats in shortest-roundtrip decimal.
pub fn save_obj(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let mut text = String::new();
    for v in mesh.vertices() {
        text.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
    }
    for t in mesh.triangles() {
        text.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    crate::io::write_atomic(path, text.as_bytes())
}
