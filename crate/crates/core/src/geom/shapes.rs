//! Procedural primitive meshes used by tests, benchmarks, and demo datasets.

use crate::geom::TriangleMesh;
use crate::Result;
use nalgebra::Vector3;
use std::collections::HashMap;

/// Axis-aligned box centered at the origin with the given full extents,
/// outward-facing windings.
pub fn box_mesh(sx: f64, sy: f64, sz: f64) -> Result<TriangleMesh> {
    let (hx, hy, hz) = (sx * 0.5, sy * 0.5, sz * 0.5);
    let vertices = vec![
        Vector3::new(-hx, -hy, -hz),
        Vector3::new(hx, -hy, -hz),
        Vector3::new(hx, hy, -hz),
        Vector3::new(-hx, hy, -hz),
        Vector3::new(-hx, -hy, hz),
        Vector3::new(hx, -hy, hz),
        Vector3::new(hx, hy, hz),
        Vector3::new(-hx, hy, hz),
    ];
    let triangles = vec![
        [4, 5, 6],
        [4, 6, 7], // z+
        [0, 2, 1],
        [0, 3, 2], // z-
        [0, 1, 5],
        [0, 5, 4], // y-
        [2, 3, 7],
        [2, 7, 6], // y+
        [0, 4, 7],
        [0, 7, 3], // x-
        [1, 2, 6],
        [1, 6, 5], // x+
    ];
    TriangleMesh::new(vertices, triangles)
}

/// Single rectangle in the xy-plane at `z = 0`, normal `+z`.
pub fn plate(sx: f64, sy: f64) -> Result<TriangleMesh> {
    let (hx, hy) = (sx * 0.5, sy * 0.5);
    TriangleMesh::new(
        vec![
            Vector3::new(-hx, -hy, 0.0),
            Vector3::new(hx, -hy, 0.0),
            Vector3::new(hx, hy, 0.0),
            Vector3::new(-hx, hy, 0.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
}

/// Two rectangles perpendicular to the x-axis at `x = +-gap/2`, each
/// `width x height` in the yz-plane, normals pointing away from each other
/// (the outer faces of a slab of thickness `gap`).
pub fn parallel_plates(gap: f64, width: f64, height: f64) -> Result<TriangleMesh> {
    let (hx, hy, hz) = (gap * 0.5, width * 0.5, height * 0.5);
    let vertices = vec![
        // x = -hx plate
        Vector3::new(-hx, -hy, -hz),
        Vector3::new(-hx, hy, -hz),
        Vector3::new(-hx, hy, hz),
        Vector3::new(-hx, -hy, hz),
        // x = +hx plate
        Vector3::new(hx, -hy, -hz),
        Vector3::new(hx, hy, -hz),
        Vector3::new(hx, hy, hz),
        Vector3::new(hx, -hy, hz),
    ];
    let triangles = vec![
        // normal -x
        [0, 2, 1],
        [0, 3, 2],
        // normal +x
        [4, 5, 6],
        [4, 6, 7],
    ];
    TriangleMesh::new(vertices, triangles)
}

/// Icosphere: subdivided icosahedron projected onto a sphere of the given
/// radius. `subdivisions = 4` yields 2562 vertices and 5120 triangles.
pub fn icosphere(radius: f64, subdivisions: u32) -> Result<TriangleMesh> {
    let t = (1.0 + 5.0f64.sqrt()) * 0.5;
    let mut vertices: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, t, 0.0),
        Vector3::new(1.0, t, 0.0),
        Vector3::new(-1.0, -t, 0.0),
        Vector3::new(1.0, -t, 0.0),
        Vector3::new(0.0, -1.0, t),
        Vector3::new(0.0, 1.0, t),
        Vector3::new(0.0, -1.0, -t),
        Vector3::new(0.0, 1.0, -t),
        Vector3::new(t, 0.0, -1.0),
        Vector3::new(t, 0.0, 1.0),
        Vector3::new(-t, 0.0, -1.0),
        Vector3::new(-t, 0.0, 1.0),
    ];
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for v in &mut vertices {
        *v = v.normalize();
    }
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0u32; 3];
            for (slot, (a, b)) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])].iter().enumerate() {
                let key = (*a.min(b), *a.max(b));
                mid[slot] = *midpoints.entry(key).or_insert_with(|| {
                    let m = ((vertices[*a as usize] + vertices[*b as usize]) * 0.5).normalize();
                    vertices.push(m);
                    vertices.len() as u32 - 1
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([f[1], mid[1], mid[0]]);
            next.push([f[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        faces = next;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    TriangleMesh::new(vertices, faces)
}
