//! Binary file formats: PFM depth images, 16-bit PGM instance masks, and
//! the grid-tensor container.
//!
//! Tensor container layout (all integers and floats little-endian):
//!
//! | offset | field                                            |
//! |--------|--------------------------------------------------|
//! | 0      | magic `PQT1`                                     |
//! | 4      | version `u16` (currently 1)                      |
//! | 6      | symmetry kind `u8` (0 none, 1 cyclic,            |
//! |        | 2 revolution, 3 revolution with plane)           |
//! | 7      | mirror plane declared `u8` (0/1)                 |
//! | 8      | flags `u8` (bit 0: grasp channels excluded)      |
//! | 9      | cyclic order `u32` (1 unless kind is cyclic)     |
//! | 13     | grid side `u32`, family size `u32`,              |
//! |        | channel count `u32`                              |
//! | 25     | image width `u32`, height `u32`                  |
//! | 33     | `fx fy cx cy near far` as `f64`                  |
//! | 81     | camera pose `qw qx qy qz tx ty tz` as `f64`      |
//! | 137    | payload: `S*S*C` `f32`, row-major channel-last   |
//!
//! Payload values must be finite and inside `[0, 1]`; readers reject
//! anything else, as well as truncated or oversized payloads.

use crate::codec::{GridSpec, GroundTruthTensor};
use crate::error::Error;
use crate::geom::Pose;
use crate::io::write_atomic;
use crate::scene::{CameraModel, Raster};
use crate::symmetry::{SymmetryClass, SymmetryKind};
use crate::Result;
use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use std::path::Path;

pub const TENSOR_MAGIC: &[u8; 4] = b"PQT1";
pub const TENSOR_VERSION: u16 = 1;
const FLAG_GRASPS_EXCLUDED: u8 = 1;
const TENSOR_HEADER: usize = 137;

/// Serializes a tensor into the container format.
pub fn tensor_to_bytes(tensor: &GroundTruthTensor) -> Result<Vec<u8>> {
    for (index, &value) in tensor.data.iter().enumerate() {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(Error::TensorValue { index, value });
        }
    }
    let spec = &tensor.spec;
    let (kind, order) = match spec.symmetry.kind {
        SymmetryKind::None => (0u8, 1u32),
        SymmetryKind::Cyclic(k) => (1, k),
        SymmetryKind::Revolution => (2, 1),
        SymmetryKind::RevolutionWithPlane => (3, 1),
    };
    let cam = &spec.camera;
    let q = cam.pose.rotation;
    let t = cam.pose.translation;

    let payload = spec.s as usize * spec.s as usize * spec.channels() as usize;
    let mut out = Vec::with_capacity(TENSOR_HEADER + payload * 4);
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&TENSOR_VERSION.to_le_bytes());
    out.push(kind);
    out.push(spec.symmetry.mirror_plane as u8);
    out.push(if tensor.grasp_labels_valid { 0 } else { FLAG_GRASPS_EXCLUDED });
    for v in [order, spec.s, spec.grasp_count, spec.channels(), cam.width, cam.height] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [cam.fx, cam.fy, cam.cx, cam.cy, cam.near, cam.far] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [q.w, q.i, q.j, q.k, t.x, t.y, t.z] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &v in &tensor.data {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn u8(&mut self) -> u8 {
        let v = self.bytes[self.pos];
        self.pos += 1;
        v
    }
    fn u16(&mut self) -> u16 {
        let v = u16::from_le_bytes(self.bytes[self.pos..self.pos + 2].try_into().unwrap());
        self.pos += 2;
        v
    }
    fn u32(&mut self) -> u32 {
        let v = u32::from_le_bytes(self.bytes[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        v
    }
    fn f64(&mut self) -> f64 {
        let v = f64::from_le_bytes(self.bytes[self.pos..self.pos + 8].try_into().unwrap());
        self.pos += 8;
        v
    }
    fn f32(&mut self) -> f32 {
        let v = f32::from_le_bytes(self.bytes[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        v
    }
}

/// Parses a tensor from container bytes, validating the header and every
/// payload value.
pub fn tensor_from_bytes(bytes: &[u8]) -> Result<GroundTruthTensor> {
    if bytes.len() < 4 || &bytes[..4] != TENSOR_MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < 6 {
        return Err(Error::TruncatedPayload { expected: TENSOR_HEADER, found: bytes.len() });
    }
    let mut c = Cursor { bytes, pos: 4 };
    let version = c.u16();
    if version != TENSOR_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    if bytes.len() < TENSOR_HEADER {
        return Err(Error::TruncatedPayload { expected: TENSOR_HEADER, found: bytes.len() });
    }
    let kind_byte = c.u8();
    let mirror_byte = c.u8();
    let flags = c.u8();
    if mirror_byte > 1 {
        return Err(Error::InvalidArgument(format!("bad mirror byte {mirror_byte}")));
    }
    if flags & !FLAG_GRASPS_EXCLUDED != 0 {
        return Err(Error::InvalidArgument(format!("unknown flags {flags:#x}")));
    }
    let order = c.u32();
    let s = c.u32();
    let grasp_count = c.u32();
    let channels = c.u32();
    let width = c.u32();
    let height = c.u32();

    let kind = match kind_byte {
        0 => SymmetryKind::None,
        1 => SymmetryKind::Cyclic(order),
        2 => SymmetryKind::Revolution,
        3 => SymmetryKind::RevolutionWithPlane,
        other => {
            return Err(Error::InvalidArgument(format!("unknown symmetry kind byte {other}")))
        }
    };
    if matches!(kind, SymmetryKind::Cyclic(k) if k < 2) {
        return Err(Error::InvalidArgument(format!("cyclic order must be >= 2, found {order}")));
    }
    if !matches!(kind, SymmetryKind::Cyclic(_)) && order != 1 {
        return Err(Error::InvalidArgument(format!(
            "non-cyclic symmetry must store order 1, found {order}"
        )));
    }
    let symmetry = SymmetryClass { kind, mirror_plane: mirror_byte == 1 };

    let fx = c.f64();
    let fy = c.f64();
    let cx = c.f64();
    let cy = c.f64();
    let near = c.f64();
    let far = c.f64();
    let q = Quaternion::new(c.f64(), c.f64(), c.f64(), c.f64());
    if (q.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument("camera rotation is not a unit quaternion".into()));
    }
    let t = Vector3::new(c.f64(), c.f64(), c.f64());
    let camera = CameraModel {
        width,
        height,
        fx,
        fy,
        cx,
        cy,
        near,
        far,
        // Written from a unit quaternion; renormalizing here would perturb
        // the stored bits and break exact round trips.
        pose: Pose::new(UnitQuaternion::new_unchecked(q), t),
    };
    let spec = GridSpec::new(s, grasp_count, symmetry, camera)?;
    if channels != spec.channels() {
        return Err(Error::LayoutMismatch { declared: channels, expected: spec.channels() });
    }

    let count = s as usize * s as usize * channels as usize;
    let expected = TENSOR_HEADER + count * 4;
    if bytes.len() < expected {
        return Err(Error::TruncatedPayload { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingData { expected, found: bytes.len() });
    }
    let mut data = Vec::with_capacity(count);
    for index in 0..count {
        let value = c.f32();
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(Error::TensorValue { index, value: value as f64 });
        }
        data.push(value as f64);
    }
    Ok(GroundTruthTensor {
        spec,
        data,
        grasp_labels_valid: flags & FLAG_GRASPS_EXCLUDED == 0,
    })
}

/// Writes a tensor container file atomically.
pub fn write_tensor(path: &Path, tensor: &GroundTruthTensor) -> Result<()> {
    write_atomic(path, &tensor_to_bytes(tensor)?)
}

/// Reads a tensor container file.
pub fn read_tensor(path: &Path) -> Result<GroundTruthTensor> {
    tensor_from_bytes(&std::fs::read(path)?)
}

/// Serializes a depth raster as grayscale PFM (negative scale: little-endian,
/// rows bottom to top). Background pixels (infinite depth) become 0.
pub fn pfm_bytes(raster: &Raster) -> Vec<u8> {
    let mut out = format!("Pf\n{} {}\n-1.0\n", raster.width, raster.height).into_bytes();
    for row in (0..raster.height).rev() {
        for col in 0..raster.width {
            let d = raster.depth[(row * raster.width + col) as usize];
            let v = if d.is_finite() { d } else { 0.0 };
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Writes a depth raster as a PFM file.
pub fn write_depth_pfm(path: &Path, raster: &Raster) -> Result<()> {
    write_atomic(path, &pfm_bytes(raster))
}

fn pnm_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::RasterFormat("unexpected end of header".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn pnm_dim(token: &str) -> Result<u32> {
    token
        .parse::<u32>()
        .map_err(|_| Error::RasterFormat(format!("bad dimension {token:?}")))
        .and_then(|v| {
            if v == 0 {
                Err(Error::RasterFormat("zero dimension".into()))
            } else {
                Ok(v)
            }
        })
}

/// Reads a grayscale PFM file. Returns `(width, height, depths)` with rows
/// restored to top-to-bottom order; background pixels read back as 0.
pub fn read_pfm(path: &Path) -> Result<(u32, u32, Vec<f32>)> {
    let bytes = std::fs::read(path)?;
    let mut pos = 0usize;
    let magic = pnm_token(&bytes, &mut pos)?;
    if magic != "Pf" {
        return Err(Error::RasterFormat(format!("bad PFM magic {magic:?}")));
    }
    let width = pnm_dim(&pnm_token(&bytes, &mut pos)?)?;
    let height = pnm_dim(&pnm_token(&bytes, &mut pos)?)?;
    let scale: f64 = pnm_token(&bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::RasterFormat("bad scale".into()))?;
    if scale == 0.0 {
        return Err(Error::RasterFormat("zero scale".into()));
    }
    let little = scale < 0.0;
    pos += 1; // single whitespace byte after the scale line
    let count = width as usize * height as usize;
    if bytes.len() != pos + count * 4 {
        return Err(Error::RasterFormat(format!(
            "payload size {} does not match {}x{}",
            bytes.len().saturating_sub(pos),
            width,
            height
        )));
    }
    let mut rows: Vec<Vec<f32>> = Vec::with_capacity(height as usize);
    for _ in 0..height {
        let mut row = Vec::with_capacity(width as usize);
        for _ in 0..width {
            let raw: [u8; 4] = bytes[pos..pos + 4].try_into().unwrap();
            row.push(if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) });
            pos += 4;
        }
        rows.push(row);
    }
    rows.reverse(); // stored bottom to top
    Ok((width, height, rows.concat()))
}

/// Serializes an instance mask as 16-bit binary PGM (big-endian samples).
/// Pixel values are instance id + 1, with 0 for background.
pub fn pgm_bytes(raster: &Raster) -> Result<Vec<u8>> {
    let mut out = format!("P5\n{} {}\n65535\n", raster.width, raster.height).into_bytes();
    for m in raster.mask() {
        if m > u16::MAX as u32 {
            return Err(Error::RasterFormat(format!("instance value {m} exceeds 16-bit range")));
        }
        out.extend_from_slice(&(m as u16).to_be_bytes());
    }
    Ok(out)
}

/// Writes an instance mask as a PGM file.
pub fn write_mask_pgm(path: &Path, raster: &Raster) -> Result<()> {
    write_atomic(path, &pgm_bytes(raster)?)
}

/// Reads a 16-bit binary PGM file into `(width, height, samples)`.
pub fn read_pgm(path: &Path) -> Result<(u32, u32, Vec<u16>)> {
    let bytes = std::fs::read(path)?;
    let mut pos = 0usize;
    let magic = pnm_token(&bytes, &mut pos)?;
    if magic != "P5" {
        return Err(Error::RasterFormat(format!("bad PGM magic {magic:?}")));
    }
    let width = pnm_dim(&pnm_token(&bytes, &mut pos)?)?;
    let height = pnm_dim(&pnm_token(&bytes, &mut pos)?)?;
    let maxval = pnm_token(&bytes, &mut pos)?;
    if maxval != "65535" {
        return Err(Error::RasterFormat(format!("unsupported maxval {maxval}")));
    }
    pos += 1;
    let count = width as usize * height as usize;
    if bytes.len() != pos + count * 2 {
        return Err(Error::RasterFormat("payload size mismatch".into()));
    }
    let samples = bytes[pos..]
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok((width, height, samples))
}
