//! Instance files: a JSON header next to a binary sidecar holding the
//! triangle table and the vertex/edge representative tables.
//!
//! Sidecar layout (little endian): magic `HDXT`, format version `u32`,
//! triangle count `u64`, bytes per triangle `u32`, the packed canonical
//! triangle serializations, then for vertices and for edges a count `u64`
//! followed by `(type: u8, rep triangle: u32)` records.

use std::fs;
use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ComplexInstance, GroupElement};
use crate::algebra::Ring;
use crate::{HdxError, Result};

pub const INSTANCE_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"HDXT";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceCounts {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceHeader {
    pub version: u32,
    pub q: u32,
    pub n: usize,
    pub phi: Vec<u32>,
    pub group_order: usize,
    pub counts: InstanceCounts,
    /// Sidecar file name, relative to the header.
    pub sidecar: String,
}

fn sidecar_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("bin")
}

/// Writes `path` (JSON) and its `.bin` sidecar; returns the header.
pub fn save_instance(x: &ComplexInstance, path: &Path) -> Result<InstanceHeader> {
    let side = sidecar_path(path);
    let header = InstanceHeader {
        version: INSTANCE_VERSION,
        q: x.q(),
        n: x.n(),
        phi: x.phi().to_vec(),
        group_order: x.num_triangles(),
        counts: InstanceCounts {
            vertices: x.num_vertices(),
            edges: x.num_edges(),
            triangles: x.num_triangles(),
        },
        sidecar: side
            .file_name()
            .and_then(|s| s.to_str())
            .ok_or_else(|| HdxError::Parameter(format!("bad instance path {}", path.display())))?
            .to_string(),
    };
    let ring = x.ring();
    let width = 9 * ring.n();
    let mut buf =
        Vec::with_capacity(24 + width * x.num_triangles() + 10 * (x.num_vertices() + x.num_edges()));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&INSTANCE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(x.num_triangles() as u64).to_le_bytes());
    buf.extend_from_slice(&(width as u32).to_le_bytes());
    for g in x.elements() {
        buf.extend_from_slice(&g.to_bytes(ring));
    }
    let (vreps, ereps) = x.rep_triangles();
    buf.extend_from_slice(&(vreps.len() as u64).to_le_bytes());
    for (v, &t) in vreps.iter().enumerate() {
        buf.push(x.vertex_type(v) as u8);
        buf.extend_from_slice(&t.to_le_bytes());
    }
    buf.extend_from_slice(&(ereps.len() as u64).to_le_bytes());
    for (e, &t) in ereps.iter().enumerate() {
        buf.push(x.edge_type(e) as u8);
        buf.extend_from_slice(&t.to_le_bytes());
    }
    fs::write(&side, buf)?;
    fs::write(path, serde_json::to_string_pretty(&header)?)?;
    Ok(header)
}

fn read_array<const N: usize>(c: &mut Cursor<Vec<u8>>) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    c.read_exact(&mut b)?;
    Ok(b)
}

/// Loads an instance, rebuilding all face tables from the triangle list and
/// checking them against the stored representative tables.
pub fn load_instance(path: &Path) -> Result<ComplexInstance> {
    let header: InstanceHeader = serde_json::from_str(&fs::read_to_string(path)?)?;
    if header.version != INSTANCE_VERSION {
        return Err(HdxError::Validation(format!(
            "unsupported instance version {}",
            header.version
        )));
    }
    let side = path.with_file_name(&header.sidecar);
    let mut c = Cursor::new(fs::read(&side)?);
    if &read_array::<4>(&mut c)? != MAGIC {
        return Err(HdxError::Validation("sidecar has wrong magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut c)?);
    let count = u64::from_le_bytes(read_array(&mut c)?) as usize;
    let width = u32::from_le_bytes(read_array(&mut c)?) as usize;
    let ring = Ring::new(header.q, &header.phi)?;
    if version != INSTANCE_VERSION || width != 9 * ring.n() || count != header.group_order {
        return Err(HdxError::Validation("sidecar does not match its header".into()));
    }
    let mut elements = Vec::with_capacity(count);
    let mut bytes = vec![0u8; width];
    for _ in 0..count {
        c.read_exact(&mut bytes)?;
        elements.push(GroupElement::from_bytes(&bytes, &ring)?);
    }
    let x = ComplexInstance::from_elements(ring, elements)?;
    let mut read_table = |expected: usize, type_of: &dyn Fn(usize) -> usize, reps: &[u32]| -> Result<()> {
        let n = u64::from_le_bytes(read_array(&mut c)?) as usize;
        if n != expected {
            return Err(HdxError::Validation(format!(
                "table has {n} rows, expected {expected}"
            )));
        }
        for (i, &rep) in reps.iter().enumerate() {
            let ty = read_array::<1>(&mut c)?[0] as usize;
            let t = u32::from_le_bytes(read_array(&mut c)?);
            if ty != type_of(i) || t != rep {
                return Err(HdxError::Validation(format!(
                    "face {i} differs from the rebuilt complex"
                )));
            }
        }
        Ok(())
    };
    let (vreps, ereps) = x.rep_triangles();
    read_table(header.counts.vertices, &|v| x.vertex_type(v), vreps)?;
    read_table(header.counts.edges, &|e| x.edge_type(e), ereps)?;
    Ok(x)
}
