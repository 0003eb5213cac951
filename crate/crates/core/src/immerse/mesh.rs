//! Wavefront OBJ export with a CSV sidecar.
//!
//! Vertices are written row by row (`t` slowest) with 17 significant
//! digits; masked nodes are left out and the remaining vertices renumbered.
//! A quad is emitted for every grid cell whose four corners survive. The
//! sidecar has one row per grid node:
//! `ix,it,x,t,masked,compat,K`, with `nan` where `K` was not audited.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use super::frame::ImmersedSurface;
use super::ImmerseError;

/// Counts of what was written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshSummary {
    pub vertices: usize,
    pub faces: usize,
}

/// Sidecar path for a mesh path: `surface.obj` → `surface.csv`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

pub fn mesh_text(surf: &ImmersedSurface) -> (String, MeshSummary) {
    let spec = surf.spec;
    let mut ids = vec![0usize; spec.len()];
    let mut out = String::from("# pss surface\n");
    let mut next = 1;
    for (k, p) in surf.positions.iter().enumerate() {
        if surf.mask[k] {
            continue;
        }
        ids[k] = next;
        next += 1;
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
    }
    let mut faces = 0;
    for it in 0..spec.nt.saturating_sub(1) {
        for ix in 0..spec.nx.saturating_sub(1) {
            let c = [
                spec.idx(ix, it),
                spec.idx(ix + 1, it),
                spec.idx(ix + 1, it + 1),
                spec.idx(ix, it + 1),
            ];
            if c.iter().any(|&k| surf.mask[k]) {
                continue;
            }
            let _ = writeln!(
                out,
                "f {} {} {} {}",
                ids[c[0]], ids[c[1]], ids[c[2]], ids[c[3]]
            );
            faces += 1;
        }
    }
    (
        out,
        MeshSummary {
            vertices: next - 1,
            faces,
        },
    )
}

pub fn sidecar_text(surf: &ImmersedSurface, curvature: Option<&[f64]>) -> String {
    let spec = surf.spec;
    let mut out = String::from("ix,it,x,t,masked,compat,K\n");
    for it in 0..spec.nt {
        for ix in 0..spec.nx {
            let k = spec.idx(ix, it);
            let kv = curvature.map_or(f64::NAN, |c| c[k]);
            let _ = writeln!(
                out,
                "{ix},{it},{:.16e},{:.16e},{},{:.6e},{}",
                spec.x(ix),
                spec.t(it),
                u8::from(surf.mask[k]),
                surf.compat[k],
                if kv.is_nan() {
                    "nan".to_string()
                } else {
                    format!("{kv:.6e}")
                }
            );
        }
    }
    out
}

/// Write the mesh to `path` and the sidecar next to it.
pub fn export_mesh(
    surf: &ImmersedSurface,
    curvature: Option<&[f64]>,
    path: &Path,
) -> Result<MeshSummary, ImmerseError> {
    if surf
        .positions
        .iter()
        .zip(&surf.mask)
        .any(|(p, m)| !m && !p.iter().all(|c| c.is_finite()))
    {
        return Err(ImmerseError::InvalidSolution(
            "surface has non-finite positions".into(),
        ));
    }
    let (text, summary) = mesh_text(surf);
    std::fs::write(path, text)?;
    std::fs::write(sidecar_path(path), sidecar_text(surf, curvature))?;
    Ok(summary)
}

/// Vertices and faces of an OBJ file (1-based indices as written).
pub fn import_mesh(path: &Path) -> Result<(Vec<Vector3<f64>>, Vec<Vec<usize>>), ImmerseError> {
    let text = std::fs::read_to_string(path)?;
    let bad = |line: usize| ImmerseError::InvalidSolution(format!("malformed mesh line {line}"));
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .map(|p| p.parse().map_err(|_| bad(i + 1)))
                    .collect::<Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(bad(i + 1));
                }
                verts.push(Vector3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let f: Vec<usize> = parts
                    .map(|p| {
                        p.split('/')
                            .next()
                            .unwrap_or("")
                            .parse()
                            .map_err(|_| bad(i + 1))
                    })
                    .collect::<Result<_, _>>()?;
                faces.push(f);
            }
            _ => {}
        }
    }
    Ok((verts, faces))
}
