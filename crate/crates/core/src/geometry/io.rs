//! OBJ (vertices and triangular faces only) and JSON manifests of weighted
//! measures. Floats are written with 17 significant digits so meshes round
//! trip bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DiscreteSurface, Vec3, WeightedSurfaceMeasure};

pub fn parse_obj(text: &str) -> Result<DiscreteSurface> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let coords: Vec<f64> = tok
                    .take(3)
                    .map(|t| {
                        t.parse::<f64>().map_err(|_| Error::Parse {
                            line: line_no,
                            message: format!("bad coordinate '{t}'"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "vertex needs three coordinates".into(),
                    });
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = tok
                    .map(|t| parse_index(t, vertices.len(), line_no))
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("only triangles are supported, got {} indices", idx.len()),
                    });
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    DiscreteSurface::new(vertices, faces)
}

fn parse_index(token: &str, n_vertices: usize, line: usize) -> Result<usize> {
    let head = token.split('/').next().unwrap_or("");
    let bad = || Error::Parse {
        line,
        message: format!("bad face index '{token}'"),
    };
    let i: i64 = head.parse().map_err(|_| bad())?;
    let resolved = match i {
        i if i > 0 => i - 1,
        i if i < 0 => n_vertices as i64 + i,
        _ => return Err(bad()),
    };
    if resolved < 0 || resolved as usize >= n_vertices {
        return Err(Error::Parse {
            line,
            message: format!("face index {i} refers to a missing vertex"),
        });
    }
    Ok(resolved as usize)
}

pub fn read_obj(path: &Path) -> Result<DiscreteSurface> {
    parse_obj(&std::fs::read_to_string(path)?)
}

pub fn obj_string(surface: &DiscreteSurface) -> Result<String> {
    let tris = surface.require_surface()?;
    let mut out = String::new();
    for p in surface.vertices() {
        writeln!(out, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z).unwrap();
    }
    for t in tris {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    Ok(out)
}

/// Writes through a temporary file in the same directory and renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_obj(path: &Path, surface: &DiscreteSurface) -> Result<()> {
    write_atomic(path, obj_string(surface)?.as_bytes())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub mesh: PathBuf,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub components: Vec<ManifestEntry>,
}

/// Reads a manifest; mesh paths are relative to the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<WeightedSurfaceMeasure> {
    let text = std::fs::read_to_string(path)?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let components = manifest
        .components
        .iter()
        .map(|c| Ok((read_obj(&base.join(&c.mesh))?, c.multiplicity)))
        .collect::<Result<Vec<_>>>()?;
    WeightedSurfaceMeasure::new(components)
}

/// Reads either a manifest (`.json`) or a single OBJ mesh with multiplicity 1.
pub fn read_measure(path: &Path) -> Result<WeightedSurfaceMeasure> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_manifest(path)
    } else {
        Ok(read_obj(path)?.into())
    }
}

/// Writes each component as `<stem>_<i>.obj` next to the manifest.
pub fn write_manifest(path: &Path, measure: &WeightedSurfaceMeasure) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("measure");
    let mut components = Vec::new();
    for (i, (s, m)) in measure.components().iter().enumerate() {
        let name = format!("{stem}_{i}.obj");
        write_obj(&dir.join(&name), s)?;
        components.push(ManifestEntry {
            mesh: name.into(),
            multiplicity: *m,
        });
    }
    write_atomic(path, serde_json::to_string_pretty(&Manifest { components })?.as_bytes())
}
