//! File emission: OBJ/PLY meshes, JSON verification reports, sweep CSVs.
//!
//! ASCII formats print coordinates with 9 fractional digits so a write/read
//! cycle reproduces positions to well under 1e-6; binary PLY stores raw
//! little-endian doubles. Every file opens with the resolved configuration
//! echoed as a comment (or JSON field), and identical inputs produce
//! byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::BlowupSweep;
use crate::mesh::SurfaceMesh;
use crate::verify::{ConvergenceReport, VerificationReport};

/// Mesh output formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    PlyAscii,
    PlyBinary,
}

impl MeshFormat {
    /// Parse a format name (`obj`, `ply`, `ply-binary`).
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "obj" => Ok(Self::Obj),
            "ply" | "ply-ascii" => Ok(Self::PlyAscii),
            "ply-binary" => Ok(Self::PlyBinary),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }

    /// Infer from a file extension, defaulting PLY to ASCII.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or_default()
        {
            "obj" => Ok(Self::Obj),
            "ply" => Ok(Self::PlyAscii),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

fn provenance_json(mesh: &SurfaceMesh) -> String {
    serde_json::to_string(&mesh.provenance).unwrap_or_else(|_| "{}".into())
}

/// Write a mesh in the given format.
pub fn write_mesh(mesh: &SurfaceMesh, format: MeshFormat, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    match format {
        MeshFormat::Obj => write_obj(mesh, &mut w),
        MeshFormat::PlyAscii => write_ply(mesh, &mut w, false),
        MeshFormat::PlyBinary => write_ply(mesh, &mut w, true),
    }
}

fn write_obj(mesh: &SurfaceMesh, w: &mut impl Write) -> Result<()> {
    writeln!(w, "# config: {}", provenance_json(mesh))?;
    for v in &mesh.vertices {
        writeln!(
            w,
            "v {:.9} {:.9} {:.9}",
            v.position[0], v.position[1], v.position[2]
        )?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

fn write_ply(mesh: &SurfaceMesh, w: &mut impl Write, binary: bool) -> Result<()> {
    let format = if binary {
        "binary_little_endian"
    } else {
        "ascii"
    };
    writeln!(w, "ply")?;
    writeln!(w, "format {format} 1.0")?;
    writeln!(w, "comment config: {}", provenance_json(mesh))?;
    writeln!(w, "element vertex {}", mesh.vertices.len())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    writeln!(w, "element face {}", mesh.triangles.len())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    if binary {
        for v in &mesh.vertices {
            for c in v.position {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        for t in &mesh.triangles {
            w.write_all(&[3u8])?;
            for &i in t {
                w.write_all(&(i as i32).to_le_bytes())?;
            }
        }
    } else {
        for v in &mesh.vertices {
            writeln!(
                w,
                "{:.9} {:.9} {:.9}",
                v.position[0], v.position[1], v.position[2]
            )?;
        }
        for t in &mesh.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
    }
    Ok(())
}

/// Positions and triangles read back from a mesh file.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshData {
    pub positions: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

/// Read an OBJ or PLY file (format inferred from the content).
pub fn read_mesh(path: &Path) -> Result<MeshData> {
    let mut head = [0u8; 3];
    File::open(path)?.read_exact(&mut head).ok();
    if &head == b"ply" {
        read_ply(path)
    } else {
        read_obj(path)
    }
}

fn read_obj(path: &Path) -> Result<MeshData> {
    let reader = BufReader::new(File::open(path)?);
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .map(|p| p.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::MalformedMesh(format!("bad vertex: {e}")))?;
                if coords.len() != 3 {
                    return Err(Error::MalformedMesh("vertex needs 3 coordinates".into()));
                }
                positions.push([coords[0], coords[1], coords[2]]);
            }
            Some("f") => {
                let idx: Vec<u32> = parts
                    .map(|p| {
                        p.split('/')
                            .next()
                            .unwrap_or_default()
                            .parse::<u32>()
                            .map(|i| i - 1)
                    })
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::MalformedMesh(format!("bad face: {e}")))?;
                if idx.len() != 3 {
                    return Err(Error::MalformedMesh("only triangles supported".into()));
                }
                triangles.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    Ok(MeshData {
        positions,
        triangles,
    })
}

fn read_ply(path: &Path) -> Result<MeshData> {
    let mut raw = Vec::new();
    File::open(path)?.read_to_end(&mut raw)?;
    let header_end = raw
        .windows(11)
        .position(|w| w == b"end_header\n")
        .ok_or_else(|| Error::MalformedMesh("missing end_header".into()))?
        + 11;
    let header = std::str::from_utf8(&raw[..header_end])
        .map_err(|_| Error::MalformedMesh("non-utf8 header".into()))?;

    let mut binary = false;
    let mut n_vertices = 0usize;
    let mut n_faces = 0usize;
    for line in header.lines() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("format") => binary = parts.next() == Some("binary_little_endian"),
            Some("element") => match (parts.next(), parts.next()) {
                (Some("vertex"), Some(n)) => {
                    n_vertices = n
                        .parse()
                        .map_err(|_| Error::MalformedMesh("bad vertex count".into()))?
                }
                (Some("face"), Some(n)) => {
                    n_faces = n
                        .parse()
                        .map_err(|_| Error::MalformedMesh("bad face count".into()))?
                }
                _ => {}
            },
            _ => {}
        }
    }

    let mut positions = Vec::with_capacity(n_vertices);
    let mut triangles = Vec::with_capacity(n_faces);
    if binary {
        let mut at = header_end;
        let take = |at: &mut usize, n: usize| -> Result<&[u8]> {
            let s = raw
                .get(*at..*at + n)
                .ok_or_else(|| Error::MalformedMesh("truncated binary body".into()))?;
            *at += n;
            Ok(s)
        };
        for _ in 0..n_vertices {
            let mut p = [0.0f64; 3];
            for c in p.iter_mut() {
                *c = f64::from_le_bytes(take(&mut at, 8)?.try_into().unwrap());
            }
            positions.push(p);
        }
        for _ in 0..n_faces {
            let count = take(&mut at, 1)?[0];
            if count != 3 {
                return Err(Error::MalformedMesh("only triangles supported".into()));
            }
            let mut t = [0u32; 3];
            for i in t.iter_mut() {
                *i = i32::from_le_bytes(take(&mut at, 4)?.try_into().unwrap()) as u32;
            }
            triangles.push(t);
        }
    } else {
        let body = std::str::from_utf8(&raw[header_end..])
            .map_err(|_| Error::MalformedMesh("non-utf8 body".into()))?;
        let mut lines = body.lines();
        for _ in 0..n_vertices {
            let line = lines
                .next()
                .ok_or_else(|| Error::MalformedMesh("missing vertex row".into()))?;
            let coords: Vec<f64> = line
                .split_whitespace()
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MalformedMesh(format!("bad vertex: {e}")))?;
            positions.push([coords[0], coords[1], coords[2]]);
        }
        for _ in 0..n_faces {
            let line = lines
                .next()
                .ok_or_else(|| Error::MalformedMesh("missing face row".into()))?;
            let idx: Vec<u32> = line
                .split_whitespace()
                .skip(1)
                .map(|p| p.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MalformedMesh(format!("bad face: {e}")))?;
            triangles.push([idx[0], idx[1], idx[2]]);
        }
    }
    Ok(MeshData {
        positions,
        triangles,
    })
}

/// Serialize a verification report as pretty JSON (struct field order).
pub fn write_report(report: &VerificationReport, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    Ok(())
}

/// Blowup sweep as CSV: one row per (a, marked height).
pub fn write_blowup_csv(sweep: &BlowupSweep, config_echo: &str, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# config: {config_echo}")?;
    writeln!(w, "a,j,K_at_bj,delta,sup_off_axis")?;
    for e in &sweep.entries {
        for (j, k) in e.k_at_points.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                e.a,
                j + 1,
                k,
                sweep.delta,
                e.sup_off_axis
            )?;
        }
    }
    Ok(())
}

/// Convergence differences as CSV: one row per consecutive pair.
pub fn write_convergence_csv(
    report: &ConvergenceReport,
    config_echo: &str,
    path: &Path,
) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# config: {config_echo}")?;
    writeln!(w, "a_coarse,a_fine,sup_f,sup_d1,sup_d2")?;
    for p in &report.pairs {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.a_coarse, p.a_fine, p.sup_f, p.sup_d1, p.sup_d2
        )?;
    }
    Ok(())
}

/// Separation radius against a sweep variable (`a` or `n`).
pub fn write_r0_csv(
    variable: &str,
    rows: &[(f64, f64)],
    config_echo: &str,
    path: &Path,
) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# config: {config_echo}")?;
    writeln!(w, "{variable},r0")?;
    for (x, r0) in rows {
        writeln!(w, "{x},{r0}")?;
    }
    Ok(())
}
