// Copyright 2026 The Regrasp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! ASCII STL and OFF mesh files.

use std::fmt::Write as _;
use std::path::Path;

use super::mesh::TriMesh;
use super::transform::Vec3;
use super::GeometryError;

fn parse_err(line: usize, msg: impl Into<String>) -> GeometryError {
    GeometryError::Parse {
        line,
        message: msg.into(),
    }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, GeometryError> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing number"))?;
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("invalid number `{tok}`")))?;
    if !v.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    Ok(v)
}

/// Parses an ASCII STL document. Vertices shared between facets are welded.
pub fn parse_stl(text: &str, com: Option<Vec3>) -> Result<TriMesh, GeometryError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut loop_start: Option<usize> = None;
    let mut saw_solid = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            None => continue,
            Some("solid") => saw_solid = true,
            Some("facet") | Some("endsolid") => {}
            Some("outer") => loop_start = Some(vertices.len()),
            Some("vertex") => {
                if loop_start.is_none() {
                    return Err(parse_err(line, "vertex outside of a loop"));
                }
                let x = parse_f64(toks.next(), line)?;
                let y = parse_f64(toks.next(), line)?;
                let z = parse_f64(toks.next(), line)?;
                vertices.push(Vec3::new(x, y, z));
            }
            Some("endloop") => {
                let start = loop_start.take().ok_or_else(|| parse_err(line, "endloop without outer loop"))?;
                let n = vertices.len() - start;
                if n < 3 {
                    return Err(parse_err(line, format!("loop has {n} vertices")));
                }
                for k in 1..n - 1 {
                    faces.push([start, start + k, start + k + 1]);
                }
            }
            Some("endfacet") => {}
            Some(other) => return Err(parse_err(line, format!("unexpected keyword `{other}`"))),
        }
    }
    if !saw_solid {
        return Err(parse_err(1, "missing `solid` header"));
    }
    TriMesh::new(vertices, faces, com)
}

/// Parses an OFF document; polygons are fan-triangulated.
pub fn parse_off(text: &str, com: Option<Vec3>) -> Result<TriMesh, GeometryError> {
    // Tokens paired with the line they came from, comments stripped.
    let mut toks: Vec<(usize, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        toks.extend(content.split_whitespace().map(|t| (i + 1, t)));
    }
    let mut it = toks.into_iter().peekable();
    match it.next() {
        Some((_, "OFF")) => {}
        Some((line, t)) => return Err(parse_err(line, format!("expected `OFF` header, found `{t}`"))),
        None => return Err(parse_err(1, "empty file")),
    }
    let mut count = |what: &str| -> Result<usize, GeometryError> {
        let (line, t) = it.next().ok_or_else(|| parse_err(0, format!("missing {what}")))?;
        t.parse().map_err(|_| parse_err(line, format!("invalid {what} `{t}`")))
    };
    let nv = count("vertex count")?;
    let nf = count("face count")?;
    let _ne = count("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut xyz = [0.0; 3];
        for c in &mut xyz {
            let (line, t) = it.next().ok_or_else(|| parse_err(0, "truncated vertex list"))?;
            *c = parse_f64(Some(t), line)?;
        }
        vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, t) = it.next().ok_or_else(|| parse_err(0, "truncated face list"))?;
        let n: usize = t.parse().map_err(|_| parse_err(line, format!("invalid face size `{t}`")))?;
        if n < 3 {
            return Err(parse_err(line, format!("face with {n} vertices")));
        }
        let mut idx = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, t) = it.next().ok_or_else(|| parse_err(line, "truncated face"))?;
            let ix: usize = t.parse().map_err(|_| parse_err(line, format!("invalid index `{t}`")))?;
            if ix >= nv {
                return Err(parse_err(line, format!("vertex index {ix} out of range")));
            }
            idx.push(ix);
        }
        // Optional per-face color values run to the end of the line; skip them.
        while let Some(&(l, _)) = it.peek() {
            if l == line {
                it.next();
            } else {
                break;
            }
        }
        for k in 1..n - 1 {
            faces.push([idx[0], idx[k], idx[k + 1]]);
        }
    }
    TriMesh::new(vertices, faces, com)
}

pub fn write_off(mesh: &TriMesh) -> String {
    let mut s = String::new();
    writeln!(s, "OFF").unwrap();
    writeln!(s, "{} {} 0", mesh.vertices().len(), mesh.faces().len()).unwrap();
    for v in mesh.vertices() {
        writeln!(s, "{} {} {}", v.x, v.y, v.z).unwrap();
    }
    for f in mesh.faces() {
        writeln!(s, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    s
}

pub fn write_stl(mesh: &TriMesh, name: &str) -> String {
    let mut s = String::new();
    writeln!(s, "solid {name}").unwrap();
    for f in 0..mesh.faces().len() {
        let n = mesh.face_normal(f);
        writeln!(s, "  facet normal {} {} {}", n.x, n.y, n.z).unwrap();
        writeln!(s, "    outer loop").unwrap();
        for v in mesh.triangle(f) {
            writeln!(s, "      vertex {} {} {}", v.x, v.y, v.z).unwrap();
        }
        writeln!(s, "    endloop").unwrap();
        writeln!(s, "  endfacet").unwrap();
    }
    writeln!(s, "endsolid {name}").unwrap();
    s
}

/// Loads a mesh, choosing the parser by extension (`.stl` or `.off`).
pub fn load_mesh(path: &Path, com: Option<Vec3>) -> Result<TriMesh, GeometryError> {
    let text = std::fs::read_to_string(path).map_err(|e| GeometryError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "stl" => parse_stl(&text, com),
        "off" => parse_off(&text, com),
        _ => Err(GeometryError::UnsupportedFormat(path.display().to_string())),
    }
}
