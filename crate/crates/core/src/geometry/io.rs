//! OFF / OBJ / STL readers and an OBJ writer.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, Vec3};
use crate::{Error, Result};

/// Loads an OFF, OBJ or STL (ASCII or binary) file. Zero-area faces are
/// dropped; see [`Mesh::dropped_degenerate`].
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mesh = match ext.as_str() {
        "off" => parse_off(&utf8(&bytes)?)?,
        "obj" => parse_obj(&utf8(&bytes)?)?,
        "stl" => parse_stl(&bytes)?,
        other => return Err(Error::UnsupportedFormat(format!("'.{other}' ({})", path.display()))),
    };
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    Ok(mesh)
}

fn utf8(bytes: &[u8]) -> Result<String> {
    String::from_utf8(bytes.to_vec()).map_err(|e| Error::Parse(format!("not UTF-8 text: {e}")))
}

fn fan(poly: &[u32], faces: &mut Vec<[u32; 3]>) {
    for k in 1..poly.len().saturating_sub(1) {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad {what}: '{tok}'")))
}

pub fn parse_off(text: &str) -> Result<Mesh> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace());
    let header = tokens.next().ok_or_else(|| Error::Parse("empty OFF file".into()))?;
    // Some writers glue the counts to the keyword ("OFF8 12 0").
    let first_count = match header {
        "OFF" => None,
        h if h.starts_with("OFF") => Some(&h[3..]),
        _ => return Err(Error::Parse(format!("missing OFF header, found '{header}'"))),
    };
    let nv: usize = match first_count {
        Some(c) => num(Some(c), "vertex count")?,
        None => num(tokens.next(), "vertex count")?,
    };
    let nf: usize = num(tokens.next(), "face count")?;
    let _ne: usize = num(tokens.next(), "edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let x = num(tokens.next(), "x")?;
        let y = num(tokens.next(), "y")?;
        let z = num(tokens.next(), "z")?;
        vertices.push(Vec3::new(x, y, z));
    }
    // Faces may carry trailing color values, so re-scan line by line.
    let rest: Vec<&str> = tokens.collect();
    let mut faces = Vec::with_capacity(nf);
    let mut i = 0;
    let mut poly = Vec::new();
    for _ in 0..nf {
        let k: usize = num(rest.get(i).copied(), "face arity")?;
        i += 1;
        poly.clear();
        for _ in 0..k {
            let idx: u32 = num(rest.get(i).copied(), "face index")?;
            poly.push(idx);
            i += 1;
        }
        fan(&poly, &mut faces);
        // skip optional per-face color: tokens until the next face would
        // need line info; colors are rare in Manifold40/ModelNet OFF files
        // and are handled by the line-based fallback below.
    }
    if i != rest.len() {
        return parse_off_linewise(text);
    }
    Mesh::new(vertices, faces)
}

/// Line-oriented OFF parse for files with per-face color columns.
fn parse_off_linewise(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let mut head = lines.next().unwrap_or("").to_string();
    if head == "OFF" {
        head = lines.next().unwrap_or("").to_string();
    } else {
        head = head.trim_start_matches("OFF").to_string();
    }
    let mut counts = head.split_whitespace();
    let nv: usize = num(counts.next(), "vertex count")?;
    let nf: usize = num(counts.next(), "face count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = lines.next().ok_or_else(|| Error::Parse("truncated vertex list".into()))?;
        let mut t = l.split_whitespace();
        vertices.push(Vec3::new(num(t.next(), "x")?, num(t.next(), "y")?, num(t.next(), "z")?));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let l = lines.next().ok_or_else(|| Error::Parse("truncated face list".into()))?;
        let mut t = l.split_whitespace();
        let k: usize = num(t.next(), "face arity")?;
        let poly: Vec<u32> = (0..k).map(|_| num(t.next(), "face index")).collect::<Result<_>>()?;
        fan(&poly, &mut faces);
    }
    Mesh::new(vertices, faces)
}

pub fn parse_obj(text: &str) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut poly = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut t = line.split_whitespace();
        match t.next() {
            Some("v") => {
                vertices.push(Vec3::new(num(t.next(), "x")?, num(t.next(), "y")?, num(t.next(), "z")?));
            }
            Some("f") => {
                poly.clear();
                for tok in t {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad face index '{tok}'", lineno + 1)))?;
                    let n = vertices.len() as i64;
                    let idx = if i > 0 { i - 1 } else { n + i };
                    if idx < 0 || idx >= n {
                        return Err(Error::Parse(format!("line {}: face index {i} out of range", lineno + 1)));
                    }
                    poly.push(idx as u32);
                }
                fan(&poly, &mut faces);
            }
            _ => {}
        }
    }
    Mesh::new(vertices, faces)
}

pub fn parse_stl(bytes: &[u8]) -> Result<Mesh> {
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
        if 84 + 50 * n == bytes.len() {
            return parse_stl_binary(bytes, n);
        }
    }
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Parse("STL is neither valid binary nor ASCII".into()))?;
    if !text.trim_start().starts_with("solid") {
        return Err(Error::Parse("STL is neither valid binary nor ASCII".into()));
    }
    let mut welder = Welder::default();
    let mut faces = Vec::new();
    let mut tri = Vec::with_capacity(3);
    for line in text.lines() {
        let mut t = line.split_whitespace();
        match t.next() {
            Some("vertex") => {
                let p = Vec3::new(num(t.next(), "x")?, num(t.next(), "y")?, num(t.next(), "z")?);
                tri.push(welder.index(p));
            }
            Some("endfacet") => {
                if tri.len() != 3 {
                    return Err(Error::Parse(format!("facet with {} vertices", tri.len())));
                }
                faces.push([tri[0], tri[1], tri[2]]);
                tri.clear();
            }
            _ => {}
        }
    }
    Mesh::new(welder.vertices, faces)
}

fn parse_stl_binary(bytes: &[u8], n: usize) -> Result<Mesh> {
    let mut welder = Welder::default();
    let mut faces = Vec::with_capacity(n);
    for k in 0..n {
        let rec = &bytes[84 + 50 * k..84 + 50 * (k + 1)];
        let f = |o: usize| f32::from_le_bytes(rec[o..o + 4].try_into().expect("4 bytes")) as f64;
        let mut tri = [0u32; 3];
        for (j, slot) in tri.iter_mut().enumerate() {
            let o = 12 + 12 * j;
            *slot = welder.index(Vec3::new(f(o), f(o + 4), f(o + 8)));
        }
        faces.push(tri);
    }
    Mesh::new(welder.vertices, faces)
}

/// Merges bit-identical STL corner positions into shared vertices.
#[derive(Default)]
struct Welder {
    vertices: Vec<Vec3>,
    lookup: HashMap<[u64; 3], u32>,
}

impl Welder {
    fn index(&mut self, p: Vec3) -> u32 {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        *self.lookup.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            (self.vertices.len() - 1) as u32
        })
    }
}

/// ASCII OBJ: all vertices, then faces with 1-based indices.
pub fn obj_string(mesh: &Mesh) -> String {
    let mut s = String::with_capacity(32 * (mesh.vertices().len() + mesh.num_faces()));
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn write_obj(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, obj_string(mesh)).map_err(|e| Error::io(path, e))
}
