//! Procedural test meshes.

use std::collections::HashMap;

use super::{Mesh, Vec3};

/// Closed axis-aligned box with outward normals.
pub fn box_mesh(lo: Vec3, hi: Vec3) -> Mesh {
    let v = |x: usize, y: usize, z: usize| {
        Vec3::new(
            if x == 0 { lo.x } else { hi.x },
            if y == 0 { lo.y } else { hi.y },
            if z == 0 { lo.z } else { hi.z },
        )
    };
    let vertices: Vec<Vec3> = (0..8).map(|i| v(i & 1, (i >> 1) & 1, (i >> 2) & 1)).collect();
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let faces = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    Mesh::new(vertices, faces).expect("box is valid")
}

/// Rectangular plate in the z = 0 plane centered at the origin, normal +z.
pub fn plate(width: f64, height: f64) -> Mesh {
    let (w, h) = (width / 2.0, height / 2.0);
    let vertices = vec![
        Vec3::new(-w, -h, 0.0),
        Vec3::new(w, -h, 0.0),
        Vec3::new(w, h, 0.0),
        Vec3::new(-w, h, 0.0),
    ];
    Mesh::new(vertices, vec![[0, 1, 2], [0, 2, 3]]).expect("plate is valid")
}

/// Plate subdivided into `n × n` quads (two triangles each).
pub fn tessellated_plate(width: f64, height: f64, n: usize) -> Mesh {
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Vec3::new(
                width * (i as f64 / n as f64 - 0.5),
                height * (j as f64 / n as f64 - 0.5),
                0.0,
            ));
        }
    }
    let idx = |i: usize, j: usize| (j * (n + 1) + i) as u32;
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh::new(vertices, faces).expect("plate is valid")
}

/// Icosahedron subdivided `subdivisions` times and projected to the sphere.
pub fn icosphere(radius: f64, subdivisions: u32) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vec3::from(*p).normalize())
    .collect();
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
    for _ in 0..subdivisions {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let m = ((vertices[a as usize] + vertices[b as usize]) * 0.5).normalize();
                vertices.push(m);
                (vertices.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = vertices.into_iter().map(|v| v * radius).collect();
    Mesh::new(vertices, faces).expect("icosphere is valid")
}

/// Two perpendicular square plates of side `size` sharing the edge along the
/// y axis, opening toward +x/+z. The bisector direction is (1, 0, 1)/√2.
pub fn dihedral(size: f64, n: usize) -> Mesh {
    let base = tessellated_plate(size, size, n);
    // plate A: z = 0, x in [0, size]; plate B: x = 0, z in [0, size]
    let a = base
        .map_vertices(|v| Vec3::new(v.x + size / 2.0, v.y, 0.0))
        .expect("valid");
    let b = base
        .map_vertices(|v| Vec3::new(0.0, v.y, v.x + size / 2.0))
        .expect("valid");
    a.merged(&b).expect("valid")
}

/// Torus around the z axis.
pub fn torus(major: f64, minor: f64, n_major: usize, n_minor: usize) -> Mesh {
    let mut vertices = Vec::with_capacity(n_major * n_minor);
    for i in 0..n_major {
        let u = std::f64::consts::TAU * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let v = std::f64::consts::TAU * j as f64 / n_minor as f64;
            let r = major + minor * v.cos();
            vertices.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| ((i % n_major) * n_minor + (j % n_minor)) as u32;
    let mut faces = Vec::with_capacity(2 * n_major * n_minor);
    for i in 0..n_major {
        for j in 0..n_minor {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    Mesh::new(vertices, faces).expect("torus is valid")
}
