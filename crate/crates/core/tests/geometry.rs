mod common;

use proptest::prelude::*;
use r2s_core::geometry::shapes::{box_mesh, icosphere, torus};
use r2s_core::geometry::{
    closest_point_on_triangle, load_mesh, normalize_mesh, obj_string, parse_off, ray_first_hit, sample_surface,
    signed_distance, unsigned_distance,
};
use r2s_core::rng::seeded;
use r2s_core::{Mesh, Ray, Vec3};
use rand::Rng;

fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n < 1.0 {
            return v / n;
        }
    }
}

#[test]
fn single_triangle_off() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tri.off");
    std::fs::write(&p, "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
    let m = load_mesh(&p).unwrap();
    assert_eq!(m.num_faces(), 1);
    assert!((m.face_areas()[0] - 0.5).abs() < 1e-15);
    assert!((m.face_normals()[0] - Vec3::z()).norm() < 1e-15);
}

#[test]
fn degenerate_face_dropped() {
    let m = parse_off("OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n1 0 0\n3 0 1 2\n3 0 1 3\n").unwrap();
    assert_eq!(m.num_faces(), 1);
    assert_eq!(m.dropped_degenerate(), 1);
}

#[test]
fn icosphere_obj_area() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.obj");
    std::fs::write(&p, obj_string(&icosphere(1.0, 3))).unwrap();
    let m = load_mesh(&p).unwrap();
    let want = 4.0 * std::f64::consts::PI;
    assert!((m.surface_area() - want).abs() < 0.01 * want);
    assert!(load_mesh(dir.path().join("s.ply")).is_err());
}

#[test]
fn face_data_invariants() {
    let m = torus(0.3, 0.1, 24, 12);
    for f in 0..m.num_faces() {
        let [a, b, c] = m.triangle(f);
        let cross = (b - a).cross(&(c - a));
        assert!((m.face_normals()[f].norm() - 1.0).abs() < 1e-6);
        assert!((m.face_areas()[f] - 0.5 * cross.norm()).abs() <= 1e-9 * m.face_areas()[f]);
    }
}

#[test]
fn normalization_cases() {
    let (n, tf) = normalize_mesh(&box_mesh(Vec3::zeros(), Vec3::repeat(1.0))).unwrap();
    assert!((tf.scale - 0.9).abs() < 1e-15);
    let bb = n.bbox();
    assert!((bb.min - Vec3::repeat(-0.45)).norm() < 1e-15 && (bb.max - Vec3::repeat(0.45)).norm() < 1e-15);

    let (again, tf2) = normalize_mesh(&n).unwrap();
    assert!((tf2.scale - 1.0).abs() < 1e-12 && Vec3::from(tf2.translation).norm() < 1e-12);
    for (a, b) in again.vertices().iter().zip(n.vertices()) {
        assert!((a - b).norm() < 1e-12);
    }

    let (e, _) = normalize_mesh(&box_mesh(Vec3::zeros(), Vec3::new(4.0, 1.0, 1.0))).unwrap();
    let bb = e.bbox();
    assert!((bb.max.x - 0.45).abs() < 1e-15);
    assert!((bb.max.y - 0.1125).abs() < 1e-15 && (bb.min.z + 0.1125).abs() < 1e-15);
}

#[test]
fn sampling_determinism_and_planarity() {
    let tri = Mesh::new(
        vec![Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, -0.4, 0.7), Vec3::new(-0.3, 0.9, -0.2)],
        vec![[0, 1, 2]],
    )
    .unwrap();
    let a = sample_surface(&tri, 100_000, 5).unwrap();
    assert_eq!(a, sample_surface(&tri, 100_000, 5).unwrap());
    let n = tri.face_normals()[0];
    let v0 = tri.vertices()[0];
    assert!(a.iter().all(|p| n.dot(&(p - v0)).abs() < 1e-9));
}

#[test]
fn sampling_follows_area_weights() {
    // areas 1 and 3, far apart so each sample is attributable
    let m = Mesh::new(
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 5.0),
            Vec3::new(6.0, 0.0, 5.0),
            Vec3::new(0.0, 1.0, 5.0),
        ],
        vec![[0, 1, 2], [3, 4, 5]],
    )
    .unwrap();
    let n = 100_000;
    let pts = sample_surface(&m, n, 9).unwrap();
    let first = pts.iter().filter(|p| p.z < 2.5).count() as f64;
    let sd = (n as f64 * 0.25 * 0.75).sqrt();
    assert!((first - 0.25 * n as f64).abs() < 3.0 * sd, "{first}");
    // χ² with 1 dof at 99.9%
    let chi2 = (first - 0.25 * n as f64).powi(2) / (0.25 * n as f64)
        + (n as f64 - first - 0.75 * n as f64).powi(2) / (0.75 * n as f64);
    assert!(chi2 < 10.83);
}

#[test]
fn axis_ray_and_miss() {
    let sq = r2s_core::geometry::shapes::plate(1.0, 1.0);
    let h = ray_first_hit(&sq, &Ray::new(Vec3::new(0.0, 0.0, -2.0), Vec3::z())).unwrap();
    assert!((h.t - 2.0).abs() < 1e-15);
    assert!(ray_first_hit(&sq, &Ray::new(Vec3::new(0.0, 0.0, -2.0), -Vec3::z())).is_none());
}

#[test]
fn bvh_matches_brute_force_rays() {
    let m = torus(0.3, 0.12, 32, 16).merged(&icosphere(0.1, 2)).unwrap();
    let mut rng = seeded(77);
    for _ in 0..10_000 {
        let o = Vec3::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));
        let ray = Ray::new(o, random_unit(&mut rng));
        let got = ray_first_hit(&m, &ray).map(|h| h.t);
        let want = common::brute_force_first_hit(&m, &ray).map(|(_, t)| t);
        assert_eq!(got, want);
    }
}

#[test]
fn sphere_sdf_and_vertex_query() {
    let s = icosphere(1.0, 4);
    let d = signed_distance(&s, &[Vec3::zeros(), s.vertices()[17], Vec3::new(0.0, 0.0, 2.0)]).unwrap();
    assert!((d[0] + 1.0).abs() < 0.02, "{d:?}");
    assert!(d[1].abs() < 1e-9);
    assert!((d[2] - 1.0).abs() < 0.02);
}

#[test]
fn unsigned_distance_matches_brute_force() {
    let m = torus(0.3, 0.1, 20, 10);
    let mut rng = seeded(4);
    let q: Vec<Vec3> = (0..1000)
        .map(|_| Vec3::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6)))
        .collect();
    let got = unsigned_distance(&m, &q).unwrap();
    for (p, g) in q.iter().zip(got) {
        let want = (0..m.num_faces())
            .map(|f| (closest_point_on_triangle(p, &m.triangle(f)) - p).norm())
            .fold(f64::INFINITY, f64::min);
        assert!((g - want).abs() < 1e-9);
    }
}

#[test]
fn sdf_sign_flips_once_across_sphere() {
    let s = icosphere(0.4, 3);
    let mut rng = seeded(12);
    for _ in 0..20 {
        let dir = random_unit(&mut rng);
        let q: Vec<Vec3> = (0..80).map(|i| dir * (-0.01 + i as f64 * 0.01)).collect();
        let d = signed_distance(&s, &q[1..]).unwrap();
        let flips = d.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count();
        assert_eq!(flips, 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_idempotent(
        lo in prop::array::uniform3(-5.0f64..5.0),
        ext in prop::array::uniform3(0.1f64..10.0),
    ) {
        let b = box_mesh(Vec3::from(lo), Vec3::from(lo) + Vec3::from(ext));
        let (n1, _) = normalize_mesh(&b).unwrap();
        let (n2, _) = normalize_mesh(&n1).unwrap();
        for (a, c) in n1.vertices().iter().zip(n2.vertices()) {
            prop_assert!((a - c).norm() < 1e-12);
        }
        prop_assert!((n1.bbox().diagonal().max() - 0.9).abs() < 1e-12);
    }
}

#[test]
fn axis_rays_through_vertices_count_once() {
    // subdivided icospheres have vertices exactly on the coordinate axes
    for sub in 0..6 {
        let s = icosphere(1.0, sub);
        for d in r2s_core::geometry::SIGN_RAY_DIRECTIONS {
            assert_eq!(s.bvh().count_hits(&Ray::new(Vec3::zeros(), Vec3::from(d)), 0.0), 1, "sub {sub} dir {d:?}");
        }
    }
}
