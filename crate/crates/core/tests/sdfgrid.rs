use r2s_core::geometry::normalize_mesh;
use r2s_core::geometry::shapes::{box_mesh, icosphere, torus};
use r2s_core::metrics::chamfer;
use r2s_core::revolve::{revolve_to_mesh, sample_frustum_profile};
use r2s_core::sdfgrid::{extract_mesh, sample_sdf_grid, SdfGrid};
use r2s_core::Vec3;

#[test]
fn sampled_sphere_values() {
    let s = icosphere(0.45, 4);
    let g = sample_sdf_grid(&s, 64).unwrap();
    let h = g.spacing();
    // the cell nearest the origin sits half a cell off-center
    let c = g.values()[[32, 32, 32]];
    let want = g.point(32, 32, 32).norm() - 0.45;
    assert!((c - want).abs() < 2.0 * h, "{c} vs {want}");
    assert!(c < 0.0);
    assert!(g.values()[[0, 0, 0]] > 0.0);
}

#[test]
fn coarse_grid_upsamples_onto_fine() {
    let s = icosphere(0.35, 4);
    let coarse = sample_sdf_grid(&s, 8).unwrap();
    let fine = sample_sdf_grid(&s, 64).unwrap();
    let mut worst: f64 = 0.0;
    for ((i, j, k), v) in fine.values().indexed_iter() {
        let p = fine.point(i, j, k);
        // away from the surface and inside the coarse center lattice
        if (p.norm() - 0.35).abs() > 2.0 * coarse.spacing() && p.amax() < 0.5 - coarse.spacing() {
            worst = worst.max((coarse.trilinear(&p) - v).abs());
        }
    }
    assert!(worst < 2.0 * coarse.spacing(), "{worst}");
}

#[test]
fn analytic_sphere_extraction() {
    let g = SdfGrid::from_fn(64, |p| p.norm() - 0.45).unwrap();
    let m = extract_mesh(&g, 0.0).unwrap();
    let h = g.spacing();
    assert!(m.vertices().iter().all(|v| (v.norm() - 0.45).abs() < 1.5 * h));
    assert!(m.watertight_report().is_watertight());
    assert!(m.vertices().iter().all(|v| v.iter().all(|c| c.is_finite())));
    assert!(m.face_areas().iter().all(|a| *a > 1e-12));
}

#[test]
fn iso_level_offsets_surface() {
    let g = SdfGrid::from_fn(48, |p| p.norm() - 0.3).unwrap();
    let m = extract_mesh(&g, 0.05).unwrap();
    let mean = m.vertices().iter().map(|v| v.norm()).sum::<f64>() / m.vertices().len() as f64;
    assert!((mean - 0.35).abs() < 0.01, "{mean}");
}

#[test]
fn round_trip_chamfer_decreases_with_resolution() {
    let frustum = revolve_to_mesh(&sample_frustum_profile((3, 5), 2).unwrap(), 64).unwrap();
    let shapes = [
        box_mesh(Vec3::new(-0.4, -0.3, -0.2), Vec3::new(0.4, 0.3, 0.2)),
        normalize_mesh(&frustum).unwrap().0,
        torus(0.3, 0.1, 48, 24),
    ];
    for m in shapes {
        let cds: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&r| {
                let back = extract_mesh(&sample_sdf_grid(&m, r).unwrap(), 0.0).unwrap();
                chamfer(&back, &m, 20_000, 1).unwrap()
            })
            .collect();
        assert!(cds[0] > cds[1] && cds[1] > cds[2], "{cds:?}");
    }
}

#[test]
fn invalid_grids() {
    assert!(SdfGrid::from_values(ndarray::Array3::zeros((4, 4, 3))).is_err());
    assert!(SdfGrid::from_fn(4, |_| f64::NAN).is_err());
    assert!(extract_mesh(&SdfGrid::from_fn(4, |p: Vec3| p.x).unwrap(), f64::INFINITY).is_err());
}
