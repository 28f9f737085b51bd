use ndarray::{Array2, Array3};
use num_complex::Complex64;
use proptest::prelude::*;
use r2s_core::signal::{
    add_noise, amplitude_db, apply_mask, concat_blocks, gen_mask, split_blocks, to_db, DbResponse, ObservabilityMask,
    DB_FLOOR,
};
use r2s_core::{FrequencySweep, RadarResponse, ViewingGrid};

fn db(na: usize, nr: usize, nf: usize) -> DbResponse {
    DbResponse::new(
        ViewingGrid::uniform(na, nr).unwrap(),
        FrequencySweep::new(8e9, if nf == 1 { 8e9 } else { 12e9 }, nf).unwrap(),
        Array3::from_shape_fn((na, nr, nf), |(i, j, k)| (i * 31 + j * 7 + k) as f64 * 0.1 - 40.0),
    )
    .unwrap()
}

/// True when the `true` entries of a (possibly cyclic) line form one run.
fn one_run(line: &[bool], cyclic: bool) -> bool {
    let n = line.len();
    let count = line.iter().filter(|b| **b).count();
    if count == 0 || count == n {
        return count == n;
    }
    let prev = |i: usize| if i > 0 { line[i - 1] } else { cyclic && line[n - 1] };
    let starts = (0..n).filter(|&i| line[i] && !prev(i)).count();
    starts == 1
}

fn check_mask(mask: &ObservabilityMask, coverage: f64) {
    let obs: Array2<bool> = mask.observed();
    let rows: Vec<bool> = obs.rows().into_iter().map(|r| r.iter().any(|b| *b)).collect();
    let cols: Vec<bool> = obs.columns().into_iter().map(|c| c.iter().any(|b| *b)).collect();
    assert!(one_run(&rows, false), "aspect window not contiguous: {mask:?}");
    assert!(one_run(&cols, true), "roll window not contiguous: {mask:?}");
    // observed cells form exactly the product of the two windows
    for ((i, j), b) in obs.indexed_iter() {
        assert_eq!(*b, rows[i] && cols[j]);
    }
    let masked = obs.iter().filter(|b| !**b).count() as f64 / obs.len() as f64;
    let bin = 1.0 / mask.n_aspect.min(mask.n_roll) as f64;
    assert!((masked - coverage).abs() <= bin, "{masked} vs {coverage}: {mask:?}");
}

#[test]
fn db_reference_values() {
    assert_eq!(amplitude_db(Complex64::new(1.0, 0.0)), 0.0);
    assert!((amplitude_db(Complex64::new(6.0, 8.0)) - 20.0).abs() < 1e-12);
    assert_eq!(amplitude_db(Complex64::new(0.0, 0.0)), DB_FLOOR);
}

#[test]
fn block_arithmetic() {
    let d = db(2, 3, 128);
    let b = split_blocks(&d, 4).unwrap();
    assert_eq!(b.len(), 4);
    assert!(b.iter().all(|x| x.shape() == (2, 3, 32)));
    assert_eq!(b[1].sweep.f_min, d.sweep.freq(32));
    assert_eq!(split_blocks(&d, 1).unwrap()[0], d);
    assert!(split_blocks(&d, 3).is_err());
}

#[test]
fn zero_coverage_and_determinism() {
    let m = gen_mask(64, 64, 0.0, 3).unwrap();
    assert_eq!(m.aspect_window, (0, 64));
    assert_eq!(m.roll_window.1, 64);
    assert_eq!(gen_mask(64, 64, 0.7, 9).unwrap(), gen_mask(64, 64, 0.7, 9).unwrap());
    assert!(gen_mask(64, 64, 0.71, 9).is_err());
    let m = gen_mask(64, 64, 0.7, 42).unwrap();
    check_mask(&m, 0.7);
}

#[test]
fn masks_over_many_seeds() {
    for seed in 0..10_000u64 {
        let cov = (seed % 71) as f64 / 100.0;
        let (na, nr) = [(64, 64), (64, 1), (1, 64), (37, 12)][(seed % 4) as usize];
        check_mask(&gen_mask(na, nr, cov, seed).unwrap(), cov);
    }
}

#[test]
fn apply_mask_cases() {
    let d = db(8, 6, 4);
    let full = apply_mask(&d, &ObservabilityMask::full(8, 6), DB_FLOOR).unwrap();
    assert_eq!(
        full.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        d.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    let half = ObservabilityMask { n_aspect: 8, n_roll: 6, aspect_window: (0, 8), roll_window: (4, 3), coverage: 0.5 };
    let out = apply_mask(&d, &half, DB_FLOOR).unwrap();
    for ((i, j, k), v) in out.values.indexed_iter() {
        let hidden = ![4, 5, 0].contains(&j);
        assert_eq!(*v == DB_FLOOR, hidden);
        if !hidden {
            assert_eq!(*v, d.values[[i, j, k]]);
        }
    }
    assert_eq!(apply_mask(&out, &half, DB_FLOOR).unwrap(), out);
    assert!(apply_mask(&d, &ObservabilityMask::full(7, 6), DB_FLOOR).is_err());
}

#[test]
fn noise_levels() {
    let g = ViewingGrid::uniform(100, 100).unwrap();
    let s = FrequencySweep::new(8e9, 12e9, 100).unwrap();
    let zero = RadarResponse::zeros(g.clone(), s);
    let noisy = add_noise(&zero, -40.0, 1).unwrap();
    let power = noisy.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / 1e6;
    assert!((power - 1e-4).abs() < 0.01 * 1e-4, "{power}");
    assert_eq!(noisy, add_noise(&zero, -40.0, 1).unwrap());
    assert_ne!(noisy, add_noise(&zero, -40.0, 2).unwrap());

    let ones = RadarResponse::new(g, s, Array3::from_elem((100, 100, 100), Complex64::new(0.3, -0.4))).unwrap();
    let quiet = add_noise(&ones, -300.0, 5).unwrap();
    for (a, b) in quiet.values.iter().zip(ones.values.iter()) {
        assert!((a - b).norm() <= 1e-12 * b.norm());
    }
}

#[test]
fn noise_power_converges() {
    // relative error of the power estimate shrinks like 1/√N
    let g = ViewingGrid::uniform(50, 40).unwrap();
    let s = FrequencySweep::new(8e9, 12e9, 50).unwrap();
    let zero = RadarResponse::zeros(g, s);
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let v = add_noise(&zero, -60.0, seed).unwrap();
        let p = v.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.values.len() as f64;
        worst = worst.max((p / 1e-6 - 1.0).abs());
    }
    // 10⁵ samples: one standard error is ~0.32%
    assert!(worst < 4.0 / (1e5f64).sqrt(), "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn split_concat_round_trip(na in 1usize..5, nr in 1usize..5, l in 1usize..9, per in 1usize..6) {
        let d = db(na, nr, l * per);
        let back = concat_blocks(&split_blocks(&d, l).unwrap()).unwrap();
        prop_assert_eq!(back.values, d.values);
        prop_assert_eq!(back.sweep.n, d.sweep.n);
        prop_assert!((back.sweep.f_max - d.sweep.f_max).abs() < 1e-3);
    }

    #[test]
    fn db_monotone_and_phase_invariant(a in 1e-10f64..1e6, b in 1e-10f64..1e6, phase in 0.0f64..6.3) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(amplitude_db(Complex64::new(lo, 0.0)) <= amplitude_db(Complex64::new(hi, 0.0)));
        let z = Complex64::new(a, 0.0);
        let r = z * Complex64::from_polar(1.0, phase);
        prop_assert!((amplitude_db(z) - amplitude_db(r)).abs() < 1e-9);
    }

    #[test]
    fn to_db_matches_elementwise(re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let g = ViewingGrid::uniform(1, 1).unwrap();
        let s = FrequencySweep::new(1e9, 1e9, 1).unwrap();
        let r = RadarResponse::new(g, s, Array3::from_elem((1, 1, 1), Complex64::new(re, im))).unwrap();
        prop_assert_eq!(to_db(&r).values[[0, 0, 0]], amplitude_db(Complex64::new(re, im)));
    }
}
