use ndarray::Array2;
use proptest::prelude::*;
use r2s_core::diffusion::{
    build_interleaved_mask, make_schedule, p_step, q_sample, DiffusionSchedule, ScheduleKind, Token,
};
use r2s_core::rng::seeded;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn normal_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng))
}

#[test]
fn linear_schedule_product() {
    let s = make_schedule(1000, ScheduleKind::Linear, (1e-4, 0.02)).unwrap();
    let mut prod = 1.0;
    for t in 0..1000 {
        let beta = 1e-4 + (0.02 - 1e-4) * t as f64 / 999.0;
        assert!((s.betas()[t] - beta).abs() < 1e-15);
        prod *= 1.0 - beta;
    }
    assert!((s.alpha_bar(1000) - prod).abs() < 1e-15);
    assert!(prod < 1e-4);
    assert!(s.alpha_bars().windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn cosine_schedule_follows_profile() {
    let t_max = 1000;
    let s = make_schedule(t_max, ScheduleKind::Cosine, (1e-4, 0.02)).unwrap();
    let f = |t: f64| ((t / t_max as f64 + 0.008) / 1.008 * std::f64::consts::FRAC_PI_2).cos().powi(2);
    // exact until the 0.999 clamp engages near t = T
    for t in [1, 10, 100, 500, 900] {
        assert!((s.alpha_bar(t) - f(t as f64) / f(0.0)).abs() < 1e-12, "t={t}");
    }
    assert!(s.alpha_bar(1) > 0.999);
    assert!(s.alpha_bars().windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn q_sample_limits_and_moments() {
    let tiny = DiffusionSchedule::from_betas(vec![1e-10]).unwrap();
    let mut rng = seeded(1);
    let x0 = normal_matrix(4, 8, &mut rng);
    let eps = normal_matrix(4, 8, &mut rng);
    let xt = q_sample(&x0, 1, &eps, &tiny).unwrap();
    for ((a, b), e) in xt.iter().zip(x0.iter()).zip(eps.iter()) {
        assert!((a - b).abs() <= 1e-5 * e.abs() + 1e-5 * 1e-5 * b.abs() + 1e-15);
    }

    let s = DiffusionSchedule::default();
    let t = 300;
    let x = Array2::from_elem((1, 1), 1.7);
    let n = 100_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| q_sample(&x, t, &normal_matrix(1, 1, &mut rng), &s).unwrap()[[0, 0]])
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let (m0, v0) = (s.alpha_bar(t).sqrt() * 1.7, 1.0 - s.alpha_bar(t));
    assert!((mean - m0).abs() < 0.01 * m0, "{mean} vs {m0}");
    assert!((var - v0).abs() < 0.01 * v0, "{var} vs {v0}");
}

#[test]
fn marginal_equals_chained_kernels() {
    let s = DiffusionSchedule::default();
    let n = 100_000;
    let x0 = 0.8;
    let mut rng = seeded(2);
    let mut xs = vec![x0; n];
    for t in 1..=1000 {
        let (a, b) = (s.alpha(t).sqrt(), s.beta(t).sqrt());
        for x in &mut xs {
            let e: f64 = StandardNormal.sample(&mut rng);
            *x = a * *x + b * e;
        }
        if [1, 500, 1000].contains(&t) {
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let (m0, v0) = (s.alpha_bar(t).sqrt() * x0, 1.0 - s.alpha_bar(t));
            // 5 standard errors of each estimator
            assert!((mean - m0).abs() < 5.0 * (v0 / n as f64).sqrt(), "t={t}: {mean} vs {m0}");
            assert!((var - v0).abs() < 5.0 * v0 * (2.0 / n as f64).sqrt(), "t={t}: {var} vs {v0}");
        }
    }
}

#[test]
fn x0_recovery_for_every_timestep() {
    let mut rng = seeded(3);
    for kind in [ScheduleKind::Linear, ScheduleKind::Cosine] {
        let s = make_schedule(1000, kind, (1e-4, 0.02)).unwrap();
        for t in 1..=1000 {
            let x0 = normal_matrix(4, 16, &mut rng);
            let eps = normal_matrix(4, 16, &mut rng);
            let xt = q_sample(&x0, t, &eps, &s).unwrap();
            let ab = s.alpha_bar(t);
            let rec = (&xt - &(&eps * (1.0 - ab).sqrt())) / ab.sqrt();
            let tol = if ab > 1e-6 { 1e-10 } else { 1e-10 / ab.sqrt() };
            for (a, b) in rec.iter().zip(x0.iter()) {
                assert!((a - b).abs() < tol.max(1e-10), "{kind:?} t={t}");
            }
        }
    }
}

#[test]
fn p_step_uses_the_printed_coefficient() {
    // √(1-α_t)/√(1-ᾱ_t) is exactly 1 at t = 1 since ᾱ_1 = α_1
    let s = DiffusionSchedule::default();
    let mut rng = seeded(4);
    let x = normal_matrix(2, 3, &mut rng);
    let e = normal_matrix(2, 3, &mut rng);
    let got = p_step(&x, &e, 1, &s).unwrap();
    let want = (&x - &e) / s.alpha(1).sqrt();
    for (a, b) in got.iter().zip(want.iter()) {
        assert!((a - b).abs() < 1e-12);
    }
    let t = 700;
    let c = (1.0 - s.alpha(t)).sqrt() / (1.0 - s.alpha_bar(t)).sqrt();
    let got = p_step(&x, &e, t, &s).unwrap();
    let want = (&x - &(&e * c)) / s.alpha(t).sqrt();
    for (a, b) in got.iter().zip(want.iter()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn interleaved_mask_counts() {
    for l in 1..=12 {
        let (layout, m) = build_interleaved_mask(l).unwrap();
        assert_eq!(m.iter().filter(|b| **b).count(), l * (2 * l + 1));
        for ((i, j), b) in m.indexed_iter() {
            assert_eq!(*b, j <= i);
        }
        let mut seen = vec![false; 2 * l];
        for (pos, tok) in layout.iter().enumerate() {
            let slot = match *tok {
                Token::Radar(k) => {
                    assert_eq!(pos % 2, 0);
                    2 * k
                }
                Token::Shape(k) => {
                    assert_eq!(pos % 2, 1);
                    2 * k + 1
                }
            };
            assert!(!seen[slot]);
            seen[slot] = true;
        }
        // h_k sees r_0..r_k and h_0..h_k only
        for (pos, tok) in layout.iter().enumerate() {
            if let Token::Shape(k) = *tok {
                for (q, other) in layout.iter().enumerate() {
                    let allowed = match *other {
                        Token::Radar(j) | Token::Shape(j) => j <= k,
                    };
                    assert_eq!(m[[pos, q]], allowed);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn p_step_is_affine(t in 1usize..=1000, a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
        let s = DiffusionSchedule::default();
        let mut rng = seeded(seed);
        let (x, y) = (normal_matrix(2, 5, &mut rng), normal_matrix(2, 5, &mut rng));
        let (e1, e2) = (normal_matrix(2, 5, &mut rng), normal_matrix(2, 5, &mut rng));
        let lhs = p_step(&(&x * a + &y * b), &(&e1 * a + &e2 * b), t, &s).unwrap();
        let rhs = p_step(&x, &e1, t, &s).unwrap() * a + p_step(&y, &e2, t, &s).unwrap() * b;
        for (l, r) in lhs.iter().zip(rhs.iter()) {
            prop_assert!((l - r).abs() < 1e-9 * (1.0 + r.abs()));
        }
    }
}
