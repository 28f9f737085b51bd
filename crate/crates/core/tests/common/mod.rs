//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use r2s_core::Vec3;

/// Gauss-Legendre nodes and weights on [0, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Composite Gauss-Legendre on [0,1]² with `panels` panels per axis.
pub fn square_rule(panels: usize, order: usize) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(order);
    let h = 1.0 / panels as f64;
    (0..panels)
        .flat_map(|p| gl.iter().map(move |&(x, w)| ((p as f64 + x) * h, w * h)))
        .collect()
}

/// `∫_T e^{i w·r} dA` via the Duffy map `(s, t) -> v0 + s(v1 - v0) + st(v2 - v1)`
/// and a composite rule refined until two successive levels agree.
pub fn triangle_phase_quadrature(v: [Vec3; 3], w: Vec3) -> Complex64 {
    let area2 = (v[1] - v[0]).cross(&(v[2] - v[0])).norm();
    let spread = [v[0], v[1], v[2]].iter().map(|p| w.dot(p)).fold(f64::NEG_INFINITY, f64::max)
        - [v[0], v[1], v[2]].iter().map(|p| w.dot(p)).fold(f64::INFINITY, f64::min);
    let eval = |panels: usize| {
        let rule = square_rule(panels, 10);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(s, ws) in &rule {
            for &(t, wt) in &rule {
                let r = v[0] + (v[1] - v[0]) * s + (v[2] - v[1]) * (s * t);
                let (sn, cs) = w.dot(&r).sin_cos();
                acc += Complex64::new(cs, sn) * (ws * wt * s);
            }
        }
        acc * area2
    };
    let mut panels = (spread / 6.0).ceil() as usize + 1;
    let mut prev = eval(panels);
    loop {
        panels *= 2;
        let next = eval(panels);
        if (next - prev).norm() <= 1e-13 * area2 || panels > 512 {
            return next;
        }
        prev = next;
    }
}

pub fn brute_force_first_hit(mesh: &r2s_core::Mesh, ray: &r2s_core::Ray) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for f in 0..mesh.num_faces() {
        if let Some(t) = r2s_core::geometry::ray_triangle(ray, &mesh.triangle(f)) {
            if t > 1e-9 && best.is_none_or(|(_, bt)| t < bt) {
                best = Some((f, t));
            }
        }
    }
    best
}

/// Runs `f` inside a dedicated rayon pool.
pub fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

pub fn random_cube_points(n: usize, seed: u64) -> Vec<Vec3> {
    use rand::Rng;
    let mut rng = r2s_core::rng::seeded(seed);
    (0..n).map(|_| Vec3::new(rng.random_range(-0.5..=0.5), rng.random_range(-0.5..=0.5), rng.random_range(-0.5..=0.5))).collect()
}

/// Tent-weight interpolation over cell centers; the query is first clamped
/// into the hull of the centers, which reproduces border clamping.
pub fn tent_sample(grid: &ndarray::Array3<f64>, u: f64, v: f64) -> Vec<f64> {
    let (r, _, c) = grid.dim();
    let center = |i: usize| (i as f64 + 0.5) / r as f64 - 0.5;
    let clamp = |x: f64| x.clamp(center(0), center(r - 1));
    let (u, v) = (clamp(u), clamp(v));
    let w = |x: f64, i: usize| (1.0 - (x - center(i)).abs() * r as f64).max(0.0);
    let mut out = vec![0.0; c];
    for i in 0..r {
        for j in 0..r {
            let wt = w(u, i) * w(v, j);
            if wt > 0.0 {
                for ch in 0..c {
                    out[ch] += wt * grid[[i, j, ch]];
                }
            }
        }
    }
    out
}

/// Per-cell feature sums and counts on plane `pi` (0 = XY, 1 = XZ, 2 = YZ).
pub fn scatter_sums(
    pts: &[Vec3],
    feats: ndarray::ArrayView2<f64>,
    r: usize,
    pi: usize,
) -> std::collections::HashMap<(usize, usize), (Vec<f64>, u32)> {
    let mut acc = std::collections::HashMap::new();
    for (p, f) in pts.iter().zip(feats.rows()) {
        let (a, b) = [(p.x, p.y), (p.x, p.z), (p.y, p.z)][pi];
        let cell = |x: f64| (((x + 0.5) * r as f64) as usize).min(r - 1);
        let e = acc.entry((cell(a), cell(b))).or_insert((vec![0.0; f.len()], 0));
        for (s, x) in e.0.iter_mut().zip(f) {
            *s += x;
        }
        e.1 += 1;
    }
    acc
}

/// `KL(N(mu, var) ‖ N(0, target))` by composite Gauss-Legendre over ±14σ.
pub fn kl_quadrature(mu: f64, var: f64, target: f64) -> f64 {
    let rule = square_rule(400, 10);
    let sd = var.sqrt();
    let (lo, hi) = (mu - 14.0 * sd, mu + 14.0 * sd);
    let logn = |x: f64, mean: f64, v: f64| -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - mean).powi(2) / (2.0 * v);
    rule.iter()
        .map(|&(t, w)| {
            let x = lo + (hi - lo) * t;
            let lp = logn(x, mu, var);
            w * (hi - lo) * lp.exp() * (lp - logn(x, 0.0, target))
        })
        .sum()
}
