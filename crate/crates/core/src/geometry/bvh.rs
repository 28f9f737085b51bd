//! Bounding volume hierarchy over mesh faces.

use super::mesh::Mesh;
use super::query::{closest_point_on_triangle, ray_triangle, ray_triangle_tol};

/// Barycentric slack for parity counting.
const PARITY_TOL: f64 = 1e-9;
use super::{Ray, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points(points: impl IntoIterator<Item = Vec3>) -> Self {
        let mut bb = Self::empty();
        for p in points {
            bb.grow(&p);
        }
        bb
    }

    #[inline]
    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn diagonal(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    fn surface_area(&self) -> f64 {
        let d = self.diagonal();
        if d.x < 0.0 {
            return 0.0;
        }
        2.0 * (d.x * d.y + d.y * d.z + d.z * d.x)
    }

    /// Squared distance from `p` to the box (0 inside).
    #[inline]
    pub fn distance2(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let v = if p[k] < self.min[k] {
                self.min[k] - p[k]
            } else if p[k] > self.max[k] {
                p[k] - self.max[k]
            } else {
                0.0
            };
            d2 += v * v;
        }
        d2
    }

    /// Slab test; returns the entry parameter if the ray overlaps `[t_min, t_max]`.
    #[inline]
    fn ray_entry(&self, origin: &Vec3, inv_dir: &Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut lo = t_min;
        let mut hi = t_max;
        for k in 0..3 {
            if inv_dir[k].is_infinite() {
                // parallel to this slab: inside it or never
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let t0 = (self.min[k] - origin[k]) * inv_dir[k];
            let t1 = (self.max[k] - origin[k]) * inv_dir[k];
            let (a, b) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            if a > lo {
                lo = a;
            }
            if b < hi {
                hi = b;
            }
            // Small slack so rays grazing a flat box are not culled.
            if lo > hi * (1.0 + 1e-12) + 1e-12 {
                return None;
            }
        }
        Some(lo)
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bbox: Aabb,
    /// Leaf: first index into `order`; inner: index of the left child
    /// (the right child is `start + 1`).
    start: u32,
    /// Number of faces for a leaf, 0 for an inner node.
    count: u32,
}

/// Nearest ray-face intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub face: usize,
    pub t: f64,
}

/// Binary BVH with SAH splits over face centroids. Built once, immutable.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    tris: Vec<[Vec3; 3]>,
}

const LEAF_SIZE: usize = 4;
const SAH_BINS: usize = 16;

impl Bvh {
    pub fn build(mesh: &Mesh) -> Self {
        let n = mesh.num_faces();
        let tris: Vec<[Vec3; 3]> = (0..n).map(|f| mesh.triangle(f)).collect();
        let boxes: Vec<Aabb> = tris.iter().map(|t| Aabb::from_points(t.iter().copied())).collect();
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * n.max(1));
        nodes.push(Node {
            bbox: Aabb::empty(),
            start: 0,
            count: 0,
        });
        if n > 0 {
            build_recursive(&mut nodes, 0, &mut order, 0, n, &boxes, &centroids);
        }
        Self { nodes, order, tris }
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    /// Nearest hit with `t_min < t < t_max`, skipping `exclude`. Ties go to
    /// the lower face index.
    pub fn first_hit(&self, ray: &Ray, t_min: f64, t_max: f64, exclude: Option<usize>) -> Option<Hit> {
        if self.is_empty() {
            return None;
        }
        let inv = ray.direction.map(|d| 1.0 / d);
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bbox.ray_entry(&ray.origin, &inv, t_min, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &f in &self.order[s..s + node.count as usize] {
                    let f = f as usize;
                    if Some(f) == exclude {
                        continue;
                    }
                    if let Some(t) = ray_triangle(ray, &self.tris[f]) {
                        if t > t_min && t <= limit {
                            let better = match best {
                                None => true,
                                Some(b) => t < b.t || (t == b.t && f < b.face),
                            };
                            if better {
                                best = Some(Hit { face: f, t });
                                limit = t;
                            }
                        }
                    }
                }
            } else {
                let l = node.start;
                let r = node.start + 1;
                let tl = self.nodes[l as usize].bbox.ray_entry(&ray.origin, &inv, t_min, limit);
                let tr = self.nodes[r as usize].bbox.ray_entry(&ray.origin, &inv, t_min, limit);
                match (tl, tr) {
                    (Some(a), Some(b)) => {
                        // near child on top of the stack
                        if a <= b {
                            stack.push(r);
                            stack.push(l);
                        } else {
                            stack.push(l);
                            stack.push(r);
                        }
                    }
                    (Some(_), None) => stack.push(l),
                    (None, Some(_)) => stack.push(r),
                    (None, None) => {}
                }
            }
        }
        best
    }

    /// True if any face is hit with `t_min < t < t_max`, ignoring `exclude`.
    pub fn occluded(&self, ray: &Ray, t_min: f64, t_max: f64, exclude: Option<usize>) -> bool {
        if self.is_empty() {
            return false;
        }
        let inv = ray.direction.map(|d| 1.0 / d);
        let mut stack: Vec<u32> = vec![0];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bbox.ray_entry(&ray.origin, &inv, t_min, t_max).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &f in &self.order[s..s + node.count as usize] {
                    if Some(f as usize) == exclude {
                        continue;
                    }
                    if let Some(t) = ray_triangle(ray, &self.tris[f as usize]) {
                        if t > t_min && t < t_max {
                            return true;
                        }
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.start + 1);
            }
        }
        false
    }

    /// Number of surface crossings along the ray at `t > t_min`. Hits at the
    /// same distance (a ray through a shared edge or vertex) count once.
    pub fn count_hits(&self, ray: &Ray, t_min: f64) -> usize {
        if self.is_empty() {
            return 0;
        }
        let inv = ray.direction.map(|d| 1.0 / d);
        let mut ts: Vec<f64> = Vec::new();
        let mut stack: Vec<u32> = vec![0];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bbox.ray_entry(&ray.origin, &inv, t_min, f64::INFINITY).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &f in &self.order[s..s + node.count as usize] {
                    if let Some(t) = ray_triangle_tol(ray, &self.tris[f as usize], PARITY_TOL) {
                        if t > t_min {
                            ts.push(t);
                        }
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.start + 1);
            }
        }
        ts.sort_by(f64::total_cmp);
        let mut n = 0;
        let mut last = f64::NEG_INFINITY;
        for t in ts {
            if t - last > 1e-10 * t.abs().max(1.0) {
                n += 1;
            }
            last = t;
        }
        n
    }

    /// Closest surface point to `p`: `(face, point, squared distance)`.
    pub fn closest_point(&self, p: &Vec3) -> Option<(usize, Vec3, f64)> {
        if self.is_empty() {
            return None;
        }
        let mut best: Option<(usize, Vec3, f64)> = None;
        let mut best_d2 = f64::INFINITY;
        let mut stack: Vec<(u32, f64)> = vec![(0, self.nodes[0].bbox.distance2(p))];
        while let Some((ni, d2)) = stack.pop() {
            if d2 > best_d2 {
                continue;
            }
            let node = &self.nodes[ni as usize];
            if node.count > 0 {
                let s = node.start as usize;
                for &f in &self.order[s..s + node.count as usize] {
                    let q = closest_point_on_triangle(p, &self.tris[f as usize]);
                    let d2 = (q - p).norm_squared();
                    let f = f as usize;
                    let better = d2 < best_d2 || (d2 == best_d2 && best.is_some_and(|b| f < b.0));
                    if better {
                        best_d2 = d2;
                        best = Some((f, q, d2));
                    }
                }
            } else {
                let l = node.start;
                let r = node.start + 1;
                let dl = self.nodes[l as usize].bbox.distance2(p);
                let dr = self.nodes[r as usize].bbox.distance2(p);
                if dl <= dr {
                    stack.push((r, dr));
                    stack.push((l, dl));
                } else {
                    stack.push((l, dl));
                    stack.push((r, dr));
                }
            }
        }
        best
    }
}

fn build_recursive(
    nodes: &mut Vec<Node>,
    node_idx: usize,
    order: &mut [u32],
    start: usize,
    end: usize,
    boxes: &[Aabb],
    centroids: &[Vec3],
) {
    let items = &mut order[start..end];
    let bbox = items
        .iter()
        .fold(Aabb::empty(), |acc, &f| acc.union(&boxes[f as usize]));
    let count = end - start;
    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes[node_idx] = Node {
            bbox,
            start: start as u32,
            count: count as u32,
        };
    };
    if count <= LEAF_SIZE {
        make_leaf(nodes);
        return;
    }
    let cbox = Aabb::from_points(items.iter().map(|&f| centroids[f as usize]));
    let ext = cbox.diagonal();
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    let mid = if ext[axis] <= 0.0 {
        // all centroids coincide
        start + count / 2
    } else {
        match sah_split(items, axis, &cbox, boxes, centroids) {
            Some(k) => start + k,
            None => {
                make_leaf(nodes);
                return;
            }
        }
    };
    if mid == start || mid == end {
        // degenerate SAH partition; fall back to a median split
        items.sort_by(|&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
        let m = start + count / 2;
        split_into(nodes, node_idx, bbox, order, start, m, end, boxes, centroids);
        return;
    }
    split_into(nodes, node_idx, bbox, order, start, mid, end, boxes, centroids);
}

#[allow(clippy::too_many_arguments)]
fn split_into(
    nodes: &mut Vec<Node>,
    node_idx: usize,
    bbox: Aabb,
    order: &mut [u32],
    start: usize,
    mid: usize,
    end: usize,
    boxes: &[Aabb],
    centroids: &[Vec3],
) {
    let left = nodes.len();
    let placeholder = Node {
        bbox: Aabb::empty(),
        start: 0,
        count: 0,
    };
    nodes.push(placeholder);
    nodes.push(placeholder);
    nodes[node_idx] = Node {
        bbox,
        start: left as u32,
        count: 0,
    };
    build_recursive(nodes, left, order, start, mid, boxes, centroids);
    build_recursive(nodes, left + 1, order, mid, end, boxes, centroids);
}

/// Binned SAH along `axis`. Partitions `items` in place and returns the
/// split offset, or `None` when a leaf is cheaper.
fn sah_split(items: &mut [u32], axis: usize, cbox: &Aabb, boxes: &[Aabb], centroids: &[Vec3]) -> Option<usize> {
    let lo = cbox.min[axis];
    let width = cbox.max[axis] - lo;
    let bin_of = |f: u32| -> usize {
        let b = ((centroids[f as usize][axis] - lo) / width * SAH_BINS as f64) as usize;
        b.min(SAH_BINS - 1)
    };
    let mut bin_box = [Aabb::empty(); SAH_BINS];
    let mut bin_n = [0usize; SAH_BINS];
    for &f in items.iter() {
        let b = bin_of(f);
        bin_n[b] += 1;
        bin_box[b] = bin_box[b].union(&boxes[f as usize]);
    }
    let mut best_cost = f64::INFINITY;
    let mut best_split = 0;
    for split in 1..SAH_BINS {
        let (mut lb, mut rb) = (Aabb::empty(), Aabb::empty());
        let (mut ln, mut rn) = (0, 0);
        for b in 0..split {
            lb = lb.union(&bin_box[b]);
            ln += bin_n[b];
        }
        for b in split..SAH_BINS {
            rb = rb.union(&bin_box[b]);
            rn += bin_n[b];
        }
        if ln == 0 || rn == 0 {
            continue;
        }
        let cost = lb.surface_area() * ln as f64 + rb.surface_area() * rn as f64;
        if cost < best_cost {
            best_cost = cost;
            best_split = split;
        }
    }
    if best_split == 0 {
        return Some(0);
    }
    let parent_area = items
        .iter()
        .fold(Aabb::empty(), |acc, &f| acc.union(&boxes[f as usize]))
        .surface_area();
    let leaf_cost = items.len() as f64 * parent_area;
    if items.len() <= 2 * LEAF_SIZE && best_cost >= leaf_cost {
        return None;
    }
    // stable partition keeps the build deterministic
    let (left, right): (Vec<u32>, Vec<u32>) = items.iter().partition(|&&f| bin_of(f) < best_split);
    let k = left.len();
    items[..k].copy_from_slice(&left);
    items[k..].copy_from_slice(&right);
    Some(k)
}
