//! Static 3-d tree for nearest-neighbour queries over point clouds.

use crate::Vec3;

/// Points reordered so each subtree is a contiguous slice with its
/// splitting point at the middle.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    index: Vec<usize>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut items: Vec<(Vec3, usize)> = points.iter().copied().zip(0..).collect();
        build(&mut items, 0);
        let (points, index) = items.into_iter().unzip();
        Self { points, index }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index (into the input slice) and squared distance of the nearest
    /// point. `None` only for an empty tree.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, self.points.len(), 0, q, &mut best);
        Some((self.index[best.0], best.1))
    }

    fn search(&self, lo: usize, hi: usize, axis: usize, q: &Vec3, best: &mut (usize, f64)) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let p = &self.points[mid];
        let d2 = (p - q).norm_squared();
        if d2 < best.1 {
            *best = (mid, d2);
        }
        let diff = q[axis] - p[axis];
        let next = (axis + 1) % 3;
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(near.0, near.1, next, q, best);
        if diff * diff < best.1 {
            self.search(far.0, far.1, next, q, best);
        }
    }
}

fn build(items: &mut [(Vec3, usize)], axis: usize) {
    if items.len() <= 1 {
        return;
    }
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]));
    let (left, right) = items.split_at_mut(mid);
    build(left, (axis + 1) % 3);
    build(&mut right[1..], (axis + 1) % 3);
}
