//! Static k-d tree under the maximum norm, supporting the two queries of the
//! k-nearest-neighbour mutual information estimator.

const LEAF_SIZE: usize = 16;
const NONE: u32 = u32::MAX;

struct Node {
    start: usize,
    end: usize,
    left: u32,
    right: u32,
}

pub(crate) struct KdTree {
    dim: usize,
    /// Points in tree order, row-major.
    points: Vec<f64>,
    /// Original index of each point in tree order.
    ids: Vec<usize>,
    nodes: Vec<Node>,
    /// Bounding box per node: `dim` minima followed by `dim` maxima.
    boxes: Vec<f64>,
}

impl KdTree {
    /// Builds a tree over `n = data.len() / dim` row-major points.
    pub(crate) fn build(data: &[f64], dim: usize) -> Self {
        let n = data.len() / dim;
        let mut ids: Vec<usize> = (0..n).collect();
        let mut tree = KdTree {
            dim,
            points: Vec::new(),
            ids: Vec::new(),
            nodes: Vec::new(),
            boxes: Vec::new(),
        };
        tree.build_node(data, &mut ids, 0, n);
        tree.points = ids
            .iter()
            .flat_map(|&i| data[i * dim..(i + 1) * dim].iter().copied())
            .collect();
        tree.ids = ids;
        tree
    }

    fn build_node(&mut self, data: &[f64], ids: &mut [usize], start: usize, end: usize) -> u32 {
        let dim = self.dim;
        let index = self.nodes.len() as u32;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &ids[start..end] {
            for d in 0..dim {
                let x = data[i * dim + d];
                lo[d] = lo[d].min(x);
                hi[d] = hi[d].max(x);
            }
        }
        self.nodes.push(Node {
            start,
            end,
            left: NONE,
            right: NONE,
        });
        self.boxes.extend_from_slice(&lo);
        self.boxes.extend_from_slice(&hi);
        if end - start > LEAF_SIZE {
            let split = (0..dim)
                .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
                .unwrap_or(0);
            let mid = start + (end - start) / 2;
            ids[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                data[a * dim + split].total_cmp(&data[b * dim + split])
            });
            let left = self.build_node(data, ids, start, mid);
            let right = self.build_node(data, ids, mid, end);
            self.nodes[index as usize].left = left;
            self.nodes[index as usize].right = right;
        }
        index
    }

    fn box_bounds(&self, node: usize) -> (&[f64], &[f64]) {
        let b = &self.boxes[node * 2 * self.dim..(node + 1) * 2 * self.dim];
        b.split_at(self.dim)
    }

    /// Smallest max-norm distance from `q` to the node's box.
    fn min_dist(&self, node: usize, q: &[f64]) -> f64 {
        let (lo, hi) = self.box_bounds(node);
        q.iter()
            .zip(lo.iter().zip(hi))
            .map(|(&x, (&l, &h))| (l - x).max(x - h).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Largest max-norm distance from `q` to any point of the node's box.
    fn max_dist(&self, node: usize, q: &[f64]) -> f64 {
        let (lo, hi) = self.box_bounds(node);
        q.iter()
            .zip(lo.iter().zip(hi))
            .map(|(&x, (&l, &h))| (x - l).abs().max((h - x).abs()))
            .fold(0.0, f64::max)
    }

    fn dist(&self, slot: usize, q: &[f64]) -> f64 {
        self.points[slot * self.dim..(slot + 1) * self.dim]
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Max-norm distance from `q` to its `k`-th nearest point, ignoring the
    /// point with original index `exclude`.
    pub(crate) fn kth_distance(&self, q: &[f64], k: usize, exclude: usize) -> f64 {
        let mut best = vec![f64::INFINITY; k];
        self.knn(0, q, exclude, &mut best);
        best[k - 1]
    }

    fn knn(&self, node: usize, q: &[f64], exclude: usize, best: &mut [f64]) {
        let worst = best[best.len() - 1];
        if self.min_dist(node, q) >= worst {
            return;
        }
        let nd = &self.nodes[node];
        if nd.left == NONE {
            for slot in nd.start..nd.end {
                if self.ids[slot] == exclude {
                    continue;
                }
                let d = self.dist(slot, q);
                if d < best[best.len() - 1] {
                    let mut i = best.len() - 1;
                    while i > 0 && best[i - 1] > d {
                        best[i] = best[i - 1];
                        i -= 1;
                    }
                    best[i] = d;
                }
            }
            return;
        }
        let (l, r) = (nd.left as usize, nd.right as usize);
        let (first, second) = if self.min_dist(l, q) <= self.min_dist(r, q) {
            (l, r)
        } else {
            (r, l)
        };
        self.knn(first, q, exclude, best);
        self.knn(second, q, exclude, best);
    }

    /// Number of points at max-norm distance strictly less than `radius`.
    pub(crate) fn count_within(&self, q: &[f64], radius: f64) -> usize {
        self.count(0, q, radius)
    }

    fn count(&self, node: usize, q: &[f64], radius: f64) -> usize {
        if self.min_dist(node, q) >= radius {
            return 0;
        }
        let nd = &self.nodes[node];
        if self.max_dist(node, q) < radius {
            return nd.end - nd.start;
        }
        if nd.left == NONE {
            return (nd.start..nd.end)
                .filter(|&s| self.dist(s, q) < radius)
                .count();
        }
        self.count(nd.left as usize, q, radius) + self.count(nd.right as usize, q, radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Rng;

    fn brute(data: &[f64], dim: usize, q: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = data
            .chunks(dim)
            .map(|p| {
                p.iter()
                    .zip(q)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        d.sort_by(f64::total_cmp);
        d
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = Rng::seeded(1);
        for dim in [1, 2, 4, 6] {
            let data: Vec<f64> = (0..500 * dim).map(|_| rng.standard_normal()).collect();
            let tree = KdTree::build(&data, dim);
            for i in (0..500).step_by(37) {
                let q = &data[i * dim..(i + 1) * dim];
                let sorted = brute(&data, dim, q);
                // sorted[0] is the point itself at distance zero.
                assert_eq!(tree.kth_distance(q, 4, i), sorted[4]);
                let r = sorted[10];
                let expected = sorted.iter().filter(|&&d| d < r).count();
                assert_eq!(tree.count_within(q, r), expected);
            }
        }
    }
}
