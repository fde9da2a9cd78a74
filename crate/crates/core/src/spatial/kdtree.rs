//! Static 2-D KD-tree with exact k-NN and radius queries.
//!
//! Points are partitioned by recursive median splits, alternating x and y.
//! Points live only in leaves; interior nodes hold the split coordinate.
//! Ordering everywhere is `(squared distance, point index)`, so results are
//! identical to a sorted linear scan, including the order of ties.

use super::PlanarCoord;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub const DEFAULT_LEAF_CAPACITY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialIndex {
    points: Vec<PlanarCoord>,
    /// Point indices in leaf order.
    order: Vec<usize>,
    nodes: Vec<Node>,
    leaf_capacity: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist_sq: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SpatialIndex {
    pub fn build(points: Vec<PlanarCoord>) -> Self {
        Self::with_leaf_capacity(points, DEFAULT_LEAF_CAPACITY)
    }

    pub fn with_leaf_capacity(points: Vec<PlanarCoord>, leaf_capacity: usize) -> Self {
        let leaf_capacity = leaf_capacity.max(1);
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            let n = points.len();
            build_node(&points, &mut order, 0, n, 0, leaf_capacity, &mut nodes);
        }
        Self {
            points,
            order,
            nodes,
            leaf_capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PlanarCoord] {
        &self.points
    }

    pub fn point(&self, index: usize) -> PlanarCoord {
        self.points[index]
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }

    /// Point indices grouped by leaf, in tree order.
    pub fn leaves(&self) -> Vec<Vec<usize>> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { start, end } => Some(self.order[start..end].to_vec()),
                Node::Split { .. } => None,
            })
            .collect()
    }

    /// The `min(k, n)` nearest points, ascending by distance then index.
    pub fn knn(&self, q: PlanarCoord, k: usize) -> Vec<Neighbor> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        self.knn_node(0, q, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.dist_sq.sqrt(),
            })
            .collect()
    }

    fn knn_node(&self, id: usize, q: PlanarCoord, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate {
                        dist_sq: q.distance_sq(&self.points[i]),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap holds k items") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q.axis(dim) - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.knn_node(near, q, k, heap);
                // `<=` keeps equal-distance points on the far side reachable for
                // index tie-breaking.
                let worst = heap.peek().map(|c| c.dist_sq);
                if heap.len() < k || worst.is_some_and(|w| diff * diff <= w) {
                    self.knn_node(far, q, k, heap);
                }
            }
        }
    }

    /// Indices of all points with distance `<= r`, ascending by index.
    pub fn radius(&self, q: PlanarCoord, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.points.is_empty() || r < 0.0 || r.is_nan() {
            return out;
        }
        let r_sq = r * r;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { start, end } => {
                    out.extend(
                        self.order[start..end]
                            .iter()
                            .copied()
                            .filter(|&i| q.distance_sq(&self.points[i]) <= r_sq),
                    );
                }
                Node::Split {
                    dim,
                    value,
                    left,
                    right,
                } => {
                    let diff = q.axis(dim) - value;
                    if diff < 0.0 {
                        stack.push(left);
                        if diff * diff <= r_sq {
                            stack.push(right);
                        }
                    } else {
                        stack.push(right);
                        if diff * diff <= r_sq {
                            stack.push(left);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Radius query returning distances, ascending by (distance, index).
    pub fn radius_with_distance(&self, q: PlanarCoord, r: f64) -> Vec<Neighbor> {
        let mut v: Vec<Candidate> = self
            .radius(q, r)
            .into_iter()
            .map(|i| Candidate {
                dist_sq: q.distance_sq(&self.points[i]),
                index: i,
            })
            .collect();
        v.sort();
        v.into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.dist_sq.sqrt(),
            })
            .collect()
    }
}

fn build_node(
    points: &[PlanarCoord],
    order: &mut [usize],
    start: usize,
    end: usize,
    depth: usize,
    leaf_capacity: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    if end - start <= leaf_capacity {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let dim = depth % 2;
    let mid = start + (end - start) / 2;
    let slice = &mut order[start..end];
    slice.select_nth_unstable_by(mid - start, |&a, &b| {
        points[a]
            .axis(dim)
            .total_cmp(&points[b].axis(dim))
            .then(a.cmp(&b))
    });
    let value = points[order[mid]].axis(dim);
    nodes.push(Node::Leaf { start, end });
    let left = build_node(points, order, start, mid, depth + 1, leaf_capacity, nodes);
    let right = build_node(points, order, mid, end, depth + 1, leaf_capacity, nodes);
    nodes[id] = Node::Split {
        dim,
        value,
        left,
        right,
    };
    id
}
