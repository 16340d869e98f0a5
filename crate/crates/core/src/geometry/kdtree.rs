use crate::error::{Error, Result};

use super::{distance_squared, Point3, PointCloud};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static 3-D k-d tree over a point cloud.
///
/// Queries return exactly what [`nearest_neighbor`](super::nearest_neighbor)
/// returns, including the lowest-index tie rule.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn new(cloud: &PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::invalid("k-d tree over an empty cloud"));
        }
        let mut tree = KdTree {
            points: cloud.points.clone(),
            order: (0..cloud.len()).collect(),
            nodes: Vec::with_capacity(2 * cloud.len() / LEAF_SIZE + 1),
        };
        tree.build(0, cloud.len());
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let slice = &self.order[start..end];
        let mut lo = self.points[slice[0]];
        let mut hi = lo;
        for &i in slice {
            lo = lo.inf(&self.points[i]);
            hi = hi.sup(&self.points[i]);
        }
        let axis = (hi - lo).imax();
        let mid = (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
        let value = self.points[self.order[start + mid]][axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, start + mid);
        let right = self.build(start + mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Returns `(index, distance)` of the closest point.
    pub fn nearest(&self, query: &Point3) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, query, &mut best);
        (best.0, best.1.sqrt())
    }

    fn search(&self, node: usize, q: &Point3, best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = distance_squared(q, &self.points[i]);
                    if d2 < best.1 || (d2 == best.1 && i < best.0) {
                        *best = (i, d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = q[axis] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                // `<=` so an equidistant point with a lower index on the far side is still seen.
                if delta * delta <= best.1 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::nearest_neighbor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_linear_scan_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let random_point = |rng: &mut ChaCha8Rng| Point3::new(rng.random(), rng.random(), rng.random());
        let cloud: PointCloud = (0..1000).map(|_| random_point(&mut rng)).collect();
        let tree = KdTree::new(&cloud).unwrap();
        for _ in 0..2000 {
            let q = random_point(&mut rng) * 1.2;
            assert_eq!(tree.nearest(&q), nearest_neighbor(&q, &cloud).unwrap());
        }
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        // Duplicated points on a grid, so most queries hit exact ties.
        let mut pts = Vec::new();
        for _ in 0..3 {
            for x in 0..5 {
                for y in 0..5 {
                    pts.push(Point3::new(x as f64, y as f64, 0.0));
                }
            }
        }
        let cloud = PointCloud::new(pts);
        let tree = KdTree::new(&cloud).unwrap();
        for x in 0..9 {
            for y in 0..9 {
                let q = Point3::new(x as f64 * 0.5, y as f64 * 0.5, 0.0);
                assert_eq!(tree.nearest(&q), nearest_neighbor(&q, &cloud).unwrap(), "{q}");
            }
        }
    }

    #[test]
    fn rejects_empty_cloud() {
        assert!(KdTree::new(&PointCloud::default()).is_err());
    }
}
