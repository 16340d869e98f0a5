use nalgebra::Unit;

use crate::error::{Error, Result};

use super::{Aabb, Point3, RigidPose, TriangleMesh, Vector3};

/// Determinant threshold below which a ray counts as parallel to a triangle.
const PARALLEL_EPS: f64 = 1e-12;
/// Hits closer than this to the ray origin are discarded.
const MIN_HIT_DISTANCE: f64 = 1e-9;
const BVH_LEAF_SIZE: usize = 4;

/// Half-line `origin + t·direction`, `t ≥ 0`, with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point3,
    pub direction: Unit<Vector3>,
}

impl Ray {
    /// Normalizes `direction`; fails if it is zero or not finite.
    pub fn new(origin: Point3, direction: Vector3) -> Result<Self> {
        let norm = direction.norm();
        if !(norm.is_finite() && norm > 0.0) || !origin.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("ray needs a finite origin and a non-zero direction"));
        }
        Ok(Self {
            origin,
            direction: Unit::new_unchecked(direction / norm),
        })
    }

    pub fn at(&self, t: f64) -> Point3 {
        self.origin + self.direction.into_inner() * t
    }

    /// The same ray expressed in the frame where `pose` is the identity.
    pub fn to_local(&self, pose: &RigidPose) -> Ray {
        let inv = pose.inverse();
        Ray {
            origin: inv.transform_point(&self.origin),
            direction: Unit::new_unchecked(inv.rotation * self.direction.into_inner()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    /// World-frame hit point.
    pub point: Point3,
    pub distance: f64,
    pub face: usize,
}

/// Möller–Trumbore ray/triangle test. Returns the ray parameter of the hit.
#[inline]
pub fn intersect_triangle(origin: &Point3, dir: &Vector3, a: &Point3, b: &Point3, c: &Point3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < PARALLEL_EPS {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv_det;
    (t >= MIN_HIT_DISTANCE).then_some(t)
}

/// Nearest intersection of `ray` with `mesh` placed at `pose`.
///
/// Ties in distance go to the lowest face index.
pub fn ray_mesh_intersect(ray: &Ray, mesh: &TriangleMesh, pose: &RigidPose) -> Option<RayHit> {
    let local = ray.to_local(pose);
    let (face, t) = mesh.bvh().nearest_hit(mesh, &local.origin, local.direction.as_ref())?;
    Some(RayHit {
        point: ray.at(t),
        distance: t,
        face,
    })
}

#[derive(Debug, Clone)]
struct BvhNode {
    bounds: Aabb,
    /// Leaf: `count > 0`, faces `order[first..first + count]`.
    /// Interior: `count == 0`, children at `first` and `first + 1`.
    first: usize,
    count: usize,
}

/// Median-split bounding volume hierarchy over mesh faces.
#[derive(Debug, Clone)]
pub(crate) struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<usize>,
}

impl Bvh {
    pub(crate) fn build(vertices: &[Point3], faces: &[[u32; 3]]) -> Bvh {
        let tri = |f: usize| faces[f].map(|i| vertices[i as usize]);
        let centroids: Vec<Point3> = (0..faces.len())
            .map(|f| {
                let [a, b, c] = tri(f);
                Point3::from((a.coords + b.coords + c.coords) / 3.0)
            })
            .collect();
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: (0..faces.len()).collect(),
        };
        let bounds = |order: &[usize]| {
            let b = Aabb::from_points(
                order
                    .iter()
                    .flat_map(|&f| faces[f].iter())
                    .map(|&i| &vertices[i as usize]),
            )
            .expect("non-empty node");
            // Pad so slab entry never exceeds a triangle hit through rounding.
            b.inflated(1e-9 * (1.0 + b.extent().amax()))
        };
        bvh.nodes.push(BvhNode {
            bounds: bounds(&bvh.order),
            first: 0,
            count: faces.len(),
        });
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let BvhNode { first, count, .. } = bvh.nodes[id];
            if count <= BVH_LEAF_SIZE {
                continue;
            }
            let slice = &mut bvh.order[first..first + count];
            let cb = Aabb::from_points(slice.iter().map(|&f| &centroids[f])).expect("non-empty");
            let axis = cb.extent().imax();
            let mid = count / 2;
            slice.select_nth_unstable_by(mid, |&a, &b| centroids[a][axis].total_cmp(&centroids[b][axis]));
            let left = BvhNode {
                bounds: bounds(&slice[..mid]),
                first,
                count: mid,
            };
            let right = BvhNode {
                bounds: bounds(&slice[mid..]),
                first: first + mid,
                count: count - mid,
            };
            let child = bvh.nodes.len();
            bvh.nodes.push(left);
            bvh.nodes.push(right);
            bvh.nodes[id].first = child;
            bvh.nodes[id].count = 0;
            stack.push(child);
            stack.push(child + 1);
        }
        bvh
    }

    /// Mesh-frame nearest hit as `(face, t)`.
    fn nearest_hit(&self, mesh: &TriangleMesh, origin: &Point3, dir: &Vector3) -> Option<(usize, f64)> {
        let inv_dir = dir.map(|c| 1.0 / c);
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let limit = best.map_or(f64::INFINITY, |(_, t)| t);
            match node.bounds.ray_entry(origin, &inv_dir, limit) {
                Some(entry) if entry <= limit => {}
                _ => continue,
            }
            if node.count > 0 {
                for &f in &self.order[node.first..node.first + node.count] {
                    let [a, b, c] = mesh.triangle(f);
                    if let Some(t) = intersect_triangle(origin, dir, &a, &b, &c) {
                        let better = match best {
                            None => true,
                            Some((bf, bt)) => t < bt || (t == bt && f < bf),
                        };
                        if better {
                            best = Some((f, t));
                        }
                    }
                }
            } else {
                stack.push(node.first);
                stack.push(node.first + 1);
            }
        }
        best
    }
}
