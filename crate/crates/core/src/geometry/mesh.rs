use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

use super::ray::Bvh;
use super::{Aabb, Point3, PointCloud, RigidPose, Vector3};

/// Indexed triangle surface.
///
/// Construction validates indices and drops zero-area faces, so every face
/// of a live mesh has a well-defined plane. A bounding volume hierarchy for
/// ray casting is built alongside.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    faces: Vec<[u32; 3]>,
    bvh: Bvh,
}

impl TriangleMesh {
    /// Validates and cleans the input. Returns the mesh and the number of
    /// degenerate faces that were dropped.
    pub fn with_report(vertices: Vec<Point3>, faces: Vec<[u32; 3]>) -> Result<(Self, usize)> {
        if let Some(p) = vertices.iter().find(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid(format!("non-finite vertex {p}")));
        }
        let n = vertices.len();
        if let Some(f) = faces.iter().find(|f| f.iter().any(|&i| i as usize >= n)) {
            return Err(Error::invalid(format!("face {f:?} indexes past {n} vertices")));
        }
        let total = faces.len();
        let faces: Vec<[u32; 3]> = faces.into_iter().filter(|f| !is_degenerate(&vertices, f)).collect();
        let dropped = total - faces.len();
        if faces.is_empty() {
            return Err(Error::invalid("mesh has no non-degenerate faces"));
        }
        let bvh = Bvh::build(&vertices, &faces);
        Ok((Self { vertices, faces, bvh }, dropped))
    }

    pub fn new(vertices: Vec<Point3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        Self::with_report(vertices, faces).map(|(m, _)| m)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub(crate) fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    #[inline]
    pub fn triangle(&self, face: usize) -> [Point3; 3] {
        let [a, b, c] = self.faces[face];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn vertex_cloud(&self) -> PointCloud {
        PointCloud::new(self.vertices.clone())
    }

    /// `count` points uniformly distributed over the surface area.
    pub fn sample_surface<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> PointCloud {
        let areas: Vec<f64> = (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                (b - a).cross(&(c - a)).norm()
            })
            .collect();
        let faces = WeightedIndex::new(&areas).expect("mesh has non-degenerate faces");
        (0..count)
            .map(|_| {
                let [a, b, c] = self.triangle(faces.sample(rng));
                let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
                if u + v > 1.0 {
                    (u, v) = (1.0 - u, 1.0 - v);
                }
                a + (b - a) * u + (c - a) * v
            })
            .collect()
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_points(&self.vertices).expect("mesh has vertices")
    }

    /// The mesh with every vertex moved by `pose`.
    pub fn posed(&self, pose: &RigidPose) -> TriangleMesh {
        let vertices = self.vertices.iter().map(|p| pose.transform_point(p)).collect();
        Self::new(vertices, self.faces.clone()).expect("rigid motion keeps a valid mesh valid")
    }

    /// Unsigned distance from `p` to the surface (exhaustive over faces).
    pub fn distance_to_surface(&self, p: &Point3) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                (closest_point_on_triangle(p, &a, &b, &c) - p).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned box with half extents `half`, centered at the origin,
    /// outward-facing winding.
    pub fn cuboid(half: Vector3) -> TriangleMesh {
        let vertices: Vec<Point3> = (0..8)
            .map(|i| {
                Point3::new(
                    if i & 1 == 0 { -half.x } else { half.x },
                    if i & 2 == 0 { -half.y } else { half.y },
                    if i & 4 == 0 { -half.z } else { half.z },
                )
            })
            .collect();
        let faces = vec![
            [0, 2, 1],
            [1, 2, 3], // -z
            [4, 5, 6],
            [5, 7, 6], // +z
            [0, 1, 4],
            [1, 5, 4], // -y
            [2, 6, 3],
            [3, 6, 7], // +y
            [0, 4, 2],
            [2, 4, 6], // -x
            [1, 3, 5],
            [3, 7, 5], // +x
        ];
        TriangleMesh::new(vertices, faces).expect("cuboid is valid")
    }

    /// Sphere from a subdivided octahedron.
    pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
        let mut vertices = vec![
            Vector3::x(),
            -Vector3::x(),
            Vector3::y(),
            -Vector3::y(),
            Vector3::z(),
            -Vector3::z(),
        ];
        let mut faces: Vec<[u32; 3]> = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        for _ in 0..subdivisions {
            let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
            let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<Vector3>| -> u32 {
                *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let m = (vertices[a as usize] + vertices[b as usize]).normalize();
                    vertices.push(m);
                    (vertices.len() - 1) as u32
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let vertices = vertices.into_iter().map(|v| Point3::from(v * radius)).collect();
        TriangleMesh::new(vertices, faces).expect("icosphere is valid")
    }
}

fn is_degenerate(vertices: &[Point3], f: &[u32; 3]) -> bool {
    let [a, b, c] = f.map(|i| vertices[i as usize]);
    let e1 = b - a;
    let e2 = c - a;
    let scale = e1.norm_squared().max(e2.norm_squared()).max((c - b).norm_squared());
    e1.cross(&e2).norm() <= f64::EPSILON * scale
}

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub(crate) fn closest_point_on_triangle(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> Point3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn surface_samples_lie_on_the_surface_in_proportion_to_area() {
        // Faces z=±0.1 have area 0.4·0.2, faces x=±0.2 have 0.2·0.2.
        let m = TriangleMesh::cuboid(Vector3::new(0.2, 0.1, 0.1));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = 20_000;
        let pts = m.sample_surface(n, &mut rng);
        assert_eq!(pts.len(), n);
        let on_top = pts.iter().filter(|p| (p.z - 0.1).abs() < 1e-12).count() as f64;
        let p_top = 0.08 / (2.0 * (0.08 + 0.08 + 0.04));
        let sigma = (n as f64 * p_top * (1.0 - p_top)).sqrt();
        assert!((on_top - n as f64 * p_top).abs() < 4.0 * sigma);
        for p in pts.iter().take(500) {
            assert!(m.distance_to_surface(p) < 1e-12);
        }
    }

    #[test]
    fn single_triangle() {
        let m = TriangleMesh::new(
            vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (3, 1));
    }

    #[test]
    fn degenerate_faces_are_dropped() {
        let v = vec![
            Point3::origin(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ];
        let (m, dropped) = TriangleMesh::with_report(v, vec![[0, 1, 2], [0, 1, 3], [2, 2, 1]]).unwrap();
        assert_eq!(m.face_count(), 1);
        assert_eq!(dropped, 2);
    }

    #[test]
    fn rejects_bad_indices_and_empty_meshes() {
        let v = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriangleMesh::new(v.clone(), vec![]).is_err());
        assert!(TriangleMesh::new(v, vec![[0, 0, 1]]).is_err());
    }

    #[test]
    fn cuboid_and_sphere_shapes() {
        let c = TriangleMesh::cuboid(Vector3::new(0.5, 0.5, 0.5));
        assert_eq!(c.face_count(), 12);
        let b = c.bounding_box();
        assert_eq!(b.min, Point3::new(-0.5, -0.5, -0.5));
        // Outward winding: face normals point away from the center.
        for f in 0..c.face_count() {
            let [a, b, cc] = c.triangle(f);
            let n = (b - a).cross(&(cc - a));
            let centroid = (a.coords + b.coords + cc.coords) / 3.0;
            assert!(n.dot(&centroid) > 0.0, "face {f}");
        }
        let s = TriangleMesh::icosphere(2.0, 3);
        assert_eq!(s.face_count(), 8 * 4usize.pow(3));
        assert!(s.vertices().iter().all(|p| (p.coords.norm() - 2.0).abs() < 1e-12));
    }

    #[test]
    fn surface_distance() {
        let c = TriangleMesh::cuboid(Vector3::new(0.5, 0.5, 0.5));
        assert!((c.distance_to_surface(&Point3::new(0.0, 0.0, 2.0)) - 1.5).abs() < 1e-12);
        assert!((c.distance_to_surface(&Point3::new(0.1, 0.0, 0.0)) - 0.4).abs() < 1e-12);
        let corner = Point3::new(1.5, 1.5, 1.5);
        assert!((c.distance_to_surface(&corner) - 3f64.sqrt()).abs() < 1e-12);
    }
}
