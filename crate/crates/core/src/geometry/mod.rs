//! Geometric substrate: point clouds, triangle meshes, rigid poses, ray
//! casting and nearest-neighbor search.

mod aabb;
mod cloud;
mod kdtree;
mod mesh;
mod ply;
mod pose;
mod ray;

pub use aabb::{Aabb, BoxFace};
pub use cloud::{bounding_box, nearest_neighbor, transform_cloud, PointCloud};
pub use kdtree::KdTree;
pub use mesh::TriangleMesh;
pub use ply::{load_mesh, parse_ply};
pub use pose::RigidPose;
pub use ray::{intersect_triangle, ray_mesh_intersect, Ray, RayHit};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

/// Squared Euclidean distance. Every nearest-neighbor routine in the crate
/// goes through this so that tree and linear-scan results agree bit for bit.
#[inline]
pub fn distance_squared(a: &Point3, b: &Point3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}
