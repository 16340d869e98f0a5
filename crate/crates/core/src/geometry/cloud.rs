use crate::error::{Error, Result};

use super::{distance_squared, Aabb, Point3, RigidPose, Vector3};

/// An ordered set of points. Indices are stable identities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point3> {
        self.points.iter()
    }

    pub fn push(&mut self, p: Point3) {
        self.points.push(p);
    }

    pub fn transformed(&self, pose: &RigidPose) -> PointCloud {
        transform_cloud(self, pose)
    }

    pub fn centroid(&self) -> Option<Point3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords);
        Some(Point3::from(sum / self.points.len() as f64))
    }
}

impl From<Vec<Point3>> for PointCloud {
    fn from(points: Vec<Point3>) -> Self {
        Self::new(points)
    }
}

impl FromIterator<Point3> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Point3>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a Point3;
    type IntoIter = std::slice::Iter<'a, Point3>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Applies `p ↦ R·p + t` to every point, preserving order.
pub fn transform_cloud(cloud: &PointCloud, pose: &RigidPose) -> PointCloud {
    cloud.points.iter().map(|p| pose.transform_point(p)).collect()
}

pub fn bounding_box(cloud: &PointCloud) -> Result<Aabb> {
    Aabb::from_points(&cloud.points).ok_or_else(|| Error::invalid("bounding box of an empty cloud"))
}

/// Linear-scan nearest neighbor. Ties go to the lowest index.
pub fn nearest_neighbor(query: &Point3, cloud: &PointCloud) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in cloud.points.iter().enumerate() {
        let d2 = distance_squared(query, p);
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((i, d2));
        }
    }
    best.map(|(i, d2)| (i, d2.sqrt()))
        .ok_or_else(|| Error::invalid("nearest neighbor in an empty cloud"))
}
