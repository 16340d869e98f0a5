use super::{Point3, Vector3};

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

/// One of the six faces of an [`Aabb`], identified by axis and side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoxFace {
    pub axis: usize,
    /// `true` for the face at `max[axis]`.
    pub positive: bool,
}

impl BoxFace {
    pub const ALL: [BoxFace; 6] = [
        BoxFace {
            axis: 0,
            positive: false,
        },
        BoxFace {
            axis: 0,
            positive: true,
        },
        BoxFace {
            axis: 1,
            positive: false,
        },
        BoxFace {
            axis: 1,
            positive: true,
        },
        BoxFace {
            axis: 2,
            positive: false,
        },
        BoxFace {
            axis: 2,
            positive: true,
        },
    ];

    /// Index in `0..6` matching [`BoxFace::ALL`].
    pub fn id(&self) -> usize {
        2 * self.axis + usize::from(self.positive)
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    /// Unit normal pointing into the box.
    pub fn inward_normal(&self) -> Vector3 {
        let mut n = Vector3::zeros();
        n[self.axis] = if self.positive { -1.0 } else { 1.0 };
        n
    }
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Self { min, max }
    }

    /// Returns `None` for an empty iterator.
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        let (min, max) = iter.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        Some(Self { min, max })
    }

    pub fn inflated(&self, margin: f64) -> Self {
        let m = Vector3::repeat(margin);
        Self::new(self.min - m, self.max + m)
    }

    pub fn extent(&self) -> Vector3 {
        self.max - self.min
    }

    pub fn center(&self) -> Point3 {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - tol && p[i] <= self.max[i] + tol)
    }

    pub fn face_area(&self, face: BoxFace) -> f64 {
        let e = self.extent();
        let (u, v) = tangent_axes(face.axis);
        e[u] * e[v]
    }

    pub fn surface_area(&self) -> f64 {
        BoxFace::ALL.iter().map(|f| self.face_area(*f)).sum()
    }

    /// Maps `(s, t) ∈ [0,1]²` to a point on `face`.
    pub fn point_on_face(&self, face: BoxFace, s: f64, t: f64) -> Point3 {
        let (u, v) = tangent_axes(face.axis);
        let mut p = self.min;
        p[face.axis] = if face.positive {
            self.max[face.axis]
        } else {
            self.min[face.axis]
        };
        p[u] = self.min[u] + s * (self.max[u] - self.min[u]);
        p[v] = self.min[v] + t * (self.max[v] - self.min[v]);
        p
    }

    /// Distance from `p` to the plane of `face`.
    pub fn face_plane_distance(&self, face: BoxFace, p: &Point3) -> f64 {
        let plane = if face.positive {
            self.max[face.axis]
        } else {
            self.min[face.axis]
        };
        (p[face.axis] - plane).abs()
    }

    /// Slab test. Returns the parametric entry distance, clamped at zero.
    pub(crate) fn ray_entry(&self, origin: &Point3, inv_dir: &Vector3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0_f64;
        let mut t1 = t_max;
        for i in 0..3 {
            let mut near = (self.min[i] - origin[i]) * inv_dir[i];
            let mut far = (self.max[i] - origin[i]) * inv_dir[i];
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // NaN from 0 * inf: the ray is parallel and on the slab boundary.
            if near.is_nan() || far.is_nan() {
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

fn tangent_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_ids_round_trip() {
        for (i, f) in BoxFace::ALL.iter().enumerate() {
            assert_eq!(f.id(), i);
            assert_eq!(BoxFace::from_id(i), Some(*f));
        }
        assert_eq!(BoxFace::from_id(6), None);
    }

    #[test]
    fn points_on_faces_lie_on_the_face_plane() {
        let b = Aabb::new(Point3::new(-1.0, 0.0, 2.0), Point3::new(1.0, 3.0, 2.5));
        for f in BoxFace::ALL {
            let p = b.point_on_face(f, 0.25, 0.75);
            assert!(b.face_plane_distance(f, &p) < 1e-15);
            assert!(b.contains(&p, 0.0));
            assert!(!b.contains(&(p - 1e-3 * f.inward_normal()), 0.0));
        }
        assert!((b.surface_area() - 2.0 * (2.0 * 3.0 + 2.0 * 0.5 + 3.0 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn slab_test() {
        let b = Aabb::new(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
        let o = Point3::new(0.0, 0.0, 5.0);
        let d = Vector3::new(0.0, 0.0, -1.0);
        let inv = d.map(|c| 1.0 / c);
        assert_eq!(b.ray_entry(&o, &inv, f64::INFINITY), Some(4.0));
        let inv_away = (-d).map(|c| 1.0 / c);
        assert_eq!(b.ray_entry(&o, &inv_away, f64::INFINITY), None);
        let side = Point3::new(2.0, 0.0, 5.0);
        assert_eq!(b.ray_entry(&side, &inv, f64::INFINITY), None);
    }
}
