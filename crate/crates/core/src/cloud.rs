//! Indexed 3D point clouds.

use nalgebra::Point3;

use crate::error::{Error, Result};

pub type Point = Point3<f64>;

/// Ordered set of points in meters. The position in `points` is the point's
/// stable index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point>,
    intensity: Option<Vec<f32>>,
}

impl PointCloud {
    /// Builds a cloud, rejecting non-finite coordinates.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if let Some(i) = points
            .iter()
            .position(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            points,
            intensity: None,
        })
    }

    pub fn from_xyz(coords: &[[f64; 3]]) -> Result<Self> {
        Self::new(coords.iter().map(|c| Point::new(c[0], c[1], c[2])).collect())
    }

    pub fn with_intensity(mut self, intensity: Vec<f32>) -> Result<Self> {
        if intensity.len() != self.points.len() {
            return Err(Error::Config(format!(
                "intensity channel has {} values for {} points",
                intensity.len(),
                self.points.len()
            )));
        }
        self.intensity = Some(intensity);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn intensity(&self) -> Option<&[f32]> {
        self.intensity.as_deref()
    }

    /// Copies the selected points, in the order given.
    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            intensity: self
                .intensity
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect()),
        }
    }

    /// Appends another cloud. The intensity channel survives only when both
    /// sides carry one.
    pub fn extend(&mut self, other: &PointCloud) {
        let was_empty = self.points.is_empty();
        self.intensity = match (self.intensity.take(), other.intensity.as_ref()) {
            (Some(mut a), Some(b)) => {
                a.extend_from_slice(b);
                Some(a)
            }
            (None, Some(b)) if was_empty => Some(b.clone()),
            _ => None,
        };
        self.points.extend_from_slice(&other.points);
    }

    /// (min z, max z); `None` for an empty cloud.
    pub fn z_range(&self) -> Option<(f64, f64)> {
        z_range(&self.points)
    }

    /// Index of the lowest point; ties go to the smaller index.
    pub fn lowest(&self) -> Option<usize> {
        lowest_index(&self.points)
    }
}

pub(crate) fn z_range(points: &[Point]) -> Option<(f64, f64)> {
    if points.is_empty() {
        return None;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        lo = lo.min(p.z);
        hi = hi.max(p.z);
    }
    Some((lo, hi))
}

pub(crate) fn lowest_index(points: &[Point]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        match best {
            Some(b) if points[b].z <= p.z => {}
            _ => best = Some(i),
        }
    }
    best
}
