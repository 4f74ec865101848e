//! Support polygon and signed stability margin on the ground plane.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Point2<T> = [T; 2];

fn cross<T: Real>(o: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull in counter-clockwise order (monotone chain). Collinear and
/// duplicate points are dropped, so degenerate inputs yield one or two
/// vertices.
pub fn convex_hull<T: Real>(points: &[Point2<T>]) -> Vec<Point2<T>> {
    let mut pts: Vec<Point2<T>> = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a[1].partial_cmp(&b[1]).unwrap_or(std::cmp::Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2<T>> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2<T>>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero()
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.pop();
    }
    hull
}

fn segment_distance<T: Real>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > T::zero() {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2)
            .max(T::zero())
            .min(T::one())
    } else {
        T::zero()
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    d[0].hypot(d[1])
}

/// Signed distance from `p` to the boundary of a counter-clockwise convex
/// polygon: positive inside, negative outside. Polygons with fewer than
/// three vertices have no interior.
pub fn signed_distance<T: Real>(hull: &[Point2<T>], p: Point2<T>) -> T {
    match hull.len() {
        0 => T::neg_infinity(),
        1 => -(p[0] - hull[0][0]).hypot(p[1] - hull[0][1]),
        2 => -segment_distance(p, hull[0], hull[1]),
        n => {
            let boundary = (0..n)
                .map(|i| segment_distance(p, hull[i], hull[(i + 1) % n]))
                .fold(T::infinity(), T::min);
            let inside = (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= T::zero());
            if inside {
                boundary
            } else {
                -boundary
            }
        }
    }
}

/// Margin of `com` over the hull of ground-projected contact points.
pub fn stability_margin<T: Real>(contacts: &[Point2<T>], com: Point2<T>) -> Result<T> {
    if contacts.is_empty() {
        return Err(Error::EmptyStance);
    }
    Ok(signed_distance(&convex_hull(contacts), com))
}
