//! Compact convex domains: intervals, boxes and balls.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::linalg::dist;

/// A compact convex region of R^D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

/// A boundary point with its outward unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

/// A point of a closed planar boundary loop traversed counterclockwise.
///
/// At box corners the point stays fixed while the tangent turns.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopFrame {
    pub point: Vec<f64>,
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "interval needs lo < hi");
        Domain::Interval { lo, hi }
    }

    pub fn cube(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a < b), "box needs lo < hi on every axis");
        Domain::Box { lo, hi }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius > 0.0, "ball radius must be positive");
        Domain::Ball { center, radius }
    }

    pub fn unit_ball(dim: usize) -> Self {
        Domain::ball(vec![0.0; dim], 1.0)
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Box { lo, .. } => lo.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    /// Euler characteristic; every supported shape is contractible.
    pub fn euler_char(&self) -> i32 {
        1
    }

    pub fn is_convex(&self) -> bool {
        true
    }

    /// Distance to the boundary, positive inside and negative outside.
    pub fn signed_distance_inside(&self, s: &[f64]) -> f64 {
        match self {
            Domain::Interval { lo, hi } => (s[0] - lo).min(hi - s[0]),
            Domain::Box { lo, hi } => {
                let inside = s
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(x, (a, b))| (x - a).min(b - x))
                    .fold(f64::INFINITY, f64::min);
                if inside >= 0.0 {
                    inside
                } else {
                    -dist(s, &self.project(s))
                }
            }
            Domain::Ball { center, radius } => radius - dist(s, center),
        }
    }

    pub fn distance_to_boundary(&self, s: &[f64]) -> f64 {
        self.signed_distance_inside(s).abs()
    }

    pub fn contains(&self, s: &[f64], tol: f64) -> bool {
        self.signed_distance_inside(s) >= -tol
    }

    /// Nearest point of the domain.
    pub fn project(&self, s: &[f64]) -> Vec<f64> {
        match self {
            Domain::Interval { lo, hi } => vec![s[0].clamp(*lo, *hi)],
            Domain::Box { lo, hi } => s
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (a, b))| x.clamp(*a, *b))
                .collect(),
            Domain::Ball { center, radius } => {
                let d = dist(s, center);
                if d <= *radius {
                    s.to_vec()
                } else {
                    center
                        .iter()
                        .zip(s)
                        .map(|(c, x)| c + (x - c) * radius / d)
                        .collect()
                }
            }
        }
    }

    /// Outward unit normal at the boundary point nearest to `s`.
    pub fn outward_normal(&self, s: &[f64]) -> Vec<f64> {
        match self {
            Domain::Interval { lo, hi } => {
                if (s[0] - lo).abs() <= (hi - s[0]).abs() {
                    vec![-1.0]
                } else {
                    vec![1.0]
                }
            }
            Domain::Box { lo, hi } => {
                let mut best = (f64::INFINITY, 0, 1.0);
                for i in 0..lo.len() {
                    let dl = (s[i] - lo[i]).abs();
                    let dh = (hi[i] - s[i]).abs();
                    if dl < best.0 {
                        best = (dl, i, -1.0);
                    }
                    if dh < best.0 {
                        best = (dh, i, 1.0);
                    }
                }
                let mut n = vec![0.0; lo.len()];
                n[best.1] = best.2;
                n
            }
            Domain::Ball { center, .. } => {
                let d = dist(s, center);
                s.iter().zip(center).map(|(x, c)| (x - c) / d).collect()
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval { lo, hi } => (vec![*lo], vec![*hi]),
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Box { lo, hi } => dist(lo, hi),
            Domain::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Deviation of `s` from the boundary equation; zero for exact boundary points.
    pub fn boundary_residual(&self, s: &[f64]) -> f64 {
        match self {
            Domain::Interval { lo, hi } => (s[0] - lo).abs().min((s[0] - hi).abs()),
            Domain::Box { .. } => self.signed_distance_inside(s).abs(),
            Domain::Ball { center, radius } => (dist(s, center) - radius).abs(),
        }
    }

    /// Parameter range of the planar boundary loop used by [`Domain::loop_frame`].
    pub fn loop_period(&self) -> f64 {
        match self {
            Domain::Ball { .. } => TAU,
            Domain::Box { .. } => 8.0,
            Domain::Interval { .. } => panic!("intervals have no boundary loop"),
        }
    }

    /// Counterclockwise boundary loop of a planar ball or box.
    ///
    /// Boxes alternate edges and corner turns, each occupying a unit of parameter.
    pub fn loop_frame(&self, u: f64) -> LoopFrame {
        assert_eq!(self.dim(), 2, "boundary loops exist only in the plane");
        let u = num_traits::Euclid::rem_euclid(&u, &self.loop_period());
        match self {
            Domain::Ball { center, radius } => {
                let (sn, cs) = u.sin_cos();
                LoopFrame {
                    point: vec![center[0] + radius * cs, center[1] + radius * sn],
                    tangent: [-sn, cs],
                    normal: [cs, sn],
                }
            }
            Domain::Box { lo, hi } => {
                let seg = (u.floor() as usize).min(7);
                let w = u - seg as f64;
                let corners = [[hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]], [lo[0], lo[1]]];
                let starts = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
                let k = seg / 2;
                let base_angle = k as f64 * PI / 2.0;
                let (point, angle) = if seg.is_multiple_of(2) {
                    let (a, b) = (starts[k], corners[k]);
                    (vec![a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])], base_angle)
                } else {
                    (corners[k].to_vec(), base_angle + w * PI / 2.0)
                };
                let (sn, cs) = angle.sin_cos();
                LoopFrame {
                    point,
                    tangent: [cs, sn],
                    normal: [sn, -cs],
                }
            }
            Domain::Interval { .. } => unreachable!(),
        }
    }

    /// Loop parameter of a boundary point of a planar ball or box, inverse to [`Domain::loop_frame`].
    pub fn loop_param(&self, s: &[f64]) -> f64 {
        assert_eq!(self.dim(), 2, "boundary loops exist only in the plane");
        match self {
            Domain::Ball { center, .. } => {
                let a = (s[1] - center[1]).atan2(s[0] - center[0]);
                if a < 0.0 {
                    a + TAU
                } else {
                    a
                }
            }
            Domain::Box { lo, hi } => {
                let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
                let d = [s[1] - lo[1], hi[0] - s[0], hi[1] - s[1], s[0] - lo[0]];
                let face = (0..4).min_by(|a, b| d[*a].abs().total_cmp(&d[*b].abs())).unwrap();
                let t = match face {
                    0 => (s[0] - lo[0]) / w,
                    1 => (s[1] - lo[1]) / h,
                    2 => (hi[0] - s[0]) / w,
                    _ => (hi[1] - s[1]) / h,
                };
                2.0 * face as f64 + t.clamp(0.0, 1.0)
            }
            Domain::Interval { .. } => unreachable!(),
        }
    }

    /// Nearest boundary point.
    pub fn snap_to_boundary(&self, s: &[f64]) -> Vec<f64> {
        match self {
            Domain::Ball { center, radius } => {
                let d = dist(s, center);
                if d == 0.0 {
                    let mut p = center.clone();
                    p[0] += radius;
                    return p;
                }
                center.iter().zip(s).map(|(c, x)| c + (x - c) * radius / d).collect()
            }
            _ => {
                let mut p = self.project(s);
                let n = self.outward_normal(&p);
                let (lo, hi) = self.bounding_box();
                for i in 0..p.len() {
                    if n[i] > 0.0 {
                        p[i] = hi[i];
                    } else if n[i] < 0.0 {
                        p[i] = lo[i];
                    }
                }
                p
            }
        }
    }

    /// Sample the boundary with outward normals.
    ///
    /// Intervals give their two endpoints; planar shapes give `n` loop samples;
    /// three-dimensional balls give a Fibonacci lattice and boxes a per-face grid.
    pub fn boundary_samples(&self, n: usize) -> Vec<BoundarySample> {
        let d = self.dim();
        match (self, d) {
            (Domain::Interval { lo, hi }, _) => interval_ends(*lo, *hi),
            (Domain::Box { lo, hi }, 1) => interval_ends(lo[0], hi[0]),
            (Domain::Ball { center, radius }, 1) => {
                interval_ends(center[0] - radius, center[0] + radius)
            }
            (_, 2) => {
                let period = self.loop_period();
                (0..n)
                    .map(|k| {
                        let fr = self.loop_frame(period * (k as f64 + 0.5) / n as f64);
                        BoundarySample {
                            point: fr.point,
                            normal: fr.normal.to_vec(),
                        }
                    })
                    .collect()
            }
            (Domain::Ball { center, radius }, 3) => fibonacci_sphere(n)
                .into_iter()
                .map(|u| BoundarySample {
                    point: center.iter().zip(&u).map(|(c, x)| c + radius * x).collect(),
                    normal: u.to_vec(),
                })
                .collect(),
            (Domain::Box { lo, hi }, 3) => box_faces_3d(lo, hi, n),
            _ => panic!("boundary sampling supports dimensions 1 to 3"),
        }
    }
}

fn interval_ends(lo: f64, hi: f64) -> Vec<BoundarySample> {
    vec![
        BoundarySample {
            point: vec![lo],
            normal: vec![-1.0],
        },
        BoundarySample {
            point: vec![hi],
            normal: vec![1.0],
        },
    ]
}

/// Nearly uniform unit vectors on the 2-sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let (s, c) = (golden * k as f64).sin_cos();
            [r * c, r * s, z]
        })
        .collect()
}

fn box_faces_3d(lo: &[f64], hi: &[f64], n: usize) -> Vec<BoundarySample> {
    let per_side = ((n as f64 / 6.0).sqrt().ceil() as usize).max(2);
    let mut out = Vec::with_capacity(6 * per_side * per_side);
    for axis in 0..3 {
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        for (val, sign) in [(lo[axis], -1.0), (hi[axis], 1.0)] {
            for i in 0..per_side {
                for j in 0..per_side {
                    let mut p = vec![0.0; 3];
                    p[axis] = val;
                    p[a] = lo[a] + (hi[a] - lo[a]) * (i as f64 + 0.5) / per_side as f64;
                    p[b] = lo[b] + (hi[b] - lo[b]) * (j as f64 + 0.5) / per_side as f64;
                    let mut nrm = vec![0.0; 3];
                    nrm[axis] = sign;
                    out.push(BoundarySample { point: p, normal: nrm });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    #[test]
    fn ball_boundary_satisfies_equation() {
        for dom in [Domain::unit_ball(2), Domain::ball(vec![0.5, -1.0, 2.0], 0.3)] {
            for s in dom.boundary_samples(500) {
                assert!(dom.boundary_residual(&s.point) < 1e-12);
                assert!((norm(&s.normal) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn box_loop_is_closed_and_on_boundary() {
        let dom = Domain::cube(vec![-1.0, -2.0], vec![3.0, 1.0]);
        for k in 0..800 {
            let fr = dom.loop_frame(8.0 * k as f64 / 800.0);
            assert!(dom.boundary_residual(&fr.point) < 1e-12);
        }
        let a = dom.loop_frame(0.0);
        let b = dom.loop_frame(8.0 - 1e-12);
        assert!(dist(&a.point, &b.point) < 1e-9);
    }

    #[test]
    fn box_loop_normals_point_outward() {
        let dom = Domain::cube(vec![-1.0, -1.0], vec![1.0, 1.0]);
        for k in 0..80 {
            let fr = dom.loop_frame(8.0 * (k as f64 + 0.5) / 80.0);
            assert!(fr.point[0] * fr.normal[0] + fr.point[1] * fr.normal[1] > 0.0);
        }
    }

    #[test]
    fn projection_and_distance() {
        let dom = Domain::unit_ball(2);
        assert_eq!(dom.project(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(dom.signed_distance_inside(&[0.5, 0.0]), 0.5);
        assert!(dom.contains(&[0.6, 0.8], 1e-12));
        assert!(!dom.contains(&[0.8, 0.8], 1e-12));
        let b = Domain::cube(vec![0.0, 0.0], vec![1.0, 2.0]);
        assert_eq!(b.project(&[-1.0, 3.0]), vec![0.0, 2.0]);
        assert_eq!(b.signed_distance_inside(&[0.25, 1.0]), 0.25);
        assert!((b.signed_distance_inside(&[2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(Domain::interval(-1.0, 1.0).euler_char(), 1);
    }

    #[test]
    fn fibonacci_points_are_unit() {
        for p in fibonacci_sphere(100) {
            assert!((norm(&p) - 1.0).abs() < 1e-12);
        }
    }
}
