//! Minimax paths between two maxima on a convex domain.
//!
//! Every path between two strict local maxima dips below the lower of them; the
//! path whose lowest point is highest ends at a point that is either a critical
//! point of `f` or a boundary point where the level set touches the boundary.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::critpoint::refine_newton;
use crate::domain::Domain;
use crate::error::PassError;
use crate::field::Field;
use crate::linalg::{dist, dot, lex_cmp, norm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassOptions {
    /// Movable knots between the two fixed endpoints.
    pub n_knots: usize,
    pub iters: usize,
    /// Initial ascent step; chosen from the initial gradients when `None`.
    pub step: Option<f64>,
    /// Certificate tolerance on `|grad f|` or the tangential gradient.
    pub pass_tol: f64,
    /// Required gap between the path minimum and `f(p1)`.
    pub path_tol: f64,
}

impl Default for PassOptions {
    fn default() -> Self {
        PassOptions {
            n_knots: 16,
            iters: 2000,
            step: None,
            pass_tol: 1e-6,
            path_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassKind {
    InteriorCritical,
    BoundaryTangency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// `|grad f(p3)|`.
    GradNorm(f64),
    /// Norm of the boundary-tangential part of `grad f(p3)`.
    BoundaryAlignment(f64),
}

impl Certificate {
    pub fn residual(self) -> f64 {
        match self {
            Certificate::GradNorm(x) | Certificate::BoundaryAlignment(x) => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassResult {
    /// Endpoints after refinement onto the maxima, ordered so `f(p1) <= f(p2)`.
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
    /// `f(p3)`.
    pub c: f64,
    pub kind: PassKind,
    pub certificate: Certificate,
    /// Knots of the best path, endpoints included.
    pub path: Vec<Vec<f64>>,
    /// Lowest value along the best path.
    pub path_value: f64,
    pub iterations: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxPath {
    /// Knots, endpoints included.
    pub knots: Vec<Vec<f64>>,
    /// Lowest value along the path.
    pub value: f64,
    /// Where the path attains its lowest value.
    pub lowest: Vec<f64>,
    /// Path value after every accepted update; nondecreasing.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// `f` is constant along the path.
    pub degenerate: bool,
}

const SEGMENT_SAMPLES: usize = 16;

/// Lowest value along the polyline, sampled within every segment, and where it occurs.
fn path_min(field: &Field, knots: &[DVector<f64>]) -> (f64, DVector<f64>) {
    let mut best = (field.value(knots[0].as_slice()), knots[0].clone());
    for w in knots.windows(2) {
        for j in 1..=SEGMENT_SAMPLES {
            let x = &w[0] + (&w[1] - &w[0]) * (j as f64 / SEGMENT_SAMPLES as f64);
            let v = field.value(x.as_slice());
            if v < best.0 {
                best = (v, x);
            }
        }
    }
    best
}

/// Redistribute the interior knots at equal arc length along the polyline.
fn reparametrize(knots: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let m = knots.len();
    let mut cum = vec![0.0; m];
    for i in 1..m {
        cum[i] = cum[i - 1] + (&knots[i] - &knots[i - 1]).norm();
    }
    let total = cum[m - 1];
    if total == 0.0 {
        return knots.to_vec();
    }
    let mut out = Vec::with_capacity(m);
    out.push(knots[0].clone());
    let mut seg = 0;
    for k in 1..m - 1 {
        let s = total * k as f64 / (m - 1) as f64;
        while seg + 1 < m - 1 && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let w = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        out.push(&knots[seg] + (&knots[seg + 1] - &knots[seg]) * w);
    }
    out.push(knots[m - 1].clone());
    out
}

fn initial_step(field: &Field, domain: &Domain, knots: &[DVector<f64>]) -> f64 {
    let gmax = knots
        .iter()
        .map(|k| field.gradient(k.as_slice()).norm())
        .fold(0.0, f64::max);
    let scale = 0.01 * domain.diameter();
    if gmax > 0.0 {
        scale / gmax
    } else {
        scale
    }
}

/// Ascend a path between two fixed endpoints, maximizing its lowest point.
///
/// Each update moves every interior knot up the gradient component normal to the
/// path, projects it onto the domain and redistributes the knots evenly; updates
/// that would lower the path minimum are rejected and the step halved.
pub fn minimax_from(
    field: &Field,
    domain: &Domain,
    initial: &[Vec<f64>],
    iters: usize,
    step: Option<f64>,
) -> Result<MinimaxPath, PassError> {
    if !domain.is_convex() {
        return Err(PassError::Convexity);
    }
    if initial.len() < 3 {
        return Err(PassError::Precondition("a path needs at least one movable knot".into()));
    }
    let mut knots: Vec<DVector<f64>> = initial
        .iter()
        .map(|k| DVector::from_vec(domain.project(k)))
        .collect();
    let (mut value, _) = path_min(field, &knots);
    let mut h = step.unwrap_or_else(|| initial_step(field, domain, &knots));
    let h_max = 100.0 * h;
    let h_min = 1e-14 * h;
    let mut history = vec![value];
    let mut iterations = 0;
    let m = knots.len();
    while iterations < iters && h > h_min {
        iterations += 1;
        let mut moved = knots.clone();
        for i in 1..m - 1 {
            let tangent = &knots[i + 1] - &knots[i - 1];
            let tn = tangent.norm();
            let g = field.gradient(knots[i].as_slice());
            let normal_part = if tn > 0.0 {
                let t = tangent / tn;
                &g - &t * g.dot(&t)
            } else {
                g
            };
            let y = &knots[i] + normal_part * h;
            moved[i] = DVector::from_vec(domain.project(y.as_slice()));
        }
        let moved = reparametrize(&moved);
        let (v, _) = path_min(field, &moved);
        if v >= value {
            let change = moved
                .iter()
                .zip(&knots)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            knots = moved;
            value = v;
            history.push(v);
            h = (1.5 * h).min(h_max);
            if change <= 1e-15 * domain.diameter() {
                break;
            }
        } else {
            h *= 0.5;
        }
    }
    let (value, lowest) = path_min(field, &knots);
    let hi = knots
        .iter()
        .map(|k| field.value(k.as_slice()))
        .fold(f64::NEG_INFINITY, f64::max);
    let degenerate = hi - value <= 1e-12 * (1.0 + value.abs());
    Ok(MinimaxPath {
        knots: knots.iter().map(|k| k.as_slice().to_vec()).collect(),
        value,
        lowest: lowest.as_slice().to_vec(),
        history,
        iterations,
        degenerate,
    })
}

/// Straight initial path with `n_knots` movable knots.
pub fn straight_path(p1: &[f64], p2: &[f64], n_knots: usize) -> Vec<Vec<f64>> {
    (0..n_knots + 2)
        .map(|k| {
            let w = k as f64 / (n_knots + 1) as f64;
            p1.iter().zip(p2).map(|(a, b)| a + w * (b - a)).collect()
        })
        .collect()
}

/// [`minimax_from`] starting from the straight segment.
pub fn minimax_over_paths(
    field: &Field,
    domain: &Domain,
    p1: &[f64],
    p2: &[f64],
    n_knots: usize,
    iters: usize,
    step: Option<f64>,
) -> Result<MinimaxPath, PassError> {
    minimax_from(field, domain, &straight_path(p1, p2, n_knots.max(1)), iters, step)
}

/// Initial paths: the straight segment and, in the plane, two bent ones.
fn initial_paths(domain: &Domain, p1: &[f64], p2: &[f64], n_knots: usize) -> Vec<Vec<Vec<f64>>> {
    let mut paths = vec![straight_path(p1, p2, n_knots)];
    if p1.len() == 2 {
        let d = [p2[0] - p1[0], p2[1] - p1[1]];
        for side in [1.0, -1.0] {
            let mid = [
                0.5 * (p1[0] + p2[0]) - side * 0.25 * d[1],
                0.5 * (p1[1] + p2[1]) + side * 0.25 * d[0],
            ];
            let mid = domain.project(&mid);
            let bent = [
                DVector::from_column_slice(p1),
                DVector::from_column_slice(&mid),
                DVector::from_column_slice(p2),
            ];
            let fine: Vec<DVector<f64>> = straight_path(&[0.0], &[1.0], n_knots)
                .iter()
                .map(|w| {
                    let w = w[0];
                    if w <= 0.5 {
                        &bent[0] + (&bent[1] - &bent[0]) * (2.0 * w)
                    } else {
                        &bent[1] + (&bent[2] - &bent[1]) * (2.0 * w - 1.0)
                    }
                })
                .collect();
            paths.push(reparametrize(&fine).iter().map(|k| k.as_slice().to_vec()).collect());
        }
    }
    paths
}

/// Move `p` onto a nearby local maximum and confirm it with a probe ring.
fn settle_on_maximum(field: &Field, domain: &Domain, p: &[f64], which: &str) -> Result<Vec<f64>, PassError> {
    let diam = domain.diameter();
    let q = match refine_newton(field, p, 1e-12, 100) {
        Ok(r) if dist(&r.point, p) <= 0.05 * diam && domain.contains(&r.point, 0.0) => r.point,
        _ => p.to_vec(),
    };
    let fq = field.value(&q);
    let rho = 1e-3 * diam;
    let dirs: Vec<Vec<f64>> = match q.len() {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..32)
            .map(|k| {
                let (s, c) = (TAU * k as f64 / 32.0).sin_cos();
                vec![c, s]
            })
            .collect(),
        _ => crate::domain::fibonacci_sphere(64).iter().map(|u| u.to_vec()).collect(),
    };
    for u in dirs {
        let x: Vec<f64> = q.iter().zip(&u).map(|(a, b)| a + rho * b).collect();
        if domain.contains(&x, 0.0) && field.value(&x) >= fq {
            return Err(PassError::Precondition(format!(
                "{which} = {p:?} is not a strict local maximum"
            )));
        }
    }
    Ok(q)
}

/// Refine a boundary point to a zero of the tangential gradient, moving downhill along the boundary.
fn settle_on_boundary(field: &Field, domain: &Domain, start: &[f64], tol: f64) -> (Vec<f64>, f64) {
    match domain.dim() {
        1 => (domain.snap_to_boundary(start), 0.0),
        2 => {
            let tangential = |u: f64| {
                let fr = domain.loop_frame(u);
                let g = field.gradient(&fr.point);
                g[0] * fr.tangent[0] + g[1] * fr.tangent[1]
            };
            let u0 = domain.loop_param(&domain.snap_to_boundary(start));
            let period = domain.loop_period();
            let t0 = tangential(u0);
            if t0 == 0.0 {
                return (domain.loop_frame(u0).point, 0.0);
            }
            // Downhill along the loop until the tangential derivative changes sign.
            let dir = if t0 > 0.0 { -1.0 } else { 1.0 };
            let mut delta = 1e-6 * period;
            let mut prev = u0;
            let mut bracket = None;
            while delta < 0.5 * period {
                let u = u0 + dir * delta;
                if (tangential(u) > 0.0) != (t0 > 0.0) {
                    bracket = Some((prev, u));
                    break;
                }
                prev = u;
                delta *= 1.5;
            }
            let Some((mut a, mut b)) = bracket else {
                let p = domain.loop_frame(u0).point;
                return (p, t0.abs());
            };
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if (tangential(mid) > 0.0) == (t0 > 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let u = 0.5 * (a + b);
            (domain.loop_frame(u).point, tangential(u).abs())
        }
        _ => {
            let tangential = |p: &[f64]| -> Vec<f64> {
                let g = field.gradient(p);
                let n = domain.outward_normal(p);
                let gn = dot(g.as_slice(), &n);
                g.iter().zip(&n).map(|(a, b)| a - gn * b).collect()
            };
            let mut p = domain.snap_to_boundary(start);
            let mut alpha = 1e-3 * domain.diameter();
            for _ in 0..5000 {
                let t = tangential(&p);
                let tn = norm(&t);
                if tn <= 0.1 * tol {
                    break;
                }
                let fp = field.value(&p);
                let trial: Vec<f64> = p.iter().zip(&t).map(|(a, b)| a - alpha * b / tn).collect();
                let q = domain.snap_to_boundary(&trial);
                if field.value(&q) < fp {
                    p = q;
                    alpha *= 1.5;
                } else {
                    alpha *= 0.5;
                    if alpha < 1e-16 {
                        break;
                    }
                }
            }
            let r = norm(&tangential(&p));
            (p, r)
        }
    }
}

/// Locate the mountain pass point between two strict local maxima.
pub fn mountain_pass_point(
    field: &Field,
    domain: &Domain,
    p1: &[f64],
    p2: &[f64],
    opts: &PassOptions,
) -> Result<PassResult, PassError> {
    if !domain.is_convex() {
        return Err(PassError::Convexity);
    }
    for (p, which) in [(p1, "p1"), (p2, "p2")] {
        if !domain.contains(p, 1e-9) {
            return Err(PassError::Precondition(format!("{which} = {p:?} lies outside the domain")));
        }
    }
    let a = settle_on_maximum(field, domain, p1, "p1")?;
    let b = settle_on_maximum(field, domain, p2, "p2")?;
    if dist(&a, &b) <= 1e-6 * domain.diameter() {
        return Err(PassError::Precondition("p1 and p2 are the same maximum".into()));
    }
    let (p1, p2) = if field.value(&a) <= field.value(&b) { (a, b) } else { (b, a) };
    let f1 = field.value(&p1);

    let mut best: Option<MinimaxPath> = None;
    for init in initial_paths(domain, &p1, &p2, opts.n_knots.max(1)) {
        let cand = minimax_from(field, domain, &init, opts.iters, opts.step)?;
        let better = match &best {
            None => true,
            Some(b) => {
                cand.value > b.value
                    || (cand.value == b.value
                        && lex_cmp(&cand.lowest, &b.lowest).is_lt())
            }
        };
        if better {
            best = Some(cand);
        }
    }
    let path = best.expect("at least one initial path");
    if path.value >= f1 - opts.path_tol {
        return Err(PassError::NoSeparation);
    }
    let low = &path.lowest;
    let seg = dist(&path.knots[0], &path.knots[1]).max(
        path.knots
            .windows(2)
            .map(|w| dist(&w[0], &w[1]))
            .fold(0.0, f64::max),
    );
    let diam = domain.diameter();
    let on_boundary = domain.distance_to_boundary(low) <= 1e-9 * diam.max(1.0);

    let interior = if on_boundary {
        None
    } else {
        refine_newton(field, low, 0.01 * opts.pass_tol, 200)
            .ok()
            .filter(|r| {
                dist(&r.point, low) <= 2.0 * seg + 1e-3 * diam
                    && domain.signed_distance_inside(&r.point) > 0.0
                    && field.value(&r.point) < f1 - opts.path_tol
            })
            .map(|r| (r.point, r.grad_norm))
    };
    let (p3, kind, certificate) = match interior {
        Some((p, gn)) => (p, PassKind::InteriorCritical, Certificate::GradNorm(gn)),
        None => {
            let (p, r) = settle_on_boundary(field, domain, low, opts.pass_tol);
            (p, PassKind::BoundaryTangency, Certificate::BoundaryAlignment(r))
        }
    };
    if certificate.residual() > opts.pass_tol {
        return Err(PassError::NotConverged {
            residual: certificate.residual(),
        });
    }
    let c = field.value(&p3);
    if c >= f1 - opts.path_tol {
        return Err(PassError::NoSeparation);
    }
    Ok(PassResult {
        p1,
        p2,
        c,
        kind,
        certificate,
        path_value: path.value,
        iterations: path.iterations,
        degenerate: path.degenerate,
        path: path.knots,
        p3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::gallery;

    fn disc() -> Domain {
        Domain::unit_ball(2)
    }

    #[test]
    fn symmetric_gaussians_meet_at_origin() {
        let f = gallery("two_gaussian", 1).unwrap();
        let r = mountain_pass_point(&f, &disc(), &[0.4, 0.0], &[-0.4, 0.0], &PassOptions::default()).unwrap();
        assert_eq!(r.kind, PassKind::InteriorCritical);
        assert!(norm(&r.p3) < 1e-6, "{:?}", r.p3);
        assert!(r.certificate.residual() <= 1e-6);
        assert!(r.c < field_min(&f, &r.p1, &r.p2));
    }

    fn field_min(f: &Field, a: &[f64], b: &[f64]) -> f64 {
        f.value(a).min(f.value(b))
    }

    #[test]
    fn boundary_gaussians_touch_the_circle() {
        let f = gallery("two_gaussian_boundary", 1).unwrap();
        let r = mountain_pass_point(&f, &disc(), &[0.7, 0.5], &[0.7, -0.5], &PassOptions::default()).unwrap();
        assert_eq!(r.kind, PassKind::BoundaryTangency);
        assert!(dist(&r.p3, &[1.0, 0.0]) < 1e-6, "{:?}", r.p3);
        assert!((norm(&r.p3) - 1.0).abs() <= 1e-9);
        let g = f.gradient(&r.p3);
        assert!((g[0] * -r.p3[1] + g[1] * r.p3[0]).abs() <= 1e-6);
    }

    #[test]
    fn single_maximum_is_rejected() {
        let f = gallery("peak", 1).unwrap();
        assert!(matches!(
            mountain_pass_point(&f, &disc(), &[0.0, 0.0], &[0.5, 0.0], &PassOptions::default()),
            Err(PassError::Precondition(_))
        ));
    }

    #[test]
    fn path_value_is_monotone_and_improves() {
        let f = gallery("two_gaussian", 1).unwrap();
        let p = minimax_over_paths(&f, &disc(), &[0.4, 0.0], &[-0.4, 0.0], 8, 500, None).unwrap();
        assert!(p.history.windows(2).all(|w| w[1] >= w[0]));
        let bent = initial_paths(&disc(), &[0.4, 0.0], &[-0.4, 0.0], 8).remove(1);
        let q = minimax_from(&f, &disc(), &bent, 500, None).unwrap();
        assert!(q.history.last().unwrap() > &q.history[0]);
        assert!(q.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn constant_field_is_degenerate() {
        let f = crate::field::constant(2, 3.0);
        let p = minimax_over_paths(&f, &disc(), &[0.4, 0.0], &[-0.4, 0.0], 4, 50, None).unwrap();
        assert_eq!(p.value, 3.0);
        assert!(p.degenerate);
    }

    #[test]
    fn one_knot_agrees_with_many() {
        let f = gallery("two_gaussian", 1).unwrap();
        let run = |k| {
            let o = PassOptions {
                n_knots: k,
                ..PassOptions::default()
            };
            mountain_pass_point(&f, &disc(), &[0.4, 0.0], &[-0.4, 0.0], &o).unwrap()
        };
        let (a, b) = (run(1), run(16));
        assert!(dist(&a.p3, &b.p3) < 1e-3);
        let c = run(32);
        assert!((c.c - b.c).abs() < 1e-4);
    }

    #[test]
    fn reparametrize_spaces_evenly() {
        let k: Vec<DVector<f64>> = [[0.0, 0.0], [0.1, 0.0], [1.0, 0.0], [1.0, 1.0]]
            .iter()
            .map(|p| DVector::from_column_slice(p))
            .collect();
        let r = reparametrize(&k);
        assert!((&r[1] - DVector::from_column_slice(&[2.0 / 3.0, 0.0])).norm() < 1e-12);
        assert!((&r[2] - DVector::from_column_slice(&[1.0, 1.0 / 3.0])).norm() < 1e-12);
    }
}
