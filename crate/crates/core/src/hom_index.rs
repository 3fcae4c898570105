//! Homological (degree) index of gradient zeros, boundary index and the Poincare-Hopf audit.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
use core::ops::{Add, AddAssign, Neg};

use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::critpoint::{find_critical_points, Classification, CriticalPoint, DetectOptions, HomIndex, MorseIndex};
use crate::domain::Domain;
use crate::error::{Error, IndexError};
use crate::field::Field;
use crate::linalg::{dist, dot, norm, spectral_norm, sym_eigenvalues};

/// An exact multiple of one half, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);

    pub fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub fn from_halves(halves: i64) -> Self {
        HalfInt(halves)
    }

    pub fn halves(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl AddAssign for HalfInt {
    fn add_assign(&mut self, rhs: HalfInt) {
        self.0 += rhs.0;
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl core::iter::Sum for HalfInt {
    fn sum<I: Iterator<Item = HalfInt>>(iter: I) -> HalfInt {
        iter.fold(HalfInt::ZERO, Add::add)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        let halves = (2.0 * v).round();
        if (2.0 * v - halves).abs() > 1e-9 {
            return Err(serde::de::Error::custom("value is not a multiple of 1/2"));
        }
        Ok(HalfInt(halves as i64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    Interior,
    Boundary,
}

/// One contribution to the total index: an interior zero (weight 1) or a
/// boundary zero of the tangential field (weight +-1/2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedPoint {
    pub location: Vec<f64>,
    pub kind: ZeroKind,
    pub index: i32,
    pub weight: HalfInt,
    pub contribution: HalfInt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryIndex {
    pub value: HalfInt,
    pub per_point: Vec<IndexedPoint>,
    /// Linear term added to the field to make the tangential zeros isolated.
    pub perturbation: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub per_point: Vec<IndexedPoint>,
    pub interior: i64,
    pub boundary: HalfInt,
    pub total: HalfInt,
    pub target: HalfInt,
    pub pass: bool,
    pub perturbation: Option<Vec<f64>>,
}

/// Winding number of the planar curve `t -> g(t)`, `t` in `[0, 2pi)`.
///
/// Consecutive angle steps of a quarter turn or more are bisected. Returns the
/// rounded winding number and the smallest `|g|` seen.
fn winding_of(g: &dyn Fn(f64) -> [f64; 2], n_samples: usize) -> Result<(i32, f64, f64), IndexError> {
    let n = n_samples.max(8);
    let mut min_norm = f64::INFINITY;
    let mut eval = |t: f64| {
        let v = g(t);
        min_norm = min_norm.min(v[0].hypot(v[1]));
        v
    };
    let mut total = 0.0;
    let t0 = 0.0;
    let first = eval(t0);
    let mut prev = first;
    for k in 1..=n {
        let t_hi = TAU * k as f64 / n as f64;
        let t_lo = TAU * (k - 1) as f64 / n as f64;
        let cur = if k == n { first } else { eval(t_hi) };
        total += subdivided_turn(&mut eval, t_lo, t_hi, prev, cur, 0);
        prev = cur;
    }
    let w = total / TAU;
    let r = w.round();
    Ok((r as i32, (w - r).abs(), min_norm))
}

fn angle_step(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dotp = a[0] * b[0] + a[1] * b[1];
    cross.atan2(dotp)
}

fn subdivided_turn(
    eval: &mut dyn FnMut(f64) -> [f64; 2],
    t_lo: f64,
    t_hi: f64,
    a: [f64; 2],
    b: [f64; 2],
    depth: u32,
) -> f64 {
    let step = angle_step(a, b);
    if step.abs() < PI / 2.0 || depth >= 40 {
        return step;
    }
    let tm = 0.5 * (t_lo + t_hi);
    let m = eval(tm);
    subdivided_turn(eval, t_lo, tm, a, m, depth + 1) + subdivided_turn(eval, tm, t_hi, m, b, depth + 1)
}

/// Winding number of the gradient around the circle of radius `eps` about `z`.
pub fn winding_index_2d(field: &Field, z: &[f64], eps: f64, n_samples: usize) -> Result<i32, IndexError> {
    assert_eq!(z.len(), 2, "winding index needs a planar field");
    let g = |t: f64| {
        let (s, c) = t.sin_cos();
        let v = field.gradient(&[z[0] + eps * c, z[1] + eps * s]);
        [v[0], v[1]]
    };
    let (w, residual, min_grad) = winding_of(&g, n_samples)?;
    if min_grad < 10.0 * field.gradient_noise_floor() {
        return Err(IndexError::NonIsolated { min_grad });
    }
    if residual >= 0.1 {
        return Err(IndexError::UnderSampled {
            residual,
            suggested: 4 * n_samples,
        });
    }
    Ok(w)
}

/// `(-1)^(number of negative Hessian eigenvalues)` at a nondegenerate zero.
pub fn sign_index_nondegenerate(field: &Field, z: &[f64], degeneracy_tol: f64) -> Result<i32, IndexError> {
    let h = field.hessian(z);
    let eig = sym_eigenvalues(&h);
    let min_abs = eig.iter().fold(f64::INFINITY, |a, l| a.min(l.abs()));
    let threshold = (degeneracy_tol * spectral_norm(&h).max(1.0)).max(10.0 * field.hessian_noise_floor());
    if min_abs <= threshold {
        return Err(IndexError::Degenerate { min_abs_eig: min_abs });
    }
    let neg = eig.iter().filter(|l| **l < 0.0).count();
    Ok(if neg % 2 == 0 { 1 } else { -1 })
}

const WINDING_SAMPLES: usize = 256;
const MIN_PROBE_GRADIENT: f64 = 1e-6;
const DEGENERACY_TOL: f64 = 1e-8;

/// Starting probe radius: a quarter of the distance to the nearest other zero or the boundary.
fn initial_radius(z: &[f64], domain: &Domain, others: &[&[f64]]) -> f64 {
    let diam = domain.diameter();
    let mut r = diam;
    let b = domain.signed_distance_inside(z);
    if b > 1e-9 * diam {
        r = r.min(b);
    }
    for o in others {
        let d = dist(z, o);
        if d > 0.0 {
            r = r.min(d);
        }
    }
    0.25 * r
}

fn sign(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Homological index of the isolated gradient zero `z`, with the probe radius used.
fn index_with_radius(field: &Field, z: &[f64], domain: &Domain, others: &[&[f64]]) -> Result<(i32, f64), IndexError> {
    let mut eps = initial_radius(z, domain, others);
    match z.len() {
        1 => {
            let floor = 10.0 * field.gradient_noise_floor();
            let mut min_grad = 0.0;
            for _ in 0..=6 {
                let gp = field.gradient(&[z[0] + eps])[0];
                let gm = field.gradient(&[z[0] - eps])[0];
                min_grad = gp.abs().min(gm.abs());
                if min_grad >= floor {
                    return Ok(((sign(gp) - sign(gm)) / 2, eps));
                }
                eps /= 2.0;
            }
            Err(IndexError::NonIsolated { min_grad })
        }
        2 => {
            let mut last_err = IndexError::NonIsolated { min_grad: 0.0 };
            let mut previous: Option<i32> = None;
            for _ in 0..=6 {
                let min_grad = circle_min_gradient(field, z, eps, WINDING_SAMPLES);
                if min_grad < MIN_PROBE_GRADIENT {
                    last_err = IndexError::NonIsolated { min_grad };
                    previous = None;
                    eps /= 2.0;
                    continue;
                }
                match winding_index_2d(field, z, eps, WINDING_SAMPLES) {
                    Ok(w) => {
                        if previous == Some(w) {
                            return Ok((w, 2.0 * eps));
                        }
                        previous = Some(w);
                    }
                    Err(e) => {
                        last_err = e;
                        previous = None;
                    }
                }
                eps /= 2.0;
            }
            match previous {
                Some(w) => Ok((w, 2.0 * eps)),
                None => Err(last_err),
            }
        }
        _ => match sign_index_nondegenerate(field, z, DEGENERACY_TOL) {
            Ok(s) => Ok((s, eps)),
            Err(IndexError::Degenerate { min_abs_eig }) => Err(IndexError::Unsupported(format!(
                "degenerate zero in dimension {} (min |eigenvalue| = {min_abs_eig:.3e})",
                z.len()
            ))),
            Err(e) => Err(e),
        },
    }
}

fn circle_min_gradient(field: &Field, z: &[f64], eps: f64, n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let (s, c) = (TAU * k as f64 / n as f64).sin_cos();
            field.gradient(&[z[0] + eps * c, z[1] + eps * s]).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Homological index of an isolated interior zero of the gradient.
///
/// In the plane this is the winding number on a circle small enough that halving
/// it gives the same answer; on the line it is the sign change of `f'`; in higher
/// dimensions only nondegenerate zeros are supported.
pub fn homological_index(field: &Field, z: &[f64], domain: &Domain) -> Result<i32, IndexError> {
    index_with_radius(field, z, domain, &[]).map(|(i, _)| i)
}

/// As [`homological_index`], keeping the probe circle clear of the other zeros.
pub fn homological_index_among(
    field: &Field,
    z: &[f64],
    domain: &Domain,
    others: &[&[f64]],
) -> Result<i32, IndexError> {
    index_with_radius(field, z, domain, others).map(|(i, _)| i)
}

/// Sign of `f - f(z)` on a probe sphere: `Some(1)` if all positive, `Some(-1)` if all negative.
fn probe_sign(field: &Field, z: &[f64], radius: f64) -> Option<i32> {
    let fz = field.value(z);
    let offsets: Vec<Vec<f64>> = match z.len() {
        1 => vec![vec![radius], vec![-radius]],
        2 => (0..64)
            .map(|k| {
                let (s, c) = (TAU * k as f64 / 64.0).sin_cos();
                vec![radius * c, radius * s]
            })
            .collect(),
        _ => crate::domain::fibonacci_sphere(128)
            .iter()
            .map(|u| u.iter().map(|x| x * radius).collect())
            .collect(),
    };
    let mut pos = true;
    let mut neg = true;
    for o in &offsets {
        let x: Vec<f64> = z.iter().zip(o).map(|(a, b)| a + b).collect();
        let d = field.value(&x) - fz;
        pos &= d > 0.0;
        neg &= d < 0.0;
    }
    match (pos, neg) {
        (true, _) => Some(1),
        (_, true) => Some(-1),
        _ => None,
    }
}

fn classification_from(field: &Field, z: &[f64], index: i32, morse: MorseIndex, probe_radius: f64) -> Classification {
    let d = z.len();
    let by_probe = || match probe_sign(field, z, probe_radius) {
        Some(1) => Classification::Min,
        Some(_) => Classification::Max,
        None => Classification::Unclassified,
    };
    match d {
        1 => match index {
            1 => Classification::Min,
            -1 => Classification::Max,
            _ => Classification::Undulation,
        },
        2 => match index {
            1 => by_probe(),
            0 => Classification::Undulation,
            i if i < 0 => Classification::Saddle {
                prongs: Some((1 - i) as u32),
            },
            _ => Classification::Unclassified,
        },
        _ => match morse {
            MorseIndex::Index(0) => Classification::Min,
            MorseIndex::Index(k) if k == d => Classification::Max,
            MorseIndex::Index(_) => Classification::Saddle { prongs: None },
            MorseIndex::Degenerate => by_probe(),
        },
    }
}

/// Classify the zero `z` from its index and, where needed, the sign of `f - f(z)` on a probe ring.
pub fn classify_by_index(
    field: &Field,
    z: &[f64],
    domain: &Domain,
    probe_radius: f64,
) -> Result<Classification, IndexError> {
    let morse = crate::morse::morse_classify(field, z, DEGENERACY_TOL);
    let index = match index_with_radius(field, z, domain, &[]) {
        Ok((i, _)) => i,
        Err(IndexError::Unsupported(_)) if z.len() >= 3 => 0,
        Err(e) => return Err(e),
    };
    Ok(classification_from(field, z, index, morse, probe_radius))
}

/// Fill in the homological index and classification of detected points.
pub(crate) fn classify_points(field: &Field, domain: &Domain, points: &mut [CriticalPoint]) {
    let locs: Vec<Vec<f64>> = points.iter().map(|p| p.location.clone()).collect();
    for (i, p) in points.iter_mut().enumerate() {
        let others: Vec<&[f64]> = locs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, l)| l.as_slice())
            .collect();
        match index_with_radius(field, &p.location, domain, &others) {
            Ok((index, eps)) => {
                p.hom_index = HomIndex::Index(index);
                p.classification = classification_from(field, &p.location, index, p.morse_index, eps);
            }
            Err(_) => {
                p.hom_index = HomIndex::Unavailable;
                if p.location.len() >= 3 {
                    let eps = initial_radius(&p.location, domain, &others);
                    p.classification = classification_from(field, &p.location, 0, p.morse_index, eps);
                }
            }
        }
    }
}

const BOUNDARY_SAMPLES: usize = 1024;

fn boundary_weight(normal_component: f64, scale: f64, location: &[f64]) -> Result<HalfInt, IndexError> {
    if normal_component.abs() <= 1e-9 * scale {
        return Err(IndexError::BoundaryCritical {
            location: location.to_vec(),
        });
    }
    Ok(if normal_component < 0.0 { HalfInt::HALF } else { -HalfInt::HALF })
}

fn boundary_point(location: Vec<f64>, index: i32, weight: HalfInt) -> IndexedPoint {
    IndexedPoint {
        location,
        kind: ZeroKind::Boundary,
        index,
        contribution: HalfInt::from_halves(index as i64 * weight.halves()),
        weight,
    }
}

fn boundary_index_1d(field: &Field, domain: &Domain) -> Result<Vec<IndexedPoint>, IndexError> {
    let ends = domain.boundary_samples(2);
    let scale = ends
        .iter()
        .map(|s| field.gradient(&s.point)[0].abs())
        .fold(0.0, f64::max);
    ends.into_iter()
        .map(|s| {
            let g = field.gradient(&s.point)[0];
            let w = boundary_weight(g * s.normal[0], scale.max(f64::MIN_POSITIVE), &s.point)?;
            Ok(boundary_point(s.point, 1, w))
        })
        .collect()
}

fn boundary_index_2d(field: &Field, domain: &Domain) -> Result<Vec<IndexedPoint>, IndexError> {
    let n = BOUNDARY_SAMPLES;
    let period = domain.loop_period();
    let param = |k: usize| period * (k as f64 + 0.5) / n as f64;
    let tangential = |u: f64| {
        let fr = domain.loop_frame(u);
        let g = field.gradient(&fr.point);
        g[0] * fr.tangent[0] + g[1] * fr.tangent[1]
    };
    let mut scale: f64 = 0.0;
    let vt: Vec<f64> = (0..n)
        .map(|k| {
            let fr = domain.loop_frame(param(k));
            let g = field.gradient(&fr.point);
            scale = scale.max(g.norm());
            g[0] * fr.tangent[0] + g[1] * fr.tangent[1]
        })
        .collect();
    if scale == 0.0 {
        return Err(IndexError::NonGeneric);
    }
    let small: Vec<bool> = vt.iter().map(|v| v.abs() <= 1e-9 * scale).collect();
    let mut run = 0usize;
    for k in 0..2 * n {
        if small[k % n] {
            run += 1;
            if run > 3 {
                return Err(IndexError::NonGeneric);
            }
        } else {
            run = 0;
        }
    }
    let mut out = Vec::new();
    for k in 0..n {
        let (a, b) = (vt[k], vt[(k + 1) % n]);
        let (pa, pb) = (a >= 0.0, b >= 0.0);
        if pa == pb {
            continue;
        }
        let index = if pb { 1 } else { -1 };
        let (mut lo, mut hi) = (param(k), param(k) + period / n as f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if (tangential(mid) >= 0.0) == pa {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = 0.5 * (lo + hi);
        let fr = domain.loop_frame(u);
        let g = field.gradient(&fr.point);
        let vn = g[0] * fr.normal[0] + g[1] * fr.normal[1];
        let w = boundary_weight(vn, scale, &fr.point)?;
        out.push(boundary_point(fr.point, index, w));
    }
    Ok(out)
}

/// Orthonormal tangent basis at a unit vector of the 2-sphere.
fn tangent_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&helper, &n);
    let mut e1 = [helper[0] - d * n[0], helper[1] - d * n[1], helper[2] - d * n[2]];
    let l = norm(&e1);
    e1.iter_mut().for_each(|x| *x /= l);
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    (e1, e2)
}

fn boundary_index_sphere(field: &Field, center: &[f64], radius: f64) -> Result<Vec<IndexedPoint>, IndexError> {
    const LAT: usize = 64;
    const LON: usize = 128;
    let dir = |i: f64, j: f64| -> [f64; 3] {
        let th = PI * (i + 0.5) / LAT as f64;
        let ph = TAU * j / LON as f64;
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        [st * cp, st * sp, ct]
    };
    let at = |n: &[f64; 3]| -> Vec<f64> { (0..3).map(|k| center[k] + radius * n[k]).collect() };
    let tangential = |n: &[f64; 3]| -> (DVector<f64>, f64) {
        let g = field.gradient(&at(n));
        let gn = g[0] * n[0] + g[1] * n[1] + g[2] * n[2];
        (&g - DVector::from_column_slice(n) * gn, gn)
    };
    let mut mag = vec![0.0; LAT * LON];
    let mut scale: f64 = 0.0;
    for i in 0..LAT {
        for j in 0..LON {
            let n = dir(i as f64, j as f64);
            let g = field.gradient(&at(&n));
            scale = scale.max(g.norm());
            mag[i * LON + j] = tangential(&n).0.norm();
        }
    }
    if scale == 0.0 || mag.iter().filter(|m| **m <= 1e-9 * scale).count() > 3 {
        return Err(IndexError::NonGeneric);
    }
    let mut roots: Vec<[f64; 3]> = Vec::new();
    for i in 0..LAT {
        for j in 0..LON {
            let m = mag[i * LON + j];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ii = i as i64 + di;
                    if ii < 0 || ii >= LAT as i64 {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(LON as i64) as usize;
                    if mag[ii as usize * LON + jj] < m {
                        is_min = false;
                    }
                }
            }
            if !is_min {
                continue;
            }
            if let Some(r) = refine_on_sphere(&tangential, dir(i as f64, j as f64), scale) {
                if roots.iter().all(|q| dist(q, &r) > 1e-6) {
                    roots.push(r);
                }
            }
        }
    }
    let mut out = Vec::new();
    for (k, r) in roots.iter().enumerate() {
        let sep = roots
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != k)
            .map(|(_, q)| dist(q, r))
            .fold(PI / LAT as f64, f64::min);
        let rho = 0.25 * sep;
        let (e1, e2) = tangent_basis(*r);
        let chart = |a: f64, b: f64| -> [f64; 3] {
            let v = [r[0] + a * e1[0] + b * e2[0], r[1] + a * e1[1] + b * e2[1], r[2] + a * e1[2] + b * e2[2]];
            let l = norm(&v);
            [v[0] / l, v[1] / l, v[2] / l]
        };
        let g = |t: f64| {
            let (s, c) = t.sin_cos();
            let (v, _) = tangential(&chart(rho * c, rho * s));
            [dot(v.as_slice(), &e1), dot(v.as_slice(), &e2)]
        };
        let (index, residual, min_norm) = winding_of(&g, WINDING_SAMPLES)?;
        if min_norm <= 1e-12 * scale {
            return Err(IndexError::NonGeneric);
        }
        if residual >= 0.1 {
            return Err(IndexError::UnderSampled {
                residual,
                suggested: 4 * WINDING_SAMPLES,
            });
        }
        let (_, gn) = tangential(r);
        let w = boundary_weight(gn, scale, &at(r))?;
        out.push(boundary_point(at(r), index, w));
    }
    let euler: i32 = out.iter().map(|p| p.index).sum();
    if euler != 2 {
        return Err(IndexError::NonGeneric);
    }
    Ok(out)
}

/// Tangential gradient and its norm at a sphere point.
type TangentialFn<'a> = &'a dyn Fn(&[f64; 3]) -> (DVector<f64>, f64);

/// Newton iteration for a zero of the tangential field in a tangent-plane chart.
fn refine_on_sphere(
    tangential: TangentialFn<'_>,
    start: [f64; 3],
    scale: f64,
) -> Option<[f64; 3]> {
    let mut n = start;
    for _ in 0..50 {
        let (e1, e2) = tangent_basis(n);
        let chart = |a: f64, b: f64| -> [f64; 3] {
            let v = [n[0] + a * e1[0] + b * e2[0], n[1] + a * e1[1] + b * e2[1], n[2] + a * e1[2] + b * e2[2]];
            let l = norm(&v);
            [v[0] / l, v[1] / l, v[2] / l]
        };
        let w = |a: f64, b: f64| {
            let (v, _) = tangential(&chart(a, b));
            nalgebra::Vector2::new(dot(v.as_slice(), &e1), dot(v.as_slice(), &e2))
        };
        let w0 = w(0.0, 0.0);
        if w0.norm() <= 1e-12 * scale {
            return Some(n);
        }
        let h = 1e-6;
        let ca = (w(h, 0.0) - w(-h, 0.0)) / (2.0 * h);
        let cb = (w(0.0, h) - w(0.0, -h)) / (2.0 * h);
        let jac = nalgebra::Matrix2::from_columns(&[ca, cb]);
        let step = jac.try_inverse()? * w0;
        if !step.iter().all(|x| x.is_finite()) || step.norm() > 0.5 {
            return None;
        }
        n = chart(-step[0], -step[1]);
        if step.norm() < 1e-14 {
            let (v, _) = tangential(&n);
            return (v.norm() <= 1e-8 * scale).then_some(n);
        }
    }
    let (v, _) = tangential(&n);
    (v.norm() <= 1e-8 * scale).then_some(n)
}

fn boundary_zeros(field: &Field, domain: &Domain) -> Result<Vec<IndexedPoint>, IndexError> {
    match (domain, domain.dim()) {
        (_, 1) => boundary_index_1d(field, domain),
        (_, 2) => boundary_index_2d(field, domain),
        (Domain::Ball { center, radius }, 3) => boundary_index_sphere(field, center, *radius),
        _ => Err(IndexError::Unsupported(format!(
            "boundary index on a {}-dimensional {}",
            domain.dim(),
            match domain {
                Domain::Box { .. } => "box",
                _ => "domain",
            }
        ))),
    }
}

/// Direction of the fixed-seed perturbation used to make boundary zeros isolated.
fn perturbation_direction(dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_1DE5);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let l = norm(&v);
        if l > 1e-3 {
            return v.into_iter().map(|x| x / l).collect();
        }
    }
}

/// Sum of the half-weighted indices of the tangential gradient's boundary zeros.
///
/// When the tangential zeros are not isolated (a radial gradient, say) the field
/// is tilted by a tiny fixed linear term and the computation retried; the term
/// used is reported.
pub fn boundary_index(field: &Field, domain: &Domain) -> Result<BoundaryIndex, IndexError> {
    match boundary_zeros(field, domain) {
        Ok(per_point) => Ok(BoundaryIndex {
            value: per_point.iter().map(|p| p.contribution).sum(),
            per_point,
            perturbation: None,
        }),
        Err(IndexError::NonGeneric) | Err(IndexError::BoundaryCritical { .. }) => {
            let scale = domain
                .boundary_samples(256)
                .iter()
                .map(|s| field.gradient(&s.point).norm())
                .fold(0.0, f64::max);
            let delta = 1e-6 * if scale > 0.0 { scale } else { 1.0 };
            let a: Vec<f64> = perturbation_direction(domain.dim()).into_iter().map(|x| x * delta).collect();
            let tilted = field.with_linear_term(&a);
            let per_point = boundary_zeros(&tilted, domain).map_err(|e| match e {
                IndexError::BoundaryCritical { .. } => IndexError::NonGeneric,
                e => e,
            })?;
            Ok(BoundaryIndex {
                value: per_point.iter().map(|p| p.contribution).sum(),
                per_point,
                perturbation: Some(a),
            })
        }
        Err(e) => Err(e),
    }
}

fn audit_grid(dim: usize) -> usize {
    match dim {
        1 => 1024,
        2 => 128,
        _ => 24,
    }
}

/// Interior plus boundary index, compared against the Poincare-Hopf target.
///
/// The target is the Euler characteristic of the domain in even dimensions and
/// zero in odd dimensions.
pub fn poincare_hopf_audit(field: &Field, domain: &Domain) -> Result<IndexResult, Error> {
    poincare_hopf_audit_with(field, domain, audit_grid(domain.dim()))
}

/// [`poincare_hopf_audit`] with an explicit interior search grid.
pub fn poincare_hopf_audit_with(field: &Field, domain: &Domain, grid_res: usize) -> Result<IndexResult, Error> {
    let boundary = boundary_index(field, domain)?;
    let work = match &boundary.perturbation {
        Some(a) => field.with_linear_term(a),
        None => field.clone(),
    };
    let opts = DetectOptions {
        classify: false,
        ..DetectOptions::with_grid(grid_res)
    };
    let found = find_critical_points(&work, domain, &opts)?;
    if !found.unresolved.is_empty() {
        return Err(IndexError::Unresolved {
            count: found.unresolved.len(),
        }
        .into());
    }
    let locs = found.locations();
    let mut per_point = Vec::new();
    let mut interior: i64 = 0;
    for (i, z) in locs.iter().enumerate() {
        let others: Vec<&[f64]> = locs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, l)| l.as_slice())
            .collect();
        let (index, _) = index_with_radius(&work, z, domain, &others).map_err(|e| IndexError::AtPoint {
            location: z.clone(),
            source: alloc::boxed::Box::new(e),
        })?;
        interior += index as i64;
        per_point.push(IndexedPoint {
            location: z.clone(),
            kind: ZeroKind::Interior,
            index,
            weight: HalfInt::from_int(1),
            contribution: HalfInt::from_int(index as i64),
        });
    }
    per_point.extend(boundary.per_point);
    let total = HalfInt::from_int(interior) + boundary.value;
    let target = if domain.dim().is_multiple_of(2) {
        HalfInt::from_int(domain.euler_char() as i64)
    } else {
        HalfInt::ZERO
    };
    Ok(IndexResult {
        per_point,
        interior,
        boundary: boundary.value,
        total,
        target,
        pass: total == target,
        perturbation: boundary.perturbation,
    })
}

/// Outcome of checking that a level set crosses a small sphere transversally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencyReport {
    pub transversal: bool,
    /// No intersection was found, so the check holds trivially.
    pub vacuous: bool,
    pub intersections: Vec<Vec<f64>>,
    /// Smallest angle, in radians, between the gradient and the radius at an intersection.
    pub min_angle: f64,
}

/// Default angular tolerance for [`tangency_check`].
pub const TANGENCY_ANGLE_TOL: f64 = 1e-3;

/// Check that `grad f` and `s - p` are never collinear where `{f = c}` meets the sphere of radius `delta`.
pub fn tangency_check(field: &Field, p: &[f64], c: f64, delta: f64, n_samples: usize) -> TangencyReport {
    tangency_check_with(field, p, c, delta, n_samples, TANGENCY_ANGLE_TOL)
}

pub fn tangency_check_with(
    field: &Field,
    p: &[f64],
    c: f64,
    delta: f64,
    n_samples: usize,
    angle_tol: f64,
) -> TangencyReport {
    assert!(delta > 0.0, "delta must be positive");
    let d = p.len();
    let n = n_samples.max(8);
    let embed = |u: &[f64]| -> Vec<f64> { p.iter().zip(u).map(|(a, b)| a + delta * b).collect() };
    let h = |u: &[f64]| field.value(&embed(u)) - c;
    let zero_tol = 1e-12 * (1.0 + c.abs());
    let mut hits: Vec<Vec<f64>> = Vec::new();
    let bisect = |ua: &[f64], ub: &[f64], ha: f64, hits: &mut Vec<Vec<f64>>, arc: &dyn Fn(f64) -> Vec<f64>| {
        if ha.abs() <= zero_tol {
            hits.push(embed(ua));
            return;
        }
        let hb = h(ub);
        if hb.abs() <= zero_tol || (ha > 0.0) == (hb > 0.0) {
            return;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if (h(&arc(mid)) > 0.0) == (ha > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hits.push(embed(&arc(0.5 * (lo + hi))));
    };
    match d {
        1 => {
            for u in [[1.0], [-1.0]] {
                if h(&u).abs() <= zero_tol {
                    hits.push(embed(&u));
                }
            }
        }
        2 => {
            let at = |t: f64| {
                let (s, co) = t.sin_cos();
                vec![co, s]
            };
            for k in 0..n {
                let (ta, tb) = (TAU * k as f64 / n as f64, TAU * (k + 1) as f64 / n as f64);
                let (ua, ub) = (at(ta), at(tb));
                let arc = |w: f64| at(ta + w * (tb - ta));
                bisect(&ua, &ub, h(&ua), &mut hits, &arc);
            }
        }
        3 => {
            let lat = (n / 2).max(4);
            let lon = n;
            let at = |th: f64, ph: f64| {
                let (st, ct) = th.sin_cos();
                let (sp, cp) = ph.sin_cos();
                vec![st * cp, st * sp, ct]
            };
            for i in 0..lat {
                let th = PI * (i as f64 + 0.5) / lat as f64;
                for j in 0..lon {
                    let ph = TAU * j as f64 / lon as f64;
                    let ua = at(th, ph);
                    let ph2 = TAU * (j + 1) as f64 / lon as f64;
                    let arc = |w: f64| at(th, ph + w * (ph2 - ph));
                    bisect(&ua, &at(th, ph2), h(&ua), &mut hits, &arc);
                    if i + 1 < lat {
                        let th2 = PI * (i as f64 + 1.5) / lat as f64;
                        let arc = |w: f64| at(th + w * (th2 - th), ph);
                        let hv = h(&ua);
                        if hv.abs() > zero_tol {
                            bisect(&ua, &at(th2, ph), hv, &mut hits, &arc);
                        }
                    }
                }
            }
        }
        _ => panic!("tangency check supports dimensions 1 to 3"),
    }
    let mut min_angle = PI / 2.0;
    for s in &hits {
        let g = field.gradient(s);
        let r: Vec<f64> = s.iter().zip(p).map(|(a, b)| a - b).collect();
        let gn = g.norm();
        let angle = if gn == 0.0 {
            0.0
        } else {
            let cos = (dot(g.as_slice(), &r) / (gn * norm(&r))).abs().min(1.0);
            cos.acos()
        };
        min_angle = min_angle.min(angle);
    }
    TangencyReport {
        transversal: min_angle > angle_tol,
        vacuous: hits.is_empty(),
        intersections: hits,
        min_angle,
    }
}

/// Human-readable summary line of an audit.
pub fn audit_summary(r: &IndexResult) -> alloc::string::String {
    let verdict = if r.pass { "pass" } else { "fail" };
    format!(
        "interior {} + boundary {} = {} (target {}): {}",
        r.interior,
        r.boundary,
        r.total,
        r.target,
        verdict
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{entry, gallery};
    use nalgebra::DMatrix;

    fn ball() -> Domain {
        Domain::unit_ball(2)
    }

    #[test]
    fn winding_examples() {
        let o = [0.0, 0.0];
        assert_eq!(winding_index_2d(&gallery("paraboloid", 1).unwrap(), &o, 0.5, 256).unwrap(), 1);
        assert_eq!(winding_index_2d(&gallery("saddle", 1).unwrap(), &o, 0.5, 256).unwrap(), -1);
        assert_eq!(winding_index_2d(&gallery("monkey", 1).unwrap(), &o, 0.5, 256).unwrap(), -2);
    }

    #[test]
    fn winding_rejects_vanishing_gradient() {
        let z = crate::field::constant(2, 1.0);
        assert!(matches!(
            winding_index_2d(&z, &[0.0, 0.0], 0.5, 64),
            Err(IndexError::NonIsolated { .. })
        ));
    }

    #[test]
    fn sign_index_examples() {
        let q = |d: &[f64]| {
            crate::field::quadratic(
                DMatrix::from_diagonal(&DVector::from_column_slice(d)),
                DVector::zeros(d.len()),
                0.0,
            )
        };
        assert_eq!(sign_index_nondegenerate(&q(&[2.0, 2.0, 2.0]), &[0.0; 3], 1e-8).unwrap(), 1);
        assert_eq!(sign_index_nondegenerate(&q(&[2.0, -2.0]), &[0.0; 2], 1e-8).unwrap(), -1);
        assert_eq!(sign_index_nondegenerate(&q(&[-2.0, -2.0, -2.0]), &[0.0; 3], 1e-8).unwrap(), -1);
        assert!(matches!(
            sign_index_nondegenerate(&q(&[2.0, 0.0]), &[0.0; 2], 1e-8),
            Err(IndexError::Degenerate { .. })
        ));
    }

    #[test]
    fn homological_index_examples() {
        let cube = Field::new(1, "cube", crate::field::Smoothness::C2, |s: &[f64]| s[0].powi(3));
        assert_eq!(homological_index(&cube, &[0.0], &Domain::interval(-1.0, 1.0)).unwrap(), 0);
        let und = gallery("undulation", 1).unwrap();
        assert_eq!(homological_index(&und, &[0.0, 0.0], &ball()).unwrap(), 0);
        assert_eq!(homological_index(&gallery("paraboloid", 1).unwrap(), &[0.0, 0.0], &ball()).unwrap(), 1);
    }

    #[test]
    fn classification_examples() {
        let o = [0.0, 0.0];
        let c = |name: &str| classify_by_index(&gallery(name, 1).unwrap(), &o, &ball(), 0.1).unwrap();
        assert_eq!(c("monkey"), Classification::Saddle { prongs: Some(3) });
        assert_eq!(c("paraboloid"), Classification::Min);
        assert_eq!(c("peak"), Classification::Max);
        assert_eq!(c("undulation"), Classification::Undulation);
    }

    #[test]
    fn interval_boundary() {
        let f = Field::new(1, "sq", crate::field::Smoothness::C2, |s: &[f64]| s[0] * s[0]);
        let b = boundary_index(&f, &Domain::interval(-1.0, 1.0)).unwrap();
        assert_eq!(b.value, HalfInt::from_int(-1));
        let r = poincare_hopf_audit(&f, &Domain::interval(-1.0, 1.0)).unwrap();
        assert_eq!(r.interior, 1);
        assert!(r.pass);
    }

    #[test]
    fn linear_field_on_disc() {
        let f = crate::field::linear(&[1.0, 0.0]);
        let b = boundary_index(&f, &ball()).unwrap();
        assert_eq!(b.value, HalfInt::from_int(1));
        assert!(b.perturbation.is_none());
        assert_eq!(b.per_point.len(), 2);
        for p in &b.per_point {
            if p.location[0] > 0.0 {
                assert_eq!((p.index, p.weight), (-1, -HalfInt::HALF));
            } else {
                assert_eq!((p.index, p.weight), (1, HalfInt::HALF));
            }
        }
        let r = poincare_hopf_audit(&f, &ball()).unwrap();
        assert_eq!((r.interior, r.total), (0, HalfInt::from_int(1)));
    }

    #[test]
    fn radial_field_is_perturbed() {
        let f = gallery("paraboloid", 1).unwrap();
        let b = boundary_index(&f, &ball()).unwrap();
        assert!(b.perturbation.is_some());
        assert_eq!(b.value, HalfInt::ZERO);
        let r = poincare_hopf_audit(&f, &ball()).unwrap();
        assert_eq!(r.interior, 1);
        assert!(r.pass);
    }

    #[test]
    fn monkey_audit() {
        let r = poincare_hopf_audit(&gallery("monkey", 1).unwrap(), &ball()).unwrap();
        assert_eq!(r.interior, -2);
        assert_eq!(r.boundary, HalfInt::from_int(3));
        assert!(r.pass);
    }

    #[test]
    fn sphere_audit() {
        let r = poincare_hopf_audit(&gallery("bowl3d", 1).unwrap(), &Domain::unit_ball(3)).unwrap();
        assert_eq!(r.interior, 1);
        assert_eq!(r.boundary, HalfInt::from_int(-1));
        assert_eq!(r.target, HalfInt::ZERO);
        assert!(r.pass);
    }

    #[test]
    fn box_audit() {
        let sq = Domain::cube(vec![-1.0, -1.0], vec![1.0, 1.0]);
        for name in ["saddle", "monkey", "linear", "peak"] {
            let r = poincare_hopf_audit(&gallery(name, 1).unwrap(), &sq).unwrap();
            assert!(r.pass, "{name}: {}", audit_summary(&r));
        }
    }

    #[test]
    fn gallery_bump_saddle_audit() {
        let e = entry("bump_saddle").unwrap();
        for n in [1, 2, 4] {
            let r = poincare_hopf_audit(&e.member(n), &e.domain).unwrap();
            assert!(r.pass, "n={n}: {}", audit_summary(&r));
        }
    }

    #[test]
    fn tangency_examples() {
        let o = [0.0, 0.0];
        let r = tangency_check(&gallery("paraboloid", 1).unwrap(), &o, 0.25, 0.5, 256);
        assert!(!r.transversal && !r.vacuous);
        let r = tangency_check(&gallery("saddle", 1).unwrap(), &o, 0.0, 0.5, 256);
        assert!(r.transversal);
        assert_eq!(r.intersections.len(), 4);
        assert!((r.min_angle - PI / 2.0).abs() < 1e-6);
        let r = tangency_check(&crate::field::linear(&[1.0, 0.0]), &o, 0.0, 0.5, 256);
        assert!(r.transversal);
        let r = tangency_check(&crate::field::linear(&[1.0, 0.0]), &o, 5.0, 0.5, 256);
        assert!(r.transversal && r.vacuous);
    }

    #[test]
    fn half_int_arithmetic() {
        let x = HalfInt::HALF + HalfInt::HALF + HalfInt::from_int(-2);
        assert_eq!(x, HalfInt::from_int(-1));
        assert_eq!(alloc::format!("{}", -HalfInt::HALF), "-1/2");
        assert_eq!(HalfInt::from_halves(3).to_f64(), 1.5);
    }
}
