//! Locating, refining and auditing critical points.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::CritError;
use crate::field::Field;
use crate::linalg::{dist, lex_cmp, norm, spectral_norm, sym_eigenvalues};

/// Morse index of a critical point, when the Hessian is nonsingular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorseIndex {
    Index(usize),
    Degenerate,
}

/// Homological index of an isolated zero of the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomIndex {
    Index(i32),
    Unavailable,
}

impl HomIndex {
    pub fn value(self) -> Option<i32> {
        match self {
            HomIndex::Index(i) => Some(i),
            HomIndex::Unavailable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Max,
    Min,
    /// Saddle with the given number of prongs, known in the plane.
    Saddle { prongs: Option<u32> },
    Undulation,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    /// Hessian eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub morse_index: MorseIndex,
    pub hom_index: HomIndex,
    pub classification: Classification,
    /// Refined within the boundary margin; excluded from interior index sums.
    pub near_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    /// Grid cells per axis over the bounding box.
    pub grid_res: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Defaults to twice the cell diagonal.
    pub dedupe_radius: Option<f64>,
    /// Defaults to one cell.
    pub boundary_margin: Option<f64>,
    pub degeneracy_tol: f64,
    /// Compute homological indices and classifications.
    pub classify: bool,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            grid_res: 64,
            newton_tol: 1e-9,
            max_iter: 200,
            dedupe_radius: None,
            boundary_margin: None,
            degeneracy_tol: 1e-8,
            classify: true,
        }
    }
}

impl DetectOptions {
    pub fn with_grid(grid_res: usize) -> Self {
        DetectOptions {
            grid_res,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub points: Vec<CriticalPoint>,
    /// Centers of sign-change cells whose refinement failed.
    pub unresolved: Vec<Vec<f64>>,
    pub cell_size: f64,
    pub dedupe_radius: f64,
}

impl Detection {
    pub fn locations(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.location.clone()).collect()
    }

    pub fn interior(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(|p| !p.near_boundary)
    }
}

/// Uniform node grid over a domain's bounding box.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub lo: Vec<f64>,
    pub step: Vec<f64>,
    /// Nodes per axis.
    pub nodes: usize,
    pub dim: usize,
}

impl Grid {
    pub fn over(domain: &Domain, cells: usize) -> Grid {
        let (lo, hi) = domain.bounding_box();
        let step = lo.iter().zip(&hi).map(|(a, b)| (b - a) / cells as f64).collect();
        Grid {
            dim: lo.len(),
            lo,
            step,
            nodes: cells + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.pow(self.dim as u32)
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        for ci in c.iter_mut() {
            *ci = idx % self.nodes;
            idx /= self.nodes;
        }
        c
    }

    pub fn index(&self, c: &[usize]) -> usize {
        c.iter().rev().fold(0, |acc, &ci| acc * self.nodes + ci)
    }

    pub fn point_at(&self, c: &[f64]) -> Vec<f64> {
        c.iter()
            .zip(self.lo.iter().zip(&self.step))
            .map(|(k, (lo, h))| lo + k * h)
            .collect()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let c: Vec<f64> = self.coords(idx).into_iter().map(|k| k as f64).collect();
        self.point_at(&c)
    }

    pub fn cell_diag(&self) -> f64 {
        norm(&self.step)
    }

    pub fn cell_size(&self) -> f64 {
        self.step.iter().copied().fold(0.0, f64::max)
    }

    /// Grid neighbours in the `3^D - 1` stencil; returns false if any falls off the grid.
    pub fn neighbors(&self, idx: usize, out: &mut Vec<usize>) -> bool {
        out.clear();
        let c = self.coords(idx);
        let mut complete = true;
        let total = 3usize.pow(self.dim as u32);
        let mut nc = vec![0usize; self.dim];
        for code in 0..total {
            let mut k = code;
            let mut ok = true;
            let mut centre = true;
            for i in 0..self.dim {
                let off = (k % 3) as isize - 1;
                k /= 3;
                if off != 0 {
                    centre = false;
                }
                let v = c[i] as isize + off;
                if v < 0 || v >= self.nodes as isize {
                    ok = false;
                    break;
                }
                nc[i] = v as usize;
            }
            if centre {
                continue;
            }
            if ok {
                out.push(self.index(&nc));
            } else {
                complete = false;
            }
        }
        complete
    }
}

/// Result of a successful Newton refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct Refined {
    pub point: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Whether the damped fallback was used at least once.
    pub damped: bool,
}

/// Newton's method on the gradient, with a damped fallback near singular Hessians.
///
/// The fallback is Levenberg-Marquardt on `|grad f|^2`. Once `|grad f| <= tol` the
/// iteration keeps polishing while steps still reduce the gradient.
pub fn refine_newton(
    field: &Field,
    s0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Refined, CritError> {
    refine_with_cap(field, s0, tol, max_iter, f64::INFINITY)
}

pub(crate) fn refine_with_cap(
    field: &Field,
    s0: &[f64],
    tol: f64,
    max_iter: usize,
    max_step: f64,
) -> Result<Refined, CritError> {
    let d = s0.len();
    let mut x = DVector::from_column_slice(s0);
    let mut g = field.gradient(x.as_slice());
    let mut gn = g.norm();
    let mut mu = 0.0;
    let mut damped = false;
    let mut iterations = 0;
    let cap = |step: DVector<f64>| {
        let n = step.norm();
        if n > max_step {
            step * (max_step / n)
        } else {
            step
        }
    };
    while iterations < max_iter && gn > 0.0 && gn.is_finite() {
        iterations += 1;
        let h = field.hessian(x.as_slice());
        let hn = spectral_norm(&h);
        let mut next = None;
        let det = h.determinant();
        if hn > 0.0 && det.abs() >= 1e-10 * hn.powi(d as i32) {
            if let Some(lu) = h.clone().lu().solve(&(-&g)) {
                let step = cap(lu);
                let mut t = 1.0;
                for _ in 0..8 {
                    let xn = &x + &step * t;
                    let gnew = field.gradient(xn.as_slice());
                    if gnew.norm() < gn {
                        next = Some((xn, gnew));
                        break;
                    }
                    t *= 0.5;
                }
            }
        }
        if next.is_none() && hn > 0.0 {
            damped = true;
            let h2 = &h * &h;
            let hg = &h * &g;
            let floor = 1e-12 * hn * hn;
            if mu < floor {
                mu = 1e-3 * hn * hn;
            }
            for _ in 0..40 {
                let a = &h2 + DMatrix::identity(d, d) * mu;
                let Some(step) = a.lu().solve(&(-&hg)) else {
                    mu *= 10.0;
                    continue;
                };
                let xn = &x + cap(step);
                let gnew = field.gradient(xn.as_slice());
                if gnew.norm() < gn {
                    next = Some((xn, gnew));
                    mu = (mu / 10.0).max(floor);
                    break;
                }
                mu *= 10.0;
            }
        }
        let Some((xn, gnew)) = next else { break };
        let step = (&xn - &x).norm();
        x = xn;
        g = gnew;
        gn = g.norm();
        if gn <= tol && step <= 1e-14 * (1.0 + x.norm()) {
            break;
        }
    }
    if gn <= tol {
        Ok(Refined {
            point: x.as_slice().to_vec(),
            grad_norm: gn,
            iterations,
            damped,
        })
    } else {
        Err(CritError::NoConvergence {
            best: x.as_slice().to_vec(),
            best_grad_norm: gn,
        })
    }
}

/// Grid scan plus Newton refinement.
///
/// Seeds come from cells where every gradient component changes sign across the
/// corners, and from nodes where `|grad f|` is a local minimum. Refined points are
/// deduplicated, sorted lexicographically and, if requested, classified.
pub fn find_critical_points(
    field: &Field,
    domain: &Domain,
    opts: &DetectOptions,
) -> Result<Detection, CritError> {
    if opts.grid_res < 8 {
        return Err(CritError::GridTooCoarse(opts.grid_res));
    }
    let grid = Grid::over(domain, opts.grid_res);
    let d = grid.dim;
    let n = grid.len();
    let mut grads = Vec::with_capacity(n * d);
    let mut norms = Vec::with_capacity(n);
    let mut inside = Vec::with_capacity(n);
    for idx in 0..n {
        let p = grid.point(idx);
        let g = field.gradient(&p);
        norms.push(g.norm());
        grads.extend(g.iter().copied());
        inside.push(domain.contains(&p, 0.0));
    }

    let mut seeds: Vec<(Vec<f64>, bool)> = Vec::new();
    let corner_offsets: Vec<usize> = (0..1usize << d)
        .map(|bits| {
            let c: Vec<usize> = (0..d).map(|i| (bits >> i) & 1).collect();
            grid.index(&c)
        })
        .collect();
    let cells_per_axis = grid.nodes - 1;
    let mut cc = vec![0usize; d];
    for cell in 0..cells_per_axis.pow(d as u32) {
        let mut k = cell;
        for ci in cc.iter_mut() {
            *ci = k % cells_per_axis;
            k /= cells_per_axis;
        }
        let base = grid.index(&cc);
        if !corner_offsets.iter().any(|o| inside[base + o]) {
            continue;
        }
        let straddles = (0..d).all(|comp| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for o in &corner_offsets {
                let v = grads[(base + o) * d + comp];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            lo <= 0.0 && hi >= 0.0
        });
        if straddles {
            let centre: Vec<f64> = cc.iter().map(|&c| c as f64 + 0.5).collect();
            seeds.push((grid.point_at(&centre), true));
        }
    }
    let mut nb = Vec::new();
    for idx in 0..n {
        if !inside[idx] {
            continue;
        }
        grid.neighbors(idx, &mut nb);
        let gi = &grads[idx * d..idx * d + d];
        let mut is_min = true;
        let mut spread: f64 = 0.0;
        for &j in &nb {
            if norms[j] < norms[idx] {
                is_min = false;
                break;
            }
            let gj = &grads[j * d..j * d + d];
            spread = spread.max(dist(gi, gj));
        }
        if is_min && norms[idx] <= spread {
            seeds.push((grid.point(idx), false));
        }
    }

    let diag = grid.cell_diag();
    let max_step = 10.0 * diag;
    let mut accepted: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut failed: Vec<Vec<f64>> = Vec::new();
    for (seed, from_cell) in &seeds {
        match refine_with_cap(field, seed, opts.newton_tol, opts.max_iter, max_step) {
            Ok(r) if domain.contains(&r.point, 0.0) => accepted.push((r.point, r.grad_norm)),
            Ok(_) => {}
            Err(CritError::NoConvergence { best, .. }) => {
                if *from_cell && domain.contains(&best, 0.0) {
                    failed.push(seed.clone());
                }
            }
            Err(e) => return Err(e),
        }
    }

    let radius = opts.dedupe_radius.unwrap_or(2.0 * diag);
    let kept = dedupe(accepted, radius);
    let unresolved: Vec<Vec<f64>> = failed
        .into_iter()
        .filter(|s| kept.iter().all(|(p, _)| dist(p, s) > 2.0 * diag))
        .collect();

    let margin = opts.boundary_margin.unwrap_or(grid.cell_size());
    let mut points: Vec<CriticalPoint> = kept
        .into_iter()
        .map(|(loc, gn)| {
            let h = field.hessian(&loc);
            CriticalPoint {
                value: field.value(&loc),
                grad_norm: gn,
                eigenvalues: sym_eigenvalues(&h),
                morse_index: crate::morse::morse_index_of(field, &h, opts.degeneracy_tol),
                hom_index: HomIndex::Unavailable,
                classification: Classification::Unclassified,
                near_boundary: domain.signed_distance_inside(&loc) < margin,
                location: loc,
            }
        })
        .collect();
    points.sort_by(|a, b| lex_cmp(&a.location, &b.location));
    if opts.classify {
        crate::hom_index::classify_points(field, domain, &mut points);
    }
    Ok(Detection {
        points,
        unresolved,
        cell_size: grid.cell_size(),
        dedupe_radius: radius,
    })
}

/// Keep the most accurate point of every cluster closer than `radius`.
fn dedupe(mut pts: Vec<(Vec<f64>, f64)>, radius: f64) -> Vec<(Vec<f64>, f64)> {
    pts.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| lex_cmp(&a.0, &b.0)));
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / radius).floor() as i64).collect() };
    let mut buckets: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    for (p, gn) in pts {
        let k = key(&p);
        let d = k.len();
        let mut clash = false;
        'search: for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            let probe: Vec<i64> = k
                .iter()
                .map(|ki| {
                    let off = (c % 3) as i64 - 1;
                    c /= 3;
                    ki + off
                })
                .collect();
            if let Some(ids) = buckets.get(&probe) {
                for &i in ids {
                    if dist(&kept[i].0, &p) < radius {
                        clash = true;
                        break 'search;
                    }
                }
            }
        }
        if !clash {
            buckets.entry(k).or_default().push(kept.len());
            kept.push((p, gn));
        }
    }
    kept
}

/// Minimum pairwise distance; infinite for fewer than two points.
pub fn resolution(points: &[CriticalPoint]) -> f64 {
    let locs: Vec<&[f64]> = points.iter().map(|p| p.location.as_slice()).collect();
    resolution_of(&locs)
}

pub fn resolution_of(locs: &[&[f64]]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..locs.len() {
        for j in i + 1..locs.len() {
            best = best.min(dist(locs[i], locs[j]));
        }
    }
    best
}

/// Smallest gradient norm over boundary samples.
///
/// A positive value certifies numerically that no critical point sits on the boundary.
pub fn boundary_min_gradient(field: &Field, domain: &Domain, n_samples: usize) -> f64 {
    domain
        .boundary_samples(n_samples.max(16))
        .iter()
        .map(|s| field.gradient(&s.point).norm())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImproperCounts {
    pub n_improper_max: usize,
    pub n_improper_min: usize,
}

/// Count grid clusters of improper local maxima and minima.
///
/// A cluster is a connected set of equal-valued nodes, none of which has a larger
/// (resp. smaller) neighbour, containing at least one node whose full stencil lies
/// inside the domain. In the plane, isolated candidates are confirmed on rings of
/// radius h, h/2 and h/4 so that thin ascending wedges are not mistaken for maxima.
pub fn improper_extrema(field: &Field, domain: &Domain, grid_res: usize) -> ImproperCounts {
    let grid = Grid::over(domain, grid_res.max(2));
    let n = grid.len();
    let mut vals = Vec::with_capacity(n);
    let mut inside = Vec::with_capacity(n);
    for idx in 0..n {
        let p = grid.point(idx);
        inside.push(domain.contains(&p, 0.0));
        vals.push(field.value(&p));
    }
    let n_improper_max = count_extremal_clusters(field, &grid, &vals, &inside, true);
    let n_improper_min = count_extremal_clusters(field, &grid, &vals, &inside, false);
    ImproperCounts {
        n_improper_max,
        n_improper_min,
    }
}

fn count_extremal_clusters(
    field: &Field,
    grid: &Grid,
    vals: &[f64],
    inside: &[bool],
    maxima: bool,
) -> usize {
    let n = vals.len();
    let better = |a: f64, b: f64| if maxima { a > b } else { a < b };
    let mut nb = Vec::new();
    let mut candidate = vec![false; n];
    let mut interior = vec![false; n];
    for idx in 0..n {
        if !inside[idx] {
            continue;
        }
        let complete = grid.neighbors(idx, &mut nb);
        let mut ok = true;
        let mut all_inside = complete;
        for &j in &nb {
            if !inside[j] {
                all_inside = false;
                continue;
            }
            if better(vals[j], vals[idx]) {
                ok = false;
                break;
            }
        }
        candidate[idx] = ok;
        interior[idx] = all_inside;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut spoiled = vec![false; n];
    for idx in 0..n {
        if !candidate[idx] {
            continue;
        }
        grid.neighbors(idx, &mut nb);
        for &j in &nb {
            if inside[j] && vals[j] == vals[idx] {
                if candidate[j] {
                    let (a, b) = (find(&mut parent, idx), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                } else {
                    spoiled[idx] = true;
                }
            }
        }
    }
    let mut comps: BTreeMap<usize, (bool, bool, usize, usize)> = BTreeMap::new();
    for idx in 0..n {
        if !candidate[idx] {
            continue;
        }
        let r = find(&mut parent, idx);
        let e = comps.entry(r).or_insert((false, false, 0, idx));
        e.0 |= spoiled[idx];
        e.1 |= interior[idx];
        e.2 += 1;
    }
    comps
        .values()
        .filter(|(spoiled, interior, size, rep)| {
            if *spoiled || !*interior {
                return false;
            }
            if grid.dim == 2 && *size == 1 {
                return survives_rings(field, grid, *rep, vals[*rep], maxima);
            }
            true
        })
        .count()
}

/// Confirm a single-node candidate off the grid.
///
/// A compass search from the node must settle within one cell of it, and rings of
/// radius h, h/2 and h/4 around the settled point must not beat its value.
fn survives_rings(field: &Field, grid: &Grid, idx: usize, v: f64, maxima: bool) -> bool {
    let beats = |w: f64, v: f64| if maxima { w > v } else { w < v };
    let p = grid.point(idx);
    let h = grid.cell_size();
    let (mut q, mut best) = ([p[0], p[1]], v);
    let mut step = h / 2.0;
    const DIRS: [[f64; 2]; 8] = [
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [core::f64::consts::FRAC_1_SQRT_2, core::f64::consts::FRAC_1_SQRT_2],
        [-core::f64::consts::FRAC_1_SQRT_2, core::f64::consts::FRAC_1_SQRT_2],
        [core::f64::consts::FRAC_1_SQRT_2, -core::f64::consts::FRAC_1_SQRT_2],
        [-core::f64::consts::FRAC_1_SQRT_2, -core::f64::consts::FRAC_1_SQRT_2],
    ];
    for _ in 0..10_000 {
        if step < 1e-6 * h {
            break;
        }
        let mut moved = false;
        for d in DIRS {
            let c = [q[0] + step * d[0], q[1] + step * d[1]];
            let w = field.value(&c);
            if beats(w, best) {
                q = c;
                best = w;
                moved = true;
                break;
            }
        }
        if !moved {
            step /= 2.0;
        }
        if (q[0] - p[0]).hypot(q[1] - p[1]) > h {
            return false;
        }
    }
    const ANGLES: usize = 2048;
    for r in [h, h / 2.0, h / 4.0] {
        for k in 0..ANGLES {
            let (s, c) = (core::f64::consts::TAU * k as f64 / ANGLES as f64).sin_cos();
            if beats(field.value(&[q[0] + r * c, q[1] + r * s]), best) {
                return false;
            }
        }
    }
    true
}
