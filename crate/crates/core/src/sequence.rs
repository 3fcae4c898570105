//! Convergence experiments on function families: C^k distances, counts and matchings.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::critpoint::{
    boundary_min_gradient, find_critical_points, improper_extrema, resolution, Classification, CriticalPoint,
    DetectOptions, HomIndex, MorseIndex,
};
use crate::domain::Domain;
use crate::error::CritError;
use crate::field::{Field, Smoothness};
use crate::gallery::GalleryEntry;
use crate::linalg::{dist, lex_cmp, spectral_norm};

/// Grid sup distances of values, gradients and Hessians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CkDistance {
    pub d0: f64,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
}

/// Sup over the grid nodes inside `domain` of `|f-g|`, `|grad f - grad g|` and `|H_f - H_g|`, up to order `k`.
pub fn ck_distance(f: &Field, g: &Field, domain: &Domain, k: u8, grid_res: usize) -> CkDistance {
    let grid = crate::critpoint::Grid::over(domain, grid_res.max(2));
    let (mut d0, mut d1, mut d2) = (0.0f64, 0.0f64, 0.0f64);
    for idx in 0..grid.len() {
        let p = grid.point(idx);
        if !domain.contains(&p, 0.0) {
            continue;
        }
        d0 = d0.max((f.value(&p) - g.value(&p)).abs());
        if k >= 1 {
            d1 = d1.max((f.gradient(&p) - g.gradient(&p)).norm());
        }
        if k >= 2 {
            d2 = d2.max(spectral_norm(&(f.hessian(&p) - g.hessian(&p))));
        }
    }
    CkDistance {
        d0,
        d1: (k >= 1).then_some(d1),
        d2: (k >= 2).then_some(d2),
    }
}

/// Critical point counts by classification and by index.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub n_critical: usize,
    pub n_max: usize,
    pub n_min: usize,
    pub n_saddle: usize,
    pub n_undulation: usize,
    pub n_unclassified: usize,
    /// Points per homological index.
    pub hom: BTreeMap<i32, usize>,
    pub hom_unavailable: usize,
    /// Points per Morse index; empty for fields that are not C^2.
    pub morse: BTreeMap<usize, usize>,
    pub morse_degenerate: usize,
    pub n_improper_max: usize,
    pub n_improper_min: usize,
}

impl Counts {
    pub fn from_points(points: &[CriticalPoint], morse_available: bool) -> Counts {
        let mut c = Counts {
            n_critical: points.len(),
            ..Counts::default()
        };
        for p in points {
            match p.classification {
                Classification::Max => c.n_max += 1,
                Classification::Min => c.n_min += 1,
                Classification::Saddle { .. } => c.n_saddle += 1,
                Classification::Undulation => c.n_undulation += 1,
                Classification::Unclassified => c.n_unclassified += 1,
            }
            match p.hom_index {
                HomIndex::Index(i) => *c.hom.entry(i).or_default() += 1,
                HomIndex::Unavailable => c.hom_unavailable += 1,
            }
            if morse_available {
                match p.morse_index {
                    MorseIndex::Index(i) => *c.morse.entry(i).or_default() += 1,
                    MorseIndex::Degenerate => c.morse_degenerate += 1,
                }
            }
        }
        c
    }

    /// `N_C = N_M + N_m + N_S + undulations + unclassified`.
    pub fn identity_holds(&self) -> bool {
        self.n_critical == self.n_max + self.n_min + self.n_saddle + self.n_undulation + self.n_unclassified
    }

    /// Equal maxima, minima, saddle and total counts.
    pub fn same_classes(&self, other: &Counts) -> bool {
        (self.n_critical, self.n_max, self.n_min, self.n_saddle)
            == (other.n_critical, other.n_max, other.n_min, other.n_saddle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub counts: Counts,
    pub points: Vec<CriticalPoint>,
    pub resolution: f64,
    /// Grid cells whose critical point could not be refined.
    pub unresolved: Vec<Vec<f64>>,
}

/// Detect, classify and count the critical points of `field`.
pub fn count_report(field: &Field, domain: &Domain, grid_res: usize) -> Result<CountReport, CritError> {
    let det = find_critical_points(field, domain, &DetectOptions::with_grid(grid_res))?;
    let mut counts = Counts::from_points(&det.points, field.smoothness() >= Smoothness::C2);
    let imp = improper_extrema(field, domain, grid_res);
    counts.n_improper_max = imp.n_improper_max;
    counts.n_improper_min = imp.n_improper_min;
    Ok(CountReport {
        resolution: resolution(&det.points),
        counts,
        points: det.points,
        unresolved: det.unresolved,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    /// Index into the family member's points.
    pub member: usize,
    /// Index into the limit's points.
    pub limit: usize,
    pub distance: f64,
    pub hom_agree: Option<bool>,
    pub morse_agree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub radius: f64,
    pub pairs: Vec<MatchPair>,
    pub unmatched_member: Vec<usize>,
    pub unmatched_limit: Vec<usize>,
    /// Several member points lie within the radius of one limit point.
    pub multi_match: bool,
    /// Limit points with two or more member points within the radius, and those member points.
    pub multi_witnesses: Vec<(usize, Vec<usize>)>,
    pub bijection: bool,
}

impl Matching {
    pub fn max_distance(&self) -> f64 {
        self.pairs.iter().map(|p| p.distance).fold(0.0, f64::max)
    }
}

/// Greedy nearest-pair matching of member points to limit points within `radius`.
pub fn match_critical_points(member: &[CriticalPoint], limit: &[CriticalPoint], radius: f64) -> Matching {
    assert!(radius > 0.0, "matching radius must be positive");
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in member.iter().enumerate() {
        for (j, b) in limit.iter().enumerate() {
            let d = dist(&a.location, &b.location);
            if d <= radius {
                cand.push((d, i, j));
            }
        }
    }
    // Ties break on the locations so that swapping the roles gives the same pairs.
    cand.sort_by(|x, y| {
        x.0.total_cmp(&y.0).then_with(|| {
            let kx = ordered(&member[x.1].location, &limit[x.2].location);
            let ky = ordered(&member[y.1].location, &limit[y.2].location);
            lex_cmp(kx.0, ky.0).then_with(|| lex_cmp(kx.1, ky.1))
        })
    });
    let mut used_m = alloc::vec![false; member.len()];
    let mut used_l = alloc::vec![false; limit.len()];
    let mut pairs = Vec::new();
    for (d, i, j) in &cand {
        if used_m[*i] || used_l[*j] {
            continue;
        }
        used_m[*i] = true;
        used_l[*j] = true;
        let (a, b) = (&member[*i], &limit[*j]);
        pairs.push(MatchPair {
            member: *i,
            limit: *j,
            distance: *d,
            hom_agree: match (a.hom_index, b.hom_index) {
                (HomIndex::Index(x), HomIndex::Index(y)) => Some(x == y),
                _ => None,
            },
            morse_agree: match (a.morse_index, b.morse_index) {
                (MorseIndex::Index(x), MorseIndex::Index(y)) => Some(x == y),
                _ => None,
            },
        });
    }
    pairs.sort_by_key(|p| (p.member, p.limit));
    let mut multi_witnesses = Vec::new();
    for j in 0..limit.len() {
        let near: Vec<usize> = cand.iter().filter(|c| c.2 == j).map(|c| c.1).collect();
        if near.len() >= 2 {
            let mut near = near;
            near.sort_unstable();
            multi_witnesses.push((j, near));
        }
    }
    let unmatched_member: Vec<usize> = (0..member.len()).filter(|i| !used_m[*i]).collect();
    let unmatched_limit: Vec<usize> = (0..limit.len()).filter(|j| !used_l[*j]).collect();
    Matching {
        radius,
        bijection: unmatched_member.is_empty() && unmatched_limit.is_empty(),
        multi_match: !multi_witnesses.is_empty(),
        pairs,
        unmatched_member,
        unmatched_limit,
        multi_witnesses,
    }
}

fn ordered<'a>(a: &'a [f64], b: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    if lex_cmp(a, b).is_le() {
        (a, b)
    } else {
        (b, a)
    }
}

/// `min(resolution(limit) / 2, diameter / 10)`.
pub fn default_match_radius(limit: &[CriticalPoint], domain: &Domain) -> f64 {
    (resolution(limit) / 2.0).min(domain.diameter() / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceOptions {
    /// Detector grid; the family's own grid per member when `None`.
    pub grid_res: Option<usize>,
    /// Grid for C^k distances and improper-extrema counts.
    pub ck_grid: Option<usize>,
    pub boundary_samples: usize,
    /// A family satisfies the boundary hypothesis when `|grad f_n|` on the boundary exceeds this.
    pub boundary_gradient_tol: f64,
    /// A family satisfies the resolution hypothesis when every tested resolution reaches this.
    pub resolution_tol: f64,
    pub match_radius: Option<f64>,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions {
            grid_res: None,
            ck_grid: None,
            boundary_samples: 512,
            boundary_gradient_tol: 1e-4,
            resolution_tol: 1e-3,
            match_radius: None,
        }
    }
}

fn default_ck_grid(dim: usize) -> usize {
    match dim {
        1 => 4096,
        2 => 128,
        _ => 24,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub n: u32,
    pub d0: f64,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub counts: Counts,
    pub resolution: f64,
    pub boundary_min_gradient: f64,
    pub matched: usize,
    pub unmatched_n: usize,
    pub unmatched_limit: usize,
    pub multi_match: bool,
    /// Largest distance between matched points.
    pub max_pair_distance: f64,
    pub unresolved: usize,
    /// Detector failure for this member, if any.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub counts: Counts,
    pub resolution: f64,
    pub points: Vec<CriticalPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub min_boundary_gradient: f64,
    pub boundary_gradient_ok: bool,
    pub min_resolution: f64,
    /// Resolution shrinks monotonically by at least half across the tested `n`.
    pub resolution_collapsing: bool,
    pub resolution_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conclusions {
    /// `N_C(f_n) <= N_C(f)` at the two largest tested `n`.
    pub upper_bound: bool,
    /// Totals, maxima, minima and saddles agree with the limit at the largest `n`.
    pub counts_match: bool,
    pub bijection: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Either a hypothesis fails, or the hypotheses and conclusions both hold.
    Consistent,
    /// The hypotheses hold numerically but a conclusion fails.
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub family: String,
    pub domain: Domain,
    pub rows: Vec<SequenceRow>,
    pub limit: LimitRow,
    pub hypotheses: Hypotheses,
    pub conclusions: Conclusions,
    pub verdict: Verdict,
}

fn member_grid(entry: &GalleryEntry, n: u32, opts: &SequenceOptions) -> usize {
    opts.grid_res.unwrap_or_else(|| entry.grid_for(n))
}

/// Detect and count the limit's critical points.
pub fn limit_row(entry: &GalleryEntry, domain: &Domain, opts: &SequenceOptions) -> Result<LimitRow, CritError> {
    let grid = member_grid(entry, 1, opts);
    let rep = count_report(&entry.limit, domain, grid)?;
    Ok(LimitRow {
        counts: rep.counts,
        resolution: rep.resolution,
        points: rep.points,
    })
}

/// Measure one family member against the limit.
pub fn sequence_row(
    entry: &GalleryEntry,
    n: u32,
    domain: &Domain,
    limit: &LimitRow,
    opts: &SequenceOptions,
) -> SequenceRow {
    let f = entry.member(n);
    let ck = ck_distance(&f, &entry.limit, domain, 2, opts.ck_grid.unwrap_or(default_ck_grid(domain.dim())));
    let bmin = boundary_min_gradient(&f, domain, opts.boundary_samples);
    let mut row = SequenceRow {
        n,
        d0: ck.d0,
        d1: ck.d1,
        d2: ck.d2,
        counts: Counts::default(),
        resolution: f64::INFINITY,
        boundary_min_gradient: bmin,
        matched: 0,
        unmatched_n: 0,
        unmatched_limit: limit.points.len(),
        multi_match: false,
        max_pair_distance: 0.0,
        unresolved: 0,
        error: None,
    };
    match count_report(&f, domain, member_grid(entry, n, opts)) {
        Ok(rep) => {
            let radius = opts
                .match_radius
                .unwrap_or_else(|| default_match_radius(&limit.points, domain));
            let m = match_critical_points(&rep.points, &limit.points, radius);
            row.matched = m.pairs.len();
            row.unmatched_n = m.unmatched_member.len();
            row.unmatched_limit = m.unmatched_limit.len();
            row.multi_match = m.multi_match;
            row.max_pair_distance = m.max_distance();
            row.counts = rep.counts;
            row.resolution = rep.resolution;
            row.unresolved = rep.unresolved.len();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Assemble rows, sorted by `n`, into a report with hypothesis and conclusion flags.
pub fn assemble_report(
    entry: &GalleryEntry,
    domain: &Domain,
    limit: LimitRow,
    mut rows: Vec<SequenceRow>,
    opts: &SequenceOptions,
) -> SequenceReport {
    rows.sort_by_key(|r| r.n);
    let ok_rows: Vec<&SequenceRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let min_boundary_gradient = rows.iter().map(|r| r.boundary_min_gradient).fold(f64::INFINITY, f64::min);
    let res: Vec<f64> = ok_rows.iter().map(|r| r.resolution).collect();
    let min_resolution = res.iter().cloned().fold(f64::INFINITY, f64::min);
    let resolution_collapsing = res.len() >= 2
        && res.iter().all(|r| r.is_finite())
        && res.windows(2).all(|w| w[1] < w[0])
        && res[res.len() - 1] <= 0.5 * res[0].min(limit.resolution);
    let hypotheses = Hypotheses {
        min_boundary_gradient,
        boundary_gradient_ok: min_boundary_gradient > opts.boundary_gradient_tol,
        min_resolution,
        resolution_collapsing,
        resolution_ok: min_resolution >= opts.resolution_tol && !resolution_collapsing,
    };
    let n_c = limit.counts.n_critical;
    let tail: Vec<&&SequenceRow> = ok_rows.iter().rev().take(2).collect();
    let conclusions = Conclusions {
        upper_bound: !tail.is_empty() && tail.iter().all(|r| r.counts.n_critical <= n_c),
        counts_match: tail.first().is_some_and(|r| r.counts.same_classes(&limit.counts)),
        bijection: tail
            .first()
            .is_some_and(|r| r.unmatched_n == 0 && r.unmatched_limit == 0 && !r.multi_match),
    };
    let hyp = hypotheses.boundary_gradient_ok && hypotheses.resolution_ok && ok_rows.len() == rows.len();
    let concl = conclusions.upper_bound && conclusions.counts_match;
    SequenceReport {
        family: entry.name.to_string(),
        domain: domain.clone(),
        rows,
        limit,
        hypotheses,
        conclusions,
        verdict: if hyp && !concl {
            Verdict::Inconsistent
        } else {
            Verdict::Consistent
        },
    }
}

/// Full convergence report for a family over the given `n`.
pub fn convergence_experiment(
    entry: &GalleryEntry,
    n_list: &[u32],
    domain: &Domain,
    opts: &SequenceOptions,
) -> Result<SequenceReport, CritError> {
    let limit = limit_row(entry, domain, opts)?;
    let rows = n_list
        .iter()
        .map(|&n| sequence_row(entry, n, domain, &limit, opts))
        .collect();
    Ok(assemble_report(entry, domain, limit, rows, opts))
}

/// Resolution of the detected critical points of each member; infinite with fewer than two points.
pub fn resolution_sequence(
    entry: &GalleryEntry,
    n_list: &[u32],
    domain: &Domain,
    grid_res: Option<usize>,
) -> Vec<(u32, f64)> {
    n_list
        .iter()
        .map(|&n| {
            let grid = grid_res.unwrap_or_else(|| entry.grid_for(n));
            let r = find_critical_points(&entry.member(n), domain, &DetectOptions::with_grid(grid))
                .map(|d| resolution(&d.points))
                .unwrap_or(f64::NAN);
            (n, r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{entry, gallery};

    #[test]
    fn ck_constant_shift() {
        let f = gallery("paraboloid", 1).unwrap();
        let g = f.add_scaled(&crate::field::constant(2, 1.0), 1.0 / 8.0);
        let d = ck_distance(&f, &g, &Domain::unit_ball(2), 2, 32);
        assert_eq!(d.d0, 0.125);
        assert_eq!(d.d1, Some(0.0));
        assert_eq!(d.d2, Some(0.0));
    }

    #[test]
    fn ck_wiggle() {
        let f = crate::field::linear(&[1.0]);
        let g = Field::new(1, "wiggle", Smoothness::C2, |s: &[f64]| s[0] + (16.0 * s[0]).sin() / 16.0);
        let d = ck_distance(&f, &g, &Domain::interval(0.0, 1.0), 1, 4096);
        assert!(d.d0 <= 1.0 / 16.0);
        assert!((d.d1.unwrap() - 1.0).abs() < 1e-3);
        assert_eq!(d.d2, None);
    }

    #[test]
    fn ck_bump_triple() {
        let e = entry("bump_triple").unwrap();
        let d = ck_distance(&e.member(16), &e.limit, &e.domain, 0, 4096);
        assert!(d.d0 <= 0.25 + 5.0 / 16.0);
    }

    fn pts(field: &Field, domain: &Domain, grid: usize) -> Vec<CriticalPoint> {
        find_critical_points(field, domain, &DetectOptions::with_grid(grid)).unwrap().points
    }

    #[test]
    fn identical_sets_match_perfectly() {
        let e = entry("double_well").unwrap();
        let p = pts(&e.limit, &e.domain, 64);
        let m = match_critical_points(&p, &p, 0.1);
        assert!(m.bijection && !m.multi_match);
        assert!(m.pairs.iter().all(|q| q.distance == 0.0 && q.hom_agree == Some(true)));
    }

    #[test]
    fn merging_maxima_multi_match() {
        let e = entry("merging_maxima").unwrap();
        let lim = pts(&e.limit, &e.domain, e.grid_for(1));
        let mem = pts(&e.member(64), &e.domain, e.grid_for(64));
        let m = match_critical_points(&mem, &lim, default_match_radius(&lim, &e.domain));
        assert!(m.multi_match, "{m:?}");
    }

    #[test]
    fn bump_saddle_bump_max_is_unmatched() {
        let e = entry("bump_saddle").unwrap();
        let lim = pts(&e.limit, &e.domain, e.grid_for(1));
        let mem = pts(&e.member(16), &e.domain, e.grid_for(16));
        let m = match_critical_points(&mem, &lim, default_match_radius(&lim, &e.domain));
        // The members are rescaled copies of n = 1: the origin saddle plus a bump
        // maximum and a second saddle, both about 0.1 from the origin at n = 16.
        assert_eq!(m.pairs.len(), 1);
        let kept = &mem[m.pairs[0].member];
        assert!(crate::linalg::norm(&kept.location) < 1e-9);
        assert_eq!(kept.classification, Classification::Saddle { prongs: Some(2) });
        let extra: Vec<_> = m.unmatched_member.iter().map(|i| mem[*i].classification).collect();
        assert_eq!(extra.len(), 2);
        assert_eq!(extra.iter().filter(|c| **c == Classification::Max).count(), 1);
    }

    #[test]
    fn matching_is_symmetric() {
        let e = entry("double_well").unwrap();
        let a = pts(&e.limit, &e.domain, 64);
        let b = pts(&e.member(4), &e.domain, 64);
        let ab = match_critical_points(&a, &b, 0.3);
        let ba = match_critical_points(&b, &a, 0.3);
        let mut x: Vec<(usize, usize)> = ab.pairs.iter().map(|p| (p.member, p.limit)).collect();
        let mut y: Vec<(usize, usize)> = ba.pairs.iter().map(|p| (p.limit, p.member)).collect();
        x.sort_unstable();
        y.sort_unstable();
        assert_eq!(x, y);
    }

    #[test]
    fn count_examples() {
        let b = Domain::unit_ball(2);
        let c = count_report(&gallery("paraboloid", 1).unwrap(), &b, 64).unwrap().counts;
        assert_eq!((c.n_critical, c.n_min, c.n_max, c.n_saddle), (1, 1, 0, 0));
        assert_eq!(c.hom.get(&1), Some(&1));
        assert_eq!(c.morse.get(&0), Some(&1));
        let c = count_report(&gallery("monkey", 1).unwrap(), &b, 64).unwrap().counts;
        assert_eq!((c.n_critical, c.n_saddle), (1, 1));
        assert_eq!(c.hom.get(&-2), Some(&1));
        assert_eq!(c.morse_degenerate, 1);
        let e = entry("bump_saddle").unwrap();
        let c = count_report(&e.member(4), &e.domain, e.grid_for(4)).unwrap().counts;
        assert_eq!((c.n_critical, c.n_saddle, c.n_max), (3, 2, 1));
        assert_eq!(c.morse.get(&1), Some(&2));
        assert_eq!(c.morse.get(&2), Some(&1));
        assert!(c.identity_holds());
    }

    #[test]
    fn merging_maxima_report() {
        let e = entry("merging_maxima").unwrap();
        let r = convergence_experiment(&e, &[4, 16, 64], &e.domain, &SequenceOptions::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.counts.n_max == 2));
        assert_eq!(r.limit.counts.n_max, 1);
        assert!(r.hypotheses.resolution_collapsing);
        assert!(!r.hypotheses.resolution_ok);
        assert!(!r.conclusions.counts_match);
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.rows.last().unwrap().multi_match);
    }

    #[test]
    fn cubic_split_report() {
        let e = entry("cubic_split").unwrap();
        let r = convergence_experiment(&e, &[4, 16, 64], &e.domain, &SequenceOptions::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.counts.n_critical == 2));
        assert_eq!(r.limit.counts.n_critical, 1);
        assert!(r.rows.last().unwrap().d1.unwrap() < 1e-3);
        assert!(!r.hypotheses.resolution_ok);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn well_behaved_family_converges() {
        let e = entry("double_well").unwrap();
        let r = convergence_experiment(&e, &[16, 64], &e.domain, &SequenceOptions::default()).unwrap();
        assert!(r.hypotheses.resolution_ok && r.hypotheses.boundary_gradient_ok);
        for row in &r.rows {
            assert_eq!(row.counts.n_critical, r.limit.counts.n_critical);
            assert_eq!(row.counts.morse, r.limit.counts.morse);
        }
        assert!(r.conclusions.counts_match && r.conclusions.bijection);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn resolution_trends() {
        let e = entry("merging_maxima").unwrap();
        let s = resolution_sequence(&e, &[4, 16, 64], &e.domain, None);
        assert!(s.windows(2).all(|w| w[1].1 < w[0].1));
        let e = entry("paraboloid").unwrap();
        let s = resolution_sequence(&e, &[1, 2], &e.domain, None);
        assert!(s.iter().all(|(_, r)| r.is_infinite()));
        let e = entry("bump_triple").unwrap();
        let s = resolution_sequence(&e, &[4, 16, 64], &e.domain, None);
        assert!(s.windows(2).all(|w| w[1].1 < w[0].1), "{s:?}");
    }
}
