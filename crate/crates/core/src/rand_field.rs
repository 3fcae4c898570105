//! Random trigonometric fields and Monte Carlo estimates of count convergence.
//!
//! The limit field `G` is a random finite sum over a tensor trigonometric basis on
//! `[-1, 1]^D`; its perturbations are `G_n = G + (E_1 + ... + E_n) / n` with i.i.d.
//! basis noise fields `E_i`, so `G_n -> G` uniformly with all derivatives.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::critpoint::{boundary_min_gradient, find_critical_points, resolution, Classification, DetectOptions};
use crate::domain::Domain;
use crate::error::CritError;
use crate::field::{Field, Smoothness};
use crate::morse::morse_statistic;

/// Law of the random limit field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    #[serde(rename = "D", alias = "dim")]
    pub dim: usize,
    /// Highest frequency per axis.
    pub degree: u32,
    /// Coefficients of total frequency `k` scale as `max(1, k)^-decay`.
    pub decay: f64,
}

/// A finite sum of products of `1`, `cos(k w x)` and `sin(k w x)` with `w = pi/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisField {
    pub dim: usize,
    pub degree: u32,
    /// One coefficient per basis term, in [`BasisField::terms`] order.
    pub coefficients: Vec<f64>,
    pub seed: u64,
}

const OMEGA: f64 = FRAC_PI_2;

/// One-dimensional basis function `j`: 0 is constant, `2k-1` is `cos(k w x)`, `2k` is `sin(k w x)`.
fn axis_basis(j: usize, x: f64) -> (f64, f64, f64) {
    if j == 0 {
        return (1.0, 0.0, 0.0);
    }
    let k = j.div_ceil(2) as f64 * OMEGA;
    let (s, c) = (k * x).sin_cos();
    if j % 2 == 1 {
        (c, -k * s, -k * k * c)
    } else {
        (s, k * c, -k * k * s)
    }
}

fn frequency(j: usize) -> u32 {
    j.div_ceil(2) as u32
}

impl BasisField {
    pub fn n_terms(dim: usize, degree: u32) -> usize {
        (2 * degree as usize + 1).pow(dim as u32)
    }

    /// Per-axis basis indices of term `t`.
    pub fn term(&self, t: usize) -> Vec<usize> {
        term_indices(self.dim, self.degree, t)
    }

    pub fn zero(dim: usize, degree: u32) -> Self {
        BasisField {
            dim,
            degree,
            coefficients: vec![0.0; Self::n_terms(dim, degree)],
            seed: 0,
        }
    }

    /// `(value, gradient, hessian)` at `s`.
    pub fn eval(&self, s: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let d = self.dim;
        let per_axis = 2 * self.degree as usize + 1;
        let table: Vec<Vec<(f64, f64, f64)>> = (0..d)
            .map(|a| (0..per_axis).map(|j| axis_basis(j, s[a])).collect())
            .collect();
        let mut v = 0.0;
        let mut g = DVector::zeros(d);
        let mut h = DMatrix::zeros(d, d);
        let mut idx = vec![0usize; d];
        for &c in &self.coefficients {
            if c != 0.0 {
                let f: Vec<(f64, f64, f64)> = (0..d).map(|a| table[a][idx[a]]).collect();
                let prod_except = |skip: &[usize]| -> f64 {
                    (0..d).filter(|a| !skip.contains(a)).map(|a| f[a].0).product()
                };
                v += c * prod_except(&[]);
                for a in 0..d {
                    g[a] += c * f[a].1 * prod_except(&[a]);
                    h[(a, a)] += c * f[a].2 * prod_except(&[a]);
                    for b in a + 1..d {
                        let x = c * f[a].1 * f[b].1 * prod_except(&[a, b]);
                        h[(a, b)] += x;
                        h[(b, a)] += x;
                    }
                }
            }
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < per_axis {
                    break;
                }
                idx[a] = 0;
            }
        }
        (v, g, h)
    }

    /// `self + scale * other`, term by term.
    pub fn add_scaled(&self, other: &BasisField, scale: f64) -> BasisField {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        BasisField {
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + scale * b)
                .collect(),
            ..self.clone()
        }
    }

    pub fn to_field(&self) -> Field {
        let data = Arc::new(self.clone());
        let (dv, dg, dh) = (data.clone(), data.clone(), data);
        Field::new(self.dim, "random trigonometric field", Smoothness::C2, move |s| dv.eval(s).0)
            .with_gradient(move |s| dg.eval(s).1)
            .with_hessian(move |s| dh.eval(s).2)
    }
}

fn term_indices(dim: usize, degree: u32, mut t: usize) -> Vec<usize> {
    let per_axis = 2 * degree as usize + 1;
    let mut idx = vec![0; dim];
    for a in (0..dim).rev() {
        idx[a] = t % per_axis;
        t /= per_axis;
    }
    idx
}

/// Deterministic generator for draw `i` of trial `trial`: the stream selects the
/// trial and the word position a disjoint block for each draw.
pub fn rng_for(seed: u64, trial: u64, draw: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.set_word_pos((draw as u128) << 32);
    rng
}

fn draw_coefficients(spec: &FieldSpec, amplitude: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..BasisField::n_terms(spec.dim, spec.degree))
        .map(|t| {
            let k: u32 = term_indices(spec.dim, spec.degree, t).into_iter().map(frequency).sum();
            let z: f64 = StandardNormal.sample(rng);
            amplitude * (k.max(1) as f64).powf(-spec.decay) * z
        })
        .collect()
}

/// Random limit field for `(seed, trial)`.
pub fn sample_limit_field(spec: &FieldSpec, seed: u64, trial: u64) -> BasisField {
    assert!(spec.degree >= 1, "degree must be at least 1");
    let mut rng = rng_for(seed, trial, 0);
    BasisField {
        dim: spec.dim,
        degree: spec.degree,
        coefficients: draw_coefficients(spec, 1.0, &mut rng),
        seed,
    }
}

/// Noise field `E_i` of trial `trial`.
pub fn noise_field(spec: &FieldSpec, noise: f64, seed: u64, trial: u64, i: u64) -> BasisField {
    let mut rng = rng_for(seed, trial, i);
    BasisField {
        dim: spec.dim,
        degree: spec.degree,
        coefficients: draw_coefficients(spec, noise, &mut rng),
        seed,
    }
}

/// `G + (E_1 + ... + E_n) / n`.
pub fn empirical_mean_field(g: &BasisField, spec: &FieldSpec, noise: f64, n: u32, seed: u64, trial: u64) -> BasisField {
    assert!(n >= 1, "n must be at least 1");
    let mut sum = BasisField::zero(g.dim, g.degree);
    for i in 1..=n as u64 {
        sum = sum.add_scaled(&noise_field(spec, noise, seed, trial, i), 1.0);
    }
    g.add_scaled(&sum, 1.0 / n as f64)
}

/// Full Monte Carlo experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSpec {
    #[serde(flatten)]
    pub field: FieldSpec,
    /// Noise amplitude of each `E_i` relative to the limit's coefficients.
    pub noise: f64,
    pub n_list: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    256
}

/// Statistics below these tolerances mark a trial as violating the hypotheses.
pub const BOUNDARY_GRADIENT_TOL: f64 = 1e-4;
pub const RESOLUTION_TOL: f64 = 1e-3;
pub const MORSE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub n_critical: usize,
    pub n_max: usize,
    pub n_min: usize,
    pub n_saddle: usize,
}

impl ClassCounts {
    fn same_extrema(&self, other: &ClassCounts) -> bool {
        (self.n_max, self.n_min, self.n_saddle) == (other.n_max, other.n_min, other.n_saddle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub n: u32,
    pub counts: ClassCounts,
    /// Resolution of `G_n`.
    pub r_hat: f64,
    /// `N_M`, `N_m` and `N_S` all equal those of `G`.
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub limit: ClassCounts,
    /// Smallest boundary gradient of `G`.
    pub l: f64,
    /// Resolution of `G`.
    pub r: f64,
    /// Grid Morse statistic of `G`.
    pub m: f64,
    pub hypotheses_ok: bool,
    pub members: Vec<MemberRecord>,
    /// Detector failure; the trial is excluded from frequencies.
    pub error: Option<String>,
}

fn class_counts(field: &Field, domain: &Domain, grid: usize) -> Result<(ClassCounts, f64), CritError> {
    let det = find_critical_points(field, domain, &DetectOptions::with_grid(grid))?;
    let mut c = ClassCounts {
        n_critical: det.points.len(),
        ..ClassCounts::default()
    };
    for p in &det.points {
        match p.classification {
            Classification::Max => c.n_max += 1,
            Classification::Min => c.n_min += 1,
            Classification::Saddle { .. } => c.n_saddle += 1,
            _ => {}
        }
    }
    Ok((c, resolution(&det.points)))
}

pub fn sample_domain(dim: usize) -> Domain {
    if dim == 1 {
        Domain::interval(-1.0, 1.0)
    } else {
        Domain::cube(vec![-1.0; dim], vec![1.0; dim])
    }
}

/// Run one trial: draw `G`, measure its statistics and compare counts for every `G_n`.
pub fn run_trial(spec: &MonteCarloSpec, trial: u64) -> TrialRecord {
    let domain = sample_domain(spec.field.dim);
    let g = sample_limit_field(&spec.field, spec.seed, trial);
    let gf = g.to_field();
    let mut rec = TrialRecord {
        trial,
        limit: ClassCounts::default(),
        l: boundary_min_gradient(&gf, &domain, 512),
        r: f64::INFINITY,
        m: morse_statistic(&gf, &domain, spec.grid),
        hypotheses_ok: false,
        members: Vec::new(),
        error: None,
    };
    let run = || -> Result<(ClassCounts, f64, Vec<MemberRecord>), CritError> {
        let (limit, r) = class_counts(&gf, &domain, spec.grid)?;
        let mut members = Vec::new();
        // Running sum of the noise fields, so nested n share their draws.
        let mut sum = BasisField::zero(g.dim, g.degree);
        let mut drawn = 0u64;
        let mut n_sorted = spec.n_list.clone();
        n_sorted.sort_unstable();
        for &n in &n_sorted {
            while drawn < n as u64 {
                drawn += 1;
                sum = sum.add_scaled(&noise_field(&spec.field, spec.noise, spec.seed, trial, drawn), 1.0);
            }
            let gn = g.add_scaled(&sum, 1.0 / n as f64);
            let (counts, r_hat) = class_counts(&gn.to_field(), &domain, spec.grid)?;
            members.push(MemberRecord {
                n,
                matched: counts.same_extrema(&limit),
                counts,
                r_hat,
            });
        }
        Ok((limit, r, members))
    };
    match run() {
        Ok((limit, r, members)) => {
            rec.limit = limit;
            rec.r = r;
            rec.members = members;
            rec.hypotheses_ok = rec.l > BOUNDARY_GRADIENT_TOL && rec.r > RESOLUTION_TOL && rec.m > MORSE_TOL;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub n: u32,
    pub valid_trials: usize,
    pub failed_trials: usize,
    /// Fraction of valid trials with matching `N_M`, `N_m`, `N_S`.
    pub frequency: f64,
    /// Same, restricted to trials whose limit satisfies the hypotheses.
    pub frequency_hypotheses_ok: Option<f64>,
    pub frequency_hypotheses_failed: Option<f64>,
    /// Same, for near-degenerate limits (`M < 1e-4`) and clearly Morse ones (`M > 1e-2`).
    pub frequency_low_m: Option<f64>,
    pub frequency_high_m: Option<f64>,
    /// Total variation distance between the laws of `N_M(G_n)` and `N_M(G)` over trials.
    pub tv_distance: f64,
    /// Median over trials of `|R_n - R|`.
    pub median_resolution_gap: f64,
    /// Fraction of trials with `R_n < 1e-3`.
    pub tail_resolution: f64,
    pub mean_critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloTable {
    pub spec: MonteCarloSpec,
    pub rows: Vec<FrequencyRow>,
    pub trials: Vec<TrialRecord>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn gap(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        0.0
    } else {
        (a - b).abs()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else if v[m - 1].is_infinite() || v[m].is_infinite() {
        v[m - 1].max(v[m])
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Aggregate trial records, in trial order, into per-n frequencies.
pub fn aggregate(spec: &MonteCarloSpec, mut trials: Vec<TrialRecord>) -> MonteCarloTable {
    trials.sort_by_key(|t| t.trial);
    let valid: Vec<&TrialRecord> = trials.iter().filter(|t| t.error.is_none()).collect();
    let failed = trials.len() - valid.len();
    let mut n_sorted = spec.n_list.clone();
    n_sorted.sort_unstable();
    let rows = n_sorted
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let member = |t: &TrialRecord| t.members[k].clone();
            let count_if = |pred: &dyn Fn(&TrialRecord) -> bool| -> (usize, usize) {
                let sel: Vec<&&TrialRecord> = valid.iter().filter(|t| pred(t)).collect();
                (sel.iter().filter(|t| member(t).matched).count(), sel.len())
            };
            let (all_hit, all_n) = count_if(&|_| true);
            let (ok_hit, ok_n) = count_if(&|t| t.hypotheses_ok);
            let (bad_hit, bad_n) = count_if(&|t| !t.hypotheses_ok);
            let (lo_hit, lo_n) = count_if(&|t| t.m < 1e-4);
            let (hi_hit, hi_n) = count_if(&|t| t.m > 1e-2);
            let max_count = valid
                .iter()
                .map(|t| t.limit.n_max.max(member(t).counts.n_max))
                .max()
                .unwrap_or(0);
            let mut tv = 0.0;
            for c in 0..=max_count {
                let p = valid.iter().filter(|t| t.limit.n_max == c).count();
                let q = valid.iter().filter(|t| member(t).counts.n_max == c).count();
                tv += (p as f64 - q as f64).abs();
            }
            let tv = if valid.is_empty() { 0.0 } else { 0.5 * tv / valid.len() as f64 };
            FrequencyRow {
                n,
                valid_trials: valid.len(),
                failed_trials: failed,
                frequency: ratio(all_hit, all_n).unwrap_or(f64::NAN),
                frequency_hypotheses_ok: ratio(ok_hit, ok_n),
                frequency_hypotheses_failed: ratio(bad_hit, bad_n),
                frequency_low_m: ratio(lo_hit, lo_n),
                frequency_high_m: ratio(hi_hit, hi_n),
                tv_distance: tv,
                median_resolution_gap: median(valid.iter().map(|t| gap(member(t).r_hat, t.r)).collect()),
                tail_resolution: ratio(
                    valid.iter().filter(|t| member(t).r_hat < RESOLUTION_TOL).count(),
                    valid.len(),
                )
                .unwrap_or(f64::NAN),
                mean_critical: if valid.is_empty() {
                    f64::NAN
                } else {
                    valid.iter().map(|t| member(t).counts.n_critical as f64).sum::<f64>() / valid.len() as f64
                },
            }
        })
        .collect();
    MonteCarloTable {
        spec: spec.clone(),
        rows,
        trials,
    }
}

/// Run every trial in order and aggregate.
pub fn monte_carlo_convergence(spec: &MonteCarloSpec) -> MonteCarloTable {
    assert!(spec.trials >= 1, "need at least one trial");
    let records = (0..spec.trials).map(|t| run_trial(spec, t)).collect();
    aggregate(spec, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::central_gradient;

    fn spec1(degree: u32, decay: f64) -> FieldSpec {
        FieldSpec { dim: 1, degree, decay }
    }

    #[test]
    fn same_seed_same_field() {
        let s = FieldSpec { dim: 2, degree: 3, decay: 2.0 };
        assert_eq!(sample_limit_field(&s, 7, 3), sample_limit_field(&s, 7, 3));
        assert_ne!(sample_limit_field(&s, 7, 3), sample_limit_field(&s, 7, 4));
        assert_ne!(noise_field(&s, 1.0, 7, 3, 1), noise_field(&s, 1.0, 7, 3, 2));
    }

    #[test]
    fn derivatives_are_consistent() {
        for dim in 1..=3 {
            let g = sample_limit_field(&FieldSpec { dim, degree: 3, decay: 1.0 }, 11, 0);
            let f = g.to_field();
            let p: Vec<f64> = (0..dim).map(|i| 0.3 - 0.25 * i as f64).collect();
            let (_, grad, hess) = g.eval(&p);
            let fd = central_gradient(&|s| g.eval(s).0, &p, 1e-5);
            assert!((&grad - fd).norm() < 1e-6);
            let fdh = crate::field::jacobian_of_gradient(&|s: &[f64]| g.eval(s).1, &p, 1e-5);
            assert!((&hess - fdh).norm() < 1e-6);
            assert_eq!(f.value(&p), g.eval(&p).0);
        }
    }

    #[test]
    fn degree_one_has_one_critical_point() {
        // a sin(wx) + b cos(wx) + c has critical points spaced 2 apart, so [-1, 1] holds exactly one.
        for trial in 0..20 {
            let g = sample_limit_field(&spec1(1, 1.0), 5, trial);
            let c = &g.coefficients;
            let (a, b) = (c[2], c[1]);
            // a sin(t) + b cos(t) = R sin(t + phase) is critical where t + phase = pi/2 + k pi.
            let phase = b.atan2(a);
            let roots: Vec<f64> = (-3i32..=3)
                .map(|k| (FRAC_PI_2 + k as f64 * core::f64::consts::PI - phase) / OMEGA)
                .filter(|x| *x > -1.0 && *x < 1.0)
                .collect();
            let det = find_critical_points(&g.to_field(), &sample_domain(1), &DetectOptions::with_grid(256)).unwrap();
            assert_eq!(roots.len(), 1);
            assert!((det.points[0].location[0] - roots[0]).abs() < 1e-9);
            assert_eq!(det.points.len(), 1, "trial {trial}");
        }
    }

    #[test]
    fn empirical_mean_arithmetic() {
        let s = spec1(3, 2.0);
        let g = sample_limit_field(&s, 1, 0);
        assert_eq!(empirical_mean_field(&g, &s, 0.0, 50, 1, 0), g);
        let e1 = noise_field(&s, 1.0, 1, 0, 1);
        assert_eq!(empirical_mean_field(&g, &s, 1.0, 1, 1, 0), g.add_scaled(&e1, 1.0));
    }

    #[test]
    fn perturbation_shrinks_with_n() {
        let s = spec1(4, 2.0);
        let g = sample_limit_field(&s, 3, 0);
        let dom = sample_domain(1);
        let d: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| {
                let gn = empirical_mean_field(&g, &s, 1.0, n, 3, 0);
                crate::sequence::ck_distance(&gn.to_field(), &g.to_field(), &dom, 2, 512).d2.unwrap()
            })
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }

    #[test]
    fn morse_statistic_usually_positive() {
        let s = spec1(5, 3.0);
        let dom = sample_domain(1);
        let positive = (0..100)
            .filter(|&t| morse_statistic(&sample_limit_field(&s, 9, t).to_field(), &dom, 256) > 0.0)
            .count();
        assert!(positive >= 95);
    }

    #[test]
    fn zero_noise_always_matches() {
        let spec = MonteCarloSpec {
            field: spec1(4, 2.0),
            noise: 0.0,
            n_list: vec![10, 100],
            trials: 10,
            seed: 4,
            grid: 256,
        };
        let t = monte_carlo_convergence(&spec);
        assert!(t.rows.iter().all(|r| r.frequency == 1.0 && r.tv_distance == 0.0));
    }

    #[test]
    fn median_handles_infinities() {
        assert_eq!(median(vec![1.0, 3.0, 2.0]), 2.0);
        assert_eq!(median(vec![1.0, f64::INFINITY]), f64::INFINITY);
        assert_eq!(gap(f64::INFINITY, f64::INFINITY), 0.0);
    }
}
