//! Morse indices, Morse-lemma radius constants and the Morse chart flow.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::critpoint::{Grid, MorseIndex};
use crate::domain::{fibonacci_sphere, Domain};
use crate::error::MorseError;
use crate::field::Field;
use crate::linalg::{inverse_norm, min_abs_eigenvalue, quad_form, spectral_norm, sym_eigenvalues};

/// Morse index from a Hessian, treating eigenvalues at the field's noise level as zero.
pub(crate) fn morse_index_of(field: &Field, h: &DMatrix<f64>, degeneracy_tol: f64) -> MorseIndex {
    let eig = sym_eigenvalues(h);
    let scale = eig.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let threshold = (degeneracy_tol * scale.max(1.0)).max(10.0 * field.hessian_noise_floor());
    if eig.iter().any(|l| l.abs() <= threshold) {
        MorseIndex::Degenerate
    } else {
        MorseIndex::Index(eig.iter().filter(|l| **l < 0.0).count())
    }
}

/// Number of negative Hessian eigenvalues at `z`, or `Degenerate`.
pub fn morse_classify(field: &Field, z: &[f64], degeneracy_tol: f64) -> MorseIndex {
    morse_index_of(field, &field.hessian(z), degeneracy_tol)
}

/// Grid infimum of `max(|grad f|, min |eigenvalue of H_f|)`.
///
/// Zero exactly when the grid sees a degenerate critical point; positive values
/// certify numerically that the field is Morse.
pub fn morse_statistic(field: &Field, domain: &Domain, grid_res: usize) -> f64 {
    let grid = Grid::over(domain, grid_res.max(2));
    let mut best = f64::INFINITY;
    for idx in 0..grid.len() {
        let p = grid.point(idx);
        if !domain.contains(&p, 0.0) {
            continue;
        }
        let g = field.gradient(&p).norm();
        if g >= best {
            continue;
        }
        let m = min_abs_eigenvalue(&field.hessian(&p));
        best = best.min(g.max(m));
    }
    best
}

/// Constants of the Morse-lemma radius construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseConstants {
    /// Bound on the Hessian variation over the chart ball.
    pub k1: f64,
    /// Bound on the chart radius.
    pub k2: f64,
    /// Sampled sup of `|H_f(x) - H|` over the chart ball.
    pub l: f64,
    /// `1/|H^-1| - L`.
    pub c: f64,
    /// `|H| + L`.
    #[serde(rename = "C")]
    pub big_c: f64,
    /// Lipschitz constant `(L/c)(2 + 3C/c)` of the flow velocity.
    pub a1: f64,
}

/// The two radius bounds `(K1, K2)` for a nonsingular Hessian and `m` in (0, 1).
pub fn morse_bounds(h: &DMatrix<f64>, m: f64) -> Result<(f64, f64), MorseError> {
    if !(m > 0.0 && m < 1.0) {
        return Err(MorseError::BadParameter(m));
    }
    let hn = spectral_norm(h);
    let inv = inverse_norm(h).ok_or(MorseError::NotMorse)?;
    if !inv.is_finite() || min_abs_eigenvalue(h) <= 1e-12 * hn.max(1.0) {
        return Err(MorseError::NotMorse);
    }
    let k1 = (1.0 / inv) * (1.0 - m).min(m * m * LN_2 / (6.0 * hn * inv));
    let k2 = m / (4.0 * hn * inv);
    Ok((k1, k2))
}

/// Deterministic radial-shell samples of the ball `B_r(0)` used for sup estimates.
fn shell_offsets(dim: usize, r: f64) -> Vec<Vec<f64>> {
    const SHELLS: usize = 16;
    let dirs: Vec<Vec<f64>> = match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..64)
            .map(|k| {
                let (s, c) = (2.0 * PI * k as f64 / 64.0).sin_cos();
                vec![c, s]
            })
            .collect(),
        3 => fibonacci_sphere(128).into_iter().map(|u| u.to_vec()).collect(),
        _ => panic!("shell sampling supports dimensions 1 to 3"),
    };
    let mut out = Vec::with_capacity(SHELLS * dirs.len());
    for j in 1..=SHELLS {
        let rho = r * j as f64 / SHELLS as f64;
        for d in &dirs {
            out.push(d.iter().map(|x| x * rho).collect());
        }
    }
    out
}

fn hessian_variation(
    h: &DMatrix<f64>,
    hess_at: &dyn Fn(&[f64]) -> DMatrix<f64>,
    p: &[f64],
    r: f64,
) -> f64 {
    shell_offsets(p.len(), r)
        .iter()
        .map(|u| {
            let x: Vec<f64> = p.iter().zip(u).map(|(a, b)| a + b).collect();
            spectral_norm(&(hess_at(&x) - h))
        })
        .fold(0.0, f64::max)
}

/// Largest radius `r <= search_cap` satisfying both radius conditions.
///
/// The Hessian-variation condition `sup |H_f(x) - H| < K1` is checked on shell
/// samples of `B_r(p)` and located by bisection; `r` also stays strictly below `K2`.
pub fn morse_radius(
    h: &DMatrix<f64>,
    hess_at: &dyn Fn(&[f64]) -> DMatrix<f64>,
    p: &[f64],
    m: f64,
    search_cap: f64,
) -> Result<(f64, MorseConstants), MorseError> {
    let (k1, k2) = morse_bounds(h, m)?;
    let r_max = search_cap.min(f64::from_bits(k2.to_bits() - 1));
    let ok = |r: f64| hessian_variation(h, hess_at, p, r) < k1;
    let r = if ok(r_max) {
        r_max
    } else {
        let (mut lo, mut hi) = (0.0, r_max);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let l = hessian_variation(h, hess_at, p, r);
    let c = 1.0 / inverse_norm(h).ok_or(MorseError::NotMorse)? - l;
    let big_c = spectral_norm(h) + l;
    let a1 = (l / c) * (2.0 + 3.0 * big_c / c);
    Ok((
        r,
        MorseConstants {
            k1,
            k2,
            l,
            c,
            big_c,
            a1,
        },
    ))
}

/// A Morse chart: the ball on which the flow straightens `f` into its Hessian form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowChart {
    pub center: Vec<f64>,
    /// Hessian at the center, row by row.
    pub hessian: Vec<Vec<f64>>,
    pub value_at_center: f64,
    pub radius: f64,
    pub m: f64,
    pub constants: MorseConstants,
    pub ode_step: f64,
    /// Max of `|f(G(x)) - f(p) - (x-p)'H(x-p)/2|` over chart samples.
    pub residual_sup: f64,
}

impl FlowChart {
    pub fn hessian_matrix(&self) -> DMatrix<f64> {
        let d = self.hessian.len();
        DMatrix::from_fn(d, d, |i, j| self.hessian[i][j])
    }

    /// Both radius conditions, re-evaluated from the stored constants.
    pub fn conditions_hold(&self) -> bool {
        self.constants.l < self.constants.k1 && self.radius < self.constants.k2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartOptions {
    pub m: f64,
    pub search_cap: f64,
    pub ode_step: f64,
    pub n_samples: usize,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            m: 0.5,
            search_cap: 0.25,
            ode_step: 1e-3,
            n_samples: 64,
        }
    }
}

/// Build the Morse chart of `field` around the critical point `p`.
pub fn build_chart(field: &Field, p: &[f64], opts: &ChartOptions) -> Result<FlowChart, MorseError> {
    let h = field.hessian(p);
    let hess_at = |x: &[f64]| field.hessian(x);
    let (radius, constants) = morse_radius(&h, &hess_at, p, opts.m, opts.search_cap)?;
    let d = p.len();
    let mut chart = FlowChart {
        center: p.to_vec(),
        hessian: (0..d).map(|i| (0..d).map(|j| h[(i, j)]).collect()).collect(),
        value_at_center: field.value(p),
        radius,
        m: opts.m,
        constants,
        ode_step: opts.ode_step,
        residual_sup: 0.0,
    };
    let mut worst: f64 = 0.0;
    for x in ball_samples(&chart.center, radius, opts.n_samples) {
        let y = morse_flow_map(field, &chart, &x, opts.ode_step)?;
        worst = worst.max(chart_residual(field, &chart, &x, &y));
    }
    chart.residual_sup = worst;
    Ok(chart)
}

/// Deterministic, roughly uniform samples of the closed ball `B_r(center)`.
pub fn ball_samples(center: &[f64], r: f64, n: usize) -> Vec<Vec<f64>> {
    let d = center.len();
    let golden = PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|k| {
            let q = (k as f64 + 0.5) / n as f64;
            let off: Vec<f64> = match d {
                1 => vec![r * (2.0 * q - 1.0)],
                2 => {
                    let (s, c) = (golden * k as f64).sin_cos();
                    let rho = r * q.sqrt();
                    vec![rho * c, rho * s]
                }
                3 => {
                    let u = fibonacci_sphere(n)[k];
                    let rho = r * q.cbrt();
                    u.iter().map(|x| x * rho).collect()
                }
                _ => panic!("ball sampling supports dimensions 1 to 3"),
            };
            center.iter().zip(&off).map(|(c, o)| c + o).collect()
        })
        .collect()
}

fn chart_residual(field: &Field, chart: &FlowChart, x: &[f64], y: &[f64]) -> f64 {
    let u: Vec<f64> = x.iter().zip(&chart.center).map(|(a, b)| a - b).collect();
    let target = 0.5 * quad_form(&chart.hessian_matrix(), &u);
    (field.value(y) - chart.value_at_center - target).abs()
}

struct Velocity<'a> {
    field: &'a Field,
    p: DVector<f64>,
    fp: f64,
    h: DMatrix<f64>,
}

impl Velocity<'_> {
    /// `v_t(u) = -phi(u) y_t(u) / |y_t(u)|^2` in coordinates centred at `p`.
    fn at(&self, t: f64, u: &DVector<f64>) -> Result<DVector<f64>, MorseError> {
        let un = u.norm();
        if un == 0.0 {
            return Ok(DVector::zeros(u.len()));
        }
        let x = &self.p + u;
        let hu = &self.h * u;
        let phi = self.field.value(x.as_slice()) - self.fp - 0.5 * u.dot(&hu);
        let grad_phi = self.field.gradient(x.as_slice()) - &hu;
        let y = hu + grad_phi * t;
        let yn2 = y.norm_squared();
        if yn2.sqrt() < 1e-14 {
            if un > 1e-12 {
                return Err(MorseError::FlowSingular { distance: un });
            }
            return Ok(DVector::zeros(u.len()));
        }
        Ok(y * (-phi / yn2))
    }
}

fn integrate(
    field: &Field,
    chart: &FlowChart,
    x: &[f64],
    ode_step: f64,
    mut visit: impl FnMut(f64, &DVector<f64>),
) -> Result<DVector<f64>, MorseError> {
    let p = DVector::from_column_slice(&chart.center);
    let mut u = DVector::from_column_slice(x) - &p;
    let distance = u.norm();
    if distance > chart.radius * (1.0 + 1e-12) {
        return Err(MorseError::OutsideChart {
            distance,
            radius: chart.radius,
        });
    }
    let vel = Velocity {
        field,
        fp: chart.value_at_center,
        h: chart.hessian_matrix(),
        p: p.clone(),
    };
    let steps = (1.0 / ode_step).ceil().max(1.0) as usize;
    let dt = 1.0 / steps as f64;
    visit(0.0, &(&p + &u));
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = vel.at(t, &u)?;
        let k2 = vel.at(t + 0.5 * dt, &(&u + &k1 * (0.5 * dt)))?;
        let k3 = vel.at(t + 0.5 * dt, &(&u + &k2 * (0.5 * dt)))?;
        let k4 = vel.at(t + dt, &(&u + &k3 * dt))?;
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        visit((k + 1) as f64 * dt, &(&p + &u));
    }
    Ok(p + u)
}

/// The chart map `G(x)`, integrating the flow from t = 0 to 1 with classical RK4.
///
/// `G` satisfies `f(G(x)) = f(p) + (x-p)'H(x-p)/2` on the chart ball.
pub fn morse_flow_map(
    field: &Field,
    chart: &FlowChart,
    x: &[f64],
    ode_step: f64,
) -> Result<Vec<f64>, MorseError> {
    Ok(integrate(field, chart, x, ode_step, |_, _| {})?.as_slice().to_vec())
}

/// The whole path `t -> G_t(x)` at every integrator step.
pub fn flow_trajectory(
    field: &Field,
    chart: &FlowChart,
    x: &[f64],
    ode_step: f64,
) -> Result<Vec<(f64, Vec<f64>)>, MorseError> {
    let mut path = Vec::new();
    integrate(field, chart, x, ode_step, |t, y| path.push((t, y.as_slice().to_vec())))?;
    Ok(path)
}

/// Measured properties of a chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartReport {
    pub residual_sup: f64,
    /// Smallest and largest `|G(x1) - G(x2)| / |x1 - x2|` over sample pairs.
    pub bilip_lo: f64,
    pub bilip_hi: f64,
    /// `e^{a1}` and `2 - e^{a1}`.
    pub lip_upper_bound: f64,
    pub lip_lower_bound: f64,
    pub bounds_hold: bool,
    /// Largest change of `G(x)` when the integrator step is halved.
    pub step_halving_change: f64,
}

/// Sample the chart ball and measure the residual, Lipschitz ratios and step sensitivity.
pub fn verify_morse_chart(
    field: &Field,
    chart: &FlowChart,
    n_samples: usize,
) -> Result<ChartReport, MorseError> {
    let xs = ball_samples(&chart.center, chart.radius, n_samples.max(2));
    let mut ys = Vec::with_capacity(xs.len());
    let mut residual_sup: f64 = 0.0;
    let mut step_change: f64 = 0.0;
    for x in &xs {
        let y = morse_flow_map(field, chart, x, chart.ode_step)?;
        let y_half = morse_flow_map(field, chart, x, chart.ode_step / 2.0)?;
        step_change = step_change.max(crate::linalg::dist(&y, &y_half));
        residual_sup = residual_sup.max(chart_residual(field, chart, x, &y));
        ys.push(y);
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let dx = crate::linalg::dist(&xs[i], &xs[j]);
            if dx < 1e-9 * chart.radius.max(1e-300) {
                continue;
            }
            let ratio = crate::linalg::dist(&ys[i], &ys[j]) / dx;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    let e = chart.constants.a1.exp();
    let slack = 1e-9;
    Ok(ChartReport {
        residual_sup,
        bilip_lo: lo,
        bilip_hi: hi,
        lip_upper_bound: e,
        lip_lower_bound: 2.0 - e,
        bounds_hold: hi <= e + slack && lo >= 2.0 - e - slack,
        step_halving_change: step_change,
    })
}

/// Sup over a shared ball of the distance between two recentred chart maps.
///
/// Compares `G_n(p_n + u) - p_n` with `G(p + u) - p` for `|u| <= r_shared`.
pub fn flow_pair_distance(
    field_n: &Field,
    chart_n: &FlowChart,
    field: &Field,
    chart: &FlowChart,
    r_shared: f64,
    n_samples: usize,
) -> Result<f64, MorseError> {
    for available in [chart_n.radius, chart.radius] {
        if r_shared > available {
            return Err(MorseError::Coverage {
                requested: r_shared,
                available,
            });
        }
    }
    let zero = vec![0.0; chart.center.len()];
    let mut worst: f64 = 0.0;
    for u in ball_samples(&zero, r_shared, n_samples) {
        let shift = |c: &[f64]| -> Vec<f64> { c.iter().zip(&u).map(|(a, b)| a + b).collect() };
        let gn = morse_flow_map(field_n, chart_n, &shift(&chart_n.center), chart_n.ode_step)?;
        let g = morse_flow_map(field, chart, &shift(&chart.center), chart.ode_step)?;
        let dn: Vec<f64> = gn.iter().zip(&chart_n.center).map(|(a, b)| a - b).collect();
        let d0: Vec<f64> = g.iter().zip(&chart.center).map(|(a, b)| a - b).collect();
        worst = worst.max(crate::linalg::dist(&dn, &d0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{entry, gallery};

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn classify_basic_points() {
        let o = [0.0, 0.0];
        assert_eq!(morse_classify(&gallery("paraboloid", 1).unwrap(), &o, 1e-8), MorseIndex::Index(0));
        assert_eq!(morse_classify(&gallery("saddle", 1).unwrap(), &o, 1e-8), MorseIndex::Index(1));
        assert_eq!(morse_classify(&gallery("monkey", 1).unwrap(), &o, 1e-8), MorseIndex::Degenerate);
    }

    #[test]
    fn bounds_for_identity_and_diagonal() {
        let (k1, k2) = morse_bounds(&DMatrix::identity(2, 2), 0.5).unwrap();
        assert!((k1 - LN_2 / 24.0).abs() < 1e-12);
        assert!((k2 - 0.125).abs() < 1e-12);
        let (k1, k2) = morse_bounds(&diag(&[2.0, -1.0]), 0.5).unwrap();
        assert!((k1 - LN_2 / 48.0).abs() < 1e-12);
        assert!((k2 - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn singular_hessian_is_not_morse() {
        assert_eq!(morse_bounds(&diag(&[1.0, 0.0]), 0.5), Err(MorseError::NotMorse));
        assert_eq!(morse_bounds(&DMatrix::identity(1, 1), 1.5), Err(MorseError::BadParameter(1.5)));
    }

    #[test]
    fn quadratic_radius_hits_cap() {
        let h = diag(&[1.0, -1.0]);
        let (r, c) = morse_radius(&h, &|_| diag(&[1.0, -1.0]), &[0.0, 0.0], 0.5, 10.0).unwrap();
        assert_eq!(r, f64::from_bits(0.125f64.to_bits() - 1));
        assert_eq!(c.l, 0.0);
        assert_eq!(c.a1, 0.0);
        let (r, _) = morse_radius(&h, &|_| diag(&[1.0, -1.0]), &[0.0, 0.0], 0.5, 0.05).unwrap();
        assert_eq!(r, 0.05);
    }

    #[test]
    fn quadratic_flow_is_identity() {
        let f = gallery("saddle", 1).unwrap();
        let chart = build_chart(&f, &[0.0, 0.0], &ChartOptions::default()).unwrap();
        for x in ball_samples(&[0.0, 0.0], chart.radius, 20) {
            let y = morse_flow_map(&f, &chart, &x, 1e-3).unwrap();
            assert!(crate::linalg::dist(&x, &y) < 1e-12);
        }
    }

    #[test]
    fn cubic_1d_residual() {
        let f = gallery("cubic_1d", 20).unwrap();
        let chart = build_chart(&f, &[0.0], &ChartOptions::default()).unwrap();
        assert!(chart.radius >= 0.01);
        let y = morse_flow_map(&f, &chart, &[0.01], 1e-3).unwrap();
        assert!((f.value(&y) - 0.5 * 0.01 * 0.01).abs() <= 1e-8);
        let rep = verify_morse_chart(&f, &chart, 16).unwrap();
        assert!(rep.residual_sup <= 1e-8);
        assert!(rep.bilip_lo >= 0.9 && rep.bilip_hi <= 1.1);
        assert!(rep.bounds_hold);
    }

    #[test]
    fn statistic_examples() {
        let b = Domain::unit_ball(2);
        let s = morse_statistic(&gallery("paraboloid", 1).unwrap(), &b, 32);
        assert!((s - 2.0).abs() < 1e-12);
        let s = morse_statistic(&gallery("linear", 1).unwrap(), &b, 32);
        assert!((s - 1.0).abs() < 1e-12);
        let s = morse_statistic(&entry("peano").unwrap().limit, &Domain::ball(vec![0.0, 0.0], 0.5), 64);
        assert!(s < 1e-3);
    }

    #[test]
    fn outside_chart_is_rejected() {
        let f = gallery("saddle", 1).unwrap();
        let chart = build_chart(&f, &[0.0, 0.0], &ChartOptions::default()).unwrap();
        assert!(matches!(
            morse_flow_map(&f, &chart, &[1.0, 0.0], 1e-3),
            Err(MorseError::OutsideChart { .. })
        ));
    }
}
