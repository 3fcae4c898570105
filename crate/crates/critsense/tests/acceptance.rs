//! Acceptance suite: one PASS/FAIL line per criterion.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use critsense::format::to_json;
use critsense::parallel;
use critsense_core::critpoint::{improper_extrema, Classification, CriticalPoint};
use critsense_core::field::{quadratic, Field};
use critsense_core::gallery::{self, catalogue, GalleryEntry};
use critsense_core::hom_index::{poincare_hopf_audit, winding_index_2d, HalfInt};
use critsense_core::morse::{
    ball_samples, build_chart, flow_pair_distance, morse_bounds, morse_flow_map, verify_morse_chart, ChartOptions,
};
use critsense_core::mountain_pass::{mountain_pass_point, Certificate, PassKind, PassOptions};
use critsense_core::rand_field::{FieldSpec, MonteCarloSpec};
use critsense_core::sequence::{count_report, limit_row, sequence_row, SequenceOptions};
use critsense_core::Domain;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn entry(name: &str) -> GalleryEntry {
    gallery::entry(name).expect("gallery name")
}

fn winding_table() -> Check {
    let cases = [
        ("paraboloid", 1),
        ("peak", 1),
        ("undulation", 0),
        ("saddle", -1),
        ("monkey", -2),
    ];
    for (name, want) in cases {
        let f = entry(name).member(1);
        for eps in [0.1, 0.05] {
            let got = winding_index_2d(&f, &[0.0, 0.0], eps, 64).map_err(|e| format!("{name} eps={eps}: {e}"))?;
            ensure(got == want, || format!("{name} eps={eps}: got {got}, want {want}"))?;
        }
    }
    Ok("min +1, max +1, undulation 0, saddle -1, monkey -2 at eps 0.1 and 0.05".into())
}

fn poincare_hopf() -> Check {
    let ball = Domain::unit_ball(2);
    let names = ["paraboloid", "peak", "saddle", "monkey", "linear", "two_gaussian", "double_well", "undulation"];
    let mut radial_perturbed = false;
    for name in names {
        let r = poincare_hopf_audit(&entry(name).member(1), &ball).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.total == HalfInt::from_int(1) && r.pass, || format!("{name}: total {}", r.total))?;
        if name == "paraboloid" {
            radial_perturbed = r.perturbation.is_some();
        }
    }
    ensure(radial_perturbed, || "radial field audit did not perturb the boundary".into())?;
    let x2 = quadratic(DMatrix::from_element(1, 1, 2.0), DVector::zeros(1), 0.0);
    let r = poincare_hopf_audit(&x2, &Domain::interval(-1.0, 1.0)).map_err(|e| format!("x^2: {e}"))?;
    ensure(r.total == HalfInt::ZERO && r.pass, || format!("x^2 on interval: total {}", r.total))?;
    let r = poincare_hopf_audit(&entry("bowl3d").member(1), &Domain::unit_ball(3)).map_err(|e| format!("bowl3d: {e}"))?;
    ensure(r.total == HalfInt::ZERO && r.pass, || format!("3-ball: total {}", r.total))?;
    Ok(format!("total 1 on {} disc fields (radial one perturbed); 0 on interval and 3-ball", names.len()))
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 1.0
}

fn degree_vs_hessian() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    let mut counts = [0usize; 2];
    while done < 50 {
        let (a, b, c) = (uniform(&mut rng), uniform(&mut rng), uniform(&mut rng));
        let det = a * c - b * b;
        let trace = a + c;
        let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
        let min_abs_eig = ((trace - disc) / 2.0).abs().min(((trace + disc) / 2.0).abs());
        if min_abs_eig < 0.05 {
            continue;
        }
        let z = [0.5 * uniform(&mut rng), 0.5 * uniform(&mut rng)];
        let h = DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
        let lin = -(&h * DVector::from_column_slice(&z));
        let f = quadratic(h, lin, 0.0);
        let w = winding_index_2d(&f, &z, 0.1, 64).map_err(|e| e.to_string())?;
        let want = if det > 0.0 { 1 } else { -1 };
        ensure(w == want, || format!("H=[{a},{b};{b},{c}]: winding {w}, sign det {want}"))?;
        counts[(det > 0.0) as usize] += 1;
        done += 1;
    }
    Ok(format!("50/50 agree ({} det<0, {} det>0)", counts[0], counts[1]))
}

fn morse_constants() -> Check {
    let ln2 = std::f64::consts::LN_2;
    let cases = [
        (DMatrix::identity(2, 2), ln2 / 24.0, 0.125),
        (DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -1.0])), ln2 / 48.0, 0.0625),
    ];
    for (h, k1, k2) in cases {
        let (g1, g2) = morse_bounds(&h, 0.5).map_err(|e| e.to_string())?;
        ensure((g1 - k1).abs() <= 1e-12 && (g2 - k2).abs() <= 1e-12, || {
            format!("H={h:?}: K1={g1} K2={g2}, want {k1} {k2}")
        })?;
    }
    Ok("identity and diag(2,-1) match to 1e-12".into())
}

fn morse_flow() -> Check {
    let q = entry("paraboloid").member(1);
    let chart = build_chart(&q, &[0.0, 0.0], &ChartOptions::default()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for x in ball_samples(&chart.center, chart.radius, 100) {
        let y = morse_flow_map(&q, &chart, &x, chart.ode_step).map_err(|e| e.to_string())?;
        worst = worst.max(x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    ensure(worst <= 1e-12, || format!("quadratic flow moved a point by {worst:e}"))?;
    let mut detail = format!("identity to {worst:.1e}");
    for (name, n) in [("cubic_1d", 20), ("saddle_cubic", 20)] {
        let f = entry(name).member(n);
        let p = vec![0.0; f.dim()];
        let opts = ChartOptions {
            ode_step: 1e-3,
            ..Default::default()
        };
        let chart = build_chart(&f, &p, &opts).map_err(|e| format!("{name}: {e}"))?;
        let rep = verify_morse_chart(&f, &chart, 64).map_err(|e| format!("{name}: {e}"))?;
        ensure(rep.residual_sup <= 1e-6 && rep.step_halving_change < 1e-9, || {
            format!(
                "{name}: residual {:e}, step halving {:e}",
                rep.residual_sup, rep.step_halving_change
            )
        })?;
        detail += &format!(
            "; {name} residual {:.1e} halving {:.1e}",
            rep.residual_sup, rep.step_halving_change
        );
    }
    Ok(detail)
}

fn flow_pair() -> Check {
    let e = entry("saddle_cubic");
    let p = [0.0, 0.0];
    let opts = ChartOptions::default();
    let limit_chart = build_chart(&e.limit, &p, &opts).map_err(|e| e.to_string())?;
    let ns = [4u32, 16, 64];
    let members: Vec<(Field, _)> = ns
        .iter()
        .map(|&n| {
            let f = e.member(n);
            let c = build_chart(&f, &p, &opts).map_err(|err| format!("n={n}: {err}"))?;
            Ok((f, c))
        })
        .collect::<Result<_, String>>()?;
    let r_shared = members.iter().map(|(_, c)| c.radius).fold(limit_chart.radius, f64::min);
    let mut dists = Vec::new();
    for (f, c) in &members {
        dists.push(flow_pair_distance(f, c, &e.limit, &limit_chart, r_shared, 64).map_err(|e| e.to_string())?);
    }
    ensure(dists.windows(2).all(|w| w[1] < w[0]), || format!("distances {dists:?}"))?;
    Ok(format!("r = {r_shared:.3e}, sup|G_n - G| = {}", sci(&dists)))
}

fn maxima(points: &[CriticalPoint]) -> Vec<&CriticalPoint> {
    points.iter().filter(|p| p.classification == Classification::Max).collect()
}

fn counterexamples() -> Check {
    let opts = SequenceOptions::default();
    let ns = [16u32, 64, 256];

    let e = entry("merging_maxima");
    let lim = limit_row(&e, &e.domain, &opts).map_err(|e| e.to_string())?;
    ensure(lim.counts.n_max == 1, || format!("merging_maxima limit has {} maxima", lim.counts.n_max))?;
    let mut res = Vec::new();
    for n in ns {
        let row = sequence_row(&e, n, &e.domain, &lim, &opts);
        ensure(row.error.is_none() && row.counts.n_max == 2, || {
            format!("merging_maxima n={n}: {} maxima {:?}", row.counts.n_max, row.error)
        })?;
        res.push(row.resolution);
    }
    ensure(res.windows(2).all(|w| w[0] >= 2.0 * w[1]), || format!("merging_maxima resolutions {res:?}"))?;

    for name in ["bump_triple", "bump_saddle"] {
        let e = entry(name);
        let lim = count_report(&e.limit, &e.domain, e.grid_for(1)).map_err(|e| e.to_string())?;
        let lim_max = maxima(&lim.points);
        for n in ns {
            let rep = count_report(&e.member(n), &e.domain, e.grid_for(n)).map_err(|err| format!("{name} n={n}: {err}"))?;
            let new_max = maxima(&rep.points).into_iter().any(|m| {
                lim_max.iter().all(|l| {
                    let d: f64 = m.location.iter().zip(&l.location).map(|(a, b)| (a - b).powi(2)).sum();
                    d.sqrt() > 0.1
                })
            });
            ensure(new_max, || format!("{name} n={n}: no maximum absent from the limit"))?;
        }
    }

    let e = entry("cubic_split");
    let lim = count_report(&e.limit, &e.domain, e.grid_for(1)).map_err(|e| e.to_string())?;
    ensure(lim.counts.n_critical == 1, || format!("cubic_split limit N_C = {}", lim.counts.n_critical))?;
    for n in ns {
        let rep = count_report(&e.member(n), &e.domain, e.grid_for(n)).map_err(|e| e.to_string())?;
        ensure(rep.counts.n_critical == 2, || format!("cubic_split n={n}: N_C = {}", rep.counts.n_critical))?;
    }
    Ok(format!(
        "merging_maxima N_M = 2 vs 1, resolution {}; bump_triple and bump_saddle extra maxima; cubic_split N_C = 2 vs 1",
        sci(&res)
    ))
}

fn positive_convergence() -> Check {
    let e = entry("double_well");
    let opts = SequenceOptions::default();
    let lim = limit_row(&e, &e.domain, &opts).map_err(|e| e.to_string())?;
    ensure(lim.counts.n_critical == 3, || format!("limit N_C = {}", lim.counts.n_critical))?;
    let mut worst: f64 = 0.0;
    for n in [16u32, 64, 256] {
        let row = sequence_row(&e, n, &e.domain, &lim, &opts);
        let (c, l) = (&row.counts, &lim.counts);
        ensure(
            row.error.is_none()
                && c.n_critical == l.n_critical
                && c.n_max == l.n_max
                && c.n_min == l.n_min
                && c.n_saddle == l.n_saddle
                && c.morse == l.morse,
            || format!("n={n}: counts {c:?} vs limit {l:?}"),
        )?;
        let bijection = row.matched == l.n_critical && row.unmatched_n == 0 && row.unmatched_limit == 0 && !row.multi_match;
        ensure(bijection && row.max_pair_distance < 0.1, || {
            format!("n={n}: matched {} max distance {}", row.matched, row.max_pair_distance)
        })?;
        worst = worst.max(row.max_pair_distance);
    }
    Ok(format!(
        "N_C = 3 with matching classes and Morse indices; bijection, max pair distance {worst:.2e}"
    ))
}

fn detected_maxima(f: &Field, domain: &Domain) -> Result<Vec<Vec<f64>>, String> {
    let rep = count_report(f, domain, 128).map_err(|e| e.to_string())?;
    Ok(maxima(&rep.points).into_iter().map(|p| p.location.clone()).collect())
}

fn mountain_pass() -> Check {
    let ball = Domain::unit_ball(2);
    let f = entry("two_gaussian").member(1);
    let m = detected_maxima(&f, &ball)?;
    ensure(m.len() == 2, || format!("two_gaussian: {} maxima", m.len()))?;
    let r = mountain_pass_point(&f, &ball, &m[0], &m[1], &PassOptions::default()).map_err(|e| e.to_string())?;
    let off = r.p3[0].hypot(r.p3[1]);
    let grad = f.gradient(&r.p3).norm();
    ensure(
        r.kind == PassKind::InteriorCritical && off <= 1e-3 && grad <= 1e-6 && r.c < f.value(&r.p1),
        || format!("interior pass {r:?}"),
    )?;
    let g = entry("two_gaussian_boundary").member(1);
    let m = detected_maxima(&g, &ball)?;
    ensure(m.len() == 2, || format!("boundary variant: {} maxima", m.len()))?;
    let rb = mountain_pass_point(&g, &ball, &m[0], &m[1], &PassOptions::default()).map_err(|e| e.to_string())?;
    let tangential = match rb.certificate {
        Certificate::BoundaryAlignment(t) => t,
        Certificate::GradNorm(_) => f64::INFINITY,
    };
    ensure(rb.kind == PassKind::BoundaryTangency && tangential <= 1e-6, || {
        format!("boundary pass {rb:?}")
    })?;
    Ok(format!(
        "saddle offset {off:.1e}, |grad| {grad:.1e}, c < f(p1); boundary tangency at ({:.4}, {:.4}) with tangential {tangential:.1e}",
        rb.p3[0], rb.p3[1]
    ))
}

fn monte_carlo() -> Check {
    let spec = MonteCarloSpec {
        field: FieldSpec {
            dim: 1,
            degree: 4,
            decay: 2.0,
        },
        noise: 1.0,
        n_list: vec![10, 100, 1000],
        trials: 200,
        seed: 20240601,
        grid: 256,
    };
    let one = parallel::monte_carlo(&spec, Some(1));
    let four = parallel::monte_carlo(&spec, Some(4));
    let again = parallel::monte_carlo(&spec, Some(1));
    let (a, b, c) = (to_json(&one), to_json(&four), to_json(&again));
    ensure(a == b && a == c, || "tables differ across runs or thread counts".into())?;
    let freq: Vec<f64> = one.rows.iter().map(|r| r.frequency).collect();
    ensure(freq.windows(2).all(|w| w[1] >= w[0]), || format!("frequencies {freq:?}"))?;
    ensure(freq[2] >= 0.9, || format!("frequency at n=1000 is {}", freq[2]))?;
    Ok(format!("frequencies {freq:?}; identical with 1 and 4 threads"))
}

fn improper_bound() -> Check {
    let mut checked = 0;
    for e in catalogue() {
        let grid_at = |n: u32| e.grid_for(n).min(if e.dim() == 1 { 1 << 16 } else { 1024 });
        let lim = improper_extrema(&e.limit, &e.domain, grid_at(256));
        for n in [16u32, 64, 256] {
            let got = improper_extrema(&e.member(n), &e.domain, grid_at(n));
            ensure(
                got.n_improper_max >= lim.n_improper_max && got.n_improper_min >= lim.n_improper_min,
                || format!("{} n={n}: {got:?} vs limit {lim:?}", e.name),
            )?;
        }
        checked += 1;
    }
    Ok(format!("{checked} families at n = 16, 64, 256"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("winding index table", winding_table),
        ("Poincare-Hopf audit", poincare_hopf),
        ("degree equals sign of Hessian determinant", degree_vs_hessian),
        ("Morse constants", morse_constants),
        ("Morse flow chart", morse_flow),
        ("flow-pair convergence", flow_pair),
        ("counterexample regressions", counterexamples),
        ("positive convergence", positive_convergence),
        ("mountain pass", mountain_pass),
        ("Monte Carlo frequency", monte_carlo),
        ("improper extrema bound", improper_bound),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
