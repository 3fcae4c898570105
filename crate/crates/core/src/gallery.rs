//! Building blocks and the catalogue of example field families.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::FieldError;
use crate::field::{Field, Smoothness};

/// Smooth bump `exp(1 - 1/(1 - |s|^2))` supported on the open unit ball.
pub fn bump(s: &[f64]) -> f64 {
    let u: f64 = s.iter().map(|x| x * x).sum();
    if u < 1.0 {
        (1.0 - 1.0 / (1.0 - u)).exp()
    } else {
        0.0
    }
}

pub fn bump_gradient(s: &[f64]) -> DVector<f64> {
    let d = s.len();
    let b = bump(s);
    if b == 0.0 {
        return DVector::zeros(d);
    }
    let w = 1.0 - s.iter().map(|x| x * x).sum::<f64>();
    DVector::from_iterator(d, s.iter().map(|x| b * (-2.0 * x / (w * w))))
}

pub fn bump_hessian(s: &[f64]) -> DMatrix<f64> {
    let d = s.len();
    let b = bump(s);
    if b == 0.0 {
        return DMatrix::zeros(d, d);
    }
    let w = 1.0 - s.iter().map(|x| x * x).sum::<f64>();
    let g: Vec<f64> = s.iter().map(|x| -2.0 * x / (w * w)).collect();
    DMatrix::from_fn(d, d, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        let dg = -2.0 * delta / (w * w) - 8.0 * s[i] * s[j] / (w * w * w);
        b * (g[i] * g[j] + dg)
    })
}

fn bump1(x: f64) -> (f64, f64, f64) {
    let b = bump(&[x]);
    if b == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let w = 1.0 - x * x;
    let g = -2.0 * x / (w * w);
    let dg = -2.0 / (w * w) - 8.0 * x * x / (w * w * w);
    (b, b * g, b * (g * g + dg))
}

/// Transition `-e^x / (e^x + e^(1-x))`, running from 0 down to -1.
pub fn transition(x: f64) -> f64 {
    -logistic(2.0 * x - 1.0)
}

fn transition_d1(x: f64) -> f64 {
    let p = logistic(2.0 * x - 1.0);
    -2.0 * p * (1.0 - p)
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Where a family's formula comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Formula stated verbatim in the source material.
    Published,
    /// Only properties were stated; the formula is a minimal reconstruction.
    Reconstructed,
    /// Textbook field used for calibration.
    Standard,
}

type Family = Arc<dyn Fn(u32) -> Field + Send + Sync>;

/// A named field family `f_n` together with its limit.
#[derive(Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub summary: &'static str,
    /// Documented critical point behaviour of the members and the limit.
    pub expected: &'static str,
    pub provenance: Provenance,
    /// Documented convergence class of `f_n -> f`.
    pub convergence: Smoothness,
    pub domain: Domain,
    pub limit: Field,
    family: Family,
    grid: fn(u32) -> usize,
}

impl core::fmt::Debug for GalleryEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("GalleryEntry")
            .field("name", &self.name)
            .field("provenance", &self.provenance)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Serializable catalogue row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryInfo {
    pub name: String,
    pub dim: usize,
    pub provenance: Provenance,
    pub convergence: Smoothness,
    pub summary: String,
    pub expected: String,
    pub domain: Domain,
}

impl GalleryEntry {
    pub fn new(
        name: &'static str,
        domain: Domain,
        limit: Field,
        family: impl Fn(u32) -> Field + Send + Sync + 'static,
    ) -> Self {
        GalleryEntry {
            name,
            summary: "",
            expected: "",
            provenance: Provenance::Standard,
            convergence: Smoothness::C2,
            domain,
            limit,
            family: Arc::new(family),
            grid: |_| 64,
        }
    }

    pub fn dim(&self) -> usize {
        self.limit.dim()
    }

    /// The `n`th member of the family.
    pub fn member(&self, n: u32) -> Field {
        assert!(n >= 1, "family index starts at 1");
        (self.family)(n)
    }

    /// Grid cells per axis that resolve the features of member `n` on the default domain.
    pub fn grid_for(&self, n: u32) -> usize {
        (self.grid)(n)
    }

    pub fn with_grid(mut self, grid: fn(u32) -> usize) -> Self {
        self.grid = grid;
        self
    }

    pub fn info(&self) -> GalleryInfo {
        GalleryInfo {
            name: self.name.to_string(),
            dim: self.dim(),
            provenance: self.provenance,
            convergence: self.convergence,
            summary: self.summary.to_string(),
            expected: self.expected.to_string(),
            domain: self.domain.clone(),
        }
    }

    fn doc(
        mut self,
        provenance: Provenance,
        convergence: Smoothness,
        summary: &'static str,
        expected: &'static str,
    ) -> Self {
        self.provenance = provenance;
        self.convergence = convergence;
        self.summary = summary;
        self.expected = expected;
        self
    }
}

/// Names accepted by [`gallery`] and [`entry`].
pub const NAMES: &[&str] = &[
    "singlemax",
    "bump_triple",
    "bump_saddle",
    "twisted",
    "flat",
    "peano",
    "merging_maxima",
    "flat_floor",
    "sine_ripple",
    "cubic_split",
    "paraboloid",
    "peak",
    "saddle",
    "monkey",
    "undulation",
    "linear",
    "bowl3d",
    "two_gaussian",
    "two_gaussian_boundary",
    "double_well",
    "cubic_1d",
    "saddle_cubic",
];

/// The `n`th member of a named family.
pub fn gallery(name: &str, n: u32) -> Result<Field, FieldError> {
    Ok(entry(name)?.member(n))
}

/// Short names accepted by [`entry`] besides [`NAMES`].
pub const ALIASES: &[(&str, &str)] = &[
    ("fig4a", "flat_floor"),
    ("fig4b", "sine_ripple"),
    ("fig4c", "cubic_split"),
    ("fig10", "merging_maxima"),
    ("fig13a", "bump_triple"),
    ("fig13b", "bump_saddle"),
];

/// Look up a catalogue entry by name or alias.
pub fn entry(name: &str) -> Result<GalleryEntry, FieldError> {
    let name = ALIASES.iter().find(|(a, _)| *a == name).map_or(name, |(_, n)| n);
    let e = match name {
        "singlemax" => singlemax(),
        "bump_triple" => bump_parabola(),
        "bump_saddle" => bump_saddle(),
        "twisted" => twisted_saddle(),
        "flat" => flat_max(),
        "peano" => peano(),
        "merging_maxima" => merging_maxima(),
        "flat_floor" => plateau(),
        "sine_ripple" => wiggle(),
        "cubic_split" => cubic_split(),
        "paraboloid" => quadratic_entry("paraboloid", 1.0, 1.0),
        "peak" => quadratic_entry("peak", -1.0, -1.0),
        "saddle" => quadratic_entry("saddle", 1.0, -1.0),
        "monkey" => monkey(),
        "undulation" => undulation(),
        "linear" => linear_entry(),
        "bowl3d" => bowl3d(),
        "two_gaussian" => two_gaussian(),
        "two_gaussian_boundary" => two_gaussian_boundary(),
        "double_well" => double_well(),
        "cubic_1d" => cubic_1d(),
        "saddle_cubic" => saddle_cubic(),
        _ => {
            return Err(FieldError::UnknownGallery {
                name: name.to_string(),
                valid: NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(e)
}

/// Every catalogue entry, in [`NAMES`] order.
pub fn catalogue() -> Vec<GalleryEntry> {
    NAMES.iter().map(|n| entry(n).expect("catalogue name")).collect()
}

fn v2(a: f64, b: f64) -> DVector<f64> {
    DVector::from_vec(vec![a, b])
}

fn m2(a: f64, b: f64, c: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[a, b, b, c])
}

fn v1(a: f64) -> DVector<f64> {
    DVector::from_element(1, a)
}

fn m1(a: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, a)
}

fn field1(
    label: String,
    smooth: Smoothness,
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ddf: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> Field {
    Field::new(1, label, smooth, move |s| f(s[0]))
        .with_gradient(move |s| v1(df(s[0])))
        .with_hessian(move |s| m1(ddf(s[0])))
}

/// Five-branch profile whose rescalings keep one maximum while converging to a plane.
fn singlemax_profile(x: f64, y: f64) -> (f64, f64, f64) {
    let e = (-x * x).exp();
    let de = -2.0 * x * e;
    if y <= -1.0 {
        (y, 0.0, 1.0)
    } else if y <= 0.0 {
        let (b, db, _) = bump1(y);
        ((1.0 - b) * y + b * e, b * de, -db * y + (1.0 - b) + db * e)
    } else if y <= 1.0 {
        let (b, db, _) = bump1(y);
        let (s, ds) = (transition(x), transition_d1(x));
        ((1.0 - b) * s + b * e, (1.0 - b) * ds + b * de, -db * s + db * e)
    } else if y <= 2.0 {
        let (b, db, _) = bump1(y - 1.0);
        let (s, ds) = (transition(x), transition_d1(x));
        (
            b * s + (1.0 - b) * (y - 1.0),
            b * ds,
            db * s - db * (y - 1.0) + (1.0 - b),
        )
    } else {
        (y - 1.0, 0.0, 1.0)
    }
}

fn singlemax() -> GalleryEntry {
    let limit = Field::new(2, "y", Smoothness::C2, |s| s[1])
        .with_gradient(|_| v2(0.0, 1.0))
        .with_hessian(|_| DMatrix::zeros(2, 2));
    GalleryEntry::new(
        "singlemax",
        Domain::cube(vec![-2.0, -1.0], vec![2.0, 1.0]),
        limit,
        |n| {
            let nf = n as f64;
            Field::new(2, alloc::format!("singlemax n={n}"), Smoothness::C2, move |s| {
                singlemax_profile(s[0], nf * s[1]).0 / nf
            })
            .with_gradient(move |s| {
                let (_, gx, gy) = singlemax_profile(s[0], nf * s[1]);
                v2(gx / nf, gy)
            })
        },
    )
    .with_grid(|n| (4 * n as usize).max(64))
    .doc(
        Provenance::Published,
        Smoothness::C0,
        "f_n(x,y) = g(x, n y)/n with the five-branch profile g; limit f = y",
        "each f_n has one strict local maximum at the origin; the limit has no critical points",
    )
}

fn bump_parabola() -> GalleryEntry {
    let limit = field1("x^2".into(), Smoothness::C2, |x| x * x, |x| 2.0 * x, |_| 2.0);
    GalleryEntry::new("bump_triple", Domain::interval(-1.0, 1.0), limit, |n| {
        let nf = n as f64;
        let r = nf.sqrt();
        field1(
            alloc::format!("x^2 + b(nx+1)/sqrt(n) - 5/n, n={n}"),
            Smoothness::C2,
            move |x| x * x + bump1(nf * x + 1.0).0 / r - 5.0 / nf,
            move |x| 2.0 * x + r * bump1(nf * x + 1.0).1,
            move |x| 2.0 + nf * r * bump1(nf * x + 1.0).2,
        )
    })
    .with_grid(|n| (64 * n as usize).max(256))
    .doc(
        Provenance::Published,
        Smoothness::C0,
        "f_n(x) = x^2 + b(nx+1)/sqrt(n) - 5/n on [-1,1]; limit x^2",
        "each f_n has a min/max/min triple within 2/n of the origin; the limit has one minimum; gradient distance grows like sqrt(n)",
    )
}

fn bump_saddle() -> GalleryEntry {
    let limit = Field::new(2, "x^2 - y^2", Smoothness::C2, |s| s[0] * s[0] - s[1] * s[1])
        .with_gradient(|s| v2(2.0 * s[0], -2.0 * s[1]))
        .with_hessian(|_| m2(2.0, 0.0, -2.0));
    GalleryEntry::new("bump_saddle", Domain::unit_ball(2), limit, |n| {
        let nf = n as f64;
        let u = move |s: &[f64]| [nf * s[0] + 1.0, nf * s[1] + 1.0];
        Field::new(
            2,
            alloc::format!("x^2 - y^2 + 20 b(nx+1, ny+1)/n^2, n={n}"),
            Smoothness::C2,
            move |s| s[0] * s[0] - s[1] * s[1] + 20.0 * bump(&u(s)) / (nf * nf),
        )
        .with_gradient(move |s| v2(2.0 * s[0], -2.0 * s[1]) + bump_gradient(&u(s)) * (20.0 / nf))
        .with_hessian(move |s| m2(2.0, 0.0, -2.0) + bump_hessian(&u(s)) * 20.0)
    })
    .with_grid(|n| (14 * n as usize).max(64))
    .doc(
        Provenance::Published,
        Smoothness::C1,
        "f_n(x,y) = x^2 - y^2 + 20 b(nx+1, ny+1)/n^2; limit x^2 - y^2",
        "each f_n has a saddle and a local maximum, both within 2/n of the origin; the limit has a single saddle",
    )
}

/// Rotation profile that is zero near the origin and tends to pi elsewhere.
fn twist_angle(n: f64, r: f64) -> (f64, f64) {
    let t = n * r - 1.0;
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    let e = (-1.0 / t).exp();
    (PI * e, PI * e * n / (t * t))
}

fn twisted_saddle() -> GalleryEntry {
    let limit = Field::new(2, "y^2 - x^2", Smoothness::C2, |s| s[1] * s[1] - s[0] * s[0])
        .with_gradient(|s| v2(-2.0 * s[0], 2.0 * s[1]))
        .with_hessian(|_| m2(-2.0, 0.0, 2.0));
    GalleryEntry::new("twisted", Domain::unit_ball(2), limit, |n| {
        let nf = n as f64;
        Field::new(
            2,
            alloc::format!("twisted saddle n={n}"),
            Smoothness::C2,
            move |s| {
                let (x, y) = (s[0], s[1]);
                let (a, _) = twist_angle(nf, (x * x + y * y).sqrt());
                (x * x - y * y) * a.cos() + 2.0 * x * y * a.sin()
            },
        )
        .with_gradient(move |s| {
            let (x, y) = (s[0], s[1]);
            let r = (x * x + y * y).sqrt();
            let (a, da) = twist_angle(nf, r);
            let (sn, cs) = a.sin_cos();
            let (q1, q2) = (x * x - y * y, 2.0 * x * y);
            let mut g = v2(2.0 * x * cs + 2.0 * y * sn, -2.0 * y * cs + 2.0 * x * sn);
            if da != 0.0 {
                let k = (-q1 * sn + q2 * cs) * da / r;
                g += v2(k * x, k * y);
            }
            g
        })
    })
    .doc(
        Provenance::Reconstructed,
        Smoothness::C1,
        "q(x,y) = x^2 - y^2 rotated by half the angle R_n(r) = pi exp(-1/(nr-1)) for r > 1/n; limit y^2 - x^2",
        "each f_n has a single saddle at the origin with Hessian diag(2,-2); the limit Hessian is diag(-2,2)",
    )
}

fn flat_profile(x: f64) -> (f64, f64, f64) {
    if x == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / (x * x)).exp();
    if e == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let x2 = x * x;
    (
        -e,
        -2.0 * e / (x2 * x),
        -e * (4.0 / (x2 * x2 * x2) - 6.0 / (x2 * x2)),
    )
}

fn flat_max() -> GalleryEntry {
    let limit = field1(
        "-exp(-1/x^2)".into(),
        Smoothness::C2,
        |x| flat_profile(x).0,
        |x| flat_profile(x).1,
        |x| flat_profile(x).2,
    );
    GalleryEntry::new("flat", Domain::interval(-1.0, 1.0), limit, |n| {
        let k = 1.0 / (n as f64 * n as f64);
        field1(
            alloc::format!("-exp(-1/x^2) + x^2/(2n^2), n={n}"),
            Smoothness::C2,
            move |x| flat_profile(x).0 + 0.5 * k * x * x,
            move |x| flat_profile(x).1 + k * x,
            move |x| flat_profile(x).2 + k,
        )
    })
    .with_grid(|_| 2048)
    .doc(
        Provenance::Reconstructed,
        Smoothness::C2,
        "-exp(-1/x^2) + x^2/(2n^2) on [-1,1]; limit -exp(-1/x^2)",
        "each f_n has a Morse minimum at the origin with f_n'' = 1/n^2 > 0 and two maxima near the edges; the limit has a degenerate maximum at the origin",
    )
}

fn peano_parts(x: f64, y: f64) -> (f64, DVector<f64>, DMatrix<f64>) {
    (
        (2.0 * x * x - y) * (y - x * x),
        v2(6.0 * x * y - 8.0 * x * x * x, 3.0 * x * x - 2.0 * y),
        m2(6.0 * y - 24.0 * x * x, 6.0 * x, -2.0),
    )
}

fn peano() -> GalleryEntry {
    let limit = Field::new(2, "(2x^2 - y)(y - x^2)", Smoothness::C2, |s| peano_parts(s[0], s[1]).0)
        .with_gradient(|s| peano_parts(s[0], s[1]).1)
        .with_hessian(|s| peano_parts(s[0], s[1]).2);
    GalleryEntry::new("peano", Domain::unit_ball(2), limit, |n| {
        let k = 1.0 / n as f64;
        Field::new(
            2,
            alloc::format!("(2x^2 - y)(y - x^2) + x^2/n, n={n}"),
            Smoothness::C2,
            move |s| peano_parts(s[0], s[1]).0 + k * s[0] * s[0],
        )
        .with_gradient(move |s| peano_parts(s[0], s[1]).1 + v2(2.0 * k * s[0], 0.0))
        .with_hessian(move |s| peano_parts(s[0], s[1]).2 + m2(2.0 * k, 0.0, 0.0))
    })
    .doc(
        Provenance::Reconstructed,
        Smoothness::C2,
        "Peano surface (2x^2 - y)(y - x^2) plus x^2/n",
        "each f_n has a single Morse saddle at the origin with Hessian diag(2/n, -2); the limit origin is degenerate and not a local maximum",
    )
}

fn merging_maxima() -> GalleryEntry {
    let limit = field1("1 - x^2".into(), Smoothness::C2, |x| 1.0 - x * x, |x| -2.0 * x, |_| -2.0);
    GalleryEntry::new("merging_maxima", Domain::interval(-1.0, 1.0), limit, |n| {
        let nf = n as f64;
        field1(
            alloc::format!("1 - x^2 + 4 b(nx - 2)/n^2, n={n}"),
            Smoothness::C2,
            move |x| 1.0 - x * x + 4.0 * bump1(nf * x - 2.0).0 / (nf * nf),
            move |x| -2.0 * x + 4.0 * bump1(nf * x - 2.0).1 / nf,
            move |x| -2.0 + 4.0 * bump1(nf * x - 2.0).2,
        )
    })
    .with_grid(|n| (64 * n as usize).max(256))
    .doc(
        Provenance::Reconstructed,
        Smoothness::C1,
        "1 - x^2 + 4 b(nx - 2)/n^2 on [-1,1]; limit 1 - x^2",
        "each f_n has two maxima and one minimum within 3/n of the origin, so the resolution shrinks like 1/n; the limit has one maximum",
    )
}

fn plateau() -> GalleryEntry {
    let limit = field1("x^2".into(), Smoothness::C2, |x| x * x, |x| 2.0 * x, |_| 2.0);
    GalleryEntry::new("flat_floor", Domain::interval(-1.0, 1.0), limit, |n| {
        let w = 1.0 / n as f64;
        let excess = move |x: f64| (x.abs() - w).max(0.0);
        field1(
            alloc::format!("max(|x| - 1/n, 0)^2 + 1/n^2, n={n}"),
            Smoothness::C1,
            move |x| excess(x) * excess(x) + w * w,
            move |x| 2.0 * excess(x) * x.signum(),
            move |x| if x.abs() > w { 2.0 } else { 0.0 },
        )
    })
    .with_grid(|n| (64 * n as usize).max(256))
    .doc(
        Provenance::Reconstructed,
        Smoothness::C0,
        "parabola with a flat floor of width 2/n; limit x^2",
        "each f_n has a continuum of critical points on [-1/n, 1/n], so N_C is undefined; the limit has one minimum",
    )
}

fn wiggle() -> GalleryEntry {
    let limit = field1("x".into(), Smoothness::C2, |x| x, |_| 1.0, |_| 0.0);
    GalleryEntry::new("sine_ripple", Domain::interval(-2.0, 2.0), limit, |n| {
        let nf = n as f64;
        let k = nf * nf;
        field1(
            alloc::format!("x + sin(n^2 x)/n, n={n}"),
            Smoothness::C2,
            move |x| x + (k * x).sin() / nf,
            move |x| 1.0 + nf * (k * x).cos(),
            move |x| -nf * k * (k * x).sin(),
        )
    })
    .with_grid(|n| (16 * (n as usize).pow(2)).max(1024))
    .doc(
        Provenance::Reconstructed,
        Smoothness::C0,
        "x + sin(n^2 x)/n on [-2,2]; limit x",
        "f_n has roughly 1.27 n^2 critical points, diverging; the limit has none",
    )
}

fn cubic_split() -> GalleryEntry {
    let limit = field1("x^3".into(), Smoothness::C2, |x| x * x * x, |x| 3.0 * x * x, |x| 6.0 * x);
    GalleryEntry::new("cubic_split", Domain::interval(-1.0, 1.0), limit, |n| {
        let k = 1.0 / (n as f64 * n as f64);
        field1(
            alloc::format!("x^3 - x/n^2, n={n}"),
            Smoothness::C2,
            move |x| x * x * x - k * x,
            move |x| 3.0 * x * x - k,
            move |x| 6.0 * x,
        )
    })
    .with_grid(|n| (64 * n as usize).max(256))
    .doc(
        Provenance::Reconstructed,
        Smoothness::C1,
        "x^3 - x/n^2 on [-1,1]; limit x^3",
        "each f_n has a max and a min at -+1/(sqrt(3) n); the limit has one undulation point",
    )
}

fn quadratic_entry(name: &'static str, a: f64, c: f64) -> GalleryEntry {
    let f = Field::new(2, name, Smoothness::C2, move |s| a * s[0] * s[0] + c * s[1] * s[1])
        .with_gradient(move |s| v2(2.0 * a * s[0], 2.0 * c * s[1]))
        .with_hessian(move |_| m2(2.0 * a, 0.0, 2.0 * c));
    let (summary, expected) = match name {
        "paraboloid" => ("x^2 + y^2", "one minimum at the origin, index +1"),
        "peak" => ("-(x^2 + y^2)", "one maximum at the origin, index +1"),
        _ => ("x^2 - y^2", "one saddle at the origin, index -1"),
    };
    constant_family(name, Domain::unit_ball(2), f).doc(
        Provenance::Standard,
        Smoothness::C2,
        summary,
        expected,
    )
}

fn constant_family(name: &'static str, domain: Domain, f: Field) -> GalleryEntry {
    let g = f.clone();
    GalleryEntry::new(name, domain, f, move |_| g.clone())
}

fn monkey() -> GalleryEntry {
    let f = Field::new(2, "x^3 - 3xy^2", Smoothness::C2, |s| {
        s[0] * s[0] * s[0] - 3.0 * s[0] * s[1] * s[1]
    })
    .with_gradient(|s| v2(3.0 * s[0] * s[0] - 3.0 * s[1] * s[1], -6.0 * s[0] * s[1]))
    .with_hessian(|s| m2(6.0 * s[0], -6.0 * s[1], -6.0 * s[0]));
    constant_family("monkey", Domain::unit_ball(2), f).doc(
        Provenance::Standard,
        Smoothness::C2,
        "monkey saddle x^3 - 3xy^2",
        "one degenerate three-pronged saddle at the origin, index -2",
    )
}

fn undulation() -> GalleryEntry {
    let f = Field::new(2, "x^3 + y^2", Smoothness::C2, |s| s[0] * s[0] * s[0] + s[1] * s[1])
        .with_gradient(|s| v2(3.0 * s[0] * s[0], 2.0 * s[1]))
        .with_hessian(|s| m2(6.0 * s[0], 0.0, 2.0));
    constant_family("undulation", Domain::unit_ball(2), f).doc(
        Provenance::Standard,
        Smoothness::C2,
        "x^3 + y^2",
        "one degenerate undulation point at the origin, index 0",
    )
}

fn linear_entry() -> GalleryEntry {
    constant_family("linear", Domain::unit_ball(2), crate::field::linear(&[1.0, 0.0])).doc(
        Provenance::Standard,
        Smoothness::C2,
        "f = x",
        "no critical points; boundary index +1",
    )
}

fn bowl3d() -> GalleryEntry {
    let f = crate::field::quadratic(DMatrix::identity(3, 3) * 2.0, DVector::zeros(3), 0.0)
        .with_label("x^2 + y^2 + z^2");
    constant_family("bowl3d", Domain::unit_ball(3), f).doc(
        Provenance::Standard,
        Smoothness::C2,
        "x^2 + y^2 + z^2 in the unit 3-ball",
        "one minimum at the origin; boundary index -1 after perturbation",
    )
}

/// Sum of isotropic Gaussians `w exp(-|s - c|^2 / width)` plus a linear tilt.
pub fn gaussian_mixture(centers: Vec<[f64; 2]>, width: f64, tilt: [f64; 2]) -> Field {
    let cv = centers.clone();
    let cg = centers.clone();
    let ch = centers;
    let term = move |s: &[f64], c: &[f64; 2]| {
        let (dx, dy) = (s[0] - c[0], s[1] - c[1]);
        ((-(dx * dx + dy * dy) / width).exp(), dx, dy)
    };
    Field::new(2, "gaussian mixture", Smoothness::C2, move |s| {
        cv.iter().map(|c| term(s, c).0).sum::<f64>() + tilt[0] * s[0] + tilt[1] * s[1]
    })
    .with_gradient(move |s| {
        let mut g = v2(tilt[0], tilt[1]);
        for c in &cg {
            let (e, dx, dy) = term(s, c);
            g += v2(-2.0 * dx * e / width, -2.0 * dy * e / width);
        }
        g
    })
    .with_hessian(move |s| {
        let mut h = DMatrix::zeros(2, 2);
        for c in &ch {
            let (e, dx, dy) = term(s, c);
            let k = 2.0 / width;
            h += m2(
                e * (k * k * dx * dx - k),
                e * k * k * dx * dy,
                e * (k * k * dy * dy - k),
            );
        }
        h
    })
}

fn two_gaussian() -> GalleryEntry {
    let f = gaussian_mixture(vec![[0.4, 0.0], [-0.4, 0.0]], 0.05, [0.0, 0.0]).with_label("two gaussians");
    constant_family("two_gaussian", Domain::unit_ball(2), f).doc(
        Provenance::Standard,
        Smoothness::C2,
        "exp(-|s - (0.4,0)|^2/0.05) + exp(-|s + (0.4,0)|^2/0.05)",
        "two maxima at (+-0.4, 0) and a saddle at the origin",
    )
}

fn two_gaussian_boundary() -> GalleryEntry {
    let f = gaussian_mixture(vec![[0.7, 0.5], [0.7, -0.5]], 0.05, [0.1, 0.0])
        .with_label("two gaussians near the boundary");
    constant_family("two_gaussian_boundary", Domain::unit_ball(2), f).doc(
        Provenance::Standard,
        Smoothness::C2,
        "Gaussians at (0.7, +-0.5) with width 0.05 plus 0.1 x",
        "two maxima near the rim; the mountain pass between them is a boundary tangency at (1, 0)",
    )
}

fn double_well_parts(x: f64, y: f64) -> (f64, DVector<f64>, DMatrix<f64>) {
    let w = x * x - 0.25;
    (
        w * w + y * y,
        v2(4.0 * x * w, 2.0 * y),
        m2(12.0 * x * x - 1.0, 0.0, 2.0),
    )
}

fn wobble_parts(x: f64, y: f64) -> (f64, DVector<f64>, DMatrix<f64>) {
    let (s3, c3) = (3.0 * x + 1.0).sin_cos();
    let (s2, c2) = (2.0 * y).sin_cos();
    (
        s3 * c2 + x * y,
        v2(3.0 * c3 * c2 + y, -2.0 * s3 * s2 + x),
        m2(-9.0 * s3 * c2, -6.0 * c3 * s2 + 1.0, -4.0 * s3 * c2),
    )
}

fn double_well() -> GalleryEntry {
    let limit = Field::new(2, "(x^2 - 1/4)^2 + y^2", Smoothness::C2, |s| double_well_parts(s[0], s[1]).0)
        .with_gradient(|s| double_well_parts(s[0], s[1]).1)
        .with_hessian(|s| double_well_parts(s[0], s[1]).2);
    GalleryEntry::new("double_well", Domain::unit_ball(2), limit, |n| {
        let k = 1.0 / (n as f64 * n as f64);
        let pick = move |s: &[f64]| (double_well_parts(s[0], s[1]), wobble_parts(s[0], s[1]));
        Field::new(
            2,
            alloc::format!("double well + n^-2 wobble, n={n}"),
            Smoothness::C2,
            move |s| {
                let (a, b) = pick(s);
                a.0 + k * b.0
            },
        )
        .with_gradient(move |s| {
            let (a, b) = pick(s);
            a.1 + b.1 * k
        })
        .with_hessian(move |s| {
            let (a, b) = pick(s);
            a.2 + b.2 * k
        })
    })
    .doc(
        Provenance::Standard,
        Smoothness::C2,
        "(x^2 - 1/4)^2 + y^2 + n^-2 (sin(3x+1) cos(2y) + xy)",
        "two minima near (+-1/2, 0) and a saddle near the origin for every n and in the limit",
    )
}

fn cubic_1d() -> GalleryEntry {
    let limit = field1("x^2/2".into(), Smoothness::C2, |x| 0.5 * x * x, |x| x, |_| 1.0);
    GalleryEntry::new("cubic_1d", Domain::interval(-1.0, 1.0), limit, |n| {
        let k = 1.0 / n as f64;
        field1(
            alloc::format!("x^2/2 + x^3/n, n={n}"),
            Smoothness::C2,
            move |x| 0.5 * x * x + k * x * x * x,
            move |x| x + 3.0 * k * x * x,
            move |x| 1.0 + 6.0 * k * x,
        )
    })
    .doc(
        Provenance::Standard,
        Smoothness::C2,
        "x^2/2 + x^3/n; n = 20 gives x^2/2 + 0.05 x^3",
        "a Morse minimum at the origin; the second critical point -n/3 lies outside [-1,1] for n >= 4",
    )
}

fn saddle_cubic() -> GalleryEntry {
    let limit = crate::field::quadratic(m2(1.0, 0.0, -1.0), DVector::zeros(2), 0.0)
        .with_label("(x^2 - y^2)/2");
    GalleryEntry::new("saddle_cubic", Domain::unit_ball(2), limit, |n| {
        let k = 1.0 / n as f64;
        Field::new(
            2,
            alloc::format!("(x^2 - y^2)/2 + x^3/n, n={n}"),
            Smoothness::C2,
            move |s| 0.5 * (s[0] * s[0] - s[1] * s[1]) + k * s[0] * s[0] * s[0],
        )
        .with_gradient(move |s| v2(s[0] + 3.0 * k * s[0] * s[0], -s[1]))
        .with_hessian(move |s| m2(1.0 + 6.0 * k * s[0], 0.0, -1.0))
    })
    .doc(
        Provenance::Standard,
        Smoothness::C2,
        "(x^2 - y^2)/2 + x^3/n; n = 20 gives a 0.05 x^3 perturbation",
        "a Morse saddle at the origin for every n",
    )
}
