//! One-dimensional chart glueing: holomorphic extension of real-analytic transition
//! maps, cocycle certification, and comparison of two complexifications.
//!
//! Complex chart domains are axis-aligned rectangles `interval × (−h, h)`. Transition
//! maps are piecewise [`TruncatedSeries`] in one variable with real coefficients; the
//! extension evaluates the same coefficients at complex arguments.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cauchy::cauchy_extract;
use crate::coeff::{Coeff, CoefficientSpace};
use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::series::TruncatedSeries;

pub const EXTENSION_DEGREE: usize = 40;
pub const EXTENSION_NODES: usize = 256;
/// Safety factor on the Cauchy–Hadamard radius estimate.
pub const RADIUS_SAFETY: f64 = 0.8;
pub const INVERSE_TOL: f64 = 1e-10;
pub const CERTIFY_TOL: f64 = 1e-9;
pub const GRID: usize = 20;
const MAX_HALVINGS: usize = 40;
/// Relative size below which a scaled coefficient `|c_k| r^k` counts as round-off.
const NOISE_LEVEL: f64 = 1e-13;

pub type Interval = (f64, f64);

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn scalar(c: &Coeff) -> Complex64 {
    c[(0, 0)]
}

fn inside(x: f64, iv: Interval) -> bool {
    iv.0 < x && x < iv.1
}

/// Interval shrunk by `frac` of its length at each end.
fn shrink(iv: Interval, frac: f64) -> Interval {
    let d = frac * (iv.1 - iv.0);
    (iv.0 + d, iv.1 - d)
}

/// `n × n` grid on `re × [−im, im]`, endpoints included.
pub fn rect_grid(re: Interval, im: f64, n: usize) -> Vec<Complex64> {
    let lin = |a: f64, b: f64, k: usize| if n == 1 { 0.5 * (a + b) } else { a + (b - a) * k as f64 / (n - 1) as f64 };
    let mut out = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            out.push(c64(lin(re.0, re.1, p), lin(-im, im, q)));
        }
    }
    out
}

/// Cauchy–Hadamard estimate `RADIUS_SAFETY / limsup |c_k|^{1/k}` from the upper half of
/// the coefficients. Coefficients at round-off level relative to the series on its own
/// radius are ignored; if all of them are, the estimate is infinite.
pub fn radius_estimate(series: &TruncatedSeries) -> f64 {
    let r = series.radius();
    let mags: Vec<f64> = series.coeffs().iter().map(|c| scalar(c).norm()).collect();
    let scale = mags
        .iter()
        .enumerate()
        .map(|(k, m)| m * r.powi(k as i32))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return f64::INFINITY;
    }
    let n = mags.len() - 1;
    if n < 8 && series.tail_bound() == 0.0 {
        return f64::INFINITY;
    }
    let mut root: f64 = 0.0;
    for (k, &m) in mags.iter().enumerate().skip((n / 2).max(1)) {
        if m * r.powi(k as i32) > NOISE_LEVEL * scale {
            root = root.max(m.powf(1.0 / k as f64));
        }
    }
    if root == 0.0 {
        f64::INFINITY
    } else {
        RADIUS_SAFETY / root
    }
}

/// A holomorphic function near a real interval, given by series on real anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSeries {
    pieces: Vec<TruncatedSeries>,
}

impl PiecewiseSeries {
    pub fn new(pieces: Vec<TruncatedSeries>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Structural("piecewise series without pieces".into()));
        }
        for p in &pieces {
            if p.dim() != 1 || p.space() != CoefficientSpace::Scalar {
                return Err(Error::Structural("transition pieces must be scalar series in one variable".into()));
            }
        }
        Ok(PiecewiseSeries { pieces })
    }

    /// `z ↦ slope·z + shift` as a single exact piece.
    pub fn affine(interval: Interval, slope: f64, shift: f64) -> Result<Self> {
        let mid = 0.5 * (interval.0 + interval.1);
        let radius = 4.0 * (interval.1 - interval.0) + 10.0;
        let s = TruncatedSeries::from_coeffs_1d(
            CoefficientSpace::Scalar,
            c64(mid, 0.0),
            1,
            radius,
            vec![Coeff::from_element(1, 1, c64(slope * mid + shift, 0.0)), Coeff::from_element(1, 1, c64(slope, 0.0))],
        )?;
        PiecewiseSeries::new(vec![s])
    }

    /// Cauchy extraction of `f` around anchors covering `interval`. `radius_at(x)` is a
    /// radius on which `f` is holomorphic around `x`. With `real`, imaginary parts of
    /// the coefficients are dropped (f real on the real axis).
    pub fn from_analytic<F, R>(interval: Interval, f: F, radius_at: R, degree: usize, real: bool) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
        R: Fn(f64) -> f64,
    {
        if !(interval.0 < interval.1) {
            return Err(Error::Structural(format!("empty interval {interval:?}")));
        }
        let mut pieces = Vec::new();
        let mut x = interval.0;
        while x < interval.1 {
            let r = radius_at(x);
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Precondition(format!("no analyticity radius at x = {x}")));
            }
            let w = 0.2 * r;
            let anchor = (x + w).min(interval.1);
            let ext = cauchy_extract(
                |p: &[Complex64]| Coeff::from_element(1, 1, f(p[0])),
                &[c64(anchor, 0.0)],
                &[c64(1.0, 0.0)],
                r,
                degree,
                EXTENSION_NODES.max(4 * degree),
            )?;
            let coeffs = ext
                .coeffs
                .iter()
                .map(|c| {
                    let v = scalar(c);
                    Coeff::from_element(1, 1, if real { c64(v.re, 0.0) } else { v })
                })
                .collect();
            pieces.push(TruncatedSeries::from_coeffs_1d(
                CoefficientSpace::Scalar,
                c64(anchor, 0.0),
                degree,
                ext.quadrature_radius,
                coeffs,
            )?);
            x = anchor + w;
        }
        PiecewiseSeries::new(pieces)
    }

    pub fn pieces(&self) -> &[TruncatedSeries] {
        &self.pieces
    }

    /// Distance from the anchor within which a piece is used.
    pub fn reach(piece: &TruncatedSeries) -> f64 {
        0.5 * radius_estimate(piece).min(piece.radius())
    }

    fn nearest(&self, z: Complex64) -> (usize, f64) {
        self.pieces
            .iter()
            .enumerate()
            .map(|(k, p)| (k, (z - p.anchor()[0]).norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let (k, d) = self.nearest(z);
        let p = &self.pieces[k];
        if d > Self::reach(p) {
            return Err(Error::Domain(format!("{z} is outside the reach of every piece")));
        }
        Ok(scalar(&p.eval(&[z])))
    }

    /// Largest `h` such that `interval × [−h, h]` lies within the pieces' reach.
    pub fn max_height(&self, interval: Interval) -> f64 {
        let n = 64 * self.pieces.len();
        let mut h = f64::INFINITY;
        for s in 0..=n {
            let x = interval.0 + (interval.1 - interval.0) * s as f64 / n as f64;
            let best = self
                .pieces
                .iter()
                .map(|p| {
                    let dx = x - p.anchor()[0].re;
                    let r = Self::reach(p);
                    if r >= dx.abs() {
                        (r * r - dx * dx).sqrt()
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max);
            h = h.min(best);
        }
        h
    }

    fn perturbed(&self, eps: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let c0 = p.coeffs()[0].clone() + Coeff::from_element(1, 1, c64(eps, 0.0));
                p.clone().with_coeff([0, 0], c0).expect("scalar coefficient")
            })
            .collect();
        PiecewiseSeries { pieces }
    }

    fn to_value(&self) -> Result<Value> {
        self.pieces
            .iter()
            .map(|p| Ok(serde_json::from_str(&p.to_json()?)?))
            .collect::<Result<Vec<Value>>>()
            .map(Value::Array)
    }

    fn from_value(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Structural("transition series must be a list".into()))?;
        let pieces = arr
            .iter()
            .map(|p| TruncatedSeries::from_json(&p.to_string()))
            .collect::<Result<Vec<_>>>()?;
        PiecewiseSeries::new(pieces)
    }
}

/// Chart `φ_i` with nested intervals `V̄ ⊆ U`, `Ū ⊆ T` (in chart coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub interval: Interval,
    #[serde(rename = "U")]
    pub u: Interval,
    #[serde(rename = "V")]
    pub v: Interval,
}

impl Chart {
    /// Smallest gap in the nesting `V̄ ⊆ U ⊆ Ū ⊆ T`.
    pub fn nesting_margin(&self) -> f64 {
        [
            self.v.0 - self.u.0,
            self.u.1 - self.v.1,
            self.u.0 - self.interval.0,
            self.interval.1 - self.u.1,
            self.v.1 - self.v.0,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

/// `φ_j ∘ φ_i⁻¹` on one connected component `overlap` (chart-`i` coordinates).
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub i: usize,
    pub j: usize,
    pub overlap: Interval,
    pub map: PiecewiseSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealAtlas {
    charts: Vec<Chart>,
    transitions: Vec<Transition>,
    /// Index of the reverse component `(j, i)` of every transition.
    reverse: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TransitionDoc {
    i: usize,
    j: usize,
    overlap: Interval,
    series: Value,
}

#[derive(Serialize, Deserialize)]
struct AtlasDoc {
    charts: Vec<Chart>,
    transitions: Vec<TransitionDoc>,
}

impl RealAtlas {
    pub fn new(charts: Vec<Chart>, transitions: Vec<Transition>) -> Result<Self> {
        for (k, c) in charts.iter().enumerate() {
            if !(c.nesting_margin() > 0.0) {
                return Err(Error::Structural(format!("chart {k} violates V̄ ⊆ U ⊆ Ū ⊆ T")));
            }
        }
        for t in &transitions {
            if t.i >= charts.len() || t.j >= charts.len() || t.i == t.j {
                return Err(Error::Structural(format!("invalid transition ({}, {})", t.i, t.j)));
            }
            let iv = charts[t.i].interval;
            if !(iv.0 <= t.overlap.0 && t.overlap.0 < t.overlap.1 && t.overlap.1 <= iv.1) {
                return Err(Error::Structural(format!(
                    "overlap {:?} of ({}, {}) is not inside chart {}",
                    t.overlap, t.i, t.j, t.i
                )));
            }
        }
        for (a, ta) in transitions.iter().enumerate() {
            for tb in &transitions[a + 1..] {
                if ta.i == tb.i && ta.j == tb.j && ta.overlap.0 < tb.overlap.1 && tb.overlap.0 < ta.overlap.1 {
                    return Err(Error::Structural(format!("overlapping components for ({}, {})", ta.i, ta.j)));
                }
            }
        }
        let mut reverse = Vec::with_capacity(transitions.len());
        for t in &transitions {
            let mid = 0.5 * (t.overlap.0 + t.overlap.1);
            let image = t.map.eval(c64(mid, 0.0))?.re;
            let back = transitions
                .iter()
                .position(|s| s.i == t.j && s.j == t.i && inside(image, s.overlap))
                .ok_or_else(|| Error::Structural(format!("transition ({}, {}) has no reverse component", t.i, t.j)))?;
            reverse.push(back);
        }
        Ok(RealAtlas {
            charts,
            transitions,
            reverse,
        })
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }
    pub fn reverse(&self, t: usize) -> usize {
        self.reverse[t]
    }

    /// Component of `(i, j)` whose overlap contains `x`.
    pub fn component(&self, i: usize, j: usize, x: f64) -> Option<usize> {
        self.transitions
            .iter()
            .position(|t| t.i == i && t.j == j && inside(x, t.overlap))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = AtlasDoc {
            charts: self.charts.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| {
                    Ok(TransitionDoc {
                        i: t.i,
                        j: t.j,
                        overlap: t.overlap,
                        series: t.map.to_value()?,
                    })
                })
                .collect::<Result<_>>()?,
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: AtlasDoc = serde_json::from_str(s)?;
        let transitions = doc
            .transitions
            .iter()
            .map(|t| {
                Ok(Transition {
                    i: t.i,
                    j: t.j,
                    overlap: t.overlap,
                    map: PiecewiseSeries::from_value(&t.series)?,
                })
            })
            .collect::<Result<_>>()?;
        RealAtlas::new(doc.charts, transitions)
    }
}

/// Slack of `V̄* ⊆ U*` for one transition rectangle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MarginEntry {
    pub transition: usize,
    pub i: usize,
    pub j: usize,
    pub height: f64,
    pub slack: f64,
}

const U_SHRINK: f64 = 0.05;
const U_HEIGHT: f64 = 0.75;
const V_SHRINK: f64 = 0.1;
const V_HEIGHT: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct ComplexAtlas {
    real: RealAtlas,
    heights: Vec<f64>,
    margins: Vec<MarginEntry>,
}

impl ComplexAtlas {
    pub fn real(&self) -> &RealAtlas {
        &self.real
    }
    /// Strip height `h` of `T*_t = overlap × (−h, h)` per transition.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }
    pub fn margins(&self) -> &[MarginEntry] {
        &self.margins
    }

    pub fn psi(&self, t: usize, z: Complex64) -> Result<Complex64> {
        self.real.transitions[t].map.eval(z)
    }

    /// `U*_t` as `(real interval, half height)`.
    pub fn u_rect(&self, t: usize) -> (Interval, f64) {
        (shrink(self.real.transitions[t].overlap, U_SHRINK), U_HEIGHT * self.heights[t])
    }

    fn in_t_rect(&self, t: usize, z: Complex64) -> bool {
        inside(z.re, self.real.transitions[t].overlap) && z.im.abs() < self.heights[t]
    }

    /// Copy with `ψ_t` shifted by the constant `eps` (negative control).
    pub fn perturbed(&self, t: usize, eps: f64) -> ComplexAtlas {
        let mut out = self.clone();
        out.real.transitions[t].map = out.real.transitions[t].map.perturbed(eps);
        out
    }

    pub fn summary(&self) -> Value {
        json!({
            "charts": self.real.charts,
            "heights": self.heights,
            "margins": self.margins,
        })
    }
}

/// Worst `|ψ_back(ψ_fwd(z)) − z|` on a grid of `U*`, with the worst point.
fn inverse_residual(map: &PiecewiseSeries, back: &PiecewiseSeries, overlap: Interval, h: f64) -> (f64, Complex64) {
    let mut worst = (0.0, c64(0.5 * (overlap.0 + overlap.1), 0.0));
    for z in rect_grid(shrink(overlap, U_SHRINK), U_HEIGHT * h, GRID) {
        let r = map
            .eval(z)
            .and_then(|w| back.eval(w))
            .map(|b| (b - z).norm())
            .unwrap_or(f64::INFINITY);
        if !(r <= worst.0) {
            worst = (r, z);
        }
    }
    worst
}

/// Extends every transition to a strip of height at most `height`, halving until
/// `ψ_{j,i} ∘ ψ_{i,j} = id` holds to `INVERSE_TOL` on the grid in both directions.
pub fn extend_transitions(atlas: &RealAtlas, height: f64) -> Result<ComplexAtlas> {
    if !(height > 0.0) {
        return Err(Error::Precondition(format!("height must be positive, got {height}")));
    }
    let ts = &atlas.transitions;
    let mut heights = vec![f64::NAN; ts.len()];
    for t in 0..ts.len() {
        if !heights[t].is_nan() {
            continue;
        }
        let b = atlas.reverse[t];
        let (ft, bt) = (&ts[t], &ts[b]);
        let mut h = height
            .min(ft.map.max_height(ft.overlap))
            .min(bt.map.max_height(bt.overlap));
        if !(h > 0.0) {
            return Err(Error::Extension(format!(
                "coefficient decay of transition ({}, {}) on {:?} allows no positive height",
                ft.i, ft.j, ft.overlap
            )));
        }
        let mut halvings = 0;
        loop {
            let r1 = inverse_residual(&ft.map, &bt.map, ft.overlap, h).0;
            let r2 = inverse_residual(&bt.map, &ft.map, bt.overlap, h).0;
            if r1.max(r2) <= INVERSE_TOL {
                break;
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::Extension(format!(
                    "transition ({}, {}) on {:?}: mutual-inverse residual {:.3e} at height {h:.3e}",
                    ft.i,
                    ft.j,
                    ft.overlap,
                    r1.max(r2)
                )));
            }
            h *= 0.5;
        }
        heights[t] = h;
        heights[b] = h;
    }
    let margins = ts
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let len = t.overlap.1 - t.overlap.0;
            MarginEntry {
                transition: k,
                i: t.i,
                j: t.j,
                height: heights[k],
                slack: ((V_SHRINK - U_SHRINK) * len).min((U_HEIGHT - V_HEIGHT) * heights[k]),
            }
        })
        .collect();
    Ok(ComplexAtlas {
        real: atlas.clone(),
        heights,
        margins,
    })
}

/// Identity, mutual inverses and the triple cocycle `ψ_{i,j} = ψ_{k,j} ∘ ψ_{i,k}` on
/// sampled grids.
pub fn certify_cocycles(ca: &ComplexAtlas, tol: f64) -> Result<CheckReport> {
    let real = &ca.real;
    let ts = &real.transitions;
    let mut report = CheckReport::new("cocycles")
        .param("tolerance", tol)
        .param("grid", GRID)
        .param("identity", "exact by construction");
    for (k, t) in ts.iter().enumerate() {
        let b = real.reverse[k];
        let (r, z) = inverse_residual(&t.map, &ts[b].map, t.overlap, ca.heights[k]);
        report.record(tol - r, || {
            json!({"kind": "inverse", "i": t.i, "j": t.j, "residual": r, "witness": [z.re, z.im]})
        });
    }
    let n = real.charts.len();
    let mut triples = 0;
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                if i == k || k == j || i == j {
                    continue;
                }
                let mut worst: Option<(f64, Complex64)> = None;
                for (a, ta) in ts.iter().enumerate() {
                    if ta.i != i || ta.j != k {
                        continue;
                    }
                    let (re, im) = ca.u_rect(a);
                    for z in rect_grid(re, im, GRID) {
                        let Some(c) = real.component(i, j, z.re) else { continue };
                        if !(z.im.abs() <= U_HEIGHT * ca.heights[c] && inside(z.re, ca.u_rect(c).0)) {
                            continue;
                        }
                        let w = ca.psi(a, z)?;
                        let Some(b) = real.component(k, j, w.re) else { continue };
                        if !ca.in_t_rect(b, w) {
                            continue;
                        }
                        let r = (ca.psi(b, w)? - ca.psi(c, z)?).norm();
                        if worst.is_none_or(|(m, _)| r > m) {
                            worst = Some((r, z));
                        }
                    }
                }
                if let Some((r, z)) = worst {
                    triples += 1;
                    report.record(tol - r, || {
                        json!({"kind": "cocycle", "i": i, "k": k, "j": j, "residual": r, "witness": [z.re, z.im]})
                    });
                }
            }
        }
    }
    report.set_param("triples", triples);
    if triples == 0 {
        report.note("no triple overlaps: cocycle condition vacuous");
    }
    let min_slack = ca.margins.iter().map(|m| m.slack).fold(f64::INFINITY, f64::min);
    report.set_param("min_margin", min_slack);
    if !(min_slack > 0.0) {
        report.record_failure(json!({"kind": "margin", "min_slack": min_slack}));
    }
    Ok(report)
}

fn same_real_atlas(a: &RealAtlas, b: &RealAtlas) -> bool {
    a.charts == b.charts
        && a.transitions.len() == b.transitions.len()
        && a.transitions.iter().zip(&b.transitions).all(|(s, t)| {
            s.i == t.i
                && s.j == t.j
                && s.overlap == t.overlap
                && s.map.pieces.len() == t.map.pieces.len()
                && s.map.pieces.iter().zip(&t.map.pieces).all(|(p, q)| p.coeff_distance(q) <= 1e-15)
        })
}

/// `ψ = id` chartwise between two complexifications of one real atlas: the glued map is
/// well defined iff both atlases' transitions agree on the common strips.
pub fn uniqueness_biholomorphism(ca1: &ComplexAtlas, ca2: &ComplexAtlas, tol: f64) -> Result<CheckReport> {
    if !same_real_atlas(&ca1.real, &ca2.real) {
        return Err(Error::Precondition("atlases complexify different real atlases".into()));
    }
    let mut report = CheckReport::new("uniqueness").param("tolerance", tol);
    let mut common = Vec::with_capacity(ca1.heights.len());
    for (k, t) in ca1.real.transitions.iter().enumerate() {
        let h = ca1.heights[k].min(ca2.heights[k]);
        if !(h > 0.0) {
            return Err(Error::Extension(format!("common strip of ({}, {}) is empty (height {h})", t.i, t.j)));
        }
        common.push(h);
        let mut worst: f64 = 0.0;
        for z in rect_grid(shrink(t.overlap, U_SHRINK), U_HEIGHT * h, GRID) {
            worst = worst.max((ca1.psi(k, z)? - ca2.psi(k, z)?).norm());
        }
        report.record(tol - worst, || json!({"i": t.i, "j": t.j, "residual": worst}));
    }
    report.set_param("common_heights", &common);
    Ok(report)
}

/// Circle `ℝ/2πℤ` with charts `x = g_i(θ) = θ + warp·sin(θ − c_i)` on the arcs
/// `|θ − c_i| < half_width`. With `warp = 0` the transitions are translations.
#[derive(Debug, Clone)]
pub struct WarpedCircle {
    pub warp: f64,
    pub centers: Vec<f64>,
    pub half_width: f64,
}

impl WarpedCircle {
    pub fn new(warp: f64, charts: usize, half_width: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&warp) {
            return Err(Error::Precondition(format!("warp must lie in [0, 1/2), got {warp}")));
        }
        let centers: Vec<f64> = (0..charts).map(|k| TAU * k as f64 / charts as f64).collect();
        if !(half_width < std::f64::consts::PI && 2.0 * (half_width - 0.4) > TAU / charts as f64) {
            return Err(Error::Precondition("arcs do not cover the circle with margin".into()));
        }
        Ok(WarpedCircle {
            warp,
            centers,
            half_width,
        })
    }

    /// Three charts, half-width 2.5, warp 0.25.
    pub fn standard() -> Self {
        WarpedCircle::new(0.25, 3, 2.5).expect("valid parameters")
    }

    pub fn g(&self, i: usize, theta: Complex64) -> Complex64 {
        theta + self.warp * (theta - self.centers[i]).sin()
    }

    pub fn g_inv(&self, i: usize, x: Complex64) -> Complex64 {
        let c = self.centers[i];
        let mut th = x;
        for _ in 0..100 {
            let f = th + self.warp * (th - c).sin() - x;
            let df = 1.0 + self.warp * (th - c).cos();
            let step = f / df;
            th -= step;
            if step.norm() < 1e-16 * (1.0 + th.norm()) {
                break;
            }
        }
        th
    }

    /// Closed-form embedding of chart `i` into the annulus model: `z ↦ e^{i·g_i⁻¹(z)}`.
    pub fn embedding(&self, i: usize, z: Complex64) -> Complex64 {
        (c64(0.0, 1.0) * self.g_inv(i, z)).exp()
    }

    /// Inverse of [`Self::embedding`] on the branch around `c_i`.
    pub fn chart_of(&self, i: usize, w: Complex64) -> Complex64 {
        let c = self.centers[i];
        let theta = c + c64(0.0, -1.0) * (w * c64(0.0, -c).exp()).ln();
        self.g(i, theta)
    }

    /// Radius on which `g_i⁻¹` is holomorphic around real points.
    pub fn analytic_radius(&self) -> f64 {
        if self.warp == 0.0 {
            1.0
        } else {
            (0.5 * (1.0 / self.warp).acosh()).min(1.0)
        }
    }

    fn chart_interval(&self, i: usize, hw: f64) -> Interval {
        let c = self.centers[i];
        (self.g(i, c64(c - hw, 0.0)).re, self.g(i, c64(c + hw, 0.0)).re)
    }

    pub fn atlas(&self, degree: usize) -> Result<RealAtlas> {
        let n = self.centers.len();
        let charts = (0..n)
            .map(|i| Chart {
                interval: self.chart_interval(i, self.half_width),
                u: self.chart_interval(i, self.half_width - 0.2),
                v: self.chart_interval(i, self.half_width - 0.4),
            })
            .collect();
        let mut transitions = Vec::new();
        let hw = self.half_width;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for m in [-1.0, 0.0, 1.0] {
                    let shift = TAU * m;
                    let lo = (self.centers[i] - hw).max(self.centers[j] + shift - hw);
                    let hi = (self.centers[i] + hw).min(self.centers[j] + shift + hw);
                    if lo >= hi {
                        continue;
                    }
                    let overlap = (self.g(i, c64(lo, 0.0)).re, self.g(i, c64(hi, 0.0)).re);
                    let map = if self.warp == 0.0 {
                        PiecewiseSeries::affine(overlap, 1.0, -shift)?
                    } else {
                        let r = self.analytic_radius();
                        PiecewiseSeries::from_analytic(
                            overlap,
                            |z| self.g(j, self.g_inv(i, z) - shift),
                            |_| r,
                            degree,
                            true,
                        )?
                    };
                    transitions.push(Transition { i, j, overlap, map });
                }
            }
        }
        RealAtlas::new(charts, transitions)
    }
}

/// Two stereographic charts of the circle, `x = tan(θ/2)` and `y = tan((θ − π)/2)`, on
/// arcs of half-width 2.6; both overlap components have transition `x ↦ −1/x`.
pub fn stereographic_atlas(degree: usize) -> Result<RealAtlas> {
    let iv = |hw: f64| ((-hw / 2.0).tan(), (hw / 2.0).tan());
    let chart = Chart {
        interval: iv(2.6),
        u: iv(2.5),
        v: iv(2.4),
    };
    let inner = ((std::f64::consts::PI - 2.6) / 2.0).tan();
    let outer = 1.3f64.tan();
    let mut transitions = Vec::new();
    for (i, j) in [(0, 1), (1, 0)] {
        for overlap in [(inner, outer), (-outer, -inner)] {
            let map = PiecewiseSeries::from_analytic(overlap, |z| -1.0 / z, |x| 0.5 * x.abs(), degree, true)?;
            transitions.push(Transition { i, j, overlap, map });
        }
    }
    RealAtlas::new(vec![chart, chart], transitions)
}

/// Series form of the embeddings `chart i → annulus` for a [`WarpedCircle`].
#[derive(Debug, Clone)]
pub struct AnnulusModel {
    circle: WarpedCircle,
    embeddings: Vec<PiecewiseSeries>,
}

impl AnnulusModel {
    pub fn new(circle: WarpedCircle, degree: usize) -> Result<Self> {
        let r = circle.analytic_radius();
        let embeddings = (0..circle.centers.len())
            .map(|i| {
                let iv = circle.chart_interval(i, circle.half_width);
                PiecewiseSeries::from_analytic(iv, |z| circle.embedding(i, z), |_| r, degree, false)
            })
            .collect::<Result<_>>()?;
        Ok(AnnulusModel { circle, embeddings })
    }

    pub fn circle(&self) -> &WarpedCircle {
        &self.circle
    }

    pub fn psi(&self, i: usize, z: Complex64) -> Result<Complex64> {
        self.embeddings[i].eval(z)
    }
}

/// Compares the glued complexification with the annulus model: the chartwise
/// embeddings are the identity on the circle, glue across the extended transitions,
/// are inverted by the closed-form chart maps, and match the closed form.
pub fn annulus_uniqueness_check(ca: &ComplexAtlas, model: &AnnulusModel, tol: f64) -> Result<CheckReport> {
    let charts = ca.real.charts();
    if charts.len() != model.embeddings.len() {
        return Err(Error::Precondition("atlas and annulus model have different charts".into()));
    }
    let real_tol = 1e-12;
    let mut report = CheckReport::new("annulus_uniqueness")
        .param("tolerance", tol)
        .param("real_tolerance", real_tol)
        .param("inverse_tolerance", CERTIFY_TOL);
    let circle = &model.circle;
    let mut chart_heights = Vec::with_capacity(charts.len());
    for (i, chart) in charts.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for s in 0..=50 {
            let x = chart.u.0 + (chart.u.1 - chart.u.0) * s as f64 / 50.0;
            let z = c64(x, 0.0);
            let w = model.psi(i, z)?;
            worst = worst.max((w - circle.embedding(i, z)).norm()).max((w.norm() - 1.0).abs());
        }
        report.record(real_tol - worst, || json!({"kind": "real_identity", "chart": i, "residual": worst}));
        let h = U_HEIGHT * model.embeddings[i].max_height(chart.u).min(0.5);
        chart_heights.push(h);
        let (mut inv, mut oracle): (f64, f64) = (0.0, 0.0);
        for z in rect_grid(chart.u, h, GRID) {
            let w = model.psi(i, z)?;
            inv = inv.max((circle.chart_of(i, w) - z).norm());
            oracle = oracle.max((w - circle.embedding(i, z)).norm());
        }
        report.record(CERTIFY_TOL - inv, || json!({"kind": "inverse", "chart": i, "residual": inv}));
        report.record(tol - oracle, || json!({"kind": "oracle", "chart": i, "residual": oracle}));
    }
    for (k, t) in ca.real.transitions.iter().enumerate() {
        let (re, im) = ca.u_rect(k);
        let mut worst: f64 = 0.0;
        for z in rect_grid(re, im, GRID) {
            worst = worst.max((model.psi(t.j, ca.psi(k, z)?)? - model.psi(t.i, z)?).norm());
        }
        report.record(CERTIFY_TOL - worst, || {
            json!({"kind": "glue", "i": t.i, "j": t.j, "residual": worst})
        });
    }
    report.set_param("chart_heights", &chart_heights);
    Ok(report)
}
