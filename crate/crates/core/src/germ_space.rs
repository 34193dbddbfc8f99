//! Germs of bounded holomorphic maps around a finite anchor set `K ⊂ ℂ^d`.
//!
//! Level `n ≥ 1` uses the neighbourhood `U_n = ⋃_{a∈K} B(a, ρ_n)` with
//! `ρ_n = ρ_0 r^{n−1}`, so the seminorms `p_n = ‖·‖/ρ_n` satisfy `p_n ≤ r p_{n+1}`.
//! An element of `BHol(U_n, Z)` is stored as one truncated series per anchor; the
//! germ space is the direct limit over the restriction (bonding) maps.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::cauchy::{cauchy_extract, dft_coefficients, QUADRATURE_FRACTION};
use crate::coeff::{Coeff, CoefficientSpace};
use crate::error::{Error, Result};
use crate::random::{random_coeff_with_norm, substream};
use crate::report::CheckReport;
use crate::series::{dist, exponents, sphere_points, TruncatedSeries, DEFAULT_DEGREE};

pub const DEFAULT_RATIO: f64 = 0.1;
/// Coefficientwise tolerance for germ equality and overlap coherence.
pub const GERM_TOL: f64 = 1e-9;
/// Quadrature nodes per circle used by [`factorize`] in one variable.
pub const FACTORIZE_NODES: usize = 256;

/// `1/(2e)`, the strict upper bound for the level ratio.
pub fn ratio_limit() -> f64 {
    1.0 / (2.0 * std::f64::consts::E)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GermSpace {
    anchors: Vec<Vec<Complex64>>,
    base_radius: f64,
    ratio: f64,
    levels: usize,
    space: CoefficientSpace,
    degree_bound: usize,
}

impl GermSpace {
    pub fn new(
        anchors: Vec<Vec<Complex64>>,
        base_radius: f64,
        ratio: f64,
        levels: usize,
        space: CoefficientSpace,
        degree_bound: usize,
    ) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::Structural("anchor set K is empty".into()));
        }
        let d = anchors[0].len();
        if !(d == 1 || d == 2) || anchors.iter().any(|a| a.len() != d) {
            return Err(Error::Structural("anchors must share dimension 1 or 2".into()));
        }
        if !(ratio > 0.0 && ratio < ratio_limit()) {
            return Err(Error::Precondition(format!(
                "ratio r = {ratio} must lie in (0, 1/(2e)) = (0, {:.6})",
                ratio_limit()
            )));
        }
        if !(base_radius > 0.0) || !base_radius.is_finite() {
            return Err(Error::Precondition(format!("invalid base radius {base_radius}")));
        }
        if levels == 0 {
            return Err(Error::Precondition("need at least one level".into()));
        }
        Ok(GermSpace {
            anchors,
            base_radius,
            ratio,
            levels,
            space,
            degree_bound,
        })
    }

    /// Single anchor at the origin of ℂ with the default ratio and degree.
    pub fn origin(space: CoefficientSpace, levels: usize) -> Self {
        Self::new(
            vec![vec![Complex64::new(0.0, 0.0)]],
            1.0,
            DEFAULT_RATIO,
            levels,
            space,
            DEFAULT_DEGREE,
        )
        .expect("default parameters are valid")
    }

    pub fn anchors(&self) -> &[Vec<Complex64>] {
        &self.anchors
    }
    pub fn dim(&self) -> usize {
        self.anchors[0].len()
    }
    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }
    pub fn ratio(&self) -> f64 {
        self.ratio
    }
    pub fn levels(&self) -> usize {
        self.levels
    }
    pub fn space(&self) -> CoefficientSpace {
        self.space
    }
    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.levels {
            return Err(Error::Structural(format!(
                "level {n} outside 1..={}",
                self.levels
            )));
        }
        Ok(())
    }

    /// `ρ_n`.
    pub fn radius(&self, n: usize) -> f64 {
        self.base_radius * self.ratio.powi(n as i32 - 1)
    }

    /// Whether `x ∈ U_n`.
    pub fn contains(&self, n: usize, x: &[Complex64]) -> bool {
        let rho = self.radius(n);
        self.anchors.iter().any(|a| dist(a, x) < rho)
    }

    /// Index of the anchor closest to `x`.
    pub fn nearest_anchor(&self, x: &[Complex64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, a) in self.anchors.iter().enumerate() {
            let d = dist(a, x);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    pub fn zero(&self, n: usize) -> Result<BHolElement> {
        self.check_level(n)?;
        let reps = self
            .anchors
            .iter()
            .map(|a| TruncatedSeries::zero(self.space, a.clone(), self.degree_bound, self.radius(n)))
            .collect();
        self.element(n, reps)
    }

    /// Wraps per-anchor series as an element of `BHol(U_n, Z)`. Series with a larger
    /// radius are restricted; overlapping anchor balls must agree.
    pub fn element(&self, n: usize, reps: Vec<TruncatedSeries>) -> Result<BHolElement> {
        self.check_level(n)?;
        if reps.len() != self.anchors.len() {
            return Err(Error::Structural(format!(
                "{} representatives for {} anchors",
                reps.len(),
                self.anchors.len()
            )));
        }
        let rho = self.radius(n);
        let mut restricted = Vec::with_capacity(reps.len());
        for (s, a) in reps.iter().zip(&self.anchors) {
            if s.anchor() != a.as_slice() {
                return Err(Error::Structural(format!(
                    "representative anchored at {:?}, expected {a:?}",
                    s.anchor()
                )));
            }
            if s.space() != self.space {
                return Err(Error::Structural("coefficient space mismatch".into()));
            }
            restricted.push(s.restrict(rho)?);
        }
        let coherence = coherence_residual(&restricted, rho);
        if coherence > 0.0 {
            return Err(Error::Glue(format!(
                "anchor representatives disagree on an overlap by {coherence:.3e} beyond tolerance"
            )));
        }
        let norm_upper = majorant_over(&restricted, rho)?;
        Ok(BHolElement {
            level: n,
            reps: restricted,
            norm_upper,
        })
    }

    /// Element given by one series per anchor obtained by re-expanding a global
    /// polynomial `p` (its ball must contain every anchor ball at level `n`).
    pub fn element_from_global(&self, n: usize, p: &TruncatedSeries) -> Result<BHolElement> {
        let rho = self.radius(n);
        let reps = self
            .anchors
            .iter()
            .map(|a| p.recenter(a, rho))
            .collect::<Result<Vec<_>>>()?;
        self.element(n, reps)
    }

    /// Restriction `ι: BHol(U_m) → BHol(U_n)` for `n ≥ m`.
    pub fn bond(&self, e: &BHolElement, n: usize) -> Result<BHolElement> {
        if n < e.level {
            return Err(Error::Structural(format!(
                "cannot bond level {} to shallower level {n}",
                e.level
            )));
        }
        self.check_level(n)?;
        if n == e.level {
            return Ok(e.clone());
        }
        let rho = self.radius(n);
        let reps = e
            .reps
            .iter()
            .map(|s| s.restrict(rho))
            .collect::<Result<Vec<_>>>()?;
        let norm_upper = majorant_over(&reps, rho)?.min(e.norm_upper);
        Ok(BHolElement {
            level: n,
            reps,
            norm_upper,
        })
    }

    pub fn germ(&self, e: BHolElement) -> Germ {
        Germ { element: e }
    }

    /// Level-free germ equality: bond to the deeper level and compare coefficients.
    pub fn germ_eq(&self, a: &Germ, b: &Germ) -> Result<bool> {
        let n = a.level().max(b.level());
        let ea = self.bond(&a.element, n)?;
        let eb = self.bond(&b.element, n)?;
        Ok(ea
            .reps
            .iter()
            .zip(&eb.reps)
            .all(|(x, y)| x.coeff_distance(y) <= GERM_TOL))
    }

    /// Recovers the per-anchor series of a bounded holomorphic `f` on `U_n` from
    /// Cauchy integrals. The tail bound is estimated from the residual sampled on the
    /// sphere of radius `0.95 ρ_n`.
    pub fn factorize<F>(&self, n: usize, f: F) -> Result<BHolElement>
    where
        F: Fn(&[Complex64]) -> Coeff,
    {
        self.check_level(n)?;
        let rho = self.radius(n);
        let nd = self.degree_bound;
        let mut reps = Vec::with_capacity(self.anchors.len());
        for a in &self.anchors {
            let (entries, sample_sup) = if self.dim() == 1 {
                let q = FACTORIZE_NODES.max(4 * nd.max(1));
                let c = cauchy_extract(&f, a, &[Complex64::new(1.0, 0.0)], rho, nd, q)?;
                let sup = c.sample_sup;
                let entries: Vec<_> = c.coeffs.into_iter().enumerate().map(|(k, b)| ([k, 0], b)).collect();
                (entries, sup)
            } else {
                torus_coefficients(&f, a, rho, nd)?
            };
            for (_, c) in &entries {
                self.space.check(c)?;
            }
            let s = TruncatedSeries::from_entries(self.space, a.clone(), nd, rho, entries, 0.0)?;
            check_interior_consistency(&f, &s, rho, sample_sup)?;
            let tail = residual_sup(&f, &s, 0.95 * rho);
            reps.push(s.with_tail(tail));
        }
        self.element(n, reps)
    }
}

/// Coefficients on a polydisc of polyradius `0.8ρ/√2` (inside the ball), two-dimensional DFT.
fn torus_coefficients<F>(
    f: &F,
    a: &[Complex64],
    rho: f64,
    nd: usize,
) -> Result<(Vec<([usize; 2], Coeff)>, f64)>
where
    F: Fn(&[Complex64]) -> Coeff,
{
    let q = (4 * nd.max(1)).max(32);
    let s = QUADRATURE_FRACTION * rho / std::f64::consts::SQRT_2;
    let tau = std::f64::consts::TAU;
    // Inner DFT along the second axis for each node of the first.
    let mut rows: Vec<Vec<Coeff>> = Vec::with_capacity(q);
    let mut sup: f64 = 0.0;
    for j in 0..q {
        let z0 = a[0] + Complex64::from_polar(s, tau * j as f64 / q as f64);
        let mut samples = Vec::with_capacity(q);
        for k in 0..q {
            let z1 = a[1] + Complex64::from_polar(s, tau * k as f64 / q as f64);
            let v = f(&[z0, z1]);
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Evaluation(format!("non-finite sample at ({z0}, {z1})")));
            }
            samples.push(v);
        }
        let c = dft_coefficients(&samples, s, nd);
        sup = sup.max(c.sample_sup);
        rows.push(c.coeffs);
    }
    let mut entries = Vec::new();
    for e1 in 0..=nd {
        let column: Vec<Coeff> = rows.iter().map(|r| r[e1].clone()).collect();
        let c = dft_coefficients(&column, s, nd - e1);
        for (e0, b) in c.coeffs.into_iter().enumerate() {
            entries.push(([e0, e1], b));
        }
    }
    Ok((entries, sup))
}

/// Sample points filling the ball: spheres at a few fractions of `rho`.
pub fn ball_points(anchor: &[Complex64], rho: f64, per_sphere: usize) -> Vec<Vec<Complex64>> {
    let mut pts = vec![anchor.to_vec()];
    for frac in [0.25, 0.5, 0.75, 1.0] {
        pts.extend(sphere_points(anchor, rho * frac, per_sphere));
    }
    pts
}

fn residual_sup<F>(f: &F, s: &TruncatedSeries, rho: f64) -> f64
where
    F: Fn(&[Complex64]) -> Coeff,
{
    sphere_points(s.anchor(), rho, 128)
        .iter()
        .map(|p| s.space().norm(&(f(p) - s.eval(p))))
        .fold(0.0, f64::max)
}

/// The reconstruction must match `f` inside the quadrature circle up to the Cauchy
/// tail estimate; otherwise `f` is not bounded holomorphic on the claimed ball.
fn check_interior_consistency<F>(f: &F, s: &TruncatedSeries, rho: f64, sample_sup: f64) -> Result<()>
where
    F: Fn(&[Complex64]) -> Coeff,
{
    let rq = QUADRATURE_FRACTION * rho;
    let inner = 0.6 * rho;
    let t: f64 = inner / rq;
    let nd = s.degree_bound() as i32;
    // Frobenius sample sup dominates the space norm up to a factor 2 for matrices.
    let bound = 2.0 * sample_sup * t.powi(nd + 1) / (1.0 - t) + 1e-8 * (1.0 + sample_sup);
    let worst = residual_sup(f, s, inner);
    if !(worst <= bound) {
        return Err(Error::NotBoundedHolomorphic(format!(
            "residual {worst:.3e} at radius {inner:.4} exceeds the Cauchy estimate {bound:.3e}"
        )));
    }
    Ok(())
}

/// Largest amount by which overlapping representatives disagree beyond
/// `GERM_TOL + τ_i + τ_j` (0 when coherent).
fn coherence_residual(reps: &[TruncatedSeries], rho: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            let (a, b) = (reps[i].anchor(), reps[j].anchor());
            if dist(a, b) >= 2.0 * rho {
                continue;
            }
            let allowed = GERM_TOL + reps[i].tail_bound() + reps[j].tail_bound();
            for p in overlap_points(a, b, rho) {
                let diff = reps[i].space().norm(&(reps[i].eval(&p) - reps[j].eval(&p)));
                worst = worst.max(diff - allowed);
            }
        }
    }
    worst
}

fn overlap_points(a: &[Complex64], b: &[Complex64], rho: f64) -> Vec<Vec<Complex64>> {
    let inside = 0.95 * rho;
    let mut pts: Vec<Vec<Complex64>> = ball_points(a, inside, 32)
        .into_iter()
        .filter(|p| dist(p, b) < inside)
        .collect();
    let mid: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| (x + y) * 0.5).collect();
    if dist(&mid, a) < inside {
        pts.push(mid);
    }
    pts
}

fn majorant_over(reps: &[TruncatedSeries], rho: f64) -> Result<f64> {
    let mut m: f64 = 0.0;
    for s in reps {
        m = m.max(s.majorant_norm(rho)?);
    }
    Ok(m)
}

/// An element of `BHol(U_n, Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BHolElement {
    level: usize,
    reps: Vec<TruncatedSeries>,
    norm_upper: f64,
}

impl BHolElement {
    pub fn level(&self) -> usize {
        self.level
    }
    pub fn reps(&self) -> &[TruncatedSeries] {
        &self.reps
    }
    /// Majorant upper bound for the sup norm over `U_n`.
    pub fn norm_upper(&self) -> f64 {
        self.norm_upper
    }
    /// Sampled lower bound for the sup norm over `U_n`.
    pub fn norm_lower(&self, samples: usize) -> Result<f64> {
        let mut m: f64 = 0.0;
        for s in &self.reps {
            m = m.max(s.sample_sup(s.radius(), samples)? - s.tail_bound());
        }
        Ok(m.max(0.0))
    }

    /// Value at `x`, using the representative of the nearest anchor.
    pub fn eval(&self, x: &[Complex64]) -> Result<Coeff> {
        let mut best: Option<(&TruncatedSeries, f64)> = None;
        for s in &self.reps {
            let d = dist(s.anchor(), x);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((s, d));
            }
        }
        let (s, d) = best.expect("elements have at least one representative");
        if d >= s.radius() {
            return Err(Error::Domain(format!("point {x:?} is outside U_{}", self.level)));
        }
        Ok(s.eval(x))
    }
}

/// A germ around `K`, represented at some level.
#[derive(Debug, Clone, PartialEq)]
pub struct Germ {
    element: BHolElement,
}

impl Germ {
    pub fn level(&self) -> usize {
        self.element.level
    }
    pub fn element(&self) -> &BHolElement {
        &self.element
    }
    pub fn into_element(self) -> BHolElement {
        self.element
    }
}

/// `s_k = max ‖c_k‖` over the family and anchors, with the largest tail bound and the
/// smallest representative radius.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSups {
    pub s: Vec<f64>,
    pub tail: f64,
    pub radius: f64,
}

impl DerivativeSups {
    /// `Σ s_k r^k` plus the certified contribution of the tails,
    /// `Σ_k τ (r/R)^k = τ R/(R − r)`.
    pub fn weighted_sum(&self, r: f64) -> f64 {
        let poly: f64 = self
            .s
            .iter()
            .enumerate()
            .map(|(k, s)| s * r.powi(k as i32))
            .sum();
        let big_r = self.radius;
        poly + self.tail * big_r / (big_r - r)
    }
}

pub fn derivative_sups(family: &[BHolElement]) -> Result<DerivativeSups> {
    if family.is_empty() {
        return Err(Error::Structural("derivative_sups of an empty family".into()));
    }
    let mut s: Vec<f64> = Vec::new();
    let mut tail: f64 = 0.0;
    let mut radius = f64::INFINITY;
    for e in family {
        for rep in &e.reps {
            let m = rep.degree_norms();
            if m.len() > s.len() {
                s.resize(m.len(), 0.0);
            }
            for (acc, v) in s.iter_mut().zip(&m) {
                *acc = acc.max(*v);
            }
            tail = tail.max(rep.tail_bound());
            radius = radius.min(rep.radius());
        }
    }
    Ok(DerivativeSups { s, tail, radius })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeSumOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub sup_lower: f64,
    pub passed: bool,
}

/// `Σ_k s_k r^k ≤ R/(R − 2er) · sup_γ ‖γ‖_∞`, checked with an upper bound on the left
/// and a sampled lower bound of the sup on the right; requires `r < R/(2e)`.
pub fn derivative_sum_check(family: &[BHolElement], big_r: f64, r: f64) -> Result<DerivativeSumOutcome> {
    if !(r > 0.0 && r < big_r / (2.0 * std::f64::consts::E)) {
        return Err(Error::Precondition(format!(
            "r = {r} must lie in (0, R/(2e)) = (0, {:.6})",
            big_r / (2.0 * std::f64::consts::E)
        )));
    }
    derivative_sum_evaluate(family, big_r, r)
}

/// The same comparison without the precondition.
pub fn derivative_sum_evaluate(family: &[BHolElement], big_r: f64, r: f64) -> Result<DerivativeSumOutcome> {
    let sups = derivative_sups(family)?;
    if sups.radius < big_r * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "family is only known on radius {} < R = {big_r}",
            sups.radius
        )));
    }
    if r >= big_r {
        return Err(Error::Domain(format!("r = {r} must be below R = {big_r}")));
    }
    let sups = DerivativeSups { radius: big_r, ..sups };
    let lhs = sups.weighted_sum(r);
    let mut sup_lower: f64 = 0.0;
    for e in family {
        for rep in &e.reps {
            let s = rep.sample_sup(big_r, 256)? - rep.tail_bound();
            sup_lower = sup_lower.max(s);
        }
    }
    let factor = big_r / (big_r - 2.0 * std::f64::consts::E * r);
    let rhs = factor * sup_lower;
    let passed = factor > 0.0 && lhs <= rhs * (1.0 + 1e-12) + 1e-14;
    Ok(DerivativeSumOutcome {
        lhs,
        rhs,
        sup_lower,
        passed,
    })
}

/// Whether an element lies in the closed ball of the given radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BallMembership {
    /// The majorant is within the radius.
    Inside,
    /// A sampled value exceeds the radius.
    Outside,
    Undetermined,
}

pub fn classify_ball(e: &BHolElement, radius: f64) -> Result<BallMembership> {
    if e.norm_upper() <= radius {
        Ok(BallMembership::Inside)
    } else if e.norm_lower(256)? > radius {
        Ok(BallMembership::Outside)
    } else {
        Ok(BallMembership::Undetermined)
    }
}

/// How `δ` is chosen from `k0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    /// `δ = (1 − 2er) r^{k0} ε/2`.
    Standard,
    /// `δ = (ε/2) / Σ_{k≤k0} (ρ_{n+1}/ρ_ℓ)^k`, from the Cauchy estimate on `E_ℓ`.
    Cauchy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityPlan {
    pub k0: Option<usize>,
    pub delta: f64,
    /// Certified bound for `Σ_{k>k0} s_k r^k` (normalized units).
    pub tail_at_k0: f64,
    /// Normalized derivative sups `s_k ρ_n^k` of the generated test family.
    pub s: Vec<f64>,
}

/// Largest sup over `E_{n+1}` among nonnegative one-variable polynomials in both balls,
/// found by enumerating the vertices of the linear program
/// `max Σ c_k r^k  s.t.  Σ c_k ≤ 1, Σ c_k q^k ≤ δ, c ≥ 0` (normalized units).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalProbe {
    pub value: f64,
    /// `(k, c_k)` of the maximizing vertex.
    pub witness: Vec<(usize, f64)>,
}

pub fn extremal_probe(r: f64, q: f64, delta: f64, degree: usize) -> ExtremalProbe {
    let mut best = ExtremalProbe {
        value: 0.0,
        witness: vec![],
    };
    for k in 0..=degree {
        let c = 1f64.min(delta / q.powi(k as i32));
        let v = c * r.powi(k as i32);
        if v > best.value {
            best = ExtremalProbe {
                value: v,
                witness: vec![(k, c)],
            };
        }
    }
    for i in 0..=degree {
        for j in (i + 1)..=degree {
            let (qi, qj) = (q.powi(i as i32), q.powi(j as i32));
            let cj = (delta - qi) / (qj - qi);
            let ci = 1.0 - cj;
            if ci < 0.0 || cj < 0.0 {
                continue;
            }
            let v = ci * r.powi(i as i32) + cj * r.powi(j as i32);
            if v > best.value {
                best = ExtremalProbe {
                    value: v,
                    witness: vec![(i, ci), (j, cj)],
                };
            }
        }
    }
    best
}

impl GermSpace {
    fn check_anchor_balls_disjoint(&self, n: usize) -> Result<()> {
        let rho = self.radius(n);
        for i in 0..self.anchors.len() {
            for j in (i + 1)..self.anchors.len() {
                if dist(&self.anchors[i], &self.anchors[j]) < 2.0 * rho {
                    return Err(Error::Precondition(format!(
                        "anchor balls {i} and {j} overlap at level {n}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Element at level `n` that is `p` on anchor `i` and zero on the other
    /// (disjoint) anchor balls.
    fn single_anchor_element(&self, n: usize, i: usize, p: TruncatedSeries) -> Result<BHolElement> {
        let rho = self.radius(n);
        let reps = self
            .anchors
            .iter()
            .enumerate()
            .map(|(j, a)| {
                if j == i {
                    p.clone()
                } else {
                    TruncatedSeries::zero(self.space, a.clone(), self.degree_bound, rho)
                }
            })
            .collect();
        self.element(n, reps)
    }

    /// Series at anchor `i` with normalized coefficients `c_e`, i.e.
    /// `Σ c_e ((z − a)/ρ_n)^e`, radius `ρ_n`.
    fn normalized_series(
        &self,
        n: usize,
        i: usize,
        entries: Vec<([usize; 2], Coeff)>,
    ) -> Result<TruncatedSeries> {
        let rho = self.radius(n);
        let scaled = entries.into_iter().map(|(e, c)| {
            let w = rho.powi(-((e[0] + e[1]) as i32));
            (e, c * Complex64::new(w, 0.0))
        });
        TruncatedSeries::from_entries(
            self.space,
            self.anchors[i].clone(),
            self.degree_bound,
            rho,
            scaled,
            0.0,
        )
    }

    /// Finds `k0` and `δ` from a unit-norm test family at level `n`: the monomials
    /// `((z−a)/ρ_n)^k` together with `family_size` random polynomials.
    pub fn regularity_plan<R: Rng + ?Sized>(
        &self,
        n: usize,
        ell: usize,
        eps: f64,
        rule: DeltaRule,
        family_size: usize,
        rng: &mut R,
    ) -> Result<RegularityPlan> {
        self.check_level(n)?;
        self.check_level(ell)?;
        if ell < n + 1 {
            return Err(Error::Precondition(format!("need ℓ ≥ n + 1, got n = {n}, ℓ = {ell}")));
        }
        if !(eps > 0.0) {
            return Err(Error::Precondition(format!("ε must be positive, got {eps}")));
        }
        self.check_anchor_balls_disjoint(n)?;
        let nd = self.degree_bound;
        let d = self.dim();
        let unit = random_coeff_with_norm(rng, self.space, 1.0);
        let mut family = Vec::new();
        for k in 0..=nd {
            let p = self.normalized_series(n, 0, vec![([k, 0], unit.clone())])?;
            family.push(self.single_anchor_element(n, 0, p)?);
        }
        for t in 0..family_size {
            let i = t % self.anchors.len();
            let entries: Vec<_> = exponents(d, nd)
                .into_iter()
                .map(|e| {
                    let w = rng.random::<f64>();
                    (e, random_coeff_with_norm(rng, self.space, w))
                })
                .collect();
            let p = self.normalized_series(n, i, entries)?;
            let m = p.majorant_norm(p.radius())?;
            family.push(self.single_anchor_element(n, i, p.scale(Complex64::new(1.0 / m, 0.0)))?);
        }
        let sups = derivative_sups(&family)?;
        let rho = self.radius(n);
        let s: Vec<f64> = sups
            .s
            .iter()
            .enumerate()
            .map(|(k, v)| v * rho.powi(k as i32))
            .collect();
        let r = self.ratio;
        // Cauchy: a unit-norm element has normalized coefficients ≤ 1 beyond the truncation.
        let beyond = r.powi(nd as i32 + 1) / (1.0 - r);
        let mut k0 = None;
        let mut tail_at_k0 = f64::INFINITY;
        for k in 0..=nd {
            let tail: f64 = (k + 1..=nd).map(|j| s[j] * r.powi(j as i32)).sum::<f64>() + beyond;
            if tail <= eps / 2.0 {
                k0 = Some(k);
                tail_at_k0 = tail;
                break;
            }
        }
        let delta = match (k0, rule) {
            (None, _) => 0.0,
            (Some(k), DeltaRule::Standard) => {
                (1.0 - 2.0 * std::f64::consts::E * r) * r.powi(k as i32) * eps / 2.0
            }
            (Some(k), DeltaRule::Cauchy) => {
                let ratio = self.radius(n + 1) / self.radius(ell);
                let sum: f64 = (0..=k).map(|j| ratio.powi(j as i32)).sum();
                eps / 2.0 / sum
            }
        };
        Ok(RegularityPlan {
            k0,
            delta,
            tail_at_k0,
            s,
        })
    }

    /// Property test of `B̄_1(E_n) ∩ B̄_δ(E_ℓ) ⊆ B̄_ε(E_{n+1})` on random elements.
    ///
    /// Trials cycle through dense random polynomials and sparse polynomials with two
    /// or three low-degree terms along a common direction and magnitudes spread over
    /// four decades. Each trial is scaled into both balls using majorants; a
    /// counterexample needs a sampled value (a lower bound of the sup) above `ε`.
    #[allow(clippy::too_many_arguments)]
    pub fn compact_regularity_check(
        &self,
        n: usize,
        ell: usize,
        eps: f64,
        rule: DeltaRule,
        trials: usize,
        seed: u64,
    ) -> Result<CheckReport> {
        let mut rng = substream(seed, u64::MAX);
        let plan = self.regularity_plan(n, ell, eps, rule, 32, &mut rng)?;
        let mut report = CheckReport::new("compact_regularity")
            .param("n", n)
            .param("l", ell)
            .param("eps", eps)
            .param("r", self.ratio)
            .param("degree_bound", self.degree_bound)
            .param("delta_rule", rule)
            .param("k0", plan.k0)
            .param("delta", plan.delta);
        let Some(_) = plan.k0 else {
            report.note("inconclusive: no k0 within the degree bound");
            return Ok(report);
        };
        let q = self.radius(ell) / self.radius(n);
        let probe = extremal_probe(self.ratio, q, plan.delta, self.degree_bound);
        report.set_param("extremal_probe_value", probe.value);
        report.set_param("extremal_probe_witness", &probe.witness);
        if probe.value > eps {
            report.note(format!(
                "extremal probe: the element Σ c_k u^k with (k, c_k) = {:?} lies in both balls and has sup {:.6} > ε on E_{}",
                probe.witness,
                probe.value,
                n + 1
            ));
        }
        let rho_m = self.radius(n + 1);
        let rho_l = self.radius(ell);
        let low = 4.min(self.degree_bound);
        for t in 0..trials {
            let mut rng = substream(seed, t as u64);
            let i = t % self.anchors.len();
            let entries = match t % 3 {
                0 => exponents(self.dim(), self.degree_bound)
                    .into_iter()
                    .map(|e| {
                        let w = rng.random::<f64>();
                        (e, random_coeff_with_norm(&mut rng, self.space, w))
                    })
                    .collect::<Vec<_>>(),
                kind => {
                    let dir = random_coeff_with_norm(&mut rng, self.space, 1.0);
                    let mut degs: Vec<usize> = (0..=low).collect();
                    let mut out = Vec::new();
                    for _ in 0..(kind + 1).min(degs.len()) {
                        let k = degs.remove(rng.random_range(0..degs.len()));
                        let mag = 10f64.powf(-4.0 * rng.random::<f64>());
                        out.push(([k, 0], dir.clone() * Complex64::new(mag, 0.0)));
                    }
                    out
                }
            };
            let p = self.normalized_series(n, i, entries)?;
            let m_n = p.majorant_norm(p.radius())?;
            let m_l = p.majorant_norm(rho_l)?;
            if m_n == 0.0 {
                report.record(eps, || json!({}));
                continue;
            }
            let lambda = (1.0 / m_n).min(plan.delta / m_l);
            let e = self.single_anchor_element(n, i, p.scale(Complex64::new(lambda, 0.0)))?;
            let in_n = classify_ball(&e, 1.0 + 1e-12)?;
            let in_l = classify_ball(&self.bond(&e, ell)?, plan.delta * (1.0 + 1e-12))?;
            if in_n != BallMembership::Inside || in_l != BallMembership::Inside {
                report.record_failure(json!({"trial": t, "error": "generated element outside the hypothesis balls"}));
                continue;
            }
            let em = self.bond(&e, n + 1)?;
            let lower = em.reps()[i].sample_sup(rho_m, 256)?;
            report.record(eps - lower, || {
                json!({
                    "trial": t,
                    "sup_lower_bound": lower,
                    "majorant": em.norm_upper(),
                    "norm_n": e.norm_upper(),
                    "norm_l": m_l * lambda,
                })
            });
        }
        Ok(report)
    }
}

/// Glues elements given on pieces `K′, K″, …` of the anchor set of `union`.
/// Shared anchors must carry equal series and overlapping balls must agree.
pub fn glue(union: &GermSpace, n: usize, pieces: &[&BHolElement]) -> Result<BHolElement> {
    let mut reps = Vec::with_capacity(union.anchors.len());
    for a in &union.anchors {
        let mut found: Option<&TruncatedSeries> = None;
        for piece in pieces {
            if piece.level != n {
                return Err(Error::Structural(format!(
                    "piece at level {} glued at level {n}",
                    piece.level
                )));
            }
            for s in &piece.reps {
                if s.anchor() == a.as_slice() {
                    if let Some(prev) = found {
                        let dd = prev.coeff_distance(s);
                        if dd > GERM_TOL {
                            return Err(Error::Glue(format!(
                                "pieces disagree at anchor {a:?} by {dd:.3e}"
                            )));
                        }
                    }
                    found = Some(s);
                }
            }
        }
        match found {
            Some(s) => reps.push(s.clone()),
            None => return Err(Error::Structural(format!("no piece covers anchor {a:?}"))),
        }
    }
    union.element(n, reps)
}

/// Splits `K = K′ ∪ K″`, extends a global polynomial to each piece, glues the
/// pieces back and compares with the polynomial. When the pieces touch, an
/// incompatible pair is also glued and must be rejected.
#[allow(clippy::too_many_arguments)]
pub fn union_strategy_check(
    k1: &[Vec<Complex64>],
    k2: &[Vec<Complex64>],
    base_radius: f64,
    ratio: f64,
    level: usize,
    space: CoefficientSpace,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let mut all: Vec<Vec<Complex64>> = k1.to_vec();
    for a in k2 {
        if !all.contains(a) {
            all.push(a.clone());
        }
    }
    let nd = 8;
    let s1 = GermSpace::new(k1.to_vec(), base_radius, ratio, level, space, nd)?;
    let s2 = GermSpace::new(k2.to_vec(), base_radius, ratio, level, space, nd)?;
    let su = GermSpace::new(all.clone(), base_radius, ratio, level, space, nd)?;
    let rho = su.radius(level);
    let d = su.dim();
    let centre: Vec<Complex64> = (0..d)
        .map(|i| all.iter().map(|a| a[i]).sum::<Complex64>() / all.len() as f64)
        .collect();
    let big = all.iter().map(|a| dist(a, &centre)).fold(0.0, f64::max) + rho;
    let big = 2.0 * big.max(1.0);
    let mut report = CheckReport::new("union_strategy")
        .param("k1", k1.len())
        .param("k2", k2.len())
        .param("level", level)
        .param("rho", rho);
    let touching = k1
        .iter()
        .any(|a| k2.iter().any(|b| dist(a, b) < 2.0 * rho));
    for t in 0..trials {
        let mut rng = substream(seed, t as u64);
        let entries: Vec<_> = exponents(d, 5)
            .into_iter()
            .map(|e| {
                let w = big.powi(-((e[0] + e[1]) as i32));
                (e, random_coeff_with_norm(&mut rng, space, w))
            })
            .collect();
        let p = TruncatedSeries::from_entries(space, centre.clone(), nd, big, entries, 0.0)?;
        let e1 = s1.element_from_global(level, &p)?;
        let e2 = s2.element_from_global(level, &p)?;
        let glued = match glue(&su, level, &[&e1, &e2]) {
            Ok(g) => g,
            Err(err) => {
                report.record_failure(json!({"trial": t, "error": err.to_string()}));
                continue;
            }
        };
        let mut worst: f64 = 0.0;
        for a in &all {
            for x in ball_points(a, 0.9 * rho, 16) {
                let diff = space.norm(&(glued.eval(&x)? - p.eval(&x)));
                worst = worst.max(diff / space.norm(&p.eval(&x)).max(1.0));
            }
        }
        for piece in [&e1, &e2] {
            for rep in piece.reps() {
                let idx = su.anchors.iter().position(|a| a.as_slice() == rep.anchor());
                let g = &glued.reps()[idx.expect("union contains every piece anchor")];
                worst = worst.max(g.coeff_distance(rep));
            }
        }
        report.record(1e-10 - worst, || json!({"trial": t, "residual": worst}));
        if touching && t == 0 {
            let shifted = p.add(&TruncatedSeries::constant(
                space,
                centre.clone(),
                nd,
                big,
                random_coeff_with_norm(&mut rng, space, 1.0),
            )?)?;
            let bad = s2.element_from_global(level, &shifted)?;
            match glue(&su, level, &[&e1, &bad]) {
                Err(Error::Glue(_)) => report.note("incompatible pieces rejected"),
                other => report.record_failure(json!({
                    "trial": t,
                    "error": format!("incompatible pieces were not rejected: {:?}", other.map(|_| ()))
                })),
            }
        }
    }
    if !touching {
        report.note("pieces are separated at this level; glueing is a product");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_series;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
    fn scalar(z: Complex64) -> Coeff {
        DMatrix::from_element(1, 1, z)
    }
    fn origin_space() -> GermSpace {
        GermSpace::origin(CoefficientSpace::Scalar, 5)
    }

    #[test]
    fn rejects_ratio_at_or_above_limit() {
        let r = GermSpace::new(
            vec![vec![c(0.0, 0.0)]],
            1.0,
            ratio_limit(),
            3,
            CoefficientSpace::Scalar,
            8,
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
        assert!(matches!(
            GermSpace::new(vec![], 1.0, 0.1, 3, CoefficientSpace::Scalar, 8),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn radii_shrink_by_ratio() {
        let s = origin_space();
        assert_eq!(s.radius(1), 1.0);
        assert!((s.radius(3) - 0.01).abs() < 1e-15);
        assert!(s.contains(2, &[c(0.05, 0.05)]));
        assert!(!s.contains(2, &[c(0.1, 0.0)]));
    }

    #[test]
    fn bond_identity_and_errors() {
        let s = origin_space();
        let e = s
            .element(
                2,
                vec![TruncatedSeries::identity(CoefficientSpace::Scalar, vec![c(0.0, 0.0)], 12, 0.1)
                    .unwrap()],
            )
            .unwrap();
        assert_eq!(s.bond(&e, 2).unwrap(), e);
        let deeper = s.bond(&e, 4).unwrap();
        assert_eq!(deeper.norm_upper(), e.norm_upper());
        assert!(matches!(s.bond(&deeper, 2), Err(Error::Structural(_))));
    }

    #[test]
    fn bonding_is_contractive() {
        let s = GermSpace::origin(CoefficientSpace::Matrix(2), 4);
        for t in 0..1000 {
            let mut rng = substream(21, t);
            let (maj, decay) = (rng.random_range(0.1..3.0), rng.random_range(0.2..1.5));
            let p = random_series(
                &mut rng,
                CoefficientSpace::Matrix(2),
                vec![c(0.0, 0.0)],
                12,
                12,
                1.0,
                maj,
                decay,
            )
            .with_tail(rng.random_range(0.0..1e-3));
            let e = s.element(1, vec![p]).unwrap();
            let mut prev = e.norm_upper();
            for n in 2..=4 {
                let b = s.bond(&e, n).unwrap();
                assert!(b.norm_upper() <= prev);
                assert!(b.reps()[0].tail_bound() <= e.reps()[0].tail_bound());
                prev = b.norm_upper();
            }
        }
    }

    #[test]
    fn germ_equality_is_level_free() {
        let s = origin_space();
        let mut rng = substream(22, 0);
        let p = random_series(&mut rng, CoefficientSpace::Scalar, vec![c(0.0, 0.0)], 12, 6, 1.0, 1.0, 0.5);
        let a = s.germ(s.element(1, vec![p.clone()]).unwrap());
        let b = s.germ(s.element(3, vec![p.clone()]).unwrap());
        assert!(s.germ_eq(&a, &b).unwrap());
        let q = p.add(&TruncatedSeries::constant(CoefficientSpace::Scalar, vec![c(0.0, 0.0)], 12, 1.0, scalar(c(1e-6, 0.0))).unwrap()).unwrap();
        let d = s.germ(s.element(2, vec![q]).unwrap());
        assert!(!s.germ_eq(&a, &d).unwrap());
        // bond then compare = compare then bond
        let a3 = s.germ(s.bond(a.element(), 3).unwrap());
        assert_eq!(s.germ_eq(&a3, &b).unwrap(), s.germ_eq(&a, &b).unwrap());
    }

    #[test]
    fn incoherent_overlap_is_rejected() {
        let s = GermSpace::new(
            vec![vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]],
            1.0,
            0.1,
            3,
            CoefficientSpace::Scalar,
            6,
        )
        .unwrap();
        let z = |a: f64, v: f64| {
            TruncatedSeries::constant(CoefficientSpace::Scalar, vec![c(a, 0.0)], 6, 1.0, scalar(c(v, 0.0))).unwrap()
        };
        assert!(matches!(s.element(1, vec![z(0.0, 1.0), z(1.0, 2.0)]), Err(Error::Glue(_))));
        assert!(s.element(1, vec![z(0.0, 1.0), z(1.0, 1.0)]).is_ok());
        // balls are disjoint at level 2, anything goes
        assert!(s.element(2, vec![z(0.0, 1.0), z(1.0, 2.0)]).is_ok());
    }

    #[test]
    fn factorize_constant_and_exp() {
        let s = origin_space();
        let k = c(0.25, -1.5);
        let e = s.factorize(1, |_| scalar(k)).unwrap();
        assert!((e.norm_upper() - k.norm()).abs() < 1e-12);
        let e = s.factorize(1, |z| scalar(z[0].exp())).unwrap();
        let mut f = 1.0;
        for kk in 0..=12 {
            if kk > 0 {
                f *= kk as f64;
            }
            let got = e.reps()[0].coeff([kk, 0])[(0, 0)];
            assert!((got - 1.0 / f).norm() < 1e-10, "k = {kk}");
        }
    }

    #[test]
    fn factorize_reconstructs_composed_polynomial() {
        let s = GermSpace::new(vec![vec![c(0.0, 0.0)]], 1.0, 0.1, 3, CoefficientSpace::Scalar, 40).unwrap();
        let mut rng = substream(23, 0);
        let coeffs: Vec<Complex64> = (0..6).map(|_| crate::random::complex_normal(&mut rng)).collect();
        let f = |z: &[Complex64]| {
            let w = z[0] / (c(3.0, 0.0) - z[0]);
            scalar(coeffs.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * w + a))
        };
        let e = s.factorize(1, f).unwrap();
        let mut worst: f64 = 0.0;
        for x in sphere_points(&[c(0.0, 0.0)], 0.5, 100) {
            worst = worst.max((e.eval(&x).unwrap()[(0, 0)] - f(&x)[(0, 0)]).norm());
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn factorize_detects_pole_inside() {
        let s = origin_space();
        let r = s.factorize(1, |z| scalar(c(1.0, 0.0) / (z[0] - c(0.3, 0.0))));
        assert!(matches!(r, Err(Error::NotBoundedHolomorphic(_))), "{r:?}");
    }

    #[test]
    fn factorize_two_variables() {
        let s = GermSpace::new(
            vec![vec![c(0.0, 0.0), c(0.0, 0.0)]],
            1.0,
            0.1,
            2,
            CoefficientSpace::Scalar,
            6,
        )
        .unwrap();
        let f = |z: &[Complex64]| scalar(c(1.0, 0.0) + z[0] * z[1] * 2.0 - z[1].powu(3));
        let e = s.factorize(1, f).unwrap();
        let rep = &e.reps()[0];
        assert!((rep.coeff([0, 0])[(0, 0)] - 1.0).norm() < 1e-12);
        assert!((rep.coeff([1, 1])[(0, 0)] - 2.0).norm() < 1e-12);
        assert!((rep.coeff([0, 3])[(0, 0)] + 1.0).norm() < 1e-12);
        assert!(rep.coeff([2, 0])[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn derivative_sups_examples() {
        let s = origin_space();
        let k = scalar(c(0.0, 2.0));
        let cst = s.factorize(1, |_| k.clone()).unwrap();
        let d = derivative_sups(std::slice::from_ref(&cst)).unwrap();
        assert!((d.s[0] - 2.0).abs() < 1e-12);
        assert!(d.s[1..].iter().all(|v| *v < 1e-12));
        let z = s.element(1, vec![TruncatedSeries::from_entries(CoefficientSpace::Scalar, vec![c(0.0, 0.0)], 12, 1.0, [([1, 0], scalar(c(1.0, 0.0)))], 0.0).unwrap()]).unwrap();
        let d = derivative_sups(std::slice::from_ref(&z)).unwrap();
        assert_eq!(d.s[1], 1.0);
        assert_eq!(d.s.iter().sum::<f64>(), 1.0);
        assert!(matches!(derivative_sups(&[]), Err(Error::Structural(_))));

        let mut rng = substream(24, 0);
        let family: Vec<_> = (0..10)
            .map(|_| {
                let p = random_series(&mut rng, CoefficientSpace::Scalar, vec![c(0.0, 0.0)], 12, 12, 1.0, 1.0, 0.7);
                s.element(1, vec![p]).unwrap()
            })
            .collect();
        let d = derivative_sups(&family).unwrap();
        for e in &family {
            for (k, v) in e.reps()[0].degree_norms().iter().enumerate() {
                assert!(d.s[k] >= *v);
            }
        }
    }

    #[test]
    fn derivative_sum_examples() {
        let s = origin_space();
        let factor = 1.0 / (1.0 - 0.2 * std::f64::consts::E);
        let k = c(0.6, 0.8);
        let cst = s.factorize(1, |_| scalar(k)).unwrap();
        let out = derivative_sum_check(std::slice::from_ref(&cst), 1.0, 0.1).unwrap();
        assert!((out.lhs - 1.0).abs() < 1e-10);
        assert!((out.rhs - factor).abs() < 1e-9);
        assert!(out.passed);
        let z = s.element(1, vec![TruncatedSeries::from_entries(CoefficientSpace::Scalar, vec![c(0.0, 0.0)], 12, 1.0, [([1, 0], scalar(c(1.0, 0.0)))], 0.0).unwrap()]).unwrap();
        let out = derivative_sum_check(std::slice::from_ref(&z), 1.0, 0.1).unwrap();
        assert!((out.lhs - 0.1).abs() < 1e-15);
        assert!((out.rhs - factor).abs() < 1e-12);
        assert!(out.passed);
    }

    #[test]
    fn derivative_sum_negative_control() {
        let s = origin_space();
        let r = 0.25f64;
        let entries = (0..=12).map(|k| ([k, 0], scalar(c(r.powi(-(k as i32)), 0.0))));
        let p = TruncatedSeries::from_entries(CoefficientSpace::Scalar, vec![c(0.0, 0.0)], 12, 1.0, entries, 0.0).unwrap();
        let e = s.element(1, vec![p]).unwrap();
        assert!(matches!(derivative_sum_check(std::slice::from_ref(&e), 1.0, r), Err(Error::Precondition(_))));
        assert!(!derivative_sum_evaluate(std::slice::from_ref(&e), 1.0, r).unwrap().passed);
    }

    #[test]
    fn regularity_plan_values() {
        let s = origin_space();
        let mut rng = substream(25, 0);
        let plan = s.regularity_plan(1, 3, 0.5, DeltaRule::Standard, 8, &mut rng).unwrap();
        assert_eq!(plan.k0, Some(0));
        let expect = (1.0 - 0.2 * std::f64::consts::E) * 0.25;
        assert!((plan.delta - expect).abs() < 1e-15);
        let plan = s.regularity_plan(1, 3, 0.1, DeltaRule::Standard, 8, &mut rng).unwrap();
        assert_eq!(plan.k0, Some(1));
        let plan = s.regularity_plan(1, 3, 1e-14, DeltaRule::Standard, 8, &mut rng).unwrap();
        assert_eq!(plan.k0, None);
        assert!(s.regularity_plan(2, 2, 0.1, DeltaRule::Standard, 8, &mut rng).is_err());
    }

    #[test]
    fn whole_ball_case_passes() {
        let s = origin_space();
        let rep = s.compact_regularity_check(1, 2, 50.0, DeltaRule::Standard, 60, 1).unwrap();
        assert!(rep.params["delta"].as_f64().unwrap() >= 1.0);
        assert!(rep.passed);
    }

    #[test]
    fn inclusion_holds_for_adjacent_levels() {
        let s = origin_space();
        for eps in [0.5, 0.1] {
            let rep = s.compact_regularity_check(2, 3, eps, DeltaRule::Standard, 300, 2).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn standard_delta_is_too_large_three_levels_down() {
        let s = origin_space();
        let rep = s.compact_regularity_check(1, 4, 0.1, DeltaRule::Standard, 300, 3).unwrap();
        let probe = rep.params["extremal_probe_value"].as_f64().unwrap();
        assert!((probe - 0.101155).abs() < 1e-6, "{probe}");
        assert!(!rep.passed);
        let fixed = s.compact_regularity_check(1, 4, 0.1, DeltaRule::Cauchy, 300, 3).unwrap();
        assert!(fixed.passed);
        assert!(fixed.params["extremal_probe_value"].as_f64().unwrap() <= 0.1);
    }

    #[test]
    fn hypothesis_classifier() {
        let s = origin_space();
        let delta = 0.01;
        let p = TruncatedSeries::constant(CoefficientSpace::Scalar, vec![c(0.0, 0.0)], 12, 1.0, scalar(c(2.0 * delta, 0.0))).unwrap();
        let e = s.element(3, vec![p.clone()]).unwrap();
        assert_eq!(classify_ball(&e, delta).unwrap(), BallMembership::Outside);
        assert_eq!(classify_ball(&e, 3.0 * delta).unwrap(), BallMembership::Inside);
        let loose = s.element(3, vec![p.with_tail(0.05)]).unwrap();
        assert_eq!(classify_ball(&loose, 3.0 * delta).unwrap(), BallMembership::Undetermined);
    }

    #[test]
    fn extremal_probe_simple_cases() {
        // one level down, constants are the extremal elements
        let p = extremal_probe(0.1, 0.1, 0.5, 4);
        assert!((p.value - 0.5).abs() < 1e-15);
        let p = extremal_probe(0.1, 0.001, 0.0022817181705433454, 12);
        assert_eq!(p.witness.iter().map(|w| w.0).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn union_same_disjoint_and_overlapping() {
        let a = vec![vec![c(0.0, 0.0)]];
        let b = vec![vec![c(0.5, 0.0)]];
        let far = vec![vec![c(5.0, 0.0)]];
        let sc = CoefficientSpace::Scalar;
        let same = union_strategy_check(&a, &a, 1.0, 0.1, 1, sc, 10, 4).unwrap();
        assert!(same.passed, "{same:?}");
        let disjoint = union_strategy_check(&a, &far, 1.0, 0.1, 1, sc, 10, 4).unwrap();
        assert!(disjoint.passed);
        assert!(disjoint.notes.iter().any(|n| n.contains("product")));
        let overlap = union_strategy_check(&a, &b, 1.0, 0.1, 1, sc, 10, 4).unwrap();
        assert!(overlap.passed, "{overlap:?}");
        assert!(overlap.notes.iter().any(|n| n.contains("rejected")));
    }
}
