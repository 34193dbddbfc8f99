//! Truncated power series with certified tail bounds.
//!
//! A [`TruncatedSeries`] stands for a bounded holomorphic map on the ball of radius
//! `radius` around `anchor` in ℂ^d (d ∈ {1, 2}). The stored polynomial has total degree
//! at most `degree_bound`; `tail_bound` is an upper bound for the sup norm, on that
//! ball, of the difference between the represented map and the polynomial.
//!
//! Tail bounds are propagated by majorant arithmetic: every coefficient norm is
//! replaced by its norm weighted with `ρ^{|k|}`, and the omitted terms of a product,
//! inverse or composition are bounded by the corresponding scalar majorant series.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::{coeff_mul, max_abs_diff, Coeff, CoefficientSpace};
use crate::error::{Error, Result};

/// Default truncation degree.
pub const DEFAULT_DEGREE: usize = 12;

/// Relative size below which the factorial/geometric remainder of `exp`/`log` is ignored
/// when choosing the number of terms (it is still folded into the tail bound).
const COMPOSE_TOL: f64 = 1e-16;

pub type MultiIndex = [usize; 2];

/// Number of multi-indices of total degree at most `n` in `d` variables.
pub fn index_count(d: usize, n: usize) -> usize {
    match d {
        1 => n + 1,
        _ => (n + 1) * (n + 2) / 2,
    }
}

/// Graded ordering of multi-indices: by total degree, then by the second exponent.
pub fn exponents(d: usize, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(index_count(d, n));
    for t in 0..=n {
        if d == 1 {
            out.push([t, 0]);
        } else {
            for j in 0..=t {
                out.push([t - j, j]);
            }
        }
    }
    out
}

pub fn position(d: usize, e: MultiIndex) -> usize {
    if d == 1 {
        e[0]
    } else {
        let t = e[0] + e[1];
        t * (t + 1) / 2 + e[1]
    }
}

#[inline]
fn total(e: MultiIndex) -> usize {
    e[0] + e[1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    anchor: Vec<Complex64>,
    degree_bound: usize,
    space: CoefficientSpace,
    coeffs: Vec<Coeff>,
    radius: f64,
    tail_bound: f64,
}

impl TruncatedSeries {
    pub fn zero(
        space: CoefficientSpace,
        anchor: Vec<Complex64>,
        degree_bound: usize,
        radius: f64,
    ) -> Self {
        let d = anchor.len();
        assert!(d == 1 || d == 2, "model dimension must be 1 or 2");
        assert!(radius > 0.0, "radius must be positive");
        TruncatedSeries {
            coeffs: vec![space.zero(); index_count(d, degree_bound)],
            anchor,
            degree_bound,
            space,
            radius,
            tail_bound: 0.0,
        }
    }

    pub fn constant(
        space: CoefficientSpace,
        anchor: Vec<Complex64>,
        degree_bound: usize,
        radius: f64,
        value: Coeff,
    ) -> Result<Self> {
        space.check(&value)?;
        let mut s = Self::zero(space, anchor, degree_bound, radius);
        s.coeffs[0] = value;
        Ok(s)
    }

    /// Identity-valued constant series (scalars and matrices only).
    pub fn identity(
        space: CoefficientSpace,
        anchor: Vec<Complex64>,
        degree_bound: usize,
        radius: f64,
    ) -> Result<Self> {
        let id = space.identity()?;
        Self::constant(space, anchor, degree_bound, radius, id)
    }

    /// Builds a series from sparse `(multi-index, coefficient)` entries. Missing
    /// indices are zero; an empty entry list gives the zero series.
    pub fn from_entries(
        space: CoefficientSpace,
        anchor: Vec<Complex64>,
        degree_bound: usize,
        radius: f64,
        entries: impl IntoIterator<Item = (MultiIndex, Coeff)>,
        tail_bound: f64,
    ) -> Result<Self> {
        if !(tail_bound >= 0.0) || !tail_bound.is_finite() {
            return Err(Error::Structural(format!("invalid tail bound {tail_bound}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Structural(format!("invalid radius {radius}")));
        }
        if anchor.is_empty() || anchor.len() > 2 {
            return Err(Error::Structural(format!(
                "unsupported model dimension {}",
                anchor.len()
            )));
        }
        let d = anchor.len();
        let mut s = Self::zero(space, anchor, degree_bound, radius);
        for (e, c) in entries {
            if d == 1 && e[1] != 0 {
                return Err(Error::Structural(format!("multi-index {e:?} in dimension 1")));
            }
            if total(e) > degree_bound {
                return Err(Error::Structural(format!(
                    "multi-index {e:?} exceeds degree bound {degree_bound}"
                )));
            }
            space.check(&c)?;
            s.coeffs[position(d, e)] = c;
        }
        s.tail_bound = tail_bound;
        Ok(s)
    }

    /// One-variable series from a dense coefficient list `c_0, c_1, …`.
    pub fn from_coeffs_1d(
        space: CoefficientSpace,
        anchor: Complex64,
        degree_bound: usize,
        radius: f64,
        coeffs: Vec<Coeff>,
    ) -> Result<Self> {
        Self::from_entries(
            space,
            vec![anchor],
            degree_bound,
            radius,
            coeffs.into_iter().enumerate().map(|(k, c)| ([k, 0], c)),
            0.0,
        )
    }

    pub fn anchor(&self) -> &[Complex64] {
        &self.anchor
    }
    pub fn dim(&self) -> usize {
        self.anchor.len()
    }
    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }
    pub fn space(&self) -> CoefficientSpace {
        self.space
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }
    pub fn coeff(&self, e: MultiIndex) -> &Coeff {
        &self.coeffs[position(self.dim(), e)]
    }
    pub fn exponents(&self) -> Vec<MultiIndex> {
        exponents(self.dim(), self.degree_bound)
    }

    pub(crate) fn with_tail(mut self, tail: f64) -> Self {
        self.tail_bound = tail;
        self
    }

    pub(crate) fn add_tail(mut self, extra: f64) -> Self {
        self.tail_bound += extra;
        self
    }

    pub fn with_coeff(mut self, e: MultiIndex, c: Coeff) -> Result<Self> {
        self.space.check(&c)?;
        if total(e) > self.degree_bound {
            return Err(Error::Structural(format!("multi-index {e:?} exceeds degree bound")));
        }
        let p = position(self.dim(), e);
        self.coeffs[p] = c;
        Ok(self)
    }

    /// Evaluates the polynomial part at `x`.
    pub fn eval(&self, x: &[Complex64]) -> Coeff {
        assert_eq!(x.len(), self.dim(), "evaluation point has wrong dimension");
        if self.dim() == 1 {
            let z = x[0] - self.anchor[0];
            let mut acc = self.coeffs[self.degree_bound].clone();
            for k in (0..self.degree_bound).rev() {
                acc = acc * z + &self.coeffs[k];
            }
            acc
        } else {
            let z0 = x[0] - self.anchor[0];
            let z1 = x[1] - self.anchor[1];
            let n = self.degree_bound;
            let mut p0 = vec![Complex64::new(1.0, 0.0); n + 1];
            let mut p1 = vec![Complex64::new(1.0, 0.0); n + 1];
            for k in 1..=n {
                p0[k] = p0[k - 1] * z0;
                p1[k] = p1[k - 1] * z1;
            }
            let mut acc = self.space.zero();
            for (e, c) in self.exponents().into_iter().zip(&self.coeffs) {
                acc += c * (p0[e[0]] * p1[e[1]]);
            }
            acc
        }
    }

    /// Norm-weighted coefficient sums per total degree: `m_t = Σ_{|k|=t} ‖c_k‖`.
    pub(crate) fn degree_norms(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.degree_bound + 1];
        for (e, c) in self.exponents().into_iter().zip(&self.coeffs) {
            m[total(e)] += self.space.norm(c);
        }
        m
    }

    fn check_radius(&self, rho: f64) -> Result<()> {
        if !(rho >= 0.0) || rho > self.radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "radius {rho} exceeds validity radius {}",
                self.radius
            )));
        }
        Ok(())
    }

    /// Majorant of the polynomial part alone.
    pub fn poly_majorant(&self, rho: f64) -> Result<f64> {
        self.check_radius(rho)?;
        Ok(eval_scalar(&self.degree_norms(), rho))
    }

    /// `Σ ‖c_k‖ ρ^{|k|} + τ`, an upper bound for the sup norm on the radius-ρ ball.
    pub fn majorant_norm(&self, rho: f64) -> Result<f64> {
        Ok(self.poly_majorant(rho)? + self.tail_bound)
    }

    /// Largest sampled norm of the polynomial part on the sphere of radius `rho`.
    /// By the maximum principle this is a lower bound of its sup on the closed ball.
    pub fn sample_sup(&self, rho: f64, n: usize) -> Result<f64> {
        self.check_radius(rho)?;
        let n = n.max(1);
        let pts = sphere_points(&self.anchor, rho, n);
        Ok(pts
            .iter()
            .map(|p| self.space.norm(&self.eval(p)))
            .fold(0.0, f64::max))
    }

    /// Same coefficients on a smaller ball; the tail bound is kept (it bounds a sup
    /// over a superset).
    pub fn restrict(&self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || radius > self.radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "cannot restrict radius {} to {radius}",
                self.radius
            )));
        }
        let mut s = self.clone();
        s.radius = radius.min(self.radius);
        Ok(s)
    }

    /// Re-expands around another anchor. The polynomial part is shifted exactly; the
    /// new ball must lie inside the old one.
    pub fn recenter(&self, anchor: &[Complex64], radius: f64) -> Result<Self> {
        if anchor.len() != self.dim() {
            return Err(Error::Structural("recenter: dimension mismatch".into()));
        }
        let dist = dist(anchor, &self.anchor);
        if dist + radius > self.radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "ball of radius {radius} at distance {dist} is not inside radius {}",
                self.radius
            )));
        }
        let n = self.degree_bound;
        let d = self.dim();
        let h: Vec<Complex64> = anchor.iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
        let binom = binomials(n);
        let hp = |i: usize, k: usize| -> Complex64 { h[i].powu(k as u32) };
        let mut out = Self::zero(self.space, anchor.to_vec(), n, radius);
        // (z + h)^e = Σ_{f ≤ e} C(e,f) h^{e-f} z^f, coordinatewise.
        for (e, c) in self.exponents().into_iter().zip(&self.coeffs) {
            if c.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                continue;
            }
            for f0 in 0..=e[0] {
                let w0 = binom[e[0]][f0] * hp(0, e[0] - f0);
                if d == 1 {
                    out.coeffs[f0] += c * w0;
                } else {
                    for f1 in 0..=e[1] {
                        let w1 = binom[e[1]][f1] * hp(1, e[1] - f1);
                        out.coeffs[position(2, [f0, f1])] += c * (w0 * w1);
                    }
                }
            }
        }
        out.tail_bound = self.tail_bound;
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.anchor != other.anchor {
            return Err(Error::Structural(format!(
                "anchor mismatch: {:?} vs {:?}",
                self.anchor, other.anchor
            )));
        }
        Ok(())
    }

    fn padded(&self, degree: usize) -> Vec<Coeff> {
        if degree == self.degree_bound {
            return self.coeffs.clone();
        }
        let d = self.dim();
        let mut out = vec![self.space.zero(); index_count(d, degree)];
        for (e, c) in self.exponents().into_iter().zip(&self.coeffs) {
            if total(e) <= degree {
                out[position(d, e)] = c.clone();
            }
        }
        out
    }

    /// `αa + βb`; radius is the smaller of the two radii.
    pub fn linear(a: &Self, b: &Self, alpha: Complex64, beta: Complex64) -> Result<Self> {
        a.check_compatible(b)?;
        if a.space != b.space {
            return Err(Error::Structural(format!(
                "coefficient space mismatch: {:?} vs {:?}",
                a.space, b.space
            )));
        }
        let n = a.degree_bound.max(b.degree_bound);
        let ca = a.padded(n);
        let cb = b.padded(n);
        let coeffs = ca
            .iter()
            .zip(&cb)
            .map(|(x, y)| x * alpha + y * beta)
            .collect();
        Ok(TruncatedSeries {
            anchor: a.anchor.clone(),
            degree_bound: n,
            space: a.space,
            coeffs,
            radius: a.radius.min(b.radius),
            tail_bound: alpha.norm() * a.tail_bound + beta.norm() * b.tail_bound,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear(self, other, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear(self, other, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
            tail_bound: alpha.norm() * self.tail_bound,
            ..self.clone()
        }
    }

    /// Truncated Cauchy product with certified tail.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let space = self.space.product(&other.space)?;
        let c = self.space.product_constant(&other.space);
        let n = self.degree_bound.max(other.degree_bound);
        let d = self.dim();
        let rho = self.radius.min(other.radius);
        let coeffs = raw_mul(d, n, &self.padded(n), &other.padded(n), space);

        let na = self.degree_norms();
        let nb = other.degree_norms();
        let mut overflow = 0.0;
        for (s, x) in na.iter().enumerate() {
            for (t, y) in nb.iter().enumerate() {
                if s + t > n {
                    overflow += x * y * rho.powi((s + t) as i32);
                }
            }
        }
        let ma = eval_scalar(&na, rho);
        let mb = eval_scalar(&nb, rho);
        let (ta, tb) = (self.tail_bound, other.tail_bound);
        let tail = c * (ma * tb + mb * ta + ta * tb + overflow);
        Ok(TruncatedSeries {
            anchor: self.anchor.clone(),
            degree_bound: n,
            space,
            coeffs,
            radius: rho,
            tail_bound: tail,
        })
    }

    /// `ab − ba`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        ab.sub(&ba)
    }

    fn constant_inverse(&self) -> Result<Coeff> {
        if !self.space.is_algebra() {
            return Err(Error::Structural("inversion needs an algebra".into()));
        }
        self.coeffs[0]
            .clone()
            .try_inverse()
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Domain("constant term is singular".into()))
    }

    /// Neumann ratio `q = c² ‖a_0⁻¹‖ (Σ_{k≠0} ‖a_k‖ρ^{|k|} + τ)`; the inverse exists on
    /// the radius-ρ ball when `q < 1`.
    pub fn neumann_ratio(&self, rho: f64) -> Result<f64> {
        self.check_radius(rho)?;
        let m = self.space.norm(&self.constant_inverse()?);
        let c = self.space.product_constant(&self.space);
        let mut bn = self.degree_norms();
        bn[0] = 0.0;
        Ok(c * c * m * (eval_scalar(&bn, rho) + self.tail_bound))
    }

    /// Inverse via the Neumann series around the constant term, shrinking the radius if
    /// needed (any positive radius is acceptable).
    pub fn invert(&self) -> Result<Self> {
        self.invert_with_min_radius(0.0)
    }

    /// As [`invert`](Self::invert), failing if the Neumann budget would force the
    /// radius below `min_radius`.
    pub fn invert_with_min_radius(&self, min_radius: f64) -> Result<Self> {
        let a0_inv = self.constant_inverse()?;
        let m = self.space.norm(&a0_inv);
        let c = self.space.product_constant(&self.space);
        let mut bn = self.degree_norms();
        bn[0] = 0.0;
        let q_at = |rho: f64| c * c * m * (eval_scalar(&bn, rho) + self.tail_bound);

        let mut rho = self.radius;
        if q_at(rho) >= 1.0 {
            let floor = c * c * m * self.tail_bound;
            if floor >= 1.0 {
                return Err(Error::Domain(format!(
                    "Neumann budget unattainable: tail alone gives q = {floor:.3e}"
                )));
            }
            let target = 0.5 * (1.0 + floor);
            let (mut lo, mut hi) = (0.0, rho);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if q_at(mid) <= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            rho = lo;
            if rho < min_radius || rho <= 0.0 {
                return Err(Error::Domain(format!(
                    "Neumann budget needs radius {rho:.6e} below minimum {min_radius:.6e}"
                )));
            }
            log::debug!("invert: radius shrunk from {} to {rho}", self.radius);
        }
        let q = q_at(rho);

        // s_k = −a0⁻¹ Σ_{j≠0, j≤k} a_j s_{k−j}
        let d = self.dim();
        let n = self.degree_bound;
        let exps = self.exponents();
        let mut s: Vec<Coeff> = vec![self.space.zero(); exps.len()];
        s[0] = a0_inv.clone();
        for (pk, &k) in exps.iter().enumerate().skip(1) {
            let mut acc = self.space.zero();
            for (pj, &j) in exps.iter().enumerate().skip(1) {
                if j[0] <= k[0] && j[1] <= k[1] {
                    let r = position(d, [k[0] - j[0], k[1] - j[1]]);
                    acc += coeff_mul(&self.coeffs[pj], &s[r]);
                }
            }
            s[pk] = -coeff_mul(&a0_inv, &acc);
        }

        // Majorant series of the Neumann expansion: m Σ_j (c² m p_B)^j.
        let mut included = vec![0.0; n + 1];
        let mut power = vec![0.0; n + 1];
        power[0] = m;
        included[0] = m;
        for _ in 1..=n {
            power = scalar_mul_trunc(&power, &bn, n);
            power.iter_mut().for_each(|v| *v *= c * c * m);
            for (acc, v) in included.iter_mut().zip(&power) {
                *acc += v;
            }
        }
        let full = m / (1.0 - q);
        let inc = eval_scalar(&included, rho);
        let tail = (full - inc).max(0.0) + 4.0 * f64::EPSILON * full;

        Ok(TruncatedSeries {
            anchor: self.anchor.clone(),
            degree_bound: n,
            space: self.space,
            coeffs: s,
            radius: rho,
            tail_bound: tail,
        })
    }

    /// `exp ∘ a` as a power series in the algebra, with factorial remainder in the tail.
    pub fn exp(&self) -> Result<Self> {
        let id = self.space.identity()?;
        let rho = self.radius;
        let n = self.degree_bound;
        let d = self.dim();
        let p = self.degree_norms();
        let mu = eval_scalar(&p, rho) + self.tail_bound;

        let mut terms = 1usize;
        let mut fact_term = 1.0;
        while terms < 400 {
            fact_term *= mu / terms as f64;
            if fact_term * mu.exp() < COMPOSE_TOL * (1.0 + mu) {
                break;
            }
            terms += 1;
        }

        let mut sum = vec![self.space.zero(); self.coeffs.len()];
        sum[0] = id.clone();
        let mut power = sum.clone();
        let mut maj_sum = vec![0.0; n + 1];
        let id_norm = self.space.norm(&id);
        maj_sum[0] = id_norm;
        let mut maj_power = vec![0.0; n + 1];
        maj_power[0] = 1.0;
        for j in 1..=terms {
            power = raw_mul(d, n, &power, &self.coeffs, self.space);
            let inv = 1.0 / j as f64;
            power.iter_mut().for_each(|c| *c *= Complex64::new(inv, 0.0));
            for (acc, c) in sum.iter_mut().zip(&power) {
                *acc += c;
            }
            maj_power = scalar_mul_trunc(&maj_power, &p, n);
            maj_power.iter_mut().for_each(|v| *v *= inv);
            for (acc, v) in maj_sum.iter_mut().zip(&maj_power) {
                *acc += v;
            }
        }
        let full = id_norm + mu.exp_m1();
        let inc = eval_scalar(&maj_sum, rho);
        let tail = (full - inc).max(0.0) + 4.0 * f64::EPSILON * full;
        Ok(TruncatedSeries {
            anchor: self.anchor.clone(),
            degree_bound: n,
            space: self.space,
            coeffs: sum,
            radius: rho,
            tail_bound: tail,
        })
    }

    /// Principal `log ∘ a`; needs `majorant(a − 1) < 1` on the validity ball.
    pub fn log(&self) -> Result<Self> {
        let id = self.space.identity()?;
        let rho = self.radius;
        let n = self.degree_bound;
        let d = self.dim();
        let mut b = self.coeffs.clone();
        b[0] -= &id;
        let mut p = vec![0.0; n + 1];
        for (e, c) in self.exponents().into_iter().zip(&b) {
            p[total(e)] += self.space.norm(c);
        }
        let mu = eval_scalar(&p, rho) + self.tail_bound;
        if mu >= 1.0 {
            return Err(Error::Domain(format!(
                "log branch budget violated: majorant of a − 1 is {mu:.6} ≥ 1"
            )));
        }
        let mut terms = 1usize;
        while terms < 5000 && mu.powi(terms as i32 + 1) / (1.0 - mu) >= COMPOSE_TOL {
            terms += 1;
        }

        let mut sum = vec![self.space.zero(); b.len()];
        let mut power = b.clone();
        let mut maj_sum = vec![0.0; n + 1];
        let mut maj_power = p.clone();
        for j in 1..=terms {
            if j > 1 {
                power = raw_mul(d, n, &power, &b, self.space);
                maj_power = scalar_mul_trunc(&maj_power, &p, n);
            }
            let w = if j % 2 == 1 { 1.0 } else { -1.0 } / j as f64;
            for (acc, c) in sum.iter_mut().zip(&power) {
                *acc += c * Complex64::new(w, 0.0);
            }
            for (acc, v) in maj_sum.iter_mut().zip(&maj_power) {
                *acc += v / j as f64;
            }
        }
        let full = -(-mu).ln_1p();
        let inc = eval_scalar(&maj_sum, rho);
        let tail = (full - inc).max(0.0) + 4.0 * f64::EPSILON * full;
        Ok(TruncatedSeries {
            anchor: self.anchor.clone(),
            degree_bound: n,
            space: self.space,
            coeffs: sum,
            radius: rho,
            tail_bound: tail,
        })
    }

    /// Largest entrywise deviation between coefficient lists (padding with zeros).
    pub fn coeff_distance(&self, other: &Self) -> f64 {
        let n = self.degree_bound.max(other.degree_bound);
        let a = self.padded(n);
        let b = other.padded(n);
        a.iter()
            .zip(&b)
            .map(|(x, y)| max_abs_diff(x, y))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SeriesDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SeriesDoc = serde_json::from_str(s)?;
        doc.try_into()
    }
}

/// Composition of a series with `exp` or `log`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntireFn {
    Exp,
    Log,
}

pub fn series_compose_entire(a: &TruncatedSeries, which: EntireFn) -> Result<TruncatedSeries> {
    match which {
        EntireFn::Exp => a.exp(),
        EntireFn::Log => a.log(),
    }
}

/// Exact truncated product of dense coefficient lists.
pub(crate) fn raw_mul(
    d: usize,
    n: usize,
    a: &[Coeff],
    b: &[Coeff],
    space: CoefficientSpace,
) -> Vec<Coeff> {
    let mut out = vec![space.zero(); index_count(d, n)];
    if d == 1 {
        for i in 0..=n {
            if is_zero(&a[i]) {
                continue;
            }
            for j in 0..=(n - i) {
                out[i + j] += coeff_mul(&a[i], &b[j]);
            }
        }
    } else {
        let exps = exponents(d, n);
        for (pi, &ei) in exps.iter().enumerate() {
            if is_zero(&a[pi]) {
                continue;
            }
            for (pj, &ej) in exps.iter().enumerate() {
                if total(ei) + total(ej) > n {
                    continue;
                }
                let pk = position(d, [ei[0] + ej[0], ei[1] + ej[1]]);
                out[pk] += coeff_mul(&a[pi], &b[pj]);
            }
        }
    }
    out
}

fn is_zero(c: &Coeff) -> bool {
    c.iter().all(|v| v.re == 0.0 && v.im == 0.0)
}

pub(crate) fn eval_scalar(c: &[f64], rho: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * rho + v)
}

pub(crate) fn scalar_mul_trunc(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        b[i][0] = 1.0;
        for j in 1..=i {
            b[i][j] = b[i - 1][j - 1] + if j < i { b[i - 1][j] } else { 0.0 };
        }
    }
    b
}

pub(crate) fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Deterministic points on the sphere `‖x − anchor‖ = rho` in ℂ^d.
pub fn sphere_points(anchor: &[Complex64], rho: f64, n: usize) -> Vec<Vec<Complex64>> {
    let tau = std::f64::consts::TAU;
    match anchor.len() {
        1 => (0..n)
            .map(|j| vec![anchor[0] + Complex64::from_polar(rho, tau * j as f64 / n as f64)])
            .collect(),
        _ => (0..n)
            .map(|j| {
                let u = halton(j + 1, 2);
                let v = halton(j + 1, 3);
                let w = halton(j + 1, 5);
                // |z0|² uniform in [0,1] gives the uniform measure on S³.
                let a = u.sqrt();
                let b = (1.0 - u).sqrt();
                vec![
                    anchor[0] + Complex64::from_polar(rho * a, tau * v),
                    anchor[1] + Complex64::from_polar(rho * b, tau * w),
                ]
            })
            .collect(),
    }
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesDoc {
    anchor: Vec<[f64; 2]>,
    degree_bound: usize,
    space: CoefficientSpace,
    coeffs: Vec<Vec<serde_json::Value>>,
    radius: f64,
    tail_bound: f64,
}

impl From<&TruncatedSeries> for SeriesDoc {
    fn from(s: &TruncatedSeries) -> Self {
        let d = s.dim();
        let coeffs = s
            .exponents()
            .into_iter()
            .zip(&s.coeffs)
            .filter(|(_, c)| !is_zero(c))
            .map(|(e, c)| {
                let mut entry = vec![serde_json::json!(&e[..d])];
                // row-major
                for i in 0..c.nrows() {
                    for j in 0..c.ncols() {
                        entry.push(serde_json::json!([c[(i, j)].re, c[(i, j)].im]));
                    }
                }
                entry
            })
            .collect();
        SeriesDoc {
            anchor: s.anchor.iter().map(|z| [z.re, z.im]).collect(),
            degree_bound: s.degree_bound,
            space: s.space,
            coeffs,
            radius: s.radius,
            tail_bound: s.tail_bound,
        }
    }
}

impl TryFrom<SeriesDoc> for TruncatedSeries {
    type Error = Error;

    fn try_from(doc: SeriesDoc) -> Result<Self> {
        let anchor: Vec<Complex64> = doc.anchor.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        let d = anchor.len();
        let (rows, cols) = doc.space.shape();
        let mut entries = Vec::with_capacity(doc.coeffs.len());
        for entry in doc.coeffs {
            let mut it = entry.into_iter();
            let idx: Vec<usize> = serde_json::from_value(
                it.next()
                    .ok_or_else(|| Error::Serde("empty coefficient entry".into()))?,
            )?;
            if idx.len() != d {
                return Err(Error::Serde(format!("multi-index {idx:?} has wrong length")));
            }
            let vals: Vec<[f64; 2]> = it
                .map(serde_json::from_value)
                .collect::<std::result::Result<_, _>>()?;
            if vals.len() != rows * cols {
                return Err(Error::Serde(format!(
                    "expected {} entries, found {}",
                    rows * cols,
                    vals.len()
                )));
            }
            let c = DMatrix::from_row_iterator(
                rows,
                cols,
                vals.iter().map(|v| Complex64::new(v[0], v[1])),
            );
            let e = if d == 1 { [idx[0], 0] } else { [idx[0], idx[1]] };
            entries.push((e, c));
        }
        TruncatedSeries::from_entries(
            doc.space,
            anchor,
            doc.degree_bound,
            doc.radius,
            entries,
            doc.tail_bound,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }
    fn sc(v: f64) -> Coeff {
        DMatrix::from_element(1, 1, c(v))
    }
    fn scalar_poly(coeffs: &[f64], n: usize, radius: f64) -> TruncatedSeries {
        TruncatedSeries::from_coeffs_1d(
            CoefficientSpace::Scalar,
            c(0.0),
            n,
            radius,
            coeffs.iter().map(|v| sc(*v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn self_difference_is_zero_with_doubled_tail() {
        let s = scalar_poly(&[1.0, 2.0, -0.5], 4, 1.0).with_tail(0.25);
        let z = TruncatedSeries::linear(&s, &s, c(1.0), c(-1.0)).unwrap();
        assert!(z.coeffs().iter().all(is_zero));
        assert_eq!(z.tail_bound(), 0.5);
    }

    #[test]
    fn linear_identity_case() {
        let s = scalar_poly(&[1.0, 2.0, -0.5], 4, 1.0).with_tail(0.1);
        let zero = TruncatedSeries::zero(CoefficientSpace::Scalar, vec![c(0.0)], 4, 1.0);
        assert_eq!(TruncatedSeries::linear(&s, &zero, c(1.0), c(0.0)).unwrap(), s);
    }

    #[test]
    fn linear_rejects_mismatches() {
        let s = scalar_poly(&[1.0], 2, 1.0);
        let t = TruncatedSeries::zero(CoefficientSpace::Scalar, vec![c(1.0)], 2, 1.0);
        assert!(matches!(s.add(&t), Err(Error::Structural(_))));
        let u = TruncatedSeries::zero(CoefficientSpace::Matrix(2), vec![c(0.0)], 2, 1.0);
        assert!(matches!(s.add(&u), Err(Error::Structural(_))));
    }

    #[test]
    fn one_plus_z_times_one_minus_z() {
        let a = scalar_poly(&[1.0, 1.0], 4, 1.0);
        let b = scalar_poly(&[1.0, -1.0], 4, 1.0);
        let p = a.mul(&b).unwrap();
        let expect = [1.0, 0.0, -1.0, 0.0, 0.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((p.coeff([k, 0])[(0, 0)] - c(*e)).norm() < 1e-15);
        }
        assert_eq!(p.tail_bound(), 0.0);
    }

    #[test]
    fn product_overflow_enters_tail() {
        let a = scalar_poly(&[0.0, 0.0, 1.0], 2, 0.5);
        let p = a.mul(&a).unwrap();
        assert!(p.coeffs().iter().all(is_zero));
        assert!((p.tail_bound() - 0.5f64.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn geometric_inverse() {
        let n = 10;
        let a = scalar_poly(&[1.0, -1.0], n, 0.5);
        let inv = a.invert().unwrap();
        for k in 0..=n {
            assert!((inv.coeff([k, 0])[(0, 0)] - c(1.0)).norm() < 1e-14);
        }
        let expect = 0.5f64.powi(n as i32 + 1) / 0.5;
        assert!(inv.tail_bound() >= expect * (1.0 - 1e-9));
        assert!(inv.tail_bound() <= expect * (1.0 + 1e-9) + 1e-14);
        assert_eq!(inv.radius(), 0.5);
    }

    #[test]
    fn constant_inverse() {
        let a = TruncatedSeries::constant(CoefficientSpace::Scalar, vec![c(0.0)], 5, 1.0, sc(4.0))
            .unwrap();
        let inv = a.invert().unwrap();
        assert!((inv.coeff([0, 0])[(0, 0)] - c(0.25)).norm() < 1e-16);
        assert!(inv.coeffs()[1..].iter().all(is_zero));
    }

    #[test]
    fn singular_constant_term() {
        let a = scalar_poly(&[0.0, 1.0], 4, 1.0);
        assert!(matches!(a.invert(), Err(Error::Domain(_))));
    }

    #[test]
    fn inversion_shrinks_radius_when_needed() {
        // 1 − z on radius 2: Neumann needs |z| < 1.
        let a = scalar_poly(&[1.0, -1.0], 8, 2.0);
        let inv = a.invert().unwrap();
        assert!(inv.radius() < 1.0);
        assert!(matches!(a.invert_with_min_radius(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn exp_taylor_coefficients() {
        let z = scalar_poly(&[0.0, 1.0], 12, 1.0);
        let e = z.exp().unwrap();
        let mut fact = 1.0;
        for k in 0..=12 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((e.coeff([k, 0])[(0, 0)] - c(1.0 / fact)).norm() < 1e-15);
        }
        // the omitted tail Σ_{k>12} 1/k! is tiny but certified
        let omitted: f64 = (13..30).map(|k| 1.0 / (1..=k).map(|i| i as f64).product::<f64>()).sum();
        assert!(e.tail_bound() >= omitted * 0.999);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let zero = TruncatedSeries::zero(CoefficientSpace::Matrix(2), vec![c(0.0)], 6, 1.0);
        let e = zero.exp().unwrap();
        assert_eq!(e.coeff([0, 0]), &DMatrix::identity(2, 2));
        assert!(e.coeffs()[1..].iter().all(is_zero));
    }

    #[test]
    fn log_budget() {
        let a = scalar_poly(&[1.0, 1.5], 6, 1.0);
        assert!(matches!(a.log(), Err(Error::Domain(_))));
    }

    #[test]
    fn majorant_of_monomial_is_exact() {
        let z = scalar_poly(&[0.0, 1.0], 6, 0.7);
        assert!((z.majorant_norm(0.7).unwrap() - 0.7).abs() < 1e-15);
        assert!((z.sample_sup(0.7, 64).unwrap() - 0.7).abs() < 1e-15);
        assert!(matches!(z.majorant_norm(0.8), Err(Error::Domain(_))));
    }

    #[test]
    fn recenter_is_exact_shift() {
        let p = scalar_poly(&[1.0, -2.0, 0.5, 0.25], 3, 2.0);
        let q = p.recenter(&[c(0.5)], 1.0).unwrap();
        for x in [0.1, -0.3, 0.9] {
            let pt = [Complex64::new(0.5 + x, 0.2)];
            assert!(max_abs_diff(&p.eval(&pt), &q.eval(&pt)) < 1e-14);
        }
        assert!(p.recenter(&[c(1.5)], 1.0).is_err());
    }

    #[test]
    fn two_variable_product_and_shift() {
        let s = CoefficientSpace::Scalar;
        let a = TruncatedSeries::from_entries(
            s,
            vec![c(0.0), c(0.0)],
            4,
            1.0,
            vec![([0, 0], sc(1.0)), ([1, 0], sc(2.0)), ([0, 1], sc(-1.0))],
            0.0,
        )
        .unwrap();
        let b = TruncatedSeries::from_entries(
            s,
            vec![c(0.0), c(0.0)],
            4,
            1.0,
            vec![([1, 1], sc(0.5)), ([0, 2], sc(1.0))],
            0.0,
        )
        .unwrap();
        let p = a.mul(&b).unwrap();
        let x = [Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.05)];
        let direct = a.eval(&x) * b.eval(&x)[(0, 0)];
        assert!(max_abs_diff(&p.eval(&x), &direct) < 1e-15);
        let q = p.recenter(&[c(0.1), c(0.0)], 0.5).unwrap();
        assert!(max_abs_diff(&q.eval(&x), &p.eval(&x)) < 1e-14);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = CoefficientSpace::Matrix(2);
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.1, 1.0 / 3.0),
                Complex64::new(-2.0e-17, 5.0),
                Complex64::new(std::f64::consts::PI, 0.0),
                Complex64::new(1e300, -1e-300),
            ],
        );
        let a = TruncatedSeries::from_entries(
            s,
            vec![Complex64::new(0.25, -1.0 / 7.0)],
            5,
            0.3,
            vec![([0, 0], m.clone()), ([3, 0], m * c(0.7))],
            1.0 / 9.0,
        )
        .unwrap();
        let back = TruncatedSeries::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn empty_coefficient_map_is_zero_series() {
        let json = r#"{"anchor":[[0.0,0.0]],"degree_bound":3,"space":{"kind":"scalar"},
                       "coeffs":[],"radius":1.0,"tail_bound":0.0}"#;
        let z = TruncatedSeries::from_json(json).unwrap();
        assert!(z.coeffs().iter().all(is_zero));
        assert_eq!(z.tail_bound(), 0.0);
    }
}
