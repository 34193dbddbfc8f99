//! Evolution of germ-valued curves and the left logarithmic derivative.
//!
//! A [`LieCurve`] is a spline in `t ∈ [0, 1]` whose coefficients are 𝔥-valued germs at
//! a common level; a [`GroupCurve`] is the same with GL(m)-valued germs. [`evol`]
//! solves `η′ = η·γ`, `η(0) = 1` by a fourth-order Magnus product integral, so every
//! iterate is a product of `EXP`s and stays in the group.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::coeff::{commutator, max_abs_diff, Coeff};
use crate::error::{Error, Result};
use crate::germ_group::{random_germ, GermGroup, GermGroupElement};
use crate::germ_space::{BHolElement, GermSpace};
use crate::lie::exp_mat;
use crate::report::CheckReport;
use crate::series::{sphere_points, TruncatedSeries};

pub const DEFAULT_STEPS: usize = 64;
/// Oracle steps per evolution step.
pub const ORACLE_REFINEMENT: usize = 10;

/// `Σ w_i e_i` for elements at one level.
pub fn combine(space: &GermSpace, terms: &[(&BHolElement, f64)]) -> Result<BHolElement> {
    let (first, rest) = terms
        .split_first()
        .ok_or_else(|| Error::Structural("empty linear combination".into()))?;
    let n = first.0.level();
    let mut reps: Vec<TruncatedSeries> = first
        .0
        .reps()
        .iter()
        .map(|s| s.scale(Complex64::new(first.1, 0.0)))
        .collect();
    for (e, w) in rest {
        let e = space.bond(e, n.max(e.level()))?;
        if e.level() != n {
            return Err(Error::Structural("linear combination across levels".into()));
        }
        for (acc, s) in reps.iter_mut().zip(e.reps()) {
            *acc = TruncatedSeries::linear(acc, s, Complex64::new(1.0, 0.0), Complex64::new(*w, 0.0))?;
        }
    }
    space.element(n, reps)
}

fn check_breakpoints(bp: &[f64], segments: usize) -> Result<()> {
    if bp.len() != segments + 1 || segments == 0 {
        return Err(Error::Structural(format!(
            "{} breakpoints for {segments} segments",
            bp.len()
        )));
    }
    if bp[0] != 0.0 || bp[segments] != 1.0 || bp.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Structural("breakpoints must increase from 0 to 1".into()));
    }
    Ok(())
}

/// Spline with germ coefficients in the local variable `t − t_i`.
#[derive(Debug, Clone)]
struct Spline {
    breakpoints: Vec<f64>,
    segments: Vec<Vec<BHolElement>>,
    level: usize,
}

impl Spline {
    fn new(breakpoints: Vec<f64>, segments: Vec<Vec<BHolElement>>, max_degree: Option<usize>) -> Result<Self> {
        check_breakpoints(&breakpoints, segments.len())?;
        let level = segments
            .first()
            .and_then(|s| s.first())
            .map(|e| e.level())
            .ok_or_else(|| Error::Structural("empty segment".into()))?;
        for seg in &segments {
            if seg.is_empty() {
                return Err(Error::Structural("empty segment".into()));
            }
            if let Some(d) = max_degree {
                if seg.len() > d + 1 {
                    return Err(Error::Structural(format!("segment degree exceeds {d}")));
                }
            }
            if seg.iter().any(|e| e.level() != level) {
                return Err(Error::Structural("segment coefficients at different levels".into()));
            }
        }
        Ok(Spline {
            breakpoints,
            segments,
            level,
        })
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
        }
        let p = self.segments.len();
        let i = self.breakpoints[1..p].iter().take_while(|b| **b <= t).count();
        Ok((i, t - self.breakpoints[i]))
    }

    /// `k`-th derivative on segment `i` at local time `tau`.
    fn derivative_on(&self, space: &GermSpace, i: usize, tau: f64, k: usize) -> Result<BHolElement> {
        let seg = &self.segments[i];
        if k >= seg.len() {
            return Ok(space.zero(self.level)?);
        }
        let terms: Vec<(&BHolElement, f64)> = seg
            .iter()
            .enumerate()
            .skip(k)
            .map(|(j, c)| {
                let falling: f64 = ((j - k + 1)..=j).map(|v| v as f64).product();
                (c, falling * tau.powi((j - k) as i32))
            })
            .collect();
        combine(space, &terms)
    }

    fn derivative(&self, space: &GermSpace, t: f64, k: usize) -> Result<BHolElement> {
        let (i, tau) = self.locate(t)?;
        self.derivative_on(space, i, tau, k)
    }

    /// Matrix polynomial coefficients of each segment at the point `x`.
    fn pointwise(&self, x: &[Complex64]) -> Result<Vec<Vec<Coeff>>> {
        self.segments
            .iter()
            .map(|seg| seg.iter().map(|c| c.eval(x)).collect())
            .collect()
    }

    fn continuity_defect(&self, space: &GermSpace) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.segments.len() - 1 {
            let h = self.breakpoints[i + 1] - self.breakpoints[i];
            let left = self.derivative_on(space, i, h, 0)?;
            let right = &self.segments[i + 1][0];
            for (a, b) in left.reps().iter().zip(right.reps()) {
                worst = worst.max(a.coeff_distance(b));
            }
        }
        Ok(worst)
    }
}

fn eval_poly(coeffs: &[Coeff], tau: f64, k: usize) -> Coeff {
    let mut acc = coeffs[0].clone() * Complex64::new(0.0, 0.0);
    for (j, c) in coeffs.iter().enumerate().skip(k) {
        let falling: f64 = ((j - k + 1)..=j).map(|v| v as f64).product();
        acc += c * Complex64::new(falling * tau.powi((j - k) as i32), 0.0);
    }
    acc
}

/// Continuous 𝔥-valued germ curve: cubic segments at a common level.
#[derive(Debug, Clone)]
pub struct LieCurve {
    spline: Spline,
}

pub const CONTINUITY_TOL: f64 = 1e-12;

impl LieCurve {
    pub fn new(space: &GermSpace, breakpoints: Vec<f64>, segments: Vec<Vec<BHolElement>>) -> Result<Self> {
        let spline = Spline::new(breakpoints, segments, Some(3))?;
        let defect = spline.continuity_defect(space)?;
        if defect > CONTINUITY_TOL {
            return Err(Error::Structural(format!(
                "curve is discontinuous at a breakpoint (jump {defect:.3e})"
            )));
        }
        Ok(LieCurve { spline })
    }

    pub fn constant(xi: &BHolElement) -> Self {
        LieCurve {
            spline: Spline {
                breakpoints: vec![0.0, 1.0],
                segments: vec![vec![xi.clone()]],
                level: xi.level(),
            },
        }
    }

    /// Cubic Hermite spline through values and derivatives at the knots.
    pub fn hermite(space: &GermSpace, knots: Vec<f64>, values: &[BHolElement], slopes: &[BHolElement]) -> Result<Self> {
        if values.len() != knots.len() || slopes.len() != knots.len() {
            return Err(Error::Structural("hermite data length mismatch".into()));
        }
        let mut segments = Vec::with_capacity(knots.len() - 1);
        for i in 0..knots.len() - 1 {
            let h = knots[i + 1] - knots[i];
            let (y0, y1, d0, d1) = (&values[i], &values[i + 1], &slopes[i], &slopes[i + 1]);
            let c2 = combine(space, &[(y1, 3.0 / (h * h)), (y0, -3.0 / (h * h)), (d0, -2.0 / h), (d1, -1.0 / h)])?;
            let c3 = combine(space, &[(y0, 2.0 / (h * h * h)), (y1, -2.0 / (h * h * h)), (d0, 1.0 / (h * h)), (d1, 1.0 / (h * h))])?;
            segments.push(vec![y0.clone(), d0.clone(), c2, c3]);
        }
        LieCurve::new(space, knots, segments)
    }

    pub fn level(&self) -> usize {
        self.spline.level
    }
    pub fn breakpoints(&self) -> &[f64] {
        &self.spline.breakpoints
    }
    pub fn segments(&self) -> &[Vec<BHolElement>] {
        &self.spline.segments
    }

    pub fn value(&self, space: &GermSpace, t: f64) -> Result<BHolElement> {
        self.spline.derivative(space, t, 0)
    }

    pub fn derivative(&self, space: &GermSpace, t: f64, k: usize) -> Result<BHolElement> {
        self.spline.derivative(space, t, k)
    }

    /// Matrix value of the curve at time `t` and point `x`.
    pub fn value_at(&self, t: f64, x: &[Complex64]) -> Result<Coeff> {
        let (i, tau) = self.spline.locate(t)?;
        let coeffs: Vec<Coeff> = self.spline.segments[i].iter().map(|c| c.eval(x)).collect::<Result<_>>()?;
        Ok(eval_poly(&coeffs, tau, 0))
    }

    /// Upper bound of `sup_t ‖γ(t)‖` from the coefficient majorants.
    pub fn sup_bound(&self) -> f64 {
        let bp = &self.spline.breakpoints;
        self.spline
            .segments
            .iter()
            .enumerate()
            .map(|(i, seg)| {
                let h = bp[i + 1] - bp[i];
                seg.iter()
                    .enumerate()
                    .map(|(j, c)| c.norm_upper() * h.powi(j as i32))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `γ + s·h` for curves with the same breakpoints and level.
    pub fn add_scaled(&self, space: &GermSpace, other: &LieCurve, s: f64) -> Result<LieCurve> {
        if self.breakpoints() != other.breakpoints() {
            return Err(Error::Structural("curves have different breakpoints".into()));
        }
        let mut segments = Vec::with_capacity(self.segments().len());
        for (a, b) in self.segments().iter().zip(other.segments()) {
            let d = a.len().max(b.len());
            let mut seg = Vec::with_capacity(d);
            for j in 0..d {
                let c = match (a.get(j), b.get(j)) {
                    (Some(x), Some(y)) => combine(space, &[(x, 1.0), (y, s)])?,
                    (Some(x), None) => x.clone(),
                    (None, Some(y)) => combine(space, &[(y, s)])?,
                    (None, None) => unreachable!(),
                };
                seg.push(c);
            }
            segments.push(seg);
        }
        Ok(LieCurve {
            spline: Spline {
                breakpoints: self.breakpoints().to_vec(),
                segments,
                level: self.level().max(other.level()),
            },
        })
    }

    /// `s ↦ (b − a)·γ(a + s(b − a))` on `[0, 1]`, the piece of `γ` on `[a, b]`
    /// rescaled so that its evolution equals `η(a)⁻¹η(b)`.
    pub fn restrict(&self, space: &GermSpace, a: f64, b: f64) -> Result<LieCurve> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::Structural(format!("invalid restriction interval [{a}, {b}]")));
        }
        let len = b - a;
        let bp = self.breakpoints();
        let mut new_bp = vec![0.0];
        let mut segments = Vec::new();
        for i in 0..bp.len() - 1 {
            let (u, v) = (bp[i].max(a), bp[i + 1].min(b));
            if v - u <= 1e-15 {
                continue;
            }
            let seg = &self.segments()[i];
            let shift = u - bp[i];
            let mut out = Vec::with_capacity(seg.len());
            for k in 0..seg.len() {
                let terms: Vec<(&BHolElement, f64)> = (k..seg.len())
                    .map(|j| (&seg[j], binomial(j, k) * shift.powi((j - k) as i32) * len.powi(k as i32 + 1)))
                    .collect();
                out.push(combine(space, &terms)?);
            }
            segments.push(out);
            new_bp.push((v - a) / len);
        }
        *new_bp.last_mut().expect("nonempty") = 1.0;
        Ok(LieCurve {
            spline: Spline {
                breakpoints: new_bp,
                segments,
                level: self.level(),
            },
        })
    }

    /// Same germ values at every coefficient, reparametrized to `t ↦ γ(t/a)` on
    /// `[0, a]` and zero on `[a, 1]`.
    pub fn compress(&self, space: &GermSpace, a: f64) -> Result<LieCurve> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Structural("compression factor must lie in (0, 1)".into()));
        }
        let mut bp: Vec<f64> = self.breakpoints().iter().map(|t| t * a).collect();
        bp.push(1.0);
        let mut segments: Vec<Vec<BHolElement>> = self
            .segments()
            .iter()
            .map(|seg| {
                seg.iter()
                    .enumerate()
                    .map(|(j, c)| combine(space, &[(c, a.powi(-(j as i32)) / a)]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        segments.push(vec![space.zero(self.level())?]);
        Ok(LieCurve {
            spline: Spline {
                breakpoints: bp,
                segments,
                level: self.level(),
            },
        })
    }
}

/// GL(m)-valued germ curve with polynomial segments of any degree.
#[derive(Debug, Clone)]
pub struct GroupCurve {
    spline: Spline,
}

impl GroupCurve {
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Vec<BHolElement>>) -> Result<Self> {
        Ok(GroupCurve {
            spline: Spline::new(breakpoints, segments, None)?,
        })
    }

    pub fn level(&self) -> usize {
        self.spline.level
    }
    pub fn breakpoints(&self) -> &[f64] {
        &self.spline.breakpoints
    }

    pub fn value(&self, space: &GermSpace, t: f64) -> Result<BHolElement> {
        self.spline.derivative(space, t, 0)
    }

    pub fn derivative(&self, space: &GermSpace, t: f64, k: usize) -> Result<BHolElement> {
        self.spline.derivative(space, t, k)
    }

    pub fn value_at(&self, t: f64, x: &[Complex64]) -> Result<Coeff> {
        let (i, tau) = self.spline.locate(t)?;
        let coeffs: Vec<Coeff> = self.spline.segments[i].iter().map(|c| c.eval(x)).collect::<Result<_>>()?;
        Ok(eval_poly(&coeffs, tau, 0))
    }

    /// Pointwise product `(γη)(t) = γ(t)η(t)` (polynomial product per segment).
    pub fn mul(&self, group: &GermGroup, other: &GroupCurve) -> Result<GroupCurve> {
        if self.breakpoints() != other.breakpoints() {
            return Err(Error::Structural("curves have different breakpoints".into()));
        }
        let space = group.space();
        let mut segments = Vec::new();
        for (a, b) in self.spline.segments.iter().zip(&other.spline.segments) {
            let mut seg: Vec<Option<BHolElement>> = vec![None; a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let n = x.level().max(y.level());
                    let (x, y) = (space.bond(x, n)?, space.bond(y, n)?);
                    let reps = x
                        .reps()
                        .iter()
                        .zip(y.reps())
                        .map(|(p, q)| p.mul(q))
                        .collect::<Result<Vec<_>>>()?;
                    let prod = space.element(n, reps)?;
                    seg[i + j] = Some(match seg[i + j].take() {
                        None => prod,
                        Some(acc) => combine(space, &[(&acc, 1.0), (&prod, 1.0)])?,
                    });
                }
            }
            segments.push(seg.into_iter().map(|c| c.expect("all degrees filled")).collect());
        }
        let level = segments
            .iter()
            .flat_map(|s: &Vec<BHolElement>| s.iter().map(|e| e.level()))
            .max()
            .unwrap_or(self.level());
        let segments = segments
            .into_iter()
            .map(|s| s.iter().map(|e| space.bond(e, level)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        GroupCurve::new(self.breakpoints().to_vec(), segments)
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub endpoint: GermGroupElement,
    /// `(t_i, η(t_i))` on the step grid.
    pub trajectory: Vec<(f64, GermGroupElement)>,
    /// Index ranges (inclusive) of the trajectory inside each smooth segment.
    pub pieces: Vec<(usize, usize)>,
    pub step_count: usize,
    /// Endpoint drift between `steps` and `2·steps` (coefficientwise max).
    pub error_estimate: f64,
}

/// Steps per segment, proportional to segment length, at least `min_per` each.
fn step_plan(bp: &[f64], steps: usize, min_per: usize) -> Vec<usize> {
    bp.windows(2)
        .map(|w| (((w[1] - w[0]) * steps as f64).round() as usize).max(min_per))
        .collect()
}

/// Solves `η′ = η·γ`, `η(0) = 1` with `steps` Magnus steps and once more with twice
/// as many for the error estimate.
pub fn evol(group: &GermGroup, gamma: &LieCurve, steps: usize) -> Result<EvolutionResult> {
    let coarse = evolve(group, gamma, steps)?;
    let fine = evolve(group, gamma, 2 * steps)?;
    let space = group.space();
    let n = coarse.endpoint.level().max(fine.endpoint.level());
    let a = space.bond(coarse.endpoint.element(), n)?;
    let b = space.bond(fine.endpoint.element(), n)?;
    let drift = a
        .reps()
        .iter()
        .zip(b.reps())
        .map(|(x, y)| x.coeff_distance(y))
        .fold(0.0, f64::max);
    Ok(EvolutionResult {
        error_estimate: drift,
        ..coarse
    })
}

/// A single product integral without the doubling run.
pub fn evolve(group: &GermGroup, gamma: &LieCurve, steps: usize) -> Result<EvolutionResult> {
    if steps < 4 {
        return Err(Error::Precondition(format!("need at least 4 steps, got {steps}")));
    }
    let budget = group.lie().bch_radius();
    let sup = gamma.sup_bound();
    if sup >= budget {
        return Err(Error::Precondition(format!(
            "curve norm bound {sup:.6} is not below the Ω budget {budget:.6}"
        )));
    }
    let space = group.space();
    let bp = gamma.breakpoints();
    let plan = step_plan(bp, steps, 4);
    let mut eta = group.identity(gamma.level())?;
    let mut trajectory = vec![(0.0, eta.clone())];
    let mut pieces = Vec::with_capacity(plan.len());
    for (i, &m) in plan.iter().enumerate() {
        let start = trajectory.len() - 1;
        let h = (bp[i + 1] - bp[i]) / m as f64;
        for j in 0..m {
            let tau = (j as f64 + 0.5) * h;
            let a0 = gamma.spline.derivative_on(space, i, tau, 0)?;
            let a1 = gamma.spline.derivative_on(space, i, tau, 1)?;
            let a2 = gamma.spline.derivative_on(space, i, tau, 2)?;
            let br = a0
                .reps()
                .iter()
                .zip(a1.reps())
                .map(|(x, y)| x.bracket(y))
                .collect::<Result<Vec<_>>>()?;
            let br = space.element(a0.level(), br)?;
            let omega = combine(space, &[(&a0, h), (&a2, h * h * h / 24.0), (&br, h * h * h / 12.0)])?;
            let t_mid = bp[i] + tau;
            if omega.norm_upper() >= budget {
                return Err(Error::Domain(format!(
                    "step at t = {t_mid:.6} leaves the Ω budget ({:.6})",
                    omega.norm_upper()
                )));
            }
            let step = group
                .exp(&omega)
                .map_err(|e| Error::Domain(format!("EXP failed at t = {t_mid:.6}: {e}")))?;
            eta = group
                .group_mul(&eta, &step)
                .map_err(|e| Error::Domain(format!("product failed at t = {t_mid:.6}: {e}")))?;
            let t = if j + 1 == m { bp[i + 1] } else { bp[i] + (j + 1) as f64 * h };
            trajectory.push((t, eta.clone()));
        }
        pieces.push((start, trajectory.len() - 1));
    }
    Ok(EvolutionResult {
        endpoint: eta,
        trajectory,
        pieces,
        step_count: plan.iter().sum(),
        error_estimate: f64::NAN,
    })
}

/// Pointwise oracle: classical RK4 for `η′ = η·γ(t)(x)` with `ORACLE_REFINEMENT`
/// times as many steps, aligned to the breakpoints.
pub fn rk4_oracle(gamma: &LieCurve, x: &[Complex64], steps: usize) -> Result<Coeff> {
    let coeffs = gamma.spline.pointwise(x)?;
    let bp = gamma.breakpoints();
    let m0 = coeffs[0][0].nrows();
    let mut eta = Coeff::identity(m0, m0);
    let plan = step_plan(bp, steps * ORACLE_REFINEMENT, 4);
    for (i, &m) in plan.iter().enumerate() {
        let h = (bp[i + 1] - bp[i]) / m as f64;
        let f = |tau: f64, y: &Coeff| y * eval_poly(&coeffs[i], tau, 0);
        let hc = Complex64::new(h, 0.0);
        for j in 0..m {
            let tau = j as f64 * h;
            let k1 = f(tau, &eta);
            let k2 = f(tau + 0.5 * h, &(&eta + &k1 * (hc * 0.5)));
            let k3 = f(tau + 0.5 * h, &(&eta + &k2 * (hc * 0.5)));
            let k4 = f(tau + h, &(&eta + &k3 * hc));
            eta += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0);
        }
    }
    Ok(eta)
}

/// Per-anchor product of two elements after bonding to a common level.
pub fn mul_elements(space: &GermSpace, a: &BHolElement, b: &BHolElement) -> Result<BHolElement> {
    let n = a.level().max(b.level());
    let (a, b) = (space.bond(a, n)?, space.bond(b, n)?);
    let reps = a
        .reps()
        .iter()
        .zip(b.reps())
        .map(|(x, y)| x.mul(y))
        .collect::<Result<Vec<_>>>()?;
    space.element(n, reps)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `η(t)⁻¹ η^{(k)}(t)` for `k = 1, 2`, evaluated on segment `i` at local time `tau`.
fn inverse_times_derivatives(
    group: &GermGroup,
    eta: &GroupCurve,
    i: usize,
    tau: f64,
) -> Result<(BHolElement, BHolElement)> {
    let space = group.space();
    let t = eta.breakpoints()[i] + tau;
    let value = eta.spline.derivative_on(space, i, tau, 0)?;
    let g = group
        .group_element(value)
        .map_err(|e| Error::Domain(format!("η is not certified invertible at t = {t:.6}: {e}")))?;
    let inv = group.group_inv(&g)?;
    let d1 = eta.spline.derivative_on(space, i, tau, 1)?;
    let d2 = eta.spline.derivative_on(space, i, tau, 2)?;
    Ok((
        mul_elements(space, inv.element(), &d1)?,
        mul_elements(space, inv.element(), &d2)?,
    ))
}

/// `(δ^ℓη)(t) = η(t)⁻¹ η′(t)`.
pub fn left_log_derivative_at(group: &GermGroup, eta: &GroupCurve, t: f64) -> Result<BHolElement> {
    let (i, tau) = eta.spline.locate(t)?;
    Ok(inverse_times_derivatives(group, eta, i, tau)?.0)
}

/// `δ^ℓη` as a Lie curve: cubic Hermite interpolation on `pieces` subintervals of
/// every segment, using `γ′ = −γ² + η⁻¹η″` for the slopes.
pub fn left_log_derivative(group: &GermGroup, eta: &GroupCurve, pieces: usize) -> Result<LieCurve> {
    let space = group.space();
    let bp = eta.breakpoints();
    let pieces = pieces.max(1);
    let mut knots = Vec::new();
    let mut segments = Vec::new();
    for i in 0..bp.len() - 1 {
        let h = (bp[i + 1] - bp[i]) / pieces as f64;
        let node = |j: usize| -> Result<(BHolElement, BHolElement)> {
            let (g, e2) = inverse_times_derivatives(group, eta, i, j as f64 * h)?;
            let sq = mul_elements(space, &g, &g)?;
            let slope = combine(space, &[(&e2, 1.0), (&sq, -1.0)])?;
            Ok((g, slope))
        };
        let mut prev = node(0)?;
        for j in 0..pieces {
            let next = node(j + 1)?;
            knots.push(bp[i] + j as f64 * h);
            let (y0, d0) = &prev;
            let (y1, d1) = &next;
            let n = [y0, y1, d0, d1].iter().map(|e| e.level()).max().unwrap_or(1);
            let (y0, y1, d0, d1) = (space.bond(y0, n)?, space.bond(y1, n)?, space.bond(d0, n)?, space.bond(d1, n)?);
            let c2 = combine(space, &[(&y1, 3.0 / (h * h)), (&y0, -3.0 / (h * h)), (&d0, -2.0 / h), (&d1, -1.0 / h)])?;
            let c3 = combine(space, &[(&y0, 2.0 / (h * h * h)), (&y1, -2.0 / (h * h * h)), (&d0, 1.0 / (h * h)), (&d1, 1.0 / (h * h))])?;
            segments.push(vec![y0, d0, c2, c3]);
            prev = next;
        }
    }
    knots.push(1.0);
    let n = segments.iter().flatten().map(|e| e.level()).max().unwrap_or(1);
    let segments = segments
        .into_iter()
        .map(|s| s.iter().map(|e| space.bond(e, n)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    LieCurve::new(space, knots, segments)
}

/// Fourth-order difference weights (in units of `1/(12h)`) at position `j` of `0..=m`.
fn stencil(j: usize, m: usize) -> (usize, [f64; 5]) {
    if j < 2 {
        let w = if j == 0 {
            [-25.0, 48.0, -36.0, 16.0, -3.0]
        } else {
            [-3.0, -10.0, 18.0, -6.0, 1.0]
        };
        (0, w)
    } else if j + 2 > m {
        let w = if j == m {
            [3.0, -16.0, 36.0, -48.0, 25.0]
        } else {
            [-1.0, 6.0, -18.0, 10.0, 3.0]
        };
        (m - 4, w)
    } else {
        (j - 2, [1.0, -8.0, 0.0, 8.0, -1.0])
    }
}

/// `δ^ℓ` of a sampled trajectory: fourth-order differences inside every smooth piece.
pub fn sampled_left_log_derivative(group: &GermGroup, evo: &EvolutionResult) -> Result<Vec<(f64, BHolElement)>> {
    let space = group.space();
    let n = evo.trajectory.iter().map(|(_, g)| g.level()).max().unwrap_or(1);
    let etas: Vec<BHolElement> = evo
        .trajectory
        .iter()
        .map(|(_, g)| space.bond(g.element(), n))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(etas.len());
    for &(a, b) in &evo.pieces {
        let m = b - a;
        if m < 4 {
            return Err(Error::Precondition("each smooth piece needs at least 4 steps".into()));
        }
        let h = (evo.trajectory[b].0 - evo.trajectory[a].0) / m as f64;
        for j in 0..=m {
            let (base, w) = stencil(j, m);
            let terms: Vec<(&BHolElement, f64)> = (0..5).map(|k| (&etas[a + base + k], w[k] / (12.0 * h))).collect();
            let d = combine(space, &terms)?;
            let g = group.group_element(etas[a + j].clone())?;
            let inv = group.group_inv(&g)?;
            out.push((evo.trajectory[a + j].0, mul_elements(space, inv.element(), &d)?));
        }
    }
    Ok(out)
}

/// Evaluation points at `0.4 ρ_n` around every anchor.
pub fn sample_points(space: &GermSpace, level: usize, per_anchor: usize) -> Vec<Vec<Complex64>> {
    let rho = 0.4 * space.radius(level);
    space
        .anchors()
        .iter()
        .flat_map(|a| sphere_points(a, rho, per_anchor))
        .collect()
}

fn worst_pointwise<F, G>(points: &[Vec<Complex64>], f: F, g: G) -> Result<f64>
where
    F: Fn(&[Complex64]) -> Result<Coeff>,
    G: Fn(&[Complex64]) -> Result<Coeff>,
{
    let mut worst: f64 = 0.0;
    for x in points {
        worst = worst.max(max_abs_diff(&f(x)?, &g(x)?));
    }
    Ok(worst)
}

/// Germ-level evolution against the pointwise RK4 oracle.
pub fn oracle_check(group: &GermGroup, gamma: &LieCurve, steps: usize, tol: f64) -> Result<CheckReport> {
    let evo = evol(group, gamma, steps)?;
    let points = sample_points(group.space(), evo.endpoint.level(), 20);
    let mut report = CheckReport::new("evol_vs_rk4")
        .param("steps", steps)
        .param("oracle_steps", steps * ORACLE_REFINEMENT)
        .param("tolerance", tol)
        .param("error_estimate", evo.error_estimate);
    for (k, x) in points.iter().enumerate() {
        let diff = max_abs_diff(&evo.endpoint.element().eval(x)?, &rk4_oracle(gamma, x, steps)?);
        report.record(tol - diff, || json!({"point": k, "residual": diff}));
    }
    Ok(report)
}

/// `δ^ℓ(evol trajectory) ≈ γ` on the step grid.
pub fn roundtrip_check(group: &GermGroup, gamma: &LieCurve, steps: usize, tol: f64) -> Result<CheckReport> {
    let evo = evolve(group, gamma, steps)?;
    let deltas = sampled_left_log_derivative(group, &evo)?;
    let points = sample_points(group.space(), gamma.level(), 8);
    let mut report = CheckReport::new("delta_roundtrip")
        .param("steps", steps)
        .param("tolerance", tol);
    for (t, d) in &deltas {
        let r = worst_pointwise(&points, |x| d.eval(x), |x| gamma.value_at(*t, x))?;
        report.record(tol - r, || json!({"t": t, "residual": r}));
    }
    Ok(report)
}

/// `evol(δ^ℓη) = η(1)` for a group curve with `η(0) = 1`.
pub fn inverse_roundtrip_check(
    group: &GermGroup,
    eta: &GroupCurve,
    pieces: usize,
    steps: usize,
    tol: f64,
) -> Result<CheckReport> {
    let space = group.space();
    let start = eta.value(space, 0.0)?;
    let id = group.identity(start.level())?;
    let offset = start
        .reps()
        .iter()
        .zip(id.element().reps())
        .map(|(a, b)| a.coeff_distance(b))
        .fold(0.0, f64::max);
    if offset > 1e-12 {
        return Err(Error::Precondition(format!("η(0) differs from 1 by {offset:.3e}")));
    }
    let gamma = left_log_derivative(group, eta, pieces)?;
    let evo = evolve(group, &gamma, steps)?;
    let points = sample_points(space, evo.endpoint.level(), 20);
    let r = worst_pointwise(&points, |x| evo.endpoint.element().eval(x), |x| eta.value_at(1.0, x))?;
    let mut report = CheckReport::new("evol_of_delta")
        .param("pieces", pieces)
        .param("steps", steps)
        .param("tolerance", tol);
    report.record(tol - r, || json!({"residual": r}));
    Ok(report)
}

/// `δ^ℓ(γη) = Ad(η⁻¹).δ^ℓγ + δ^ℓη` at the given times.
pub fn product_rule_check(
    group: &GermGroup,
    g: &GroupCurve,
    h: &GroupCurve,
    times: &[f64],
    tol: f64,
) -> Result<CheckReport> {
    let space = group.space();
    let gh = g.mul(group, h)?;
    let points = sample_points(space, gh.level(), 8);
    let mut report = CheckReport::new("delta_product_rule").param("tolerance", tol);
    for &t in times {
        let lhs = left_log_derivative_at(group, &gh, t)?;
        let dg = left_log_derivative_at(group, g, t)?;
        let dh = left_log_derivative_at(group, h, t)?;
        let h_t = group.group_element(h.value(space, t)?)?;
        let conj = group.ad(&group.group_inv(&h_t)?, &dg)?;
        let rhs = combine(space, &[(&conj, 1.0), (&dh, 1.0)])?;
        let r = worst_pointwise(&points, |x| lhs.eval(x), |x| rhs.eval(x))?;
        report.record(tol - r, || json!({"t": t, "residual": r}));
    }
    Ok(report)
}

pub const SMOOTHNESS_SCALES: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Observed order of the central difference quotients of `s ↦ evol(γ + s·h)`.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessEvidence {
    pub scales: Vec<f64>,
    /// `max_x ‖D(s_k) − D(s_{k+1})‖`
    pub differences: Vec<f64>,
    /// `log₂` of successive difference ratios; the last entry is the finest.
    pub orders: Vec<f64>,
}

/// Central quotients `D(s) = [evol(γ+sh) − evol(γ−sh)]/(2s)` at the given scales.
/// Differentiability shows as `D(s) − D(s/2) = O(s²)`, i.e. orders near 2. This is
/// finite-difference evidence, not a proof of smoothness.
pub fn smoothness_evidence(
    group: &GermGroup,
    gamma: &LieCurve,
    h: &LieCurve,
    scales: &[f64],
    steps: usize,
) -> Result<SmoothnessEvidence> {
    let space = group.space();
    let points = sample_points(space, gamma.level().max(h.level()), 12);
    let mut quotients: Vec<Vec<Coeff>> = Vec::with_capacity(scales.len());
    for &s in scales {
        let plus = evolve(group, &gamma.add_scaled(space, h, s)?, steps)?.endpoint;
        let minus = evolve(group, &gamma.add_scaled(space, h, -s)?, steps)?.endpoint;
        let mut q = Vec::with_capacity(points.len());
        for x in &points {
            q.push((plus.element().eval(x)? - minus.element().eval(x)?) * Complex64::new(0.5 / s, 0.0));
        }
        quotients.push(q);
    }
    let differences: Vec<f64> = quotients
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| max_abs_diff(a, b)).fold(0.0, f64::max))
        .collect();
    let orders = differences
        .windows(2)
        .zip(scales.windows(2))
        .map(|(d, s)| (d[0] / d[1]).ln() / (s[0] / s[1]).ln())
        .collect();
    Ok(SmoothnessEvidence {
        scales: scales.to_vec(),
        differences,
        orders,
    })
}

pub fn smoothness_check(
    group: &GermGroup,
    gamma: &LieCurve,
    h: &LieCurve,
    steps: usize,
    band: (f64, f64),
) -> Result<CheckReport> {
    let ev = smoothness_evidence(group, gamma, h, &SMOOTHNESS_SCALES, steps)?;
    let order = *ev.orders.last().expect("at least three scales");
    let margin = (order - band.0).min(band.1 - order);
    let mut report = CheckReport::new("evol_smoothness")
        .param("scales", &ev.scales)
        .param("differences", &ev.differences)
        .param("orders", &ev.orders)
        .param("band", [band.0, band.1]);
    report.record(margin, || json!({"order": order}));
    report.note("finite-difference evidence of differentiability, not a proof of smoothness");
    Ok(report)
}

/// CSV of the trajectory at the given points: `t,point,` then re/im per entry.
pub fn trajectory_csv(evo: &EvolutionResult, points: &[Vec<Complex64>]) -> Result<String> {
    let m = evo.endpoint.element().reps()[0].space().shape().0;
    let mut out = String::from("t,point");
    for i in 0..m {
        for j in 0..m {
            out.push_str(&format!(",m{i}{j}_re,m{i}{j}_im"));
        }
    }
    out.push('\n');
    for (t, g) in &evo.trajectory {
        for (k, x) in points.iter().enumerate() {
            let v = g.element().eval(x)?;
            out.push_str(&format!("{t},{k}"));
            for i in 0..m {
                for j in 0..m {
                    out.push_str(&format!(",{:e},{:e}", v[(i, j)].re, v[(i, j)].im));
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Random continuous cubic spline with `segments` pieces, coefficient germs of
/// polynomial degree ≤ `degree`, scaled so that `sup_bound ≤ norm`.
pub fn random_lie_curve<R: Rng + ?Sized>(
    group: &GermGroup,
    rng: &mut R,
    level: usize,
    segments: usize,
    degree: usize,
    norm: f64,
) -> Result<LieCurve> {
    let mut knots = vec![0.0];
    for i in 1..segments {
        let base = i as f64 / segments as f64;
        knots.push(base + rng.random_range(-0.25..0.25) / segments as f64);
    }
    knots.push(1.0);
    random_lie_curve_on(group, rng, level, knots, degree, norm)
}

/// As [`random_lie_curve`] on the given knots.
pub fn random_lie_curve_on<R: Rng + ?Sized>(
    group: &GermGroup,
    rng: &mut R,
    level: usize,
    knots: Vec<f64>,
    degree: usize,
    norm: f64,
) -> Result<LieCurve> {
    let space = group.space();
    let values = (0..knots.len())
        .map(|_| random_germ(space, rng, level, degree, norm))
        .collect::<Result<Vec<_>>>()?;
    let slopes = (0..knots.len())
        .map(|_| random_germ(space, rng, level, degree, norm))
        .collect::<Result<Vec<_>>>()?;
    let curve = LieCurve::hermite(space, knots, &values, &slopes)?;
    let sup = curve.sup_bound();
    if sup <= norm {
        return Ok(curve);
    }
    let scale = norm / sup;
    let segs = curve
        .segments()
        .iter()
        .map(|s| s.iter().map(|c| combine(space, &[(c, scale)])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    LieCurve::new(space, curve.breakpoints().to_vec(), segs)
}

/// `η(t) = 1 + tA + t²B` on one segment, `A, B` random germs of the given norm.
pub fn random_group_curve<R: Rng + ?Sized>(
    group: &GermGroup,
    rng: &mut R,
    level: usize,
    degree: usize,
    norm: f64,
) -> Result<GroupCurve> {
    let space = group.space();
    let id = group.identity(level)?;
    let a = random_germ(space, rng, level, degree, norm)?;
    let b = random_germ(space, rng, level, degree, norm)?;
    GroupCurve::new(vec![0.0, 1.0], vec![vec![id.element().clone(), a, b]])
}

/// `t ↦ EXP(t ξ)` as the pointwise matrix exponential, for oracles.
pub fn one_parameter_value(xi: &BHolElement, t: f64, x: &[Complex64]) -> Result<Coeff> {
    Ok(exp_mat(&(xi.eval(x)? * Complex64::new(t, 0.0))))
}

/// Largest commutator of curve values at sampled times and points (0 for
/// commuting-valued curves).
pub fn commutation_defect(gamma: &LieCurve, points: &[Vec<Complex64>]) -> Result<f64> {
    let ts: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
    let mut worst: f64 = 0.0;
    for x in points {
        for &s in &ts {
            for &t in &ts {
                let c = commutator(&gamma.value_at(s, x)?, &gamma.value_at(t, x)?);
                worst = worst.max(c.norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientSpace;
    use crate::lie::MatrixLieBackend;
    use crate::random::substream;

    fn group() -> GermGroup {
        let space = GermSpace::origin(CoefficientSpace::Matrix(2), 6);
        GermGroup::new(space, MatrixLieBackend::new(2)).unwrap()
    }

    fn curve(g: &GermGroup, seed: u64, segments: usize, norm: f64) -> LieCurve {
        let mut rng = substream(seed, 0);
        random_lie_curve(g, &mut rng, 1, segments, 3, norm).unwrap()
    }

    fn endpoint_gap(a: &EvolutionResult, b: &EvolutionResult, points: &[Vec<Complex64>]) -> f64 {
        worst_pointwise(points, |x| a.endpoint.element().eval(x), |x| b.endpoint.element().eval(x)).unwrap()
    }

    #[test]
    fn stencils_are_exact_on_quartics() {
        for m in [4usize, 5, 9] {
            for j in 0..=m {
                let (base, w) = stencil(j, m);
                let p = |t: f64| 1.0 + 2.0 * t - t * t + 0.5 * t.powi(3) - 0.25 * t.powi(4);
                let dp = |t: f64| 2.0 - 2.0 * t + 1.5 * t * t - t.powi(3);
                let d: f64 = (0..5).map(|k| w[k] * p((base + k) as f64)).sum::<f64>() / 12.0;
                assert!((d - dp(j as f64)).abs() < 1e-9, "m={m} j={j}");
            }
        }
    }

    #[test]
    fn constant_curve_gives_exp() {
        let g = group();
        let mut rng = substream(1, 0);
        let xi = random_germ(g.space(), &mut rng, 1, 3, 0.5).unwrap();
        let evo = evol(&g, &LieCurve::constant(&xi), DEFAULT_STEPS).unwrap();
        let pts = sample_points(g.space(), evo.endpoint.level(), 20);
        let r = worst_pointwise(&pts, |x| evo.endpoint.element().eval(x), |x| one_parameter_value(&xi, 1.0, x)).unwrap();
        assert!(r < 1e-8, "{r}");
        let trajectory_gap = evo
            .trajectory
            .iter()
            .map(|(t, e)| worst_pointwise(&pts, |x| e.element().eval(x), |x| one_parameter_value(&xi, *t, x)).unwrap())
            .fold(0.0, f64::max);
        assert!(trajectory_gap < 1e-8);
    }

    #[test]
    fn zero_curve_stays_at_identity() {
        let g = group();
        let zero = g.space().zero(1).unwrap();
        let evo = evolve(&g, &LieCurve::constant(&zero), 8).unwrap();
        let id = g.identity(1).unwrap();
        let pts = sample_points(g.space(), 1, 8);
        assert_eq!(worst_pointwise(&pts, |x| evo.endpoint.element().eval(x), |x| id.element().eval(x)).unwrap(), 0.0);
    }

    #[test]
    fn commuting_curve_integrates_exactly() {
        let g = group();
        let mut rng = substream(2, 0);
        let xi = random_germ(g.space(), &mut rng, 1, 3, 0.3).unwrap();
        // γ(t) = (1/2 + t)·ξ, ∫₀¹ = ξ
        let segs = vec![vec![
            combine(g.space(), &[(&xi, 0.5)]).unwrap(),
            combine(g.space(), &[(&xi, 1.0)]).unwrap(),
        ]];
        let gamma = LieCurve::new(g.space(), vec![0.0, 1.0], segs).unwrap();
        let pts = sample_points(g.space(), 1, 8);
        assert!(commutation_defect(&gamma, &pts).unwrap() < 1e-12);
        let evo = evol(&g, &gamma, 32).unwrap();
        let r = worst_pointwise(&pts, |x| evo.endpoint.element().eval(x), |x| one_parameter_value(&xi, 1.0, x)).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn magnus_matches_rk4_oracle() {
        let g = group();
        for seed in 0..3 {
            let gamma = curve(&g, 10 + seed, 3, 0.6);
            let report = oracle_check(&g, &gamma, DEFAULT_STEPS, 1e-6).unwrap();
            assert!(report.passed, "{:?}", report.failures);
        }
    }

    #[test]
    fn magnus_error_estimate_is_small_and_fourth_order() {
        let g = group();
        let gamma = curve(&g, 20, 2, 0.6);
        let a = evol(&g, &gamma, 16).unwrap();
        let b = evol(&g, &gamma, 32).unwrap();
        assert!(a.error_estimate > 0.0);
        let ratio = a.error_estimate / b.error_estimate;
        assert!(ratio > 10.0, "ratio {ratio}");
    }

    #[test]
    fn reparametrization_leaves_endpoint_unchanged() {
        let g = group();
        let gamma = curve(&g, 30, 2, 0.3);
        let squeezed = gamma.compress(g.space(), 0.5).unwrap();
        let a = evol(&g, &gamma, DEFAULT_STEPS).unwrap();
        let b = evol(&g, &squeezed, 2 * DEFAULT_STEPS).unwrap();
        let pts = sample_points(g.space(), a.endpoint.level(), 12);
        assert!(endpoint_gap(&a, &b, &pts) < 1e-9);
    }

    #[test]
    fn delta_of_evol_recovers_curve() {
        let g = group();
        for seed in 0..2 {
            let gamma = curve(&g, 40 + seed, 2, 0.6);
            let report = roundtrip_check(&g, &gamma, 128, 1e-6).unwrap();
            assert!(report.passed, "{:?}", report.failures);
        }
    }

    #[test]
    fn evol_of_delta_recovers_group_curve() {
        let g = group();
        let mut rng = substream(50, 0);
        let eta = random_group_curve(&g, &mut rng, 1, 3, 0.2).unwrap();
        let report = inverse_roundtrip_check(&g, &eta, 16, 128, 1e-6).unwrap();
        assert!(report.passed, "{:?}", report.failures);
    }

    #[test]
    fn hermite_delta_interpolates_exact_values() {
        let g = group();
        let mut rng = substream(51, 0);
        let eta = random_group_curve(&g, &mut rng, 1, 3, 0.3).unwrap();
        let gamma = left_log_derivative(&g, &eta, 4).unwrap();
        let pts = sample_points(g.space(), gamma.level(), 8);
        for t in [0.0, 0.25, 0.5, 1.0] {
            let exact = left_log_derivative_at(&g, &eta, t).unwrap();
            let r = worst_pointwise(&pts, |x| exact.eval(x), |x| gamma.value_at(t, x)).unwrap();
            assert!(r < 1e-10, "t={t} r={r}");
        }
    }

    #[test]
    fn product_rule_holds() {
        let g = group();
        let mut rng = substream(60, 0);
        let a = random_group_curve(&g, &mut rng, 1, 3, 0.25).unwrap();
        let b = random_group_curve(&g, &mut rng, 1, 3, 0.25).unwrap();
        let report = product_rule_check(&g, &a, &b, &[0.0, 0.3, 0.7, 1.0], 1e-8).unwrap();
        assert!(report.passed, "{:?}", report.failures);
    }

    #[test]
    fn smoothness_order_is_two() {
        let g = group();
        let gamma = curve(&g, 70, 2, 0.4);
        let mut rng = substream(71, 0);
        let h = random_lie_curve_on(&g, &mut rng, 1, gamma.breakpoints().to_vec(), 3, 0.2).unwrap();
        let report = smoothness_check(&g, &gamma, &h, 32, (1.9, 2.1)).unwrap();
        assert!(report.passed, "{:?}", report.params);
    }

    #[test]
    fn trajectory_csv_has_one_row_per_time_and_point() {
        let g = group();
        let gamma = curve(&g, 80, 1, 0.3);
        let evo = evolve(&g, &gamma, 8).unwrap();
        let pts = sample_points(g.space(), 1, 3);
        let csv = trajectory_csv(&evo, &pts).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0].split(',').count(), 2 + 8);
        assert_eq!(lines.len(), 1 + evo.trajectory.len() * pts.len());
    }

    #[test]
    fn discontinuous_segments_are_rejected() {
        let g = group();
        let mut rng = substream(90, 0);
        let a = random_germ(g.space(), &mut rng, 1, 2, 0.3).unwrap();
        let b = random_germ(g.space(), &mut rng, 1, 2, 0.3).unwrap();
        assert!(LieCurve::new(g.space(), vec![0.0, 0.5, 1.0], vec![vec![a], vec![b]]).is_err());
    }

    #[test]
    fn concatenation_cocycle() {
        let g = group();
        let gamma = curve(&g, 100, 3, 0.3);
        let whole = evol(&g, &gamma, DEFAULT_STEPS).unwrap();
        let first = evol(&g, &gamma.restrict(g.space(), 0.0, 0.5).unwrap(), DEFAULT_STEPS).unwrap();
        let second = evol(&g, &gamma.restrict(g.space(), 0.5, 1.0).unwrap(), DEFAULT_STEPS).unwrap();
        let joined = g.group_mul(&first.endpoint, &second.endpoint).unwrap();
        let pts = sample_points(g.space(), whole.endpoint.level(), 12);
        let r = worst_pointwise(&pts, |x| whole.endpoint.element().eval(x), |x| joined.element().eval(x)).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn restrict_to_whole_interval_is_identity() {
        let g = group();
        let gamma = curve(&g, 101, 2, 0.3);
        let same = gamma.restrict(g.space(), 0.0, 1.0).unwrap();
        let pts = sample_points(g.space(), 1, 4);
        for t in [0.0, 0.33, 0.8, 1.0] {
            let r = worst_pointwise(&pts, |x| gamma.value_at(t, x), |x| same.value_at(t, x)).unwrap();
            assert!(r < 1e-13);
        }
    }

    fn exp_taylor_curve(g: &GermGroup, xi: &BHolElement, degree: usize) -> GroupCurve {
        let space = g.space();
        let mut terms = vec![g.identity(xi.level()).unwrap().element().clone()];
        for k in 1..=degree {
            let next = mul_elements(space, terms.last().unwrap(), xi).unwrap();
            terms.push(combine(space, &[(&next, 1.0 / k as f64)]).unwrap());
        }
        GroupCurve::new(vec![0.0, 1.0], vec![terms]).unwrap()
    }

    #[test]
    fn one_parameter_subgroup_has_constant_delta() {
        let g = group();
        let mut rng = substream(110, 0);
        let xi = random_germ(g.space(), &mut rng, 1, 3, 0.3).unwrap();
        let eta = exp_taylor_curve(&g, &xi, 24);
        let pts = sample_points(g.space(), 1, 8);
        for t in [0.0, 0.4, 1.0] {
            let d = left_log_derivative_at(&g, &eta, t).unwrap();
            let r = worst_pointwise(&pts, |x| d.eval(x), |x| xi.eval(x)).unwrap();
            assert!(r < 1e-8, "t={t} r={r}");
        }
        let report = roundtrip_check(&g, &LieCurve::constant(&xi), DEFAULT_STEPS, 1e-8).unwrap();
        assert!(report.passed, "{:?}", report.failures);
    }

    #[test]
    fn constant_group_curve_has_zero_delta() {
        let g = group();
        let mut rng = substream(111, 0);
        let xi = random_germ(g.space(), &mut rng, 1, 3, 0.3).unwrap();
        let h = g.exp(&xi).unwrap();
        let eta = GroupCurve::new(vec![0.0, 1.0], vec![vec![h.element().clone()]]).unwrap();
        let d = left_log_derivative(&g, &eta, 2).unwrap();
        assert_eq!(d.sup_bound(), 0.0);
    }
}
