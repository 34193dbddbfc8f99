//! Matrix Lie backend: gl(m,ℂ) with the bracket-compatible norm, GL(m,ℂ) with `exp`,
//! `log` and `Ad`, and the Baker–Campbell–Hausdorff product via Dynkin's formula.
//!
//! The Dynkin expansion is tabulated once per truncation order as a list of
//! right-nested bracket words `[w_1,[w_2,[…,w_k]]]` in the letters `X`, `Y` with exact
//! rational coefficients. Words are stored in a suffix trie so that shared inner
//! brackets are computed once. The same table drives matrix arguments and
//! series-valued arguments through [`BracketAlgebra`].

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;

use crate::coeff::{commutator, operator_norm, Coeff, CoefficientSpace};
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

pub const DEFAULT_BCH_ORDER: usize = 8;
pub const MAX_BCH_ORDER: usize = 12;

/// Elements on which the BCH words can be evaluated.
pub trait BracketAlgebra: Clone {
    fn bracket(&self, other: &Self) -> Result<Self>;
    /// `αa + βb`
    fn combine(a: &Self, b: &Self, alpha: f64, beta: f64) -> Result<Self>;
}

impl BracketAlgebra for Coeff {
    fn bracket(&self, other: &Self) -> Result<Self> {
        Ok(commutator(self, other))
    }
    fn combine(a: &Self, b: &Self, alpha: f64, beta: f64) -> Result<Self> {
        Ok(a * Complex64::new(alpha, 0.0) + b * Complex64::new(beta, 0.0))
    }
}

impl BracketAlgebra for TruncatedSeries {
    fn bracket(&self, other: &Self) -> Result<Self> {
        TruncatedSeries::bracket(self, other)
    }
    fn combine(a: &Self, b: &Self, alpha: f64, beta: f64) -> Result<Self> {
        TruncatedSeries::linear(a, b, Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }
}

#[derive(Debug, Clone, Copy)]
struct TrieNode {
    /// 0 = X, 1 = Y
    letter: u8,
    /// Node of the suffix after this letter; `None` for a single letter.
    inner: Option<usize>,
    coeff: f64,
}

/// Dynkin coefficients up to a fixed order.
#[derive(Debug)]
pub struct DynkinTable {
    order: usize,
    words: Vec<(Vec<u8>, Ratio<i128>)>,
    nodes: Vec<TrieNode>,
    /// Taylor coefficients of `−ln(2 − e^s)`, the scalar majorant of the BCH series.
    majorant: Vec<f64>,
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

impl DynkinTable {
    fn build(order: usize) -> Self {
        let mut acc: BTreeMap<Vec<u8>, Ratio<i128>> = BTreeMap::new();
        // Enumerate sequences (p_1,q_1),…,(p_n,q_n) with p_i + q_i ≥ 1 and Σ ≤ order.
        fn rec(
            order: usize,
            pairs: &mut Vec<(usize, usize)>,
            degree: usize,
            acc: &mut BTreeMap<Vec<u8>, Ratio<i128>>,
        ) {
            if !pairs.is_empty() {
                let mut word = Vec::with_capacity(degree);
                let mut denom: i128 = (pairs.len() * degree) as i128;
                for &(p, q) in pairs.iter() {
                    word.extend(std::iter::repeat_n(0u8, p));
                    word.extend(std::iter::repeat_n(1u8, q));
                    denom *= factorial(p) * factorial(q);
                }
                let vanishes = word.len() >= 2 && word[word.len() - 1] == word[word.len() - 2];
                if !vanishes {
                    let sign: i128 = if pairs.len() % 2 == 1 { 1 } else { -1 };
                    *acc.entry(word).or_insert_with(|| Ratio::from_integer(0)) +=
                        Ratio::new(sign, denom);
                }
            }
            for m in 1..=(order - degree) {
                for p in 0..=m {
                    pairs.push((p, m - p));
                    rec(order, pairs, degree + m, acc);
                    pairs.pop();
                }
            }
        }
        rec(order, &mut Vec::new(), 0, &mut acc);
        let words: Vec<_> = acc.into_iter().filter(|(_, c)| *c != Ratio::from_integer(0)).collect();

        let mut nodes: Vec<TrieNode> = Vec::new();
        let mut index: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        for (w, c) in &words {
            let mut inner = None;
            for start in (0..w.len()).rev() {
                let suffix = w[start..].to_vec();
                let id = match index.get(&suffix) {
                    Some(&id) => id,
                    None => {
                        nodes.push(TrieNode { letter: w[start], inner, coeff: 0.0 });
                        index.insert(suffix, nodes.len() - 1);
                        nodes.len() - 1
                    }
                };
                inner = Some(id);
            }
            let id = inner.expect("words are nonempty");
            nodes[id].coeff = *c.numer() as f64 / *c.denom() as f64;
        }

        // −ln(1 − u) with u = e^s − 1
        let n = order + 1;
        let mut u = vec![0.0; n + 1];
        let mut f = 1.0;
        for (k, uk) in u.iter_mut().enumerate().skip(1) {
            f *= k as f64;
            *uk = 1.0 / f;
        }
        let mut majorant = vec![0.0; n + 1];
        let mut power = u.clone();
        for j in 1..=n {
            if j > 1 {
                power = crate::series::scalar_mul_trunc(&power, &u, n);
            }
            for (m, p) in majorant.iter_mut().zip(&power) {
                *m += p / j as f64;
            }
        }
        DynkinTable { order, words, nodes, majorant }
    }

    /// Shared read-only table for `order` (built on first use).
    pub fn get(order: usize) -> &'static DynkinTable {
        assert!(
            (1..=MAX_BCH_ORDER).contains(&order),
            "BCH order must be in 1..={MAX_BCH_ORDER}"
        );
        #[allow(clippy::declare_interior_mutable_const)]
        const EMPTY: OnceLock<DynkinTable> = OnceLock::new();
        static TABLES: [OnceLock<DynkinTable>; MAX_BCH_ORDER + 1] = [EMPTY; MAX_BCH_ORDER + 1];
        TABLES[order].get_or_init(|| DynkinTable::build(order))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Collected words with their exact coefficients.
    pub fn words(&self) -> &[(Vec<u8>, Ratio<i128>)] {
        &self.words
    }

    /// Evaluates the truncated BCH series `x * y`.
    pub fn evaluate<T: BracketAlgebra>(&self, x: &T, y: &T) -> Result<T> {
        let mut values: Vec<T> = Vec::with_capacity(self.nodes.len());
        let mut sum: Option<T> = None;
        for node in &self.nodes {
            let letter = if node.letter == 0 { x } else { y };
            let v = match node.inner {
                None => letter.clone(),
                Some(i) => letter.bracket(&values[i])?,
            };
            if node.coeff != 0.0 {
                sum = Some(match sum {
                    None => T::combine(&v, &v, node.coeff, 0.0)?,
                    Some(s) => T::combine(&s, &v, 1.0, node.coeff)?,
                });
            }
            values.push(v);
        }
        Ok(sum.expect("table contains the degree-one words"))
    }

    /// Upper bound for the norm of all omitted homogeneous terms when `‖x‖+‖y‖ = s`.
    pub fn remainder(&self, s: f64) -> f64 {
        if s >= std::f64::consts::LN_2 {
            return f64::INFINITY;
        }
        let full = -(2.0 - s.exp()).ln();
        let partial: f64 = self.majorant[..=self.order]
            .iter()
            .enumerate()
            .map(|(k, c)| c * s.powi(k as i32))
            .sum();
        (full - partial).max(0.0) + 4.0 * f64::EPSILON * full
    }
}

/// A BCH product together with its truncation remainder bound.
#[derive(Debug, Clone)]
pub struct BchValue {
    pub value: Coeff,
    pub remainder: f64,
}

/// gl(m,ℂ) / GL(m,ℂ) with BCH data.
#[derive(Debug, Clone, Copy)]
pub struct MatrixLieBackend {
    dim: usize,
    bch_order: usize,
    bch_radius: f64,
}

impl MatrixLieBackend {
    pub fn new(dim: usize) -> Self {
        Self::with_order(dim, DEFAULT_BCH_ORDER)
    }

    pub fn with_order(dim: usize, bch_order: usize) -> Self {
        assert!(dim >= 1);
        MatrixLieBackend {
            dim,
            bch_order,
            bch_radius: std::f64::consts::LN_2,
        }
    }

    /// Shrinks the convergence budget; it can never exceed ln 2.
    pub fn with_radius(mut self, radius: f64) -> Self {
        self.bch_radius = radius.min(std::f64::consts::LN_2);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn bch_order(&self) -> usize {
        self.bch_order
    }
    pub fn bch_radius(&self) -> f64 {
        self.bch_radius
    }
    pub fn space(&self) -> CoefficientSpace {
        CoefficientSpace::Matrix(self.dim)
    }
    pub fn norm(&self, x: &Coeff) -> f64 {
        self.space().norm(x)
    }
    pub fn table(&self) -> &'static DynkinTable {
        DynkinTable::get(self.bch_order)
    }

    pub fn bracket(&self, x: &Coeff, y: &Coeff) -> Coeff {
        commutator(x, y)
    }

    pub fn bch_remainder(&self, s: f64) -> f64 {
        self.table().remainder(s)
    }

    pub fn bch(&self, x: &Coeff, y: &Coeff) -> Result<BchValue> {
        let s = self.norm(x) + self.norm(y);
        if s >= self.bch_radius {
            return Err(Error::Domain(format!(
                "BCH budget exceeded: ‖x‖+‖y‖ = {s:.6} ≥ {:.6}",
                self.bch_radius
            )));
        }
        Ok(BchValue {
            value: self.table().evaluate(x, y)?,
            remainder: self.bch_remainder(s),
        })
    }

    pub fn exp(&self, x: &Coeff) -> Coeff {
        exp_mat(x)
    }

    pub fn log(&self, g: &Coeff) -> Result<Coeff> {
        log_mat(g)
    }

    pub fn ad(&self, g: &Coeff, x: &Coeff) -> Result<Coeff> {
        ad_conj(g, x)
    }
}

/// Matrix exponential by scaling and squaring around a Taylor core.
pub fn exp_mat(a: &Coeff) -> Coeff {
    let n = a.nrows();
    let norm = a.norm(); // Frobenius ≥ operator norm
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let b = a * Complex64::new(0.5f64.powi(s), 0.0);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &b * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if term.norm() < 1e-20 * sum.norm() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Principal matrix logarithm; requires `‖g − 1‖ < 1` in the algebra norm.
pub fn log_mat(g: &Coeff) -> Result<Coeff> {
    let n = g.nrows();
    let dist = 2.0 * operator_norm(&(g - DMatrix::<Complex64>::identity(n, n)));
    if dist >= 1.0 {
        return Err(Error::Domain(format!(
            "log branch budget violated: ‖g − 1‖ = {dist:.6} ≥ 1"
        )));
    }
    log_mat_principal(g)
}

/// Inverse scaling and squaring: square roots until close to 1, then the
/// `2 artanh((X−1)(X+1)⁻¹)` series.
pub(crate) fn log_mat_principal(g: &Coeff) -> Result<Coeff> {
    let n = g.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut x = g.clone();
    let mut k = 0;
    while operator_norm(&(&x - &id)) > 0.05 {
        x = sqrt_mat(&x)?;
        k += 1;
        if k > 60 {
            return Err(Error::Domain("matrix log: square roots do not converge".into()));
        }
    }
    let denom = (&x + &id)
        .try_inverse()
        .ok_or_else(|| Error::Domain("matrix log: X + 1 singular".into()))?;
    let z = (&x - &id) * denom;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for j in 1..60 {
        term = &term * &z2;
        let t = &term * Complex64::new(1.0 / (2 * j + 1) as f64, 0.0);
        sum += &t;
        if t.norm() < 1e-20 {
            break;
        }
    }
    Ok(sum * Complex64::new(2.0 * 2f64.powi(k), 0.0))
}

/// Principal square root by the Denman–Beavers iteration.
fn sqrt_mat(a: &Coeff) -> Result<Coeff> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<Complex64>::identity(n, n);
    for _ in 0..100 {
        let yi = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("matrix sqrt: singular iterate".into()))?;
        let zi = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("matrix sqrt: singular iterate".into()))?;
        let y_next = (&y + zi) * Complex64::new(0.5, 0.0);
        let z_next = (&z + yi) * Complex64::new(0.5, 0.0);
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta <= 1e-16 * y.norm() {
            return Ok(y);
        }
    }
    Ok(y)
}

/// `g x g⁻¹`.
pub fn ad_conj(g: &Coeff, x: &Coeff) -> Result<Coeff> {
    let gi = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("Ad: group element is singular".into()))?;
    Ok(g * x * gi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::max_abs_diff;
    use crate::random::{random_algebra_element, substream};

    fn id2() -> Coeff {
        DMatrix::identity(2, 2)
    }

    #[test]
    fn degree_two_coefficient_is_one_half() {
        let t = DynkinTable::get(2);
        let coeff = |w: Vec<u8>| {
            t.words()
                .iter()
                .find(|(v, _)| *v == w)
                .map(|(_, c)| *c)
                .unwrap_or(Ratio::from_integer(0))
        };
        assert_eq!(coeff(vec![0, 1]) - coeff(vec![1, 0]), Ratio::new(1, 2));
    }

    #[test]
    fn degree_three_matches_known_terms() {
        // x*y = x + y + ½[x,y] + (1/12)[x,[x,y]] − (1/12)[y,[x,y]] + …
        let mut rng = substream(3, 0);
        let x = random_algebra_element(&mut rng, 2, 0.01);
        let y = random_algebra_element(&mut rng, 2, 0.01);
        let z = DynkinTable::get(3).evaluate(&x, &y).unwrap();
        let b = commutator(&x, &y);
        let expect = &x + &y + &b * Complex64::new(0.5, 0.0)
            + commutator(&x, &b) * Complex64::new(1.0 / 12.0, 0.0)
            - commutator(&y, &b) * Complex64::new(1.0 / 12.0, 0.0);
        assert!(max_abs_diff(&z, &expect) < 1e-17);
    }

    #[test]
    fn commuting_arguments_add_exactly() {
        let b = MatrixLieBackend::new(2);
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.1, 0.02),
            Complex64::new(-0.05, 0.0),
        ]));
        let y = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.03, 0.0),
            Complex64::new(0.07, -0.01),
        ]));
        for order in 1..=MAX_BCH_ORDER {
            let v = DynkinTable::get(order).evaluate(&x, &y).unwrap();
            assert_eq!(v, &x + &y, "order {order}");
        }
        assert!(b.bch(&x, &y).is_ok());
    }

    #[test]
    fn unit_and_inverse_laws_are_exact() {
        let mut rng = substream(5, 0);
        let x = random_algebra_element(&mut rng, 2, 0.2);
        let zero = DMatrix::zeros(2, 2);
        for order in 1..=MAX_BCH_ORDER {
            let t = DynkinTable::get(order);
            assert_eq!(t.evaluate(&x, &zero).unwrap(), x);
            assert_eq!(t.evaluate(&zero, &x).unwrap(), x);
            assert_eq!(t.evaluate(&x, &(-&x)).unwrap(), zero);
        }
    }

    #[test]
    fn budget_violation_is_a_domain_error() {
        let b = MatrixLieBackend::new(2);
        let mut rng = substream(6, 0);
        let x = random_algebra_element(&mut rng, 2, 0.4);
        let y = random_algebra_element(&mut rng, 2, 0.4);
        assert!(matches!(b.bch(&x, &y), Err(Error::Domain(_))));
    }

    #[test]
    fn exp_log_basics() {
        let zero = DMatrix::zeros(2, 2);
        assert_eq!(exp_mat(&zero), id2());
        assert!(log_mat(&id2()).unwrap().norm() < 1e-16);
        let mut rng = substream(8, 0);
        let x = random_algebra_element(&mut rng, 2, 0.7);
        assert_eq!(ad_conj(&id2(), &x).unwrap(), x);
    }

    #[test]
    fn nilpotent_exponential_is_polynomial() {
        let n = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(3.0, -1.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        assert!(max_abs_diff(&exp_mat(&n), &(id2() + &n)) < 1e-14);
    }

    #[test]
    fn log_inverts_exp() {
        let mut rng = substream(9, 0);
        for _ in 0..200 {
            let x = random_algebra_element(&mut rng, 3, 0.5);
            let back = log_mat(&exp_mat(&x)).unwrap();
            assert!(max_abs_diff(&back, &x) < 1e-12);
        }
    }

    #[test]
    fn log_budget_enforced() {
        let g = id2() * Complex64::new(1.6, 0.0);
        assert!(matches!(log_mat(&g), Err(Error::Domain(_))));
    }

    #[test]
    fn ad_intertwines_exp() {
        let mut rng = substream(10, 0);
        for _ in 0..50 {
            let g = exp_mat(&random_algebra_element(&mut rng, 2, 0.5));
            let x = random_algebra_element(&mut rng, 2, 1.0);
            let t = Complex64::new(0.1, 0.0);
            let lhs = exp_mat(&(ad_conj(&g, &x).unwrap() * t));
            let rhs = &g * exp_mat(&(&x * t)) * g.clone().try_inverse().unwrap();
            assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
        }
    }

    #[test]
    fn remainder_bounds_actual_truncation_error() {
        let b = MatrixLieBackend::with_order(2, 4);
        let mut rng = substream(11, 0);
        for _ in 0..100 {
            let x = random_algebra_element(&mut rng, 2, 0.2);
            let y = random_algebra_element(&mut rng, 2, 0.25);
            let v = b.bch(&x, &y).unwrap();
            let exact = log_mat_principal(&(exp_mat(&x) * exp_mat(&y))).unwrap();
            assert!(b.norm(&(&v.value - &exact)) <= v.remainder + 1e-13);
        }
    }
}
