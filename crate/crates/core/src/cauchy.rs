//! Coefficient extraction from function samples via the Cauchy integral formula.
//!
//! `β_k = (1/2πi) ∮_{|z|=r_q} f(a + z v) / z^{k+1} dz` is approximated by the uniform
//! trapezoid rule on `Q` nodes, which is exactly a discrete Fourier transform of the
//! samples. For a polynomial of degree `< Q` the rule is exact up to rounding.

use num_complex::Complex64;

use crate::coeff::Coeff;
use crate::error::{Error, Result};

/// Fraction of the holomorphy radius on which samples are taken.
pub const QUADRATURE_FRACTION: f64 = 0.8;

#[derive(Debug, Clone)]
pub struct CauchyCoefficients {
    /// `β_0 … β_{K_max}`.
    pub coeffs: Vec<Coeff>,
    /// Radius of the sampling circle.
    pub quadrature_radius: f64,
    /// Largest sampled norm `max_j ‖f(a + r_q ω^j v)‖` (Euclidean/Frobenius entry norm).
    pub sample_sup: f64,
    /// Largest violation of `‖β_k‖ ≤ sample_sup / r_q^k` (≤ 0 when the bound holds).
    pub worst_bound_excess: f64,
}

impl CauchyCoefficients {
    pub fn bound_holds(&self, tol: f64) -> bool {
        self.worst_bound_excess <= tol
    }
}

/// Extracts Taylor coefficients of `z ↦ f(a + z v)` at `z = 0`.
///
/// `r` is the radius of the disc on which `f` is bounded holomorphic; samples are taken
/// on `|z| = 0.8 r`.
pub fn cauchy_extract<F>(
    f: F,
    a: &[Complex64],
    v: &[Complex64],
    r: f64,
    k_max: usize,
    q: usize,
) -> Result<CauchyCoefficients>
where
    F: Fn(&[Complex64]) -> Coeff,
{
    if a.len() != v.len() {
        return Err(Error::Structural("point and direction differ in dimension".into()));
    }
    if q < 4 * k_max.max(1) {
        return Err(Error::Precondition(format!(
            "need Q ≥ 4·K_max, got Q = {q}, K_max = {k_max}"
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Precondition(format!("invalid radius {r}")));
    }
    let rq = QUADRATURE_FRACTION * r;
    let tau = std::f64::consts::TAU;
    let mut samples = Vec::with_capacity(q);
    let mut point = vec![Complex64::new(0.0, 0.0); a.len()];
    for j in 0..q {
        let z = Complex64::from_polar(rq, tau * j as f64 / q as f64);
        for (p, (ai, vi)) in point.iter_mut().zip(a.iter().zip(v)) {
            *p = ai + z * vi;
        }
        let s = f(&point);
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite sample at z = {z}")));
        }
        samples.push(s);
    }
    Ok(dft_coefficients(&samples, rq, k_max))
}

/// Trapezoid/DFT step shared with the multivariate extraction.
pub(crate) fn dft_coefficients(samples: &[Coeff], rq: f64, k_max: usize) -> CauchyCoefficients {
    let q = samples.len();
    let tau = std::f64::consts::TAU;
    let sample_sup = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let mut coeffs = Vec::with_capacity(k_max + 1);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..=k_max {
        let mut acc = samples[0].clone() * Complex64::new(0.0, 0.0);
        for (j, s) in samples.iter().enumerate() {
            // ω^{-jk}, reduced mod Q to keep the angle small
            let phase = -tau * ((j * k) % q) as f64 / q as f64;
            acc += s * Complex64::from_polar(1.0, phase);
        }
        let scale = 1.0 / (q as f64 * rq.powi(k as i32));
        let beta = acc * Complex64::new(scale, 0.0);
        worst = worst.max(beta.norm() - sample_sup / rq.powi(k as i32));
        coeffs.push(beta);
    }
    CauchyCoefficients {
        coeffs,
        quadrature_radius: rq,
        sample_sup,
        worst_bound_excess: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn scalar(z: Complex64) -> Coeff {
        DMatrix::from_element(1, 1, z)
    }
    const ONE: [Complex64; 1] = [Complex64::new(1.0, 0.0)];
    const ORIGIN: [Complex64; 1] = [Complex64::new(0.0, 0.0)];

    #[test]
    fn monomial_z_squared() {
        let out = cauchy_extract(|p| scalar(p[0] * p[0]), &ORIGIN, &ONE, 1.0, 6, 32).unwrap();
        for (k, b) in out.coeffs.iter().enumerate() {
            let expect = if k == 2 { 1.0 } else { 0.0 };
            assert!((b[(0, 0)] - expect).norm() < 1e-12, "k={k}");
        }
        assert!(out.bound_holds(1e-12));
    }

    #[test]
    fn constant_function() {
        let c = Complex64::new(0.3, -2.0);
        let out = cauchy_extract(|_| scalar(c), &ORIGIN, &ONE, 2.0, 5, 20).unwrap();
        assert!((out.coeffs[0][(0, 0)] - c).norm() < 1e-14);
        assert!(out.coeffs[1..].iter().all(|b| b[(0, 0)].norm() < 1e-14));
    }

    #[test]
    fn direction_scales_coefficients() {
        // f(x) = x^3 along v = 2 gives β_3 = 8
        let v = [Complex64::new(2.0, 0.0)];
        let out = cauchy_extract(|p| scalar(p[0].powu(3)), &ORIGIN, &v, 0.5, 4, 16).unwrap();
        assert!((out.coeffs[3][(0, 0)] - 8.0).norm() < 1e-11);
    }

    #[test]
    fn rejects_too_few_nodes_and_non_finite_samples() {
        assert!(matches!(
            cauchy_extract(|p| scalar(p[0]), &ORIGIN, &ONE, 1.0, 8, 16),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            cauchy_extract(|_| scalar(Complex64::new(f64::NAN, 0.0)), &ORIGIN, &ONE, 1.0, 2, 8),
            Err(Error::Evaluation(_))
        ));
    }
}
