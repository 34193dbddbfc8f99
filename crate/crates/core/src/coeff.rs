//! Coefficient spaces: scalars, vectors and square matrices over the complex numbers.
//!
//! Every coefficient is stored as a `DMatrix<Complex64>` (1×1 for scalars, m×1 for
//! vectors). The matrix norm is twice the operator norm, which makes the commutator
//! estimate `‖[x,y]‖ ≤ ‖x‖·‖y‖` hold exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Coeff = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "dim", rename_all = "lowercase")]
pub enum CoefficientSpace {
    Scalar,
    Vector(usize),
    Matrix(usize),
}

impl CoefficientSpace {
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            CoefficientSpace::Scalar => (1, 1),
            CoefficientSpace::Vector(m) => (m, 1),
            CoefficientSpace::Matrix(m) => (m, m),
        }
    }

    pub fn zero(&self) -> Coeff {
        let (r, c) = self.shape();
        DMatrix::zeros(r, c)
    }

    /// Multiplicative unit; only scalars and matrices have one.
    pub fn identity(&self) -> Result<Coeff> {
        match *self {
            CoefficientSpace::Scalar => Ok(DMatrix::identity(1, 1)),
            CoefficientSpace::Matrix(m) => Ok(DMatrix::identity(m, m)),
            CoefficientSpace::Vector(_) => Err(Error::Structural(
                "vector coefficient space has no multiplicative unit".into(),
            )),
        }
    }

    pub fn is_algebra(&self) -> bool {
        !matches!(self, CoefficientSpace::Vector(_))
    }

    pub fn check(&self, c: &Coeff) -> Result<()> {
        if (c.nrows(), c.ncols()) != self.shape() {
            return Err(Error::Structural(format!(
                "coefficient of shape {}x{} does not belong to {:?}",
                c.nrows(),
                c.ncols(),
                self
            )));
        }
        Ok(())
    }

    /// Euclidean norm for scalars and vectors, 2×operator norm for matrices.
    pub fn norm(&self, c: &Coeff) -> f64 {
        match *self {
            CoefficientSpace::Scalar | CoefficientSpace::Vector(_) => c.norm(),
            CoefficientSpace::Matrix(_) => 2.0 * operator_norm(c),
        }
    }

    /// Result space of the product `self · other`, if defined.
    pub fn product(&self, other: &CoefficientSpace) -> Result<CoefficientSpace> {
        use CoefficientSpace::*;
        match (*self, *other) {
            (Scalar, s) | (s, Scalar) => Ok(s),
            (Matrix(m), Matrix(n)) if m == n => Ok(Matrix(m)),
            (Matrix(m), Vector(n)) if m == n => Ok(Vector(m)),
            (a, b) => Err(Error::Structural(format!(
                "no product between {a:?} and {b:?}"
            ))),
        }
    }

    /// Constant `c` with `‖ab‖ ≤ c·‖a‖·‖b‖` for the norms above.
    pub fn product_constant(&self, other: &CoefficientSpace) -> f64 {
        use CoefficientSpace::*;
        match (*self, *other) {
            (Matrix(_), Matrix(_)) | (Matrix(_), Vector(_)) => 0.5,
            _ => 1.0,
        }
    }
}

/// Product of two coefficients; scalars act by scaling.
pub fn coeff_mul(a: &Coeff, b: &Coeff) -> Coeff {
    if a.nrows() == 1 && a.ncols() == 1 {
        b * a[(0, 0)]
    } else if b.nrows() == 1 && b.ncols() == 1 {
        a * b[(0, 0)]
    } else {
        a * b
    }
}

/// Largest singular value.
pub fn operator_norm(a: &Coeff) -> f64 {
    match (a.nrows(), a.ncols()) {
        (0, _) | (_, 0) => 0.0,
        (1, 1) => a[(0, 0)].norm(),
        (_, 1) | (1, _) => a.norm(),
        (2, 2) => {
            let fro2 = a.norm_squared();
            let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).norm();
            let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
            ((fro2 + disc.sqrt()) / 2.0).sqrt()
        }
        _ => a
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max),
    }
}

/// Entrywise max-modulus distance; used for coefficientwise comparisons.
pub fn max_abs_diff(a: &Coeff, b: &Coeff) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn commutator(a: &Coeff, b: &Coeff) -> Coeff {
    a * b - b * a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(e: [[f64; 4]; 2]) -> Coeff {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(e[0][0], e[1][0]),
                Complex64::new(e[0][1], e[1][1]),
                Complex64::new(e[0][2], e[1][2]),
                Complex64::new(e[0][3], e[1][3]),
            ],
        )
    }

    #[test]
    fn operator_norm_matches_svd_for_2x2() {
        let a = m2([[1.0, -2.0, 0.5, 3.0], [0.2, 0.0, -1.0, 0.7]]);
        let svd = a.clone().svd(false, false).singular_values[0];
        assert!((operator_norm(&a) - svd).abs() < 1e-12);
    }

    #[test]
    fn bracket_compatibility() {
        let s = CoefficientSpace::Matrix(2);
        let x = m2([[1.0, 0.3, -0.2, 0.1], [0.0, 0.4, 1.1, -0.5]]);
        let y = m2([[0.2, -1.0, 0.7, 0.0], [0.9, 0.1, 0.0, 0.3]]);
        assert!(s.norm(&commutator(&x, &y)) <= s.norm(&x) * s.norm(&y) + 1e-14);
        assert!(s.norm(&(&x * &y)) <= 0.5 * s.norm(&x) * s.norm(&y) + 1e-14);
    }

    #[test]
    fn vector_space_has_no_unit() {
        assert!(CoefficientSpace::Vector(3).identity().is_err());
        assert!(CoefficientSpace::Vector(2)
            .product(&CoefficientSpace::Vector(2))
            .is_err());
    }
}
