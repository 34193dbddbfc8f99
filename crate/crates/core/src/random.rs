//! Seeded random generators for test data: matrices, series and germs.
//!
//! Every check draws from a ChaCha stream derived from `(seed, stream)`, so trials
//! are reproducible and independent of scheduling order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coeff::{Coeff, CoefficientSpace};
use crate::series::{exponents, TruncatedSeries};

/// Independent substream `stream` of the generator seeded with `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn random_coeff<R: Rng + ?Sized>(rng: &mut R, space: CoefficientSpace) -> Coeff {
    let (r, c) = space.shape();
    DMatrix::from_fn(r, c, |_, _| complex_normal(rng))
}

/// Random coefficient rescaled to the given norm.
pub fn random_coeff_with_norm<R: Rng + ?Sized>(
    rng: &mut R,
    space: CoefficientSpace,
    norm: f64,
) -> Coeff {
    let c = random_coeff(rng, space);
    let n = space.norm(&c);
    c * Complex64::new(norm / n, 0.0)
}

/// Random strictly upper/lower mixed element of gl(m) with prescribed algebra norm.
pub fn random_algebra_element<R: Rng + ?Sized>(rng: &mut R, m: usize, norm: f64) -> Coeff {
    random_coeff_with_norm(rng, CoefficientSpace::Matrix(m), norm)
}

/// Random polynomial series of total degree ≤ `degree` (zero tail), scaled so its
/// majorant at `radius` equals `majorant`. Coefficient weights decay like `decay^k`
/// relative to `radius^k`.
#[allow(clippy::too_many_arguments)]
pub fn random_series<R: Rng + ?Sized>(
    rng: &mut R,
    space: CoefficientSpace,
    anchor: Vec<Complex64>,
    degree_bound: usize,
    degree: usize,
    radius: f64,
    majorant: f64,
    decay: f64,
) -> TruncatedSeries {
    let d = anchor.len();
    let entries: Vec<_> = exponents(d, degree.min(degree_bound))
        .into_iter()
        .map(|e| {
            let k = (e[0] + e[1]) as i32;
            let w = rng.random_range(0.2..1.0) * decay.powi(k) / radius.powi(k);
            (e, random_coeff(rng, space) * Complex64::new(w, 0.0))
        })
        .collect();
    let s = TruncatedSeries::from_entries(space, anchor, degree_bound, radius, entries, 0.0)
        .expect("generated entries are valid");
    let m = s.majorant_norm(radius).expect("radius is valid");
    if m == 0.0 {
        s
    } else {
        s.scale(Complex64::new(majorant / m, 0.0))
    }
}
