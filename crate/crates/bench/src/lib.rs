//! Fixtures shared by the benchmarks.

use germlie::random::{random_algebra_element, random_series, substream};
use germlie::regularity::{random_lie_curve, LieCurve};
use germlie::sweeps::SweepConfig;
use germlie::{CoefficientSpace, Coeff, TruncatedSeries};
use num_complex::Complex64;

pub fn algebra_pair(dim: usize, norm: f64) -> (Coeff, Coeff) {
    let mut rng = substream(1, 0);
    (
        random_algebra_element(&mut rng, dim, norm),
        random_algebra_element(&mut rng, dim, norm),
    )
}

pub fn series_pair(dim: usize, degree: usize) -> (TruncatedSeries, TruncatedSeries) {
    let mut rng = substream(2, 0);
    let anchor = vec![Complex64::new(0.0, 0.0)];
    let space = CoefficientSpace::Matrix(dim);
    let mut draw = || random_series(&mut rng, space, anchor.clone(), degree, degree, 1.0, 0.3, 0.8);
    (draw(), draw())
}

pub fn curve(cfg: &SweepConfig) -> (germlie::germ_group::GermGroup, LieCurve) {
    let group = cfg.group().expect("default config is valid");
    let mut rng = substream(3, 0);
    let gamma = random_lie_curve(&group, &mut rng, 1, 3, 3, 0.3).expect("curve fits the budget");
    (group, gamma)
}
