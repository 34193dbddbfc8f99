pub mod cauchy;
pub mod coeff;
pub mod complexify;
pub mod error;
pub mod germ_group;
pub mod germ_space;
pub mod lie;
pub mod random;
pub mod regularity;
pub mod report;
pub mod series;
pub mod sweeps;

pub use coeff::{Coeff, CoefficientSpace};
pub use error::{Error, Result};
pub use lie::MatrixLieBackend;
pub use series::{EntireFn, TruncatedSeries};
