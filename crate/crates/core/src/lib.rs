//! Magnitude, magnitude homology and persistent magnitude homology of finite
//! metric spaces, with bottleneck, Wasserstein and profile distances and a
//! randomized stability harness.

pub mod chains;
pub mod distances;
pub mod error;
pub mod filtration;
pub mod homology;
pub mod io;
pub mod length;
pub mod linalg;
pub mod magnitude;
pub mod persistence;
pub mod space;
pub mod stability;

pub use error::{Error, Result};
pub use filtration::{build_filtration, Filtration, MonotoneFunction};
pub use length::{Backend, Length, Rational};
pub use space::{apply_isometry, FiniteMetricSpace, Isometry, PointCloud};
