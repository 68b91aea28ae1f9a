//! Distances between barcodes, point sets and magnitude profiles.

pub mod bottleneck;
pub mod matching;
pub mod profile;
pub mod wasserstein;

pub use bottleneck::{bottleneck_weighted, Matching, MatchedPair};
pub use profile::{magnitude_profile, profile_l1_distance, MagnitudeProfile};
pub use wasserstein::wasserstein_inf;
