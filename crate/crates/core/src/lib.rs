//! Spectrum-generating algebra and horospherical-wave analysis on the
//! three-dimensional hyperboloid.
//!
//! The crate is organized in layers: `geometry` fixes the ambient model and
//! measures, `grad` provides nested forward-mode derivatives for bracket
//! evaluation, `classical` realizes the conserved generators and their
//! Dirac-bracket algebra, `special` holds the Gamma-function machinery for
//! ladder coefficients, `quantum` realizes the operators on wave functions,
//! and `transform` implements the horospherical integral transform with its
//! inversion and Plancherel checks.

pub mod cjet;
pub mod classical;
pub mod geometry;
pub mod grad;
pub mod quad;
pub mod quantum;
pub mod report;
pub mod special;
pub mod suites;
pub mod transform;
