//! Numerical approximations of the Fatou set, Julia set and escaping set of
//! finitely generated holomorphic semigroups, plus grid-based checks of their
//! invariance properties and set identities.
//!
//! Module map:
//!
//! * [`catalog`]: generator maps, inverse branches, commutator test, map grammar
//! * [`semigroup`]: semigroups, words, orbits, random word streams
//! * [`escape`]: escape-time classification and escaping-set grids
//! * [`julia`]: backward IFS sampling, Julia bands, pre-image grids
//! * [`checks`]: invariance and identity checks producing [`checks::CheckReport`]s
//! * [`config`], [`output`]: scene files, PGM images and text reports

// `!(a < b)` comparisons deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod checks;
pub mod config;
pub mod error;
pub mod escape;
pub mod grid;
pub mod julia;
pub mod output;
pub mod rng;
pub mod sample;
pub mod semigroup;

pub use catalog::{
    commutator_defect, eval_map, inverse_branches, parse_map, tchebyshev_coeffs, ComplexPoint,
    MapDescriptor, MapKind, Sign,
};
pub use checks::{CheckConfig, CheckReport, Thresholds, Verdict};
pub use config::SceneConfig;
pub use error::{Error, Result};
pub use escape::{
    approximate_escaping_set, classify_orbit, classify_point_semigroup,
    random_word_divergence_test, EscapeParams, OrbitOutcome, SemigroupEscapeClass,
};
pub use grid::{GridSpec, IndicatorGrid, PixelClass};
pub use julia::{
    approximate_julia_union, backward_ifs_sample, fatou_indicator, preimage_grid, BandMode,
    JuliaParams, PointCloud,
};
pub use output::{write_pgm, write_report};
pub use sample::SampleSpec;
pub use semigroup::{eval_word, iterate_word, random_word_stream, words_up_to, SemigroupSpec, Word};
