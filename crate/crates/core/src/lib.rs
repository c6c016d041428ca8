//! Potentials of bodies in Euclidean space and the location of their maximizers.
//!
//! The crate evaluates the Riesz potential, its renormalization for
//! non-positive orders, the solid-angle (Poisson) potential and the heat
//! potential of a compact body, computes the minimal unfolded region by
//! directional folding, and derives the cone-exclusion comparison function
//! `E(R)` whose unique zero bounds how close a maximizer can sit to the
//! boundary.  A small CLI (`pc`) drives the experiments and writes
//! CSV/JSON/SVG artifacts.

pub mod body;
pub mod centers;
pub mod conebound;
pub mod config;
pub mod grid;
pub mod potentials;
pub mod quadrature;
pub mod run;
pub mod scalar;
pub mod svg;
pub mod unfolded;

pub use scalar::Scalar;

/// Default scalar type used by the grid machinery and the CLI.
pub type Real = f64;
