//! Curvature regularization of images by convex flux fields in roto-translation space.
//!
//! An image `u` on an `n1 × n2` pixel grid is paired with a flux field `σ` on a
//! staggered grid over positions and `nθ` orientations. The solver minimizes
//! `Σ h(θ_k, 𝒜σ) + G(u)` under a divergence constraint on `σ` and a
//! consistency constraint tying the θ-integral of `σ` to the rotated image
//! gradient. `h` is one of three lifted curvature penalties ([`CurvatureKind`])
//! and `G` a data term ([`DataTerm`]).
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`, with `*32` variants for single precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod data_term;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod field_io;
pub mod grid;
pub mod scalar;
pub mod solver;

pub use curvature::{CurvatureKind, CurvatureModel, ProfilePoint};
pub use data_term::DataTerm;
pub use energy::{
    averaged_energy, curve_energy, diagnostics, discrete_energy, growth_bound_sides, Diagnostics, EnergyReport,
    ParametricCurve,
};
pub use error::{Error, Result};
pub use grid::{
    adjoint_averaging, adjoint_divergence, adjoint_gradient, adjoint_projection, apply_averaging, apply_divergence,
    apply_gradient, apply_projection, rt_eval, AveragedField, EdgeField, FluxField, GridSpec, Image,
};
pub use scalar::Scalar;
pub use solver::{
    assemble_preconditioners, check_state, lifted_energy, solve, CheckRecord, ConvergenceReport, FieldMask,
    Preconditioner, Solution, SolverConfig, SolverState,
};

pub type Grid = GridSpec<f64>;
pub type Flux = FluxField<f64>;
pub type Averaged = AveragedField<f64>;
pub type Edges = EdgeField<f64>;
pub type Img = Image<f64>;
pub type Model = CurvatureModel<f64>;
pub type Term = DataTerm<f64>;
pub type Config = SolverConfig<f64>;

pub type Grid32 = GridSpec<f32>;
pub type Flux32 = FluxField<f32>;
pub type Averaged32 = AveragedField<f32>;
pub type Edges32 = EdgeField<f32>;
pub type Img32 = Image<f32>;
pub type Model32 = CurvatureModel<f32>;
pub type Term32 = DataTerm<f32>;
pub type Config32 = SolverConfig<f32>;
