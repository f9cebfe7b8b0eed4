//! Solver for Lie systems: time-dependent linear equations
//! `ġ g⁻¹ = -Σ_α b_α(t) ρ(a_α)` whose generators close a finite-dimensional
//! real Lie algebra.
//!
//! * [`lie_core`]: Lie algebras from structure constants, validation, and
//!   matrix representations, with a catalog of built-in algebras.
//! * [`wei_norman`]: the Wei-Norman factorization `g = Π exp(-v_k a_{σ(k)})`,
//!   its ODE system, adaptive integration with chart restarts, and
//!   quadrature for triangular systems.
//! * [`closed_forms`]: exact and quadrature solutions of worked examples.
//! * [`reduction`]: gauge transformations, the interaction picture and the
//!   `sl2` reduction to a one-parameter subgroup.
//! * [`quantum_gaussian`]: exact evolution of Gaussian wave packets.
//! * [`grid_oracle`]: an independent Crank-Nicolson propagator (`f64` only).
//!
//! Numerical code is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, with `…32` variants for `f32`.

pub mod closed_forms;
pub mod curve;
pub mod error;
pub mod grid_oracle;
pub mod lie_core;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod quantum_gaussian;
pub mod reduction;
pub mod scalar;
pub mod wei_norman;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

pub type Matrix = linalg::Mat<f64>;
pub type Matrix32 = linalg::Mat<f32>;
pub type ComplexMatrix = linalg::Mat<num_complex::Complex64>;
pub type Algebra = lie_core::LieAlgebra<f64>;
pub type Algebra32 = lie_core::LieAlgebra<f32>;
pub type Element = lie_core::AlgebraElement<f64>;
pub type Element32 = lie_core::AlgebraElement<f32>;
pub type Representation = lie_core::MatrixRep<f64>;
pub type Representation32 = lie_core::MatrixRep<f32>;
pub type Curve = curve::ScalarCurve<f64>;
pub type Curve32 = curve::ScalarCurve<f32>;
pub type Coefficients = curve::CoefficientCurve<f64>;
pub type Coefficients32 = curve::CoefficientCurve<f32>;
pub type Solution = wei_norman::WeiNormanSolution<f64>;
pub type Solution32 = wei_norman::WeiNormanSolution<f32>;
pub type Gaussian = quantum_gaussian::GaussianState<f64>;
pub type Gaussian32 = quantum_gaussian::GaussianState<f32>;
pub type Jacobi = quantum_gaussian::JacobiElement<f64>;
pub type Jacobi32 = quantum_gaussian::JacobiElement<f32>;
pub type Oracle = closed_forms::OracleSpec<f64>;
