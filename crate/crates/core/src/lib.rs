//! Numerical toolkit for closed geodesics by regularized min-max.
//!
//! Discrete closed curves on built-in manifolds carry the energy
//! `E_sigma = length + sigma² ∫ kappa² ds` together with its exact gradient and
//! Hessian. On top of that sit a descent flow, sweepout min-max with an
//! entropy-based choice of `sigma`, explicit elliptic-function critical
//! points, Morse-index computation and the Hopf-torus lift to `S^3`.

pub mod autodiff;
pub mod critical;
pub mod curve;
pub mod elliptic;
pub mod error;
pub mod flow;
pub mod hopf;
pub mod index;
pub mod io;
pub mod linalg;
pub mod manifold;
pub mod minmax;
pub mod quadrature;
pub mod spectral;

pub use curve::{DiscreteClosedCurve, EnergyParams, NodeField};
pub use elliptic::EllipticModulus;
pub use error::{Error, Result};
pub use manifold::ManifoldModel;
