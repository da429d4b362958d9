//! Tail probabilities of the Pearson correlation coefficient beyond the leading exponent.
//!
//! The crate computes tail probabilities `P(R_n >= c)` of the Pearson
//! coefficient (and of its known-mean variant) for spherical and bivariate
//! Gaussian samples in three independent ways: the sharp large-deviation
//! formula ([`sld`]), quadrature of the exact density ([`density`]) and
//! simulation ([`montecarlo`]). [`laplace`] holds the generic Laplace-method
//! engine behind the `1/n` corrections, and [`bahadur`] the exact slope of the
//! associated independence test.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar to `f64`.

// `!(x < y)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bahadur;
pub mod density;
pub mod error;
pub mod laplace;
pub mod montecarlo;
pub mod quadrature;
pub mod real;
pub mod sld;
pub mod specfun;

pub use bahadur::{bahadur_slope, gaussian_kl, kl_infimum, kl_infimum_numeric, p_value_sld, TestReport};
pub use density::{log_density, mgf_exact, tail_exact, Density, Scenario, MIN_SAMPLE_SIZE};
pub use error::{Error, Result};
pub use laplace::{
    find_interior_max, laplace_coefficient, laplace_coefficients, laplace_expand, DerivativeJet, LaplaceCoefficients,
};
pub use montecarlo::{sample_coefficient, sample_coefficients, tail_mc, tail_mc_partitioned, McEstimate};
pub use quadrature::{integrate_log, integrate_log_clustered, QuadOptions, QuadratureResult};
pub use real::Real;
pub use sld::{
    convexity_profile, legendre_rate_numeric, ncgf_expansion, ncgf_limit_spherical, ncgf_limit_spherical_known_mean,
    r0_of_lambda, rate_function, rate_second_derivative, rho0, saddle, tail_sld, ConvexityPoint,
    GaussianSaddleContext, Method, NcgfExpansion, SaddlePoint, TailEstimate,
};

pub type Scenario64 = Scenario<f64>;
pub type Density64 = Density<f64>;
pub type DerivativeJet64 = DerivativeJet<f64>;
pub type QuadratureResult64 = QuadratureResult<f64>;
pub type SaddlePoint64 = SaddlePoint<f64>;
pub type TailEstimate64 = TailEstimate<f64>;
pub type NcgfExpansion64 = NcgfExpansion<f64>;
pub type McEstimate64 = McEstimate<f64>;
pub type TestReport64 = TestReport<f64>;
