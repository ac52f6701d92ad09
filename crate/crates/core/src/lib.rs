//! Symbolic-numeric Birkhoff normal forms for polynomial Hamiltonians near an
//! equilibrium.
//!
//! The crate is organised bottom-up:
//!
//! * [`series`], [`lie`]: truncated polynomials on `C^{2n}`, the Poisson bracket
//!   `{A, B} = sum_j dA/dx_j dB/dy_j - dA/dy_j dB/dx_j` and exponential Lie series.
//! * [`quadratic`]: Hamiltonian matrices, Jordan-Chevalley splitting and linear
//!   symplectic diagonalisation of the quadratic part.
//! * [`resonance`]: resonance lattice, dual unimodular basis and torus generators.
//! * [`normalizer`]: order-by-order normalisation and first-integral transport.
//! * [`action`]: numerical action functions from period integrals over circle
//!   orbits projected onto momentum-map fibres.
//! * [`io`]: the line-oriented system file format.

pub mod action;
pub mod coeff;
pub mod error;
pub mod io;
pub mod lattice;
pub mod lie;
pub mod linalg;
pub mod monomial;
pub mod normalizer;
pub mod quadratic;
pub mod resonance;
pub mod series;

pub use action::{ActionConfig, ClosedCurve, MomentumMap, NormalizingMap, PhasePoint};
pub use coeff::{Coefficient, GaussRational};
pub use error::{Error, Result};
pub use io::{emit_system, normal_form_spec, parse_system, SystemSpec};
pub use lie::{lie_transform, Direction};
pub use monomial::Monomial;
pub use normalizer::{normalize, transform_function, NormalizationResult, NormalizerConfig};
pub use num_complex::Complex64;
pub use quadratic::{LinearSymplecticMap, QuadraticData};
pub use resonance::{FrequencyModel, ResonanceBasis};
pub use series::{ExactSeries, FloatSeries, TruncatedSeries};
