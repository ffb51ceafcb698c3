//! Local-control pulse schemes for networks of coupled qudits and oscillators.
//!
//! Decoupling, selective recoupling and time-reversal schemes are synthesized
//! from combinatorial designs (orthogonal arrays, difference schemes, spreads of
//! F₄^m) and certified by computing the exact average Hamiltonian. Spectral
//! majorization of coupling matrices provides lower bounds on the time overhead
//! of any simulation.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to double precision (`*64`) or
//! single precision (`*32`). File formats are defined for `f64` only.

pub mod bounds;
pub mod designs;
pub mod error;
pub mod error_basis;
pub mod gf;
pub mod graphcolor;
pub mod harmonic;
pub mod linalg;
pub mod netham;
pub mod scalar;
pub mod scheme;
pub mod signs;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type CMatrix64 = linalg::CMatrix<f64>;
pub type UnitaryErrorBasis64 = error_basis::UnitaryErrorBasis<f64>;
pub type SuBasis64 = netham::SuBasis<f64>;
pub type PairHamiltonian64 = netham::PairHamiltonian<f64>;
pub type JMatrix64 = bounds::JMatrix<f64>;
pub type PulseScheme64 = scheme::PulseScheme<f64>;
pub type OscillatorNetwork64 = harmonic::OscillatorNetwork<f64>;
pub type PhaseScheme64 = harmonic::PhaseScheme<f64>;

pub type CMatrix32 = linalg::CMatrix<f32>;
pub type UnitaryErrorBasis32 = error_basis::UnitaryErrorBasis<f32>;
pub type SuBasis32 = netham::SuBasis<f32>;
pub type PairHamiltonian32 = netham::PairHamiltonian<f32>;
pub type JMatrix32 = bounds::JMatrix<f32>;
pub type PulseScheme32 = scheme::PulseScheme<f32>;
pub type OscillatorNetwork32 = harmonic::OscillatorNetwork<f32>;
pub type PhaseScheme32 = harmonic::PhaseScheme<f32>;
