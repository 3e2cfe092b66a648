//! Resonance (quasinormal-mode) solver for the charged Klein–Gordon operator on
//! accelerating, rotating, charged de Sitter black holes.
//!
//! The pipeline is: [`geometry`] (horizons, charts, gauge) →
//! [`spectral_family`] (operator coefficients, indicial data, collocation
//! discretization) → [`parametrix`] (approximate inverse and remainder K) →
//! [`determinant_engine`] (D_R(σ) = det(1 + Π_R K Π_R) with its error
//! budget) → [`resonance_finder`] (argument-principle counting and
//! location). [`radial_oracle`] is an independent Wronskian computation for
//! the spherically symmetric case and [`quantization`] implements the
//! Mellin–Fourier transforms used by the symbolic parametrix.

pub mod determinant_engine;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod parametrix;
pub mod quantization;
pub mod radial_oracle;
pub mod resonance_finder;
pub mod spectral_family;

pub use error::{QnmError, Result};
