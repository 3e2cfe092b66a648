//! Right parametrices of the spectral family and their remainders.
//!
//! [`symbol`] and [`symbolic`] implement the boundary symbol calculus
//! (fiber corrections q^{f,j}, basis corrections q^{b,j}, quantization with
//! the weight F_{k,l}); [`discrete`] builds the right parametrix of the
//! collocation pencil that feeds the determinant engine, with remainder
//! K = P∘Q − 1 of the same smoothing order m = N − 2(N′−1).

pub mod discrete;
pub mod symbol;
pub mod symbolic;

pub use discrete::{
    DenseOperator, DiscreteParametrix, CERTIFY_TOL, OperatorHandle, OperatorKind, ParametrixConfig, RemainderFamily, SigmaParametrix,
};
pub use symbol::{CoefficientFn, CompiledSymbol, FnCoefficient, RadialCutoff, SampledCoefficient, SymbolExpr, SymbolGraph, SymbolPoint, Var};
pub use symbolic::{
    apply_radial_symbol, build_basis_symbols, build_fiber_symbols, multiplier_coefficients, BoundaryOperator, Coefficient,
    ParametrixBundle, SymbolSettings,
};
