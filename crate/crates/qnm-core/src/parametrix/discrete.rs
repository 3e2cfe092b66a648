//! Discrete right parametrix of the collocation pencil and its trace-class remainder.
//!
//! On the collocation space the pencil is split as P_h(σ) = A + B(σ) with the
//! σ-independent anchor A = P0 + C·1 (C > 0 makes A invertible) and
//! B(σ) = σP1 + σ²P2 − C·1. With G = A⁻¹ the truncated Neumann series
//!
//! Q_m(σ) = G Σ_{j<m} (−BG)^j,   P_h Q_m = 1 + K,   K = −(−BG)^m,
//!
//! is a right parametrix whose remainder gains m powers of the smoothing
//! operator BG; m = N − 2(N′−1) matches the order gained by the symbolic
//! boundary parametrix. Since det(1+K) = Π_ω det(1 + ωBG) over the m-th roots
//! of unity ω, the zeros of det(1+K) are those of det P_h (the factor ω = 1,
//! det(1+BG) = det P_h/det A) together with spurious zeros of the other
//! factors; [`DiscreteParametrix::certify`] distinguishes them.

use crate::error::{QnmError, Result};
use crate::spectral_family::{DiscreteFamily, SectorConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default anchor C as a fraction of the second-smallest |eigenvalue| of P0.
pub const ANCHOR_FRACTION: f64 = 0.15;

/// Smallest-singular-value threshold of [`DiscreteParametrix::certify`] below which a
/// zero of det(1 + K) is accepted as a zero of det P_h. Genuine zeros polish to
/// singular values at roundoff level; spurious ones stay of order 1e-2 or more.
pub const CERTIFY_TOL: f64 = 1e-6;

/// Relative modulus below which an eigenvalue of P0 counts as zero when choosing the anchor.
const ZERO_EIGENVALUE_REL: f64 = 1e-8;

/// Which composite an [`OperatorHandle`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// The parametrix Q.
    Q,
    /// The remainder K = PQ − 1.
    K,
    /// The product P∘Q.
    PQ,
}

/// A linear operator on the collocation space (unknowns ordered `i·n_z + j`).
pub trait OperatorHandle: Sync {
    /// Dimension of the space.
    fn dim(&self) -> usize;
    /// Kind of the operator.
    fn kind(&self) -> OperatorKind;
    /// Applies the operator.
    fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>>;
}

/// A holomorphic family σ ↦ K_σ of remainders.
pub trait RemainderFamily: Sync {
    /// Dimension of the space K acts on.
    fn dim(&self) -> usize;
    /// The remainder at σ.
    fn remainder(&self, sigma: Complex64) -> Result<Box<dyn OperatorHandle + '_>>;
}

/// Anchor and Neumann depth of the discrete parametrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametrixConfig {
    /// Anchor C; `None` picks [`ANCHOR_FRACTION`] × the second-smallest |eig P0|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<f64>,
    /// Neumann depth m; `None` uses N − 2(N′−1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<u32>,
}

/// Discrete right parametrix of a collocation pencil.
#[derive(Debug, Clone)]
pub struct DiscreteParametrix {
    disc: DiscreteFamily,
    anchor: f64,
    power: u32,
    g: DMatrix<Complex64>,
}

impl DiscreteParametrix {
    /// Builds the parametrix for `disc` with the sector's depths.
    pub fn new(disc: DiscreteFamily, sector: &SectorConfig, config: ParametrixConfig) -> Result<Self> {
        sector.validate()?;
        let power = config.power.unwrap_or(sector.n_depth - 2 * (sector.n_prime - 1));
        if power == 0 {
            return Err(QnmError::ModeError("Neumann depth must be positive".into()));
        }
        let anchor = match config.anchor {
            Some(c) if c > 0.0 && c.is_finite() => c,
            Some(_) => return Err(QnmError::invalid("anchor", "need C > 0")),
            None => auto_anchor(&disc.p0)?,
        };
        let n = disc.dim();
        let a = &disc.p0 + DMatrix::<Complex64>::identity(n, n) * Complex64::new(anchor, 0.0);
        let g = a.lu().try_inverse().ok_or(QnmError::SingularLU)?;
        Ok(DiscreteParametrix { disc, anchor, power, g })
    }

    /// The underlying pencil.
    pub fn discrete(&self) -> &DiscreteFamily {
        &self.disc
    }

    /// Anchor C.
    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// Neumann depth m.
    pub fn power(&self) -> u32 {
        self.power
    }

    /// The σ-dependent operators at σ.
    pub fn at(&self, sigma: Complex64) -> SigmaParametrix<'_> {
        let n = self.disc.dim();
        let b = &self.disc.p1 * sigma + &self.disc.p2 * (sigma * sigma)
            - DMatrix::<Complex64>::identity(n, n) * Complex64::new(self.anchor, 0.0);
        let bg = &b * &self.g;
        SigmaParametrix { parent: self, sigma, bg }
    }

    /// Smallest singular value of P_h(σ)G = 1 + BG: close to 0 exactly at the zeros of
    /// det P_h, of order one at the spurious zeros of det(1 + K).
    pub fn certify(&self, sigma: Complex64) -> f64 {
        let n = self.disc.dim();
        let m = DMatrix::<Complex64>::identity(n, n) + self.at(sigma).bg;
        m.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Whether a zero of det(1 + K) at σ is a zero of det P_h (see [`CERTIFY_TOL`]).
    pub fn is_genuine(&self, sigma: Complex64) -> bool {
        self.certify(sigma) < CERTIFY_TOL
    }
}

fn auto_anchor(p0: &DMatrix<Complex64>) -> Result<f64> {
    let t = p0.clone().schur().unpack().1;
    let mut mods: Vec<f64> = (0..t.nrows()).map(|i| t[(i, i)].norm()).collect();
    mods.sort_by(|a, b| a.total_cmp(b));
    let top = *mods.last().unwrap_or(&0.0);
    let nonzero: Vec<f64> = mods.into_iter().filter(|&m| m > ZERO_EIGENVALUE_REL * top).collect();
    // the second-smallest modulus skips at most one near-zero (static) mode of the sector
    let pick = nonzero.get(1).or(nonzero.first()).copied().ok_or(QnmError::SingularLU)?;
    Ok(ANCHOR_FRACTION * pick)
}

/// The parametrix evaluated at one σ.
#[derive(Debug, Clone)]
pub struct SigmaParametrix<'a> {
    parent: &'a DiscreteParametrix,
    sigma: Complex64,
    bg: DMatrix<Complex64>,
}

impl<'a> SigmaParametrix<'a> {
    /// σ.
    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }

    fn check(&self, v: &[Complex64]) -> Result<DVector<Complex64>> {
        if v.len() != self.bg.nrows() {
            return Err(QnmError::ResolutionError(format!("expected {} unknowns, got {}", self.bg.nrows(), v.len())));
        }
        Ok(DVector::from_column_slice(v))
    }

    /// Q v = G Σ_{j<m} (−BG)^j v.
    pub fn apply_q(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut term = self.check(v)?;
        let mut acc = term.clone();
        for _ in 1..self.parent.power {
            term = -(&self.bg * term);
            acc += &term;
        }
        Ok((&self.parent.g * acc).as_slice().to_vec())
    }

    /// K v = −(−BG)^m v.
    pub fn apply_k(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut term = self.check(v)?;
        for _ in 0..self.parent.power {
            term = -(&self.bg * term);
        }
        Ok((-term).as_slice().to_vec())
    }

    /// P_h(σ) Q v.
    pub fn apply_pq(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let q = DVector::from_vec(self.apply_q(v)?);
        Ok((self.parent.disc.matrix(self.sigma) * q).as_slice().to_vec())
    }

    /// The dense remainder matrix K = −(−BG)^m.
    pub fn k_matrix(&self) -> DMatrix<Complex64> {
        let n = self.bg.nrows();
        let mut k = DMatrix::<Complex64>::identity(n, n);
        for _ in 0..self.parent.power {
            k = -(&self.bg * k);
        }
        -k
    }

    /// Handle applying Q, K or PQ.
    pub fn handle(&self, kind: OperatorKind) -> SigmaHandle<'_, 'a> {
        SigmaHandle { inner: self, kind }
    }
}

/// [`OperatorHandle`] view of a [`SigmaParametrix`].
#[derive(Debug, Clone, Copy)]
pub struct SigmaHandle<'b, 'a> {
    inner: &'b SigmaParametrix<'a>,
    kind: OperatorKind,
}

impl OperatorHandle for SigmaHandle<'_, '_> {
    fn dim(&self) -> usize {
        self.inner.bg.nrows()
    }
    fn kind(&self) -> OperatorKind {
        self.kind
    }
    fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        match self.kind {
            OperatorKind::Q => self.inner.apply_q(v),
            OperatorKind::K => self.inner.apply_k(v),
            OperatorKind::PQ => self.inner.apply_pq(v),
        }
    }
}

/// Owned remainder handle holding the dense K(σ).
#[derive(Debug, Clone)]
pub struct DenseOperator {
    /// The matrix.
    pub matrix: DMatrix<Complex64>,
    /// Its kind.
    pub kind: OperatorKind,
}

impl OperatorHandle for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn kind(&self) -> OperatorKind {
        self.kind
    }
    fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.matrix.ncols() {
            return Err(QnmError::ResolutionError(format!("expected {} unknowns, got {}", self.matrix.ncols(), v.len())));
        }
        Ok((&self.matrix * DVector::from_column_slice(v)).as_slice().to_vec())
    }
}

impl RemainderFamily for DiscreteParametrix {
    fn dim(&self) -> usize {
        self.disc.dim()
    }
    fn remainder(&self, sigma: Complex64) -> Result<Box<dyn OperatorHandle + '_>> {
        Ok(Box::new(DenseOperator { matrix: self.at(sigma).k_matrix(), kind: OperatorKind::K }))
    }
}
