//! Projected Fredholm determinants D_R(σ) = det(1 + Π_R K_σ Π_R) and their error budget.
//!
//! The remainder K_σ acts on the collocation space of a [`DiscreteFamily`]. The
//! space carries a complete orthonormal basis of tensor polynomials (radial
//! degree p_r, angular degree p_z), labelled by sector lattice points
//! 𝔫 = (𝔫₁, 𝔫₂, −ℓ) through the ordering p ↦ 0, 1, −1, 2, −2, …; Π_R is the
//! orthogonal projector onto the modes with max(|𝔫₁|, |𝔫₂|) ≤ R_max. Each mode
//! carries the Sobolev weight ⟨(𝔫ω)^s⟩ = (1 + Σ|𝔫_jω_j|^{2s})^{1/2} with
//! ω_j = 2π/ℓ_j and (ℓ₁, ℓ₂, ℓ₃) = (r₊ − r₋, π, 2π).
//!
//! The budget follows the trace-ideal argument: s_j(K) ≤ s_j(ι)·‖K‖_{s→s+d}
//! with s_j(ι) the sorted ratios ⟨𝔫ω^s⟩/⟨𝔫ω^{s+d}⟩ (s = k − 1, d = N − 2(N′−1)),
//! 𝔗_R = Σ_j min{s_j(K), ‖(1−Π_R)K‖} and 𝔇_R = 𝔗_R e^{1 + ‖K‖₁ + 𝔗_R}.
//! Operator norms are power-iteration estimates, so the budget is an
//! estimate, not a certificate. On the discrete space (1 − Π_R)K has rank at
//! most dim − R, which caps the number of terms in 𝔗_R.

use crate::error::{QnmError, Result};
use crate::numerics::legendre_with_derivative;
use crate::parametrix::{OperatorHandle, OperatorKind, RemainderFamily};
use crate::resonance_finder::{DetEvaluator, DetPoint};
use crate::spectral_family::{DiscreteFamily, SectorConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tolerance of the Gram-matrix identity check of the basis.
pub const GRAM_TOL: f64 = 1e-10;
/// Power-iteration steps for operator-norm estimates.
pub const POWER_ITERATIONS: usize = 20;
/// Half-width L of the lattice box over which ι is summed explicitly.
pub const LATTICE_BOX: i64 = 400;
/// A sample is flagged when |D_R| < FLAG_FACTOR · 𝔇_R.
pub const FLAG_FACTOR: f64 = 10.0;
/// Complement norms below this fraction of max|K̂| are projection roundoff and count as 0.
pub const COMPLEMENT_FLOOR: f64 = 1e-13;
/// Threshold ε of the eigenvalue-count bound N_ε ≤ ‖K‖₁/ε.
pub const COUNT_EPSILON: f64 = 0.5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Lattice label of polynomial degree p: 0, 1, −1, 2, −2, … for p = 0, 1, 2, 3, 4, ….
pub fn lattice_label(p: usize) -> i64 {
    let p = p as i64;
    if p % 2 == 1 {
        (p + 1) / 2
    } else {
        -p / 2
    }
}

/// Sobolev weight ⟨(𝔫ω)^s⟩: 1 for s = 0, else (1 + Σ|𝔫_jω_j|^{2s})^{1/2}.
pub fn lattice_weight(n: [i64; 3], omegas: [f64; 3], s: u32) -> f64 {
    if s == 0 {
        return 1.0;
    }
    let sum: f64 = n.iter().zip(&omegas).map(|(&k, &w)| (k as f64 * w).abs().powi(2 * s as i32)).sum();
    (1.0 + sum).sqrt()
}

/// Singular value of the embedding ι at 𝔫: ⟨𝔫ω^s⟩/⟨𝔫ω^{s+d}⟩.
pub fn iota_value(n: [i64; 3], omegas: [f64; 3], s: u32, d: u32) -> f64 {
    lattice_weight(n, omegas, s) / lattice_weight(n, omegas, s + d)
}

/// One basis mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisMode {
    /// Radial polynomial degree.
    pub p_r: usize,
    /// Angular polynomial degree.
    pub p_z: usize,
    /// Lattice point (𝔫₁, 𝔫₂, 𝔫₃ = −ℓ).
    pub lattice: [i64; 3],
}

impl BasisMode {
    /// Shell index max(|𝔫₁|, |𝔫₂|).
    pub fn shell(&self) -> i64 {
        self.lattice[0].abs().max(self.lattice[1].abs())
    }
}

/// Orthonormal basis of the collocation space, ordered by lattice shell.
#[derive(Debug, Clone)]
pub struct BasisSpec {
    /// Sobolev order k.
    pub k: u32,
    /// Frequency cap R_max.
    pub r_max: usize,
    /// Sector ℓ.
    pub ell: i32,
    /// (ℓ₁, ℓ₂, ℓ₃) = (r₊ − r₋, π, 2π).
    pub lengths: [f64; 3],
    /// ω_j = 2π/ℓ_j.
    pub omegas: [f64; 3],
    /// All modes of the collocation space; the first `rank` span the range of Π_R.
    pub modes: Vec<BasisMode>,
    /// R = number of modes with shell ≤ R_max (clipped by the grid).
    pub rank: usize,
    /// Columns are the sampled basis functions, orthonormal in the discrete inner product.
    pub vectors: DMatrix<Complex64>,
    /// Quadrature weights of the discrete inner product.
    pub weights: Vec<f64>,
}

/// Orthonormal polynomials of degrees 0..n−1 on `nodes` for the discrete weights
/// (Legendre start in the mapped variable, Gram–Schmidt applied twice).
fn discrete_orthonormal(nodes: &[f64], weights: &[f64]) -> Vec<Vec<f64>> {
    let (lo, hi) = nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let t: Vec<f64> = nodes.iter().map(|&x| if hi > lo { (2.0 * x - lo - hi) / (hi - lo) } else { 0.0 }).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(weights).map(|((x, y), w)| x * y * w).sum::<f64>();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
    for p in 0..nodes.len() {
        let mut v: Vec<f64> = t.iter().map(|&x| legendre_with_derivative(p, x).0).collect();
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let nrm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= nrm);
        out.push(v);
    }
    out
}

/// Builds the shell-ordered orthonormal basis with Π_R spanning the modes of shell ≤ R_max.
pub fn build_basis(disc: &DiscreteFamily, sector: &SectorConfig, r_max: usize) -> Result<BasisSpec> {
    if r_max < 1 {
        return Err(QnmError::invalid("rmax", "need R_max ≥ 1"));
    }
    let (lo, hi) = disc.r_nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let lengths = [hi - lo, PI, 2.0 * PI];
    let omegas = [2.0 * PI / lengths[0], 2.0 * PI / lengths[1], 2.0 * PI / lengths[2]];
    let pr = discrete_orthonormal(&disc.r_nodes, &disc.r_weights);
    let pz = discrete_orthonormal(&disc.z_nodes, &disc.z_weights);
    let (nr, nz) = (pr.len(), pz.len());
    let mut modes: Vec<BasisMode> = (0..nr)
        .flat_map(|p_r| (0..nz).map(move |p_z| BasisMode { p_r, p_z, lattice: [lattice_label(p_r), lattice_label(p_z), -(sector.ell as i64)] }))
        .collect();
    modes.sort_by_key(|m| (m.shell(), m.p_r, m.p_z));
    let rank = modes.iter().filter(|m| m.shell() <= r_max as i64).count();
    let n = nr * nz;
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (col, m) in modes.iter().enumerate() {
        for i in 0..nr {
            for j in 0..nz {
                vectors[(i * nz + j, col)] = Complex64::new(pr[m.p_r][i] * pz[m.p_z][j], 0.0);
            }
        }
    }
    let weights: Vec<f64> = (0..n).map(|k| disc.r_weights[k / nz] * disc.z_weights[k % nz]).collect();
    Ok(BasisSpec { k: sector.k, r_max, ell: sector.ell, lengths, omegas, modes, rank, vectors, weights })
}

impl BasisSpec {
    /// Dimension of the collocation space.
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Discrete inner product ⟨u, v⟩ = Σ w ū v.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        u.iter().zip(v).zip(&self.weights).map(|((a, b), w)| a.conj() * b * *w).sum()
    }

    /// Gram matrix of the first `count` basis vectors.
    pub fn gram(&self, count: usize) -> DMatrix<Complex64> {
        let e = self.vectors.columns(0, count);
        let we = DMatrix::from_fn(self.dim(), count, |i, j| e[(i, j)] * self.weights[i]);
        e.adjoint() * we
    }

    /// Sobolev weights ⟨𝔫ω^s⟩ of all modes.
    pub fn mode_weights(&self, s: u32) -> Vec<f64> {
        self.modes.iter().map(|m| lattice_weight(m.lattice, self.omegas, s)).collect()
    }

    /// Coordinates c = E*W v of a grid function in the basis.
    pub fn coordinates(&self, v: &[Complex64]) -> DVector<Complex64> {
        let wv = DVector::from_iterator(v.len(), v.iter().zip(&self.weights).map(|(a, w)| a * *w));
        self.vectors.adjoint() * wv
    }

    /// Basis vector `m` as a grid function.
    pub fn vector(&self, m: usize) -> Vec<Complex64> {
        self.vectors.column(m).iter().copied().collect()
    }
}

/// Matrix ⟨e_m, K e_n⟩ for m < rows, n < cols (columns evaluated in parallel).
pub fn matrix_elements(handle: &dyn OperatorHandle, basis: &BasisSpec, rows: usize, cols: usize) -> Result<DMatrix<Complex64>> {
    if handle.dim() != basis.dim() {
        return Err(QnmError::ResolutionError(format!("operator dimension {} vs basis dimension {}", handle.dim(), basis.dim())));
    }
    let columns: Vec<Vec<Complex64>> = (0..cols)
        .into_par_iter()
        .map(|n| {
            let ke = handle.apply(&basis.vector(n))?;
            let c = basis.coordinates(&ke);
            Ok(c.rows(0, rows).iter().copied().collect())
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(rows, cols, |i, j| columns[j][i]))
}

/// det(I + M) by LU with partial pivoting, accumulated as log-modulus and phase;
/// returns (det, max|U_ii|/min|U_ii|). An exactly zero pivot gives (0, ∞).
pub fn det_eval(m: &DMatrix<Complex64>) -> (Complex64, f64) {
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] += ONE;
    }
    let mut log_abs = 0.0;
    let mut phase = ONE;
    let (mut umax, mut umin) = (0.0f64, f64::INFINITY);
    for k in 0..n {
        let (p, pmax) = (k..n).map(|i| (i, a[(i, k)].norm())).fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax == 0.0 {
            return (ZERO, f64::INFINITY);
        }
        if p != k {
            a.swap_rows(p, k);
            phase = -phase;
        }
        let piv = a[(k, k)];
        log_abs += pmax.ln();
        phase *= piv / pmax;
        umax = umax.max(pmax);
        umin = umin.min(pmax);
        for i in k + 1..n {
            let f = a[(i, k)] / piv;
            if f == ZERO {
                continue;
            }
            for j in k + 1..n {
                let t = a[(k, j)];
                a[(i, j)] -= f * t;
            }
        }
    }
    let det = if n == 0 { ONE } else { phase * log_abs.exp() };
    (det, if n == 0 { 1.0 } else { umax / umin })
}

/// Power-iteration estimate of ‖M‖₂ (POWER_ITERATIONS steps on M*M); returns (estimate, last relative change).
pub fn norm_estimate(m: &DMatrix<Complex64>) -> (f64, f64) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0.0, 0.0);
    }
    let n = m.ncols();
    // deterministic start with all components present
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * (i as f64).sin(), 0.05 * (i as f64).cos()));
    v /= Complex64::new(v.norm(), 0.0);
    let (mut est, mut delta) = (0.0, 0.0);
    for _ in 0..POWER_ITERATIONS {
        let mv = m * &v;
        let new = mv.norm();
        delta = if new > 0.0 { (new - est).abs() / new } else { 0.0 };
        est = new;
        if new == 0.0 {
            break;
        }
        let w = m.adjoint() * mv;
        let wn = w.norm();
        if wn == 0.0 {
            break;
        }
        v = w / Complex64::new(wn, 0.0);
    }
    (est, delta)
}

/// Sorted embedding singular values s_j(ι) over the sector lattice with tail control.
#[derive(Debug, Clone)]
pub struct IotaTable {
    /// s = k − 1.
    pub s: u32,
    /// d = N − 2(N′−1).
    pub d: u32,
    /// Box half-width L.
    pub box_half_width: i64,
    /// Values inside the box, sorted descending.
    pub sorted: Vec<f64>,
    /// Σ over the box.
    pub box_sum: f64,
    /// Bound on Σ outside the box.
    pub tail: f64,
}

impl IotaTable {
    /// Builds the table for the sector lattice (𝔫₁, 𝔫₂) ∈ ℤ², 𝔫₃ = −ℓ fixed.
    pub fn new(omegas: [f64; 3], ell: i32, s: u32, d: u32, half_width: i64) -> Result<Self> {
        if d <= 2 {
            return Err(QnmError::ModeError(format!("ι is not trace class on the 2D sector lattice for d = {d} ≤ 2")));
        }
        let mut sorted = Vec::with_capacity(((2 * half_width + 1) * (2 * half_width + 1)) as usize);
        for a in -half_width..=half_width {
            for b in -half_width..=half_width {
                sorted.push(iota_value([a, b, -(ell as i64)], omegas, s, d));
            }
        }
        sorted.sort_by(|x, y| y.total_cmp(x));
        // ascending summation order for accuracy
        let box_sum = sorted.iter().rev().fold(0.0, |acc, &x| acc + x);
        let tail = Self::tail_bound(omegas, ell, d, half_width)?;
        Ok(IotaTable { s, d, box_half_width: half_width, sorted, box_sum, tail })
    }

    /// Bound on Σ_{max|𝔫_j| > L} s(𝔫) ≤ 16 ω_min^{−d} L^{2−d}/(d − 2), valid once ω_min·L ≥ max(1, |ℓ|).
    pub fn tail_bound(omegas: [f64; 3], ell: i32, d: u32, half_width: i64) -> Result<f64> {
        let w = omegas[0].min(omegas[1]);
        let l = half_width as f64;
        if w * l < 1.0f64.max(ell.unsigned_abs() as f64) {
            return Err(QnmError::invalid("lattice box", "box too small for the tail comparison"));
        }
        let d = d as f64;
        Ok(16.0 * w.powf(-d) * l.powf(2.0 - d) / (d - 2.0))
    }

    /// Upper bound on ‖ι‖₁.
    pub fn norm(&self) -> f64 {
        self.box_sum + self.tail
    }

    /// Σ_{j < count} min(s_j(ι)·op, eps).
    pub fn truncated_sum(&self, op: f64, eps: f64, count: usize) -> f64 {
        let inside = count.min(self.sorted.len());
        let mut sum = self.sorted[..inside].iter().fold(0.0, |acc, &x| acc + (x * op).min(eps));
        if count > self.sorted.len() {
            sum += self.tail * op;
        }
        sum
    }
}

/// Error budget of one determinant sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// ‖ι‖₁ (box sum plus tail bound).
    pub iota_trace: f64,
    /// Estimate of ‖K‖_{H^{k−1} → H^{k−1+d}}.
    pub op_norm_est: f64,
    /// Last relative change of the power iteration for `op_norm_est`.
    pub op_norm_delta: f64,
    /// Estimate of ‖(1 − Π_R)K‖.
    pub complement_norm: f64,
    /// ‖K‖₁ ≤ ‖ι‖₁ · op_norm_est.
    pub k_trace_bound: f64,
    /// 𝔗_R.
    pub t_r: f64,
    /// 𝔇_R = 𝔗_R e^{1 + ‖K‖₁ + 𝔗_R}.
    pub dfrak_r: f64,
    /// N_ε ≤ ‖K‖₁/ε with ε = COUNT_EPSILON.
    pub n_eps: f64,
    /// Operator norms are power-iteration estimates.
    pub estimated: bool,
}

/// D_R at one σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetSample {
    /// σ.
    pub sigma: Complex64,
    /// D_R(σ).
    pub d_r: Complex64,
    /// Conditioning of the LU factors.
    pub cond_estimate: f64,
    /// Error budget.
    pub budget: ErrorBudget,
    /// |D_R| < FLAG_FACTOR·𝔇_R.
    pub flagged: bool,
}

/// Determinant engine for a remainder family on a fixed basis.
pub struct DeterminantEngine<F: RemainderFamily> {
    family: F,
    basis: BasisSpec,
    iota: IotaTable,
}

impl<F: RemainderFamily> DeterminantEngine<F> {
    /// Engine with s = k − 1 and d = `smoothing` (N − 2(N′−1) for the parametrix remainder).
    pub fn new(family: F, basis: BasisSpec, smoothing: u32) -> Result<Self> {
        if family.dim() != basis.dim() {
            return Err(QnmError::ResolutionError(format!("family dimension {} vs basis dimension {}", family.dim(), basis.dim())));
        }
        let iota = IotaTable::new(basis.omegas, basis.ell, basis.k - 1, smoothing, LATTICE_BOX)?;
        Ok(DeterminantEngine { family, basis, iota })
    }

    /// Engine for the parametrix remainder of `sector` (checks the trace-class constraints).
    pub fn for_sector(family: F, basis: BasisSpec, sector: &SectorConfig) -> Result<Self> {
        if !sector.trace_class_ok() {
            return Err(QnmError::ModeError(format!(
                "(N, N′) = ({}, {}) violates N ≥ 3N′−2 and N − 2(N′−1) > 3",
                sector.n_depth, sector.n_prime
            )));
        }
        Self::new(family, basis, sector.n_depth - 2 * (sector.n_prime - 1))
    }

    /// The basis.
    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    /// The ι table.
    pub fn iota(&self) -> &IotaTable {
        &self.iota
    }

    /// The remainder family.
    pub fn family(&self) -> &F {
        &self.family
    }

    /// Full matrix K̂ = E*WKE of the remainder at σ.
    pub fn full_matrix(&self, sigma: Complex64) -> Result<DMatrix<Complex64>> {
        let h = self.family.remainder(sigma)?;
        if h.kind() != OperatorKind::K {
            return Err(QnmError::invalid("remainder", "family must return a K handle"));
        }
        let n = self.basis.dim();
        matrix_elements(h.as_ref(), &self.basis, n, n)
    }

    /// D_R(σ) and its budget.
    pub fn sample(&self, sigma: Complex64) -> Result<DetSample> {
        let k = self.full_matrix(sigma)?;
        Ok(self.sample_from_matrix(sigma, &k))
    }

    /// D_R and budget from a precomputed K̂.
    pub fn sample_from_matrix(&self, sigma: Complex64, k: &DMatrix<Complex64>) -> DetSample {
        let n = self.basis.dim();
        let r = self.basis.rank;
        let (d_r, cond) = det_eval(&k.view((0, 0), (r, r)).into_owned());
        let (s, d) = (self.iota.s, self.iota.d);
        let ws = self.basis.mode_weights(s);
        let wsd = self.basis.mode_weights(s + d);
        let weighted = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * (wsd[i] / ws[j]));
        let (op, op_delta) = norm_estimate(&weighted);
        let comp = DMatrix::from_fn(n - r, n, |i, j| k[(i + r, j)] * (ws[i + r] / ws[j]));
        let (mut eps, _) = norm_estimate(&comp);
        if eps <= COMPLEMENT_FLOOR * k.camax() {
            eps = 0.0;
        }
        let t_r = self.iota.truncated_sum(op, eps, n - r);
        let k_trace = self.iota.norm() * op;
        let dfrak = if t_r == 0.0 { 0.0 } else { t_r * (1.0 + k_trace + t_r).exp() };
        let budget = ErrorBudget {
            iota_trace: self.iota.norm(),
            op_norm_est: op,
            op_norm_delta: op_delta,
            complement_norm: eps,
            k_trace_bound: k_trace,
            t_r,
            dfrak_r: dfrak,
            n_eps: k_trace / COUNT_EPSILON,
            estimated: true,
        };
        DetSample { sigma, d_r, cond_estimate: cond, budget, flagged: d_r.norm() < FLAG_FACTOR * dfrak }
    }
}

impl<F: RemainderFamily> DetEvaluator for DeterminantEngine<F> {
    fn evaluate(&self, sigma: Complex64) -> Result<DetPoint> {
        let s = self.sample(sigma)?;
        Ok(DetPoint { value: s.d_r, dfrak: s.budget.dfrak_r, k_trace: s.budget.k_trace_bound })
    }
}

/// Finite-rank family K(σ) = Σ_i λ_i(σ) u_i⟨u_i, ·⟩ in a weighted inner product.
pub struct FiniteRankFamily<L> {
    vectors: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
    lambdas: L,
}

impl<L: Fn(Complex64) -> Vec<Complex64> + Sync> FiniteRankFamily<L> {
    /// Family with orthonormal `vectors` (in the `weights` inner product) and eigenvalue map `lambdas`.
    pub fn new(vectors: Vec<Vec<Complex64>>, weights: Vec<f64>, lambdas: L) -> Self {
        FiniteRankFamily { vectors, weights, lambdas }
    }
}

struct FiniteRankOperator<'a> {
    vectors: &'a [Vec<Complex64>],
    weights: &'a [f64],
    lambdas: Vec<Complex64>,
}

impl OperatorHandle for FiniteRankOperator<'_> {
    fn dim(&self) -> usize {
        self.weights.len()
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::K
    }
    fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.weights.len() {
            return Err(QnmError::ResolutionError(format!("expected {} unknowns, got {}", self.weights.len(), v.len())));
        }
        let mut out = vec![ZERO; v.len()];
        for (u, lam) in self.vectors.iter().zip(&self.lambdas) {
            let c: Complex64 = u.iter().zip(v).zip(self.weights).map(|((a, b), w)| a.conj() * b * *w).sum();
            out.iter_mut().zip(u).for_each(|(o, a)| *o += lam * c * a);
        }
        Ok(out)
    }
}

impl<L: Fn(Complex64) -> Vec<Complex64> + Sync> RemainderFamily for FiniteRankFamily<L> {
    fn dim(&self) -> usize {
        self.weights.len()
    }
    fn remainder(&self, sigma: Complex64) -> Result<Box<dyn OperatorHandle + '_>> {
        let lambdas = (self.lambdas)(sigma);
        if lambdas.len() != self.vectors.len() {
            return Err(QnmError::invalid("lambdas", "one eigenvalue per vector"));
        }
        Ok(Box::new(FiniteRankOperator { vectors: &self.vectors, weights: &self.weights, lambdas }))
    }
}
