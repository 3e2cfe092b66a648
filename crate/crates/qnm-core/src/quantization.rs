//! Mellin, Fourier and mixed Mellin–Fourier quantization near a boundary.
//!
//! With x = ln ρ the Mellin transform ℳ[u](ξ) = ∫ ρ^{−iξ} u(ρ) dρ/ρ becomes a
//! Fourier transform in x, so everything is done on a uniform x grid with the
//! trapezoidal rule (spectrally accurate for rapidly decaying integrands) and
//! FFTs. The quantization of a symbol a(ρ, ξ) is
//!
//! Op_ℳ[a]v(ρ) = (2π)⁻¹ ∫ ρ^{iξ} a(ρ, ξ) ℳ[v](ξ) dξ,
//!
//! applied by a dense sum over the (x, ξ) grid; the mixed version adds a
//! periodic Fourier variable ω with dual η.

use crate::error::{QnmError, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Relative spectral energy beyond 3/8 of the Nyquist band above which a
/// transform is reported as aliased.
pub const ALIAS_THRESHOLD: f64 = 1e-8;

/// Relative energy of symbol × spectrum in the outer dual band above which a
/// quantized application is reported as truncated.
pub const TRUNCATION_THRESHOLD: f64 = 1e-10;

/// Distance from the zeros {0, …, k−1} of the falling factorial at which
/// [`f_kl`] refuses to evaluate.
pub const POLE_TOL: f64 = 1e-12;

/// Fraction of the dual grid (in |index| / n) treated as its outer band.
const OUTER_BAND: f64 = 3.0 / 8.0;

/// Largest order for which the falling factorial is expanded as a product;
/// beyond it the log-Gamma ratio is used.
const PRODUCT_ORDER_MAX: u32 = 16;

/// Uniform grid in x = ln ρ with its FFT-dual frequency grid.
#[derive(Clone)]
pub struct MellinGrid {
    x_min: f64,
    dx: f64,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MellinGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MellinGrid").field("x_min", &self.x_min).field("dx", &self.dx).field("n", &self.n).finish()
    }
}

impl MellinGrid {
    /// Grid of `n` (a power of two) nodes x_j = x_min + jΔx, Δx = (x_max − x_min)/n.
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 8 {
            return Err(QnmError::invalid("n", format!("node count must be a power of two ≥ 8, got {n}")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(QnmError::invalid("x_max", "need a finite window x_min < x_max"));
        }
        let mut planner = FftPlanner::new();
        Ok(MellinGrid {
            x_min,
            dx: (x_max - x_min) / n as f64,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    /// Grid covering [ρ_min, 1.5·ρ₀′] in ρ, as used for a radial cutoff supported below ρ₀′.
    pub fn for_cutoff(rho_min: f64, rho0_prime: f64, n: usize) -> Result<Self> {
        if !(rho_min > 0.0 && rho_min < rho0_prime) {
            return Err(QnmError::invalid("rho_min", "need 0 < ρ_min < ρ₀′"));
        }
        let g = Self::new(rho_min.ln(), (1.5 * rho0_prime).ln(), n)?;
        debug_assert!(g.x_max().exp() > rho0_prime);
        Ok(g)
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false (grids have at least eight nodes).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing Δx.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Left end of the window.
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    /// Right end of the (periodic) window.
    pub fn x_max(&self) -> f64 {
        self.x_min + self.n as f64 * self.dx
    }

    /// Dual spacing Δξ = 2π/(nΔx).
    pub fn dxi(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.dx)
    }

    /// The x nodes.
    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x_min + j as f64 * self.dx).collect()
    }

    /// The ρ = e^x nodes.
    pub fn rho_nodes(&self) -> Vec<f64> {
        self.x_nodes().into_iter().map(f64::exp).collect()
    }

    /// The dual nodes ξ_m = (m − n/2)Δξ, m = 0..n (centered ordering).
    pub fn xi_nodes(&self) -> Vec<f64> {
        let h = (self.n / 2) as f64;
        (0..self.n).map(|m| (m as f64 - h) * self.dxi()).collect()
    }

    /// Samples f(ρ) on the ρ nodes.
    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.rho_nodes().into_iter().map(f).collect()
    }

    fn check_len(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.n {
            return Err(QnmError::ResolutionError(format!("expected {} samples, got {}", self.n, v.len())));
        }
        Ok(())
    }

    /// ℳ[u](ξ_m) = Δx Σ_j e^{−iξ_m x_j} u_j on the centered dual grid, without the alias check.
    pub fn forward_unchecked(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(u)?;
        let mut buf = u.to_vec();
        self.forward.process(&mut buf);
        let h = self.n / 2;
        Ok((0..self.n)
            .map(|m| {
                let xi = (m as f64 - h as f64) * self.dxi();
                buf[(m + h) % self.n] * Complex64::from_polar(self.dx, -xi * self.x_min)
            })
            .collect())
    }

    /// Mellin transform of radial samples; fails with [`QnmError::AliasWarning`]
    /// when the relative energy in the outer dual band exceeds [`ALIAS_THRESHOLD`].
    pub fn mellin_forward(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let spec = self.forward_unchecked(u)?;
        let tail = self.tail_mass(&spec);
        if tail > ALIAS_THRESHOLD {
            return Err(QnmError::AliasWarning { tail_mass: tail, threshold: ALIAS_THRESHOLD });
        }
        Ok(spec)
    }

    /// Inverse of [`MellinGrid::mellin_forward`]: u_j = (2π)⁻¹ Δξ Σ_m e^{iξ_m x_j} ℳ_m.
    pub fn mellin_inverse(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(spectrum)?;
        let h = self.n / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for (m, s) in spectrum.iter().enumerate() {
            let xi = (m as f64 - h as f64) * self.dxi();
            buf[(m + h) % self.n] = s * Complex64::from_polar(1.0, xi * self.x_min);
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / (self.n as f64 * self.dx);
        Ok(buf.into_iter().map(|z| z * scale).collect())
    }

    /// ℳ[u](ξ) at an arbitrary complex ξ by direct trapezoidal summation.
    pub fn transform_at(&self, u: &[Complex64], xi: Complex64) -> Result<Complex64> {
        self.check_len(u)?;
        let i = Complex64::new(0.0, 1.0);
        Ok(self.x_nodes().iter().zip(u).map(|(&x, &v)| (-i * xi * x).exp() * v).sum::<Complex64>() * self.dx)
    }

    /// Relative spectral energy in the outer band |m − n/2| > (3/8)n.
    pub fn tail_mass(&self, spectrum: &[Complex64]) -> f64 {
        let h = (self.n / 2) as f64;
        let cut = OUTER_BAND * self.n as f64;
        let (mut tail, mut total) = (0.0, 0.0);
        for (m, s) in spectrum.iter().enumerate() {
            let e = s.norm_sqr();
            total += e;
            if (m as f64 - h).abs() > cut {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// L²(dρ/ρ) norm of samples, ‖u‖² = Δx Σ|u_j|².
    pub fn l2_norm(&self, u: &[Complex64]) -> f64 {
        (self.dx * u.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Spectral norm (Δξ/2π · Σ|ℳ_m|²)^{1/2}, equal to [`MellinGrid::l2_norm`] by Plancherel.
    pub fn spectral_norm(&self, spectrum: &[Complex64]) -> f64 {
        (self.dxi() / (2.0 * PI) * spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Debug dump of a spectrum as CSV lines `xi,re,im`.
    pub fn spectrum_csv(&self, spectrum: &[Complex64]) -> String {
        let mut s = String::from("xi,re,im\n");
        for (xi, z) in self.xi_nodes().iter().zip(spectrum) {
            s.push_str(&format!("{xi:.17e},{:.17e},{:.17e}\n", z.re, z.im));
        }
        s
    }
}

/// Uniform periodic grid of `n` nodes on [0, period) for an angular variable ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierGrid {
    /// Period of ω.
    pub period: f64,
    /// Node count.
    pub n: usize,
}

impl FourierGrid {
    /// The ω nodes.
    pub fn omega_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 * self.period / self.n as f64).collect()
    }

    /// The dual integer frequencies η_m = 2π(m − n/2)/period.
    pub fn eta_nodes(&self) -> Vec<f64> {
        let h = (self.n / 2) as f64;
        (0..self.n).map(|m| 2.0 * PI * (m as f64 - h) / self.period).collect()
    }
}

/// A point (ξ, η) of the boundary cotangent fibre with the derived quantities
/// ξ_{k,l} = ξ − i(k+l) and |η|²_𝒶̸ = Σ 𝒶̸_j η_j².
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    /// Mellin dual variable.
    pub xi: Complex64,
    /// Angular dual variables.
    pub eta: Vec<f64>,
    /// ξ_{k,l}.
    pub xi_shift: Complex64,
    /// |η|²_𝒶̸.
    pub eta_norm_sq: f64,
}

impl CotangentPoint {
    /// Builds the point with weights `slash_a` (one per angular variable).
    pub fn new(xi: Complex64, eta: &[f64], k: f64, l: f64, slash_a: &[f64]) -> Self {
        let eta_norm_sq = eta.iter().zip(slash_a).map(|(e, a)| a * e * e).sum();
        CotangentPoint { xi, eta: eta.to_vec(), xi_shift: xi - Complex64::new(0.0, k + l), eta_norm_sq }
    }
}

/// F_{k,l}(ρ, ξ) = ρ^{k+l}/(iξ + k + l)_{(k)} with the falling factorial
/// (z)_{(k)} = z(z−1)⋯(z−k+1) = Γ(z+1)/Γ(z−k+1).
pub fn f_kl(rho: f64, xi: Complex64, k: u32, l: f64) -> Result<Complex64> {
    let z = Complex64::new(0.0, 1.0) * xi + (k as f64 + l);
    for j in 0..k {
        if (z - j as f64).norm() < POLE_TOL {
            return Err(QnmError::PoleError { z_re: z.re, z_im: z.im, k });
        }
    }
    let ff = if k <= PRODUCT_ORDER_MAX {
        (0..k).map(|j| z - j as f64).product::<Complex64>()
    } else {
        crate::numerics::falling_factorial(z, k)
    };
    Ok(rho.powf(k as f64 + l) / ff)
}

/// Op_ℳ[a]v for a radial symbol a(ρ, ξ) by dense summation over the (x, ξ) grid.
///
/// Fails with [`QnmError::TruncationWarning`] when the outer dual band carries
/// more than [`TRUNCATION_THRESHOLD`] of the energy of a·ℳ[v].
pub fn op_mf_apply<F>(grid: &MellinGrid, symbol: F, v: &[Complex64]) -> Result<Vec<Complex64>>
where
    F: Fn(f64, Complex64) -> Complex64 + Sync,
{
    let (out, tail, total) = dense_apply(grid, symbol, v)?;
    check_truncation(tail, total)?;
    Ok(out)
}

fn check_truncation(tail: f64, total: f64) -> Result<()> {
    if total > 0.0 && tail / total > TRUNCATION_THRESHOLD {
        return Err(QnmError::TruncationWarning { tail: tail / total, threshold: TRUNCATION_THRESHOLD });
    }
    Ok(())
}

/// Dense quantized sum, returning the output with the outer-band and total energies of a·ℳ[v].
fn dense_apply<F>(grid: &MellinGrid, symbol: F, v: &[Complex64]) -> Result<(Vec<Complex64>, f64, f64)>
where
    F: Fn(f64, Complex64) -> Complex64 + Sync,
{
    let spec = grid.forward_unchecked(v)?;
    let n = grid.len();
    let xs = grid.x_nodes();
    let xis = grid.xi_nodes();
    let h = n / 2;
    // e^{iξ_m x_j} = e^{iξ_m x_min} · e^{2πi(m−h)j/n}
    let twiddle: Vec<Complex64> = (0..n).map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64)).collect();
    let phase0: Vec<Complex64> = xis.iter().map(|&xi| Complex64::from_polar(1.0, xi * grid.x_min())).collect();
    let cut = OUTER_BAND * n as f64;
    let scale = grid.dxi() / (2.0 * PI);
    let rows: Vec<(Complex64, f64, f64)> = xs
        .par_iter()
        .enumerate()
        .map(|(j, &x)| {
            let rho = x.exp();
            let (mut acc, mut tail, mut total) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
            for m in 0..n {
                let av = symbol(rho, Complex64::new(xis[m], 0.0)) * spec[m];
                let e = av.norm_sqr();
                total += e;
                if (m as f64 - h as f64).abs() > cut {
                    tail += e;
                }
                let t = ((m + n - h) * j) % n;
                acc += av * phase0[m] * twiddle[t];
            }
            (acc * scale, tail, total)
        })
        .collect();
    let (tail, total) = rows.iter().fold((0.0, 0.0), |(a, b), r| (a + r.1, b + r.2));
    Ok((rows.into_iter().map(|r| r.0).collect(), tail, total))
}

/// Mixed quantization Op_{ℳ,ℱ}[a]v for a symbol a(ρ, ω, ξ, η) with one
/// periodic angular variable; `v` is stored x-major (`j_x · n_ω + j_ω`).
pub fn op_mf_apply_2d<F>(grid: &MellinGrid, angular: &FourierGrid, symbol: F, v: &[Complex64]) -> Result<Vec<Complex64>>
where
    F: Fn(f64, f64, Complex64, f64) -> Complex64 + Sync,
{
    let (nx, nw) = (grid.len(), angular.n);
    if v.len() != nx * nw {
        return Err(QnmError::ResolutionError(format!("expected {} samples, got {}", nx * nw, v.len())));
    }
    // Fourier coefficients in ω: v̂_p(x) = (1/n_ω) Σ_q e^{−iη_p ω_q} v(x, ω_q)
    let omegas = angular.omega_nodes();
    let etas = angular.eta_nodes();
    let mut per_eta: Vec<Vec<Complex64>> = Vec::with_capacity(nw);
    for &eta in &etas {
        let col: Vec<Complex64> = (0..nx)
            .map(|jx| {
                (0..nw).map(|q| v[jx * nw + q] * Complex64::from_polar(1.0, -eta * omegas[q])).sum::<Complex64>() / nw as f64
            })
            .collect();
        per_eta.push(col);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); nx * nw];
    let (mut tail, mut total) = (0.0, 0.0);
    for (q, &om) in omegas.iter().enumerate() {
        for (p, &eta) in etas.iter().enumerate() {
            let (part, t, e) = dense_apply(grid, |rho, xi| symbol(rho, om, xi, eta), &per_eta[p])?;
            tail += t;
            total += e;
            let ph = Complex64::from_polar(1.0, eta * om);
            for jx in 0..nx {
                out[jx * nw + q] += part[jx] * ph;
            }
        }
    }
    check_truncation(tail, total)?;
    Ok(out)
}

/// Op_ℳ[a] for a product symbol a = ρ^p g(ξ), applied by FFT in O(n log n).
pub fn op_product_apply<G>(grid: &MellinGrid, power: f64, g: G, v: &[Complex64]) -> Result<Vec<Complex64>>
where
    G: Fn(Complex64) -> Complex64,
{
    let spec = grid.forward_unchecked(v)?;
    let xis = grid.xi_nodes();
    let prod: Vec<Complex64> = spec.iter().zip(&xis).map(|(s, &xi)| s * g(Complex64::new(xi, 0.0))).collect();
    let out = grid.mellin_inverse(&prod)?;
    Ok(out.into_iter().zip(grid.rho_nodes()).map(|(z, rho)| z * rho.powf(power)).collect())
}
