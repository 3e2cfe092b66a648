//! Symbolic boundary parametrix: fiber and basis corrections of a totally
//! characteristic operator ρ⁻¹(a(ρD_ρ)² + bρD_ρ + c) + a̸D_ω² + b̸D_ω.
//!
//! Symbols are stored in reduced form q̃ = q/ρ. With X = ξ_{k,l} = ξ − i(k+l),
//! conjugating by ρ^{iξ+k+l}e^{iωη} turns the operator into the action
//!
//! 𝓛̃q̃ = (aX² + (b−2ia)X − ib − a + c)q̃ − ρ(2iaX + ib + 3a)∂_ρq̃ − aρ²∂²_ρq̃
//!      + ρ[(a̸η² + b̸η)q̃ − i(2a̸η + b̸)∂_ωq̃ − a̸∂²_ωq̃],
//!
//! so that P Op[F_{k,l} ρq̃] = Op[F_{k,l} 𝓛̃q̃]. The fiber corrections divide
//! the running residual r = 𝓛̃(Σq̃) − χφ by the modified elliptic denominator
//! a(X² + (k+l+ε)²) + ρa̸η² + ρC; the basis corrections cancel its boundary
//! Taylor coefficients with the indicial family 𝔭_j(ξ) = a₀(X−ij)² + b₀(X−ij) + c₀.

use super::symbol::{CoefficientFn, CompiledSymbol, SymbolExpr, SymbolGraph, SymbolPoint, Var};
use crate::error::{QnmError, Result};
use crate::quantization::{f_kl, op_mf_apply, MellinGrid};
use num_complex::Complex64;
use std::sync::Arc;

/// Relative size below which the indicial family is considered to have a real root.
pub const STRIP_TOL: f64 = 1e-10;

/// Number of ω samples used to check ω-dependent indicial families for real roots.
const INDICIAL_OMEGA_SAMPLES: usize = 16;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A coefficient of the boundary operator: a constant or a function of (ρ, ω).
#[derive(Clone)]
pub enum Coefficient {
    /// Constant value.
    Const(Complex64),
    /// Smooth function with derivatives.
    Fn(Arc<dyn CoefficientFn>),
}

impl Coefficient {
    /// Real constant.
    pub fn real(x: f64) -> Self {
        Coefficient::Const(Complex64::new(x, 0.0))
    }

    fn expr(&self, g: &mut SymbolGraph) -> SymbolExpr {
        match self {
            Coefficient::Const(c) => g.constant(*c),
            Coefficient::Fn(f) => g.coefficient(f.clone()),
        }
    }
}

/// Coefficients of the boundary operator; `angular` is `None` for a purely radial (n = 0) model.
#[derive(Clone)]
pub struct BoundaryOperator {
    /// a(ρ, ω).
    pub a: Coefficient,
    /// b(ρ, ω).
    pub b: Coefficient,
    /// c(ρ, ω).
    pub c: Coefficient,
    /// (a̸, b̸) of the single angular variable, if any.
    pub angular: Option<(Coefficient, Coefficient)>,
}

/// Depth, weights and cutoffs of the symbolic construction.
#[derive(Clone)]
pub struct SymbolSettings {
    /// Sobolev order k of the Mellin weight.
    pub k: u32,
    /// Weight l.
    pub l: f64,
    /// ε > 0 of the modified denominator.
    pub epsilon: f64,
    /// C ≥ 0 of the +ρC variant.
    pub c_shift: f64,
    /// Fiber depth N.
    pub n_depth: u32,
    /// Basis depth N′ (0 disables basis corrections).
    pub n_prime: u32,
    /// Radial cutoff χ.
    pub cutoff: Arc<dyn CoefficientFn>,
    /// Angular partition function φ (1 if `None`).
    pub angular_cutoff: Option<Arc<dyn CoefficientFn>>,
    /// Spectral parameter σ at which the coefficients were frozen (reported in errors).
    pub sigma: Complex64,
}

/// Coefficients (A₀, A₁, A₂) of the multiplier A₀ + A₁X + A₂X² by which 𝓛̃ acts on
/// ρ-independent symbols: A₀ = −ib − a + c, A₁ = b − 2ia, A₂ = a.
pub fn multiplier_coefficients(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 3] {
    [-I * b - a + c, b - 2.0 * I * a, a]
}

/// All symbols of a right boundary parametrix, sharing one expression graph.
pub struct ParametrixBundle {
    /// Expression arena.
    pub graph: SymbolGraph,
    /// Settings used to build the bundle.
    pub settings: SymbolSettings,
    /// ξ_{k,l}.
    pub xi_kl: SymbolExpr,
    /// χφ.
    pub cutoff: SymbolExpr,
    /// Modified fiber denominator.
    pub denominator: SymbolExpr,
    /// Reduced fiber symbols q̃^{f,j}, j = 1..N.
    pub fiber: Vec<SymbolExpr>,
    /// Reduced basis symbols q̃^{b,j}, j = 1..N′.
    pub basis: Vec<SymbolExpr>,
    /// Residual 𝓛̃(Σq̃^f) − χφ after the N fiber steps.
    pub fiber_residual: SymbolExpr,
    /// Residual after the basis corrections as well.
    pub residual: SymbolExpr,
    /// Indicial families 𝔭_j(ξ), j = 1..N′ (boundary-frozen coefficients).
    pub indicial: Vec<SymbolExpr>,
    op: OperatorExprs,
}

#[derive(Clone, Copy)]
struct OperatorExprs {
    a: SymbolExpr,
    b: SymbolExpr,
    c: SymbolExpr,
    angular: Option<(SymbolExpr, SymbolExpr)>,
}

impl ParametrixBundle {
    /// Full symbol q = ρ(Σq̃^f + Σq̃^b).
    pub fn total_symbol(&mut self) -> SymbolExpr {
        let mut all = self.fiber.clone();
        all.extend(self.basis.iter().copied());
        let s = self.graph.sum(&all);
        let rho = self.graph.var(Var::Rho);
        self.graph.mul(rho, s)
    }

    /// Fiber-only symbol ρΣq̃^f.
    pub fn fiber_symbol(&mut self) -> SymbolExpr {
        let s = self.graph.sum(&self.fiber.clone());
        let rho = self.graph.var(Var::Rho);
        self.graph.mul(rho, s)
    }

    /// Unreduced symbol ρq̃ of one reduced symbol.
    pub fn unreduced(&mut self, q_tilde: SymbolExpr) -> SymbolExpr {
        let rho = self.graph.var(Var::Rho);
        self.graph.mul(rho, q_tilde)
    }

    /// Applies the action 𝓛̃ of the operator to a reduced symbol.
    pub fn action(&mut self, q_tilde: SymbolExpr) -> SymbolExpr {
        action(&mut self.graph, &self.op, self.xi_kl, q_tilde)
    }

    /// Declared (ξ, η)-order −(j+1) of q^{f,j}.
    pub fn fiber_order(j: u32) -> i32 {
        -(j as i32 + 1)
    }

    /// Declared (ξ, η)-order −N + 2(j−1) of q^{b,j}.
    pub fn basis_order(&self, j: u32) -> i32 {
        -(self.settings.n_depth as i32) + 2 * (j as i32 - 1)
    }

    /// Declared ρ-vanishing order j of q^{b,j}.
    pub fn basis_rho_order(j: u32) -> u32 {
        j
    }
}

fn action(g: &mut SymbolGraph, op: &OperatorExprs, x: SymbolExpr, q: SymbolExpr) -> SymbolExpr {
    let OperatorExprs { a, b, c, angular } = *op;
    let rho = g.var(Var::Rho);
    // multiplier aX² + (b − 2ia)X − ib − a + c
    let x2 = g.powi(x, 2);
    let t_a = g.mul(a, x2);
    let two_i_a = g.scale(2.0 * I, a);
    let b_m = g.sub(b, two_i_a);
    let t_b = g.mul(b_m, x);
    let i_b = g.scale(I, b);
    let mut m0 = g.sub(c, a);
    m0 = g.sub(m0, i_b);
    let mult = g.sum(&[t_a, t_b, m0]);
    let mut terms = vec![g.mul(mult, q)];
    // −ρ(2iaX + ib + 3a)∂_ρq̃
    let q_r = g.diff(q, Var::Rho);
    let ax = g.mul(two_i_a, x);
    let three_a = g.scale(Complex64::new(3.0, 0.0), a);
    let c1 = g.sum(&[ax, i_b, three_a]);
    let t = g.mul(c1, q_r);
    let t = g.mul(rho, t);
    terms.push(g.neg(t));
    // −aρ²∂²_ρq̃
    let q_rr = g.diff(q_r, Var::Rho);
    let rho2 = g.powi(rho, 2);
    let t = g.mul(a, q_rr);
    let t = g.mul(rho2, t);
    terms.push(g.neg(t));
    if let Some((sa, sb)) = angular {
        let eta = g.var(Var::Eta);
        let eta2 = g.powi(eta, 2);
        let m = g.mul(sa, eta2);
        let mb = g.mul(sb, eta);
        let mm = g.add(m, mb);
        let mut ang = vec![g.mul(mm, q)];
        let q_w = g.diff(q, Var::Omega);
        let sa_eta = g.mul(sa, eta);
        let two_sa_eta = g.scale(Complex64::new(2.0, 0.0), sa_eta);
        let cw = g.add(two_sa_eta, sb);
        let cw = g.scale(-I, cw);
        ang.push(g.mul(cw, q_w));
        let q_ww = g.diff(q_w, Var::Omega);
        let t = g.mul(sa, q_ww);
        ang.push(g.neg(t));
        let s = g.sum(&ang);
        terms.push(g.mul(rho, s));
    }
    g.sum(&terms)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Builds the fiber symbols q̃^{f,1..N} and the fiber residual.
pub fn build_fiber_symbols(op: &BoundaryOperator, settings: SymbolSettings) -> Result<ParametrixBundle> {
    if settings.n_depth < 1 {
        return Err(QnmError::invalid("N", "need N ≥ 1"));
    }
    if !(settings.epsilon > 0.0) {
        return Err(QnmError::invalid("epsilon", "need ε > 0"));
    }
    if !(settings.c_shift >= 0.0) {
        return Err(QnmError::invalid("C_shift", "need C ≥ 0"));
    }
    let mut g = SymbolGraph::new();
    let ops = OperatorExprs {
        a: op.a.expr(&mut g),
        b: op.b.expr(&mut g),
        c: op.c.expr(&mut g),
        angular: op.angular.as_ref().map(|(sa, sb)| (sa.expr(&mut g), sb.expr(&mut g))),
    };
    let kl = settings.k as f64 + settings.l;
    let xi = g.var(Var::Xi);
    let shift = g.constant(Complex64::new(0.0, -kl));
    let x = g.add(xi, shift);
    let chi = g.coefficient(settings.cutoff.clone());
    let cutoff = match &settings.angular_cutoff {
        Some(phi) => {
            let p = g.coefficient(phi.clone());
            g.mul(chi, p)
        }
        None => chi,
    };
    // a(X² + (k+l+ε)²) + ρa̸η² + ρC
    let x2 = g.powi(x, 2);
    let e2 = g.real((kl + settings.epsilon).powi(2));
    let inner = g.add(x2, e2);
    let mut den = g.mul(ops.a, inner);
    let rho = g.var(Var::Rho);
    if let Some((sa, _)) = ops.angular {
        let eta = g.var(Var::Eta);
        let eta2 = g.powi(eta, 2);
        let t = g.mul(sa, eta2);
        let t = g.mul(rho, t);
        den = g.add(den, t);
    }
    if settings.c_shift > 0.0 {
        let t = g.scale(Complex64::new(settings.c_shift, 0.0), rho);
        den = g.add(den, t);
    }
    let mut residual = g.neg(cutoff);
    let mut fiber = Vec::with_capacity(settings.n_depth as usize);
    for _ in 0..settings.n_depth {
        let num = g.neg(residual);
        let q = g.div(num, den);
        let lq = action(&mut g, &ops, x, q);
        residual = g.add(residual, lq);
        fiber.push(q);
    }
    Ok(ParametrixBundle {
        graph: g,
        settings,
        xi_kl: x,
        cutoff,
        denominator: den,
        fiber,
        basis: Vec::new(),
        fiber_residual: residual,
        residual,
        indicial: Vec::new(),
        op: ops,
    })
}

/// Adds the basis corrections q̃^{b,1..N′}; fails with [`QnmError::StripError`] if some
/// 𝔭_j has a real root (checked at `INDICIAL_OMEGA_SAMPLES` angles when ω-dependent).
pub fn build_basis_symbols(bundle: &mut ParametrixBundle) -> Result<()> {
    let np = bundle.settings.n_prime;
    let kl = bundle.settings.k as f64 + bundle.settings.l;
    let g = &mut bundle.graph;
    let zero = g.real(0.0);
    let (a0, b0, c0) = (
        g.substitute(bundle.op.a, Var::Rho, zero),
        g.substitute(bundle.op.b, Var::Rho, zero),
        g.substitute(bundle.op.c, Var::Rho, zero),
    );
    let coeffs = g.compile(&[a0, b0, c0]);
    let omegas: Vec<f64> = if bundle.op.angular.is_some() {
        (0..INDICIAL_OMEGA_SAMPLES).map(|k| 2.0 * std::f64::consts::PI * k as f64 / INDICIAL_OMEGA_SAMPLES as f64).collect()
    } else {
        vec![0.0]
    };
    for j in 1..=np {
        for &w in &omegas {
            let v = coeffs.eval(SymbolPoint::new(0.0, w, 0.0, 0.0));
            for root in quadratic_roots(v[0], v[1], v[2]) {
                // 𝔭_j(ξ) = 𝔭₀(ξ − i(k+l+j)); a root z of 𝔭₀ gives ξ = z + i(k+l+j)
                let xi = root + Complex64::new(0.0, kl + j as f64);
                if xi.im.abs() < STRIP_TOL * (1.0 + xi.norm()) {
                    return Err(QnmError::StripError {
                        sigma_re: bundle.settings.sigma.re,
                        sigma_im: bundle.settings.sigma.im,
                        j,
                        horizon: "model boundary".into(),
                        min_value: 0.0,
                    });
                }
            }
        }
    }
    let x = bundle.xi_kl;
    let rho = g.var(Var::Rho);
    let mut residual = bundle.fiber_residual;
    for j in 1..=np {
        // 𝔭_j(ξ) = a₀(X − ij)² + b₀(X − ij) + c₀
        let shift = g.constant(Complex64::new(0.0, -(j as f64)));
        let xj = g.add(x, shift);
        let xj2 = g.powi(xj, 2);
        let t2 = g.mul(a0, xj2);
        let t1 = g.mul(b0, xj);
        let p = g.sum(&[t2, t1, c0]);
        // Taylor coefficient of ρ^{j−1} of the residual at the boundary
        let d = g.diff_n(residual, Var::Rho, j - 1);
        let d0 = g.substitute(d, Var::Rho, zero);
        let coef = g.scale(Complex64::new(-1.0 / factorial(j - 1), 0.0), d0);
        let rp = g.powi(rho, j as i32 - 1);
        let chi_coef = g.mul(bundle.cutoff, coef);
        let num = g.mul(rp, chi_coef);
        let q = g.div(num, p);
        let lq = action(g, &bundle.op, x, q);
        residual = g.add(residual, lq);
        bundle.basis.push(q);
        bundle.indicial.push(p);
    }
    bundle.residual = residual;
    Ok(())
}

fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    if a.norm() == 0.0 {
        return if b.norm() == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = (b * b - 4.0 * a * c).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
    let r1 = q / a;
    let r2 = if q.norm() == 0.0 { r1 } else { c / q };
    vec![r1, r2]
}

/// Applies Op_ℳ[F_{k,l} · s] to radial samples v for a compiled radial symbol s(ρ, ξ)
/// (evaluated at ω = η = 0).
pub fn apply_radial_symbol(grid: &MellinGrid, symbol: &CompiledSymbol, k: u32, l: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    // pole check once on the real line
    f_kl(1.0, Complex64::new(0.0, 0.0), k, l)?;
    op_mf_apply(
        grid,
        |rho, xi| {
            let f = f_kl(rho, xi, k, l).unwrap_or(Complex64::new(0.0, 0.0));
            f * symbol.eval_first(SymbolPoint { rho, omega: 0.0, xi, eta: 0.0 })
        },
        v,
    )
}
