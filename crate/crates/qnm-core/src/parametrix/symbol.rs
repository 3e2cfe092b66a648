//! Symbol expressions over the boundary cotangent variables (ρ, ω, ξ, η).
//!
//! Symbols live in a hash-consed DAG ([`SymbolGraph`]): structurally equal
//! subexpressions share one node, differentiation is exact and memoized, and
//! expressions are compiled into flat instruction lists for fast evaluation.
//! Coefficient functions of (ρ, ω) (operator coefficients, cutoffs) enter as
//! opaque primitives that can return any mixed partial derivative.

use crate::numerics::smooth_step_derivatives;
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// A free variable of a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    /// Boundary defining function ρ.
    Rho,
    /// Angular variable ω (at most one is used).
    Omega,
    /// Mellin dual variable ξ (complex evaluation allowed).
    Xi,
    /// Fourier dual variable η.
    Eta,
}

/// Evaluation point of a symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPoint {
    /// ρ.
    pub rho: f64,
    /// ω.
    pub omega: f64,
    /// ξ.
    pub xi: Complex64,
    /// η.
    pub eta: f64,
}

impl SymbolPoint {
    /// Point with real ξ.
    pub fn new(rho: f64, omega: f64, xi: f64, eta: f64) -> Self {
        SymbolPoint { rho, omega, xi: Complex64::new(xi, 0.0), eta }
    }
}

/// A smooth coefficient function of (ρ, ω) with mixed partial derivatives of any order.
pub trait CoefficientFn: Send + Sync {
    /// ∂_ρ^{d_rho} ∂_ω^{d_omega} f at (ρ, ω).
    fn value(&self, rho: f64, omega: f64, d_rho: u32, d_omega: u32) -> Complex64;
    /// Short name used in debug output.
    fn name(&self) -> &str;
}

/// Radial cutoff χ(ρ): 1 for ρ ≤ ρ₀, 0 for ρ ≥ ρ₀′, C^∞ in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCutoff {
    /// ρ₀.
    pub rho0: f64,
    /// ρ₀′.
    pub rho1: f64,
}

impl CoefficientFn for RadialCutoff {
    fn value(&self, rho: f64, _omega: f64, d_rho: u32, d_omega: u32) -> Complex64 {
        if d_omega > 0 {
            return Complex64::new(0.0, 0.0);
        }
        let w = self.rho1 - self.rho0;
        let t = (rho - self.rho0) / w;
        let d = smooth_step_derivatives(t, d_rho as usize);
        let v = if d_rho == 0 { 1.0 - d[0] } else { -d[d_rho as usize] / w.powi(d_rho as i32) };
        Complex64::new(v, 0.0)
    }
    fn name(&self) -> &str {
        "chi"
    }
}

/// Coefficient given by a closure `(ρ, ω, d_rho, d_omega) ↦ value` supplying its own derivatives.
pub struct FnCoefficient<F> {
    name: String,
    f: F,
}

impl<F: Fn(f64, f64, u32, u32) -> Complex64 + Send + Sync> FnCoefficient<F> {
    /// Wraps `f` under `name`.
    pub fn new(name: &str, f: F) -> Self {
        FnCoefficient { name: name.to_string(), f }
    }
}

impl<F: Fn(f64, f64, u32, u32) -> Complex64 + Send + Sync> CoefficientFn for FnCoefficient<F> {
    fn value(&self, rho: f64, omega: f64, d_rho: u32, d_omega: u32) -> Complex64 {
        (self.f)(rho, omega, d_rho, d_omega)
    }
    fn name(&self) -> &str {
        &self.name
    }
}

/// Coefficient known only through point values; derivatives by nested central differences.
pub struct SampledCoefficient<F> {
    name: String,
    f: F,
    h: f64,
}

impl<F: Fn(f64, f64) -> Complex64 + Send + Sync> SampledCoefficient<F> {
    /// Wraps `f` with finite-difference step `h` for derivatives.
    pub fn new(name: &str, h: f64, f: F) -> Self {
        SampledCoefficient { name: name.to_string(), f, h }
    }

    fn diff(&self, rho: f64, omega: f64, dr: u32, dw: u32) -> Complex64 {
        if dr > 0 {
            let h = self.h;
            return (self.diff(rho + h, omega, dr - 1, dw) - self.diff(rho - h, omega, dr - 1, dw)) / (2.0 * h);
        }
        if dw > 0 {
            let h = self.h;
            return (self.diff(rho, omega + h, 0, dw - 1) - self.diff(rho, omega - h, 0, dw - 1)) / (2.0 * h);
        }
        (self.f)(rho, omega)
    }
}

impl<F: Fn(f64, f64) -> Complex64 + Send + Sync> CoefficientFn for SampledCoefficient<F> {
    fn value(&self, rho: f64, omega: f64, d_rho: u32, d_omega: u32) -> Complex64 {
        self.diff(rho, omega, d_rho, d_omega)
    }
    fn name(&self) -> &str {
        &self.name
    }
}

/// Handle of a node in a [`SymbolGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolExpr(usize);

impl SymbolExpr {
    /// Node index.
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Var(Var),
    Const(u64, u64),
    Add(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    PowI(usize, i32),
    Prim { f: usize, d_rho: u32, d_omega: u32, rho: usize, omega: usize },
}

/// Arena of symbol expressions with exact, memoized differentiation.
#[derive(Default)]
pub struct SymbolGraph {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
    prims: Vec<Arc<dyn CoefficientFn>>,
    diff_memo: HashMap<(usize, Var), usize>,
}

impl fmt::Debug for SymbolGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolGraph").field("nodes", &self.nodes.len()).field("prims", &self.prims.len()).finish()
    }
}

fn as_const(n: &Node) -> Option<Complex64> {
    match *n {
        Node::Const(a, b) => Some(Complex64::new(f64::from_bits(a), f64::from_bits(b))),
        _ => None,
    }
}

impl SymbolGraph {
    /// Empty graph.
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True if no node has been created.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn intern(&mut self, n: Node) -> SymbolExpr {
        if let Some(&i) = self.index.get(&n) {
            return SymbolExpr(i);
        }
        self.nodes.push(n);
        let i = self.nodes.len() - 1;
        self.index.insert(n, i);
        SymbolExpr(i)
    }

    fn constant_of(&self, e: SymbolExpr) -> Option<Complex64> {
        as_const(&self.nodes[e.0])
    }

    /// The variable `v`.
    pub fn var(&mut self, v: Var) -> SymbolExpr {
        self.intern(Node::Var(v))
    }

    /// A complex constant (−0 is normalized to +0).
    pub fn constant(&mut self, c: Complex64) -> SymbolExpr {
        let c = Complex64::new(c.re + 0.0, c.im + 0.0);
        self.intern(Node::Const(c.re.to_bits(), c.im.to_bits()))
    }

    /// A real constant.
    pub fn real(&mut self, x: f64) -> SymbolExpr {
        self.constant(Complex64::new(x, 0.0))
    }

    /// a + b.
    pub fn add(&mut self, a: SymbolExpr, b: SymbolExpr) -> SymbolExpr {
        match (self.constant_of(a), self.constant_of(b)) {
            (Some(x), Some(y)) => self.constant(x + y),
            (Some(x), _) if x == Complex64::new(0.0, 0.0) => b,
            (_, Some(y)) if y == Complex64::new(0.0, 0.0) => a,
            _ => {
                let (p, q) = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
                self.intern(Node::Add(p, q))
            }
        }
    }

    /// Sum of a list (0 if empty).
    pub fn sum(&mut self, terms: &[SymbolExpr]) -> SymbolExpr {
        let mut acc = self.real(0.0);
        for &t in terms {
            acc = self.add(acc, t);
        }
        acc
    }

    /// a · b.
    pub fn mul(&mut self, a: SymbolExpr, b: SymbolExpr) -> SymbolExpr {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match (self.constant_of(a), self.constant_of(b)) {
            (Some(x), Some(y)) => self.constant(x * y),
            (Some(x), _) | (_, Some(x)) if x == zero => self.constant(zero),
            (Some(x), _) if x == one => b,
            (_, Some(y)) if y == one => a,
            _ => {
                let (p, q) = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
                self.intern(Node::Mul(p, q))
            }
        }
    }

    /// c · a for a complex constant c.
    pub fn scale(&mut self, c: Complex64, a: SymbolExpr) -> SymbolExpr {
        let k = self.constant(c);
        self.mul(k, a)
    }

    /// −a.
    pub fn neg(&mut self, a: SymbolExpr) -> SymbolExpr {
        self.scale(Complex64::new(-1.0, 0.0), a)
    }

    /// a − b.
    pub fn sub(&mut self, a: SymbolExpr, b: SymbolExpr) -> SymbolExpr {
        let nb = self.neg(b);
        self.add(a, nb)
    }

    /// a / b.
    pub fn div(&mut self, a: SymbolExpr, b: SymbolExpr) -> SymbolExpr {
        match (self.constant_of(a), self.constant_of(b)) {
            (Some(x), Some(y)) => self.constant(x / y),
            (Some(x), _) if x == Complex64::new(0.0, 0.0) => a,
            (_, Some(y)) if y == Complex64::new(1.0, 0.0) => a,
            _ => self.intern(Node::Div(a.0, b.0)),
        }
    }

    /// aⁿ for an integer n.
    pub fn powi(&mut self, a: SymbolExpr, n: i32) -> SymbolExpr {
        if n == 0 {
            return self.real(1.0);
        }
        if n == 1 {
            return a;
        }
        if let Some(x) = self.constant_of(a) {
            return self.constant(x.powi(n));
        }
        self.intern(Node::PowI(a.0, n))
    }

    /// Registers a coefficient function and returns f(ρ, ω).
    pub fn coefficient(&mut self, f: Arc<dyn CoefficientFn>) -> SymbolExpr {
        self.prims.push(f);
        let id = self.prims.len() - 1;
        let rho = self.var(Var::Rho);
        let omega = self.var(Var::Omega);
        self.intern(Node::Prim { f: id, d_rho: 0, d_omega: 0, rho: rho.0, omega: omega.0 })
    }

    /// ∂e/∂v (exact, memoized).
    pub fn diff(&mut self, e: SymbolExpr, v: Var) -> SymbolExpr {
        if let Some(&d) = self.diff_memo.get(&(e.0, v)) {
            return SymbolExpr(d);
        }
        let node = self.nodes[e.0];
        let d = match node {
            Node::Var(w) => self.real(if w == v { 1.0 } else { 0.0 }),
            Node::Const(..) => self.real(0.0),
            Node::Add(a, b) => {
                let (da, db) = (self.diff(SymbolExpr(a), v), self.diff(SymbolExpr(b), v));
                self.add(da, db)
            }
            Node::Mul(a, b) => {
                let (da, db) = (self.diff(SymbolExpr(a), v), self.diff(SymbolExpr(b), v));
                let t1 = self.mul(da, SymbolExpr(b));
                let t2 = self.mul(SymbolExpr(a), db);
                self.add(t1, t2)
            }
            Node::Div(a, b) => {
                let (da, db) = (self.diff(SymbolExpr(a), v), self.diff(SymbolExpr(b), v));
                // (a′ − (a/b)b′)/b keeps powers of b from compounding under repeated differentiation
                let t = self.mul(e, db);
                let num = self.sub(da, t);
                self.div(num, SymbolExpr(b))
            }
            Node::PowI(a, n) => {
                let da = self.diff(SymbolExpr(a), v);
                let p = self.powi(SymbolExpr(a), n - 1);
                let t = self.mul(p, da);
                self.scale(Complex64::new(n as f64, 0.0), t)
            }
            Node::Prim { f, d_rho, d_omega, rho, omega } => {
                let dr = self.diff(SymbolExpr(rho), v);
                let dw = self.diff(SymbolExpr(omega), v);
                let pr = self.intern(Node::Prim { f, d_rho: d_rho + 1, d_omega, rho, omega });
                let pw = self.intern(Node::Prim { f, d_rho, d_omega: d_omega + 1, rho, omega });
                let t1 = self.mul(pr, dr);
                let t2 = self.mul(pw, dw);
                self.add(t1, t2)
            }
        };
        self.diff_memo.insert((e.0, v), d.0);
        d
    }

    /// n-th partial derivative in `v`.
    pub fn diff_n(&mut self, e: SymbolExpr, v: Var, n: u32) -> SymbolExpr {
        (0..n).fold(e, |acc, _| self.diff(acc, v))
    }

    /// e with the variable `v` replaced by `value`.
    pub fn substitute(&mut self, e: SymbolExpr, v: Var, value: SymbolExpr) -> SymbolExpr {
        let mut memo = HashMap::new();
        self.subst_rec(e.0, v, value, &mut memo)
    }

    fn subst_rec(&mut self, i: usize, v: Var, value: SymbolExpr, memo: &mut HashMap<usize, SymbolExpr>) -> SymbolExpr {
        if let Some(&r) = memo.get(&i) {
            return r;
        }
        let r = match self.nodes[i] {
            Node::Var(w) if w == v => value,
            Node::Var(_) | Node::Const(..) => SymbolExpr(i),
            Node::Add(a, b) => {
                let (x, y) = (self.subst_rec(a, v, value, memo), self.subst_rec(b, v, value, memo));
                self.add(x, y)
            }
            Node::Mul(a, b) => {
                let (x, y) = (self.subst_rec(a, v, value, memo), self.subst_rec(b, v, value, memo));
                self.mul(x, y)
            }
            Node::Div(a, b) => {
                let (x, y) = (self.subst_rec(a, v, value, memo), self.subst_rec(b, v, value, memo));
                self.div(x, y)
            }
            Node::PowI(a, n) => {
                let x = self.subst_rec(a, v, value, memo);
                self.powi(x, n)
            }
            Node::Prim { f, d_rho, d_omega, rho, omega } => {
                let (r, w) = (self.subst_rec(rho, v, value, memo), self.subst_rec(omega, v, value, memo));
                self.intern(Node::Prim { f, d_rho, d_omega, rho: r.0, omega: w.0 })
            }
        };
        memo.insert(i, r);
        r
    }

    /// Compiles the given roots into a self-contained evaluator.
    pub fn compile(&self, roots: &[SymbolExpr]) -> CompiledSymbol {
        let mut reach = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = roots.iter().map(|r| r.0).collect();
        while let Some(i) = stack.pop() {
            if reach[i] {
                continue;
            }
            reach[i] = true;
            match self.nodes[i] {
                Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Node::PowI(a, _) => stack.push(a),
                Node::Prim { rho, omega, .. } => {
                    stack.push(rho);
                    stack.push(omega);
                }
                _ => {}
            }
        }
        // children always precede parents in the arena, so index order is topological
        let mut slot = vec![usize::MAX; self.nodes.len()];
        let mut ops = Vec::new();
        for i in 0..self.nodes.len() {
            if !reach[i] {
                continue;
            }
            slot[i] = ops.len();
            ops.push(match self.nodes[i] {
                Node::Var(v) => Op::Var(v),
                Node::Const(..) => Op::Const(as_const(&self.nodes[i]).unwrap()),
                Node::Add(a, b) => Op::Add(slot[a], slot[b]),
                Node::Mul(a, b) => Op::Mul(slot[a], slot[b]),
                Node::Div(a, b) => Op::Div(slot[a], slot[b]),
                Node::PowI(a, n) => Op::PowI(slot[a], n),
                Node::Prim { f, d_rho, d_omega, rho, omega } => Op::Prim { f, d_rho, d_omega, rho: slot[rho], omega: slot[omega] },
            });
        }
        CompiledSymbol { ops, roots: roots.iter().map(|r| slot[r.0]).collect(), prims: self.prims.clone() }
    }

    /// Evaluates a single expression (compiles on the fly).
    pub fn eval(&self, e: SymbolExpr, p: SymbolPoint) -> Complex64 {
        self.compile(&[e]).eval(p)[0]
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Var(Var),
    Const(Complex64),
    Add(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    PowI(usize, i32),
    Prim { f: usize, d_rho: u32, d_omega: u32, rho: usize, omega: usize },
}

/// Flat, immutable evaluator for a set of symbol roots; shareable across threads.
#[derive(Clone)]
pub struct CompiledSymbol {
    ops: Vec<Op>,
    roots: Vec<usize>,
    prims: Vec<Arc<dyn CoefficientFn>>,
}

impl fmt::Debug for CompiledSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompiledSymbol").field("ops", &self.ops.len()).field("roots", &self.roots.len()).finish()
    }
}

impl CompiledSymbol {
    /// Number of instructions.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    /// True if there are no instructions.
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Values of all roots at `p`.
    pub fn eval(&self, p: SymbolPoint) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let x = match *op {
                Op::Var(Var::Rho) => Complex64::new(p.rho, 0.0),
                Op::Var(Var::Omega) => Complex64::new(p.omega, 0.0),
                Op::Var(Var::Xi) => p.xi,
                Op::Var(Var::Eta) => Complex64::new(p.eta, 0.0),
                Op::Const(c) => c,
                Op::Add(a, b) => v[a] + v[b],
                Op::Mul(a, b) => v[a] * v[b],
                Op::Div(a, b) => v[a] / v[b],
                Op::PowI(a, n) => {
                    let z: Complex64 = v[a];
                    z.powi(n)
                }
                Op::Prim { f, d_rho, d_omega, rho, omega } => {
                    let (r, w): (Complex64, Complex64) = (v[rho], v[omega]);
                    self.prims[f].value(r.re, w.re, d_rho, d_omega)
                }
            };
            v.push(x);
        }
        self.roots.iter().map(|&r| v[r]).collect()
    }

    /// Value of the first root at `p`.
    pub fn eval_first(&self, p: SymbolPoint) -> Complex64 {
        self.eval(p)[0]
    }
}
