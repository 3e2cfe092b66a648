//! Small numerical kernels shared by the solver: Chebyshev–Gauss–Lobatto
//! collocation, Gauss–Legendre quadrature, barycentric interpolation, the
//! `exp(−1/t)` smooth step, finite-difference derivatives and a complex
//! log-Gamma.
//!
//! Everything here is deterministic and allocation-light; matrices are
//! returned as `nalgebra::DMatrix<f64>` so they can be lifted to complex
//! operators by the callers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Newton tolerance for Legendre roots.
pub const GAUSS_NEWTON_TOL: f64 = 1e-15;

/// Relative step used by [`central_derivative`] (scaled by the caller's length scale).
pub const FD_REL_STEP: f64 = 2e-3;

/// Chebyshev–Gauss–Lobatto nodes `x_j = cos(πj/n)`, `j = 0..=n` (descending from 1 to −1).
pub fn cheb_nodes(n: usize) -> Vec<f64> {
    assert!(n >= 1, "need at least two Lobatto nodes");
    (0..=n)
        .map(|j| {
            // sin form is symmetric and exact at the midpoint
            (PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin()
        })
        .collect()
}

/// Chebyshev differentiation matrix on [`cheb_nodes`] (negative-sum trick on the diagonal).
pub fn cheb_diff(n: usize) -> DMatrix<f64> {
    let x = cheb_nodes(n);
    let c: Vec<f64> = (0..=n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                2.0 * s
            } else {
                s
            }
        })
        .collect();
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = c[i] / c[j] / (x[i] - x[j]);
            }
        }
    }
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    d
}

/// Clenshaw–Curtis weights on the Lobatto nodes of [`cheb_nodes`] for ∫₋₁¹.
pub fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / n as f64).collect();
    let nf = n as f64;
    for (j, wj) in w.iter_mut().enumerate() {
        let mut v = 1.0;
        let kmax = n / 2;
        for k in 1..=kmax {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            v -= b * (2.0 * k as f64 * theta[j]).cos() / (4.0 * (k * k) as f64 - 1.0);
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        *wj = c * v / nf;
    }
    w
}

/// Gauss–Legendre nodes (ascending) and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < GAUSS_NEWTON_TOL {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint value of the derivative
        let s = if x > 0.0 { 1.0 } else { (-1f64).powi(n as i32 + 1) };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

/// Chebyshev polynomial `T_n(x)` for |x| ≤ 1 (recurrence; stable on the interval).
pub fn chebyshev_t(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut a, mut b) = (1.0, x);
            for _ in 2..=n {
                let c = 2.0 * x * b - a;
                a = b;
                b = c;
            }
            b
        }
    }
}

/// Barycentric weights of an arbitrary node set (normalized to max |w| = 1).
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= nodes[j] - nodes[k];
            }
        }
    }
    let m = w.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    w.iter_mut().for_each(|v| *v /= m);
    w
}

/// Row of the interpolation matrix: values at `x` = Σ row_j · f(nodes_j).
pub fn interpolation_row(nodes: &[f64], weights: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut row = vec![0.0; n];
    for j in 0..n {
        if (x - nodes[j]).abs() < 1e-15 * (1.0 + x.abs()) {
            row[j] = 1.0;
            return row;
        }
    }
    let mut denom = 0.0;
    for j in 0..n {
        let t = weights[j] / (x - nodes[j]);
        row[j] = t;
        denom += t;
    }
    row.iter_mut().for_each(|v| *v /= denom);
    row
}

/// Barycentric interpolation of complex samples.
pub fn barycentric_eval(nodes: &[f64], weights: &[f64], values: &[Complex64], x: f64) -> Complex64 {
    interpolation_row(nodes, weights, x)
        .iter()
        .zip(values)
        .map(|(r, v)| v * *r)
        .sum()
}

/// Differentiation matrix of the polynomial interpolant on arbitrary distinct nodes.
pub fn lagrange_diff_matrix(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let w = barycentric_weights(nodes);
    let mut d = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if i != j {
                d[(i, j)] = w[j] / w[i] / (nodes[i] - nodes[j]);
                s += d[(i, j)];
            }
        }
        d[(i, i)] = -s;
    }
    d
}

/// `exp(−1/t)` for t > 0 and 0 otherwise (the flat building block of the smooth step).
#[inline]
pub fn exp_inv(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1, `e(t)/(e(t)+e(1−t))` in between with `e = exp(−1/·)`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = exp_inv(t);
        let b = exp_inv(1.0 - t);
        a / (a + b)
    }
}

/// Derivatives d⁰..dⁿ of [`smooth_step`] at t, via truncated Taylor-series arithmetic on
/// e(t)/(e(t)+e(1−t)); exact up to roundoff for every order.
pub fn smooth_step_derivatives(t: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if t <= 0.0 {
        return out;
    }
    if t >= 1.0 {
        out[0] = 1.0;
        return out;
    }
    let mut s = vec![0.0; n + 1];
    s[0] = t;
    if n >= 1 {
        s[1] = 1.0;
    }
    let mut s2 = vec![0.0; n + 1];
    s2[0] = 1.0 - t;
    if n >= 1 {
        s2[1] = -1.0;
    }
    let ea = series_exp(&series_recip(&s).iter().map(|x| -x).collect::<Vec<_>>());
    let eb = series_exp(&series_recip(&s2).iter().map(|x| -x).collect::<Vec<_>>());
    let den: Vec<f64> = ea.iter().zip(&eb).map(|(a, b)| a + b).collect();
    let q = series_mul(&ea, &series_recip(&den));
    let mut fact = 1.0;
    for (k, c) in q.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        out[k] = c * fact;
    }
    out
}

fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len()).map(|n| (0..=n).map(|k| a[k] * b[n - k]).sum()).collect()
}

fn series_recip(a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; a.len()];
    b[0] = 1.0 / a[0];
    for n in 1..a.len() {
        b[n] = -b[0] * (1..=n).map(|k| a[k] * b[n - k]).sum::<f64>();
    }
    b
}

fn series_exp(a: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; a.len()];
    e[0] = a[0].exp();
    for n in 1..a.len() {
        e[n] = (1..=n).map(|k| k as f64 * a[k] * e[n - k]).sum::<f64>() / n as f64;
    }
    e
}

/// Eighth-order central finite difference of a complex-valued function of one real variable.
pub fn central_derivative<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
    let c = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let mut s = Complex64::new(0.0, 0.0);
    for (k, ck) in c.iter().enumerate() {
        let kk = (k + 1) as f64;
        s += (f(x + kk * h) - f(x - kk * h)) * *ck;
    }
    s / h
}

/// Eighth-order central second derivative.
pub fn central_second_derivative<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
    let c0 = -205.0 / 72.0;
    let c = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    let mut s = f(x) * c0;
    for (k, ck) in c.iter().enumerate() {
        let kk = (k + 1) as f64;
        s += (f(x + kk * h) + f(x - kk * h)) * *ck;
    }
    s / (h * h)
}

/// Composite Gauss–Legendre quadrature of a real function on [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(lo + 0.5 * h * (xi + 1.0));
        }
    }
    s * 0.5 * h
}

/// Lanczos coefficients (g = 7, n = 9) for the complex log-Gamma.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-branch-free complex log-Gamma: returns a value whose exponential is Γ(z).
///
/// Uses a recurrence shift to Re z ≥ 8 followed by the Lanczos sum, and the
/// reflection formula for Re z < 1/2. The imaginary part is only defined
/// modulo 2π, which is all that exponentiated ratios need.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    // shift up for accuracy: ln Γ(z) = ln Γ(z+m) − Σ ln(z+j)
    let mut shift = Complex64::new(0.0, 0.0);
    let mut zz = z;
    while zz.re < 8.0 {
        shift += zz.ln();
        zz += 1.0;
    }
    let x = zz - 1.0;
    let mut a = Complex64::new(LANCZOS_COEF[0], 0.0);
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += *c / (x + i as f64);
    }
    let lg = 0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln();
    lg - shift
}

/// Falling factorial `(z)_(k) = Γ(z+1)/Γ(z−k+1)` through [`ln_gamma`].
pub fn falling_factorial(z: Complex64, k: u32) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    (ln_gamma(z + 1.0) - ln_gamma(z - k as f64 + 1.0)).exp()
}
