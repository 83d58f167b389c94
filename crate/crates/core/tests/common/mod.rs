//! Independent numerical oracles for the integration suites.
//!
//! Everything here recomputes marginal likelihoods and trained Bayes
//! factors by direct quadrature of likelihood-times-prior, never through
//! the closed forms under test. Integrals run in log space with a
//! coarse-scan rescale so n up to a few hundred stays finite.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson with a forced minimum subdivision depth so narrow
/// peaks inside wide windows cannot be missed.
pub fn adaptive_simpson_depth<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    eps: f64,
    min_depth: i32,
) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        eps: f64,
        depth: i32,
        min_depth: i32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        if depth >= min_depth && (left + right - whole).abs() <= 15.0 * eps {
            return left + right + (left + right - whole) / 15.0;
        }
        if depth > 48 {
            return left + right;
        }
        recurse(f, a, m, left, eps / 2.0, depth + 1, min_depth)
            + recurse(f, m, b, right, eps / 2.0, depth + 1, min_depth)
    }
    let whole = simpson(f, a, 0.5 * (a + b), b);
    recurse(f, a, b, whole, eps, 0, min_depth)
}

pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    adaptive_simpson_depth(f, a, b, eps, 8)
}

/// log of the integral of exp(ln_f) over [lo, hi], rescaled by the
/// coarse-grid maximum of ln_f.
pub fn log_integrate_depth<F: Fn(f64) -> f64>(
    ln_f: F,
    lo: f64,
    hi: f64,
    eps: f64,
    min_depth: i32,
) -> f64 {
    // Coarse scan for the rescale constant only; the integrand windows
    // are built around their peaks, so landing within a few log units
    // of the maximum is enough.
    let mut c = f64::NEG_INFINITY;
    let scan = 64;
    for i in 0..=scan {
        let x = lo + (hi - lo) * i as f64 / scan as f64;
        c = c.max(ln_f(x));
    }
    if c == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let v = adaptive_simpson_depth(&|x| (ln_f(x) - c).exp(), lo, hi, eps, min_depth);
    c + v.ln()
}

pub fn log_integrate<F: Fn(f64) -> f64>(ln_f: F, lo: f64, hi: f64, eps: f64) -> f64 {
    log_integrate_depth(ln_f, lo, hi, eps, 8)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// log of the integral of exp(ln_f) over [lo, hi] by fixed-order
/// Gauss-Legendre, rescaled by the node maximum of ln_f.
pub fn log_integrate_gl<F: Fn(f64) -> f64>(
    ln_f: &F,
    lo: f64,
    hi: f64,
    nodes: &[f64],
    weights: &[f64],
) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let vals: Vec<f64> = nodes.iter().map(|&t| ln_f(mid + half * t)).collect();
    let c = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if c == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = vals
        .iter()
        .zip(weights)
        .map(|(&v, &w)| w * (v - c).exp())
        .sum();
    c + (half * s).ln()
}

// ---------------------------------------------------------------------
// Exponential test oracles (prior 1/lambda under the alternative)
// ---------------------------------------------------------------------

/// log m1(y) = log int lambda^(n-1) exp(-lambda S) dlambda by quadrature
/// over u = ln(lambda).
pub fn exp_oracle_ln_m1(n: usize, s: f64) -> f64 {
    let peak = (n as f64 / s).ln();
    log_integrate(
        |u: f64| {
            let lambda = u.exp();
            n as f64 * lambda.ln() - lambda * s // includes the e^u Jacobian via n-1+1
        },
        peak - 45.0,
        peak + 30.0,
        1e-12,
    )
}

/// Trained B01(y(-l)|y(l)) for the exponential test by the
/// posterior-predictive ratio with quadrature marginals.
pub fn exp_oracle_trained_b01(values: &[f64], leave: usize, lambda0: f64) -> f64 {
    let n = values.len();
    let s: f64 = values.iter().sum();
    let y = values[leave];
    let ln_m0_full = n as f64 * lambda0.ln() - lambda0 * s;
    let ln_m0_mts = lambda0.ln() - lambda0 * y;
    let ln_m1_full = exp_oracle_ln_m1(n, s);
    let ln_m1_mts = exp_oracle_ln_m1(1, y);
    (ln_m0_full - ln_m0_mts) - (ln_m1_full - ln_m1_mts)
}

// ---------------------------------------------------------------------
// Poisson vs Geometric oracles (Jeffreys priors)
// ---------------------------------------------------------------------

/// log m0(y) for the Poisson side: (1/prod y_i!) int e^{-n l} l^{s-1/2} dl.
pub fn pg_oracle_ln_m0(counts: &[u64]) -> f64 {
    let n = counts.len() as f64;
    let s: f64 = counts.iter().map(|&c| c as f64).sum();
    let ln_fact: f64 = counts.iter().map(|&c| ln_factorial(c)).sum();
    let peak = ((s + 0.5) / n).max(1e-3).ln();
    let integral = log_integrate(
        |u: f64| {
            let l = u.exp();
            (s + 0.5) * l.ln() - n * l // Jacobian folds the -1/2 into +1/2
        },
        peak - 45.0,
        peak + 30.0,
        1e-12,
    );
    integral - ln_fact
}

/// log of int_0^1 theta^(a-1) (1-theta)^(b-1) dtheta via theta = sin^2 t,
/// which removes the endpoint singularities for a, b >= 1/2.
pub fn beta_kernel_ln(a: f64, b: f64) -> f64 {
    log_integrate(
        |t: f64| {
            let (sin, cos) = (t.sin(), t.cos());
            2f64.ln()
                + (2.0 * a - 1.0) * sin.abs().max(1e-300).ln()
                + (2.0 * b - 1.0) * cos.abs().max(1e-300).ln()
        },
        0.0,
        PI / 2.0,
        1e-12,
    )
}

/// log m1(y) for the Geometric side:
/// int theta^(n-1) (1-theta)^(s-1/2) dtheta.
pub fn pg_oracle_ln_m1(counts: &[u64]) -> f64 {
    let n = counts.len() as f64;
    let s: f64 = counts.iter().map(|&c| c as f64).sum();
    beta_kernel_ln(n, s + 0.5)
}

fn ln_factorial(c: u64) -> f64 {
    (1..=c).map(|k| (k as f64).ln()).sum()
}

pub fn pg_oracle_trained_b01(counts: &[u64], leave: usize) -> f64 {
    let mts = [counts[leave]];
    (pg_oracle_ln_m0(counts) - pg_oracle_ln_m0(&mts))
        - (pg_oracle_ln_m1(counts) - pg_oracle_ln_m1(&mts))
}

// ---------------------------------------------------------------------
// Normal scale test oracles (H0: h = h0, mean unknown; priors 1 and 1/h)
// ---------------------------------------------------------------------

fn normal_ln_lik(values: &[f64], mu: f64, h: f64) -> f64 {
    let n = values.len() as f64;
    let ss: f64 = values.iter().map(|y| (y - mu) * (y - mu)).sum();
    0.5 * n * (h / (2.0 * PI)).ln() - 0.5 * h * ss
}

/// log m0(y) = log int prod N(y_i | mu, 1/h0) dmu by quadrature.
pub fn scale_oracle_ln_m0(values: &[f64], h0: f64) -> f64 {
    let n = values.len() as f64;
    let ybar = values.iter().sum::<f64>() / n;
    let sd = 1.0 / (n * h0).sqrt();
    log_integrate(
        |mu| normal_ln_lik(values, mu, h0),
        ybar - 14.0 * sd,
        ybar + 14.0 * sd,
        1e-12,
    )
}

/// log m1(y) = log int int prod N(y_i | mu, 1/h) (1/h) dmu dh by nested
/// quadrature over (mu, u = ln h). The left tail of the u integrand
/// decays like exp(((n-1)/2) u), so the window widens as n shrinks.
pub fn scale_oracle_ln_m1(values: &[f64], gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let n = values.len() as f64;
    let ybar = values.iter().sum::<f64>() / n;
    let s2: f64 = values.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let h_peak = if s2 > 0.0 { n / s2 } else { 1.0 };
    let u_peak = h_peak.ln();
    let left = 8.0 + 60.0 / (n - 1.0).max(1.0);
    log_integrate_depth(
        |u: f64| {
            let h = u.exp();
            // Inner Gaussian integral over mu by fixed-order GL.
            let sd = 1.0 / (n * h).sqrt();
            let inner = log_integrate_gl(
                &|mu| normal_ln_lik(values, mu, h),
                ybar - 10.0 * sd,
                ybar + 10.0 * sd,
                &gl.0,
                &gl.1,
            );
            // prior 1/h and Jacobian dh = h du cancel.
            inner
        },
        u_peak - left,
        u_peak + 8.0,
        1e-11,
        7,
    )
}

pub fn scale_oracle_trained_b01(
    values: &[f64],
    pair: (usize, usize),
    h0: f64,
    gl: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let mts = [values[pair.0], values[pair.1]];
    (scale_oracle_ln_m0(values, h0) - scale_oracle_ln_m0(&mts, h0))
        - (scale_oracle_ln_m1(values, gl) - scale_oracle_ln_m1(&mts, gl))
}

// ---------------------------------------------------------------------
// Nested linear model oracles under the prior sigma^-(1+q)
// ---------------------------------------------------------------------

/// Dense column-major matrix just big enough for the oracle algebra,
/// deliberately separate from the implementation's linear algebra.
pub struct SmallMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>, // row-major
}

impl SmallMat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len());
        SmallMat { rows, cols, data }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn select_rows(&self, rows: &[usize]) -> SmallMat {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            for c in 0..self.cols {
                data.push(self.at(r, c));
            }
        }
        SmallMat::new(rows.len(), self.cols, data)
    }
}

/// Solves the normal equations A'A x = A'y by Gaussian elimination with
/// partial pivoting; also returns diag((A'A)^-1) for box sizing.
fn normal_equations(a: &SmallMat, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p = a.cols;
    let mut ata = vec![0.0; p * p];
    let mut aty = vec![0.0; p];
    for i in 0..a.rows {
        for j in 0..p {
            aty[j] += a.at(i, j) * y[i];
            for k in 0..p {
                ata[j * p + k] += a.at(i, j) * a.at(i, k);
            }
        }
    }
    let solve = |m: &[f64], rhs: &[f64]| -> Vec<f64> {
        let mut aug = vec![0.0; p * (p + 1)];
        for r in 0..p {
            for c in 0..p {
                aug[r * (p + 1) + c] = m[r * p + c];
            }
            aug[r * (p + 1) + p] = rhs[r];
        }
        for col in 0..p {
            let mut piv = col;
            for r in col + 1..p {
                if aug[r * (p + 1) + col].abs() > aug[piv * (p + 1) + col].abs() {
                    piv = r;
                }
            }
            for c in 0..=p {
                aug.swap(col * (p + 1) + c, piv * (p + 1) + c);
            }
            let d = aug[col * (p + 1) + col];
            for r in 0..p {
                if r != col && aug[r * (p + 1) + col] != 0.0 {
                    let factor = aug[r * (p + 1) + col] / d;
                    for c in col..=p {
                        aug[r * (p + 1) + c] -= factor * aug[col * (p + 1) + c];
                    }
                }
            }
        }
        (0..p)
            .map(|r| aug[r * (p + 1) + p] / aug[r * (p + 1) + r])
            .collect()
    };
    let theta_hat = solve(&ata, &aty);
    let mut inv_diag = vec![0.0; p];
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        inv_diag[j] = solve(&ata, &e)[j];
    }
    (theta_hat, inv_diag)
}

fn linear_ln_lik(a: &SmallMat, y: &[f64], theta: &[f64], sigma: f64) -> f64 {
    let n = a.rows as f64;
    let mut rss = 0.0;
    for i in 0..a.rows {
        let mut fit = 0.0;
        for j in 0..a.cols {
            fit += a.at(i, j) * theta[j];
        }
        rss += (y[i] - fit) * (y[i] - fit);
    }
    -0.5 * n * (2.0 * PI * sigma * sigma).ln() - rss / (2.0 * sigma * sigma)
}

/// log m(y) = log int int prod N(y | A theta, sigma^2 I) sigma^-(1+q)
/// dtheta dsigma by tensor Gauss-Legendre over theta (box centered at the
/// least-squares point) inside an adaptive scan over u = ln sigma.
///
/// Needs n + q - p >= 2 so the truncated right tail of the sigma window
/// stays below the quadrature tolerance.
pub fn linear_oracle_ln_marginal(a: &SmallMat, y: &[f64], q: u32) -> f64 {
    let p = a.cols;
    let n = a.rows;
    assert!(n as i64 + q as i64 - p as i64 >= 2, "oracle needs n+q-p >= 2");
    let (theta_hat, inv_diag) = normal_equations(a, y);
    let mut rss = 0.0;
    for i in 0..n {
        let mut fit = 0.0;
        for j in 0..p {
            fit += a.at(i, j) * theta_hat[j];
        }
        rss += (y[i] - fit) * (y[i] - fit);
    }
    let dof = (n as f64 + q as f64 - p as f64).max(1.0);
    let sigma_peak = (rss / dof).sqrt().max(1e-6);
    let gl = gauss_legendre(40);

    let theta_integral = |sigma: f64| -> f64 {
        // Recursive tensor quadrature over the p coordinates.
        fn rec(
            a: &SmallMat,
            y: &[f64],
            theta: &mut Vec<f64>,
            dim: usize,
            centers: &[f64],
            widths: &[f64],
            sigma: f64,
            gl: &(Vec<f64>, Vec<f64>),
        ) -> f64 {
            // Returns log of the integral over the remaining dims.
            let lo = centers[dim] - widths[dim];
            let hi = centers[dim] + widths[dim];
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            let mut vals = Vec::with_capacity(gl.0.len());
            for &t in &gl.0 {
                theta.push(mid + half * t);
                let v = if dim + 1 == centers.len() {
                    linear_ln_lik(a, y, theta, sigma)
                } else {
                    rec(a, y, theta, dim + 1, centers, widths, sigma, gl)
                };
                theta.pop();
                vals.push(v);
            }
            let c = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if c == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            let s: f64 = vals
                .iter()
                .zip(&gl.1)
                .map(|(&v, &w)| w * (v - c).exp())
                .sum();
            c + (half * s).ln()
        }
        let widths: Vec<f64> = inv_diag
            .iter()
            .map(|&d| 9.0 * sigma * d.max(0.0).sqrt().max(1e-9))
            .collect();
        let mut scratch = Vec::with_capacity(p);
        rec(a, y, &mut scratch, 0, &theta_hat, &widths, sigma, &gl)
    };

    let u_peak = sigma_peak.ln();
    log_integrate_depth(
        |u: f64| {
            let sigma = u.exp();
            // prior sigma^-(1+q), Jacobian dsigma = sigma du.
            theta_integral(sigma) - (q as f64) * sigma.ln()
        },
        u_peak - 5.0,
        u_peak + 14.0,
        1e-10,
        5,
    )
}

/// Trained-Bayes-factor oracle for one nested pair, with the full-data
/// marginals cached across subset calls.
pub struct LinearOracle {
    pub a0: SmallMat,
    pub a1: SmallMat,
    pub q0: u32,
    pub q1: u32,
    ln_m0_full: f64,
    ln_m1_full: f64,
}

impl LinearOracle {
    pub fn new(a0: SmallMat, a1: SmallMat, y: &[f64], q0: u32, q1: u32) -> Self {
        let ln_m0_full = linear_oracle_ln_marginal(&a0, y, q0);
        let ln_m1_full = linear_oracle_ln_marginal(&a1, y, q1);
        LinearOracle {
            a0,
            a1,
            q0,
            q1,
            ln_m0_full,
            ln_m1_full,
        }
    }

    pub fn trained_b01(&self, y: &[f64], rows: &[usize]) -> f64 {
        let ys: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
        let a0s = self.a0.select_rows(rows);
        let a1s = self.a1.select_rows(rows);
        (self.ln_m0_full - linear_oracle_ln_marginal(&a0s, &ys, self.q0))
            - (self.ln_m1_full - linear_oracle_ln_marginal(&a1s, &ys, self.q1))
    }
}
