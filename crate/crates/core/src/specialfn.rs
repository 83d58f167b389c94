//! Special functions backing the closed forms: log-gamma, regularized
//! incomplete gamma (chi-square CDF), regularized incomplete beta
//! (F distribution CDF) and its inverse via bisection.

use crate::error::{EvidenceError, Result};

/// Convergence control for the iterative routines.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub max_iter: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-12,
            max_iter: 200,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, max_iter: u32) -> Result<Self> {
        if !(rel > 0.0 && rel <= 1e-6) {
            return Err(EvidenceError::DomainViolation(format!(
                "tolerance must lie in (0, 1e-6], got {rel}"
            )));
        }
        Ok(Tolerance { rel, max_iter })
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFICIENTS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(EvidenceError::DomainViolation(format!(
            "ln_gamma requires x > 0, got {x}"
        )));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps full precision near zero.
        let sin_pi_x = (std::f64::consts::PI * x).sin();
        std::f64::consts::PI.ln() - sin_pi_x.ln() - ln_gamma_unchecked(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut ag = LANCZOS_COEFFICIENTS[0];
        for (i, c) in LANCZOS_COEFFICIENTS.iter().enumerate().skip(1) {
            ag += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        LN_SQRT_2PI + (z + 0.5) * t.ln() - t + ag.ln()
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn reg_lower_gamma(a: f64, x: f64, tol: Tolerance) -> Result<f64> {
    if a <= 0.0 || x < 0.0 {
        return Err(EvidenceError::DomainViolation(format!(
            "reg_lower_gamma requires a > 0 and x >= 0, got a={a}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        gamma_series(a, x, tol)
    } else {
        Ok(1.0 - gamma_continued_fraction(a, x, tol)?)
    }
}

fn gamma_series(a: f64, x: f64, tol: Tolerance) -> Result<f64> {
    let ln_pre = a * x.ln() - x - ln_gamma_unchecked(a);
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..tol.max_iter {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * tol.rel {
            return Ok((ln_pre + sum.ln()).exp().min(1.0));
        }
    }
    Err(EvidenceError::DomainViolation(format!(
        "incomplete gamma series failed to converge for a={a}, x={x}"
    )))
}

fn gamma_continued_fraction(a: f64, x: f64, tol: Tolerance) -> Result<f64> {
    // Modified Lentz on the upper-tail continued fraction.
    const TINY: f64 = 1e-300;
    let ln_pre = a * x.ln() - x - ln_gamma_unchecked(a);
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=tol.max_iter {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < tol.rel {
            return Ok((ln_pre + h.ln()).exp().min(1.0));
        }
    }
    Err(EvidenceError::DomainViolation(format!(
        "incomplete gamma continued fraction failed to converge for a={a}, x={x}"
    )))
}

/// Chi-square CDF with `dof` degrees of freedom.
pub fn chi2_cdf(x: f64, dof: u32) -> Result<f64> {
    if x < 0.0 {
        return Err(EvidenceError::DomainViolation(format!(
            "chi2_cdf requires x >= 0, got {x}"
        )));
    }
    if dof == 0 {
        return Err(EvidenceError::DomainViolation(
            "chi2_cdf requires dof >= 1".into(),
        ));
    }
    reg_lower_gamma(dof as f64 / 2.0, x / 2.0, Tolerance::default())
}

/// Regularized incomplete beta I_x(a, b) by the standard continued
/// fraction with the symmetry switch at x = (a+1)/(a+b+2).
pub fn reg_inc_beta(a: f64, b: f64, x: f64, tol: Tolerance) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 {
        return Err(EvidenceError::DomainViolation(format!(
            "reg_inc_beta requires a, b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(EvidenceError::DomainViolation(format!(
            "reg_inc_beta requires x in [0,1], got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma_unchecked(a + b) - ln_gamma_unchecked(a) - ln_gamma_unchecked(b)
        + a * x.ln()
        + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok((ln_front.exp() * beta_cf(a, b, x, tol)? / a).clamp(0.0, 1.0))
    } else {
        Ok((1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x, tol)? / b).clamp(0.0, 1.0))
    }
}

fn beta_cf(a: f64, b: f64, x: f64, tol: Tolerance) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=tol.max_iter {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < tol.rel {
            return Ok(h);
        }
    }
    Err(EvidenceError::DomainViolation(format!(
        "incomplete beta continued fraction failed to converge for a={a}, b={b}, x={x}"
    )))
}

/// CDF of the F distribution with (d1, d2) degrees of freedom.
pub fn f_cdf(x: f64, d1: u32, d2: u32) -> Result<f64> {
    if x < 0.0 {
        return Err(EvidenceError::DomainViolation(format!(
            "f_cdf requires x >= 0, got {x}"
        )));
    }
    if d1 == 0 || d2 == 0 {
        return Err(EvidenceError::DomainViolation(
            "f_cdf requires positive degrees of freedom".into(),
        ));
    }
    let (d1f, d2f) = (d1 as f64, d2 as f64);
    let t = d1f * x / (d1f * x + d2f);
    reg_inc_beta(d1f / 2.0, d2f / 2.0, t, Tolerance::default())
}

/// Quantile of the F distribution: the x with f_cdf(x) = p.
///
/// Bisection on an expanding bracket; fails after `max_iter` doublings
/// if the bracket cannot be established.
pub fn f_quantile(p: f64, d1: u32, d2: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(EvidenceError::DomainViolation(format!(
            "f_quantile requires p in (0,1), got {p}"
        )));
    }
    let tol = Tolerance::default();
    let mut hi = 1.0;
    let mut expansions = 0;
    while f_cdf(hi, d1, d2)? < p {
        hi *= 2.0;
        expansions += 1;
        if expansions > tol.max_iter {
            return Err(EvidenceError::DomainViolation(format!(
                "f_quantile bracket expansion failed for p={p}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_cdf(mid, d1, d2)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
