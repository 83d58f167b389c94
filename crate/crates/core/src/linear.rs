//! Nested normal-linear models under the generalized prior
//! sigma^-(1+q): residual-based marginals, the F-statistic identity,
//! empirical bounds over row subsets, and the one-way ANOVA
//! specializations for the Full Jeffreys, Modified Jeffreys and
//! Reference priors.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{EvidenceError, Result};
use crate::logvalue::LogValue;
use crate::mts;
use crate::mts::TrainingIndex;
use crate::par;
use crate::report::{Attainer, BoundReport, BoundVariant};
use crate::sample::Sample;
use crate::specialfn::{f_quantile, ln_gamma};

use std::f64::consts::PI;

/// Relative threshold below which an R diagonal entry counts as zero.
const RANK_EPS: f64 = 1e-10;

/// A pair of nested designs with their prior exponents.
#[derive(Clone, Debug)]
pub struct DesignPair {
    pub a0: DMatrix<f64>,
    pub a1: DMatrix<f64>,
    pub q0: u32,
    pub q1: u32,
    /// Whether col-space(A0) is contained in col-space(A1).
    pub nesting: bool,
}

impl DesignPair {
    /// Validates full column ranks and p0 < p1 <= n - 1, and records
    /// whether the designs are nested.
    pub fn new(a0: DMatrix<f64>, a1: DMatrix<f64>, q0: u32, q1: u32) -> Result<Self> {
        let n = a0.nrows();
        if a1.nrows() != n {
            return Err(EvidenceError::DomainViolation(
                "design matrices must have the same number of rows".into(),
            ));
        }
        let (p0, p1) = (a0.ncols(), a1.ncols());
        if !(p0 < p1 && p1 <= n.saturating_sub(1)) {
            return Err(EvidenceError::DomainViolation(format!(
                "need p0 < p1 <= n - 1, got p0={p0}, p1={p1}, n={n}"
            )));
        }
        if matrix_rank(&a0) != p0 || matrix_rank(&a1) != p1 {
            return Err(EvidenceError::RankDeficientDesign(
                "a design matrix does not have full column rank".into(),
            ));
        }
        let nesting = is_nested(&a0, &a1);
        Ok(DesignPair {
            a0,
            a1,
            q0,
            q1,
            nesting,
        })
    }

    pub fn n(&self) -> usize {
        self.a0.nrows()
    }

    pub fn p0(&self) -> usize {
        self.a0.ncols()
    }

    pub fn p1(&self) -> usize {
        self.a1.ncols()
    }

    /// Minimal training sample size: max(p0 + 1, p1 + 1).
    pub fn mts_size(&self) -> usize {
        self.p1() + 1
    }
}

fn matrix_rank(a: &DMatrix<f64>) -> usize {
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    let k = r.nrows().min(r.ncols());
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    (0..k).filter(|&i| r[(i, i)].abs() > RANK_EPS * scale).count()
}

fn is_nested(a0: &DMatrix<f64>, a1: &DMatrix<f64>) -> bool {
    let qr = a1.clone().qr();
    let q = qr.q();
    let proj = &q * (q.transpose() * a0);
    let resid = a0 - proj;
    let scale = a0.amax().max(1e-300);
    resid.amax() <= 1e-8 * scale
}

struct LsFit {
    residual_ss: f64,
    ln_det_gram: f64,
}

/// Least squares through a Householder QR; no normal-equation inverse.
fn least_squares(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<LsFit> {
    let p = a.ncols();
    if matrix_rank(a) != p {
        return Err(EvidenceError::RankDeficientDesign(format!(
            "design with {} rows and {} columns is rank deficient",
            a.nrows(),
            p
        )));
    }
    let piv = a.clone().col_piv_qr();
    let r = piv.r();
    let mut ln_det_gram = 0.0;
    for i in 0..p {
        ln_det_gram += 2.0 * r[(i, i)].abs().ln();
    }
    let qr = a.clone().qr();
    let q = qr.q();
    let fitted = &q * (q.transpose() * y);
    let residual_ss = (y - fitted).norm_squared();
    Ok(LsFit {
        residual_ss,
        ln_det_gram,
    })
}

/// Residual sums of squares of both models and the F statistic.
#[derive(Clone, Copy, Debug)]
pub struct FitSummary {
    pub r0: f64,
    pub r1: f64,
    pub f_stat: f64,
    pub n: usize,
}

/// Fits both designs and forms the F statistic for the nested comparison.
pub fn fit(design: &DesignPair, y: &Sample) -> Result<FitSummary> {
    let n = design.n();
    if y.len() != n {
        return Err(EvidenceError::DomainViolation(format!(
            "response has {} rows but the designs have {n}",
            y.len()
        )));
    }
    let yv = DVector::from_column_slice(&y.values);
    let f0 = least_squares(&design.a0, &yv)?;
    let f1 = least_squares(&design.a1, &yv)?;
    let (p0, p1) = (design.p0() as f64, design.p1() as f64);
    let f_stat = ((f0.residual_ss - f1.residual_ss).max(0.0) / (p1 - p0))
        / (f1.residual_ss / (n as f64 - p1));
    Ok(FitSummary {
        r0: f0.residual_ss,
        r1: f1.residual_ss,
        f_stat,
        n,
    })
}

/// Log marginal of one model under the prior sigma^-(1+q), with its full
/// constant structure:
/// (2 pi)^(-(n-p)/2) |A'A|^(-1/2) (1/2) (2/R)^((n+q-p)/2) Gamma((n+q-p)/2).
pub fn gl_marginal_log(a: &DMatrix<f64>, y: &[f64], q: u32) -> Result<LogValue> {
    let n = a.nrows();
    let p = a.ncols();
    if y.len() != n {
        return Err(EvidenceError::DomainViolation(
            "response length does not match the design".into(),
        ));
    }
    let half_exp = (n as f64 + q as f64 - p as f64) / 2.0;
    if half_exp <= 0.0 {
        return Err(EvidenceError::DomainViolation(format!(
            "need n + q - p > 0, got n={n}, q={q}, p={p}"
        )));
    }
    let yv = DVector::from_column_slice(y);
    let ls = least_squares(a, &yv)?;
    let y_scale = yv.norm_squared().max(1e-300);
    if ls.residual_ss <= y_scale * 1e-12 {
        return Err(EvidenceError::DomainViolation(
            "zero residual sum of squares: the marginal diverges".into(),
        ));
    }
    Ok(LogValue::from_ln(
        -((n - p) as f64 / 2.0) * (2.0 * PI).ln() - 0.5 * ls.ln_det_gram - 2f64.ln()
            + half_exp * (2f64.ln() - ls.residual_ss.ln())
            + ln_gamma(half_exp)?,
    ))
}

/// Full-data B01 = m0(y) / m1(y) for the nested pair.
pub fn gl_bf01_full(design: &DesignPair, y: &Sample) -> Result<LogValue> {
    let m0 = gl_marginal_log(&design.a0, &y.values, design.q0)?;
    let m1 = gl_marginal_log(&design.a1, &y.values, design.q1)?;
    Ok(m0 / m1)
}

/// Whether a row subset is a proper training sample: both sub-designs
/// keep full column rank and both residual sums of squares are positive.
pub fn training_subset_proper(design: &DesignPair, y: &[f64], rows: &[usize]) -> bool {
    if rows.iter().any(|&i| i >= design.n()) {
        return false;
    }
    let a0 = design.a0.select_rows(rows.iter());
    let a1 = design.a1.select_rows(rows.iter());
    let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    gl_marginal_log(&a0, &ys, design.q0).is_ok() && gl_marginal_log(&a1, &ys, design.q1).is_ok()
}

/// Direction of an empirical bound scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMode {
    Lower01,
    Upper10,
}

/// Controls the row-subset scan: exhaustive up to `cap` subsets, then a
/// seeded subsample of `subsample` candidates.
#[derive(Clone, Copy, Debug)]
pub struct ScanConfig {
    pub cap: u128,
    pub subsample: usize,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            cap: 1_000_000,
            subsample: 20_000,
            seed: 0,
        }
    }
}

/// Empirical IBF bound over proper row subsets of minimal size:
/// Lower01 = B01(y) * min over subsets of the trained B10(y(l)),
/// Upper10 its exact reciprocal. Ties break to the lexicographically
/// smallest row tuple.
pub fn gl_empirical_bound(
    design: &DesignPair,
    y: &Sample,
    mode: BoundMode,
    scan: &ScanConfig,
) -> Result<BoundReport> {
    let n = design.n();
    let k = design.mts_size();
    if n < k + 1 {
        return Err(EvidenceError::InsufficientData(format!(
            "need at least {} rows for an empirical bound, got {n}",
            k + 1
        )));
    }
    let candidates: Vec<TrainingIndex> = match mts::enumerate_with_cap(n, k, scan.cap) {
        Ok(iter) => iter.collect(),
        Err(EvidenceError::DomainViolation(_)) => {
            mts::random_subsample(n, k, scan.subsample, scan.seed)?
        }
        Err(e) => return Err(e),
    };

    // Trained factor log B10(y(l)) = log m1(l) - log m0(l) per subset.
    let trained: Vec<Option<f64>> = par::map_indexed(candidates.len(), |i| {
        let rows = candidates[i].indices();
        let a0 = design.a0.select_rows(rows.iter());
        let a1 = design.a1.select_rows(rows.iter());
        let ys: Vec<f64> = rows.iter().map(|&r| y.values[r]).collect();
        match (
            gl_marginal_log(&a0, &ys, design.q0),
            gl_marginal_log(&a1, &ys, design.q1),
        ) {
            (Ok(m0), Ok(m1)) => Some(m1.ln() - m0.ln()),
            _ => None,
        }
    });

    let mut best: Option<(f64, usize)> = None;
    for (i, t) in trained.iter().enumerate() {
        let Some(t) = *t else { continue };
        let better = match best {
            None => true,
            Some((b, bi)) => {
                t < b || (t == b && candidates[i] < candidates[bi])
            }
        };
        if better {
            best = Some((t, i));
        }
    }
    let (min_trained, arg) = best.ok_or_else(|| {
        EvidenceError::ImproperTrainingSample(
            "no proper row subset of minimal size exists".into(),
        )
    })?;

    let full01 = gl_bf01_full(design, y)?;
    let lower01 = full01 + min_trained;
    let attainer = Attainer::Sample(candidates[arg].clone());
    Ok(match mode {
        BoundMode::Lower01 => BoundReport::new(BoundVariant::EmpiricalLower01, lower01)
            .with_attainer(attainer),
        BoundMode::Upper10 => {
            BoundReport::new(BoundVariant::EmpiricalUpper10, lower01.recip()?)
                .with_attainer(attainer)
        }
    })
}

/// Objective prior flavor for the ANOVA bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorKind {
    FullJeffreys,
    ModifiedJeffreys,
    ReferencePrior,
}

/// One-way layout: group sizes plus the prior flavor.
#[derive(Clone, Debug)]
pub struct AnovaSpec {
    pub group_sizes: Vec<usize>,
    pub prior_kind: PriorKind,
}

impl AnovaSpec {
    pub fn new(group_sizes: Vec<usize>, prior_kind: PriorKind) -> Result<Self> {
        let spec = AnovaSpec {
            group_sizes,
            prior_kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.group_sizes.len();
        let n: usize = self.group_sizes.iter().sum();
        if m < 2 {
            return Err(EvidenceError::DomainViolation(
                "one-way layout needs at least two groups".into(),
            ));
        }
        if self.group_sizes.iter().any(|&g| g == 0) {
            return Err(EvidenceError::DomainViolation(
                "every group needs at least one observation".into(),
            ));
        }
        if n < m + 1 {
            return Err(EvidenceError::InsufficientData(format!(
                "one-way layout needs n >= m + 1, got n={n}, m={m}"
            )));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn n(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    /// Prior exponents (q0, q1) for this prior flavor with p0=1, p1=m.
    pub fn prior_exponents(&self) -> (u32, u32) {
        match self.prior_kind {
            PriorKind::FullJeffreys => (1, self.m() as u32),
            PriorKind::ModifiedJeffreys => (0, self.m() as u32 - 1),
            PriorKind::ReferencePrior => (0, 0),
        }
    }

    /// The (n x 1) ones design and the (n x m) block indicator design.
    pub fn design_pair(&self) -> Result<DesignPair> {
        let n = self.n();
        let m = self.m();
        let a0 = DMatrix::from_element(n, 1, 1.0);
        let mut a1 = DMatrix::zeros(n, m);
        let mut row = 0;
        for (g, &size) in self.group_sizes.iter().enumerate() {
            for _ in 0..size {
                a1[(row, g)] = 1.0;
                row += 1;
            }
        }
        let (q0, q1) = self.prior_exponents();
        DesignPair::new(a0, a1, q0, q1)
    }

    /// Global row offsets of each group in group order.
    fn offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.m());
        let mut acc = 0;
        for &g in &self.group_sizes {
            offsets.push(acc);
            acc += g;
        }
        offsets
    }
}

/// SS Bayes factor B01 for the one-way layout:
/// sqrt( ((m+1)/2) (prod n_i / n) / (1 + ((m-1)/(n-m)) F)^n ).
pub fn anova_ss_bf01(spec: &AnovaSpec, fit: &FitSummary) -> Result<LogValue> {
    let m = spec.m() as f64;
    let n = spec.n() as f64;
    if fit.n != spec.n() {
        return Err(EvidenceError::DomainViolation(
            "fit and spec disagree on the number of rows".into(),
        ));
    }
    if !(fit.f_stat >= 0.0) || !fit.f_stat.is_finite() {
        return Err(EvidenceError::DomainViolation(format!(
            "F statistic must be finite and non-negative, got {}",
            fit.f_stat
        )));
    }
    let ln_prod: f64 = spec.group_sizes.iter().map(|&g| (g as f64).ln()).sum();
    Ok(LogValue::from_ln(
        0.5 * (((m + 1.0) / 2.0).ln() + ln_prod - n.ln()
            - n * (1.0 + (m - 1.0) / (n - m) * fit.f_stat).ln()),
    ))
}

/// The p-value form of the SS Bayes factor, routed through the F
/// quantile with (m - 1, n - m) degrees of freedom.
pub fn anova_ss_bf01_from_p(spec: &AnovaSpec, p: f64, n: usize) -> Result<LogValue> {
    if n != spec.n() {
        return Err(EvidenceError::DomainViolation(
            "n does not match the group sizes".into(),
        ));
    }
    let m = spec.m();
    let f = f_quantile(1.0 - p, (m - 1) as u32, (n - m) as u32)?;
    anova_ss_bf01(
        spec,
        &FitSummary {
            r0: f64::NAN,
            r1: f64::NAN,
            f_stat: f,
            n,
        },
    )
}

/// Stratified minimal training samples for the one-way layout: one row
/// per group plus a second row in one (doubled) group.
fn stratified_candidates(spec: &AnovaSpec, scan: &ScanConfig) -> Vec<Vec<usize>> {
    let m = spec.m();
    let offsets = spec.offsets();
    let sizes = &spec.group_sizes;

    let mut total: u128 = 0;
    for j in 0..m {
        if sizes[j] < 2 {
            continue;
        }
        let pairs = (sizes[j] * (sizes[j] - 1) / 2) as u128;
        let mut others: u128 = 1;
        for (i, &s) in sizes.iter().enumerate() {
            if i != j {
                others = others.saturating_mul(s as u128);
            }
        }
        total = total.saturating_add(pairs.saturating_mul(others));
    }

    if total <= scan.cap {
        let mut out = Vec::new();
        for j in 0..m {
            if sizes[j] < 2 {
                continue;
            }
            for a in 0..sizes[j] {
                for b in a + 1..sizes[j] {
                    // Odometer over the single choices of the other groups.
                    let mut choice = vec![0usize; m];
                    loop {
                        let mut rows = Vec::with_capacity(m + 1);
                        for g in 0..m {
                            if g == j {
                                rows.push(offsets[j] + a);
                                rows.push(offsets[j] + b);
                            } else {
                                rows.push(offsets[g] + choice[g]);
                            }
                        }
                        rows.sort_unstable();
                        out.push(rows);
                        // Advance the odometer, skipping the doubled group.
                        let mut g = 0;
                        loop {
                            if g == j {
                                g += 1;
                                if g >= m {
                                    break;
                                }
                                continue;
                            }
                            if g >= m {
                                break;
                            }
                            choice[g] += 1;
                            if choice[g] < sizes[g] {
                                break;
                            }
                            choice[g] = 0;
                            g += 1;
                        }
                        if g >= m {
                            break;
                        }
                    }
                }
            }
        }
        out
    } else {
        // Seeded subsample: doubled group weighted by its share of tuples.
        let mut rng = ChaCha12Rng::seed_from_u64(scan.seed);
        let mut weights: Vec<u128> = Vec::with_capacity(m);
        for j in 0..m {
            if sizes[j] < 2 {
                weights.push(0);
                continue;
            }
            let pairs = (sizes[j] * (sizes[j] - 1) / 2) as u128;
            let mut others: u128 = 1;
            for (i, &s) in sizes.iter().enumerate() {
                if i != j {
                    others = others.saturating_mul(s as u128);
                }
            }
            weights.push(pairs.saturating_mul(others));
        }
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut out = Vec::with_capacity(scan.subsample);
        let want = (scan.subsample as u128).min(total) as usize;
        while out.len() < want {
            let mut pick = rng.gen_range(0..total);
            let mut j = 0;
            while pick >= weights[j] {
                pick -= weights[j];
                j += 1;
            }
            let a = rng.gen_range(0..sizes[j]);
            let b = loop {
                let b = rng.gen_range(0..sizes[j]);
                if b != a {
                    break b;
                }
            };
            let mut rows = Vec::with_capacity(m + 1);
            for g in 0..m {
                if g == j {
                    rows.push(offsets[j] + a.min(b));
                    rows.push(offsets[j] + a.max(b));
                } else {
                    rows.push(offsets[g] + rng.gen_range(0..sizes[g]));
                }
            }
            rows.sort_unstable();
            if seen.insert(rows.clone()) {
                out.push(rows);
            }
        }
        out
    }
}

/// Residual sums of squares of a stratified training sample, by direct
/// arithmetic: R1 is the within-pair spread of the doubled group, R0 the
/// total spread about the subset mean.
fn stratified_rss(y: &[f64], rows: &[usize], spec: &AnovaSpec) -> (f64, f64) {
    let offsets = spec.offsets();
    let group_of = |row: usize| -> usize {
        let mut g = 0;
        for (i, &off) in offsets.iter().enumerate() {
            if row >= off {
                g = i;
            }
        }
        g
    };
    let vals: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let r0 = vals.iter().map(|v| (v - mean) * (v - mean)).sum();
    // Find the doubled group's two values.
    let mut r1 = 0.0;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if group_of(rows[i]) == group_of(rows[j]) {
                let d = y[rows[i]] - y[rows[j]];
                r1 = d * d / 2.0;
            }
        }
    }
    (r0, r1)
}

/// Theoretical and empirical bounds for the one-way layout.
#[derive(Clone, Debug)]
pub struct AnovaBounds {
    pub theoretical_upper10: BoundReport,
    pub theoretical_lower01: BoundReport,
    pub empirical_upper10: BoundReport,
    pub empirical_lower01: BoundReport,
}

/// ANOVA SS bounds under the chosen prior. The Reference prior admits no
/// bound (the training-sample supremum degenerates to zero or infinity),
/// reported as `NonExistentBound`.
pub fn anova_bounds(spec: &AnovaSpec, y: &Sample, scan: &ScanConfig) -> Result<AnovaBounds> {
    spec.validate()?;
    let m = spec.m();
    let n = spec.n();
    if y.len() != n {
        return Err(EvidenceError::DomainViolation(format!(
            "expected {n} observations for the group sizes, got {}",
            y.len()
        )));
    }
    if n < m + 2 {
        return Err(EvidenceError::InsufficientData(format!(
            "bounds need n >= m + 2, got n={n}, m={m}"
        )));
    }
    if spec.prior_kind == PriorKind::ReferencePrior {
        return Err(EvidenceError::NonExistentBound(
            "under the reference prior the SS bound degenerates to zero or infinity".into(),
        ));
    }
    let design = spec.design_pair()?;
    let fit = fit(&design, y)?;
    if fit.r1 <= 0.0 {
        return Err(EvidenceError::DomainViolation(
            "zero within-group sum of squares: infinite evidence limit".into(),
        ));
    }

    let (theory_exp, mts_exp) = match spec.prior_kind {
        PriorKind::FullJeffreys => (n as f64, (m + 1) as f64),
        PriorKind::ModifiedJeffreys => (n as f64 - 1.0, m as f64),
        PriorKind::ReferencePrior => unreachable!(),
    };
    let ln_prod: f64 = spec.group_sizes.iter().map(|&g| (g as f64).ln()).sum();
    let base = (2.0 / (m as f64 + 1.0)).ln() + (n as f64).ln() - ln_prod;
    let theo = 0.5 * (base + theory_exp * (fit.r0 / fit.r1).ln());

    let candidates = stratified_candidates(spec, scan);
    let ratios: Vec<Option<f64>> = par::map_indexed(candidates.len(), |i| {
        let (r0l, r1l) = stratified_rss(&y.values, &candidates[i], spec);
        if r1l > 0.0 && r0l > 0.0 {
            Some((r1l / r0l).ln())
        } else {
            None
        }
    });
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in ratios.iter().enumerate() {
        let Some(v) = *v else { continue };
        let better = match best {
            None => true,
            Some((b, bi)) => v > b || (v == b && candidates[i] < candidates[bi]),
        };
        if better {
            best = Some((v, i));
        }
    }
    let (max_ratio, arg) = best.ok_or_else(|| {
        EvidenceError::ImproperTrainingSample(
            "no stratified training sample with positive within-group spread".into(),
        )
    })?;
    let emp = 0.5 * (base + theory_exp * (fit.r0 / fit.r1).ln() + mts_exp * max_ratio);
    let attainer = Attainer::Sample(TrainingIndex::new(candidates[arg].clone())?);

    let theo_upper = LogValue::from_ln(theo);
    let emp_upper = LogValue::from_ln(emp);
    Ok(AnovaBounds {
        theoretical_upper10: BoundReport::new(BoundVariant::TheoreticalUpper10, theo_upper)
            .with_notes("training-sample supremum of (R1/R0) is 1"),
        theoretical_lower01: BoundReport::new(
            BoundVariant::TheoreticalLower01,
            theo_upper.recip()?,
        ),
        empirical_upper10: BoundReport::new(BoundVariant::EmpiricalUpper10, emp_upper)
            .with_attainer(attainer.clone()),
        empirical_lower01: BoundReport::new(BoundVariant::EmpiricalLower01, emp_upper.recip()?)
            .with_attainer(attainer),
    })
}
