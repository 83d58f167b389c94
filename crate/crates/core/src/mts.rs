//! Minimal training samples: lazy enumeration of all k-subsets of the
//! observation indices, seeded random subsampling for large n, and the
//! per-family properness filter.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{EvidenceError, Result};
use crate::linear;
use crate::model::ModelTest;
use crate::sample::Sample;

/// Sorted tuple of sample indices forming one minimal training sample.
/// Indices are 0-based internally; `Display` renders them 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrainingIndex {
    indices: Vec<usize>,
}

impl TrainingIndex {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvidenceError::DomainViolation(format!(
                "training index must be strictly increasing and non-empty: {indices:?}"
            )));
        }
        Ok(TrainingIndex { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    /// The selected observations, in index order.
    pub fn select(&self, sample: &Sample) -> Vec<f64> {
        self.indices.iter().map(|&i| sample.values[i]).collect()
    }

    /// The complement y(-l): every observation not in this tuple.
    pub fn complement(&self, sample: &Sample) -> Vec<f64> {
        sample
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.indices.contains(i))
            .map(|(_, &v)| v)
            .collect()
    }
}

impl fmt::Display for TrainingIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rendered: Vec<String> = self.indices.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{}", rendered.join(","))
    }
}

/// Enumeration strategy for the set of all minimal training samples.
#[derive(Clone, Debug)]
pub enum MtsEnumeration {
    Exhaustive,
    RandomSubsample { count: usize, seed: u64 },
}

/// Default ceiling on the number of exhaustively enumerated tuples.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// C(n, k), or None on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul((n - i) as u128)?;
        c /= (i + 1) as u128;
    }
    Some(c)
}

/// Lazy odometer over all strictly increasing k-tuples in [0, n),
/// produced in lexicographic order without materializing the set.
pub struct TrainingIndexIter {
    n: usize,
    k: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for TrainingIndexIter {
    type Item = TrainingIndex;

    fn next(&mut self) -> Option<TrainingIndex> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        // Advance the rightmost digit that still has room.
        let mut pos = self.k;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            if succ[pos] < self.n - (self.k - pos) {
                succ[pos] += 1;
                for j in pos + 1..self.k {
                    succ[j] = succ[j - 1] + 1;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(TrainingIndex { indices: current })
    }
}

/// All C(n, k) training-index tuples, lexicographically ordered.
///
/// Fails with `InsufficientData` when k > n and with `DomainViolation`
/// when the exhaustive count exceeds `cap` (switch to `random_subsample`).
pub fn enumerate_with_cap(n: usize, k: usize, cap: u128) -> Result<TrainingIndexIter> {
    if n == 0 || k == 0 {
        return Err(EvidenceError::DomainViolation(
            "enumeration requires n >= 1 and k >= 1".into(),
        ));
    }
    if k > n {
        return Err(EvidenceError::InsufficientData(format!(
            "cannot draw training samples of size {k} from {n} observations"
        )));
    }
    let total = binomial(n, k);
    match total {
        Some(t) if t <= cap => Ok(TrainingIndexIter {
            n,
            k,
            next: Some((0..k).collect()),
        }),
        _ => Err(EvidenceError::DomainViolation(format!(
            "C({n},{k}) exceeds the enumeration cap {cap}; use random_subsample"
        ))),
    }
}

/// `enumerate_with_cap` with the default cap.
pub fn enumerate(n: usize, k: usize) -> Result<TrainingIndexIter> {
    enumerate_with_cap(n, k, DEFAULT_ENUMERATION_CAP)
}

/// `count` tuples drawn without replacement from the k-subsets of [0, n),
/// deterministic for a fixed seed.
pub fn random_subsample(n: usize, k: usize, count: usize, seed: u64) -> Result<Vec<TrainingIndex>> {
    if count == 0 {
        return Err(EvidenceError::DomainViolation(
            "subsample count must be at least 1".into(),
        ));
    }
    if k > n || n == 0 {
        return Err(EvidenceError::InsufficientData(format!(
            "cannot draw training samples of size {k} from {n} observations"
        )));
    }
    let total = binomial(n, k);
    if let Some(t) = total {
        if count as u128 > t {
            return Err(EvidenceError::DomainViolation(format!(
                "requested {count} tuples but only {t} exist"
            )));
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let materialize_limit = (4 * count as u128).max(4096).min(DEFAULT_ENUMERATION_CAP);
    match total {
        Some(t) if t <= materialize_limit => {
            let mut all: Vec<TrainingIndex> = enumerate_with_cap(n, k, t)?.collect();
            all.shuffle(&mut rng);
            all.truncate(count);
            Ok(all)
        }
        _ => {
            // Space is much larger than the request: draw index tuples
            // directly and deduplicate. Collisions are rare by construction.
            let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(count);
            let mut out = Vec::with_capacity(count);
            let mut scratch: Vec<usize> = Vec::with_capacity(k);
            while out.len() < count {
                scratch.clear();
                while scratch.len() < k {
                    let candidate = rng.gen_range(0..n);
                    if !scratch.contains(&candidate) {
                        scratch.push(candidate);
                    }
                }
                scratch.sort_unstable();
                if seen.insert(scratch.clone()) {
                    out.push(TrainingIndex {
                        indices: scratch.clone(),
                    });
                }
            }
            Ok(out)
        }
    }
}

/// Keeps exactly the candidates whose marginals under both models are
/// finite and positive. Each family contributes its own closed-form
/// predicate; a candidate outside a count test's domain is improper.
pub fn filter_proper(
    sample: &Sample,
    test: &ModelTest,
    candidates: impl IntoIterator<Item = TrainingIndex>,
) -> Vec<TrainingIndex> {
    candidates
        .into_iter()
        .filter(|idx| is_proper(sample, test, idx))
        .collect()
}

/// Properness predicate for one candidate training sample.
pub fn is_proper(sample: &Sample, test: &ModelTest, idx: &TrainingIndex) -> bool {
    let selected = idx.select(sample);
    match test {
        ModelTest::Exponential { .. } => selected.iter().all(|&y| y > 0.0),
        // Pair tests with a scale parameter need a nonzero within-pair spread.
        ModelTest::NormalScale { .. } | ModelTest::NormalMeanUnknownVar { .. } => {
            selected.len() == 2 && selected[0] != selected[1]
        }
        ModelTest::NormalMeanKnownVar { .. } | ModelTest::SimpleNormalMean => true,
        ModelTest::PoissonVsGeometric => selected.iter().all(|&y| is_count(y)),
        // The single-observation NB marginal diverges at y = 0.
        ModelTest::PoissonVsNegBinomial { .. } => {
            selected.iter().all(|&y| is_count(y) && y >= 1.0)
        }
        ModelTest::NestedLinear { design } => {
            linear::training_subset_proper(design, &sample.values, idx.indices())
        }
        ModelTest::OneWayAnova { spec } => match spec.design_pair() {
            Ok(design) => linear::training_subset_proper(&design, &sample.values, idx.indices()),
            Err(_) => false,
        },
    }
}

fn is_count(y: f64) -> bool {
    y >= 0.0 && y.fract() == 0.0 && y.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_n4_k2() {
        let got: Vec<Vec<usize>> = enumerate(4, 2).unwrap().map(|t| t.indices.clone()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn enumerate_counts_match_binomial() {
        for n in 1..=12 {
            for k in 1..=n {
                let count = enumerate(n, k).unwrap().count() as u128;
                assert_eq!(count, binomial(n, k).unwrap(), "C({n},{k})");
            }
        }
    }

    #[test]
    fn enumerate_is_sorted_and_strict() {
        let all: Vec<TrainingIndex> = enumerate(7, 3).unwrap().collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        for t in &all {
            assert!(t.indices.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn enumerate_rejects_bad_input() {
        assert!(matches!(
            enumerate(3, 4),
            Err(EvidenceError::InsufficientData(_))
        ));
        assert!(matches!(
            enumerate_with_cap(100, 4, 1000),
            Err(EvidenceError::DomainViolation(_))
        ));
    }

    #[test]
    fn subsample_exhaustive_corner_is_permutation() {
        let got = random_subsample(10, 2, 45, 7).unwrap();
        assert_eq!(got.len(), 45);
        let set: HashSet<_> = got.iter().cloned().collect();
        assert_eq!(set.len(), 45);
        let full: HashSet<_> = enumerate(10, 2).unwrap().collect();
        assert_eq!(set, full);
    }

    #[test]
    fn subsample_is_deterministic() {
        let a = random_subsample(100, 2, 50, 1).unwrap();
        let b = random_subsample(100, 2, 50, 1).unwrap();
        assert_eq!(a, b);
        let c = random_subsample(100, 2, 50, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn subsample_distinct_and_contained() {
        let got = random_subsample(100, 2, 50, 1).unwrap();
        let set: HashSet<_> = got.iter().cloned().collect();
        assert_eq!(set.len(), 50);
        // Containment in the exhaustive set, checked at small n.
        let got = random_subsample(10, 3, 20, 3).unwrap();
        let full: HashSet<_> = enumerate(10, 3).unwrap().collect();
        assert!(got.iter().all(|t| full.contains(t)));
    }

    #[test]
    fn subsample_count_exceeding_total_fails() {
        assert!(matches!(
            random_subsample(5, 2, 11, 0),
            Err(EvidenceError::DomainViolation(_))
        ));
    }

    #[test]
    fn proper_filter_exponential() {
        let sample = Sample::new(vec![2.0, 0.0, 1.5], "t");
        let test = ModelTest::Exponential { lambda0: 1.0 };
        let kept = filter_proper(&sample, &test, enumerate(3, 1).unwrap());
        assert_eq!(kept.len(), 2);
        assert!(kept.iter().all(|t| sample.values[t.indices()[0]] > 0.0));
    }

    #[test]
    fn proper_filter_degenerate_pair() {
        let sample = Sample::new(vec![1.0, 1.0, 2.0], "t");
        let test = ModelTest::NormalMeanUnknownVar { mu0: 0.0 };
        let kept = filter_proper(&sample, &test, enumerate(3, 2).unwrap());
        // (0,1) is the constant pair; (0,2) and (1,2) survive.
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn proper_filter_negbinomial_excludes_zero() {
        let sample = Sample::new(vec![0.0, 1.0, 3.0], "t");
        let test = ModelTest::PoissonVsNegBinomial { r: 1 };
        let kept = filter_proper(&sample, &test, enumerate(3, 1).unwrap());
        assert_eq!(kept.len(), 2);
        let test = ModelTest::PoissonVsGeometric;
        let kept = filter_proper(&sample, &test, enumerate(3, 1).unwrap());
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn display_is_one_based() {
        let t = TrainingIndex::new(vec![0, 2, 5]).unwrap();
        assert_eq!(t.to_string(), "1,3,6");
    }
}
