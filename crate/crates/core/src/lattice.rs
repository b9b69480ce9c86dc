//! The finite set of empirical distributions reachable with `T` samples over
//! `d` scenarios, and the exact multinomial weight of each point.
//!
//! Points are compositions of `T` into `d` nonnegative parts. They are
//! produced in a fixed order (increasing first count, then second, and so
//! on), so `(T, d) = (2, 2)` yields `(0,2), (1,1), (2,0)`. Every point has a
//! rank in that order and [`Lattice::range`] starts a stream at any rank,
//! which lets callers split the lattice into contiguous blocks.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::simplex::{check_dim, Distribution, EmpiricalDistribution};

/// Default upper bound on the number of lattice points an exact engine visits.
pub const DEFAULT_LATTICE_CAP: u64 = 100_000_000;

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of compositions of `t` into `d` nonnegative parts.
pub fn lattice_size(t: u64, d: usize) -> u128 {
    binomial(t + d as u64 - 1, d as u64 - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    t: u64,
    d: usize,
    size: u64,
}

impl Lattice {
    pub fn new(t: u64, d: usize, cap: u64) -> Result<Self> {
        if t < 1 {
            return Err(Error::InvalidArgument("lattice needs T >= 1".into()));
        }
        if d < 2 {
            return Err(Error::InvalidArgument("lattice needs d >= 2".into()));
        }
        let size = lattice_size(t, d);
        if size > cap as u128 {
            return Err(Error::LatticeCapExceeded { size, cap });
        }
        Ok(Self {
            t,
            d,
            size: size as u64,
        })
    }

    pub fn sample_size(&self) -> u64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> u64 {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn iter(&self) -> LatticeIter {
        self.range(0, self.size)
    }

    /// Points with ranks in `start..end`.
    pub fn range(&self, start: u64, end: u64) -> LatticeIter {
        let end = end.min(self.size);
        let start = start.min(end);
        let current = if start < end {
            self.unrank(start)
        } else {
            vec![0; self.d]
        };
        LatticeIter {
            current,
            remaining: end - start,
        }
    }

    /// The composition at position `rank`.
    pub fn unrank(&self, mut rank: u64) -> Vec<u64> {
        let d = self.d;
        let mut counts = vec![0u64; d];
        let mut left = self.t;
        for (j, slot) in counts.iter_mut().enumerate().take(d - 1) {
            let parts_after = (d - j - 1) as u64;
            let mut v = 0;
            loop {
                let block = binomial(left - v + parts_after - 1, parts_after - 1) as u64;
                if rank < block {
                    break;
                }
                rank -= block;
                v += 1;
            }
            *slot = v;
            left -= v;
        }
        counts[d - 1] = left;
        counts
    }
}

/// Enumerates every empirical distribution of `t` samples over `d` scenarios.
pub fn enumerate_lattice(t: u64, d: usize, cap: u64) -> Result<LatticeIter> {
    Ok(Lattice::new(t, d, cap)?.iter())
}

/// Stream of lattice points. Yields owned count vectors.
#[derive(Debug, Clone)]
pub struct LatticeIter {
    current: Vec<u64>,
    remaining: u64,
}

impl LatticeIter {
    fn advance(&mut self) {
        let d = self.current.len();
        let mut tail = 0;
        for j in (0..d - 1).rev() {
            tail += self.current[j + 1];
            if tail > 0 {
                self.current[j] += 1;
                for c in &mut self.current[j + 1..] {
                    *c = 0;
                }
                self.current[d - 1] = tail - 1;
                return;
            }
        }
    }
}

impl Iterator for LatticeIter {
    type Item = EmpiricalDistribution;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let item = self.current.clone();
        self.remaining -= 1;
        if self.remaining > 0 {
            self.advance();
        }
        // counts sum to T >= 1 by construction
        Some(EmpiricalDistribution::from_counts(item).expect("lattice point"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for LatticeIter {}

/// `log( T! / prod c_i! * prod p_i^{c_i} )`, or `-inf` when a scenario with
/// zero probability has a positive count.
pub fn multinomial_log_prob(e: &EmpiricalDistribution, p: &Distribution) -> Result<f64> {
    check_dim(p.dim(), e.dim())?;
    Ok(multinomial_log_prob_raw(e.counts(), e.sample_size(), p.weights()))
}

pub(crate) fn multinomial_log_prob_raw(counts: &[u64], t: u64, p: &[f64]) -> f64 {
    let mut acc = ln_gamma(t as f64 + 1.0);
    for (&c, &w) in counts.iter().zip(p) {
        if c == 0 {
            continue;
        }
        if w == 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += c as f64 * w.ln() - ln_gamma(c as f64 + 1.0);
    }
    acc
}

/// Precomputed `ln k!` for `k <= t`, for repeated lattice weights.
#[derive(Debug, Clone)]
pub(crate) struct LogFactorials(Vec<f64>);

impl LogFactorials {
    pub(crate) fn new(t: u64) -> Self {
        Self((0..=t).map(|k| ln_gamma(k as f64 + 1.0)).collect())
    }

    pub(crate) fn log_prob(&self, counts: &[u64], log_p: &[f64]) -> f64 {
        let t: u64 = counts.iter().sum();
        let mut acc = self.0[t as usize];
        for (&c, &lp) in counts.iter().zip(log_p) {
            if c == 0 {
                continue;
            }
            if lp == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            acc += c as f64 * lp - self.0[c as usize];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn collect(t: u64, d: usize) -> Vec<Vec<u64>> {
        enumerate_lattice(t, d, DEFAULT_LATTICE_CAP)
            .unwrap()
            .map(|e| e.counts().to_vec())
            .collect()
    }

    #[test]
    fn small_lattices() {
        assert_eq!(collect(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(collect(3, 3).len(), 10);
        let pts = collect(3, 3);
        assert_eq!(pts[0], vec![0, 0, 3]);
        assert_eq!(pts[1], vec![0, 1, 2]);
        assert_eq!(pts[4], vec![1, 0, 2]);
        assert_eq!(pts[9], vec![3, 0, 0]);
    }

    #[test]
    fn cap_exceeded_reports_size() {
        match enumerate_lattice(1_000_000, 6, DEFAULT_LATTICE_CAP) {
            Err(Error::LatticeCapExceeded { size, cap }) => {
                assert_eq!(cap, DEFAULT_LATTICE_CAP);
                assert_eq!(size, binomial(1_000_005, 5));
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn points_are_distinct_and_complete() {
        for d in 2..=4 {
            for t in 1..=8 {
                let pts = collect(t, d);
                assert_eq!(pts.len() as u128, lattice_size(t, d));
                let set: std::collections::BTreeSet<_> = pts.iter().cloned().collect();
                assert_eq!(set.len(), pts.len());
                assert!(pts.iter().all(|c| c.iter().sum::<u64>() == t));
                // strictly increasing lexicographically
                assert!(pts.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn ranges_partition_the_stream() {
        let lat = Lattice::new(7, 4, DEFAULT_LATTICE_CAP).unwrap();
        let all: Vec<_> = lat.iter().collect();
        let mut joined = Vec::new();
        let step = 13;
        let mut start = 0;
        while start < lat.len() {
            joined.extend(lat.range(start, start + step));
            start += step;
        }
        assert_eq!(all, joined);
        for (rank, e) in all.iter().enumerate() {
            assert_eq!(lat.unrank(rank as u64), e.counts());
        }
    }

    #[test]
    fn multinomial_examples() {
        let half = Distribution::new(vec![0.5, 0.5]).unwrap();
        let e = EmpiricalDistribution::from_counts(vec![2, 0]).unwrap();
        assert!((multinomial_log_prob(&e, &half).unwrap() - 0.25f64.ln()).abs() < 1e-14);
        let e = EmpiricalDistribution::from_counts(vec![1, 1]).unwrap();
        assert!((multinomial_log_prob(&e, &half).unwrap() - 0.5f64.ln()).abs() < 1e-14);
        let vertex = Distribution::new(vec![1.0, 0.0]).unwrap();
        let e = EmpiricalDistribution::from_counts(vec![40, 0]).unwrap();
        assert!(multinomial_log_prob(&e, &vertex).unwrap().abs() < 1e-12);
        let e = EmpiricalDistribution::from_counts(vec![39, 1]).unwrap();
        assert_eq!(multinomial_log_prob(&e, &vertex).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn log_factorial_table_matches_ln_gamma() {
        let table = LogFactorials::new(500);
        let p = [0.2f64, 0.3, 0.5];
        let lp: Vec<f64> = p.iter().map(|x| x.ln()).collect();
        let counts = [100u64, 150, 250];
        let direct = multinomial_log_prob_raw(&counts, 500, &p);
        assert!((table.log_prob(&counts, &lp) - direct).abs() < 1e-9);
    }

    fn interior(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.02f64..1.0, d).prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn lattice_mass_sums_to_one(
            (t, p) in (1u64..=60, 2usize..=4).prop_flat_map(|(t, d)| (Just(t), interior(d)))
        ) {
            let p = Distribution::new(p).unwrap();
            let total: f64 = enumerate_lattice(t, p.dim(), DEFAULT_LATTICE_CAP)
                .unwrap()
                .map(|e| multinomial_log_prob(&e, &p).unwrap().exp())
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-10, "total {}", total);
        }
    }
}
