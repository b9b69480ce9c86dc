//! Reproducible i.i.d. sampling of empirical distributions.
//!
//! Every random stream is keyed by `(seed, stream_id)` on a ChaCha
//! generator, so a Monte Carlo run split into blocks draws the same numbers
//! regardless of how the blocks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};

use crate::simplex::{Distribution, EmpiricalDistribution};

/// A ChaCha generator on stream `stream_id` of `seed`.
pub fn stream_rng(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Draws multinomial counts of `t` samples from `p` into `out` by successive
/// conditional binomials.
pub fn sample_counts_into<R: Rng + ?Sized>(p: &[f64], t: u64, rng: &mut R, out: &mut [u64]) {
    out.iter_mut().for_each(|c| *c = 0);
    let last = p.iter().rposition(|&w| w > 0.0).expect("distribution has mass");
    let mut left = t;
    let mut mass_left = 1.0f64;
    for i in 0..last {
        if left == 0 {
            return;
        }
        if p[i] <= 0.0 {
            continue;
        }
        let prob = (p[i] / mass_left).clamp(0.0, 1.0);
        let draw = if prob >= 1.0 {
            left
        } else {
            Binomial::new(left, prob).expect("valid binomial").sample(rng)
        };
        out[i] = draw;
        left -= draw;
        mass_left -= p[i];
    }
    out[last] = left;
}

/// `T` i.i.d. draws from `p`, reduced to scenario counts. Deterministic in
/// `seed`.
pub fn sample_empirical(p: &Distribution, t: u64, seed: u64) -> EmpiricalDistribution {
    let mut rng = stream_rng(seed, 0);
    let mut counts = vec![0u64; p.dim()];
    sample_counts_into(p.weights(), t.max(1), &mut rng, &mut counts);
    EmpiricalDistribution::from_counts(counts).expect("T >= 1")
}
