//! Shared inputs for the benchmarks under `benches/`.

use lphvg_core::generators::{gen_iid, IidFamily, IidSpec};
use lphvg_core::{RngConfig, TimeSeries};

/// Uniform i.i.d. series of length `n`.
pub fn uniform(n: usize, seed: u64) -> TimeSeries {
    gen_iid(&IidSpec {
        family: IidFamily::Uniform,
        n,
        rng: RngConfig::new(seed, 0),
    })
    .expect("uniform generator accepts any length")
}
