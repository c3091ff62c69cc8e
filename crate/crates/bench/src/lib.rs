//! Instances shared by the criterion benchmarks in `benches/`.

use radon_core::combinat::KSet;
use radon_core::netio::{self, NoiseScope, Observations};

/// Basketball observations at noise level `eps`.
pub fn basketball(eps: f64) -> Observations {
    netio::basketball_preset().generate(eps, 7).expect("preset is valid").0
}

/// `count` disjoint cliques of sizes 3, 4, 5 in turn on `n` nodes with
/// off-support noise `eps`.
pub fn sparse_planted(n: usize, count: usize, eps: f64) -> Observations {
    let mut at = 0;
    let cliques: Vec<(KSet, f64)> = (0..count)
        .map(|i| {
            let s = 3 + i % 3;
            let c = KSet::range(at, s);
            at += s;
            (c, 1.0 + (i % 4) as f64 * 0.5)
        })
        .collect();
    assert!(at <= n, "{count} cliques do not fit on {n} nodes");
    netio::gen_planted(n, 2, &cliques, eps, 11, NoiseScope::OffSupport).expect("valid instance").0
}
