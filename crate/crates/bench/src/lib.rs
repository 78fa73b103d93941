//! Shared inputs for the benchmarks.

use atomloss::{apply_loss, encode, insert_fresh, DensityMatrix, LogicalQubit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Post-reinsertion states for `n` random logical qubits, cycling through
/// the four loss sites.
pub fn reinserted_states(n: usize, seed: u64) -> Vec<(usize, DensityMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let site = i % 4 + 1;
            let rho = encode(&LogicalQubit::random(&mut rng));
            let rho = insert_fresh(&apply_loss(&rho, site).expect("site in range"), site).expect("site in range");
            (site, rho)
        })
        .collect()
}

/// Maximally mixed state used for the partial-trace timings.
pub fn mixed(n_qubits: usize) -> DensityMatrix {
    DensityMatrix::maximally_mixed(n_qubits)
}
