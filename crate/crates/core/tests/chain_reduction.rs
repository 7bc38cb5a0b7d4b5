//! Cross-checks the single-excitation chain reduction against the full
//! 2^N exchange Hamiltonian.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qctl_core::linalg::{max_abs_entry, tensor_product, CMat};
use qctl_core::spin::{
    build_chain_hamiltonian, full_exchange_hamiltonian, heisenberg_to_chain, single_excitation_block,
    Coupling,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_couplings(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n - 1).map(|_| rng.random_range(0.2..2.0)).collect()
}

#[test]
fn reduced_chain_matches_full_hamiltonian_block() {
    for coupling in [Coupling::Heisenberg, Coupling::Xy] {
        for n in 2..=6 {
            for trial in 0..3u64 {
                let j = random_couplings(n, 1000 + 17 * n as u64 + trial);
                let full = full_exchange_hamiltonian(&j, n, coupling).unwrap();
                let block = single_excitation_block(full.matrix(), n);
                let spec = heisenberg_to_chain(&j, n, coupling).unwrap();
                let chain = build_chain_hamiltonian(&spec);
                let gap = max_abs_entry(&(block - chain.matrix()));
                assert!(
                    gap <= 1e-12,
                    "{coupling:?} N={n} trial {trial}: block deviates by {gap:.3e}"
                );
            }
        }
    }
}

#[test]
fn full_hamiltonian_commutes_with_total_magnetization() {
    let z = qctl_core::linalg::pauli_z();
    let id = qctl_core::linalg::identity2();
    for coupling in [Coupling::Heisenberg, Coupling::Xy] {
        for n in 2..=5 {
            let j = random_couplings(n, 2000 + n as u64);
            let full = full_exchange_hamiltonian(&j, n, coupling).unwrap();
            let dim = 1usize << n;
            let mut mag: CMat = DMatrix::zeros(dim, dim);
            for site in 0..n {
                let mut term: CMat = DMatrix::identity(1, 1);
                for k in 0..n {
                    let factor = if k == site { &z } else { &id };
                    term = tensor_product(&term, factor);
                }
                mag += term * Complex64::new(0.5, 0.0);
            }
            let comm = full.matrix() * &mag - &mag * full.matrix();
            assert!(
                max_abs_entry(&comm) <= 1e-12,
                "{coupling:?} N={n}: magnetization not conserved"
            );
        }
    }
}

#[test]
fn excitation_block_picks_single_flip_states() {
    let n = 4;
    let j = vec![1.0, 0.5, 1.5];
    let full = full_exchange_hamiltonian(&j, n, Coupling::Heisenberg).unwrap();
    let block = single_excitation_block(full.matrix(), n);
    assert_eq!(block.nrows(), n);
    for m in 1..=n {
        let idx = qctl_core::spin::single_flip_index(m, n);
        assert_eq!(
            block[(m - 1, m - 1)],
            full.matrix()[(idx, idx)],
            "diagonal of site {m} should come from basis state {idx}"
        );
    }
}
