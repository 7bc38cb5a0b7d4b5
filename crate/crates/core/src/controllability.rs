//! Dynamical Lie-algebra closure and the su(n) controllability test.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, HermitianOperator};

/// Default relative rank tolerance for basis adjoining.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Result of a Lie-closure computation on n x n generators.
#[derive(Debug, Clone, PartialEq)]
pub struct LieClosureReport {
    /// Achieved dimension of the generated real Lie algebra.
    pub dimension: usize,
    /// Dimension of u(n) = n².
    pub max_dimension: usize,
    /// Dimension of su(n) = n² - 1, the controllability target.
    pub traceless_dimension: usize,
    pub rank_tolerance: f64,
    /// Generation stopped by `dim_cap` with candidate pairs still pending.
    pub truncated: bool,
}

/// Computes the real Lie algebra generated by `{iH_m}`.
///
/// Each generator is first projected onto its traceless part `H -
/// (Tr H / n) I`: the trace component commutes with everything and only
/// contributes a global phase, and the controllability threshold is
/// su(n)-valued. The closure maintains a Hilbert-Schmidt-orthonormal basis
/// of skew-Hermitian matrices, adjoining commutators breadth-first over
/// pair index. A candidate joins the basis when its norm exceeds
/// `rank_tol` and its residual after (twice-applied) projection onto the
/// current span again exceeds `rank_tol`.
///
/// `dim_cap` defaults to n²; generation always terminates.
pub fn lie_closure(
    generators: &[HermitianOperator],
    rank_tol: f64,
    dim_cap: Option<usize>,
) -> Result<LieClosureReport> {
    if generators.is_empty() {
        return Err(Error::InvalidInput("no generators".into()));
    }
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidInput("rank tolerance must be positive".into()));
    }
    let n = generators[0].dim();
    if generators.iter().any(|g| g.dim() != n) {
        return Err(Error::InvalidInput(
            "generators must share one dimension".into(),
        ));
    }
    let cap = dim_cap.unwrap_or(n * n);
    let traceless_dimension = n * n - 1;

    let mut basis: Vec<CMat> = Vec::new();
    // FIFO of unprocessed index pairs (i, j), i < j.
    let mut pairs: std::collections::VecDeque<(usize, usize)> = std::collections::VecDeque::new();

    let adjoin = |basis: &mut Vec<CMat>, candidate: CMat| -> bool {
        let norm = candidate.norm();
        if norm <= rank_tol {
            return false;
        }
        let mut c = candidate.unscale(norm);
        for _ in 0..2 {
            for b in basis.iter() {
                // Real span: skew-Hermitian pairs have real HS inner product.
                let coeff: f64 = b
                    .iter()
                    .zip(c.iter())
                    .map(|(x, y)| (x.conj() * y).re)
                    .sum();
                c -= b.scale(coeff);
            }
        }
        let residual = c.norm();
        if residual > rank_tol {
            basis.push(c.unscale(residual));
            true
        } else {
            false
        }
    };

    for g in generators {
        let m = g.matrix();
        let trace_part = m.trace() / Complex64::new(n as f64, 0.0);
        let traceless = m - CMat::identity(n, n) * trace_part;
        let skew = traceless.map(|z| Complex64::new(0.0, 1.0) * z);
        if basis.len() < cap && adjoin(&mut basis, skew) {
            let k = basis.len() - 1;
            for i in 0..k {
                pairs.push_back((i, k));
            }
        }
    }

    let mut truncated = false;
    while let Some((i, j)) = pairs.pop_front() {
        if basis.len() >= traceless_dimension.min(cap) {
            // Traceless skew-Hermitian span is already maximal (or the cap
            // is reached with work pending).
            truncated = basis.len() >= cap && basis.len() < traceless_dimension;
            break;
        }
        let c = &basis[i] * &basis[j] - &basis[j] * &basis[i];
        if adjoin(&mut basis, c) {
            let k = basis.len() - 1;
            for p in 0..k {
                pairs.push_back((p, k));
            }
        }
    }

    Ok(LieClosureReport {
        dimension: basis.len(),
        max_dimension: n * n,
        traceless_dimension,
        rank_tolerance: rank_tol,
        truncated,
    })
}

/// Complete controllability: the closure contains su(n).
pub fn is_controllable(report: &LieClosureReport) -> bool {
    report.dimension >= report.traceless_dimension
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z};
    use crate::spin::{build_switch_pair, heisenberg_to_chain, ChainSpec, Coupling};

    fn herm(m: CMat) -> HermitianOperator {
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn abelian_single_generator() {
        let r = lie_closure(&[herm(pauli_x())], DEFAULT_RANK_TOL, None).unwrap();
        assert_eq!(r.dimension, 1);
        assert!(!is_controllable(&r));
        assert!(!r.truncated);
    }

    #[test]
    fn pauli_pair_closes_su2() {
        let r = lie_closure(&[herm(pauli_x()), herm(pauli_z())], DEFAULT_RANK_TOL, None).unwrap();
        assert_eq!(r.dimension, 3);
        assert_eq!(r.traceless_dimension, 3);
        assert!(is_controllable(&r));
    }

    #[test]
    fn single_chain_hamiltonian_uncontrollable() {
        let spec = ChainSpec::new(vec![0.1, -0.4, 0.3], vec![1.0, 0.7]).unwrap();
        let h0 = crate::spin::build_chain_hamiltonian(&spec);
        let r = lie_closure(&[h0], DEFAULT_RANK_TOL, None).unwrap();
        assert_eq!(r.dimension, 1);
        assert!(!is_controllable(&r));
    }

    #[test]
    fn switched_heisenberg_chain_closes_su4() {
        let spec = heisenberg_to_chain(&[1.0; 3], 4, Coupling::Heisenberg).unwrap();
        let (h_off, h_on) = build_switch_pair(&spec, 1).unwrap();
        let r = lie_closure(&[h_off, h_on], DEFAULT_RANK_TOL, None).unwrap();
        assert_eq!(r.dimension, 15);
        assert!(is_controllable(&r));
    }

    #[test]
    fn two_site_switch_with_split_energies() {
        let spec = ChainSpec::new(vec![0.5, -0.5], vec![1.0]).unwrap();
        let (h_off, h_on) = build_switch_pair(&spec, 1).unwrap();
        let r = lie_closure(&[h_off, h_on], DEFAULT_RANK_TOL, None).unwrap();
        assert_eq!(r.dimension, 3);
        assert!(is_controllable(&r));
    }

    #[test]
    fn degenerate_two_site_heisenberg_collapses() {
        // H_on of the uniform two-site Heisenberg chain is a multiple of
        // the identity; its traceless part vanishes and only H_off's X
        // component survives.
        let spec = heisenberg_to_chain(&[1.0], 2, Coupling::Heisenberg).unwrap();
        let (h_off, h_on) = build_switch_pair(&spec, 1).unwrap();
        let r = lie_closure(&[h_off, h_on], DEFAULT_RANK_TOL, None).unwrap();
        assert_eq!(r.dimension, 1);
        assert!(!is_controllable(&r));
    }

    #[test]
    fn scaling_leaves_dimension_unchanged() {
        let g1 = [herm(pauli_x()), herm(pauli_z())];
        let g2 = [herm(pauli_x().scale(2.5)), herm(pauli_z().scale(0.03))];
        let d1 = lie_closure(&g1, DEFAULT_RANK_TOL, None).unwrap().dimension;
        let d2 = lie_closure(&g2, DEFAULT_RANK_TOL, None).unwrap().dimension;
        assert_eq!(d1, d2);
    }

    #[test]
    fn cap_truncates_generation() {
        let r = lie_closure(&[herm(pauli_x()), herm(pauli_z())], DEFAULT_RANK_TOL, Some(2))
            .unwrap();
        assert_eq!(r.dimension, 2);
        assert!(r.truncated);
    }
}
