//! Model Hamiltonians: the single-excitation chain, its binary switch
//! actuator, and the electron-nuclear (1e1n) hyperfine system.
//!
//! Chain quantities (`E`, `d`) are angular frequencies in arbitrary units;
//! hyperfine constructors take ordinary frequencies (GHz/MHz), multiply by
//! 2π, and return operators in rad/ns.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, identity2, pauli_x, pauli_y, pauli_z, tensor_product, CMat,
    HermitianOperator,
};

/// Tridiagonal chain data: on-site energies `E` (length N) and positive
/// nearest-neighbour couplings `d` (length N-1).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    e: Vec<f64>,
    d: Vec<f64>,
}

impl ChainSpec {
    pub fn new(e: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if e.is_empty() {
            return Err(Error::InvalidInput("chain needs at least one site".into()));
        }
        if d.len() + 1 != e.len() {
            return Err(Error::InvalidInput(format!(
                "coupling vector d must have length N-1 = {}, got {}",
                e.len() - 1,
                d.len()
            )));
        }
        if e.iter().any(|x| !x.is_finite()) || d.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite chain parameters".into()));
        }
        if d.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidInput("couplings d_n must be positive".into()));
        }
        Ok(Self { e, d })
    }

    pub fn n(&self) -> usize {
        self.e.len()
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }
}

/// Exchange model for [`heisenberg_to_chain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Isotropic exchange `(J_n/2)(XX + YY + ZZ)`.
    Heisenberg,
    /// Isotropic XY exchange `(J_n/2)(XX + YY)`.
    Xy,
}

/// N x N single-excitation Hamiltonian: diagonal `E`, off-diagonals `d`.
pub fn build_chain_hamiltonian(spec: &ChainSpec) -> HermitianOperator {
    let n = spec.n();
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(spec.e[i], 0.0);
    }
    for (i, &di) in spec.d.iter().enumerate() {
        m[(i, i + 1)] = Complex64::new(di, 0.0);
        m[(i + 1, i)] = Complex64::new(di, 0.0);
    }
    HermitianOperator::new(m).expect("real symmetric tridiagonal construction")
}

/// Reduces a spin-1/2 exchange chain with couplings `J` to its
/// single-excitation [`ChainSpec`].
///
/// The full-register Hamiltonian `Σ_n (J_n/2)(X_nX_{n+1} + Y_nY_{n+1}
/// [+ Z_nZ_{n+1}])` conserves total magnetization; restricted to the span
/// of single-flip states (ordered by flip position) it is tridiagonal with
/// hopping `d_n = J_n` and on-site energies from the ZZ terms:
/// `E_m = Σ_n J_n/2 - Σ_{n: m ∈ {n,n+1}} J_n` for Heisenberg, `E = 0` for XY.
pub fn heisenberg_to_chain(j: &[f64], n: usize, coupling: Coupling) -> Result<ChainSpec> {
    if n < 2 {
        return Err(Error::InvalidInput("chain needs at least two sites".into()));
    }
    if j.len() != n - 1 {
        return Err(Error::InvalidInput(format!(
            "J must have length N-1 = {}, got {}",
            n - 1,
            j.len()
        )));
    }
    if j.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::InvalidInput("couplings J_n must be positive".into()));
    }
    let e = match coupling {
        Coupling::Xy => vec![0.0; n],
        Coupling::Heisenberg => {
            let half_sum: f64 = j.iter().map(|x| x / 2.0).sum();
            (1..=n)
                .map(|m| {
                    let touching: f64 = j
                        .iter()
                        .enumerate()
                        .filter(|&(bond, _)| m == bond + 1 || m == bond + 2)
                        .map(|(_, &x)| x)
                        .sum();
                    half_sum - touching
                })
                .collect()
        }
    };
    ChainSpec::new(e, j.to_vec())
}

/// Binary switch on coupling `r` (1-based): returns `(H_off, H_on)` with
/// `H_off = H₀` and `H_on = H₀ + H_r`, where `H_r = -d_r(e_{r,r+1} +
/// e_{r+1,r})` annuls the coupling between sites r and r+1.
pub fn build_switch_pair(
    spec: &ChainSpec,
    r: usize,
) -> Result<(HermitianOperator, HermitianOperator)> {
    if r < 1 || r > spec.d.len() {
        return Err(Error::InvalidInput(format!(
            "switch index r must lie in 1..={}, got {r}",
            spec.d.len()
        )));
    }
    let h_off = build_chain_hamiltonian(spec);
    let mut on = h_off.matrix().clone();
    on[(r - 1, r)] = Complex64::new(0.0, 0.0);
    on[(r, r - 1)] = Complex64::new(0.0, 0.0);
    let h_on = HermitianOperator::new(on).expect("zeroing a symmetric pair keeps symmetry");
    Ok((h_off, h_on))
}

/// Full 2^N-dimensional exchange Hamiltonian, for cross-checking the
/// single-excitation reduction. Site 1 is the leftmost tensor factor.
pub fn full_exchange_hamiltonian(j: &[f64], n: usize, coupling: Coupling) -> Result<HermitianOperator> {
    if n < 2 || j.len() != n - 1 {
        return Err(Error::InvalidInput("bad chain shape".into()));
    }
    let dim = 1usize << n;
    let site_op = |k: usize, op: &CMat| -> CMat {
        let mut acc = CMat::identity(1, 1);
        for site in 1..=n {
            let factor = if site == k { op.clone() } else { identity2() };
            acc = tensor_product(&acc, &factor);
        }
        acc
    };
    let mut h = CMat::zeros(dim, dim);
    for (bond, &jn) in j.iter().enumerate() {
        let (a, b) = (bond + 1, bond + 2);
        let mut term = site_op(a, &pauli_x()) * site_op(b, &pauli_x())
            + site_op(a, &pauli_y()) * site_op(b, &pauli_y());
        if coupling == Coupling::Heisenberg {
            term += site_op(a, &pauli_z()) * site_op(b, &pauli_z());
        }
        h += term.scale(jn / 2.0);
    }
    HermitianOperator::new(h)
}

/// Basis index of the single-flip state with the flipped spin at site `m`
/// (1-based, site 1 = most significant bit, spin-up = 0).
pub fn single_flip_index(m: usize, n: usize) -> usize {
    1 << (n - m)
}

/// Extracts the N x N single-excitation block of a full-register operator,
/// rows and columns ordered by flip position.
pub fn single_excitation_block(h_full: &CMat, n: usize) -> CMat {
    let mut b = CMat::zeros(n, n);
    for row in 1..=n {
        for col in 1..=n {
            b[(row - 1, col - 1)] = h_full[(single_flip_index(row, n), single_flip_index(col, n))];
        }
    }
    b
}

/// Hyperfine constants of the electron-nuclear system, in ordinary
/// frequency units (GHz for the electron Zeeman, MHz for the rest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineParams {
    pub nu_s_ghz: f64,
    pub nu_n_mhz: f64,
    pub a_zx_mhz: f64,
    pub a_zz_mhz: f64,
}

impl Default for HyperfineParams {
    /// Malonic-acid radical constants.
    fn default() -> Self {
        Self {
            nu_s_ghz: 11.885,
            nu_n_mhz: 18.1,
            a_zx_mhz: 14.2,
            a_zz_mhz: -42.7,
        }
    }
}

/// Reference frame for the 1e1n system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    /// Co-rotating with the electron Zeeman frequency; drops the ν_s S_z
    /// term under the rotating-wave approximation. Lab-frame time stepping
    /// would need to resolve 11.885 GHz.
    ElectronRotating,
}

/// Builds the 4x4 electron⊗nuclear Hamiltonian pair `(H_drift,
/// H_controls)` in rad/ns, basis |electron⟩⊗|nucleus⟩ with ↑ = index 0.
///
/// `H_drift/2π = ν_s S_z + ν_n I_z + A_zx S_z I_x + A_zz S_z I_z` with
/// spin-1/2 operators `S_k = (σ_k ⊗ I)/2`, `I_k = (I ⊗ σ_k)/2`; the
/// controls are the unit-amplitude electron drive quadratures `2π S_x`,
/// `2π S_y`.
pub fn build_1e1n_hamiltonian(
    p: &HyperfineParams,
    frame: Frame,
) -> Result<(HermitianOperator, Vec<HermitianOperator>)> {
    for x in [p.nu_s_ghz, p.nu_n_mhz, p.a_zx_mhz, p.a_zz_mhz] {
        if !x.is_finite() {
            return Err(Error::InvalidInput("non-finite hyperfine parameter".into()));
        }
    }
    let two_pi = std::f64::consts::TAU;
    let nu_s = p.nu_s_ghz;
    let nu_n = p.nu_n_mhz * 1e-3;
    let a_zx = p.a_zx_mhz * 1e-3;
    let a_zz = p.a_zz_mhz * 1e-3;

    let s_z = tensor_product(&pauli_z(), &identity2()).scale(0.5);
    let i_z = tensor_product(&identity2(), &pauli_z()).scale(0.5);
    let s_z_i_x = tensor_product(&pauli_z(), &pauli_x()).scale(0.25);
    let s_z_i_z = tensor_product(&pauli_z(), &pauli_z()).scale(0.25);

    let mut drift = i_z.scale(nu_n) + s_z_i_x.scale(a_zx) + s_z_i_z.scale(a_zz);
    if frame == Frame::Lab {
        drift += s_z.scale(nu_s);
    }
    drift = drift.scale(two_pi);

    let s_x = tensor_product(&pauli_x(), &identity2()).scale(0.5);
    let s_y = tensor_product(&pauli_y(), &identity2()).scale(0.5);
    let controls = vec![
        HermitianOperator::new(s_x.scale(two_pi))?,
        HermitianOperator::new(s_y.scale(two_pi))?,
    ];
    Ok((HermitianOperator::new(drift)?, controls))
}

/// Eigenvalues of a Hermitian operator, ascending.
pub fn eigenvalues(h: &HermitianOperator) -> DVector<f64> {
    let (mut w, _) = linalg::hermitian_eigen(h);
    w.as_mut_slice()
        .sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    w
}
