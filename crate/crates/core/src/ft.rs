//! Pauli-group error analysis and a seven-qubit CSS code.
//!
//! Realized gates are scored by expanding the error operator `U_E =
//! U_T†U_R` over the n-qubit Pauli group and aggregating squared
//! coefficient magnitudes by weight (the number of non-identity letters).
//! The [[7,3,1]] code supplies stabilizers, syndrome read-off, and
//! single-error correction as the fault-tolerance reference.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, UnitaryOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    fn from_digit(d: usize) -> Self {
        match d {
            0 => Self::I,
            1 => Self::X,
            2 => Self::Y,
            _ => Self::Z,
        }
    }

    fn digit(self) -> usize {
        match self {
            Self::I => 0,
            Self::X => 1,
            Self::Y => 2,
            Self::Z => 3,
        }
    }

    fn char(self) -> char {
        match self {
            Self::I => 'I',
            Self::X => 'X',
            Self::Y => 'Y',
            Self::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; qubit 1 is the leftmost letter
/// and the most significant bit of basis indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<PauliLetter>,
}

impl PauliString {
    pub fn new(letters: Vec<PauliLetter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidInput("empty Pauli string".into()));
        }
        Ok(Self { letters })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' => Ok(PauliLetter::I),
                'X' => Ok(PauliLetter::X),
                'Y' => Ok(PauliLetter::Y),
                'Z' => Ok(PauliLetter::Z),
                other => Err(Error::InvalidInput(format!("bad Pauli letter '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }

    /// Single-qubit error `letter` at `qubit` (1-based) on `n` qubits.
    pub fn single(n: usize, qubit: usize, letter: PauliLetter) -> Result<Self> {
        if qubit < 1 || qubit > n {
            return Err(Error::InvalidInput(format!(
                "qubit {qubit} outside 1..={n}"
            )));
        }
        let mut letters = vec![PauliLetter::I; n];
        letters[qubit - 1] = letter;
        Self::new(letters)
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != PauliLetter::I).count()
    }

    /// Base-4 index with qubit 1 as the most significant digit.
    pub fn code(&self) -> usize {
        self.letters.iter().fold(0, |acc, l| acc * 4 + l.digit())
    }

    pub fn from_code(code: usize, n: usize) -> Self {
        let mut letters = vec![PauliLetter::I; n];
        let mut c = code;
        for k in (0..n).rev() {
            letters[k] = PauliLetter::from_digit(c % 4);
            c /= 4;
        }
        Self { letters }
    }

    /// Bit masks driving the sparse action: `x_mask` flips (X and Y
    /// letters), `yz_mask` contributes `(-1)^{bit}` signs, plus the count
    /// of Y letters for the overall `i^{#Y}` factor.
    fn masks(&self) -> (usize, usize, u32) {
        let n = self.n();
        let mut x_mask = 0usize;
        let mut yz_mask = 0usize;
        let mut ys = 0u32;
        for (k, &l) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - k);
            match l {
                PauliLetter::I => {}
                PauliLetter::X => x_mask |= bit,
                PauliLetter::Y => {
                    x_mask |= bit;
                    yz_mask |= bit;
                    ys += 1;
                }
                PauliLetter::Z => yz_mask |= bit,
            }
        }
        (x_mask, yz_mask, ys)
    }

    /// Phase `φ(b)` in `P|b⟩ = φ(b)|b ⊕ x_mask⟩`.
    fn phase(b: usize, yz_mask: usize, ys: u32) -> Complex64 {
        let sign = if (b & yz_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let i_pow = match ys % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        i_pow * sign
    }

    /// Applies the string to a state vector in O(2^n).
    pub fn apply(&self, state: &CVec) -> Result<CVec> {
        let dim = 1usize << self.n();
        if state.len() != dim {
            return Err(Error::InvalidInput(format!(
                "state dimension {} does not match {} qubits",
                state.len(),
                self.n()
            )));
        }
        let (x_mask, yz_mask, ys) = self.masks();
        let mut out = CVec::zeros(dim);
        for b in 0..dim {
            out[b ^ x_mask] = Self::phase(b, yz_mask, ys) * state[b];
        }
        Ok(out)
    }

    /// `Tr(P†U)` via the sparse action, O(2^n).
    fn trace_against(&self, u: &CMat) -> Complex64 {
        let dim = 1usize << self.n();
        let (x_mask, yz_mask, ys) = self.masks();
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..dim {
            acc += Self::phase(b, yz_mask, ys).conj() * u[(b ^ x_mask, b)];
        }
        acc
    }

    /// Dense matrix form (test-scale sizes).
    pub fn to_matrix(&self) -> CMat {
        let dim = 1usize << self.n();
        let (x_mask, yz_mask, ys) = self.masks();
        let mut m = CMat::zeros(dim, dim);
        for b in 0..dim {
            m[(b ^ x_mask, b)] = Self::phase(b, yz_mask, ys);
        }
        m
    }

    /// Whether two strings anticommute: odd number of positions where both
    /// letters are non-identity and distinct.
    pub fn anticommutes_with(&self, other: &Self) -> Result<bool> {
        if self.n() != other.n() {
            return Err(Error::InvalidInput("Pauli strings of different size".into()));
        }
        let clashes = self
            .letters
            .iter()
            .zip(other.letters.iter())
            .filter(|(a, b)| **a != PauliLetter::I && **b != PauliLetter::I && a != b)
            .count();
        Ok(clashes % 2 == 1)
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.char())?;
        }
        Ok(())
    }
}

/// All 4^n Pauli coefficients of an operator: `c_P = 2^{-n} Tr(P†U)`,
/// stored by base-4 string code.
#[derive(Debug, Clone)]
pub struct PauliExpansion {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl PauliExpansion {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, p: &PauliString) -> Result<Complex64> {
        if p.n() != self.n {
            return Err(Error::InvalidInput("qubit count mismatch".into()));
        }
        Ok(self.coeffs[p.code()])
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliString, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(code, &c)| (PauliString::from_code(code, self.n), c))
    }

    /// `Σ_P c_P P`, the inverse of [`pauli_expand`] (dense; test scale).
    pub fn reconstruct(&self) -> CMat {
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for (p, c) in self.iter() {
            if c.norm() > 0.0 {
                m += p.to_matrix() * c;
            }
        }
        m
    }

    /// `Σ_P |c_P|²`; equals 1 for unitary input.
    pub fn total_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Expands an operator over the n-qubit Pauli group using the O(2^n)
/// per-string sparse trace.
pub fn pauli_expand(u: &CMat, n: usize) -> Result<PauliExpansion> {
    let dim = 1usize << n;
    if n == 0 || u.nrows() != dim || u.ncols() != dim {
        return Err(Error::InvalidInput(format!(
            "operator is {}x{}, expected 2^{n} square",
            u.nrows(),
            u.ncols()
        )));
    }
    let scale = 1.0 / dim as f64;
    let coeffs: Vec<Complex64> = (0..4usize.pow(n as u32))
        .into_par_iter()
        .map(|code| PauliString::from_code(code, n).trace_against(u) * scale)
        .collect();
    Ok(PauliExpansion { n, coeffs })
}

/// Mass of the expansion in each weight shell, `W_k = Σ_{weight(P)=k} |c_P|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliWeightSpectrum {
    w: Vec<f64>,
}

impl PauliWeightSpectrum {
    /// `W_0 .. W_n` as a slice.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }
}

pub fn weight_spectrum(expansion: &PauliExpansion) -> PauliWeightSpectrum {
    let mut w = vec![0.0; expansion.n + 1];
    for (p, c) in expansion.iter() {
        w[p.weight()] += c.norm_sqr();
    }
    PauliWeightSpectrum { w }
}

/// Error operator `U_E = U_T†U_R`; identity exactly when the realized gate
/// matches the target.
pub fn error_operator(u_t: &UnitaryOperator, u_r: &UnitaryOperator) -> Result<UnitaryOperator> {
    if u_t.dim() != u_r.dim() {
        return Err(Error::InvalidInput("target/realized dimension mismatch".into()));
    }
    UnitaryOperator::new(u_t.matrix().adjoint() * u_r.matrix())
}

/// Penalty weights λ_2..λ_n for multi-qubit error suppression.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyWeights {
    lambda: Vec<f64>,
}

impl PenaltyWeights {
    /// `lambda[k-2]` weights weight-k errors, k = 2..=n.
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidInput(
                "penalty weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { lambda })
    }

    /// Escalating defaults `λ_k = 10^{k-2}`.
    pub fn default_for(n: usize) -> Self {
        Self {
            lambda: (2..=n).map(|k| 10f64.powi(k as i32 - 2)).collect(),
        }
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }
}

/// `Re[2^{-n}Tr(U_T†U)] - Σ_{k≥2} λ_k W_k(U_T†U)`: gate fidelity minus
/// penalized multi-qubit error mass. Equals the phase-sensitive fidelity
/// when every penalized shell is empty.
pub fn penalized_objective(
    u: &UnitaryOperator,
    u_t: &UnitaryOperator,
    weights: &PenaltyWeights,
) -> Result<f64> {
    let dim = u.dim();
    if u_t.dim() != dim {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidInput(format!(
            "Pauli analysis needs a 2^n dimension, got {dim}"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if weights.lambda.len() != n - 1 {
        return Err(Error::InvalidInput(format!(
            "expected {} penalty weights (k = 2..={n}), got {}",
            n - 1,
            weights.lambda.len()
        )));
    }
    let fid = crate::bangbang::gate_fidelity(u, u_t, crate::bangbang::FidelityMode::PhaseSensitive)?;
    let u_e = error_operator(u_t, u)?;
    let spectrum = weight_spectrum(&pauli_expand(u_e.matrix(), n)?);
    let penalty: f64 = weights
        .lambda
        .iter()
        .zip(&spectrum.w[2..])
        .map(|(l, w)| l * w)
        .sum();
    Ok(fid - penalty)
}

/// The [[7,3,1]] CSS code: logical states on 7 qubits and the six
/// stabilizer generators (X-type first).
#[derive(Debug, Clone)]
pub struct CssCode {
    logical_zero: CVec,
    logical_one: CVec,
    stabilizers: Vec<PauliString>,
}

const EVEN_CODEWORDS: [&str; 8] = [
    "0000000", "0001111", "0110011", "1010101", "0111100", "1011010", "1100110", "1101001",
];

const STABILIZERS: [&str; 6] = [
    "IIIXXXX", "IXXIIXX", "XIXIXIX", "IIIZZZZ", "IZZIIZZ", "ZIZIZIZ",
];

impl CssCode {
    pub fn n(&self) -> usize {
        7
    }

    pub fn logical_zero(&self) -> &CVec {
        &self.logical_zero
    }

    pub fn logical_one(&self) -> &CVec {
        &self.logical_one
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    /// `α|0⟩_L + β|1⟩_L`, normalized.
    pub fn logical_state(&self, alpha: Complex64, beta: Complex64) -> Result<CVec> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidInput("zero logical amplitude".into()));
        }
        Ok((&self.logical_zero * alpha + &self.logical_one * beta).unscale(norm))
    }
}

/// Builds the code: `|0⟩_L` is the uniform superposition of the eight
/// even-weight codewords, `|1⟩_L` of their bitwise complements.
pub fn css_steane_code() -> CssCode {
    let dim = 1usize << 7;
    let amp = Complex64::new(1.0 / 8f64.sqrt(), 0.0);
    let mut zero = CVec::zeros(dim);
    let mut one = CVec::zeros(dim);
    for word in EVEN_CODEWORDS {
        let idx = usize::from_str_radix(word, 2).expect("binary codeword literal");
        zero[idx] = amp;
        one[idx ^ 0b111_1111] = amp;
    }
    let stabilizers = STABILIZERS
        .iter()
        .map(|s| PauliString::parse(s).expect("stabilizer literal"))
        .collect();
    CssCode {
        logical_zero: zero,
        logical_one: one,
        stabilizers,
    }
}

/// Reads off the six stabilizer eigenvalues of `state` (0 for +1, 1 for
/// -1), ordered as the generators are listed.
pub fn syndrome_extract(state: &CVec, code: &CssCode) -> Result<[u8; 6]> {
    let mut bits = [0u8; 6];
    for (i, stab) in code.stabilizers.iter().enumerate() {
        let mapped = stab.apply(state)?;
        let plus = (&mapped - state).norm();
        let minus = (&mapped + state).norm();
        bits[i] = if plus <= 1e-8 {
            0
        } else if minus <= 1e-8 {
            1
        } else {
            return Err(Error::IndeterminateSyndrome(format!(
                "state is not a ±1 eigenvector of stabilizer {stab} \
                 (residuals {plus:.3e} / {minus:.3e})"
            )));
        };
    }
    Ok(bits)
}

fn single_error_table(code: &CssCode) -> std::collections::BTreeMap<[u8; 6], PauliString> {
    let mut table = std::collections::BTreeMap::new();
    for qubit in 1..=7 {
        for letter in [PauliLetter::X, PauliLetter::Y, PauliLetter::Z] {
            let err = PauliString::single(7, qubit, letter).expect("in-range qubit");
            let mut syn = [0u8; 6];
            for (i, stab) in code.stabilizers.iter().enumerate() {
                syn[i] = err.anticommutes_with(stab).expect("equal size") as u8;
            }
            table.insert(syn, err);
        }
    }
    table
}

/// Corrects a single-qubit Pauli error by syndrome lookup; the inverse
/// Pauli is the error itself. Inputs whose syndrome has no table entry are
/// rejected as uncorrectable.
pub fn correct_single_error(state: &CVec, code: &CssCode) -> Result<CVec> {
    let syn = syndrome_extract(state, code)?;
    if syn == [0; 6] {
        return Ok(state.clone());
    }
    let table = single_error_table(code);
    match table.get(&syn) {
        Some(err) => err.apply(state),
        None => Err(Error::Uncorrectable(format!(
            "syndrome {syn:?} is not produced by any single-qubit error"
        ))),
    }
}
