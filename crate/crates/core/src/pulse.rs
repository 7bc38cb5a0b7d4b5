//! Piecewise-constant pulse shaping with exact gradients (GRAPE-style).
//!
//! A pulse holds one amplitude per (segment, channel); the propagator is
//!
//! ```text
//! U(u) = U_K ... U_2 U_1,   U_k = exp(-i dt (H_drift + sum_c u[k][c] H_c))
//! ```
//!
//! (last segment leftmost). Objectives are state transfer
//! `|<goal| U |psi0>|^2` or a phase-invariant gate overlap
//! `|Tr(U_T' U)|^2 / d^2`. Gradients are exact: each segment exponential
//! is differentiated in its eigenbasis, so no finite-difference or
//! commutator-truncation tolerance enters.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, pauli_x, pauli_y, pauli_z, spectral_propagator, CMat, CVec,
    HermitianOperator, UnitaryOperator,
};
use crate::spin::{build_1e1n_hamiltonian, Frame, HyperfineParams};
use crate::stream::mix_seed;

/// Gradient norm below which the ascent declares convergence.
pub const GRADIENT_STOP: f64 = 1e-8;

/// A piecewise-constant control waveform: segment duration and a
/// segments x channels amplitude table.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseProgram {
    dt: f64,
    amplitudes: Vec<Vec<f64>>,
}

impl PulseProgram {
    /// Builds a program; `dt > 0`, at least one segment, rectangular and
    /// finite amplitude rows.
    pub fn new(dt: f64, amplitudes: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!(
                "segment duration must be positive and finite, got {dt}"
            )));
        }
        let Some(first) = amplitudes.first() else {
            return Err(Error::InvalidInput(
                "pulse needs at least one segment".into(),
            ));
        };
        let channels = first.len();
        for (k, row) in amplitudes.iter().enumerate() {
            if row.len() != channels {
                return Err(Error::InvalidInput(format!(
                    "segment {k} has {} channels, segment 0 has {channels}",
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "segment {k} contains a non-finite amplitude"
                )));
            }
        }
        Ok(Self { dt, amplitudes })
    }

    /// A zero pulse with the given shape.
    pub fn zeros(dt: f64, segments: usize, channels: usize) -> Result<Self> {
        Self::new(dt, vec![vec![0.0; channels]; segments])
    }

    /// Segment duration.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Amplitude table, segments x channels.
    pub fn amplitudes(&self) -> &[Vec<f64>] {
        &self.amplitudes
    }

    /// Number of segments.
    pub fn segments(&self) -> usize {
        self.amplitudes.len()
    }

    /// Number of control channels.
    pub fn channels(&self) -> usize {
        self.amplitudes[0].len()
    }

    /// Total duration `segments * dt`.
    pub fn duration(&self) -> f64 {
        self.dt * self.segments() as f64
    }
}

/// What the optimizer drives the propagator toward.
#[derive(Debug, Clone)]
pub enum Objective {
    /// Maximize `|<goal| U |initial>|^2`.
    StateTransfer { initial: CVec, goal: CVec },
    /// Maximize `|Tr(target' U)|^2 / d^2` (global phase ignored).
    Gate { target: UnitaryOperator },
}

/// Drift, control channels, objective, and time discretization.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    drift: HermitianOperator,
    controls: Vec<HermitianOperator>,
    objective: Objective,
    horizon: f64,
    segments: usize,
    amplitude_bound: Option<f64>,
}

impl ControlProblem {
    /// Builds a problem; dimensions must agree, objective states must be
    /// unit vectors, `horizon > 0`, `segments >= 1`.
    pub fn new(
        drift: HermitianOperator,
        controls: Vec<HermitianOperator>,
        objective: Objective,
        horizon: f64,
        segments: usize,
    ) -> Result<Self> {
        let n = drift.dim();
        for (c, h) in controls.iter().enumerate() {
            if h.dim() != n {
                return Err(Error::InvalidInput(format!(
                    "control {c} has dimension {}, drift has {n}",
                    h.dim()
                )));
            }
        }
        match &objective {
            Objective::StateTransfer { initial, goal } => {
                if initial.len() != n || goal.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "objective states have lengths {} and {}, dimension is {n}",
                        initial.len(),
                        goal.len()
                    )));
                }
                for (name, v) in [("initial", initial), ("goal", goal)] {
                    if (v.norm() - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidInput(format!(
                            "{name} state has norm {:.12}, expected 1",
                            v.norm()
                        )));
                    }
                }
            }
            Objective::Gate { target } => {
                if target.dim() != n {
                    return Err(Error::InvalidInput(format!(
                        "target gate has dimension {}, drift has {n}",
                        target.dim()
                    )));
                }
            }
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if segments == 0 {
            return Err(Error::InvalidInput("need at least one segment".into()));
        }
        Ok(Self {
            drift,
            controls,
            objective,
            horizon,
            segments,
            amplitude_bound: None,
        })
    }

    /// Adds a symmetric amplitude bound `|u| <= u_max` enforced by
    /// projection during optimization.
    pub fn with_amplitude_bound(mut self, u_max: f64) -> Result<Self> {
        if !(u_max > 0.0) || !u_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "amplitude bound must be positive and finite, got {u_max}"
            )));
        }
        self.amplitude_bound = Some(u_max);
        Ok(self)
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    /// The drift Hamiltonian.
    pub fn drift(&self) -> &HermitianOperator {
        &self.drift
    }

    /// The control Hamiltonians.
    pub fn controls(&self) -> &[HermitianOperator] {
        &self.controls
    }

    /// The optimization objective.
    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    /// Total evolution time.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of piecewise-constant segments.
    pub fn segments(&self) -> usize {
        self.segments
    }

    /// Segment duration `horizon / segments`.
    pub fn dt(&self) -> f64 {
        self.horizon / self.segments as f64
    }

    /// The amplitude bound, if any.
    pub fn amplitude_bound(&self) -> Option<f64> {
        self.amplitude_bound
    }
}

fn check_shape(p: &ControlProblem, u: &PulseProgram) -> Result<()> {
    if u.segments() != p.segments || u.channels() != p.controls.len() {
        return Err(Error::InvalidInput(format!(
            "pulse is {}x{}, problem expects {}x{}",
            u.segments(),
            u.channels(),
            p.segments,
            p.controls.len()
        )));
    }
    let dt = p.dt();
    if (u.dt() - dt).abs() > 1e-9 * dt.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "pulse dt {} does not match problem dt {}",
            u.dt(),
            dt
        )));
    }
    Ok(())
}

fn segment_hamiltonian(p: &ControlProblem, row: &[f64]) -> CMat {
    let mut h = p.drift.matrix().clone();
    for (c, hc) in p.controls.iter().enumerate() {
        h += hc.matrix() * Complex64::new(row[c], 0.0);
    }
    h
}

/// Per-segment eigendecompositions and unitaries for pulse `u`.
fn segment_data(p: &ControlProblem, u: &PulseProgram) -> Result<Vec<(DVector<f64>, CMat, CMat)>> {
    let dt = p.dt();
    let mut out = Vec::with_capacity(p.segments);
    for row in u.amplitudes() {
        let h = HermitianOperator::new(segment_hamiltonian(p, row))?;
        let (w, v) = hermitian_eigen(&h);
        let uk = spectral_propagator(&w, &v, dt);
        out.push((w, v, uk));
    }
    Ok(out)
}

/// Total propagator `U = U_K ... U_1`, factors ordered last segment
/// leftmost.
pub fn propagate_piecewise(p: &ControlProblem, u: &PulseProgram) -> Result<UnitaryOperator> {
    check_shape(p, u)?;
    let n = p.dim();
    let mut total = CMat::identity(n, n);
    for (_, _, uk) in segment_data(p, u)? {
        total = uk * total;
    }
    UnitaryOperator::new(total)
}

fn objective_from_propagator(p: &ControlProblem, u_total: &CMat) -> f64 {
    match &p.objective {
        Objective::StateTransfer { initial, goal } => {
            let overlap = goal.dotc(&(u_total * initial));
            overlap.norm_sqr()
        }
        Objective::Gate { target } => {
            let d = p.dim() as f64;
            let z = (target.matrix().adjoint() * u_total).trace() / Complex64::new(d, 0.0);
            z.norm_sqr()
        }
    }
}

/// Objective value of pulse `u`: transfer probability or phase-invariant
/// gate overlap, both in `[0, 1]`.
pub fn objective_fidelity(p: &ControlProblem, u: &PulseProgram) -> Result<f64> {
    let u_total = propagate_piecewise(p, u)?;
    Ok(objective_from_propagator(p, u_total.matrix()))
}

/// Transfer probability `|<goal| U(u) |initial>|^2`.
///
/// Errors with a wrong-objective error when the problem optimizes a gate.
pub fn transfer_fidelity(p: &ControlProblem, u: &PulseProgram) -> Result<f64> {
    match &p.objective {
        Objective::StateTransfer { .. } => objective_fidelity(p, u),
        Objective::Gate { .. } => Err(Error::WrongObjective(
            "transfer_fidelity needs a state-transfer objective, this problem optimizes a gate"
                .into(),
        )),
    }
}

/// Entrywise divided-difference table Psi_jk = (e^{l_j} - e^{l_k}) /
/// (l_j - l_k) for l_j = -i dt w_j, with the small-gap branch
/// e^{(l_j+l_k)/2} (1 + D^2/24).
fn divided_difference_table(w: &DVector<f64>, dt: f64) -> CMat {
    let n = w.len();
    CMat::from_fn(n, n, |j, k| {
        let lj = Complex64::new(0.0, -dt * w[j]);
        let lk = Complex64::new(0.0, -dt * w[k]);
        let delta = lj - lk;
        if delta.norm() < 1e-6 {
            let mid = (lj + lk) * Complex64::new(0.5, 0.0);
            mid.exp() * (Complex64::new(1.0, 0.0) + delta * delta / Complex64::new(24.0, 0.0))
        } else {
            (lj.exp() - lk.exp()) / delta
        }
    })
}

/// Exact objective gradient with respect to every amplitude, shaped
/// segments x channels.
///
/// Each segment exponential is differentiated in its eigenbasis via the
/// divided-difference (Daleckii-Krein) formula, then contracted with the
/// fixed prefix and suffix propagators.
pub fn fidelity_gradient(p: &ControlProblem, u: &PulseProgram) -> Result<Vec<Vec<f64>>> {
    check_shape(p, u)?;
    let n = p.dim();
    let k_segs = p.segments;
    let dt = p.dt();
    let data = segment_data(p, u)?;

    let mut pre = Vec::with_capacity(k_segs + 1);
    pre.push(CMat::identity(n, n));
    for k in 0..k_segs {
        let next = &data[k].2 * &pre[k];
        pre.push(next);
    }
    let mut suf = vec![CMat::identity(n, n); k_segs];
    for k in (0..k_segs.saturating_sub(1)).rev() {
        suf[k] = &suf[k + 1] * &data[k + 1].2;
    }
    let u_total = &pre[k_segs];

    // dF/du = 2 Re[sum_{jl} W_{jl} (Psi ∘ M)_{jl}] with M = V'(-i dt H_c)V;
    // the weight table W folds in the objective's outer sensitivity.
    let mut grad = vec![vec![0.0; p.controls.len()]; k_segs];
    for k in 0..k_segs {
        let (w, v, _) = &data[k];
        let psi_table = divided_difference_table(w, dt);
        let weight_table: CMat = match &p.objective {
            Objective::StateTransfer { initial, goal } => {
                // F = |o|^2, o = <g|U|i>; do = b' (Psi∘M) e with
                // b = V'(suf' g), e = V'(pre i); W_{jl} = conj(o b_j) e_l.
                let overlap = goal.dotc(&(u_total * initial));
                let ket = v.adjoint() * (&pre[k] * initial);
                let bra = v.adjoint() * (suf[k].adjoint() * goal);
                CMat::from_fn(n, n, |j, l| (overlap * bra[j]).conj() * ket[l])
            }
            Objective::Gate { target } => {
                // F = |z|^2, z = Tr(T'U)/d; dz = Tr(G (Psi∘M))/d with
                // G = V'(pre T' suf)V; W = conj(z) G^T / d.
                let d = Complex64::new(p.dim() as f64, 0.0);
                let z = (target.matrix().adjoint() * u_total).trace() / d;
                let g_mat = v.adjoint() * (&pre[k] * target.matrix().adjoint() * &suf[k]) * v;
                g_mat.transpose() * (z.conj() / d)
            }
        };
        for (c, hc) in p.controls.iter().enumerate() {
            let m = v.adjoint() * (hc.matrix() * Complex64::new(0.0, -dt)) * v;
            let dz: Complex64 = m
                .component_mul(&psi_table)
                .component_mul(&weight_table)
                .sum();
            grad[k][c] = 2.0 * dz.re;
        }
    }
    Ok(grad)
}

fn clamp_to_bound(u: &mut [Vec<f64>], bound: Option<f64>) {
    if let Some(b) = bound {
        for row in u.iter_mut() {
            for x in row.iter_mut() {
                *x = x.clamp(-b, b);
            }
        }
    }
}

fn grad_norm(g: &[Vec<f64>]) -> f64 {
    g.iter()
        .flat_map(|row| row.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

/// Projected gradient ascent with backtracking line search.
///
/// Starts from `init` when given, otherwise from a small seeded random
/// pulse. The returned history is the monotone non-decreasing sequence of
/// accepted objective values, starting with the initial one; the ascent
/// stops after `iters` accepted steps, when the gradient norm falls below
/// [`GRADIENT_STOP`], or when no ascending step exists. Non-convergence
/// shows up as a final history value below the goal, never as an error.
pub fn grape_optimize(
    p: &ControlProblem,
    init: Option<&PulseProgram>,
    iters: usize,
    seed: u64,
) -> Result<(PulseProgram, Vec<f64>)> {
    let dt = p.dt();
    let channels = p.controls.len();
    if channels == 0 {
        return Err(Error::InvalidInput(
            "cannot optimize a problem with no control channels".into(),
        ));
    }
    let mut u: Vec<Vec<f64>> = match init {
        Some(prog) => {
            check_shape(p, prog)?;
            prog.amplitudes().to_vec()
        }
        None => {
            let scale = p.amplitude_bound.map_or(0.02, |b| b.min(0.02));
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x7075_6c73_65, 0));
            (0..p.segments)
                .map(|_| (0..channels).map(|_| rng.random_range(-scale..scale)).collect())
                .collect()
        }
    };
    clamp_to_bound(&mut u, p.amplitude_bound);

    let eval = |table: &[Vec<f64>]| -> Result<f64> {
        let prog = PulseProgram::new(dt, table.to_vec())?;
        objective_fidelity(p, &prog)
    };

    let mut f_cur = eval(&u)?;
    let mut history = vec![f_cur];
    let mut alpha = 0.1;
    for _ in 0..iters {
        let prog = PulseProgram::new(dt, u.clone())?;
        let g = fidelity_gradient(p, &prog)?;
        if grad_norm(&g) < GRADIENT_STOP {
            break;
        }
        let mut advanced = false;
        while alpha > 1e-14 {
            let mut candidate = u.clone();
            for (row, grow) in candidate.iter_mut().zip(&g) {
                for (x, gx) in row.iter_mut().zip(grow) {
                    *x += alpha * gx;
                }
            }
            clamp_to_bound(&mut candidate, p.amplitude_bound);
            let f_new = eval(&candidate)?;
            if f_new > f_cur {
                u = candidate;
                f_cur = f_new;
                history.push(f_cur);
                alpha = (alpha * 1.5).min(1e3);
                advanced = true;
                break;
            }
            alpha *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    Ok((PulseProgram::new(dt, u)?, history))
}

/// Bloch vector `(Tr(rho X), Tr(rho Y), Tr(rho Z))` of a 2x2 density
/// matrix; the trace must be 1 within 1e-9.
pub fn bloch_vector(rho: &CMat) -> Result<[f64; 3]> {
    if rho.nrows() != 2 || rho.ncols() != 2 {
        return Err(Error::InvalidInput(format!(
            "Bloch vector needs a 2x2 density matrix, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "Bloch vector needs unit trace, got {tr}"
        )));
    }
    Ok([
        (rho * pauli_x()).trace().re,
        (rho * pauli_y()).trace().re,
        (rho * pauli_z()).trace().re,
    ])
}

/// Nuclear reduced state of a 4x4 electron(x)nuclear density matrix; the
/// electron is the first tensor factor.
pub fn partial_trace_electron(rho: &CMat) -> Result<CMat> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::InvalidInput(format!(
            "electron partial trace needs a 4x4 matrix, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(CMat::from_fn(2, 2, |i, j| {
        rho[(i, j)] + rho[(2 + i, 2 + j)]
    }))
}

/// The electron-mediated nuclear flip problem in the electron-rotating
/// frame: drive `|up_e up_n> -> |up_e down_n>` through the anisotropic
/// hyperfine coupling, with electron quadrature controls in GHz and an
/// optional amplitude bound.
pub fn nuclear_flip_problem(
    params: &HyperfineParams,
    horizon_ns: f64,
    segments: usize,
    u_max_ghz: Option<f64>,
) -> Result<ControlProblem> {
    let (drift, controls) = build_1e1n_hamiltonian(params, Frame::ElectronRotating)?;
    let mut initial = CVec::zeros(4);
    initial[0] = Complex64::new(1.0, 0.0);
    let mut goal = CVec::zeros(4);
    goal[1] = Complex64::new(1.0, 0.0);
    let problem = ControlProblem::new(
        drift,
        controls,
        Objective::StateTransfer { initial, goal },
        horizon_ns,
        segments,
    )?;
    match u_max_ghz {
        Some(b) => problem.with_amplitude_bound(b),
        None => Ok(problem),
    }
}

/// Bloch-vector trajectory of the transferred state at every segment
/// boundary, `segments + 1` samples from t = 0 to t = horizon.
///
/// For dimension 4 the nuclear (second-factor) Bloch vector is reported;
/// for dimension 2 the state's own. Requires a state-transfer objective.
pub fn bloch_trajectory(p: &ControlProblem, u: &PulseProgram) -> Result<Vec<(f64, [f64; 3])>> {
    let initial = match &p.objective {
        Objective::StateTransfer { initial, .. } => initial.clone(),
        Objective::Gate { .. } => {
            return Err(Error::WrongObjective(
                "Bloch trajectory needs a state-transfer objective".into(),
            ))
        }
    };
    if p.dim() != 2 && p.dim() != 4 {
        return Err(Error::InvalidInput(format!(
            "Bloch trajectory needs dimension 2 or 4, got {}",
            p.dim()
        )));
    }
    check_shape(p, u)?;
    let dt = p.dt();
    let mut psi = initial;
    let mut out = Vec::with_capacity(p.segments + 1);
    let push_point = |t: f64, psi: &CVec, out: &mut Vec<(f64, [f64; 3])>| -> Result<()> {
        let rho = psi * psi.adjoint();
        let reduced = if psi.len() == 4 {
            partial_trace_electron(&rho)?
        } else {
            rho
        };
        out.push((t, bloch_vector(&reduced)?));
        Ok(())
    };
    push_point(0.0, &psi, &mut out)?;
    for (k, (w, v, _)) in segment_data(p, u)?.iter().enumerate() {
        psi = spectral_propagator(w, v, dt) * psi;
        let norm = psi.norm();
        psi /= Complex64::new(norm, 0.0);
        push_point((k + 1) as f64 * dt, &psi, &mut out)?;
    }
    Ok(out)
}
