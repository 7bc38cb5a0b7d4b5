//! Switching-sequence (bang-bang) gate synthesis.
//!
//! A target unitary is realized as an alternating product of two fixed
//! propagators, `U = exp(-i t₁ H₁) exp(-i t₂ H₂) exp(-i t₃ H₁) …`, with the
//! dwell times acting as generalized Euler angles. Dwell times are found
//! numerically: multi-start simplex search followed by projected gradient
//! ascent with exact eigenbasis gradients.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, hilbert_schmidt_inner, matrix_exponential_unitary, spectral_propagator, CMat,
    HermitianOperator, UnitaryOperator,
};
use crate::spin::{build_switch_pair, ChainSpec};

pub const DEFAULT_FIDELITY_GOAL: f64 = 0.9999;
pub const DEFAULT_MAX_SEGMENTS: usize = 40;
pub const DEFAULT_RESTARTS: usize = 64;
/// Box bound on each dwell time during optimization.
pub const DEFAULT_TIME_CAP: f64 = 20.0;

/// Actuator-state sequence `m` (1-based indices into the Hamiltonian list)
/// with nonnegative dwell times `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSchedule {
    m: Vec<usize>,
    t: Vec<f64>,
}

impl SwitchingSchedule {
    pub fn new(m: Vec<usize>, t: Vec<f64>) -> Result<Self> {
        if m.len() != t.len() {
            return Err(Error::InvalidInput(format!(
                "schedule length mismatch: {} states vs {} dwell times",
                m.len(),
                t.len()
            )));
        }
        if m.iter().any(|&k| k == 0) {
            return Err(Error::InvalidInput("actuator indices are 1-based".into()));
        }
        if t.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidInput(
                "dwell times must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { m, t })
    }

    pub fn empty() -> Self {
        Self { m: vec![], t: vec![] }
    }

    /// Canonical two-Hamiltonian form: `m = 1,2,1,2,…` with `2ℓ` segments.
    pub fn alternating(l: usize, t: Vec<f64>) -> Result<Self> {
        if t.len() != 2 * l {
            return Err(Error::InvalidInput(format!(
                "alternating schedule with {l} pairs needs {} dwell times, got {}",
                2 * l,
                t.len()
            )));
        }
        let m = (0..2 * l).map(|k| 1 + k % 2).collect();
        Self::new(m, t)
    }

    pub fn m(&self) -> &[usize] {
        &self.m
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        self.t.iter().sum()
    }

    /// Drops leading and trailing zero-dwell segments.
    pub fn trimmed(&self) -> Self {
        let lead = self.t.iter().take_while(|&&x| x == 0.0).count();
        let trail = self.t[lead..].iter().rev().take_while(|&&x| x == 0.0).count();
        let end = self.t.len() - trail;
        Self {
            m: self.m[lead..end].to_vec(),
            t: self.t[lead..end].to_vec(),
        }
    }
}

/// Product `U^{(m₁)}(t₁) · … · U^{(m_K)}(t_K)` with `U^{(m)}(t) =
/// exp(-i t H_m)`; the first segment is the leftmost factor.
pub fn evolve_schedule(
    h_list: &[HermitianOperator],
    s: &SwitchingSchedule,
) -> Result<UnitaryOperator> {
    if h_list.is_empty() {
        return Err(Error::InvalidInput("empty Hamiltonian list".into()));
    }
    let n = h_list[0].dim();
    if h_list.iter().any(|h| h.dim() != n) {
        return Err(Error::InvalidInput("Hamiltonian dimensions differ".into()));
    }
    if let Some(&bad) = s.m.iter().find(|&&k| k > h_list.len()) {
        return Err(Error::InvalidInput(format!(
            "actuator state {bad} exceeds the {}-element Hamiltonian list",
            h_list.len()
        )));
    }
    let mut u = CMat::identity(n, n);
    for (&mk, &tk) in s.m.iter().zip(s.t.iter()) {
        u = u * matrix_exponential_unitary(&h_list[mk - 1], tk)?.into_matrix();
    }
    UnitaryOperator::new(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityMode {
    /// `Re[Tr(U_T†U)/dim]`; global phase counts.
    PhaseSensitive,
    /// `|Tr(U_T†U)/dim|`.
    PhaseInvariant,
}

/// Normalized gate overlap between a realized unitary and a target.
pub fn gate_fidelity(u: &UnitaryOperator, u_t: &UnitaryOperator, mode: FidelityMode) -> Result<f64> {
    let tr = hilbert_schmidt_inner(u_t.matrix(), u.matrix())?;
    let scaled = tr / Complex64::new(u.dim() as f64, 0.0);
    Ok(match mode {
        FidelityMode::PhaseSensitive => scaled.re,
        FidelityMode::PhaseInvariant => scaled.norm(),
    })
}

/// Hilbert-Schmidt angle `arccos(Tr(H₁†H₂) / sqrt(Tr(H₁²)·Tr(H₂²)))`.
pub fn hamiltonian_angle(h1: &HermitianOperator, h2: &HermitianOperator) -> Result<f64> {
    let n1 = h1.frobenius_norm();
    let n2 = h2.frobenius_norm();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::UndefinedAngle(
            "angle of a zero operator is undefined".into(),
        ));
    }
    let ip = hilbert_schmidt_inner(h1.matrix(), h2.matrix())?.re;
    Ok((ip / (n1 * n2)).clamp(-1.0, 1.0).acos())
}

/// Evaluates both sides of the trace identity `Tr[H₀†(H₀+H_r)] =
/// 2‖d − d_r‖² + ‖E‖²`, returning `(lhs, rhs)`.
pub fn trace_identity_check(spec: &ChainSpec, r: usize) -> Result<(f64, f64)> {
    let (h_off, h_on) = build_switch_pair(spec, r)?;
    let lhs = hilbert_schmidt_inner(h_off.matrix(), h_on.matrix())?.re;
    let coupling_sq: f64 = spec
        .d()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != r - 1)
        .map(|(_, &x)| x * x)
        .sum();
    let energy_sq: f64 = spec.e().iter().map(|&x| x * x).sum();
    Ok((lhs, 2.0 * coupling_sq + energy_sq))
}

/// Names of the built-in 4x4 targets, in the order they are usually swept.
pub const GATE_NAMES: [&str; 6] = ["identity", "had1", "t1", "had2", "t2", "cnot"];

/// Built-in two-qubit targets on the basis |00⟩,|01⟩,|10⟩,|11⟩.
///
/// `had = (1/√2)[[1,-1],[1,1]]` (as printed in the source material, the
/// transpose of the common convention), `t = diag(e^{-iπ/8}, e^{iπ/8})`,
/// `cnot = e^{-iπ/4}·blockdiag(I, X)`. All six have unit determinant.
pub fn target_gate(name: &str) -> Result<UnitaryOperator> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let had = CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
        ],
    );
    let t_phase = std::f64::consts::FRAC_PI_8;
    let t_gate = CMat::from_diagonal(&DVector::from_vec(vec![
        Complex64::from_polar(1.0, -t_phase),
        Complex64::from_polar(1.0, t_phase),
    ]));
    let eye = crate::linalg::identity2();
    let matrix = match name {
        "identity" => CMat::identity(4, 4),
        "had1" => crate::linalg::tensor_product(&had, &eye),
        "t1" => crate::linalg::tensor_product(&t_gate, &eye),
        "had2" => crate::linalg::tensor_product(&eye, &had),
        "t2" => crate::linalg::tensor_product(&eye, &t_gate),
        "cnot" => {
            let mut m = CMat::zeros(4, 4);
            m[(0, 0)] = Complex64::new(1.0, 0.0);
            m[(1, 1)] = Complex64::new(1.0, 0.0);
            m[(2, 3)] = Complex64::new(1.0, 0.0);
            m[(3, 2)] = Complex64::new(1.0, 0.0);
            m * Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown gate '{other}' (expected one of {GATE_NAMES:?})"
            )))
        }
    };
    UnitaryOperator::new(matrix)
}

/// Synthesis request: realize `target` by alternating products of the two
/// Hamiltonians in `h_pair`.
#[derive(Debug, Clone)]
pub struct SynthesisJob {
    pub target: UnitaryOperator,
    pub h_pair: (HermitianOperator, HermitianOperator),
    pub fidelity_goal: f64,
    /// Cap on the number of alternation pairs ℓ (so at most 2ℓ segments).
    pub max_segments: usize,
    /// Box bound on each dwell time.
    pub total_time_cap: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl SynthesisJob {
    pub fn new(
        target: UnitaryOperator,
        h_pair: (HermitianOperator, HermitianOperator),
    ) -> Self {
        Self {
            target,
            h_pair,
            fidelity_goal: DEFAULT_FIDELITY_GOAL,
            max_segments: DEFAULT_MAX_SEGMENTS,
            total_time_cap: DEFAULT_TIME_CAP,
            restarts: DEFAULT_RESTARTS,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisStatus {
    Converged,
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub schedule: SwitchingSchedule,
    pub achieved_fidelity: f64,
    pub status: SynthesisStatus,
}

struct Precomp {
    dim: usize,
    eigs: [(DVector<f64>, CMat); 2],
    hams: [CMat; 2],
    target_adj: CMat,
}

impl Precomp {
    fn new(job: &SynthesisJob) -> Self {
        let (h1, h2) = (&job.h_pair.0, &job.h_pair.1);
        Self {
            dim: h1.dim(),
            eigs: [hermitian_eigen(h1), hermitian_eigen(h2)],
            hams: [h1.matrix().clone(), h2.matrix().clone()],
            target_adj: job.target.matrix().adjoint(),
        }
    }

    fn segment(&self, k: usize, t: f64) -> CMat {
        let (w, v) = &self.eigs[k % 2];
        spectral_propagator(w, v, t)
    }

    /// Phase-sensitive fidelity of the alternating product at dwell
    /// times `t` (segment k uses Hamiltonian 1 + k mod 2).
    fn fidelity(&self, t: &[f64]) -> f64 {
        let mut u = CMat::identity(self.dim, self.dim);
        for (k, &tk) in t.iter().enumerate() {
            u = u * self.segment(k, tk);
        }
        (self.target_adj.clone() * u).trace().re / self.dim as f64
    }

    /// Fidelity and its exact gradient with respect to every dwell time,
    /// from prefix/suffix products: ∂U/∂t_k = pre_k (-iH_{m_k}) U_k suf_k.
    fn fidelity_grad(&self, t: &[f64]) -> (f64, Vec<f64>) {
        let kk = t.len();
        let segs: Vec<CMat> = (0..kk).map(|k| self.segment(k, t[k])).collect();
        let mut prefix = Vec::with_capacity(kk + 1);
        prefix.push(CMat::identity(self.dim, self.dim));
        for s in &segs {
            let next = prefix.last().expect("nonempty") * s;
            prefix.push(next);
        }
        let mut suffix = vec![CMat::identity(self.dim, self.dim); kk + 1];
        for k in (0..kk).rev() {
            suffix[k] = &segs[k] * &suffix[k + 1];
        }
        let f = (self.target_adj.clone() * &prefix[kk]).trace().re / self.dim as f64;
        let mut grad = Vec::with_capacity(kk);
        for k in 0..kk {
            // Re Tr(T† pre (-iH) seg suf) = Im Tr((T† pre) H suf_k)
            let left = &self.target_adj * &prefix[k];
            let g = (left * &self.hams[k % 2] * &suffix[k]).trace().im / self.dim as f64;
            grad.push(g);
        }
        (f, grad)
    }
}

fn clamp_box(x: &mut [f64], cap: f64) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, cap);
    }
}

/// Box-penalized objective for the derivative-free stage: fidelity at the
/// clamped point minus a quadratic penalty for leaving the box.
fn penalized(p: &Precomp, x: &[f64], cap: f64) -> f64 {
    let mut inside = x.to_vec();
    clamp_box(&mut inside, cap);
    let mut penalty = 0.0;
    for (&raw, &cl) in x.iter().zip(inside.iter()) {
        let d = raw - cl;
        penalty += d * d;
    }
    p.fidelity(&inside) - penalty
}

/// Standard Nelder-Mead simplex ascent on `penalized`; returns the best
/// vertex, clamped into the box.
fn simplex_search(p: &Precomp, x0: &[f64], step: f64, cap: f64, max_evals: usize) -> Vec<f64> {
    let n = x0.len();
    let mut evals = 0;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        penalized(p, x, cap)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }
    while evals < max_evals {
        // Descending by objective value (maximization).
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite objective"));
        let spread = simplex[0].1 - simplex[n].1;
        if spread < 1e-12 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n)
            .map(|j| centroid[j] + (centroid[j] - worst.0[j]))
            .collect();
        let fr = eval(&reflect, &mut evals);
        if fr > simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|j| centroid[j] + 2.0 * (centroid[j] - worst.0[j]))
                .collect();
            let fe = eval(&expand, &mut evals);
            simplex[n] = if fe > fr { (expand, fe) } else { (reflect, fr) };
        } else if fr > simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|j| centroid[j] + 0.5 * (worst.0[j] - centroid[j]))
                .collect();
            let fc = eval(&contract, &mut evals);
            if fc > worst.1 {
                simplex[n] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = (0..n)
                        .map(|j| best[j] + 0.5 * (entry.0[j] - best[j]))
                        .collect();
                    let fs = eval(&shrunk, &mut evals);
                    *entry = (shrunk, fs);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite objective"));
    let mut best = simplex[0].0.clone();
    clamp_box(&mut best, cap);
    best
}

/// Projected gradient ascent with backtracking line search.
fn gradient_ascent(
    p: &Precomp,
    x0: Vec<f64>,
    cap: f64,
    stop_level: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let mut x = x0;
    clamp_box(&mut x, cap);
    let (mut f, mut g) = p.fidelity_grad(&x);
    let mut alpha = 0.1;
    for _ in 0..max_iters {
        if f >= stop_level {
            break;
        }
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let mut advanced = false;
        while alpha > 1e-14 {
            let mut trial: Vec<f64> = x.iter().zip(g.iter()).map(|(xi, gi)| xi + alpha * gi).collect();
            clamp_box(&mut trial, cap);
            let (ft, gt) = p.fidelity_grad(&trial);
            if ft > f + 1e-15 {
                x = trial;
                f = ft;
                g = gt;
                alpha = (alpha * 1.5).min(10.0);
                advanced = true;
                break;
            }
            alpha *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    (x, f)
}

use crate::stream::mix_seed;

/// Searches canonical alternating schedules of increasing depth ℓ for one
/// meeting `fidelity_goal`; multi-start simplex plus gradient polish per ℓ.
///
/// The reported fidelity is recomputed from the returned (trimmed)
/// schedule through [`evolve_schedule`], never a cached optimizer value.
/// Deterministic for a fixed seed; restarts run concurrently with
/// per-restart RNG streams and an index-ordered merge.
pub fn synthesize_gate(job: &SynthesisJob) -> Result<SynthesisResult> {
    use rand::Rng;
    use rand::SeedableRng;

    if job.max_segments == 0 {
        return Err(Error::InvalidInput(
            "max_segments must be at least 1".into(),
        ));
    }
    if !(job.fidelity_goal > 0.0 && job.fidelity_goal <= 1.0) {
        return Err(Error::InvalidInput("fidelity_goal must lie in (0, 1]".into()));
    }
    if !(job.total_time_cap > 0.0) || job.restarts == 0 {
        return Err(Error::InvalidInput("caps must be positive".into()));
    }
    let (h1, h2) = (&job.h_pair.0, &job.h_pair.1);
    if h1.dim() != h2.dim() || h1.dim() != job.target.dim() {
        return Err(Error::InvalidInput(
            "Hamiltonian pair and target dimensions differ".into(),
        ));
    }

    let h_list = [h1.clone(), h2.clone()];
    let p = Precomp::new(job);
    let h0_norm = h1.frobenius_norm();
    let t_guess = if h0_norm > 0.0 {
        (std::f64::consts::PI * p.dim as f64 / h0_norm).min(job.total_time_cap)
    } else {
        job.total_time_cap
    };
    let stop_level = (job.fidelity_goal + 1e-9).min(1.0 - 1e-13);

    let evaluate = |schedule: &SwitchingSchedule| -> Result<f64> {
        let u = evolve_schedule(&h_list, schedule)?;
        gate_fidelity(&u, &job.target, FidelityMode::PhaseSensitive)
    };

    // Depth 0: the empty product.
    let empty = SwitchingSchedule::empty();
    let f_empty = evaluate(&empty)?;
    let mut best = (empty, f_empty);
    if f_empty >= job.fidelity_goal {
        return Ok(SynthesisResult {
            schedule: best.0,
            achieved_fidelity: best.1,
            status: SynthesisStatus::Converged,
        });
    }

    for l in 1..=job.max_segments {
        let k = 2 * l;
        let outcomes: Vec<(Vec<f64>, f64)> = (0..job.restarts)
            .into_par_iter()
            .map(|restart| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(mix_seed(
                    job.seed,
                    l as u64,
                    restart as u64,
                ));
                let x0: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..t_guess)).collect();
                let coarse = simplex_search(&p, &x0, 0.1 * t_guess, job.total_time_cap, 40 * (k + 1));
                gradient_ascent(&p, coarse, job.total_time_cap, stop_level, 400)
            })
            .collect();

        // Index-ordered deterministic merge; goal-meeting candidates are
        // re-scored through evolve_schedule on the trimmed schedule and
        // ranked by (segment count, total time, restart index).
        let mut winner: Option<(usize, SwitchingSchedule, f64)> = None;
        for (idx, (t, f_opt)) in outcomes.iter().enumerate() {
            if *f_opt < job.fidelity_goal {
                continue;
            }
            let schedule = SwitchingSchedule::alternating(l, t.clone())?.trimmed();
            let f = evaluate(&schedule)?;
            if f < job.fidelity_goal {
                continue;
            }
            let better = match &winner {
                None => true,
                Some((widx, ws, _)) => {
                    (schedule.len(), schedule.total_time(), idx)
                        < (ws.len(), ws.total_time(), *widx)
                }
            };
            if better {
                winner = Some((idx, schedule, f));
            }
        }
        if let Some((_, schedule, f)) = winner {
            return Ok(SynthesisResult {
                schedule,
                achieved_fidelity: f,
                status: SynthesisStatus::Converged,
            });
        }

        for (t, f_opt) in &outcomes {
            if *f_opt > best.1 {
                let schedule = SwitchingSchedule::alternating(l, t.clone())?.trimmed();
                let f = evaluate(&schedule)?;
                if f > best.1 {
                    best = (schedule, f);
                }
            }
        }
    }

    Ok(SynthesisResult {
        schedule: best.0,
        achieved_fidelity: best.1,
        status: SynthesisStatus::BudgetExhausted,
    })
}
