//! Open-system dynamics: Lindblad master equation and diffusive
//! (homodyne-type) stochastic master equation with optional
//! measurement-current feedback.
//!
//! The deterministic equation of motion is
//!
//! ```text
//! drho/dt = -i[H, rho] + sum_k D[A_k] rho,
//! D[A] rho = A rho A' - (A'A rho + rho A'A)/2
//! ```
//!
//! (`'` denotes the adjoint). The conditional equation adds, per
//! measurement channel B_k, the diffusive term `H[B_k] rho dW_k` with
//!
//! ```text
//! H[B] rho = B rho + rho B' - Tr[(B + B') rho] rho
//! ```
//!
//! and the measurement record `dy_k = Tr[(B_k + B_k') rho] dt + dW_k`.
//! Feedback, when enabled, adds `gain * (dy_k/dt) * actuator` to the
//! Hamiltonian for the following step.
//!
//! Integration is fixed-step: classical RK4 for the deterministic part,
//! Euler-Maruyama for the noise, so every trajectory is reproducible
//! from its seed.

use nalgebra::{Complex, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat, HermitianOperator};
use crate::stream::mix_seed;

/// Trace drift (from exactly 1) at which deterministic integration aborts.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Conditional-state trace below which a stochastic trajectory aborts.
pub const TRACE_COLLAPSE_LIMIT: f64 = 1e-6;

fn check_square_same_dim(a: &CMat, b: &CMat, what: &str) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.nrows() != b.nrows() {
        return Err(Error::InvalidInput(format!(
            "{what}: expected square matrices of equal dimension, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

fn check_density_like(rho: &CMat, tol: f64, what: &str) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::InvalidInput(format!(
            "{what}: density matrix must be square, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let herm_dev = crate::linalg::max_abs_entry(&(rho - rho.adjoint()));
    if herm_dev > tol {
        return Err(Error::InvalidInput(format!(
            "{what}: density matrix is not Hermitian (deviation {herm_dev:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidInput(format!(
            "{what}: density matrix trace {tr} is not 1"
        )));
    }
    Ok(())
}

/// Hamiltonian plus collapse operators defining a Lindblad generator.
///
/// Each collapse operator A_k carries units sqrt(rate), so D[A_k] has
/// the inverse-time units of the Hamiltonian.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    h: HermitianOperator,
    collapse_ops: Vec<CMat>,
}

impl LindbladModel {
    /// Builds a model, checking that every collapse operator matches the
    /// Hamiltonian dimension.
    pub fn new(h: HermitianOperator, collapse_ops: Vec<CMat>) -> Result<Self> {
        let n = h.dim();
        for (k, a) in collapse_ops.iter().enumerate() {
            if !a.is_square() || a.nrows() != n {
                return Err(Error::InvalidInput(format!(
                    "collapse operator {k} is {}x{}, Hamiltonian dimension is {n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(Self { h, collapse_ops })
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// The Hamiltonian H.
    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.h
    }

    /// The collapse operators A_k.
    pub fn collapse_ops(&self) -> &[CMat] {
        &self.collapse_ops
    }
}

/// A diffusive measurement channel with operator B entering H[B].
#[derive(Debug, Clone)]
pub struct MeasurementChannel {
    b: CMat,
}

impl MeasurementChannel {
    /// Wraps a measurement operator; must be square.
    pub fn new(b: CMat) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::InvalidInput(format!(
                "measurement operator must be square, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { b })
    }

    /// The measurement operator B.
    pub fn operator(&self) -> &CMat {
        &self.b
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.b.nrows()
    }
}

/// How the measurement current acts back on the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackMode {
    /// No feedback.
    Off,
    /// Add `gain * (dy/dt) * actuator` to H for the next step.
    CurrentProportional,
}

/// Markovian current-proportional Hamiltonian feedback rule.
#[derive(Debug, Clone)]
pub struct FeedbackRule {
    gain: f64,
    actuator: HermitianOperator,
    mode: FeedbackMode,
}

impl FeedbackRule {
    /// Feedback disabled; `dim` sizes the unused actuator operator.
    pub fn off(dim: usize) -> Self {
        let zero = HermitianOperator::new(CMat::zeros(dim, dim)).expect("zero is Hermitian");
        Self {
            gain: 0.0,
            actuator: zero,
            mode: FeedbackMode::Off,
        }
    }

    /// Feedback proportional to the instantaneous current dy/dt.
    pub fn current_proportional(gain: f64, actuator: HermitianOperator) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::InvalidInput(format!("feedback gain {gain} is not finite")));
        }
        Ok(Self {
            gain,
            actuator,
            mode: FeedbackMode::CurrentProportional,
        })
    }

    /// The feedback gain.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// The feedback actuator Hamiltonian.
    pub fn actuator(&self) -> &HermitianOperator {
        &self.actuator
    }

    /// The feedback mode.
    pub fn mode(&self) -> FeedbackMode {
        self.mode
    }
}

/// One conditional evolution: times, conditional states, measurement
/// record, and the seed that reproduces it.
///
/// `record` stores the increments dy_k step by step, channels interleaved
/// in channel order within each step; it is empty when there are no
/// measurement channels.
#[derive(Debug, Clone)]
pub struct QuantumTrajectory {
    times: Vec<f64>,
    states: Vec<CMat>,
    record: Vec<f64>,
    seed: u64,
}

impl QuantumTrajectory {
    /// Assembles a trajectory, checking that every state is Hermitian with
    /// unit trace (tolerance 1e-8) and that times and states align.
    pub fn new(times: Vec<f64>, states: Vec<CMat>, record: Vec<f64>, seed: u64) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::InvalidInput(format!(
                "trajectory has {} times but {} states",
                times.len(),
                states.len()
            )));
        }
        for (i, rho) in states.iter().enumerate() {
            check_density_like(rho, 1e-8, &format!("trajectory state {i}"))?;
        }
        Ok(Self {
            times,
            states,
            record,
            seed,
        })
    }

    /// Sample times, starting at 0.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Conditional states rho_c(t_i).
    pub fn states(&self) -> &[CMat] {
        &self.states
    }

    /// Measurement increments dy, step-major and channel-interleaved.
    pub fn record(&self) -> &[f64] {
        &self.record
    }

    /// Seed of the noise stream that generated this trajectory.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The last stored state.
    pub fn final_state(&self) -> &CMat {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Applies the dissipator D[A] rho = A rho A' - (A'A rho + rho A'A)/2.
///
/// The result is traceless and Hermitian for Hermitian `rho`.
pub fn dissipator_apply(a: &CMat, rho: &CMat) -> Result<CMat> {
    check_square_same_dim(a, rho, "dissipator_apply")?;
    let a_dag_a = a.adjoint() * a;
    let half = Complex64::new(0.5, 0.0);
    Ok(a * rho * a.adjoint() - (&a_dag_a * rho + rho * a_dag_a) * half)
}

/// Applies the measurement superoperator
/// H[B] rho = B rho + rho B' - Tr[(B + B') rho] rho.
///
/// The trace subtraction makes the output exactly traceless; note the map
/// is quadratic in `rho`, not linear.
pub fn measurement_superop_apply(b: &CMat, rho: &CMat) -> Result<CMat> {
    check_square_same_dim(b, rho, "measurement_superop_apply")?;
    let sandwich = b * rho + rho * b.adjoint();
    let expectation = sandwich.trace();
    Ok(sandwich - rho * expectation)
}

/// Right-hand side of the deterministic master equation,
/// -i[H, rho] + sum_k D[A_k] rho, with an additive Hamiltonian shift
/// (used by the feedback path; pass zero otherwise).
fn lindblad_rhs_shifted(model: &LindbladModel, h_extra: Option<&CMat>, rho: &CMat) -> CMat {
    let h = model.h.matrix();
    let comm = match h_extra {
        Some(extra) => {
            let total = h + extra;
            &total * rho - rho * &total
        }
        None => h * rho - rho * h,
    };
    let mut out = comm * Complex64::new(0.0, -1.0);
    for a in &model.collapse_ops {
        let a_dag_a = a.adjoint() * a;
        let half = Complex64::new(0.5, 0.0);
        out += a * rho * a.adjoint() - (&a_dag_a * rho + rho * &a_dag_a) * half;
    }
    out
}

/// Right-hand side of the deterministic master equation at `rho`.
pub fn lindblad_rhs(model: &LindbladModel, rho: &CMat) -> Result<CMat> {
    if !rho.is_square() || rho.nrows() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "lindblad_rhs: state is {}x{}, model dimension is {}",
            rho.nrows(),
            rho.ncols(),
            model.dim()
        )));
    }
    Ok(lindblad_rhs_shifted(model, None, rho))
}

fn rk4_step(model: &LindbladModel, h_extra: Option<&CMat>, rho: &CMat, dt: f64) -> CMat {
    let k1 = lindblad_rhs_shifted(model, h_extra, rho);
    let k2 = lindblad_rhs_shifted(model, h_extra, &(rho + &k1 * Complex64::new(dt / 2.0, 0.0)));
    let k3 = lindblad_rhs_shifted(model, h_extra, &(rho + &k2 * Complex64::new(dt / 2.0, 0.0)));
    let k4 = lindblad_rhs_shifted(model, h_extra, &(rho + &k3 * Complex64::new(dt, 0.0)));
    rho + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
        * Complex64::new(dt / 6.0, 0.0)
}

fn symmetrize(rho: &CMat) -> CMat {
    (rho + rho.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Splits `[0, t]` into fixed steps of width `dt` plus one short final
/// step when `t` is not an integer multiple.
fn step_widths(t: f64, dt: f64) -> Vec<f64> {
    let mut widths = Vec::new();
    let mut done = 0.0;
    while done + dt <= t * (1.0 + 1e-12) {
        widths.push(dt);
        done += dt;
    }
    let rest = t - done;
    if rest > 1e-12 * dt.max(1.0) {
        widths.push(rest);
    }
    widths
}

/// Integrates drho/dt = -i[H, rho] + sum_k D[A_k] rho with fixed-step RK4.
///
/// Returns the sampled trajectory `(t_i, rho(t_i))` including the initial
/// point. Each step symmetrizes the state; the trace is not renormalized,
/// and a drift beyond [`TRACE_DRIFT_LIMIT`] aborts with an
/// integration-failure error (the step size is too large).
pub fn lindblad_propagate(
    model: &LindbladModel,
    rho0: &CMat,
    t: f64,
    dt: f64,
) -> Result<Vec<(f64, CMat)>> {
    if !(dt > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "lindblad_propagate: need dt > 0 and t >= 0, got dt = {dt}, t = {t}"
        )));
    }
    if rho0.nrows() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "lindblad_propagate: state is {}x{}, model dimension is {}",
            rho0.nrows(),
            rho0.ncols(),
            model.dim()
        )));
    }
    check_density_like(rho0, 1e-9, "lindblad_propagate initial state")?;

    let mut rho = symmetrize(rho0);
    let mut out = vec![(0.0, rho.clone())];
    let mut now = 0.0;
    for w in step_widths(t, dt) {
        rho = symmetrize(&rk4_step(model, None, &rho, w));
        now += w;
        let drift = (rho.trace().re - 1.0).abs();
        if !drift.is_finite() || drift > TRACE_DRIFT_LIMIT {
            return Err(Error::IntegrationFailure(format!(
                "trace drifted by {drift:.3e} at t = {now:.6}; reduce dt"
            )));
        }
        out.push((now, rho.clone()));
    }
    Ok(out)
}

/// Builds a consistent homodyne pair: the measurement operator C enters
/// both the deterministic dissipator (A = C) and the stochastic term
/// (B = C), so the ensemble mean obeys the unconditional master equation.
pub fn homodyne_model(
    h: HermitianOperator,
    measurement_ops: &[CMat],
) -> Result<(LindbladModel, Vec<MeasurementChannel>)> {
    let model = LindbladModel::new(h, measurement_ops.to_vec())?;
    let mut channels = Vec::with_capacity(measurement_ops.len());
    for c in measurement_ops {
        if c.nrows() != model.dim() {
            return Err(Error::InvalidInput(format!(
                "measurement operator is {}x{}, model dimension is {}",
                c.nrows(),
                c.ncols(),
                model.dim()
            )));
        }
        channels.push(MeasurementChannel::new(c.clone())?);
    }
    Ok((model, channels))
}

/// Derives the noise-stream seed for trajectory `index` from a master seed.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    mix_seed(master_seed, index, 0x6f70_656e_7379_7321)
}

/// Integrates one conditional trajectory of the stochastic master equation.
///
/// Per step of width dt: RK4 drift with the current effective Hamiltonian,
/// then for each channel a noise increment dW_k ~ Normal(0, dt) applied as
/// `H[B_k] rho dW_k` at the pre-step state; the record stores
/// `dy_k = Tr[(B_k + B_k') rho] dt + dW_k`. With current-proportional
/// feedback the next step's Hamiltonian gains `gain * (dy_k/dt) * actuator`
/// summed over channels. The state is symmetrized and trace-renormalized
/// every step; a trace below [`TRACE_COLLAPSE_LIMIT`] aborts.
pub fn sme_trajectory(
    model: &LindbladModel,
    channels: &[MeasurementChannel],
    fb: &FeedbackRule,
    rho0: &CMat,
    t: f64,
    dt: f64,
    seed: u64,
) -> Result<QuantumTrajectory> {
    if !(dt > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "sme_trajectory: need dt > 0 and t >= 0, got dt = {dt}, t = {t}"
        )));
    }
    let n = model.dim();
    if rho0.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "sme_trajectory: state is {}x{}, model dimension is {n}",
            rho0.nrows(),
            rho0.ncols()
        )));
    }
    for (k, ch) in channels.iter().enumerate() {
        if ch.dim() != n {
            return Err(Error::InvalidInput(format!(
                "sme_trajectory: channel {k} has dimension {}, model dimension is {n}",
                ch.dim()
            )));
        }
    }
    if fb.mode == FeedbackMode::CurrentProportional && fb.actuator.dim() != n {
        return Err(Error::InvalidInput(format!(
            "sme_trajectory: feedback actuator has dimension {}, model dimension is {n}",
            fb.actuator.dim()
        )));
    }
    check_density_like(rho0, 1e-9, "sme_trajectory initial state")?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rho = symmetrize(rho0);
    let mut times = vec![0.0];
    let mut states = vec![rho.clone()];
    let mut record = Vec::new();
    let mut h_fb: Option<CMat> = None;
    let mut now = 0.0;

    for w in step_widths(t, dt) {
        let pre = rho.clone();
        let mut next = rk4_step(model, h_fb.as_ref(), &pre, w);

        let mut fb_accum = 0.0;
        if !channels.is_empty() {
            let noise = Normal::new(0.0, w.sqrt()).map_err(|e| {
                Error::InvalidInput(format!("noise distribution rejected step {w}: {e}"))
            })?;
            for ch in channels {
                let dw = noise.sample(&mut rng);
                let kick = measurement_superop_apply(ch.operator(), &pre)?;
                next += kick * Complex64::new(dw, 0.0);
                let current = (ch.operator() * &pre + &pre * ch.operator().adjoint())
                    .trace()
                    .re;
                let dy = current * w + dw;
                record.push(dy);
                fb_accum += dy / w;
            }
        }

        if fb.mode == FeedbackMode::CurrentProportional {
            h_fb = Some(fb.actuator.matrix() * Complex64::new(fb.gain * fb_accum, 0.0));
        }

        next = symmetrize(&next);
        let tr = next.trace().re;
        if !tr.is_finite() || tr < TRACE_COLLAPSE_LIMIT {
            return Err(Error::TrajectoryFailure(format!(
                "state trace collapsed to {tr:.3e} at t = {:.6}",
                now + w
            )));
        }
        rho = next * Complex64::new(1.0 / tr, 0.0);
        now += w;
        times.push(now);
        states.push(rho.clone());
    }

    Ok(QuantumTrajectory {
        times,
        states,
        record,
        seed,
    })
}

/// Pointwise mean of conditional trajectories over a shared time grid.
///
/// Averaging removes the measurement conditioning, so with consistent
/// homodyne channels the mean estimates the unconditional Lindblad state.
pub fn ensemble_average(trajectories: &[QuantumTrajectory]) -> Result<Vec<(f64, CMat)>> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InvalidInput("ensemble_average: no trajectories".into()))?;
    let grid = first.times();
    for (j, traj) in trajectories.iter().enumerate() {
        if traj.times().len() != grid.len()
            || traj
                .times()
                .iter()
                .zip(grid)
                .any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(Error::InvalidInput(format!(
                "ensemble_average: trajectory {j} uses a different time grid"
            )));
        }
    }
    let n = first.states()[0].nrows();
    let scale = Complex64::new(1.0 / trajectories.len() as f64, 0.0);
    let mut out = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        let mut mean = CMat::zeros(n, n);
        for traj in trajectories {
            mean += &traj.states()[i];
        }
        out.push((t, mean * scale));
    }
    Ok(out)
}

/// Trace distance (1/2)||a - b||_1 between two Hermitian matrices, via
/// the eigenvalues of the symmetrized difference.
pub fn trace_distance(a: &CMat, b: &CMat) -> Result<f64> {
    check_square_same_dim(a, b, "trace_distance")?;
    let diff = symmetrize(&(a - b));
    let h = HermitianOperator::new(diff).map_err(|_| {
        Error::InvalidInput("trace_distance: inputs are too far from Hermitian".into())
    })?;
    let (w, _) = hermitian_eigen(&h);
    Ok(0.5 * w.iter().map(|x| x.abs()).sum::<f64>())
}

/// Assembles the Liouvillian as a dim^2 x dim^2 matrix acting on
/// column-stacked density matrices; its null vector is the steady state.
pub fn liouvillian_matrix(model: &LindbladModel) -> CMat {
    let n = model.dim();
    let mut l = CMat::zeros(n * n, n * n);
    for col in 0..n * n {
        let (i, j) = (col % n, col / n);
        let mut unit = CMat::zeros(n, n);
        unit[(i, j)] = Complex64::new(1.0, 0.0);
        let image = lindblad_rhs_shifted(model, None, &unit);
        for row in 0..n * n {
            let (p, q) = (row % n, row / n);
            l[(row, col)] = image[(p, q)];
        }
    }
    l
}

/// Steady state of the model: the (trace-normalized, symmetrized)
/// null vector of the Liouvillian, found as the lowest eigenvector of
/// L'L.
pub fn steady_state(model: &LindbladModel) -> Result<CMat> {
    let l = liouvillian_matrix(model);
    let gram = HermitianOperator::new(symmetrize(&(l.adjoint() * &l)))
        .map_err(|e| Error::InvalidInput(format!("steady_state: Gram matrix rejected: {e}")))?;
    let (w, v) = hermitian_eigen(&gram);
    let mut best = 0;
    for (k, val) in w.iter().enumerate() {
        if *val < w[best] {
            best = k;
        }
    }
    let n = model.dim();
    let vec: DVector<Complex<f64>> = v.column(best).into_owned();
    let mut rho = CMat::zeros(n, n);
    for col in 0..n * n {
        let (i, j) = (col % n, col / n);
        rho[(i, j)] = vec[col];
    }
    let rho = symmetrize(&rho);
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::InvalidInput(
            "steady_state: null vector is traceless, no normalizable steady state".into(),
        ));
    }
    Ok(rho * (Complex64::new(1.0, 0.0) / tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity2, matrix_exponential_unitary, pauli_x, pauli_z};
    use approx::assert_abs_diff_eq;
    use nalgebra::dmatrix;

    fn lowering() -> CMat {
        dmatrix![
            Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0);
            Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0);
        ]
    }

    fn excited() -> CMat {
        dmatrix![
            Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0);
            Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0);
        ]
    }

    fn plus_state() -> CMat {
        CMat::from_element(2, 2, Complex64::new(0.5, 0.0))
    }

    fn random_density(n: usize, seed: u64) -> CMat {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let pos = &g * g.adjoint() + CMat::identity(n, n) * Complex64::new(1e-3, 0.0);
        let tr = pos.trace();
        pos * (Complex64::new(1.0, 0.0) / tr)
    }

    fn random_matrix(n: usize, seed: u64) -> CMat {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn dissipator_relaxes_excited_state() {
        let got = dissipator_apply(&lowering(), &excited()).unwrap();
        let want = dmatrix![
            Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0);
            Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0);
        ];
        assert!(crate::linalg::max_abs_entry(&(got - want)) <= 1e-14);
    }

    #[test]
    fn dissipator_of_identity_vanishes() {
        let got = dissipator_apply(&identity2(), &random_density(2, 7)).unwrap();
        assert!(crate::linalg::max_abs_entry(&got) <= 1e-14);
    }

    #[test]
    fn dissipator_output_is_traceless_and_linear() {
        let a = random_matrix(3, 11);
        let rho = random_matrix(3, 12);
        let sigma = random_matrix(3, 13);
        let d_rho = dissipator_apply(&a, &rho).unwrap();
        assert!(d_rho.trace().norm() <= 1e-12);
        let combo = &rho * Complex64::new(0.3, 0.0) + &sigma * Complex64::new(-1.7, 0.0);
        let lhs = dissipator_apply(&a, &combo).unwrap();
        let rhs = &d_rho * Complex64::new(0.3, 0.0)
            + dissipator_apply(&a, &sigma).unwrap() * Complex64::new(-1.7, 0.0);
        assert!(crate::linalg::max_abs_entry(&(lhs - rhs)) <= 1e-12);
    }

    #[test]
    fn measurement_superop_examples() {
        let z = pauli_z();
        let mixed = identity2() * Complex64::new(0.5, 0.0);
        // Tr[(Z + Z)I/2] = 0, so the trace term drops and H[Z](I/2) = Z.
        let on_mixed = measurement_superop_apply(&z, &mixed).unwrap();
        assert!(crate::linalg::max_abs_entry(&(on_mixed - &z)) <= 1e-14);

        let on_plus = measurement_superop_apply(&z, &plus_state()).unwrap();
        let want = &z * plus_state() + plus_state() * &z;
        assert!(crate::linalg::max_abs_entry(&(on_plus - want)) <= 1e-14);

        let eigen = excited();
        let on_eigen = measurement_superop_apply(&z, &eigen).unwrap();
        assert!(crate::linalg::max_abs_entry(&on_eigen) <= 1e-14);

        let b = random_matrix(3, 21);
        let rho = random_density(3, 22);
        assert!(measurement_superop_apply(&b, &rho).unwrap().trace().norm() <= 1e-12);
    }

    #[test]
    fn amplitude_damping_matches_analytic_decay() {
        let h = HermitianOperator::new(CMat::zeros(2, 2)).unwrap();
        let model = LindbladModel::new(h, vec![lowering()]).unwrap();
        let traj = lindblad_propagate(&model, &excited(), 1.0, 1e-3).unwrap();
        let (t_end, rho_end) = traj.last().unwrap();
        assert_abs_diff_eq!(*t_end, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho_end[(1, 1)].re, (-1.0f64).exp(), epsilon = 1e-6);
        assert_abs_diff_eq!(rho_end[(0, 0)].re, 1.0 - (-1.0f64).exp(), epsilon = 1e-6);
    }

    #[test]
    fn no_collapse_operators_match_unitary_evolution() {
        let h = HermitianOperator::new(symmetrize(&random_matrix(3, 31))).unwrap();
        let rho0 = random_density(3, 32);
        let model = LindbladModel::new(h.clone(), vec![]).unwrap();
        let traj = lindblad_propagate(&model, &rho0, 1.0, 1e-3).unwrap();
        let u = matrix_exponential_unitary(&h, 1.0).unwrap();
        let want = u.matrix() * &rho0 * u.matrix().adjoint();
        let got = &traj.last().unwrap().1;
        assert!(crate::linalg::max_abs_entry(&(got - want)) <= 1e-8);
    }

    #[test]
    fn oversized_step_reports_integration_failure() {
        let h = HermitianOperator::new(CMat::zeros(2, 2)).unwrap();
        let fast = lowering() * Complex64::new(10.0, 0.0);
        let model = LindbladModel::new(h, vec![fast]).unwrap();
        let err = lindblad_propagate(&model, &excited(), 10.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure(_)), "got {err:?}");
    }

    #[test]
    fn sme_without_channels_matches_lindblad_pathwise() {
        let h = HermitianOperator::new(symmetrize(&random_matrix(2, 41))).unwrap();
        let model = LindbladModel::new(h, vec![lowering() * Complex64::new(0.7, 0.0)]).unwrap();
        let rho0 = plus_state();
        let det = lindblad_propagate(&model, &rho0, 0.5, 1e-2).unwrap();
        let fb = FeedbackRule::off(2);
        let traj = sme_trajectory(&model, &[], &fb, &rho0, 0.5, 1e-2, 5).unwrap();
        assert!(traj.record().is_empty());
        for ((_, want), got) in det.iter().zip(traj.states()) {
            assert!(crate::linalg::max_abs_entry(&(got - want)) <= 1e-10);
        }
    }

    #[test]
    fn fixed_seed_reproduces_trajectory_exactly() {
        let kappa: f64 = 1.0;
        let c = pauli_z() * Complex64::new(kappa.sqrt(), 0.0);
        let (model, channels) =
            homodyne_model(HermitianOperator::new(CMat::zeros(2, 2)).unwrap(), &[c]).unwrap();
        let fb = FeedbackRule::off(2);
        let a = sme_trajectory(&model, &channels, &fb, &plus_state(), 0.2, 1e-3, 99).unwrap();
        let b = sme_trajectory(&model, &channels, &fb, &plus_state(), 0.2, 1e-3, 99).unwrap();
        assert_eq!(a.record(), b.record());
        assert_eq!(a.final_state(), b.final_state());
        assert_eq!(a.seed(), 99);
        let c = sme_trajectory(&model, &channels, &fb, &plus_state(), 0.2, 1e-3, 100).unwrap();
        assert_ne!(a.record(), c.record());
    }

    #[test]
    fn conditional_states_keep_unit_trace() {
        let kappa: f64 = 2.0;
        let c = pauli_z() * Complex64::new(kappa.sqrt(), 0.0);
        let (model, channels) =
            homodyne_model(HermitianOperator::new(pauli_x()).unwrap(), &[c]).unwrap();
        let fb = FeedbackRule::off(2);
        let traj = sme_trajectory(&model, &channels, &fb, &plus_state(), 0.3, 1e-3, 3).unwrap();
        for rho in traj.states() {
            assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
            assert!(crate::linalg::max_abs_entry(&(rho - rho.adjoint())) <= 1e-12);
        }
        QuantumTrajectory::new(
            traj.times().to_vec(),
            traj.states().to_vec(),
            traj.record().to_vec(),
            traj.seed(),
        )
        .unwrap();
    }

    #[test]
    fn feedback_changes_the_trajectory() {
        let kappa: f64 = 1.0;
        let c = pauli_z() * Complex64::new(kappa.sqrt(), 0.0);
        let (model, channels) =
            homodyne_model(HermitianOperator::new(CMat::zeros(2, 2)).unwrap(), &[c]).unwrap();
        let off = FeedbackRule::off(2);
        let on =
            FeedbackRule::current_proportional(0.5, HermitianOperator::new(pauli_x()).unwrap())
                .unwrap();
        let base = sme_trajectory(&model, &channels, &off, &plus_state(), 0.2, 1e-3, 7).unwrap();
        let driven = sme_trajectory(&model, &channels, &on, &plus_state(), 0.2, 1e-3, 7).unwrap();
        let gap = crate::linalg::max_abs_entry(&(base.final_state() - driven.final_state()));
        assert!(gap > 1e-6, "feedback had no effect (gap {gap:.3e})");
    }

    #[test]
    fn ensemble_average_identities() {
        let kappa: f64 = 1.0;
        let c = pauli_z() * Complex64::new(kappa.sqrt(), 0.0);
        let (model, channels) =
            homodyne_model(HermitianOperator::new(CMat::zeros(2, 2)).unwrap(), &[c]).unwrap();
        let fb = FeedbackRule::off(2);
        let traj = sme_trajectory(&model, &channels, &fb, &plus_state(), 0.1, 1e-3, 1).unwrap();

        let single = ensemble_average(std::slice::from_ref(&traj)).unwrap();
        for ((_, mean), rho) in single.iter().zip(traj.states()) {
            assert!(crate::linalg::max_abs_entry(&(mean - rho)) <= 1e-14);
        }

        let mu = random_density(2, 55);
        let mirrored: Vec<CMat> = traj
            .states()
            .iter()
            .map(|rho| &mu * Complex64::new(2.0, 0.0) - rho)
            .collect();
        let partner = QuantumTrajectory::new(
            traj.times().to_vec(),
            mirrored,
            vec![],
            0,
        )
        .unwrap();
        let pair = ensemble_average(&[traj, partner]).unwrap();
        for (_, mean) in &pair {
            assert!(crate::linalg::max_abs_entry(&(mean - &mu)) <= 1e-12);
        }
    }

    #[test]
    fn trace_distance_limits() {
        let ground = dmatrix![
            Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0);
            Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0);
        ];
        assert_abs_diff_eq!(
            trace_distance(&ground, &excited()).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(trace_distance(&ground, &ground).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn steady_state_solves_driven_qubit() {
        let omega = 1.3;
        let gamma: f64 = 0.8;
        let h = HermitianOperator::new(pauli_x() * Complex64::new(omega / 2.0, 0.0)).unwrap();
        let a = lowering() * Complex64::new(gamma.sqrt(), 0.0);
        let model = LindbladModel::new(h, vec![a]).unwrap();
        let ss = steady_state(&model).unwrap();
        let residual = lindblad_rhs(&model, &ss).unwrap();
        assert!(crate::linalg::max_abs_entry(&residual) <= 1e-10);
        assert_abs_diff_eq!(ss.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a3 = CMat::zeros(3, 3);
        let rho2 = plus_state();
        assert!(matches!(
            dissipator_apply(&a3, &rho2),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            measurement_superop_apply(&a3, &rho2),
            Err(Error::InvalidInput(_))
        ));
        let h = HermitianOperator::new(CMat::zeros(2, 2)).unwrap();
        assert!(LindbladModel::new(h, vec![a3]).is_err());
    }
}
