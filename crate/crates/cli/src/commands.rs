//! Command handlers. Each one builds its model from the config, runs the
//! core routine, and writes the declared artifacts into the output
//! directory.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use qctl_core::bangbang::{
    gate_fidelity, hamiltonian_angle, synthesize_gate, target_gate, FidelityMode, SynthesisJob,
    SynthesisStatus,
};
use qctl_core::controllability::{is_controllable, lie_closure, DEFAULT_RANK_TOL};
use qctl_core::ft::{
    error_operator, pauli_expand, penalized_objective, weight_spectrum, PenaltyWeights,
};
use qctl_core::linalg::{from_reim_rows, CMat, CVec, HermitianOperator, UnitaryOperator};
use qctl_core::opensys::{
    ensemble_average, lindblad_propagate, sme_trajectory, trajectory_seed, FeedbackRule,
    LindbladModel, MeasurementChannel, QuantumTrajectory,
};
use qctl_core::pulse::{bloch_trajectory, grape_optimize, ControlProblem, Objective};
use qctl_core::spin::{build_1e1n_hamiltonian, build_switch_pair};

use crate::config::{FeedbackKind, JobConfig};
use crate::output::{json_string, write_csv, write_json};
use crate::CliError;

/// Serializes the resolved config for echoing into output files.
fn config_echo(cfg: &JobConfig) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(cfg).map_err(|e| CliError::Invalid(format!("echoing config: {e}")))
}

/// Synthesizes a switching schedule for the named gate and writes
/// `schedule.json` plus `switching.csv`.
pub fn synth(cfg: &JobConfig, out: &Path) -> Result<(), CliError> {
    let chain = cfg.chain()?.to_chain_spec()?;
    let pair = build_switch_pair(&chain, cfg.actuator_r())?;
    let angle = hamiltonian_angle(&pair.0, &pair.1)?;
    let synth = cfg.synthesis()?;
    let target = target_gate(&synth.gate)?;

    let mut job = SynthesisJob::new(target, pair);
    job.fidelity_goal = synth.fidelity_goal;
    job.max_segments = synth.max_segments;
    job.restarts = synth.restarts;
    job.total_time_cap = synth.total_time_cap;
    job.seed = synth.seed;
    let result = synthesize_gate(&job)?;

    let status = match result.status {
        SynthesisStatus::Converged => "converged",
        SynthesisStatus::BudgetExhausted => "budget_exhausted",
    };
    write_json(
        &out.join("schedule.json"),
        &json!({
            "gate": synth.gate,
            "m": result.schedule.m(),
            "t": result.schedule.t(),
            "fidelity": result.achieved_fidelity,
            "status": status,
            "hamiltonian_angle_rad": angle,
        }),
    )?;

    let mut rows = Vec::new();
    let mut now = 0.0;
    for (&m, &dwell) in result.schedule.m().iter().zip(result.schedule.t()) {
        rows.push(vec![now, m as f64]);
        now += dwell;
        rows.push(vec![now, m as f64]);
    }
    write_csv(
        &out.join("switching.csv"),
        None,
        &["time".into(), "actuator_state".into()],
        &rows,
    )?;

    if result.status == SynthesisStatus::BudgetExhausted {
        return Err(CliError::Failed(format!(
            "gate {}: fidelity goal {} not reached, best schedule gives {:.6}",
            synth.gate, synth.fidelity_goal, result.achieved_fidelity
        )));
    }
    Ok(())
}

/// Runs the Lie-closure controllability test on the switch pair and
/// writes `report.json`.
pub fn controllability(cfg: &JobConfig, out: &Path) -> Result<(), CliError> {
    let chain = cfg.chain()?.to_chain_spec()?;
    let (h_off, h_on) = build_switch_pair(&chain, cfg.actuator_r())?;
    let report = lie_closure(&[h_off, h_on], DEFAULT_RANK_TOL, None)?;
    write_json(
        &out.join("report.json"),
        &json!({
            "n": chain.n(),
            "dimension": report.dimension,
            "controllable": is_controllable(&report),
        }),
    )
}

fn load_unitary(config_dir: &Path, name: &str) -> Result<UnitaryOperator, CliError> {
    let path = config_dir.join(name);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Invalid(format!("reading {}: {e}", path.display())))?;
    let rows: crate::config::MatrixRows = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    Ok(UnitaryOperator::new(from_reim_rows(&rows)?)?)
}

/// Compares a realized gate against its target: average-fidelity trace
/// term, Pauli weight spectrum of the error operator, and the penalized
/// objective. Writes `weights.json`.
pub fn ft_analyze(cfg: &JobConfig, config_dir: &Path, out: &Path) -> Result<(), CliError> {
    let ft = cfg.ft()?;
    let u_t = load_unitary(config_dir, &ft.u_t)?;
    let u_r = load_unitary(config_dir, &ft.u_r)?;
    let dim = u_t.dim();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(CliError::Invalid(format!(
            "ft: matrices must act on qubits (dimension a power of two), got {dim}"
        )));
    }
    let n = dim.trailing_zeros() as usize;

    let weights = match &ft.lambda {
        Some(l) => PenaltyWeights::new(l.clone())?,
        None => PenaltyWeights::default_for(n),
    };
    let fidelity = gate_fidelity(&u_r, &u_t, FidelityMode::PhaseSensitive)?;
    let u_e = error_operator(&u_t, &u_r)?;
    let spectrum = weight_spectrum(&pauli_expand(u_e.matrix(), n)?);
    let penalized = penalized_objective(&u_r, &u_t, &weights)?;

    let mut resolved = cfg.clone();
    if let Some(sec) = resolved.ft.as_mut() {
        sec.lambda = Some(weights.lambda().to_vec());
    }
    write_json(
        &out.join("weights.json"),
        &json!({
            "config": config_echo(&resolved)?,
            "fidelity": fidelity,
            "lambda": weights.lambda(),
            "penalized": penalized,
            "weights": spectrum.w(),
        }),
    )
}

fn populations(rho: &CMat) -> Vec<f64> {
    (0..rho.nrows()).map(|i| rho[(i, i)].re).collect()
}

/// Integrates the configured open-system model. With `trajectories: 0`
/// the Lindblad mean goes to `ensemble.csv`; otherwise each conditional
/// trajectory gets its own `trajectory_<k>.csv` and their pointwise
/// average goes to `ensemble.csv`.
pub fn simulate(cfg: &JobConfig, out: &Path) -> Result<(), CliError> {
    let sim = cfg.simulate()?;
    let h = HermitianOperator::new(from_reim_rows(&sim.h)?)?;
    let n = h.dim();

    let channel_mats: Vec<CMat> = sim
        .channels
        .iter()
        .map(|rows| from_reim_rows(rows))
        .collect::<Result<_, _>>()?;
    let mut collapse: Vec<CMat> = sim
        .collapse_ops
        .iter()
        .map(|rows| from_reim_rows(rows))
        .collect::<Result<_, _>>()?;
    collapse.extend(channel_mats.iter().cloned());
    let model = LindbladModel::new(h, collapse)?;
    let channels: Vec<MeasurementChannel> = channel_mats
        .into_iter()
        .map(MeasurementChannel::new)
        .collect::<Result<_, _>>()?;
    let rho0 = from_reim_rows(&sim.rho0)?;

    let fb = match &sim.feedback {
        None => FeedbackRule::off(n),
        Some(f) => match f.mode {
            FeedbackKind::Off => FeedbackRule::off(n),
            FeedbackKind::CurrentProportional => {
                let rows = f.actuator.as_ref().ok_or_else(|| {
                    CliError::Invalid(
                        "simulate.feedback: mode current_proportional requires field `actuator`"
                            .into(),
                    )
                })?;
                FeedbackRule::current_proportional(
                    f.gain,
                    HermitianOperator::new(from_reim_rows(rows)?)?,
                )?
            }
        },
    };

    let echo = json_string(&config_echo(cfg)?)?;
    let mut mean_header: Vec<String> = vec!["time".into()];
    mean_header.extend((0..n).map(|i| format!("pop_{i}")));

    if sim.trajectories == 0 {
        let states = lindblad_propagate(&model, &rho0, sim.t, sim.dt)?;
        let rows: Vec<Vec<f64>> = states
            .iter()
            .map(|(t, rho)| {
                let mut row = vec![*t];
                row.extend(populations(rho));
                row
            })
            .collect();
        return write_csv(&out.join("ensemble.csv"), Some(&echo), &mean_header, &rows);
    }

    let trajs: Vec<QuantumTrajectory> = (0..sim.trajectories as u64)
        .into_par_iter()
        .map(|k| {
            sme_trajectory(
                &model,
                &channels,
                &fb,
                &rho0,
                sim.t,
                sim.dt,
                trajectory_seed(sim.seed, k),
            )
        })
        .collect::<Result<_, _>>()?;

    let n_ch = channels.len();
    let mut traj_header = mean_header.clone();
    traj_header.extend((0..n_ch).map(|c| format!("dy_{c}")));
    for (k, traj) in trajs.iter().enumerate() {
        let rows: Vec<Vec<f64>> = traj
            .times()
            .iter()
            .zip(traj.states())
            .enumerate()
            .map(|(i, (t, rho))| {
                let mut row = vec![*t];
                row.extend(populations(rho));
                for c in 0..n_ch {
                    row.push(if i == 0 {
                        0.0
                    } else {
                        traj.record()[(i - 1) * n_ch + c]
                    });
                }
                row
            })
            .collect();
        write_csv(
            &out.join(format!("trajectory_{k}.csv")),
            Some(&echo),
            &traj_header,
            &rows,
        )?;
    }

    let mean = ensemble_average(&trajs)?;
    let rows: Vec<Vec<f64>> = mean
        .iter()
        .map(|(t, rho)| {
            let mut row = vec![*t];
            row.extend(populations(rho));
            row
        })
        .collect();
    write_csv(&out.join("ensemble.csv"), Some(&echo), &mean_header, &rows)
}

/// Optimizes the electron-spin drive for the nuclear flip and writes
/// `pulse.json` plus `bloch.csv` with the nuclear Bloch trajectory.
pub fn pulse(cfg: &JobConfig, out: &Path) -> Result<(), CliError> {
    let ps = cfg.pulse()?;
    let (drift, controls) = build_1e1n_hamiltonian(&ps.hyperfine(), ps.frame.into())?;
    let mut initial = CVec::zeros(4);
    initial[0] = Complex64::new(1.0, 0.0);
    let mut goal = CVec::zeros(4);
    goal[1] = Complex64::new(1.0, 0.0);
    let problem = ControlProblem::new(
        drift,
        controls,
        Objective::StateTransfer { initial, goal },
        ps.horizon_ns,
        ps.segments,
    )?
    .with_amplitude_bound(ps.u_max_mhz * 1e-3)?;

    let (program, history) = grape_optimize(&problem, None, ps.iters, ps.seed)?;
    let fidelity = history.last().copied().unwrap_or(0.0);

    write_json(
        &out.join("pulse.json"),
        &json!({
            "config": config_echo(cfg)?,
            "dt": program.dt(),
            "amplitudes": program.amplitudes(),
            "fidelity": fidelity,
        }),
    )?;

    let echo = json_string(&config_echo(cfg)?)?;
    let bloch = bloch_trajectory(&problem, &program)?;
    let rows: Vec<Vec<f64>> = bloch
        .iter()
        .map(|(t, b)| vec![*t, b[0], b[1], b[2]])
        .collect();
    write_csv(
        &out.join("bloch.csv"),
        Some(&echo),
        &[
            "time".into(),
            "bx".into(),
            "by".into(),
            "bz".into(),
        ],
        &rows,
    )
}
