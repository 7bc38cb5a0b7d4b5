//! Oracle checks for the open-system integrators: analytic steady state,
//! conditioned-ensemble convergence, and noise statistics.

use nalgebra::dmatrix;
use num_complex::Complex64;
use qctl_core::linalg::{max_abs_entry, pauli_x, pauli_z, CMat, HermitianOperator};
use qctl_core::opensys::{
    ensemble_average, homodyne_model, lindblad_propagate, sme_trajectory, steady_state,
    trace_distance, trajectory_seed, FeedbackRule, LindbladModel, QuantumTrajectory,
};
use rayon::prelude::*;

fn lowering() -> CMat {
    dmatrix![
        Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0);
        Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0);
    ]
}

fn plus_state() -> CMat {
    CMat::from_element(2, 2, Complex64::new(0.5, 0.0))
}

#[test]
fn driven_qubit_relaxes_to_liouvillian_null_vector() {
    let omega = 0.9;
    let gamma: f64 = 0.8;
    let h = HermitianOperator::new(pauli_x() * Complex64::new(omega / 2.0, 0.0)).unwrap();
    let a = lowering() * Complex64::new(gamma.sqrt(), 0.0);
    let model = LindbladModel::new(h, vec![a]).unwrap();

    let analytic = steady_state(&model).unwrap();
    let excited = dmatrix![
        Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0);
        Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0);
    ];
    let trajectory = lindblad_propagate(&model, &excited, 60.0, 1e-3).unwrap();
    let (_, late) = trajectory.last().unwrap();
    let gap = max_abs_entry(&(late - &analytic));
    assert!(gap <= 1e-6, "long-time state misses steady state by {gap:.3e}");
}

#[test]
fn conditioned_ensemble_mean_tracks_master_equation() {
    let kappa: f64 = 1.0;
    let c = pauli_z() * Complex64::new(kappa.sqrt(), 0.0);
    let h = HermitianOperator::new(CMat::zeros(2, 2)).unwrap();
    let (model, channels) = homodyne_model(h, &[c]).unwrap();
    let rho0 = plus_state();
    let t = 1.0;
    let dt = 1e-3;

    let unconditional = lindblad_propagate(&model, &rho0, t, dt).unwrap();
    let fb = FeedbackRule::off(2);
    let trajectories: Vec<QuantumTrajectory> = (0..2000u64)
        .into_par_iter()
        .map(|k| {
            sme_trajectory(
                &model,
                &channels,
                &fb,
                &rho0,
                t,
                dt,
                trajectory_seed(1, k),
            )
            .expect("trajectory integrates")
        })
        .collect();

    for traj in &trajectories {
        for rho in traj.states() {
            assert!((rho.trace().re - 1.0).abs() <= 1e-8);
        }
    }

    let mean = ensemble_average(&trajectories).unwrap();
    let (_, mean_final) = mean.last().unwrap();
    let (_, unconditional_final) = unconditional.last().unwrap();
    let dist = trace_distance(mean_final, unconditional_final).unwrap();
    assert!(
        dist <= 0.02,
        "ensemble mean is {dist:.4} from the unconditional state"
    );
}

#[test]
fn recorded_noise_has_near_zero_mean() {
    // A zero measurement operator makes dy = dW exactly, so the record is
    // a direct sample of the Wiener increments.
    let h = HermitianOperator::new(CMat::zeros(2, 2)).unwrap();
    let (model, channels) = homodyne_model(h, &[CMat::zeros(2, 2)]).unwrap();
    let fb = FeedbackRule::off(2);
    let n_traj = 100u64;
    let n_steps = 200usize;
    let dt = 1e-3;
    let t = n_steps as f64 * dt;

    let mut sum = 0.0;
    let mut count = 0usize;
    for k in 0..n_traj {
        let traj = sme_trajectory(
            &model,
            &channels,
            &fb,
            &plus_state(),
            t,
            dt,
            trajectory_seed(7, k),
        )
        .unwrap();
        assert_eq!(traj.record().len(), n_steps);
        sum += traj.record().iter().sum::<f64>();
        count += traj.record().len();
    }
    let mean = sum / count as f64;
    let bound = 3.0 * (dt / count as f64).sqrt();
    assert!(
        mean.abs() <= bound,
        "noise mean {mean:.3e} exceeds the 3-sigma bound {bound:.3e}"
    );
}
