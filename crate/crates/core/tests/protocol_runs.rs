use giantcz::protocol::{preset, run_cz, run_dynamics, sweep_horizon, PhaseConvention, Placement};
use giantcz::tomography::average_fidelity;
use giantcz::Error;

fn small_config() -> giantcz::protocol::GateConfig {
    let mut c = preset("3e").unwrap();
    c.num_sites = 40;
    c.t_max = 90.0;
    c.dt = 0.5;
    c
}

#[test]
fn gate_runs_are_deterministic() {
    let c = small_config();
    let a = run_cz(&c).unwrap();
    let b = run_cz(&c).unwrap();
    assert_eq!(a, b);
}

#[test]
fn optimal_phases_never_lose_fidelity() {
    let mut c = small_config();
    let plain = run_cz(&c).unwrap();
    c.phase_convention = PhaseConvention::Optimal;
    let corrected = run_cz(&c).unwrap();
    for (p, q) in plain.samples.iter().zip(&corrected.samples) {
        assert!(q.process_fidelity >= p.process_fidelity - 1e-9, "t = {}", p.t);
        assert_eq!(p.trace_deficit, q.trace_deficit);
    }
}

#[test]
fn gate_samples_are_consistent() {
    let mut c = small_config();
    c.gamma_q = 1e-3;
    c.gamma_c = 2e-3;
    let run = run_cz(&c).unwrap();
    assert_eq!(run.samples.len(), 181);
    assert!(run.samples[0].trace_deficit.abs() < 1e-12);
    // identity at t = 0 compared against CZ
    assert!((run.samples[0].process_fidelity - 0.25).abs() < 1e-12);
    // the deficit includes reversible leakage into |20>, so it is not monotone
    assert!(run.samples.iter().all(|s| s.trace_deficit >= -1e-12));
    for s in &run.samples {
        assert_eq!(s.average_fidelity, average_fidelity(s.process_fidelity));
    }
    let r = run.result;
    assert!(run.samples.iter().all(|s| s.process_fidelity <= r.process_fidelity + 1e-12));
    assert_eq!(r.average_fidelity, average_fidelity(r.process_fidelity));
}

#[test]
fn dynamics_start_in_the_doubly_excited_state() {
    let mut c = small_config();
    c.t_max = 20.0;
    let d = run_dynamics(&c).unwrap();
    assert_eq!(d.n11[0], 1.0);
    assert_eq!(d.n20[0], 0.0);
    assert!(d.norm.iter().all(|n| (n - 1.0).abs() < 1e-9));
    assert_eq!(d.times.len(), 41);
}

#[test]
fn separated_atoms_do_not_exchange() {
    let mut c = small_config();
    c.placement = Placement { atom2_offset: 9, atom1_start: None };
    let d = run_dynamics(&c).unwrap();
    assert!(d.n20.iter().all(|&p| p < 0.05));
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = small_config();
    c.omega1 = 0.3;
    assert!(matches!(c.check_df_condition(0.05), Err(Error::Config(_))));
    let mut c = small_config();
    c.dt = 0.0;
    assert!(run_cz(&c).is_err());
    let mut c = small_config();
    c.gamma_c = -1.0;
    assert!(run_dynamics(&c).is_err());
}

#[test]
fn sweep_horizon_covers_an_exchange_cycle() {
    assert_eq!(sweep_horizon(0.1), 150.0);
    assert!((sweep_horizon(0.05) - 400.0).abs() < 1e-9);
    assert!(sweep_horizon(0.03) > 1000.0);
}
