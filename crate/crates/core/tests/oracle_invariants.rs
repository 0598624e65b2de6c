use cavsqueeze::oracle::hilbert::Level;
use cavsqueeze::oracle::integrate::{MasterIntegrator, Rk4};
use cavsqueeze::oracle::model::Observables;
use cavsqueeze::oracle::{
    build_full_model, build_intermediate_model, Frame, HilbertSpec, Liouvillian, ModelOptions,
};
use cavsqueeze::params::{check_validity, match_raman};
use cavsqueeze::PhysicalParams;
use num_complex::Complex64 as C64;

fn dissipative(n_atoms: u64) -> PhysicalParams {
    let delta_1 = 200.0;
    let mut p = PhysicalParams {
        n_atoms,
        g_a: C64::new(1.0, 0.0),
        g_b: C64::new(1.0, 0.0),
        omega_1: C64::new(2.0 * delta_1 * 5e-3f64.sqrt(), 0.0),
        omega_2: C64::new(0.0, 0.0),
        delta_1,
        omega_ab: 250.0,
        delta: 2.0,
        kappa: 2.0,
        gamma_a: 0.0,
        gamma_b: 0.0,
        gamma_o: 0.0,
    }
    .with_equal_branches(20.0);
    p.omega_2 = match_raman(&p).unwrap();
    p
}

fn dt_for(l: &Liouvillian) -> f64 {
    0.04 / l.max_frequency().max(l.hamiltonian_norm_bound())
}

fn opts() -> ModelOptions {
    ModelOptions { frame: Frame::Drive, stark_compensation: true }
}

#[test]
fn benchmark_is_in_validity_regime() {
    for n in [1, 2] {
        let v = check_validity(&dissipative(n)).unwrap();
        assert!(v.max_ratio() <= 1e-2, "{v:?}");
    }
}

#[test]
fn excited_population_after_settling() {
    let p = dissipative(1);
    let est = check_validity(&p).unwrap();
    let bound = 2.0 * est.ratio_excited_1.value.max(est.ratio_excited_2.value);
    let l = build_full_model(&p, &HilbertSpec::new(1, 4, 1), &opts()).unwrap();
    let settle = 10.0 / p.gamma_total();
    let times: Vec<f64> = (0..=20).map(|k| settle + 0.075 * k as f64).collect();
    let (states, stats) = Rk4.trajectory(&l, &l.initial_state(), &times, dt_for(&l)).unwrap();
    stats.check().unwrap();
    let obs = Observables::new(&l.space);
    for (t, r) in times.iter().zip(&states) {
        let pe = obs.excited_population(r) / p.n();
        assert!(pe < bound, "t = {t}: {pe} vs {bound}");
        assert!(pe > 0.0);
    }
}

#[test]
fn intermediate_photons_after_settling() {
    let p = dissipative(2);
    let bound = 2.0 * check_validity(&p).unwrap().mean_photon_estimate;
    let l = build_intermediate_model(&p, &HilbertSpec::new(2, 4, 2), &opts()).unwrap();
    let settle = 10.0 / p.kappa_prime();
    let times: Vec<f64> = (0..=20).map(|k| settle + 0.25 * k as f64).collect();
    let (states, stats) = Rk4.trajectory(&l, &l.initial_state(), &times, dt_for(&l)).unwrap();
    stats.check().unwrap();
    let obs = Observables::new(&l.space);
    for (t, r) in times.iter().zip(&states) {
        let n = obs.mean_photons(r);
        assert!(n < bound, "t = {t}: {n} vs {bound}");
    }
}

#[test]
fn scattering_into_b_matches_between_models() {
    // single atom: |a⟩ → |b⟩ pumping by spontaneous Raman scattering exercises
    // the composite jump operators against the explicit |e⟩ decay
    let p = dissipative(1);
    let spec = HilbertSpec::new(1, 4, 1);
    let full = build_full_model(&p, &spec, &opts()).unwrap();
    let inter = build_intermediate_model(&p, &spec, &opts()).unwrap();
    let times = [1.0, 2.0];
    let (sf, _) = Rk4.trajectory(&full, &full.initial_state(), &times, dt_for(&full)).unwrap();
    let (si, _) = Rk4.trajectory(&inter, &inter.initial_state(), &times, dt_for(&inter)).unwrap();
    for k in 0..times.len() {
        for level in [Level::B, Level::O] {
            let pf = sf[k].weighted_population(&full.space.level_counts(level));
            let pi = si[k].weighted_population(&inter.space.level_counts(level));
            assert!(pf > 0.0);
            assert!((pf - pi).abs() < 0.1 * pf, "{level:?} at t = {}: {pf} vs {pi}", times[k]);
        }
    }
}

#[test]
fn trace_and_positivity_on_open_runs() {
    let p = dissipative(2);
    let spec = HilbertSpec::new(2, 4, 1);
    let l = build_intermediate_model(&p, &spec, &opts()).unwrap();
    let (rho, stats) = Rk4.integrate(&l, &l.initial_state(), 5.0, dt_for(&l)).unwrap();
    assert!((rho.trace() - 1.0).abs() < 1e-8);
    assert!(stats.min_eigenvalue >= -1e-8);
    assert!(rho.hermiticity_error() < 1e-10);
}
