use num_complex::Complex64 as C64;
use serde::Serialize;

use super::hilbert::DensityMatrix;
use super::model::Liouvillian;
use super::OracleError;
use crate::linalg::{self, dagger, CMat, I};
use crate::registry::Registry;

/// Largest allowed dt·max(ω, ‖H‖).
pub const STEP_LIMIT: f64 = 0.05;
pub const TRACE_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationStats {
    pub strategy: String,
    pub steps: u64,
    pub dt: f64,
    pub trace_drift: f64,
    pub min_eigenvalue: f64,
    /// Largest anti-Hermitian residue removed by re-symmetrization.
    pub hermiticity_error: f64,
}

impl IntegrationStats {
    fn new(strategy: &str, dt: f64) -> Self {
        Self {
            strategy: strategy.into(),
            steps: 0,
            dt,
            trace_drift: 0.0,
            min_eigenvalue: f64::INFINITY,
            hermiticity_error: 0.0,
        }
    }

    fn observe(&mut self, rho: &DensityMatrix, tr0: f64) {
        self.trace_drift = self.trace_drift.max((rho.trace() - tr0).abs());
        self.min_eigenvalue = self.min_eigenvalue.min(rho.min_eigenvalue());
    }

    pub fn check(&self) -> Result<(), OracleError> {
        if !(self.trace_drift <= TRACE_TOL) {
            return Err(OracleError::Tolerance(format!(
                "trace drift {:.3e} exceeds {TRACE_TOL:e}",
                self.trace_drift
            )));
        }
        if !(self.min_eigenvalue >= -EIGEN_TOL) {
            return Err(OracleError::Tolerance(format!(
                "minimum eigenvalue {:.3e} below -{EIGEN_TOL:e}",
                self.min_eigenvalue
            )));
        }
        Ok(())
    }
}

pub trait MasterIntegrator: Send + Sync {
    fn name(&self) -> &'static str;

    /// States at each of the ascending `times`, starting from ρ(0) = `rho0`.
    fn trajectory(
        &self,
        l: &Liouvillian,
        rho0: &DensityMatrix,
        times: &[f64],
        dt: f64,
    ) -> Result<(Vec<DensityMatrix>, IntegrationStats), OracleError>;

    fn integrate(
        &self,
        l: &Liouvillian,
        rho0: &DensityMatrix,
        t: f64,
        dt: f64,
    ) -> Result<(DensityMatrix, IntegrationStats), OracleError> {
        let (mut v, s) = self.trajectory(l, rho0, &[t], dt)?;
        Ok((v.pop().expect("one state per time"), s))
    }
}

pub fn check_step(l: &Liouvillian, dt: f64) -> Result<(), OracleError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(OracleError::StepTooLarge { dt, product: f64::NAN, limit: STEP_LIMIT });
    }
    let product = dt * l.max_frequency().max(l.hamiltonian_norm_bound());
    if product > STEP_LIMIT {
        return Err(OracleError::StepTooLarge { dt, product, limit: STEP_LIMIT });
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<(), OracleError> {
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev && t.is_finite()) {
            return Err(OracleError::Unsupported(format!("times must be finite, ≥ 0 and ascending, got {t}")));
        }
        prev = t;
    }
    Ok(())
}

fn substeps(span: f64, dt: f64) -> u64 {
    if span <= 0.0 {
        0
    } else {
        ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as u64
    }
}

/// Classical fourth-order Runge–Kutta on the full master equation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Rk4;

impl Rk4 {
    fn step(l: &Liouvillian, t: f64, h: f64, rho: &CMat) -> CMat {
        let h0 = l.effective_at(t);
        let hm = if l.is_static() { h0.clone() } else { l.effective_at(t + h / 2.0) };
        let h1 = if l.is_static() { h0.clone() } else { l.effective_at(t + h) };
        let k1 = l.rhs_with(&h0, rho);
        let k2 = l.rhs_with(&hm, &(rho + &(&k1 * C64::new(h / 2.0, 0.0))));
        let k3 = l.rhs_with(&hm, &(rho + &(&k2 * C64::new(h / 2.0, 0.0))));
        let k4 = l.rhs_with(&h1, &(rho + &(&k3 * C64::new(h, 0.0))));
        let mut out = rho.clone();
        let w = C64::new(h / 6.0, 0.0);
        out.scaled_add(w, &k1);
        out.scaled_add(w * 2.0, &k2);
        out.scaled_add(w * 2.0, &k3);
        out.scaled_add(w, &k4);
        out
    }
}

impl MasterIntegrator for Rk4 {
    fn name(&self) -> &'static str {
        "rk4"
    }

    fn trajectory(
        &self,
        l: &Liouvillian,
        rho0: &DensityMatrix,
        times: &[f64],
        dt: f64,
    ) -> Result<(Vec<DensityMatrix>, IntegrationStats), OracleError> {
        check_step(l, dt)?;
        check_times(times)?;
        let mut stats = IntegrationStats::new(self.name(), dt);
        let tr0 = rho0.trace();
        let mut rho = rho0.rho.clone();
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            let n = substeps(target - t, dt);
            let h = if n > 0 { (target - t) / n as f64 } else { 0.0 };
            for i in 0..n {
                rho = Self::step(l, t + i as f64 * h, h, &rho);
                stats.hermiticity_error = stats.hermiticity_error.max(linalg::hermiticity_error(&rho));
                linalg::hermitize(&mut rho);
            }
            if !linalg::is_finite(&rho) {
                return Err(OracleError::Tolerance(format!("state became non-finite before t = {target}")));
            }
            stats.steps += n;
            t = target;
            let d = DensityMatrix { rho: rho.clone() };
            stats.observe(&d, tr0);
            out.push(d);
        }
        Ok((out, stats))
    }
}

/// Closed systems only: one-period propagator from RK4, made exactly unitary
/// and raised to the number of whole periods, then an RK4 remainder.
#[derive(Debug, Default, Clone, Copy)]
pub struct Stroboscopic;

impl Stroboscopic {
    fn period(l: &Liouvillian) -> Result<f64, OracleError> {
        let base = l
            .hamiltonian_oscillating
            .iter()
            .map(|(_, f)| f.abs())
            .fold(f64::INFINITY, f64::min);
        for (_, f) in &l.hamiltonian_oscillating {
            let k = f.abs() / base;
            if (k - k.round()).abs() > 1e-9 * k {
                return Err(OracleError::Unsupported(format!(
                    "frequencies {base} and {} are not commensurate",
                    f.abs()
                )));
            }
        }
        Ok(2.0 * std::f64::consts::PI / base)
    }

    fn unitary_rk4(l: &Liouvillian, span: f64, dt: f64) -> (CMat, u64) {
        let n = substeps(span, dt);
        let mut u = linalg::eye(l.dim());
        if n == 0 {
            return (u, 0);
        }
        let h = span / n as f64;
        let f = |t: f64, u: &CMat| -> CMat { l.hamiltonian_at(t).dot(u).mapv(|z| -I * z) };
        for i in 0..n {
            let t = i as f64 * h;
            let k1 = f(t, &u);
            let k2 = f(t + h / 2.0, &(&u + &(&k1 * C64::new(h / 2.0, 0.0))));
            let k3 = f(t + h / 2.0, &(&u + &(&k2 * C64::new(h / 2.0, 0.0))));
            let k4 = f(t + h, &(&u + &(&k3 * C64::new(h, 0.0))));
            let w = C64::new(h / 6.0, 0.0);
            u.scaled_add(w, &k1);
            u.scaled_add(w * 2.0, &k2);
            u.scaled_add(w * 2.0, &k3);
            u.scaled_add(w, &k4);
        }
        (u, n)
    }
}

fn is_diagonal(h: &CMat) -> bool {
    h.indexed_iter().all(|((i, j), z)| i == j || *z == C64::new(0.0, 0.0))
}

impl MasterIntegrator for Stroboscopic {
    fn name(&self) -> &'static str {
        "stroboscopic"
    }

    fn trajectory(
        &self,
        l: &Liouvillian,
        rho0: &DensityMatrix,
        times: &[f64],
        dt: f64,
    ) -> Result<(Vec<DensityMatrix>, IntegrationStats), OracleError> {
        if !l.is_closed() {
            return Err(OracleError::Unsupported(
                "stroboscopic integration needs a model without jump operators".into(),
            ));
        }
        check_step(l, dt)?;
        check_times(times)?;
        let mut stats = IntegrationStats::new(self.name(), dt);
        let tr0 = rho0.trace();
        let apply = |u: &CMat| -> DensityMatrix {
            let mut r = u.dot(&rho0.rho).dot(&dagger(u));
            linalg::hermitize(&mut r);
            DensityMatrix { rho: r }
        };
        let mut out = Vec::with_capacity(times.len());
        if l.is_static() && is_diagonal(&l.hamiltonian_static) {
            let e: Vec<f64> = l.hamiltonian_static.diag().iter().map(|z| z.re).collect();
            for &t in times {
                let mut r = rho0.rho.clone();
                for ((i, j), z) in r.indexed_iter_mut() {
                    if i != j {
                        *z *= C64::from_polar(1.0, -(e[i] - e[j]) * t);
                    }
                }
                let d = DensityMatrix { rho: r };
                stats.observe(&d, tr0);
                out.push(d);
            }
            return Ok((out, stats));
        }
        if l.is_static() {
            let mh = l.hamiltonian_static.mapv(|z| -I * z);
            for &t in times {
                let u = linalg::expm(&mh.mapv(|z| z * t))?;
                let d = apply(&u);
                stats.observe(&d, tr0);
                out.push(d);
            }
            return Ok((out, stats));
        }
        let tau = Self::period(l)?;
        let (u_raw, n) = Self::unitary_rk4(l, tau, dt);
        stats.steps += n;
        let u_period = linalg::nearest_unitary(&u_raw);
        let mut cached: (u64, CMat) = (0, linalg::eye(l.dim()));
        for &t in times {
            let mut k = (t / tau).floor() as u64;
            if t - (k + 1) as f64 * tau > -1e-12 * tau {
                k += 1;
            }
            let rem = (t - k as f64 * tau).max(0.0);
            let whole = if k >= cached.0 {
                cached.1.dot(&linalg::mat_pow(&u_period, k - cached.0))
            } else {
                linalg::mat_pow(&u_period, k)
            };
            cached = (k, whole.clone());
            let (u_rem, m) = Self::unitary_rk4(l, rem, dt);
            stats.steps += m;
            let u = u_rem.dot(&whole);
            let d = apply(&u);
            stats.observe(&d, tr0);
            out.push(d);
        }
        Ok((out, stats))
    }
}

pub fn integrator_registry() -> Registry<dyn MasterIntegrator> {
    let mut r: Registry<dyn MasterIntegrator> = Registry::new("master-integrator");
    r.register("rk4", || Box::new(Rk4));
    r.register("stroboscopic", || Box::new(Stroboscopic));
    r
}

/// Fourth-order integration of ρ(0) → ρ(t); aborts if the Lindblad
/// tolerances are violated.
pub fn integrate_master(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t: f64,
    dt: f64,
) -> Result<(DensityMatrix, IntegrationStats), OracleError> {
    let (rho, stats) = Rk4.integrate(l, rho0, t, dt)?;
    stats.check()?;
    Ok((rho, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::hilbert::{HilbertSpec, Level};
    use crate::oracle::model::{build_full_model, build_intermediate_model, ModelOptions};
    use crate::params::fixtures::working_point;
    use crate::params::PhysicalParams;

    fn blank(n: u64) -> PhysicalParams {
        let mut p = working_point().with_equal_branches(0.0);
        p.n_atoms = n;
        p.kappa = 0.0;
        p.delta = 0.0;
        p.g_a = C64::new(0.0, 0.0);
        p.g_b = C64::new(0.0, 0.0);
        p.omega_1 = C64::new(0.0, 0.0);
        p.omega_2 = C64::new(0.0, 0.0);
        p.delta_1 = 1.0;
        p.omega_ab = 1.0;
        p
    }

    #[test]
    fn zero_liouvillian_leaves_state() {
        let p = blank(1);
        let spec = HilbertSpec::new(1, 3, 1);
        let l = build_intermediate_model(&p, &spec, &ModelOptions::default()).unwrap();
        assert_eq!(linalg::max_abs(&l.hamiltonian_static), 0.0);
        let s = l.space.clone();
        let psi = (s.basis_vector(&[Level::A], 1) + s.basis_vector(&[Level::B], 0)).mapv(|z| z * 0.5f64.sqrt());
        let rho0 = DensityMatrix::pure(&psi);
        let (rho, _) = integrate_master(&l, &rho0, 3.0, 0.01).unwrap();
        assert_eq!(rho, rho0);
    }

    #[test]
    fn diagonal_hamiltonian_keeps_populations_exact() {
        let mut p = blank(2);
        p.delta = 2.0;
        p.g_a = C64::new(1.0, 0.0);
        p.g_b = C64::new(1.0, 0.0);
        p.delta_1 = 200.0;
        p.omega_ab = 250.0;
        let spec = HilbertSpec::new(2, 3, 2);
        let l = build_intermediate_model(&p, &spec, &ModelOptions::default()).unwrap();
        assert!(is_diagonal(&l.hamiltonian_static));
        let s = l.space.clone();
        let psi = (s.basis_vector(&[Level::A, Level::B], 1) + s.basis_vector(&[Level::B, Level::B], 0))
            .mapv(|z| z * 0.5f64.sqrt());
        let rho0 = DensityMatrix::pure(&psi);
        let times = [0.7, 3.0];
        let (fast, _) = Stroboscopic.trajectory(&l, &rho0, &times, 0.01).unwrap();
        let (slow, _) = Rk4.trajectory(&l, &rho0, &times, 1e-3).unwrap();
        for (f, r) in fast.iter().zip(&slow) {
            for i in 0..f.dim() {
                assert_eq!(f.rho[[i, i]], rho0.rho[[i, i]]);
            }
            assert!(linalg::max_abs(&(&f.rho - &r.rho)) < 1e-9);
        }
    }

    #[test]
    fn free_decay_of_excited_level() {
        let mut p = blank(1);
        p.gamma_a = 2.0;
        p.gamma_b = 1.0;
        let g = p.gamma_total();
        let spec = HilbertSpec::new(1, 3, 1);
        let l = build_full_model(&p, &spec, &ModelOptions::default()).unwrap();
        let rho0 = DensityMatrix::pure(&l.space.basis_vector(&[Level::E], 0));
        let (rho, stats) = integrate_master(&l, &rho0, 1.0 / g, 1e-3).unwrap();
        let pe = rho.weighted_population(&l.space.level_counts(Level::E));
        assert!((pe - (-1.0f64).exp()).abs() < 1e-6, "{pe}");
        assert!(stats.trace_drift < 1e-12);
    }

    #[test]
    fn detuned_rabi_oscillation() {
        let mut p = blank(1);
        p.omega_1 = C64::new(3.0, 0.0);
        p.delta_1 = 2.0;
        let spec = HilbertSpec::new(1, 3, 1);
        let l = build_full_model(&p, &spec, &ModelOptions::default()).unwrap();
        let times: Vec<f64> = (1..=8).map(|k| 0.4 * k as f64).collect();
        let (states, _) = Rk4.trajectory(&l, &l.initial_state(), &times, 1e-3).unwrap();
        let w = (9.0f64 + 4.0).sqrt();
        for (t, rho) in times.iter().zip(&states) {
            let pe = rho.weighted_population(&l.space.level_counts(Level::E));
            let exact = 9.0 / (w * w) * (w * t / 2.0).sin().powi(2);
            assert!((pe - exact).abs() < 1e-6, "t={t}: {pe} vs {exact}");
        }
    }

    #[test]
    fn raman_oscillation_is_unitary() {
        let mut p = working_point().with_equal_branches(0.0);
        p.n_atoms = 1;
        p.kappa = 0.0;
        let spec = HilbertSpec::new(1, 3, 2);
        let l = build_intermediate_model(&p, &spec, &ModelOptions::default()).unwrap();
        let rho0 = l.initial_state();
        let dt = 0.04 / l.hamiltonian_norm_bound();
        let (rho, stats) = integrate_master(&l, &rho0, 0.5, dt).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-9);
        assert!((rho.purity() - 1.0).abs() < 1e-9);
        assert!(stats.min_eigenvalue > -1e-9);
        let (exact, _) = Stroboscopic.integrate(&l, &rho0, 0.5, dt).unwrap();
        assert!(linalg::max_abs(&(&rho.rho - &exact.rho)) < 1e-9);
        // |a,0⟩ couples to |b,1⟩
        let pb = rho.weighted_population(&l.space.level_counts(Level::B));
        let n1 = rho.weighted_population(&l.space.photon_counts());
        assert!((pb - n1).abs() < 1e-9);
    }

    #[test]
    fn step_precondition() {
        let mut p = working_point();
        p.n_atoms = 1;
        let l = build_full_model(&p, &HilbertSpec::new(1, 4, 1), &ModelOptions::default()).unwrap();
        let r = integrate_master(&l, &l.initial_state(), 1e-3, 1e-3);
        assert!(matches!(r, Err(OracleError::StepTooLarge { .. })));
    }

    #[test]
    fn richardson_fourth_order() {
        let mut p = blank(1);
        p.omega_1 = C64::new(3.0, 0.0);
        p.delta_1 = 2.0;
        p.gamma_a = 0.7;
        p.gamma_b = 0.3;
        let spec = HilbertSpec::new(1, 3, 1);
        let l = build_full_model(&p, &spec, &ModelOptions::default()).unwrap();
        let pe = |dt: f64| {
            let (r, _) = Rk4.integrate(&l, &l.initial_state(), 2.0, dt).unwrap();
            r.rho
        };
        let (a, b, c) = (pe(0.01), pe(0.005), pe(0.0025));
        let d1 = linalg::max_abs(&(&a - &b));
        let d2 = linalg::max_abs(&(&b - &c));
        let ratio = d1 / d2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn open_full_model_preserves_trace() {
        let mut p = working_point();
        p.n_atoms = 2;
        let p = p.scaled(1e-2);
        let spec = HilbertSpec::new(2, 4, 1);
        let l = build_full_model(&p, &spec, &ModelOptions::default()).unwrap();
        let dt = 0.04 / l.max_frequency().max(l.hamiltonian_norm_bound());
        let (rho, stats) = integrate_master(&l, &l.initial_state(), 0.02, dt).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-8);
        assert!(stats.min_eigenvalue >= -1e-8);
    }

    #[test]
    fn frame_invariance_of_diagonal_observables() {
        let mut p = working_point().with_equal_branches(30.0);
        p.n_atoms = 1;
        let p = p.scaled(1e-2);
        let spec = HilbertSpec::new(1, 4, 2);
        let ld = build_full_model(&p, &spec, &ModelOptions { frame: crate::oracle::Frame::Drive, stark_compensation: false }).unwrap();
        let lg = build_full_model(&p, &spec, &ModelOptions { frame: crate::oracle::Frame::Ground, stark_compensation: false }).unwrap();
        let dt = 0.04 / ld.max_frequency().max(ld.hamiltonian_norm_bound()).max(lg.hamiltonian_norm_bound());
        let times = [0.01, 0.03];
        let (sd, _) = Rk4.trajectory(&ld, &ld.initial_state(), &times, dt).unwrap();
        let (sg, _) = Rk4.trajectory(&lg, &lg.initial_state(), &times, dt).unwrap();
        let obs = crate::oracle::model::Observables::new(&ld.space);
        for ((t, a), b) in times.iter().zip(&sd).zip(&sg) {
            let ma = obs.moments(a);
            let mb = obs.moments(b);
            assert!((ma.jz - mb.jz).norm() < 1e-8);
            assert!((ma.nab - mb.nab).norm() < 1e-8);
            assert!((obs.mean_photons(a) - obs.mean_photons(b)).abs() < 1e-8);
            // off-diagonal moments agree once the drive-frame state is mapped over
            let mapped = obs.moments(&ld.to_ground_frame(a, *t));
            assert!((mapped.jpp - mb.jpp).norm() < 1e-8);
            assert!((mapped.jpm - mb.jpm).norm() < 1e-8);
        }
    }
}
