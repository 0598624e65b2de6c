use num_complex::Complex64 as C64;
use serde::Serialize;

use super::hilbert::{DensityMatrix, HilbertSpec};
use super::integrate::{integrator_registry, IntegrationStats};
use super::model::{build_full_model, build_intermediate_model, Frame, Liouvillian, ModelOptions, Observables};
use super::OracleError;
use crate::dicke::effective_coeffs;
use crate::moments::{self, assemble_generator, squeezing_parameter, MomentState, MOMENT_NAMES};
use crate::params::{check_validity, match_raman, PhysicalParams, ValidityReport};

/// Ratios above this mark the run as outside the elimination regime.
pub const REGIME_LIMIT: f64 = 1e-2;
const STEP_SAFETY: f64 = 0.04;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationOptions {
    pub hilbert: HilbertSpec,
    pub t_grid: Vec<f64>,
    /// None picks 0.04 / max(ω, ‖H‖) per model.
    pub dt: Option<f64>,
    /// "auto" uses the stroboscopic integrator for closed systems.
    pub integrator: String,
    pub frame: Frame,
    pub stark_compensation: bool,
}

impl ValidationOptions {
    pub fn new(hilbert: HilbertSpec, t_grid: Vec<f64>) -> Self {
        Self {
            hilbert,
            t_grid,
            dt: None,
            integrator: "auto".into(),
            frame: Frame::Drive,
            stark_compensation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub t: f64,
    pub moment: &'static str,
    pub full: C64,
    pub intermediate: C64,
    pub linear: C64,
    pub rel_dev_fi: f64,
    pub rel_dev_il: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub t: f64,
    pub photons_full: f64,
    pub photons_intermediate: f64,
    /// ⟨N_e⟩ / N in the full model.
    pub excited_full: f64,
    pub xi2_full: Option<f64>,
    pub xi2_intermediate: Option<f64>,
    pub xi2_linear: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationMeta {
    pub params: PhysicalParams,
    pub spec: HilbertSpec,
    pub frame: Frame,
    pub stark_compensation: bool,
    pub validity: ValidityReport,
    pub in_validity_regime: bool,
    pub full: IntegrationStats,
    pub intermediate: IntegrationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub records: Vec<Record>,
    pub points: Vec<PointSummary>,
    pub meta: ValidationMeta,
}

impl ValidationReport {
    fn select<'a>(&'a self, moment: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.moment == moment)
    }

    pub fn max_rel_dev_fi(&self, moment: &str) -> f64 {
        self.select(moment).map(|r| r.rel_dev_fi).fold(0.0, f64::max)
    }

    pub fn max_rel_dev_il(&self, moment: &str) -> f64 {
        self.select(moment).map(|r| r.rel_dev_il).fold(0.0, f64::max)
    }

    /// Moment-equation result against the full model.
    pub fn max_rel_dev_fl(&self, moment: &str) -> f64 {
        self.select(moment).map(|r| rel_dev(r.full, r.linear)).fold(0.0, f64::max)
    }
}

pub fn rel_dev(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn run(
    l: &Liouvillian,
    opts: &ValidationOptions,
) -> Result<(Vec<DensityMatrix>, IntegrationStats), OracleError> {
    let dt = opts
        .dt
        .unwrap_or_else(|| STEP_SAFETY / l.max_frequency().max(l.hamiltonian_norm_bound()).max(1e-300));
    let name = match opts.integrator.as_str() {
        "auto" if l.is_closed() => "stroboscopic",
        "auto" => "rk4",
        other => other,
    };
    let integrator = integrator_registry()
        .create(name)
        .map_err(|e| OracleError::Unsupported(e.to_string()))?;
    let (states, stats) = integrator.trajectory(l, &l.initial_state(), &opts.t_grid, dt)?;
    stats.check()?;
    let states = states.iter().zip(&opts.t_grid).map(|(r, &t)| l.to_ground_frame(r, t)).collect();
    Ok((states, stats))
}

fn xi2(m: &MomentState, n: u64) -> Option<f64> {
    squeezing_parameter(m, n).ok().map(|s| s.xi2)
}

/// Full model, intermediate model and moment equations from all atoms in
/// |a⟩ and an empty cavity.
pub fn validate_elimination(
    p: &PhysicalParams,
    opts: &ValidationOptions,
) -> Result<ValidationReport, OracleError> {
    if p.n_atoms as usize != opts.hilbert.n_atoms {
        return Err(OracleError::Refused(format!(
            "n_atoms = {} but the Hilbert space holds {} atoms",
            p.n_atoms, opts.hilbert.n_atoms
        )));
    }
    let validity = check_validity(p)?;
    let in_validity_regime = validity.max_ratio() <= REGIME_LIMIT;
    if !in_validity_regime {
        log::warn!("validity ratio {:.3e} outside the elimination regime", validity.max_ratio());
    }
    let mopts = ModelOptions { frame: opts.frame, stark_compensation: opts.stark_compensation };
    let full = build_full_model(p, &opts.hilbert, &mopts)?;
    let inter = build_intermediate_model(p, &opts.hilbert, &mopts)?;
    let (sf, stats_f) = run(&full, opts)?;
    let (si, stats_i) = run(&inter, opts)?;
    let obs_f = Observables::new(&full.space);
    let obs_i = Observables::new(&inter.space);
    let gen = assemble_generator(p)?;
    let v0 = moments::initial_state(p.n_atoms);

    let mut records = Vec::new();
    let mut points = Vec::new();
    for (k, &t) in opts.t_grid.iter().enumerate() {
        let mf = obs_f.moments(&sf[k]);
        let mi = obs_i.moments(&si[k]);
        let ml = moments::propagate(&gen, &v0, t)?;
        let (af, ai, al) = (mf.to_array(), mi.to_array(), ml.to_array());
        for (j, name) in MOMENT_NAMES.iter().enumerate() {
            records.push(Record {
                t,
                moment: name,
                full: af[j],
                intermediate: ai[j],
                linear: al[j],
                rel_dev_fi: rel_dev(af[j], ai[j]),
                rel_dev_il: rel_dev(ai[j], al[j]),
            });
        }
        points.push(PointSummary {
            t,
            photons_full: obs_f.mean_photons(&sf[k]),
            photons_intermediate: obs_i.mean_photons(&si[k]),
            excited_full: obs_f.excited_population(&sf[k]) / p.n(),
            xi2_full: xi2(&mf, p.n_atoms),
            xi2_intermediate: xi2(&mi, p.n_atoms),
            xi2_linear: xi2(&ml, p.n_atoms),
        });
    }
    Ok(ValidationReport {
        records,
        points,
        meta: ValidationMeta {
            params: *p,
            spec: opts.hilbert,
            frame: opts.frame,
            stark_compensation: opts.stark_compensation,
            validity,
            in_validity_regime,
            full: stats_f,
            intermediate: stats_i,
        },
    })
}

/// Dissipation-free two-atom benchmark: g = 1, δ = 2, ω_ab = 250, Δ₁ = 200,
/// |Ω₁|²/4Δ₁² = 5·10⁻³·s², Ω₂ Raman-matched.
pub fn two_atom_benchmark(drive_scale: f64) -> Result<PhysicalParams, OracleError> {
    let delta_1 = 200.0;
    let x = 5e-3 * drive_scale * drive_scale;
    let mut p = PhysicalParams {
        n_atoms: 2,
        g_a: C64::new(1.0, 0.0),
        g_b: C64::new(1.0, 0.0),
        omega_1: C64::new(2.0 * delta_1 * x.sqrt(), 0.0),
        omega_2: C64::new(0.0, 0.0),
        delta_1,
        omega_ab: 250.0,
        delta: 2.0,
        kappa: 0.0,
        gamma_a: 0.0,
        gamma_b: 0.0,
        gamma_o: 0.0,
    };
    p.omega_2 = match_raman(&p)?;
    p.validate()?;
    Ok(p)
}

/// π/χ for the benchmark drive, χ the ideal twisting rate.
pub fn pair_transfer_time(p: &PhysicalParams) -> Result<f64, OracleError> {
    let c = effective_coeffs(p).map_err(|e| OracleError::Refused(e.to_string()))?;
    let chi = 4.0 * c.c_pp.norm();
    if chi == 0.0 {
        return Err(OracleError::Refused("no pair coupling".into()));
    }
    Ok(std::f64::consts::PI / chi)
}
