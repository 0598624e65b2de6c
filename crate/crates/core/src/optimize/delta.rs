use serde::Serialize;

use super::problem::{optimize, Bounds, OptimizationProblem, OptimumReport};
use super::OptimizeError;
use crate::moments::{evolve_squeezing, mirrored};
use crate::params::PhysicalParams;

/// Relative margin within which δ = 0 counts as optimal.
pub const OPTIMALITY_MARGIN: f64 = 0.02;
/// "≪" read as a factor of ten.
pub const WEAK_PUMP_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideConditions {
    /// √N |Ω₁ g_b / Δ₁| / κ
    pub pump_over_kappa: f64,
    /// (|Ω₂ g_a| / √D₂) / (|Ω₁ g_b| / √D₁); photon absorption dominates above 1.
    pub absorption_ratio: f64,
    pub satisfied: bool,
    pub explanation: Option<String>,
}

pub fn side_conditions(p: &PhysicalParams) -> SideConditions {
    let pump = p.n().sqrt() * (p.omega_1 * p.g_b).norm() / p.delta_1.abs();
    let pump_over_kappa = if p.kappa > 0.0 { pump / p.kappa } else { f64::INFINITY };
    let emit = (p.omega_1 * p.g_b).norm() / p.lorentz(1).sqrt();
    let absorb = (p.omega_2 * p.g_a).norm() / p.lorentz(2).sqrt();
    let absorption_ratio = if emit > 0.0 { absorb / emit } else { f64::INFINITY };
    let mut why = Vec::new();
    if !(pump_over_kappa < WEAK_PUMP_LIMIT) {
        why.push(format!("√N|Ω₁g_b/Δ₁|/κ = {pump_over_kappa:.3e} not below {WEAK_PUMP_LIMIT}"));
    }
    if !(absorption_ratio > 1.0) {
        why.push(format!("absorption/emission amplitude ratio {absorption_ratio:.3e} not above 1"));
    }
    SideConditions {
        pump_over_kappa,
        absorption_ratio,
        satisfied: why.is_empty(),
        explanation: (!why.is_empty()).then(|| why.join("; ")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub delta: f64,
    pub xi2_min: f64,
    pub r: f64,
    pub delta_1: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaZeroReport {
    pub side: SideConditions,
    pub skipped: bool,
    pub xi2_at_zero: f64,
    pub kappa_prime: f64,
    pub probes: Vec<Probe>,
    pub best_delta: f64,
    pub best_xi2: f64,
    /// (ξ²(δ=0) − best) / best
    pub relative_gap: f64,
    pub passed: Option<bool>,
    /// Largest relative difference of min ξ² between each probe and its mirror image.
    pub mirror_deviation: f64,
    pub at_zero: OptimumReport,
}

fn fixed_delta(problem: &OptimizationProblem, delta: f64) -> Result<OptimumReport, OptimizeError> {
    let mut p = problem.clone();
    p.delta = Bounds::fixed(delta);
    optimize(&p)
}

fn mirror_gap(r: &OptimumReport, n_steps: usize) -> Result<f64, OptimizeError> {
    if !r.feasible {
        return Ok(0.0);
    }
    let a = evolve_squeezing(&r.params, r.t_max, n_steps)?.min_xi2;
    let b = evolve_squeezing(&mirrored(&r.params), r.t_max, n_steps)?.min_xi2;
    Ok((a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
}

/// Optimize (r, Δ₁) at δ = 0 and at δ ∈ {±κ′/4, ±κ′, ±4κ′}, with κ′ taken at
/// the δ = 0 optimum.
pub fn delta_zero_check(problem: &OptimizationProblem) -> Result<DeltaZeroReport, OptimizeError> {
    let at_zero = fixed_delta(problem, 0.0)?;
    let side = side_conditions(&at_zero.params);
    let kappa_prime = at_zero.params.kappa_prime();
    let mut report = DeltaZeroReport {
        side: side.clone(),
        skipped: !side.satisfied,
        xi2_at_zero: at_zero.xi2_min,
        kappa_prime,
        probes: Vec::new(),
        best_delta: 0.0,
        best_xi2: at_zero.xi2_min,
        relative_gap: 0.0,
        passed: None,
        mirror_deviation: mirror_gap(&at_zero, problem.settings.n_steps)?,
        at_zero,
    };
    if report.skipped {
        log::warn!("delta = 0 check skipped: {}", side.explanation.as_deref().unwrap_or(""));
        return Ok(report);
    }
    for f in [-4.0, -1.0, -0.25, 0.25, 1.0, 4.0] {
        let d = f * kappa_prime;
        let r = fixed_delta(problem, d)?;
        report.mirror_deviation = report.mirror_deviation.max(mirror_gap(&r, problem.settings.n_steps)?);
        if r.feasible && r.xi2_min < report.best_xi2 {
            report.best_xi2 = r.xi2_min;
            report.best_delta = d;
        }
        report.probes.push(Probe { delta: d, xi2_min: r.xi2_min, r: r.r, delta_1: r.delta_1, feasible: r.feasible });
    }
    report.relative_gap = (report.xi2_at_zero - report.best_xi2) / report.best_xi2;
    report.passed = Some(report.relative_gap <= OPTIMALITY_MARGIN);
    Ok(report)
}
