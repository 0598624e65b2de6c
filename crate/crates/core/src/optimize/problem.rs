use argmin::core::{CostFunction, Error as ArgminError, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::OptimizeError;
use crate::moments::{evolve_squeezing, evolve_squeezing_auto, DEFAULT_STEPS};
use crate::params::{check_validity, PhysicalParams, Thresholds, ValidityReport};

/// Target of the cavity-population ratio that pins |Ω₁|.
pub const CAVITY_RATIO_TARGET: f64 = 1e-3;
/// Objective assigned when a trace cannot be evaluated at all.
const FAILED_OBJECTIVE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub max_iters: u64,
    /// Simplex spread of objective values at convergence.
    pub sd_tolerance: f64,
    pub seed: u64,
    pub n_steps: usize,
    /// Also search the relative phase of Ω₂.
    pub optimize_phase: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 400,
            sd_tolerance: 1e-9,
            seed: 0,
            n_steps: DEFAULT_STEPS,
            optimize_phase: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationProblem {
    /// Fixed N, couplings, decay rates and ω_ab; drives, δ and Δ₁ are overwritten.
    pub template: PhysicalParams,
    /// |Ω₂/Ω₁|
    pub ratio: Bounds,
    pub delta: Bounds,
    pub delta_1: Bounds,
    pub cavity_ratio_target: f64,
    /// Multiplies the pinned |Ω₁|; the objective does not depend on it.
    pub omega1_scale: f64,
    pub settings: OptimizerSettings,
}

impl OptimizationProblem {
    /// Default box around a template: r ∈ [10⁻², 10³], |δ| ≤ 4(κ + Γ),
    /// Δ₁ ∈ [Γ + κ, 100 ω_ab].
    pub fn new(template: PhysicalParams) -> Self {
        let width = template.kappa + template.gamma_total();
        Self {
            template,
            ratio: Bounds::new(1e-2, 1e3),
            delta: Bounds::new(-4.0 * width, 4.0 * width),
            delta_1: Bounds::new(width.max(1.0), 100.0 * template.omega_ab.abs().max(width)),
            cavity_ratio_target: CAVITY_RATIO_TARGET,
            omega1_scale: 1.0,
            settings: OptimizerSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        self.template.validate()?;
        let check = |name: &str, b: &Bounds, positive: bool| -> Result<(), OptimizeError> {
            if !(b.lo.is_finite() && b.hi.is_finite() && b.lo <= b.hi) {
                return Err(OptimizeError::Bounds(format!("{name}: [{}, {}]", b.lo, b.hi)));
            }
            if positive && b.lo <= 0.0 && !(b.lo == 0.0 && b.hi == 0.0 && name == "ratio") {
                return Err(OptimizeError::Bounds(format!("{name} must be positive, got [{}, {}]", b.lo, b.hi)));
            }
            Ok(())
        };
        check("ratio", &self.ratio, true)?;
        check("delta", &self.delta, false)?;
        check("delta_1", &self.delta_1, true)?;
        if self.template.g_b.norm() == 0.0 {
            return Err(OptimizeError::Bounds("g_b = 0 leaves |Ω₁| undetermined".into()));
        }
        if !(self.cavity_ratio_target > 0.0 && self.omega1_scale > 0.0) {
            return Err(OptimizeError::Bounds("cavity ratio target and omega1_scale must be positive".into()));
        }
        if self.settings.restarts == 0 {
            return Err(OptimizeError::Bounds("at least one restart is required".into()));
        }
        Ok(())
    }

    /// Physical parameters at a candidate point.
    pub fn candidate(&self, r: f64, delta: f64, delta_1: f64, phase: f64) -> PhysicalParams {
        let mut p = self.template;
        p.delta = delta;
        p.delta_1 = delta_1;
        let kp = p.kappa_prime();
        let omega1 = (self.cavity_ratio_target * 4.0 * p.lorentz(1) * (delta * delta + kp * kp / 4.0)
            / (p.n() * p.g_b.norm_sqr()))
        .sqrt()
            * self.omega1_scale;
        p.omega_1 = C64::new(omega1, 0.0);
        p.omega_2 = C64::from_polar(r * omega1, phase);
        p
    }

    fn coords(&self) -> Vec<Coord> {
        let mut v = Vec::new();
        if self.ratio.hi > 0.0 {
            v.push(Coord::log(Var::Ratio, self.ratio));
        }
        v.push(Coord::lin(Var::Delta, self.delta));
        v.push(Coord::log(Var::Delta1, self.delta_1));
        if self.settings.optimize_phase {
            v.push(Coord::lin(Var::Phase, Bounds::new(-std::f64::consts::PI, std::f64::consts::PI)));
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    Ratio,
    Delta,
    Delta1,
    Phase,
}

#[derive(Debug, Clone, Copy)]
struct Coord {
    var: Var,
    log: bool,
    lo: f64,
    hi: f64,
}

impl Coord {
    fn log(var: Var, b: Bounds) -> Self {
        Self { var, log: true, lo: b.lo.ln(), hi: b.hi.ln() }
    }

    fn lin(var: Var, b: Bounds) -> Self {
        Self { var, log: false, lo: b.lo, hi: b.hi }
    }

    fn value(&self, u: f64) -> f64 {
        let u = u.clamp(self.lo, self.hi);
        if self.log {
            u.exp()
        } else {
            u
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub r: f64,
    pub delta: f64,
    pub delta_1: f64,
    pub phase: f64,
}

fn point_of(problem: &OptimizationProblem, coords: &[Coord], u: &[f64]) -> Point {
    let mut p = Point {
        r: if problem.ratio.hi > 0.0 { problem.ratio.lo } else { 0.0 },
        delta: problem.delta.lo,
        delta_1: problem.delta_1.lo,
        phase: 0.0,
    };
    for (c, &x) in coords.iter().zip(u) {
        let v = c.value(x);
        match c.var {
            Var::Ratio => p.r = v,
            Var::Delta => p.delta = v,
            Var::Delta1 => p.delta_1 = v,
            Var::Phase => p.phase = v,
        }
    }
    p
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub point: Point,
    pub xi2_min: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Validity excess or failed evaluation replaced the trace minimum.
    pub penalized: bool,
    pub validity: Option<ValidityReport>,
}

/// Objective at one point: min over t of ξ², or 1 + validity excess when a
/// ratio reaches the warning threshold.
pub fn evaluate_point(problem: &OptimizationProblem, point: Point) -> Evaluation {
    let p = problem.candidate(point.r, point.delta, point.delta_1, point.phase);
    let failed = |validity| Evaluation {
        point,
        xi2_min: FAILED_OBJECTIVE,
        t_min: 0.0,
        t_max: 0.0,
        penalized: true,
        validity,
    };
    let Ok(validity) = check_validity(&p) else {
        return failed(None);
    };
    let warn = Thresholds::default().warn;
    let excess: f64 = validity.ratios().iter().map(|(_, r)| (r.value - warn).max(0.0)).sum();
    if validity.max_ratio() >= warn {
        return Evaluation {
            point,
            xi2_min: 1.0 + excess,
            t_min: 0.0,
            t_max: 0.0,
            penalized: true,
            validity: Some(validity),
        };
    }
    match evolve_squeezing_auto(&p, problem.settings.n_steps) {
        Ok(tr) if tr.min_xi2.is_finite() => Evaluation {
            point,
            xi2_min: tr.min_xi2,
            t_min: tr.t_min,
            t_max: tr.t_max,
            penalized: false,
            validity: Some(validity),
        },
        _ => failed(Some(validity)),
    }
}

/// Objective over the free coordinates only; fixed ones come from `base`.
struct Objective<'a> {
    problem: &'a OptimizationProblem,
    coords: &'a [Coord],
    free: &'a [usize],
    base: &'a [f64],
}

impl Objective<'_> {
    fn full(&self, v: &[f64]) -> Vec<f64> {
        objective_full(self.free, self.base, v)
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, v: &Self::Param) -> Result<f64, ArgminError> {
        Ok(evaluate_point(self.problem, point_of(self.problem, self.coords, &self.full(v))).xi2_min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartRecord {
    pub index: usize,
    pub start: Point,
    pub best: Point,
    pub xi2_min: f64,
    pub evaluations: u64,
    pub iterations: u64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumReport {
    pub xi2_min: f64,
    pub r: f64,
    pub delta: f64,
    pub delta_1: f64,
    pub phase: f64,
    pub t_min: f64,
    /// Horizon of the trace that produced the minimum.
    pub t_max: f64,
    pub evaluations: u64,
    pub feasible: bool,
    pub converged: bool,
    pub restarts: Vec<RestartRecord>,
    pub validity: Option<ValidityReport>,
    pub params: PhysicalParams,
}

impl OptimumReport {
    /// Relative difference between the reported minimum and a fresh trace at
    /// the argmin on the same horizon.
    pub fn reproduction_error(&self, n_steps: usize) -> Result<f64, OptimizeError> {
        if !self.feasible || self.t_max == 0.0 {
            return Ok(0.0);
        }
        let tr = evolve_squeezing(&self.params, self.t_max, n_steps)?;
        Ok((tr.min_xi2 - self.xi2_min).abs() / self.xi2_min.abs().max(f64::MIN_POSITIVE))
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let b = base as f64;
    let mut f = 1.0 / b;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * f;
        i /= base;
        f /= b;
    }
    x
}

/// Halton points with a seeded Cranley–Patterson rotation.
fn start_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (1..=n as u64)
        .map(|i| (0..dim).map(|d| (radical_inverse(i, PRIMES[d]) + shift[d]).fract()).collect())
        .collect()
}

fn run_restart(problem: &OptimizationProblem, coords: &[Coord], index: usize, h: &[f64]) -> Result<RestartRecord, OptimizeError> {
    let free: Vec<usize> = (0..coords.len()).filter(|&d| coords[d].hi > coords[d].lo).collect();
    let x0: Vec<f64> = coords.iter().zip(h).map(|(c, &s)| c.lo + (c.hi - c.lo) * s).collect();
    let start = point_of(problem, coords, &x0);
    if free.is_empty() {
        let e = evaluate_point(problem, start);
        return Ok(RestartRecord {
            index,
            start,
            best: start,
            xi2_min: e.xi2_min,
            evaluations: 1,
            iterations: 0,
            converged: true,
        });
    }
    let v0: Vec<f64> = free.iter().map(|&d| x0[d]).collect();
    let mut simplex = vec![v0.clone()];
    for (k, &d) in free.iter().enumerate() {
        let mut v = v0.clone();
        let step = 0.1 * (coords[d].hi - coords[d].lo);
        v[k] = if v[k] + step <= coords[d].hi { v[k] + step } else { v[k] - step };
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(problem.settings.sd_tolerance)
        .map_err(|e| OptimizeError::Solver(e.to_string()))?;
    let objective = Objective { problem, coords, free: &free, base: &x0 };
    let res = Executor::new(objective, solver)
        .configure(|s| s.max_iters(problem.settings.max_iters))
        .run()
        .map_err(|e| OptimizeError::Solver(e.to_string()))?;
    let state = res.state();
    let best_u = match state.get_best_param() {
        Some(v) => objective_full(&free, &x0, v),
        None => x0.clone(),
    };
    let evaluations = state.get_func_counts().get("cost_count").copied().unwrap_or(0);
    let converged = matches!(
        state.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::SolverConverged)
    );
    Ok(RestartRecord {
        index,
        start,
        best: point_of(problem, coords, &best_u),
        xi2_min: state.get_best_cost(),
        evaluations,
        iterations: state.get_iter(),
        converged,
    })
}

fn objective_full(free: &[usize], base: &[f64], v: &[f64]) -> Vec<f64> {
    let mut u = base.to_vec();
    for (&d, &x) in free.iter().zip(v) {
        u[d] = x;
    }
    u
}

/// Multi-start Nelder–Mead over (ln r, δ, ln Δ₁).
pub fn optimize(problem: &OptimizationProblem) -> Result<OptimumReport, OptimizeError> {
    problem.validate()?;
    let coords = problem.coords();
    let starts = start_points(problem.settings.restarts, coords.len(), problem.settings.seed);
    let records: Vec<RestartRecord> = starts
        .par_iter()
        .enumerate()
        .map(|(i, h)| run_restart(problem, &coords, i, h))
        .collect::<Result<_, _>>()?;
    let best = records
        .iter()
        .min_by(|a, b| a.xi2_min.total_cmp(&b.xi2_min).then(a.index.cmp(&b.index)))
        .expect("at least one restart");
    let e = evaluate_point(problem, best.best);
    let params = problem.candidate(e.point.r, e.point.delta, e.point.delta_1, e.point.phase);
    Ok(OptimumReport {
        xi2_min: e.xi2_min,
        r: e.point.r,
        delta: e.point.delta,
        delta_1: e.point.delta_1,
        phase: e.point.phase,
        t_min: e.t_min,
        t_max: e.t_max,
        evaluations: records.iter().map(|r| r.evaluations).sum::<u64>() + 1,
        feasible: !e.penalized,
        converged: records.iter().any(|r| r.converged && r.index == best.index),
        validity: e.validity,
        params,
        restarts: records,
    })
}
