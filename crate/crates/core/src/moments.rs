//! Closed linear equations for the six collective-spin moments, their
//! propagation and the spin-squeezing parameter.

use std::f64::consts::PI;

use ndarray::{arr1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, CMat, CVec, LinalgError, I};
use crate::params::{ParamError, PhysicalParams};

pub const JZ: usize = 0;
pub const NAB: usize = 1;
pub const PP: usize = 2;
pub const MM: usize = 3;
pub const PM: usize = 4;
pub const MP: usize = 5;

pub const MOMENT_NAMES: [&str; 6] = ["jz", "nab", "jpp", "jmm", "jpm", "jmp"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("propagation produced non-finite moments at t = {0}")]
    NonFinite(f64),
    #[error("squeezing parameter undefined: <Jz> = {0} is zero")]
    UndefinedJz(f64),
    #[error("invalid time grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentState {
    pub jz: C64,
    pub nab: C64,
    pub jpp: C64,
    pub jmm: C64,
    pub jpm: C64,
    pub jmp: C64,
}

impl MomentState {
    pub fn to_array(&self) -> [C64; 6] {
        [self.jz, self.nab, self.jpp, self.jmm, self.jpm, self.jmp]
    }

    pub fn from_array(a: [C64; 6]) -> Self {
        Self { jz: a[0], nab: a[1], jpp: a[2], jmm: a[3], jpm: a[4], jmp: a[5] }
    }

    pub fn to_vec(&self) -> CVec {
        arr1(&self.to_array())
    }

    pub fn from_vec(v: &CVec) -> Self {
        Self::from_array([v[0], v[1], v[2], v[3], v[4], v[5]])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// jpm - jmp - 2 jz, which vanishes for exact angular-momentum states.
    pub fn commutator_residual(&self) -> f64 {
        (self.jpm - self.jmp - 2.0 * self.jz).re
    }
}

pub fn initial_state(n_atoms: u64) -> MomentState {
    let n = n_atoms as f64;
    let z = C64::new(0.0, 0.0);
    MomentState {
        jz: C64::new(n / 2.0, 0.0),
        nab: C64::new(n, 0.0),
        jpp: z,
        jmm: z,
        jpm: C64::new(n, 0.0),
        jmp: z,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentGenerator {
    pub m: CMat,
}

type Row = [C64; 6];

fn real_row(coef_na: f64, coef_nb: f64) -> Row {
    // N_a = nab/2 + jz, N_b = nab/2 - jz
    let mut r = [C64::new(0.0, 0.0); 6];
    r[JZ] = C64::new(coef_na - coef_nb, 0.0);
    r[NAB] = C64::new((coef_na + coef_nb) / 2.0, 0.0);
    r
}

pub fn assemble_generator(p: &PhysicalParams) -> Result<MomentGenerator, MomentError> {
    p.validate()?;
    let n = p.n();
    let (ga, gb, gao) = (p.gamma_a, p.gamma_b, p.gamma_o);
    let g = p.gamma_total();
    let (d1, d2, d) = (p.delta_1, p.delta_2(), p.delta);
    let e1 = p.lorentz(1);
    let e2 = p.lorentz(2);
    let kp = p.kappa_prime();
    let den = d * d + kp * kp / 4.0;
    let p1 = p.omega_1.norm_sqr() / 4.0;
    let p2 = p.omega_2.norm_sqr() / 4.0;
    let a1 = p.omega_1.norm_sqr() * p.g_b.norm_sqr() / (4.0 * e1 * e1);
    let a2 = p.omega_2.norm_sqr() * p.g_a.norm_sqr() / (4.0 * e2 * e2);
    // coefficient multiplying <J-J-> and its conjugate multiplying <J+J+>
    let cm = p.omega_1 * p.omega_2.conj() * p.g_a * p.g_b.conj() / (4.0 * e1 * e2);
    let cp = cm.conj();
    let re = |x: f64| C64::new(x, 0.0);
    let gah = ga + gao / 2.0;
    let gbh = gb + gao / 2.0;

    let mut m: CMat = Array2::zeros((6, 6));
    let zero_m = a1 == 0.0 && a2 == 0.0 && p1 == 0.0 && p2 == 0.0;
    if zero_m {
        return Ok(MomentGenerator { m });
    }
    let inv_den = if den > 0.0 { 1.0 / den } else { f64::INFINITY };
    let cav = |x: C64| -> C64 {
        if x == C64::new(0.0, 0.0) {
            x
        } else {
            x * inv_den
        }
    };

    // population difference
    let mut row = real_row(-gbh / e1 * p1, gah / e2 * p2);
    row[PM] -= cav(re(a1 * (-d * d1 * (2.0 * gb + gao) + kp * d1 * d1 + kp * g * (ga - gb) / 4.0)));
    row[MP] -= cav(re(a2 * (d * d2 * (2.0 * ga + gao) - kp * d2 * d2 + kp * g * (ga - gb) / 4.0)));
    let common = re(-d * d1 * gbh + d * d2 * gah + kp * g * (ga - gb) / 4.0);
    let phase = 2.0 * d * d1 * d2 + kp * d1 * gah / 2.0 + kp * d2 * gbh / 2.0;
    row[MM] -= cav(cm * (common - I * phase));
    row[PP] -= cav(cp * (common + I * phase));
    set_row(&mut m, JZ, row);

    // total ground population
    let mut row = real_row(-gao / e1 * p1, -gao / e2 * p2);
    row[PM] += cav(re(gao * a1 * (2.0 * d * d1 + kp * g / 2.0)));
    row[MP] += cav(re(gao * a2 * (2.0 * d * d2 + kp * g / 2.0)));
    let common = re(d * (d1 + d2) + kp * g / 2.0);
    let phase = (d1 - d2) * kp / 2.0;
    row[MM] += cav(gao * cm * (common - I * phase));
    row[PP] += cav(gao * cp * (common + I * phase));
    set_row(&mut m, NAB, row);

    // pair coherence <J+J+>
    let mut row = [C64::new(0.0, 0.0); 6];
    row[PP] = re(-g / e1 * p1 - g / e2 * p2);
    let f = cav(-2.0 * I * n);
    let w1 = C64::new(d1, g / 2.0);
    let w2 = C64::new(d2, g / 2.0);
    let dp = C64::new(d, kp / 2.0);
    row[PP] += f * (a1 * e1 * dp + a2 * w2 * w2 * dp.conj());
    row[MP] += f * cm * w1 * w2.conj() * dp;
    row[PM] += f * cm * w1 * w2 * dp.conj();
    set_row(&mut m, PP, row);

    // <J-J-> follows by conjugation with the pair columns exchanged
    for k in 0..6 {
        let src = match k {
            PP => MM,
            MM => PP,
            other => other,
        };
        m[[MM, k]] = m[[PP, src]].conj();
    }

    // shared cavity-mediated vector
    let mut aux = [C64::new(0.0, 0.0); 6];
    aux[PM] = re(-a1 * kp * e1);
    aux[MP] = re(a2 * (d2 * d2 * kp - 2.0 * d2 * d * g - kp * g * g / 4.0));
    let base = re(-d * d2 * g - kp * g * g / 4.0);
    let ph = 2.0 * d * d1 * d2 + d1 * g * kp / 2.0;
    aux[MM] = cm * (base + I * ph);
    aux[PP] = cp * (base - I * ph);

    let s1 = p1 / e1;
    let s2 = p2 / e2;
    let mut row = real_row(s1 * ga + s2 * g, s2 * ga);
    row[PM] -= re((s1 + s2) * g);
    for k in 0..6 {
        row[k] -= cav(n * aux[k]);
    }
    set_row(&mut m, PM, row);

    let mut row = real_row(s1 * gb, s1 * g + s2 * gb);
    row[MP] -= re((s1 + s2) * g);
    for k in 0..6 {
        row[k] -= cav(n * aux[k]);
    }
    set_row(&mut m, MP, row);

    if !linalg::is_finite(&m) {
        return Err(MomentError::NonFinite(0.0));
    }
    Ok(MomentGenerator { m })
}

fn set_row(m: &mut CMat, i: usize, row: Row) {
    for (k, v) in row.into_iter().enumerate() {
        m[[i, k]] = v;
    }
}

impl MomentGenerator {
    pub fn derivative(&self, v: &MomentState) -> MomentState {
        MomentState::from_vec(&self.m.dot(&v.to_vec()))
    }

    /// Propagator exp(M t).
    pub fn propagator(&self, t: f64) -> Result<CMat, MomentError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(MomentError::BadGrid(format!("propagation time {t} must be >= 0")));
        }
        if t == 0.0 {
            return Ok(linalg::eye(6));
        }
        let a = self.m.mapv(|z| z * t);
        linalg::expm(&a).map_err(|e| match e {
            LinalgError::NonFinite => MomentError::NonFinite(t),
            other => MomentError::Linalg(other),
        })
    }
}

pub fn propagate(gen: &MomentGenerator, v0: &MomentState, t: f64) -> Result<MomentState, MomentError> {
    if t == 0.0 {
        return Ok(*v0);
    }
    let v = MomentState::from_vec(&gen.propagator(t)?.dot(&v0.to_vec()));
    if !v.is_finite() {
        return Err(MomentError::NonFinite(t));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Squeezing {
    pub xi2: f64,
    pub theta_min: f64,
    /// The variance expression was negative and has been clamped to zero.
    pub clamped: bool,
}

/// Smallest and largest transverse second moments, min/max over θ of <J_θ²>.
pub fn transverse_extremes(v: &MomentState) -> (f64, f64) {
    let mean = (v.jpm + v.jmp).re / 4.0;
    let half = v.jpp.norm() / 2.0;
    (mean - half, mean + half)
}

pub fn squeezing_parameter(v: &MomentState, n_atoms: u64) -> Result<Squeezing, MomentError> {
    let n = n_atoms as f64;
    let jz = v.jz.re;
    if !jz.is_finite() || jz.abs() <= 1e-12 * n {
        return Err(MomentError::UndefinedJz(jz));
    }
    let (vmin, _) = transverse_extremes(v);
    let clamped = vmin < 0.0;
    if clamped {
        log::warn!("negative transverse variance {vmin:e} clamped to zero");
    }
    let theta = if v.jpp.norm() == 0.0 {
        0.0
    } else {
        ((v.jpp.arg() + PI) / 2.0).rem_euclid(PI)
    };
    Ok(Squeezing {
        xi2: n * vmin.max(0.0) / (jz * jz),
        theta_min: if theta >= PI { 0.0 } else { theta },
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    NonFinite,
    ImaginaryPart,
    ConjugationBroken,
    NonPositiveJz,
    NegativeVariance,
    Uncertainty,
}

pub const PHYSICAL_TOL: f64 = 1e-8;

/// First physicality condition violated by `v`, if any.
pub fn physicality(v: &MomentState, n_atoms: u64) -> Option<Violation> {
    let n = n_atoms as f64;
    if !v.is_finite() {
        return Some(Violation::NonFinite);
    }
    let tol = PHYSICAL_TOL * n;
    let imag = [v.jz.im, v.nab.im, v.jpm.im, v.jmp.im];
    if imag.iter().any(|x| x.abs() > tol) {
        return Some(Violation::ImaginaryPart);
    }
    if (v.jmm - v.jpp.conj()).norm() > tol {
        return Some(Violation::ConjugationBroken);
    }
    if v.jz.re <= 0.0 {
        return Some(Violation::NonPositiveJz);
    }
    let (vmin, vmax) = transverse_extremes(v);
    if vmin < 0.0 {
        return Some(Violation::NegativeVariance);
    }
    if vmin * vmax < v.jz.re * v.jz.re / 4.0 * (1.0 - 1e-6) {
        return Some(Violation::Uncertainty);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub t: f64,
    pub reason: Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqueezingTrace {
    pub times: Vec<f64>,
    pub xi2: Vec<f64>,
    pub theta_min: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<MomentState>,
    pub min_xi2: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub truncated: Option<Truncation>,
    pub clamped_points: usize,
    /// Total ground-state population exceeded N somewhere on the trace.
    pub population_growth: bool,
}

impl SqueezingTrace {
    pub fn commutator_residual(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.commutator_residual()).collect()
    }

    pub fn max_conjugation_error(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.jmm - s.jpp.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imaginary(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|s| [s.jz.im, s.nab.im, s.jpm.im, s.jmp.im])
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    pub const CSV_HEADER: &'static str =
        "t,xi2,theta_min,jz_re,nab_re,jpp_re,jpp_im,jpm_re,jmp_re,commutator_residual";

    /// Header plus one line per grid point, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.times.len() * 256);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for (i, s) in self.states.iter().enumerate() {
            let cols = [
                self.times[i],
                self.xi2[i],
                self.theta_min[i],
                s.jz.re,
                s.nab.re,
                s.jpp.re,
                s.jpp.im,
                s.jpm.re,
                s.jmp.re,
                s.commutator_residual(),
            ];
            let line: Vec<String> = cols.iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Horizon heuristic 10/(N χ_eff).
pub fn default_t_max(p: &PhysicalParams) -> f64 {
    let kp = p.kappa_prime();
    let chi = (p.omega_1 * p.omega_2 * p.g_a * p.g_b).norm()
        / (p.delta_1 * p.delta_2() * p.delta.abs().max(kp / 2.0)).abs();
    if chi > 0.0 && chi.is_finite() {
        10.0 / (p.n() * chi)
    } else {
        match assemble_generator(p) {
            Ok(g) if linalg::norm1(&g.m) > 0.0 => 10.0 / linalg::norm1(&g.m),
            _ => 1.0,
        }
    }
}

pub const DEFAULT_STEPS: usize = 400;

fn xi2_at(gen: &MomentGenerator, v0: &MomentState, n: u64, t: f64) -> f64 {
    match propagate(gen, v0, t) {
        Ok(v) if physicality(&v, n).is_none() => {
            squeezing_parameter(&v, n).map(|s| s.xi2).unwrap_or(f64::INFINITY)
        }
        _ => f64::INFINITY,
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

pub fn evolve_squeezing(
    p: &PhysicalParams,
    t_max: f64,
    n_steps: usize,
) -> Result<SqueezingTrace, MomentError> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(MomentError::BadGrid(format!("t_max = {t_max} must be positive")));
    }
    if n_steps < 2 {
        return Err(MomentError::BadGrid(format!("n_steps = {n_steps} must be at least 2")));
    }
    let gen = assemble_generator(p)?;
    let n = p.n_atoms;
    let v0 = initial_state(n);
    let dt = t_max / (n_steps - 1) as f64;
    let step = gen.propagator(dt)?;

    let mut trace = SqueezingTrace {
        times: Vec::with_capacity(n_steps),
        xi2: Vec::with_capacity(n_steps),
        theta_min: Vec::with_capacity(n_steps),
        states: Vec::with_capacity(n_steps),
        min_xi2: 1.0,
        t_min: 0.0,
        t_max,
        truncated: None,
        clamped_points: 0,
        population_growth: false,
    };
    let mut v = v0.to_vec();
    for k in 0..n_steps {
        let t = if k + 1 == n_steps { t_max } else { k as f64 * dt };
        let s = MomentState::from_vec(&v);
        if !s.is_finite() && k > 0 {
            return Err(MomentError::NonFinite(t));
        }
        if let Some(reason) = physicality(&s, n) {
            trace.truncated = Some(Truncation { t, reason });
            log::debug!("trace truncated at t = {t}: {reason:?}");
            break;
        }
        let sq = squeezing_parameter(&s, n)?;
        if sq.clamped {
            trace.clamped_points += 1;
        }
        if s.nab.re > p.n() * (1.0 + 1e-12) {
            trace.population_growth = true;
        }
        trace.times.push(t);
        trace.xi2.push(sq.xi2);
        trace.theta_min.push(sq.theta_min);
        trace.states.push(s);
        v = step.dot(&v);
    }
    if trace.population_growth {
        log::warn!("total ground-state population grows above N along the trace");
    }

    let (imin, &fmin) = trace
        .xi2
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("trace holds the initial point");
    let last = trace.times.len() - 1;
    let lo = trace.times[imin.saturating_sub(1)];
    let hi = trace.times[(imin + 1).min(last)];
    trace.min_xi2 = fmin;
    trace.t_min = trace.times[imin];
    if hi > lo {
        let (tb, fb) = golden_section(|t| xi2_at(&gen, &v0, n, t), lo, hi);
        if fb < fmin {
            trace.min_xi2 = fb;
            trace.t_min = tb;
        }
    }
    Ok(trace)
}

/// True when the discrete minimum sits on the last grid point of an
/// untruncated trace, so a longer horizon could lower it.
pub fn minimum_at_horizon(trace: &SqueezingTrace) -> bool {
    if trace.truncated.is_some() {
        return false;
    }
    let last = trace.xi2.len() - 1;
    let imin = trace
        .xi2
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    imin == last
}

pub const MAX_EXTENSIONS: usize = 8;

/// Trace on the default horizon, lengthened fourfold while the minimum
/// sits on the horizon.
pub fn evolve_squeezing_auto(
    p: &PhysicalParams,
    n_steps: usize,
) -> Result<SqueezingTrace, MomentError> {
    let mut t_max = default_t_max(p);
    let mut trace = evolve_squeezing(p, t_max, n_steps)?;
    for _ in 0..MAX_EXTENSIONS {
        if !minimum_at_horizon(&trace) {
            break;
        }
        t_max *= 4.0;
        trace = evolve_squeezing(p, t_max, n_steps)?;
    }
    Ok(trace)
}

/// Parameters of the time-reversed mirror image: detunings and splitting
/// negated, couplings conjugated. The squeezing trace is unchanged.
pub fn mirrored(p: &PhysicalParams) -> PhysicalParams {
    PhysicalParams {
        g_a: p.g_a.conj(),
        g_b: p.g_b.conj(),
        omega_1: p.omega_1.conj(),
        omega_2: p.omega_2.conj(),
        delta_1: -p.delta_1,
        omega_ab: -p.omega_ab,
        delta: -p.delta,
        ..*p
    }
}
