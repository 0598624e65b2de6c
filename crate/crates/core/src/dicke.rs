//! Exact dissipation-free dynamics of the four-term pair Hamiltonian in the
//! symmetric (J = N/2) subspace, and the one-axis-twisting limit.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{CVec, I};
use crate::moments::MomentState;
use crate::params::{ParamError, PhysicalParams};

pub const MAX_ATOMS: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DickeError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("two-photon detuning is zero; the pair Hamiltonian is undefined")]
    ZeroDelta,
    #[error("n_atoms = {0} outside the supported range 1..={MAX_ATOMS}")]
    TooLarge(u64),
    #[error("evolution time {0} must be finite and nonnegative")]
    BadTime(f64),
}

/// Coefficients of J₊J₋, J₋J₊, J₊J₊ in the pair Hamiltonian; the J₋J₋
/// coefficient is the conjugate of `c_pp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCoeffs {
    pub c_pm: f64,
    pub c_mp: f64,
    pub c_pp: C64,
}

impl EffectiveCoeffs {
    pub fn c_mm(&self) -> C64 {
        self.c_pp.conj()
    }

    /// Pure twisting H = χ Jx², i.e. all four coefficients χ/4.
    pub fn twisting(chi: f64) -> Self {
        Self { c_pm: chi / 4.0, c_mp: chi / 4.0, c_pp: C64::new(chi / 4.0, 0.0) }
    }
}

pub fn effective_coeffs(p: &PhysicalParams) -> Result<EffectiveCoeffs, DickeError> {
    p.validate()?;
    if p.delta == 0.0 {
        return Err(DickeError::ZeroDelta);
    }
    let (d1, d2, d) = (p.delta_1, p.delta_2(), p.delta);
    Ok(EffectiveCoeffs {
        c_pm: (p.omega_1 * p.g_b).norm_sqr() / (4.0 * d1 * d1 * d),
        c_mp: (p.omega_2 * p.g_a).norm_sqr() / (4.0 * d2 * d2 * d),
        c_pp: p.omega_1.conj() * p.g_b * p.g_a.conj() * p.omega_2 / (4.0 * d1 * d2 * d),
    })
}

/// Amplitudes over m = -J..=J, index i = m + J.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeState {
    pub n_atoms: u64,
    pub amplitudes: CVec,
}

impl DickeState {
    /// All atoms in |a⟩, the m = +J state.
    pub fn stretched(n_atoms: u64) -> Self {
        let mut amplitudes = Array1::zeros(n_atoms as usize + 1);
        amplitudes[n_atoms as usize] = C64::new(1.0, 0.0);
        Self { n_atoms, amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    pub fn population(&self, m: f64) -> f64 {
        let i = (m + self.j()).round() as usize;
        self.amplitudes[i].norm_sqr()
    }
}

fn m_of(i: usize, j: f64) -> f64 {
    i as f64 - j
}

/// ⟨m+1|J₊|m⟩.
fn ladder(j: f64, m: f64) -> f64 {
    ((j - m) * (j + m + 1.0)).max(0.0).sqrt()
}

/// Pentadiagonal Hamiltonian: real diagonal and the m → m+2 elements.
struct Banded {
    diag: Vec<f64>,
    up2: Vec<C64>,
}

impl Banded {
    fn new(coeffs: &EffectiveCoeffs, n_atoms: u64) -> Self {
        let dim = n_atoms as usize + 1;
        let j = n_atoms as f64 / 2.0;
        let diag = (0..dim)
            .map(|i| {
                let m = m_of(i, j);
                coeffs.c_pm * (j + m) * (j - m + 1.0) + coeffs.c_mp * (j - m) * (j + m + 1.0)
            })
            .collect();
        let up2 = (0..dim.saturating_sub(2))
            .map(|i| {
                let m = m_of(i, j);
                coeffs.c_pp * ladder(j, m) * ladder(j, m + 1.0)
            })
            .collect();
        Self { diag, up2 }
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = x.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i >= 2 {
                s += self.up2[i - 2] * x[i - 2];
            }
            if i + 2 < n {
                s += self.up2[i].conj() * x[i + 2];
            }
            y[i] = s;
        }
    }

    fn spectrum_bounds(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i >= 2 {
                r += self.up2[i - 2].norm();
            }
            if i + 2 < n {
                r += self.up2[i].norm();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Dense matrix, for checks on small systems.
    fn dense(&self) -> crate::linalg::CMat {
        let n = self.diag.len();
        let mut h = ndarray::Array2::zeros((n, n));
        for i in 0..n {
            h[[i, i]] = C64::new(self.diag[i], 0.0);
            if i + 2 < n {
                h[[i + 2, i]] = self.up2[i];
                h[[i, i + 2]] = self.up2[i].conj();
            }
        }
        h
    }
}

/// Dicke-basis Hamiltonian as a dense matrix.
pub fn hamiltonian_matrix(coeffs: &EffectiveCoeffs, n_atoms: u64) -> crate::linalg::CMat {
    Banded::new(coeffs, n_atoms).dense()
}

/// Bessel functions J_0..=J_kmax at x by normalized backward recurrence.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; kmax + 1];
        v[0] = 1.0;
        return v;
    }
    let start = kmax.max(x.ceil() as usize) + 40 + (x.abs().sqrt() * 10.0) as usize;
    let mut vals = vec![0.0; start + 2];
    let mut next = 0.0;
    let mut cur = 1e-300;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        vals[k - 1] = cur;
        vals[k] = next;
        if cur.abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            cur *= 1e-250;
            next *= 1e-250;
        }
    }
    let norm: f64 = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    vals.truncate(kmax + 1);
    vals.iter().map(|v| v / norm).collect()
}

const CHEB_CHUNK: f64 = 200.0;

/// Apply exp(-iHt) by a Chebyshev expansion.
fn chebyshev_evolve(h: &Banded, psi: &mut [C64], t: f64) {
    let (lo, hi) = h.spectrum_bounds();
    let center = (hi + lo) / 2.0;
    let half = ((hi - lo) / 2.0).max(1e-300);
    let n = psi.len();
    let chunks = ((half * t) / CHEB_CHUNK).ceil().max(1.0) as usize;
    let dt = t / chunks as f64;
    let x = half * dt;
    let kmax = (x + 10.0 * x.cbrt() + 30.0) as usize;
    let bess = bessel_j_sequence(x, kmax);
    let phase = (-I * center * dt).exp();
    let mut hx = vec![C64::new(0.0, 0.0); n];
    // scaled operator H' = (H - center)/half
    let apply_scaled = |v: &[C64], out: &mut Vec<C64>, scratch: &mut Vec<C64>| {
        h.apply(v, scratch);
        for i in 0..n {
            out[i] = (scratch[i] - center * v[i]) / half;
        }
    };
    let mut scratch = vec![C64::new(0.0, 0.0); n];
    for _ in 0..chunks {
        let mut t_prev = psi.to_vec();
        let mut t_cur = vec![C64::new(0.0, 0.0); n];
        apply_scaled(&t_prev, &mut t_cur, &mut scratch);
        let mut acc: Vec<C64> = t_prev.iter().map(|v| v * bess[0]).collect();
        let mut coef = -I;
        for i in 0..n {
            acc[i] += 2.0 * bess[1] * coef * t_cur[i];
        }
        for (k, &bk) in bess.iter().enumerate().skip(2) {
            apply_scaled(&t_cur, &mut hx, &mut scratch);
            for i in 0..n {
                let nxt = 2.0 * hx[i] - t_prev[i];
                t_prev[i] = t_cur[i];
                t_cur[i] = nxt;
            }
            coef *= -I;
            let w = 2.0 * bk * coef;
            for i in 0..n {
                acc[i] += w * t_cur[i];
            }
            if bk.abs() < 1e-17 && k as f64 > x {
                break;
            }
        }
        for i in 0..n {
            psi[i] = acc[i] * phase;
        }
    }
}

pub fn dicke_evolve(
    coeffs: &EffectiveCoeffs,
    n_atoms: u64,
    t: f64,
) -> Result<DickeState, DickeError> {
    dicke_evolve_from(coeffs, &DickeState::stretched(n_atoms.max(1)), t, n_atoms)
}

pub fn dicke_evolve_from(
    coeffs: &EffectiveCoeffs,
    state: &DickeState,
    t: f64,
    n_atoms: u64,
) -> Result<DickeState, DickeError> {
    if n_atoms == 0 || n_atoms > MAX_ATOMS {
        return Err(DickeError::TooLarge(n_atoms));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DickeError::BadTime(t));
    }
    let mut psi: Vec<C64> = state.amplitudes.to_vec();
    if t > 0.0 {
        let h = Banded::new(coeffs, n_atoms);
        chebyshev_evolve(&h, &mut psi, t);
    }
    Ok(DickeState { n_atoms, amplitudes: Array1::from(psi) })
}

pub fn dicke_moments(state: &DickeState) -> MomentState {
    let j = state.j();
    let c = &state.amplitudes;
    let n = c.len();
    let mut jz = 0.0;
    let mut jpm = 0.0;
    let mut jmp = 0.0;
    let mut jpp = C64::new(0.0, 0.0);
    for i in 0..n {
        let m = m_of(i, j);
        let p = c[i].norm_sqr();
        jz += p * m;
        jpm += p * (j + m) * (j - m + 1.0);
        jmp += p * (j - m) * (j + m + 1.0);
        if i + 2 < n {
            jpp += c[i + 2].conj() * c[i] * ladder(j, m) * ladder(j, m + 1.0);
        }
    }
    let re = |x: f64| C64::new(x, 0.0);
    MomentState {
        jz: re(jz),
        nab: re(state.n_atoms as f64 * state.norm().powi(2)),
        jpp,
        jmm: jpp.conj(),
        jpm: re(jpm),
        jmp: re(jmp),
    }
}

/// ξ² by explicit minimization of the transverse second-moment matrix,
/// applying Jx and Jy to the state vector.
pub fn direct_squeezing(state: &DickeState) -> f64 {
    let j = state.j();
    let c = &state.amplitudes;
    let n = c.len();
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut y = vec![C64::new(0.0, 0.0); n];
    let mut jz = 0.0;
    for i in 0..n {
        let m = m_of(i, j);
        jz += c[i].norm_sqr() * m;
        if i + 1 < n {
            // J₊ moves amplitude of m into m+1, J₋ the reverse
            let l = ladder(j, m);
            let up = l * c[i];
            let down = l * c[i + 1];
            x[i + 1] += up / 2.0;
            x[i] += down / 2.0;
            y[i + 1] += up / (2.0 * I);
            y[i] -= down / (2.0 * I);
        }
    }
    let xx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    let yy: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    let xy: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    let tr = xx + yy;
    let det = xx * yy - xy * xy;
    let vmin = tr / 2.0 - ((tr / 2.0).powi(2) - det).max(0.0).sqrt();
    state.n_atoms as f64 * vmin / (jz * jz)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OatSample {
    pub t: f64,
    pub xi2: f64,
    pub jz: f64,
}

/// Exact H = χ Jx² evolution from the stretched state, evaluated in the Jx
/// eigenbasis where the propagator is diagonal.
pub struct OatEvolver {
    n_atoms: u64,
    chi: f64,
    ms: Vec<f64>,
    c0: Vec<C64>,
    ladder: Vec<f64>,
}

fn ln_binomial(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Lanczos approximation with g = 7.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &ci) in COEF.iter().enumerate().skip(1) {
        a += ci / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

impl OatEvolver {
    pub fn new(n_atoms: u64, chi: f64) -> Self {
        let n = n_atoms as f64;
        let j = n / 2.0;
        let ms: Vec<f64> = (0..=n_atoms).map(|i| i as f64 - j).collect();
        // Relabel (Jy, Jz, Jx) as (A1, A2, A3); the initial state is the top
        // A2 eigenstate, expanded in the A3 basis.
        let c0 = ms
            .iter()
            .map(|&m| {
                let mag = (0.5 * ln_binomial(n, j + m) - j * 2f64.ln()).exp();
                mag * (-I * m * PI / 2.0).exp()
            })
            .collect();
        let ladder = ms.iter().map(|&m| ladder(j, m)).collect();
        Self { n_atoms, chi, ms, c0, ladder }
    }

    pub fn sample(&self, t: f64) -> OatSample {
        let n = self.ms.len();
        let c: Vec<C64> = self
            .c0
            .iter()
            .zip(self.ms.iter())
            .map(|(c, &m)| c * (-I * self.chi * m * m * t).exp())
            .collect();
        let j = self.n_atoms as f64 / 2.0;
        let mut ap = C64::new(0.0, 0.0);
        let mut ap2 = C64::new(0.0, 0.0);
        let mut ap3 = C64::new(0.0, 0.0);
        let mut a3a3 = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            let m = self.ms[i];
            let p = c[i].norm_sqr();
            a3a3 += p * m * m;
            diag += p * (2.0 * j * (j + 1.0) - 2.0 * m * m);
            if i + 1 < n {
                let e = c[i + 1].conj() * self.ladder[i] * c[i];
                ap += e;
                ap3 += e * (2.0 * m + 1.0);
            }
            if i + 2 < n {
                ap2 += c[i + 2].conj() * self.ladder[i + 1] * self.ladder[i] * c[i];
            }
        }
        let jz = ((ap - ap.conj()) / (2.0 * I)).re;
        let a1a1 = 0.25 * (2.0 * ap2.re + diag);
        let a13 = ap3.re / 2.0;
        let tr = a3a3 + a1a1;
        let det = a3a3 * a1a1 - a13 * a13;
        let vmin = tr / 2.0 - ((tr / 2.0).powi(2) - det).max(0.0).sqrt();
        OatSample { t, xi2: self.n_atoms as f64 * vmin / (jz * jz), jz }
    }

    fn xi2_or_inf(&self, t: f64) -> f64 {
        let s = self.sample(t);
        if s.jz.abs() <= 1e-4 * self.n_atoms as f64 || !s.xi2.is_finite() {
            f64::INFINITY
        } else {
            s.xi2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OatMinimum {
    pub n_atoms: u64,
    pub xi2_min: f64,
    /// Time of the minimum in units of 1/χ.
    pub t_min_scaled: f64,
    /// xi2_min · N^(2/3).
    pub scaled_ratio: f64,
}

pub fn oat_min_squeezing(n_atoms: u64) -> Result<OatMinimum, DickeError> {
    if !(2..=MAX_ATOMS).contains(&n_atoms) {
        return Err(DickeError::TooLarge(n_atoms));
    }
    let ev = OatEvolver::new(n_atoms, 1.0);
    let guess = (n_atoms as f64).powf(-2.0 / 3.0);
    let (lo, hi) = (1e-3 * guess, 30.0 * guess);
    let pts = 240;
    let grid: Vec<f64> = (0..pts)
        .map(|k| lo * (hi / lo).powf(k as f64 / (pts - 1) as f64))
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&t| ev.xi2_or_inf(t)).collect();
    let (imin, _) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    let a = grid[imin.saturating_sub(1)];
    let b = grid[(imin + 1).min(pts - 1)];
    let (t, f) = golden(|t| ev.xi2_or_inf(t), a, b);
    let (t, f) = if f <= vals[imin] { (t, f) } else { (grid[imin], vals[imin]) };
    let ratio = f * (n_atoms as f64).powf(2.0 / 3.0);
    log::info!("one-axis twisting N = {n_atoms}: xi2_min N^(2/3) = {ratio:.4}");
    Ok(OatMinimum { n_atoms, xi2_min: f, t_min_scaled: t, scaled_ratio: ratio })
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..300 {
        if b - a <= 1e-14 * b {
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

/// (t, ξ²) samples of the ideal curve, CSV formatted like moment traces.
pub fn oat_curve_csv(n_atoms: u64, chi: f64, times: &[f64]) -> String {
    let ev = OatEvolver::new(n_atoms, chi);
    let mut out = String::from("t,xi2\n");
    for &t in times {
        let s = ev.sample(t);
        out.push_str(&format!("{:.16e},{:.16e}\n", t, s.xi2));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, hermiticity_error};
    use crate::moments::squeezing_parameter;
    use crate::params::fixtures::working_point;
    use crate::params::match_raman;
    use approx::assert_relative_eq;

    #[test]
    fn matched_drive_gives_equal_coefficients() {
        let mut p = working_point();
        p.omega_2 = match_raman(&p).unwrap();
        let c = effective_coeffs(&p).unwrap();
        let k = 1e8 / (4.0 * 1e10 * 500.0);
        assert_relative_eq!(c.c_pm, k, max_relative = 1e-14);
        assert_relative_eq!(c.c_mp, k, max_relative = 1e-14);
        assert_relative_eq!(c.c_pp.re, k, max_relative = 1e-14);
        assert_eq!(c.c_mm(), c.c_pp.conj());
    }

    #[test]
    fn single_drive_has_no_pair_terms() {
        let mut p = working_point();
        p.omega_2 = C64::new(0.0, 0.0);
        let c = effective_coeffs(&p).unwrap();
        assert_eq!((c.c_mp, c.c_pp), (0.0, C64::new(0.0, 0.0)));
        assert!(c.c_pm > 0.0);
        p.delta = 0.0;
        assert_eq!(effective_coeffs(&p), Err(DickeError::ZeroDelta));
    }

    #[test]
    fn working_point_coefficients_direct() {
        let p = working_point();
        let c = effective_coeffs(&p).unwrap();
        let d2 = 1.1e5f64;
        assert_relative_eq!(c.c_pm, 1e8 / (4.0 * 1e10 * 500.0), max_relative = 1e-14);
        assert_relative_eq!(c.c_mp, 1e8 / (4.0 * d2 * d2 * 500.0), max_relative = 1e-14);
        assert_relative_eq!(c.c_pp.re, 1e8 / (4.0 * 1e5 * d2 * 500.0), max_relative = 1e-14);
    }

    #[test]
    fn twisting_equals_four_quarter_terms() {
        // χ Jx² with Jx = (J₊ + J₋)/2, checked on dense matrices for N = 5
        let n = 5u64;
        let j = n as f64 / 2.0;
        let dim = n as usize + 1;
        let mut jp = ndarray::Array2::<C64>::zeros((dim, dim));
        for i in 0..dim - 1 {
            jp[[i + 1, i]] = C64::new(ladder(j, i as f64 - j), 0.0);
        }
        let jm = linalg::dagger(&jp);
        let jx = (&jp + &jm).mapv(|z| z / 2.0);
        let chi = 0.37;
        let expect = jx.dot(&jx).mapv(|z| z * chi);
        let h = hamiltonian_matrix(&EffectiveCoeffs::twisting(chi), n);
        assert!(linalg::max_abs(&(&h - &expect)) < 1e-13);
        assert_eq!(hermiticity_error(&h), 0.0);
    }

    #[test]
    fn bessel_values() {
        let j = bessel_j_sequence(1.0, 3);
        assert_relative_eq!(j[0], 0.765_197_686_557_966_6, max_relative = 1e-13);
        assert_relative_eq!(j[1], 0.440_050_585_744_933_5, max_relative = 1e-13);
        assert_relative_eq!(j[3], 0.019_563_353_982_668_4, max_relative = 1e-12);
        let j = bessel_j_sequence(150.0, 200);
        let norm: f64 = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn chebyshev_matches_dense_exponential() {
        let coeffs = EffectiveCoeffs { c_pm: 0.3, c_mp: -0.1, c_pp: C64::new(0.2, 0.15) };
        let n = 12u64;
        let t = 3.7;
        let h = hamiltonian_matrix(&coeffs, n);
        let u = linalg::expm(&h.mapv(|z| -I * z * t)).unwrap();
        let psi0 = DickeState::stretched(n);
        let expect = u.dot(&psi0.amplitudes);
        let got = dicke_evolve(&coeffs, n, t).unwrap();
        let err = (&got.amplitudes - &expect).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "chebyshev error {err:e}");
    }

    #[test]
    fn evolve_zero_time_and_limits() {
        let c = EffectiveCoeffs::twisting(1.0);
        assert_eq!(dicke_evolve(&c, 7, 0.0).unwrap(), DickeState::stretched(7));
        assert_eq!(dicke_evolve(&c, MAX_ATOMS + 1, 1.0), Err(DickeError::TooLarge(MAX_ATOMS + 1)));
        assert_eq!(dicke_evolve(&c, 3, -1.0), Err(DickeError::BadTime(-1.0)));
    }

    #[test]
    fn two_atom_twisting_oracle() {
        // 3-level exact solution in the {+1, 0, -1} basis: the |±1⟩ block of
        // χ Jx² has eigenvalues χ and 0 and |0⟩ decouples.
        let chi = 0.8;
        for &t in &[0.0, 0.3, 1.1, 2.5, 7.0] {
            let s = dicke_evolve(&EffectiveCoeffs::twisting(chi), 2, t).unwrap();
            assert_relative_eq!(s.population(-1.0), (chi * t / 2.0).sin().powi(2), epsilon = 1e-12);
            assert!(s.population(0.0) < 1e-24);
        }
    }

    #[test]
    fn unitarity_long_time() {
        let coeffs = EffectiveCoeffs { c_pm: 0.02, c_mp: 0.015, c_pp: C64::new(0.01, -0.004) };
        let s = dicke_evolve(&coeffs, 40, 1e3).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn moments_of_simple_states() {
        let m = dicke_moments(&DickeState::stretched(6));
        assert_eq!((m.jz.re, m.nab.re, m.jpm.re, m.jmp.re), (3.0, 6.0, 6.0, 0.0));
        assert_eq!(m.jpp, C64::new(0.0, 0.0));
        // (|+1⟩ + |-1⟩)/√2 for N = 2: jpm = jmp = (2 + 2)/2 = 2, jpp = 2·(1/2)...
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = DickeState { n_atoms: 2, amplitudes: ndarray::arr1(&[C64::new(r, 0.0), C64::new(0.0, 0.0), C64::new(r, 0.0)]) };
        let m = dicke_moments(&s);
        assert_eq!(m.jz.re, 0.0);
        // J₊J₋ gives 2 on |+1⟩, 0 on |-1⟩; J₋J₊ the reverse
        assert_relative_eq!(m.jpm.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.jmp.re, 1.0, epsilon = 1e-15);
        // ⟨+1|J₊J₊|-1⟩ = 2, so ⟨J₊J₊⟩ = 2·(1/2) = 1
        assert_relative_eq!(m.jpp.re, 1.0, epsilon = 1e-15);
        assert_eq!(m.jmm, m.jpp.conj());
    }

    #[test]
    fn moment_route_equals_direct_minimization() {
        let coeffs = EffectiveCoeffs::twisting(1.0);
        for &t in &[0.0, 0.01, 0.03, 0.08] {
            let s = dicke_evolve(&coeffs, 100, t).unwrap();
            let a = squeezing_parameter(&dicke_moments(&s), 100).unwrap().xi2;
            let b = direct_squeezing(&s);
            assert!((a - b).abs() <= 1e-8 * b, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn jx_basis_route_matches_dicke_basis() {
        for &n in &[2u64, 9, 60] {
            let ev = OatEvolver::new(n, 1.3);
            for &t in &[0.05, 0.2, 0.9] {
                let s = dicke_evolve(&EffectiveCoeffs::twisting(1.3), n, t).unwrap();
                let m = dicke_moments(&s);
                let sample = ev.sample(t);
                assert_relative_eq!(sample.jz, m.jz.re, epsilon = 1e-10 * n as f64);
                if m.jz.re.abs() < 0.05 * n as f64 {
                    continue;
                }
                assert_relative_eq!(sample.xi2, direct_squeezing(&s), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn two_atom_minimum() {
        // ξ²(t) = 1/(1 + |sin χt|) for N = 2, infimum 1/2 as t → π/2
        let ev = OatEvolver::new(2, 1.0);
        for &t in &[0.2, 0.9, 1.3] {
            assert_relative_eq!(ev.sample(t).xi2, 1.0 / (1.0 + t.sin()), max_relative = 1e-12);
        }
        let r = oat_min_squeezing(2).unwrap();
        assert!((r.xi2_min - 0.5).abs() < 1e-6, "{}", r.xi2_min);
        assert!((r.t_min_scaled - PI / 2.0).abs() < 1e-2);
    }

    #[test]
    fn twisting_improves_with_n() {
        let a = oat_min_squeezing(100).unwrap();
        let b = oat_min_squeezing(1000).unwrap();
        assert!(b.xi2_min < a.xi2_min);
        assert!(b.scaled_ratio > 0.5 && b.scaled_ratio < 2.0);
    }
}
