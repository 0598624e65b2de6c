use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::hilbert::{DensityMatrix, HilbertSpec, Level, Space};
use super::OracleError;
use crate::linalg::{self, dagger, CMat, I};
use crate::moments::MomentState;
use crate::params::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// |e⟩ at ω₁, |b⟩ at 2ω_ab, cavity at ω₁ - ω_ab: both lasers static.
    Drive,
    /// |b⟩ at its bare splitting ω_ab, cavity at ω₁ - ω_ab: the frame of the
    /// ground-state and moment equations.
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelOptions {
    pub frame: Frame,
    /// Add +s_a N_a + s_b N_b to cancel the single-atom light shifts.
    pub stark_compensation: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { frame: Frame::Drive, stark_compensation: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Full,
    Intermediate,
}

/// Nonzero entries of a jump operator.
#[derive(Debug, Clone, PartialEq)]
struct SparseOp {
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    fn from_dense(a: &CMat) -> Self {
        let mut entries = Vec::new();
        for ((i, j), &v) in a.indexed_iter() {
            if v != C64::new(0.0, 0.0) {
                entries.push((i, j, v));
            }
        }
        Self { entries }
    }

    /// Accumulate L X L† into `out`.
    fn sandwich_into(&self, x: &CMat, out: &mut CMat) {
        let n = x.nrows();
        let mut lx: CMat = Array2::zeros((n, n));
        for &(r, c, v) in &self.entries {
            let row = x.row(c);
            let mut dst = lx.row_mut(r);
            dst.scaled_add(v, &row);
        }
        for &(r, c, v) in &self.entries {
            let vc = v.conj();
            for i in 0..n {
                out[[i, r]] += lx[[i, c]] * vc;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub kind: ModelKind,
    pub space: Space,
    pub frame: Frame,
    pub hamiltonian_static: CMat,
    /// Terms H_ν e^{iνt}, partners at ±ν together keep H(t) Hermitian.
    pub hamiltonian_oscillating: Vec<(CMat, f64)>,
    pub jump_operators: Vec<CMat>,
    sparse_jumps: Vec<SparseOp>,
    decay_sum: CMat,
    /// Diagonal generator W taking states of this frame to the ground frame.
    pub to_ground: Vec<f64>,
}

fn freq_key(f: f64) -> u64 {
    // collapse -0.0 onto +0.0
    (f + 0.0).to_bits()
}

impl Liouvillian {
    fn assemble(
        kind: ModelKind,
        space: Space,
        frame: Frame,
        terms: Vec<(CMat, f64)>,
        shift: &[f64],
        jumps: Vec<CMat>,
        to_ground: Vec<f64>,
    ) -> Self {
        let dim = space.dim;
        let mut buckets: BTreeMap<u64, (f64, CMat)> = BTreeMap::new();
        for (op, nu) in terms {
            for ((r, s), &v) in op.indexed_iter() {
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let f = nu + shift[r] - shift[s];
                let entry = buckets
                    .entry(freq_key(f))
                    .or_insert_with(|| (f + 0.0, Array2::zeros((dim, dim))));
                entry.1[[r, s]] += v;
            }
        }
        let mut hamiltonian_static = buckets
            .remove(&freq_key(0.0))
            .map(|(_, m)| m)
            .unwrap_or_else(|| Array2::zeros((dim, dim)));
        for (i, w) in shift.iter().enumerate() {
            hamiltonian_static[[i, i]] -= C64::new(*w, 0.0);
        }
        let hamiltonian_oscillating = buckets.into_values().map(|(f, m)| (m, f)).collect();
        let sparse_jumps = jumps.iter().map(SparseOp::from_dense).collect();
        let mut decay_sum: CMat = Array2::zeros((dim, dim));
        for l in &jumps {
            decay_sum += &dagger(l).dot(l);
        }
        Self {
            kind,
            space,
            frame,
            hamiltonian_static,
            hamiltonian_oscillating,
            jump_operators: jumps,
            sparse_jumps,
            decay_sum,
            to_ground,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn is_static(&self) -> bool {
        self.hamiltonian_oscillating.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.jump_operators.is_empty()
    }

    pub fn max_frequency(&self) -> f64 {
        self.hamiltonian_oscillating.iter().map(|(_, f)| f.abs()).fold(0.0, f64::max)
    }

    /// Upper bound on the operator norm of H(t).
    pub fn hamiltonian_norm_bound(&self) -> f64 {
        let b = |m: &CMat| linalg::norm1(m).min(linalg::norm_fro(m));
        b(&self.hamiltonian_static) + self.hamiltonian_oscillating.iter().map(|(m, _)| b(m)).sum::<f64>()
    }

    pub fn hamiltonian_at(&self, t: f64) -> CMat {
        let mut h = self.hamiltonian_static.clone();
        for (m, f) in &self.hamiltonian_oscillating {
            h.scaled_add((I * f * t).exp(), m);
        }
        h
    }

    /// H(t) - (i/2) Σ L†L.
    pub fn effective_at(&self, t: f64) -> CMat {
        let mut h = self.hamiltonian_at(t);
        if !self.is_closed() {
            h.scaled_add(C64::new(0.0, -0.5), &self.decay_sum);
        }
        h
    }

    /// dρ/dt for Hermitian ρ.
    pub fn rhs(&self, t: f64, rho: &CMat) -> CMat {
        self.rhs_with(&self.effective_at(t), rho)
    }

    pub fn rhs_with(&self, heff: &CMat, rho: &CMat) -> CMat {
        let a = heff.dot(rho);
        let n = rho.nrows();
        let mut out: CMat = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                // -i (A - A†)
                out[[i, j]] = -I * (a[[i, j]] - a[[j, i]].conj());
            }
        }
        for l in &self.sparse_jumps {
            l.sandwich_into(rho, &mut out);
        }
        out
    }

    /// All atoms in |a⟩, cavity in vacuum.
    pub fn initial_state(&self) -> DensityMatrix {
        let atoms = vec![Level::A; self.space.n_atoms];
        DensityMatrix::pure(&self.space.basis_vector(&atoms, 0))
    }

    pub fn to_ground_frame(&self, rho: &DensityMatrix, t: f64) -> DensityMatrix {
        let w = &self.to_ground;
        if w.iter().all(|&x| x == 0.0) {
            return rho.clone();
        }
        let n = rho.dim();
        let r = Array2::from_shape_fn((n, n), |(i, j)| rho.rho[[i, j]] * (I * (w[i] - w[j]) * t).exp());
        DensityMatrix { rho: r }
    }
}

fn common_checks(p: &PhysicalParams, spec: &HilbertSpec) -> Result<(), OracleError> {
    p.validate()?;
    spec.validate()?;
    if p.gamma_o > 0.0 && !spec.has_o() {
        return Err(OracleError::Refused(
            "gamma_o > 0 needs the extra decay level (atom_levels = 4)".into(),
        ));
    }
    Ok(())
}

/// Diagonal offsets (c_a, c_b) on |a⟩ and |b⟩ that pin the real parts of the
/// dressed single-atom levels (both lasers, empty cavity, drive frame) to the
/// bare energies 0 and -ω_ab, to all orders in the drives.
pub fn light_shift_compensation(p: &PhysicalParams) -> (f64, f64) {
    let he = C64::new(p.delta_1, -p.gamma_total() / 2.0);
    let down = [p.omega_1.conj() / 2.0, p.omega_2.conj() / 2.0];
    let up = [p.omega_1 / 2.0, p.omega_2 / 2.0];
    let target = [0.0, -p.omega_ab];
    // eigenvalue of the Schur complement onto {a, b} continued from `start`
    let level = |diag: [f64; 2], start: f64| -> f64 {
        let mut e = C64::new(start, 0.0);
        for _ in 0..200 {
            let r = (e - he).inv();
            let h = |i: usize, j: usize| {
                let d = if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) };
                d + down[i] * up[j] * r
            };
            let half = (h(0, 0) + h(1, 1)) / 2.0;
            let disc = (half * half - (h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0))).sqrt();
            let (l1, l2) = (half + disc, half - disc);
            let next = if (l1 - e).norm() <= (l2 - e).norm() { l1 } else { l2 };
            let done = (next - e).norm() <= 1e-15 * (1.0 + e.norm());
            e = next;
            if done {
                break;
            }
        }
        e.re
    };
    let mut c = [0.0, 0.0];
    for _ in 0..100 {
        let diag = [target[0] + c[0], target[1] + c[1]];
        let err = [level(diag, target[0]) - target[0], level(diag, target[1]) - target[1]];
        c[0] -= err[0];
        c[1] -= err[1];
        if err[0].abs().max(err[1].abs()) <= 1e-14 * (1.0 + p.omega_ab.abs()) {
            break;
        }
    }
    (c[0], c[1])
}

fn diag_shift(space: &Space, sa: f64, sb: f64) -> CMat {
    let na = space.level_counts(Level::A);
    let nb = space.level_counts(Level::B);
    let d: Vec<f64> = na.iter().zip(nb.iter()).map(|(a, b)| sa * a + sb * b).collect();
    Space::diag(&d)
}

pub fn build_full_model(
    p: &PhysicalParams,
    spec: &HilbertSpec,
    opts: &ModelOptions,
) -> Result<Liouvillian, OracleError> {
    common_checks(p, spec)?;
    if p.omega_ab == 0.0 {
        return Err(OracleError::Refused("omega_ab = 0 leaves no rotating frame".into()));
    }
    let space = Space::new(spec.full_levels(), spec.n_atoms, spec.cavity_cutoff);
    let c = space.annihilation();
    let cd = dagger(&c);
    let ne = space.level_counts(Level::E);
    let nb = space.level_counts(Level::B);
    let nc = space.photon_counts();
    let diag: Vec<f64> = (0..space.dim)
        .map(|i| p.delta_1 * ne[i] - p.omega_ab * nb[i] - p.delta * nc[i])
        .collect();
    let mut h0 = Space::diag(&diag);
    let mut x: CMat = Array2::zeros((space.dim, space.dim));
    for k in 0..spec.n_atoms {
        let ea = space.atom_op(k, Level::E, Level::A);
        let eb = space.atom_op(k, Level::E, Level::B);
        let drive = &ea * (p.omega_1 / 2.0) + &eb * (p.omega_2 / 2.0);
        h0 += &drive;
        h0 += &dagger(&drive);
        x.scaled_add(p.g_a, &c.dot(&ea));
        x.scaled_add(p.g_b.conj(), &cd.dot(&dagger(&eb)));
    }
    if opts.stark_compensation {
        let (ca, cb) = light_shift_compensation(p);
        h0 += &diag_shift(&space, ca, cb);
    }
    let xd = dagger(&x);
    let terms = vec![(h0, 0.0), (x, p.omega_ab), (xd, -p.omega_ab)];

    let mut jumps = Vec::new();
    for k in 0..spec.n_atoms {
        for (l, g) in [(Level::A, p.gamma_a), (Level::B, p.gamma_b), (Level::O, p.gamma_o)] {
            if g > 0.0 {
                jumps.push(space.atom_op(k, l, Level::E).mapv(|z| z * g.sqrt()));
            }
        }
    }
    if p.kappa > 0.0 {
        jumps.push(c.mapv(|z| z * p.kappa.sqrt()));
    }

    let w: Vec<f64> = nb.iter().map(|n| -p.omega_ab * n).collect();
    let zeros = vec![0.0; space.dim];
    Ok(match opts.frame {
        Frame::Drive => Liouvillian::assemble(ModelKind::Full, space, Frame::Drive, terms, &zeros, jumps, w),
        Frame::Ground => {
            Liouvillian::assemble(ModelKind::Full, space, Frame::Ground, terms, &w, jumps, zeros)
        }
    })
}

pub fn build_intermediate_model(
    p: &PhysicalParams,
    spec: &HilbertSpec,
    opts: &ModelOptions,
) -> Result<Liouvillian, OracleError> {
    common_checks(p, spec)?;
    let space = Space::new(spec.ground_levels(), spec.n_atoms, spec.cavity_cutoff);
    let (d1, d2) = (p.delta_1, p.delta_2());
    let (l1, l2) = (p.lorentz(1), p.lorentz(2));
    let (sa, sb) = p.stark_shifts();
    let c = space.annihilation();
    let cd = dagger(&c);
    let na = space.level_counts(Level::A);
    let nb = space.level_counts(Level::B);
    let nc = space.photon_counts();
    let diag: Vec<f64> = (0..space.dim)
        .map(|i| {
            -(sa + d2 * p.g_a.norm_sqr() * nc[i] / l2) * na[i]
                - (sb + d1 * p.g_b.norm_sqr() * nc[i] / l1) * nb[i]
                - p.delta * nc[i]
        })
        .collect();
    let mut h = Space::diag(&diag);
    for k in 0..spec.n_atoms {
        let ba = space.atom_op(k, Level::B, Level::A);
        let r1 = ba.dot(&cd).mapv(|z| z * (-d1 / l1) * p.omega_1 * p.g_b.conj() / 2.0);
        let r2 = ba.dot(&c).mapv(|z| z * (-d2 / l2) * p.omega_2.conj() * p.g_a / 2.0);
        for r in [r1, r2] {
            h += &r;
            h += &dagger(&r);
        }
    }
    if opts.stark_compensation {
        let (sa, sb) = p.stark_shifts();
        h += &diag_shift(&space, sa, sb);
    }

    let g = p.gamma_total();
    let den1 = C64::new(d1, -g / 2.0);
    let den2 = C64::new(d2, -g / 2.0);
    let mut jumps = Vec::new();
    for k in 0..spec.n_atoms {
        for (dest, rate) in [(Level::A, p.gamma_a), (Level::B, p.gamma_b), (Level::O, p.gamma_o)] {
            if rate == 0.0 {
                continue;
            }
            let s = rate.sqrt();
            let from_a = space.atom_op(k, dest, Level::A);
            let from_b = space.atom_op(k, dest, Level::B);
            let d_1 = (&from_a * (p.omega_1 / 2.0) + from_b.dot(&c) * p.g_b) * (s / den1);
            let d_2 = (&from_b * (p.omega_2 / 2.0) + from_a.dot(&c) * p.g_a) * (s / den2);
            jumps.push(d_1);
            jumps.push(d_2);
        }
    }
    if p.kappa > 0.0 {
        jumps.push(c.mapv(|z| z * p.kappa.sqrt()));
    }
    let zeros = vec![0.0; space.dim];
    // Built directly in the ground frame; the frame option does not apply.
    let _ = opts.frame;
    Ok(Liouvillian::assemble(
        ModelKind::Intermediate,
        space,
        Frame::Ground,
        vec![(h, 0.0)],
        &zeros.clone(),
        jumps,
        zeros,
    ))
}

/// Collective operators in the a/b sector and the photon number.
pub struct Observables {
    pub jz: CMat,
    pub nab: CMat,
    pub jpp: CMat,
    pub jmm: CMat,
    pub jpm: CMat,
    pub jmp: CMat,
    pub photons: Vec<f64>,
    pub excited: Vec<f64>,
}

impl Observables {
    pub fn new(space: &Space) -> Self {
        let jp = space.collective(Level::A, Level::B);
        let jm = dagger(&jp);
        let na = space.level_counts(Level::A);
        let nb = space.level_counts(Level::B);
        let jz: Vec<f64> = na.iter().zip(nb.iter()).map(|(a, b)| (a - b) / 2.0).collect();
        let nab: Vec<f64> = na.iter().zip(nb.iter()).map(|(a, b)| a + b).collect();
        Self {
            jz: Space::diag(&jz),
            nab: Space::diag(&nab),
            jpp: jp.dot(&jp),
            jmm: jm.dot(&jm),
            jpm: jp.dot(&jm),
            jmp: jm.dot(&jp),
            photons: space.photon_counts(),
            excited: space.level_counts(Level::E),
        }
    }

    pub fn moments(&self, rho: &DensityMatrix) -> MomentState {
        MomentState {
            jz: rho.expect(&self.jz),
            nab: rho.expect(&self.nab),
            jpp: rho.expect(&self.jpp),
            jmm: rho.expect(&self.jmm),
            jpm: rho.expect(&self.jpm),
            jmp: rho.expect(&self.jmp),
        }
    }

    pub fn mean_photons(&self, rho: &DensityMatrix) -> f64 {
        rho.weighted_population(&self.photons)
    }

    pub fn excited_population(&self, rho: &DensityMatrix) -> f64 {
        rho.weighted_population(&self.excited)
    }
}

pub fn extract_moments(rho: &DensityMatrix, space: &Space) -> (MomentState, f64) {
    let obs = Observables::new(space);
    (obs.moments(rho), obs.mean_photons(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::fixtures::working_point;

    fn zero_params() -> PhysicalParams {
        let mut p = working_point().with_equal_branches(0.0);
        p.n_atoms = 1;
        p.kappa = 0.0;
        p.g_a = C64::new(0.0, 0.0);
        p.g_b = C64::new(0.0, 0.0);
        p.omega_1 = C64::new(0.0, 0.0);
        p.omega_2 = C64::new(0.0, 0.0);
        p
    }

    #[test]
    fn free_model_is_diagonal() {
        let mut p = zero_params();
        p.gamma_a = 3.0;
        let l = build_full_model(&p, &HilbertSpec::new(1, 3, 1), &ModelOptions::default()).unwrap();
        assert!(l.is_static());
        let h = &l.hamiltonian_static;
        for ((i, j), v) in h.indexed_iter() {
            if i != j {
                assert_eq!(*v, C64::new(0.0, 0.0));
            }
        }
        assert_eq!(l.jump_operators.len(), 1);
    }

    #[test]
    fn refusals() {
        let mut p = working_point();
        p.n_atoms = 2;
        let spec3 = HilbertSpec::new(2, 3, 1);
        assert!(matches!(
            build_full_model(&p, &spec3, &ModelOptions::default()),
            Err(OracleError::Refused(_))
        ));
        assert!(matches!(
            build_intermediate_model(&p, &spec3, &ModelOptions::default()),
            Err(OracleError::Refused(_))
        ));
        let mut q = p.with_equal_branches(0.0);
        q.gamma_a = 1.0;
        q.omega_ab = 0.0;
        assert!(matches!(
            build_full_model(&q, &spec3, &ModelOptions::default()),
            Err(OracleError::Refused(_))
        ));
        let big = HilbertSpec::new(3, 4, 20);
        assert!(matches!(
            build_full_model(&p, &big, &ModelOptions::default()),
            Err(OracleError::Budget(_))
        ));
    }

    #[test]
    fn hermitian_static_and_paired_oscillations() {
        let mut p = working_point();
        p.n_atoms = 2;
        let spec = HilbertSpec::new(2, 4, 2);
        for frame in [Frame::Drive, Frame::Ground] {
            let l = build_full_model(&p, &spec, &ModelOptions { frame, stark_compensation: true }).unwrap();
            assert_eq!(linalg::hermiticity_error(&l.hamiltonian_static), 0.0);
            assert_eq!(l.hamiltonian_oscillating.len(), 2);
            for (m, f) in &l.hamiltonian_oscillating {
                let partner = l
                    .hamiltonian_oscillating
                    .iter()
                    .find(|(_, g)| *g == -f)
                    .expect("partner frequency");
                assert_eq!(dagger(m), partner.0);
            }
            let h = l.hamiltonian_at(0.37);
            assert!(linalg::hermiticity_error(&h) < 1e-12);
        }
    }

    #[test]
    fn compensation_pins_dressed_levels() {
        let mut p = working_point().with_equal_branches(0.0).scaled(1e-2);
        p.n_atoms = 1;
        p.g_a = C64::new(0.0, 0.0);
        p.g_b = C64::new(0.0, 0.0);
        let (ca, cb) = light_shift_compensation(&p);
        let (sa, sb) = p.stark_shifts();
        assert!((ca - sa).abs() < 0.05 * sa && (cb - sb).abs() < 0.05 * sb);
        let opts = ModelOptions { frame: Frame::Drive, stark_compensation: true };
        let l = build_full_model(&p, &HilbertSpec::new(1, 3, 1), &opts).unwrap();
        let ev = linalg::hermitian_eigenvalues(&l.hamiltonian_static);
        for target in [0.0, -p.omega_ab] {
            let near = ev.iter().map(|e| (e - target).abs()).fold(f64::INFINITY, f64::min);
            assert!(near < 1e-10, "{target}: {ev:?}");
        }
    }

    #[test]
    fn intermediate_stark_entries() {
        let mut p = working_point();
        p.n_atoms = 1;
        let spec = HilbertSpec::new(1, 4, 2);
        let l = build_intermediate_model(&p, &spec, &ModelOptions::default()).unwrap();
        assert!(l.is_static());
        let a0 = l.space.encode(&[0], 0);
        let b0 = l.space.encode(&[1], 0);
        let expect_a = -p.delta_1 * p.omega_1.norm_sqr() / (4.0 * p.lorentz(1));
        let expect_b = -p.delta_2() * p.omega_2.norm_sqr() / (4.0 * p.lorentz(2));
        assert!((l.hamiltonian_static[[a0, a0]].re - expect_a).abs() <= 1e-12 * expect_a.abs());
        assert!((l.hamiltonian_static[[b0, b0]].re - expect_b).abs() <= 1e-12 * expect_b.abs());
        // six composite operators per atom plus cavity loss
        assert_eq!(l.jump_operators.len(), 7);
    }

    #[test]
    fn composite_jump_norm() {
        let mut p = working_point();
        p.n_atoms = 1;
        let n_max = 3;
        let spec = HilbertSpec::new(1, 4, n_max);
        let l = build_intermediate_model(&p, &spec, &ModelOptions::default()).unwrap();
        // first operator is d_{a,1}
        let norm = linalg::spectral_norm(&l.jump_operators[0]);
        let expect = p.gamma_a.sqrt()
            * ((p.omega_1.norm() / 2.0).powi(2) + p.g_b.norm_sqr() * n_max as f64).sqrt()
            / p.lorentz(1).sqrt();
        assert!((norm - expect).abs() <= 1e-12 * expect, "{norm} vs {expect}");
    }

    #[test]
    fn extraction_on_simple_states() {
        let spec = HilbertSpec::new(2, 3, 1);
        let p = { let mut q = working_point().with_equal_branches(0.0); q.n_atoms = 2; q };
        let l = build_full_model(&p, &spec, &ModelOptions::default()).unwrap();
        let (m, ph) = extract_moments(&l.initial_state(), &l.space);
        assert_eq!(m, crate::moments::initial_state(2));
        assert_eq!(ph, 0.0);

        let s1 = Space::new(vec![Level::A, Level::B, Level::E], 1, 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let psi = (s1.basis_vector(&[Level::A], 0) + s1.basis_vector(&[Level::B], 0)).mapv(|z| z * r);
        let (m, _) = extract_moments(&DensityMatrix::pure(&psi), &s1);
        assert!(m.jz.norm() < 1e-15);
        assert!((m.jpm.re - 0.5).abs() < 1e-15 && (m.jmp.re - 0.5).abs() < 1e-15);
        assert_eq!(m.jpp, C64::new(0.0, 0.0));
    }

    #[test]
    fn two_atom_product_state() {
        // atom 1 in |a⟩, atom 2 in (|a⟩ + i|b⟩)/√2
        let s = Space::new(vec![Level::A, Level::B, Level::E], 2, 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let psi = (s.basis_vector(&[Level::A, Level::A], 0) * C64::new(r, 0.0))
            + (s.basis_vector(&[Level::A, Level::B], 0) * C64::new(0.0, r));
        let (m, _) = extract_moments(&DensityMatrix::pure(&psi), &s);
        // hand values: jz = 1/2 + 0 = 1/2, nab = 2, J₊J₊ needs two b atoms → 0
        assert!((m.jz.re - 0.5).abs() < 1e-15);
        assert!((m.nab.re - 2.0).abs() < 1e-15);
        assert_eq!(m.jpp, C64::new(0.0, 0.0));
        // J₋J₊: atom 1 contributes 0, atom 2 contributes 1/2, cross terms
        // ⟨σ₋¹σ₊²⟩ vanish because atom 1 has no |b⟩ component
        assert!((m.jmp.re - 0.5).abs() < 1e-15);
        // J₊J₋: 1 + 1/2 + cross ⟨σ₊¹σ₋²⟩ + ⟨σ₊²σ₋¹⟩ = 1 + 1/2 + 2 Re(⟨σ₊²⟩⟨σ₋¹⟩)...
        // with ⟨σ₋¹⟩ = 0 the cross terms vanish
        assert!((m.jpm.re - 1.5).abs() < 1e-15);
    }
}
