use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::OracleError;
use crate::linalg::{self, CMat, CVec};

pub const MAX_DIM: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    A,
    B,
    E,
    O,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HilbertSpec {
    pub n_atoms: usize,
    /// 3 for {a, b, e}, 4 when the extra decay level o is included.
    pub atom_levels: usize,
    pub cavity_cutoff: usize,
}

impl HilbertSpec {
    pub fn new(n_atoms: usize, atom_levels: usize, cavity_cutoff: usize) -> Self {
        Self { n_atoms, atom_levels, cavity_cutoff }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(1..=3).contains(&self.n_atoms) {
            return Err(OracleError::Budget(format!("n_atoms = {} outside 1..=3", self.n_atoms)));
        }
        if !(3..=4).contains(&self.atom_levels) {
            return Err(OracleError::Budget(format!("atom_levels = {} must be 3 or 4", self.atom_levels)));
        }
        if self.cavity_cutoff < 1 {
            return Err(OracleError::Budget("cavity cutoff must be at least 1".into()));
        }
        let dim = self.dim();
        if dim > MAX_DIM {
            return Err(OracleError::Budget(format!("dimension {dim} exceeds {MAX_DIM}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.atom_levels.pow(self.n_atoms as u32) * (self.cavity_cutoff + 1)
    }

    pub fn has_o(&self) -> bool {
        self.atom_levels == 4
    }

    /// Single-atom levels kept by the full model.
    pub fn full_levels(&self) -> Vec<Level> {
        let mut v = vec![Level::A, Level::B, Level::E];
        if self.has_o() {
            v.push(Level::O);
        }
        v
    }

    /// Single-atom levels kept once |e⟩ is eliminated.
    pub fn ground_levels(&self) -> Vec<Level> {
        let mut v = vec![Level::A, Level::B];
        if self.has_o() {
            v.push(Level::O);
        }
        v
    }
}

/// Tensor-product basis of N atoms and a truncated cavity mode. The cavity
/// index varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Space {
    pub levels: Vec<Level>,
    pub n_atoms: usize,
    pub n_max: usize,
    pub dim: usize,
}

impl Space {
    pub fn new(levels: Vec<Level>, n_atoms: usize, n_max: usize) -> Self {
        let dim = levels.len().pow(n_atoms as u32) * (n_max + 1);
        Self { levels, n_atoms, n_max, dim }
    }

    fn nlev(&self) -> usize {
        self.levels.len()
    }

    pub fn level_index(&self, l: Level) -> Option<usize> {
        self.levels.iter().position(|&x| x == l)
    }

    /// (per-atom level indices, photon number) of basis index `i`.
    pub fn decode(&self, mut i: usize) -> (Vec<usize>, usize) {
        let n = i % (self.n_max + 1);
        i /= self.n_max + 1;
        let mut atoms = vec![0; self.n_atoms];
        for k in (0..self.n_atoms).rev() {
            atoms[k] = i % self.nlev();
            i /= self.nlev();
        }
        (atoms, n)
    }

    pub fn encode(&self, atoms: &[usize], n: usize) -> usize {
        let mut i = 0;
        for &a in atoms {
            i = i * self.nlev() + a;
        }
        i * (self.n_max + 1) + n
    }

    pub fn basis_vector(&self, atoms: &[Level], n: usize) -> CVec {
        let idx: Vec<usize> = atoms
            .iter()
            .map(|&l| self.level_index(l).expect("level present in space"))
            .collect();
        let mut v = CVec::zeros(self.dim);
        v[self.encode(&idx, n)] = C64::new(1.0, 0.0);
        v
    }

    /// |to⟩⟨from| on atom k, identity elsewhere.
    pub fn atom_op(&self, k: usize, to: Level, from: Level) -> CMat {
        let mut m = Array2::zeros((self.dim, self.dim));
        let (Some(t), Some(f)) = (self.level_index(to), self.level_index(from)) else {
            return m;
        };
        for i in 0..self.dim {
            let (mut atoms, n) = self.decode(i);
            if atoms[k] == f {
                atoms[k] = t;
                m[[self.encode(&atoms, n), i]] = C64::new(1.0, 0.0);
            }
        }
        m
    }

    pub fn collective(&self, to: Level, from: Level) -> CMat {
        let mut m = Array2::zeros((self.dim, self.dim));
        for k in 0..self.n_atoms {
            m += &self.atom_op(k, to, from);
        }
        m
    }

    pub fn annihilation(&self) -> CMat {
        let mut m = Array2::zeros((self.dim, self.dim));
        for i in 0..self.dim {
            let (atoms, n) = self.decode(i);
            if n > 0 {
                m[[self.encode(&atoms, n - 1), i]] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
        m
    }

    /// Number of atoms in level `l` for every basis state.
    pub fn level_counts(&self, l: Level) -> Vec<f64> {
        let li = self.level_index(l);
        (0..self.dim)
            .map(|i| {
                let (atoms, _) = self.decode(i);
                atoms.iter().filter(|&&a| Some(a) == li).count() as f64
            })
            .collect()
    }

    pub fn photon_counts(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.decode(i).1 as f64).collect()
    }

    pub fn diag(values: &[f64]) -> CMat {
        Array2::from_diag(&ndarray::Array1::from_iter(values.iter().map(|&x| C64::new(x, 0.0))))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub rho: CMat,
}

impl DensityMatrix {
    pub fn pure(psi: &CVec) -> Self {
        let n = psi.len();
        let rho = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Self { rho }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.rho).re
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.rho).first().copied().unwrap_or(0.0)
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    /// tr(ρ X).
    pub fn expect(&self, x: &CMat) -> C64 {
        let n = self.dim();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let xji = x[[j, i]];
                if xji != C64::new(0.0, 0.0) {
                    s += self.rho[[i, j]] * xji;
                }
            }
        }
        s
    }

    /// Population of basis states weighted by `w`, Σ ρ_ii w_i.
    pub fn weighted_population(&self, w: &[f64]) -> f64 {
        w.iter().enumerate().map(|(i, &x)| self.rho[[i, i]].re * x).sum()
    }
}
