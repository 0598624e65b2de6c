//! Dense complex linear algebra used by every propagator in the crate.

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::registry::Registry;

pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Maximum absolute column sum.
pub fn norm1(a: &CMat) -> f64 {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_fro(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn trace(a: &CMat) -> C64 {
    a.diag().sum()
}

/// Largest deviation from Hermiticity, max |a_ij - conj(a_ji)|.
pub fn hermiticity_error(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut e: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            e = e.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    e
}

pub fn hermitize(a: &mut CMat) {
    let n = a.nrows();
    for i in 0..n {
        for j in i..n {
            let m = (a[[i, j]] + a[[j, i]].conj()) * 0.5;
            a[[i, j]] = m;
            a[[j, i]] = m.conj();
        }
    }
}

/// Solve `a x = b` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(LinalgError::Shape(format!(
            "solve {:?} against {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (p, pv) = (k..n)
            .map(|i| (i, lu[[i, k]].norm()))
            .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if pv <= scale * 1e-300 || !pv.is_finite() {
            return Err(LinalgError::Singular);
        }
        if p != k {
            for j in 0..n {
                lu.swap([k, j], [p, j]);
            }
            for j in 0..x.ncols() {
                x.swap([k, j], [p, j]);
            }
        }
        let inv = C64::new(1.0, 0.0) / lu[[k, k]];
        for i in (k + 1)..n {
            let f = lu[[i, k]] * inv;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            lu[[i, k]] = f;
            for j in (k + 1)..n {
                let t = lu[[k, j]];
                lu[[i, j]] -= f * t;
            }
            for j in 0..x.ncols() {
                let t = x[[k, j]];
                x[[i, j]] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let inv = C64::new(1.0, 0.0) / lu[[k, k]];
        for j in 0..x.ncols() {
            let mut s = x[[k, j]];
            for i in (k + 1)..n {
                s -= lu[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = s * inv;
        }
    }
    Ok(x)
}

/// `a^n` by binary exponentiation.
pub fn mat_pow(a: &CMat, mut n: u64) -> CMat {
    let mut result = eye(a.nrows());
    let mut base = a.clone();
    let mut first = true;
    while n > 0 {
        if n & 1 == 1 {
            result = if first { base.clone() } else { result.dot(&base) };
            first = false;
        }
        n >>= 1;
        if n > 0 {
            base = base.dot(&base);
        }
    }
    result
}

pub trait MatrixExponential: Send + Sync {
    fn name(&self) -> &'static str;
    fn expm(&self, a: &CMat) -> Result<CMat, LinalgError>;
}

/// Scaling and squaring with diagonal Padé approximants of degree 3 to 13.
pub struct PadeExpm;

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn pade_low(a: &CMat, b: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let a2 = a.dot(a);
    let mut u = Array2::zeros((n, n));
    let mut v = Array2::zeros((n, n));
    let mut p = eye(n);
    for (k, &bk) in b.iter().enumerate() {
        if k % 2 == 0 {
            v.scaled_add(C64::new(bk, 0.0), &p);
        } else {
            u.scaled_add(C64::new(bk, 0.0), &p);
            p = p.dot(&a2);
        }
    }
    (a.dot(&u), v)
}

fn pade13(a: &CMat) -> (CMat, CMat) {
    let b = PADE13.map(|x| C64::new(x, 0.0));
    let n = a.nrows();
    let id = eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let inner_u = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a6.dot(&inner_u) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = a.dot(&u);
    let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = a6.dot(&inner_v) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    (u, v)
}

impl MatrixExponential for PadeExpm {
    fn name(&self) -> &'static str {
        "pade"
    }

    fn expm(&self, a: &CMat) -> Result<CMat, LinalgError> {
        if !is_finite(a) {
            return Err(LinalgError::NonFinite);
        }
        let n = a.nrows();
        if n == 0 {
            return Ok(a.clone());
        }
        let nrm = norm1(a);
        if nrm == 0.0 {
            return Ok(eye(n));
        }
        for &(m, theta) in THETA.iter() {
            if nrm <= theta {
                let b: &[f64] = match m {
                    3 => &PADE3,
                    5 => &PADE5,
                    7 => &PADE7,
                    _ => &PADE9,
                };
                let (u, v) = pade_low(a, b);
                return finish(&u, &v);
            }
        }
        let s = (nrm / THETA13).log2().ceil().max(0.0) as i32;
        let scaled = a.mapv(|z| z / 2f64.powi(s));
        let (u, v) = pade13(&scaled);
        let mut r = finish(&u, &v)?;
        for _ in 0..s {
            r = r.dot(&r);
        }
        if !is_finite(&r) {
            return Err(LinalgError::NonFinite);
        }
        Ok(r)
    }
}

fn finish(u: &CMat, v: &CMat) -> Result<CMat, LinalgError> {
    let p = v + u;
    let q = v - u;
    solve(&q, &p)
}

/// Truncated Taylor series with scaling and squaring. Slower than Padé,
/// kept as an independent route for cross-checks.
pub struct TaylorExpm;

impl MatrixExponential for TaylorExpm {
    fn name(&self) -> &'static str {
        "taylor"
    }

    fn expm(&self, a: &CMat) -> Result<CMat, LinalgError> {
        if !is_finite(a) {
            return Err(LinalgError::NonFinite);
        }
        let n = a.nrows();
        let nrm = norm1(a);
        let s = if nrm > 0.5 {
            (nrm / 0.5).log2().ceil() as i32
        } else {
            0
        };
        let scaled = a.mapv(|z| z / 2f64.powi(s));
        let mut sum = eye(n);
        let mut term = eye(n);
        for k in 1..60 {
            term = term.dot(&scaled).mapv(|z| z / k as f64);
            sum += &term;
            if norm1(&term) <= f64::EPSILON * 1e-2 * norm1(&sum) {
                break;
            }
        }
        for _ in 0..s {
            sum = sum.dot(&sum);
        }
        if !is_finite(&sum) {
            return Err(LinalgError::NonFinite);
        }
        Ok(sum)
    }
}

pub fn expm_registry() -> Registry<dyn MatrixExponential> {
    let mut reg: Registry<dyn MatrixExponential> = Registry::new("matrix exponential");
    reg.register("pade", || Box::new(PadeExpm));
    reg.register("taylor", || Box::new(TaylorExpm));
    reg
}

pub fn expm(a: &CMat) -> Result<CMat, LinalgError> {
    PadeExpm.expm(a)
}

/// Convert to nalgebra for eigen and singular value decompositions.
pub fn to_nalgebra(a: &CMat) -> nalgebra::DMatrix<C64> {
    nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_nalgebra(a: &nalgebra::DMatrix<C64>) -> CMat {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let mut h = a.clone();
    hermitize(&mut h);
    let eig = nalgebra::linalg::SymmetricEigen::new(to_nalgebra(&h));
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    let svd = nalgebra::linalg::SVD::new(to_nalgebra(a), false, false);
    svd.singular_values.iter().copied().fold(0.0, f64::max)
}

/// Nearest unitary matrix in Frobenius norm (polar factor).
pub fn nearest_unitary(a: &CMat) -> CMat {
    let svd = nalgebra::linalg::SVD::new(to_nalgebra(a), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    from_nalgebra(&(u * vt))
}
