//! Dense complex linear algebra helpers. Matrices are `nalgebra` types; the
//! singular value and Hermitian eigen decompositions run through `faer`, whose
//! SVD stays accurate on nearly diagonal input.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative cutoff below which singular values and eigenvalues count as zero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m)[0]
}

fn to_faer(m: &CMat) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Thin SVD `m = U diag(s) V^*` with `s` descending.
fn thin_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let svd = to_faer(m).thin_svd().expect("svd converges");
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = s.dim();
    let vals: Vec<f64> = (0..k).map(|i| s[i].re).collect();
    let u = CMat::from_fn(m.nrows(), k, |r, c| u[(r, c)]);
    let v = CMat::from_fn(m.ncols(), k, |r, c| v[(r, c)]);
    (u, vals, v)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = to_faer(m).singular_values().expect("svd converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    if h.is_empty() {
        return (Vec::new(), h);
    }
    let eig = to_faer(&h).self_adjoint_eigen(faer::Side::Lower).expect("eigen converges");
    let (s, u) = (eig.S(), eig.U());
    let n = s.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let values = order.iter().map(|&i| s[i].re).collect();
    let vectors = CMat::from_fn(m.nrows(), n, |r, c| u[(r, order[c])]);
    (values, vectors)
}

/// Moore-Penrose pseudo-inverse through the SVD; singular values below
/// `cutoff · σ_max` are discarded. Returns the inverse and the kept rank.
pub fn pseudo_inverse(m: &CMat, cutoff: f64) -> (CMat, usize) {
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    if m.is_empty() {
        return (out, 0);
    }
    let (u, s, v) = thin_svd(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let mut rank = 0;
    for (k, &sk) in s.iter().enumerate() {
        if sk <= cutoff * smax || sk == 0.0 {
            continue;
        }
        rank += 1;
        out += (v.column(k) * u.column(k).adjoint()) * C64::new(1.0 / sk, 0.0);
    }
    (out, rank)
}

/// Pseudo-inverse of a Hermitian positive semidefinite matrix through its
/// eigendecomposition, with relative eigenvalue cutoff.
pub fn psd_pseudo_inverse(m: &CMat, cutoff: f64) -> (CMat, usize) {
    let (vals, vecs) = hermitian_eigen(m);
    let top = vals.iter().copied().fold(0.0, f64::max);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    let mut rank = 0;
    for (k, &l) in vals.iter().enumerate() {
        if l <= cutoff * top || l <= 0.0 {
            continue;
        }
        rank += 1;
        let col = vecs.column(k);
        out += (&col * col.adjoint()) * C64::new(1.0 / l, 0.0);
    }
    (out, rank)
}

/// Solves `m x = b` for square invertible `m`.
pub fn solve(m: &CMat, b: &CVec) -> Result<CVec> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Precondition("singular system".into()))
}

pub fn from_columns(cols: &[Vec<C64>], nrows: usize) -> CMat {
    CMat::from_fn(nrows, cols.len(), |r, c| cols[c][r])
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}
