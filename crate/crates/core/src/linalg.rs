//! Dense complex kernels used by the per-block realizations.
//!
//! Conventions: module vectors act as *row* vectors on realizations, so an
//! operator with realization `M` sends the row `r` to `r M`. Projectors and
//! Gram matrices below are written for that convention.

use nalgebra::{ComplexField, DVector};

use crate::scalar::{creal, CMat, Cx, Real};

pub(crate) fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * creal(T::lit(0.5))
}

/// Eigenvalues in ascending order with matching eigenvector columns.
/// Computed in double precision.
pub(crate) fn eigh<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let scale = max_abs(m);
    if scale == T::zero() || !scale.is_finite() {
        return (vec![scale * T::zero(); n], CMat::identity(n, n));
    }
    let h = hermitian_part(m);
    let a = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = h[(i, j)];
        faer::c64::new(z.re.as_f64(), z.im.as_f64())
    });
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("finite Hermitian input");
    let (s, u) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].re.partial_cmp(&s[j].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| T::lit(s[i].re)).collect();
    let vectors = CMat::from_fn(n, n, |i, j| {
        let z = u[(i, order[j])];
        Cx::new(T::lit(z.re), T::lit(z.im))
    });
    (values, vectors)
}

/// Eigendecomposition of the Hermitian dilation `[[0, m], [m^H, 0]]`,
/// whose spectrum is `+-sigma_i` padded with zeros.
fn dilation_eigh<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let (r, c) = m.shape();
    let mut h = CMat::zeros(r + c, r + c);
    h.view_mut((0, r), (r, c)).copy_from(m);
    h.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    eigh(&h)
}

pub(crate) fn singular_values<T: Real>(m: &CMat<T>) -> Vec<T> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Vec::new();
    }
    let (vals, _) = dilation_eigh(m);
    vals.iter()
        .rev()
        .take(r.min(c))
        .map(|&v| v.max(T::zero()))
        .collect()
}

pub(crate) fn spectral_norm<T: Real>(m: &CMat<T>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

/// Singular triples with `sigma > cutoff`, as `(U, sigma, V)` with
/// `m ~ U diag(sigma) V^H`, largest first.
pub(crate) fn svd<T: Real>(m: &CMat<T>, cutoff: T) -> (CMat<T>, Vec<T>, CMat<T>) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (CMat::zeros(r, 0), Vec::new(), CMat::zeros(c, 0));
    }
    let (vals, vecs) = dilation_eigh(m);
    let cutoff = cutoff.max(T::zero());
    let keep: Vec<usize> = (0..vals.len()).rev().filter(|&k| vals[k] > cutoff).collect();
    let root2 = creal(T::lit(2.0).sqrt());
    let mut u = CMat::zeros(r, keep.len());
    let mut v = CMat::zeros(c, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        let col = vecs.column(k);
        u.set_column(j, &(col.rows(0, r) * root2));
        v.set_column(j, &(col.rows(r, c) * root2));
    }
    let s = keep.iter().map(|&k| vals[k]).collect();
    (u, s, v)
}

/// Moore-Penrose pseudo-inverse with singular values `<= cutoff` dropped.
pub(crate) fn pinv<T: Real>(m: &CMat<T>, cutoff: T) -> CMat<T> {
    let (r, c) = m.shape();
    let (u, s, v) = svd(m, cutoff);
    let mut out = CMat::zeros(c, r);
    for (k, &sigma) in s.iter().enumerate() {
        out += v.column(k) * u.column(k).adjoint() * creal(T::one() / sigma);
    }
    out
}

/// Orthogonal projector onto the span of the rows of `m`, acting on row
/// vectors from the right: `m * P == m`.
pub(crate) fn row_space_projector<T: Real>(m: &CMat<T>, cutoff: T) -> CMat<T> {
    let c = m.ncols();
    let v = row_space_basis(m, cutoff);
    let mut p = CMat::zeros(c, c);
    for k in 0..v.ncols() {
        p += v.column(k) * v.column(k).adjoint();
    }
    p
}

/// Positive square root; eigenvalues at or below `cutoff` are dropped.
pub(crate) fn sqrt_psd<T: Real>(m: &CMat<T>, cutoff: T) -> CMat<T> {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam > cutoff.max(T::zero()) {
            out += vecs.column(k) * vecs.column(k).adjoint() * creal(lam.sqrt());
        }
    }
    out
}

pub(crate) fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

pub(crate) fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// Distance from Hermitian in the spectral norm.
pub(crate) fn hermitian_defect<T: Real>(m: &CMat<T>) -> T {
    spectral_norm(&(m - m.adjoint())) * T::lit(0.5)
}

/// Outcome of comparing two positive semidefinite matrices `x` and `y` on
/// the question "smallest `a` with `x <= a * y`".
#[derive(Debug, Clone)]
pub(crate) struct Majorization<T: Real> {
    /// Square root of the spectral norm of `x` compressed to `ker(y)`.
    pub outside: T,
    /// Largest eigenvalue of `x` relative to `y` on `ran(y)`.
    pub ratio: T,
    /// Column vector attaining `ratio` (or the `ker(y)` leak when `outside`
    /// is significant).
    pub witness: Option<DVector<Cx<T>>>,
}

/// `y` eigenvalues at or below `cutoff` are treated as the kernel.
pub(crate) fn majorization<T: Real>(x: &CMat<T>, y: &CMat<T>, cutoff: T) -> Majorization<T> {
    let n = y.nrows();
    let (vals, vecs) = eigh(y);
    let kept: Vec<usize> = (0..n).filter(|&k| vals[k] > cutoff).collect();
    let dropped: Vec<usize> = (0..n).filter(|&k| vals[k] <= cutoff).collect();

    let mut outside = T::zero();
    let mut leak_vec = None;
    if !dropped.is_empty() {
        let vn = vecs.select_columns(dropped.iter());
        let comp = vn.adjoint() * x * &vn;
        let (cv, cvec) = eigh(&comp);
        let top = cv.last().copied().unwrap_or_else(T::zero).max(T::zero());
        outside = top.sqrt();
        if top > T::zero() {
            leak_vec = Some(&vn * cvec.column(cvec.ncols() - 1));
        }
    }

    let mut ratio = T::zero();
    let mut ratio_vec = None;
    if !kept.is_empty() {
        let mut w = vecs.select_columns(kept.iter());
        for (j, &k) in kept.iter().enumerate() {
            let col = w.column(j) * creal(T::one() / vals[k].sqrt());
            w.set_column(j, &col);
        }
        let comp = w.adjoint() * x * &w;
        let (cv, cvec) = eigh(&comp);
        ratio = cv.last().copied().unwrap_or_else(T::zero).max(T::zero());
        ratio_vec = Some(&w * cvec.column(cvec.ncols() - 1));
    }

    Majorization {
        outside,
        ratio,
        witness: leak_vec.or(ratio_vec),
    }
}

/// Orthonormal basis (columns) for the span of the rows of `m`, conjugated
/// so that row vectors in the row space are `c^T B^H`.
pub(crate) fn row_space_basis<T: Real>(m: &CMat<T>, cutoff: T) -> CMat<T> {
    let v = svd(m, cutoff).2;
    if v.ncols() == 0 {
        return v;
    }
    v.qr().q()
}
