//! Adjointable `A`-linear operators `A^d -> A^c`.
//!
//! An operator is stored through its realization: for every block `k` a
//! complex `(n_k d) x (n_k c)` matrix whose `(i, j)` sub-block of size
//! `n_k x n_k` is the coefficient `t_ij`. A vector acts as the row stack
//! `[x_1 | ... | x_d]` multiplied on the right, so `(Tx)_j = sum_i x_i t_ij`.
//! Composition in application order is the product of realizations in the
//! same order and the adjoint is the conjugate transpose.

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::linalg;
use crate::module::ModuleVector;
use crate::scalar::{creal, CMat, Cx, Real};
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleOperator<T: Real> {
    shape: AlgebraShape,
    domain_rank: usize,
    codomain_rank: usize,
    blocks: Vec<CMat<T>>,
}

/// Certificate for the three equivalent conditions of Douglas' lemma for a
/// pair `T, Z` with common codomain:
/// `Ran T ⊆ Ran Z`, `T T* <= a^2 Z Z*` and `T = Z U`.
#[derive(Debug, Clone)]
pub struct DouglasCertificate<T: Real> {
    pub range_included: bool,
    /// Smallest admissible `a`; present exactly when the majorization holds.
    pub alpha_min: Option<T>,
    /// Minimal-norm solution `U = pinv(Z) o T` when the ranges are included.
    pub factor: Option<ModuleOperator<T>>,
    /// `||T - Z o pinv(Z) o T||_inf`.
    pub residual: T,
    pub conditions: DouglasConditions<T>,
}

/// Each lemma condition evaluated through its own computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DouglasConditions<T: Real> {
    /// `||(I - P_Z) o T||_inf` with `P_Z` from the SVD of `Z`.
    pub range_defect: T,
    pub range_inclusion: bool,
    /// Square root of `T T*` compressed to `ker(Z Z*)` (eigendecomposition).
    pub majorization_defect: T,
    pub majorization: bool,
    pub factorization: bool,
}

impl<T: Real> DouglasConditions<T> {
    pub fn agree(&self) -> bool {
        self.range_inclusion == self.majorization && self.majorization == self.factorization
    }
}

impl<T: Real> ModuleOperator<T> {
    /// Builds an operator from its `d x c` coefficient array.
    pub fn from_coeffs(shape: &AlgebraShape, coeffs: &[Vec<AlgebraElement<T>>]) -> Result<Self> {
        let d = coeffs.len();
        if d == 0 {
            return Err(Error::Shape("operator needs at least one row".into()));
        }
        let c = coeffs[0].len();
        if c == 0 || coeffs.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged or empty coefficient rows".into()));
        }
        for e in coeffs.iter().flatten() {
            e.shape().ensure_same(shape)?;
        }
        let blocks = (0..shape.num_blocks())
            .map(|k| {
                let n = shape.dim(k);
                let mut m = CMat::zeros(n * d, n * c);
                for (i, row) in coeffs.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        m.view_mut((i * n, j * n), (n, n)).copy_from(e.block(k));
                    }
                }
                m
            })
            .collect();
        Ok(Self {
            shape: shape.clone(),
            domain_rank: d,
            codomain_rank: c,
            blocks,
        })
    }

    pub fn from_realization(
        shape: &AlgebraShape,
        domain_rank: usize,
        codomain_rank: usize,
        blocks: Vec<CMat<T>>,
    ) -> Result<Self> {
        if domain_rank == 0 || codomain_rank == 0 {
            return Err(Error::Shape("module ranks must be positive".into()));
        }
        if blocks.len() != shape.num_blocks() {
            return Err(Error::Shape(format!(
                "{} realization blocks for {} algebra blocks",
                blocks.len(),
                shape.num_blocks()
            )));
        }
        for (k, b) in blocks.iter().enumerate() {
            let n = shape.dim(k);
            if b.shape() != (n * domain_rank, n * codomain_rank) {
                return Err(Error::Shape(format!(
                    "realization block {k} is {:?}, expected {:?}",
                    b.shape(),
                    (n * domain_rank, n * codomain_rank)
                )));
            }
        }
        Ok(Self {
            shape: shape.clone(),
            domain_rank,
            codomain_rank,
            blocks,
        })
    }

    pub(crate) fn from_blocks_unchecked(
        shape: &AlgebraShape,
        domain_rank: usize,
        codomain_rank: usize,
        blocks: Vec<CMat<T>>,
    ) -> Self {
        Self {
            shape: shape.clone(),
            domain_rank,
            codomain_rank,
            blocks,
        }
    }

    pub fn identity(shape: &AlgebraShape, rank: usize) -> Self {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&n| linalg::identity(n * rank))
            .collect();
        Self::from_blocks_unchecked(shape, rank, rank, blocks)
    }

    pub fn zero(shape: &AlgebraShape, domain_rank: usize, codomain_rank: usize) -> Self {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&n| CMat::zeros(n * domain_rank, n * codomain_rank))
            .collect();
        Self::from_blocks_unchecked(shape, domain_rank, codomain_rank, blocks)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn domain_rank(&self) -> usize {
        self.domain_rank
    }

    pub fn codomain_rank(&self) -> usize {
        self.codomain_rank
    }

    pub fn is_square(&self) -> bool {
        self.domain_rank == self.codomain_rank
    }

    /// Per-block realization.
    pub fn realize(&self) -> &[CMat<T>] {
        &self.blocks
    }

    pub fn coeff(&self, i: usize, j: usize) -> AlgebraElement<T> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let n = self.shape.dim(k);
                m.view((i * n, j * n), (n, n)).into_owned()
            })
            .collect();
        AlgebraElement::from_blocks_unchecked(&self.shape, blocks)
    }

    pub fn coeffs(&self) -> Vec<Vec<AlgebraElement<T>>> {
        (0..self.domain_rank)
            .map(|i| (0..self.codomain_rank).map(|j| self.coeff(i, j)).collect())
            .collect()
    }

    /// Applies the operator through its realization.
    pub fn apply(&self, x: &ModuleVector<T>) -> Result<ModuleVector<T>> {
        self.check_domain(x)?;
        let stacks: Vec<CMat<T>> = (0..self.blocks.len())
            .map(|k| x.row_stack(k) * &self.blocks[k])
            .collect();
        Ok(ModuleVector::from_row_stacks(&self.shape, &stacks))
    }

    /// Applies the operator through algebra arithmetic on the coefficients.
    pub fn apply_via_coeffs(&self, x: &ModuleVector<T>) -> Result<ModuleVector<T>> {
        self.check_domain(x)?;
        let coeffs = self.coeffs();
        let comps = (0..self.codomain_rank)
            .map(|j| {
                x.components()
                    .iter()
                    .zip(&coeffs)
                    .fold(AlgebraElement::zero(&self.shape), |acc, (xi, row)| {
                        &acc + &(xi * &row[j])
                    })
            })
            .collect();
        ModuleVector::new(&self.shape, comps)
    }

    pub fn adjoint(&self) -> Self {
        let blocks = self.blocks.iter().map(|b| b.adjoint()).collect();
        Self::from_blocks_unchecked(&self.shape, self.codomain_rank, self.domain_rank, blocks)
    }

    /// `self o inner`: apply `inner` first.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.shape.ensure_same(&inner.shape)?;
        if inner.codomain_rank != self.domain_rank {
            return Err(Error::Shape(format!(
                "cannot compose A^{} -> A^{} after A^{} -> A^{}",
                self.domain_rank, self.codomain_rank, inner.domain_rank, inner.codomain_rank
            )));
        }
        let blocks = inner
            .blocks
            .iter()
            .zip(&self.blocks)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self::from_blocks_unchecked(
            &self.shape,
            inner.domain_rank,
            self.codomain_rank,
            blocks,
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_type(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_blocks_unchecked(
            &self.shape,
            self.domain_rank,
            self.codomain_rank,
            blocks,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    pub fn scale(&self, c: T) -> Self {
        self.scale_complex(creal(c))
    }

    pub fn scale_complex(&self, c: Cx<T>) -> Self {
        let blocks = self.blocks.iter().map(|b| b * c).collect();
        Self::from_blocks_unchecked(&self.shape, self.domain_rank, self.codomain_rank, blocks)
    }

    /// `||T||_inf`: the largest spectral norm over blocks.
    pub fn uniform_norm(&self) -> T {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// `||self - other||_inf`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.uniform_norm())
    }

    /// Smallest singular value across blocks (zero when some block is not
    /// of full column rank for a square operator).
    pub fn sigma_min(&self) -> T {
        self.blocks
            .iter()
            .map(|b| {
                let s = linalg::singular_values(b);
                if b.nrows() != b.ncols() {
                    // rank-deficient in the wider direction
                    if s.len() < b.nrows().max(b.ncols()) {
                        return T::zero();
                    }
                }
                s.last().copied().unwrap_or_else(T::zero)
            })
            .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
    }

    /// Singular value cutoff `tau_rank * ||T||_inf`.
    pub fn rank_cutoff(&self, tol: &Tolerances) -> T {
        T::lit(tol.rank) * self.uniform_norm()
    }

    /// Blockwise Moore-Penrose pseudo-inverse.
    pub fn pinv(&self, tol: &Tolerances) -> Self {
        let cut = self.rank_cutoff(tol);
        let blocks = self.blocks.iter().map(|b| linalg::pinv(b, cut)).collect();
        Self::from_blocks_unchecked(&self.shape, self.codomain_rank, self.domain_rank, blocks)
    }

    /// Inverse of a square operator; fails unless every block is
    /// numerically invertible.
    pub fn inverse(&self, tol: &Tolerances) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("only square operators are invertible".into()));
        }
        let sigma_min = self.sigma_min();
        if sigma_min <= self.rank_cutoff(tol) {
            return Err(Error::NotInvertible {
                sigma_min: sigma_min.as_f64(),
            });
        }
        Ok(self.pinv(tol))
    }

    /// Orthogonal projector onto `Ran(T)` inside the codomain.
    pub fn range_projection(&self, tol: &Tolerances) -> Self {
        let cut = self.rank_cutoff(tol);
        let blocks = self
            .blocks
            .iter()
            .map(|b| linalg::row_space_projector(b, cut))
            .collect();
        Self::from_blocks_unchecked(
            &self.shape,
            self.codomain_rank,
            self.codomain_rank,
            blocks,
        )
    }

    /// Positivity as an operator: every block of the realization is PSD.
    pub fn is_positive(&self, tol: &Tolerances) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = T::one() + self.uniform_norm();
        self.blocks.iter().all(|b| {
            if linalg::hermitian_defect(b) > T::lit(tol.herm) * scale {
                return false;
            }
            let (vals, _) = linalg::eigh(b);
            vals.first().is_none_or(|&v| v >= -T::lit(tol.psd) * scale)
        })
    }

    /// Positive square root of a positive operator, with eigenvalues below
    /// the rank cutoff treated as zero.
    pub fn sqrt_positive(&self, tol: &Tolerances) -> Self {
        let cut = self.rank_cutoff(tol);
        let blocks = self.blocks.iter().map(|b| linalg::sqrt_psd(b, cut)).collect();
        Self::from_blocks_unchecked(&self.shape, self.domain_rank, self.codomain_rank, blocks)
    }

    /// Smallest retained singular value over the largest discarded one, the
    /// spectral gap that makes the range numerically closed. `None` when no
    /// singular value is discarded.
    pub fn closed_range_gap(&self, tol: &Tolerances) -> Option<T> {
        let cut = self.rank_cutoff(tol);
        let mut kept_min: Option<T> = None;
        let mut dropped_max: Option<T> = None;
        for b in &self.blocks {
            let n = b.nrows().min(b.ncols());
            let mut s = linalg::singular_values(b);
            s.resize(n, T::zero());
            for v in s {
                if v > cut {
                    kept_min = Some(kept_min.map_or(v, |m: T| m.min(v)));
                } else {
                    dropped_max = Some(dropped_max.map_or(v, |m: T| m.max(v)));
                }
            }
        }
        match (kept_min, dropped_max) {
            (Some(k), Some(d)) if d > T::zero() => Some(k / d),
            (Some(_), Some(_)) => Some(T::max_value().unwrap_or_else(T::one)),
            _ => None,
        }
    }

    pub(crate) fn hconcat(members: &[Self]) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Shape("empty operator family".into()))?;
        let d = first.domain_rank;
        for m in members {
            m.shape.ensure_same(&first.shape)?;
            if m.domain_rank != d {
                return Err(Error::Shape("members have different domains".into()));
            }
        }
        let c: usize = members.iter().map(|m| m.codomain_rank).sum();
        let blocks = (0..first.shape.num_blocks())
            .map(|k| {
                let n = first.shape.dim(k);
                let mut out = CMat::zeros(n * d, n * c);
                let mut off = 0;
                for m in members {
                    let w = n * m.codomain_rank;
                    out.view_mut((0, off), (n * d, w)).copy_from(&m.blocks[k]);
                    off += w;
                }
                out
            })
            .collect();
        Ok(Self::from_blocks_unchecked(&first.shape, d, c, blocks))
    }

    fn check_domain(&self, x: &ModuleVector<T>) -> Result<()> {
        x.shape().ensure_same(&self.shape)?;
        if x.rank() != self.domain_rank {
            return Err(Error::Shape(format!(
                "vector of rank {} for operator with domain rank {}",
                x.rank(),
                self.domain_rank
            )));
        }
        Ok(())
    }

    fn ensure_same_type(&self, other: &Self) -> Result<()> {
        self.shape.ensure_same(&other.shape)?;
        if (self.domain_rank, self.codomain_rank) != (other.domain_rank, other.codomain_rank) {
            return Err(Error::Shape(format!(
                "A^{} -> A^{} vs A^{} -> A^{}",
                self.domain_rank, self.codomain_rank, other.domain_rank, other.codomain_rank
            )));
        }
        Ok(())
    }
}

/// Checks `||F^-1||^-2 <eta, eta> <= <F eta, F eta> <= ||F||^2 <eta, eta>`.
pub fn bounded_inverse_check<T: Real>(
    f: &ModuleOperator<T>,
    eta: &ModuleVector<T>,
    tol: &Tolerances,
) -> Result<bool> {
    let inv = f.inverse(tol)?;
    let g = eta.inner(eta)?;
    let fe = f.apply(eta)?;
    let h = fe.inner(&fe)?;
    let lo = inv.uniform_norm().powi(-2);
    let hi = f.uniform_norm().powi(2);
    let lower = g.scale(creal(lo));
    let upper = g.scale(creal(hi));
    Ok(lower.leq(&h, tol)? && h.leq(&upper, tol)?)
}

/// Evaluates Douglas' lemma for `t` and `z` sharing a codomain.
pub fn douglas<T: Real>(
    t: &ModuleOperator<T>,
    z: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<DouglasCertificate<T>> {
    t.shape.ensure_same(&z.shape)?;
    if t.codomain_rank != z.codomain_rank {
        return Err(Error::Shape(format!(
            "Douglas pair needs a common codomain, got A^{} and A^{}",
            t.codomain_rank, z.codomain_rank
        )));
    }
    let t_norm = t.uniform_norm();
    let threshold = T::lit(tol.eq) * (T::one() + t_norm);

    // (1) range inclusion through the orthogonal projector onto Ran(Z)
    let p = z.range_projection(tol);
    let leak = p.compose(t)?.sub(t)?;
    let range_defect = leak.uniform_norm();

    // (2) majorization through the pencil (T T*, Z Z*) on Ran(Z Z*)
    let tt = t.compose(&t.adjoint())?;
    let zz = z.compose(&z.adjoint())?;
    let zz_norm = zz.uniform_norm();
    let eig_cut = T::lit(tol.rank) * zz_norm;
    let mut majorization_defect = T::zero();
    let mut alpha_sq = T::zero();
    for (x, y) in tt.blocks.iter().zip(&zz.blocks) {
        let m = linalg::majorization(x, y, eig_cut);
        majorization_defect = majorization_defect.max(m.outside);
        alpha_sq = alpha_sq.max(m.ratio);
    }

    // (3) factorization through the pseudo-inverse
    let factor = z.pinv(tol).compose(t)?;
    let residual = z.compose(&factor)?.distance(t)?;

    let conditions = DouglasConditions {
        range_defect,
        range_inclusion: range_defect <= threshold,
        majorization_defect,
        majorization: majorization_defect <= threshold,
        factorization: residual <= threshold,
    };
    let range_included = conditions.range_inclusion;
    Ok(DouglasCertificate {
        range_included,
        alpha_min: conditions.majorization.then(|| alpha_sq.sqrt()),
        factor: range_included.then_some(factor),
        residual,
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use proptest::prelude::*;

    fn sh(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d).unwrap()
    }

    fn scalar_op(rows: &[&[f64]]) -> ModuleOperator<f64> {
        let s = sh(&[1]);
        let coeffs: Vec<Vec<_>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| AlgebraElement::scalar(&s, cx(v, 0.0)))
                    .collect()
            })
            .collect();
        ModuleOperator::from_coeffs(&s, &coeffs).unwrap()
    }

    fn op_strategy(
        dims: Vec<usize>,
        d: usize,
        c: usize,
    ) -> impl Strategy<Value = ModuleOperator<f64>> {
        let total: usize = dims.iter().map(|n| n * n * d * c).sum();
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), total).prop_map(move |vals| {
            let s = AlgebraShape::new(&dims).unwrap();
            let mut it = vals.into_iter();
            let blocks = dims
                .iter()
                .map(|&n| {
                    CMat::from_fn(n * d, n * c, |_, _| {
                        let (a, b) = it.next().unwrap();
                        cx(a, b)
                    })
                })
                .collect();
            ModuleOperator::from_realization(&s, d, c, blocks).unwrap()
        })
    }

    fn vec_strategy(dims: Vec<usize>, d: usize) -> impl Strategy<Value = ModuleVector<f64>> {
        op_strategy(dims.clone(), 1, d).prop_map(move |op| {
            ModuleVector::new(op.shape(), (0..op.codomain_rank()).map(|j| op.coeff(0, j)).collect())
                .unwrap()
        })
    }

    fn rank_deficient(dims: Vec<usize>, d: usize, c: usize) -> impl Strategy<Value = ModuleOperator<f64>> {
        (op_strategy(dims.clone(), d, 1), op_strategy(dims, 1, c))
            .prop_map(|(a, b)| b.compose(&a).unwrap())
    }

    #[test]
    fn identity_realization() {
        let s = sh(&[2, 3]);
        let id = ModuleOperator::<f64>::identity(&s, 2);
        assert_eq!(id.realize()[0], CMat::identity(4, 4));
        assert_eq!(id.realize()[1], CMat::identity(6, 6));
        assert_eq!(id.adjoint(), id);
        assert!((id.uniform_norm() - 1.0).abs() < 1e-14);
        assert!(id.pinv(&Tolerances::default()).distance(&id).unwrap() < 1e-14);
    }

    #[test]
    fn column_operator_over_scalars() {
        let t = scalar_op(&[&[1.0], &[0.0], &[1.0]]);
        let r = &t.realize()[0];
        assert_eq!(r.shape(), (3, 1));
        assert_eq!(r[(0, 0)].re, 1.0);
        assert_eq!(r[(1, 0)].re, 0.0);
        assert_eq!(r[(2, 0)].re, 1.0);
        let adj = t.adjoint();
        assert_eq!(adj.realize()[0].shape(), (1, 3));
        assert_eq!(adj.coeff(0, 2).block(0)[(0, 0)].re, 1.0);
        // hand oracle: the column (1,0,1) has singular value sqrt 2
        assert!((t.uniform_norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pinv_of_diagonal() {
        let p = scalar_op(&[&[2.0, 0.0], &[0.0, 0.0]]).pinv(&Tolerances::default());
        let expect = scalar_op(&[&[0.5, 0.0], &[0.0, 0.0]]);
        assert!(p.distance(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn range_projection_examples() {
        let tol = Tolerances::default();
        let p = scalar_op(&[&[1.0, 0.0], &[0.0, 0.0]]).range_projection(&tol);
        assert!(p.distance(&scalar_op(&[&[1.0, 0.0], &[0.0, 0.0]])).unwrap() < 1e-15);
        let inv = scalar_op(&[&[1.0, 2.0], &[3.0, 4.0]]).range_projection(&tol);
        assert!(inv.distance(&ModuleOperator::identity(&sh(&[1]), 2)).unwrap() < 1e-14);
    }

    #[test]
    fn bounded_inverse_examples() {
        let tol = Tolerances::default();
        let s = sh(&[2]);
        let id = ModuleOperator::<f64>::identity(&s, 2);
        let e1 = ModuleVector::basis(&s, 2, 0);
        assert!(bounded_inverse_check(&id, &e1, &tol).unwrap());
        assert!(bounded_inverse_check(&id.scale(2.0), &e1, &tol).unwrap());
        let singular = scalar_op(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let e = ModuleVector::basis(&sh(&[1]), 2, 0);
        assert!(matches!(
            bounded_inverse_check(&singular, &e, &tol),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn douglas_examples() {
        let tol = Tolerances::default();
        let z = scalar_op(&[&[2.0, 0.0], &[0.0, 0.0]]);
        let t = scalar_op(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let cert = douglas(&t, &z, &tol).unwrap();
        assert!(cert.range_included && cert.conditions.agree());
        assert!((cert.alpha_min.unwrap() - 0.5).abs() < 1e-14);
        let f = cert.factor.unwrap();
        assert!(f.distance(&scalar_op(&[&[0.5, 0.0], &[0.0, 0.0]])).unwrap() < 1e-14);

        let same = douglas(&z, &z, &tol).unwrap();
        assert!((same.alpha_min.unwrap() - 1.0).abs() < 1e-14);
        let proj = same.factor.unwrap();
        // factor is the projector onto Ran(Z*), identity on it
        assert!(proj.compose(&proj).unwrap().distance(&proj).unwrap() < 1e-14);

        let orth = douglas(&scalar_op(&[&[0.0, 0.0], &[0.0, 1.0]]), &scalar_op(&[&[1.0, 0.0], &[0.0, 0.0]]), &tol)
            .unwrap();
        assert!(!orth.range_included && orth.conditions.agree());
        assert!(orth.alpha_min.is_none() && orth.factor.is_none());
    }

    #[test]
    fn douglas_rejects_mismatched_codomain() {
        let t = scalar_op(&[&[1.0, 0.0]]);
        let z = scalar_op(&[&[1.0]]);
        assert!(matches!(douglas(&t, &z, &Tolerances::default()), Err(Error::Shape(_))));
    }

    #[test]
    fn closed_range_gap() {
        let tol = Tolerances::default();
        assert!(scalar_op(&[&[1.0, 0.0], &[0.0, 2.0]]).closed_range_gap(&tol).is_none());
        let g = scalar_op(&[&[1.0, 0.0], &[0.0, 1e-11]]).closed_range_gap(&tol).unwrap();
        assert!((g - 1e11).abs() < 1e3);
    }

    proptest! {
        #[test]
        fn dual_path_application(t in op_strategy(vec![2, 1], 3, 2), x in vec_strategy(vec![2, 1], 3)) {
            let a = t.apply(&x).unwrap();
            let b = t.apply_via_coeffs(&x).unwrap();
            prop_assert!(a.max_abs_diff(&b) <= 1e-12);
            // realization round trip through coefficients is exact
            prop_assert_eq!(ModuleOperator::from_coeffs(t.shape(), &t.coeffs()).unwrap(), t.clone());
        }

        #[test]
        fn a_linearity_and_adjoint_pairing(
            t in op_strategy(vec![2, 2], 2, 3),
            x in vec_strategy(vec![2, 2], 2),
            y in vec_strategy(vec![2, 2], 3),
            a in vec_strategy(vec![2, 2], 1),
        ) {
            let a = &a.components()[0];
            let lhs = t.apply(&x.left_mul(a)).unwrap();
            let rhs = t.apply(&x).unwrap().left_mul(a);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
            let p1 = t.apply(&x).unwrap().inner(&y).unwrap();
            let p2 = x.inner(&t.adjoint().apply(&y).unwrap()).unwrap();
            prop_assert!(p1.max_abs_diff(&p2) <= 1e-12);
            prop_assert_eq!(t.adjoint().adjoint(), t.clone());
            for (m, ma) in t.realize().iter().zip(t.adjoint().realize()) {
                prop_assert_eq!(&m.adjoint(), ma);
            }
        }

        #[test]
        fn uniform_norm_bounds_seminorms(t in op_strategy(vec![2, 1], 2, 2), x in vec_strategy(vec![2, 1], 2)) {
            let n = t.uniform_norm();
            let tx = t.apply(&x).unwrap();
            for k in 0..2 {
                prop_assert!(tx.seminorm(k).unwrap() <= n * x.seminorm(k).unwrap() + 1e-9);
            }
        }

        #[test]
        fn uniform_norm_submultiplicative(t in op_strategy(vec![3], 2, 2), r in op_strategy(vec![3], 2, 2)) {
            let tr = t.compose(&r).unwrap();
            prop_assert!(tr.uniform_norm() <= t.uniform_norm() * r.uniform_norm() + 1e-9);
        }

        #[test]
        fn penrose_identities(t in rank_deficient(vec![2, 1], 3, 2)) {
            let tol = Tolerances::default();
            let p = t.pinv(&tol);
            let tpt = t.compose(&p).unwrap().compose(&t).unwrap();
            prop_assert!(tpt.distance(&t).unwrap() <= 1e-9);
            let ptp = p.compose(&t).unwrap().compose(&p).unwrap();
            prop_assert!(ptp.distance(&p).unwrap() <= 1e-9 * (1.0 + p.uniform_norm()));
            let tp = t.compose(&p).unwrap();
            prop_assert!(tp.distance(&tp.adjoint()).unwrap() <= 1e-9);
            let pt = p.compose(&t).unwrap();
            prop_assert!(pt.distance(&pt.adjoint()).unwrap() <= 1e-9);
        }

        #[test]
        fn range_projection_is_orthogonal_projector(t in rank_deficient(vec![2, 2], 2, 3)) {
            let p = t.range_projection(&Tolerances::default());
            prop_assert!(p.compose(&p).unwrap().distance(&p).unwrap() <= 1e-10);
            prop_assert!(p.distance(&p.adjoint()).unwrap() <= 1e-10);
            prop_assert!(p.compose(&t).unwrap().distance(&t).unwrap() <= 1e-9);
        }

        #[test]
        fn bounded_inverse_on_random_invertible(f in op_strategy(vec![2, 1], 2, 2), eta in vec_strategy(vec![2, 1], 2)) {
            let tol = Tolerances::default();
            let f = f.add(&ModuleOperator::identity(f.shape(), 2).scale(3.0)).unwrap();
            prop_assert!(bounded_inverse_check(&f, &eta, &tol).unwrap());
        }

        #[test]
        fn positivity_transfer(b in op_strategy(vec![2, 1], 2, 2), x in vec_strategy(vec![2, 1], 2)) {
            let tol = Tolerances::default();
            let p = b.adjoint().compose(&b).unwrap();
            prop_assert!(p.is_positive(&tol));
            let q = p.apply(&x).unwrap().inner(&x).unwrap();
            prop_assert!(q.is_positive(&tol).is_positive);
        }

        #[test]
        fn douglas_conditions_agree(
            z in rank_deficient(vec![2, 1], 3, 3),
            u in op_strategy(vec![2, 1], 3, 3),
            g in op_strategy(vec![2, 1], 3, 3),
            included in any::<bool>(),
        ) {
            let tol = Tolerances::default();
            let t = if included { z.compose(&u).unwrap() } else { g };
            let cert = douglas(&t, &z, &tol).unwrap();
            prop_assert!(cert.conditions.agree());
            prop_assert_eq!(cert.range_included, included);
            if included {
                let f = cert.factor.as_ref().unwrap();
                let a = cert.alpha_min.unwrap();
                prop_assert!(cert.residual <= 1e-8 * (1.0 + t.uniform_norm()));
                prop_assert!((f.uniform_norm() - a).abs() <= 1e-6 * (1.0 + a));
            }
        }
    }
}
