//! The model algebra `A = M_{n_1}(C) (+) ... (+) M_{n_m}(C)`.
//!
//! Each block carries one C*-seminorm, the spectral norm of that block, so
//! the seminorm family is finite but genuinely plural. Arithmetic is exact
//! composition of blockwise products and conjugate transposes.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{creal, CMat, Cx, Real};
use crate::tol::Tolerances;

/// Block sizes `(n_1, ..., n_m)` of the algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraShape {
    dims: Arc<[usize]>,
}

impl AlgebraShape {
    pub fn new(block_dims: &[usize]) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidShape("at least one block is required".into()));
        }
        if let Some(k) = block_dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("block {k} has dimension 0")));
        }
        Ok(Self {
            dims: block_dims.into(),
        })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims[k]
    }

    pub(crate) fn check_block(&self, k: usize) -> Result<()> {
        if k < self.dims.len() {
            Ok(())
        } else {
            Err(Error::BlockIndex {
                index: k,
                blocks: self.dims.len(),
            })
        }
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "algebra {:?} vs {:?}",
                self.block_dims(),
                other.block_dims()
            )))
        }
    }
}

impl TryFrom<Vec<usize>> for AlgebraShape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(&dims)
    }
}

impl From<AlgebraShape> for Vec<usize> {
    fn from(s: AlgebraShape) -> Self {
        s.dims.to_vec()
    }
}

/// Element of the algebra: one square complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement<T: Real> {
    shape: AlgebraShape,
    blocks: Vec<CMat<T>>,
}

/// Certificate for membership in the positive cone.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityVerdict<T: Real> {
    pub is_positive: bool,
    /// Block with the smallest eigenvalue, or the first non-Hermitian block.
    pub worst_block: usize,
    pub min_eigenvalue: T,
}

impl<T: Real> AlgebraElement<T> {
    pub fn from_blocks(shape: &AlgebraShape, blocks: Vec<CMat<T>>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::Shape(format!(
                "{} blocks given for an algebra with {}",
                blocks.len(),
                shape.num_blocks()
            )));
        }
        for (k, b) in blocks.iter().enumerate() {
            let n = shape.dim(k);
            if b.shape() != (n, n) {
                return Err(Error::Shape(format!(
                    "block {k} is {:?}, expected {n}x{n}",
                    b.shape()
                )));
            }
        }
        Ok(Self {
            shape: shape.clone(),
            blocks,
        })
    }

    pub(crate) fn from_blocks_unchecked(shape: &AlgebraShape, blocks: Vec<CMat<T>>) -> Self {
        debug_assert_eq!(blocks.len(), shape.num_blocks());
        Self {
            shape: shape.clone(),
            blocks,
        }
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let blocks = shape.block_dims().iter().map(|&n| CMat::zeros(n, n)).collect();
        Self::from_blocks_unchecked(shape, blocks)
    }

    pub fn one(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&n| CMat::identity(n, n))
            .collect();
        Self::from_blocks_unchecked(shape, blocks)
    }

    /// `c * 1_A`.
    pub fn scalar(shape: &AlgebraShape, c: Cx<T>) -> Self {
        Self::one(shape).scale(c)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMat<T>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMat<T> {
        &self.blocks[k]
    }

    pub fn adjoint(&self) -> Self {
        let blocks = self.blocks.iter().map(|b| b.adjoint()).collect();
        Self::from_blocks_unchecked(&self.shape, blocks)
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        let blocks = self.blocks.iter().map(|b| b * c).collect();
        Self::from_blocks_unchecked(&self.shape, blocks)
    }

    /// `max_k p_k(a)`, the norm of the direct sum.
    pub fn norm(&self) -> T {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// The C*-seminorm `p_k`: spectral norm of block `k`.
    pub fn seminorm(&self, k: usize) -> Result<T> {
        self.shape.check_block(k)?;
        Ok(linalg::spectral_norm(&self.blocks[k]))
    }

    /// Membership in the positive cone, blockwise.
    pub fn is_positive(&self, tol: &Tolerances) -> PositivityVerdict<T> {
        let scale = T::one() + self.norm();
        let herm_tol = T::lit(tol.herm) * scale;
        let psd_tol = T::lit(tol.psd) * scale;
        let mut worst_block = 0;
        let mut min_eig: Option<T> = None;
        for (k, b) in self.blocks.iter().enumerate() {
            if linalg::hermitian_defect(b) > herm_tol {
                // eigenvalues of the Hermitian part say nothing here
                let (vals, _) = linalg::eigh(b);
                return PositivityVerdict {
                    is_positive: false,
                    worst_block: k,
                    min_eigenvalue: vals.first().copied().unwrap_or_else(T::zero),
                };
            }
            let (vals, _) = linalg::eigh(b);
            let lo = vals[0];
            if min_eig.is_none_or(|m| lo < m) {
                min_eig = Some(lo);
                worst_block = k;
            }
        }
        let min_eigenvalue = min_eig.unwrap_or_else(T::zero);
        PositivityVerdict {
            is_positive: min_eigenvalue >= -psd_tol,
            worst_block,
            min_eigenvalue,
        }
    }

    /// `self <= other` in the order of the positive cone.
    pub fn leq(&self, other: &Self, tol: &Tolerances) -> Result<bool> {
        self.shape.ensure_same(&other.shape)?;
        Ok((other - self).is_positive(tol).is_positive)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::max_abs(&(a - b)))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

macro_rules! blockwise {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<T: Real> $tr<&AlgebraElement<T>> for &AlgebraElement<T> {
            type Output = AlgebraElement<T>;
            fn $method(self, rhs: &AlgebraElement<T>) -> AlgebraElement<T> {
                assert_eq!(self.shape, rhs.shape, "algebra shape mismatch");
                let blocks = self
                    .blocks
                    .iter()
                    .zip(&rhs.blocks)
                    .map(|(a, b)| a $op b)
                    .collect();
                AlgebraElement::from_blocks_unchecked(&self.shape, blocks)
            }
        }
        impl<T: Real> $tr for AlgebraElement<T> {
            type Output = AlgebraElement<T>;
            fn $method(self, rhs: AlgebraElement<T>) -> AlgebraElement<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

blockwise!(Add, add, +);
blockwise!(Sub, sub, -);
blockwise!(Mul, mul, *);

impl<T: Real> Neg for &AlgebraElement<T> {
    type Output = AlgebraElement<T>;
    fn neg(self) -> AlgebraElement<T> {
        self.scale(creal(-T::one()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use proptest::prelude::*;

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d).unwrap()
    }

    fn real_block(rows: &[&[f64]]) -> CMat<f64> {
        CMat::from_fn(rows.len(), rows[0].len(), |i, j| creal(rows[i][j]))
    }

    /// Largest singular value by power iteration on `a^H a`; independent of
    /// the SVD used by the library.
    fn power_sigma_max(a: &CMat<f64>) -> f64 {
        let g = a.adjoint() * a;
        let n = g.nrows();
        let mut v = nalgebra::DVector::from_fn(n, |i, _| cx(1.0 + i as f64 * 0.37, 0.11 * i as f64));
        let mut lam = 0.0;
        for _ in 0..2000 {
            let w = &g * &v;
            let nrm = w.norm();
            if nrm == 0.0 {
                return 0.0;
            }
            lam = nrm;
            v = w / cx(nrm, 0.0);
        }
        lam.sqrt()
    }

    fn elem_strategy(dims: Vec<usize>) -> impl Strategy<Value = AlgebraElement<f64>> {
        let total: usize = dims.iter().map(|n| n * n).sum();
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), total).prop_map(move |vals| {
            let sh = AlgebraShape::new(&dims).unwrap();
            let mut it = vals.into_iter();
            let blocks = dims
                .iter()
                .map(|&n| {
                    CMat::from_fn(n, n, |_, _| {
                        let (re, im) = it.next().unwrap();
                        cx(re, im)
                    })
                })
                .collect();
            AlgebraElement::from_blocks(&sh, blocks).unwrap()
        })
    }

    #[test]
    fn rejects_empty_or_zero_blocks() {
        assert!(AlgebraShape::new(&[]).is_err());
        assert!(AlgebraShape::new(&[2, 0]).is_err());
    }

    #[test]
    fn seminorm_of_identity_is_one() {
        let one = AlgebraElement::<f64>::one(&shape(&[2, 3]));
        assert!((one.seminorm(0).unwrap() - 1.0).abs() < 1e-15);
        assert!((one.seminorm(1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seminorm_nilpotent_block() {
        let sh = shape(&[2]);
        let b = real_block(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let oracle = power_sigma_max(&b);
        let a = AlgebraElement::from_blocks(&sh, vec![b]).unwrap();
        assert!((oracle - 2.0).abs() < 1e-12);
        assert!((a.seminorm(0).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn seminorm_index_error() {
        let one = AlgebraElement::<f64>::one(&shape(&[2, 3]));
        assert_eq!(
            one.seminorm(2),
            Err(Error::BlockIndex { index: 2, blocks: 2 })
        );
    }

    #[test]
    fn positivity_examples() {
        let tol = Tolerances::default();
        let sh = shape(&[2, 1]);
        let one = AlgebraElement::<f64>::one(&sh);
        let v = one.is_positive(&tol);
        assert!(v.is_positive);
        assert!((v.min_eigenvalue - 1.0).abs() < 1e-15);

        let a = AlgebraElement::from_blocks(
            &sh,
            vec![real_block(&[&[1.0, 0.0], &[0.0, -0.5]]), real_block(&[&[3.0]])],
        )
        .unwrap();
        let v = a.is_positive(&tol);
        assert!(!v.is_positive);
        assert_eq!(v.worst_block, 0);
        assert!((v.min_eigenvalue + 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_is_not_positive() {
        let sh = shape(&[2]);
        let a = AlgebraElement::from_blocks(&sh, vec![real_block(&[&[1.0, 1.0], &[0.0, 1.0]])])
            .unwrap();
        let v = a.is_positive(&Tolerances::default());
        assert!(!v.is_positive);
        assert_eq!(v.worst_block, 0);
    }

    #[test]
    fn leq_examples() {
        let tol = Tolerances::default();
        let sh = shape(&[2]);
        let zero = AlgebraElement::<f64>::zero(&sh);
        let one = AlgebraElement::one(&sh);
        assert!(zero.leq(&one, &tol).unwrap());
        let a = AlgebraElement::from_blocks(&sh, vec![real_block(&[&[2.0, 0.0], &[0.0, 0.0]])])
            .unwrap();
        assert!(!a.leq(&one, &tol).unwrap());
        assert!(a.leq(&a, &tol).unwrap());
        let other = AlgebraElement::<f64>::one(&shape(&[3]));
        assert!(matches!(a.leq(&other, &tol), Err(Error::Shape(_))));
    }

    proptest! {
        #[test]
        fn c_star_identity_and_submultiplicativity(
            a in elem_strategy(vec![2, 3]),
            b in elem_strategy(vec![2, 3]),
        ) {
            for k in 0..2 {
                let pa = a.seminorm(k).unwrap();
                let pb = b.seminorm(k).unwrap();
                let pab = (&a * &b).seminorm(k).unwrap();
                prop_assert!(pab <= pa * pb + 1e-10);
                let pstar = (&a.adjoint() * &a).seminorm(k).unwrap();
                // oracle: recompute p(a)^2 from the raw block by power iteration
                let oracle = power_sigma_max(a.block(k)).powi(2);
                prop_assert!((pstar - oracle).abs() <= 1e-10 * (1.0 + oracle));
                prop_assert!((pstar - pa * pa).abs() <= 1e-10 * (1.0 + pa * pa));
            }
        }

        #[test]
        fn involution_is_exact(a in elem_strategy(vec![2, 1]), b in elem_strategy(vec![2, 1])) {
            prop_assert_eq!(a.adjoint().adjoint(), a.clone());
            prop_assert_eq!((&a * &b).adjoint(), &b.adjoint() * &a.adjoint());
        }

        #[test]
        fn gram_elements_are_positive(b in elem_strategy(vec![3, 2])) {
            let a = &b.adjoint() * &b;
            prop_assert!(a.is_positive(&Tolerances::default()).is_positive);
            // oracle: x^H a x >= 0 on sampled vectors
            for k in 0..2 {
                let n = a.block(k).nrows();
                for s in 0..100 {
                    let x = nalgebra::DVector::from_fn(n, |i, _| {
                        let t = (s * 7 + i * 3) as f64;
                        cx(t.sin(), (1.3 * t).cos())
                    });
                    let q = (x.adjoint() * a.block(k) * &x)[(0, 0)];
                    prop_assert!(q.re >= -1e-12 * (1.0 + a.norm()));
                }
            }
        }

        #[test]
        fn leq_is_transitive_on_hermitian_triples(
            b in elem_strategy(vec![2]), c in elem_strategy(vec![2]), a in elem_strategy(vec![2]),
        ) {
            let tol = Tolerances::default();
            let x = &a.adjoint() * &a;
            let y = &x + &(&b.adjoint() * &b);
            let z = &y + &(&c.adjoint() * &c);
            prop_assert!(x.leq(&y, &tol).unwrap());
            prop_assert!(y.leq(&z, &tol).unwrap());
            prop_assert!(x.leq(&z, &tol).unwrap());
            // antisymmetry up to tolerance
            if y.leq(&x, &tol).unwrap() {
                prop_assert!(x.max_abs_diff(&y) <= 1e-6 * (1.0 + y.norm()));
            }
        }
    }
}
