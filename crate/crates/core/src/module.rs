//! The free left Hilbert module `A^d` with its `A`-valued inner product
//! `<x, y> = sum_i x_i y_i*`.

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::scalar::{CMat, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleVector<T: Real> {
    shape: AlgebraShape,
    components: Vec<AlgebraElement<T>>,
}

impl<T: Real> ModuleVector<T> {
    pub fn new(shape: &AlgebraShape, components: Vec<AlgebraElement<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Shape("module rank must be positive".into()));
        }
        for c in &components {
            c.shape().ensure_same(shape)?;
        }
        Ok(Self {
            shape: shape.clone(),
            components,
        })
    }

    pub fn zero(shape: &AlgebraShape, rank: usize) -> Self {
        Self {
            shape: shape.clone(),
            components: vec![AlgebraElement::zero(shape); rank],
        }
    }

    /// Coordinate vector `e_i`: `1_A` in slot `i`, zero elsewhere.
    pub fn basis(shape: &AlgebraShape, rank: usize, i: usize) -> Self {
        let mut v = Self::zero(shape, rank);
        v.components[i] = AlgebraElement::one(shape);
        v
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[AlgebraElement<T>] {
        &self.components
    }

    /// Left action `a . x`.
    pub fn left_mul(&self, a: &AlgebraElement<T>) -> Self {
        Self {
            shape: self.shape.clone(),
            components: self.components.iter().map(|c| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `<self, other>`, linear in the first argument.
    pub fn inner(&self, other: &Self) -> Result<AlgebraElement<T>> {
        self.ensure_compatible(other)?;
        Ok(self
            .components
            .iter()
            .zip(&other.components)
            .fold(AlgebraElement::zero(&self.shape), |acc, (x, y)| {
                &acc + &(x * &y.adjoint())
            }))
    }

    /// `sqrt(p_k(<x, x>))`.
    pub fn seminorm(&self, k: usize) -> Result<T> {
        self.shape.check_block(k)?;
        let g = self.inner(self)?;
        Ok(g.seminorm(k)?.sqrt())
    }

    /// Row-stacked block `k`: the `n_k x (n_k d)` matrix `[x_1 | ... | x_d]`.
    pub fn row_stack(&self, k: usize) -> CMat<T> {
        let n = self.shape.dim(k);
        let d = self.rank();
        let mut out = CMat::zeros(n, n * d);
        for (i, c) in self.components.iter().enumerate() {
            out.view_mut((0, i * n), (n, n)).copy_from(c.block(k));
        }
        out
    }

    pub(crate) fn from_row_stacks(shape: &AlgebraShape, stacks: &[CMat<T>]) -> Self {
        let n0 = shape.dim(0);
        let d = stacks[0].ncols() / n0;
        let components = (0..d)
            .map(|i| {
                let blocks = stacks
                    .iter()
                    .enumerate()
                    .map(|(k, s)| {
                        let n = shape.dim(k);
                        s.view((0, i * n), (n, n)).into_owned()
                    })
                    .collect();
                AlgebraElement::from_blocks_unchecked(shape, blocks)
            })
            .collect();
        Self {
            shape: shape.clone(),
            components,
        }
    }

    /// Vector whose block-`k` row stack has `row` as its first row and zeros
    /// elsewhere; every other block vanishes. Used to pull eigenvectors of a
    /// realization back to module elements.
    pub(crate) fn from_block_row(
        shape: &AlgebraShape,
        rank: usize,
        k: usize,
        row: &nalgebra::DVector<crate::scalar::Cx<T>>,
    ) -> Self {
        let stacks: Vec<CMat<T>> = (0..shape.num_blocks())
            .map(|j| {
                let n = shape.dim(j);
                let mut m = CMat::zeros(n, n * rank);
                if j == k {
                    for (c, z) in row.iter().enumerate() {
                        m[(0, c)] = z.conj();
                    }
                }
                m
            })
            .collect();
        Self::from_row_stacks(shape, &stacks)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(T::zero(), |a, b| a.max(b))
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        self.shape.ensure_same(&other.shape)?;
        if self.rank() != other.rank() {
            return Err(Error::Shape(format!(
                "module rank {} vs {}",
                self.rank(),
                other.rank()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::tol::Tolerances;
    use proptest::prelude::*;

    fn vec_strategy(dims: Vec<usize>, rank: usize) -> impl Strategy<Value = ModuleVector<f64>> {
        let per: usize = dims.iter().map(|n| n * n).sum();
        prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64), per * rank).prop_map(move |vals| {
            let sh = AlgebraShape::new(&dims).unwrap();
            let mut it = vals.into_iter();
            let comps = (0..rank)
                .map(|_| {
                    let blocks = dims
                        .iter()
                        .map(|&n| {
                            CMat::from_fn(n, n, |_, _| {
                                let (a, b) = it.next().unwrap();
                                cx(a, b)
                            })
                        })
                        .collect();
                    AlgebraElement::from_blocks(&sh, blocks).unwrap()
                })
                .collect();
            ModuleVector::new(&sh, comps).unwrap()
        })
    }

    fn elem(dims: Vec<usize>) -> impl Strategy<Value = AlgebraElement<f64>> {
        vec_strategy(dims, 1).prop_map(|v| v.components()[0].clone())
    }

    #[test]
    fn coordinate_vectors() {
        let sh = AlgebraShape::new(&[2, 3]).unwrap();
        let e1 = ModuleVector::<f64>::basis(&sh, 3, 0);
        let e2 = ModuleVector::<f64>::basis(&sh, 3, 1);
        assert_eq!(e1.inner(&e1).unwrap(), AlgebraElement::one(&sh));
        assert_eq!(e1.inner(&e2).unwrap(), AlgebraElement::zero(&sh));
        for k in 0..2 {
            assert!((e1.seminorm(k).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(ModuleVector::<f64>::zero(&sh, 3).seminorm(k).unwrap(), 0.0);
        }
        assert!(e1.seminorm(2).is_err());
    }

    #[test]
    fn sum_of_two_coordinates_over_scalars() {
        let sh = AlgebraShape::new(&[1]).unwrap();
        let x = ModuleVector::<f64>::basis(&sh, 2, 0)
            .add(&ModuleVector::basis(&sh, 2, 1))
            .unwrap();
        // <x, x> = 1 + 1 by hand
        assert!((x.seminorm(0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rank_mismatch_is_rejected() {
        let sh = AlgebraShape::new(&[1]).unwrap();
        let x = ModuleVector::<f64>::zero(&sh, 2);
        let y = ModuleVector::<f64>::zero(&sh, 3);
        assert!(matches!(x.inner(&y), Err(Error::Shape(_))));
    }

    proptest! {
        #[test]
        fn inner_is_a_linear_in_first_argument(
            a in elem(vec![2, 1]), x in vec_strategy(vec![2, 1], 3), y in vec_strategy(vec![2, 1], 3)
        ) {
            let lhs = x.left_mul(&a).inner(&y).unwrap();
            // oracle: expand sum_i (a x_i) y_i^* block by block
            let sh = x.shape().clone();
            let mut blocks = Vec::new();
            for k in 0..sh.num_blocks() {
                let n = sh.dim(k);
                let mut acc = CMat::<f64>::zeros(n, n);
                for i in 0..3 {
                    acc += a.block(k) * x.components()[i].block(k) * y.components()[i].block(k).adjoint();
                }
                blocks.push(acc);
            }
            let oracle = AlgebraElement::from_blocks(&sh, blocks).unwrap();
            prop_assert!(lhs.max_abs_diff(&oracle) <= 1e-12);
            let rhs = &a * &x.inner(&y).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }

        #[test]
        fn hermitian_symmetry_and_positivity(x in vec_strategy(vec![2, 2], 2), y in vec_strategy(vec![2, 2], 2)) {
            prop_assert_eq!(x.inner(&y).unwrap().adjoint(), y.inner(&x).unwrap());
            prop_assert!(x.inner(&x).unwrap().is_positive(&Tolerances::default()).is_positive);
        }

        #[test]
        fn cauchy_schwarz_per_seminorm(x in vec_strategy(vec![3, 1], 2), y in vec_strategy(vec![3, 1], 2)) {
            for k in 0..2 {
                let lhs = x.inner(&y).unwrap().seminorm(k).unwrap();
                prop_assert!(lhs <= x.seminorm(k).unwrap() * y.seminorm(k).unwrap() + 1e-9);
            }
        }

        #[test]
        fn self_inner_vanishes_only_at_zero(x in vec_strategy(vec![2], 2), zeroed in any::<bool>()) {
            let x = if zeroed { ModuleVector::zero(x.shape(), 2) } else { x };
            let g = x.inner(&x).unwrap();
            let is_zero = x.max_abs_diff(&ModuleVector::zero(x.shape(), 2)) == 0.0;
            prop_assert_eq!(g.norm() <= 1e-12, is_zero);
        }
    }
}
