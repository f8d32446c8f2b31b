//! Plain nested-array encodings of elements, vectors and operators.
//!
//! An element is encoded per block as a row-major matrix of `[re, im]`
//! pairs; a vector is an array of elements; an operator is its `d x c`
//! coefficient array.

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::module::ModuleVector;
use crate::operator::ModuleOperator;
use crate::scalar::{cx, CMat, Real};

pub type ElementPayload = Vec<Vec<Vec<[f64; 2]>>>;
pub type VectorPayload = Vec<ElementPayload>;
pub type OperatorPayload = Vec<Vec<ElementPayload>>;

pub fn element_payload<T: Real>(a: &AlgebraElement<T>) -> ElementPayload {
    a.blocks()
        .iter()
        .map(|m| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()]).collect())
                .collect()
        })
        .collect()
}

pub fn vector_payload<T: Real>(x: &ModuleVector<T>) -> VectorPayload {
    x.components().iter().map(element_payload).collect()
}

pub fn operator_payload<T: Real>(op: &ModuleOperator<T>) -> OperatorPayload {
    op.coeffs()
        .iter()
        .map(|row| row.iter().map(element_payload).collect())
        .collect()
}

/// `path` prefixes every diagnostic, e.g. `operators.K[0][1]`.
pub fn element_from_payload<T: Real>(
    shape: &AlgebraShape,
    p: &ElementPayload,
    path: &str,
) -> Result<AlgebraElement<T>> {
    if p.len() != shape.num_blocks() {
        return Err(Error::Shape(format!(
            "{path}: expected {} blocks, found {}",
            shape.num_blocks(),
            p.len()
        )));
    }
    let mut blocks = Vec::with_capacity(p.len());
    for (k, rows) in p.iter().enumerate() {
        let n = shape.dim(k);
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!(
                "{path}[{k}]: block {k} must be {n}x{n}"
            )));
        }
        blocks.push(CMat::from_fn(n, n, |i, j| {
            let [re, im] = rows[i][j];
            cx(T::lit(re), T::lit(im))
        }));
    }
    AlgebraElement::from_blocks(shape, blocks)
}

pub fn vector_from_payload<T: Real>(
    shape: &AlgebraShape,
    p: &VectorPayload,
    path: &str,
) -> Result<ModuleVector<T>> {
    let comps = p
        .iter()
        .enumerate()
        .map(|(i, e)| element_from_payload(shape, e, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    ModuleVector::new(shape, comps)
}

/// Decodes a `d x c` coefficient array, checking both ranks.
pub fn operator_from_payload<T: Real>(
    shape: &AlgebraShape,
    p: &OperatorPayload,
    domain_rank: usize,
    codomain_rank: usize,
    path: &str,
) -> Result<ModuleOperator<T>> {
    if domain_rank == 0 || codomain_rank == 0 {
        return Err(Error::Shape(format!("{path}: module ranks must be positive")));
    }
    if p.len() != domain_rank {
        return Err(Error::Shape(format!(
            "{path}: expected {domain_rank} rows, found {}",
            p.len()
        )));
    }
    let mut coeffs = Vec::with_capacity(p.len());
    for (i, row) in p.iter().enumerate() {
        if row.len() != codomain_rank {
            return Err(Error::Shape(format!(
                "{path}[{i}]: expected {codomain_rank} entries, found {}",
                row.len()
            )));
        }
        coeffs.push(
            row.iter()
                .enumerate()
                .map(|(j, e)| element_from_payload(shape, e, &format!("{path}[{i}][{j}]")))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    ModuleOperator::from_coeffs(shape, &coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::GaussianStream;

    #[test]
    fn operator_round_trip() {
        let shape = AlgebraShape::new(&[2, 1]).unwrap();
        let op: ModuleOperator<f64> = GaussianStream::new(3).operator(&shape, 2, 3);
        let p = operator_payload(&op);
        let back: ModuleOperator<f64> = operator_from_payload(&shape, &p, 2, 3, "K").unwrap();
        assert_eq!(back.distance(&op).unwrap(), 0.0);
    }

    #[test]
    fn bad_block_names_path() {
        let shape = AlgebraShape::new(&[2]).unwrap();
        let p: ElementPayload = vec![vec![vec![[1.0, 0.0]]]];
        let err = element_from_payload::<f64>(&shape, &p, "frame[0].coeffs[0][0]").unwrap_err();
        assert!(err.to_string().contains("frame[0].coeffs[0][0][0]"));
    }
}
