//! Finite g-frames `{Gamma_i : A^d -> A^{c_i}}` with their analysis,
//! synthesis and frame operators, optimal bounds and g-operators.

use std::sync::OnceLock;

use crate::algebra::AlgebraShape;
use crate::error::{Error, Result};
use crate::linalg;
use crate::module::ModuleVector;
use crate::operator::ModuleOperator;
use crate::scalar::{CMat, Real};
use crate::tol::Tolerances;

#[derive(Debug, Clone)]
pub struct GFrame<T: Real> {
    shape: AlgebraShape,
    domain_rank: usize,
    members: Vec<ModuleOperator<T>>,
    offsets: Vec<usize>,
    analysis_op: OnceLock<ModuleOperator<T>>,
    frame_op: OnceLock<ModuleOperator<T>>,
}

impl<T: Real> PartialEq for GFrame<T> {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

/// Optimal constants of `A <x,x> <= sum <G_i x, G_i x> <= B <x,x>`.
#[derive(Debug, Clone)]
pub struct FrameBounds<T: Real> {
    pub lower: T,
    pub upper: T,
    pub tight: bool,
    pub witness_low: ModuleVector<T>,
    pub witness_high: ModuleVector<T>,
}

/// Per-axiom defects of a candidate g-orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisDiagnostic<T: Real> {
    /// `max_ij ||E_j E_i* - delta_ij I||_inf`.
    pub delta_defect: T,
    /// `||sum E_i* E_i - I||_inf`.
    pub parseval_defect: T,
    /// Worst `|sum_i p_k(E_i x)^2 - p_k(x)^2|` over the probes and blocks.
    pub seminorm_defect: T,
}

impl<T: Real> BasisDiagnostic<T> {
    /// The A-valued reading: delta condition plus `sum E_i* E_i = I`.
    pub fn is_basis(&self, tol: &Tolerances) -> bool {
        let t = T::lit(tol.herm);
        self.delta_defect <= t && self.parseval_defect <= t
    }

    pub fn seminorm_axiom_holds(&self, tol: &Tolerances) -> bool {
        self.seminorm_defect <= T::lit(tol.eq)
    }
}

impl<T: Real> GFrame<T> {
    pub fn new(members: Vec<ModuleOperator<T>>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Shape("a g-frame needs at least one member".into()))?;
        let shape = first.shape().clone();
        let domain_rank = first.domain_rank();
        for (i, m) in members.iter().enumerate() {
            m.shape().ensure_same(&shape)?;
            if m.domain_rank() != domain_rank {
                return Err(Error::Shape(format!(
                    "member {i} has domain A^{}, expected A^{domain_rank}",
                    m.domain_rank()
                )));
            }
        }
        let mut offsets = Vec::with_capacity(members.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for m in &members {
            acc += m.codomain_rank();
            offsets.push(acc);
        }
        Ok(Self {
            shape,
            domain_rank,
            members,
            offsets,
            analysis_op: OnceLock::new(),
            frame_op: OnceLock::new(),
        })
    }

    /// Coordinate slices `E_i` selecting components `offset_i ..` of
    /// `A^d`, `d = sum c_i`.
    pub fn canonical_g_orthonormal_basis(
        shape: &AlgebraShape,
        partition: &[usize],
        rank: usize,
    ) -> Result<Self> {
        let sum: usize = partition.iter().sum();
        if sum != rank || partition.contains(&0) {
            return Err(Error::Partition { sum, rank });
        }
        let mut members = Vec::with_capacity(partition.len());
        let mut off = 0;
        for &c in partition {
            let blocks = shape
                .block_dims()
                .iter()
                .map(|&n| {
                    let mut m = CMat::zeros(n * rank, n * c);
                    m.view_mut((off * n, 0), (n * c, n * c))
                        .fill_with_identity();
                    m
                })
                .collect();
            members.push(ModuleOperator::from_realization(shape, rank, c, blocks)?);
            off += c;
        }
        Self::new(members)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn domain_rank(&self) -> usize {
        self.domain_rank
    }

    pub fn members(&self) -> &[ModuleOperator<T>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn codomain_ranks(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.codomain_rank()).collect()
    }

    /// Prefix sums of the codomain ranks; `offsets[i]..offsets[i+1]` is the
    /// slot of `V_i` inside `A^{sum c_i}`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn total_rank(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// `x -> (G_1 x, ..., G_m x)` as an operator `A^d -> A^{sum c_i}`.
    pub fn analysis_operator(&self) -> &ModuleOperator<T> {
        self.analysis_op.get_or_init(|| {
            ModuleOperator::hconcat(&self.members).expect("members validated at construction")
        })
    }

    pub fn synthesis_operator(&self) -> ModuleOperator<T> {
        self.analysis_operator().adjoint()
    }

    /// `S = sum G_i* G_i`.
    pub fn frame_operator(&self) -> &ModuleOperator<T> {
        self.frame_op.get_or_init(|| {
            let mut s = ModuleOperator::zero(&self.shape, self.domain_rank, self.domain_rank);
            for g in &self.members {
                let term = g.adjoint().compose(g).expect("member shapes validated");
                s = s.add(&term).expect("same type");
            }
            s
        })
    }

    /// Member-wise analysis, concatenated at the offsets.
    pub fn analysis(&self, x: &ModuleVector<T>) -> Result<ModuleVector<T>> {
        let mut comps = Vec::with_capacity(self.total_rank());
        for g in &self.members {
            comps.extend(g.apply(x)?.components().iter().cloned());
        }
        ModuleVector::new(&self.shape, comps)
    }

    /// `sum G_i*(g_i)` for `g` laid out by the offsets.
    pub fn synthesis(&self, g: &ModuleVector<T>) -> Result<ModuleVector<T>> {
        g.shape().ensure_same(&self.shape)?;
        if g.rank() != self.total_rank() {
            return Err(Error::Shape(format!(
                "synthesis input has rank {}, frame expects {}",
                g.rank(),
                self.total_rank()
            )));
        }
        let mut out = ModuleVector::zero(&self.shape, self.domain_rank);
        for (i, m) in self.members.iter().enumerate() {
            let slot = ModuleVector::new(
                &self.shape,
                g.components()[self.offsets[i]..self.offsets[i + 1]].to_vec(),
            )?;
            out = out.add(&m.adjoint().apply(&slot)?)?;
        }
        Ok(out)
    }

    /// Extreme eigenvalues of the frame operator over all blocks.
    pub fn optimal_g_bounds(&self, tol: &Tolerances) -> FrameBounds<T> {
        let s = self.frame_operator();
        let mut low: Option<(T, usize, usize)> = None;
        let mut high: Option<(T, usize, usize)> = None;
        let mut vecs = Vec::new();
        for (k, b) in s.realize().iter().enumerate() {
            let (vals, v) = linalg::eigh(b);
            let (lo, hi) = (vals[0], vals[vals.len() - 1]);
            if low.is_none_or(|(x, _, _)| lo < x) {
                low = Some((lo, k, 0));
            }
            if high.is_none_or(|(x, _, _)| hi > x) {
                high = Some((hi, k, vals.len() - 1));
            }
            vecs.push(v);
        }
        let (lower, kl, il) = low.expect("at least one block");
        let (upper, kh, ih) = high.expect("at least one block");
        let lower = lower.max(T::zero());
        let upper = upper.max(T::zero());
        let pull = |k: usize, i: usize| {
            ModuleVector::from_block_row(&self.shape, self.domain_rank, k, &vecs[k].column(i).into_owned())
        };
        FrameBounds {
            lower,
            upper,
            tight: upper - lower <= T::lit(tol.eq) * upper,
            witness_low: pull(kl, il),
            witness_high: pull(kh, ih),
        }
    }

    /// Threshold on `lambda_min(S)` separating g-frames from Bessel
    /// sequences that are not frames.
    pub(crate) fn frame_threshold(&self, tol: &Tolerances) -> T {
        T::lit(tol.rank) * T::one().max(self.frame_operator().uniform_norm())
    }

    pub fn is_g_frame(&self, tol: &Tolerances) -> bool {
        self.optimal_g_bounds(tol).lower > self.frame_threshold(tol)
    }

    /// `{x : G_i x = 0 for all i} = {0}`, decided from the rank of the
    /// stacked analysis realization.
    pub fn is_g_complete(&self, tol: &Tolerances) -> bool {
        let t = self.frame_threshold(tol).sqrt();
        self.analysis_operator().realize().iter().all(|b| {
            let s = linalg::singular_values(b);
            s.len() == b.nrows() && s.last().is_some_and(|&v| v > t)
        })
    }

    /// `{G_i o op}`.
    pub fn compose_right(&self, op: &ModuleOperator<T>) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|g| g.compose(op))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    /// `{op o G_i}`.
    pub fn compose_left(&self, op: &ModuleOperator<T>) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|g| op.compose(g))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn scale(&self, c: T) -> Self {
        Self::new(self.members.iter().map(|g| g.scale(c)).collect()).expect("same members")
    }

    /// Largest member-wise distance; `None` for different index structures.
    pub fn distance(&self, other: &Self) -> Option<T> {
        if self.codomain_ranks() != other.codomain_ranks() || self.domain_rank != other.domain_rank {
            return None;
        }
        self.members
            .iter()
            .zip(&other.members)
            .map(|(a, b)| a.distance(b).ok())
            .try_fold(T::zero(), |acc, d| d.map(|d| acc.max(d)))
    }

    /// Tests each basis axiom separately; `probes` feed the seminorm axiom.
    pub fn basis_diagnostic(&self, probes: &[ModuleVector<T>]) -> Result<BasisDiagnostic<T>> {
        let mut delta_defect = T::zero();
        for (i, ei) in self.members.iter().enumerate() {
            for (j, ej) in self.members.iter().enumerate() {
                let prod = ej.compose(&ei.adjoint())?;
                let d = if i == j {
                    prod.distance(&ModuleOperator::identity(&self.shape, ei.codomain_rank()))?
                } else {
                    prod.uniform_norm()
                };
                delta_defect = delta_defect.max(d);
            }
        }
        let parseval_defect = self
            .frame_operator()
            .distance(&ModuleOperator::identity(&self.shape, self.domain_rank))?;
        let mut seminorm_defect = T::zero();
        for x in probes {
            for k in 0..self.shape.num_blocks() {
                let mut lhs = T::zero();
                for e in &self.members {
                    lhs += e.apply(x)?.seminorm(k)?.powi(2);
                }
                let rhs = x.seminorm(k)?.powi(2);
                seminorm_defect = seminorm_defect.max((lhs - rhs).abs());
            }
        }
        Ok(BasisDiagnostic {
            delta_defect,
            parseval_defect,
            seminorm_defect,
        })
    }

    /// The g-operator `Q = sum G_i* o E_i : A^{sum c_i} -> A^d` relative to
    /// the g-orthonormal basis `basis`, so that `G_i = E_i o Q*`.
    pub fn g_operator(&self, basis: &GFrame<T>, tol: &Tolerances) -> Result<ModuleOperator<T>> {
        basis.shape.ensure_same(&self.shape)?;
        if basis.codomain_ranks() != self.codomain_ranks() {
            return Err(Error::BasisIncompatible(format!(
                "frame codomain ranks {:?} vs basis {:?}",
                self.codomain_ranks(),
                basis.codomain_ranks()
            )));
        }
        if !basis.basis_diagnostic(&[])?.is_basis(tol) {
            return Err(Error::BasisIncompatible(
                "reference family is not g-orthonormal".into(),
            ));
        }
        let mut q = ModuleOperator::zero(&self.shape, basis.domain_rank, self.domain_rank);
        for (g, e) in self.members.iter().zip(&basis.members) {
            q = q.add(&g.adjoint().compose(e)?)?;
        }
        Ok(q)
    }

    /// The coordinate basis matching this frame's index structure.
    pub fn matching_basis(&self) -> Result<GFrame<T>> {
        let ranks = self.codomain_ranks();
        Self::canonical_g_orthonormal_basis(&self.shape, &ranks, ranks.iter().sum())
    }

    /// Basis-compatible means `sum c_i = d`, so the coordinate basis lives on
    /// the frame's own domain.
    pub fn is_basis_compatible(&self) -> bool {
        self.total_rank() == self.domain_rank
    }

    /// Frame `{E_i o Q*}` generated by a g-operator.
    pub fn from_g_operator(basis: &GFrame<T>, q: &ModuleOperator<T>) -> Result<Self> {
        basis.compose_right(&q.adjoint())
    }
}
