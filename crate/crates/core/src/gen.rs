//! Seeded instance generation.
//!
//! The Gaussian stream is "chacha20-boxmuller-v1": a ChaCha20 key made of
//! four SplitMix64 outputs of the seed, uniforms taken as the top 53 bits of
//! each 64-bit word, and one complex normal `r (cos t, sin t)` with
//! `r = sqrt(-ln u1)`, `t = 2 pi u2` per pair of uniforms (each part has
//! variance 1/2).

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraShape;
use crate::error::{Error, Result};
use crate::gframe::GFrame;
use crate::linalg;
use crate::operator::ModuleOperator;
use crate::scalar::{creal, cx, CMat, Real};

pub const GENERATOR_NAME: &str = "chacha20-boxmuller-v1";

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Sub-seed of trial `trial` of theorem `id` under the run seed `seed`.
pub fn sub_seed(seed: u64, id: &str, trial: u64) -> u64 {
    splitmix64(splitmix64(seed ^ fnv1a(id)) ^ trial)
}

pub struct GaussianStream {
    seed: u64,
    rng: ChaCha20Rng,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut s = seed;
        for chunk in key.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        Self {
            seed,
            rng: ChaCha20Rng::from_seed(key),
        }
    }

    /// Independent stream keyed by this stream's seed and `salt`.
    pub fn fork(&self, salt: &str) -> Self {
        Self::new(splitmix64(self.seed ^ fnv1a(salt)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        let span = hi - lo + 1;
        lo + ((self.uniform() * span as f64) as usize).min(span - 1)
    }

    pub fn coin(&mut self) -> bool {
        self.uniform() < 0.5
    }

    pub fn complex_normal(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-u1.ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        (r * t.cos(), r * t.sin())
    }

    pub fn matrix<T: Real>(&mut self, rows: usize, cols: usize) -> CMat<T> {
        CMat::from_fn(rows, cols, |_, _| {
            let (a, b) = self.complex_normal();
            cx(T::lit(a), T::lit(b))
        })
    }

    pub fn unitary<T: Real>(&mut self, n: usize) -> CMat<T> {
        let g = self.matrix::<T>(n, n);
        linalg::eigh(&(&g + g.adjoint())).1
    }

    /// Rank `r` product of Gaussian factors.
    pub fn low_rank<T: Real>(&mut self, rows: usize, cols: usize, r: usize) -> CMat<T> {
        self.matrix::<T>(rows, r) * self.matrix::<T>(r, cols)
    }

    /// `U diag(sigma) V^H` with `sigma` uniform in `[0.5, 2]`.
    pub fn well_conditioned<T: Real>(&mut self, n: usize) -> CMat<T> {
        let u = self.unitary::<T>(n);
        let v = self.unitary::<T>(n);
        let mut d = CMat::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = creal(T::lit(0.5 + 1.5 * self.uniform()));
        }
        u * d * v.adjoint()
    }

    fn per_block<T: Real>(
        &mut self,
        shape: &AlgebraShape,
        d: usize,
        c: usize,
        mut f: impl FnMut(&mut Self, usize, usize) -> CMat<T>,
    ) -> ModuleOperator<T> {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&n| f(self, n * d, n * c))
            .collect();
        ModuleOperator::from_realization(shape, d, c, blocks).expect("block sizes follow the shape")
    }

    pub fn operator<T: Real>(&mut self, shape: &AlgebraShape, d: usize, c: usize) -> ModuleOperator<T> {
        self.per_block(shape, d, c, |s, r, k| s.matrix(r, k))
    }

    /// Blockwise rank strictly below full (possibly zero).
    pub fn rank_deficient<T: Real>(
        &mut self,
        shape: &AlgebraShape,
        d: usize,
        c: usize,
    ) -> ModuleOperator<T> {
        self.per_block(shape, d, c, |s, r, k| {
            let full = r.min(k);
            let rank = s.range(0, full - 1);
            s.low_rank(r, k, rank)
        })
    }

    pub fn unitary_operator<T: Real>(&mut self, shape: &AlgebraShape, d: usize) -> ModuleOperator<T> {
        self.per_block(shape, d, d, |s, r, _| s.unitary(r))
    }

    pub fn invertible_operator<T: Real>(&mut self, shape: &AlgebraShape, d: usize) -> ModuleOperator<T> {
        self.per_block(shape, d, d, |s, r, _| s.well_conditioned(r))
    }

    /// `W : A^m -> A^c` with `W W* = I` (`m >= c`).
    pub fn coisometry<T: Real>(&mut self, shape: &AlgebraShape, m: usize, c: usize) -> ModuleOperator<T> {
        self.per_block(shape, m, c, |s, r, k| s.unitary::<T>(r).columns(0, k).into_owned())
    }

    /// `W : A^c -> A^m` with `W* W = I` (`m >= c`).
    pub fn isometry<T: Real>(&mut self, shape: &AlgebraShape, c: usize, m: usize) -> ModuleOperator<T> {
        self.coisometry(shape, m, c).adjoint()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GenKind {
    Generic,
    Tight { scale: f64 },
    RankDeficientK,
    Coisometry,
    Isometry,
    CommutingPair,
    Resolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub shape: AlgebraShape,
    pub module_rank: usize,
    pub index_count: usize,
    pub codomain_ranks: Vec<usize>,
    pub kind: GenKind,
}

#[derive(Debug, Clone)]
pub struct InstanceBundle<T: Real> {
    pub frame: GFrame<T>,
    pub k: ModuleOperator<T>,
    pub aux: BTreeMap<String, ModuleOperator<T>>,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let d = self.module_rank;
        let c = &self.codomain_ranks;
        let infeasible = |m: String| Err(Error::Infeasible(m));
        if d == 0 || self.index_count == 0 || c.len() != self.index_count || c.contains(&0) {
            return infeasible(format!(
                "ranks must be positive with one codomain rank per index (d={d}, |I|={}, ranks={c:?})",
                self.index_count
            ));
        }
        let total: usize = c.iter().sum();
        let equal = c.iter().all(|&x| x == c[0]);
        match &self.kind {
            GenKind::Tight { scale } if !(*scale > 0.0) => infeasible(format!("tight scale {scale}")),
            GenKind::Tight { .. } if total < d => {
                infeasible(format!("tight frame needs sum c_i >= d, got {total} < {d}"))
            }
            GenKind::RankDeficientK if total != d => {
                infeasible(format!("g-operator instances need sum c_i = d, got {total} != {d}"))
            }
            GenKind::Coisometry if total != d || !equal => infeasible(format!(
                "co-isometry instances need equal ranks summing to d, got {c:?} for d={d}"
            )),
            GenKind::Isometry if !equal => {
                infeasible(format!("isometry instances need equal codomain ranks, got {c:?}"))
            }
            GenKind::Resolution if c.iter().any(|&x| x != d) || self.index_count < 2 => infeasible(
                format!("resolution members must be square on A^{d} with |I| >= 2, got {c:?}"),
            ),
            _ => Ok(()),
        }
    }
}

fn poly<T: Real>(k: &ModuleOperator<T>, coeffs: &[(f64, f64)]) -> Result<ModuleOperator<T>> {
    let d = k.domain_rank();
    let mut power = ModuleOperator::identity(k.shape(), d);
    let mut out = ModuleOperator::zero(k.shape(), d, d);
    for &(a, b) in coeffs {
        out = out.add(&power.scale_complex(cx(T::lit(a), T::lit(b))))?;
        power = power.compose(k)?;
    }
    Ok(out)
}

pub fn generate<T: Real>(spec: &GenSpec) -> Result<InstanceBundle<T>> {
    spec.validate()?;
    let mut g = GaussianStream::new(spec.seed);
    let shape = &spec.shape;
    let d = spec.module_rank;
    let ranks = &spec.codomain_ranks;
    let total: usize = ranks.iter().sum();
    let random_frame = |g: &mut GaussianStream| {
        GFrame::new(ranks.iter().map(|&c| g.operator(shape, d, c)).collect())
    };
    let mut aux = BTreeMap::new();
    let (frame, k) = match &spec.kind {
        GenKind::Generic => {
            let f = random_frame(&mut g)?;
            (f, g.operator(shape, d, d))
        }
        GenKind::Tight { scale } => {
            let w = g.isometry::<T>(shape, d, total);
            let k = if g.coin() {
                g.rank_deficient(shape, d, d)
            } else {
                g.operator(shape, d, d)
            };
            let k = if k.uniform_norm() == T::zero() {
                g.operator(shape, d, d)
            } else {
                k
            };
            let e = GFrame::canonical_g_orthonormal_basis(shape, ranks, total)?;
            let tail = w.compose(&k.adjoint())?.scale(T::lit(scale.sqrt()));
            aux.insert("W".to_string(), w);
            (e.compose_right(&tail)?, k)
        }
        GenKind::RankDeficientK => {
            let q0 = if g.coin() {
                g.rank_deficient(shape, d, d)
            } else {
                g.operator(shape, d, d)
            };
            let k = if g.coin() {
                let r = if g.coin() {
                    g.rank_deficient(shape, d, d)
                } else {
                    g.operator(shape, d, d)
                };
                q0.compose(&r)?
            } else {
                g.operator(shape, d, d)
            };
            let e = GFrame::canonical_g_orthonormal_basis(shape, ranks, d)?;
            let f = GFrame::from_g_operator(&e, &q0)?;
            aux.insert("Q0".to_string(), q0);
            (f, k)
        }
        GenKind::Coisometry => {
            let q0 = if g.coin() {
                g.unitary_operator(shape, d)
            } else {
                g.operator(shape, d, d)
            };
            let k = g.invertible_operator(shape, d);
            let e = GFrame::canonical_g_orthonormal_basis(shape, ranks, d)?;
            let f = GFrame::from_g_operator(&e, &q0)?;
            let c = ranks[0];
            aux.insert("W".to_string(), g.coisometry(shape, c + 1, c));
            let u = g.unitary_operator::<T>(shape, d);
            let coeffs: Vec<(f64, f64)> = (0..4).map(|_| g.complex_normal()).collect();
            aux.insert("KU".to_string(), poly(&u, &coeffs)?);
            aux.insert("U".to_string(), u);
            aux.insert("Q0".to_string(), q0);
            (f, k)
        }
        GenKind::Isometry => {
            let f = random_frame(&mut g)?;
            let c = ranks[0];
            aux.insert("W".to_string(), g.isometry(shape, c, c + 1));
            (f, g.operator(shape, d, d))
        }
        GenKind::CommutingPair => {
            let f = random_frame(&mut g)?;
            let k0 = g.operator::<T>(shape, d, d);
            let k = k0.scale(T::one() / k0.uniform_norm());
            let mut q = None;
            for _ in 0..100 {
                let degree = g.range(0, 3);
                let coeffs: Vec<(f64, f64)> = (0..=degree).map(|_| g.complex_normal()).collect();
                let cand = poly(&k, &coeffs)?;
                if cand.sigma_min() > T::lit(1e-6) {
                    q = Some(cand);
                    break;
                }
            }
            let q = q.ok_or_else(|| Error::Infeasible("no invertible polynomial in K".into()))?;
            aux.insert("Q".to_string(), q);
            (f, k)
        }
        GenKind::Resolution => {
            let id = ModuleOperator::identity(shape, d);
            let m = spec.index_count;
            let mut members = Vec::with_capacity(m);
            if m == 2 || g.coin() {
                let p = g.per_block(shape, d, d, |s, r, _| {
                    let v = s.well_conditioned::<T>(r);
                    let vinv = linalg::pinv(&v, T::zero());
                    let rank = s.range(1, r.max(2) - 1).min(r);
                    let mut diag = CMat::zeros(r, r);
                    for i in 0..rank {
                        diag[(i, i)] = creal(T::one());
                    }
                    &v * diag * vinv
                });
                members.push(id.sub(&p)?);
                members.push(p);
                members.extend((2..m).map(|_| ModuleOperator::zero(shape, d, d)));
            } else {
                let mut rest = id.clone();
                for _ in 0..m - 1 {
                    let gi = g.operator::<T>(shape, d, d).scale(T::lit(0.5));
                    rest = rest.sub(&gi)?;
                    members.push(gi);
                }
                members.push(rest);
            }
            (GFrame::new(members)?, g.invertible_operator(shape, d))
        }
    };
    Ok(InstanceBundle { frame, k, aux })
}
