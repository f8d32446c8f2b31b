//! K-g-frames: optimal lower bounds, range characterizations, tightness,
//! square-root factorizations, operator quotients and resolutions of the
//! identity.

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::gframe::GFrame;
use crate::linalg;
use crate::module::ModuleVector;
use crate::operator::{douglas, DouglasCertificate, ModuleOperator};
use crate::scalar::{CMat, Real};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgRoute {
    Pencil,
    RangeInclusion,
}

/// A vector on which `C <K* x, K* x> <= sum <G_i x, G_i x>` fails for
/// every `C > frame_side / k_side`. Both sides are read from the `(0, 0)`
/// entry of block `block`, the only nonzero entry of either inner product.
#[derive(Debug, Clone)]
pub struct KgCounterexample<T: Real> {
    pub vector: ModuleVector<T>,
    pub block: usize,
    pub frame_side: T,
    pub k_side: T,
}

#[derive(Debug, Clone)]
pub struct KGFrameReport<T: Real> {
    pub is_k_g_frame: bool,
    /// Largest `C` with `C K K* <= S`; infinite when `K = 0`.
    pub lower_c: T,
    pub upper_d: T,
    pub route: KgRoute,
    pub degenerate: bool,
    /// Size of `K K*` outside `Ran(S)` (square-root scale).
    pub range_defect: T,
    /// `lambda_min(S - C K K*)` relative to `1 + ||S||`; negative beyond
    /// tolerance would contradict the operator form of the inequality.
    pub lemma_margin: T,
    pub counterexample: Option<KgCounterexample<T>>,
}

#[derive(Debug, Clone)]
pub struct TightnessReport<T: Real> {
    pub tight: bool,
    /// Least-squares `A` in `A K K* = S`.
    pub scale: T,
    /// `||A K K* - S||_inf`.
    pub residual: T,
    /// `Ran(K) = Ran(T*)` by inclusion in both directions.
    pub ranges_equal: bool,
}

#[derive(Debug, Clone)]
pub enum SqrtFactorization<T: Real> {
    Factor {
        u: ModuleOperator<T>,
        residual: T,
    },
    Refused {
        report: Box<KGFrameReport<T>>,
        douglas: Box<DouglasCertificate<T>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientReport<T: Real> {
    pub well_defined: bool,
    pub bounded: bool,
    pub beta: Option<T>,
}

/// Violation of `<x, x> <= sum <Psi_i x, Psi_i x>` at an eigenvector of
/// `S_Psi`.
#[derive(Debug, Clone)]
pub struct ProofStepFinding<T: Real> {
    pub witness: ModuleVector<T>,
    pub block: usize,
    pub lambda_min: T,
    /// `<x, x>` and `sum <Psi_i x, Psi_i x>` evaluated via coefficient
    /// arithmetic.
    pub lhs: T,
    pub rhs: T,
    pub margin: T,
}

#[derive(Debug, Clone)]
pub struct ResolutionReport<T: Real> {
    pub resolution_defect: T,
    pub bessel_d: T,
    pub report: KGFrameReport<T>,
    pub proof_step: Option<ProofStepFinding<T>>,
}

fn kk_star<T: Real>(k: &ModuleOperator<T>) -> Result<ModuleOperator<T>> {
    k.compose(&k.adjoint())
}

fn check_k<T: Real>(f: &GFrame<T>, k: &ModuleOperator<T>) -> Result<()> {
    k.shape().ensure_same(f.shape())?;
    if k.domain_rank() != f.domain_rank() || k.codomain_rank() != f.domain_rank() {
        return Err(Error::Shape(format!(
            "K must act on A^{}, got A^{} -> A^{}",
            f.domain_rank(),
            k.domain_rank(),
            k.codomain_rank()
        )));
    }
    Ok(())
}

struct Pencil<T: Real> {
    lower_c: T,
    degenerate: bool,
    range_defect: T,
    leak: Option<(usize, nalgebra::DVector<crate::scalar::Cx<T>>)>,
}

fn pencil<T: Real>(s: &ModuleOperator<T>, k: &ModuleOperator<T>, tol: &Tolerances) -> Result<Pencil<T>> {
    let kk = kk_star(k)?;
    let k_norm = k.uniform_norm();
    if k_norm <= T::lit(tol.rank) {
        return Ok(Pencil {
            lower_c: T::infinity(),
            degenerate: true,
            range_defect: T::zero(),
            leak: None,
        });
    }
    let cut = T::lit(tol.rank) * s.uniform_norm();
    let mut ratio = T::zero();
    let mut defect = T::zero();
    let mut leak = None;
    let mut worst = T::zero();
    for (b, (x, y)) in kk.realize().iter().zip(s.realize()).enumerate() {
        let m = linalg::majorization(x, y, cut);
        ratio = ratio.max(m.ratio);
        if m.outside > worst {
            worst = m.outside;
            leak = m.witness.map(|w| (b, w));
        }
        defect = defect.max(m.outside);
    }
    let included = defect <= T::lit(tol.eq) * (T::one() + k_norm);
    let lower_c = if !included || ratio <= T::zero() {
        T::zero()
    } else {
        T::one() / ratio
    };
    Ok(Pencil {
        lower_c,
        degenerate: false,
        range_defect: defect,
        leak: if included { None } else { leak },
    })
}

/// Largest `C` with `C K K* <= S`, infinite for `K = 0`.
pub fn optimal_kg_lower_bound<T: Real>(
    f: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<T> {
    check_k(f, k)?;
    Ok(pencil(f.frame_operator(), k, tol)?.lower_c)
}

/// `(sum <G_i x, G_i x>, <K* x, K* x>)` through coefficient arithmetic.
pub fn evaluate_lower_inequality<T: Real>(
    f: &GFrame<T>,
    k: &ModuleOperator<T>,
    x: &ModuleVector<T>,
) -> Result<(AlgebraElement<T>, AlgebraElement<T>)> {
    let mut frame_side = AlgebraElement::zero(f.shape());
    for g in f.members() {
        let y = g.apply_via_coeffs(x)?;
        frame_side = &frame_side + &y.inner(&y)?;
    }
    let kx = k.adjoint().apply_via_coeffs(x)?;
    Ok((frame_side, kx.inner(&kx)?))
}

fn corner<T: Real>(a: &AlgebraElement<T>, block: usize) -> T {
    a.block(block)[(0, 0)].re
}

pub fn is_kg_frame<T: Real>(
    f: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<KGFrameReport<T>> {
    check_k(f, k)?;
    let s = f.frame_operator();
    let p = pencil(s, k, tol)?;
    let upper_d = f.optimal_g_bounds(tol).upper;
    let is_k_g_frame = p.degenerate || p.lower_c > T::lit(tol.rank);

    let s_norm = s.uniform_norm();
    let lemma_margin = if p.degenerate || !is_k_g_frame {
        T::zero()
    } else {
        let diff = s.sub(&kk_star(k)?.scale(p.lower_c))?;
        diff.realize()
            .iter()
            .map(|b| linalg::eigh(b).0[0])
            .fold(T::infinity(), |a, b| a.min(b))
            / (T::one() + s_norm)
    };

    let counterexample = match p.leak {
        Some((block, v)) if !is_k_g_frame => {
            let vector = ModuleVector::from_block_row(f.shape(), f.domain_rank(), block, &v);
            let (fs, ks) = evaluate_lower_inequality(f, k, &vector)?;
            Some(KgCounterexample {
                vector,
                block,
                frame_side: corner(&fs, block),
                k_side: corner(&ks, block),
            })
        }
        _ => None,
    };
    Ok(KGFrameReport {
        is_k_g_frame,
        lower_c: p.lower_c,
        upper_d,
        route: KgRoute::Pencil,
        degenerate: p.degenerate,
        range_defect: p.range_defect,
        lemma_margin,
        counterexample,
    })
}

/// `Ran(K) ⊆ Ran(Q)` for the g-operator `Q` relative to `basis`.
pub fn kg_via_range<T: Real>(
    f: &GFrame<T>,
    k: &ModuleOperator<T>,
    basis: &GFrame<T>,
    tol: &Tolerances,
) -> Result<bool> {
    check_k(f, k)?;
    let q = f.g_operator(basis, tol)?;
    Ok(douglas(k, &q, tol)?.range_included)
}

/// Decides `A K K* = S` for some `A > 0`.
pub fn tightness_check<T: Real>(
    f: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<TightnessReport<T>> {
    check_k(f, k)?;
    let s = f.frame_operator();
    let kk = kk_star(k)?;
    let (mut num, mut den) = (T::zero(), T::zero());
    for (x, y) in kk.realize().iter().zip(s.realize()) {
        num += x.dotc(y).re;
        den += x.norm_squared();
    }
    let scale = if den > T::zero() { num / den } else { T::zero() };
    let residual = kk.scale(scale).distance(s)?;
    let s_norm = s.uniform_norm();
    let tight = scale > T::lit(tol.rank) * T::one().max(s_norm)
        && residual <= T::lit(tol.eq) * (T::one() + s_norm);
    let syn = f.synthesis_operator();
    let ranges_equal =
        douglas(k, &syn, tol)?.range_included && douglas(&syn, k, tol)?.range_included;
    Ok(TightnessReport {
        tight,
        scale,
        residual,
        ranges_equal,
    })
}

/// `K = S^{1/2} U` with `U = pinv(S^{1/2}) o K`, or the reason it fails.
pub fn sqrt_factor_check<T: Real>(
    f: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<SqrtFactorization<T>> {
    let report = is_kg_frame(f, k, tol)?;
    let root = f.frame_operator().sqrt_positive(tol);
    if !report.is_k_g_frame {
        let cert = douglas(k, &root, tol)?;
        return Ok(SqrtFactorization::Refused {
            report: Box::new(report),
            douglas: Box::new(cert),
        });
    }
    let u = root.pinv(tol).compose(k)?;
    let residual = root.compose(&u)?.distance(k)?;
    Ok(SqrtFactorization::Factor { u, residual })
}

/// The quotient `[F / T] : T x -> F x` for operators with a common domain.
pub fn quotient_bounded<T: Real>(
    f: &ModuleOperator<T>,
    t: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<QuotientReport<T>> {
    f.shape().ensure_same(t.shape())?;
    if f.domain_rank() != t.domain_rank() {
        return Err(Error::Shape(format!(
            "quotient needs a common domain, got A^{} and A^{}",
            f.domain_rank(),
            t.domain_rank()
        )));
    }
    let cert = douglas(&f.adjoint(), &t.adjoint(), tol)?;
    let beta = cert.alpha_min;
    Ok(QuotientReport {
        well_defined: cert.range_included,
        bounded: cert.range_included && beta.is_some(),
        beta,
    })
}

/// Checks `sum Psi_i = I`, then audits whether `Psi` is a K-g-frame and
/// whether `<x, x> <= sum <Psi_i x, Psi_i x>` holds.
pub fn resolution_check<T: Real>(
    psi: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<ResolutionReport<T>> {
    let d = psi.domain_rank();
    for (index, m) in psi.members().iter().enumerate() {
        if m.codomain_rank() != d {
            return Err(Error::NonSquare {
                index,
                domain: d,
                codomain: m.codomain_rank(),
            });
        }
    }
    let id = ModuleOperator::identity(psi.shape(), d);
    let mut sum = ModuleOperator::zero(psi.shape(), d, d);
    for m in psi.members() {
        sum = sum.add(m)?;
    }
    let resolution_defect = sum.distance(&id)?;
    if resolution_defect > T::lit(tol.herm) * (T::one() + sum.uniform_norm()) {
        return Err(Error::NotResolution {
            defect: resolution_defect.as_f64(),
        });
    }
    let bounds = psi.optimal_g_bounds(tol);
    let report = is_kg_frame(psi, k, tol)?;

    let s = psi.frame_operator();
    let mut worst: Option<(T, usize, CMat<T>)> = None;
    for (b, m) in s.realize().iter().enumerate() {
        let (vals, vecs) = linalg::eigh(m);
        if worst.as_ref().is_none_or(|(v, _, _)| vals[0] < *v) {
            worst = Some((vals[0], b, vecs));
        }
    }
    let (lambda_min, block, vecs) = worst.expect("at least one block");
    let proof_step = if lambda_min < T::one() - T::lit(tol.psd) * (T::one() + s.uniform_norm()) {
        let witness =
            ModuleVector::from_block_row(psi.shape(), d, block, &vecs.column(0).into_owned());
        let lhs = corner(&witness.inner(&witness)?, block);
        let mut rhs = T::zero();
        for m in psi.members() {
            let y = m.apply_via_coeffs(&witness)?;
            rhs += corner(&y.inner(&y)?, block);
        }
        Some(ProofStepFinding {
            witness,
            block,
            lambda_min,
            lhs,
            rhs,
            margin: lhs - rhs,
        })
    } else {
        None
    };
    Ok(ResolutionReport {
        resolution_defect,
        bessel_d: bounds.upper,
        report,
        proof_step,
    })
}
