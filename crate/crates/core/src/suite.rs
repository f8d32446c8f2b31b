//! Randomized theorem suite.
//!
//! Every trial is a pure function of its [`GenSpec`] and the tolerance set,
//! so a failure record can be replayed with [`run_trial`]. Trial seeds come
//! from `(seed, theorem id, trial index)`; scheduling never affects output.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::duality::{
    canonical_k_dual, coisometry_transport, combine_duals, dual_via_g_operators,
    isometry_left_transform, transform_by_q, verify_k_dual, zero_overlap_perturbation,
};
use crate::error::{Error, Result};
use crate::gen::{generate, sub_seed, GaussianStream, GenKind, GenSpec, GENERATOR_NAME};
use crate::gframe::GFrame;
use crate::kgframe::{
    is_kg_frame, kg_via_range, optimal_kg_lower_bound, quotient_bounded, resolution_check,
    sqrt_factor_check, tightness_check, SqrtFactorization,
};
use crate::linalg;
use crate::module::ModuleVector;
use crate::operator::{douglas, bounded_inverse_check, ModuleOperator};
use crate::payload::{vector_payload, VectorPayload};
use crate::scalar::creal;
use crate::tol::Tolerances;

type Op = ModuleOperator<f64>;
type Frame = GFrame<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    SynthesisBounded,
    FrameOperatorDomination,
    GCompleteness,
    GOperator,
    RangeInclusion,
    CoisometryParseval,
    DualFactorization,
    CanonicalDual,
    ZeroOverlap,
    DualCombination,
    OrderChain,
    SqrtFactorization,
    CommutingTransform,
    CoisometryTransform,
    IsometryTransform,
    Tightness,
    Resolution,
    QuotientSqrt,
    QuotientSqrtQ,
    BoundedInverseBounds,
    Douglas,
    DualTransport,
}

impl Theorem {
    pub const ALL: [Theorem; 22] = [
        Theorem::SynthesisBounded,
        Theorem::FrameOperatorDomination,
        Theorem::GCompleteness,
        Theorem::GOperator,
        Theorem::RangeInclusion,
        Theorem::CoisometryParseval,
        Theorem::DualFactorization,
        Theorem::CanonicalDual,
        Theorem::ZeroOverlap,
        Theorem::DualCombination,
        Theorem::OrderChain,
        Theorem::SqrtFactorization,
        Theorem::CommutingTransform,
        Theorem::CoisometryTransform,
        Theorem::IsometryTransform,
        Theorem::Tightness,
        Theorem::Resolution,
        Theorem::QuotientSqrt,
        Theorem::QuotientSqrtQ,
        Theorem::BoundedInverseBounds,
        Theorem::Douglas,
        Theorem::DualTransport,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Theorem::SynthesisBounded => "synthesis_bounded",
            Theorem::FrameOperatorDomination => "frame_operator_domination",
            Theorem::GCompleteness => "g_completeness",
            Theorem::GOperator => "g_operator",
            Theorem::RangeInclusion => "range_inclusion",
            Theorem::CoisometryParseval => "coisometry_parseval",
            Theorem::DualFactorization => "dual_factorization",
            Theorem::CanonicalDual => "canonical_dual",
            Theorem::ZeroOverlap => "zero_overlap",
            Theorem::DualCombination => "dual_combination",
            Theorem::OrderChain => "order_chain",
            Theorem::SqrtFactorization => "sqrt_factorization",
            Theorem::CommutingTransform => "commuting_transform",
            Theorem::CoisometryTransform => "coisometry_transform",
            Theorem::IsometryTransform => "isometry_transform",
            Theorem::Tightness => "tightness",
            Theorem::Resolution => "resolution",
            Theorem::QuotientSqrt => "quotient_sqrt",
            Theorem::QuotientSqrtQ => "quotient_sqrt_q",
            Theorem::BoundedInverseBounds => "bounded_inverse_bounds",
            Theorem::Douglas => "douglas",
            Theorem::DualTransport => "dual_transport",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|t| t.id() == id)
    }

    pub fn description(self) -> &'static str {
        match self {
            Theorem::SynthesisBounded => "synthesis operator is bounded by the upper g-frame bound",
            Theorem::FrameOperatorDomination => "K-g-frame iff C K K* <= S for some C > 0",
            Theorem::GCompleteness => "g-frame iff g-complete iff the synthesis ranges span U",
            Theorem::GOperator => "g-operator recovery, reconstruction and Q Q* = S",
            Theorem::RangeInclusion => "K-g-frame iff Ran(K) in Ran(Q) iff [K*/S^1/2] bounded",
            Theorem::CoisometryParseval => "Q co-isometry iff {G_i K*} is a Parseval K-g-frame",
            Theorem::DualFactorization => "Xi is a K-dual iff K = Q P*",
            Theorem::CanonicalDual => "canonical K-dual through the compressed frame operator",
            Theorem::ZeroOverlap => "V + Xi stays a K-dual iff P Q* = 0",
            Theorem::DualCombination => "combinations Phi T1 + Xi T2 of K-duals",
            Theorem::OrderChain => "C K K* <= S <= D I",
            Theorem::SqrtFactorization => "K-g-frame iff K = S^1/2 U",
            Theorem::CommutingTransform => "bounds of {G_i Q*} for Q commuting with K",
            Theorem::CoisometryTransform => "bounds preserved under a commuting co-isometry",
            Theorem::IsometryTransform => "bounds preserved under a left isometry",
            Theorem::Tightness => "tightness iff A K K* = S, with Ran(K) = Ran(T*)",
            Theorem::Resolution => "resolutions of the identity are K-g-frames (audited)",
            Theorem::QuotientSqrt => "[K*/S^1/2] bounded iff K-g-frame, with 1/beta^2 = C",
            Theorem::QuotientSqrtQ => "[K*/S^1/2 Q] bounded iff {G_i Q} is a K-g-frame",
            Theorem::BoundedInverseBounds => "||F^-1||^-2 <x,x> <= <Fx,Fx> <= ||F||^2 <x,x>",
            Theorem::Douglas => "range inclusion, majorization and factorization agree",
            Theorem::DualTransport => "K-duals transported by a co-isometry",
        }
    }

    /// Audited theorems report findings without counting them as failures.
    pub fn audited(self) -> bool {
        self == Theorem::Resolution
    }

    pub fn supports_fault(self) -> bool {
        matches!(self, Theorem::CanonicalDual | Theorem::DualTransport)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeCaps {
    pub max_block_dim: usize,
    pub max_blocks: usize,
    pub max_rank: usize,
    pub max_index: usize,
}

impl Default for SizeCaps {
    fn default() -> Self {
        SizeCaps {
            max_block_dim: 4,
            max_blocks: 3,
            max_rank: 6,
            max_index: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultInjection {
    pub theorem: String,
    pub trial: usize,
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    /// `None` runs every theorem.
    pub theorems: Option<Vec<String>>,
    pub caps: SizeCaps,
    /// Fixes the algebra instead of sampling it under the caps.
    pub shape: Option<AlgebraShape>,
    pub tol: Tolerances,
    pub fault: Option<FaultInjection>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 50,
            seed: 0,
            theorems: None,
            caps: SizeCaps::default(),
            shape: None,
            tol: Tolerances::default(),
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub spec: GenSpec,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub injected: bool,
    pub message: String,
    pub witness: Option<VectorPayload>,
    pub measured: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFinding {
    pub trial: usize,
    pub spec: GenSpec,
    pub message: String,
    pub witness: VectorPayload,
    pub measured: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem_id: String,
    pub description: String,
    pub audited: bool,
    /// Executed trials; `passes + failures.len() == trials`.
    pub trials: usize,
    pub passes: usize,
    /// Trials whose sampled spec was infeasible.
    pub skipped: usize,
    pub failures: Vec<FailureRecord>,
    pub audit_findings: Vec<AuditFinding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub generator: String,
    pub seed: u64,
    pub trials_per_theorem: usize,
    pub caps: SizeCaps,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<AlgebraShape>,
    pub tolerances: Tolerances,
    pub reports: Vec<TheoremReport>,
}

impl SuiteReport {
    pub fn failure_count(&self) -> usize {
        self.reports.iter().map(|r| r.failures.len()).sum()
    }

    pub fn audit_count(&self) -> usize {
        self.reports.iter().map(|r| r.audit_findings.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub status: TrialStatus,
    pub message: String,
    pub witness: Option<ModuleVector<f64>>,
    pub measured: BTreeMap<String, f64>,
    /// Message and witness of an audit finding, if any.
    pub audit: Option<(String, ModuleVector<f64>)>,
}

#[derive(Default)]
struct Probe {
    measured: BTreeMap<String, f64>,
    problems: Vec<String>,
    witness: Option<ModuleVector<f64>>,
    audit: Option<(String, ModuleVector<f64>)>,
}

impl Probe {
    fn note(&mut self, key: &str, v: f64) {
        self.measured.insert(key.to_string(), v);
    }

    fn flag(&mut self, key: &str, b: bool) {
        self.note(key, if b { 1.0 } else { 0.0 });
    }

    fn at_most(&mut self, key: &str, v: f64, bound: f64) {
        self.note(key, v);
        if !(v <= bound) {
            self.problems.push(format!("{key} = {v:.6e} exceeds {bound:.6e}"));
        }
    }

    fn at_least(&mut self, key: &str, v: f64, bound: f64) {
        self.note(key, v);
        if !(v >= bound) {
            self.problems.push(format!("{key} = {v:.6e} below {bound:.6e}"));
        }
    }

    fn expect(&mut self, what: &str, ok: bool) {
        if !ok {
            self.problems.push(what.to_string());
        }
    }
}

fn extra(spec: &GenSpec) -> GaussianStream {
    GaussianStream::new(spec.seed).fork("extra")
}

fn random_vector(g: &mut GaussianStream, shape: &AlgebraShape, d: usize) -> ModuleVector<f64> {
    let comps = (0..d)
        .map(|_| {
            let blocks = shape.block_dims().iter().map(|&n| g.matrix(n, n)).collect();
            AlgebraElement::from_blocks_unchecked(shape, blocks)
        })
        .collect();
    ModuleVector::new(shape, comps).expect("components share the shape")
}

fn corner(a: &AlgebraElement<f64>, block: usize) -> f64 {
    a.block(block)[(0, 0)].re
}

/// Unit vector supported on one block along which `op` is largest.
fn dominant_row(op: &Op) -> (usize, ModuleVector<f64>) {
    let mut best = (0, -1.0);
    for (b, m) in op.realize().iter().enumerate() {
        let s = linalg::spectral_norm(m);
        if s > best.1 {
            best = (b, s);
        }
    }
    let m = &op.realize()[best.0];
    let (u, _, _) = linalg::svd(m, 0.0);
    let v = if u.ncols() > 0 {
        u.column(0).into_owned()
    } else {
        let mut e = DVector::zeros(m.nrows());
        e[0] = creal(1.0);
        e
    };
    (best.0, ModuleVector::from_block_row(op.shape(), op.domain_rank(), best.0, &v))
}

fn dual_residual(gamma: &Frame, xi: &Frame, k: &Op) -> Result<Op> {
    let mut acc = k.scale(-1.0);
    for (g, x) in gamma.members().iter().zip(xi.members()) {
        acc = acc.add(&g.adjoint().compose(x)?)?;
    }
    Ok(acc)
}

/// Records a witness for a failed duality check and re-evaluates the
/// residual along it through coefficient arithmetic.
fn dual_witness(p: &mut Probe, gamma: &Frame, xi: &Frame, k: &Op) -> Result<()> {
    let r = dual_residual(gamma, xi, k)?;
    let (b, w) = dominant_row(&r);
    let y = r.apply_via_coeffs(&w)?;
    p.note("witness_violation", y.seminorm(b)?);
    p.witness = Some(w);
    Ok(())
}

fn corrupt(spec: &GenSpec, f: &Frame) -> Result<Frame> {
    let mut g = GaussianStream::new(spec.seed).fork("fault");
    let mut members = f.members().to_vec();
    let m0 = &members[0];
    let e: Op = g.operator(m0.shape(), m0.domain_rank(), m0.codomain_rank());
    members[0] = m0.add(&e.scale(1e-2))?;
    GFrame::new(members)
}

fn identity(f: &Frame) -> Op {
    ModuleOperator::identity(f.shape(), f.domain_rank())
}

fn check_synthesis_bounded(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let f = &b.frame;
    let mut g = extra(spec);
    let upper = f.optimal_g_bounds(tol).upper;
    let syn = f.synthesis_operator();
    let n2 = syn.uniform_norm().powi(2);
    p.note("upper_d", upper);
    p.at_most("synthesis_norm_sq_gap", (n2 - upper).abs(), tol.eq * (1.0 + upper));
    let x = random_vector(&mut g, f.shape(), f.total_rank());
    let y = f.synthesis(&x)?;
    let y2 = syn.apply_via_coeffs(&x)?;
    let mut xn = 0.0f64;
    for k in 0..f.shape().num_blocks() {
        xn = xn.max(x.seminorm(k)?);
    }
    let scale = 1.0 + upper.sqrt() * xn;
    p.at_most("synthesis_path_gap", y.max_abs_diff(&y2), 1e-10 * scale);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..f.shape().num_blocks() {
        worst = worst.max(y.seminorm(k)? - upper.sqrt() * x.seminorm(k)?);
    }
    p.at_most("seminorm_excess", worst, tol.eq * scale);
    Ok(())
}

fn check_frame_operator_domination(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let r = is_kg_frame(f, k, tol)?;
    let s = f.frame_operator();
    p.flag("is_k_g_frame", r.is_k_g_frame);
    p.note("lower_c", r.lower_c);
    if r.degenerate {
        return Ok(());
    }
    let kk = k.compose(&k.adjoint())?;
    if r.is_k_g_frame {
        p.expect("S - C K K* is not positive", s.sub(&kk.scale(r.lower_c))?.is_positive(tol));
        let mut g = extra(spec);
        let x = random_vector(&mut g, f.shape(), f.domain_rank());
        let (fs, ks) = crate::kgframe::evaluate_lower_inequality(f, k, &x)?;
        p.expect(
            "sampled lower inequality fails",
            ks.scale(creal(r.lower_c)).leq(&fs, tol)?,
        );
    } else {
        let ce = match &r.counterexample {
            Some(ce) => ce,
            None => {
                p.expect("negative verdict without a counterexample", false);
                return Ok(());
            }
        };
        let thr = tol.eq * (1.0 + k.uniform_norm());
        p.at_most("frame_side", ce.frame_side, tol.psd * (1.0 + s.uniform_norm()));
        p.at_least("k_side_root", ce.k_side.sqrt(), thr * (1.0 - 1e-6));
        p.witness = Some(ce.vector.clone());
    }
    Ok(())
}

fn check_g_completeness(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let f = &b.frame;
    let frame = f.is_g_frame(tol);
    let complete = f.is_g_complete(tol);
    let span = f.synthesis_operator().range_projection(tol).distance(&identity(f))?;
    p.flag("is_g_frame", frame);
    p.flag("is_g_complete", complete);
    p.note("span_defect", span);
    p.expect("g-frame and g-complete verdicts differ", frame == complete);
    p.expect("span verdict differs", complete == (span <= tol.eq));
    Ok(())
}

fn check_g_operator(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let f = &b.frame;
    let q0 = &b.aux["Q0"];
    let basis = f.matching_basis()?;
    let q = f.g_operator(&basis, tol)?;
    p.at_most("q_error", q.distance(q0)?, 1e-10);
    let recon = GFrame::from_g_operator(&basis, &q)?;
    p.at_most("reconstruction", recon.distance(f).unwrap_or(f64::INFINITY), 1e-12);
    p.at_most(
        "qq_star_vs_s",
        q.compose(&q.adjoint())?.distance(f.frame_operator())?,
        1e-10,
    );
    Ok(())
}

fn sqrt_routes(
    k: &Op,
    z: &Op,
    lower_c: f64,
    is_kg: bool,
    degenerate: bool,
    tol: &Tolerances,
    p: &mut Probe,
) -> Result<()> {
    let q = quotient_bounded(&k.adjoint(), z, tol)?;
    p.flag("quotient_bounded", q.bounded);
    p.expect("quotient verdict differs", q.bounded == is_kg);
    if let (true, true, false, Some(beta)) = (q.bounded, is_kg, degenerate, q.beta) {
        let c = 1.0 / (beta * beta);
        p.note("inverse_beta_sq", c);
        p.at_most("beta_rel_gap", (c - lower_c).abs() / lower_c.abs().max(1e-300), 1e-6);
    }
    Ok(())
}

fn check_range_inclusion(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let r = is_kg_frame(f, k, tol)?;
    let basis = f.matching_basis()?;
    let via = kg_via_range(f, k, &basis, tol)?;
    p.flag("is_k_g_frame", r.is_k_g_frame);
    p.flag("range_route", via);
    p.note("lower_c", r.lower_c);
    p.expect("range route verdict differs", via == r.is_k_g_frame);
    let root = f.frame_operator().sqrt_positive(tol);
    sqrt_routes(k, &root, r.lower_c, r.is_k_g_frame, r.degenerate, tol, p)
}

/// Largest `D` with `S <= D K K*` on the range of `K K*`.
fn upper_k_bound(s: &Op, k: &Op, tol: &Tolerances) -> Result<f64> {
    let kk = k.compose(&k.adjoint())?;
    let cut = tol.rank * kk.uniform_norm();
    Ok(s.realize()
        .iter()
        .zip(kk.realize())
        .map(|(x, y)| linalg::majorization(x, y, cut).ratio)
        .fold(0.0, f64::max))
}

fn check_coisometry_parseval(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let basis = f.matching_basis()?;
    let q = f.g_operator(&basis, tol)?;
    let defect = q.compose(&q.adjoint())?.distance(&identity(f))?;
    let coiso = defect <= 1e-10;
    let gk = f.compose_right(&k.adjoint())?;
    let lower = optimal_kg_lower_bound(&gk, k, tol)?;
    let upper = upper_k_bound(gk.frame_operator(), k, tol)?;
    let parseval = (lower - 1.0).abs() <= 1e-8 && (upper - 1.0).abs() <= 1e-8;
    p.note("coisometry_defect", defect);
    p.note("lower", lower);
    p.note("upper", upper);
    p.expect("co-isometry and Parseval verdicts differ", coiso == parseval);
    let t = tightness_check(&gk, k, tol)?;
    p.expect(
        "tightness check disagrees with Parseval bounds",
        parseval == (t.tight && (t.scale - 1.0).abs() <= 1e-8),
    );
    Ok(())
}

fn check_dual_factorization(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let f = &b.frame;
    let q0 = &b.aux["Q0"];
    let basis = f.matching_basis()?;
    let mut g = extra(spec);
    let (shape, d) = (f.shape().clone(), f.domain_rank());
    let p0: Op = g.operator(&shape, d, d);
    let k = q0.compose(&p0.adjoint())?;
    let perturbed = g.coin();
    let pp = if perturbed {
        p0.add(&g.operator::<f64>(&shape, d, d).scale(1e-3))?
    } else {
        p0
    };
    let xi = GFrame::from_g_operator(&basis, &pp)?;
    let via = dual_via_g_operators(f, &xi, &basis, &k, tol)?;
    let cert = verify_k_dual(f, &xi, &k, tol)?;
    p.flag("perturbed", perturbed);
    p.flag("via_g_operators", via);
    p.note("residual", cert.residual);
    p.expect("g-operator criterion and direct check differ", via == cert.is_dual);
    p.expect("forward construction is not a K-dual", perturbed || cert.is_dual);
    Ok(())
}

fn check_canonical_dual(spec: &GenSpec, tol: &Tolerances, fault: bool, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let f = &b.frame;
    let q0 = &b.aux["Q0"];
    let mut g = extra(spec);
    let (shape, d) = (f.shape().clone(), f.domain_rank());
    let r: Op = if g.coin() {
        g.rank_deficient(&shape, d, d)
    } else {
        g.operator(&shape, d, d)
    };
    let k = q0.compose(&r)?;
    let cd = canonical_k_dual(f, &k, tol)?;
    let dual = if fault { corrupt(spec, &cd.dual)? } else { cd.dual.clone() };
    let cert = verify_k_dual(&cd.projected, &dual, &k, tol)?;
    p.at_most("residual", cert.residual, 1e-8);
    p.expect("certificate rejects the constructed dual", cert.is_dual);
    if !cert.is_dual || cert.residual > 1e-8 {
        dual_witness(p, &cd.projected, &dual, &k)?;
    }
    let s = f.frame_operator();
    let invertible = s.sigma_min() > 1e-6 * s.uniform_norm() && k.sigma_min() > 1e-6 * k.uniform_norm();
    p.flag("invertible_case", invertible);
    if invertible && !fault {
        let sk = s.inverse(tol)?.compose(&k)?;
        let expected = f.compose_right(&sk)?;
        p.at_most(
            "reduction_gap",
            expected.distance(&dual).unwrap_or(f64::INFINITY),
            1e-9,
        );
    }
    Ok(())
}

fn check_zero_overlap(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let f = &b.frame;
    let q0 = &b.aux["Q0"];
    let basis = f.matching_basis()?;
    let mut g = extra(spec);
    let (shape, d) = (f.shape().clone(), f.domain_rank());
    let k = f.frame_operator().clone();
    let orth = g.coin();
    let gq: Op = g.operator(&shape, d, d);
    let q = if orth {
        let pi = identity(f).sub(&q0.adjoint().range_projection(tol))?;
        pi.compose(&gq)?.adjoint()
    } else {
        gq
    };
    let xi = GFrame::from_g_operator(&basis, &q)?;
    let rep = zero_overlap_perturbation(f, f, &xi, &basis, &k, tol)?;
    p.flag("orthogonal", orth);
    p.note("overlap", rep.overlap);
    p.note("residual", rep.residual);
    p.expect("duality and zero-overlap verdicts differ", rep.is_dual == rep.overlap_zero);
    p.expect("orthogonal perturbation broke duality", !orth || rep.is_dual);
    Ok(())
}

fn check_dual_combination(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let f = &b.frame;
    let mut g = extra(spec);
    let (shape, d) = (f.shape().clone(), f.domain_rank());
    let k: Op = g.invertible_operator(&shape, d);
    let s = f.frame_operator();
    if s.sigma_min() <= 1e-6 * s.uniform_norm() {
        p.note("singular_frame_operator", 1.0);
        return Ok(());
    }
    let phi = canonical_k_dual(f, &k, tol)?.dual;
    let ms: Vec<Op> = f.codomain_ranks().iter().map(|&c| g.operator(&shape, d, c)).collect();
    let mut acc = ModuleOperator::zero(&shape, d, d);
    for (gam, m) in f.members().iter().zip(&ms) {
        acc = acc.add(&gam.adjoint().compose(m)?)?;
    }
    let corr = s.inverse(tol)?.compose(&acc)?;
    let xi = GFrame::new(
        phi.members()
            .iter()
            .zip(f.members())
            .zip(&ms)
            .map(|((ph, gam), m)| ph.add(m)?.sub(&gam.compose(&corr)?))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let id = identity(f);
    let t1: Op = g.operator(&shape, d, d);
    let (_, random) = combine_duals(f, &phi, &xi, &k, &t1, &id.sub(&t1)?, tol)?;
    p.at_most("random_residual", random.certificate.residual, 1e-8);
    p.expect("T1 + T2 = I combination not dual", random.certificate.is_dual);
    let half = id.scale(0.5);
    let (_, mid) = combine_duals(f, &phi, &xi, &k, &half, &half, tol)?;
    p.at_most("midpoint_residual", mid.certificate.residual, 1e-8);
    p.expect("midpoint combination not dual", mid.certificate.is_dual);

    let g0: Op = g.operator(&shape, d, d);
    let gap = 10f64.powf(-3.0 + 3.0 * g.uniform());
    let t2 = id.sub(&t1)?.add(&g0.scale(gap / g0.uniform_norm()))?;
    let (_, off) = combine_duals(f, &phi, &xi, &k, &t1, &t2, tol)?;
    p.note("gap", off.sum_gap);
    p.at_least("gap_residual", off.certificate.residual, 1e-4);
    p.expect("gapped combination reported dual", !off.certificate.is_dual);
    Ok(())
}

fn check_order_chain(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let r = is_kg_frame(f, k, tol)?;
    let s = f.frame_operator();
    p.note("lower_c", r.lower_c);
    p.note("upper_d", r.upper_d);
    p.expect("S <= D I fails", identity(f).scale(r.upper_d).sub(s)?.is_positive(tol));
    if r.is_k_g_frame && !r.degenerate {
        let kk = k.compose(&k.adjoint())?;
        p.note("lemma_margin", r.lemma_margin);
        p.expect("C K K* <= S fails", s.sub(&kk.scale(r.lower_c))?.is_positive(tol));
    }
    Ok(())
}

fn check_sqrt_factorization(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let r = is_kg_frame(f, k, tol)?;
    p.flag("is_k_g_frame", r.is_k_g_frame);
    match sqrt_factor_check(f, k, tol)? {
        SqrtFactorization::Factor { u, residual } => {
            p.expect("factor produced for a non-K-g-frame", r.is_k_g_frame);
            let bound = tol.eq * (1.0 + k.uniform_norm());
            p.at_most("residual", residual, bound);
            let root = f.frame_operator().sqrt_positive(tol);
            p.at_most("residual_recheck", root.compose(&u)?.distance(k)?, bound);
        }
        SqrtFactorization::Refused { douglas, .. } => {
            p.expect("factor refused for a K-g-frame", !r.is_k_g_frame);
            p.expect("refusal without a range obstruction", !douglas.range_included);
        }
    }
    Ok(())
}

fn check_commuting_transform(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let q = &b.aux["Q"];
    let t = transform_by_q(f, k, q, tol)?;
    p.at_most("s_residual", t.s_residual, 1e-10);
    p.note("predicted_lower", t.predicted_lower);
    p.note("predicted_upper", t.predicted_upper);
    p.at_least("measured_lower", t.measured_lower, t.predicted_lower - 1e-8);
    p.at_most("measured_upper", t.measured_upper, t.predicted_upper + 1e-8);
    p.expect("outside the predicted envelope", t.within_envelope);
    Ok(())
}

fn check_coisometry_transform(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let f = &b.frame;
    let (u, ku) = (&b.aux["U"], &b.aux["KU"]);
    let before = is_kg_frame(f, ku, tol)?;
    let t = transform_by_q(f, ku, u, tol)?;
    p.note("lower_before", before.lower_c);
    p.expect("outside the predicted envelope", t.within_envelope);
    let c = before.lower_c;
    p.at_most("lower_shift", (t.measured_lower - c).abs(), 1e-8 * (1.0 + c));
    p.at_most("upper_shift", (t.measured_upper - before.upper_d).abs(), 1e-8 * (1.0 + before.upper_d));
    Ok(())
}

fn check_isometry_transform(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let t = isometry_left_transform(f, k, &b.aux["W"], tol)?;
    let (c0, d0) = t.before;
    let (c1, d1) = t.after;
    p.at_most("lower_shift", (c1 - c0).abs(), 1e-8 * (1.0 + c0));
    p.at_most("upper_shift", (d1 - d0).abs(), 1e-8 * (1.0 + d0));
    Ok(())
}

fn check_tightness(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let t = tightness_check(f, k, tol)?;
    p.flag("tight", t.tight);
    p.note("scale", t.scale);
    p.note("residual", t.residual);
    match spec.kind {
        GenKind::Tight { scale } => {
            p.expect("tight instance reported not tight", t.tight);
            p.at_most("scale_error", (t.scale - scale).abs(), 1e-8);
            p.expect("Ran(K) and Ran(T*) differ", t.ranges_equal);
        }
        _ => p.expect("generic instance reported tight", !t.tight),
    }
    Ok(())
}

fn check_resolution(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let r = resolution_check(f, k, tol)?;
    p.note("resolution_defect", r.resolution_defect);
    p.flag("is_k_g_frame", r.report.is_k_g_frame);
    p.note("lower_c", r.report.lower_c);
    if r.report.is_k_g_frame {
        if !r.report.degenerate {
            let kk = k.compose(&k.adjoint())?;
            p.expect(
                "confirmed verdict but C K K* <= S fails",
                f.frame_operator().sub(&kk.scale(r.report.lower_c))?.is_positive(tol),
            );
        }
    } else if let Some(ce) = &r.report.counterexample {
        let (fs, ks) = realized_sides(f, k, &ce.vector, ce.block)?;
        p.at_most("counterexample_frame_recheck", (fs - ce.frame_side).abs(), 1e-10);
        p.at_most("counterexample_k_recheck", (ks - ce.k_side).abs(), 1e-10);
        p.witness = Some(ce.vector.clone());
    } else {
        p.expect("negative verdict without a certificate", false);
    }
    if let Some(step) = &r.proof_step {
        let s_norm = f.frame_operator().uniform_norm();
        let x = &step.witness;
        let lhs = corner(&x.inner(x)?, step.block);
        let mut rhs = 0.0;
        for m in f.members() {
            let y = m.apply(x)?;
            rhs += corner(&y.inner(&y)?, step.block);
        }
        p.note("lambda_min", step.lambda_min);
        p.note("audit_margin", step.margin);
        p.at_most("audit_lhs_recheck", (lhs - step.lhs).abs(), 1e-10);
        p.at_most("audit_rhs_recheck", (rhs - step.rhs).abs(), 1e-10);
        p.at_most(
            "audit_margin_vs_spectrum",
            (step.margin - (1.0 - step.lambda_min)).abs(),
            1e-10 * (1.0 + s_norm),
        );
        p.audit = Some((
            format!(
                "<x,x> <= sum <Psi_i x, Psi_i x> fails by {:.6e} on block {} (lambda_min(S) = {:.6e})",
                step.margin, step.block, step.lambda_min
            ),
            x.clone(),
        ));
    }
    Ok(())
}

/// Both sides of the lower inequality at `x`, evaluated through the
/// realizations rather than coefficient arithmetic.
fn realized_sides(f: &Frame, k: &Op, x: &ModuleVector<f64>, block: usize) -> Result<(f64, f64)> {
    let mut fs = 0.0;
    for m in f.members() {
        let y = m.apply(x)?;
        fs += corner(&y.inner(&y)?, block);
    }
    let y = k.adjoint().apply(x)?;
    Ok((fs, corner(&y.inner(&y)?, block)))
}

fn check_quotient_sqrt(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let r = is_kg_frame(f, k, tol)?;
    p.flag("is_k_g_frame", r.is_k_g_frame);
    p.note("lower_c", r.lower_c);
    let root = f.frame_operator().sqrt_positive(tol);
    sqrt_routes(k, &root, r.lower_c, r.is_k_g_frame, r.degenerate, tol, p)
}

fn check_quotient_sqrt_q(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k) = (&b.frame, &b.k);
    let mut g = extra(spec);
    let (shape, d) = (f.shape().clone(), f.domain_rank());
    let q: Op = if g.coin() {
        g.rank_deficient(&shape, d, d)
    } else {
        g.operator(&shape, d, d)
    };
    let fq = f.compose_right(&q)?;
    let r = is_kg_frame(&fq, k, tol)?;
    p.flag("is_k_g_frame", r.is_k_g_frame);
    p.note("lower_c", r.lower_c);
    let z = f.frame_operator().sqrt_positive(tol).compose(&q)?;
    sqrt_routes(k, &z, r.lower_c, r.is_k_g_frame, r.degenerate, tol, p)
}

fn check_bounded_inverse(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let mut g = extra(spec);
    let (shape, d) = (&spec.shape, spec.module_rank);
    let f: Op = if g.coin() {
        g.invertible_operator(shape, d)
    } else {
        g.operator(shape, d, d)
    };
    let eta = random_vector(&mut g, shape, d);
    p.note("sigma_min", f.sigma_min());
    if f.sigma_min() <= f.rank_cutoff(tol) {
        let refused = matches!(bounded_inverse_check(&f, &eta, tol), Err(Error::NotInvertible { .. }));
        p.expect("singular operator not refused", refused);
    } else {
        p.expect("two-sided bound fails", bounded_inverse_check(&f, &eta, tol)?);
    }
    Ok(())
}

fn check_douglas(spec: &GenSpec, tol: &Tolerances, p: &mut Probe) -> Result<()> {
    let mut g = extra(spec);
    let (shape, c) = (&spec.shape, spec.module_rank);
    let a = spec.codomain_ranks[0];
    let bd = *spec.codomain_ranks.get(1).unwrap_or(&a);
    let z: Op = if g.coin() {
        g.rank_deficient(shape, bd, c)
    } else {
        g.operator(shape, bd, c)
    };
    let constructed = g.coin();
    let t: Op = if constructed {
        z.compose(&g.operator(shape, a, bd))?
    } else {
        g.operator(shape, a, c)
    };
    let cert = douglas(&t, &z, tol)?;
    p.flag("range_included", cert.range_included);
    p.note("range_defect", cert.conditions.range_defect);
    p.note("majorization_defect", cert.conditions.majorization_defect);
    p.expect("Douglas conditions disagree", cert.conditions.agree());
    p.expect("T = Z U but inclusion rejected", !constructed || cert.range_included);
    if cert.range_included {
        p.at_most("factor_residual", cert.residual, 1e-8);
        match (&cert.factor, cert.alpha_min) {
            (Some(u), Some(alpha)) => {
                p.note("alpha_min", alpha);
                p.at_most("factor_norm", u.uniform_norm(), alpha + 1e-6);
            }
            _ => p.expect("inclusion without factor and alpha", false),
        }
    }
    Ok(())
}

fn check_dual_transport(spec: &GenSpec, tol: &Tolerances, fault: bool, p: &mut Probe) -> Result<()> {
    let b = generate::<f64>(spec)?;
    let (f, k, w) = (&b.frame, &b.k, &b.aux["W"]);
    let phi = canonical_k_dual(f, k, tol)?.dual;
    let phi = if fault { corrupt(spec, &phi)? } else { phi };
    let base = verify_k_dual(f, &phi, k, tol)?;
    p.note("base_residual", base.residual);
    if !base.is_dual {
        p.expect("base pair is not a K-dual", false);
        return dual_witness(p, f, &phi, k);
    }
    let t = coisometry_transport(f, &phi, k, w, tol)?;
    let wn = w.uniform_norm();
    p.expect("transported pair is not a K-dual", t.is_dual);
    p.at_most(
        "transport_residual",
        t.residual,
        base.residual * wn * wn + tol.eq * (1.0 + k.uniform_norm()),
    );
    Ok(())
}

/// Runs one trial. Infeasible specs are skipped; any other error fails.
pub fn run_trial(theorem: Theorem, spec: &GenSpec, tol: &Tolerances, fault: bool) -> TrialOutcome {
    let mut p = Probe::default();
    let res = match theorem {
        Theorem::SynthesisBounded => check_synthesis_bounded(spec, tol, &mut p),
        Theorem::FrameOperatorDomination => check_frame_operator_domination(spec, tol, &mut p),
        Theorem::GCompleteness => check_g_completeness(spec, tol, &mut p),
        Theorem::GOperator => check_g_operator(spec, tol, &mut p),
        Theorem::RangeInclusion => check_range_inclusion(spec, tol, &mut p),
        Theorem::CoisometryParseval => check_coisometry_parseval(spec, tol, &mut p),
        Theorem::DualFactorization => check_dual_factorization(spec, tol, &mut p),
        Theorem::CanonicalDual => check_canonical_dual(spec, tol, fault, &mut p),
        Theorem::ZeroOverlap => check_zero_overlap(spec, tol, &mut p),
        Theorem::DualCombination => check_dual_combination(spec, tol, &mut p),
        Theorem::OrderChain => check_order_chain(spec, tol, &mut p),
        Theorem::SqrtFactorization => check_sqrt_factorization(spec, tol, &mut p),
        Theorem::CommutingTransform => check_commuting_transform(spec, tol, &mut p),
        Theorem::CoisometryTransform => check_coisometry_transform(spec, tol, &mut p),
        Theorem::IsometryTransform => check_isometry_transform(spec, tol, &mut p),
        Theorem::Tightness => check_tightness(spec, tol, &mut p),
        Theorem::Resolution => check_resolution(spec, tol, &mut p),
        Theorem::QuotientSqrt => check_quotient_sqrt(spec, tol, &mut p),
        Theorem::QuotientSqrtQ => check_quotient_sqrt_q(spec, tol, &mut p),
        Theorem::BoundedInverseBounds => check_bounded_inverse(spec, tol, &mut p),
        Theorem::Douglas => check_douglas(spec, tol, &mut p),
        Theorem::DualTransport => check_dual_transport(spec, tol, fault, &mut p),
    };
    let (status, message) = match res {
        Err(Error::Infeasible(m)) => (TrialStatus::Skipped, m),
        Err(e) => (TrialStatus::Failed, format!("unexpected error: {e}")),
        Ok(()) if p.problems.is_empty() => (TrialStatus::Passed, String::new()),
        Ok(()) => (TrialStatus::Failed, p.problems.join("; ")),
    };
    TrialOutcome {
        status,
        message,
        witness: if status == TrialStatus::Failed { p.witness } else { None },
        measured: p.measured,
        audit: p.audit,
    }
}

fn ranks_up_to(g: &mut GaussianStream, caps: &SizeCaps) -> Vec<usize> {
    let m = g.range(1, caps.max_index);
    let cmax = caps.max_rank.min(3);
    (0..m).map(|_| g.range(1, cmax)).collect()
}

fn frame_ranks(g: &mut GaussianStream, caps: &SizeCaps, d: usize) -> Vec<usize> {
    let mut r = ranks_up_to(g, caps);
    let mut j = 0;
    while r.iter().sum::<usize>() < d {
        let i = j % r.len();
        if r[i] < caps.max_rank {
            r[i] += 1;
        }
        j += 1;
    }
    r
}

fn partition(g: &mut GaussianStream, caps: &SizeCaps, d: usize) -> Vec<usize> {
    let m = g.range(1, d.min(caps.max_index));
    let mut r = vec![1; m];
    for _ in m..d {
        let i = g.range(0, m - 1);
        r[i] += 1;
    }
    r
}

fn equal_partition(g: &mut GaussianStream, caps: &SizeCaps, d: usize) -> Vec<usize> {
    let divisors: Vec<usize> = (1..=d).filter(|c| d.is_multiple_of(*c) && d / c <= caps.max_index).collect();
    let c = divisors[g.range(0, divisors.len() - 1)];
    vec![c; d / c]
}

/// Deterministic instance spec for `(seed, theorem, trial)`.
pub fn sample_spec(
    theorem: Theorem,
    seed: u64,
    trial: usize,
    caps: &SizeCaps,
    shape: Option<&AlgebraShape>,
) -> GenSpec {
    let s = sub_seed(seed, theorem.id(), trial as u64);
    let mut g = GaussianStream::new(s).fork("spec");
    let shape = match shape {
        Some(sh) => sh.clone(),
        None => {
            let m = g.range(1, caps.max_blocks);
            let dims: Vec<usize> = (0..m).map(|_| g.range(1, caps.max_block_dim)).collect();
            AlgebraShape::new(&dims).expect("positive block dims")
        }
    };
    let mut d = g.range(1, caps.max_rank);
    use Theorem as T;
    let (ranks, kind) = match theorem {
        T::SynthesisBounded | T::BoundedInverseBounds | T::Douglas | T::CommutingTransform => {
            let kind = if theorem == T::CommutingTransform {
                GenKind::CommutingPair
            } else {
                GenKind::Generic
            };
            (ranks_up_to(&mut g, caps), kind)
        }
        T::GCompleteness => {
            if g.coin() {
                (ranks_up_to(&mut g, caps), GenKind::Generic)
            } else {
                (partition(&mut g, caps, d), GenKind::RankDeficientK)
            }
        }
        T::FrameOperatorDomination
        | T::GOperator
        | T::RangeInclusion
        | T::DualFactorization
        | T::CanonicalDual
        | T::ZeroOverlap
        | T::OrderChain
        | T::SqrtFactorization
        | T::QuotientSqrt
        | T::QuotientSqrtQ => (partition(&mut g, caps, d), GenKind::RankDeficientK),
        T::CoisometryParseval | T::CoisometryTransform | T::DualTransport => {
            (equal_partition(&mut g, caps, d), GenKind::Coisometry)
        }
        T::DualCombination => (frame_ranks(&mut g, caps, d), GenKind::Generic),
        T::IsometryTransform => {
            let m = g.range(1, caps.max_index);
            let c = g.range(1, caps.max_rank.min(3));
            (vec![c; m], GenKind::Isometry)
        }
        T::Tightness => {
            if trial.is_multiple_of(2) {
                let scale = [0.25, 1.0, 4.0][(trial / 2) % 3];
                (frame_ranks(&mut g, caps, d), GenKind::Tight { scale })
            } else {
                d = d.max(2.min(caps.max_rank));
                (frame_ranks(&mut g, caps, d), GenKind::Generic)
            }
        }
        T::Resolution => {
            let m = g.range(2.min(caps.max_index), caps.max_index);
            (vec![d; m], GenKind::Resolution)
        }
    };
    GenSpec {
        seed: s,
        shape,
        module_rank: d,
        index_count: ranks.len(),
        codomain_ranks: ranks,
        kind,
    }
}

fn selected(config: &SuiteConfig) -> Result<Vec<Theorem>> {
    let caps = &config.caps;
    if caps.max_block_dim == 0 || caps.max_blocks == 0 || caps.max_rank == 0 || caps.max_index == 0 {
        return Err(Error::Config(format!("size caps must be positive, got {caps:?}")));
    }
    let list = match &config.theorems {
        None => Theorem::ALL.to_vec(),
        Some(ids) => ids
            .iter()
            .map(|id| {
                Theorem::from_id(id).ok_or_else(|| Error::Config(format!("unknown theorem id `{id}`")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    if let Some(fault) = &config.fault {
        match Theorem::from_id(&fault.theorem) {
            Some(t) if t.supports_fault() => {}
            _ => {
                return Err(Error::Config(format!(
                    "fault injection is not available for `{}`",
                    fault.theorem
                )))
            }
        }
    }
    Ok(list)
}

pub fn run_theorem_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let theorems = selected(config)?;
    let jobs: Vec<(usize, usize)> = (0..theorems.len())
        .flat_map(|t| (0..config.trials).map(move |i| (t, i)))
        .collect();
    let outcomes: Vec<(GenSpec, bool, TrialOutcome)> = jobs
        .par_iter()
        .map(|&(t, i)| {
            let th = theorems[t];
            let spec = sample_spec(th, config.seed, i, &config.caps, config.shape.as_ref());
            let fault = config
                .fault
                .as_ref()
                .is_some_and(|f| f.theorem == th.id() && f.trial == i);
            let out = run_trial(th, &spec, &config.tol, fault);
            (spec, fault, out)
        })
        .collect();

    let mut reports: Vec<TheoremReport> = theorems
        .iter()
        .map(|th| TheoremReport {
            theorem_id: th.id().to_string(),
            description: th.description().to_string(),
            audited: th.audited(),
            trials: 0,
            passes: 0,
            skipped: 0,
            failures: Vec::new(),
            audit_findings: Vec::new(),
        })
        .collect();
    for (&(t, trial), (spec, injected, out)) in jobs.iter().zip(outcomes) {
        let rep = &mut reports[t];
        if let Some((message, w)) = &out.audit {
            rep.audit_findings.push(AuditFinding {
                trial,
                spec: spec.clone(),
                message: message.clone(),
                witness: vector_payload(w),
                measured: out.measured.clone(),
            });
        }
        match out.status {
            TrialStatus::Skipped => rep.skipped += 1,
            TrialStatus::Passed => {
                rep.trials += 1;
                rep.passes += 1;
            }
            TrialStatus::Failed => {
                rep.trials += 1;
                rep.failures.push(FailureRecord {
                    trial,
                    spec,
                    injected,
                    message: out.message,
                    witness: out.witness.as_ref().map(vector_payload),
                    measured: out.measured,
                });
            }
        }
    }
    Ok(SuiteReport {
        generator: GENERATOR_NAME.to_string(),
        seed: config.seed,
        trials_per_theorem: config.trials,
        caps: config.caps,
        shape: config.shape.clone(),
        tolerances: config.tol,
        reports,
    })
}

/// Re-runs a recorded failure of `theorem`.
pub fn replay(theorem: Theorem, record: &FailureRecord, tol: &Tolerances) -> TrialOutcome {
    run_trial(theorem, &record.spec, tol, record.injected)
}
