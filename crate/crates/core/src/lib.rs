pub mod algebra;
pub mod duality;
pub mod error;
pub mod gen;
pub mod gframe;
pub mod kgframe;
mod linalg;
pub mod module;
pub mod operator;
pub mod payload;
mod scalar;
pub mod suite;
pub mod tol;

pub use algebra::{AlgebraElement, AlgebraShape, PositivityVerdict};
pub use error::{Error, Result};
pub use gframe::{BasisDiagnostic, FrameBounds, GFrame};
pub use module::ModuleVector;
pub use operator::{douglas, bounded_inverse_check, DouglasCertificate, DouglasConditions, ModuleOperator};
pub use scalar::{CMat, Cx, Real};
pub use tol::Tolerances;
pub use kgframe::{
    evaluate_lower_inequality, is_kg_frame, kg_via_range, optimal_kg_lower_bound,
    quotient_bounded, resolution_check, sqrt_factor_check, tightness_check, KGFrameReport,
    KgCounterexample, KgRoute, ProofStepFinding, QuotientReport, ResolutionReport,
    SqrtFactorization, TightnessReport,
};
pub use duality::{
    canonical_k_dual, coisometry_transport, combine_duals, dual_via_g_operators,
    isometry_left_transform, transform_by_q, verify_k_dual, zero_overlap_perturbation,
    CanonicalDual, CombinationReport, DualCertificate, DualConstruction, IsometryTransform,
    QTransform, ZeroOverlapReport,
};
pub use gen::{generate, GaussianStream, GenKind, GenSpec, InstanceBundle, GENERATOR_NAME};
pub use suite::{
    replay, run_theorem_suite, run_trial, sample_spec, AuditFinding, FailureRecord,
    FaultInjection, SizeCaps, SuiteConfig, SuiteReport, Theorem, TheoremReport, TrialOutcome,
    TrialStatus,
};

pub type Element64 = AlgebraElement<f64>;
pub type Vector64 = ModuleVector<f64>;
pub type Operator64 = ModuleOperator<f64>;
pub type Frame64 = GFrame<f64>;
pub type Element32 = AlgebraElement<f32>;
pub type Vector32 = ModuleVector<f32>;
pub type Operator32 = ModuleOperator<f32>;
pub type Frame32 = GFrame<f32>;
