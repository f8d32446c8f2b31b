//! Library side of the `kgframe` command: instance documents, report
//! documents and the three commands.

pub mod document;

use std::collections::BTreeMap;
use std::time::Instant;

use kgframe::payload::{vector_payload, VectorPayload};
use kgframe::{
    canonical_k_dual, is_kg_frame, run_theorem_suite, tightness_check, verify_k_dual, Error,
    FaultInjection, KGFrameReport, ModuleOperator, SizeCaps, SuiteConfig, SuiteReport, Tolerances,
};
use serde::Serialize;

use document::{CertificateDocument, Instance, InstanceDocument, FORMAT_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PREDICATE: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: ToolInfo = ToolInfo {
    name: "kgframe",
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Debug, Clone, Serialize)]
pub struct GFrameSummary {
    pub is_g_frame: bool,
    pub lower: f64,
    pub upper: f64,
    pub tight: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleDocument {
    pub block: usize,
    pub frame_side: f64,
    pub k_side: f64,
    pub vector: VectorPayload,
}

#[derive(Debug, Clone, Serialize)]
pub struct KgSummary {
    pub is_k_g_frame: bool,
    /// `null` when `K = 0`.
    pub lower_c: f64,
    pub upper_d: f64,
    pub degenerate: bool,
    pub range_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleDocument>,
}

impl From<&KGFrameReport<f64>> for KgSummary {
    fn from(r: &KGFrameReport<f64>) -> Self {
        KgSummary {
            is_k_g_frame: r.is_k_g_frame,
            lower_c: r.lower_c,
            upper_d: r.upper_d,
            degenerate: r.degenerate,
            range_defect: r.range_defect,
            counterexample: r.counterexample.as_ref().map(|c| CounterexampleDocument {
                block: c.block,
                frame_side: c.frame_side,
                k_side: c.k_side,
                vector: vector_payload(&c.vector),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TightnessSummary {
    pub tight: bool,
    pub scale: f64,
    pub residual: f64,
    pub ranges_equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualSummary {
    pub is_dual: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub version: &'static str,
    pub tool: ToolInfo,
    pub tolerances: Tolerances,
    pub g_frame: GFrameSummary,
    pub g_complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_g_frame: Option<KgSummary>,
    /// Against `K`, or the identity when no `K` is given.
    pub tightness: TightnessSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualSummary>,
    pub predicate: String,
    pub holds: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Refusal {
    pub version: &'static str,
    pub tool: ToolInfo,
    pub refused: bool,
    pub reason: String,
    pub k_g_frame: KgSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyDocument {
    pub version: &'static str,
    pub tool: ToolInfo,
    pub suite: SuiteReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

fn gap_warning(name: &str, op: &ModuleOperator<f64>, tol: &Tolerances) -> Option<String> {
    match op.closed_range_gap(tol) {
        Some(g) if g < 1e3 => Some(format!(
            "{name} has singular values within a factor {g:.3e} of the rank cutoff; the verdict may change with --tol-rank"
        )),
        _ => None,
    }
}

pub fn check(inst: &Instance, require_tight: bool, tol: &Tolerances) -> Result<(CheckReport, i32), Error> {
    let f = &inst.frame;
    let bounds = f.optimal_g_bounds(tol);
    let identity = ModuleOperator::identity(f.shape(), f.domain_rank());
    let k = inst.k();
    let kg = k.map(|k| is_kg_frame(f, k, tol)).transpose()?;
    let t = tightness_check(f, k.unwrap_or(&identity), tol)?;
    let dual = match &inst.dual {
        Some(xi) => {
            let c = verify_k_dual(f, xi, k.unwrap_or(&identity), tol)?;
            Some(DualSummary {
                is_dual: c.is_dual,
                residual: c.residual,
            })
        }
        None => None,
    };

    let mut predicate = vec![if kg.is_some() { "k_g_frame" } else { "g_frame" }];
    let mut holds = kg.as_ref().map_or(bounds.lower > 0.0, |r| r.is_k_g_frame);
    if require_tight {
        predicate.push("tight");
        holds &= t.tight;
    }
    if let Some(ds) = &dual {
        predicate.push("dual");
        holds &= ds.is_dual;
    }

    let mut warnings = Vec::new();
    warnings.extend(gap_warning("S", f.frame_operator(), tol));
    if let Some(k) = k {
        warnings.extend(gap_warning("K", k, tol));
    }

    let report = CheckReport {
        version: FORMAT_VERSION,
        tool: TOOL,
        tolerances: *tol,
        g_frame: GFrameSummary {
            is_g_frame: f.is_g_frame(tol),
            lower: bounds.lower,
            upper: bounds.upper,
            tight: bounds.tight,
        },
        g_complete: f.is_g_complete(tol),
        k_g_frame: kg.as_ref().map(KgSummary::from),
        tightness: TightnessSummary {
            tight: t.tight,
            scale: t.scale,
            residual: t.residual,
            ranges_equal: t.ranges_equal,
        },
        dual,
        predicate: predicate.join("+"),
        holds,
        warnings,
    };
    let code = if holds { EXIT_OK } else { EXIT_PREDICATE };
    Ok((report, code))
}

pub enum DualOutcome {
    Constructed(InstanceDocument),
    Refused(Refusal),
}

/// Canonical K-dual of the instance; the emitted document carries the
/// frame the dual is certified against.
pub fn dual(inst: &Instance, tol: &Tolerances) -> Result<DualOutcome, Error> {
    let k = inst
        .k()
        .ok_or_else(|| Error::Shape("operators.K: required to build a K-dual".into()))?;
    let report = is_kg_frame(&inst.frame, k, tol)?;
    if !report.is_k_g_frame {
        return Ok(DualOutcome::Refused(Refusal {
            version: FORMAT_VERSION,
            tool: TOOL,
            refused: true,
            reason: format!("not a K-g-frame (optimal lower bound {:e})", report.lower_c),
            k_g_frame: KgSummary::from(&report),
        }));
    }
    let cd = canonical_k_dual(&inst.frame, k, tol)?;
    let mut ops = BTreeMap::new();
    ops.insert("K".to_string(), k.clone());
    let cert = CertificateDocument {
        residual: cd.certificate.residual,
        is_dual: cd.certificate.is_dual,
        construction: cd.certificate.construction,
        conditioning_warning: cd.conditioning_warning,
    };
    Ok(DualOutcome::Constructed(InstanceDocument::encode(
        &cd.projected,
        &ops,
        Some(&cd.dual),
        Some(cert),
    )))
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    pub theorems: Option<Vec<String>>,
    pub caps: SizeCaps,
    pub tol: Tolerances,
    pub fault: Option<FaultInjection>,
    pub timing: bool,
}

/// 0 when clean, 2 on failures outside audited theorems, 3 when only
/// audited theorems report anything.
pub fn verify_exit_code(report: &SuiteReport) -> i32 {
    let hard = report
        .reports
        .iter()
        .any(|r| !r.audited && !r.failures.is_empty());
    let audit = report
        .reports
        .iter()
        .any(|r| r.audited && (!r.failures.is_empty() || !r.audit_findings.is_empty()));
    if hard {
        EXIT_PREDICATE
    } else if audit {
        EXIT_AUDIT
    } else {
        EXIT_OK
    }
}

pub fn verify(opts: &VerifyOptions) -> Result<(VerifyDocument, i32, f64), Error> {
    let cfg = SuiteConfig {
        trials: opts.trials,
        seed: opts.seed,
        theorems: opts.theorems.clone(),
        caps: opts.caps,
        shape: None,
        tol: opts.tol,
        fault: opts.fault.clone(),
    };
    let start = Instant::now();
    let suite = run_theorem_suite(&cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let code = verify_exit_code(&suite);
    let doc = VerifyDocument {
        version: FORMAT_VERSION,
        tool: TOOL,
        suite,
        wall_time_s: opts.timing.then_some(elapsed),
    };
    Ok((doc, code, elapsed))
}
