//! K-dual g-frame sequences: verification, the canonical construction, the
//! g-operator criterion, transports and combinations.

use crate::error::{Error, Result};
use crate::gframe::GFrame;
use crate::kgframe::{is_kg_frame, optimal_kg_lower_bound, KGFrameReport};
use crate::linalg;
use crate::operator::ModuleOperator;
use crate::scalar::{CMat, Real};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualConstruction {
    Given,
    Canonical,
    Combined,
    Transported,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCertificate<T: Real> {
    /// `||sum G_i* Xi_i - K||_inf`.
    pub residual: T,
    pub is_dual: bool,
    pub construction: DualConstruction,
}

#[derive(Debug, Clone)]
pub struct CanonicalDual<T: Real> {
    pub dual: GFrame<T>,
    /// `{G_i o pi_K}`, the family `dual` is certified against.
    pub projected: GFrame<T>,
    pub certificate: DualCertificate<T>,
    /// Smallest retained singular value of the compression when it is
    /// below `1e3 * tau_rank` (relative).
    pub conditioning_warning: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinationReport<T: Real> {
    pub certificate: DualCertificate<T>,
    /// `||T1 + T2 - I||_inf`.
    pub sum_gap: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroOverlapReport<T: Real> {
    pub is_dual: bool,
    pub residual: T,
    /// `||P o Q*||_inf` for the g-operators `P` of the frame and `Q` of the
    /// perturbation.
    pub overlap: T,
    pub overlap_zero: bool,
}

#[derive(Debug, Clone)]
pub struct QTransform<T: Real> {
    pub frame: GFrame<T>,
    /// `||S_new - Q o S o Q*||_inf`.
    pub s_residual: T,
    pub predicted_lower: T,
    pub predicted_upper: T,
    /// Optimal K-g bounds of the new frame on `Ran(Q)`.
    pub measured_lower: T,
    pub measured_upper: T,
    pub within_envelope: bool,
}

#[derive(Debug, Clone)]
pub struct IsometryTransform<T: Real> {
    pub frame: GFrame<T>,
    pub before: (T, T),
    pub after: (T, T),
}

fn dual_threshold<T: Real>(k: &ModuleOperator<T>, tol: &Tolerances) -> T {
    T::lit(tol.eq) * (T::one() + k.uniform_norm())
}

/// Residual of `sum G_i* Xi_i = K`, evaluated on realizations.
pub fn verify_k_dual<T: Real>(
    gamma: &GFrame<T>,
    xi: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<DualCertificate<T>> {
    certify(gamma, xi, k, tol, DualConstruction::Given)
}

fn certify<T: Real>(
    gamma: &GFrame<T>,
    xi: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
    construction: DualConstruction,
) -> Result<DualCertificate<T>> {
    gamma.shape().ensure_same(xi.shape())?;
    if gamma.codomain_ranks() != xi.codomain_ranks() || gamma.domain_rank() != xi.domain_rank() {
        return Err(Error::Shape(format!(
            "dual pair index structures differ: {:?} on A^{} vs {:?} on A^{}",
            gamma.codomain_ranks(),
            gamma.domain_rank(),
            xi.codomain_ranks(),
            xi.domain_rank()
        )));
    }
    if k.domain_rank() != gamma.domain_rank() || k.codomain_rank() != gamma.domain_rank() {
        return Err(Error::Shape("K must act on the frame domain".into()));
    }
    let blocks: Vec<CMat<T>> = (0..gamma.shape().num_blocks())
        .map(|b| {
            let mut acc = -k.realize()[b].clone();
            for (g, x) in gamma.members().iter().zip(xi.members()) {
                acc += &x.realize()[b] * g.realize()[b].adjoint();
            }
            acc
        })
        .collect();
    let residual = blocks
        .iter()
        .map(linalg::spectral_norm)
        .fold(T::zero(), |a, b| a.max(b));
    Ok(DualCertificate {
        residual,
        is_dual: residual <= dual_threshold(k, tol),
        construction,
    })
}

/// `Xi_i = G_i o pi_{S(Ran K)} o (S o pi_K)^dag* o K`, certified against
/// the projected family `{G_i o pi_K}`.
pub fn canonical_k_dual<T: Real>(
    gamma: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<CanonicalDual<T>> {
    let report: KGFrameReport<T> = is_kg_frame(gamma, k, tol)?;
    if !report.is_k_g_frame {
        return Err(Error::NotKgFrame {
            lower_c: report.lower_c.as_f64(),
        });
    }
    let s = gamma.frame_operator();
    let pi_k = k.range_projection(tol);
    let compression = s.compose(&pi_k)?;
    let inv = compression.pinv(tol);
    let pi_sk = s.compose(k)?.range_projection(tol);
    let tail = pi_sk.compose(&inv.adjoint())?.compose(k)?;
    let dual = gamma.compose_right(&tail)?;
    let projected = gamma.compose_right(&pi_k)?;
    let certificate = certify(&projected, &dual, k, tol, DualConstruction::Canonical)?;

    let cut = compression.rank_cutoff(tol);
    let kept_min = compression
        .realize()
        .iter()
        .flat_map(linalg::singular_values)
        .filter(|&v| v > cut)
        .fold(T::infinity(), |a, b| a.min(b));
    let scale = T::one().max(compression.uniform_norm());
    let conditioning_warning =
        (kept_min < T::lit(1e3 * tol.rank) * scale).then_some(kept_min);
    Ok(CanonicalDual {
        dual,
        projected,
        certificate,
        conditioning_warning,
    })
}

/// `K = Q P*` with `Q`, `P` the g-operators of `gamma` and `xi`.
pub fn dual_via_g_operators<T: Real>(
    gamma: &GFrame<T>,
    xi: &GFrame<T>,
    basis: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<bool> {
    let q = gamma.g_operator(basis, tol)?;
    let p = xi.g_operator(basis, tol)?;
    let qp = q.compose(&p.adjoint())?;
    Ok(qp.distance(k)? <= dual_threshold(k, tol))
}

fn common_codomain<T: Real>(f: &GFrame<T>, w_codomain: usize, what: &str) -> Result<()> {
    if f.codomain_ranks().iter().any(|&c| c != w_codomain) {
        return Err(Error::Shape(format!(
            "{what} needs every member to map into A^{w_codomain}, got {:?}",
            f.codomain_ranks()
        )));
    }
    Ok(())
}

/// Certifies `{W* o Xi_i}` against `{W* o G_i}` for a co-isometry `W`.
pub fn coisometry_transport<T: Real>(
    gamma: &GFrame<T>,
    xi: &GFrame<T>,
    k: &ModuleOperator<T>,
    w: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<DualCertificate<T>> {
    let id = ModuleOperator::identity(w.shape(), w.codomain_rank());
    let defect = w.compose(&w.adjoint())?.distance(&id)?;
    if defect > T::lit(tol.herm) {
        return Err(Error::NotCoisometry {
            defect: defect.as_f64(),
        });
    }
    common_codomain(gamma, w.codomain_rank(), "co-isometry transport")?;
    common_codomain(xi, w.codomain_rank(), "co-isometry transport")?;
    let ws = w.adjoint();
    certify(
        &gamma.compose_left(&ws)?,
        &xi.compose_left(&ws)?,
        k,
        tol,
        DualConstruction::Transported,
    )
}

/// `{Phi_i o T1 + Xi_i o T2}` for two K-duals `phi`, `xi` of `gamma`.
pub fn combine_duals<T: Real>(
    gamma: &GFrame<T>,
    phi: &GFrame<T>,
    xi: &GFrame<T>,
    k: &ModuleOperator<T>,
    t1: &ModuleOperator<T>,
    t2: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<(GFrame<T>, CombinationReport<T>)> {
    for (which, f) in [("phi", phi), ("xi", xi)] {
        let c = verify_k_dual(gamma, f, k, tol)?;
        if !c.is_dual {
            return Err(Error::NotDual {
                which: which.into(),
                residual: c.residual.as_f64(),
            });
        }
    }
    let members = phi
        .members()
        .iter()
        .zip(xi.members())
        .map(|(p, x)| p.compose(t1)?.add(&x.compose(t2)?))
        .collect::<Result<Vec<_>>>()?;
    let combined = GFrame::new(members)?;
    let certificate = certify(gamma, &combined, k, tol, DualConstruction::Combined)?;
    let id = ModuleOperator::identity(k.shape(), k.domain_rank());
    let sum_gap = t1.add(t2)?.distance(&id)?;
    Ok((
        combined,
        CombinationReport {
            certificate,
            sum_gap,
        },
    ))
}

/// Whether `{V_i + Xi_i}` stays a K-dual of `gamma`, alongside the
/// zero-overlap predicate `P Q* = 0`.
pub fn zero_overlap_perturbation<T: Real>(
    gamma: &GFrame<T>,
    v: &GFrame<T>,
    xi: &GFrame<T>,
    basis: &GFrame<T>,
    k: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<ZeroOverlapReport<T>> {
    let base = verify_k_dual(gamma, v, k, tol)?;
    if !base.is_dual {
        return Err(Error::NotDual {
            which: "v".into(),
            residual: base.residual.as_f64(),
        });
    }
    let p = gamma.g_operator(basis, tol)?;
    let q = xi.g_operator(basis, tol)?;
    let overlap = p.compose(&q.adjoint())?.uniform_norm();
    let members = v
        .members()
        .iter()
        .zip(xi.members())
        .map(|(a, b)| a.add(b))
        .collect::<Result<Vec<_>>>()?;
    let c = verify_k_dual(gamma, &GFrame::new(members)?, k, tol)?;
    Ok(ZeroOverlapReport {
        is_dual: c.is_dual,
        residual: c.residual,
        overlap,
        overlap_zero: overlap <= dual_threshold(k, tol),
    })
}

/// Optimal K-g bounds of `f` on the subspace spanned by the orthonormal
/// columns of `basis[b]` (row-vector convention).
fn compressed_bounds<T: Real>(
    f: &GFrame<T>,
    k: &ModuleOperator<T>,
    bases: &[CMat<T>],
    tol: &Tolerances,
) -> Result<(T, T)> {
    let s = f.frame_operator();
    let kk = k.compose(&k.adjoint())?;
    let cut = T::lit(tol.rank) * s.uniform_norm();
    let mut ratio = T::zero();
    let mut upper = T::zero();
    let mut outside = T::zero();
    for ((x, y), b) in kk.realize().iter().zip(s.realize()).zip(bases) {
        if b.ncols() == 0 {
            continue;
        }
        let xs = b.adjoint() * x * b;
        let ys = b.adjoint() * y * b;
        let m = linalg::majorization(&xs, &ys, cut);
        ratio = ratio.max(m.ratio);
        outside = outside.max(m.outside);
        let (vals, _) = linalg::eigh(&ys);
        upper = upper.max(*vals.last().unwrap_or(&T::zero()));
    }
    let lower = if outside > T::lit(tol.eq) * (T::one() + k.uniform_norm()) {
        T::zero()
    } else if ratio <= T::zero() {
        T::infinity()
    } else {
        T::one() / ratio
    };
    Ok((lower, upper))
}

/// `{G_i o Q*}` for `Q` commuting with `K`, with the predicted envelope
/// `[C ||Q^dag||^-2, D ||Q||^2]` and the bounds measured on `Ran(Q)`.
pub fn transform_by_q<T: Real>(
    gamma: &GFrame<T>,
    k: &ModuleOperator<T>,
    q: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<QTransform<T>> {
    let qn = q.uniform_norm();
    let comm = q.compose(k)?.distance(&k.compose(q)?)?;
    if comm > T::lit(tol.herm) * (T::one() + qn * k.uniform_norm()) {
        return Err(Error::NotCommuting {
            defect: comm.as_f64(),
        });
    }
    let frame = gamma.compose_right(&q.adjoint())?;
    let predicted_s = q.compose(gamma.frame_operator())?.compose(&q.adjoint())?;
    let s_residual = frame.frame_operator().distance(&predicted_s)?;

    let c = optimal_kg_lower_bound(gamma, k, tol)?;
    let d = gamma.optimal_g_bounds(tol).upper;
    let pinv_norm = q.pinv(tol).uniform_norm();
    let predicted_lower = c / (pinv_norm * pinv_norm);
    let predicted_upper = d * qn * qn;

    let cut = q.rank_cutoff(tol);
    let bases: Vec<CMat<T>> = q
        .realize()
        .iter()
        .map(|b| linalg::row_space_basis(b, cut))
        .collect();
    let (measured_lower, measured_upper) = compressed_bounds(&frame, k, &bases, tol)?;
    let slack = |v: T| T::lit(tol.eq) * (T::one() + v.abs());
    let lower_ok = predicted_lower.is_infinite()
        || measured_lower >= predicted_lower - slack(predicted_lower);
    let within_envelope =
        lower_ok && measured_upper <= predicted_upper + slack(predicted_upper);
    Ok(QTransform {
        frame,
        s_residual,
        predicted_lower,
        predicted_upper,
        measured_lower,
        measured_upper,
        within_envelope,
    })
}

/// `{W o G_i}` for an isometry `W`; bounds before and after as `(C, D)`.
pub fn isometry_left_transform<T: Real>(
    gamma: &GFrame<T>,
    k: &ModuleOperator<T>,
    w: &ModuleOperator<T>,
    tol: &Tolerances,
) -> Result<IsometryTransform<T>> {
    let id = ModuleOperator::identity(w.shape(), w.domain_rank());
    let defect = w.adjoint().compose(w)?.distance(&id)?;
    if defect > T::lit(tol.herm) {
        return Err(Error::NotIsometry {
            defect: defect.as_f64(),
        });
    }
    common_codomain(gamma, w.domain_rank(), "isometry transform")?;
    let frame = gamma.compose_left(w)?;
    let before = (
        optimal_kg_lower_bound(gamma, k, tol)?,
        gamma.optimal_g_bounds(tol).upper,
    );
    let after = (
        optimal_kg_lower_bound(&frame, k, tol)?,
        frame.optimal_g_bounds(tol).upper,
    );
    Ok(IsometryTransform {
        frame,
        before,
        after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraElement, AlgebraShape};
    use crate::scalar::cx;

    fn sh() -> AlgebraShape {
        AlgebraShape::new(&[1]).unwrap()
    }

    fn op(rows: &[&[f64]]) -> ModuleOperator<f64> {
        let s = sh();
        let coeffs: Vec<Vec<_>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| AlgebraElement::scalar(&s, cx(v, 0.0))).collect())
            .collect();
        ModuleOperator::from_coeffs(&s, &coeffs).unwrap()
    }

    fn ci1() -> GFrame<f64> {
        GFrame::new(vec![op(&[&[1.0], &[0.0]]), op(&[&[0.0], &[1.0]]), op(&[&[1.0], &[1.0]])])
            .unwrap()
    }

    #[test]
    fn verify_examples() {
        let tol = Tolerances::default();
        let e = GFrame::<f64>::canonical_g_orthonormal_basis(&sh(), &[1, 1], 2).unwrap();
        let id = ModuleOperator::identity(&sh(), 2);
        let c = verify_k_dual(&e, &e, &id, &tol).unwrap();
        assert!(c.is_dual && c.residual == 0.0);
        let z = e.scale(0.0);
        let k = op(&[&[3.0, 0.0], &[0.0, 1.0]]);
        let c = verify_k_dual(&e, &z, &k, &tol).unwrap();
        assert!(!c.is_dual && (c.residual - 3.0).abs() < 1e-14);
    }

    #[test]
    fn canonical_dual_ci1() {
        let tol = Tolerances::default();
        let k = op(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let cd = canonical_k_dual(&ci1(), &k, &tol).unwrap();
        assert!(cd.certificate.is_dual && cd.certificate.residual <= 1e-12);
        assert!(cd.conditioning_warning.is_none());

        // K = I reduces to the classical canonical dual
        let id = ModuleOperator::identity(&sh(), 2);
        let cd = canonical_k_dual(&ci1(), &id, &tol).unwrap();
        let sinv = ci1().frame_operator().inverse(&tol).unwrap();
        let classical = ci1().compose_right(&sinv).unwrap();
        assert!(cd.dual.distance(&classical).unwrap() < 1e-12);
        assert!(verify_k_dual(&ci1(), &cd.dual, &id, &tol).unwrap().is_dual);

        let e = GFrame::<f64>::canonical_g_orthonormal_basis(&sh(), &[1, 1], 2).unwrap();
        let k = op(&[&[1.0, 2.0], &[-1.0, 0.5]]);
        let cd = canonical_k_dual(&e, &k, &tol).unwrap();
        assert!(cd.dual.distance(&e.compose_right(&k).unwrap()).unwrap() < 1e-12);

        let bad = GFrame::new(vec![op(&[&[1.0], &[0.0]])]).unwrap();
        assert!(matches!(canonical_k_dual(&bad, &id, &tol), Err(Error::NotKgFrame { .. })));
    }

    #[test]
    fn g_operator_criterion() {
        let tol = Tolerances::default();
        let e = GFrame::<f64>::canonical_g_orthonormal_basis(&sh(), &[1, 1], 2).unwrap();
        let id = ModuleOperator::identity(&sh(), 2);
        assert!(dual_via_g_operators(&e, &e, &e, &id, &tol).unwrap());
        let q0 = op(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let p0 = op(&[&[0.5, 0.0], &[1.0, -1.0]]);
        let k = q0.compose(&p0.adjoint()).unwrap();
        let g = GFrame::from_g_operator(&e, &q0).unwrap();
        let x = GFrame::from_g_operator(&e, &p0).unwrap();
        assert!(dual_via_g_operators(&g, &x, &e, &k, &tol).unwrap());
        assert!(verify_k_dual(&g, &x, &k, &tol).unwrap().is_dual);
        let x2 = GFrame::from_g_operator(&e, &p0.add(&id.scale(1e-3)).unwrap()).unwrap();
        assert!(!dual_via_g_operators(&g, &x2, &e, &k, &tol).unwrap());
        assert!(!verify_k_dual(&g, &x2, &k, &tol).unwrap().is_dual);
    }

    #[test]
    fn combination_examples() {
        let tol = Tolerances::default();
        let f = ci1();
        let id = ModuleOperator::identity(&sh(), 2);
        let cd = canonical_k_dual(&f, &id, &tol).unwrap().dual;
        // a second dual: add something annihilated by the synthesis
        let n = GFrame::new(vec![op(&[&[1.0], &[0.0]]), op(&[&[1.0], &[0.0]]), op(&[&[-1.0], &[0.0]])]).unwrap();
        let other = GFrame::new(
            cd.members().iter().zip(n.members()).map(|(a, b)| a.add(b).unwrap()).collect(),
        )
        .unwrap();
        assert!(verify_k_dual(&f, &other, &id, &tol).unwrap().is_dual);
        let zero = id.scale(0.0);
        let half = id.scale(0.5);
        let (_, r) = combine_duals(&f, &cd, &other, &id, &id, &zero, &tol).unwrap();
        assert!(r.certificate.is_dual);
        let (_, r) = combine_duals(&f, &cd, &other, &id, &half, &half, &tol).unwrap();
        assert!(r.certificate.is_dual && r.sum_gap < 1e-15);
        let (_, r) = combine_duals(&f, &cd, &other, &id, &id, &id, &tol).unwrap();
        assert!(!r.certificate.is_dual && (r.certificate.residual - 1.0).abs() < 1e-12);
        assert!(matches!(
            combine_duals(&f, &f, &other, &id, &id, &zero, &tol),
            Err(Error::NotDual { .. })
        ));
    }

    #[test]
    fn zero_overlap_examples() {
        let tol = Tolerances::default();
        let e = GFrame::<f64>::canonical_g_orthonormal_basis(&sh(), &[1, 1], 2).unwrap();
        let id = ModuleOperator::identity(&sh(), 2);
        let z = zero_overlap_perturbation(&e, &e, &e.scale(0.0), &e, &id, &tol).unwrap();
        assert!(z.is_dual && z.overlap_zero);
        let z = zero_overlap_perturbation(&e, &e, &e, &e, &id, &tol).unwrap();
        assert!(!z.is_dual && !z.overlap_zero);
        // Gamma with g-operator diag(1,0), perturbation living on the second axis
        let g = GFrame::from_g_operator(&e, &op(&[&[1.0, 0.0], &[0.0, 0.0]])).unwrap();
        let v = g.clone();
        let k = op(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let xi = GFrame::from_g_operator(&e, &op(&[&[0.0, 0.0], &[0.0, 5.0]])).unwrap();
        let z = zero_overlap_perturbation(&g, &v, &xi, &e, &k, &tol).unwrap();
        assert!(z.is_dual && z.overlap_zero);
    }

    #[test]
    fn q_transform_examples() {
        let tol = Tolerances::default();
        let f = ci1();
        let k = op(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let id = ModuleOperator::identity(&sh(), 2);
        let t = transform_by_q(&f, &k, &id, &tol).unwrap();
        assert!(t.within_envelope);
        assert!((t.measured_lower - 1.5).abs() < 1e-12 && (t.predicted_lower - 1.5).abs() < 1e-12);
        let t = transform_by_q(&f, &k, &id.scale(2.0), &tol).unwrap();
        assert!((t.measured_lower - 6.0).abs() < 1e-10 && (t.measured_upper - 12.0).abs() < 1e-10);
        assert!(t.within_envelope && t.s_residual < 1e-12);
        let nc = op(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(transform_by_q(&f, &k, &nc, &tol), Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn q_with_inverse_p() {
        // Q P^-1 = I: frames generated by Q and by P = Q are mutual duals for K = Q P*
        let tol = Tolerances::default();
        let e = GFrame::<f64>::canonical_g_orthonormal_basis(&sh(), &[1, 1], 2).unwrap();
        let q = op(&[&[2.0, 1.0], &[0.0, 1.0]]);
        let p = q.clone();
        let pinv = p.inverse(&tol).unwrap();
        assert!(q.compose(&pinv).unwrap().distance(&ModuleOperator::identity(&sh(), 2)).unwrap() < 1e-14);
        let k = q.compose(&p.adjoint()).unwrap();
        let g = GFrame::from_g_operator(&e, &q).unwrap();
        let x = GFrame::from_g_operator(&e, &p).unwrap();
        assert!(dual_via_g_operators(&g, &x, &e, &k, &tol).unwrap());
        assert!(verify_k_dual(&g, &x, &k, &tol).unwrap().is_dual);
    }

    #[test]
    fn isometries_and_coisometries() {
        let tol = Tolerances::default();
        let f = ci1();
        let k = op(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let w = op(&[&[0.6, 0.8]]);
        let t = isometry_left_transform(&f, &k, &w, &tol).unwrap();
        assert!((t.before.0 - t.after.0).abs() < 1e-12 && (t.before.1 - t.after.1).abs() < 1e-12);
        let wide = op(&[&[0.6], &[0.8]]);
        assert!(matches!(isometry_left_transform(&f, &k, &wide, &tol), Err(Error::NotIsometry { .. })));

        let id = ModuleOperator::identity(&sh(), 2);
        let cd = canonical_k_dual(&f, &id, &tol).unwrap().dual;
        let c = coisometry_transport(&f, &cd, &id, &wide, &tol).unwrap();
        assert!(c.is_dual && c.construction == DualConstruction::Transported);
        assert!(matches!(coisometry_transport(&f, &cd, &id, &w, &tol), Err(Error::NotCoisometry { .. })));
    }
}
