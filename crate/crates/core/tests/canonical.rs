use ::kgframe::{
    canonical_k_dual, is_kg_frame, tightness_check, verify_k_dual, AlgebraElement, AlgebraShape, Cx,
    GFrame, ModuleOperator, Real, Tolerances,
};

fn scalar_op<T: Real>(shape: &AlgebraShape, rows: &[&[f64]]) -> ModuleOperator<T> {
    let coeffs: Vec<Vec<_>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| AlgebraElement::scalar(shape, Cx::new(T::lit(v), T::zero())))
                .collect()
        })
        .collect();
    ModuleOperator::from_coeffs(shape, &coeffs).unwrap()
}

fn ci1<T: Real>() -> GFrame<T> {
    let sh = AlgebraShape::new(&[1]).unwrap();
    GFrame::new(vec![
        scalar_op(&sh, &[&[1.0], &[0.0]]),
        scalar_op(&sh, &[&[0.0], &[1.0]]),
        scalar_op(&sh, &[&[1.0], &[1.0]]),
    ])
    .unwrap()
}

#[test]
fn ci1_bounds_and_k_lower_bound() {
    let tol = Tolerances::default();
    let f = ci1::<f64>();
    let b = f.optimal_g_bounds(&tol);
    assert!((b.lower - 1.0).abs() < 1e-9);
    assert!((b.upper - 3.0).abs() < 1e-9);
    assert!(!b.tight);

    let sh = f.shape().clone();
    let k = scalar_op(&sh, &[&[1.0, 0.0], &[0.0, 0.0]]);
    let r = is_kg_frame(&f, &k, &tol).unwrap();
    assert!(r.is_k_g_frame);
    assert!((r.lower_c - 1.5).abs() < 1e-9);

    let id = ModuleOperator::identity(&sh, 2);
    assert!(!tightness_check(&f, &id, &tol).unwrap().tight);
}

#[test]
fn ci1_canonical_dual_certifies() {
    let tol = Tolerances::default();
    let f = ci1::<f64>();
    let k = scalar_op(&f.shape().clone(), &[&[1.0, 0.0], &[0.0, 0.0]]);
    let cd = canonical_k_dual(&f, &k, &tol).unwrap();
    assert!(cd.certificate.is_dual);
    let again = verify_k_dual(&cd.projected, &cd.dual, &k, &tol).unwrap();
    assert!(again.residual < 1e-12);
}

#[test]
fn scaled_coordinate_frame_is_tight_with_square_scale() {
    let tol = Tolerances::default();
    let sh = AlgebraShape::new(&[2, 1]).unwrap();
    let e = GFrame::<f64>::canonical_g_orthonormal_basis(&sh, &[1, 1, 1], 3).unwrap();
    let id = ModuleOperator::identity(&sh, 3);
    let plain = tightness_check(&e, &id, &tol).unwrap();
    assert!(plain.tight && (plain.scale - 1.0).abs() < 1e-12);
    let doubled = tightness_check(&e.scale(2.0), &id, &tol).unwrap();
    assert!(doubled.tight && doubled.ranges_equal);
    assert!((doubled.scale - 4.0).abs() < 1e-8);
}

#[test]
fn single_precision_smoke() {
    let tol = Tolerances {
        psd: 1e-4,
        herm: 1e-5,
        rank: 1e-5,
        eq: 1e-4,
    };
    let f = ci1::<f32>();
    let b = f.optimal_g_bounds(&tol);
    assert!((b.lower - 1.0).abs() < 1e-5);
    assert!((b.upper - 3.0).abs() < 1e-5);
    let k = scalar_op::<f32>(&f.shape().clone(), &[&[1.0, 0.0], &[0.0, 0.0]]);
    let r = is_kg_frame(&f, &k, &tol).unwrap();
    assert!((r.lower_c - 1.5).abs() < 1e-4);
}
