//! Ensemble invariants that cut across modules: blowup detection on
//! certified-complete groups, operator-norm duality, the growth taxonomy
//! over the catalog, verdict consistency, and the charge/field identity
//! along integrated geodesics.

use liegeo::algebra::LieAlgebra;
use liegeo::catalog::load_builtin;
use liegeo::clairaut::{clairaut_form_at, clairaut_form_from_basis};
use liegeo::flow::{integrate_geodesic, FlowOptions, FlowStatus};
use liegeo::growth::{
    ad_operator_norm, completeness_verdict, growth_classify, idempotent_search, lambda_minus,
    log_grid, one_param_growth_scan, Certificate, GrowthClass, VerdictOptions,
};
use liegeo::metric::{signature_decompose, MetricForm};
use liegeo::sample;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Blowup detection never triggers on the certified-complete catalog
/// cases over long horizons. Tolerances are relaxed relative to the
/// defaults purely for ensemble cost; the blowup thresholds are the
/// defaults.
#[test]
fn no_blowup_on_certified_complete_cases() {
    let names = ["heis3", "abelian:4", "so3"];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = FlowOptions {
        rel_tol: 1e-8,
        abs_tol: 1e-10,
        store_stride: 1024,
        ..FlowOptions::default()
    };
    for i in 0..100 {
        let name = names[i % names.len()];
        let alg = load_builtin(name).unwrap().algebra;
        let n = alg.dim();
        let negatives = rng.gen_range(0..=n);
        let g = sample::random_metric(&mut rng, n, negatives);
        let x0 = sample::random_unit(&mut rng, n);
        let traj = integrate_geodesic(&alg, &g, &x0, 1000.0, &opts).unwrap();
        assert!(
            !matches!(traj.status, FlowStatus::Blowup { .. }),
            "run {i} ({name}, negatives {negatives}): {:?}",
            traj.status
        );
    }
}

/// |Ad_p| |Ad_{p^-1}| >= 1 for p = exp(a), over random directions across
/// the catalog.
#[test]
fn adjoint_norm_product_at_least_one() {
    let names = ["aff", "heis3", "n4", "so3", "sl2", "e2"];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..1000 {
        let name = names[i % names.len()];
        let alg = load_builtin(name).unwrap().algebra;
        let n = alg.dim();
        let a = sample::random_unit(&mut rng, n);
        let t = rng.gen_range(0.1..3.0);
        let ad = alg.ad_matrix(&a);
        let fwd = (t * &ad).exp();
        let bwd = (-t * &ad).exp();
        let g_tilde = DMatrix::identity(n, n);
        let product = ad_operator_norm(&fwd, &g_tilde) * ad_operator_norm(&bwd, &g_tilde);
        assert!(product >= 1.0 - 1e-9, "{name}: product {product}");
        // Duality |Ad_{p^-1}| = 1 / lambda_-(p).
        let dual = ad_operator_norm(&bwd, &g_tilde) * lambda_minus(&fwd, &g_tilde);
        assert!((dual - 1.0).abs() <= 1e-9, "{name}: duality {dual}");
    }
}

/// Growth-class monotonicity over the catalog: abelian scans are bounded,
/// 2-step nilpotent scans are bounded or linear, and the 3-step filiform
/// algebra shows a quadratic direction.
#[test]
fn growth_class_monotonicity() {
    let grid = log_grid(0.1, 1e4, 48);
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let abelian = LieAlgebra::abelian(4);
    let id4 = DMatrix::identity(4, 4);
    for _ in 0..50 {
        let a = sample::random_unit(&mut rng, 4);
        let (_, s, _) = one_param_growth_scan(&abelian, &a, &id4, &grid).unwrap();
        assert_eq!(growth_classify(&s).unwrap().class, GrowthClass::Bounded);
    }

    let heis3 = load_builtin("heis3").unwrap().algebra;
    let id3 = DMatrix::identity(3, 3);
    for _ in 0..50 {
        let a = sample::random_unit(&mut rng, 3);
        let (_, s, _) = one_param_growth_scan(&heis3, &a, &id3, &grid).unwrap();
        let class = growth_classify(&s).unwrap().class;
        assert!(
            matches!(class, GrowthClass::Bounded | GrowthClass::Linear),
            "heis3: {class:?}"
        );
    }

    let n4 = load_builtin("n4").unwrap().algebra;
    let mut saw_quadratic = false;
    let mut directions: Vec<DVector<f64>> =
        (0..50).map(|_| sample::random_unit(&mut rng, 4)).collect();
    directions.push(DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]));
    for a in &directions {
        let (_, s, _) = one_param_growth_scan(&n4, a, &id4, &grid).unwrap();
        let class = growth_classify(&s).unwrap().class;
        match class {
            GrowthClass::Bounded | GrowthClass::Linear => {}
            GrowthClass::Polynomial(2) => saw_quadratic = true,
            other => panic!("n4: unexpected class {other:?}"),
        }
    }
    assert!(
        saw_quadratic,
        "expected a Polynomial(2) direction on the 3-step algebra"
    );
}

/// No input may produce a structural linear-growth certificate and a
/// verified idempotent at the same time, over the catalog x preset grid.
#[test]
fn verdict_consistency_on_catalog_grid() {
    let opts = VerdictOptions {
        probe_budget: 4,
        ..VerdictOptions::default()
    };
    for name in ["abelian:3", "aff", "heis3", "n4", "so3", "sl2", "e2"] {
        let entry = load_builtin(name).unwrap();
        for (preset, g) in &entry.presets {
            let verdict = completeness_verdict(&entry.algebra, g, &opts).unwrap();
            let linear_growth_certificate = matches!(
                verdict.certificate,
                Some(Certificate::Abelian)
                    | Some(Certificate::TwoStepNilpotent)
                    | Some(Certificate::CompactType)
                    | Some(Certificate::PseudoCompactSemidirect)
            );
            if linear_growth_certificate {
                let idempotents = idempotent_search(&entry.algebra, g, 64, 1e-10, 0);
                assert!(
                    idempotents.is_empty(),
                    "{name}/{preset}: linear-growth certificate with idempotent witness"
                );
            }
        }
    }
}

/// Along integrated geodesics the Clairaut field evaluated on the body
/// velocity equals the sum of squared charges and stays constant: in the
/// standard basis directly, and in the Wick basis through the transformed
/// charges.
#[test]
fn clairaut_field_matches_charges_along_geodesics() {
    let cases = [
        ("so3", "rigid-body", 20.0),
        ("heis3", "lorentz", 10.0),
        ("aff", "g1", 10.0),
        ("e2", "lorentz", 10.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, preset, t_end) in cases {
        let entry = load_builtin(name).unwrap();
        let g = entry.preset(preset).unwrap();
        let n = entry.algebra.dim();
        let w = signature_decompose(g, 1e-12).unwrap();
        let x0 = sample::random_unit(&mut rng, n);
        let traj =
            integrate_geodesic(&entry.algebra, g, &x0, t_end, &FlowOptions::default()).unwrap();
        assert!(
            matches!(traj.status, FlowStatus::Completed(_)),
            "{name}: {:?}",
            traj.status
        );
        let first = traj.initial();
        let h0 = {
            let h = clairaut_form_from_basis(&first.a, g, &DMatrix::identity(n, n)).unwrap();
            (first.x.transpose() * h * &first.x)[(0, 0)]
        };
        for s in traj.samples.iter().step_by(17) {
            let a_inv = &s.a;
            if a_inv.determinant().abs() < 1e-12 {
                continue;
            }
            // Standard basis: h(x, x) = sum_i c_i^2.
            let h_std = clairaut_form_from_basis(a_inv, g, &DMatrix::identity(n, n)).unwrap();
            let hx = (s.x.transpose() * &h_std * &s.x)[(0, 0)];
            let c_sq = s.charges.norm_squared();
            assert!(
                (hx - c_sq).abs() <= 1e-6 * c_sq.max(1.0),
                "{name} t = {}: h(x,x) = {hx}, sum c^2 = {c_sq}",
                s.t
            );
            // Constancy along the flow.
            assert!(
                (hx - h0).abs() <= 1e-6 * h0.abs().max(1.0),
                "{name} t = {}: h(x,x) drifted from {h0} to {hx}",
                s.t
            );
            // Wick basis: transformed charges B^T c.
            let h_wick = clairaut_form_at(a_inv, g, &w).unwrap();
            let hx_wick = (s.x.transpose() * &h_wick * &s.x)[(0, 0)];
            let c_wick = w.b.transpose() * &s.charges;
            assert!(
                (hx_wick - c_wick.norm_squared()).abs() <= 1e-6 * hx_wick.abs().max(1.0),
                "{name} t = {}: Wick h vs transformed charges",
                s.t
            );
        }
    }
}

/// Trajectory transport stays invertible on completed runs, with the
/// determinant tracking the trace quadrature.
#[test]
fn transport_stays_invertible_on_completed_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ["aff", "so3", "heis3", "sl2"] {
        let alg = load_builtin(name).unwrap().algebra;
        let n = alg.dim();
        let negatives = rng.gen_range(0..=n);
        let g = sample::random_metric(&mut rng, n, negatives);
        let x0 = sample::random_unit(&mut rng, n);
        let traj = integrate_geodesic(&alg, &g, &x0, 10.0, &FlowOptions::default()).unwrap();
        if !matches!(traj.status, FlowStatus::Completed(_)) {
            continue;
        }
        for s in traj.samples.iter().step_by(23) {
            let det = s.a.determinant();
            let expected = (-s.trace_integral).exp();
            assert!(det.abs() > 1e-12);
            assert!(
                (det - expected).abs() <= 1e-6 * expected.abs().max(1.0),
                "{name} t = {}",
                s.t
            );
        }
    }
}

/// Wick-restricted uniqueness at ensemble scale: block-orthogonal basis
/// transitions leave the Clairaut field unchanged; fully pseudo-orthogonal
/// ones need not (recorded as the open edge it is).
#[test]
fn wick_uniqueness_under_block_orthogonal_transitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let n = 4;
        let s = rng.gen_range(1..n);
        let g = sample::random_metric(&mut rng, n, s);
        let w = signature_decompose(&g, 1e-12).unwrap();
        let q1 = sample::random_orthogonal(&mut rng, s);
        let q2 = sample::random_orthogonal(&mut rng, n - s);
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (s, s)).copy_from(&q1);
        m.view_mut((s, s), (n - s, n - s)).copy_from(&q2);
        let a_inv = sample::random_invertible(&mut rng, n);
        let h1 = clairaut_form_from_basis(&a_inv, &g, &w.b).unwrap();
        let h2 = clairaut_form_from_basis(&a_inv, &g, &(&w.b * m)).unwrap();
        assert!((h1.clone() - h2).amax() <= 1e-10 * h1.amax().max(1.0));
    }
}

/// Determinism: the verdict JSON for a fixed spec and seed is
/// byte-identical across runs.
#[test]
fn verdict_json_is_deterministic() {
    let sl2 = load_builtin("sl2").unwrap().algebra;
    let g = MetricForm::from_diagonal(&[1.0, 1.0, -1.0]).unwrap();
    let opts = VerdictOptions {
        probe_budget: 4,
        seed: 42,
        ..VerdictOptions::default()
    };
    let a = completeness_verdict(&sl2, &g, &opts)
        .unwrap()
        .to_json()
        .to_string();
    let b = completeness_verdict(&sl2, &g, &opts)
        .unwrap()
        .to_json()
        .to_string();
    assert_eq!(a, b);
}
