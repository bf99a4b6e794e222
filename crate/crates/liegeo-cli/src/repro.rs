//! Fixed reproduction of the affine-group reference numbers, one
//! pass/fail check per line.

use liegeo::catalog::{aff_reference, aff_witness_curves, load_builtin};
use liegeo::clairaut::{
    clairaut_spectrum, curve_length, Chart, ClairautField, LengthOptions, MetricField,
};
use liegeo::flow::{integrate_geodesic, FlowOptions, FlowStatus};
use liegeo::growth::{
    ad_operator_norm, completeness_verdict, growth_classify, idempotent_search, log_grid,
    one_param_growth_scan, Certificate, GrowthClass, VerdictKind, VerdictOptions,
};
use liegeo::metric::{aff_orbit_classify, signature_decompose, AffOrbit};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

pub fn affine_reproduction() -> Vec<Check> {
    let mut checks = Vec::new();
    let aff = load_builtin("aff").expect("builtin aff");
    let chart = aff.chart.as_ref().expect("aff chart");

    // Incomplete geodesics with singular time 1.
    for (preset, x0) in [
        ("g-1", DVector::from_vec(vec![1.0, 1.0])),
        ("g0", DVector::from_vec(vec![1.0, 0.0])),
    ] {
        let g = aff.preset(preset).unwrap();
        let traj = integrate_geodesic(&aff.algebra, g, &x0, 2.0, &FlowOptions::default())
            .expect("geodesic run");
        let (pass, detail) = match traj.status {
            FlowStatus::Blowup { t_low, t_high } => (
                (t_low - 1.0).abs() <= 1e-3
                    && (t_high - 1.0).abs() <= 1e-3
                    && t_high - t_low <= 1e-3,
                format!("bracket [{t_low:.9}, {t_high:.9}]"),
            ),
            other => (false, format!("{other:?}")),
        };
        checks.push(check(
            if preset == "g-1" {
                "incomplete geodesic g^(-1)"
            } else {
                "incomplete geodesic g^(0)"
            },
            pass,
            detail,
        ));
        if preset == "g-1" {
            let mut worst = 0.0f64;
            for s in traj.samples.iter().filter(|s| s.t <= 0.9) {
                let f = 1.0 / (1.0 - s.t);
                let exact = DVector::from_vec(vec![f, f]);
                worst = worst.max((&s.x - &exact).norm() / exact.norm());
            }
            checks.push(check(
                "closed-form body velocity on [0, 0.9]",
                worst <= 1e-6,
                format!("max relative error {worst:.3e}"),
            ));
        }
    }

    // Clairaut closed forms at random points.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_form = 0.0f64;
    let mut worst_det = 0.0f64;
    let mut worst_evl = 0.0f64;
    for (preset, eps) in [("g1", 1.0), ("g-1", -1.0)] {
        let g = aff.preset(preset).unwrap();
        let w = signature_decompose(g, 1e-12).unwrap();
        let field = ClairautField::new(chart, g, w);
        for _ in 0..100 {
            let x = rng.gen_range(0.1..10.0);
            let y = rng.gen_range(-3.0..3.0);
            let p = DVector::from_vec(vec![x, y]);
            let h = field.form_at(&p).unwrap();
            let r = aff_reference(x, y, eps).unwrap();
            worst_form = worst_form.max((&h - &r.h_coord).amax() / r.h_coord.amax());
            let det = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
            worst_det = worst_det.max((det - r.det).abs() / r.det);
            let (lo, hi) = clairaut_spectrum(&h, &DMatrix::identity(2, 2)).unwrap();
            worst_evl = worst_evl.max((lo - r.evl.0).abs() / r.evl.0.max(1e-30));
            worst_evl = worst_evl.max((hi - r.evl.1).abs() / r.evl.1.max(1e-30));
        }
    }
    checks.push(check(
        "Clairaut coordinate forms",
        worst_form <= 1e-12,
        format!("max relative error {worst_form:.3e}"),
    ));
    checks.push(check(
        "Clairaut determinant eps^2/x^6",
        worst_det <= 1e-12,
        format!("max relative error {worst_det:.3e}"),
    ));
    checks.push(check(
        "Clairaut eigenvalue closed form",
        worst_evl <= 1e-10,
        format!("max relative error {worst_evl:.3e}"),
    ));

    // Length values.
    let curves = aff_witness_curves();
    let opts = LengthOptions {
        rel_tol: 1e-10,
        ..LengthOptions::default()
    };
    {
        let g = aff.preset("g-1").unwrap();
        let field = ClairautField::new(chart, g, signature_decompose(g, 1e-12).unwrap());
        let c = curves
            .iter()
            .find(|c| c.name == "h-1-finite-length")
            .unwrap();
        let r = curve_length(&field, c.curve.as_ref(), 0.0, 40.0, &opts).unwrap();
        let err = (r.length - std::f64::consts::FRAC_PI_2).abs();
        checks.push(check(
            "h^(-1) length of (cosh, sinh) = pi/2",
            err <= 1e-6 && r.length <= 2.0,
            format!("length {:.9}, error {err:.3e}", r.length),
        ));
    }
    {
        let g = aff.preset("g0").unwrap();
        let field = ClairautField::new(chart, g, signature_decompose(g, 1e-12).unwrap());
        let c = curves.iter().find(|c| c.name == "h0-finite-ray").unwrap();
        let r = curve_length(&field, c.curve.as_ref(), 1.0, 1e6, &opts).unwrap();
        checks.push(check(
            "h^(0) length of (t, 0) on [1, 1e6] = 1",
            (r.length - 1.0).abs() <= 1e-5,
            format!("length {:.9}", r.length),
        ));
    }
    {
        let g = aff.preset("g1").unwrap();
        let field = ClairautField::new(chart, g, signature_decompose(g, 1e-12).unwrap());
        let c = curves.iter().find(|c| c.name == "h0-finite-ray").unwrap();
        let mut ok = true;
        let mut detail = String::new();
        for t_end in [1e2, 1e4] {
            let r = curve_length(&field, c.curve.as_ref(), 1.0, t_end, &opts).unwrap();
            ok &= (r.length - t_end.ln()).abs() <= 1e-6;
            detail.push_str(&format!("[1, {t_end:.0e}] -> {:.9}; ", r.length));
        }
        checks.push(check("h^(1) length of (t, 0) = ln T", ok, detail));
    }

    // Exponential growth of the adjoint.
    {
        let id = DMatrix::identity(2, 2);
        let mut ok = true;
        let mut worst = 0.0f64;
        for x in [0.5, 1.0, 2.0, 10.0f64.exp()] {
            let p = DVector::from_vec(vec![1.0 / x, 0.0]);
            let ad = chart.ad_inv(&p).unwrap();
            let norm = ad_operator_norm(&ad, &id);
            let formula = (0.5 * (1.0 + x * x + (1.0 - x * x).abs())).sqrt();
            let err = (norm - formula).abs() / formula.max(1.0);
            worst = worst.max(err);
            ok &= err <= 1e-9;
        }
        checks.push(check(
            "|Ad_(x,0)| closed form",
            ok,
            format!("max relative error {worst:.3e}"),
        ));

        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let grid = log_grid(0.1, 100.0, 40);
        let (_, samples, _) = one_param_growth_scan(&aff.algebra, &e1, &id, &grid).unwrap();
        let fit = growth_classify(&samples).unwrap();
        let (ok, detail) = match fit.class {
            GrowthClass::Exponential { rate } => (
                (rate - 1.0).abs() <= 0.01,
                format!("exponential, rate {rate:.4}"),
            ),
            other => (false, format!("{other:?}")),
        };
        checks.push(check(
            "growth along e1 is exponential with rate 1",
            ok,
            detail,
        ));
    }

    // Idempotents of the two incomplete presets.
    {
        let g = aff.preset("g-1").unwrap();
        let roots = idempotent_search(&aff.algebra, g, 64, 1e-10, 0);
        let target = DVector::from_vec(vec![1.0, 1.0]);
        let found = roots.iter().any(|r| (r - &target).norm() <= 1e-8);
        checks.push(check(
            "idempotent e1+e2 for g^(-1)",
            found,
            format!("{} roots", roots.len()),
        ));

        let g0 = aff.preset("g0").unwrap();
        let roots0 = idempotent_search(&aff.algebra, g0, 64, 1e-10, 0);
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let found0 = roots0.iter().any(|r| (r - &e1).norm() <= 1e-8);
        checks.push(check(
            "idempotent e1 for g^(0)",
            found0,
            format!("{} roots", roots0.len()),
        ));
    }

    // Orbit classes of the three presets and the final verdicts.
    {
        let orbits = [
            ("g1", (1.0, 0.0, 1.0), AffOrbit::Definite),
            ("g-1", (1.0, 0.0, -1.0), AffOrbit::LorentzE2NonIsotropic),
            ("g0", (0.0, 1.0, 0.0), AffOrbit::LorentzE2Isotropic),
        ];
        let mut ok = true;
        for (_, (c1, c2, c3), expected) in orbits {
            ok &= aff_orbit_classify(c1, c2, c3).unwrap() == expected;
        }
        checks.push(check(
            "orbit classification of the three presets",
            ok,
            String::new(),
        ));

        let opts = VerdictOptions::default();
        let v1 = completeness_verdict(&aff.algebra, aff.preset("g1").unwrap(), &opts).unwrap();
        let vm1 = completeness_verdict(&aff.algebra, aff.preset("g-1").unwrap(), &opts).unwrap();
        let v0 = completeness_verdict(&aff.algebra, aff.preset("g0").unwrap(), &opts).unwrap();
        let ok = v1.kind == VerdictKind::CompleteCertified
            && v1.certificate == Some(Certificate::Definite)
            && vm1.kind == VerdictKind::IncompleteCertified
            && v0.kind == VerdictKind::IncompleteCertified;
        checks.push(check(
            "verdicts: g^(1) complete, g^(-1) and g^(0) incomplete",
            ok,
            format!("{} / {} / {}", v1.kind.tag(), vm1.kind.tag(), v0.kind.tag()),
        ));
    }

    checks
}
