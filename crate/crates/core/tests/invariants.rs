//! Randomized versions of the module invariants, at small resolutions.

use curl_lambda::conjugate::{conjugate_from_scalar, ConjugateOptions};
use curl_lambda::domain::{build_domain, interior_eval_grid, sample, sample_on_domain, FnField};
use curl_lambda::fielddiff::{align, dirac_shift_fd};
use curl_lambda::forcefree::{beltrami_plane_wave, beltrami_shear, verify_forcefree, Superposition};
use curl_lambda::kernels::theta;
use curl_lambda::maxwell::{homogeneous_residuals, solve_achiral, MaxwellFields, MediumParams, SourceData};
use curl_lambda::neumann::{flux_identity_defect, make_sphere_mesh, trace_densities};
use curl_lambda::potentials::{t0, t1, t2, teodorescu_t_signed};
use curl_lambda::quaternion::ONE;
use curl_lambda::rightinverse::r_lambda;
use curl_lambda::{Biquaternion, CVec3, FieldKind, FieldSample, Point, Shape, Sign, C64};
use proptest::prelude::*;

fn unit(v: [f64; 3]) -> Point {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn direction() -> impl Strategy<Value = Point> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.05)
        .prop_map(unit)
}

fn spectral() -> impl Strategy<Value = C64> {
    (0.5..3.0f64, 0.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn trig_field(c: [f64; 6]) -> FnField {
    FnField::new(FieldKind::Full, move |x| {
        let s = |a: f64, b: f64| C64::new((a * x[0] + b * x[1]).sin(), (b * x[2] - a * x[0]).cos());
        Biquaternion::new(s(c[0], c[1]), s(c[2], c[3]), s(c[4], c[5]), s(c[1], c[4]))
    })
}

fn rel(a: &FieldSample, b: &FieldSample) -> f64 {
    let (a, b) = align(a, b).unwrap();
    a.sub(&b).unwrap().norm_l2() / b.norm_l2()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cell_ordering_is_deterministic(r in 0.5..2.0f64, n in 6usize..14) {
        let shape = Shape::Ball { center: [0.1, -0.2, 0.3], radius: r };
        let a = build_domain(shape.clone(), n).unwrap();
        let b = build_domain(shape, n).unwrap();
        prop_assert_eq!(a.centers, b.centers);
        prop_assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn theta_decay(r1 in 0.1..2.0f64, dr in 0.1..2.0f64, li in 0.0..1.5f64, d in direction()) {
        let lam = C64::new(1.0, li);
        let r2 = r1 + dr;
        let a = theta([r1 * d[0], r1 * d[1], r1 * d[2]], lam).unwrap().norm();
        let b = theta([r2 * d[0], r2 * d[1], r2 * d[2]], lam).unwrap().norm();
        let expected = (-li * dr).exp() * r1 / r2;
        prop_assert!((b / a / expected - 1.0).abs() <= 0.05);
    }

    #[test]
    fn plane_wave_superposition_is_force_free(
        lam in spectral(),
        k1 in direction(),
        k2 in direction(),
        a in (-1.0..1.0f64, -1.0..1.0f64),
    ) {
        let g = interior_eval_grid(&build_domain(Shape::unit_ball(), 8).unwrap(), 24, 1).unwrap();
        let sum = Superposition(vec![
            Box::new(beltrami_plane_wave(lam, k1).unwrap()),
            Box::new(beltrami_plane_wave(lam, k2).unwrap().with_amplitude(C64::new(a.0, a.1))),
        ]);
        let r = verify_forcefree(&sample(&sum, &g), lam, 0.05).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn flux_identity_of_beltrami_data(lam in spectral(), k in direction()) {
        let mesh = make_sphere_mesh(1.0, 2).unwrap();
        let (psi0, _) = trace_densities(&beltrami_plane_wave(lam, k).unwrap(), &mesh);
        prop_assert!(flux_identity_defect(&psi0, lam, &mesh) <= 0.05);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn decomposition_is_exact(lam in spectral(), c in prop::array::uniform6(-2.0..2.0f64)) {
        let d = build_domain(Shape::unit_ball(), 8).unwrap();
        let g = interior_eval_grid(&d, 8, 1).unwrap();
        let w = sample_on_domain(&trig_field(c), &d);
        for sign in [Sign::Plus, Sign::Minus] {
            let t = teodorescu_t_signed(&d, &w, lam, sign, &g).unwrap();
            let sum = t0(&d, &w, lam, sign, &g).unwrap()
                .add(&t1(&d, &w.sc_part(), lam, &g).unwrap()).unwrap()
                .add(&t2(&d, &w.vec_part(), lam, sign, &g).unwrap()).unwrap();
            prop_assert!(rel(&sum, &t) <= 1e-12);
        }
    }

    #[test]
    fn right_inverse_is_linear(
        lam in spectral(),
        a in (-2.0..2.0f64, -2.0..2.0f64),
        b in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let d = build_domain(Shape::unit_ball(), 12).unwrap();
        let g = interior_eval_grid(&d, 12, 2).unwrap();
        let (a, b) = (C64::new(a.0, a.1), C64::new(b.0, b.1));
        let g1 = || FnField::vector(|x| CVec3::from_real([x[1].cos(), x[0] * x[2], x[2].sin()]));
        let g2 = || FnField::vector(|x| CVec3::new(C64::new(0.0, x[0]), C64::new(x[1] * x[1], 0.0), C64::new(1.0, x[2])));
        let combo = FnField::vector(move |x| {
            use curl_lambda::Field;
            g1().eval(x).vec().scale(a) + g2().eval(x).vec().scale(b)
        });
        let lhs = r_lambda(&d, &combo, lam, &g).unwrap();
        let rhs = r_lambda(&d, &g1(), lam, &g).unwrap()
            .lin_comb(a, &r_lambda(&d, &g2(), lam, &g).unwrap(), b).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().norm_l2() <= 1e-12 * rhs.norm_l2().max(1e-300));
    }

    #[test]
    fn conjugate_defined_up_to_force_free_fields(lam in spectral(), k in direction(), phase in 0.0..6.0f64, axis in 0usize..3) {
        let g = interior_eval_grid(&build_domain(Shape::unit_ball(), 8).unwrap(), 24, 1).unwrap();
        let w0 = FnField::scalar(move |x| (curl_lambda::quaternion::I * lam * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2])).exp());
        let (wv, _) = conjugate_from_scalar(&w0, lam, &g, ConjugateOptions::default()).unwrap();
        let u = beltrami_shear(lam, axis, phase).unwrap();
        let set = wv.point_set();
        let (s0, su) = (sample(&w0, &set), sample(&u, &set));
        let values = (0..set.len())
            .map(|i| Biquaternion::embed(s0.values[i].w0, wv.values[i].vec() + su.values[i].vec()))
            .collect();
        let w = FieldSample::new(set.points.clone(), values, FieldKind::Full, set.grid);
        let r = dirac_shift_fd(&w, lam).unwrap();
        let (_, ww) = align(&r, &w).unwrap();
        prop_assert!(r.norm_l2() / ww.norm_l2() <= 0.05);
    }

    #[test]
    fn maxwell_gauge_difference_is_homogeneous(phase in 0.0..6.0f64, axis in 0usize..3, k in direction()) {
        let d = build_domain(Shape::unit_ball(), 16).unwrap();
        let g = interior_eval_grid(&d, 16, 2).unwrap();
        let j = FnField::vector(|x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            CVec3::from_real([1.0, x[2], x[0]]).scale_real((1.0 - r2).max(0.0).powi(3))
        });
        let m = MediumParams::achiral(1.0, ONE, C64::new(4.0, 0.0)).unwrap();
        let base = solve_achiral(&d, SourceData::new(&j), &m, None, None, &g, 0.05).unwrap();
        let u = beltrami_shear(m.lambda, axis, phase).unwrap();
        let v = beltrami_plane_wave(-m.lambda, k).unwrap();
        let f = solve_achiral(&d, SourceData::new(&j), &m, Some(&u), Some(&v), &g, 0.05).unwrap();
        let diff = MaxwellFields { e: f.e.sub(&base.e).unwrap(), h: f.h.sub(&base.h).unwrap() };
        let (r1, r2) = homogeneous_residuals(&diff, &m).unwrap();
        prop_assert!(r1.max(r2) <= 0.07, "{r1} {r2}");
    }
}
