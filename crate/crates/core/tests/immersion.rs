mod common;

use nalgebra::{Rotation3, Unit, Vector3};
use proptest::prelude::*;

use pseudosphere::catalog;
use pseudosphere::immerse::{
    immerse, GridSpec, ImmerseError, Immersion, ImmersionConfig, Pose, SolutionSource,
};
use pseudosphere::jetexpr::Expr;
use pseudosphere::parser::parse_problem;
use pseudosphere::verify::Coefficient;

fn soliton(name: &str, n: usize, pose: Pose) -> Immersion {
    let grid = GridSpec::new((0.2, 1.0), (0.2, 1.0), n, n).unwrap();
    let mut cfg = ImmersionConfig::new(grid);
    cfg.pose = pose;
    let p = catalog::get(name).unwrap().problem;
    immerse(&p, &SolutionSource::ClosedForm(common::kink(1)), &cfg).unwrap()
}

/// Largest gap between the mesh metric and the form metric at interior nodes.
fn metric_error(run: &Immersion) -> f64 {
    let s = &run.surface;
    let spec = s.spec;
    let fine = run.field.spec;
    let mut worst: f64 = 0.0;
    for it in 1..spec.nt - 1 {
        for ix in 1..spec.nx - 1 {
            let xu = (s.positions[spec.idx(ix + 1, it)] - s.positions[spec.idx(ix - 1, it)])
                / (2.0 * spec.hx());
            let xv = (s.positions[spec.idx(ix, it + 1)] - s.positions[spec.idx(ix, it - 1)])
                / (2.0 * spec.ht());
            let k = fine.idx(2 * ix, 2 * it);
            let f = |c| run.field.coef(c, k);
            let e = f(Coefficient::F11).powi(2) + f(Coefficient::F21).powi(2);
            let ff = f(Coefficient::F11) * f(Coefficient::F12)
                + f(Coefficient::F21) * f(Coefficient::F22);
            let g = f(Coefficient::F12).powi(2) + f(Coefficient::F22).powi(2);
            worst = worst
                .max((xu.dot(&xu) - e).abs())
                .max((xu.dot(&xv) - ff).abs())
                .max((xv.dot(&xv) - g).abs());
        }
    }
    worst
}

#[test]
fn mesh_metric_matches_the_forms_to_second_order() {
    let coarse = metric_error(&soliton("sine-gordon-8", 21, Pose::default()));
    let fine = metric_error(&soliton("sine-gordon-8", 41, Pose::default()));
    let order = (coarse / fine).log2();
    assert!(order > 1.8, "{coarse:e} {fine:e} {order}");
}

#[test]
fn frames_stay_orthonormal_and_right_handed() {
    let run = soliton("sine-gordon-8", 41, Pose::default());
    assert!(run.surface.orthonormality_deviation() < 1e-8);
    assert!(run.surface.determinant_deviation() < 1e-8);
    for r in &run.surface.frames {
        let (e1, e2, n) = (
            r.row(0).transpose(),
            r.row(1).transpose(),
            r.row(2).transpose(),
        );
        assert!((e1.cross(&e2) - n).amax() < 1e-8);
    }
}

#[test]
fn path_mismatch_shrinks_only_when_gauss_codazzi_hold() {
    let clean = |n| {
        soliton("sine-gordon-8", n, Pose::default())
            .surface
            .max_compat()
    };
    let dirty = |n| {
        soliton("sine-gordon-8-perturbed-a", n, Pose::default())
            .surface
            .max_compat()
    };
    let (c1, c2) = (clean(11), clean(21));
    assert!((c1 / c2).log2() > 1.8, "{c1:e} {c2:e}");
    let (d1, d2) = (dirty(11), dirty(21));
    assert!(d2 > 0.5 * d1, "{d1:e} {d2:e}");
    assert!(d2 > 10.0 * c2);
}

#[test]
fn flat_data_with_hyperbolic_sff_fails_the_audit() {
    let src = "pss-problem v1\nname = flat\n\n[equation]\nscheme = hyperbolic\nrhs = sin(u)\n\n\
               [forms]\nf11 = 1\nf12 = 0\nf21 = 0\nf22 = 1\nf31 = 0\nf32 = 0\n\n\
               [sff]\na = 0\nb = 1\nc = 0\n";
    let p = parse_problem(src).unwrap();
    let grid = GridSpec::new((0.0, 1.0), (0.0, 1.0), 21, 21).unwrap();
    match immerse(
        &p,
        &SolutionSource::ClosedForm(Expr::zero()),
        &ImmersionConfig::new(grid),
    ) {
        Ok(run) => {
            assert!(!run.curvature.passes(1e-3), "{}", run.curvature.max_dev);
            assert!(run.surface.max_compat() > 1e-2);
        }
        Err(e) => assert!(matches!(e, ImmerseError::ResidualCap { .. }), "{e}"),
    }
}

#[test]
fn strip_crossing_the_kink_centre_is_rejected_with_a_clear_rectangle() {
    let grid = GridSpec::new((-1.0, 1.0), (-1.0, 1.0), 21, 21).unwrap();
    let p = catalog::get("sine-gordon-8").unwrap().problem;
    let err = immerse(
        &p,
        &SolutionSource::ClosedForm(common::kink(1)),
        &ImmersionConfig::new(grid),
    )
    .unwrap_err();
    match err {
        ImmerseError::DegenerateRegion {
            masked,
            clear: Some((x0, x1, t0, t1)),
            ..
        } => {
            assert!(masked > 0);
            assert!(x0 + t0 > 0.0 || x1 + t1 < 0.0, "{x0} {x1} {t0} {t1}");
        }
        other => panic!("{other}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn rigid_motion_of_the_seed_moves_the_whole_surface(
        ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0,
        angle in -3.0f64..3.0,
        sx in -5.0f64..5.0, sy in -5.0f64..5.0, sz in -5.0f64..5.0,
    ) {
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(ax, ay, az)), angle);
        let shift = Vector3::new(sx, sy, sz);
        let base = soliton("sine-gordon-8", 11, Pose::default());
        let moved = soliton("sine-gordon-8", 11, Pose::default().transformed(&rot, &shift));
        for (p, q) in base.surface.positions.iter().zip(&moved.surface.positions) {
            prop_assert!((rot * p + shift - q).amax() < 1e-12);
        }
    }
}
