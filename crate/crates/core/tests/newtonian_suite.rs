mod common;

use common::*;
use memodyn::circuits::{CircuitModel, MmoParams};
use memodyn::newtonian::{
    check_claim, force_mmo_w, jounce_residual_mmo, verify_all, w_from_z_at, Claim, ForceContext,
};
use memodyn::{integrate, IntegratorOptions, Model, State, Trajectory};

#[test]
fn every_claim_passes_along_trajectories() {
    let cases = [
        (regular_chua(), [0.1, 0.0, 0.0, 0.0]),
        (canonical_chua(), [1.0, 0.0, 0.0, 0.0]),
        (mmo(), [0.05, 0.1, 0.0, 0.2]),
        (mmo_unbiased(), [0.05, 0.1, 0.0, 0.2]),
    ];
    for (model, start) in cases {
        let traj = run(&model, start, 20.0, 0.01);
        let reports = verify_all(&traj).unwrap();
        assert_eq!(reports.len(), Claim::for_model(&model).len());
        for r in reports {
            assert!(r.pass, "{} {}: {}", model.name(), r.claim_id, r.normalized_max);
        }
    }
}

#[test]
fn mixed_mode_claims_need_finer_samples() {
    // the w-from-x quadrature only sees the samples; relaxation spikes of
    // the mixed-mode regime are resolved at 0.005 but not at 0.01
    let coarse = run(&mixed_mode(), [0.0; 4], 20.0, 0.01);
    let r = check_claim(&coarse, Claim::MmoWFromX).unwrap();
    assert!(!r.pass && r.normalized_max < 1e-5);
    let fine = run(&mixed_mode(), [0.0; 4], 20.0, 0.005);
    for r in verify_all(&fine).unwrap() {
        assert!(r.pass, "{}: {}", r.claim_id, r.normalized_max);
    }
}

#[test]
fn smooth_regime_jounce_is_tighter() {
    let model = Model::Mmo(MmoParams { epsilon: 0.5, a_s: 0.0, ..MmoParams::demo() });
    let traj = run(&model, [0.3, -0.2, 0.1, 0.4], 20.0, 0.01);
    let r = jounce_residual_mmo(&traj).unwrap();
    assert!(r.normalized_max < 1e-7, "{}", r.normalized_max);
}

#[test]
fn zero_trajectory_has_zero_residuals() {
    for model in [regular_chua(), canonical_chua(), mmo_unbiased()] {
        let traj = run(&model, [0.0; 4], 5.0, 0.1);
        for r in verify_all(&traj).unwrap() {
            assert_eq!(r.max_abs, 0.0, "{} {}", model.name(), r.claim_id);
        }
    }
}

#[test]
fn bias_alone_drives_a_linear_ramp() {
    let p = MmoParams::<f64> { a_s: 0.03, s_c: 1.5, ..MmoParams::demo() };
    let zero = State::zero();
    for t in [0.0, 0.7, 2.0] {
        let ctx = ForceContext { tau: t, u: 0.0, u_dot: 0.0, w: 0.0, memory: zero };
        let want = -(p.s_c / p.epsilon) * (p.s_c * p.s_c * p.alpha * p.a_s * t);
        assert!((force_mmo_w(&ctx, &p) - want).abs() < 1e-15);
        assert!((w_from_z_at(&p, &zero, t, &zero) + p.s_c * p.a_s * t).abs() < 1e-15);
    }
}

#[test]
fn reconstructions_agree_with_w() {
    let traj = run(&mmo(), [0.05, 0.1, 0.0, 0.2], 20.0, 0.01);
    for claim in [Claim::MmoWFromX, Claim::MmoWFromY, Claim::MmoWFromZ] {
        let r = check_claim(&traj, claim).unwrap();
        assert!(r.normalized_max <= 1e-6, "{}: {}", r.claim_id, r.normalized_max);
    }
}

#[test]
fn claims_survive_a_csv_round_trip() {
    let traj = run(&canonical_chua(), [1.0, 0.0, 0.0, 0.0], 10.0, 0.01);
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let back = Trajectory::read_csv(buf.as_slice(), traj.model.clone()).unwrap();
    assert_eq!(verify_all(&back).unwrap(), verify_all(&traj).unwrap());
}

#[test]
fn single_precision_runs_track_double() {
    let p32 = memodyn::circuits::CanonicalChuaParams::<f32> {
        k: 1.0,
        alpha: 1.0,
        beta: 1.0,
        gamma: 0.5,
        g: Poly32::quadratic_memductance(0.2, 0.1),
    };
    let m32 = CircuitModel::CanonicalChua(p32);
    let opts = IntegratorOptions::<f32>::adaptive(0.0, 5.0, 0.05, 1e-5, 1e-7);
    let t32 = integrate(&m32, memodyn::AugmentedState::from_core([1.0f32, 0.0, 0.0, 0.0]), &opts).unwrap();
    let t64 = run(&canonical_chua(), [1.0, 0.0, 0.0, 0.0], 5.0, 0.05);
    assert_eq!(t32.len(), t64.len());
    let (a, b) = (t32.states.last().unwrap().core(), t64.states.last().unwrap().core());
    for i in 0..4 {
        assert!((a[i] as f64 - b[i]).abs() < 1e-3, "{} vs {}", a[i], b[i]);
    }
    let force = check_claim(&t32, Claim::CanonicalChuaForce).unwrap();
    assert!(force.normalized_max < 1e-3);
}

type Poly32 = memodyn::Polynomial<f32>;
