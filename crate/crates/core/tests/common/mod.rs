#![allow(dead_code)]

use memodyn::circuits::{CanonicalChuaParams, CircuitModel, MmoParams, RegularChuaParams};
use memodyn::{integrate, Model, Options, Poly, State, Traj};
use nalgebra::{DMatrix, DVector};

/// Augmented linear system for a constant memductance `g = c`, written out
/// by hand. Unknowns: x, y, z, w, I_w, I_gG, I_gGt, I_y, I_z and a constant
/// 1 carrying the bias.
pub fn linear_system(model: &Model) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(10, 10);
    let c = model.g().coefficients().first().copied().unwrap_or(0.0);
    match model {
        CircuitModel::RegularChua(p) => {
            let (k, al) = (p.k, p.alpha);
            a[(0, 0)] = k * al * (p.xi - 1.0 - c);
            a[(0, 1)] = k * al;
            a[(1, 0)] = k;
            a[(1, 1)] = -k;
            a[(1, 2)] = k;
            a[(2, 1)] = -k * p.beta;
            a[(2, 2)] = -k * p.gamma;
            a[(3, 0)] = k;
        }
        CircuitModel::CanonicalChua(p) => {
            let (k, al) = (p.k, p.alpha);
            a[(0, 0)] = -k * al * c;
            a[(0, 1)] = k * al;
            a[(1, 0)] = -k;
            a[(1, 2)] = k;
            a[(2, 1)] = -k * p.beta;
            a[(2, 2)] = k * p.gamma;
            a[(3, 0)] = k;
        }
        CircuitModel::Mmo(p) => {
            let s = p.s_c;
            a[(0, 0)] = -s * c / p.epsilon;
            a[(0, 1)] = -s / (p.epsilon * p.eta);
            a[(1, 0)] = s * p.alpha * p.eta;
            a[(1, 1)] = -s * p.alpha * p.k;
            a[(1, 2)] = -s * p.alpha;
            a[(1, 9)] = s * p.alpha * p.a_s;
            a[(2, 1)] = -s * p.beta;
            a[(3, 0)] = s * p.eta;
        }
    }
    // memory integrals
    a[(4, 3)] = 1.0;
    for j in 0..10 {
        a[(5, j)] = c * a[(3, j)];
    }
    a[(6, 5)] = 1.0;
    a[(7, 1)] = 1.0;
    a[(8, 2)] = 1.0;
    a
}

pub fn expm_solution(model: &Model, core0: [f64; 4], t: f64) -> [f64; 9] {
    let a = linear_system(model) * t;
    let mut u0 = DVector::zeros(10);
    for i in 0..4 {
        u0[i] = core0[i];
    }
    u0[9] = 1.0;
    let u = a.exp() * u0;
    std::array::from_fn(|i| u[i])
}

/// Characteristic polynomial `det(λI - A)` by Faddeev-LeVerrier, highest
/// power first.
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        m = a * &m + &id * c_prev;
        let am = a * &m;
        let c = -am.trace() / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    coeffs
}

pub fn core_block(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.view((0, 0), (4, 4)).into_owned()
}

pub fn adaptive(t1: f64, dt: f64) -> Options {
    Options::adaptive(0.0, t1, dt, 1e-10, 1e-12)
}

pub fn run(model: &Model, core0: [f64; 4], t1: f64, dt: f64) -> Traj {
    integrate(model, State::from_core(core0), &adaptive(t1, dt)).expect("integration succeeds")
}

pub fn regular_chua() -> Model {
    Model::RegularChua(RegularChuaParams::demo())
}

pub fn canonical_chua() -> Model {
    Model::CanonicalChua(CanonicalChuaParams::demo())
}

pub fn mmo() -> Model {
    Model::Mmo(MmoParams::demo())
}

pub fn mmo_unbiased() -> Model {
    Model::Mmo(MmoParams { a_s: 0.0, ..MmoParams::demo() })
}

pub fn mixed_mode() -> Model {
    Model::Mmo(MmoParams::mixed_mode())
}

/// Linear MMO system with eigenvalues `{0, -1/2, ±i/2}`: every orbit tends
/// to a cycle of period `4π`.
pub fn mmo_center() -> Model {
    Model::Mmo(MmoParams {
        epsilon: 1.0,
        alpha: 1.0,
        k: 1.0,
        beta: 0.25,
        eta: 2.0,
        s_c: 1.0,
        a_s: 0.0,
        g: Poly::constant(-0.5),
    })
}

pub fn with_constant_g(model: &Model, c: f64) -> Model {
    let mut m = model.clone();
    *m.g_mut() = Poly::constant(c);
    m
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
