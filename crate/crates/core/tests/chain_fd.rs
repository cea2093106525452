mod common;

use common::*;
use memodyn::circuits::CircuitModel;
use memodyn::newtonian::derivative_chain;
use memodyn::{integrate, Model, Options, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// States a short hop before and after `s`, from a tight integration.
fn neighbours(model: &Model, s: State, h: f64) -> (State, State) {
    let opts = Options::adaptive(0.0, h, h, 1e-13, 1e-15);
    let fwd = integrate(model, s, &opts).unwrap();
    (reverse(model, s, &opts), *fwd.states.last().unwrap())
}

/// Backward hop: the negated core field run forward.
fn reverse(model: &Model, s: State, opts: &Options) -> State {
    use memodyn::integrator::{solve, OdeSystem};
    struct Reversed<'a>(&'a Model);
    impl OdeSystem<f64, 4> for Reversed<'_> {
        fn rhs(&self, _t: f64, y: &[f64; 4]) -> [f64; 4] {
            self.0.core_field(*y).map(|v| -v)
        }
    }
    let (_, states, _) = solve(&Reversed(model), s.core(), opts).unwrap();
    State::from_core(*states.last().unwrap())
}

#[test]
fn chain_orders_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let models = [regular_chua(), canonical_chua(), mmo(), mixed_mode()];
    for model in &models {
        for _ in 0..5 {
            let core: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
            let s = State::from_core(core);
            let h = 2e-5;
            let (b, f) = neighbours(model, s, h);
            let c = derivative_chain(model, &s);
            let (cb, cf) = (derivative_chain(model, &b), derivative_chain(model, &f));
            for k in 0..4 {
                for (lo, mid, hi) in [(cb.x, c.x, cf.x), (cb.y, c.y, cf.y), (cb.z, c.z, cf.z), (cb.w, c.w, cf.w)] {
                    let fd = (hi[k] - lo[k]) / (2.0 * h);
                    // integrator error in the two hops, divided by 2h
                    let roundoff = 1e-12 * mid[k].abs() / h;
                    assert!(
                        (fd - mid[k + 1]).abs() <= 1e-6 * mid[k + 1].abs().max(1.0) + roundoff,
                        "{} order {}: fd {fd} chain {}",
                        model.name(),
                        k + 1,
                        mid[k + 1]
                    );
                }
            }
        }
    }
}

#[test]
fn canonical_w_second_derivative_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = canonical_chua();
    let CircuitModel::CanonicalChua(p) = &model else { unreachable!() };
    for _ in 0..20 {
        let core: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let s = State::from_core(core);
        let c = derivative_chain(&model, &s);
        let (k, a) = (p.k, p.alpha);
        let closed = k * k * a * s.y - k * k * a * p.g.eval(s.w) * s.x;
        assert!((c.w[2] - closed).abs() < 1e-12);
        // and against one finite-difference step of w'
        let h = 1e-5;
        let (b, f) = neighbours(&model, s, h);
        let fd = (model.w_rate(&f) - model.w_rate(&b)) / (2.0 * h);
        assert!((fd - closed).abs() < 1e-6);
    }
}
