//! Newtonian force laws with memory and the fourth-order (jounce)
//! equations, checked as residuals along integrated trajectories.
//!
//! All laws use `m = 1`. The memory integrals carried by
//! [`AugmentedState`] start at zero, so every second-order law holds up to
//! an affine term `c0 + c1 (t - t0)` fixed by the initial state; [`anchor`]
//! returns those constants in closed form. The jounce equations need no
//! anchor.

use serde::Serialize;

use crate::circuits::{AugmentedState, CanonicalChuaParams, CircuitModel, MmoParams, RegularChuaParams};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::jet::{taylor_expand, Jet};
use crate::scalar::Scalar;

/// Highest derivative order produced by [`derivative_chain`].
pub const CHAIN_ORDER: usize = 4;

/// Default pass threshold for normalized force and jounce residuals.
pub const RESIDUAL_TOL: f64 = 1e-5;
/// Default pass threshold for the reconstructions of `w`.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

/// Time derivatives of orders `0..=4` of each circuit variable, exactly as
/// implied by the vector field. For the MMO model `x` is the stored `x̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeChain<T> {
    pub x: [T; CHAIN_ORDER + 1],
    pub y: [T; CHAIN_ORDER + 1],
    pub z: [T; CHAIN_ORDER + 1],
    pub w: [T; CHAIN_ORDER + 1],
}

pub fn derivative_chain<T: Scalar>(model: &CircuitModel<T>, s: &AugmentedState<T>) -> DerivativeChain<T> {
    let jets: [Jet<T, { CHAIN_ORDER + 1 }>; 4] = taylor_expand(s.core(), |u| model.core_field(u));
    let d = |j: &Jet<T, { CHAIN_ORDER + 1 }>| core::array::from_fn(|k| j.derivative(k));
    DerivativeChain {
        x: d(&jets[0]),
        y: d(&jets[1]),
        z: d(&jets[2]),
        w: d(&jets[3]),
    }
}

/// Inputs of a force law at one instant. `u` is the variable the law is
/// about (`w`, `x`, `y` or `z`); `tau` is time since the start of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceContext<T> {
    pub tau: T,
    pub u: T,
    pub u_dot: T,
    pub w: T,
    pub memory: AugmentedState<T>,
}

/// `F/m` for `w` in the regular Chua circuit.
pub fn force_regular_chua<T: Scalar>(ctx: &ForceContext<T>, p: &RegularChuaParams<T>) -> T {
    let (k, a, b, c) = (p.k, p.alpha, p.beta, p.gamma);
    let m = &ctx.memory;
    let xi1 = p.xi - T::one();
    let h = p.h().eval(ctx.w);
    let int_h = xi1 * ctx.w - m.i_gg;
    let int_int_h = xi1 * m.i_w - m.i_ggt;
    k * (a * h - T::one() - c) * ctx.u_dot
        + k * k * (a - b - c) * ctx.w
        + a * k * k * k * c * m.i_w
        + a * k * k * (T::one() + c) * int_h
        + a * k * k * k * (b + c) * int_int_h
}

/// `F/m` for `w` in the canonical Chua circuit.
pub fn force_canonical_chua<T: Scalar>(ctx: &ForceContext<T>, p: &CanonicalChuaParams<T>) -> T {
    let (k, a, b, c) = (p.k, p.alpha, p.beta, p.gamma);
    let m = &ctx.memory;
    let g = p.g.eval(ctx.w);
    -k * k * (a + b) * ctx.w + k * (c - a * g) * ctx.u_dot + k * k * k * c * a * m.i_w + k * k * c * a * m.i_gg
        - k * k * k * a * b * m.i_ggt
}

/// `F/m` for `w` in the MMO circuit (explicit in time through the bias).
pub fn force_mmo_w<T: Scalar>(ctx: &ForceContext<T>, p: &MmoParams<T>) -> T {
    let (e, a, kk, b, s) = (p.epsilon, p.alpha, p.k, p.beta, p.s_c);
    let m = &ctx.memory;
    let g = p.g.eval(ctx.w);
    -(s / e)
        * ((g + a * kk * e) * ctx.u_dot
            + s * a * (T::one() - b * e) * ctx.w
            + s * s * a * p.a_s * ctx.tau
            + s * a * kk * m.i_gg
            - s * s * a * b * m.i_ggt)
}

/// `F/m` for the physical fast variable `x = eta x̄` of the MMO circuit.
pub fn force_mmo_x<T: Scalar>(ctx: &ForceContext<T>, p: &MmoParams<T>) -> T {
    let (e, a, kk, b, s) = (p.epsilon, p.alpha, p.k, p.beta, p.s_c);
    let g = p.g.eval(ctx.w);
    let gp = p.g.derivative().eval(ctx.w);
    let x = ctx.u;
    -(s / e)
        * (s * a * p.a_s - s * a * b * ctx.memory.i_gg
            + (s * a - s * a * b * e + s * a * kk * g + s * gp * x) * x
            + (a * kk * e + g) * ctx.u_dot)
}

/// `F/m` for `y` of the MMO circuit. `memory.i_y` must hold the anchored
/// `∫y dt`, see [`anchored_int_y`].
pub fn force_mmo_y<T: Scalar>(ctx: &ForceContext<T>, p: &MmoParams<T>) -> T {
    let (e, a, kk, b, s) = (p.epsilon, p.alpha, p.k, p.beta, p.s_c);
    let g = p.g.eval(ctx.w);
    s * a
        * (-(kk + g / (e * a)) * ctx.u_dot + s * (b - T::one() / e - g * kk / e) * ctx.u + g * s * p.a_s / e
            + g * s * s * b / e * ctx.memory.i_y)
}

/// `F/m` for `z` of the MMO circuit.
pub fn force_mmo_z<T: Scalar>(ctx: &ForceContext<T>, p: &MmoParams<T>) -> T {
    let (e, a, kk, b, s) = (p.epsilon, p.alpha, p.k, p.beta, p.s_c);
    -s * s * a * b * (kk * ctx.u_dot / (s * b) + (T::one() / (e * b) - T::one()) * ctx.u + p.a_s - ctx.memory.i_gg / e)
}

/// `∫y dt` with the integration constant that makes the `y` law exact:
/// `I_y - z0 / (s_c beta)`.
pub fn anchored_int_y<T: Scalar>(p: &MmoParams<T>, i_y: T, z0: T) -> T {
    i_y - z0 / (p.s_c * p.beta)
}

/// The verifiable statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    RegularChuaForce,
    CanonicalChuaForce,
    CanonicalJounce,
    MmoForceW,
    MmoForceX,
    MmoForceY,
    MmoForceZ,
    MmoJounce,
    MmoWFromX,
    MmoWFromY,
    MmoWFromZ,
}

impl Claim {
    pub fn id(self) -> &'static str {
        match self {
            Claim::RegularChuaForce => "regular_chua_force",
            Claim::CanonicalChuaForce => "canonical_chua_force",
            Claim::CanonicalJounce => "canonical_jounce",
            Claim::MmoForceW => "mmo_force_w",
            Claim::MmoForceX => "mmo_force_x",
            Claim::MmoForceY => "mmo_force_y",
            Claim::MmoForceZ => "mmo_force_z",
            Claim::MmoJounce => "mmo_jounce",
            Claim::MmoWFromX => "mmo_w_from_x",
            Claim::MmoWFromY => "mmo_w_from_y",
            Claim::MmoWFromZ => "mmo_w_from_z",
        }
    }

    /// Claims that apply to trajectories of `model`.
    pub fn for_model<T>(model: &CircuitModel<T>) -> &'static [Claim] {
        match model {
            CircuitModel::RegularChua(_) => &[Claim::RegularChuaForce],
            CircuitModel::CanonicalChua(_) => &[Claim::CanonicalChuaForce, Claim::CanonicalJounce],
            CircuitModel::Mmo(_) => &[
                Claim::MmoForceW,
                Claim::MmoForceX,
                Claim::MmoForceY,
                Claim::MmoForceZ,
                Claim::MmoJounce,
                Claim::MmoWFromX,
                Claim::MmoWFromY,
                Claim::MmoWFromZ,
            ],
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Claim::MmoWFromX | Claim::MmoWFromY | Claim::MmoWFromZ => RECONSTRUCTION_TOL,
            _ => RESIDUAL_TOL,
        }
    }
}

/// Affine correction `c0 + c1 * tau` of a force law.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Anchor<T> {
    pub c0: T,
    pub c1: T,
}

impl<T: Scalar> Anchor<T> {
    pub fn at(&self, tau: T) -> T {
        self.c0 + self.c1 * tau
    }
}

/// Integration constants of a second-order law for a run starting at `s0`
/// (memory integrals zero). Zero for the jounce and reconstruction claims.
pub fn anchor<T: Scalar>(claim: Claim, model: &CircuitModel<T>, s0: &AugmentedState<T>) -> Anchor<T> {
    let zero = Anchor { c0: T::zero(), c1: T::zero() };
    let [x, y, z, w] = s0.core();
    match (claim, model) {
        (Claim::RegularChuaForce, CircuitModel::RegularChua(p)) => {
            let (k, a, b, c, xi) = (p.k, p.alpha, p.beta, p.gamma, p.xi);
            Anchor {
                c0: -k * k * (w * a * c * xi - w * a * c + w * a * xi - w * b - w * c - x * c - x - y * a),
                c1: -k * k * k * (w * a * b * xi - w * a * b + w * a * c * xi - x * b - x * c - y * a * c - z * a),
            }
        }
        (Claim::CanonicalChuaForce, CircuitModel::CanonicalChua(p)) => {
            let (k, a, b, c) = (p.k, p.alpha, p.beta, p.gamma);
            Anchor {
                c0: k * k * (w * a + w * b - x * c + y * a),
                c1: -k * k * k * (w * a * c - x * b + y * a * c - z * a),
            }
        }
        (Claim::MmoForceW, CircuitModel::Mmo(p)) => {
            let (e, a, kk, b, s) = (p.epsilon, p.alpha, p.k, p.beta, p.s_c);
            let x = p.eta * x;
            Anchor {
                c0: s * s * (kk * x * a * e - w * a * b * e + w * a - y) / e,
                c1: -a * s * s * s * (x * b * e - z) / e,
            }
        }
        (Claim::MmoForceX | Claim::MmoForceZ, CircuitModel::Mmo(p)) => {
            let (e, a, b, s) = (p.epsilon, p.alpha, p.beta, p.s_c);
            let x = p.eta * x;
            Anchor { c0: -a * s * s * (x * b * e - z) / e, c1: T::zero() }
        }
        _ => zero,
    }
}

/// Per-sample residuals of one claim along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub claim_id: &'static str,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    pub rms_residual: f64,
    /// Scale the maximum is divided by, floored at 1.
    pub normalization: f64,
    pub normalized_max: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(claim: Claim, residuals: Vec<f64>, scale: f64) -> Self {
        let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let rms_residual = if residuals.is_empty() {
            0.0
        } else {
            (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt()
        };
        let normalization = scale.max(1.0);
        let normalized_max = max_abs / normalization;
        Self {
            claim_id: claim.id(),
            residuals,
            max_abs,
            rms_residual,
            normalization,
            normalized_max,
            pass: normalized_max.is_finite() && normalized_max <= claim.tolerance(),
        }
    }
}

fn mismatch(claim: Claim) -> Error {
    Error::InvalidParameter(format!("claim {} does not apply to this model", claim.id()))
}

fn mmo<T>(claim: Claim, traj: &Trajectory<T>) -> Result<&MmoParams<T>> {
    match &traj.model {
        CircuitModel::Mmo(p) => Ok(p),
        _ => Err(mismatch(claim)),
    }
}

fn start<T: Scalar>(traj: &Trajectory<T>) -> Result<(T, AugmentedState<T>)> {
    if traj.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    Ok((traj.times[0], traj.states[0]))
}

fn max_abs<T: Scalar>(v: impl IntoIterator<Item = T>) -> f64 {
    v.into_iter().fold(0.0f64, |m, x| m.max(x.as_f64().abs()))
}

/// Residual `u'' - F/m - anchor` of a second-order law at every sample.
pub fn force_residual<T: Scalar>(traj: &Trajectory<T>, claim: Claim) -> Result<ResidualReport> {
    let (t0, s0) = start(traj)?;
    let model = &traj.model;
    let anc = anchor(claim, model, &s0);
    let mut res = Vec::with_capacity(traj.len());
    let mut scale = 0.0f64;
    for (&t, s) in traj.times.iter().zip(&traj.states) {
        let ch = derivative_chain(model, s);
        let tau = t - t0;
        let mut ctx = ForceContext { tau, u: s.w, u_dot: ch.w[1], w: s.w, memory: *s };
        let (second, force) = match (claim, model) {
            (Claim::RegularChuaForce, CircuitModel::RegularChua(p)) => (ch.w[2], force_regular_chua(&ctx, p)),
            (Claim::CanonicalChuaForce, CircuitModel::CanonicalChua(p)) => (ch.w[2], force_canonical_chua(&ctx, p)),
            (Claim::MmoForceW, CircuitModel::Mmo(p)) => (ch.w[2], force_mmo_w(&ctx, p)),
            (Claim::MmoForceX, CircuitModel::Mmo(p)) => {
                ctx.u = p.eta * ch.x[0];
                ctx.u_dot = p.eta * ch.x[1];
                (p.eta * ch.x[2], force_mmo_x(&ctx, p))
            }
            (Claim::MmoForceY, CircuitModel::Mmo(p)) => {
                ctx.u = ch.y[0];
                ctx.u_dot = ch.y[1];
                ctx.memory.i_y = anchored_int_y(p, s.i_y, s0.z);
                (ch.y[2], force_mmo_y(&ctx, p))
            }
            (Claim::MmoForceZ, CircuitModel::Mmo(p)) => {
                ctx.u = ch.z[0];
                ctx.u_dot = ch.z[1];
                (ch.z[2], force_mmo_z(&ctx, p))
            }
            _ => return Err(mismatch(claim)),
        };
        scale = scale.max(second.as_f64().abs());
        res.push((second - force - anc.at(tau)).as_f64());
    }
    Ok(ResidualReport::new(claim, res, scale))
}

/// Left-hand side of the canonical Chua jounce equation at one state.
pub fn jounce_canonical_at<T: Scalar>(p: &CanonicalChuaParams<T>, w: &[T; CHAIN_ORDER + 1]) -> T {
    let (k, a, b, c) = (p.k, p.alpha, p.beta, p.gamma);
    let g = p.g.eval(w[0]);
    let gp = p.g.derivative().eval(w[0]);
    let gpp = p.g.derivative().derivative().eval(w[0]);
    let three = T::lit(3.0);
    w[4] + k * (a * g - c) * w[3] + k * (k * a - k * c * a * g + k * b + three * a * gp * w[1]) * w[2]
        + k * k * k * a * (b * g - c) * w[1]
        - k * k * a * c * gp * w[1] * w[1]
        + k * a * gpp * w[1] * w[1] * w[1]
}

/// Left-hand side of the MMO jounce equation at one state. The bias drops
/// out, so it holds for any `a_s`.
pub fn jounce_mmo_at<T: Scalar>(p: &MmoParams<T>, w: &[T; CHAIN_ORDER + 1]) -> T {
    let (e, a, kk, b, s) = (p.epsilon, p.alpha, p.k, p.beta, p.s_c);
    let g = p.g.eval(w[0]);
    let gp = p.g.derivative().eval(w[0]);
    let gpp = p.g.derivative().derivative().eval(w[0]);
    let three = T::lit(3.0);
    e * w[4]
        + s * (a * kk * e + g) * w[3]
        + (s * s * a + s * s * a * kk * g - s * s * a * b * e + three * s * gp * w[1]) * w[2]
        - s * s * s * a * b * g * w[1]
        + s * s * a * kk * gp * w[1] * w[1]
        + s * gpp * w[1] * w[1] * w[1]
}

/// Jounce residual along a canonical Chua trajectory, normalized by the
/// largest `|w''''|`.
pub fn jounce_residual_canonical<T: Scalar>(traj: &Trajectory<T>) -> Result<ResidualReport> {
    let CircuitModel::CanonicalChua(p) = &traj.model else {
        return Err(mismatch(Claim::CanonicalJounce));
    };
    let chains: Vec<_> = traj.states.iter().map(|s| derivative_chain(&traj.model, s)).collect();
    let res = chains.iter().map(|c| jounce_canonical_at(p, &c.w).as_f64()).collect();
    Ok(ResidualReport::new(Claim::CanonicalJounce, res, max_abs(chains.iter().map(|c| c.w[4]))))
}

/// Jounce residual along an MMO trajectory, normalized by the largest
/// `|epsilon w''''|`.
pub fn jounce_residual_mmo<T: Scalar>(traj: &Trajectory<T>) -> Result<ResidualReport> {
    let p = mmo(Claim::MmoJounce, traj)?;
    let chains: Vec<_> = traj.states.iter().map(|s| derivative_chain(&traj.model, s)).collect();
    let res = chains.iter().map(|c| jounce_mmo_at(p, &c.w).as_f64()).collect();
    Ok(ResidualReport::new(Claim::MmoJounce, res, max_abs(chains.iter().map(|c| p.epsilon * c.w[4]))))
}

/// `w = s_c ∫x dt + w(t0)` with `x` the physical fast variable. The
/// integral uses the two-point Hermite rule on `x` and its first four
/// derivatives at both ends of every sample interval (exact for degree 9).
pub fn reconstruct_w_from_x<T: Scalar>(traj: &Trajectory<T>) -> Result<Vec<T>> {
    let p = mmo(Claim::MmoWFromX, traj)?;
    let (_, s0) = start(traj)?;
    let d: Vec<[T; CHAIN_ORDER + 1]> = traj
        .states
        .iter()
        .map(|s| derivative_chain(&traj.model, s).x.map(|v| p.eta * v))
        .collect();
    // weights of h^(k+1) (a_k + (-1)^k b_k)
    let c = [1.0 / 2.0, 1.0 / 9.0, 1.0 / 72.0, 1.0 / 1008.0, 1.0 / 30240.0].map(T::lit);
    let mut out = Vec::with_capacity(traj.len());
    let mut acc = T::zero();
    out.push(s0.w);
    for (k, win) in traj.times.windows(2).enumerate() {
        let h = win[1] - win[0];
        let (a, b) = (&d[k], &d[k + 1]);
        let mut hp = h;
        for j in 0..=CHAIN_ORDER {
            let end = if j % 2 == 0 { a[j] + b[j] } else { a[j] - b[j] };
            acc += c[j] * hp * end;
            hp *= h;
        }
        out.push(s0.w + p.s_c * acc);
    }
    Ok(out)
}

/// Pointwise `w` from `y` and its integrals, for a run that started at `s0`.
pub fn w_from_y_at<T: Scalar>(p: &MmoParams<T>, s: &AugmentedState<T>, tau: T, s0: &AugmentedState<T>) -> T {
    s.y / p.alpha - p.s_c * p.a_s * tau + p.s_c * p.k * s.i_y + p.s_c * s.i_z + (s0.w - s0.y / p.alpha)
}

/// Pointwise `w` from `z`, `z'` and `∫z`, for a run that started at `s0`.
pub fn w_from_z_at<T: Scalar>(p: &MmoParams<T>, s: &AugmentedState<T>, tau: T, s0: &AugmentedState<T>) -> T {
    let z_dot = -p.s_c * p.beta * s.y;
    -z_dot / (p.s_c * p.alpha * p.beta) - p.k * s.z / p.beta - p.s_c * p.a_s * tau
        + p.s_c * s.i_z
        + (s0.w + p.k * s0.z / p.beta - s0.y / p.alpha)
}

pub fn reconstruct_w_from_y<T: Scalar>(traj: &Trajectory<T>) -> Result<Vec<T>> {
    let p = mmo(Claim::MmoWFromY, traj)?;
    let (t0, s0) = start(traj)?;
    Ok(traj.times.iter().zip(&traj.states).map(|(&t, s)| w_from_y_at(p, s, t - t0, &s0)).collect())
}

pub fn reconstruct_w_from_z<T: Scalar>(traj: &Trajectory<T>) -> Result<Vec<T>> {
    let p = mmo(Claim::MmoWFromZ, traj)?;
    let (t0, s0) = start(traj)?;
    Ok(traj.times.iter().zip(&traj.states).map(|(&t, s)| w_from_z_at(p, s, t - t0, &s0)).collect())
}

/// Compares a reconstruction with the trajectory's own `w`, normalized by
/// the largest `|w|`.
pub fn reconstruction_residual<T: Scalar>(traj: &Trajectory<T>, claim: Claim) -> Result<ResidualReport> {
    let w = match claim {
        Claim::MmoWFromX => reconstruct_w_from_x(traj)?,
        Claim::MmoWFromY => reconstruct_w_from_y(traj)?,
        Claim::MmoWFromZ => reconstruct_w_from_z(traj)?,
        _ => return Err(mismatch(claim)),
    };
    let res = w.iter().zip(&traj.states).map(|(r, s)| (*r - s.w).as_f64()).collect();
    Ok(ResidualReport::new(claim, res, max_abs(traj.states.iter().map(|s| s.w))))
}

/// Evaluates one claim on a trajectory.
pub fn check_claim<T: Scalar>(traj: &Trajectory<T>, claim: Claim) -> Result<ResidualReport> {
    match claim {
        Claim::CanonicalJounce => jounce_residual_canonical(traj),
        Claim::MmoJounce => jounce_residual_mmo(traj),
        Claim::MmoWFromX | Claim::MmoWFromY | Claim::MmoWFromZ => reconstruction_residual(traj, claim),
        _ => force_residual(traj, claim),
    }
}

/// Every claim applicable to the trajectory's model.
pub fn verify_all<T: Scalar>(traj: &Trajectory<T>) -> Result<Vec<ResidualReport>> {
    Claim::for_model(&traj.model).iter().map(|&c| check_claim(traj, c)).collect()
}
