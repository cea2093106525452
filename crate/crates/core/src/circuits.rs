//! Vector fields of the three oscillator topologies, augmented with the
//! running memory integrals that the Newtonian force laws consume.
//!
//! The two MMO circuits (series R-L with memductor, and its dual parallel
//! G-C with memristor) share one model: [`MmoParams`] covers both, with
//! `epsilon` standing for `C1` or `L1`, `alpha` for `1/L` or `1/C`, `K` for
//! `R` or `G`, and `beta` for `gamma/C2` or `gamma/L2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memelement::Polynomial;
use crate::scalar::{Ring, Scalar};

/// Number of integrated states: four circuit variables plus five integrals.
pub const STATE_DIM: usize = 9;

/// Parameters of the singularly perturbed MMO system. The stored fast
/// variable is the scaled `x̄ = x / eta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmoParams<T> {
    pub epsilon: T,
    pub alpha: T,
    #[serde(rename = "K")]
    pub k: T,
    pub beta: T,
    pub eta: T,
    pub s_c: T,
    /// Bias source, sign included.
    pub a_s: T,
    pub g: Polynomial<T>,
}

impl<T: Scalar> MmoParams<T> {
    /// Runnable starting point for sweeps; not a calibrated regime.
    pub fn demo() -> Self {
        Self {
            epsilon: T::lit(0.01),
            alpha: T::one(),
            k: T::one(),
            beta: T::one(),
            eta: T::lit(10.0),
            s_c: T::one(),
            a_s: T::lit(0.01),
            g: Polynomial::quadratic_memductance(T::lit(-0.1), T::lit(0.1)),
        }
    }

    /// Swept regime with a 1 large, 2 small oscillation pattern from rest;
    /// period about 10.65.
    pub fn mixed_mode() -> Self {
        Self {
            epsilon: T::lit(0.01),
            alpha: T::lit(0.323),
            k: T::lit(2.895),
            beta: T::lit(0.481),
            eta: T::lit(10.0),
            s_c: T::one(),
            a_s: T::lit(-0.02),
            g: Polynomial::quadratic_memductance(T::lit(-0.632), T::lit(0.1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) {
            return Err(Error::SingularParameter);
        }
        if !(self.s_c > T::zero()) {
            return Err(Error::InvalidParameter("s_c must be positive".into()));
        }
        if !(self.eta >= T::one()) {
            return Err(Error::InvalidParameter("eta must be at least 1".into()));
        }
        finite_all(&[self.alpha, self.k, self.beta, self.a_s], &self.g)
    }
}

/// Regular Chua circuit with a flux-controlled memristor and lossy inductor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularChuaParams<T> {
    pub k: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub xi: T,
    pub g: Polynomial<T>,
}

impl<T: Scalar> RegularChuaParams<T> {
    pub fn demo() -> Self {
        Self {
            k: T::one(),
            alpha: T::lit(10.0),
            beta: T::lit(13.0),
            gamma: T::lit(0.35),
            xi: T::lit(2.5),
            g: Polynomial::quadratic_memductance(T::lit(0.3), T::lit(0.8)),
        }
    }

    /// `h(w) = xi - 1 - g(w)`.
    pub fn h(&self) -> Polynomial<T> {
        let mut c: Vec<T> = self.g.coefficients().iter().map(|&a| -a).collect();
        if c.is_empty() {
            c.push(T::zero());
        }
        c[0] += self.xi - T::one();
        Polynomial::new(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > T::zero()) {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        finite_all(&[self.alpha, self.beta, self.gamma, self.xi], &self.g)
    }
}

/// Canonical Chua circuit with a flux-controlled memristor. `gamma` is the
/// gain of the negative conductance across `C2`: `z' = k (gamma z - beta y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalChuaParams<T> {
    pub k: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub g: Polynomial<T>,
}

impl<T: Scalar> CanonicalChuaParams<T> {
    pub fn demo() -> Self {
        Self {
            k: T::one(),
            alpha: T::one(),
            beta: T::one(),
            gamma: T::lit(0.5),
            g: Polynomial::quadratic_memductance(T::lit(0.2), T::lit(0.1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > T::zero()) {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        finite_all(&[self.alpha, self.beta, self.gamma], &self.g)
    }
}

fn finite_all<T: Scalar>(values: &[T], g: &Polynomial<T>) -> Result<()> {
    if values.iter().chain(g.coefficients()).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("parameters must be finite".into()))
    }
}

/// Circuit variables plus the memory integrals, all integrated together.
///
/// `x` is the scaled `x̄` for the MMO model (see [`CircuitModel::physical_x`]).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentedState<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub w: T,
    /// `∫ w dt`
    #[serde(rename = "I_w")]
    pub i_w: T,
    /// `∫ g(w) dw`, integrated as `g(w) w'`.
    #[serde(rename = "I_gG")]
    pub i_gg: T,
    /// `∫∫ g(w) dw dt`
    #[serde(rename = "I_gGt")]
    pub i_ggt: T,
    /// `∫ y dt`
    #[serde(rename = "I_y")]
    pub i_y: T,
    /// `∫ z dt`
    #[serde(rename = "I_z")]
    pub i_z: T,
}

impl<T: Scalar> AugmentedState<T> {
    /// Circuit state with every memory integral at zero.
    pub fn from_core([x, y, z, w]: [T; 4]) -> Self {
        Self {
            x,
            y,
            z,
            w,
            ..Self::zero()
        }
    }

    pub fn zero() -> Self {
        Self::from_array([T::zero(); STATE_DIM])
    }

    pub fn core(&self) -> [T; 4] {
        [self.x, self.y, self.z, self.w]
    }

    pub fn to_array(&self) -> [T; STATE_DIM] {
        [
            self.x, self.y, self.z, self.w, self.i_w, self.i_gg, self.i_ggt, self.i_y, self.i_z,
        ]
    }

    pub fn from_array(a: [T; STATE_DIM]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            z: a[2],
            w: a[3],
            i_w: a[4],
            i_gg: a[5],
            i_ggt: a[6],
            i_y: a[7],
            i_z: a[8],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// One of the three supported topologies together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "snake_case")]
pub enum CircuitModel<T> {
    RegularChua(RegularChuaParams<T>),
    CanonicalChua(CanonicalChuaParams<T>),
    Mmo(MmoParams<T>),
}

impl<T: Scalar> CircuitModel<T> {
    pub fn name(&self) -> &'static str {
        match self {
            CircuitModel::RegularChua(_) => "regular_chua",
            CircuitModel::CanonicalChua(_) => "canonical_chua",
            CircuitModel::Mmo(_) => "mmo",
        }
    }

    pub fn g(&self) -> &Polynomial<T> {
        match self {
            CircuitModel::RegularChua(p) => &p.g,
            CircuitModel::CanonicalChua(p) => &p.g,
            CircuitModel::Mmo(p) => &p.g,
        }
    }

    pub fn g_mut(&mut self) -> &mut Polynomial<T> {
        match self {
            CircuitModel::RegularChua(p) => &mut p.g,
            CircuitModel::CanonicalChua(p) => &mut p.g,
            CircuitModel::Mmo(p) => &mut p.g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CircuitModel::RegularChua(p) => p.validate(),
            CircuitModel::CanonicalChua(p) => p.validate(),
            CircuitModel::Mmo(p) => p.validate(),
        }
    }

    /// Time derivative of the four circuit variables, over any ring.
    pub fn core_field<V: Ring<T>>(&self, [x, y, z, w]: [V; 4]) -> [V; 4] {
        match self {
            CircuitModel::RegularChua(p) => {
                let gx = p.g.eval_in(w) * x;
                [
                    (y + x.scale(p.xi - T::one()) - gx).scale(p.k * p.alpha),
                    (x - y + z).scale(p.k),
                    (y.scale(p.beta) + z.scale(p.gamma)).scale(-p.k),
                    x.scale(p.k),
                ]
            }
            CircuitModel::CanonicalChua(p) => {
                let gx = p.g.eval_in(w) * x;
                [
                    (y - gx).scale(p.k * p.alpha),
                    (z - x).scale(p.k),
                    (z.scale(p.gamma) - y.scale(p.beta)).scale(p.k),
                    x.scale(p.k),
                ]
            }
            CircuitModel::Mmo(p) => {
                let gx = p.g.eval_in(w) * x;
                [
                    (-y.scale(p.eta.recip()) - gx).scale(p.s_c / p.epsilon),
                    (x.scale(p.eta) - y.scale(p.k) - z + V::constant(p.a_s)).scale(p.s_c * p.alpha),
                    y.scale(-p.s_c * p.beta),
                    x.scale(p.s_c * p.eta),
                ]
            }
        }
    }

    /// Rate of the memristor state, `w'`. This is the element's input signal.
    pub fn w_rate(&self, s: &AugmentedState<T>) -> T {
        match self {
            CircuitModel::RegularChua(p) => p.k * s.x,
            CircuitModel::CanonicalChua(p) => p.k * s.x,
            CircuitModel::Mmo(p) => p.s_c * p.eta * s.x,
        }
    }

    /// Unscaled fast variable: `eta * x̄` for the MMO model, `x` otherwise.
    pub fn physical_x(&self, s: &AugmentedState<T>) -> T {
        match self {
            CircuitModel::Mmo(p) => p.eta * s.x,
            _ => s.x,
        }
    }

    /// Full augmented derivative. Parameters are assumed validated.
    pub fn derivative(&self, _t: T, s: &AugmentedState<T>) -> AugmentedState<T> {
        let [dx, dy, dz, dw] = self.core_field(s.core());
        AugmentedState {
            x: dx,
            y: dy,
            z: dz,
            w: dw,
            i_w: s.w,
            i_gg: self.g().eval(s.w) * dw,
            i_ggt: s.i_gg,
            i_y: s.y,
            i_z: s.z,
        }
    }
}

pub fn rhs_regular_chua<T: Scalar>(
    t: T,
    s: &AugmentedState<T>,
    p: &RegularChuaParams<T>,
) -> AugmentedState<T> {
    CircuitModel::RegularChua(p.clone()).derivative(t, s)
}

pub fn rhs_canonical_chua<T: Scalar>(
    t: T,
    s: &AugmentedState<T>,
    p: &CanonicalChuaParams<T>,
) -> AugmentedState<T> {
    CircuitModel::CanonicalChua(p.clone()).derivative(t, s)
}

pub fn rhs_mmo<T: Scalar>(t: T, s: &AugmentedState<T>, p: &MmoParams<T>) -> Result<AugmentedState<T>> {
    if !(p.epsilon > T::zero()) {
        return Err(Error::SingularParameter);
    }
    Ok(CircuitModel::Mmo(p.clone()).derivative(t, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng) -> AugmentedState<f64> {
        let mut a = [0.0; STATE_DIM];
        for v in a.iter_mut() {
            *v = rng.gen_range(-2.0..2.0);
        }
        AugmentedState::from_array(a)
    }

    #[test]
    fn origin_is_equilibrium_for_all_models() {
        let zero = AugmentedState::zero();
        let mut mmo = MmoParams::<f64>::demo();
        mmo.a_s = 0.0;
        assert_eq!(rhs_regular_chua(0.0, &zero, &RegularChuaParams::demo()), zero);
        assert_eq!(rhs_canonical_chua(0.0, &zero, &CanonicalChuaParams::demo()), zero);
        assert_eq!(rhs_mmo(0.0, &zero, &mmo).unwrap(), zero);
    }

    #[test]
    fn regular_chua_collapses_with_vanishing_h() {
        let p = RegularChuaParams { k: 2.0, alpha: 3.0, beta: 1.0, gamma: 0.5, xi: 1.0, g: Polynomial::new(vec![0.0]) };
        let s = AugmentedState::from_core([0.7, -0.4, 0.2, 1.1]);
        let d = rhs_regular_chua(0.0, &s, &p);
        assert_eq!(d.x, 2.0 * 3.0 * -0.4);
        assert_eq!(p.h().coefficients(), &[0.0]);
    }

    #[test]
    fn integral_states_follow_their_integrands() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let models = [
            CircuitModel::RegularChua(RegularChuaParams::demo()),
            CircuitModel::CanonicalChua(CanonicalChuaParams::demo()),
            CircuitModel::Mmo(MmoParams::demo()),
        ];
        for m in &models {
            for _ in 0..20 {
                let s = random_state(&mut rng);
                let d = m.derivative(0.0, &s);
                assert_eq!(d.i_w, s.w);
                assert_eq!(d.i_ggt, s.i_gg);
                assert_eq!(d.i_y, s.y);
                assert_eq!(d.i_z, s.z);
                assert_eq!(d.i_gg, m.g().eval(s.w) * m.w_rate(&s));
            }
        }
    }

    #[test]
    fn canonical_chua_direct_substitution() {
        let c = 0.75;
        let p = CanonicalChuaParams { k: 2.0, alpha: 3.0, beta: 1.5, gamma: 0.4, g: Polynomial::constant(c) };
        let s = AugmentedState::from_core([1.0, 0.0, 0.0, 0.0]);
        let d = rhs_canonical_chua(0.0, &s, &p);
        assert_eq!(d.x, -2.0 * 3.0 * c);
        assert_eq!(d.y, -2.0);
        assert_eq!(d.z, 0.0);
        assert_eq!(d.w, 2.0);
        assert_eq!(d.i_gg, c * 2.0 * 1.0);
    }

    #[test]
    fn mmo_bias_drives_only_y() {
        let p = MmoParams::<f64> { a_s: 0.02, ..MmoParams::demo() };
        let d = rhs_mmo(0.0, &AugmentedState::zero(), &p).unwrap();
        assert_eq!(d.y, p.s_c * p.alpha * p.a_s);
        assert_eq!([d.x, d.z, d.w], [0.0; 3]);
    }

    #[test]
    fn mmo_w_rate_is_scaled_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = MmoParams::<f64> { s_c: 1.7, eta: 4.0, ..MmoParams::demo() };
        for _ in 0..10 {
            let s = random_state(&mut rng);
            let d = rhs_mmo(0.0, &s, &p).unwrap();
            assert_eq!(d.w, p.s_c * p.eta * s.x);
        }
    }

    #[test]
    fn mmo_rejects_zero_epsilon() {
        let p = MmoParams::<f64> { epsilon: 0.0, ..MmoParams::demo() };
        let err = rhs_mmo(0.0, &AugmentedState::zero(), &p).unwrap_err();
        assert_eq!(err.to_string(), "singular parameter must be positive");
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_json_keys() {
        let m = CircuitModel::Mmo(MmoParams::<f64>::demo());
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["model"], "mmo");
        for key in ["epsilon", "alpha", "K", "beta", "eta", "s_c", "a_s", "g"] {
            assert!(v["params"].get(key).is_some(), "missing {key}");
        }
        let back: CircuitModel<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
        let s = serde_json::to_value(AugmentedState::<f64>::zero()).unwrap();
        assert!(s.get("I_gGt").is_some());
    }
}
