//! The six mem-element kinds and the polynomial constitutive function `g(w)`.
//!
//! Every kind obeys the same pair of relations: the output is `y = g(w) x`
//! and the internal state integrates the input, `w' = x`. The kind only fixes
//! which electrical quantity plays `x`, `y` and `w`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::cumulative_integral;
use crate::scalar::{Ring, Scalar};

/// Dense polynomial `a_0 + a_1 w + ... + a_n w^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial<T> {
    coefficients: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(coefficients: Vec<T>) -> Self {
        Self { coefficients }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The memductance shape `a + 3 b w^2` used by the op-amp realization.
    pub fn quadratic_memductance(a: T, b: T) -> Self {
        Self::new(vec![a, T::zero(), T::lit(3.0) * b])
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    /// Degree ignoring trailing zeros; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.iter().rposition(|c| !c.is_zero())
    }

    pub fn eval(&self, w: T) -> T {
        self.coefficients
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * w + c)
    }

    /// Horner evaluation over any ring (plain scalars or Taylor jets).
    pub fn eval_in<V: Ring<T>>(&self, w: V) -> V {
        self.coefficients
            .iter()
            .rev()
            .fold(V::constant(T::zero()), |acc, &c| acc * w + V::constant(c))
    }

    /// Antiderivative normalized so that it vanishes at `w = 0`.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coefficients.len() + 1);
        out.push(T::zero());
        for (i, &c) in self.coefficients.iter().enumerate() {
            out.push(c / T::of_usize(i + 1));
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * T::of_usize(i))
            .collect();
        Self::new(coefficients)
    }

    /// `G(w) = ∫_0^w g(s) ds`, evaluated without building the antiderivative.
    pub fn eval_antiderivative(&self, w: T) -> T {
        self.coefficients
            .iter()
            .enumerate()
            .rev()
            .fold(T::zero(), |acc, (i, &c)| acc * w + c / T::of_usize(i + 1))
            * w
    }

    pub fn is_constant(&self) -> bool {
        self.degree().map_or(true, |d| d == 0)
    }
}

/// Controlling variable and element family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MemElementKind {
    /// Voltage-controlled memristor: y = i, x = v, w = flux.
    #[serde(rename = "VCMR")]
    Vcmr,
    /// Current-controlled memristor: y = v, x = i, w = charge.
    #[serde(rename = "CCMR")]
    Ccmr,
    /// Charge-controlled memcapacitor: y = v, x = q, w = time integral of charge.
    #[serde(rename = "QCMC")]
    Qcmc,
    /// Voltage-controlled memcapacitor: y = q, x = v, w = flux.
    #[serde(rename = "VCMC")]
    Vcmc,
    /// Flux-controlled meminductor: y = i, x = flux, w = time integral of flux.
    #[serde(rename = "FCML")]
    Fcml,
    /// Current-controlled meminductor: y = flux, x = i, w = charge.
    #[serde(rename = "CCML")]
    Ccml,
}

/// Physical quantity carried by one of the element's three signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Voltage,
    Current,
    Charge,
    Flux,
    ChargeIntegral,
    FluxIntegral,
}

impl MemElementKind {
    pub const ALL: [MemElementKind; 6] = [
        MemElementKind::Vcmr,
        MemElementKind::Ccmr,
        MemElementKind::Qcmc,
        MemElementKind::Vcmc,
        MemElementKind::Fcml,
        MemElementKind::Ccml,
    ];

    /// Roles of `(y, x, w)`.
    pub fn roles(self) -> (Quantity, Quantity, Quantity) {
        use Quantity::*;
        match self {
            MemElementKind::Vcmr => (Current, Voltage, Flux),
            MemElementKind::Ccmr => (Voltage, Current, Charge),
            MemElementKind::Qcmc => (Voltage, Charge, ChargeIntegral),
            MemElementKind::Vcmc => (Charge, Voltage, Flux),
            MemElementKind::Fcml => (Current, Flux, FluxIntegral),
            MemElementKind::Ccml => (Flux, Current, Charge),
        }
    }

    pub fn is_memristor(self) -> bool {
        matches!(self, MemElementKind::Vcmr | MemElementKind::Ccmr)
    }

    pub fn label(self) -> &'static str {
        match self {
            MemElementKind::Vcmr => "VCMR",
            MemElementKind::Ccmr => "CCMR",
            MemElementKind::Qcmc => "QCMC",
            MemElementKind::Vcmc => "VCMC",
            MemElementKind::Fcml => "FCML",
            MemElementKind::Ccml => "CCML",
        }
    }
}

/// A mem-element: its kind plus the polynomial multiplying the input.
///
/// For the reciprocal kinds (VCMR, QCMC, FCML) `g` is already the reciprocal
/// of the memristance/memcapacitance/meminductance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemElementSpec<T> {
    pub kind: MemElementKind,
    pub g: Polynomial<T>,
}

impl<T: Scalar> MemElementSpec<T> {
    pub fn new(kind: MemElementKind, g: Polynomial<T>) -> Self {
        Self { kind, g }
    }
}

pub fn eval_g<T: Scalar>(spec: &MemElementSpec<T>, w: T) -> T {
    spec.g.eval(w)
}

/// `G(w)` with `G(0) = 0`.
pub fn eval_g_integral<T: Scalar>(spec: &MemElementSpec<T>, w: T) -> T {
    spec.g.eval_antiderivative(w)
}

/// Sampled response of an element to a sampled input.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementResponse<T> {
    pub w: Vec<T>,
    pub y: Vec<T>,
}

/// Drives an element with a uniformly sampled input `x` (spacing `dt`).
pub fn simulate_element<T: Scalar>(
    spec: &MemElementSpec<T>,
    input: &[T],
    dt: T,
    w0: T,
) -> Result<ElementResponse<T>> {
    if input.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter("sample step must be positive".into()));
    }
    let w: Vec<T> = cumulative_integral(input, dt)
        .into_iter()
        .map(|area| w0 + area)
        .collect();
    let y = w
        .iter()
        .zip(input)
        .map(|(&wi, &xi)| spec.g.eval(wi) * xi)
        .collect();
    Ok(ElementResponse { w, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig5(a: f64, b: f64) -> MemElementSpec<f64> {
        MemElementSpec::new(MemElementKind::Vcmr, Polynomial::quadratic_memductance(a, b))
    }

    #[test]
    fn eval_g_examples() {
        let spec = fig5(1.0, 1.0);
        assert_eq!(eval_g(&spec, 0.0), 1.0);
        assert_eq!(eval_g(&spec, 2.0), 13.0);
        let zero = MemElementSpec::new(MemElementKind::Ccmr, Polynomial::<f64>::new(vec![0.0]));
        assert_eq!(eval_g(&zero, 7.5), 0.0);
    }

    #[test]
    fn eval_g_integral_examples() {
        let spec = fig5(1.0, 1.0);
        assert_eq!(eval_g_integral(&spec, 2.0), 10.0);
        assert_eq!(eval_g_integral(&spec, 0.0), 0.0);
        let c = MemElementSpec::new(MemElementKind::Ccmr, Polynomial::constant(2.0));
        assert_eq!(eval_g_integral(&c, 3.0), 6.0);
    }

    #[test]
    fn antiderivative_matches_direct_evaluation() {
        let p = Polynomial::<f64>::new(vec![0.5, -1.0, 2.0, 0.25]);
        let big = p.antiderivative();
        for w in [-2.0, -0.3, 0.0, 1.7] {
            assert!((big.eval(w) - p.eval_antiderivative(w)).abs() < 1e-14);
        }
        assert_eq!(p.derivative().coefficients(), &[-1.0, 4.0, 0.75]);
    }

    #[test]
    fn degree_ignores_trailing_zeros() {
        assert_eq!(Polynomial::new(vec![1.0, 2.0, 0.0]).degree(), Some(1));
        assert_eq!(Polynomial::<f64>::new(vec![0.0, 0.0]).degree(), None);
        assert!(Polynomial::<f64>::zero().is_constant());
    }

    #[test]
    fn kind_roles_follow_table() {
        use Quantity::*;
        assert_eq!(MemElementKind::Ccmr.roles(), (Voltage, Current, Charge));
        assert_eq!(MemElementKind::Vcmr.roles(), (Current, Voltage, Flux));
        assert_eq!(MemElementKind::Fcml.roles(), (Current, Flux, FluxIntegral));
        assert_eq!(MemElementKind::ALL.iter().filter(|k| k.is_memristor()).count(), 2);
    }

    #[test]
    fn json_shape() {
        let spec = MemElementSpec::new(MemElementKind::Vcmr, Polynomial::new(vec![1.0, 0.0, 3.0]));
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"kind":"VCMR","g":[1.0,0.0,3.0]}"#);
        let back: MemElementSpec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn empty_input_is_rejected() {
        let err = simulate_element(&fig5(1.0, 1.0), &[], 0.1, 0.0).unwrap_err();
        assert_eq!(err.to_string(), "empty waveform");
    }

    #[test]
    fn zero_input_keeps_state() {
        let r = simulate_element(&fig5(1.0, 1.0), &[0.0; 50], 0.01, 3.0).unwrap();
        assert!(r.w.iter().all(|&w| w == 3.0));
        assert!(r.y.iter().all(|&y| y == 0.0));
    }

    fn cosine(n: usize) -> (Vec<f64>, Vec<f64>, f64) {
        let dt = 2.0 * PI / (n - 1) as f64;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let x = t.iter().map(|t| t.cos()).collect();
        (t, x, dt)
    }

    #[test]
    fn cosine_input_integrates_to_sine() {
        let (t, x, dt) = cosine(4001);
        let spec = MemElementSpec::new(MemElementKind::Vcmr, Polynomial::constant(1.0));
        let r = simulate_element(&spec, &x, dt, 0.0).unwrap();
        for i in 0..t.len() {
            assert!((r.w[i] - t[i].sin()).abs() < 1e-10, "w at {}", t[i]);
            assert_eq!(r.y[i], x[i]);
        }
    }

    #[test]
    fn quadratic_memductance_composition() {
        let (t, x, dt) = cosine(4001);
        let spec = MemElementSpec::new(MemElementKind::Vcmr, Polynomial::new(vec![0.0, 0.0, 3.0]));
        let r = simulate_element(&spec, &x, dt, 0.0).unwrap();
        for i in 0..t.len() {
            let expect = 3.0 * t[i].sin().powi(2) * t[i].cos();
            assert!((r.y[i] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn pinched_at_origin() {
        // x = sin t vanishes at sample 0, the midpoint and the end.
        let n = 2001;
        let dt = 2.0 * PI / (n - 1) as f64;
        let x: Vec<f64> = (0..n)
            .map(|i| if i == 0 || i == n / 2 || i == n - 1 { 0.0 } else { (i as f64 * dt).sin() })
            .collect();
        let spec = fig5(-0.5, 1.0);
        let r = simulate_element(&spec, &x, dt, 0.2).unwrap();
        for i in [0, n / 2, n - 1] {
            assert_eq!(r.y[i], 0.0);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let spec = MemElementSpec::new(MemElementKind::Ccmr, Polynomial::<f32>::quadratic_memductance(1.0, 1.0));
        assert_eq!(eval_g(&spec, 2.0f32), 13.0);
        assert_eq!(eval_g_integral(&spec, 2.0f32), 10.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn composite_simpson(p: &Polynomial<f64>, u: f64, v: f64, n: usize) -> f64 {
            let h = (v - u) / n as f64;
            let mut s = p.eval(u) + p.eval(v);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * p.eval(u + i as f64 * h);
            }
            s * h / 3.0
        }

        proptest! {
            #[test]
            fn antiderivative_agrees_with_quadrature(
                coeffs in prop::collection::vec(-3.0f64..3.0, 1..6),
                u in -2.0f64..2.0,
                len in 0.01f64..2.0,
            ) {
                let p = Polynomial::new(coeffs);
                let v = u + len;
                let exact = p.eval_antiderivative(v) - p.eval_antiderivative(u);
                let quad = composite_simpson(&p, u, v, 2000);
                // magnitude bound of |g| on [u, v], so cancellation does not shrink the scale
                let r = u.abs().max(v.abs());
                let bound: f64 = p.coefficients().iter().enumerate().map(|(i, c)| c.abs() * r.powi(i as i32)).sum();
                prop_assert!((exact - quad).abs() <= 1e-10 * (exact.abs() + len * bound) + 1e-15);
            }

            #[test]
            fn constant_memductance_scales_input(c in -5.0f64..5.0, xs in prop::collection::vec(-1.0f64..1.0, 1..40)) {
                let spec = MemElementSpec::new(MemElementKind::Vcmr, Polynomial::constant(c));
                let r = simulate_element(&spec, &xs, 0.1, 0.3).unwrap();
                for (y, x) in r.y.iter().zip(&xs) {
                    prop_assert_eq!(*y, c * x);
                }
            }
        }
    }
}
