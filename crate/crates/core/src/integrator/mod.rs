//! Time integration of the augmented circuit systems.
//!
//! Two methods are offered: classic fixed-step RK4 and adaptive
//! Dormand-Prince 5(4). Both record on a uniform output grid of spacing
//! `h * record_stride`; the adaptive method fills that grid from its
//! continuous extension.

mod dopri;
mod quadrature;
pub(crate) mod trajectory;

pub use quadrature::{cumulative_integral, trapezoid};
pub use trajectory::{column_index, cubic_at, resample, Trajectory, CSV_HEADER};

use serde::{Deserialize, Serialize};

use crate::circuits::{AugmentedState, CircuitModel, STATE_DIM};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An autonomous or non-autonomous first-order system of fixed dimension.
pub trait OdeSystem<T: Scalar, const N: usize> {
    fn rhs(&self, t: T, y: &[T; N]) -> [T; N];
}

impl<T: Scalar> OdeSystem<T, STATE_DIM> for CircuitModel<T> {
    fn rhs(&self, t: T, y: &[T; STATE_DIM]) -> [T; STATE_DIM] {
        self.derivative(t, &AugmentedState::from_array(*y)).to_array()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rk4")]
    Rk4Fixed,
    #[serde(rename = "dopri45")]
    DormandPrince45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct IntegratorOptions<T> {
    pub method: Method,
    /// RK4 step; for the adaptive method only the output spacing derives from it.
    pub h: T,
    #[serde(default = "default_rtol")]
    pub rtol: T,
    #[serde(default = "default_atol")]
    pub atol: T,
    pub t0: T,
    pub t1: T,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

fn default_rtol<T: Scalar>() -> T {
    T::lit(1e-10)
}

fn default_atol<T: Scalar>() -> T {
    T::lit(1e-12)
}

fn default_stride() -> usize {
    1
}

impl<T: Scalar> IntegratorOptions<T> {
    pub fn rk4(t0: T, t1: T, h: T) -> Self {
        Self {
            method: Method::Rk4Fixed,
            h,
            rtol: default_rtol(),
            atol: default_atol(),
            t0,
            t1,
            record_stride: 1,
        }
    }

    /// Adaptive integration recorded every `dt_out`.
    pub fn adaptive(t0: T, t1: T, dt_out: T, rtol: T, atol: T) -> Self {
        Self {
            method: Method::DormandPrince45,
            h: dt_out,
            rtol,
            atol,
            t0,
            t1,
            record_stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return Err(Error::InvalidOptions("t1 must exceed t0".into()));
        }
        if !(self.h > T::zero() && self.h.is_finite()) {
            return Err(Error::InvalidOptions("h must be positive".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidOptions("record_stride must be at least 1".into()));
        }
        if self.method == Method::DormandPrince45 && !(self.rtol > T::zero() && self.atol > T::zero()) {
            return Err(Error::InvalidOptions("rtol and atol must be positive".into()));
        }
        Ok(())
    }

    /// Uniform output grid: `t0 + i * dt` with the last node pinned to `t1`.
    pub fn output_grid(&self) -> Vec<T> {
        let span = self.t1 - self.t0;
        let target = self.h * T::of_usize(self.record_stride);
        let m = (span / target - T::lit(1e-9)).ceil().max(T::one());
        let m_usize = m.to_usize().expect("grid size fits usize");
        let dt = span / m;
        let mut grid: Vec<T> = (0..=m_usize).map(|i| self.t0 + T::of_usize(i) * dt).collect();
        grid[m_usize] = self.t1;
        grid
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Integrates a generic system on the options' output grid.
pub fn solve<T: Scalar, const N: usize, S: OdeSystem<T, N>>(
    sys: &S,
    y0: [T; N],
    opts: &IntegratorOptions<T>,
) -> Result<(Vec<T>, Vec<[T; N]>, SolveStats)> {
    opts.validate()?;
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::Divergence { t: opts.t0.as_f64() });
    }
    let grid = opts.output_grid();
    let (states, stats) = match opts.method {
        Method::DormandPrince45 => dopri::solve(sys, y0, &grid, opts.rtol, opts.atol)?,
        Method::Rk4Fixed => rk4(sys, y0, &grid, opts.record_stride)?,
    };
    Ok((grid, states, stats))
}

fn rk4<T: Scalar, const N: usize, S: OdeSystem<T, N>>(
    sys: &S,
    y0: [T; N],
    grid: &[T],
    stride: usize,
) -> Result<(Vec<[T; N]>, SolveStats)> {
    let mut stats = SolveStats::default();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    let mut y = y0;
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    for win in grid.windows(2) {
        let h = (win[1] - win[0]) / T::of_usize(stride);
        for j in 0..stride {
            let t = win[0] + T::of_usize(j) * h;
            let k1 = sys.rhs(t, &y);
            let mut tmp = y;
            for i in 0..N {
                tmp[i] = y[i] + half * h * k1[i];
            }
            let k2 = sys.rhs(t + half * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + half * h * k2[i];
            }
            let k3 = sys.rhs(t + half * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * k3[i];
            }
            let k4 = sys.rhs(t + h, &tmp);
            for i in 0..N {
                y[i] += h * sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
            }
            stats.accepted += 1;
            stats.rhs_evals += 4;
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::Divergence { t: (t + h).as_f64() });
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

/// Integrates a circuit from `s0` (memory integrals are reset to zero).
pub fn integrate<T: Scalar>(
    model: &CircuitModel<T>,
    s0: AugmentedState<T>,
    opts: &IntegratorOptions<T>,
) -> Result<Trajectory<T>> {
    integrate_with_stats(model, s0, opts).map(|(traj, _)| traj)
}

pub fn integrate_with_stats<T: Scalar>(
    model: &CircuitModel<T>,
    s0: AugmentedState<T>,
    opts: &IntegratorOptions<T>,
) -> Result<(Trajectory<T>, SolveStats)> {
    model.validate()?;
    opts.validate()?;
    if let CircuitModel::Mmo(p) = model {
        if opts.method == Method::Rk4Fixed && p.epsilon < T::lit(1e-3) && !(opts.h < p.epsilon / T::lit(10.0)) {
            return Err(Error::InvalidOptions(format!(
                "stiffness guard: epsilon={} needs the adaptive method or h < epsilon/10",
                p.epsilon
            )));
        }
    }
    let start = AugmentedState::from_core(s0.core());
    let (times, raw, stats) = solve(model, start.to_array(), opts)?;
    let states = raw.into_iter().map(AugmentedState::from_array).collect();
    Ok((Trajectory::new(times, states, model.clone()), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::MmoParams;
    use std::f64::consts::PI;

    struct Harmonic;

    impl OdeSystem<f64, 2> for Harmonic {
        fn rhs(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
            [y[1], -y[0]]
        }
    }

    #[test]
    fn rk4_harmonic_full_turn() {
        let opts = IntegratorOptions::rk4(0.0, 2.0 * PI, 1e-3);
        let (t, y, _) = solve(&Harmonic, [1.0, 0.0], &opts).unwrap();
        assert_eq!(*t.last().unwrap(), 2.0 * PI);
        assert!((y.last().unwrap()[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dopri_harmonic_dense_output() {
        let opts = IntegratorOptions::adaptive(0.0, 10.0, 0.01, 1e-10, 1e-12);
        let (t, y, stats) = solve(&Harmonic, [1.0, 0.0], &opts).unwrap();
        assert_eq!(t.len(), 1001);
        for (ti, yi) in t.iter().zip(&y) {
            assert!((yi[0] - ti.cos()).abs() < 5e-9, "t={ti}");
        }
        assert!(stats.accepted < t.len());
    }

    #[test]
    fn rk4_fourth_order_ratio() {
        let err = |h: f64| {
            let opts = IntegratorOptions::rk4(0.0, 4.0, h);
            let (_, y, _) = solve(&Harmonic, [1.0, 0.0], &opts).unwrap();
            (y.last().unwrap()[0] - 4.0f64.cos()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn grid_is_uniform_and_pinned() {
        let opts = IntegratorOptions::rk4(1.0, 2.0, 0.03).with_stride(2);
        let g: Vec<f64> = opts.output_grid();
        assert_eq!(g[0], 1.0);
        assert_eq!(*g.last().unwrap(), 2.0);
        let dt = g[1] - g[0];
        assert!(dt <= 0.06 + 1e-12);
        for w in g.windows(2) {
            assert!(((w[1] - w[0]) - dt).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_options() {
        let bad_span = IntegratorOptions::rk4(1.0, 1.0, 0.1);
        assert!(matches!(bad_span.validate(), Err(Error::InvalidOptions(_))));
        let bad_h = IntegratorOptions::rk4(0.0, 1.0, 0.0);
        assert!(bad_h.validate().is_err());
        let bad_tol = IntegratorOptions::adaptive(0.0, 1.0, 0.1, 0.0, 1e-9);
        assert!(bad_tol.validate().is_err());
    }

    #[test]
    fn stiffness_guard_for_small_epsilon() {
        let model = CircuitModel::Mmo(MmoParams::<f64> { epsilon: 1e-4, ..MmoParams::demo() });
        let opts = IntegratorOptions::rk4(0.0, 1.0, 1e-3);
        let err = integrate(&model, AugmentedState::zero(), &opts).unwrap_err();
        assert!(err.to_string().contains("stiffness guard"));
        let ok = IntegratorOptions::rk4(0.0, 1e-3, 5e-6);
        assert!(integrate(&model, AugmentedState::zero(), &ok).is_ok());
    }

    #[test]
    fn equilibrium_stays_put() {
        let model = CircuitModel::Mmo(MmoParams::<f64> { a_s: 0.0, ..MmoParams::demo() });
        let opts = IntegratorOptions::adaptive(0.0, 5.0, 0.01, 1e-10, 1e-12);
        let traj = integrate(&model, AugmentedState::zero(), &opts).unwrap();
        assert!(traj.states.iter().all(|s| *s == AugmentedState::zero()));
    }

    #[test]
    fn blow_up_reports_divergence() {
        struct Riccati;
        impl OdeSystem<f64, 1> for Riccati {
            fn rhs(&self, _t: f64, y: &[f64; 1]) -> [f64; 1] {
                [y[0] * y[0]]
            }
        }
        // y = 1/(1 - t) blows up at t = 1
        let opts = IntegratorOptions::rk4(0.0, 2.0, 0.01);
        let err = solve(&Riccati, [1.0], &opts).unwrap_err();
        assert!(err.to_string().starts_with("divergence at t="), "{err}");
        let adaptive = IntegratorOptions::adaptive(0.0, 2.0, 0.01, 1e-8, 1e-10);
        let err = solve(&Riccati, [1.0], &adaptive).unwrap_err();
        assert!(matches!(err, Error::StiffnessFailure { .. } | Error::Divergence { .. } | Error::TooManySteps { .. }), "{err}");
    }

    #[test]
    fn deterministic() {
        let model = CircuitModel::Mmo(MmoParams::<f64>::demo());
        let opts = IntegratorOptions::adaptive(0.0, 3.0, 0.01, 1e-9, 1e-12);
        let a = integrate(&model, AugmentedState::zero(), &opts).unwrap();
        let b = integrate(&model, AugmentedState::zero(), &opts).unwrap();
        assert_eq!(a, b);
    }
}
