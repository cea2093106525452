//! Dormand-Prince 5(4) with PI step control and the 4th-order continuous
//! extension (Hairer, Norsett & Wanner, DOPRI5).

use super::{OdeSystem, SolveStats};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const H_MIN: f64 = 1e-14;
const MAX_STEPS: usize = 50_000_000;

fn lin<T: Scalar, const N: usize>(base: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *base;
    for (c, k) in terms {
        let ch = T::lit(*c) * h;
        for i in 0..N {
            out[i] += ch * k[i];
        }
    }
    out
}

/// Continuous extension over one accepted step.
struct Dense<T, const N: usize> {
    t_old: T,
    h: T,
    r: [[T; N]; 5],
}

impl<T: Scalar, const N: usize> Dense<T, N> {
    fn eval(&self, t: T) -> [T; N] {
        let theta = (t - self.t_old) / self.h;
        let theta1 = T::one() - theta;
        let mut out = [T::zero(); N];
        for i in 0..N {
            out[i] = self.r[0][i]
                + theta
                    * (self.r[1][i]
                        + theta1 * (self.r[2][i] + theta * (self.r[3][i] + theta1 * self.r[4][i])));
        }
        out
    }
}

fn error_norm<T: Scalar, const N: usize>(y0: &[T; N], y1: &[T; N], err: &[T; N], rtol: T, atol: T) -> T {
    let mut acc = T::zero();
    for i in 0..N {
        let sk = atol + rtol * y0[i].abs().max(y1[i].abs());
        let e = err[i] / sk;
        acc += e * e;
    }
    (acc / T::of_usize(N)).sqrt()
}

fn initial_step<T: Scalar, const N: usize, S: OdeSystem<T, N>>(
    sys: &S,
    t0: T,
    y0: &[T; N],
    f0: &[T; N],
    rtol: T,
    atol: T,
    h_max: T,
) -> T {
    let n = T::of_usize(N);
    let (mut dnf, mut dny) = (T::zero(), T::zero());
    for i in 0..N {
        let sk = atol + rtol * y0[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y0[i] / sk).powi(2);
    }
    let mut h = if dnf <= T::lit(1e-10) || dny <= T::lit(1e-10) {
        T::lit(1e-6)
    } else {
        (dny / dnf).sqrt() * T::lit(0.01)
    };
    h = h.min(h_max);
    let y1 = lin(y0, h, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + h, &y1);
    let mut der2 = T::zero();
    for i in 0..N {
        let sk = atol + rtol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = (der2 / n).sqrt() / h;
    let der12 = der2.max((dnf / n).sqrt());
    let h1 = if der12 <= T::lit(1e-15) {
        T::lit(1e-6).max(h * T::lit(1e-3))
    } else {
        (T::lit(0.01) / der12).powf(T::lit(0.2))
    };
    (h * T::lit(100.0)).min(h1).min(h_max)
}

/// Integrates from `t0` to the last entry of `out_times`, filling one state
/// per requested output time (which must be increasing and start at `t0`).
pub(super) fn solve<T: Scalar, const N: usize, S: OdeSystem<T, N>>(
    sys: &S,
    y0: [T; N],
    out_times: &[T],
    rtol: T,
    atol: T,
) -> Result<(Vec<[T; N]>, SolveStats)> {
    let mut stats = SolveStats::default();
    let mut out = Vec::with_capacity(out_times.len());
    let t0 = out_times[0];
    let t_end = *out_times.last().expect("non-empty output grid");
    out.push(y0);
    let mut next = 1;

    let span = t_end - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y);
    stats.rhs_evals += 1;
    let mut h = initial_step(sys, t, &y, &k1, rtol, atol, span);
    stats.rhs_evals += 1;
    let mut facold = T::lit(1e-4);
    let expo1 = T::lit(0.2 - BETA * 0.75);
    let mut last_rejected = false;

    while next < out_times.len() {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(Error::TooManySteps { t: t.as_f64() });
        }
        if h < T::lit(H_MIN) {
            return Err(Error::StiffnessFailure { t: t.as_f64(), h: h.as_f64() });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let y2 = lin(&y, h, &[(A21, &k1)]);
        let k2 = sys.rhs(t + T::lit(C2) * h, &y2);
        let y3 = lin(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = sys.rhs(t + T::lit(C3) * h, &y3);
        let y4 = lin(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = sys.rhs(t + T::lit(C4) * h, &y4);
        let y5 = lin(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = sys.rhs(t + T::lit(C5) * h, &y5);
        let y6 = lin(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if last { t_end } else { t + h };
        let k6 = sys.rhs(t_new, &y6);
        let y_new = lin(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = sys.rhs(t_new, &y_new);
        stats.rhs_evals += 6;

        if !y_new.iter().all(|v| v.is_finite()) {
            stats.rejected += 1;
            h = h * T::lit(FAC_MIN);
            last_rejected = true;
            if h < T::lit(H_MIN) {
                return Err(Error::Divergence { t: t.as_f64() });
            }
            continue;
        }

        let mut e = [T::zero(); N];
        for i in 0..N {
            e[i] = h
                * (T::lit(E1) * k1[i]
                    + T::lit(E3) * k3[i]
                    + T::lit(E4) * k4[i]
                    + T::lit(E5) * k5[i]
                    + T::lit(E6) * k6[i]
                    + T::lit(E7) * k7[i]);
        }
        let err = error_norm(&y, &y_new, &e, rtol, atol);
        let fac11 = err.powf(expo1);

        if err <= T::one() {
            stats.accepted += 1;
            let fac = fac11 / facold.powf(T::lit(BETA));
            let fac = T::lit(1.0 / FAC_MAX).max(T::lit(1.0 / FAC_MIN).min(fac / T::lit(SAFE)));
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            facold = err.max(T::lit(1e-4));

            let dense = Dense {
                t_old: t,
                h,
                r: dense_coefficients(&y, &y_new, &k1, &k3, &k4, &k5, &k6, &k7, h),
            };
            while next < out_times.len() && out_times[next] <= t_new {
                let tau = out_times[next];
                out.push(if tau == t_new { y_new } else { dense.eval(tau) });
                next += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            h = h_new.min(span);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h = h / T::lit(1.0 / FAC_MIN).min(fac11 / T::lit(SAFE));
            last_rejected = true;
        }
    }
    Ok((out, stats))
}

#[allow(clippy::too_many_arguments)]
fn dense_coefficients<T: Scalar, const N: usize>(
    y: &[T; N],
    y_new: &[T; N],
    k1: &[T; N],
    k3: &[T; N],
    k4: &[T; N],
    k5: &[T; N],
    k6: &[T; N],
    k7: &[T; N],
    h: T,
) -> [[T; N]; 5] {
    let mut r = [[T::zero(); N]; 5];
    for i in 0..N {
        let dy = y_new[i] - y[i];
        let bspl = h * k1[i] - dy;
        r[0][i] = y[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * k7[i] - bspl;
        r[4][i] = h
            * (T::lit(D1) * k1[i]
                + T::lit(D3) * k3[i]
                + T::lit(D4) * k4[i]
                + T::lit(D5) * k5[i]
                + T::lit(D6) * k6[i]
                + T::lit(D7) * k7[i]);
    }
    r
}
