//! Period detection, mixed-mode signatures and one-period loop integrals.

use serde::Serialize;

use crate::circuits::AugmentedState;
use crate::error::{Error, Result};
use crate::integrator::{cubic_at, solve, trapezoid, IntegratorOptions, Trajectory};
use crate::memelement::{MemElementKind, MemElementSpec};
use crate::scalar::Scalar;

/// Relative first/last mismatch above which a loop is flagged as unclosed.
pub const CLOSURE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodAnalysis<T> {
    #[serde(rename = "T")]
    pub period: T,
    pub samples_per_period: usize,
    pub mmo_signature: Vec<(usize, usize)>,
    pub converged: bool,
    /// Section crossing that opens the last complete period.
    pub t_start: T,
    /// Number of section crossings per period.
    pub crossings_per_period: usize,
}

/// Tunables of [`analyze`]; defaults follow the module documentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub transient_fraction: f64,
    pub tol: f64,
    pub amplitude_threshold: f64,
    /// Resolution of the one-period resampling used for loop integrals.
    pub loop_samples: usize,
    pub element: MemElementKind,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            transient_fraction: 0.5,
            tol: 1e-3,
            amplitude_threshold: 0.5,
            loop_samples: 8192,
            element: MemElementKind::Vcmr,
        }
    }
}

/// Upward crossings of `y = level`, refined on the cubic interpolant.
fn upward_crossings<T: Scalar>(times: &[T], y: &[T], level: T) -> Vec<T> {
    let mut out = Vec::new();
    for i in 0..y.len() - 1 {
        if y[i] < level && y[i + 1] >= level {
            let (mut a, mut b) = (times[i], times[i + 1]);
            let f = |t: T| cubic_at(times, |j| y[j], t) - level;
            let mut fa = f(a);
            for _ in 0..100 {
                let m = (a + b) / T::lit(2.0);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m);
                if (fm < T::zero()) == (fa < T::zero()) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            out.push((a + b) / T::lit(2.0));
        }
    }
    out
}

/// Period from the return map of the section `y = mean(y)` (upward),
/// after discarding the leading `transient_fraction` of the samples.
pub fn detect_period<T: Scalar>(traj: &Trajectory<T>, transient_fraction: f64, tol: f64) -> Result<PeriodAnalysis<T>> {
    if traj.len() < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: traj.len() });
    }
    let skip = ((traj.len() as f64) * transient_fraction.clamp(0.0, 0.95)) as usize;
    let tail = traj.window(skip.min(traj.len() - 4), traj.len() - 1);
    let y = tail.series(|s| s.y);
    let mean = y.iter().copied().sum::<T>() / T::of_usize(y.len());
    let crossings = upward_crossings(&tail.times, &y, mean);
    if crossings.len() < 2 {
        return Err(Error::NonOscillatory);
    }
    let points: Vec<[T; 4]> = crossings.iter().map(|&t| tail.state_at(t).core()).collect();
    let mut scale = T::zero();
    for j in 0..4 {
        let (lo, hi) = tail
            .states
            .iter()
            .map(|s| s.core()[j])
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
        scale = scale.max(hi - lo);
    }
    if !(scale > T::zero()) {
        return Err(Error::NonOscillatory);
    }

    let n = crossings.len();
    let tol_t = T::lit(tol);
    let distance = |p: usize| -> T {
        let mut d = T::zero();
        for i in 0..n - p {
            for j in 0..4 {
                d = d.max((points[i + p][j] - points[i][j]).abs());
            }
        }
        d / scale
    };
    // smallest lag whose section points repeat; otherwise the best lag
    let max_lag = (n - 1).max(1);
    let mut best = (1, distance(1));
    let mut found = best.1 <= tol_t;
    if !found {
        for p in 2..=max_lag {
            let d = distance(p);
            if d <= tol_t {
                best = (p, d);
                found = true;
                break;
            }
            if d < best.1 {
                best = (p, d);
            }
        }
    }
    let p = best.0;
    let returns: Vec<T> = (0..n - p).map(|i| crossings[i + p] - crossings[i]).collect();
    let period = returns.iter().copied().sum::<T>() / T::of_usize(returns.len());
    let (lo, hi) = returns
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let steady = (hi - lo) / period <= tol_t;
    let dt = traj.dt();
    Ok(PeriodAnalysis {
        period,
        samples_per_period: (period / dt).round().to_usize().unwrap_or(0),
        mmo_signature: Vec::new(),
        converged: found && steady && n - p >= 1,
        t_start: crossings[n - 1 - p],
        crossings_per_period: p,
    })
}

/// Run-length encodes a cyclic large/small peak pattern into `L^s` blocks,
/// starting at a large peak.
fn encode(large: &[bool]) -> Vec<(usize, usize)> {
    if large.is_empty() {
        return Vec::new();
    }
    let Some(first) = large.iter().position(|&b| b) else {
        return vec![(0, large.len())];
    };
    let n = large.len();
    let mut out: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut l = 0;
        while i < n && large[(first + i) % n] {
            l += 1;
            i += 1;
        }
        let mut s = 0;
        while i < n && !large[(first + i) % n] {
            s += 1;
            i += 1;
        }
        out.push((l, s));
    }
    out
}

/// Peak classification of `x` over one period ending at the last sample.
///
/// The window opens at the lowest `x` among the final two periods. Each
/// local maximum is measured against the lowest point since the previous
/// one; it counts as large if that rise is at least `threshold` times the
/// peak-to-peak range of the window.
pub fn classify_mmo<T: Scalar>(traj: &Trajectory<T>, period: T, threshold: f64) -> Vec<(usize, usize)> {
    let dt = traj.dt();
    if traj.len() < 3 || !(dt > T::zero()) || !(period > T::zero()) {
        return Vec::new();
    }
    let x = traj.series(|s| s.x);
    let n = x.len();
    let per = (period / dt).round().to_usize().unwrap_or(0).max(2);
    if per + 1 > n {
        return Vec::new();
    }
    let search_lo = n.saturating_sub(2 * per + 1);
    let search_hi = n - 1 - per;
    let mut start = search_lo;
    for i in search_lo..=search_hi {
        if x[i] < x[start] {
            start = i;
        }
    }
    let win = &x[start..=start + per];
    let (lo, hi) = win
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let p2p = hi - lo;
    if !(p2p > T::zero()) {
        return Vec::new();
    }
    let mut flags = Vec::new();
    let mut trough = win[0];
    for i in 1..win.len() - 1 {
        trough = trough.min(win[i]);
        if win[i] > win[i - 1] && win[i] >= win[i + 1] {
            let rise = win[i] - trough;
            if rise >= T::lit(1e-6) * p2p {
                flags.push(rise >= T::lit(threshold) * p2p);
                trough = win[i];
            }
        }
    }
    encode(&flags)
}

/// `∫ f dh` over a sampled closed path, trapezoid in `h`.
pub fn loop_integral<T: Scalar>(f: &[T], h: &[T]) -> Result<T> {
    Ok(*cumulative_loop_integral(f, h)?.last().expect("non-empty"))
}

/// Running `∫ f dh` from the first sample.
pub fn cumulative_loop_integral<T: Scalar>(f: &[T], h: &[T]) -> Result<Vec<T>> {
    if f.len() != h.len() {
        return Err(Error::LengthMismatch { left: f.len(), right: h.len() });
    }
    if f.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: f.len() });
    }
    let half = T::lit(0.5);
    let mut acc = T::zero();
    let mut out = Vec::with_capacity(f.len());
    out.push(acc);
    for i in 0..f.len() - 1 {
        acc += half * (f[i] + f[i + 1]) * (h[i + 1] - h[i]);
        out.push(acc);
    }
    Ok(out)
}

/// Input `x` and state `w` of a mem-element on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementSignals<T> {
    pub dt: T,
    pub x: Vec<T>,
    pub w: Vec<T>,
}

/// The circuit's memristor signals: `w` is the state, `x = w'`.
pub fn element_signals<T: Scalar>(traj: &Trajectory<T>) -> ElementSignals<T> {
    ElementSignals {
        dt: traj.dt(),
        x: traj.series(|s| traj.model.w_rate(s)),
        w: traj.series(|s| s.w),
    }
}

/// One row of the loop-integral table: the pair `(f, h)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopPair<T> {
    pub f: &'static str,
    pub h: &'static str,
    pub f_dh: T,
    pub h_df: T,
}

/// Closed-loop forms of the rms values of a memristor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RmsLoops<T> {
    pub v_dphi: T,
    pub phi_dv: T,
    pub i_dq: T,
    pub q_di: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopQuantities<T> {
    #[serde(rename = "T")]
    pub period: T,
    pub table2: Vec<LoopPair<T>>,
    pub action: T,
    pub coaction: T,
    /// Only for memristors; `None` for memcapacitors and meminductors.
    pub v_rms: Option<T>,
    pub i_rms: Option<T>,
    #[serde(rename = "E_C")]
    pub e_c: Option<T>,
    #[serde(rename = "E_L")]
    pub e_l: Option<T>,
    pub rms_loops: Option<RmsLoops<T>>,
    pub closed: bool,
    pub warnings: Vec<String>,
}

fn rms<T: Scalar>(v: &[T], dt: T, period: T) -> T {
    let sq: Vec<T> = v.iter().map(|a| *a * *a).collect();
    (trapezoid(&sq, dt) / period).sqrt()
}

/// All loop quantities of one closed period of element signals.
pub fn loop_quantities<T: Scalar>(sig: &ElementSignals<T>, spec: &MemElementSpec<T>) -> Result<LoopQuantities<T>> {
    let n = sig.x.len();
    if sig.w.len() != n {
        return Err(Error::LengthMismatch { left: n, right: sig.w.len() });
    }
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    let period = sig.dt * T::of_usize(n - 1);
    let x = &sig.x;
    let w = &sig.w;
    let y: Vec<T> = w.iter().zip(x).map(|(&wi, &xi)| spec.g.eval(wi) * xi).collect();
    let big_g: Vec<T> = w.iter().map(|&wi| spec.g.eval_antiderivative(wi)).collect();

    let pairs: [(&'static str, &[T], &'static str, &[T]); 6] = [
        ("g(w)x", &y, "x", x),
        ("x", x, "G(w)", &big_g),
        ("g(w)x", &y, "w", w),
        ("G(w)", &big_g, "w", w),
        ("g(w)x", &y, "G(w)", &big_g),
        ("x", x, "w", w),
    ];
    let mut table2 = Vec::with_capacity(6);
    for (fname, f, hname, h) in pairs {
        table2.push(LoopPair { f: fname, h: hname, f_dh: loop_integral(f, h)?, h_df: loop_integral(h, f)? });
    }
    let action = table2[3].f_dh;
    let coaction = table2[3].h_df;

    let mut warnings = Vec::new();
    let scale = x.iter().chain(w).fold(T::zero(), |m, v| m.max(v.abs()));
    let gap = (x[n - 1] - x[0]).abs().max((w[n - 1] - w[0]).abs());
    let closed = !(scale > T::zero()) || gap / scale <= T::lit(CLOSURE_TOL);
    if !closed {
        warnings.push(format!("unclosed loop: relative mismatch {:e}", (gap / scale).as_f64()));
    }

    let (v, i, phi, q) = match spec.kind {
        MemElementKind::Vcmr => (x, &y, w, &big_g),
        MemElementKind::Ccmr => (&y, x, &big_g, w),
        kind => {
            warnings.push(format!("{} is not a memristor: rms and energy quantities omitted", kind.label()));
            return Ok(LoopQuantities {
                period,
                table2,
                action,
                coaction,
                v_rms: None,
                i_rms: None,
                e_c: None,
                e_l: None,
                rms_loops: None,
                closed,
                warnings,
            });
        }
    };
    let v_rms = rms(v, sig.dt, period);
    let i_rms = rms(i, sig.dt, period);
    let rms_loops = RmsLoops {
        v_dphi: loop_integral(v, phi)?,
        phi_dv: loop_integral(phi, v)?,
        i_dq: loop_integral(i, q)?,
        q_di: loop_integral(q, i)?,
    };
    Ok(LoopQuantities {
        period,
        table2,
        action,
        coaction,
        v_rms: Some(v_rms),
        i_rms: Some(i_rms),
        e_c: Some(loop_integral(v, q)?),
        e_l: Some(loop_integral(i, phi)?),
        rms_loops: Some(rms_loops),
        closed,
        warnings,
    })
}

/// Loop quantities of the circuit's memristor over a trajectory that
/// spans exactly one period.
pub fn table2_quantities<T: Scalar>(traj: &Trajectory<T>, spec: &MemElementSpec<T>) -> Result<LoopQuantities<T>> {
    if traj.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    loop_quantities(&element_signals(traj), spec)
}

/// One period starting at the first sample at or after `t_start`, with `n`
/// intervals. The model is re-integrated from that sample (memory integrals
/// included) so fast segments are not smeared by interpolation.
pub fn period_window<T: Scalar>(traj: &Trajectory<T>, pa: &PeriodAnalysis<T>, n: usize) -> Result<Trajectory<T>> {
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    if traj.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    let k = traj.times.iter().position(|&t| t >= pa.t_start).unwrap_or(traj.len() - 1);
    let t0 = traj.times[k];
    let opts = IntegratorOptions::adaptive(t0, t0 + pa.period, pa.period / T::of_usize(n), T::lit(1e-10), T::lit(1e-12));
    let (times, raw, _) = solve(&traj.model, traj.states[k].to_array(), &opts)?;
    let states = raw.into_iter().map(AugmentedState::from_array).collect();
    Ok(Trajectory::new(times, states, traj.model.clone()))
}

/// Report of the `analyze` front end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport<T> {
    #[serde(rename = "T")]
    pub period: T,
    pub converged: bool,
    pub samples_per_period: usize,
    pub signature: Vec<(usize, usize)>,
    pub element: MemElementKind,
    pub table2: Vec<LoopPair<T>>,
    pub action: T,
    pub coaction: T,
    pub v_rms: Option<T>,
    pub i_rms: Option<T>,
    #[serde(rename = "E_C")]
    pub e_c: Option<T>,
    #[serde(rename = "E_L")]
    pub e_l: Option<T>,
    /// Whether the period window closes up to [`CLOSURE_TOL`].
    pub closed: bool,
    pub warnings: Vec<String>,
}

/// Period, signature and loop quantities of a trajectory.
pub fn analyze<T: Scalar>(traj: &Trajectory<T>, opts: &AnalysisOptions) -> Result<AnalysisReport<T>> {
    let mut pa = detect_period(traj, opts.transient_fraction, opts.tol)?;
    pa.mmo_signature = classify_mmo(traj, pa.period, opts.amplitude_threshold);
    let window = period_window(traj, &pa, opts.loop_samples)?;
    let spec = MemElementSpec::new(opts.element, traj.model.g().clone());
    let lq = table2_quantities(&window, &spec)?;
    let mut warnings = Vec::new();
    if !pa.converged {
        warnings.push("period did not converge".to_string());
    }
    warnings.extend(lq.warnings);
    Ok(AnalysisReport {
        period: pa.period,
        converged: pa.converged,
        samples_per_period: pa.samples_per_period,
        signature: pa.mmo_signature,
        element: opts.element,
        table2: lq.table2,
        action: lq.action,
        coaction: lq.coaction,
        v_rms: lq.v_rms,
        i_rms: lq.i_rms,
        e_c: lq.e_c,
        e_l: lq.e_l,
        closed: lq.closed,
        warnings,
    })
}
