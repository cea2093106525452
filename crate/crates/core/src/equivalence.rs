//! Linear two-ports with the same one-period rms values and energy as a
//! memristive waveform: parallel G-C and series R-L.
//!
//! With `Vv = ∫v² dt`, `Ii = ∫i² dt` and `E = ∫v i dt` over one period,
//!
//! ```text
//! G = E / Vv      C = T / (2π Vv) * sqrt(Vv Ii - E²)
//! R = E / Ii      L = T / (2π Ii) * sqrt(Vv Ii - E²)
//! ```
//!
//! The R-L pair is the G-C construction with the roles of `v` and `i`
//! exchanged.

use std::f64::consts::PI;
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::trajectory::parse_row;
use crate::integrator::trapezoid;
use crate::scalar::Scalar;

/// Negative radicands down to this relative size are treated as round-off.
pub const RADICAND_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquivalentKind {
    ParallelGC,
    SeriesRL,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearEquivalent<T> {
    pub kind: EquivalentKind,
    /// `G` or `R`.
    pub dissipative: T,
    /// `C` or `L`.
    pub reactive: T,
    #[serde(rename = "T")]
    pub period: T,
    /// `|Y|` or `|Z|`.
    pub magnitude: T,
    /// `(Vv Ii - E²) / (Vv Ii)` before clamping.
    pub radicand: T,
}

impl<T: Scalar> LinearEquivalent<T> {
    /// `G² + (2πC/T)²` or `R² + (2πL/T)²`.
    pub fn magnitude_squared(&self) -> T {
        let b = T::lit(2.0 * PI) * self.reactive / self.period;
        self.dissipative * self.dissipative + b * b
    }
}

fn equivalent<T: Scalar>(kind: EquivalentKind, drive: &[T], response: &[T], period: T) -> Result<LinearEquivalent<T>> {
    if drive.len() != response.len() {
        return Err(Error::LengthMismatch { left: drive.len(), right: response.len() });
    }
    if drive.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: drive.len() });
    }
    if !(period > T::zero()) {
        return Err(Error::InvalidParameter("period must be positive".into()));
    }
    let dt = period / T::of_usize(drive.len() - 1);
    let sq = |a: &[T], b: &[T]| -> T {
        let prod: Vec<T> = a.iter().zip(b).map(|(x, y)| *x * *y).collect();
        trapezoid(&prod, dt)
    };
    let dd = sq(drive, drive);
    let rr = sq(response, response);
    let e = sq(drive, response);
    if !(dd > T::zero()) {
        return Err(Error::DegenerateWaveform);
    }
    let product = dd * rr;
    let raw = product - e * e;
    let radicand = if product > T::zero() { raw / product } else { T::zero() };
    let reactive = if raw > T::zero() {
        period / (T::lit(2.0 * PI) * dd) * raw.sqrt()
    } else {
        T::zero()
    };
    Ok(LinearEquivalent {
        kind,
        dissipative: e / dd,
        reactive,
        period,
        magnitude: (rr / dd).sqrt(),
        radicand,
    })
}

/// Parallel G-C two-port from one period of `v` and `i` (uniform samples,
/// first and last sample one period apart).
pub fn gc_equivalent<T: Scalar>(v: &[T], i: &[T], period: T) -> Result<LinearEquivalent<T>> {
    equivalent(EquivalentKind::ParallelGC, v, i, period)
}

/// Series R-L two-port, the dual of [`gc_equivalent`].
pub fn rl_equivalent<T: Scalar>(v: &[T], i: &[T], period: T) -> Result<LinearEquivalent<T>> {
    equivalent(EquivalentKind::SeriesRL, i, v, period)
}

fn rms<T: Scalar>(a: &[T], period: T) -> T {
    let dt = period / T::of_usize(a.len() - 1);
    let sq: Vec<T> = a.iter().map(|x| *x * *x).collect();
    (trapezoid(&sq, dt) / period).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceChecks {
    /// `|G² + (2πC/T)² - Ii/Vv|`, relative.
    pub admittance_identity: f64,
    /// `|R² + (2πL/T)² - Vv/Ii|`, relative.
    pub impedance_identity: f64,
    pub radicand: f64,
    /// `| |Y| v_rms - i_rms |`, relative.
    pub rms_match: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub v_rms: f64,
    pub i_rms: f64,
    pub checks: EquivalenceChecks,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Both equivalents of one period with their self-checks.
pub fn equivalence_report(v: &[f64], i: &[f64], period: f64) -> Result<EquivalenceReport> {
    let gc = gc_equivalent(v, i, period)?;
    let rl = rl_equivalent(v, i, period)?;
    let (v_rms, i_rms) = (rms(v, period), rms(i, period));
    let admittance_identity = rel(gc.magnitude_squared(), gc.magnitude * gc.magnitude);
    let impedance_identity = rel(rl.magnitude_squared(), rl.magnitude * rl.magnitude);
    let rms_match = rel(gc.magnitude * v_rms, i_rms);
    let checks = EquivalenceChecks {
        admittance_identity,
        impedance_identity,
        radicand: gc.radicand,
        rms_match,
        pass: admittance_identity <= 1e-10
            && impedance_identity <= 1e-10
            && gc.radicand >= RADICAND_FLOOR
            && rms_match <= 1e-8,
    };
    Ok(EquivalenceReport { g: gc.dissipative, c: gc.reactive, r: rl.dissipative, l: rl.reactive, period, v_rms, i_rms, checks })
}

/// One period as `t,v,i` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSamples {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub i: Vec<f64>,
}

impl PeriodSamples {
    pub fn period(&self) -> f64 {
        self.t[self.t.len() - 1] - self.t[0]
    }
}

/// Reads a `t,v,i` CSV with a header row.
pub fn read_period_csv<R: Read>(input: R) -> Result<PeriodSamples> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers().map_err(|e| Error::Csv { row: 1, msg: e.to_string() })?;
    if header.iter().collect::<Vec<_>>() != ["t", "v", "i"] {
        return Err(Error::Csv { row: 1, msg: "expected header t,v,i".into() });
    }
    let mut out = PeriodSamples { t: Vec::new(), v: Vec::new(), i: Vec::new() };
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| Error::Csv { row, msg: e.to_string() })?;
        let vals = parse_row::<f64>(&rec, 3, row)?;
        out.t.push(vals[0]);
        out.v.push(vals[1]);
        out.i.push(vals[2]);
    }
    if out.t.len() < 3 {
        return Err(Error::Csv { row: out.t.len() + 2, msg: "need at least three samples".into() });
    }
    let dt = out.period() / (out.t.len() - 1) as f64;
    for (k, w) in out.t.windows(2).enumerate() {
        if !(w[1] > w[0]) || ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(Error::Csv { row: k + 3, msg: "times must be uniformly increasing".into() });
        }
    }
    Ok(out)
}
