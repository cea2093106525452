use std::io::{Read, Write};

use crate::circuits::{AugmentedState, CircuitModel, STATE_DIM};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column names of the trajectory CSV, in order.
pub const CSV_HEADER: [&str; STATE_DIM + 1] = ["t", "x", "y", "z", "w", "I_w", "I_gG", "I_gGt", "I_y", "I_z"];

/// Uniformly sampled solution together with the model that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<AugmentedState<T>>,
    pub model: CircuitModel<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(times: Vec<T>, states: Vec<AugmentedState<T>>, model: CircuitModel<T>) -> Self {
        assert_eq!(times.len(), states.len(), "one state per time");
        Self { times, states, model }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Grid spacing (zero for fewer than two samples).
    pub fn dt(&self) -> T {
        if self.len() < 2 {
            return T::zero();
        }
        (self.times[self.len() - 1] - self.times[0]) / T::of_usize(self.len() - 1)
    }

    /// One component of every state.
    pub fn series(&self, pick: impl Fn(&AugmentedState<T>) -> T) -> Vec<T> {
        self.states.iter().map(pick).collect()
    }

    /// Column `j` of the CSV layout (0 is time).
    pub fn column(&self, j: usize) -> Vec<T> {
        if j == 0 {
            self.times.clone()
        } else {
            self.series(|s| s.to_array()[j - 1])
        }
    }

    /// Samples `start..=end` as a new trajectory.
    pub fn window(&self, start: usize, end: usize) -> Self {
        Self::new(
            self.times[start..=end].to_vec(),
            self.states[start..=end].to_vec(),
            self.model.clone(),
        )
    }

    /// Interpolated state at an arbitrary time inside the span.
    pub fn state_at(&self, t: T) -> AugmentedState<T> {
        let mut a = [T::zero(); STATE_DIM];
        for (j, slot) in a.iter_mut().enumerate() {
            *slot = cubic_at(&self.times, |i| self.states[i].to_array()[j], t);
        }
        AugmentedState::from_array(a)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", CSV_HEADER.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut line = fmt17(*t);
            for v in s.to_array() {
                line.push(',');
                line.push_str(&fmt17(v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads a trajectory CSV; the model is not stored in the file.
    pub fn read_csv<R: Read>(input: R, model: CircuitModel<T>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = rdr.headers().map_err(|e| Error::Csv { row: 1, msg: e.to_string() })?;
        let names: Vec<&str> = header.iter().collect();
        if names != CSV_HEADER {
            return Err(Error::Csv { row: 1, msg: format!("expected header {}", CSV_HEADER.join(",")) });
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let row = k + 2;
            let rec = rec.map_err(|e| Error::Csv { row, msg: e.to_string() })?;
            let vals = parse_row::<T>(&rec, CSV_HEADER.len(), row)?;
            times.push(vals[0]);
            let mut a = [T::zero(); STATE_DIM];
            a.copy_from_slice(&vals[1..]);
            states.push(AugmentedState::from_array(a));
        }
        if times.len() < 2 {
            return Err(Error::Csv { row: times.len() + 2, msg: "need at least two samples".into() });
        }
        for (k, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Csv { row: k + 3, msg: "times must increase".into() });
            }
        }
        Ok(Self::new(times, states, model))
    }

    /// Whitespace separated columns for gnuplot, preceded by a `#` header.
    pub fn write_plot_columns<W: Write>(&self, mut out: W, columns: &[usize]) -> Result<()> {
        let names: Vec<&str> = columns.iter().map(|&j| CSV_HEADER[j]).collect();
        writeln!(out, "# {}", names.join(" "))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let a = s.to_array();
            let row: Vec<String> = columns
                .iter()
                .map(|&j| fmt17(if j == 0 { *t } else { a[j - 1] }))
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Index of a CSV column by name.
pub fn column_index(name: &str) -> Option<usize> {
    CSV_HEADER.iter().position(|&c| c == name)
}

pub(crate) fn parse_row<T: Scalar>(rec: &csv::StringRecord, width: usize, row: usize) -> Result<Vec<T>> {
    if rec.len() != width {
        return Err(Error::Csv { row, msg: format!("expected {width} fields, found {}", rec.len()) });
    }
    rec.iter()
        .enumerate()
        .map(|(j, field)| {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Csv { row, msg: format!("column {}: cannot parse {field:?}", j + 1) })?;
            if !v.is_finite() {
                return Err(Error::Csv { row, msg: format!("column {}: non-finite value", j + 1) });
            }
            Ok(T::lit(v))
        })
        .collect()
}

/// 17 significant digits.
pub(crate) fn fmt17<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

/// Four-point Lagrange interpolation on a uniform grid. Grid nodes and
/// both end points are returned exactly.
pub fn cubic_at<T: Scalar>(times: &[T], value: impl Fn(usize) -> T, t: T) -> T {
    let n = times.len();
    assert!(n > 0, "interpolation needs samples");
    if n == 1 || t <= times[0] {
        return value(0);
    }
    if t >= times[n - 1] {
        return value(n - 1);
    }
    let dt = (times[n - 1] - times[0]) / T::of_usize(n - 1);
    let p = (t - times[0]) / dt;
    let nearest = p.round();
    if (p - nearest).abs() <= T::lit(1e-10) {
        return value(nearest.to_usize().unwrap_or(0).min(n - 1));
    }
    let cell = p.floor().to_usize().unwrap_or(0).min(n - 2);
    let m = n.min(4);
    let start = cell.saturating_sub(1).min(n - m);
    let u = p - T::of_usize(start);
    let mut acc = T::zero();
    for j in 0..m {
        let mut wgt = T::one();
        for k in 0..m {
            if k != j {
                wgt = wgt * (u - T::of_usize(k)) / (T::of_usize(j) - T::of_usize(k));
            }
        }
        acc += wgt * value(start + j);
    }
    acc
}

/// Cubic resampling onto `n` uniform points over the same span.
pub fn resample<T: Scalar>(traj: &Trajectory<T>, n: usize) -> Result<Trajectory<T>> {
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    if traj.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    let t0 = traj.times[0];
    let t1 = traj.times[traj.len() - 1];
    let dt = (t1 - t0) / T::of_usize(n - 1);
    let mut times: Vec<T> = (0..n).map(|i| t0 + T::of_usize(i) * dt).collect();
    times[n - 1] = t1;
    let states = times.iter().map(|&t| traj.state_at(t)).collect();
    Ok(Trajectory::new(times, states, traj.model.clone()))
}
