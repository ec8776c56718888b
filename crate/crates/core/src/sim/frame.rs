use std::ops::Range;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Time-indexed multi-channel data: rows are timesteps, columns are channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    dt: f64,
    start_index: i64,
    channels: Vec<String>,
    values: Matrix,
}

impl TimeSeriesFrame {
    pub fn new(dt: f64, start_index: i64, channels: Vec<String>, values: Matrix) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        if values.nrows() == 0 {
            return Err(Error::invalid("values", "frame needs at least one row"));
        }
        if channels.len() != values.ncols() {
            return Err(Error::Dimension {
                context: "frame channel names",
                expected: values.ncols(),
                got: channels.len(),
            });
        }
        for (i, c) in channels.iter().enumerate() {
            if channels[..i].contains(c) {
                return Err(Error::invalid("channels", format!("duplicate channel `{c}`")));
            }
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("time series values"));
        }
        Ok(TimeSeriesFrame {
            dt,
            start_index,
            channels,
            values,
        })
    }

    /// Single-channel frame.
    pub fn from_series(dt: f64, start_index: i64, name: &str, series: &[f64]) -> Result<Self> {
        Self::new(
            dt,
            start_index,
            vec![name.to_string()],
            Matrix::from_column_slice(series.len(), 1, series),
        )
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn into_values(self) -> Matrix {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_channels(&self) -> usize {
        self.values.ncols()
    }

    /// Absolute step index of `row`.
    pub fn step(&self, row: usize) -> i64 {
        self.start_index + row as i64
    }

    /// Elapsed hours of `row` relative to step zero.
    pub fn hours(&self, row: usize) -> f64 {
        self.step(row) as f64 * self.dt / 3600.0
    }

    pub fn channel_index(&self, name: &str) -> Result<usize> {
        self.channels
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::invalid("channel", format!("no channel named `{name}`")))
    }

    pub fn channel(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.channel_index(name)?;
        Ok(self.values.column(i).iter().copied().collect())
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.column(i).iter().copied().collect()
    }

    /// Sub-frame with the named channels, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| self.channel_index(n))
            .collect::<Result<Vec<_>>>()?;
        let values = Matrix::from_fn(self.len(), idx.len(), |r, c| self.values[(r, idx[c])]);
        Self::new(
            self.dt,
            self.start_index,
            names.iter().map(|s| s.to_string()).collect(),
            values,
        )
    }

    /// Rows in `range`, keeping absolute step indices.
    pub fn slice(&self, range: Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::invalid(
                "range",
                format!("{range:?} is empty or outside 0..{}", self.len()),
            ));
        }
        let values = self.values.rows(range.start, range.len()).into_owned();
        Self::new(
            self.dt,
            self.start_index + range.start as i64,
            self.channels.clone(),
            values,
        )
    }

    pub fn with_channels(&self, channels: Vec<String>) -> Result<Self> {
        Self::new(self.dt, self.start_index, channels, self.values.clone())
    }

    pub fn with_values(&self, values: Matrix) -> Result<Self> {
        Self::new(self.dt, self.start_index, self.channels.clone(), values)
    }

    /// Column-wise concatenation of frames sharing dt, start and length.
    pub fn hstack(frames: &[&TimeSeriesFrame]) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::invalid("frames", "nothing to stack"))?;
        for f in frames {
            first.ensure_aligned(f)?;
        }
        let channels: Vec<String> = frames.iter().flat_map(|f| f.channels.clone()).collect();
        let total: usize = frames.iter().map(|f| f.n_channels()).sum();
        let mut values = Matrix::zeros(first.len(), total);
        let mut col = 0;
        for f in frames {
            values
                .columns_mut(col, f.n_channels())
                .copy_from(&f.values);
            col += f.n_channels();
        }
        Self::new(first.dt, first.start_index, channels, values)
    }

    /// Errors unless `other` has the same dt, start index and length.
    pub fn ensure_aligned(&self, other: &TimeSeriesFrame) -> Result<()> {
        if self.dt != other.dt || self.start_index != other.start_index {
            return Err(Error::invalid(
                "frames",
                format!(
                    "time axes differ: (dt {}, start {}) vs (dt {}, start {})",
                    self.dt, self.start_index, other.dt, other.start_index
                ),
            ));
        }
        if self.len() != other.len() {
            return Err(Error::Dimension {
                context: "paired frame length",
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    pub fn channel_means(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.values
            .column_iter()
            .map(|c| c.iter().sum::<f64>() / n)
            .collect()
    }
}
