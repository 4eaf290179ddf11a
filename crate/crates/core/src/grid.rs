use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling of a finite time interval. Shared clock for waveforms,
/// pulses and trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n: usize) -> Result<Self> {
        if !t_start.is_finite() {
            return Err(Error::invalid("t_start", "must be finite"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 samples, got {n}")));
        }
        Ok(TimeGrid { t_start, dt, n })
    }

    /// `n` samples with the first at `t_start` and the last at `t_end`.
    pub fn spanning(t_start: f64, t_end: f64, n: usize) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::invalid("t_end", "must exceed t_start"));
        }
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 samples, got {n}")));
        }
        Self::new(t_start, (t_end - t_start) / (n - 1) as f64, n)
    }

    /// Finest uniform grid on `[t_start, t_end]` whose step does not exceed `max_dt`.
    pub fn with_max_step(t_start: f64, t_end: f64, max_dt: f64) -> Result<Self> {
        if !(max_dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        let intervals = ((t_end - t_start) / max_dt).ceil().max(1.0) as usize;
        Self::spanning(t_start, t_end, intervals + 1)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.n - 1)
    }

    pub fn span(&self) -> f64 {
        self.dt * (self.n - 1) as f64
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.t(i))
    }

    /// Same grid shifted in time.
    pub fn shifted(&self, offset: f64) -> Self {
        TimeGrid {
            t_start: self.t_start + offset,
            ..*self
        }
    }

    pub fn ensure_same(&self, other: &TimeGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(t_start={}, dt={}, n={}) vs (t_start={}, dt={}, n={})",
                self.t_start, self.dt, self.n, other.t_start, other.dt, other.n
            )))
        }
    }
}
