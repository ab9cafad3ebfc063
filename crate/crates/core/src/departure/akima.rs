//! Akima's local cubic interpolation.
//!
//! Node slopes come from Akima's weighted average of the neighbouring
//! divided differences. Where the data are locally monotone the slope is
//! additionally limited to `3·min(|m_{i-1}|, |m_i|)` with the sign of the
//! data, which rules out overshoot on monotone stretches; slopes at local
//! extrema are left as Akima computes them.

use crate::error::{Error, Result};

/// Fewer nodes than this fall back to piecewise-linear interpolation.
pub const MIN_AKIMA_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Akima {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    linear: bool,
}

impl Akima {
    /// Builds the interpolant through `(xs[i], ys[i])`; `xs` must be strictly
    /// increasing and every value finite.
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::arg("need at least two nodes of matching length"));
        }
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(Error::arg("nodes must be finite"));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::arg("abscissae must be strictly increasing"));
        }
        let n = xs.len();
        let m: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let linear = n < MIN_AKIMA_POINTS;
        let slopes = if linear { Vec::new() } else { node_slopes(&m) };
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slopes,
            linear,
        })
    }

    /// True when too few nodes were given and the curve is piecewise linear.
    pub fn is_linear_fallback(&self) -> bool {
        self.linear
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    /// Evaluates the interpolant; arguments outside the node range are
    /// clamped to it.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let i = match self.xs.partition_point(|&xi| xi <= x) {
            0 => 0,
            k => (k - 1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        if self.linear {
            return y0 + s * (y1 - y0);
        }
        let (t0, t1) = (self.slopes[i], self.slopes[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * t0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * t1
    }
}

fn node_slopes(m: &[f64]) -> Vec<f64> {
    let k = m.len();
    // two extrapolated differences on each side
    let mut ext = Vec::with_capacity(k + 4);
    let l1 = 2.0 * m[0] - m[1];
    let l2 = 2.0 * l1 - m[0];
    let r1 = 2.0 * m[k - 1] - m[k - 2];
    let r2 = 2.0 * r1 - m[k - 1];
    ext.extend_from_slice(&[l2, l1]);
    ext.extend_from_slice(m);
    ext.extend_from_slice(&[r1, r2]);

    (0..=k)
        .map(|i| {
            // ext[i + 2] is the difference right of node i
            let (mm2, mm1, m0, mp1) = (ext[i], ext[i + 1], ext[i + 2], ext[i + 3]);
            let w1 = (mp1 - m0).abs();
            let w2 = (mm1 - mm2).abs();
            let t = if w1 + w2 > 0.0 {
                (w1 * mm1 + w2 * m0) / (w1 + w2)
            } else {
                0.5 * (mm1 + m0)
            };
            // neighbouring data differences; the ends only have one
            let left = if i == 0 { m[0] } else { m[i - 1] };
            let right = if i == k { m[k - 1] } else { m[i] };
            limit(t, left, right)
        })
        .collect()
}

fn limit(t: f64, left: f64, right: f64) -> f64 {
    if left * right < 0.0 {
        return t;
    }
    if left == 0.0 || right == 0.0 {
        return 0.0;
    }
    let bound = 3.0 * left.abs().min(right.abs());
    if t * left <= 0.0 {
        0.0
    } else {
        t.signum() * t.abs().min(bound)
    }
}
