//! Time-varying 2-D current fields.
//!
//! Every field returns the current vector together with its four spatial
//! partial derivatives. Derivatives are analytic; the finite-difference
//! versions in the tests are oracles only.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::geom::{BBox, Vec2};

/// Current and its spatial derivatives at one point and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    /// Current vector `(u, v)`.
    pub c: Vec2,
    /// `(∂u/∂x, ∂u/∂y)`.
    pub du: Vec2,
    /// `(∂v/∂x, ∂v/∂y)`.
    pub dv: Vec2,
}

impl FlowSample {
    pub fn uniform(c: Vec2) -> Self {
        Self {
            c,
            du: Vec2::zeros(),
            dv: Vec2::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().chain(self.du.iter()).chain(self.dv.iter()).all(|x| x.is_finite())
    }

    /// Component-wise arithmetic mean of two samples.
    pub fn mean(&self, other: &FlowSample) -> FlowSample {
        FlowSample {
            c: 0.5 * (self.c + other.c),
            du: 0.5 * (self.du + other.du),
            dv: 0.5 * (self.dv + other.dv),
        }
    }
}

/// Time interval over which a field is defined (the forecast window).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub start: f64,
    pub horizon: f64,
}

impl TimeWindow {
    pub const UNBOUNDED: TimeWindow = TimeWindow {
        start: f64::NEG_INFINITY,
        horizon: f64::INFINITY,
    };

    pub fn new(start: f64, horizon: f64) -> Result<Self> {
        if start.is_nan() || horizon.is_nan() || start > horizon {
            return Err(Error::arg(format!("bad time window [{start}, {horizon}]")));
        }
        Ok(Self { start, horizon })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.horizon
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutsideWindow {
                t,
                start: self.start,
                horizon: self.horizon,
            })
        }
    }
}

pub trait FlowField: Send + Sync + fmt::Debug {
    /// Raw evaluation: no window check, no counting.
    fn eval(&self, p: &Vec2, t: f64) -> FlowSample;

    fn window(&self) -> TimeWindow {
        TimeWindow::UNBOUNDED
    }

    /// Counted, window-checked sample. Every successful or failed call
    /// increments the current-model-call tally.
    fn sample(&self, p: &Vec2, t: f64, tally: &mut Tally) -> Result<FlowSample> {
        tally.cmc += 1;
        if !(p.x.is_finite() && p.y.is_finite() && t.is_finite()) {
            return Err(Error::arg("non-finite sample position or time"));
        }
        self.window().check(t)?;
        Ok(self.eval(p, t))
    }
}

impl<F: FlowField + ?Sized> FlowField for &F {
    fn eval(&self, p: &Vec2, t: f64) -> FlowSample {
        (**self).eval(p, t)
    }
    fn window(&self) -> TimeWindow {
        (**self).window()
    }
}

impl<F: FlowField + ?Sized> FlowField for Box<F> {
    fn eval(&self, p: &Vec2, t: f64) -> FlowSample {
        (**self).eval(p, t)
    }
    fn window(&self) -> TimeWindow {
        (**self).window()
    }
}

impl<F: FlowField + ?Sized> FlowField for Arc<F> {
    fn eval(&self, p: &Vec2, t: f64) -> FlowSample {
        (**self).eval(p, t)
    }
    fn window(&self) -> TimeWindow {
        (**self).window()
    }
}

/// Spatially and temporally constant current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    pub c: Vec2,
}

impl Uniform {
    pub fn new(u: f64, v: f64) -> Self {
        Self { c: Vec2::new(u, v) }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0)
    }
}

impl FlowField for Uniform {
    fn eval(&self, _p: &Vec2, _t: f64) -> FlowSample {
        FlowSample::uniform(self.c)
    }
}

/// Linear shear `u = -a·y`, `v = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearShear {
    pub a: f64,
}

impl FlowField for LinearShear {
    fn eval(&self, p: &Vec2, _t: f64) -> FlowSample {
        FlowSample {
            c: Vec2::new(-self.a * p.y, 0.0),
            du: Vec2::new(0.0, -self.a),
            dv: Vec2::zeros(),
        }
    }
}

/// Westward (negative-x) current confined to a smooth rectangular band.
///
/// The band profile is `½(tanh((s-lo)/w) - tanh((s-hi)/w))` along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdverseBand {
    pub speed: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub edge_width: f64,
}

fn smooth_window(s: f64, lo: f64, hi: f64, w: f64) -> (f64, f64) {
    let a = ((s - lo) / w).tanh();
    let b = ((s - hi) / w).tanh();
    (0.5 * (a - b), 0.5 * ((1.0 - a * a) - (1.0 - b * b)) / w)
}

impl FlowField for AdverseBand {
    fn eval(&self, p: &Vec2, _t: f64) -> FlowSample {
        let (wx, dwx) = smooth_window(p.x, self.x_range.0, self.x_range.1, self.edge_width);
        let (wy, dwy) = smooth_window(p.y, self.y_range.0, self.y_range.1, self.edge_width);
        FlowSample {
            c: Vec2::new(-self.speed * wx * wy, 0.0),
            du: Vec2::new(-self.speed * dwx * wy, -self.speed * wx * dwy),
            dv: Vec2::zeros(),
        }
    }
}

/// Parameters of the meandering-jet stream function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanderingJetParams {
    pub b0: f64,
    pub eps: f64,
    pub omega: f64,
    pub theta0: f64,
    pub k: f64,
    pub c_phase: f64,
}

impl Default for MeanderingJetParams {
    fn default() -> Self {
        Self {
            b0: 1.2,
            eps: 0.3,
            omega: 0.4,
            theta0: FRAC_PI_2,
            k: 0.84,
            c_phase: 0.12,
        }
    }
}

/// Eastward meandering jet, a kinematic model of the Gulf Stream:
///
/// ```text
/// φ(x, y, t) = 1 - tanh[(y - B(t) cos k(x - ct)) / sqrt(1 + k²B(t)² sin² k(x - ct))]
/// B(t)       = B0 + ε cos(ωt + θ0)
/// u = -∂φ/∂y,  v = ∂φ/∂x
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanderingJet {
    pub params: MeanderingJetParams,
}

impl MeanderingJet {
    pub fn new(params: MeanderingJetParams) -> Self {
        Self { params }
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        let p = &self.params;
        p.b0 + p.eps * (p.omega * t + p.theta0).cos()
    }

    pub fn stream_function(&self, pos: &Vec2, t: f64) -> f64 {
        let p = &self.params;
        let b = self.amplitude(t);
        let s = p.k * (pos.x - p.c_phase * t);
        let d = (1.0 + p.k * p.k * b * b * s.sin().powi(2)).sqrt();
        1.0 - ((pos.y - b * s.cos()) / d).tanh()
    }
}

impl FlowField for MeanderingJet {
    fn eval(&self, pos: &Vec2, t: f64) -> FlowSample {
        let k = self.params.k;
        let b = self.amplitude(t);
        let (sn, cs) = (k * (pos.x - self.params.c_phase * t)).sin_cos();

        // ξ = n / d with n = y - B cos s, d = sqrt(1 + k²B² sin² s)
        let kb2 = k * k * b * b;
        let d2 = 1.0 + kb2 * sn * sn;
        let d = d2.sqrt();
        let n = pos.y - b * cs;
        let xi = n / d;

        let n_x = b * k * sn;
        let n_xx = b * k * k * cs;
        let d_x = k * kb2 * sn * cs / d;
        let d_xx = (k * k * kb2 * (cs * cs - sn * sn) - d_x * d_x) / d;

        let xi_x = n_x / d - n * d_x / d2;
        let xi_y = 1.0 / d;
        let xi_xx = n_xx / d - 2.0 * n_x * d_x / d2 - n * d_xx / d2 + 2.0 * n * d_x * d_x / (d2 * d);
        let xi_xy = -d_x / d2;

        // sech²ξ and its ξ-derivative
        let th = xi.tanh();
        let sech2 = 1.0 - th * th;
        let dsech2 = -2.0 * sech2 * th;

        FlowSample {
            c: Vec2::new(sech2 * xi_y, -sech2 * xi_x),
            du: Vec2::new(dsech2 * xi_x * xi_y + sech2 * xi_xy, dsech2 * xi_y * xi_y),
            dv: Vec2::new(
                -(dsech2 * xi_x * xi_x + sech2 * xi_xx),
                -(dsech2 * xi_y * xi_x + sech2 * xi_xy),
            ),
        }
    }
}

/// Restricts an inner field to a validity window.
#[derive(Debug, Clone)]
pub struct Windowed<F> {
    pub inner: F,
    pub window: TimeWindow,
}

impl<F: FlowField> Windowed<F> {
    pub fn new(inner: F, window: TimeWindow) -> Self {
        Self { inner, window }
    }
}

impl<F: FlowField> FlowField for Windowed<F> {
    fn eval(&self, p: &Vec2, t: f64) -> FlowSample {
        self.inner.eval(p, t)
    }

    fn window(&self) -> TimeWindow {
        self.window
    }
}

/// Default inflation applied to the lattice maximum of the current speed.
pub const DEFAULT_SPEED_SAFETY: f64 = 1.05;

/// Maximum current speed over a lattice spanning `region × [t_lo, t_hi]`,
/// inflated by [`DEFAULT_SPEED_SAFETY`].
pub fn max_current_speed(
    field: &dyn FlowField,
    region: &BBox,
    window: (f64, f64),
    lattice: [usize; 3],
) -> Result<f64> {
    max_current_speed_with_safety(field, region, window, lattice, DEFAULT_SPEED_SAFETY)
}

pub fn max_current_speed_with_safety(
    field: &dyn FlowField,
    region: &BBox,
    (t_lo, t_hi): (f64, f64),
    lattice: [usize; 3],
    safety: f64,
) -> Result<f64> {
    if !(region.width() > 0.0 && region.height() > 0.0) {
        return Err(Error::arg("empty region"));
    }
    if !(t_lo.is_finite() && t_hi.is_finite() && t_hi >= t_lo) {
        return Err(Error::arg("empty or unbounded time window"));
    }
    if lattice.iter().any(|&n| n < 2) {
        return Err(Error::arg("lattice needs at least 2 points per axis"));
    }
    if !(safety >= 1.0) {
        return Err(Error::arg("safety factor must be >= 1"));
    }
    let [nx, ny, nt] = lattice;
    let at = |lo: f64, hi: f64, n: usize, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let max = (0..nt)
        .into_par_iter()
        .map(|it| {
            let t = at(t_lo, t_hi, nt, it);
            let mut m = 0.0f64;
            for iy in 0..ny {
                let y = at(region.min.y, region.max.y, ny, iy);
                for ix in 0..nx {
                    let x = at(region.min.x, region.max.x, nx, ix);
                    m = m.max(field.eval(&Vec2::new(x, y), t).c.norm());
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    Ok(max * safety)
}
