//! Optimal navigation in a current field.
//!
//! The time-optimal heading obeys Zermelo's navigation law
//!
//! ```text
//! dθ/dt = -u_y cos²θ + (u_x - v_y) cos θ sin θ + v_x sin²θ
//! ```
//!
//! which drives both the optimal-course prediction used to gate successors
//! during the search and the shooting integrator used as a continuous
//! reference solution.

use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::flow_field::{FlowField, FlowSample};
use crate::geom::{cross, heading_of, unit, Vec2};

/// Second-order step-size control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub eps: f64,
    /// Safety factor in `(0, 1]`.
    pub tau: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            h0: 0.5,
            h_min: 0.05,
            h_max: 1.0,
            eps: 1e-4,
            tau: 0.9,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let ok = self.h_min > 0.0
            && self.h_min <= self.h0
            && self.h0 <= self.h_max
            && self.h_max.is_finite()
            && self.eps > 0.0
            && self.tau > 0.0
            && self.tau <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::arg(format!("inconsistent step control {self:?}")))
        }
    }
}

/// Optimal step size for a second-order method:
/// `h' = max(h_min, min(h_max, τ·h·sqrt(ε / error)))`. Zero error yields `h_max`.
pub fn step_size_update(h: f64, error_local: f64, sc: &StepControl) -> f64 {
    if error_local <= 0.0 {
        return sc.h_max;
    }
    let h_opt = sc.tau * h * (sc.eps / error_local).sqrt();
    sc.h_min.max(sc.h_max.min(h_opt))
}

/// Heading rate of a time-optimal trajectory.
#[inline]
pub fn heading_rate(theta: f64, s: &FlowSample) -> f64 {
    let (sn, cs) = theta.sin_cos();
    let (u_x, u_y) = (s.du.x, s.du.y);
    let (v_x, v_y) = (s.dv.x, s.dv.y);
    -u_y * cs * cs + (u_x - v_y) * cs * sn + v_x * sn * sn
}

/// Heading that holds `course` over ground; when the cross current is too
/// strong the vehicle points fully against it.
fn course_heading(course: f64, current: &Vec2, v_veh_bf: f64) -> f64 {
    let c_cross = cross(&unit(course), current);
    course - (c_cross / v_veh_bf).clamp(-1.0, 1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptCourseParams {
    pub v_veh_bf: f64,
    pub step: StepControl,
}

impl OptCourseParams {
    pub fn new(v_veh_bf: f64) -> Self {
        Self {
            v_veh_bf,
            step: StepControl::default(),
        }
    }
}

const MAX_ACCEPTED_STEPS: usize = 10_000;

/// Predicts the optimal ground course leaving `x_start`.
///
/// The optimal trajectory is simulated from the midpoint of the previous
/// edge `x_pre → x_start` at the mean of both vertex times, starting with
/// the heading that holds the previous edge's course. Each step of length
/// `h·r_path` takes a rough heading update from the derivatives at the
/// step start and an improved one from the mean of both step ends; their
/// difference controls `h`. Integration stops once the distance from the
/// midpoint exceeds `r_path = 0.25·s_path_min + 0.5·‖x_start − x_pre‖`.
/// Returns the course over ground of the last accepted step.
pub fn calc_opt_dir(
    x_pre: &Vec2,
    x_start: &Vec2,
    t_pre: f64,
    t_start: f64,
    s_path_min: f64,
    field: &dyn FlowField,
    params: &OptCourseParams,
    tally: &mut Tally,
) -> Result<f64> {
    let s_pre = x_start - x_pre;
    if s_pre.norm() == 0.0 {
        return Err(Error::arg("previous edge has zero length"));
    }
    if !(t_pre < t_start) {
        return Err(Error::arg("previous edge times must increase"));
    }
    let v = params.v_veh_bf;
    let sc = &params.step;

    let mut t_local = 0.5 * (t_pre + t_start);
    let phi_path = heading_of(&s_pre);
    let x_intern = x_pre + 0.5 * s_pre;
    let mut x_local = x_intern;
    let mut r_travel = 0.0;
    let r_path = 0.25 * s_path_min + 0.5 * s_pre.norm();

    let mut s_start = field.sample(&x_local, t_local, tally)?;
    let mut theta = course_heading(phi_path, &s_start.c, v);
    let mut h = sc.h0;
    let mut v_og = s_start.c + v * unit(theta);
    let mut accepted = 0usize;
    let mut attempts = 0usize;

    while r_travel < r_path {
        attempts += 1;
        if accepted >= MAX_ACCEPTED_STEPS || attempts > 20 * MAX_ACCEPTED_STEPS {
            return Err(Error::Integration(
                "optimal-course prediction did not leave the start neighbourhood".into(),
            ));
        }
        let t_path = h * r_path / v;
        let theta_rough = theta + t_path * heading_rate(theta, &s_start);
        let v_rough = s_start.c + v * unit(theta_rough);
        let x_rough = x_local + t_path * v_rough;
        let s_end = field.sample(&x_rough, t_local + t_path, tally)?;
        let mean = s_start.mean(&s_end);
        let theta_improved = theta + t_path * heading_rate(theta, &mean);
        let v_improved = mean.c + v * unit(theta_improved);
        let x_end = x_local + t_path * v_improved;
        let error_local = (theta_rough - theta_improved).abs();
        h = step_size_update(h, error_local, sc);
        if error_local < sc.eps || h == sc.h_min {
            s_start = s_end;
            x_local = x_end;
            t_local += t_path;
            theta = theta_improved;
            v_og = v_improved;
            r_travel = (x_end - x_intern).norm();
            accepted += 1;
        }
    }
    Ok(heading_of(&v_og))
}

/// State `(x, y, θ)` of a steered vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShipState {
    pub position: Vec2,
    pub theta: f64,
}

fn derivative(field: &dyn FlowField, v: f64, st: &ShipState, t: f64) -> (Vec2, f64) {
    let s = field.eval(&st.position, t);
    (s.c + v * unit(st.theta), heading_rate(st.theta, &s))
}

/// One classical fourth-order Runge–Kutta step of the motion equations
/// `ẋ = u + v cos θ`, `ẏ = v + v sin θ` together with the heading law.
pub fn rk4_step(field: &dyn FlowField, v_veh_bf: f64, st: &ShipState, t: f64, dt: f64) -> ShipState {
    let offset = |k: &(Vec2, f64), f: f64| ShipState {
        position: st.position + f * k.0,
        theta: st.theta + f * k.1,
    };
    let k1 = derivative(field, v_veh_bf, st, t);
    let k2 = derivative(field, v_veh_bf, &offset(&k1, 0.5 * dt), t + 0.5 * dt);
    let k3 = derivative(field, v_veh_bf, &offset(&k2, 0.5 * dt), t + 0.5 * dt);
    let k4 = derivative(field, v_veh_bf, &offset(&k3, dt), t + dt);
    ShipState {
        position: st.position + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        theta: st.theta + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub position: Vec2,
    pub time: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub arrival: f64,
}

impl Trajectory {
    pub fn end(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

/// Integrates a time-optimal trajectory from `start` with initial heading
/// `theta0` over `[t0, t_end]` at fixed step `dt` (the last step is
/// shortened to land on `t_end`).
pub fn shoot_trajectory(
    start: &Vec2,
    theta0: f64,
    t0: f64,
    field: &dyn FlowField,
    v_veh_bf: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end > t0) {
        return Err(Error::arg("shooting needs dt > 0 and t_end > t0"));
    }
    field.window().check(t0)?;
    field.window().check(t_end)?;
    let steps = ((t_end - t0) / dt).ceil() as usize;
    let mut st = ShipState {
        position: *start,
        theta: theta0,
    };
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(TrajectorySample {
        position: st.position,
        time: t0,
        theta: st.theta,
    });
    let mut t = t0;
    for i in 0..steps {
        let t_next = if i + 1 == steps { t_end } else { t0 + (i + 1) as f64 * dt };
        st = rk4_step(field, v_veh_bf, &st, t, t_next - t);
        t = t_next;
        samples.push(TrajectorySample {
            position: st.position,
            time: t,
            theta: st.theta,
        });
    }
    Ok(Trajectory { samples, arrival: t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{wfunc, CostContext};
    use crate::flow_field::{LinearShear, MeanderingJet, Uniform};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn sc(h_min: f64, h_max: f64, eps: f64, tau: f64) -> StepControl {
        StepControl { h0: h_min, h_min, h_max, eps, tau }
    }

    #[test]
    fn step_size_examples() {
        let c = sc(1e-3, 1.0, 1e-3, 0.9);
        let h = step_size_update(0.1, 1e-2, &c);
        assert!((h - 0.9 * 0.1 * 0.1f64.sqrt()).abs() < 1e-15);
        assert!((h - 0.02846).abs() < 1e-5);
        assert!((step_size_update(0.5, 1e-3, &c) - 0.45).abs() < 1e-15);
        assert_eq!(step_size_update(0.5, 0.0, &c), 1.0);
        assert_eq!(step_size_update(0.5, 1e-300, &c), 1.0);
        assert_eq!(step_size_update(0.5, 1e6, &c), 1e-3);
    }

    #[test]
    fn heading_rate_trivial_fields() {
        let s = Uniform::new(0.3, -0.2).eval(&Vec2::zeros(), 0.0);
        for th in [0.0, 0.4, 2.0, -1.3] {
            assert_eq!(heading_rate(th, &s), 0.0);
        }
        let a = 0.37;
        let shear = LinearShear { a }.eval(&Vec2::new(1.0, 2.0), 0.0);
        assert!((heading_rate(0.0, &shear) - a).abs() < 1e-15);
    }

    #[test]
    fn heading_rate_on_jet_matches_finite_difference_derivatives() {
        let jet = MeanderingJet::default();
        let p = Vec2::zeros();
        let h = 1e-5;
        let c = |q: Vec2| jet.eval(&q, 0.0).c;
        let du = (c(p + Vec2::new(h, 0.0)) - c(p - Vec2::new(h, 0.0))) / (2.0 * h);
        let dv = (c(p + Vec2::new(0.0, h)) - c(p - Vec2::new(0.0, h))) / (2.0 * h);
        let fd = FlowSample {
            c: c(p),
            du: Vec2::new(du.x, dv.x),
            dv: Vec2::new(du.y, dv.y),
        };
        let exact = heading_rate(FRAC_PI_4, &jet.eval(&p, 0.0));
        assert!((exact - heading_rate(FRAC_PI_4, &fd)).abs() < 1e-8);
        // frozen from an independent high-precision differentiation of the stream function
        assert!((exact + 0.514_622_253).abs() < 1e-8, "{exact}");
    }

    fn opt_dir(field: &dyn FlowField, x_pre: Vec2, x_start: Vec2, t_pre: f64, t_start: f64) -> f64 {
        calc_opt_dir(&x_pre, &x_start, t_pre, t_start, 0.4, field, &OptCourseParams::new(0.5), &mut Tally::new())
            .unwrap()
    }

    #[test]
    fn opt_dir_in_still_water_continues_the_edge() {
        let phi = opt_dir(&Uniform::zero(), Vec2::new(1.0, 1.0), Vec2::new(1.8, 1.4), 0.0, 1.0);
        assert!((phi - 0.5f64.atan()).abs() < 1e-12);
    }

    #[test]
    fn opt_dir_in_uniform_current_continues_the_ground_track() {
        let phi = opt_dir(&Uniform::new(0.2, -0.1), Vec2::zeros(), Vec2::new(0.4, 0.4), 0.0, 1.0);
        assert!((phi - FRAC_PI_4).abs() < 1e-12);
    }

    /// Fixed tiny-step forward Euler integration of the same optimal-course
    /// problem (independent oracle).
    fn reference_opt_dir(field: &dyn FlowField, x_pre: Vec2, x_start: Vec2, t_pre: f64, t_start: f64) -> f64 {
        let v = 0.5;
        let s_pre = x_start - x_pre;
        let intern = x_pre + 0.5 * s_pre;
        let r_path = 0.25 * 0.4 + 0.5 * s_pre.norm();
        let mut t = 0.5 * (t_pre + t_start);
        let mut st = ShipState {
            position: intern,
            theta: course_heading(heading_of(&s_pre), &field.eval(&intern, t).c, v),
        };
        let dt = 1e-3 * r_path / v;
        loop {
            let next = rk4_step(field, v, &st, t, dt);
            t += dt;
            let moved = next.position - st.position;
            st = next;
            if (st.position - intern).norm() >= r_path {
                return heading_of(&moved);
            }
        }
    }

    fn refined(h_max: f64, h0: f64) -> OptCourseParams {
        let mut p = OptCourseParams::new(0.5);
        p.step.h_max = h_max;
        p.step.h0 = h0;
        p.step.h_min = h0.min(2e-4);
        p
    }

    #[test]
    fn opt_dir_on_jet_converges_to_fine_step_reference() {
        let jet = MeanderingJet::default();
        let ctx = CostContext::new(&jet, 0.5).unwrap();
        let (a, b) = (Vec2::zeros(), Vec2::new(0.4, 0.0));
        let t1 = wfunc(&a, &b, 0.0, &ctx, &mut Tally::new());
        let reference = reference_opt_dir(&jet, a, b, 0.0, t1);
        let p = refined(0.005, 0.005);
        let phi = calc_opt_dir(&a, &b, 0.0, t1, 0.4, &jet, &p, &mut Tally::new()).unwrap();
        assert!((phi - reference).abs() <= 1e-3, "{phi} vs {reference}");
        // the default step control takes a few long first-order steps
        let coarse = opt_dir(&jet, a, b, 0.0, t1);
        assert!((coarse - reference).abs() <= 0.05, "{coarse} vs {reference}");
    }

    #[test]
    fn opt_dir_is_insensitive_to_initial_step() {
        let jet = MeanderingJet::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let a = Vec2::new(rng.gen_range(0.0..12.0), rng.gen_range(-3.0..3.0));
            let b = a + 0.4 * crate::geom::unit(rng.gen_range(-0.5..0.5));
            let t = rng.gen_range(0.0..40.0);
            let mut dirs = Vec::new();
            for h0 in [0.0002, 0.0003, 0.0005] {
                let p = refined(0.0005, h0);
                dirs.push(calc_opt_dir(&a, &b, t, t + 0.5, 0.4, &jet, &p, &mut Tally::new()).unwrap());
            }
            let spread = dirs.iter().cloned().fold(f64::MIN, f64::max) - dirs.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 1e-3, "spread {spread} at {a:?}");
        }
    }

    #[test]
    fn opt_dir_rejects_degenerate_edges() {
        let f = Uniform::zero();
        let p = OptCourseParams::new(0.5);
        let mut t = Tally::new();
        assert!(calc_opt_dir(&Vec2::zeros(), &Vec2::zeros(), 0.0, 1.0, 0.4, &f, &p, &mut t).is_err());
        assert!(calc_opt_dir(&Vec2::zeros(), &Vec2::new(1.0, 0.0), 1.0, 1.0, 0.4, &f, &p, &mut t).is_err());
    }

    #[test]
    fn shooting_in_trivial_fields() {
        let tr = shoot_trajectory(&Vec2::zeros(), 0.3, 0.0, &Uniform::zero(), 0.5, 4.0, 0.01).unwrap();
        let end = tr.end();
        assert!((end.position - 2.0 * unit(0.3)).norm() < 1e-12);
        assert!((end.theta - 0.3).abs() < 1e-15);
        assert_eq!(tr.arrival, 4.0);
        let tr = shoot_trajectory(&Vec2::zeros(), 0.3, 0.0, &Uniform::new(0.1, 0.2), 0.5, 4.0, 0.01).unwrap();
        assert!((tr.end().position - (2.0 * unit(0.3) + Vec2::new(0.4, 0.8))).norm() < 1e-12);
        assert!(tr.samples.windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn shooting_converges_at_fourth_order() {
        let jet = MeanderingJet::default();
        let end = |dt: f64| {
            shoot_trajectory(&Vec2::new(0.5, -2.0), 0.9, 0.0, &jet, 0.5, 10.0, dt).unwrap().end().position
        };
        let (a, b, c) = (end(0.04), end(0.02), end(0.01));
        let ratio = (a - b).norm() / (b - c).norm();
        assert!((ratio - 16.0).abs() < 3.0, "convergence ratio {ratio}");
    }
}
