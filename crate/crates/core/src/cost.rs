//! Edge cost functions.
//!
//! [`wfunc`] is the travel time along a straight ground track through a
//! time-varying current; [`afunc`] is the cross-track (XTE) area of a segment
//! relative to the desired straight track.

use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::flow_field::FlowField;
use crate::geom::{cross, heading_of, unit, Vec2};
use crate::zermelo::{step_size_update, StepControl};

/// Heading through the water that keeps the ground track on a given course.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heading {
    pub theta: f64,
    pub v_ground: f64,
}

/// Solves the velocity triangle `current + v·(cos θ, sin θ) ∥ course`.
///
/// Returns `None` (no progress) when the cross-course current exceeds the
/// vehicle speed or the resulting ground speed is not positive.
pub fn solve_heading(course: f64, current: &Vec2, v_veh_bf: f64) -> Option<Heading> {
    let along = unit(course);
    let c_along = current.dot(&along);
    let c_cross = cross(&along, current);
    if c_cross.abs() > v_veh_bf {
        return None;
    }
    let v_ground = c_along + (v_veh_bf * v_veh_bf - c_cross * c_cross).sqrt();
    if v_ground <= 0.0 {
        return None;
    }
    Some(Heading {
        theta: course - (c_cross / v_veh_bf).asin(),
        v_ground,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CostContext<'a> {
    pub field: &'a dyn FlowField,
    pub v_veh_bf: f64,
    pub step: StepControl,
}

impl<'a> CostContext<'a> {
    pub fn new(field: &'a dyn FlowField, v_veh_bf: f64) -> Result<Self> {
        Self::with_step(field, v_veh_bf, StepControl::default())
    }

    pub fn with_step(field: &'a dyn FlowField, v_veh_bf: f64, step: StepControl) -> Result<Self> {
        if !(v_veh_bf > 0.0 && v_veh_bf.is_finite()) {
            return Err(Error::arg("vehicle speed must be positive"));
        }
        step.validate()?;
        if step.h_max > 1.0 {
            return Err(Error::arg("edge sub-step fraction h_max must be <= 1"));
        }
        Ok(Self {
            field,
            v_veh_bf,
            step,
        })
    }
}

/// Travel time along the straight segment `from → to` departing at `t_start`.
///
/// The segment is traversed with the course held fixed. Sub-segments of
/// length `h·‖to − from‖` are integrated with a predictor using the current
/// at the sub-segment start and a corrector using the mean current of both
/// ends; the time difference between the two drives the step control.
/// Returns `f64::INFINITY` when any evaluated point admits no progress
/// along the course or the traversal leaves the field's validity window.
pub fn wfunc(from: &Vec2, to: &Vec2, t_start: f64, ctx: &CostContext, tally: &mut Tally) -> f64 {
    tally.cfc += 1;
    let seg = to - from;
    let length = seg.norm();
    if length == 0.0 {
        return 0.0;
    }
    let course = heading_of(&seg);
    let dir = seg / length;
    let v = ctx.v_veh_bf;
    let sc = &ctx.step;

    let Ok(mut c_start) = ctx.field.sample(from, t_start, tally).map(|s| s.c) else {
        return f64::INFINITY;
    };
    let Some(mut g_start) = solve_heading(course, &c_start, v).map(|h| h.v_ground) else {
        return f64::INFINITY;
    };

    let mut travelled = 0.0;
    let mut elapsed = 0.0;
    let mut h = sc.h0;
    loop {
        let remaining = length - travelled;
        let last = h * length >= remaining;
        let ds = if last { remaining } else { h * length };
        let dt_rough = ds / g_start;
        let p_end = if last { *to } else { from + dir * (travelled + ds) };
        let Ok(c_end) = ctx.field.sample(&p_end, t_start + elapsed + dt_rough, tally).map(|s| s.c) else {
            return f64::INFINITY;
        };
        let Some(g_mean) = solve_heading(course, &(0.5 * (c_start + c_end)), v) else {
            return f64::INFINITY;
        };
        let dt_improved = ds / g_mean.v_ground;
        let error = (dt_improved - dt_rough).abs();
        h = step_size_update(h, error, sc);
        if error < sc.eps || h == sc.h_min {
            let Some(g_end) = solve_heading(course, &c_end, v) else {
                return f64::INFINITY;
            };
            elapsed += dt_improved;
            if last {
                return elapsed;
            }
            travelled += ds;
            c_start = c_end;
            g_start = g_end.v_ground;
        }
    }
}

/// Signed cross-track distance of `p` from the infinite line `s → g`
/// (positive to the left).
pub fn cross_track(p: &Vec2, s: &Vec2, g: &Vec2) -> f64 {
    let d = (g - s).normalize();
    cross(&d, &(p - s))
}

/// Unsigned area between segment `u → v` and the line through `s → g`.
pub fn afunc(u: &Vec2, v: &Vec2, s: &Vec2, g: &Vec2) -> f64 {
    let dir = (g - s).normalize();
    let along = (v - u).dot(&dir).abs();
    // lattice round-off should not turn collinear points into slivers
    let floor = 1e-12 * (1.0 + (u - s).norm() + (v - s).norm());
    let snap = |e: f64| if e.abs() <= floor { 0.0 } else { e };
    let eu = snap(cross(&dir, &(u - s)));
    let ev = snap(cross(&dir, &(v - s)));
    if eu * ev >= 0.0 {
        0.5 * (eu + ev).abs() * along
    } else {
        0.5 * (eu * eu + ev * ev) / (eu.abs() + ev.abs()) * along
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_field::{max_current_speed, MeanderingJet, Uniform};
    use crate::geom::{wrap_angle, BBox};
    use crate::validation::simulate_path;
    use crate::search::{Path, Waypoint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn heading_in_still_water_is_the_course() {
        let h = solve_heading(0.7, &Vec2::zeros(), 0.5).unwrap();
        assert!((h.theta - 0.7).abs() < 1e-15);
        assert!((h.v_ground - 0.5).abs() < 1e-15);
    }

    #[test]
    fn heading_compensates_cross_current() {
        let h = solve_heading(0.0, &Vec2::new(0.0, 0.3), 0.5).unwrap();
        assert!((h.theta + 0.6f64.asin()).abs() < 1e-12);
        assert!((h.theta + 0.6435).abs() < 1e-4);
        assert!((h.v_ground - 0.4).abs() < 1e-12);
        // reconstruct the ground vector
        let g = Vec2::new(0.0, 0.3) + 0.5 * unit(h.theta);
        assert!(g.y.abs() < 1e-12 && (g.x - 0.4).abs() < 1e-12);
        assert!(solve_heading(0.0, &Vec2::new(0.0, 0.6), 0.5).is_none());
        assert!(solve_heading(0.0, &Vec2::new(-0.6, 0.0), 0.5).is_none());
    }

    #[test]
    fn heading_round_trip_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for _ in 0..2000 {
            let course = rng.gen_range(-3.2..3.2);
            let c = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if let Some(h) = solve_heading(course, &c, 0.5) {
                let g = c + 0.5 * unit(h.theta);
                assert!(wrap_angle(heading_of(&g) - course).abs() < 1e-9);
                assert!((g.norm() - h.v_ground).abs() < 1e-12);
                checked += 1;
            }
        }
        assert!(checked > 500);
    }

    #[test]
    fn wfunc_in_still_water() {
        let field = Uniform::zero();
        let ctx = CostContext::new(&field, 0.5).unwrap();
        let mut tally = Tally::new();
        let w = wfunc(&Vec2::zeros(), &Vec2::new(0.4, 0.0), 3.0, &ctx, &mut tally);
        assert_eq!(w, 0.4 / 0.5);
        assert_eq!(tally.cfc, 1);
        assert!(tally.cmc >= 2);
    }

    #[test]
    fn wfunc_with_aligned_uniform_current() {
        let field = Uniform::new(0.2, 0.0);
        let ctx = CostContext::new(&field, 0.5).unwrap();
        let w = wfunc(&Vec2::zeros(), &Vec2::new(0.4, 0.0), 0.0, &ctx, &mut Tally::new());
        assert!((w - 0.4 / 0.7).abs() < 1e-12);
    }

    #[test]
    fn wfunc_against_fine_step_simulation_on_jet() {
        let field = MeanderingJet::default();
        let ctx = CostContext::new(&field, 0.5).unwrap();
        let (a, b) = (Vec2::zeros(), Vec2::new(0.4, 0.0));
        let w = wfunc(&a, &b, 0.0, &ctx, &mut Tally::new());
        let path = Path::new(vec![
            Waypoint { position: a, arrival: 0.0 },
            Waypoint { position: b, arrival: w },
        ]);
        let sim = simulate_path(&path, &field, 0.5, w / 1e4).unwrap();
        assert!((sim.arrival_time - w).abs() / w <= 1e-3, "wfunc {w} vs simulated {}", sim.arrival_time);
    }

    #[test]
    fn wfunc_is_infinite_against_overwhelming_current() {
        let field = Uniform::new(-0.6, 0.0);
        let ctx = CostContext::new(&field, 0.5).unwrap();
        let w = wfunc(&Vec2::zeros(), &Vec2::new(0.4, 0.0), 0.0, &ctx, &mut Tally::new());
        assert_eq!(w, f64::INFINITY);
    }

    #[test]
    fn wfunc_respects_speed_bound_on_random_jet_edges() {
        let field = MeanderingJet::default();
        let region = BBox::new(0.0, 12.0, -4.0, 4.0);
        let vmax = max_current_speed(&field, &region, (0.0, 50.0), [41, 41, 41]).unwrap();
        let ctx = CostContext::new(&field, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut tally = Tally::new();
        for _ in 0..1000 {
            let a = Vec2::new(rng.gen_range(0.0..12.0), rng.gen_range(-4.0..4.0));
            let ang = rng.gen_range(-3.2..3.2);
            let len = rng.gen_range(0.3..1.3);
            let b = a + len * unit(ang);
            let w = wfunc(&a, &b, rng.gen_range(0.0..50.0), &ctx, &mut tally);
            assert!(w > 0.0);
            assert!(w >= len / (0.5 + vmax), "edge faster than the speed bound");
        }
    }

    #[test]
    fn afunc_cases() {
        let (s, g) = (Vec2::zeros(), Vec2::new(10.0, 0.0));
        assert_eq!(afunc(&Vec2::new(1.0, 0.0), &Vec2::new(3.0, 0.0), &s, &g), 0.0);
        let r = afunc(&Vec2::new(1.0, 0.7), &Vec2::new(3.5, 0.7), &s, &g);
        assert!((r - 0.7 * 2.5).abs() < 1e-12);
        let x = afunc(&Vec2::new(1.0, 1.0), &Vec2::new(3.0, -1.0), &s, &g);
        assert!((x - 1.0).abs() < 1e-12);
        // oracle for the crossing case: midpoint-rule integral of |e| along the track
        let (u, v) = (Vec2::new(0.3, 0.9), Vec2::new(2.1, -0.4));
        let n = 100_000;
        let integral: f64 = (0..n)
            .map(|i| {
                let p = u + (v - u) * ((i as f64 + 0.5) / n as f64);
                p.y.abs() * (v.x - u.x) / n as f64
            })
            .sum();
        assert!((afunc(&u, &v, &s, &g) - integral).abs() < 1e-8);
    }

    #[test]
    fn afunc_invariant_under_rigid_motion() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let pts: Vec<Vec2> = (0..4)
                .map(|_| Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
                .collect();
            let rot = nalgebra::Rotation2::new(rng.gen_range(-3.2..3.2));
            let shift = Vec2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let m: Vec<Vec2> = pts.iter().map(|p| rot * p + shift).collect();
            let a = afunc(&pts[0], &pts[1], &pts[2], &pts[3]);
            let b = afunc(&m[0], &m[1], &m[2], &m[3]);
            assert!((a - b).abs() < 1e-9 * (1.0 + a));
        }
    }
}
