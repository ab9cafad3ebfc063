//! Independent oracles.
//!
//! None of these reuse the search engine or the adaptive edge integrator:
//! the simulator steps the kinematics directly, the enumerator walks every
//! simple path, and the optimal-control reference shoots Zermelo extremals.

use crate::cost::{solve_heading, wfunc, CostContext};
use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::flow_field::FlowField;
use crate::geom::{cross, heading_of, unit, Vec2};
use crate::graph::{Graph, VertexId};
use crate::search::{Path, Waypoint};
use crate::zermelo::{rk4_step, ShipState, Trajectory, TrajectorySample};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub departure: f64,
    pub arrival_time: f64,
    /// Largest distance from the planned ground track.
    pub max_cross_track: f64,
    pub edge_durations: Vec<f64>,
}

impl SimulationReport {
    pub fn travel_time(&self) -> f64 {
        self.arrival_time - self.departure
    }
}

/// Flies `path` with fixed time step `dt`, steering at every step towards
/// the end of the current edge with the heading that keeps the ground
/// velocity pointed at it. Positions advance with the midpoint rule.
///
/// `dt` should be well below the shortest edge traversal time (about
/// 1/1000 of it for sub-permille accuracy).
pub fn simulate_path(path: &Path, field: &dyn FlowField, v_veh_bf: f64, dt: f64) -> Result<SimulationReport> {
    if !(dt > 0.0) {
        return Err(Error::arg("dt must be positive"));
    }
    let Some(first) = path.waypoints.first() else {
        return Err(Error::arg("empty path"));
    };
    let departure = first.arrival;
    let mut t = departure;
    let mut edge_durations = Vec::with_capacity(path.waypoints.len().saturating_sub(1));
    let mut max_cross_track = 0.0f64;
    let fail = |p: Vec2, t: f64, reason: &str| Error::Simulation {
        x: p.x,
        y: p.y,
        t,
        reason: reason.to_string(),
    };

    for w in path.waypoints.windows(2) {
        let (from, to) = (w[0].position, w[1].position);
        let seg = to - from;
        let length = seg.norm();
        if length == 0.0 {
            edge_durations.push(0.0);
            continue;
        }
        let dir = seg / length;
        let t_edge = t;
        let mut p = from;
        loop {
            field.window().check(t).map_err(|_| fail(p, t, "left the field window"))?;
            let course = heading_of(&(to - p));
            let c = field.eval(&p, t).c;
            let h = solve_heading(course, &c, v_veh_bf).ok_or_else(|| fail(p, t, "current exceeds vehicle speed"))?;
            let steer = v_veh_bf * unit(h.theta);
            let mid = p + 0.5 * dt * (c + steer);
            let vel = field.eval(&mid, t + 0.5 * dt).c + steer;
            let next = p + dt * vel;
            let along_now = (p - from).dot(&dir);
            let along_next = (next - from).dot(&dir);
            if along_next >= length {
                let frac = ((length - along_now) / (along_next - along_now)).clamp(0.0, 1.0);
                t += frac * dt;
                break;
            }
            if along_next <= along_now {
                return Err(fail(p, t, "no progress along the edge"));
            }
            p = next;
            t += dt;
            max_cross_track = max_cross_track.max(cross(&dir, &(p - from)).abs());
        }
        edge_durations.push(t - t_edge);
    }
    Ok(SimulationReport {
        departure,
        arrival_time: t,
        max_cross_track,
        edge_durations,
    })
}

/// Largest graph accepted by [`exhaustive_search`].
pub const EXHAUSTIVE_LIMIT: usize = 30;

/// Minimum-arrival path over all simple paths `s → g`.
///
/// Arrival times accumulate edge by edge with [`wfunc`]; partial paths that
/// already arrive no earlier than the best complete path are cut, which is
/// exact because edge costs are positive.
pub fn exhaustive_search(
    graph: &Graph,
    s: VertexId,
    g: VertexId,
    t0: f64,
    ctx: &CostContext,
    max_vertices: usize,
) -> Result<Path> {
    let limit = max_vertices.min(EXHAUSTIVE_LIMIT);
    if graph.len() > limit {
        return Err(Error::TooLarge {
            vertices: graph.len(),
            limit,
        });
    }
    if s >= graph.len() || g >= graph.len() {
        return Err(Error::arg("vertex id out of range"));
    }

    struct Walk<'a, 'c> {
        graph: &'a Graph,
        ctx: &'a CostContext<'c>,
        goal: VertexId,
        on_path: Vec<bool>,
        stack: Vec<(VertexId, f64)>,
        best: Option<Vec<(VertexId, f64)>>,
        best_arrival: f64,
        tally: Tally,
    }

    impl Walk<'_, '_> {
        fn visit(&mut self) {
            let &(u, t) = self.stack.last().expect("non-empty");
            if u == self.goal {
                if t < self.best_arrival {
                    self.best_arrival = t;
                    self.best = Some(self.stack.clone());
                }
                return;
            }
            let pu = self.graph.position(u);
            for &v in self.graph.successors(u) {
                if self.on_path[v] {
                    continue;
                }
                let arrival = t + wfunc(&pu, &self.graph.position(v), t, self.ctx, &mut self.tally);
                if !(arrival < self.best_arrival) {
                    continue;
                }
                self.on_path[v] = true;
                self.stack.push((v, arrival));
                self.visit();
                self.stack.pop();
                self.on_path[v] = false;
            }
        }
    }

    let mut walk = Walk {
        graph,
        ctx,
        goal: g,
        on_path: vec![false; graph.len()],
        stack: vec![(s, t0)],
        best: None,
        best_arrival: f64::INFINITY,
        tally: Tally::new(),
    };
    walk.on_path[s] = true;
    walk.visit();
    let best = walk.best.ok_or(Error::NoPath)?;
    Ok(Path {
        vertices: best.iter().map(|&(v, _)| v).collect(),
        waypoints: best
            .iter()
            .map(|&(v, t)| Waypoint {
                position: graph.position(v),
                arrival: t,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Initial headings in the coarse scan.
    pub headings: usize,
    pub dt: f64,
    /// Longest mission considered.
    pub t_max: f64,
    /// Accepted terminal miss distance.
    pub tolerance: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            headings: 720,
            dt: 0.02,
            t_max: 40.0,
            tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Approach {
    distance: f64,
    arrival: f64,
}

fn closest_point_on_segment(a: &Vec2, b: &Vec2, p: &Vec2) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let s = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((a + s * ab - p).norm(), s)
}

/// Integrates one extremal over the horizon and returns its closest
/// approach to `goal` (earliest on ties), located on the sampled chords.
fn closest_approach(
    start: &Vec2,
    goal: &Vec2,
    theta0: f64,
    t0: f64,
    t_end: f64,
    field: &dyn FlowField,
    v: f64,
    dt: f64,
) -> Approach {
    let mut st = ShipState {
        position: *start,
        theta: theta0,
    };
    let mut t = t0;
    let mut best = Approach {
        distance: (start - goal).norm(),
        arrival: t0,
    };
    while t < t_end && field.window().contains(t + dt) {
        let next = rk4_step(field, v, &st, t, dt);
        let (d, s) = closest_point_on_segment(&st.position, &next.position, goal);
        if d < best.distance {
            best = Approach {
                distance: d,
                arrival: t + s * dt,
            };
        }
        st = next;
        t += dt;
    }
    best
}

/// Time-optimal continuous trajectory from `start` to `goal` by shooting.
///
/// The closest-approach distance over `[t0, t0 + t_max]` is scanned over
/// `opts.headings` initial headings. Local minima of the scan are refined,
/// nearest first, by golden-section search on the initial heading down to
/// 1e-10 rad; extremals passing within `opts.tolerance` of the goal count
/// as arrivals. Once an arrival is known, later refinements only integrate
/// up to it, since slower extremals cannot win.
pub fn optimal_control_reference(
    start: &Vec2,
    goal: &Vec2,
    t0: f64,
    field: &dyn FlowField,
    v_veh_bf: f64,
    opts: &ShootingOptions,
) -> Result<Trajectory> {
    if opts.headings < 4 || !(opts.dt > 0.0) || !(opts.t_max > 0.0) {
        return Err(Error::arg("bad shooting options"));
    }
    field.window().check(t0)?;
    if (start - goal).norm() <= opts.tolerance {
        return Ok(Trajectory {
            samples: vec![TrajectorySample {
                position: *start,
                time: t0,
                theta: 0.0,
            }],
            arrival: t0,
        });
    }
    let n = opts.headings;
    let step = std::f64::consts::TAU / n as f64;
    let base = heading_of(&(goal - start));
    let heading = |i: usize| base + step * i as f64;
    let shoot = |theta: f64, t_end: f64| closest_approach(start, goal, theta, t0, t_end, field, v_veh_bf, opts.dt);
    let scan: Vec<Approach> = (0..n).map(|i| shoot(heading(i), t0 + opts.t_max)).collect();

    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let d = scan[i].distance;
            d <= scan[(i + n - 1) % n].distance && d <= scan[(i + 1) % n].distance
        })
        .collect();
    minima.sort_by(|&a, &b| scan[a].distance.total_cmp(&scan[b].distance));

    let mut best: Option<(f64, f64)> = None;
    for i in minima {
        let horizon = best.map_or(t0 + opts.t_max, |(_, t)| t);
        let centre = heading(i);
        let objective = |th: f64| shoot(th, horizon).distance;
        let (theta, hit) = match crate::departure::golden_section(objective, centre - step, centre + step, 1e-10) {
            Ok(m) => (m.x, shoot(m.x, horizon)),
            Err(_) => continue,
        };
        if hit.distance <= opts.tolerance && best.map_or(true, |(_, t)| hit.arrival < t) {
            best = Some((theta, hit.arrival));
        }
    }
    let (theta0, arrival) = best.ok_or(Error::NoPath)?;
    if arrival <= t0 {
        return Err(Error::NoPath);
    }
    let mut traj = crate::zermelo::shoot_trajectory(start, theta0, t0, field, v_veh_bf, arrival, opts.dt)?;
    traj.arrival = arrival;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_field::{MeanderingJet, Uniform};
    use crate::geom::BBox;
    use crate::search::{extract_path, search, Preset, SearchConfig};

    fn straight(points: &[(f64, f64)], speed: f64, t0: f64) -> Path {
        let mut t = t0;
        let mut prev = Vec2::new(points[0].0, points[0].1);
        Path::new(
            points
                .iter()
                .map(|&(x, y)| {
                    let p = Vec2::new(x, y);
                    t += (p - prev).norm() / speed;
                    prev = p;
                    Waypoint { position: p, arrival: t }
                })
                .collect(),
        )
    }

    #[test]
    fn simulate_still_water() {
        let path = straight(&[(0.0, 0.0), (0.6, 0.0), (0.6, 0.4)], 0.5, 0.0);
        let r = simulate_path(&path, &Uniform::zero(), 0.5, 1e-4).unwrap();
        assert!((r.arrival_time - 2.0).abs() < 1e-9);
        assert_eq!(r.edge_durations.len(), 2);
        assert!((r.edge_durations.iter().sum::<f64>() - r.travel_time()).abs() < 1e-12);
    }

    #[test]
    fn simulate_aligned_current() {
        let path = straight(&[(0.0, 0.0), (0.7, 0.0)], 0.7, 0.0);
        let r = simulate_path(&path, &Uniform::new(0.2, 0.0), 0.5, 1e-4).unwrap();
        assert!((r.arrival_time - 1.0).abs() < 1e-9);
    }

    #[test]
    fn simulate_reports_infeasible_cross_current() {
        let path = straight(&[(0.0, 0.0), (1.0, 0.0)], 0.5, 0.0);
        let err = simulate_path(&path, &Uniform::new(0.0, 0.8), 0.5, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Simulation { .. }));
    }

    #[test]
    fn simulate_converges_when_halving_dt() {
        let jet = MeanderingJet::default();
        let path = straight(&[(1.0, -2.8), (1.8, -2.4), (2.6, -2.8)], 0.5, 3.0);
        let a = simulate_path(&path, &jet, 0.5, 4e-3).unwrap().arrival_time;
        let b = simulate_path(&path, &jet, 0.5, 2e-3).unwrap().arrival_time;
        let c = simulate_path(&path, &jet, 0.5, 1e-3).unwrap().arrival_time;
        // the heading is held over each step, so the error is first order
        let ratio = (a - b) / (b - c);
        assert!((1.6..2.4).contains(&ratio), "{ratio}");
    }

    #[test]
    fn exhaustive_matches_itve_on_small_grids() {
        let field = Uniform::new(0.1, 0.05);
        let ctx = CostContext::new(&field, 0.5).unwrap();
        for sectors in [1, 2] {
            let graph = Graph::build_grid(BBox::new(0.0, 1.2, 0.0, 1.2), 0.4, sectors).unwrap();
            let (s, g) = (0, graph.len() - 1);
            let oracle = exhaustive_search(&graph, s, g, 0.0, &ctx, 30).unwrap();
            let res = search(&graph, &SearchConfig::new(Preset::Itve), s, None, 0.0, &ctx).unwrap();
            assert_eq!(oracle.travel_time(), res.d[g]);
            assert_eq!(extract_path(&res, &graph, g).unwrap().travel_time(), oracle.travel_time());
        }
    }

    #[test]
    fn exhaustive_refuses_large_graphs() {
        let field = Uniform::zero();
        let ctx = CostContext::new(&field, 0.5).unwrap();
        let graph = Graph::build_grid(BBox::new(0.0, 4.0, 0.0, 4.0), 0.4, 1).unwrap();
        assert!(matches!(
            exhaustive_search(&graph, 0, 5, 0.0, &ctx, 30),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn shooting_reference_in_still_water() {
        let opts = ShootingOptions { t_max: 20.0, ..Default::default() };
        let tr = optimal_control_reference(&Vec2::zeros(), &Vec2::new(3.0, 4.0), 0.0, &Uniform::zero(), 0.5, &opts)
            .unwrap();
        assert!((tr.arrival - 10.0).abs() < 1e-3);
    }

    #[test]
    fn shooting_reference_in_uniform_current_matches_drift_triangle() {
        let c = Vec2::new(0.2, -0.1);
        let goal = Vec2::new(4.0, 2.0);
        let opts = ShootingOptions { t_max: 30.0, ..Default::default() };
        let tr = optimal_control_reference(&Vec2::zeros(), &goal, 0.0, &Uniform::new(c.x, c.y), 0.5, &opts).unwrap();
        // closed form: straight ground track at the drift-triangle ground speed
        let course = heading_of(&goal);
        let vg = solve_heading(course, &c, 0.5).unwrap().v_ground;
        let expected = goal.norm() / vg;
        assert!((tr.arrival - expected).abs() < 1e-4, "{} vs {expected}", tr.arrival);
    }
}
