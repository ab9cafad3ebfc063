//! Optimal departure time detection.
//!
//! The travel time as a function of departure time is sampled on a coarse
//! grid, interpolated with [`Akima`], and the support interval around the
//! interpolant's global minimum is refined with a one-dimensional
//! minimizer. Departures without a feasible path sample as `+∞` and split
//! the window into independently treated finite runs.

mod akima;
mod minimize;

use std::cell::{Cell, RefCell};

use rayon::prelude::*;

pub use akima::{Akima, MIN_AKIMA_POINTS};
pub use minimize::{brent, fibonacci_search, golden_section, Method, Minimum};

use crate::cost::CostContext;
use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::search::{search, SearchConfig};

/// Number of points at which the interpolant is scanned for its minimum.
pub const DENSE_SCAN_POINTS: usize = 1000;

/// Travel times this close (relative) count as equal when breaking ties.
pub const TIE_RTOL: f64 = 1e-12;

/// Strictly lower travel time, or a tie at an earlier departure.
fn better(a: &Sample, b: &Sample) -> bool {
    if ties(a.t_trav, b.t_trav) {
        a.t_dep < b.t_dep
    } else {
        a.t_trav < b.t_trav
    }
}

fn ties(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= TIE_RTOL * a.abs().max(b.abs()))
}

/// Travel time of one planning run; infinite when no path exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub travel_time: f64,
    pub tally: Tally,
}

impl Evaluation {
    pub fn infeasible(tally: Tally) -> Self {
        Self {
            travel_time: f64::INFINITY,
            tally,
        }
    }
}

/// A planner maps a departure time to an [`Evaluation`].
pub type Planner<'a> = dyn Fn(f64) -> Result<Evaluation> + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t_dep: f64,
    pub t_trav: f64,
}

/// Wraps a graph search as a planner. Departures for which the search does
/// not reach the goal, or which fall outside the field's window, evaluate
/// as `+∞`.
pub fn search_planner<'a>(
    graph: &'a Graph,
    config: &'a SearchConfig,
    s: VertexId,
    g: VertexId,
    ctx: &'a CostContext<'a>,
) -> impl Fn(f64) -> Result<Evaluation> + Sync + 'a {
    move |t_dep| match search(graph, config, s, Some(g), t_dep, ctx) {
        Ok(res) => {
            let tally = Tally {
                cfc: res.counters.cfc,
                cmc: res.counters.cmc,
            };
            if res.reached(g) {
                Ok(Evaluation {
                    travel_time: res.d[g] - t_dep,
                    tally,
                })
            } else {
                Ok(Evaluation::infeasible(tally))
            }
        }
        Err(Error::OutsideWindow { .. }) => Ok(Evaluation::infeasible(Tally::new())),
        Err(e) => Err(e),
    }
}

/// Departure times `start, start + dt, …` up to `end` (inclusive within
/// rounding).
pub fn sample_times(window: (f64, f64), dt: f64) -> Result<Vec<f64>> {
    let (start, end) = window;
    if !(dt > 0.0) || !(start <= end) || !start.is_finite() || !end.is_finite() {
        return Err(Error::arg("need dt > 0 and a finite window with start <= end"));
    }
    let n = ((end - start) / dt + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * dt).collect())
}

/// Evaluates the planner at every sample time (in parallel).
pub fn sample_curve(planner: &Planner, window: (f64, f64), dt: f64) -> Result<(Vec<Sample>, Tally)> {
    let times = sample_times(window, dt)?;
    let evals: Vec<Evaluation> = times.par_iter().map(|&t| planner(t)).collect::<Result<_>>()?;
    let mut tally = Tally::new();
    let samples = times
        .iter()
        .zip(&evals)
        .map(|(&t_dep, e)| {
            tally += e.tally;
            Sample {
                t_dep,
                t_trav: e.travel_time,
            }
        })
        .collect();
    Ok((samples, tally))
}

/// Maximal runs of consecutive finite samples.
pub fn finite_runs(samples: &[Sample]) -> Vec<&[Sample]> {
    samples
        .split(|s| !s.t_trav.is_finite())
        .filter(|r| !r.is_empty())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    /// Minimizer of the interpolant found by the dense scan.
    pub t_min: f64,
    /// Interpolated value at `t_min`.
    pub value: f64,
    /// The minimum sits at the first or last support point.
    pub boundary: bool,
    /// The interpolant is constant.
    pub degenerate: bool,
    pub linear_fallback: bool,
}

/// Brackets the global minimum of the interpolant through `run`.
///
/// The interpolant is scanned at [`DENSE_SCAN_POINTS`] points; the support
/// point nearest the scanned minimum, `t_i`, gives the bracket
/// `[t_{i-1}, t_{i+1}]` (one-sided at the ends). Ties go to the earliest
/// time.
pub fn bracket_global_min(run: &[Sample]) -> Result<Bracket> {
    if run.len() < 2 {
        return Err(Error::arg("bracketing needs at least two samples"));
    }
    let xs: Vec<f64> = run.iter().map(|s| s.t_dep).collect();
    let ys: Vec<f64> = run.iter().map(|s| s.t_trav).collect();
    let curve = Akima::new(&xs, &ys)?;
    let (lo, hi) = curve.domain();
    let mut t_min = lo;
    let mut value = f64::INFINITY;
    for k in 0..DENSE_SCAN_POINTS {
        let t = lo + (hi - lo) * k as f64 / (DENSE_SCAN_POINTS - 1) as f64;
        let y = curve.eval(t);
        if y < value {
            value = y;
            t_min = t;
        }
    }
    let degenerate = ys.iter().all(|&y| ties(y, ys[0]));
    let nearest = xs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t_min).abs().total_cmp(&(b.1 - t_min).abs()))
        .map(|(i, _)| i)
        .unwrap();
    let last = xs.len() - 1;
    let i = if degenerate { 0 } else { nearest };
    Ok(Bracket {
        lo: xs[i.saturating_sub(1)],
        hi: xs[(i + 1).min(last)],
        t_min,
        value,
        boundary: i == 0 || i == last,
        degenerate,
        linear_fallback: curve.is_linear_fallback(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepartureOptions {
    pub window: (f64, f64),
    /// Spacing of the coarse departure grid.
    pub dt: f64,
    pub method: Method,
    pub tol: f64,
}

impl DepartureOptions {
    pub fn new(window: (f64, f64), method: Method) -> Self {
        Self {
            window,
            dt: 1.0,
            method,
            tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepartureResult {
    pub t_dep_opt: f64,
    pub t_trav_opt: f64,
    pub method: Method,
    pub samples: Vec<Sample>,
    pub brackets: Vec<Bracket>,
    /// Planner runs spent on the coarse grid.
    pub sampling_calls: usize,
    /// Planner runs spent by the minimizer.
    pub refine_calls: usize,
    /// Extra fine-planner runs used to compare against coarse samples.
    pub check_calls: usize,
    /// Totals over every planner run.
    pub tally: Tally,
}

impl DepartureResult {
    pub fn search_calls(&self) -> usize {
        self.sampling_calls + self.refine_calls + self.check_calls
    }

    /// True if any refined bracket touched the end of its finite run.
    pub fn boundary_minimum(&self) -> bool {
        self.brackets.iter().any(|b| b.boundary)
    }
}

/// Runs the full pipeline with the same planner for sampling and refinement.
pub fn optimal_departure(planner: &Planner, opts: &DepartureOptions) -> Result<DepartureResult> {
    optimal_departure_with(planner, None, opts)
}

/// Runs the pipeline, sampling with `coarse` when given (e.g. a cheaper
/// search preset) and refining with `planner`.
///
/// The result never exceeds the best sampled travel time: with a separate
/// coarse planner the best sample is re-evaluated with `planner` before
/// comparing. Equal travel times resolve to the earlier departure.
pub fn optimal_departure_with(
    planner: &Planner,
    coarse: Option<&Planner>,
    opts: &DepartureOptions,
) -> Result<DepartureResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::arg("tolerance must be positive"));
    }
    let (samples, mut tally) = sample_curve(coarse.unwrap_or(planner), opts.window, opts.dt)?;
    let sampling_calls = samples.len();
    let runs = finite_runs(&samples);
    if runs.is_empty() {
        return Err(Error::NoFeasibleDeparture);
    }

    let fine_tally = RefCell::new(Tally::new());
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let fine_calls = Cell::new(0usize);
    let objective = |t: f64| -> f64 {
        fine_calls.set(fine_calls.get() + 1);
        match planner(t) {
            Ok(e) => {
                *fine_tally.borrow_mut() += e.tally;
                e.travel_time
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::INFINITY
            }
        }
    };

    let mut best = Sample {
        t_dep: f64::NAN,
        t_trav: f64::INFINITY,
    };
    let mut consider = |s: Sample| {
        if best.t_dep.is_nan() || better(&s, &best) {
            best = s;
        }
    };

    let mut brackets = Vec::new();
    let mut refine_calls = 0;
    let mut check_calls = 0;
    for run in &runs {
        let best_sample = run.iter().copied().fold(run[0], |b, s| if better(&s, &b) { s } else { b });
        if run.len() >= 2 {
            let br = bracket_global_min(run)?;
            let before = fine_calls.get();
            let refined = opts.method.minimize(objective, br.lo, br.hi, opts.tol);
            refine_calls += fine_calls.get() - before;
            match refined {
                Ok(m) => consider(Sample {
                    t_dep: m.x,
                    t_trav: m.fx,
                }),
                Err(Error::NonFiniteObjective) => {}
                Err(e) => return Err(e),
            }
            brackets.push(br);
        }
        if coarse.is_some() {
            check_calls += 1;
            consider(Sample {
                t_dep: best_sample.t_dep,
                t_trav: objective(best_sample.t_dep),
            });
        } else {
            run.iter().for_each(|&s| consider(s));
        }
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
    }
    if !best.t_trav.is_finite() {
        return Err(Error::NoFeasibleDeparture);
    }
    tally += fine_tally.into_inner();
    Ok(DepartureResult {
        t_dep_opt: best.t_dep,
        t_trav_opt: best.t_trav,
        method: opts.method,
        samples,
        brackets,
        sampling_calls,
        refine_calls,
        check_calls,
        tally,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_field::{TimeWindow, Uniform, Windowed};
    use crate::geom::BBox;
    use crate::search::Preset;
    use crate::Vec2;

    fn eval(t_trav: f64) -> Result<Evaluation> {
        Ok(Evaluation {
            travel_time: t_trav,
            tally: Tally::new(),
        })
    }

    fn opts(window: (f64, f64), dt: f64, method: Method) -> DepartureOptions {
        DepartureOptions {
            dt,
            ..DepartureOptions::new(window, method)
        }
    }

    #[test]
    fn sample_grid() {
        let ts = sample_times((0.0, 48.0), 4.0).unwrap();
        assert_eq!(ts.len(), 13);
        assert_eq!(ts[12], 48.0);
        assert_eq!(sample_times((0.0, 1.0), 0.3).unwrap().len(), 4);
        assert!(sample_times((0.0, 1.0), 0.0).is_err());
        assert!(sample_times((1.0, 0.0), 0.5).is_err());
    }

    #[test]
    fn smooth_curve_all_methods() {
        let f = |t: f64| eval(10.0 + 0.05 * (t - 17.3).powi(2));
        for m in Method::ALL {
            let r = optimal_departure(&f, &opts((0.0, 48.0), 4.0, m)).unwrap();
            assert!((r.t_dep_opt - 17.3).abs() < 0.02, "{m}: {}", r.t_dep_opt);
            assert_eq!(r.sampling_calls, 13);
            assert_eq!(r.check_calls, 0);
            assert!(!r.boundary_minimum());
        }
    }

    #[test]
    fn constant_curve_picks_window_start() {
        let f = |_t: f64| eval(8.0);
        for m in Method::ALL {
            let r = optimal_departure(&f, &opts((3.0, 30.0), 3.0, m)).unwrap();
            assert_eq!(r.t_dep_opt, 3.0);
            assert_eq!(r.t_trav_opt, 8.0);
            assert!(r.brackets[0].degenerate);
        }
    }

    #[test]
    fn constant_field_search_picks_window_start() {
        let field = Uniform::new(0.1, 0.05);
        let graph = Graph::build_grid(BBox::new(0.0, 3.0, 0.0, 3.0), 0.5, 2).unwrap();
        let ctx = CostContext::new(&field, 0.5).unwrap();
        let cfg = SearchConfig::new(Preset::Itve);
        let s = graph.nearest_vertex(&Vec2::new(0.0, 0.0)).unwrap();
        let g = graph.nearest_vertex(&Vec2::new(3.0, 2.0)).unwrap();
        let planner = search_planner(&graph, &cfg, s, g, &ctx);
        let r = optimal_departure(&planner, &opts((0.0, 10.0), 2.0, Method::Brent)).unwrap();
        assert_eq!(r.t_dep_opt, 0.0);
        assert!(r.samples.iter().all(|s| ties(s.t_trav, r.t_trav_opt)));
    }

    #[test]
    fn truncated_window_flags_boundary() {
        // Travel time keeps falling until the horizon cuts the window.
        let f = |t: f64| eval(if t + 20.0 - t <= 30.0 && t <= 10.0 { 20.0 - t } else { f64::INFINITY });
        let r = optimal_departure(&f, &opts((0.0, 16.0), 2.0, Method::Golden)).unwrap();
        assert!(r.boundary_minimum());
        assert!((r.t_dep_opt - 10.0).abs() <= 0.01);
        assert_eq!(r.samples.iter().filter(|s| s.t_trav.is_finite()).count(), 6);
    }

    #[test]
    fn horizon_respected_by_search_planner() {
        let field = Windowed::new(Uniform::zero(), TimeWindow::new(0.0, 20.0).unwrap());
        let graph = Graph::build_grid(BBox::new(0.0, 4.0, 0.0, 2.0), 1.0, 1).unwrap();
        let ctx = CostContext::new(&field, 0.5).unwrap();
        let cfg = SearchConfig::new(Preset::Itve);
        let s = graph.nearest_vertex(&Vec2::new(0.0, 0.0)).unwrap();
        let g = graph.nearest_vertex(&Vec2::new(4.0, 0.0)).unwrap();
        let planner = search_planner(&graph, &cfg, s, g, &ctx);
        let r = optimal_departure(&planner, &opts((0.0, 24.0), 1.0, Method::Brent)).unwrap();
        assert!(r.t_dep_opt + r.t_trav_opt <= 20.0);
        for smp in &r.samples {
            // 8 time units of travel: departures after 12 overrun the horizon,
            // departures after 20 are outside the field altogether.
            assert_eq!(smp.t_trav.is_finite(), smp.t_dep <= 12.0, "{smp:?}");
        }
    }

    #[test]
    fn infinite_samples_split_window() {
        // Two basins separated by an infeasible stretch; the later one is deeper.
        let f = |t: f64| {
            eval(if (10.0..20.0).contains(&t) {
                f64::INFINITY
            } else if t < 10.0 {
                5.0 + 0.1 * (t - 4.3).powi(2)
            } else {
                4.0 + 0.1 * (t - 27.1).powi(2)
            })
        };
        let r = optimal_departure(&f, &opts((0.0, 40.0), 2.0, Method::Brent)).unwrap();
        assert_eq!(finite_runs(&r.samples).len(), 2);
        assert_eq!(r.brackets.len(), 2);
        assert!((r.t_dep_opt - 27.1).abs() < 0.02);
    }

    #[test]
    fn isolated_finite_sample_is_kept() {
        let f = |t: f64| eval(if t == 6.0 { 3.0 } else { f64::INFINITY });
        let r = optimal_departure(&f, &opts((0.0, 12.0), 2.0, Method::Fibonacci)).unwrap();
        assert_eq!((r.t_dep_opt, r.t_trav_opt), (6.0, 3.0));
        assert!(r.brackets.is_empty());
        assert_eq!(r.refine_calls, 0);
    }

    #[test]
    fn never_worse_than_best_sample() {
        // A narrow dip between support points that the interpolant misses.
        let f = |t: f64| eval(if t == 8.0 { 1.0 } else { 5.0 + 0.01 * (t - 30.0).powi(2) });
        for m in Method::ALL {
            let r = optimal_departure(&f, &opts((0.0, 40.0), 4.0, m)).unwrap();
            let best = r.samples.iter().map(|s| s.t_trav).fold(f64::INFINITY, f64::min);
            assert!(r.t_trav_opt <= best);
            assert_eq!(r.t_dep_opt, 8.0);
        }
    }

    #[test]
    fn coarse_planner_is_checked() {
        let fine = |t: f64| eval(6.0 + 0.02 * (t - 21.7).powi(2));
        // The coarse model is biased but has its minimum in the same place.
        let coarse = |t: f64| eval(7.0 + 0.03 * (t - 21.0).powi(2));
        let r = optimal_departure_with(&fine, Some(&coarse), &opts((0.0, 48.0), 4.0, Method::Brent)).unwrap();
        assert_eq!(r.check_calls, 1);
        assert!((r.t_dep_opt - 21.7).abs() < 0.05);
        assert!(r.t_trav_opt <= 6.0 + 1e-4);
    }

    #[test]
    fn no_feasible_departure() {
        let f = |_t: f64| eval(f64::INFINITY);
        assert!(matches!(
            optimal_departure(&f, &opts((0.0, 4.0), 1.0, Method::Golden)),
            Err(Error::NoFeasibleDeparture)
        ));
    }

    #[test]
    fn planner_errors_propagate() {
        let f = |t: f64| if t > 2.0 { Err(Error::arg("boom")) } else { eval(1.0) };
        assert!(optimal_departure(&f, &opts((0.0, 4.0), 1.0, Method::Golden)).is_err());
    }

    #[test]
    fn bracket_interior_and_edges() {
        let run: Vec<Sample> = (0..7)
            .map(|i| Sample {
                t_dep: i as f64,
                t_trav: (i as f64 - 2.2).powi(2),
            })
            .collect();
        let b = bracket_global_min(&run).unwrap();
        assert_eq!((b.lo, b.hi), (1.0, 3.0));
        assert!(!b.boundary && !b.degenerate && !b.linear_fallback);
        assert!((b.t_min - 2.2).abs() < 0.05);

        let falling: Vec<Sample> = (0..3).map(|i| Sample { t_dep: i as f64, t_trav: 5.0 - i as f64 }).collect();
        let b = bracket_global_min(&falling).unwrap();
        assert_eq!((b.lo, b.hi), (1.0, 2.0));
        assert!(b.boundary && b.linear_fallback);
        assert!(bracket_global_min(&falling[..1]).is_err());
    }
}
