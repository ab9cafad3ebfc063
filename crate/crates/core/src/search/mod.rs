//! The time-varying search family.
//!
//! A single label-correcting engine covers every variant; the presets only
//! differ in four switches:
//!
//! | preset  | `d[u] < d[v]` guard | queue key | successor gate           | early exit |
//! |---------|---------------------|-----------|--------------------------|------------|
//! | TVE     | no                  | d         | none                     | no         |
//! | ITVE    | yes                 | d         | none                     | no         |
//! | A*TVE   | yes                 | d + h     | none                     | yes        |
//! | ZTVE    | yes                 | d         | predicted optimal course | no         |
//! | STVE    | yes                 | d         | predecessor edge         | no         |
//! | ZA*TVE  | yes                 | d + h     | predicted optimal course | yes        |
//! | SA*TVE  | yes                 | d + h     | predecessor edge         | yes        |
//! | HTTVE   | `a[u] < a[v]`       | XTE area  | predecessor edge         | no         |
//!
//! Edge costs are computed during the search from the arrival time at the
//! edge's start vertex, so the engine never needs a precomputed weight.

mod queue;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub use queue::IndexedHeap;

use crate::cost::{afunc, wfunc, CostContext};
use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Vec2};
use crate::graph::{Graph, VertexId};
use crate::zermelo::{calc_opt_dir, OptCourseParams, StepControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Tve,
    Itve,
    AstarTve,
    Ztve,
    Stve,
    ZastarTve,
    SastarTve,
    Httve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    Open,
    OptimalCourse,
    PredecessorEdge,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Tve,
        Preset::Itve,
        Preset::AstarTve,
        Preset::Ztve,
        Preset::Stve,
        Preset::ZastarTve,
        Preset::SastarTve,
        Preset::Httve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Tve => "TVE",
            Preset::Itve => "ITVE",
            Preset::AstarTve => "A*TVE",
            Preset::Ztve => "ZTVE",
            Preset::Stve => "STVE",
            Preset::ZastarTve => "ZA*TVE",
            Preset::SastarTve => "SA*TVE",
            Preset::Httve => "HTTVE",
        }
    }

    pub fn uses_heuristic(self) -> bool {
        matches!(self, Preset::AstarTve | Preset::ZastarTve | Preset::SastarTve)
    }

    pub fn needs_goal(self) -> bool {
        self.uses_heuristic() || self == Preset::Httve
    }

    fn gate(self) -> Gate {
        match self {
            Preset::Ztve | Preset::ZastarTve => Gate::OptimalCourse,
            Preset::Stve | Preset::SastarTve | Preset::Httve => Gate::PredecessorEdge,
            _ => Gate::Open,
        }
    }

    /// Default cone half-angle for gated presets.
    pub fn default_dphi_max(self) -> f64 {
        match self.gate() {
            Gate::OptimalCourse => 27.5f64.to_radians(),
            Gate::PredecessorEdge => 60f64.to_radians(),
            Gate::Open => PI,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '*' | '_' | '-'))
            .collect::<String>()
            .to_ascii_uppercase();
        let p = match norm.as_str() {
            "TVE" => Preset::Tve,
            "ITVE" => Preset::Itve,
            "ATVE" | "ASTARTVE" => Preset::AstarTve,
            "ZTVE" => Preset::Ztve,
            "STVE" => Preset::Stve,
            "ZATVE" | "ZASTARTVE" => Preset::ZastarTve,
            "SATVE" | "SASTARTVE" => Preset::SastarTve,
            "HTTVE" => Preset::Httve,
            _ => return Err(Error::arg(format!("unknown preset {s:?}"))),
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub preset: Preset,
    /// Cone half-angle for the optimal-course and predecessor-edge gates.
    pub dphi_max: f64,
    /// Minimum ground speed along an edge (HTTVE).
    pub v_min: f64,
    /// Cone half-angle around the predecessor edge (HTTVE).
    pub phi_max: f64,
    /// Maximum current speed used by the A* heuristic.
    pub v_current_max: f64,
    /// Step control of the optimal-course prediction.
    pub opt_course: StepControl,
    /// Stop as soon as the goal is extracted from the queue.
    pub stop_at_goal: bool,
}

impl SearchConfig {
    pub fn new(preset: Preset) -> Self {
        Self {
            preset,
            dphi_max: preset.default_dphi_max(),
            v_min: 0.0,
            phi_max: 60f64.to_radians(),
            v_current_max: 0.0,
            opt_course: StepControl::default(),
            stop_at_goal: preset.uses_heuristic(),
        }
    }

    pub fn with_dphi_max_deg(mut self, deg: f64) -> Self {
        self.dphi_max = deg.to_radians();
        self
    }

    pub fn with_v_current_max(mut self, v: f64) -> Self {
        self.v_current_max = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dphi_max > 0.0 && self.dphi_max <= PI) {
            return Err(Error::arg("dphi_max must lie in (0, π]"));
        }
        if !(self.phi_max > 0.0 && self.phi_max <= PI) {
            return Err(Error::arg("phi_max must lie in (0, π]"));
        }
        if !(self.v_min >= 0.0) {
            return Err(Error::arg("v_min must be non-negative"));
        }
        if !(self.v_current_max >= 0.0 && self.v_current_max.is_finite()) {
            return Err(Error::arg("v_current_max must be finite and non-negative"));
        }
        self.opt_course.validate()
    }
}

/// Straight-line travel time to the goal at the best possible ground speed.
pub fn heuristic(u: &Vec2, g: &Vec2, v_veh_bf: f64, v_current_max: f64) -> f64 {
    (u - g).norm() / (v_veh_bf + v_current_max)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchCounters {
    pub cfc: u64,
    pub cmc: u64,
    pub vertices_expanded: u64,
    /// Edges skipped by the successor gate.
    pub gate_rejections: u64,
    /// Extracted vertices that were inserted into the queue again.
    pub reopened: u64,
    /// Vertices where the optimal-course prediction failed and every
    /// successor was examined instead.
    pub prediction_failures: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub preset: Preset,
    pub source: VertexId,
    pub goal: Option<VertexId>,
    pub t0: f64,
    /// Arrival time per vertex; infinite when unreached.
    pub d: Vec<f64>,
    pub pi: Vec<Option<VertexId>>,
    /// Accumulated XTE area per vertex (HTTVE only).
    pub a: Option<Vec<f64>>,
    /// Vertices in extraction order.
    pub expanded: Vec<VertexId>,
    pub counters: SearchCounters,
}

impl SearchResult {
    pub fn arrival(&self, v: VertexId) -> f64 {
        self.d[v]
    }

    pub fn reached(&self, v: VertexId) -> bool {
        self.d[v].is_finite()
    }

    /// Vertices from the source to `v` following predecessors.
    pub fn chain(&self, v: VertexId) -> Option<Vec<VertexId>> {
        if !self.reached(v) {
            return None;
        }
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.pi[cur] {
            out.push(p);
            cur = p;
            if out.len() > self.d.len() {
                return None;
            }
        }
        out.reverse();
        (out[0] == self.source).then_some(out)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Color {
    White,
    Gray,
    Black,
}

/// Runs the configured search from `s` departing at `t0`.
///
/// An unreachable goal is not an error here: `d[g]` stays infinite and the
/// counters still describe the work done. [`extract_path`] reports
/// [`Error::NoPath`].
pub fn search(
    graph: &Graph,
    config: &SearchConfig,
    s: VertexId,
    g: Option<VertexId>,
    t0: f64,
    ctx: &CostContext,
) -> Result<SearchResult> {
    config.validate()?;
    let n = graph.len();
    if s >= n || g.is_some_and(|g| g >= n) {
        return Err(Error::arg("vertex id out of range"));
    }
    let preset = config.preset;
    if preset.needs_goal() && g.is_none() {
        return Err(Error::arg(format!("{preset} needs a goal vertex")));
    }
    ctx.field.window().check(t0)?;

    let hold_track = preset == Preset::Httve;
    let gate = preset.gate();
    let cone = if hold_track { config.phi_max } else { config.dphi_max };
    let goal_pos = g.map(|g| graph.position(g));
    let src_pos = graph.position(s);
    let h = |v: VertexId| match (preset.uses_heuristic(), goal_pos) {
        (true, Some(gp)) => heuristic(&graph.position(v), &gp, ctx.v_veh_bf, config.v_current_max),
        _ => 0.0,
    };
    let opt_params = OptCourseParams {
        v_veh_bf: ctx.v_veh_bf,
        step: config.opt_course,
    };

    let mut d = vec![f64::INFINITY; n];
    let mut a = vec![f64::INFINITY; if hold_track { n } else { 0 }];
    let mut pi: Vec<Option<VertexId>> = vec![None; n];
    let mut color = vec![Color::White; n];
    let mut queue = IndexedHeap::new(n);
    let mut tally = Tally::new();
    let mut counters = SearchCounters::default();
    let mut expanded = Vec::new();

    d[s] = t0;
    color[s] = Color::Gray;
    if hold_track {
        a[s] = 0.0;
        queue.insert(s, 0.0);
    } else {
        queue.insert(s, t0 + h(s));
    }

    while let Some((u, _)) = queue.pop() {
        if config.stop_at_goal && Some(u) == g {
            break;
        }
        color[u] = Color::Black;
        counters.vertices_expanded += 1;
        expanded.push(u);
        let pu = graph.position(u);

        let reference = match (gate, pi[u]) {
            (Gate::Open, _) | (_, None) => None,
            (Gate::PredecessorEdge, Some(p)) => Some(graph.direction(p, u)),
            (Gate::OptimalCourse, Some(p)) => {
                match calc_opt_dir(
                    &graph.position(p),
                    &pu,
                    d[p],
                    d[u],
                    graph.s_path_min(),
                    ctx.field,
                    &opt_params,
                    &mut tally,
                ) {
                    Ok(phi) => Some(phi),
                    Err(_) => {
                        counters.prediction_failures += 1;
                        None
                    }
                }
            }
        };

        for &v in graph.successors(u) {
            let worth_examining = match preset {
                Preset::Tve => true,
                Preset::Httve => a[u] < a[v],
                _ => d[u] < d[v],
            };
            if !worth_examining {
                continue;
            }
            if let Some(r) = reference {
                if wrap_angle(r - graph.direction(u, v)).abs() >= cone {
                    counters.gate_rejections += 1;
                    continue;
                }
            }
            let pv = graph.position(v);
            let w = wfunc(&pu, &pv, d[u], ctx, &mut tally);

            let key = if hold_track {
                if !((pv - pu).norm() / w > config.v_min) {
                    continue;
                }
                let (sp, gp) = (src_pos, goal_pos.expect("checked above"));
                let a_v = afunc(&pu, &pv, &sp, &gp) + a[u];
                if !(a_v < a[v]) {
                    continue;
                }
                a[v] = a_v;
                d[v] = w + d[u];
                a_v
            } else {
                let d_v = w + d[u];
                if !(d_v < d[v]) {
                    continue;
                }
                d[v] = d_v;
                d_v + h(v)
            };
            pi[v] = Some(u);
            match color[v] {
                Color::Gray => queue.decrease_key(v, key),
                c => {
                    if c == Color::Black {
                        counters.reopened += 1;
                    }
                    color[v] = Color::Gray;
                    queue.insert(v, key);
                }
            }
        }
    }

    counters.cfc = tally.cfc;
    counters.cmc = tally.cmc;
    Ok(SearchResult {
        preset,
        source: s,
        goal: g,
        t0,
        d,
        pi,
        a: hold_track.then_some(a),
        expanded,
        counters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub position: Vec2,
    pub arrival: f64,
}

/// Ordered waypoints with arrival times.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    /// Graph vertices behind the waypoints; empty for synthetic paths.
    pub vertices: Vec<VertexId>,
    pub waypoints: Vec<Waypoint>,
}

impl Path {
    pub fn new(waypoints: Vec<Waypoint>) -> Self {
        Self {
            vertices: Vec::new(),
            waypoints,
        }
    }

    pub fn departure(&self) -> f64 {
        self.waypoints[0].arrival
    }

    pub fn travel_time(&self) -> f64 {
        self.waypoints.last().map_or(0.0, |w| w.arrival) - self.departure()
    }

    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| (w[1].position - w[0].position).norm())
            .sum()
    }

    /// Total cross-track area relative to the straight line between the
    /// first and last waypoint.
    pub fn xte_area(&self) -> f64 {
        let (Some(s), Some(g)) = (self.waypoints.first(), self.waypoints.last()) else {
            return 0.0;
        };
        if s.position == g.position {
            return 0.0;
        }
        self.waypoints
            .windows(2)
            .map(|w| afunc(&w[0].position, &w[1].position, &s.position, &g.position))
            .sum()
    }
}

/// Reconstructs the path to `g` from the predecessor chain.
pub fn extract_path(result: &SearchResult, graph: &Graph, g: VertexId) -> Result<Path> {
    let chain = result.chain(g).ok_or(Error::NoPath)?;
    let waypoints = chain
        .iter()
        .map(|&v| Waypoint {
            position: graph.position(v),
            arrival: result.d[v],
        })
        .collect();
    Ok(Path {
        vertices: chain,
        waypoints,
    })
}
