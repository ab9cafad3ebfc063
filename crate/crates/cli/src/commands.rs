use std::fs;
use std::path::Path;
use std::time::Instant;

use tvplan::cost::CostContext;
use tvplan::departure::{optimal_departure_with, search_planner, DepartureOptions, Planner};
use tvplan::flow_field::FlowField;
use tvplan::graph::{Graph, VertexId};
use tvplan::search::{extract_path, search, Preset};
use tvplan::validation::{optimal_control_reference, ShootingOptions};
use tvplan::zermelo::{shoot_trajectory, Trajectory};
use tvplan::{Error, Vec2};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::format::{g6, Table};
use crate::row;

/// Field, graph and heuristic bound built from a config.
pub struct Setup {
    pub cfg: RunConfig,
    pub field: Box<dyn FlowField>,
    pub graph: Graph,
    pub v_current_max: f64,
}

impl Setup {
    pub fn new(cfg: RunConfig) -> CliResult<Self> {
        let field = cfg.build_field()?;
        let graph = cfg.build_graph()?;
        let v_current_max = cfg.v_current_max(field.as_ref())?;
        Ok(Self {
            cfg,
            field,
            graph,
            v_current_max,
        })
    }

    pub fn ctx(&self) -> CliResult<CostContext<'_>> {
        Ok(CostContext::new(self.field.as_ref(), self.cfg.vehicle.speed)?)
    }

    pub fn endpoints(&self, graph: &Graph) -> CliResult<(VertexId, VertexId)> {
        Ok((vertex(graph, &self.cfg.start())?, vertex(graph, &self.cfg.goal())?))
    }
}

/// Writes the effective configuration next to the outputs.
fn save_config(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let file = out.join("config.toml");
    fs::write(&file, cfg.to_toml()).map_err(|e| CliError::io(&file, e))
}

fn vertex(graph: &Graph, p: &Vec2) -> CliResult<VertexId> {
    graph
        .nearest_vertex(p)
        .ok_or_else(|| CliError::config(format!("({}, {}) has no nearby vertex", p.x, p.y)))
}

/// Plans one path; writes `path.csv` and `counters.csv` into `out`.
pub fn plan(cfg: RunConfig, out: &Path) -> CliResult<String> {
    save_config(&cfg, out)?;
    let setup = Setup::new(cfg)?;
    let ctx = setup.ctx()?;
    let (s, g) = setup.endpoints(&setup.graph)?;
    let scfg = setup.cfg.search_config(setup.v_current_max);
    let res = search(&setup.graph, &scfg, s, Some(g), setup.cfg.search.t0, &ctx)?;

    let travel = res.d[g] - res.t0;
    let mut counters = Table::new("preset,cfc,cmc,vertices_expanded,travel_time");
    counters.push(row![
        scfg.preset.name(),
        res.counters.cfc,
        res.counters.cmc,
        res.counters.vertices_expanded,
        travel
    ]);
    counters.write(&out.join("counters.csv"))?;

    let path = extract_path(&res, &setup.graph, g)?;
    let mut table = Table::new("index,x,y,arrival_time");
    for (i, w) in path.waypoints.iter().enumerate() {
        table.push(row![i, w.position.x, w.position.y, w.arrival]);
    }
    table.write(&out.join("path.csv"))?;
    Ok(format!(
        "preset={} travel_time={} vertices={} cfc={} cmc={} expanded={}",
        scfg.preset,
        g6(travel),
        path.waypoints.len(),
        res.counters.cfc,
        res.counters.cmc,
        res.counters.vertices_expanded
    ))
}

/// Counters and timings per start × grid size × preset; writes `bench.csv`.
pub fn bench(cfg: RunConfig, out: &Path) -> CliResult<String> {
    let presets = cfg.bench_presets()?;
    save_config(&cfg, out)?;
    let spec = cfg.bench.clone().expect("checked by bench_presets");
    let mut starts = vec![cfg.search.start];
    starts.extend(spec.starts.iter().copied());
    let grid_sizes = if spec.grid_sizes.is_empty() {
        vec![cfg.grid.size]
    } else {
        spec.grid_sizes.clone()
    };
    let field = cfg.build_field()?;
    let v_current_max = cfg.v_current_max(field.as_ref())?;
    let ctx = CostContext::new(field.as_ref(), cfg.vehicle.speed)?;
    let goal = cfg.goal();

    let mut table = Table::new("preset,grid_size,cfc,cmc,graph_ms,search_ms,total_ms");
    for &h in &grid_sizes {
        let t = Instant::now();
        let graph = Graph::build_grid(cfg.region(), h, cfg.grid.sectors)?;
        let graph_ms = t.elapsed().as_secs_f64() * 1e3;
        let g = vertex(&graph, &goal)?;
        for start in &starts {
            let s = vertex(&graph, &Vec2::new(start[0], start[1]))?;
            for &preset in &presets {
                let scfg = cfg.search_config_for(preset, v_current_max);
                let t = Instant::now();
                let res = search(&graph, &scfg, s, Some(g), cfg.search.t0, &ctx)?;
                let search_ms = t.elapsed().as_secs_f64() * 1e3;
                table.push(row![
                    preset.name(),
                    h,
                    res.counters.cfc,
                    res.counters.cmc,
                    graph_ms,
                    search_ms,
                    graph_ms + search_ms
                ]);
            }
        }
    }
    table.write(&out.join("bench.csv"))?;
    Ok(table.render())
}

/// Optimal departure for each configured method; writes
/// `departure_curve.csv` and `departure_summary.csv`.
pub fn departure(cfg: RunConfig, out: &Path) -> CliResult<String> {
    let methods = cfg.methods()?;
    let spec = cfg.departure.clone().expect("checked by methods");
    save_config(&cfg, out)?;
    let setup = Setup::new(cfg)?;
    let ctx = setup.ctx()?;
    let (s, g) = setup.endpoints(&setup.graph)?;
    let scfg = setup.cfg.search_config(setup.v_current_max);
    let fine = search_planner(&setup.graph, &scfg, s, g, &ctx);

    let coarse_graph = if spec.coarse_grid_size.is_some() || spec.coarse_sectors.is_some() {
        Some(Graph::build_grid(
            setup.cfg.region(),
            spec.coarse_grid_size.unwrap_or(setup.cfg.grid.size),
            spec.coarse_sectors.unwrap_or(setup.cfg.grid.sectors),
        )?)
    } else {
        None
    };
    let coarse_ends = match &coarse_graph {
        Some(cg) => Some(setup.endpoints(cg)?),
        None => None,
    };
    let coarse = coarse_graph
        .as_ref()
        .zip(coarse_ends)
        .map(|(cg, (cs, cgoal))| search_planner(cg, &scfg, cs, cgoal, &ctx));

    let mut summary = Table::new("method,t_dep_opt,t_trav_opt,search_calls,cfc,cmc,boundary_minimum");
    let mut curve = None;
    for m in methods {
        let opts = DepartureOptions {
            dt: spec.dt,
            tol: spec.tol,
            ..DepartureOptions::new((spec.window[0], spec.window[1]), m)
        };
        let r = optimal_departure_with(&fine, coarse.as_ref().map(|c| c as &Planner), &opts)?;
        summary.push(row![
            m.name(),
            r.t_dep_opt,
            r.t_trav_opt,
            r.search_calls(),
            r.tally.cfc,
            r.tally.cmc,
            r.boundary_minimum().to_string()
        ]);
        curve.get_or_insert(r.samples);
    }
    let mut table = Table::new("t_dep,t_trav");
    for smp in curve.unwrap_or_default() {
        table.push(row![smp.t_dep, smp.t_trav]);
    }
    table.write(&out.join("departure_curve.csv"))?;
    summary.write(&out.join("departure_summary.csv"))?;
    Ok(summary.render())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ShootArgs {
    /// Fixed initial heading; without it the optimal-control reference is
    /// computed towards the configured goal.
    pub theta0: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
}

/// Integrates a time-optimal extremal; writes `trajectory.csv`.
pub fn shoot(cfg: RunConfig, args: ShootArgs, out: &Path) -> CliResult<String> {
    save_config(&cfg, out)?;
    let field = cfg.build_field()?;
    let v = cfg.vehicle.speed;
    let t0 = cfg.search.t0;
    let defaults = ShootingOptions::default();
    let dt = args.dt.unwrap_or(defaults.dt);
    let t_max = args.t_max.unwrap_or(defaults.t_max);
    let (traj, label): (Trajectory, _) = match args.theta0 {
        Some(theta0) => {
            let t_end = args.t_end.unwrap_or(t0 + t_max);
            (shoot_trajectory(&cfg.start(), theta0, t0, field.as_ref(), v, t_end, dt)?, "end")
        }
        None => {
            let opts = ShootingOptions { dt, t_max, ..defaults };
            (optimal_control_reference(&cfg.start(), &cfg.goal(), t0, field.as_ref(), v, &opts)?, "arrival")
        }
    };
    let mut table = Table::new("t,x,y,theta");
    for smp in &traj.samples {
        table.push(row![smp.time, smp.position.x, smp.position.y, smp.theta]);
    }
    table.write(&out.join("trajectory.csv"))?;
    let end = traj.end();
    Ok(format!(
        "{label}={} travel_time={} x={} y={} theta0={}",
        g6(traj.arrival),
        g6(traj.arrival - t0),
        g6(end.position.x),
        g6(end.position.y),
        g6(traj.samples[0].theta)
    ))
}

pub fn graph_stats(cfg: &RunConfig) -> CliResult<String> {
    let graph = cfg.build_graph()?;
    Ok(format!("vertices={} edges={}", graph.len(), graph.edge_count()))
}

/// Samples the field on an `nx × ny` lattice over the region at each time.
pub fn field_export(cfg: &RunConfig, nx: usize, ny: usize, times: &[f64], out: &Path) -> CliResult<String> {
    if nx < 2 || ny < 2 {
        return Err(CliError::config("field-export needs at least 2 points per axis"));
    }
    if times.is_empty() {
        return Err(CliError::config("field-export needs at least one time"));
    }
    let field = cfg.build_field()?;
    let region = cfg.region();
    let mut table = Table::new("x,y,t,u,v");
    for &t in times {
        field.window().check(t)?;
        for j in 0..ny {
            let y = region.min.y + region.height() * j as f64 / (ny - 1) as f64;
            for i in 0..nx {
                let x = region.min.x + region.width() * i as f64 / (nx - 1) as f64;
                let c = field.eval(&Vec2::new(x, y), t).c;
                table.push(row![x, y, t, c.x, c.y]);
            }
        }
    }
    table.write(out)?;
    Ok(format!("wrote {} samples to {}", table.len(), out.display()))
}

/// Overrides the configured preset.
pub fn with_preset(mut cfg: RunConfig, preset: Option<&str>) -> CliResult<RunConfig> {
    if let Some(p) = preset {
        let parsed: Preset = p
            .parse()
            .map_err(|_: Error| CliError::config(format!("--preset: unknown preset {p:?}")))?;
        cfg.search.preset = parsed.name().to_string();
        cfg.validate()?;
    }
    Ok(cfg)
}
