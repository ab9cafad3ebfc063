//! Run configuration: one TOML file per scenario.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tvplan::departure::Method;
use tvplan::fixtures::{MISSION_SPAN, SPEED_LATTICE};
use tvplan::flow_field::{
    max_current_speed, AdverseBand, FlowField, LinearShear, MeanderingJet, MeanderingJetParams, TimeWindow, Uniform,
    Windowed,
};
use tvplan::geom::BBox;
use tvplan::graph::Graph;
use tvplan::search::{Preset, SearchConfig};
use tvplan::Vec2;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub field: FieldSpec,
    pub region: RegionSpec,
    pub grid: GridSpec,
    pub vehicle: VehicleSpec,
    pub search: SearchSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub departure: Option<DepartureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSpec>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Jet,
    Uniform,
    Zero,
    Shear,
    Band,
}

/// Field model and parameters. Only the keys of the chosen `kind` may be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub kind: FieldKind,
    /// Validity window `[start, horizon]`; unbounded when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    // jet
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_phase: Option<f64>,
    // uniform
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    // shear
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    // band
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub size: f64,
    pub sectors: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    /// Speed through the water.
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub preset: String,
    pub start: [f64; 2],
    pub goal: [f64; 2],
    #[serde(default)]
    pub t0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dphi_max_deg: Option<f64>,
    /// HTTVE only; required there.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_min: Option<f64>,
    /// HTTVE only; required there.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_max_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_at_goal: Option<bool>,
    /// Heuristic current bound; sampled from the field when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_current_max: Option<f64>,
    /// Time span sampled for the current bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_span: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepartureSpec {
    pub window: [f64; 2],
    pub dt: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Cheaper sampling planner: grid size and sectors of a separate graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_grid_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_sectors: Option<u32>,
}

fn default_methods() -> Vec<String> {
    vec!["brent".into()]
}

fn default_tol() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub presets: Vec<String>,
    /// Additional start positions; the search start always comes first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<[f64; 2]>,
    /// Grid sizes to compare; defaults to `grid.size`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid_sizes: Vec<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |key: &str, msg: &str| Err(CliError::config(format!("{key}: {msg}")));
        let [x0, x1] = self.region.x;
        let [y0, y1] = self.region.y;
        if !(x0 < x1 && y0 < y1) {
            return bad("region", "need x[0] < x[1] and y[0] < y[1]");
        }
        if !(self.grid.size > 0.0) {
            return bad("grid.size", "must be positive");
        }
        if !(1..=3).contains(&self.grid.sectors) {
            return bad("grid.sectors", "must be 1, 2 or 3");
        }
        if !(self.vehicle.speed > 0.0) {
            return bad("vehicle.speed", "must be positive");
        }
        let region = self.region();
        for (key, p) in [("search.start", self.search.start), ("search.goal", self.search.goal)] {
            if !region.contains(&Vec2::new(p[0], p[1])) {
                return bad(key, &format!("({}, {}) lies outside the region", p[0], p[1]));
            }
        }
        let preset = self.preset()?;
        if preset == Preset::Httve && (self.search.v_min.is_none() || self.search.phi_max_deg.is_none()) {
            return bad("search", "preset HTTVE needs v_min and phi_max_deg");
        }
        if preset != Preset::Httve && (self.search.v_min.is_some() || self.search.phi_max_deg.is_some()) {
            return bad("search", "v_min and phi_max_deg only apply to HTTVE");
        }
        self.search_config(0.0).validate().or_else(|e| bad("search", &e.to_string()))?;
        self.field_spec_check()?;
        if let Some(d) = &self.departure {
            if !(d.window[0] <= d.window[1]) {
                return bad("departure.window", "start must not exceed end");
            }
            if !(d.dt > 0.0) {
                return bad("departure.dt", "must be positive");
            }
            if !(d.tol > 0.0) {
                return bad("departure.tol", "must be positive");
            }
            if d.methods.is_empty() {
                return bad("departure.methods", "needs at least one method");
            }
            self.methods()?;
            if d.coarse_sectors.is_some_and(|s| !(1..=3).contains(&s)) {
                return bad("departure.coarse_sectors", "must be 1, 2 or 3");
            }
            if d.coarse_grid_size.is_some_and(|h| !(h > 0.0)) {
                return bad("departure.coarse_grid_size", "must be positive");
            }
        }
        if let Some(b) = &self.bench {
            if b.presets.is_empty() {
                return bad("bench.presets", "needs at least one preset");
            }
            self.bench_presets()?;
            for p in &b.starts {
                if !region.contains(&Vec2::new(p[0], p[1])) {
                    return bad("bench.starts", &format!("({}, {}) lies outside the region", p[0], p[1]));
                }
            }
            if b.grid_sizes.iter().any(|h| !(*h > 0.0)) {
                return bad("bench.grid_sizes", "must be positive");
            }
        }
        Ok(())
    }

    fn field_spec_check(&self) -> CliResult<()> {
        let f = &self.field;
        let set = |name: &'static str, present: bool| (name, present);
        let jet = [
            set("b0", f.b0.is_some()),
            set("eps", f.eps.is_some()),
            set("omega", f.omega.is_some()),
            set("theta0", f.theta0.is_some()),
            set("k", f.k.is_some()),
            set("c_phase", f.c_phase.is_some()),
        ];
        let uniform = [set("u", f.u.is_some()), set("v", f.v.is_some())];
        let shear = [set("a", f.a.is_some())];
        let band = [
            set("speed", f.speed.is_some()),
            set("x_range", f.x_range.is_some()),
            set("y_range", f.y_range.is_some()),
            set("edge_width", f.edge_width.is_some()),
        ];
        let groups: [(FieldKind, &[(&str, bool)], bool); 4] = [
            (FieldKind::Jet, &jet, false),
            (FieldKind::Uniform, &uniform, true),
            (FieldKind::Shear, &shear, true),
            (FieldKind::Band, &band, true),
        ];
        for (kind, group, required) in groups {
            for &(name, present) in group {
                if present && kind != f.kind {
                    return Err(CliError::config(format!("field.{name}: not a parameter of kind {:?}", f.kind)));
                }
                if !present && kind == f.kind && required {
                    return Err(CliError::config(format!("field.{name}: required for kind {:?}", f.kind)));
                }
            }
        }
        if let Some([a, b]) = f.window {
            if !(a <= b) {
                return Err(CliError::config("field.window: start must not exceed horizon"));
            }
        }
        Ok(())
    }

    pub fn region(&self) -> BBox {
        BBox::new(self.region.x[0], self.region.x[1], self.region.y[0], self.region.y[1])
    }

    pub fn preset(&self) -> CliResult<Preset> {
        parse_preset(&self.search.preset, "search.preset")
    }

    pub fn methods(&self) -> CliResult<Vec<Method>> {
        let d = self.departure.as_ref().ok_or_else(|| CliError::config("missing [departure] section"))?;
        d.methods
            .iter()
            .map(|m| {
                m.parse()
                    .map_err(|_| CliError::config(format!("departure.methods: unknown method {m:?}")))
            })
            .collect()
    }

    pub fn bench_presets(&self) -> CliResult<Vec<Preset>> {
        let b = self.bench.as_ref().ok_or_else(|| CliError::config("missing [bench] section"))?;
        b.presets.iter().map(|p| parse_preset(p, "bench.presets")).collect()
    }

    pub fn start(&self) -> Vec2 {
        Vec2::new(self.search.start[0], self.search.start[1])
    }

    pub fn goal(&self) -> Vec2 {
        Vec2::new(self.search.goal[0], self.search.goal[1])
    }

    pub fn build_field(&self) -> CliResult<Box<dyn FlowField>> {
        let f = &self.field;
        let model: Box<dyn FlowField> = match f.kind {
            FieldKind::Jet => {
                let d = MeanderingJetParams::default();
                Box::new(MeanderingJet::new(MeanderingJetParams {
                    b0: f.b0.unwrap_or(d.b0),
                    eps: f.eps.unwrap_or(d.eps),
                    omega: f.omega.unwrap_or(d.omega),
                    theta0: f.theta0.unwrap_or(d.theta0),
                    k: f.k.unwrap_or(d.k),
                    c_phase: f.c_phase.unwrap_or(d.c_phase),
                }))
            }
            FieldKind::Uniform => Box::new(Uniform::new(f.u.unwrap(), f.v.unwrap())),
            FieldKind::Zero => Box::new(Uniform::zero()),
            FieldKind::Shear => Box::new(LinearShear { a: f.a.unwrap() }),
            FieldKind::Band => {
                let [x0, x1] = f.x_range.unwrap();
                let [y0, y1] = f.y_range.unwrap();
                Box::new(AdverseBand {
                    speed: f.speed.unwrap(),
                    x_range: (x0, x1),
                    y_range: (y0, y1),
                    edge_width: f.edge_width.unwrap(),
                })
            }
        };
        Ok(match f.window {
            Some([a, b]) => Box::new(Windowed::new(model, TimeWindow::new(a, b)?)),
            None => model,
        })
    }

    pub fn build_graph(&self) -> CliResult<Graph> {
        Ok(Graph::build_grid(self.region(), self.grid.size, self.grid.sectors)?)
    }

    /// Heuristic current bound: configured, or sampled over the region.
    pub fn v_current_max(&self, field: &dyn FlowField) -> CliResult<f64> {
        if let Some(v) = self.search.v_current_max {
            return Ok(v);
        }
        let [a, b] = self.search.current_span.unwrap_or([MISSION_SPAN.0, MISSION_SPAN.1]);
        let w = field.window();
        Ok(max_current_speed(field, &self.region(), (a.max(w.start), b.min(w.horizon)), SPEED_LATTICE)?)
    }

    pub fn search_config(&self, v_current_max: f64) -> SearchConfig {
        let preset = self.preset().unwrap_or(Preset::Itve);
        self.search_config_for(preset, v_current_max)
    }

    pub fn search_config_for(&self, preset: Preset, v_current_max: f64) -> SearchConfig {
        let mut cfg = SearchConfig::new(preset).with_v_current_max(v_current_max);
        if let Some(deg) = self.search.dphi_max_deg {
            cfg = cfg.with_dphi_max_deg(deg);
        }
        if let Some(v) = self.search.v_min {
            cfg.v_min = v;
        }
        if let Some(deg) = self.search.phi_max_deg {
            cfg.phi_max = deg.to_radians();
        }
        if let Some(stop) = self.search.stop_at_goal {
            cfg.stop_at_goal = stop;
        }
        cfg
    }
}

fn parse_preset(s: &str, key: &str) -> CliResult<Preset> {
    s.parse()
        .map_err(|_| CliError::config(format!("{key}: unknown preset {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const JET: &str = r#"
output_dir = "out/sp1"

[field]
kind = "jet"

[region]
x = [0.0, 12.0]
y = [-4.0, 4.0]

[grid]
size = 0.4
sectors = 3

[vehicle]
speed = 0.5

[search]
preset = "ITVE"
start = [0.8, -2.8]
goal = [11.2, 0.4]

[departure]
window = [0.0, 48.0]
dt = 4.0
methods = ["golden", "fibonacci", "brent"]
"#;

    fn with(edit: impl Fn(&mut RunConfig)) -> RunConfig {
        let mut c = RunConfig::parse(JET).unwrap();
        edit(&mut c);
        c
    }

    #[test]
    fn parses_and_round_trips() {
        let c = RunConfig::parse(JET).unwrap();
        assert_eq!(c.preset().unwrap(), Preset::Itve);
        assert_eq!(c.methods().unwrap(), vec![Method::Golden, Method::Fibonacci, Method::Brent]);
        assert_eq!(c.departure.as_ref().unwrap().tol, 0.01);
        let again = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_toml(), c.to_toml());
    }

    #[test]
    fn round_trips_optional_sections() {
        let c = with(|c| {
            c.field = FieldSpec {
                kind: FieldKind::Band,
                window: Some([0.0, 30.0]),
                speed: Some(0.4),
                x_range: Some([1.0, 2.0]),
                y_range: Some([-1.0, 1.0]),
                edge_width: Some(0.1),
                ..zero_field()
            };
            c.search.preset = "HTTVE".into();
            c.search.v_min = Some(0.1);
            c.search.phi_max_deg = Some(60.0);
            c.bench = Some(BenchSpec {
                presets: vec!["TVE".into(), "ZA*TVE".into()],
                starts: vec![[1.0, 1.0]],
                grid_sizes: vec![0.4, 0.8],
            });
        });
        c.validate().unwrap();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    fn zero_field() -> FieldSpec {
        FieldSpec {
            kind: FieldKind::Zero,
            window: None,
            b0: None,
            eps: None,
            omega: None,
            theta0: None,
            k: None,
            c_phase: None,
            u: None,
            v: None,
            a: None,
            speed: None,
            x_range: None,
            y_range: None,
            edge_width: None,
        }
    }

    fn config_error(c: &RunConfig) -> String {
        match c.validate() {
            Err(CliError::Config(msg)) => msg,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_report_line() {
        let broken = JET.replace("sectors = 3", "sectors = ");
        match RunConfig::parse(&broken) {
            Err(CliError::Config(msg)) => assert!(msg.contains("line"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let unknown = JET.replace("sectors = 3", "sectors = 3\nspacing = 1");
        match RunConfig::parse(&unknown) {
            Err(CliError::Config(msg)) => assert!(msg.contains("spacing"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let cases: Vec<(RunConfig, &str)> = vec![
            (with(|c| c.search.start = [20.0, 0.0]), "search.start"),
            (with(|c| c.search.preset = "XYZ".into()), "search.preset"),
            (with(|c| c.grid.sectors = 4), "grid.sectors"),
            (with(|c| c.grid.size = 0.0), "grid.size"),
            (with(|c| c.search.preset = "HTTVE".into()), "HTTVE needs"),
            (with(|c| c.search.v_min = Some(0.1)), "only apply to HTTVE"),
            (with(|c| c.field.u = Some(0.1)), "field.u"),
            (
                with(|c| {
                    c.field.kind = FieldKind::Uniform;
                    c.field.u = Some(0.1);
                }),
                "field.v",
            ),
            (with(|c| c.departure.as_mut().unwrap().methods = vec!["newton".into()]), "departure.methods"),
            (with(|c| c.departure.as_mut().unwrap().dt = -1.0), "departure.dt"),
            (with(|c| c.search.dphi_max_deg = Some(0.0)), "search"),
        ];
        for (c, key) in cases {
            let msg = config_error(&c);
            assert!(msg.contains(key), "{msg} should mention {key}");
        }
    }

    #[test]
    fn builds_core_objects() {
        let c = with(|c| {
            c.field = FieldSpec {
                kind: FieldKind::Uniform,
                window: Some([0.0, 10.0]),
                u: Some(0.3),
                v: Some(0.4),
                ..zero_field()
            };
        });
        let field = c.build_field().unwrap();
        assert_eq!(field.window().horizon, 10.0);
        assert!((c.v_current_max(field.as_ref()).unwrap() - 0.525).abs() < 1e-12);
        let graph = c.build_graph().unwrap();
        assert_eq!(graph.len(), 31 * 21);
        let cfg = c.search_config(0.7);
        assert_eq!(cfg.v_current_max, 0.7);
        assert_eq!(cfg.preset, Preset::Itve);
    }
}
