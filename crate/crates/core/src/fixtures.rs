//! The bundled meandering-jet scenarios.
//!
//! Five start positions west of a common goal, spread across the region at
//! decreasing distance (SP1 farthest). All use the same rectangular
//! 3-sector grid of size 0.4 and a vehicle speed of 0.5.

use crate::cost::CostContext;
use crate::error::{Error, Result};
use crate::flow_field::{max_current_speed, MeanderingJet};
use crate::geom::{BBox, Vec2};
use crate::graph::{Graph, VertexId};

pub const V_VEH_BF: f64 = 0.5;
pub const GRID_SIZE: f64 = 0.4;
pub const SECTORS: u32 = 3;
/// Departure time of the path-planning fixtures.
pub const T0: f64 = 0.0;
/// Time span over which the heuristic's current bound is taken.
pub const MISSION_SPAN: (f64, f64) = (0.0, 120.0);
/// Sampling lattice for the current bound (x, y, t).
pub const SPEED_LATTICE: [usize; 3] = [61, 41, 121];

pub fn region() -> BBox {
    BBox::new(0.0, 12.0, -4.0, 4.0)
}

pub const GOAL: (f64, f64) = (11.2, 0.4);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub start: Vec2,
    pub goal: Vec2,
}

pub const NAMES: [&str; 5] = ["SP1", "SP2", "SP3", "SP4", "SP5"];
const STARTS: [(f64, f64); 5] = [(0.8, -2.8), (2.4, 2.8), (4.0, -3.2), (5.6, 2.0), (7.2, 2.4)];

pub fn fixtures() -> Vec<Fixture> {
    NAMES
        .iter()
        .zip(STARTS)
        .map(|(&name, (x, y))| Fixture {
            name,
            start: Vec2::new(x, y),
            goal: Vec2::new(GOAL.0, GOAL.1),
        })
        .collect()
}

pub fn fixture(name: &str) -> Result<Fixture> {
    fixtures()
        .into_iter()
        .find(|f| f.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::arg(format!("unknown fixture {name:?}")))
}

/// Field, graph and heuristic bound shared by all fixtures.
#[derive(Debug, Clone)]
pub struct JetScenario {
    pub field: MeanderingJet,
    pub graph: Graph,
    pub v_veh_bf: f64,
    pub v_current_max: f64,
}

impl JetScenario {
    pub fn new() -> Result<Self> {
        let field = MeanderingJet::default();
        let graph = Graph::build_grid(region(), GRID_SIZE, SECTORS)?;
        let v_current_max = max_current_speed(&field, &region(), MISSION_SPAN, SPEED_LATTICE)?;
        Ok(Self {
            field,
            graph,
            v_veh_bf: V_VEH_BF,
            v_current_max,
        })
    }

    pub fn ctx(&self) -> CostContext<'_> {
        CostContext::new(&self.field, self.v_veh_bf).expect("fixture speed is valid")
    }

    /// Start and goal vertices of a fixture.
    pub fn endpoints(&self, f: &Fixture) -> (VertexId, VertexId) {
        let s = self.graph.nearest_vertex(&f.start).expect("start inside region");
        let g = self.graph.nearest_vertex(&f.goal).expect("goal inside region");
        (s, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_lie_on_lattice_and_get_closer() {
        let sc = JetScenario::new().unwrap();
        let mut last = f64::INFINITY;
        for f in fixtures() {
            let (s, g) = sc.endpoints(&f);
            assert!((sc.graph.position(s) - f.start).norm() < 1e-9);
            assert!((sc.graph.position(g) - f.goal).norm() < 1e-9);
            let dist = (f.goal - f.start).norm();
            assert!(dist < last, "{}", f.name);
            last = dist;
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(fixture("sp3").unwrap().name, "SP3");
        assert!(fixture("SP9").is_err());
    }
}
