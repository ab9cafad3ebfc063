//! Oracle checks on one bundled jet fixture.

use tvplan::fixtures::{fixture, JetScenario};
use tvplan::search::{extract_path, heuristic, search, Preset, SearchConfig, SearchResult};
use tvplan::validation::{optimal_control_reference, simulate_path, ShootingOptions};

use crate::error::{CliError, CliResult};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

pub fn run_checks(name: &str) -> CliResult<Vec<Check>> {
    let f = fixture(name).map_err(|e| CliError::config(e.to_string()))?;
    let sc = JetScenario::new()?;
    let ctx = sc.ctx();
    let (s, g) = sc.endpoints(&f);
    let cfg = |p: Preset| SearchConfig::new(p).with_v_current_max(sc.v_current_max);
    let go = |c: &SearchConfig| search(&sc.graph, c, s, Some(g), 0.0, &ctx);

    let tve = go(&cfg(Preset::Tve))?;
    let itve = go(&cfg(Preset::Itve))?;
    let astar = go(&cfg(Preset::AstarTve))?;
    let ztve = go(&cfg(Preset::Ztve))?;
    let zastar = go(&cfg(Preset::ZastarTve))?;
    let mut out = Vec::new();

    let same = |r: &SearchResult| r.chain(g) == itve.chain(g) && r.d[g] == itve.d[g];
    out.push(check(
        "path-identity",
        itve.reached(g) && same(&tve) && same(&astar),
        format!("TVE/ITVE/A*TVE arrival {:.6}", itve.d[g]),
    ));

    let r = |a: u64, b: u64| a as f64 / b as f64;
    let (c_t, c_i, c_a, c_z, c_za) = (
        tve.counters.cfc,
        itve.counters.cfc,
        astar.counters.cfc,
        ztve.counters.cfc,
        zastar.counters.cfc,
    );
    let (m_t, m_i, m_a, m_z, m_za) = (
        tve.counters.cmc,
        itve.counters.cmc,
        astar.counters.cmc,
        ztve.counters.cmc,
        zastar.counters.cmc,
    );
    let ratios_ok = |t: u64, i: u64, a: u64, z: u64, za: u64| r(i, t) <= 0.6 && r(z, i) <= 0.5 && za <= a.min(z) && r(za, t) <= 0.125;
    out.push(check(
        "counter-ratios",
        ratios_ok(c_t, c_i, c_a, c_z, c_za) && ratios_ok(m_t, m_i, m_a, m_z, m_za),
        format!(
            "CFC ITVE/TVE {:.3}, ZTVE/ITVE {:.3}, ZA*TVE/TVE {:.3}",
            r(c_i, c_t),
            r(c_z, c_i),
            r(c_za, c_t)
        ),
    ));

    out.push(check(
        "gated-optimality",
        ztve.d[g] == itve.d[g] && zastar.d[g] == itve.d[g],
        format!("ZTVE {:.6}, ZA*TVE {:.6} at 27.5 deg", ztve.d[g], zastar.d[g]),
    ));

    let opts = ShootingOptions {
        t_max: 1.5 * itve.d[g],
        ..Default::default()
    };
    let start = sc.graph.position(s);
    let goal = sc.graph.position(g);
    out.push(match optimal_control_reference(&start, &goal, 0.0, &sc.field, sc.v_veh_bf, &opts) {
        Ok(traj) => {
            let gap = (itve.d[g] - traj.arrival) / traj.arrival;
            check(
                "optimal-control-gap",
                (-0.005..=0.05).contains(&gap),
                format!("reference {:.6}, ITVE {:+.2}%", traj.arrival, 100.0 * gap),
            )
        }
        Err(e) => check("optimal-control-gap", false, format!("reference unreached: {e}")),
    });

    let path = extract_path(&itve, &sc.graph, g)?;
    out.push(match simulate_path(&path, &sc.field, sc.v_veh_bf, 1e-4) {
        Ok(rep) => {
            let err = (rep.arrival_time - itve.d[g]).abs() / path.travel_time();
            check(
                "simulation",
                err <= 0.01,
                format!("simulated {:.6}, {:.4}% off", rep.arrival_time, 100.0 * err),
            )
        }
        Err(e) => check("simulation", false, e.to_string()),
    });

    let mut audit = cfg(Preset::Itve);
    audit.stop_at_goal = true;
    let mut violations = 0;
    for &u in &astar.expanded {
        let t = astar.d[u];
        let rest = search(&sc.graph, &audit, u, Some(g), t, &ctx)?.d[g] - t;
        if heuristic(&sc.graph.position(u), &goal, sc.v_veh_bf, sc.v_current_max) > rest {
            violations += 1;
        }
    }
    out.push(check(
        "admissibility",
        violations == 0,
        format!("{} expanded vertices, {violations} violations", astar.expanded.len()),
    ));
    Ok(out)
}
