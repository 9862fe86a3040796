//! Position error bound for a few agent layouts around the target on the
//! bundled map, with and without GPS denial.
//!
//!     cargo run --example localization_peb

use pitnav::localization::{agent_fim, peb, total_fim, DEFAULT_COND_THRESHOLD};
use pitnav::radio::{gps_covariance, measure, GpsModel, RadioConfig};
use pitnav::{Cell, GridMap};

fn layout_peb(map: &GridMap, agents: &[Cell], denied: bool) -> f64 {
    let radio = RadioConfig::default();
    let cov = gps_covariance(&GpsModel::default(), denied);
    let t = map.position(map.target());
    let fims = agents.iter().map(|&c| {
        let m = measure(&radio, map.distance_m(c, map.target()), map.is_los(c), 0.0).unwrap();
        agent_fim(t, map.position(c), m.var_range, &cov).unwrap()
    });
    peb(&total_fim(fims), DEFAULT_COND_THRESHOLD).peb
}

fn main() {
    let map = GridMap::bundled();
    let tg = map.target();
    let layouts: [(&str, Vec<Cell>); 4] = [
        ("agent starts", map.agent_starts().to_vec()),
        ("one agent in the room", vec![Cell::new(tg.x - 3, tg.y)]),
        (
            "two collinear",
            vec![Cell::new(tg.x - 3, tg.y), Cell::new(tg.x - 5, tg.y)],
        ),
        (
            "two at right angles",
            vec![Cell::new(tg.x - 3, tg.y), Cell::new(tg.x, tg.y - 3)],
        ),
    ];
    println!("target at ({}, {})", tg.x, tg.y);
    for (name, agents) in &layouts {
        println!(
            "{name:<24} PEB {:>10.4} m   (GPS denied: {:.4} m)",
            layout_peb(&map, agents, false),
            layout_peb(&map, agents, true)
        );
    }
}
