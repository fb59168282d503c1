//! SVG route plots: sensor dots scaled by priority, one colored
//! polyline per UAV from its start station through its visits to the
//! shared end station. Abandoned sensors are drawn hollow red.
//!
//! The output is plain geometry with no timestamps, so a re-run with
//! the same inputs produces byte-identical SVG, and tests can parse the
//! polylines back out.

use fleetplan_core::route_eval::Plan;
use fleetplan_core::scenario::Scenario;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub fn route_color(uav_rank: usize) -> &'static str {
    PALETTE[uav_rank % PALETTE.len()]
}

/// Render the plan over its scenario. Coordinates are in meters with
/// the y axis flipped so north is up.
pub fn render(scenario: &Scenario, plan: &Plan) -> String {
    let (w, h) = scenario.field_bound;
    let margin = 0.04 * w.max(h);
    let flip = |y: f64| h - y;
    // Dot radius spans ~0.3% to 1% of the field so priority is visible
    // at any field scale.
    let radius = |priority: f64| (0.003 + 0.007 * (priority - 1.0) / 99.0) * w.max(h);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.1} {:.1} {:.1} {:.1}\">\n",
        -margin,
        -margin,
        w + 2.0 * margin,
        h + 2.0 * margin
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{w:.1}\" height=\"{h:.1}\" fill=\"#fafafa\" stroke=\"#999\" stroke-width=\"2\"/>\n"
    ));

    // Routes under the dots.
    for (rank, route) in plan.routes.iter().enumerate() {
        let uav = scenario.uav(route.uav_id);
        let mut points = vec![uav.start_position];
        points.extend(route.visit_order.iter().map(|&id| scenario.sensor(id).position));
        points.push(scenario.end_position);
        let coords: Vec<String> = points
            .iter()
            .map(|p| format!("{:.1},{:.1}", p.x, flip(p.y)))
            .collect();
        svg.push_str(&format!(
            "  <polyline id=\"route-u{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.1}\" stroke-opacity=\"0.8\"/>\n",
            route.uav_id,
            coords.join(" "),
            route_color(rank),
            0.002 * w.max(h)
        ));
    }

    // Sensors: filled when visited, hollow red when abandoned.
    for sensor in &scenario.sensors {
        let r = radius(sensor.priority);
        let (x, y) = (sensor.position.x, flip(sensor.position.y));
        if plan.abandoned.contains(&sensor.id) {
            svg.push_str(&format!(
                "  <circle class=\"sensor abandoned\" cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{r:.1}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"{:.1}\"/>\n",
                0.0015 * w.max(h)
            ));
        } else {
            svg.push_str(&format!(
                "  <circle class=\"sensor\" cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{r:.1}\" fill=\"#444\" fill-opacity=\"0.65\"/>\n"
            ));
        }
    }

    // Start stations as colored squares, end station as a ringed dot.
    let mark = 0.012 * w.max(h);
    for (rank, uav) in scenario.uavs.iter().enumerate() {
        let (x, y) = (uav.start_position.x, flip(uav.start_position.y));
        svg.push_str(&format!(
            "  <rect class=\"start\" x=\"{:.1}\" y=\"{:.1}\" width=\"{mark:.1}\" height=\"{mark:.1}\" fill=\"{}\" stroke=\"#000\"/>\n",
            x - mark / 2.0,
            y - mark / 2.0,
            route_color(rank)
        ));
    }
    let (ex, ey) = (scenario.end_position.x, flip(scenario.end_position.y));
    svg.push_str(&format!(
        "  <circle class=\"end\" cx=\"{ex:.1}\" cy=\"{ey:.1}\" r=\"{:.1}\" fill=\"#000\"/>\n",
        mark * 0.45
    ));
    svg.push_str(&format!(
        "  <circle class=\"end\" cx=\"{ex:.1}\" cy=\"{ey:.1}\" r=\"{:.1}\" fill=\"none\" stroke=\"#000\" stroke-width=\"{:.1}\"/>\n",
        mark * 0.8,
        0.0015 * w.max(h)
    ));

    svg.push_str("</svg>\n");
    svg
}
