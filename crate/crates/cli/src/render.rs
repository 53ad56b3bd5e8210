//! SVG rendering of configurations: one square per cell, colored by
//! infection round or by final state.

use bootperc_core::dynamics::TimeMap;
use bootperc_core::lattice::{Configuration, Rect, Site};

/// Discrete viridis-style ramp.
const VIRIDIS: [&str; 10] = [
    "#440154", "#482878", "#3e4a89", "#31688e", "#26828e", "#1f9e89", "#35b779", "#6dcd59",
    "#b4de2c", "#fde725",
];
const NEVER_FILL: &str = "#eeeeee";
const STATE_FILL: &str = "#31688e";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorBy {
    /// Color by infection round.
    Time,
    /// Two colors: eventually infected or not.
    State,
}

fn round_color(round: u32, max_round: u32) -> &'static str {
    if max_round == 0 {
        return VIRIDIS[0];
    }
    let idx = (round as usize * (VIRIDIS.len() - 1)) / max_round as usize;
    VIRIDIS[idx.min(VIRIDIS.len() - 1)]
}

/// Renders the box with per-cell fill from the time map; initially infected
/// cells carry an outline.
pub fn render_svg(
    initial: &Configuration,
    times: &TimeMap,
    color_by: ColorBy,
    cell_px: u32,
) -> String {
    let domain: Rect = initial.domain();
    let (w, h) = (domain.width(), domain.height());
    let px = cell_px.max(1);
    let mut svg = String::with_capacity((w * h) as usize * 64);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">\n",
        w * px,
        h * px,
        w * px,
        h * px
    ));
    svg.push_str(&format!(
        "<rect width=\"{}\" height=\"{}\" fill=\"{NEVER_FILL}\"/>\n",
        w * px,
        h * px
    ));
    let max_round = times.max_round().unwrap_or(0);
    for (row, y) in (domain.y1..=domain.y2).rev().enumerate() {
        for (col, x) in (domain.x1..=domain.x2).enumerate() {
            let site = Site::new(x, y);
            let fill = match (color_by, times.get(site)) {
                (_, None) => continue,
                (ColorBy::State, Some(_)) => STATE_FILL,
                (ColorBy::Time, Some(t)) => round_color(t, max_round),
            };
            let stroke = if initial.contains(site) {
                " stroke=\"#000000\" stroke-width=\"1\""
            } else {
                ""
            };
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{px}\" height=\"{px}\" fill=\"{fill}\"{stroke}/>\n",
                col as u32 * px,
                row as u32 * px,
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
