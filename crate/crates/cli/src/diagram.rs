//! Amplitude bar charts as standalone SVG.

use std::fmt::Write;

use qdesk_core::circuit::ket_label;
use qdesk_core::state_json::StateJson;

pub const DEFAULT_REAL_COLOR: &str = "red";
pub const DEFAULT_IMAG_COLOR: &str = "yellow";

const BAR_WIDTH: f64 = 14.0;
const GROUP_WIDTH: f64 = 40.0;
const MARGIN: f64 = 20.0;
/// Height of a full-scale bar on either side of the axis.
const HALF_HEIGHT: f64 = 90.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramStyle {
    pub real_color: String,
    pub imag_color: String,
}

impl Default for DiagramStyle {
    fn default() -> Self {
        Self {
            real_color: DEFAULT_REAL_COLOR.into(),
            imag_color: DEFAULT_IMAG_COLOR.into(),
        }
    }
}

/// Colors end up inside XML attributes, so only CSS color syntax passes:
/// names, `#hex` and functional forms such as `rgb(1, 2, 3)`.
pub fn valid_color(c: &str) -> bool {
    !c.is_empty()
        && c.chars()
            .all(|ch| ch.is_ascii_alphanumeric() || "#(),.% ".contains(ch))
}

fn bar(out: &mut String, class: &str, x: f64, axis: f64, height: f64, value: f64, color: &str) {
    let y = if value >= 0.0 { axis - height } else { axis };
    writeln!(
        out,
        r#"    <rect class="{class}" x="{x:.3}" y="{y:.3}" width="{BAR_WIDTH:.3}" height="{height:.3}" fill="{color}"><title>{value:?}</title></rect>"#
    )
    .unwrap();
}

/// One bar group per basis state, real part left of imaginary part. Both
/// share one axis scaled to the largest component magnitude.
pub fn render_svg(state: &StateJson, style: &DiagramStyle) -> String {
    let n = state.qubits;
    let groups = state.amplitudes.len();
    let max = state
        .amplitudes
        .iter()
        .flat_map(|[re, im]| [re.abs(), im.abs()])
        .fold(0.0, f64::max);
    let scale = if max > 0.0 { HALF_HEIGHT / max } else { 0.0 };
    let width = 2.0 * MARGIN + GROUP_WIDTH * groups as f64;
    let axis = MARGIN + HALF_HEIGHT;
    let height = axis + HALF_HEIGHT + 2.0 * MARGIN;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"  <line class="axis" x1="{MARGIN:.3}" y1="{axis:.3}" x2="{:.3}" y2="{axis:.3}" stroke="black"/>"#,
        width - MARGIN
    )
    .unwrap();
    for (i, &[re, im]) in state.amplitudes.iter().enumerate() {
        let ket = ket_label(i, n);
        let x = MARGIN + GROUP_WIDTH * i as f64 + (GROUP_WIDTH - 2.0 * BAR_WIDTH) / 2.0;
        writeln!(out, r#"  <g class="basis" data-index="{i}" data-ket="{ket}">"#).unwrap();
        bar(&mut out, "real", x, axis, re.abs() * scale, re, &style.real_color);
        bar(&mut out, "imag", x + BAR_WIDTH, axis, im.abs() * scale, im, &style.imag_color);
        writeln!(
            out,
            r#"    <text x="{:.3}" y="{:.3}" font-size="10" text-anchor="middle">{ket}</text>"#,
            x + BAR_WIDTH,
            height - MARGIN / 2.0
        )
        .unwrap();
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    out
}
