//! Tiled SVG rendering of a plan: the start arrangement, then one frame per
//! action. Objects at their current poses are green, goal poses are
//! translucent cyan, and objects parked at buffers get dashed outlines.

use std::fmt::Write;

use rearrange_core::{ActionKind, Instance, Plan, Pose, Shape};

const SCALE: f64 = 48.0;
const MARGIN: f64 = 12.0;
const CAPTION: f64 = 18.0;

pub fn render_svg(inst: &Instance, plan: &Plan) -> String {
    let frames = plan.len() + 1;
    let cols = (frames as f64).sqrt().ceil().max(1.0) as usize;
    let rows = frames.div_ceil(cols);
    let fw = inst.workspace.width * SCALE + 2.0 * MARGIN;
    let fh = inst.workspace.height * SCALE + 2.0 * MARGIN + CAPTION;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n",
        cols as f64 * fw,
        rows as f64 * fh
    );
    let mut cur = inst.start.clone();
    let mut buffered = vec![false; inst.n()];
    for f in 0..frames {
        let caption = if f == 0 {
            "start".to_owned()
        } else {
            let a = &plan.actions[f - 1];
            cur.set(a.object, a.target);
            buffered[a.object] = a.kind == ActionKind::SB;
            format!("{f}: {:?} object {}", a.kind, a.object)
        };
        let tx = (f % cols) as f64 * fw + MARGIN;
        let ty = (f / cols) as f64 * fh + MARGIN + CAPTION;
        let _ = writeln!(svg, "<g class=\"frame\" transform=\"translate({tx:.1},{ty:.1})\">");
        let _ = writeln!(svg, "<text x=\"0\" y=\"-6\">{caption}</text>");
        let _ = writeln!(
            svg,
            "<rect x=\"0\" y=\"0\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\"/>",
            inst.workspace.width * SCALE,
            inst.workspace.height * SCALE
        );
        for o in 0..inst.n() {
            draw(
                &mut svg,
                inst,
                inst.shape(o),
                inst.goal.pose(o),
                "fill=\"#17becf\" fill-opacity=\"0.18\" stroke=\"#17becf\"",
            );
        }
        for o in 0..inst.n() {
            let style = if buffered[o] {
                "fill=\"#2ca02c\" fill-opacity=\"0.45\" stroke=\"#145214\" stroke-dasharray=\"6 4\""
            } else {
                "fill=\"#2ca02c\" fill-opacity=\"0.85\" stroke=\"#145214\""
            };
            draw(&mut svg, inst, inst.shape(o), cur.pose(o), style);
            let (x, y) = to_px(inst, cur.pose(o));
            let _ = writeln!(
                svg,
                "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"middle\" dy=\"4\">{o}</text>"
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

/// Workspace coordinates are y-up; SVG is y-down.
fn to_px(inst: &Instance, p: Pose) -> (f64, f64) {
    (p.x * SCALE, (inst.workspace.height - p.y) * SCALE)
}

fn draw(svg: &mut String, inst: &Instance, shape: &Shape, pose: Pose, style: &str) {
    let (x, y) = to_px(inst, pose);
    let _ = match *shape {
        Shape::Disc { radius } => writeln!(
            svg,
            "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{:.1}\" {style}/>",
            radius * SCALE
        ),
        Shape::Rect { width, height } => writeln!(
            svg,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" {style}/>",
            x - width * SCALE / 2.0,
            y - height * SCALE / 2.0,
            width * SCALE,
            height * SCALE
        ),
    };
}
