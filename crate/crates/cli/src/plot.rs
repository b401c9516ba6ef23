//! Minimal hand-written SVG line charts. CSVs are the canonical output;
//! these exist so a run can be eyeballed without extra tooling.

pub struct Curve<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub values: &'a [Option<f64>],
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 40.0;

/// One chart, window-start index on the x axis. Curves break wherever a
/// value is missing.
pub fn line_chart(title: &str, curves: &[Curve]) -> String {
    let max_len = curves.iter().map(|c| c.values.len()).max().unwrap_or(0);
    let defined: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.values.iter().flatten().copied())
        .collect();
    let (mut y_min, mut y_max) = defined
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !y_min.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if y_max - y_min < 1e-9 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = (y_max - y_min) * 0.05;
    let (y_min, y_max) = (y_min - pad, y_max + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |i: usize| {
        MARGIN_LEFT + plot_w * i as f64 / (max_len.saturating_sub(1)).max(1) as f64
    };
    let py = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - y_min) / (y_max - y_min));

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );

    // frame and axis labels
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#444\"/>\n"
    ));
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let v = y_min + (y_max - y_min) * frac;
        let y = py(v);
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"#ddd\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{v:.3}</text>\n",
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            y + 4.0
        ));
        let i = ((max_len.saturating_sub(1)) as f64 * frac) as usize;
        let x = px(i);
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{i}</text>\n",
            MARGIN_TOP + plot_h + 16.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">window start</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    ));

    for (ci, curve) in curves.iter().enumerate() {
        // split into contiguous defined segments
        let mut segment: Vec<(f64, f64)> = Vec::new();
        let flush = |seg: &mut Vec<(f64, f64)>, svg: &mut String| {
            match seg.len() {
                0 => {}
                1 => svg.push_str(&format!(
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"1.5\" fill=\"{}\"/>\n",
                    seg[0].0, seg[0].1, curve.color
                )),
                _ => {
                    let pts: Vec<String> =
                        seg.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                    svg.push_str(&format!(
                        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                        pts.join(" "),
                        curve.color
                    ));
                }
            }
            seg.clear();
        };
        for (i, v) in curve.values.iter().enumerate() {
            match v {
                Some(v) => segment.push((px(i), py(*v))),
                None => flush(&mut segment, &mut svg),
            }
        }
        flush(&mut segment, &mut svg);

        let lx = MARGIN_LEFT + 10.0 + 150.0 * ci as f64;
        let ly = MARGIN_TOP - 10.0;
        svg.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" \
             stroke-width=\"2\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            lx + 22.0,
            curve.color,
            lx + 27.0,
            ly + 4.0,
            escape(curve.label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
