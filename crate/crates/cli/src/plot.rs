//! SVG rendering of the curve and lemma CSVs. Output depends only on the
//! input bytes: coordinates are printed with fixed precision and no
//! timestamps or random ids are embedded.

use std::fmt::Write as _;
use std::path::Path;

use signlab::experiments::singularity::{fit_exponential, CurveMethod, CurveRow, SingularityCurve};
use signlab::output::{CURVE_HEADER, LEMMA_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("plot: {0}")]
    Io(String),
    #[error("plot: csv has no data rows")]
    Empty,
    #[error("plot: unrecognized csv header `{0}`")]
    UnknownSchema(String),
    #[error("plot: row {line}: {reason}")]
    BadRow { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Curve,
    LemmaMargins,
}

impl PlotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlotKind::Curve => "curve",
            PlotKind::LemmaMargins => "lemma-margins",
        }
    }
}

const W: f64 = 760.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;
/// Margins are clipped to ±this many decades.
const MARGIN_CLIP: f64 = 16.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(s: &str, line: usize, col: &str) -> Result<f64, PlotError> {
    s.trim().parse::<f64>().map_err(|_| PlotError::BadRow { line, reason: format!("column {col}: `{s}` is not a number") })
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x0 + 0.5) };
        let (y0, y1) = if y1 > y0 { (y0, y1) } else { (y0 - 0.5, y0 + 0.5) };
        Self { x0, x1, y0, y1 }
    }
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }
    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn header(svg: &mut String, title: &str) {
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r##"<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>"##);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, esc(title));
}

fn axes(svg: &mut String, x_label: &str, y_label: &str) {
    let (xl, xr, yt, yb) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(svg, r##"<path d="M{xl:.2} {yt:.2} L{xl:.2} {yb:.2} L{xr:.2} {yb:.2}" fill="none" stroke="#000000"/>"##);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (xl + xr) / 2.0, H - 20.0, esc(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (yt + yb) / 2.0,
        (yt + yb) / 2.0,
        esc(y_label)
    );
}

fn y_ticks(svg: &mut String, f: &Frame, label: impl Fn(i64) -> String) {
    let (lo, hi) = (f.y0.ceil() as i64, f.y1.floor() as i64);
    let step = ((hi - lo) / 8).max(1);
    let mut k = lo;
    while k <= hi {
        let y = f.py(k as f64);
        let _ = writeln!(svg, r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="#000000"/>"##, LEFT - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, esc(&label(k)));
        k += step;
    }
}

fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>), PlotError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| PlotError::Io(format!("{}: {e}", path.display())))?;
    let head: Vec<String> = match rd.headers() {
        Ok(h) => h.iter().map(str::to_string).collect(),
        Err(_) => return Err(PlotError::Empty),
    };
    let rows = rd.records().collect::<Result<Vec<_>, _>>().map_err(|e| PlotError::Io(e.to_string()))?;
    Ok((head, rows))
}

pub fn detect(head: &[String]) -> Option<PlotKind> {
    if head.iter().map(String::as_str).eq(CURVE_HEADER) {
        Some(PlotKind::Curve)
    } else if head.iter().map(String::as_str).eq(LEMMA_HEADER) {
        Some(PlotKind::LemmaMargins)
    } else {
        None
    }
}

/// Renders `path` into SVG text. Nothing is written here.
pub fn render(path: &Path) -> Result<(PlotKind, String), PlotError> {
    let (head, rows) = read_rows(path)?;
    if head.iter().all(|h| h.is_empty()) || rows.is_empty() {
        return Err(PlotError::Empty);
    }
    let kind = detect(&head).ok_or_else(|| PlotError::UnknownSchema(head.join(",")))?;
    let svg = match kind {
        PlotKind::Curve => render_curve(&rows)?,
        PlotKind::LemmaMargins => render_margins(&rows)?,
    };
    Ok((kind, svg))
}

fn render_curve(rows: &[csv::StringRecord]) -> Result<String, PlotError> {
    let mut curve = SingularityCurve { rows: Vec::new() };
    for (i, r) in rows.iter().enumerate() {
        let line = i + 2;
        if r.len() != CURVE_HEADER.len() {
            return Err(PlotError::BadRow { line, reason: format!("expected {} fields", CURVE_HEADER.len()) });
        }
        let method = match &r[1] {
            "exhaustive" => CurveMethod::Exhaustive,
            "monte-carlo" => CurveMethod::MonteCarlo,
            m => return Err(PlotError::BadRow { line, reason: format!("unknown method `{m}`") }),
        };
        let int = |c: usize| r[c].trim().parse::<u64>().map_err(|_| PlotError::BadRow { line, reason: format!("column {}: `{}`", CURVE_HEADER[c], &r[c]) });
        curve.rows.push(CurveRow {
            n: int(0)? as usize,
            method,
            count: int(2)?,
            total: int(3)?,
            p_hat: num(&r[4], line, "p_hat")?,
            ci_low: num(&r[5], line, "ci_low")?,
            ci_high: num(&r[6], line, "ci_high")?,
            seed: None,
            samples: int(8)?,
        });
    }
    let pts: Vec<&CurveRow> = curve.rows.iter().filter(|r| r.p_hat > 0.0).collect();
    let ns = curve.rows.iter().map(|r| r.n as f64);
    let (x0, x1) = (ns.clone().fold(f64::INFINITY, f64::min) - 0.5, ns.fold(f64::NEG_INFINITY, f64::max) + 0.5);
    let logs: Vec<f64> = pts.iter().flat_map(|r| [r.p_hat, r.ci_low, r.ci_high]).filter(|p| *p > 0.0).map(f64::log10).collect();
    let (ylo, yhi) = if logs.is_empty() { (-1.0, 0.0) } else { (logs.iter().cloned().fold(f64::INFINITY, f64::min), logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)) };
    let f = Frame::new(x0, x1, (ylo - 0.25).floor(), (yhi + 0.25).ceil().min(0.5).max(ylo.floor() + 1.0));

    let mut svg = String::new();
    header(&mut svg, "Singular probability of random symmetric sign matrices");
    axes(&mut svg, "n", "P(singular), log scale");
    y_ticks(&mut svg, &f, |k| format!("1e{k}"));
    for r in &curve.rows {
        let x = f.px(r.n as f64);
        let _ = writeln!(svg, r##"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##, H - BOTTOM + 16.0, r.n);
    }
    for r in &pts {
        let x = f.px(r.n as f64);
        if r.ci_low > 0.0 && r.ci_high > r.ci_low {
            let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#555555"/>"##, f.py(r.ci_low.log10()), f.py(r.ci_high.log10()));
        }
        let fill = if r.method == CurveMethod::Exhaustive { "#1f4e9c" } else { "#c0392b" };
        let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{:.2}" r="3.5" fill="{fill}"/>"#, f.py(r.p_hat.log10()));
    }
    match fit_exponential(&curve, (0, usize::MAX)) {
        Ok(fit) => {
            let (a, b) = (fit.window.0.max(curve.rows[0].n) as f64, fit.window.1.min(curve.rows.last().map_or(0, |r| r.n)) as f64);
            let ln10 = std::f64::consts::LN_10;
            let y = |x: f64| (fit.intercept + fit.slope * x) / ln10;
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#27ae60" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
                f.px(a),
                f.py(y(a)),
                f.px(b),
                f.py(y(b))
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">fitted log-slope {:.4} per n, CI [{:.4}, {:.4}], {} points</text>"#,
                W - RIGHT - 6.0,
                TOP + 16.0,
                fit.slope,
                fit.slope_ci.lo,
                fit.slope_ci.hi,
                fit.points
            );
        }
        Err(_) => {
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">no fit: fewer than 4 usable points</text>"#, W - RIGHT - 6.0, TOP + 16.0);
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn verdict_color(v: &str) -> &'static str {
    match v {
        "holds" => "#27ae60",
        "vacuous" => "#95a5a6",
        "inconclusive" => "#f39c12",
        "violated" => "#c0392b",
        _ => "#8e44ad",
    }
}

/// log10(rhs / lhs), clipped; NaN when the ratio is undefined.
fn margin(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs > 0.0 {
        MARGIN_CLIP
    } else if lhs > 0.0 && rhs > 0.0 && lhs.is_finite() && rhs.is_finite() {
        (rhs / lhs).log10().clamp(-MARGIN_CLIP, MARGIN_CLIP)
    } else {
        f64::NAN
    }
}

fn render_margins(rows: &[csv::StringRecord]) -> Result<String, PlotError> {
    let mut bars = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let line = i + 2;
        if r.len() != LEMMA_HEADER.len() {
            return Err(PlotError::BadRow { line, reason: format!("expected {} fields", LEMMA_HEADER.len()) });
        }
        let lhs = num(&r[3], line, "lhs_hat")?;
        let rhs = num(&r[5], line, "rhs_hat")?;
        bars.push((r[0].to_string(), r[2].to_string(), margin(lhs, rhs)));
    }
    let finite = bars.iter().map(|b| b.2).filter(|m| m.is_finite());
    let lo = finite.clone().fold(0.0f64, f64::min).floor();
    let hi = finite.fold(0.0f64, f64::max).ceil();
    let f = Frame::new(0.0, bars.len() as f64, lo, hi.max(lo + 1.0));

    let mut svg = String::new();
    header(&mut svg, "Lemma margins: log10(rhs / lhs)");
    axes(&mut svg, "report", "decades of slack");
    y_ticks(&mut svg, &f, |k| k.to_string());
    let zero = f.py(0.0);
    let _ = writeln!(svg, r##"<line x1="{LEFT:.2}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="#000000" stroke-width="0.5"/>"##, W - RIGHT);
    let slot = (W - LEFT - RIGHT) / bars.len() as f64;
    for (i, (id, verdict, m)) in bars.iter().enumerate() {
        let x = f.px(i as f64) + 0.1 * slot;
        let bw = 0.8 * slot;
        let color = verdict_color(verdict);
        if m.is_finite() {
            let (y, h) = if *m >= 0.0 { (f.py(*m), zero - f.py(*m)) } else { (zero, f.py(*m) - zero) };
            let _ = writeln!(svg, r#"<rect x="{x:.2}" y="{y:.2}" width="{bw:.2}" height="{h:.2}" fill="{color}"><title>{} {}</title></rect>"#, esc(id), esc(verdict));
        } else {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{zero:.2}" r="3" fill="{color}"><title>{} {} (no margin)</title></circle>"#, x + bw / 2.0, esc(id), esc(verdict));
        }
    }
    // label each run of equal ids once
    let mut start = 0;
    while start < bars.len() {
        let mut end = start;
        while end + 1 < bars.len() && bars[end + 1].0 == bars[start].0 {
            end += 1;
        }
        let cx = f.px((start + end + 1) as f64 / 2.0);
        let y = H - BOTTOM + 12.0;
        let _ = writeln!(svg, r#"<text x="{cx:.2}" y="{y:.2}" text-anchor="end" font-size="9" transform="rotate(-45 {cx:.2} {y:.2})">{}</text>"#, esc(&bars[start].0));
        start = end + 1;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
