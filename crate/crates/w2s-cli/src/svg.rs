//! Scatter-plot emission: one SVG 1.1 document per sweep, metric on x,
//! `err_w2s` on y, one circle per aggregate (per-config) row, and the
//! Spearman correlation in the title. Output bytes are deterministic.

use w2s_core::harness::spearman;
use w2s_core::Error;

pub struct ScatterData {
    pub metric_name: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub rho: f64,
}

/// Aggregates a sweep CSV (mean per config id) and extracts the metric and
/// err_w2s columns.
pub fn scatter_from_csv(csv: &str, metric: &str) -> Result<ScatterData, Error> {
    let mut lines = csv.lines();
    let header = lines.next().ok_or(Error::EmptySweep)?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let find = |name: &str| -> Result<usize, Error> {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let id_col = find("config_id")?;
    let metric_col = find(metric)?;
    let err_col = find("err_w2s")?;

    let mut order: Vec<String> = Vec::new();
    let mut sums: std::collections::HashMap<String, (f64, f64, usize)> =
        std::collections::HashMap::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::DimensionMismatch(format!(
                "csv row has {} fields, header has {}",
                fields.len(),
                cols.len()
            )));
        }
        let parse = |i: usize| -> Result<f64, Error> {
            fields[i]
                .parse()
                .map_err(|_| Error::DegenerateData(format!("bad number {:?}", fields[i])))
        };
        let id = fields[id_col].to_string();
        let x = parse(metric_col)?;
        let y = parse(err_col)?;
        let entry = sums.entry(id.clone()).or_insert_with(|| {
            order.push(id);
            (0.0, 0.0, 0)
        });
        entry.0 += x;
        entry.1 += y;
        entry.2 += 1;
    }
    if order.is_empty() {
        return Err(Error::EmptySweep);
    }
    let mut xs = Vec::with_capacity(order.len());
    let mut ys = Vec::with_capacity(order.len());
    for id in &order {
        let (sx, sy, n) = sums[id];
        xs.push(sx / n as f64);
        ys.push(sy / n as f64);
    }
    let rho = if xs.len() >= 2 {
        spearman(&xs, &ys)?
    } else {
        1.0
    };
    Ok(ScatterData {
        metric_name: metric.to_string(),
        xs,
        ys,
        rho,
    })
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn axis_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

pub fn render_scatter(data: &ScatterData) -> String {
    let (x0, x1) = axis_range(&data.xs);
    let (y0, y1) = axis_range(&data.ys);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{} vs err_w2s (rho={:.3})</text>\n",
        WIDTH / 2.0,
        data.metric_name,
        data.rho
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{m:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    ));
    svg.push_str(&format!(
        "<line x1=\"{m:.1}\" y1=\"{t:.1}\" x2=\"{m:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        HEIGHT - 16.0,
        data.metric_name
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">err_w2s</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));
    // axis extremes as tick labels
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\">{x0:.4}</text>\n",
        MARGIN,
        HEIGHT - MARGIN + 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{x1:.4}</text>\n",
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 16.0
    ));
    for (x, y) in data.xs.iter().zip(&data.ys) {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"steelblue\" fill-opacity=\"0.8\"/>\n",
            px(*x),
            py(*y)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
