//! Result emission: CSV tables (17 significant digits, bit-exact round
//! trips), JSON dumps, and minimal log-log SVG plots (one polyline per
//! series column).

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::record::{ExperimentOutcome, RunRecord, Table};

pub fn emit_outputs(outcome: &ExperimentOutcome, dir: &Path, format: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    match format {
        "csv" => {
            for table in &outcome.tables {
                let path = dir.join(format!("{}.csv", table.name));
                write_table_csv(&path, table)?;
                written.push(path);
            }
            for record in &outcome.records {
                let path = dir.join(format!("{}.csv", record.label));
                write_record_csv(&path, record)?;
                written.push(path);
            }
        }
        "json" => {
            let path = dir.join(format!("{}.json", outcome.kind));
            let file = std::fs::File::create(&path)?;
            serde_json::to_writer_pretty(file, outcome)
                .map_err(|e| CliError::Config(format!("json write: {e}")))?;
            written.push(path);
        }
        "svg" => {
            for table in &outcome.tables {
                let path = dir.join(format!("{}.svg", table.name));
                write_table_svg(&path, table)?;
                written.push(path);
            }
        }
        other => return Err(CliError::Config(format!("unknown format {other}"))),
    }
    let summary = dir.join(format!("{}.summary.txt", outcome.kind));
    let mut f = std::fs::File::create(&summary)?;
    writeln!(f, "kind: {}", outcome.kind)?;
    writeln!(f, "config: {}", outcome.config_hash)?;
    writeln!(f, "passed: {}", outcome.passed)?;
    for line in &outcome.details {
        writeln!(f, "{line}")?;
    }
    written.push(summary);
    Ok(written)
}

pub fn write_table_csv(path: &Path, table: &Table) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(f, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn read_table_csv(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::Config("empty table".into()))?;
    let columns: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    let mut table = Table::new(
        path.file_stem().and_then(|s| s.to_str()).unwrap_or("table"),
        columns,
    );
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        table.push(row.map_err(|e| CliError::Config(format!("csv parse: {e}")))?);
    }
    Ok(table)
}

fn write_record_csv(path: &Path, record: &RunRecord) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# config={} seed={} version={} wall_s={:.3}",
        record.config_hash, record.seed, record.code_version, record.wall_seconds)?;
    writeln!(f, "step,time,mass,l1,l2,linf,seminorm,ledger_min_slack")?;
    for s in &record.steps {
        writeln!(
            f,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            s.step,
            s.time,
            s.mass,
            s.l1,
            s.l2,
            s.linf,
            s.seminorm.map_or(String::new(), |v| format!("{v:.16e}")),
            s.ledger_min_slack.map_or(String::new(), |v| format!("{v:.16e}")),
        )?;
    }
    Ok(())
}

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

/// One polyline per non-abscissa column; log-log axes when the table says so.
pub fn write_table_svg(path: &Path, table: &Table) -> Result<()> {
    if table.columns.len() < 2 || table.rows.is_empty() {
        return Err(CliError::Config(format!("table {} has nothing to plot", table.name)));
    }
    let tx = |v: f64| if table.loglog { v.abs().max(1e-300).log10() } else { v };
    let xs: Vec<f64> = table.rows.iter().map(|r| tx(r[0])).collect();
    let mut ys = Vec::new();
    for c in 1..table.columns.len() {
        ys.push(table.rows.iter().map(|r| tx(r[c])).collect::<Vec<f64>>());
    }
    let (xmin, xmax) = bounds(&xs);
    let flat: Vec<f64> = ys.iter().flatten().copied().collect();
    let (ymin, ymax) = bounds(&flat);
    let sx = move |v: f64| MARGIN + (v - xmin) / (xmax - xmin).max(1e-300) * (PLOT_W - 2.0 * MARGIN);
    let sy = move |v: f64| {
        PLOT_H - MARGIN - (v - ymin) / (ymax - ymin).max(1e-300) * (PLOT_H - 2.0 * MARGIN)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" viewBox=\"0 0 {PLOT_W} {PLOT_H}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{}{}</text>\n",
        MARGIN,
        table.name,
        if table.loglog { " (log-log)" } else { "" }
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = PLOT_H - MARGIN,
        r = PLOT_W - MARGIN,
        t = MARGIN
    ));
    for (tick, label) in [(xmin, format!("{xmin:.3}")), (xmax, format!("{xmax:.3}"))] {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n",
            sx(tick) - 12.0,
            PLOT_H - MARGIN + 16.0,
            label
        ));
    }
    for (tick, label) in [(ymin, format!("{ymin:.3}")), (ymax, format!("{ymax:.3}"))] {
        svg.push_str(&format!(
            "<text x=\"4\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n",
            sy(tick) + 4.0,
            label
        ));
    }
    for (ci, series) in ys.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(series.iter())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            PLOT_W - MARGIN + 4.0,
            MARGIN + 14.0 * ci as f64,
            table.columns[ci + 1]
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_writes_header_only() {
        let dir = std::env::temp_dir().join("roughflow-emit-test");
        std::fs::create_dir_all(&dir).unwrap();
        let table = Table::new("empty", vec!["a".into(), "b".into()]);
        let path = dir.join("empty.csv");
        write_table_csv(&path, &table).unwrap();
        let back = read_table_csv(&path).unwrap();
        assert_eq!(back.columns, vec!["a", "b"]);
        assert!(back.rows.is_empty());
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let dir = std::env::temp_dir().join("roughflow-emit-test");
        std::fs::create_dir_all(&dir).unwrap();
        let mut table = Table::new("roundtrip", vec!["x".into(), "y".into()]);
        table.push(vec![0.1 + 0.2, -1.0 / 3.0]);
        table.push(vec![f64::MIN_POSITIVE, 1.2345678901234567e300]);
        let path = dir.join("roundtrip.csv");
        write_table_csv(&path, &table).unwrap();
        let back = read_table_csv(&path).unwrap();
        for (r1, r2) in table.rows.iter().zip(back.rows.iter()) {
            for (a, b) in r1.iter().zip(r2.iter()) {
                assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let dir = std::env::temp_dir().join("roughflow-emit-test");
        std::fs::create_dir_all(&dir).unwrap();
        let mut table = Table::new("plot", vec!["h".into(), "h1".into(), "h2".into(), "h3".into()])
            .loglog();
        for m in 1..=6 {
            let h = 2.0f64.powi(-m);
            table.push(vec![h, h * 2.0, h * h, 1.0 - h]);
        }
        let path = dir.join("plot.svg");
        write_table_svg(&path, &table).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<polyline").count(), 3);
    }
}
