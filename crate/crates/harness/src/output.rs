//! Plot-ready CSV emission.

use std::io::Write;

use crate::error::Result;
use crate::phase::PhaseGrid;
use crate::sweep::SweepResult;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per (sweep point, metric).
pub fn write_sweep_csv<W: Write>(results: &[SweepResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "value", "abscissa", "sigma_s", "srf", "mean", "std", "n", "censored"])?;
    for r in results {
        for row in &r.rows {
            w.write_record([
                r.metric.name().to_string(),
                row.value.to_string(),
                row.abscissa.to_string(),
                row.sigma_s.to_string(),
                opt(row.srf),
                row.mean.to_string(),
                row.std.to_string(),
                row.n.to_string(),
                row.censored.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per metric with its fitted line.
pub fn write_fit_csv<W: Write>(results: &[SweepResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "slope", "intercept", "residual", "excluded"])?;
    for r in results {
        let excluded: Vec<String> = r.excluded.iter().map(f64::to_string).collect();
        w.write_record([
            r.metric.name().to_string(),
            opt(r.fit.map(|f| f.slope)),
            opt(r.fit.map(|f| f.intercept)),
            opt(r.fit.map(|f| f.residual)),
            excluded.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long form: `x, y, cell`, with the parameter names as headers.
pub fn write_phase_csv<W: Write>(grid: &PhaseGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([grid.x_parameter.name(), grid.y_parameter.name(), "cell"])?;
    for (i, x) in grid.xs.iter().enumerate() {
        for (j, y) in grid.ys.iter().enumerate() {
            w.write_record([x.to_string(), y.to_string(), grid.cell(i, j).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per column; the crossing is empty where none was found.
pub fn write_crossings_csv<W: Write>(grid: &PhaseGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ycol = format!("{}_crossing", grid.y_parameter.name());
    w.write_record([grid.x_parameter.name(), ycol.as_str()])?;
    for (x, c) in grid.xs.iter().zip(&grid.crossings) {
        w.write_record([x.to_string(), opt(*c)])?;
    }
    w.flush()?;
    Ok(())
}
