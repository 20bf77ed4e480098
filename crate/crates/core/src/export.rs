//! CSV exchange formats for snapshot batches and covariance matrices.

use std::io::{Read, Write};

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};
use crate::signal_model::SnapshotBatch;

/// Writes raw snapshots `y(t_l)`: one row per sensor, columns `re_l,im_l` for
/// each snapshot `l`.
pub fn write_snapshots_csv<T: Real, W: Write>(batch: &SnapshotBatch<T>, out: W) -> Result<()> {
    write_complex_csv(&batch.raw(), "re_", "im_", out)
}

/// Reads the format written by [`write_snapshots_csv`].
pub fn read_snapshots_csv<T: Real, R: Read>(input: R) -> Result<SnapshotBatch<T>> {
    let raw = read_complex_csv(input)?;
    SnapshotBatch::from_raw(&raw)
}

/// Writes a complex matrix with interleaved real/imaginary columns.
pub fn write_complex_csv<T: Real, W: Write>(m: &CMatrix<T>, re: &str, im: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..m.ncols())
        .flat_map(|j| [format!("{re}{j}"), format!("{im}{j}")])
        .collect();
    w.write_record(&header)?;
    for row in m.row_iter() {
        let rec: Vec<String> = row
            .iter()
            .flat_map(|z| [z.re.as_f64().to_string(), z.im.as_f64().to_string()])
            .collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_complex_csv<T: Real, R: Read>(input: R) -> Result<CMatrix<T>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows: Vec<Vec<Complex<T>>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() % 2 != 0 {
            return Err(Error::InvalidArgument("odd number of re/im columns".into()));
        }
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad number {f:?}: {e}"))))
            .collect::<Result<_>>()?;
        rows.push(vals.chunks(2).map(|p| Complex::new(T::lit(p[0]), T::lit(p[1]))).collect());
    }
    let n = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("ragged or empty complex matrix".into()));
    }
    Ok(CMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}
