//! CSV readers and writers.
//!
//! Dialect: comma-separated, `.` decimal point, one header row, and any
//! number of leading `# key: value` metadata lines. Floats are written in
//! Rust's shortest round-trip form so files re-read to identical values.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::bootstrap::BootstrapReplicates;
use crate::error::{Result, TmesError};
use crate::extremal::{TimeSeriesPair, TmesCurve};
use crate::rolling::WindowResult;

/// Writes `# key: value` lines.
pub fn write_metadata<W: Write>(w: &mut W, meta: &[(&str, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

/// Returns the value of the first `# key: value` line in `path`, if any.
pub fn read_metadata(path: &Path, key: &str) -> Result<Option<String>> {
    let prefix = format!("# {key}: ");
    let file = std::fs::File::open(path)?;
    for line in BufReader::new(file).lines() {
        let line = line?;
        if !line.starts_with('#') {
            break;
        }
        if let Some(v) = line.strip_prefix(&prefix) {
            return Ok(Some(v.to_string()));
        }
    }
    Ok(None)
}

/// `t,x,y` rows with 1-based `t`.
pub fn write_pair_csv<W: Write>(w: &mut W, ts: &TimeSeriesPair, meta: &[(&str, String)]) -> Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "t,x,y")?;
    for (t, (x, y)) in ts.x().iter().zip(ts.y()).enumerate() {
        writeln!(w, "{},{x},{y}", t + 1)?;
    }
    Ok(())
}

/// Reads the named columns of a headed CSV file as a [`TimeSeriesPair`].
pub fn read_pair_csv(path: &Path, x_col: &str, y_col: &str) -> Result<TimeSeriesPair> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TmesError::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let (xi, yi) = (column(x_col)?, column(y_col)?);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let parse = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| TmesError::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("bad value `{s}`"),
                })
        };
        x.push(parse(xi)?);
        y.push(parse(yi)?);
    }
    TimeSeriesPair::new(x, y)
}

/// `lag,delta[,lo,hi]` (or `delta0` for centered curves).
pub fn write_curve_csv<W: Write>(w: &mut W, curve: &TmesCurve, meta: &[(&str, String)]) -> Result<()> {
    write_metadata(w, meta)?;
    let name = if curve.centered { "delta0" } else { "delta" };
    match &curve.bands {
        Some(bands) => {
            writeln!(w, "lag,{name},lo,hi")?;
            for ((h, v), (lo, hi)) in curve.lags.iter().zip(&curve.values).zip(bands) {
                writeln!(w, "{h},{v},{lo},{hi}")?;
            }
        }
        None => {
            writeln!(w, "lag,{name}")?;
            for (h, v) in curve.lags.iter().zip(&curve.values) {
                writeln!(w, "{h},{v}")?;
            }
        }
    }
    Ok(())
}

/// `replicate_index,value` rows (1-based index); with `lag` column when
/// several lags are written together.
pub fn write_replicates_csv<W: Write>(
    w: &mut W,
    reps: &[BootstrapReplicates],
    meta: &[(&str, String)],
) -> Result<()> {
    write_metadata(w, meta)?;
    if reps.len() == 1 {
        writeln!(w, "replicate_index,value")?;
        for (i, v) in reps[0].values.iter().enumerate() {
            writeln!(w, "{},{v}", i + 1)?;
        }
    } else {
        writeln!(w, "lag,replicate_index,value")?;
        for r in reps {
            for (i, v) in r.values.iter().enumerate() {
                writeln!(w, "{},{},{v}", r.lag, i + 1)?;
            }
        }
    }
    Ok(())
}

/// `theoretical,sample` rows, with a leading `lag` column when `lag` is set.
pub fn write_qq_csv<W: Write>(
    w: &mut W,
    qq: &[(usize, Vec<(f64, f64)>)],
    meta: &[(&str, String)],
) -> Result<()> {
    write_metadata(w, meta)?;
    if qq.len() == 1 {
        writeln!(w, "theoretical,sample")?;
        for (t, s) in &qq[0].1 {
            writeln!(w, "{t},{s}")?;
        }
    } else {
        writeln!(w, "lag,theoretical,sample")?;
        for (h, pairs) in qq {
            for (t, s) in pairs {
                writeln!(w, "{h},{t},{s}")?;
            }
        }
    }
    Ok(())
}

/// `end_date,lag,delta0,lo,hi`; `end_date` falls back to the 1-based window
/// end position when the series carries no dates.
pub fn write_windows_csv<W: Write>(w: &mut W, results: &[WindowResult], meta: &[(&str, String)]) -> Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "end_date,lag,delta0,lo,hi")?;
    for r in results {
        let end = r
            .end_date
            .map(|d| d.to_string())
            .unwrap_or_else(|| r.end.to_string());
        for ((h, v), (lo, hi)) in r.lags.iter().zip(&r.delta0).zip(&r.bands) {
            writeln!(w, "{end},{h},{v},{lo},{hi}")?;
        }
    }
    Ok(())
}
