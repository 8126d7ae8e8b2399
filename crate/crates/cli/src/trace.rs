//! CSV traces: `round,comm_units,grad_calls,inner_grad_calls,metric,value`,
//! LF line endings, floats with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use svogs_core::metrics::MetricTrace;

pub const HEADER: &str = "round,comm_units,grad_calls,inner_grad_calls,metric,value";

/// Scientific notation with 16 fractional digits, which round-trips `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn write_trace<W: Write>(trace: &MetricTrace, mut out: W) -> std::io::Result<()> {
    out.write_all(HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in &trace.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.round,
            r.comm_units,
            r.grad_calls,
            r.inner_grad_calls,
            r.metric,
            format_float(r.value)
        )?;
    }
    out.flush()
}

pub fn emit_trace(trace: &MetricTrace, path: &Path) -> std::io::Result<()> {
    write_trace(trace, BufWriter::new(File::create(path)?))
}
