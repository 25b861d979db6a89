use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::SweepRow;
use crate::error::{Error, Result};

const HEADER: [&str; 11] = [
    "omega",
    "n",
    "tau",
    "threshold_strategy",
    "rate_strategy",
    "exact_worst",
    "elb1",
    "elb2",
    "mc_worst",
    "mc_stderr",
    "aborted",
];

const SIGNIFICANT_DIGITS: i32 = 12;

/// Shortest of fixed or scientific notation carrying 12 significant digits,
/// with trailing zeros removed. NaN is written as `NaN`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIGNIFICANT_DIGITS - 1) as usize, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS).contains(&exponent) {
        let decimals = (SIGNIFICANT_DIGITS - 1 - exponent) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes rows with a header line. An empty slice produces the header only.
pub fn write_csv<W: Write>(rows: &[SweepRow], sink: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(HEADER)?;
    for r in rows {
        writer.write_record([
            format_real(r.omega),
            r.n.to_string(),
            format_real(r.tau),
            r.threshold_strategy.clone(),
            r.rate_strategy.clone(),
            format_real(r.exact_worst),
            format_real(r.elb1),
            format_real(r.elb2),
            format_real(r.mc_worst),
            format_real(r.mc_stderr),
            r.aborted.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(source: R) -> csv::Result<Vec<SweepRow>> {
    csv::Reader::from_reader(source).deserialize().collect()
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(rows, file).map_err(|e| csv_error(path, e))
}

pub fn parse_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file).map_err(|e| csv_error(path, e))
}
