//! CSV, JSON and fixed-width table output for trial records.

use std::io::Write;

use crate::experiment::{Mode, OutputFormat, TrialRecord};
use crate::error::Result;

pub const CSV_HEADER: &str =
    "mode,dimension,trial,walkers,steps,dt,radius,seed,hits,k_hat,k_theory,rel_err,mean_path_hat,mean_chord_theory,wall_time_s";

/// Dimensions per block in the table layout.
const TABLE_BLOCK: usize = 5;
const TABLE_WIDTH: usize = 16;

/// Formats `x` with 9 significant digits, trailing zeros removed, like
/// C's `%.9g`.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // take the exponent after rounding, which may carry into the next decade
    let sci = format!("{:.8e}", x);
    let (mantissa, e) = sci.split_once('e').expect("exponent");
    let e: i32 = e.parse().expect("integer exponent");
    if (-5..9).contains(&e) {
        let decimals = (8 - e).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        format!("{mantissa}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig9).unwrap_or_default()
}

/// Writes `records` in the requested format.
pub fn emit<W: Write>(records: &[TrialRecord], format: OutputFormat, out: &mut W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(records, out),
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, records)?;
            out.write_all(b"\n")?;
            Ok(())
        }
        OutputFormat::Table => write_table(records, out),
    }
}

/// Renders `records` to a string.
pub fn render(records: &[TrialRecord], format: OutputFormat) -> Result<String> {
    let mut buf = Vec::new();
    emit(records, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("output is UTF-8"))
}

fn write_csv<W: Write>(records: &[TrialRecord], out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.mode,
            r.dimension,
            r.trial,
            r.walkers,
            r.steps,
            fmt_sig9(r.dt),
            fmt_sig9(r.radius),
            r.seed,
            r.hits,
            fmt_sig9(r.k_hat),
            fmt_sig9(r.k_theory),
            fmt_sig9(r.rel_err),
            opt(r.mean_path_hat),
            fmt_sig9(r.mean_chord_theory),
            fmt_sig9(r.wall_time_s),
        )?;
    }
    Ok(())
}

/// Dimensions as columns (in blocks of five), trials as rows, and the exact
/// constant as the last row of each block.
fn write_table<W: Write>(records: &[TrialRecord], out: &mut W) -> Result<()> {
    let mut dims: Vec<u32> = Vec::new();
    for r in records {
        if !dims.contains(&r.dimension) {
            dims.push(r.dimension);
        }
    }
    let value = |r: &TrialRecord| match r.mode {
        Mode::Speed => r.speed_hat.unwrap_or(f64::NAN),
        _ => r.k_hat,
    };
    for (b, block) in dims.chunks(TABLE_BLOCK).enumerate() {
        if b > 0 {
            writeln!(out)?;
        }
        let columns: Vec<Vec<&TrialRecord>> = block
            .iter()
            .map(|d| records.iter().filter(|r| r.dimension == *d).collect())
            .collect();
        let header: Vec<String> = block.iter().map(|d| format!("dimension {d}")).collect();
        write_row(out, &header)?;
        writeln!(out, "{}", "-".repeat(TABLE_WIDTH * block.len()))?;
        let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
        for i in 0..rows {
            let cells: Vec<String> = columns
                .iter()
                .map(|c| c.get(i).map(|r| fmt_sig9(value(r))).unwrap_or_default())
                .collect();
            write_row(out, &cells)?;
        }
        let theory: Vec<String> = columns
            .iter()
            .map(|c| {
                c.first()
                    .map(|r| fmt_sig9(if r.mode == Mode::Speed { 1.0 } else { r.k_theory }))
                    .unwrap_or_default()
            })
            .collect();
        write_row(out, &theory)?;
    }
    Ok(())
}

fn write_row<W: Write>(out: &mut W, cells: &[String]) -> Result<()> {
    let line: String = cells.iter().map(|c| format!("{c:<TABLE_WIDTH$}")).collect();
    writeln!(out, "{}", line.trim_end())?;
    Ok(())
}
