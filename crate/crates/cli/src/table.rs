//! CSV result tables.
//!
//! Every table starts with `#` comment lines carrying the resolved
//! scenario, followed by a header and one row per SNR point. Floats are
//! written with 17 significant digits so they read back bit-identically.

use dout_core::{OutageEstimate, SweepResult};

use crate::error::{CliError, Result};

pub const OUTAGE_HEADER: [&str; 8] = [
    "snr_db",
    "informed_p",
    "informed_ci_low",
    "informed_ci_high",
    "separation_p",
    "separation_ci_low",
    "separation_ci_high",
    "trials",
];

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_comments(out: &mut String, comments: &[String]) {
    for line in comments {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
}

/// Serializes sweep rows; `comments` become the leading metadata block.
pub fn write_outage_table(result: &SweepResult, comments: &[String]) -> String {
    let mut out = String::new();
    push_comments(&mut out, comments);
    out.push_str(&OUTAGE_HEADER.join(","));
    out.push('\n');
    for row in &result.rows {
        let mut fields = vec![
            format_float(row.snr_db),
            format_float(row.informed.p_hat),
            format_float(row.informed.ci_low),
            format_float(row.informed.ci_high),
        ];
        match &row.separation {
            Some(s) => fields.extend([
                format_float(s.p_hat),
                format_float(s.ci_low),
                format_float(s.ci_high),
            ]),
            None => fields.extend([String::new(), String::new(), String::new()]),
        }
        fields.push(row.informed.trials.to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes a generic numeric table with the given header.
pub fn write_numeric_table(header: &[&str], rows: &[Vec<f64>], comments: &[String]) -> String {
    let mut out = String::new();
    push_comments(&mut out, comments);
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// A CSV file with numeric (possibly empty) cells.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl NumericTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn is_outage_table(&self) -> bool {
        self.header.iter().map(String::as_str).eq(OUTAGE_HEADER)
    }
}

pub fn parse_numeric_table(text: &str, origin: &str) -> Result<NumericTable> {
    let fail = |message: String| CliError::Table {
        path: origin.to_string(),
        message,
    };
    let comments = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim().to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| fail(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(fail("missing header".into()));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        let row = record
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| {
                        fail(format!("data row {}: \"{cell}\" is not a number", i + 1))
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(NumericTable {
        comments,
        header,
        rows,
    })
}

/// One row of an outage table, with counts reconstructed from `p * trials`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageRow {
    pub snr_db: f64,
    pub informed: OutageEstimate,
    pub separation: Option<OutageEstimate>,
}

fn estimate(p: f64, lo: f64, hi: f64, trials: u64) -> OutageEstimate {
    OutageEstimate {
        p_hat: p,
        ci_low: lo,
        ci_high: hi,
        trials,
        outage_count: (p * trials as f64).round() as u64,
    }
}

/// Reads back the rows written by [`write_outage_table`].
pub fn outage_rows(table: &NumericTable, origin: &str) -> Result<Vec<OutageRow>> {
    let fail = |message: String| CliError::Table {
        path: origin.to_string(),
        message,
    };
    if !table.is_outage_table() {
        return Err(fail(format!(
            "expected header {}, got {}",
            OUTAGE_HEADER.join(","),
            table.header.join(",")
        )));
    }
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let need = |c: usize| {
                r.get(c).copied().flatten().ok_or_else(|| {
                    fail(format!("data row {}: missing {}", i + 1, OUTAGE_HEADER[c]))
                })
            };
            let trials = need(7)?;
            if trials < 1.0 || trials.fract() != 0.0 {
                return Err(fail(format!(
                    "data row {}: bad trial count {trials}",
                    i + 1
                )));
            }
            let trials = trials as u64;
            let separation = match (r[4], r[5], r[6]) {
                (Some(p), Some(lo), Some(hi)) => Some(estimate(p, lo, hi, trials)),
                (None, None, None) => None,
                _ => {
                    return Err(fail(format!(
                        "data row {}: partial separation columns",
                        i + 1
                    )))
                }
            };
            Ok(OutageRow {
                snr_db: need(0)?,
                informed: estimate(need(1)?, need(2)?, need(3)?, trials),
                separation,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_enough_digits() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        for v in [0.1, 1.0 / 3.0, 6.9e-5, 1e-300, 25.0] {
            assert_eq!(
                format_float(v).parse::<f64>().unwrap().to_bits(),
                v.to_bits()
            );
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_numeric_table("a,b\n1,x\n", "t").is_err());
        let t = parse_numeric_table("# note\na,b\n1,\n", "t").unwrap();
        assert_eq!(t.comments, vec!["note"]);
        assert_eq!(t.rows, vec![vec![Some(1.0), None]]);
        assert!(outage_rows(&t, "t").is_err());
    }
}
