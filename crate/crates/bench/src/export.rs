//! CSV and JSON output.
//!
//! CSV floats are written with 17 significant digits so that parsing a file
//! back gives the exact values; missing values are empty fields.

use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::experiment::{ResultRow, ResultTable, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// From the file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension() {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub const TABLE_HEADER: [&str; 7] = [
    "ratio",
    "measurements",
    "trials",
    "mean_init_error_gsi",
    "mean_init_error_si",
    "success_rate",
    "mean_iterations",
];

fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn table_csv(table: &ResultTable) -> Result<String> {
    csv_string(
        &TABLE_HEADER,
        table.rows.iter().map(|r| {
            vec![
                float(r.ratio),
                r.measurements.to_string(),
                r.trials.to_string(),
                float(r.mean_init_error_gsi),
                float(r.mean_init_error_si),
                opt(r.success_rate, float),
                opt(r.mean_iterations, float),
            ]
        }),
    )
}

/// Parses the output of [`table_csv`].
pub fn read_table_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let bad = |field: &str, e: &dyn std::fmt::Display| BenchError::Config(format!("column {field}: {e}"));
    let num = |s: &str, field: &str| s.parse::<f64>().map_err(|e| bad(field, &e));
    let count = |s: &str, field: &str| s.parse::<usize>().map_err(|e| bad(field, &e));
    let maybe = |s: &str, field: &str| {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s, field).map(Some)
        }
    };
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            if rec.len() != TABLE_HEADER.len() {
                return Err(BenchError::Config(format!("expected {} columns", TABLE_HEADER.len())));
            }
            Ok(ResultRow {
                ratio: num(&rec[0], "ratio")?,
                measurements: count(&rec[1], "measurements")?,
                trials: count(&rec[2], "trials")?,
                mean_init_error_gsi: num(&rec[3], "mean_init_error_gsi")?,
                mean_init_error_si: num(&rec[4], "mean_init_error_si")?,
                success_rate: maybe(&rec[5], "success_rate")?,
                mean_iterations: maybe(&rec[6], "mean_iterations")?,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct Metadata<'a> {
    generator: &'static str,
    base_seed: u64,
    /// Both initializers see the same measurements in each trial.
    paired_measurements: bool,
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    metadata: Metadata<'a>,
    rows: &'a [T],
}

fn json_document<T: Serialize>(config: &ExperimentConfig, rows: &[T]) -> Result<String> {
    let doc = Document {
        metadata: Metadata {
            generator: concat!("gsi-bench ", env!("CARGO_PKG_VERSION")),
            base_seed: config.base_seed,
            paired_measurements: true,
            config,
        },
        rows,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn table_json(table: &ResultTable, config: &ExperimentConfig) -> Result<String> {
    json_document(config, &table.rows)
}

pub fn render_table(table: &ResultTable, config: &ExperimentConfig, format: Format) -> Result<String> {
    match format {
        Format::Csv => table_csv(table),
        Format::Json => table_json(table, config),
    }
}

/// Per-trial records. These include wall-clock times, so unlike the tables
/// they differ between runs.
pub fn render_records(records: &[TrialRecord], config: &ExperimentConfig, format: Format) -> Result<String> {
    match format {
        Format::Json => json_document(config, records),
        Format::Csv => csv_string(
            &[
                "ratio",
                "measurements",
                "trial_index",
                "seed",
                "init_rel_error",
                "init_rel_error_si",
                "final_rel_error",
                "iterations",
                "success",
                "wall_time_secs",
            ],
            records.iter().map(|r| {
                vec![
                    float(r.ratio),
                    r.measurements.to_string(),
                    r.trial_index.to_string(),
                    r.seed.to_string(),
                    float(r.init_rel_error),
                    float(r.init_rel_error_si),
                    opt(r.final_rel_error, float),
                    opt(r.iterations, |i| i.to_string()),
                    opt(r.success, |s| s.to_string()),
                    format!("{:.6}", r.wall_time_secs),
                ]
            }),
        ),
    }
}

/// Writes to `path`, or to stdout when it is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(|e| BenchError::io(p, e)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .map_err(|e| BenchError::io(Path::new("<stdout>"), e))
        }
    }
}
