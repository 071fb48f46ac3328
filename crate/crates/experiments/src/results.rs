use std::cmp::Ordering;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::error::{io_err, Error, Result};

pub const CSV_HEADER: [&str; 6] = ["rep", "method", "param", "param_value", "metric", "value"];

/// One measurement of one method in one repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub rep: usize,
    pub method: String,
    /// Name of the swept parameter (`k`, `n`, `fraction`).
    pub param: String,
    pub param_value: f64,
    pub metric: String,
    pub value: f64,
}

impl ResultRow {
    pub fn new(
        rep: usize,
        method: impl Into<String>,
        param: impl Into<String>,
        param_value: f64,
        metric: impl Into<String>,
        value: f64,
    ) -> Result<Self> {
        let row = Self {
            rep,
            method: method.into(),
            param: param.into(),
            param_value,
            metric: metric.into(),
            value,
        };
        if !row.value.is_finite() || !row.param_value.is_finite() {
            return Err(Error::Data(format!(
                "non-finite {} for {} at {} = {}",
                row.metric, row.method, row.param, row.param_value
            )));
        }
        Ok(row)
    }

    fn order(&self, other: &Self) -> Ordering {
        self.rep
            .cmp(&other.rep)
            .then_with(|| self.method.cmp(&other.method))
            .then_with(|| self.param_value.total_cmp(&other.param_value))
            .then_with(|| self.param.cmp(&other.param))
            .then_with(|| self.metric.cmp(&other.metric))
            .then_with(|| self.value.total_cmp(&other.value))
    }
}

/// Sorts by repetition, method, parameter value, then the remaining fields.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(ResultRow::order);
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(rows: &[ResultRow], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record([
            row.rep.to_string(),
            row.method.clone(),
            row.param.clone(),
            fmt_float(row.param_value),
            row.metric.clone(),
            fmt_float(row.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ResultRow>, csv::Error> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().collect()
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut writer: W) -> Result<(), serde_json::Error> {
    serde_json::to_writer_pretty(&mut writer, rows)?;
    writer.write_all(b"\n").map_err(serde_json::Error::io)
}

/// Repetitions that failed and were left out of the output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub experiment: String,
    pub seed: u64,
    pub reps: usize,
    pub rows: usize,
    pub excluded: usize,
    pub failures: Vec<Failure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub rep: usize,
    /// Experiment cell the repetition belongs to, if any.
    pub cell: Option<String>,
    pub error: String,
}

/// Rows plus run metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub meta: RunMeta,
}

/// Sorts and writes `rows` to `path`, or to stdout when no path is given.
pub fn emit_results(rows: &mut [ResultRow], path: Option<&Path>, format: OutputFormat) -> Result<()> {
    sort_rows(rows);
    match path {
        None => {
            let stdout = std::io::stdout().lock();
            write_rows(rows, stdout, format, Path::new("<stdout>"))
        }
        Some(path) => {
            let file = std::fs::File::create(path).map_err(io_err(path))?;
            write_rows(rows, std::io::BufWriter::new(file), format, path)
        }
    }
}

fn write_rows<W: Write>(rows: &[ResultRow], writer: W, format: OutputFormat, path: &Path) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(rows, writer).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        }),
        OutputFormat::Json => write_json(rows, writer).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        }),
    }
}

/// Path of the metadata file written next to `out`.
pub fn meta_path(out: &Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    name.into()
}

pub fn write_meta(meta: &RunMeta, out: &Path) -> Result<()> {
    let path = meta_path(out);
    let text = serde_json::to_string_pretty(meta).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    std::fs::write(&path, text + "\n").map_err(io_err(path))
}
