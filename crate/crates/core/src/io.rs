//! File formats. Every table is CSV with a header row keyed by
//! `question_id` or `individual_id`; reports and manifests are JSON. Writes
//! go to a temporary file in the target directory and are renamed into
//! place.
//!
//! `responses.csv` is stored one question per line:
//!
//! ```text
//! #kind=continuous
//! question_id,I1,I2,I3
//! Q1,0.25,1.5,-0.75
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CrowdError, Result};
use crate::types::{GroundTruth, Kind, Orientation, ResponseMatrix, ScoreVector};

fn io_err(path: &Path, e: impl std::fmt::Display) -> CrowdError {
    CrowdError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> CrowdError {
    CrowdError::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Shortest decimal that parses back to the same `f64`; exponent notation
/// outside `[1e-5, 1e16)`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Reads a CSV body into header and records, skipping `#` comment lines.
fn read_records(path: &Path, text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| parse_err(path, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| parse_err(path, e.to_string()))?;
        rows.push(rec.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

fn expect_header(path: &Path, header: &[String], expected: &[&str]) -> Result<()> {
    if header != expected {
        return Err(parse_err(
            path,
            format!("expected columns {expected:?}, found {header:?}"),
        ));
    }
    Ok(())
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| parse_err(path, format!("line {line}: {field:?} is not a number")))
}

pub fn responses_csv(matrix: &ResponseMatrix) -> Vec<u8> {
    let mut out = format!("#kind={}\n", matrix.kind()).into_bytes();
    let mut header = vec!["question_id"];
    header.extend(matrix.individual_ids().iter().map(String::as_str));
    let x = matrix.values();
    let rows = matrix.question_ids().iter().enumerate().map(|(i, q)| {
        std::iter::once(q.clone())
            .chain(x.column(i).iter().map(|&v| format_f64(v)))
            .collect()
    });
    out.extend(csv_bytes(&header, rows));
    out
}

pub fn write_responses(path: &Path, matrix: &ResponseMatrix) -> Result<()> {
    write_atomic(path, &responses_csv(matrix))
}

/// Reads and validates a response matrix. Without a `#kind=` line the kind is
/// binary when every value is 0 or 1 and continuous otherwise.
pub fn read_responses(path: &Path) -> Result<ResponseMatrix> {
    let text = read_to_string(path)?;
    let declared = text
        .lines()
        .map(str::trim)
        .filter(|l| l.starts_with('#'))
        .find_map(|l| l.trim_start_matches('#').trim().strip_prefix("kind="))
        .map(|k| k.trim().parse::<Kind>())
        .transpose()?;
    let (header, rows) = read_records(path, &text)?;
    if header.first().map(String::as_str) != Some("question_id") {
        return Err(parse_err(path, "first column must be question_id"));
    }
    let individual_ids: Vec<String> = header[1..].to_vec();
    let k = individual_ids.len();
    let n = rows.len();
    let mut values = Array2::zeros((k, n));
    let mut question_ids = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k + 1 {
            return Err(parse_err(
                path,
                format!("line {}: {} fields, expected {}", i + 2, row.len(), k + 1),
            ));
        }
        question_ids.push(row[0].clone());
        for j in 0..k {
            values[[j, i]] = parse_f64(path, i + 2, &row[j + 1])?;
        }
    }
    let kind = declared.unwrap_or_else(|| {
        if values.iter().all(|&v| v == 0.0 || v == 1.0) {
            Kind::Binary
        } else {
            Kind::Continuous
        }
    });
    ResponseMatrix::try_new(values, individual_ids, question_ids, kind)
}

pub fn write_truth(path: &Path, question_ids: &[String], truth: &GroundTruth) -> Result<()> {
    let rows = question_ids
        .iter()
        .zip(&truth.labels)
        .map(|(q, &l)| vec![q.clone(), if l { "1" } else { "0" }.to_string()]);
    write_atomic(path, &csv_bytes(&["question_id", "label"], rows))
}

pub fn read_truth(path: &Path) -> Result<(Vec<String>, GroundTruth)> {
    let text = read_to_string(path)?;
    let (header, rows) = read_records(path, &text)?;
    expect_header(path, &header, &["question_id", "label"])?;
    let mut ids = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        ids.push(r[0].clone());
        labels.push(match r[1].as_str() {
            "1" => true,
            "0" => false,
            other => {
                return Err(parse_err(
                    path,
                    format!("line {}: label {other:?} is not 0 or 1", i + 2),
                ))
            }
        });
    }
    Ok((ids, GroundTruth::new(labels)))
}

fn write_keyed(path: &Path, key: &str, column: &str, ids: &[String], values: &[f64]) -> Result<()> {
    let rows = ids
        .iter()
        .zip(values)
        .map(|(id, &v)| vec![id.clone(), format_f64(v)]);
    write_atomic(path, &csv_bytes(&[key, column], rows))
}

pub fn write_probs(path: &Path, question_ids: &[String], probs: &[f64]) -> Result<()> {
    write_keyed(path, "question_id", "prob", question_ids, probs)
}

pub fn write_alphas(path: &Path, individual_ids: &[String], alphas: &[f64]) -> Result<()> {
    write_keyed(path, "individual_id", "alpha", individual_ids, alphas)
}

fn read_keyed(path: &Path, key: &str, column: &str) -> Result<(Vec<String>, Vec<f64>)> {
    let text = read_to_string(path)?;
    let (header, rows) = read_records(path, &text)?;
    expect_header(path, &header, &[key, column])?;
    let mut ids = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        ids.push(r[0].clone());
        values.push(parse_f64(path, i + 2, &r[1])?);
    }
    Ok((ids, values))
}

pub fn read_probs(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    read_keyed(path, "question_id", "prob")
}

pub fn read_alphas(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    read_keyed(path, "individual_id", "alpha")
}

pub fn write_scores(path: &Path, question_ids: &[String], scores: &ScoreVector) -> Result<()> {
    let orientation = scores.orientation.to_string();
    let rows = question_ids
        .iter()
        .zip(&scores.scores)
        .map(|(q, &s)| vec![q.clone(), format_f64(s), orientation.clone()]);
    write_atomic(
        path,
        &csv_bytes(&["question_id", "score", "orientation"], rows),
    )
}

pub fn read_scores(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    let text = read_to_string(path)?;
    let (header, rows) = read_records(path, &text)?;
    expect_header(path, &header, &["question_id", "score", "orientation"])?;
    let mut ids = Vec::with_capacity(rows.len());
    let mut scores = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        ids.push(r[0].clone());
        scores.push(parse_f64(path, i + 2, &r[1])?);
        r[2].parse::<Orientation>()
            .map_err(|_| parse_err(path, format!("line {}: bad orientation {:?}", i + 2, r[2])))?;
    }
    Ok((ids, scores))
}

/// Requires both id lists to be identical, in the same order.
pub fn check_alignment(left: &[String], right: &[String]) -> Result<()> {
    if left == right {
        return Ok(());
    }
    if left.len() != right.len() {
        return Err(CrowdError::Alignment(format!(
            "{} ids vs {} ids",
            left.len(),
            right.len()
        )));
    }
    let bad: Vec<String> = left
        .iter()
        .zip(right)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, (a, b))| format!("row {}: {a} vs {b}", i + 1))
        .collect();
    let shown = bad.iter().take(10).cloned().collect::<Vec<_>>().join(", ");
    let more = if bad.len() > 10 {
        format!(" and {} more", bad.len() - 10)
    } else {
        String::new()
    };
    Err(CrowdError::Alignment(format!("{shown}{more}")))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| io_err(path, e))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Serializes rows with their field names as the header; `None` becomes an
/// empty cell and floats keep full precision.
pub fn write_table<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(path, e))?;
    write_atomic(path, &bytes)
}
