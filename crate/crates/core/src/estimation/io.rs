//! CSV readers and writers for estimation inputs.
//!
//! Row numbers in schema errors count file lines, so the header is row 1
//! and the first data record is row 2.

use std::io::{Read, Write};

use super::decomposition::{CellObservation, DesignCell};
use super::piecewise::Observation;
use crate::error::{Error, Result};

pub const OBSERVATION_COLUMNS: [&str; 4] = ["cooperated", "p_star", "cluster_id", "weight"];
pub const CELL_COLUMNS: [&str; 5] = ["cooperated", "corr_decrease", "ind_increase", "cluster_id", "weight"];

struct Table {
    reader: csv::Reader<Box<dyn Read>>,
    columns: Vec<Option<usize>>,
}

fn open<R: Read + 'static>(input: R, wanted: &[&str], optional: &[&str]) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(Box::new(input) as Box<dyn Read>);
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema {
            row: 1,
            column: String::new(),
            reason: e.to_string(),
        })?
        .clone();
    let mut columns = Vec::new();
    for name in wanted {
        let pos = headers.iter().position(|h| h == *name);
        if pos.is_none() && !optional.contains(name) {
            return Err(Error::Schema {
                row: 1,
                column: (*name).to_string(),
                reason: "missing column".into(),
            });
        }
        columns.push(pos);
    }
    Ok(Table { reader, columns })
}

fn schema(row: usize, column: &str, reason: impl Into<String>) -> Error {
    Error::Schema {
        row,
        column: column.to_string(),
        reason: reason.into(),
    }
}

fn parse_flag(text: &str, row: usize, column: &str) -> Result<bool> {
    match text {
        "1" | "true" | "TRUE" | "True" => Ok(true),
        "0" | "false" | "FALSE" | "False" => Ok(false),
        _ => Err(schema(row, column, format!("expected 0 or 1, got `{text}`"))),
    }
}

fn parse_real(text: &str, row: usize, column: &str) -> Result<f64> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| schema(row, column, format!("expected a number, got `{text}`")))
}

/// Iterates records, handing each one's fields (by wanted-column order) to
/// `f` together with its row number.
fn each_record(table: &mut Table, wanted: &[&str], mut f: impl FnMut(&[Option<&str>], usize) -> Result<()>) -> Result<()> {
    let mut record = csv::StringRecord::new();
    loop {
        let more = table.reader.read_record(&mut record).map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            schema(row, "", e.to_string())
        })?;
        if !more {
            return Ok(());
        }
        let row = record.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<Option<&str>> = table.columns.iter().map(|c| c.and_then(|i| record.get(i))).collect();
        for (name, field) in wanted.iter().zip(&fields) {
            if matches!(field, Some("")) && *name != "weight" {
                return Err(schema(row, name, "empty field"));
            }
        }
        f(&fields, row)?;
    }
}

fn weight(field: Option<&str>, row: usize) -> Result<f64> {
    match field {
        None | Some("") => Ok(1.0),
        Some(text) => {
            let w = parse_real(text, row, "weight")?;
            if w > 0.0 {
                Ok(w)
            } else {
                Err(schema(row, "weight", format!("must be positive, got {w}")))
            }
        }
    }
}

pub fn read_observations<R: Read + 'static>(input: R) -> Result<Vec<Observation>> {
    let mut table = open(input, &OBSERVATION_COLUMNS, &["weight"])?;
    let mut out = Vec::new();
    each_record(&mut table, &OBSERVATION_COLUMNS, |f, row| {
        let p_star = parse_real(f[1].unwrap_or(""), row, "p_star")?;
        if !(p_star > 0.0 && p_star <= 1.0) {
            return Err(schema(row, "p_star", format!("must lie in (0, 1], got {p_star}")));
        }
        out.push(Observation {
            cooperated: parse_flag(f[0].unwrap_or(""), row, "cooperated")?,
            p_star,
            cluster_id: f[2].unwrap_or("").to_string(),
            weight: weight(f[3], row)?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn read_cell_observations<R: Read + 'static>(input: R) -> Result<Vec<CellObservation>> {
    let mut table = open(input, &CELL_COLUMNS, &["weight"])?;
    let mut out = Vec::new();
    each_record(&mut table, &CELL_COLUMNS, |f, row| {
        out.push(CellObservation {
            cooperated: parse_flag(f[0].unwrap_or(""), row, "cooperated")?,
            cell: DesignCell::new(
                parse_flag(f[1].unwrap_or(""), row, "corr_decrease")?,
                parse_flag(f[2].unwrap_or(""), row, "ind_increase")?,
            ),
            cluster_id: f[3].unwrap_or("").to_string(),
            weight: weight(f[4], row)?,
        });
        Ok(())
    })?;
    Ok(out)
}

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

pub fn write_observations<W: Write>(out: W, data: &[Observation]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OBSERVATION_COLUMNS).map_err(csv_error)?;
    for o in data {
        w.write_record([
            if o.cooperated { "1" } else { "0" },
            &o.p_star.to_string(),
            &o.cluster_id,
            &o.weight.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_cell_observations<W: Write>(out: W, data: &[CellObservation]) -> std::io::Result<()> {
    let flag = |b: bool| if b { "1" } else { "0" };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CELL_COLUMNS).map_err(csv_error)?;
    for o in data {
        w.write_record([
            flag(o.cooperated),
            flag(o.cell.corr_decrease),
            flag(o.cell.ind_increase),
            &o.cluster_id,
            &o.weight.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}
