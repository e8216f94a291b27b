//! Pinned reference values: CSV rows of `case_id,quantity,value,provenance_command`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DrsError, Result};

pub const GOLDEN_HEADER: [&str; 4] = ["case_id", "quantity", "value", "provenance_command"];

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRecord {
    pub case_id: String,
    pub quantity: String,
    pub value: f64,
    /// Command that regenerates the value.
    pub provenance_command: String,
}

#[derive(Serialize, Deserialize)]
struct Row {
    case_id: String,
    quantity: String,
    value: String,
    provenance_command: String,
}

/// Scientific notation with 15 significant digits.
pub fn format_value(value: f64) -> String {
    format!("{value:.14e}")
}

pub fn write_records<W: Write>(writer: W, records: &[GoldenRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for r in records {
        out.serialize(Row {
            case_id: r.case_id.clone(),
            quantity: r.quantity.clone(),
            value: format_value(r.value),
            provenance_command: r.provenance_command.clone(),
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<GoldenRecord>> {
    let mut input = csv::Reader::from_reader(reader);
    let header: Vec<String> = input.headers()?.iter().map(str::to_string).collect();
    if header != GOLDEN_HEADER {
        return Err(DrsError::InvalidArgument(format!("unexpected golden header {header:?}")));
    }
    input
        .deserialize::<Row>()
        .map(|row| {
            let row = row?;
            let value = row.value.parse().map_err(|_| {
                DrsError::InvalidArgument(format!("bad value `{}` in case {}", row.value, row.case_id))
            })?;
            Ok(GoldenRecord {
                case_id: row.case_id,
                quantity: row.quantity,
                value,
                provenance_command: row.provenance_command,
            })
        })
        .collect()
}

pub fn read_file(path: &Path) -> Result<Vec<GoldenRecord>> {
    read_records(std::fs::File::open(path)?)
}

pub fn write_file(path: &Path, records: &[GoldenRecord]) -> Result<()> {
    write_records(std::fs::File::create(path)?, records)
}
