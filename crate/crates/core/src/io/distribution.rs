use serde::{Deserialize, Serialize};

use super::IoError;
use crate::aggregation::{Band, DistributionSpec};

const HEADER: [&str; 5] = ["band_label", "ls_low", "ls_high", "proportion", "representative_ls"];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    band_label: String,
    ls_low: u8,
    ls_high: u8,
    proportion: f64,
    #[serde(default)]
    representative_ls: Option<f64>,
}

/// Parses a comma-separated distribution file. A blank or missing
/// `representative_ls` falls back to the band midpoint.
pub fn parse_distribution(text: &str) -> Result<DistributionSpec, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    for required in &HEADER[..4] {
        if !headers.iter().any(|h| h == *required) {
            return Err(IoError::Malformed {
                line: 1,
                message: format!("missing column {required}"),
            });
        }
    }
    let mut bands = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row?;
        bands.push(Band {
            representative_ls: row
                .representative_ls
                .unwrap_or_else(|| Band::midpoint(row.ls_low, row.ls_high)),
            label: row.band_label,
            ls_low: row.ls_low,
            ls_high: row.ls_high,
            proportion: row.proportion,
        });
    }
    let spec = DistributionSpec { bands };
    spec.validate()?;
    Ok(spec)
}

/// Emits the file with every column present; floats use the shortest
/// representation that parses back to the same value.
pub fn emit_distribution(spec: &DistributionSpec) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for b in &spec.bands {
        w.write_record([
            b.label.clone(),
            b.ls_low.to_string(),
            b.ls_high.to_string(),
            b.proportion.to_string(),
            b.representative_ls.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
