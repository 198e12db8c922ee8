//! Long-format sample CSV: header `inspection,label,x,y`, one row per unit,
//! consecutive rows sharing an inspection number form one inspection.

use std::io::Read;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::monitor::InspectionInput;

pub const SAMPLES_HEADER: &str = "inspection,label,x,y";

#[derive(Debug, Deserialize)]
struct Row {
    inspection: u32,
    label: String,
    x: f64,
    y: f64,
}

/// Groups rows into inspections. Inspection numbers must start at 1 and
/// increase by one; the label is taken from the first row of each group.
pub fn parse_samples<R: Read>(input: R) -> Result<Vec<InspectionInput>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != SAMPLES_HEADER {
        return Err(Error::InvalidSample(format!(
            "expected header `{SAMPLES_HEADER}`, got `{header}`"
        )));
    }
    let mut groups: Vec<InspectionInput> = Vec::new();
    let mut current = 0;
    for row in reader.deserialize::<Row>() {
        let row = row?;
        if row.inspection != current {
            if row.inspection != current + 1 {
                return Err(Error::InvalidSample(format!(
                    "inspection {} follows {current}; numbers must be consecutive from 1",
                    row.inspection
                )));
            }
            current = row.inspection;
            let mut group = InspectionInput::new(Vec::new(), Vec::new());
            if !row.label.is_empty() {
                group.label = Some(row.label.clone());
            }
            groups.push(group);
        }
        let group = groups.last_mut().expect("group pushed above");
        group.x_values.push(row.x);
        group.y_values.push(row.y);
    }
    if groups.is_empty() {
        return Err(Error::InvalidSample("no sample rows".into()));
    }
    Ok(groups)
}
