//! CSV outputs: training samples, confusion matrices and histograms.

use std::path::Path;

use specclass_core::evaluation::ConfusionMatrix;
use specclass_core::sampling::{TrainingEntry, TrainingSet};
use specclass_core::spectral_stats::Histogram;

use crate::error::{CliError, Result};
use crate::io::write_bytes;

fn finish(writer: csv::Writer<Vec<u8>>) -> Vec<u8> {
    writer.into_inner().expect("in-memory writer")
}

fn record(writer: &mut csv::Writer<Vec<u8>>, fields: Vec<String>) {
    writer.write_record(&fields).expect("in-memory writer");
}

/// `row,col,class_id,b0,…` with one line per entry.
pub fn samples_csv(set: &TrainingSet) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["row", "col", "class_id"].map(String::from).to_vec();
    header.extend((0..set.band_count).map(|b| format!("b{b}")));
    record(&mut w, header);
    for e in &set.entries {
        let mut fields = vec![e.row.to_string(), e.col.to_string(), e.class_id.to_string()];
        fields.extend(e.features.iter().map(|v| v.to_string()));
        record(&mut w, fields);
    }
    finish(w)
}

pub fn write_samples(set: &TrainingSet, path: &Path) -> Result<()> {
    write_bytes(path, &samples_csv(set))
}

pub fn read_samples(path: &Path, seed: u64) -> Result<TrainingSet> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| CliError::format(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    if headers.len() < 4
        || &headers[0] != "row"
        || &headers[1] != "col"
        || &headers[2] != "class_id"
    {
        return Err(CliError::format(
            path,
            "expected columns row,col,class_id,b0,…",
        ));
    }
    let bands = headers.len() - 3;
    let mut entries = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        let bad = |what: &str| CliError::format(path, format!("record {}: bad {what}", line + 1));
        let row = rec[0].trim().parse().map_err(|_| bad("row"))?;
        let col = rec[1].trim().parse().map_err(|_| bad("col"))?;
        let class_id = rec[2].trim().parse().map_err(|_| bad("class_id"))?;
        let features = (3..3 + bands)
            .map(|i| rec[i].trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| bad("feature value"))?;
        entries.push(TrainingEntry {
            row,
            col,
            class_id,
            features,
        });
    }
    TrainingSet::new(entries, seed, bands).map_err(|e| CliError::format(path, e.to_string()))
}

/// Rows are predicted classes (unclassified first), columns ground-truth classes.
pub fn confusion_csv(cm: &ConfusionMatrix) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::from("predicted\\truth")];
    header.extend(cm.class_ids().iter().map(|id| id.to_string()));
    record(&mut w, header);
    let c = cm.classes();
    for r in 0..=c {
        let label = if r == 0 { 0 } else { cm.class_ids()[r - 1] };
        let mut fields = vec![label.to_string()];
        fields.extend((0..c).map(|k| cm.cell(r, k).to_string()));
        record(&mut w, fields);
    }
    finish(w)
}

/// `bin_lo,bin_hi,count` per bin.
pub fn histogram_csv(h: &Histogram) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    record(
        &mut w,
        ["bin_lo", "bin_hi", "count"].map(String::from).to_vec(),
    );
    for (i, count) in h.counts.iter().enumerate() {
        record(
            &mut w,
            vec![
                h.bin_edges[i].to_string(),
                h.bin_edges[i + 1].to_string(),
                count.to_string(),
            ],
        );
    }
    finish(w)
}
