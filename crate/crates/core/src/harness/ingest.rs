use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_to_string, HarnessError};
use crate::schema::{parse_record, ImageRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    /// 1-based line number in the dataset file.
    pub line: usize,
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct DatasetLoad {
    pub records: Vec<ImageRecord>,
    /// Line number of each entry in `records`.
    pub record_lines: Vec<usize>,
    pub exclusions: Vec<Exclusion>,
    pub warnings: Vec<String>,
    /// Non-blank lines seen.
    pub total: usize,
}

/// Parses a dataset JSONL file. Malformed lines and duplicate ids are
/// excluded, not fatal.
pub fn load_dataset(path: &Path) -> Result<DatasetLoad, HarnessError> {
    let text = read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = DatasetLoad {
        records: Vec::new(),
        record_lines: Vec::new(),
        exclusions: Vec::new(),
        warnings: Vec::new(),
        total: 0,
    };
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.total += 1;
        match parse_record(line, base) {
            Ok(parsed) => {
                let id = parsed.record.id.clone();
                if !seen.insert(id.clone()) {
                    out.exclusions.push(Exclusion {
                        line: i + 1,
                        id: Some(id),
                        reason: "duplicate id".into(),
                    });
                    continue;
                }
                out.warnings
                    .extend(parsed.warnings.into_iter().map(|w| format!("{id}: {w}")));
                out.records.push(parsed.record);
                out.record_lines.push(i + 1);
            }
            Err(e) => out.exclusions.push(Exclusion {
                line: i + 1,
                id: None,
                reason: e.to_string(),
            }),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub total: usize,
    pub excluded: usize,
    pub utilized: usize,
    pub exclusions: Vec<Exclusion>,
    pub warnings: Vec<String>,
}

/// Validates every record: it must parse, its image must be readable, and
/// it must carry temporal or geospatial ground truth.
pub fn cmd_ingest(path: &Path) -> Result<IngestReport, HarnessError> {
    let load = load_dataset(path)?;
    if load.total == 0 {
        return Err(HarnessError::Input(format!(
            "{}: dataset is empty",
            path.display()
        )));
    }
    let mut exclusions = load.exclusions;
    let mut utilized = 0;
    for (rec, &line) in load.records.iter().zip(&load.record_lines) {
        let reason = if let Err(e) = rec.image.load() {
            Some(format!("unreadable image {}: {e}", rec.image.describe()))
        } else {
            match &rec.ground_truth {
                None => Some("no ground truth".to_string()),
                Some(gt) if gt.temporal.is_empty() && gt.geo.is_empty() => {
                    Some("no temporal or geospatial ground truth".to_string())
                }
                Some(_) => None,
            }
        };
        match reason {
            Some(reason) => exclusions.push(Exclusion {
                line,
                id: Some(rec.id.clone()),
                reason,
            }),
            None => utilized += 1,
        }
    }
    exclusions.sort_by_key(|e| e.line);
    let report = IngestReport {
        total: load.total,
        excluded: exclusions.len(),
        utilized,
        exclusions,
        warnings: load.warnings,
    };
    if report.utilized == 0 {
        return Err(HarnessError::Input(format!(
            "{}: no utilizable records ({} excluded)",
            path.display(),
            report.excluded
        )));
    }
    Ok(report)
}
