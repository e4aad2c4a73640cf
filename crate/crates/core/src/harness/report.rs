use std::path::Path;

use serde::{Deserialize, Serialize};

use super::score::SummaryFile;
use super::{read_to_string, HarnessError};
use crate::metrics::{round1, Profile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub geo: f64,
    pub temp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<f64>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSection {
    pub profile: Profile,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub sections: Vec<ReportSection>,
}

/// One table row. The total is the profile-weighted recombination of the
/// row's own rounded components, so a reader can recompute it from the
/// printed numbers.
pub fn report_row(label: &str, s: &SummaryFile) -> Result<ReportRow, HarnessError> {
    let w = s.profile.weights();
    let m = &s.summary.means;
    let event = match (s.profile.has_event(), m.event) {
        (true, Some(e)) => Some(e),
        (true, None) => {
            return Err(HarnessError::Input(format!(
                "summary '{label}' uses the {} profile but has no event mean",
                s.profile
            )))
        }
        (false, _) => None,
    };
    let total =
        round1(w.w_event * event.unwrap_or(0.0) + w.w_geo * m.geo + w.w_temporal * m.temporal);
    Ok(ReportRow {
        label: label.to_string(),
        geo: m.geo,
        temp: m.temporal,
        event,
        total,
    })
}

/// Builds one section per profile, in order of first appearance. Labels
/// default to each summary's own label.
pub fn cmd_report(summaries: &[(Option<String>, &Path)]) -> Result<Report, HarnessError> {
    if summaries.is_empty() {
        return Err(HarnessError::Input(
            "report needs at least one summary".into(),
        ));
    }
    let mut sections: Vec<ReportSection> = Vec::new();
    for (label, path) in summaries {
        let s: SummaryFile = serde_json::from_str(&read_to_string(path)?)
            .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
        let label = label.clone().unwrap_or_else(|| s.label.clone());
        let row = report_row(&label, &s)?;
        match sections.iter_mut().find(|sec| sec.profile == s.profile) {
            Some(sec) => sec.rows.push(row),
            None => sections.push(ReportSection {
                profile: s.profile,
                rows: vec![row],
            }),
        }
    }
    Ok(Report { sections })
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    for (i, sec) in report.sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let width = sec
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(0)
            .max(6);
        out.push_str(&format!("Evaluation Results (%) [{}]\n", sec.profile));
        let event = sec.profile.has_event();
        out.push_str(&format!(
            "{:<width$}  {:>6}  {:>6}",
            "Method", "Geo", "Temp"
        ));
        if event {
            out.push_str(&format!("  {:>6}", "Event"));
        }
        out.push_str(&format!("  {:>6}\n", "Total"));
        for r in &sec.rows {
            out.push_str(&format!(
                "{:<width$}  {:>6.1}  {:>6.1}",
                r.label, r.geo, r.temp
            ));
            if event {
                out.push_str(&format!("  {:>6.1}", r.event.unwrap_or(0.0)));
            }
            out.push_str(&format!("  {:>6.1}\n", r.total));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{ComponentMeans, RunSummary};
    use serde_json::json;

    fn summary(profile: Profile, event: Option<f64>, geo: f64, temporal: f64) -> SummaryFile {
        SummaryFile {
            label: "x".into(),
            profile,
            n_predictions: 1,
            n_scored: 1,
            excluded: vec![],
            summary: RunSummary {
                n_images: 1,
                means: ComponentMeans {
                    event,
                    geo,
                    temporal,
                    overall: 0.0,
                },
                warning_counts: Default::default(),
            },
            config: json!({}),
        }
    }

    #[test]
    fn rows_recombine() {
        let r = report_row("g", &summary(Profile::Tara, Some(70.3), 69.4, 38.1)).unwrap();
        assert_eq!(r.total, 60.4);
        let r = report_row("g", &summary(Profile::Wikitilo, None, 42.4, 34.0)).unwrap();
        assert_eq!((r.total, r.event), (38.2, None));
        assert!(report_row("g", &summary(Profile::Tara, None, 1.0, 1.0)).is_err());
    }

    #[test]
    fn text_columns_follow_profile() {
        let report = Report {
            sections: vec![
                ReportSection {
                    profile: Profile::Tara,
                    rows: vec![
                        report_row("a", &summary(Profile::Tara, Some(50.0), 50.0, 50.0)).unwrap(),
                    ],
                },
                ReportSection {
                    profile: Profile::Wikitilo,
                    rows: vec![
                        report_row("b", &summary(Profile::Wikitilo, None, 50.0, 50.0)).unwrap(),
                    ],
                },
            ],
        };
        let text = render_text(&report);
        let sections: Vec<&str> = text.split("\n\n").collect();
        assert_eq!(sections.len(), 2);
        assert!(sections[0].contains("Event"));
        assert!(!sections[1].contains("Event"));
        assert!(sections[0].trim_end().ends_with("  50.0"));
    }
}
