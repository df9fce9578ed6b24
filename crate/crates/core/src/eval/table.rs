use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;

/// One model's headline scores as fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScores {
    pub model: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ModelScores {
    /// Macro-averaged scores of a report.
    pub fn from_report(model: impl Into<String>, m: &MetricsReport) -> Self {
        Self {
            model: model.into(),
            accuracy: m.accuracy,
            precision: m.macro_precision,
            recall: m.macro_recall,
            f1: m.macro_f1,
        }
    }

    /// `"92.5% | 91.2% | 90.8% | 91.0%"`: the four scores as percentages
    /// with one decimal.
    pub fn cells(&self) -> String {
        [self.accuracy, self.precision, self.recall, self.f1]
            .iter()
            .map(|v| percent(*v))
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

pub fn percent(v: f64) -> String {
    format!("{:.1}%", v * 100.0)
}

/// Markdown table with columns Model, Accuracy, Precision, Recall, F1-Score.
pub fn render_metrics_table(rows: &[ModelScores]) -> String {
    let mut out = String::from("| Model | Accuracy | Precision | Recall | F1-Score |\n");
    out.push_str("|---|---|---|---|---|\n");
    for r in rows {
        writeln!(out, "| {} | {} |", r.model, r.cells()).unwrap();
    }
    out
}
