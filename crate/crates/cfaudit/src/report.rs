//! Report rendering: machine-readable CSV tables (one per metric kind) and
//! a human-readable markdown summary with best/worst markers per row.
//! Rendering is deterministic and purely presentational — every number
//! traces back to a score in the score document.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::counterfactual::RejectionStats;
use crate::gateway::PromptMode;
use crate::metrics::{AccuracyScore, DimensionScore, PromptingDelta, RobustnessBaseline};
use crate::taxonomy::DimensionName;

/// Identity of one audit run plus its accounting, emitted alongside scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub corpus_digest: String,
    pub dimensions: Vec<String>,
    pub models: Vec<String>,
    pub prompt_modes: Vec<String>,
    pub seed: u64,
    pub robustness_k: u32,
    pub created_at: String,
    pub parse_failures: u64,
    pub skipped_conditions: u64,
    pub record_store: Option<String>,
    pub baseline_store: Option<String>,
}

/// The score document cmd_score persists; rendering reads only this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDocument {
    pub manifest: RunManifest,
    pub dimension_scores: Vec<DimensionScore>,
    pub robustness: Vec<RobustnessBaseline>,
    pub accuracy: Vec<AccuracyScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<PromptingDelta>>,
    pub rejection_stats: RejectionStats,
}

/// Metric kinds with their table direction. All fairness metrics are
/// lower-is-better; accuracy is higher-is-better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Cfr,
    MasdConfidence,
    MasdPositive,
    MasdImprovement,
    Robustness,
    Accuracy,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Cfr,
        MetricKind::MasdConfidence,
        MetricKind::MasdPositive,
        MetricKind::MasdImprovement,
        MetricKind::Robustness,
        MetricKind::Accuracy,
    ];

    pub fn file_stem(&self) -> &'static str {
        match self {
            MetricKind::Cfr => "cfr",
            MetricKind::MasdConfidence => "masd_confidence",
            MetricKind::MasdPositive => "masd_positive",
            MetricKind::MasdImprovement => "masd_improvement",
            MetricKind::Robustness => "robustness",
            MetricKind::Accuracy => "accuracy",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            MetricKind::Cfr => "Counterfactual Flip Rate (percent, lower is better)",
            MetricKind::MasdConfidence => {
                "Confidence Score - Mean Absolute Score Difference (lower is better)"
            }
            MetricKind::MasdPositive => {
                "Positives Score - Mean Absolute Score Difference (lower is better)"
            }
            MetricKind::MasdImprovement => {
                "Improvement Score - Mean Absolute Score Difference (lower is better)"
            }
            MetricKind::Robustness => "Robustness Baseline (repeat noise floor)",
            MetricKind::Accuracy => "Answer Accuracy (percent, higher is better)",
        }
    }

    pub fn higher_is_better(&self) -> bool {
        matches!(self, MetricKind::Accuracy)
    }
}

pub const AVERAGE_LABEL: &str = "Average";

/// A rendered metric table: rows of dimensions (plus Average), columns of
/// models (plus Average). Average cells are the unweighted mean of the
/// defined cells in their row/column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub kind: MetricKind,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

impl ReportTable {
    /// Build a dimensions x models table for one fairness metric kind.
    pub fn from_dimension_scores(
        kind: MetricKind,
        scores: &[DimensionScore],
        dimensions: &[DimensionName],
        models: &[String],
    ) -> Self {
        let field = |s: &DimensionScore| match kind {
            MetricKind::Cfr => s.cfr_percent,
            MetricKind::MasdConfidence => s.masd_confidence,
            MetricKind::MasdPositive => s.masd_positive,
            MetricKind::MasdImprovement => s.masd_improvement,
            _ => None,
        };
        let mut lookup: BTreeMap<(String, String), Option<f64>> = BTreeMap::new();
        for score in scores {
            lookup.insert(
                (score.dimension.as_str().to_string(), score.model_id.clone()),
                field(score),
            );
        }
        let mut rows: Vec<String> = dimensions
            .iter()
            .map(|d| d.display_label().to_string())
            .collect();
        let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
        for dim in dimensions {
            let mut row: Vec<Option<f64>> = models
                .iter()
                .map(|m| {
                    lookup
                        .get(&(dim.as_str().to_string(), m.clone()))
                        .copied()
                        .flatten()
                })
                .collect();
            let defined: Vec<f64> = row.iter().flatten().copied().collect();
            row.push(mean(&defined));
            cells.push(row);
        }
        // Average row: per-column mean of defined dimension cells.
        let mut avg_row = Vec::new();
        for col in 0..=models.len() {
            let defined: Vec<f64> = cells.iter().filter_map(|r| r[col]).collect();
            avg_row.push(mean(&defined));
        }
        cells.push(avg_row);
        rows.push(AVERAGE_LABEL.to_string());

        let mut cols: Vec<String> = models.to_vec();
        cols.push(AVERAGE_LABEL.to_string());
        Self {
            kind,
            rows,
            cols,
            cells,
        }
    }

    /// Robustness table: one row per baseline statistic.
    pub fn from_robustness(baselines: &[RobustnessBaseline], models: &[String]) -> Self {
        let rows = vec![
            "Flip Rate".to_string(),
            "MASD Confidence".to_string(),
            "MASD Positives".to_string(),
            "MASD Improvement".to_string(),
        ];
        let by_model: BTreeMap<&str, &RobustnessBaseline> =
            baselines.iter().map(|b| (b.model_id.as_str(), b)).collect();
        let fields: [fn(&RobustnessBaseline) -> Option<f64>; 4] = [
            |b| b.flip_rate_percent,
            |b| b.masd_confidence,
            |b| b.masd_positive,
            |b| b.masd_improvement,
        ];
        let mut cells = Vec::new();
        for field in fields {
            let mut row: Vec<Option<f64>> = models
                .iter()
                .map(|m| by_model.get(m.as_str()).and_then(|b| field(b)))
                .collect();
            let defined: Vec<f64> = row.iter().flatten().copied().collect();
            row.push(mean(&defined));
            cells.push(row);
        }
        let mut cols = models.to_vec();
        cols.push(AVERAGE_LABEL.to_string());
        Self {
            kind: MetricKind::Robustness,
            rows,
            cols,
            cells,
        }
    }

    /// Accuracy table: a single row of per-model accuracy.
    pub fn from_accuracy(scores: &[AccuracyScore], models: &[String]) -> Self {
        let by_model: BTreeMap<&str, f64> = scores
            .iter()
            .map(|s| (s.model_id.as_str(), s.accuracy_percent))
            .collect();
        let mut row: Vec<Option<f64>> = models
            .iter()
            .map(|m| by_model.get(m.as_str()).copied())
            .collect();
        let defined: Vec<f64> = row.iter().flatten().copied().collect();
        row.push(mean(&defined));
        let mut cols = models.to_vec();
        cols.push(AVERAGE_LABEL.to_string());
        Self {
            kind: MetricKind::Accuracy,
            rows: vec!["Accuracy".to_string()],
            cols,
            cells: vec![row],
        }
    }
}

fn format_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.2}"),
        None => String::new(),
    }
}

/// CSV rendering: a header row of model ids, one data row per dimension,
/// two-decimal numbers, undefined cells as empty fields.
pub fn render_csv(table: &ReportTable) -> String {
    let mut out = String::new();
    out.push_str("dimension");
    for col in &table.cols {
        out.push(',');
        out.push_str(col);
    }
    out.push('\n');
    for (row_label, row) in table.rows.iter().zip(&table.cells) {
        out.push_str(row_label);
        for cell in row {
            out.push(',');
            out.push_str(&format_cell(*cell));
        }
        out.push('\n');
    }
    out
}

/// Marker selection over the model columns of one row (the Average column
/// is excluded). Ties on the formatted two-decimal value are all marked.
fn best_worst_markers(
    row: &[Option<f64>],
    model_cols: usize,
    higher_is_better: bool,
) -> (Vec<bool>, Vec<bool>) {
    let formatted: Vec<Option<String>> = row
        .iter()
        .take(model_cols)
        .map(|c| c.map(|v| format!("{v:.2}")))
        .collect();
    let mut defined: Vec<(usize, f64)> = Vec::new();
    for (idx, cell) in row.iter().take(model_cols).enumerate() {
        if let Some(v) = cell {
            defined.push((idx, *v));
        }
    }
    let mut best = vec![false; model_cols];
    let mut worst = vec![false; model_cols];
    if defined.len() < 2 {
        return (best, worst);
    }
    let (min_idx, _) = defined
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite scores"))
        .expect("non-empty");
    let (max_idx, _) = defined
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite scores"))
        .expect("non-empty");
    let (best_idx, worst_idx) = if higher_is_better {
        (max_idx, min_idx)
    } else {
        (min_idx, max_idx)
    };
    let best_repr = formatted[best_idx].clone();
    let worst_repr = formatted[worst_idx].clone();
    if best_repr == worst_repr {
        // Every defined cell formats identically; nothing to highlight.
        return (best, worst);
    }
    for (idx, repr) in formatted.iter().enumerate() {
        if repr.is_none() {
            continue;
        }
        if *repr == best_repr {
            best[idx] = true;
        } else if *repr == worst_repr {
            worst[idx] = true;
        }
    }
    (best, worst)
}

fn markdown_table(table: &ReportTable) -> String {
    let model_cols = table.cols.len().saturating_sub(1);
    let mut out = String::new();
    out.push_str("| dimension |");
    for col in &table.cols {
        out.push_str(&format!(" {col} |"));
    }
    out.push('\n');
    out.push_str("|---|");
    for _ in &table.cols {
        out.push_str("---|");
    }
    out.push('\n');
    for (row_label, row) in table.rows.iter().zip(&table.cells) {
        let (best, worst) = best_worst_markers(row, model_cols, table.kind.higher_is_better());
        out.push_str(&format!("| {row_label} |"));
        for (idx, cell) in row.iter().enumerate() {
            let text = match cell {
                None => "—".to_string(),
                Some(v) => {
                    let body = format!("{v:.2}");
                    if idx < model_cols && best[idx] {
                        format!("**{body}**")
                    } else if idx < model_cols && worst[idx] {
                        format!("~{body}~")
                    } else {
                        body
                    }
                }
            };
            out.push_str(&format!(" {text} |"));
        }
        out.push('\n');
    }
    out
}

/// Markdown summary: run header, averaging-rule note, one section per
/// metric kind, gaps, rejection rates, and the prompting-delta table when
/// both prompt modes were scored.
pub fn render_markdown(tables: &[ReportTable], doc: &ScoreDocument) -> String {
    let manifest = &doc.manifest;
    let mut out = String::new();
    out.push_str("# Fairness Audit Summary\n\n");
    out.push_str(&format!("- run id: {}\n", manifest.run_id));
    out.push_str(&format!("- corpus digest: {}\n", manifest.corpus_digest));
    out.push_str(&format!("- created at: {}\n", manifest.created_at));
    out.push_str(&format!("- models: {}\n", manifest.models.join(", ")));
    out.push_str(&format!("- dimensions: {}\n", manifest.dimensions.len()));
    out.push_str(&format!("- prompt modes: {}\n", manifest.prompt_modes.join(", ")));
    out.push_str(&format!("- seed: {}\n", manifest.seed));
    out.push_str(&format!("- robustness k: {}\n", manifest.robustness_k));
    out.push_str(&format!("- parse failures: {}\n", manifest.parse_failures));
    out.push_str(&format!(
        "- skipped conditions: {}\n",
        manifest.skipped_conditions
    ));
    out.push_str(
        "\nScores average uniformly over (transcript, question) instances; a pair enters a \
metric only when both of its conditions exist for the instance. Undefined cells render as \
an em dash. Markers: **best** and ~worst~ per row over the model columns; fairness metrics \
are lower-better, accuracy is higher-better.\n",
    );

    for table in tables {
        out.push_str(&format!("\n## {}\n\n", table.kind.title()));
        out.push_str(&markdown_table(table));
    }

    // Flag models that produced no defined cell for some metric.
    let mut gaps = Vec::new();
    for table in tables {
        let model_cols = table.cols.len().saturating_sub(1);
        for col in 0..model_cols {
            let any_defined = table.cells.iter().any(|row| row[col].is_some());
            if !any_defined {
                gaps.push(format!(
                    "- {} has no defined cells for {}",
                    table.cols[col],
                    table.kind.file_stem()
                ));
            }
        }
    }
    if !gaps.is_empty() {
        out.push_str("\n## Gaps\n\n");
        for gap in gaps {
            out.push_str(&gap);
            out.push('\n');
        }
    }

    out.push_str("\n## Rejection Rates\n\n");
    out.push_str("| dimension | generated | llm rejected | accepted | skipped | rejection rate % |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for (dim, counts) in &doc.rejection_stats.per_dimension {
        out.push_str(&format!(
            "| {dim} | {} | {} | {} | {} | {} |\n",
            counts.generated,
            counts.llm_rejected,
            counts.accepted,
            counts.skipped,
            counts
                .rejection_rate_percent()
                .map(|r| format!("{r:.2}"))
                .unwrap_or_else(|| "—".to_string()),
        ));
    }

    if let Some(deltas) = &doc.deltas {
        out.push_str("\n## Fairness Prompting Deltas (fairness - standard; negative = reduced disparity)\n\n");
        out.push_str("| model | Δ CFR | Δ Conf. MASD | Δ Pos. MASD | Δ Improv. MASD |\n");
        out.push_str("|---|---|---|---|---|\n");
        for delta in deltas {
            let fmt = |v: Option<f64>| {
                v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "—".to_string())
            };
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                delta.model_id,
                fmt(delta.delta_cfr),
                fmt(delta.delta_masd_confidence),
                fmt(delta.delta_masd_positive),
                fmt(delta.delta_masd_improvement),
            ));
        }
    }
    out
}

fn render_rejection_csv(stats: &RejectionStats) -> String {
    let mut out =
        String::from("dimension,generated,llm_rejected,accepted,skipped,rejection_rate_percent\n");
    for (dim, counts) in &stats.per_dimension {
        out.push_str(&format!(
            "{dim},{},{},{},{},{}\n",
            counts.generated,
            counts.llm_rejected,
            counts.accepted,
            counts.skipped,
            counts
                .rejection_rate_percent()
                .map(|r| format!("{r:.2}"))
                .unwrap_or_default(),
        ));
    }
    out
}

fn render_delta_csv(deltas: &[PromptingDelta]) -> String {
    let mut out = String::from(
        "model,delta_cfr,delta_masd_confidence,delta_masd_positive,delta_masd_improvement\n",
    );
    for delta in deltas {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            delta.model_id,
            fmt(delta.delta_cfr),
            fmt(delta.delta_masd_confidence),
            fmt(delta.delta_masd_positive),
            fmt(delta.delta_masd_improvement),
        ));
    }
    out
}

#[derive(Debug, thiserror::Error)]
#[error("report io on {path}: {source}")]
pub struct ReportError {
    pub path: String,
    #[source]
    pub source: std::io::Error,
}

fn write(path: &Path, content: &str) -> Result<(), ReportError> {
    std::fs::write(path, content).map_err(|source| ReportError {
        path: path.display().to_string(),
        source,
    })
}

/// Build the standard table set from a score document. Fairness tables use
/// the standard-prompt scores when present, otherwise whatever single mode
/// was run.
pub fn build_tables(doc: &ScoreDocument, dimensions: &[DimensionName]) -> Vec<ReportTable> {
    let modes: Vec<PromptMode> = {
        let mut seen = Vec::new();
        for s in &doc.dimension_scores {
            if !seen.contains(&s.prompt_mode) {
                seen.push(s.prompt_mode);
            }
        }
        seen
    };
    let table_mode = if modes.contains(&PromptMode::Standard) {
        PromptMode::Standard
    } else {
        modes.first().copied().unwrap_or(PromptMode::Standard)
    };
    let scores: Vec<DimensionScore> = doc
        .dimension_scores
        .iter()
        .filter(|s| s.prompt_mode == table_mode)
        .cloned()
        .collect();
    let models = &doc.manifest.models;
    let mut tables = vec![
        ReportTable::from_dimension_scores(MetricKind::Cfr, &scores, dimensions, models),
        ReportTable::from_dimension_scores(MetricKind::MasdConfidence, &scores, dimensions, models),
        ReportTable::from_dimension_scores(MetricKind::MasdPositive, &scores, dimensions, models),
        ReportTable::from_dimension_scores(
            MetricKind::MasdImprovement,
            &scores,
            dimensions,
            models,
        ),
        ReportTable::from_robustness(&doc.robustness, models),
    ];
    if !doc.accuracy.is_empty() {
        tables.push(ReportTable::from_accuracy(&doc.accuracy, models));
    }
    tables
}

/// Write the full report directory: manifest, per-metric CSVs, markdown
/// summary, rejection-stats CSV, and the delta CSV when present. Returns
/// the written paths.
pub fn export_run(
    doc: &ScoreDocument,
    dimensions: &[DimensionName],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();

    let manifest_path = out_dir.join("manifest.json");
    write(
        &manifest_path,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&doc.manifest).expect("manifest serializes")
        ),
    )?;
    written.push(manifest_path);

    let scores_path = out_dir.join("scores.json");
    write(
        &scores_path,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(doc).expect("score document serializes")
        ),
    )?;
    written.push(scores_path);

    let tables = build_tables(doc, dimensions);
    for table in &tables {
        let path = out_dir.join(format!("{}.csv", table.kind.file_stem()));
        write(&path, &render_csv(table))?;
        written.push(path);
    }

    let rejection_path = out_dir.join("rejection_stats.csv");
    write(&rejection_path, &render_rejection_csv(&doc.rejection_stats))?;
    written.push(rejection_path);

    if let Some(deltas) = &doc.deltas {
        let delta_path = out_dir.join("prompting_delta.csv");
        write(&delta_path, &render_delta_csv(deltas))?;
        written.push(delta_path);
    }

    let summary_path = out_dir.join("summary.md");
    write(&summary_path, &render_markdown(&tables, doc))?;
    written.push(summary_path);

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_by_one(value: f64) -> ReportTable {
        ReportTable {
            kind: MetricKind::Cfr,
            rows: vec![AVERAGE_LABEL.to_string()],
            cols: vec!["claude-4-sonnet".to_string()],
            cells: vec![vec![Some(value)]],
        }
    }

    #[test]
    fn csv_one_by_one_matches_fixture_value() {
        let csv = render_csv(&one_by_one(5.41));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "dimension,claude-4-sonnet");
        assert!(lines[1].ends_with("5.41"));
    }

    #[test]
    fn csv_undefined_cell_is_empty_field() {
        let table = ReportTable {
            kind: MetricKind::Cfr,
            rows: vec!["Agent Gender".to_string()],
            cols: vec!["m1".to_string(), "m2".to_string(), "m3".to_string()],
            cells: vec![vec![Some(1.0), None, Some(2.0)]],
        };
        let csv = render_csv(&table);
        assert!(csv.lines().nth(1).unwrap().contains("1.00,,2.00"));
    }

    fn sample_score(
        model: &str,
        dim: DimensionName,
        cfr: Option<f64>,
    ) -> crate::metrics::DimensionScore {
        crate::metrics::DimensionScore {
            dimension: dim,
            model_id: model.into(),
            prompt_mode: PromptMode::Standard,
            cfr_percent: cfr,
            masd_confidence: cfr.map(|v| v / 2.0),
            masd_positive: cfr.map(|v| v / 3.0),
            masd_improvement: cfr.map(|v| v / 4.0),
            n_effective: 5,
            pairs_counted: 5,
        }
    }

    #[test]
    fn average_cells_equal_recomputed_means() {
        let scores = vec![
            sample_score("m1", DimensionName::AgentGender, Some(4.0)),
            sample_score("m2", DimensionName::AgentGender, Some(6.0)),
            sample_score("m1", DimensionName::Politeness, Some(10.0)),
            sample_score("m2", DimensionName::Politeness, None),
        ];
        let dims = [DimensionName::AgentGender, DimensionName::Politeness];
        let models = vec!["m1".to_string(), "m2".to_string()];
        let table =
            ReportTable::from_dimension_scores(MetricKind::Cfr, &scores, &dims, &models);
        // Row averages.
        assert_eq!(table.cells[0][2], Some(5.0));
        assert_eq!(table.cells[1][2], Some(10.0));
        // Column averages (Average row), recomputed from emitted cells.
        let csv = render_csv(&table);
        let avg_line = csv.lines().last().unwrap();
        assert_eq!(avg_line, "Average,7.00,6.00,7.50");
    }

    #[test]
    fn markdown_marks_best_and_worst_per_row() {
        let table = ReportTable {
            kind: MetricKind::Cfr,
            rows: vec!["Agent Gender".to_string()],
            cols: vec![
                "m1".to_string(),
                "m2".to_string(),
                "m3".to_string(),
                AVERAGE_LABEL.to_string(),
            ],
            cells: vec![vec![Some(3.0), Some(7.0), Some(5.0), Some(5.0)]],
        };
        let md = markdown_table(&table);
        assert!(md.contains("**3.00**"));
        assert!(md.contains("~7.00~"));
        // The plain middle cell and Average stay unmarked.
        assert!(md.contains("| 5.00 | 5.00 |"));
    }

    #[test]
    fn accuracy_markers_are_inverted() {
        let table = ReportTable {
            kind: MetricKind::Accuracy,
            rows: vec!["Accuracy".to_string()],
            cols: vec!["m1".to_string(), "m2".to_string(), AVERAGE_LABEL.to_string()],
            cells: vec![vec![Some(90.0), Some(70.0), Some(80.0)]],
        };
        let md = markdown_table(&table);
        assert!(md.contains("**90.00**"));
        assert!(md.contains("~70.00~"));
    }

    #[test]
    fn ties_mark_all_tied_cells() {
        let table = ReportTable {
            kind: MetricKind::Cfr,
            rows: vec!["Agent Gender".to_string()],
            cols: vec![
                "m1".to_string(),
                "m2".to_string(),
                "m3".to_string(),
                AVERAGE_LABEL.to_string(),
            ],
            cells: vec![vec![Some(3.0), Some(3.0), Some(9.0), Some(5.0)]],
        };
        let md = markdown_table(&table);
        assert_eq!(md.matches("**3.00**").count(), 2);
        assert_eq!(md.matches("~9.00~").count(), 1);
    }

    #[test]
    fn rendering_is_deterministic() {
        let table = one_by_one(5.41);
        assert_eq!(render_csv(&table), render_csv(&table));
    }
}
