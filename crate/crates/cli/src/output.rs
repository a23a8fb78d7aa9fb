//! CSV tables derived from a game record. Each file opens with a
//! `#aca-<table> v<version> manifest=<file>` line ahead of the column header.

use aca_core::game::GameRecord;
use anyhow::Result;
use serde::{Deserialize, Serialize};

pub const CURVES_FILE: &str = "curves.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRADEOFF_FILE: &str = "tradeoff.csv";
pub const RECORD_FILE: &str = "game_record.json";
pub const NODES_FILE: &str = "nodes.csv";

pub const CURVES_COLUMNS: [&str; 7] = [
    "dataset",
    "detector",
    "attack",
    "target",
    "prefix_size",
    "rank",
    "t_comm",
];
pub const SUMMARY_COLUMNS: [&str; 9] = [
    "dataset",
    "detector",
    "attack",
    "targets",
    "mean_rank",
    "std_error",
    "baseline_mean_rank",
    "times_chosen",
    "defender_position",
];
pub const TRADEOFF_COLUMNS: [&str; 6] = [
    "dataset",
    "p_attack",
    "p_exact",
    "detector",
    "expected_rank",
    "chosen",
];

/// Label of the summary rows holding each detector's best response.
pub const BEST_RESPONSE: &str = "best";

/// The persisted record together with the manifest that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecordFile {
    pub format: String,
    pub manifest: String,
    pub record: GameRecord,
}

pub const RECORD_FORMAT: &str = "aca-game-record v1";

fn table(kind: &str, manifest: &str, columns: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut out = format!("#aca-{kind} v1 manifest={manifest}\n").into_bytes();
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    drop(w);
    Ok(out)
}

pub fn curves_csv(record: &GameRecord, manifest: &str) -> Result<Vec<u8>> {
    let rows = record
        .curve_rows()
        .into_iter()
        .map(|r| {
            vec![
                r.dataset,
                r.detector,
                r.attack,
                r.target.to_string(),
                r.prefix_size.to_string(),
                r.rank.to_string(),
                r.t_comm.to_string(),
            ]
        })
        .collect();
    table("curves", manifest, &CURVES_COLUMNS, rows)
}

fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Detector indices ordered by rank sum, earliest first on ties; the
/// position of each detector in that order, starting at 1.
fn defender_positions(record: &GameRecord) -> Vec<usize> {
    let mut order: Vec<usize> = (0..record.detectors.len()).collect();
    order.sort_by_key(|&d| (record.detectors[d].rank_sum, d));
    let mut pos = vec![0; order.len()];
    for (i, &d) in order.iter().enumerate() {
        pos[d] = i + 1;
    }
    pos
}

/// Per detector: one row per strategy with the mean of its best rank over
/// targets, then a best-response row over all strategies.
pub fn summary_csv(record: &GameRecord, manifest: &str) -> Result<Vec<u8>> {
    let positions = defender_positions(record);
    let mut rows = Vec::new();
    for (di, d) in record.detectors.iter().enumerate() {
        let name = d.detector.kind().name().to_string();
        let baselines: Vec<f64> = d.targets.iter().map(|t| t.baseline.rank as f64).collect();
        let (baseline_mean, _) = mean_and_error(&baselines);
        for &s in &record.config.strategies {
            let ranks: Vec<f64> = d
                .targets
                .iter()
                .filter_map(|t| t.outcomes.iter().find(|o| o.strategy == s)?.best())
                .map(|p| p.rank as f64)
                .collect();
            let (mean, se) = mean_and_error(&ranks);
            let chosen = d.targets.iter().filter(|t| t.chosen == Some(s)).count();
            rows.push(vec![
                record.dataset.clone(),
                name.clone(),
                s.name().to_string(),
                ranks.len().to_string(),
                mean.to_string(),
                se.to_string(),
                baseline_mean.to_string(),
                chosen.to_string(),
                positions[di].to_string(),
            ]);
        }
        rows.push(vec![
            record.dataset.clone(),
            name,
            BEST_RESPONSE.to_string(),
            d.targets.len().to_string(),
            d.mean_rank.to_string(),
            d.std_error.to_string(),
            baseline_mean.to_string(),
            usize::from(di == record.chosen_detector).to_string(),
            positions[di].to_string(),
        ]);
    }
    table("summary", manifest, &SUMMARY_COLUMNS, rows)
}

/// Expected rank of every detector at each attack probability of the grid.
pub fn tradeoff_csv(record: &GameRecord, manifest: &str) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for point in &record.mixed {
        for (di, (d, objective)) in record.detectors.iter().zip(&point.objectives).enumerate() {
            rows.push(vec![
                record.dataset.clone(),
                point.probability.to_f64().to_string(),
                point.probability.to_string(),
                d.detector.kind().name().to_string(),
                objective.to_f64().to_string(),
                usize::from(di == point.chosen).to_string(),
            ]);
        }
    }
    table("tradeoff", manifest, &TRADEOFF_COLUMNS, rows)
}

pub fn nodes_csv(names: &[String]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["node", "name"])?;
    for (v, name) in names.iter().enumerate() {
        w.write_record([v.to_string().as_str(), name])?;
    }
    w.flush()?;
    drop(w);
    Ok(out)
}
