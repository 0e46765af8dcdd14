//! CSV and JSON serialization of score reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{spearman, ScoreReport};
use crate::error::Result;

fn fixed(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.6}"),
        _ => "NA".to_string(),
    }
}

/// One row per report: summary scores, then the loss of each feature.
/// Reports must share feature names.
pub fn write_reports_csv<W: Write>(reports: &[ScoreReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["method_id", "cvl", "fom", "coph", "ari", "f1_gold"].map(String::from).to_vec();
    if let Some(first) = reports.first() {
        header.extend(first.feature_names.iter().map(|f| format!("loss_{f}")));
    }
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.method_id.clone(), fixed(Some(r.cvl)), fixed(r.fom), fixed(r.coph), fixed(r.ari), fixed(r.f1_gold)];
        row.extend(r.per_feature_loss.iter().map(|&l| fixed(l)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reports_json<W: Write>(reports: &[ScoreReport], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, reports).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Feature importance table, in input column order.
pub fn write_pfis_csv<W: Write>(feature_names: &[String], pfis: &[Option<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "pfis"])?;
    for (f, p) in feature_names.iter().zip(pfis) {
        w.write_record([f.clone(), fixed(*p)])?;
    }
    w.flush()?;
    Ok(())
}

/// Rank correlations of each score with the F1 gold standard over a grid
/// of recipes. COPH and ARI are negated so that, like CVL and FOM, lower
/// means better and a good score correlates negatively with F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub n_methods: usize,
    pub cvl_f1: Option<f64>,
    pub fom_f1: Option<f64>,
    pub neg_coph_f1: Option<f64>,
    pub neg_ari_f1: Option<f64>,
}

fn rank_corr(reports: &[ScoreReport], score: impl Fn(&ScoreReport) -> Option<f64>) -> Option<f64> {
    let (a, b): (Vec<f64>, Vec<f64>) =
        reports.iter().filter_map(|r| Some((score(r)?, r.f1_gold?))).unzip();
    if a.len() < 3 {
        return None;
    }
    match spearman(&a, &b) {
        Ok(rho) => Some(rho),
        Err(e) => {
            log::warn!("rank correlation not defined: {e}");
            None
        }
    }
}

pub fn benchmark_table(dataset: &str, reports: &[ScoreReport]) -> BenchmarkRow {
    BenchmarkRow {
        dataset: dataset.to_string(),
        n_methods: reports.len(),
        cvl_f1: rank_corr(reports, |r| Some(r.cvl)),
        fom_f1: rank_corr(reports, |r| r.fom),
        neg_coph_f1: rank_corr(reports, |r| r.coph.map(|c| -c)),
        neg_ari_f1: rank_corr(reports, |r| r.ari.map(|a| -a)),
    }
}

pub fn write_benchmark_csv<W: Write>(rows: &[BenchmarkRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "n_methods", "cvl", "fom", "neg_coph", "neg_ari"])?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.n_methods.to_string(),
            fixed(r.cvl_f1),
            fixed(r.fom_f1),
            fixed(r.neg_coph_f1),
            fixed(r.neg_ari_f1),
        ])?;
    }
    w.flush()?;
    Ok(())
}
