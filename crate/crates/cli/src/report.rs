//! Bundled report: every table in all three targets plus the requested
//! charts, written into one directory with a hash manifest.
//!
//! Artifacts are rendered fully in memory before anything touches the
//! filesystem; a failed write removes whatever was created so no partial
//! directory survives. Two runs over identical inputs produce identical
//! bytes, so the manifest doubles as a golden-file fingerprint.

use crate::commands::{ci_points, corpus_lines, diff_values, drill_lines, year_boxes};
use crate::CliError;
use pubtrends_core::chart::{render_chart, ChartData, ChartKind, ChartOptions};
use pubtrends_core::panel::{Corpus, CtCorpus, Year};
use pubtrends_core::table::{
    render_ct_table, render_diff_table, render_fit_listing, render_fit_table, render_ranked,
    render_summary_table, TableDoc,
};
use pubtrends_core::{
    diff_key_figures, fit_all, fit_key_figures, histogram, per_year_key_figures, rank_by_slope,
    Bins, HcVariant, TrendFit,
};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::path::Path;

pub const DEFAULT_CHARTS: [ChartKind; 5] = [
    ChartKind::Spaghetti,
    ChartKind::Histogram,
    ChartKind::Box,
    ChartKind::CiDot,
    ChartKind::Scatter,
];

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub baseline: Option<Year>,
    pub variant: HcVariant,
    pub level: f64,
    pub bins: Bins,
    pub charts: Vec<ChartKind>,
}

/// Drill-down section of a report.
#[derive(Debug, Clone)]
pub struct DrillRequest {
    pub ct: CtCorpus,
    pub field_id: String,
    pub year: Year,
    pub top: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub artifacts: Vec<ManifestEntry>,
}

fn push_table(artifacts: &mut Vec<(String, Vec<u8>)>, stem: &str, docs: &[TableDoc]) {
    let text: String = docs
        .iter()
        .map(|d| d.to_text())
        .collect::<Vec<_>>()
        .join("\n");
    let csv: String = docs
        .iter()
        .map(|d| d.to_csv())
        .collect::<Vec<_>>()
        .join("\n");
    let json_value = if docs.len() == 1 {
        docs[0].to_json()
    } else {
        json!(docs.iter().map(|d| d.to_json()).collect::<Vec<_>>())
    };
    let mut json_text = serde_json::to_string_pretty(&json_value).expect("table json");
    json_text.push('\n');
    artifacts.push((format!("{stem}.txt"), text.into_bytes()));
    artifacts.push((format!("{stem}.csv"), csv.into_bytes()));
    artifacts.push((format!("{stem}.json"), json_text.into_bytes()));
}

fn chart_options(title: &str, x_label: &str, y_label: &str) -> ChartOptions {
    ChartOptions {
        title: title.to_string(),
        x_label: x_label.to_string(),
        y_label: y_label.to_string(),
        ..ChartOptions::default()
    }
}

/// Builds and writes the report; returns the manifest.
pub fn pipeline_report(
    corpus: &Corpus,
    drill: Option<&DrillRequest>,
    opts: &ReportOptions,
    out_dir: &Path,
) -> Result<Manifest, CliError> {
    let mut artifacts: Vec<(String, Vec<u8>)> = Vec::new();

    let summary = per_year_key_figures(corpus)?;
    push_table(&mut artifacts, "summary", &[render_summary_table(&summary)]);

    let diff_rows = diff_key_figures(corpus)?;
    push_table(&mut artifacts, "diffs", &[render_diff_table(&diff_rows)]);

    // Fits need at least three years; shorter panels simply skip the
    // fit, rank, and fit-based chart artifacts.
    let fits: Option<Vec<TrendFit>> = if corpus.n_years() >= 3 {
        Some(fit_all(corpus, opts.baseline, opts.variant, opts.level)?)
    } else {
        None
    };
    if let Some(fits) = &fits {
        let mut docs = vec![render_fit_listing(fits, None)];
        if let Ok(kf) = fit_key_figures(fits) {
            docs.push(render_fit_table(&kf));
        }
        push_table(&mut artifacts, "fits", &docs);
        let ranked = rank_by_slope(fits.clone());
        push_table(&mut artifacts, "rank", &[render_ranked(&ranked)]);
    }

    if let Some(req) = drill {
        let d = pubtrends_core::drilldown(
            &req.ct,
            &req.field_id,
            req.year,
            req.top,
            opts.baseline,
            opts.variant,
            opts.level,
        )?;
        push_table(
            &mut artifacts,
            "drilldown",
            &[render_ct_table(&d), render_ranked(&d.ranked)],
        );
        if opts.charts.contains(&ChartKind::Spaghetti) {
            let lines = drill_lines(&req.ct, &d);
            if !lines.is_empty() {
                let doc = render_chart(
                    ChartKind::Spaghetti,
                    &ChartData::Spaghetti(lines),
                    &chart_options(
                        &format!("Top terms of {}", req.field_id),
                        "Publication year",
                        "Publications",
                    ),
                )?;
                artifacts.push(("drilldown_spaghetti.svg".into(), doc.svg.into_bytes()));
            }
        }
        if opts.charts.contains(&ChartKind::CiDot) {
            let doc = render_chart(
                ChartKind::CiDot,
                &ChartData::CiDot(ci_points(&d.ranked, None)),
                &chart_options(
                    &format!("Term rates of change in {}", req.field_id),
                    "Slope (publications per year)",
                    "",
                ),
            )?;
            artifacts.push(("drilldown_ci.svg".into(), doc.svg.into_bytes()));
        }
    }

    for kind in &opts.charts {
        match kind {
            ChartKind::Spaghetti => {
                let doc = render_chart(
                    ChartKind::Spaghetti,
                    &ChartData::Spaghetti(corpus_lines(corpus, true)),
                    &chart_options(
                        "Annual publications per field",
                        "Publication year",
                        "Publications",
                    ),
                )?;
                artifacts.push(("spaghetti.svg".into(), doc.svg.into_bytes()));
            }
            ChartKind::Histogram => {
                let values = diff_values(corpus, None)?;
                let doc = render_chart(
                    ChartKind::Histogram,
                    &ChartData::Histogram(histogram(&values, opts.bins)?),
                    &chart_options(
                        "Annual changes in publications",
                        "Difference to previous year",
                        "Count",
                    ),
                )?;
                artifacts.push(("hist.svg".into(), doc.svg.into_bytes()));
            }
            ChartKind::Box => {
                // Box statistics need four fields per year group.
                if corpus.n_fields() >= 4 {
                    let doc = render_chart(
                        ChartKind::Box,
                        &ChartData::Box(year_boxes(corpus)),
                        &chart_options(
                            "Publications per field by year",
                            "Publication year",
                            "Publications",
                        ),
                    )?;
                    artifacts.push(("box.svg".into(), doc.svg.into_bytes()));
                }
            }
            ChartKind::CiDot => {
                if let Some(fits) = &fits {
                    let ranked = rank_by_slope(fits.clone());
                    let doc = render_chart(
                        ChartKind::CiDot,
                        &ChartData::CiDot(ci_points(&ranked, Some(corpus))),
                        &chart_options(
                            "Rates of change, ranked by slope",
                            "Slope (publications per year)",
                            "",
                        ),
                    )?;
                    artifacts.push(("ci.svg".into(), doc.svg.into_bytes()));
                }
            }
            ChartKind::Scatter => {
                if let Some(fits) = &fits {
                    let points: Vec<(f64, f64)> = fits.iter().map(|f| (f.b0, f.b1)).collect();
                    let doc = render_chart(
                        ChartKind::Scatter,
                        &ChartData::Scatter(points),
                        &chart_options(
                            "Intercepts and slopes",
                            "Intercept (baseline-year publications)",
                            "Slope (publications per year)",
                        ),
                    )?;
                    artifacts.push(("scatter.svg".into(), doc.svg.into_bytes()));
                }
            }
        }
    }

    artifacts.sort_by(|a, b| a.0.cmp(&b.0));
    let entries: Vec<ManifestEntry> = artifacts
        .iter()
        .map(|(name, bytes)| ManifestEntry {
            name: name.clone(),
            bytes: bytes.len(),
            sha256: hex_digest(bytes),
        })
        .collect();
    let manifest_json = json!({
        "artifacts": entries.iter().map(|e| json!({
            "name": e.name,
            "bytes": e.bytes,
            "sha256": e.sha256,
        })).collect::<Vec<_>>(),
    });
    let mut manifest_text = serde_json::to_string_pretty(&manifest_json).expect("manifest json");
    manifest_text.push('\n');
    artifacts.push(("manifest.json".into(), manifest_text.into_bytes()));

    write_all(out_dir, &artifacts)?;
    Ok(Manifest { artifacts: entries })
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn write_all(out_dir: &Path, artifacts: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    let created_dir = !out_dir.exists();
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut written: Vec<std::path::PathBuf> = Vec::new();
    for (name, bytes) in artifacts {
        let path = out_dir.join(name);
        if let Err(e) = std::fs::write(&path, bytes) {
            for w in &written {
                let _ = std::fs::remove_file(w);
            }
            if created_dir {
                let _ = std::fs::remove_dir_all(out_dir);
            }
            return Err(CliError::Data(format!(
                "cannot write {}: {e}",
                path.display()
            )));
        }
        written.push(path);
    }
    Ok(())
}
