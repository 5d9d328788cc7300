//! Subcommand implementations.

use crate::{CliError, Command, FitFlags, OutputFormat, PlotKindArg};
use pubtrends_core::chart::{
    render_chart, BoxGroup, ChartData, ChartKind, ChartOptions, CiPoint, SeriesLine,
};
use pubtrends_core::io;
use pubtrends_core::panel::{Corpus, CtCorpus, Year};
use pubtrends_core::synth::{self, SyntheticSpec};
use pubtrends_core::table::{
    render_ct_table, render_diff_table, render_field_diff_table, render_fit_listing,
    render_fit_table, render_ranked, render_summary_table, render_title_table, TableDoc,
};
use pubtrends_core::{
    aggregate_total, diff_key_figures, drilldown, fit_all, fit_key_figures, histogram,
    per_year_key_figures, rank_by_slope, year_over_year, Bins, Drilldown, HcVariant, RankedFits,
    TrendFit,
};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

fn validate_level(level: f64) -> Result<(), CliError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError::Usage(format!(
            "--level must be strictly between 0 and 1, got {level}"
        )));
    }
    Ok(())
}

fn validate_positive(name: &str, value: usize) -> Result<(), CliError> {
    if value == 0 {
        return Err(CliError::Usage(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn open_input(path: &str) -> Result<Box<dyn Read>, CliError> {
    if path == "-" {
        Ok(Box::new(std::io::stdin()))
    } else {
        let file =
            File::open(path).map_err(|e| CliError::Data(format!("cannot open {path}: {e}")))?;
        Ok(Box::new(file))
    }
}

fn load_corpus(path: &str) -> Result<Corpus, CliError> {
    Ok(io::load_counts(open_input(path)?)?)
}

fn load_ct_corpus(path: &Path, parent: &Corpus) -> Result<CtCorpus, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    Ok(io::load_ct(file, parent)?)
}

fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn table_target(doc: &TableDoc, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => doc.to_text(),
        OutputFormat::Csv => doc.to_csv(),
        OutputFormat::Json => doc.to_json_string(),
    }
}

fn print_tables(docs: &[TableDoc], format: OutputFormat) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => {
            let values: Vec<serde_json::Value> = docs.iter().map(|d| d.to_json()).collect();
            let body = if values.len() == 1 {
                serde_json::to_string_pretty(&values[0])
            } else {
                serde_json::to_string_pretty(&values)
            }
            .expect("table json");
            emit(&body)?;
            emit("\n")
        }
        _ => {
            let parts: Vec<String> = docs.iter().map(|d| table_target(d, format)).collect();
            emit(&parts.join("\n"))
        }
    }
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Describe { input, format } => describe(&input, format),
        Command::Diffs {
            input,
            field,
            format,
        } => diffs(&input, field.as_deref(), format),
        Command::Fit {
            input,
            fit,
            multiplier,
            output,
            format,
        } => fit_cmd(&input, &fit, multiplier, output.as_deref(), format),
        Command::Rank { input, fit, format } => rank_cmd(&input, &fit, format),
        Command::Drilldown {
            input,
            ct,
            field,
            year,
            top,
            fit,
            format,
        } => drilldown_cmd(&input, &ct, &field, year, top, &fit, format),
        Command::Plot {
            kind,
            input,
            out,
            ct,
            field,
            year,
            top,
            bins,
            total,
            width,
            height,
            fit,
        } => plot_cmd(PlotArgs {
            kind,
            input,
            out,
            ct,
            field,
            year,
            top,
            bins,
            total,
            width,
            height,
            fit,
        }),
        Command::Simulate {
            fields,
            years,
            first_year,
            intercepts,
            slopes,
            noise,
            seed,
            out,
            coverage_trials,
            level,
            hc,
        } => simulate_cmd(SimArgs {
            fields,
            years,
            first_year,
            intercepts,
            slopes,
            noise,
            seed,
            out,
            coverage_trials,
            level,
            variant: hc.into(),
        }),
        Command::SampleTitles {
            titles,
            field,
            ct,
            year,
            k,
            seed,
            format,
        } => sample_titles_cmd(&titles, &field, &ct, year, k, seed, format),
        Command::Report {
            input,
            out,
            ct,
            field,
            year,
            top,
            charts,
            bins,
            fit,
        } => report_cmd(&input, &out, ct, field, year, top, charts, bins, &fit),
    }
}

fn describe(input: &str, format: OutputFormat) -> Result<(), CliError> {
    let corpus = load_corpus(input)?;
    let rows = per_year_key_figures(&corpus)?;
    print_tables(&[render_summary_table(&rows)], format)
}

fn diffs(input: &str, field: Option<&str>, format: OutputFormat) -> Result<(), CliError> {
    let corpus = load_corpus(input)?;
    let rows = diff_key_figures(&corpus)?;
    let mut docs = vec![render_diff_table(&rows)];
    if let Some(field_id) = field {
        let series = corpus
            .field(field_id)
            .ok_or_else(|| CliError::Data(format!("unknown field {field_id}")))?;
        let d = year_over_year(series)?;
        docs.push(render_field_diff_table(
            field_id,
            &series.years().collect::<Vec<_>>(),
            series.counts(),
            &d.diffs,
        ));
    }
    print_tables(&docs, format)
}

fn fits_json(fits: &[TrendFit]) -> serde_json::Value {
    let key_figures = fit_key_figures(fits).ok();
    serde_json::json!({
        "fits": fits,
        "intercept_slope_r": key_figures.as_ref().map(|kf| kf.intercept_slope_r),
        "key_figures": key_figures.as_ref().map(|kf| render_fit_table(kf).to_json()),
    })
}

fn fit_cmd(
    input: &str,
    flags: &FitFlags,
    multiplier: Option<f64>,
    output: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    validate_level(flags.level)?;
    let corpus = load_corpus(input)?;
    let fits = fit_all(&corpus, flags.baseline_year, flags.hc.into(), flags.level)?;

    if let Some(path) = output {
        let mut body = serde_json::to_string_pretty(&fits_json(&fits)).expect("fit json");
        body.push('\n');
        std::fs::write(path, body)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    }

    match format {
        OutputFormat::Json => {
            let mut body = serde_json::to_string_pretty(&fits_json(&fits)).expect("fit json");
            body.push('\n');
            emit(&body)
        }
        _ => {
            let mut docs = vec![render_fit_listing(&fits, multiplier)];
            let mut trailer = String::new();
            match fit_key_figures(&fits) {
                Ok(kf) => {
                    docs.push(render_fit_table(&kf));
                    trailer = format!(
                        "Intercept-slope correlation: r = {:.2}\n",
                        kf.intercept_slope_r
                    );
                }
                Err(_) => {
                    trailer.push_str("Key figures need at least two fields with varying fits.\n");
                }
            }
            print_tables(&docs, format)?;
            // Prose stays out of the machine-readable target.
            if format == OutputFormat::Text {
                emit("\n")?;
                emit(&trailer)?;
            }
            Ok(())
        }
    }
}

fn rank_cmd(input: &str, flags: &FitFlags, format: OutputFormat) -> Result<(), CliError> {
    validate_level(flags.level)?;
    let corpus = load_corpus(input)?;
    let fits = fit_all(&corpus, flags.baseline_year, flags.hc.into(), flags.level)?;
    let ranked = rank_by_slope(fits);
    print_tables(&[render_ranked(&ranked)], format)
}

fn drilldown_cmd(
    input: &str,
    ct_path: &Path,
    field: &str,
    year: Year,
    top: usize,
    flags: &FitFlags,
    format: OutputFormat,
) -> Result<(), CliError> {
    validate_level(flags.level)?;
    validate_positive("top", top)?;
    let corpus = load_corpus(input)?;
    let ct = load_ct_corpus(ct_path, &corpus)?;
    let d = drilldown(
        &ct,
        field,
        year,
        top,
        flags.baseline_year,
        flags.hc.into(),
        flags.level,
    )?;
    print_tables(&[render_ct_table(&d), render_ranked(&d.ranked)], format)
}

fn sample_titles_cmd(
    titles: &str,
    field: &str,
    ct: &str,
    year: Year,
    k: usize,
    seed: u64,
    format: OutputFormat,
) -> Result<(), CliError> {
    validate_positive("k", k)?;
    let rows = io::load_titles(open_input(titles)?)?;
    let filter = io::TitleFilter {
        field_id: field.to_string(),
        ct_name: ct.to_string(),
        year,
    };
    let sample = io::sample_titles(&rows, &filter, k, seed)?;
    print_tables(&[render_title_table(&sample)], format)
}

struct SimArgs {
    fields: usize,
    years: usize,
    first_year: Year,
    intercepts: String,
    slopes: String,
    noise: f64,
    seed: u64,
    out: PathBuf,
    coverage_trials: Option<usize>,
    level: f64,
    variant: HcVariant,
}

fn parse_range(name: &str, raw: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "--{name} expects `min,max`, got `{raw}`"
        )));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--{name}: `{}` is not a number", parts[0])))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--{name}: `{}` is not a number", parts[1])))?;
    Ok((lo, hi))
}

fn simulate_cmd(args: SimArgs) -> Result<(), CliError> {
    validate_level(args.level)?;
    let spec = SyntheticSpec {
        n_fields: args.fields,
        first_year: args.first_year,
        n_years: args.years,
        intercept_range: parse_range("intercepts", &args.intercepts)?,
        slope_range: parse_range("slopes", &args.slopes)?,
        noise_sd: args.noise,
        seed: args.seed,
    };
    let (corpus, _truth) = synth::generate(&spec)?;
    let file = File::create(&args.out)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", args.out.display())))?;
    io::write_counts(&corpus, file)?;

    if let Some(trials) = args.coverage_trials {
        let coverage = synth::coverage_experiment(&spec, trials, args.level, args.variant)?;
        emit(&format!("empirical coverage: {coverage:.4}\n"))?;
    }
    Ok(())
}

/// Spaghetti lines for a whole corpus, colored by broad section.
pub fn corpus_lines(corpus: &Corpus, include_total: bool) -> Vec<SeriesLine> {
    let mut lines: Vec<SeriesLine> = corpus
        .fields()
        .iter()
        .map(|f| SeriesLine {
            label: f.field_id().to_string(),
            color_key: f.broad_section().to_string(),
            xs: f.years().map(f64::from).collect(),
            ys: f.counts().iter().map(|&c| c as f64).collect(),
        })
        .collect();
    if include_total {
        let total = aggregate_total(corpus);
        lines.push(SeriesLine {
            label: "TOTAL".into(),
            color_key: "TOTAL".into(),
            xs: total.years().map(f64::from).collect(),
            ys: total.counts().iter().map(|&c| c as f64).collect(),
        });
    }
    lines
}

/// Spaghetti lines for a drill-down's top terms, in frequency order.
pub fn drill_lines(ct: &CtCorpus, d: &Drilldown) -> Vec<SeriesLine> {
    d.rows
        .iter()
        .filter_map(|row| {
            ct.terms_of(&d.field_id)
                .find(|t| t.ct_name() == row.ct_name)
                .map(|t| SeriesLine {
                    label: t.ct_name().to_string(),
                    color_key: t.ct_name().to_string(),
                    xs: t.years().map(f64::from).collect(),
                    ys: t.counts().iter().map(|&c| c as f64).collect(),
                })
        })
        .collect()
}

/// Ranked interval rows for a dot plot, colored by broad section when
/// the corpus knows the series.
pub fn ci_points(ranked: &RankedFits, corpus: Option<&Corpus>) -> Vec<CiPoint> {
    ranked
        .fits
        .iter()
        .map(|f| {
            let ci = f.ci_b1.expect("ranked fits carry intervals");
            let color_key = corpus
                .and_then(|c| c.field(&f.series_id))
                .map(|fs| fs.broad_section().to_string())
                .unwrap_or_else(|| f.series_id.clone());
            CiPoint {
                label: f.series_id.clone(),
                color_key,
                estimate: f.b1,
                lower: ci.lower,
                upper: ci.upper,
            }
        })
        .collect()
}

/// Per-year box groups of the cross-field count distribution.
pub fn year_boxes(corpus: &Corpus) -> Vec<BoxGroup> {
    corpus
        .years()
        .enumerate()
        .map(|(k, year)| BoxGroup {
            label: year.to_string(),
            values: corpus
                .fields()
                .iter()
                .map(|f| f.counts()[k] as f64)
                .collect(),
        })
        .collect()
}

/// Pooled (or single-year) differences for the histogram.
pub fn diff_values(corpus: &Corpus, year: Option<Year>) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    for f in corpus.fields() {
        let d = year_over_year(f)?;
        for (y, &v) in d.years().zip(&d.diffs) {
            if year.is_none() || year == Some(y) {
                values.push(v as f64);
            }
        }
    }
    Ok(values)
}

struct PlotArgs {
    kind: PlotKindArg,
    input: String,
    out: PathBuf,
    ct: Option<PathBuf>,
    field: Option<String>,
    year: Option<Year>,
    top: usize,
    bins: Option<usize>,
    total: bool,
    width: u32,
    height: u32,
    fit: FitFlags,
}

fn plot_cmd(args: PlotArgs) -> Result<(), CliError> {
    validate_level(args.fit.level)?;
    validate_positive("top", args.top)?;
    if let Some(b) = args.bins {
        validate_positive("bins", b)?;
    }
    let corpus = load_corpus(&args.input)?;
    let variant: HcVariant = args.fit.hc.into();

    // With --ct and --field, line and interval charts switch to the
    // drill-down's top terms.
    let drill = match (&args.ct, &args.field) {
        (Some(ct_path), Some(field)) => {
            let ct = load_ct_corpus(ct_path, &corpus)?;
            let year = args.year.unwrap_or_else(|| corpus.last_year());
            let d = drilldown(
                &ct,
                field,
                year,
                args.top,
                args.fit.baseline_year,
                variant,
                args.fit.level,
            )?;
            Some((ct, d))
        }
        (Some(_), None) => {
            return Err(CliError::Usage("--ct also needs --field".into()));
        }
        _ => None,
    };

    let (kind, data, title, x_label, y_label) = match args.kind {
        PlotKindArg::Spaghetti => {
            let lines = match &drill {
                Some((ct, d)) => drill_lines(ct, d),
                None => corpus_lines(&corpus, args.total),
            };
            (
                ChartKind::Spaghetti,
                ChartData::Spaghetti(lines),
                "Annual publications per series",
                "Publication year",
                "Publications",
            )
        }
        PlotKindArg::Hist => {
            let values = diff_values(&corpus, args.year)?;
            let bins = args.bins.map_or(Bins::Auto, Bins::Fixed);
            (
                ChartKind::Histogram,
                ChartData::Histogram(histogram(&values, bins)?),
                "Annual changes in publications",
                "Difference to previous year",
                "Fields",
            )
        }
        PlotKindArg::Box => (
            ChartKind::Box,
            ChartData::Box(year_boxes(&corpus)),
            "Publications per field by year",
            "Publication year",
            "Publications",
        ),
        PlotKindArg::Ci => {
            let points = match &drill {
                Some((_, d)) => ci_points(&d.ranked, None),
                None => {
                    let fits = fit_all(&corpus, args.fit.baseline_year, variant, args.fit.level)?;
                    ci_points(&rank_by_slope(fits), Some(&corpus))
                }
            };
            (
                ChartKind::CiDot,
                ChartData::CiDot(points),
                "Rates of change, ranked by slope",
                "Slope (publications per year)",
                "",
            )
        }
        PlotKindArg::Scatter => {
            let fits = match &drill {
                Some((_, d)) => d.fits.clone(),
                None => fit_all(&corpus, args.fit.baseline_year, variant, args.fit.level)?,
            };
            let points: Vec<(f64, f64)> = fits.iter().map(|f| (f.b0, f.b1)).collect();
            (
                ChartKind::Scatter,
                ChartData::Scatter(points),
                "Intercepts and slopes",
                "Intercept (baseline-year publications)",
                "Slope (publications per year)",
            )
        }
    };

    let opts = ChartOptions {
        width: args.width,
        height: args.height,
        title: title.to_string(),
        x_label: x_label.to_string(),
        y_label: y_label.to_string(),
    };
    let doc = render_chart(kind, &data, &opts)?;
    std::fs::write(&args.out, doc.svg)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn report_cmd(
    input: &str,
    out: &Path,
    ct: Option<PathBuf>,
    field: Option<String>,
    year: Option<Year>,
    top: usize,
    charts: Option<String>,
    bins: Option<usize>,
    flags: &FitFlags,
) -> Result<(), CliError> {
    validate_level(flags.level)?;
    validate_positive("top", top)?;
    if let Some(b) = bins {
        validate_positive("bins", b)?;
    }
    let chart_kinds = match charts {
        None => crate::report::DEFAULT_CHARTS.to_vec(),
        Some(raw) => {
            let mut kinds = Vec::new();
            for part in raw.split(',') {
                let kind = match part.trim() {
                    "spaghetti" => ChartKind::Spaghetti,
                    "hist" => ChartKind::Histogram,
                    "box" => ChartKind::Box,
                    "ci" => ChartKind::CiDot,
                    "scatter" => ChartKind::Scatter,
                    other => return Err(CliError::Usage(format!("unknown chart kind `{other}`"))),
                };
                if !kinds.contains(&kind) {
                    kinds.push(kind);
                }
            }
            kinds
        }
    };

    let corpus = load_corpus(input)?;
    let drill = match (ct, field) {
        (Some(ct_path), Some(field_id)) => {
            let ct_corpus = load_ct_corpus(&ct_path, &corpus)?;
            Some(crate::report::DrillRequest {
                ct: ct_corpus,
                field_id,
                year: year.unwrap_or_else(|| corpus.last_year()),
                top,
            })
        }
        (Some(_), None) => return Err(CliError::Usage("--ct also needs --field".into())),
        _ => None,
    };
    let opts = crate::report::ReportOptions {
        baseline: flags.baseline_year,
        variant: flags.hc.into(),
        level: flags.level,
        bins: bins.map_or(Bins::Auto, Bins::Fixed),
        charts: chart_kinds,
    };
    crate::report::pipeline_report(&corpus, drill.as_ref(), &opts, out)?;
    Ok(())
}
