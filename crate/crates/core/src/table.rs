//! Table documents with aligned-text, CSV, and JSON targets.
//!
//! Statistics render as 2-decimal fixed point, counts as integers. The
//! text target adds thousands separators for human readers; CSV and JSON
//! never do. JSON carries full-precision numbers so it parses back to
//! the values that produced it.

use crate::panel::{TitleRecord, Year};
use crate::regress::{Drilldown, FitKeyFigures, RankedFits, TrendFit};
use crate::stats::SummaryStats;
use serde_json::{json, Value};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    /// Calendar year: an integer that never takes thousands separators.
    Year(i64),
    Int(i64),
    Float(f64),
    Empty,
}

impl Cell {
    fn from_stat(v: f64) -> Cell {
        // Integral statistics (counts, diffs) print without decimals.
        if v.fract() == 0.0 && v.abs() < 9e15 {
            Cell::Int(v as i64)
        } else {
            Cell::Float(v)
        }
    }

    fn text_target(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Year(v) => v.to_string(),
            Cell::Int(v) => group_thousands(&v.to_string()),
            Cell::Float(v) => group_thousands(&format!("{v:.2}")),
            Cell::Empty => String::new(),
        }
    }

    fn csv_target(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Year(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.2}"),
            Cell::Empty => String::new(),
        }
    }

    fn json_target(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Year(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Empty => Value::Null,
        }
    }
}

/// Inserts thousands separators into a formatted decimal number.
fn group_thousands(s: &str) -> String {
    let (sign, rest) = s.strip_prefix('-').map_or(("", s), |r| ("-", r));
    let (int_part, frac_part) = match rest.find('.') {
        Some(i) => rest.split_at(i),
        None => (rest, ""),
    };
    let mut grouped = String::with_capacity(int_part.len() + int_part.len() / 3);
    for (i, c) in int_part.chars().enumerate() {
        if i > 0 && (int_part.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(c);
    }
    format!("{sign}{grouped}{frac_part}")
}

/// A titled rectangular table renderable as text, CSV, or JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct TableDoc {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl TableDoc {
    pub fn new(title: impl Into<String>, columns: Vec<&str>) -> Self {
        TableDoc {
            title: title.into(),
            columns: columns.into_iter().map(String::from).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "table must stay rectangular");
        self.rows.push(row);
    }

    /// Aligned human-readable text; numeric columns right-aligned.
    pub fn to_text(&self) -> String {
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::text_target).collect())
            .collect();
        let n = self.columns.len();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &rendered {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let numeric: Vec<bool> = (0..n)
            .map(|i| {
                let mut any = false;
                for row in &self.rows {
                    match &row[i] {
                        Cell::Text(_) => return false,
                        Cell::Empty => {}
                        _ => any = true,
                    }
                }
                any
            })
            .collect();

        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str(&self.title);
            out.push('\n');
        }
        let mut line = String::new();
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if numeric[i] {
                line.push_str(&pad_left(c, widths[i]));
            } else {
                line.push_str(&pad_right(c, widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
        for row in &rendered {
            let mut line = String::new();
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                if numeric[i] {
                    line.push_str(&pad_left(cell, widths[i]));
                } else {
                    line.push_str(&pad_right(cell, widths[i]));
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    /// Plain CSV: header plus rows, minimally quoted, no separators.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| csv_escape(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &self.rows {
            out.push_str(
                &row.iter()
                    .map(|c| csv_escape(&c.csv_target()))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            out.push('\n');
        }
        out
    }

    /// Full-precision JSON value.
    pub fn to_json(&self) -> Value {
        json!({
            "title": self.title,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| {
                r.iter().map(Cell::json_target).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("table json");
        s.push('\n');
        s
    }
}

fn pad_left(s: &str, width: usize) -> String {
    let len = s.chars().count();
    format!("{}{s}", " ".repeat(width.saturating_sub(len)))
}

fn pad_right(s: &str, width: usize) -> String {
    let len = s.chars().count();
    format!("{s}{}", " ".repeat(width.saturating_sub(len)))
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

const KEY_FIGURE_COLUMNS: [&str; 6] = ["Year", "Mean", "Median", "SD", "Min", "Max"];

fn key_figures_row(year: Year, s: &SummaryStats) -> Vec<Cell> {
    vec![
        Cell::Year(year as i64),
        Cell::Float(s.mean),
        Cell::Float(s.median),
        s.sd.map_or(Cell::Empty, Cell::Float),
        Cell::from_stat(s.min),
        Cell::from_stat(s.max),
    ]
}

/// Per-year key figures of the count distribution across fields.
pub fn render_summary_table(rows: &[(Year, SummaryStats)]) -> TableDoc {
    let mut doc = TableDoc::new(
        "Key figures for the number of publications by publication year",
        KEY_FIGURE_COLUMNS.to_vec(),
    );
    for (year, s) in rows {
        doc.push_row(key_figures_row(*year, s));
    }
    doc
}

/// Per-year key figures of the difference-to-previous-year distribution.
pub fn render_diff_table(rows: &[(Year, SummaryStats)]) -> TableDoc {
    let mut doc = TableDoc::new(
        "Key figures for the differences to the previous year",
        KEY_FIGURE_COLUMNS.to_vec(),
    );
    for (year, s) in rows {
        doc.push_row(key_figures_row(*year, s));
    }
    doc
}

/// One field's counts and differences, year by year.
pub fn render_field_diff_table(
    field_id: &str,
    years: &[Year],
    counts: &[u64],
    diffs: &[i64],
) -> TableDoc {
    let mut doc = TableDoc::new(
        format!("Publications for {field_id} with differences to the previous year"),
        vec!["Year", "Publications", "Difference"],
    );
    for (i, (&year, &count)) in years.iter().zip(counts).enumerate() {
        doc.push_row(vec![
            Cell::Year(year as i64),
            Cell::Int(count as i64),
            if i == 0 {
                Cell::Empty
            } else {
                Cell::Int(diffs[i - 1])
            },
        ]);
    }
    doc
}

/// Key figures of the fitted intercepts and slopes.
pub fn render_fit_table(kf: &FitKeyFigures) -> TableDoc {
    let mut doc = TableDoc::new(
        "Key figures for the intercepts and slopes",
        vec!["Variable", "N", "Mean", "SD", "Min", "Max"],
    );
    for (name, s) in [("Intercept", &kf.intercepts), ("Slope", &kf.slopes)] {
        doc.push_row(vec![
            Cell::Text(name.into()),
            Cell::Int(s.n as i64),
            Cell::Float(s.mean),
            s.sd.map_or(Cell::Empty, Cell::Float),
            Cell::Float(s.min),
            Cell::Float(s.max),
        ]);
    }
    doc
}

/// Per-field fit listing in the given order.
///
/// `multiplier` scales the slope into an expected total change; `None`
/// uses each fit's own year span.
pub fn render_fit_listing(fits: &[TrendFit], multiplier: Option<f64>) -> TableDoc {
    let mut doc = TableDoc::new(
        "Growth fits per field",
        vec![
            "Field",
            "Intercept",
            "Slope",
            "SE(slope)",
            "CI lower",
            "CI upper",
            "Projected change",
        ],
    );
    for f in fits {
        let (lo, hi) = f.ci_b1.map_or((Cell::Empty, Cell::Empty), |ci| {
            (Cell::Float(ci.lower), Cell::Float(ci.upper))
        });
        doc.push_row(vec![
            Cell::Text(f.series_id.clone()),
            Cell::Float(f.b0),
            Cell::Float(f.b1),
            f.se_b1().map_or(Cell::Empty, Cell::Float),
            lo,
            hi,
            Cell::Float(crate::regress::projected_change(f, multiplier)),
        ]);
    }
    doc
}

/// Ranked listing of slopes with confidence intervals.
pub fn render_ranked(ranked: &RankedFits) -> TableDoc {
    let mut doc = TableDoc::new(
        "Rates of change ranked from low to high",
        vec![
            "Rank",
            "Field",
            "Slope",
            "SE(slope)",
            "CI lower",
            "CI upper",
        ],
    );
    for (i, f) in ranked.fits.iter().enumerate() {
        let (lo, hi) = f.ci_b1.map_or((Cell::Empty, Cell::Empty), |ci| {
            (Cell::Float(ci.lower), Cell::Float(ci.upper))
        });
        doc.push_row(vec![
            Cell::Int(i as i64 + 1),
            Cell::Text(f.series_id.clone()),
            Cell::Float(f.b1),
            f.se_b1().map_or(Cell::Empty, Cell::Float),
            lo,
            hi,
        ]);
    }
    doc
}

/// Most frequent controlled terms with their share of the field total.
pub fn render_ct_table(d: &Drilldown) -> TableDoc {
    let mut doc = TableDoc::new(
        format!(
            "Most frequent controlled terms of {} for {}",
            d.field_id, d.focus_year
        ),
        vec![
            "Controlled term (CT)",
            "Number of publications",
            "In percent",
        ],
    );
    for row in &d.rows {
        doc.push_row(vec![
            Cell::Text(row.ct_name.clone()),
            Cell::Int(row.count as i64),
            Cell::Float(row.percent),
        ]);
    }
    doc.push_row(vec![
        Cell::Text("Total".into()),
        Cell::Int(d.parent_total as i64),
        Cell::Float(100.0),
    ]);
    doc
}

/// Numbered title listing.
pub fn render_title_table(rows: &[TitleRecord]) -> TableDoc {
    let mut doc = TableDoc::new("Randomly selected publications", vec!["No.", "Title"]);
    for (i, r) in rows.iter().enumerate() {
        doc.push_row(vec![Cell::Int(i as i64 + 1), Cell::Text(r.title.clone())]);
    }
    doc
}
