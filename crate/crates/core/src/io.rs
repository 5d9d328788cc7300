//! On-disk CSV formats for count panels, controlled-term panels, and
//! title records, plus seeded title sampling.
//!
//! Three file kinds, each with a fixed header:
//!
//! * counts:  `field_id,field_name,broad_section,year,count`
//! * terms:   `field_id,ct_name,year,count`
//! * titles:  `field_id,year,ct_name,title`
//!
//! Files are UTF-8, comma-separated, LF-terminated, minimally quoted.
//! Writers emit canonical order (ids ascending, years ascending) so
//! load-write round trips are bit-exact. Errors report the 1-based line
//! of the offending row.

use crate::panel::{
    build_corpus, Corpus, CtCorpus, CtSeries, FieldSeries, PanelError, TitleRecord, Year,
};
use crate::rng::SplitMix64;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use thiserror::Error;

pub const COUNTS_HEADER: [&str; 5] = ["field_id", "field_name", "broad_section", "year", "count"];
pub const CT_HEADER: [&str; 4] = ["field_id", "ct_name", "year", "count"];
pub const TITLES_HEADER: [&str; 4] = ["field_id", "year", "ct_name", "title"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("expected header `{expected}`, found `{found}`")]
    WrongHeader { expected: String, found: String },
    #[error("line {line}: duplicate cell for field {field_id}, year {year}")]
    DuplicateCell {
        field_id: String,
        year: Year,
        line: u64,
    },
    #[error("line {line}: negative count {value}")]
    NegativeCount { value: i64, line: u64 },
    #[error("line {line}: year {value} is not a 4-digit calendar year")]
    BadYear { value: String, line: u64 },
    #[error("line {line}: field {field_id} has conflicting name or section")]
    ConflictingFieldMetadata { field_id: String, line: u64 },
    #[error("line {line}: field {field_id} is missing year {missing_year}")]
    NonContiguousYears {
        field_id: String,
        missing_year: Year,
        line: u64,
    },
    #[error("line {line}: unknown parent field {field_id}")]
    UnknownParentField { field_id: String, line: u64 },
    #[error("line {line}: count {count} exceeds the field total {parent_count} for {year}")]
    CountExceedsParentTotal {
        count: u64,
        parent_count: u64,
        year: Year,
        line: u64,
    },
    #[error("line {line}: field {field_id} covers {found_first}-{found_last} but the panel covers {expected_first}-{expected_last}")]
    MismatchedYearRange {
        field_id: String,
        expected_first: Year,
        expected_last: Year,
        found_first: Year,
        found_last: Year,
        line: u64,
    },
    #[error("line {line}: {field} must be non-empty")]
    EmptyField { field: &'static str, line: u64 },
    #[error("not enough records: wanted {wanted}, have {available}")]
    NotEnoughRecords { wanted: usize, available: usize },
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source)
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn check_header<R: Read>(
    reader: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<(), IngestError> {
    let found = reader.headers().map_err(map_csv_error)?;
    let found_vec: Vec<&str> = found.iter().collect();
    if found_vec != expected {
        return Err(IngestError::WrongHeader {
            expected: expected.join(","),
            found: found_vec.join(","),
        });
    }
    Ok(())
}

fn map_csv_error(err: csv::Error) -> IngestError {
    let line = match err.kind() {
        csv::ErrorKind::Utf8 { pos, .. } => pos.as_ref().map(|p| p.line()).unwrap_or(0),
        csv::ErrorKind::UnequalLengths { pos, .. } => pos.as_ref().map(|p| p.line()).unwrap_or(0),
        _ => 0,
    };
    IngestError::Parse {
        line,
        message: err.to_string(),
    }
}

fn parse_year(raw: &str, line: u64) -> Result<Year, IngestError> {
    let year: Year = raw.trim().parse().map_err(|_| IngestError::BadYear {
        value: raw.to_string(),
        line,
    })?;
    if !(1000..=9999).contains(&year) {
        return Err(IngestError::BadYear {
            value: raw.to_string(),
            line,
        });
    }
    Ok(year)
}

fn parse_count(raw: &str, line: u64) -> Result<u64, IngestError> {
    let raw = raw.trim();
    if let Ok(signed) = raw.parse::<i64>() {
        if signed < 0 {
            return Err(IngestError::NegativeCount {
                value: signed,
                line,
            });
        }
    }
    raw.parse::<u64>().map_err(|_| IngestError::Parse {
        line,
        message: format!("invalid count `{raw}`"),
    })
}

struct FieldRows {
    name: String,
    section: String,
    first_line: u64,
    by_year: BTreeMap<Year, (u64, u64)>, // year -> (count, line)
}

/// Reads a counts CSV into a validated balanced panel.
pub fn load_counts<R: Read>(source: R) -> Result<Corpus, IngestError> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &COUNTS_HEADER)?;

    let mut fields: BTreeMap<String, FieldRows> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(map_csv_error)? {
        let line = record_line(&record);
        let field_id = record[0].to_string();
        if field_id.is_empty() {
            return Err(IngestError::EmptyField {
                field: "field_id",
                line,
            });
        }
        let name = record[1].to_string();
        let section = record[2].to_string();
        let year = parse_year(&record[3], line)?;
        let count = parse_count(&record[4], line)?;

        let entry = fields.entry(field_id.clone()).or_insert_with(|| FieldRows {
            name: name.clone(),
            section: section.clone(),
            first_line: line,
            by_year: BTreeMap::new(),
        });
        if entry.name != name || entry.section != section {
            return Err(IngestError::ConflictingFieldMetadata { field_id, line });
        }
        if entry.by_year.insert(year, (count, line)).is_some() {
            return Err(IngestError::DuplicateCell {
                field_id,
                year,
                line,
            });
        }
    }

    let mut series = Vec::with_capacity(fields.len());
    let mut first_lines = Vec::with_capacity(fields.len());
    for (field_id, rows) in fields {
        first_lines.push(rows.first_line);
        series.push(assemble_series(&field_id, &rows)?);
    }
    // Balanced-panel check against the first field, reported with the
    // offending field's first row.
    if let Some(head) = series.first() {
        let expected = head.year_range();
        for (s, &line) in series.iter().zip(&first_lines).skip(1) {
            if s.year_range() != expected {
                return Err(IngestError::MismatchedYearRange {
                    field_id: s.field_id().to_string(),
                    expected_first: expected.0,
                    expected_last: expected.1,
                    found_first: s.first_year(),
                    found_last: s.last_year(),
                    line,
                });
            }
        }
    }
    Ok(build_corpus(series)?)
}

fn assemble_series(field_id: &str, rows: &FieldRows) -> Result<FieldSeries, IngestError> {
    let mut counts = Vec::with_capacity(rows.by_year.len());
    let first_year = *rows.by_year.keys().next().expect("at least one row");
    for (expected, (&year, &(count, line))) in (first_year..).zip(&rows.by_year) {
        if year != expected {
            return Err(IngestError::NonContiguousYears {
                field_id: field_id.to_string(),
                missing_year: expected,
                line,
            });
        }
        counts.push(count);
    }
    FieldSeries::new(field_id, &rows.name, &rows.section, first_year, counts).map_err(|e| match e {
        PanelError::EmptyFieldId => IngestError::EmptyField {
            field: "field_id",
            line: rows.first_line,
        },
        other => IngestError::Panel(other),
    })
}

/// Writes a counts CSV in canonical order; the output round-trips
/// bit-exactly through [`load_counts`].
pub fn write_counts<W: Write>(corpus: &Corpus, sink: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(COUNTS_HEADER)?;
    for f in corpus.fields() {
        for (year, &count) in f.years().zip(f.counts()) {
            w.write_record([
                f.field_id(),
                f.field_name(),
                f.broad_section(),
                &year.to_string(),
                &count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn counts_to_string(corpus: &Corpus) -> String {
    let mut buf = Vec::new();
    write_counts(corpus, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

struct CtRows {
    first_line: u64,
    by_year: BTreeMap<Year, (u64, u64)>,
}

/// Reads a controlled-term CSV against an already-loaded parent corpus.
pub fn load_ct<R: Read>(source: R, parent: &Corpus) -> Result<CtCorpus, IngestError> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &CT_HEADER)?;

    let mut terms: BTreeMap<(String, String), CtRows> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(map_csv_error)? {
        let line = record_line(&record);
        let field_id = record[0].to_string();
        let ct_name = record[1].to_string();
        if field_id.is_empty() {
            return Err(IngestError::EmptyField {
                field: "field_id",
                line,
            });
        }
        if ct_name.is_empty() {
            return Err(IngestError::EmptyField {
                field: "ct_name",
                line,
            });
        }
        let year = parse_year(&record[2], line)?;
        let count = parse_count(&record[3], line)?;

        let Some(parent_field) = parent.field(&field_id) else {
            return Err(IngestError::UnknownParentField { field_id, line });
        };
        let Some(parent_count) = parent_field.count_at(year) else {
            return Err(IngestError::Parse {
                line,
                message: format!(
                    "year {year} is outside the parent range {}-{}",
                    parent_field.first_year(),
                    parent_field.last_year()
                ),
            });
        };
        if count > parent_count {
            return Err(IngestError::CountExceedsParentTotal {
                count,
                parent_count,
                year,
                line,
            });
        }

        let entry = terms
            .entry((field_id.clone(), ct_name.clone()))
            .or_insert_with(|| CtRows {
                first_line: line,
                by_year: BTreeMap::new(),
            });
        if entry.by_year.insert(year, (count, line)).is_some() {
            return Err(IngestError::DuplicateCell {
                field_id: format!("{field_id}/{ct_name}"),
                year,
                line,
            });
        }
    }

    let mut built = Vec::with_capacity(terms.len());
    for ((field_id, ct_name), rows) in terms {
        let mut counts = Vec::with_capacity(rows.by_year.len());
        let first_year = *rows.by_year.keys().next().expect("at least one row");
        for (expected, (&year, &(count, line))) in (first_year..).zip(&rows.by_year) {
            if year != expected {
                return Err(IngestError::NonContiguousYears {
                    field_id: format!("{field_id}/{ct_name}"),
                    missing_year: expected,
                    line,
                });
            }
            counts.push(count);
        }
        built.push(
            CtSeries::new(&field_id, &ct_name, first_year, counts).map_err(|e| match e {
                PanelError::EmptyCtName => IngestError::EmptyField {
                    field: "ct_name",
                    line: rows.first_line,
                },
                other => IngestError::Panel(other),
            })?,
        );
    }
    Ok(CtCorpus::build(built, parent.clone())?)
}

/// Writes a controlled-term CSV in canonical order.
pub fn write_ct<W: Write>(ct: &CtCorpus, sink: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CT_HEADER)?;
    for t in ct.terms() {
        for (year, &count) in t.years().zip(t.counts()) {
            w.write_record([
                t.parent_field_id(),
                t.ct_name(),
                &year.to_string(),
                &count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a titles CSV in file order.
pub fn load_titles<R: Read>(source: R) -> Result<Vec<TitleRecord>, IngestError> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &TITLES_HEADER)?;

    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(map_csv_error)? {
        let line = record_line(&record);
        let field_id = record[0].to_string();
        if field_id.is_empty() {
            return Err(IngestError::EmptyField {
                field: "field_id",
                line,
            });
        }
        let year = parse_year(&record[1], line)?;
        let ct_name = record[2].to_string();
        let title = record[3].to_string();
        if title.is_empty() {
            return Err(IngestError::EmptyField {
                field: "title",
                line,
            });
        }
        out.push(TitleRecord {
            field_id,
            year,
            ct_name,
            title,
        });
    }
    Ok(out)
}

/// Writes a titles CSV in the given record order.
pub fn write_titles<W: Write>(rows: &[TitleRecord], sink: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TITLES_HEADER)?;
    for r in rows {
        w.write_record([
            r.field_id.as_str(),
            &r.year.to_string(),
            r.ct_name.as_str(),
            r.title.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Which titles to sample from.
#[derive(Debug, Clone)]
pub struct TitleFilter {
    pub field_id: String,
    pub ct_name: String,
    pub year: Year,
}

impl TitleFilter {
    fn matches(&self, r: &TitleRecord) -> bool {
        r.field_id == self.field_id && r.ct_name == self.ct_name && r.year == self.year
    }
}

/// Uniform sample of `k` matching titles without replacement.
///
/// The filtered records are put into a canonical order (field, year,
/// term, title, original index) before a partial Fisher-Yates shuffle
/// driven by the seeded generator, so a seed selects the same titles no
/// matter how the input file was ordered. The sample is returned in
/// original file order.
pub fn sample_titles(
    rows: &[TitleRecord],
    filter: &TitleFilter,
    k: usize,
    seed: u64,
) -> Result<Vec<TitleRecord>, IngestError> {
    let mut filtered: Vec<usize> = (0..rows.len())
        .filter(|&i| filter.matches(&rows[i]))
        .collect();
    if filtered.len() < k {
        return Err(IngestError::NotEnoughRecords {
            wanted: k,
            available: filtered.len(),
        });
    }
    filtered.sort_by(|&a, &b| {
        let ra = &rows[a];
        let rb = &rows[b];
        (&ra.field_id, ra.year, &ra.ct_name, &ra.title, a).cmp(&(
            &rb.field_id,
            rb.year,
            &rb.ct_name,
            &rb.title,
            b,
        ))
    });

    let mut rng = SplitMix64::new(seed);
    let n = filtered.len();
    for i in 0..k {
        let j = i + rng.below((n - i) as u64) as usize;
        filtered.swap(i, j);
    }
    let mut picked = filtered[..k].to_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| rows[i].clone()).collect())
}
