//! Panel data model: fields, years, counts, and controlled terms.
//!
//! A [`Corpus`] is a balanced panel: every field covers the identical
//! contiguous year range. Ragged panels are rejected at construction
//! rather than imputed, so every downstream statistic is well-defined.
//! All types are immutable once built and safe to share across threads.

use thiserror::Error;

/// Calendar year.
pub type Year = i32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PanelError {
    #[error("empty input: at least one series is required")]
    EmptyInput,
    #[error("field id must be non-empty")]
    EmptyFieldId,
    #[error("series {field_id} has no counts")]
    EmptyCounts { field_id: String },
    #[error("duplicate field id {field_id}")]
    DuplicateFieldId { field_id: String },
    #[error("field {field_id} covers {found_first}-{found_last} but the panel covers {expected_first}-{expected_last}")]
    MismatchedYearRange {
        field_id: String,
        expected_first: Year,
        expected_last: Year,
        found_first: Year,
        found_last: Year,
    },
    #[error("a panel needs at least two years, got {n_years}")]
    TooFewYears { n_years: usize },
    #[error("year range {first}-{last} is outside the panel range {panel_first}-{panel_last}")]
    RangeOutOfBounds {
        first: Year,
        last: Year,
        panel_first: Year,
        panel_last: Year,
    },
    #[error("controlled term name must be non-empty")]
    EmptyCtName,
    #[error("duplicate controlled term {ct_name} under field {field_id}")]
    DuplicateControlledTerm { field_id: String, ct_name: String },
    #[error("controlled term {ct_name} references unknown field {field_id}")]
    UnknownParentField { field_id: String, ct_name: String },
    #[error("controlled term {ct_name} of field {field_id} covers {first}-{last}, outside the parent range {parent_first}-{parent_last}")]
    CtRangeOutOfBounds {
        field_id: String,
        ct_name: String,
        first: Year,
        last: Year,
        parent_first: Year,
        parent_last: Year,
    },
    #[error("controlled term {ct_name} of field {field_id} has {count} publications in {year}, more than the field total {parent_count}")]
    CountExceedsParentTotal {
        field_id: String,
        ct_name: String,
        year: Year,
        count: u64,
        parent_count: u64,
    },
}

/// One field's annual publication counts over a contiguous year range.
///
/// Years are stored as a first year plus the count vector, which makes
/// "strictly ascending with step 1" true by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSeries {
    field_id: String,
    field_name: String,
    broad_section: String,
    first_year: Year,
    counts: Vec<u64>,
}

impl FieldSeries {
    pub fn new(
        field_id: impl Into<String>,
        field_name: impl Into<String>,
        broad_section: impl Into<String>,
        first_year: Year,
        counts: Vec<u64>,
    ) -> Result<Self, PanelError> {
        let field_id = field_id.into();
        if field_id.is_empty() {
            return Err(PanelError::EmptyFieldId);
        }
        if counts.is_empty() {
            return Err(PanelError::EmptyCounts { field_id });
        }
        Ok(FieldSeries {
            field_id,
            field_name: field_name.into(),
            broad_section: broad_section.into(),
            first_year,
            counts,
        })
    }

    pub fn field_id(&self) -> &str {
        &self.field_id
    }

    pub fn field_name(&self) -> &str {
        &self.field_name
    }

    pub fn broad_section(&self) -> &str {
        &self.broad_section
    }

    pub fn first_year(&self) -> Year {
        self.first_year
    }

    pub fn last_year(&self) -> Year {
        self.first_year + (self.counts.len() as Year - 1)
    }

    pub fn year_range(&self) -> (Year, Year) {
        (self.first_year, self.last_year())
    }

    pub fn n_years(&self) -> usize {
        self.counts.len()
    }

    pub fn years(&self) -> impl Iterator<Item = Year> + '_ {
        self.first_year..=self.last_year()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Count for a given year, if the year is covered.
    pub fn count_at(&self, year: Year) -> Option<u64> {
        if year < self.first_year || year > self.last_year() {
            None
        } else {
            Some(self.counts[(year - self.first_year) as usize])
        }
    }

    fn sliced(&self, first: Year, last: Year) -> FieldSeries {
        let a = (first - self.first_year) as usize;
        let b = (last - self.first_year) as usize;
        FieldSeries {
            field_id: self.field_id.clone(),
            field_name: self.field_name.clone(),
            broad_section: self.broad_section.clone(),
            first_year: first,
            counts: self.counts[a..=b].to_vec(),
        }
    }
}

/// A balanced panel of [`FieldSeries`] sharing one year range.
///
/// Fields are kept in ascending `field_id` order; that order is the
/// canonical order used by every deterministic output downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    fields: Vec<FieldSeries>,
    first_year: Year,
    last_year: Year,
}

/// Validates and assembles a corpus from per-field series.
///
/// The first series fixes the expected year range; any deviation is a
/// [`PanelError::MismatchedYearRange`]. Input order does not matter.
pub fn build_corpus(series: Vec<FieldSeries>) -> Result<Corpus, PanelError> {
    let Some(head) = series.first() else {
        return Err(PanelError::EmptyInput);
    };
    let (first_year, last_year) = head.year_range();
    if head.n_years() < 2 {
        return Err(PanelError::TooFewYears {
            n_years: head.n_years(),
        });
    }
    for s in &series {
        if s.year_range() != (first_year, last_year) {
            return Err(PanelError::MismatchedYearRange {
                field_id: s.field_id.clone(),
                expected_first: first_year,
                expected_last: last_year,
                found_first: s.first_year,
                found_last: s.last_year(),
            });
        }
    }
    let mut fields = series;
    fields.sort_by(|a, b| a.field_id.cmp(&b.field_id));
    for pair in fields.windows(2) {
        if pair[0].field_id == pair[1].field_id {
            return Err(PanelError::DuplicateFieldId {
                field_id: pair[0].field_id.clone(),
            });
        }
    }
    Ok(Corpus {
        fields,
        first_year,
        last_year,
    })
}

impl Corpus {
    pub fn fields(&self) -> &[FieldSeries] {
        &self.fields
    }

    pub fn n_fields(&self) -> usize {
        self.fields.len()
    }

    pub fn first_year(&self) -> Year {
        self.first_year
    }

    pub fn last_year(&self) -> Year {
        self.last_year
    }

    pub fn year_range(&self) -> (Year, Year) {
        (self.first_year, self.last_year)
    }

    pub fn n_years(&self) -> usize {
        (self.last_year - self.first_year) as usize + 1
    }

    pub fn years(&self) -> impl Iterator<Item = Year> + '_ {
        self.first_year..=self.last_year
    }

    /// Field lookup by id (binary search over the canonical order).
    pub fn field(&self, field_id: &str) -> Option<&FieldSeries> {
        self.fields
            .binary_search_by(|f| f.field_id.as_str().cmp(field_id))
            .ok()
            .map(|i| &self.fields[i])
    }

    /// New corpus restricted to `[first, last]`; the source is unchanged.
    pub fn slice_years(&self, first: Year, last: Year) -> Result<Corpus, PanelError> {
        if first > last || first < self.first_year || last > self.last_year {
            return Err(PanelError::RangeOutOfBounds {
                first,
                last,
                panel_first: self.first_year,
                panel_last: self.last_year,
            });
        }
        if (last - first) < 1 {
            return Err(PanelError::TooFewYears { n_years: 1 });
        }
        Ok(Corpus {
            fields: self.fields.iter().map(|f| f.sliced(first, last)).collect(),
            first_year: first,
            last_year: last,
        })
    }
}

/// Per-controlled-term annual counts nested under a parent field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtSeries {
    parent_field_id: String,
    ct_name: String,
    first_year: Year,
    counts: Vec<u64>,
}

impl CtSeries {
    pub fn new(
        parent_field_id: impl Into<String>,
        ct_name: impl Into<String>,
        first_year: Year,
        counts: Vec<u64>,
    ) -> Result<Self, PanelError> {
        let parent_field_id = parent_field_id.into();
        let ct_name = ct_name.into();
        if parent_field_id.is_empty() {
            return Err(PanelError::EmptyFieldId);
        }
        if ct_name.is_empty() {
            return Err(PanelError::EmptyCtName);
        }
        if counts.is_empty() {
            return Err(PanelError::EmptyCounts {
                field_id: parent_field_id,
            });
        }
        Ok(CtSeries {
            parent_field_id,
            ct_name,
            first_year,
            counts,
        })
    }

    pub fn parent_field_id(&self) -> &str {
        &self.parent_field_id
    }

    pub fn ct_name(&self) -> &str {
        &self.ct_name
    }

    pub fn first_year(&self) -> Year {
        self.first_year
    }

    pub fn last_year(&self) -> Year {
        self.first_year + (self.counts.len() as Year - 1)
    }

    pub fn years(&self) -> impl Iterator<Item = Year> + '_ {
        self.first_year..=self.last_year()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count_at(&self, year: Year) -> Option<u64> {
        if year < self.first_year || year > self.last_year() {
            None
        } else {
            Some(self.counts[(year - self.first_year) as usize])
        }
    }
}

/// Controlled-term panel plus the parent corpus supplying field totals.
///
/// Percentages are always computed against the parent field's own count,
/// never by summing term rows: a publication may carry many terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtCorpus {
    terms: Vec<CtSeries>,
    parent: Corpus,
}

impl CtCorpus {
    pub fn build(terms: Vec<CtSeries>, parent: Corpus) -> Result<Self, PanelError> {
        let mut terms = terms;
        terms.sort_by(|a, b| {
            (a.parent_field_id.as_str(), a.ct_name.as_str())
                .cmp(&(b.parent_field_id.as_str(), b.ct_name.as_str()))
        });
        for pair in terms.windows(2) {
            if pair[0].parent_field_id == pair[1].parent_field_id
                && pair[0].ct_name == pair[1].ct_name
            {
                return Err(PanelError::DuplicateControlledTerm {
                    field_id: pair[0].parent_field_id.clone(),
                    ct_name: pair[0].ct_name.clone(),
                });
            }
        }
        for t in &terms {
            let Some(parent_field) = parent.field(&t.parent_field_id) else {
                return Err(PanelError::UnknownParentField {
                    field_id: t.parent_field_id.clone(),
                    ct_name: t.ct_name.clone(),
                });
            };
            if t.first_year < parent_field.first_year() || t.last_year() > parent_field.last_year()
            {
                return Err(PanelError::CtRangeOutOfBounds {
                    field_id: t.parent_field_id.clone(),
                    ct_name: t.ct_name.clone(),
                    first: t.first_year,
                    last: t.last_year(),
                    parent_first: parent_field.first_year(),
                    parent_last: parent_field.last_year(),
                });
            }
            for (year, &count) in t.years().zip(t.counts.iter()) {
                let parent_count = parent_field.count_at(year).expect("range checked");
                if count > parent_count {
                    return Err(PanelError::CountExceedsParentTotal {
                        field_id: t.parent_field_id.clone(),
                        ct_name: t.ct_name.clone(),
                        year,
                        count,
                        parent_count,
                    });
                }
            }
        }
        Ok(CtCorpus { terms, parent })
    }

    pub fn terms(&self) -> &[CtSeries] {
        &self.terms
    }

    pub fn parent(&self) -> &Corpus {
        &self.parent
    }

    /// Terms belonging to one field, in ascending `ct_name` order.
    pub fn terms_of<'a>(&'a self, field_id: &'a str) -> impl Iterator<Item = &'a CtSeries> + 'a {
        self.terms
            .iter()
            .filter(move |t| t.parent_field_id == field_id)
    }
}

/// One publication title with its field, year, and controlled term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TitleRecord {
    pub field_id: String,
    pub year: Year,
    pub ct_name: String,
    pub title: String,
}
