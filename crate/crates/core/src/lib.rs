//! Trend analytics for balanced panels of annual publication counts.
//!
//! The crate takes per-field publication counts over a contiguous year
//! range and provides descriptive statistics, year-over-year differences,
//! per-field linear growth fits with heteroskedasticity-robust confidence
//! intervals, slope rankings, controlled-term drill-downs, synthetic panel
//! generation for Monte Carlo checks, and deterministic table/SVG
//! rendering.
//!
//! Everything is computed in memory from immutable inputs; all outputs are
//! byte-deterministic functions of their inputs.

pub mod chart;
pub mod io;
pub mod panel;
pub mod regress;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod table;
pub mod tdist;

pub use panel::{
    build_corpus, Corpus, CtCorpus, CtSeries, FieldSeries, PanelError, TitleRecord, Year,
};
pub use regress::{
    drilldown, fit_all, fit_key_figures, ols_fit, projected_change, rank_by_slope, robust_variance,
    Drilldown, FitKeyFigures, HcVariant, RankedFits, RegressError, TrendFit,
};
pub use stats::{
    aggregate_total, diff_key_figures, histogram, pearson, per_year_key_figures, summarize,
    tukey_box, year_over_year, Bins, DiffSeries, Histogram, StatsError, SummaryStats, TukeyBox,
};
pub use tdist::{student_t_cdf, t_quantile, TdistError};
