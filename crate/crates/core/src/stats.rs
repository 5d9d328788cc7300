//! Descriptive statistics: key figures, Tukey box statistics,
//! year-over-year differences, histograms, Pearson correlation, and
//! aggregate totals.
//!
//! Quantiles use linear interpolation of order statistics
//! (`h = (n-1)p`, 0-based). Standard deviations use the sample (n-1)
//! denominator throughout. All functions are pure.

use crate::panel::{Corpus, FieldSeries, Year};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("series {field_id} needs at least two years")]
    TooFewYears { field_id: String },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("zero variance in {which}")]
    ZeroVariance { which: &'static str },
    #[error("bin count must be at least 1")]
    InvalidBinCount,
}

/// Key figures of one sample: n, mean, median, sd, min, max.
///
/// `sd` is absent for a single observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: Option<f64>,
    pub min: f64,
    pub max: f64,
}

/// Tukey box statistics: quartiles, adjacent values, and outliers.
///
/// Adjacent values are the most extreme data points within 1.5 IQR of
/// the nearest quartile; everything outside is an outlier.
#[derive(Debug, Clone, PartialEq)]
pub struct TukeyBox {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower_adjacent: f64,
    pub upper_adjacent: f64,
    pub outliers: Vec<f64>,
}

/// Year-over-year differences of one field's counts.
///
/// `diffs[k]` is the change from year `first_diff_year + k - 1` to
/// `first_diff_year + k`; the series starts one year after the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffSeries {
    pub field_id: String,
    pub first_diff_year: Year,
    pub diffs: Vec<i64>,
}

impl DiffSeries {
    pub fn years(&self) -> impl Iterator<Item = Year> + '_ {
        self.first_diff_year..self.first_diff_year + self.diffs.len() as Year
    }
}

/// Equal-width histogram; a value equal to the maximum falls in the last
/// bin, so underflow and overflow are zero by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub bin_counts: Vec<usize>,
    pub underflow: usize,
    pub overflow: usize,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.bin_counts.len()
    }

    pub fn total(&self) -> usize {
        self.bin_counts.iter().sum()
    }
}

/// Bin selection for [`histogram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bins {
    /// Sturges' rule: ceil(log2 n) + 1.
    Auto,
    Fixed(usize),
}

/// Quantile by linear interpolation of order statistics.
///
/// `sorted` must be ascending and non-empty; `p` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Mean, median, sample sd, min, max of a sample.
pub fn summarize(values: &[f64]) -> Result<SummaryStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sorted = sorted_copy(values);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let sd = if n >= 2 {
        let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        Some((ss / (n - 1) as f64).sqrt())
    } else {
        None
    };
    Ok(SummaryStats {
        n,
        mean,
        median,
        sd,
        min: sorted[0],
        max: sorted[n - 1],
    })
}

/// Tukey box statistics of a sample of at least four values.
pub fn tukey_box(values: &[f64]) -> Result<TukeyBox, StatsError> {
    if values.len() < 4 {
        return Err(StatsError::TooFewValues {
            needed: 4,
            got: values.len(),
        });
    }
    let sorted = sorted_copy(values);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lower_fence = q1 - 1.5 * iqr;
    let upper_fence = q3 + 1.5 * iqr;
    // There is always a datum in [q1, q3], so both adjacents exist.
    let lower_adjacent = *sorted
        .iter()
        .find(|&&v| v >= lower_fence)
        .expect("fence below q1");
    let upper_adjacent = *sorted
        .iter()
        .rev()
        .find(|&&v| v <= upper_fence)
        .expect("fence above q3");
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < lower_fence || v > upper_fence)
        .collect();
    Ok(TukeyBox {
        q1,
        median,
        q3,
        iqr,
        lower_adjacent,
        upper_adjacent,
        outliers,
    })
}

/// Differences of consecutive annual counts for one field.
pub fn year_over_year(series: &FieldSeries) -> Result<DiffSeries, StatsError> {
    if series.n_years() < 2 {
        return Err(StatsError::TooFewYears {
            field_id: series.field_id().to_string(),
        });
    }
    let diffs = series
        .counts()
        .windows(2)
        .map(|w| w[1] as i64 - w[0] as i64)
        .collect();
    Ok(DiffSeries {
        field_id: series.field_id().to_string(),
        first_diff_year: series.first_year() + 1,
        diffs,
    })
}

/// Key figures of the cross-field difference distribution, one entry per
/// year after the first.
pub fn diff_key_figures(corpus: &Corpus) -> Result<Vec<(Year, SummaryStats)>, StatsError> {
    let diffs: Vec<DiffSeries> = corpus
        .fields()
        .iter()
        .map(year_over_year)
        .collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(corpus.n_years() - 1);
    for (k, year) in (corpus.first_year() + 1..=corpus.last_year()).enumerate() {
        let at_year: Vec<f64> = diffs.iter().map(|d| d.diffs[k] as f64).collect();
        out.push((year, summarize(&at_year)?));
    }
    Ok(out)
}

/// Key figures of the cross-field count distribution, one entry per year.
pub fn per_year_key_figures(corpus: &Corpus) -> Result<Vec<(Year, SummaryStats)>, StatsError> {
    let mut out = Vec::with_capacity(corpus.n_years());
    for (k, year) in corpus.years().enumerate() {
        let at_year: Vec<f64> = corpus
            .fields()
            .iter()
            .map(|f| f.counts()[k] as f64)
            .collect();
        out.push((year, summarize(&at_year)?));
    }
    Ok(out)
}

/// Equal-width histogram over [min, max].
///
/// A degenerate sample (min == max) gets a single bin of nominal width 1
/// centered on the value, whatever bin count was requested.
pub fn histogram(values: &[f64], bins: Bins) -> Result<Histogram, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let n_bins = match bins {
        Bins::Fixed(0) => return Err(StatsError::InvalidBinCount),
        Bins::Fixed(k) => k,
        Bins::Auto => sturges(values.len()),
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(Histogram {
            bin_edges: vec![min - 0.5, min + 0.5],
            bin_counts: vec![values.len()],
            underflow: 0,
            overflow: 0,
        });
    }
    let width = (max - min) / n_bins as f64;
    let mut bin_counts = vec![0usize; n_bins];
    for &v in values {
        let idx = (((v - min) / width) as usize).min(n_bins - 1);
        bin_counts[idx] += 1;
    }
    let bin_edges = (0..=n_bins)
        .map(|i| {
            if i == n_bins {
                max
            } else {
                min + width * i as f64
            }
        })
        .collect();
    Ok(Histogram {
        bin_edges,
        bin_counts,
        underflow: 0,
        overflow: 0,
    })
}

/// Sturges' bin count, computed in integer arithmetic.
fn sturges(n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    // ceil(log2 n) for n >= 2.
    let ceil_log2 = usize::BITS - (n - 1).leading_zeros();
    ceil_log2 as usize + 1
}

/// Sample Pearson correlation of two equal-length sequences.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFewValues {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance { which: "xs" });
    }
    if syy == 0.0 {
        return Err(StatsError::ZeroVariance { which: "ys" });
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Per-year sum over all fields, as a series with id `TOTAL`.
pub fn aggregate_total(corpus: &Corpus) -> FieldSeries {
    let n_years = corpus.n_years();
    let mut totals = vec![0u64; n_years];
    for f in corpus.fields() {
        for (t, &c) in totals.iter_mut().zip(f.counts()) {
            *t += c;
        }
    }
    FieldSeries::new("TOTAL", "Total", "TOTAL", corpus.first_year(), totals)
        .expect("total series is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::build_corpus;
    use approx::assert_relative_eq;

    fn series(id: &str, first: Year, counts: &[u64]) -> FieldSeries {
        FieldSeries::new(id, id, "BIO", first, counts.to_vec()).unwrap()
    }

    const PHARMA: [u64; 7] = [106_329, 108_973, 102_513, 98_490, 95_686, 96_452, 110_376];

    #[test]
    fn summarize_small_sample() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert_relative_eq!(s.sd.unwrap(), 1.2909944487358056, max_relative = 1e-12);
        assert_eq!((s.min, s.max), (1.0, 4.0));
    }

    #[test]
    fn summarize_constant_sample() {
        let s = summarize(&[7.0, 7.0, 7.0]).unwrap();
        assert_eq!((s.mean, s.median, s.sd.unwrap()), (7.0, 7.0, 0.0));
    }

    #[test]
    fn summarize_single_value_has_no_sd() {
        let s = summarize(&[3.5]).unwrap();
        assert_eq!(s.sd, None);
        assert_eq!(s.median, 3.5);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn summarize_pharmacology_counts() {
        let values: Vec<f64> = PHARMA.iter().map(|&c| c as f64).collect();
        let s = summarize(&values).unwrap();
        assert!((s.mean - 102_688.43).abs() < 0.01);
        assert_eq!(s.min, 95_686.0);
        assert_eq!(s.max, 110_376.0);
    }

    #[test]
    fn tukey_worked_fixture() {
        let values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 100.0];
        let b = tukey_box(&values).unwrap();
        assert_eq!(b.q1, 3.25);
        assert_eq!(b.q3, 7.75);
        assert_eq!(b.iqr, 4.5);
        assert_eq!(b.lower_adjacent, 1.0);
        assert_eq!(b.upper_adjacent, 9.0);
        assert_eq!(b.outliers, vec![100.0]);
    }

    #[test]
    fn tukey_no_outliers_and_minimum_size() {
        let b = tukey_box(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(b.outliers.is_empty());
        assert!(matches!(
            tukey_box(&[1.0, 2.0, 3.0]),
            Err(StatsError::TooFewValues { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn tukey_symmetric_outliers() {
        let values = [-50.0, -5.0, -1.0, 0.0, 1.0, 5.0, 50.0];
        let b = tukey_box(&values).unwrap();
        assert_eq!(b.outliers, vec![-50.0, 50.0]);
    }

    #[test]
    fn year_over_year_pharmacology() {
        let d = year_over_year(&series("Pharmacology", 2014, &PHARMA)).unwrap();
        assert_eq!(d.diffs, vec![2644, -6460, -4023, -2804, 766, 13_924]);
        assert_eq!(d.first_diff_year, 2015);
        assert_eq!(
            d.years().collect::<Vec<_>>(),
            (2015..=2020).collect::<Vec<_>>()
        );
    }

    #[test]
    fn year_over_year_edges() {
        let d = year_over_year(&series("C", 2014, &[5, 5, 5])).unwrap();
        assert_eq!(d.diffs, vec![0, 0]);
        let d = year_over_year(&series("S", 2014, &[0, 5])).unwrap();
        assert_eq!(d.diffs, vec![5]);
        assert!(year_over_year(&series("X", 2014, &[1])).is_err());
    }

    #[test]
    fn per_year_key_figures_across_fields() {
        let c = build_corpus(vec![series("A", 2014, &[1, 4]), series("B", 2014, &[3, 8])]).unwrap();
        let kf = per_year_key_figures(&c).unwrap();
        assert_eq!(kf[0].0, 2014);
        assert_eq!(kf[0].1.mean, 2.0);
        assert_eq!(kf[1].1.mean, 6.0);
        assert_eq!(kf[1].1.min, 4.0);
    }

    #[test]
    fn diff_key_figures_constant_fields() {
        let c = build_corpus(vec![
            series("A", 2014, &[4, 4, 4]),
            series("B", 2014, &[9, 9, 9]),
        ])
        .unwrap();
        for (_, s) in diff_key_figures(&c).unwrap() {
            assert_eq!(s.mean, 0.0);
            assert_eq!(s.sd.unwrap(), 0.0);
        }
    }

    #[test]
    fn mean_of_diffs_equals_diff_of_means() {
        let c = build_corpus(vec![
            series("A", 2014, &[10, 30, 20, 50]),
            series("B", 2014, &[100, 90, 130, 70]),
            series("C", 2014, &[7, 7, 9, 3]),
        ])
        .unwrap();
        let kf = diff_key_figures(&c).unwrap();
        for (k, (_, s)) in kf.iter().enumerate() {
            let mean_at = |i: usize| {
                c.fields().iter().map(|f| f.counts()[i] as f64).sum::<f64>() / c.n_fields() as f64
            };
            assert_relative_eq!(s.mean, mean_at(k + 1) - mean_at(k), max_relative = 1e-12);
        }
    }

    #[test]
    fn histogram_hand_binned() {
        let h = histogram(&[0.0, 1.0, 2.0, 3.0], Bins::Fixed(2)).unwrap();
        assert_eq!(h.bin_edges, vec![0.0, 1.5, 3.0]);
        assert_eq!(h.bin_counts, vec![2, 2]);
        assert_eq!((h.underflow, h.overflow), (0, 0));
    }

    #[test]
    fn histogram_degenerate_and_auto() {
        let h = histogram(&[4.0], Bins::Fixed(1)).unwrap();
        assert_eq!(h.bin_edges, vec![3.5, 4.5]);
        assert_eq!(h.bin_counts, vec![1]);

        let values: Vec<f64> = (0..8).map(f64::from).collect();
        let h = histogram(&values, Bins::Auto).unwrap();
        assert_eq!(h.n_bins(), 4);
        assert_eq!(h.total(), 8);

        assert!(histogram(&[], Bins::Auto).is_err());
        assert!(histogram(&[1.0], Bins::Fixed(0)).is_err());
    }

    #[test]
    fn sturges_rule() {
        assert_eq!(sturges(1), 1);
        assert_eq!(sturges(2), 2);
        assert_eq!(sturges(8), 4);
        assert_eq!(sturges(9), 5);
        assert_eq!(sturges(80), 8);
    }

    #[test]
    fn pearson_examples() {
        let v = [1.0, 2.0, 3.0];
        assert_relative_eq!(pearson(&v, &v).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            pearson(&v, &[6.0, 4.0, 2.0]).unwrap(),
            -1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(),
            0.8,
            max_relative = 1e-12
        );
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch { .. })
        ));
        assert!(matches!(
            pearson(&[1.0, 1.0], &[1.0, 2.0]),
            Err(StatsError::ZeroVariance { which: "xs" })
        ));
    }

    #[test]
    fn aggregate_total_examples() {
        let one = build_corpus(vec![series("A", 2014, &[1, 2, 3])]).unwrap();
        assert_eq!(aggregate_total(&one).counts(), &[1, 2, 3]);

        let two = build_corpus(vec![
            series("A", 2014, &[1, 2, 3]),
            series("B", 2014, &[10, 20, 30]),
        ])
        .unwrap();
        let total = aggregate_total(&two);
        assert_eq!(total.counts(), &[11, 22, 33]);
        assert_eq!(total.field_id(), "TOTAL");
    }

    #[test]
    fn aggregate_total_commutes_with_slice() {
        let c = build_corpus(vec![
            series("A", 2000, &[1, 2, 3, 4, 5]),
            series("B", 2000, &[5, 4, 3, 2, 1]),
        ])
        .unwrap();
        let sliced_total = aggregate_total(&c.slice_years(2001, 2003).unwrap());
        let total_sliced = aggregate_total(&c);
        assert_eq!(sliced_total.counts(), &total_sliced.counts()[1..=3],);
    }
}
