//! Per-series linear growth fits with heteroskedasticity-consistent
//! variance, t-based confidence intervals, fleet fitting, slope ranking,
//! projections, and controlled-term drill-downs.
//!
//! Each series is fit by closed-form two-parameter least squares on
//! `count = b0 + b1 * (year - baseline)`, so the intercept is the
//! expected count in the baseline year and the slope the change per
//! year. Variances use the sandwich estimator; HC1 applies the
//! `n / (n - 2)` small-sample factor and is the default.

use crate::panel::{build_corpus, Corpus, CtCorpus, FieldSeries, PanelError, Year};
use crate::stats::{pearson, summarize, StatsError, SummaryStats};
use crate::tdist::{t_quantile, TdistError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RegressError {
    #[error("series {series_id} has {n} years; fitting needs at least 3")]
    TooFewYears { series_id: String, n: usize },
    #[error("degenerate design: all time values equal")]
    DegenerateDesign,
    #[error("confidence level must be strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),
    #[error("robust variance must be computed before the confidence interval")]
    MissingVariance,
    #[error("need at least {needed} fits, got {got}")]
    TooFewFits { needed: usize, got: usize },
    #[error("top_k must be at least 1")]
    InvalidTopK,
    #[error("unknown field {0}")]
    UnknownField(String),
    #[error("year {year} is outside the field range {first}-{last}")]
    YearOutOfRange { year: Year, first: Year, last: Year },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Tdist(#[from] TdistError),
    #[error(transparent)]
    Panel(#[from] PanelError),
}

/// Which heteroskedasticity-consistent variance to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HcVariant {
    /// Plain sandwich, no small-sample correction.
    Hc0,
    /// Sandwich scaled by n / (n - 2).
    #[default]
    Hc1,
}

/// Robust standard errors of one fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustInference {
    pub variant: HcVariant,
    pub se_b0: f64,
    pub se_b1: f64,
    pub cov_b0_b1: f64,
}

/// Two-sided confidence interval for the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeCi {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SlopeCi {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Least-squares growth fit of one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendFit {
    pub series_id: String,
    pub baseline_year: Year,
    pub n: usize,
    /// Expected count in the baseline year.
    pub b0: f64,
    /// Change in counts per year.
    pub b1: f64,
    pub residuals: Vec<f64>,
    /// Residual variance, sum of squared residuals over n - 2.
    pub sigma2: f64,
    pub df: usize,
    pub robust: Option<RobustInference>,
    pub ci_b1: Option<SlopeCi>,
    /// Time value of the first observation (first year minus baseline).
    #[serde(skip)]
    t_start: i32,
}

impl TrendFit {
    /// Time values T_i the fit was computed on.
    pub fn t_values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| (self.t_start + i as i32) as f64)
    }

    pub fn se_b1(&self) -> Option<f64> {
        self.robust.map(|r| r.se_b1)
    }

    /// Attaches sandwich standard errors for the given variant.
    pub fn with_robust_variance(mut self, variant: HcVariant) -> Self {
        let v = robust_variance(&self, variant);
        self.robust = Some(RobustInference {
            variant,
            se_b0: v.var_b0.sqrt(),
            se_b1: v.var_b1.sqrt(),
            cov_b0_b1: v.cov_b0_b1,
        });
        self.ci_b1 = None;
        self
    }

    /// Attaches the t-based slope interval; robust variance must already
    /// be present.
    pub fn with_confidence_interval(mut self, level: f64) -> Result<Self, RegressError> {
        if !(level > 0.0 && level < 1.0) {
            return Err(RegressError::InvalidLevel(level));
        }
        let robust = self.robust.ok_or(RegressError::MissingVariance)?;
        let half = if robust.se_b1 == 0.0 {
            0.0
        } else {
            t_quantile(1.0 - (1.0 - level) / 2.0, self.df)? * robust.se_b1
        };
        self.ci_b1 = Some(SlopeCi {
            level,
            lower: self.b1 - half,
            upper: self.b1 + half,
        });
        Ok(self)
    }
}

/// Sandwich variance of the two coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefVariance {
    pub var_b0: f64,
    pub var_b1: f64,
    pub cov_b0_b1: f64,
}

/// Closed-form least-squares fit of one series.
///
/// `baseline` defaults to the first year of the series, making T run
/// 0, 1, 2, ... across the observed years.
pub fn ols_fit(series: &FieldSeries, baseline: Option<Year>) -> Result<TrendFit, RegressError> {
    let n = series.n_years();
    if n < 3 {
        return Err(RegressError::TooFewYears {
            series_id: series.field_id().to_string(),
            n,
        });
    }
    let baseline_year = baseline.unwrap_or_else(|| series.first_year());
    let t_start = series.first_year() - baseline_year;

    let t_mean = t_start as f64 + (n as f64 - 1.0) / 2.0;
    let p_mean = series.counts().iter().map(|&c| c as f64).sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, &c) in series.counts().iter().enumerate() {
        let dt = (t_start + i as i32) as f64 - t_mean;
        sxx += dt * dt;
        sxy += dt * (c as f64 - p_mean);
    }
    if sxx == 0.0 {
        return Err(RegressError::DegenerateDesign);
    }
    let b1 = sxy / sxx;
    let b0 = p_mean - b1 * t_mean;
    let residuals: Vec<f64> = series
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 - b0 - b1 * (t_start + i as i32) as f64)
        .collect();
    let sigma2 = residuals.iter().map(|e| e * e).sum::<f64>() / (n - 2) as f64;
    Ok(TrendFit {
        series_id: series.field_id().to_string(),
        baseline_year,
        n,
        b0,
        b1,
        residuals,
        sigma2,
        df: n - 2,
        robust: None,
        ci_b1: None,
        t_start,
    })
}

/// Sandwich variance `(X'X)^-1 (sum x_i x_i' e_i^2) (X'X)^-1` written out
/// for the two-parameter design row `x_i = (1, T_i)`.
pub fn robust_variance(fit: &TrendFit, variant: HcVariant) -> CoefVariance {
    let n = fit.n as f64;
    let t: Vec<f64> = fit.t_values().collect();
    let sum_t: f64 = t.iter().sum();
    let sum_tt: f64 = t.iter().map(|v| v * v).sum();

    // (X'X)^-1 for [[n, st], [st, stt]].
    let det = n * sum_tt - sum_t * sum_t;
    let inv00 = sum_tt / det;
    let inv01 = -sum_t / det;
    let inv11 = n / det;

    // Meat: sum of x_i x_i' e_i^2.
    let mut m00 = 0.0;
    let mut m01 = 0.0;
    let mut m11 = 0.0;
    for (ti, e) in t.iter().zip(&fit.residuals) {
        let w = e * e;
        m00 += w;
        m01 += ti * w;
        m11 += ti * ti * w;
    }

    // V = inv * meat * inv, using symmetry of both factors.
    let a00 = inv00 * m00 + inv01 * m01;
    let a01 = inv00 * m01 + inv01 * m11;
    let a10 = inv01 * m00 + inv11 * m01;
    let a11 = inv01 * m01 + inv11 * m11;
    let mut var_b0 = a00 * inv00 + a01 * inv01;
    let mut cov = a00 * inv01 + a01 * inv11;
    let mut var_b1 = a10 * inv01 + a11 * inv11;

    if variant == HcVariant::Hc1 {
        let factor = n / (n - 2.0);
        var_b0 *= factor;
        var_b1 *= factor;
        cov *= factor;
    }
    CoefVariance {
        var_b0: var_b0.max(0.0),
        var_b1: var_b1.max(0.0),
        cov_b0_b1: cov,
    }
}

/// Fits every field of a balanced corpus, in canonical field order.
///
/// The first failing field aborts the run with its id in the error.
pub fn fit_all(
    corpus: &Corpus,
    baseline: Option<Year>,
    variant: HcVariant,
    level: f64,
) -> Result<Vec<TrendFit>, RegressError> {
    corpus
        .fields()
        .iter()
        .map(|f| {
            ols_fit(f, baseline)?
                .with_robust_variance(variant)
                .with_confidence_interval(level)
        })
        .collect()
}

/// Key figures of a fleet of fits: intercept stats, slope stats, and the
/// intercept-slope correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct FitKeyFigures {
    pub intercepts: SummaryStats,
    pub slopes: SummaryStats,
    pub intercept_slope_r: f64,
}

pub fn fit_key_figures(fits: &[TrendFit]) -> Result<FitKeyFigures, RegressError> {
    if fits.len() < 2 {
        return Err(RegressError::TooFewFits {
            needed: 2,
            got: fits.len(),
        });
    }
    let intercepts: Vec<f64> = fits.iter().map(|f| f.b0).collect();
    let slopes: Vec<f64> = fits.iter().map(|f| f.b1).collect();
    Ok(FitKeyFigures {
        intercepts: summarize(&intercepts)?,
        slopes: summarize(&slopes)?,
        intercept_slope_r: pearson(&intercepts, &slopes)?,
    })
}

/// Expected total change over `multiplier` years of slope.
///
/// The auto multiplier is the number of one-year intervals in the fitted
/// range (n - 1). Any other factor must be passed explicitly.
pub fn projected_change(fit: &TrendFit, multiplier: Option<f64>) -> f64 {
    let m = multiplier.unwrap_or((fit.n - 1) as f64);
    fit.b1 * m
}

/// Fits sorted ascending by slope, ties broken by ascending series id.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedFits {
    pub fits: Vec<TrendFit>,
}

pub fn rank_by_slope(fits: Vec<TrendFit>) -> RankedFits {
    let mut fits = fits;
    fits.sort_by(|a, b| {
        a.b1.total_cmp(&b.b1)
            .then_with(|| a.series_id.cmp(&b.series_id))
    });
    RankedFits { fits }
}

/// One row of a drill-down frequency table.
#[derive(Debug, Clone, PartialEq)]
pub struct CtFrequency {
    pub ct_name: String,
    pub count: u64,
    /// Share of the parent field's publications in the focus year.
    pub percent: f64,
}

/// Controlled-term drill-down of one field: focus-year frequency table
/// plus growth fits over the terms' shared year range.
#[derive(Debug, Clone, PartialEq)]
pub struct Drilldown {
    pub field_id: String,
    pub focus_year: Year,
    pub parent_total: u64,
    pub rows: Vec<CtFrequency>,
    pub fits: Vec<TrendFit>,
    pub ranked: RankedFits,
}

/// Computes the drill-down for `field_id` at `focus_year`.
///
/// Terms without a count for the focus year are not eligible for the
/// frequency table. The `top_k` most frequent terms (ties by name) are
/// fit as a balanced panel; a ragged panel among them is an error.
pub fn drilldown(
    ct_corpus: &CtCorpus,
    field_id: &str,
    focus_year: Year,
    top_k: usize,
    baseline: Option<Year>,
    variant: HcVariant,
    level: f64,
) -> Result<Drilldown, RegressError> {
    if top_k == 0 {
        return Err(RegressError::InvalidTopK);
    }
    let parent_field = ct_corpus
        .parent()
        .field(field_id)
        .ok_or_else(|| RegressError::UnknownField(field_id.to_string()))?;
    let parent_total =
        parent_field
            .count_at(focus_year)
            .ok_or_else(|| RegressError::YearOutOfRange {
                year: focus_year,
                first: parent_field.first_year(),
                last: parent_field.last_year(),
            })?;

    let mut rows: Vec<(&crate::panel::CtSeries, u64)> = ct_corpus
        .terms_of(field_id)
        .filter_map(|t| t.count_at(focus_year).map(|c| (t, c)))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.ct_name().cmp(b.0.ct_name())));
    rows.truncate(top_k);

    let freq = rows
        .iter()
        .map(|(t, c)| CtFrequency {
            ct_name: t.ct_name().to_string(),
            count: *c,
            percent: *c as f64 / parent_total as f64 * 100.0,
        })
        .collect();

    let series: Vec<FieldSeries> = rows
        .iter()
        .map(|(t, _)| {
            FieldSeries::new(
                t.ct_name(),
                t.ct_name(),
                field_id,
                t.first_year(),
                t.counts().to_vec(),
            )
            .expect("term series is non-empty")
        })
        .collect();
    let panel = build_corpus(series)?;
    let fits = fit_all(&panel, baseline, variant, level)?;
    let ranked = rank_by_slope(fits.clone());

    Ok(Drilldown {
        field_id: field_id.to_string(),
        focus_year,
        parent_total,
        rows: freq,
        fits,
        ranked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::CtSeries;
    use approx::assert_relative_eq;

    fn series(id: &str, first: Year, counts: &[u64]) -> FieldSeries {
        FieldSeries::new(id, id, "BIO", first, counts.to_vec()).unwrap()
    }

    const PHARMA: [u64; 7] = [106_329, 108_973, 102_513, 98_490, 95_686, 96_452, 110_376];

    #[test]
    fn exact_line_fits_perfectly() {
        let fit = ols_fit(&series("A", 2014, &[10, 20, 30]), None).unwrap();
        assert_relative_eq!(fit.b0, 10.0, max_relative = 1e-12);
        assert_relative_eq!(fit.b1, 10.0, max_relative = 1e-12);
        assert!(fit.residuals.iter().all(|e| e.abs() < 1e-9));
        assert_eq!(fit.df, 1);
    }

    #[test]
    fn pharmacology_fit_closed_form() {
        let fit = ols_fit(&series("Pharmacology", 2014, &PHARMA), Some(2014)).unwrap();
        assert!((fit.b1 - (-704.5714)).abs() < 1e-3);
        assert!((fit.b0 - 104802.1429).abs() < 1e-3);
        // Published key-figure table rounds the same intercept to 104,802.10.
        assert!((fit.b0 - 104802.10).abs() < 0.1);
    }

    #[test]
    fn hand_computed_three_point_fit() {
        let fit = ols_fit(&series("X", 2014, &[0, 0, 3]), None).unwrap();
        assert_relative_eq!(fit.b1, 1.5, max_relative = 1e-12);
        assert_relative_eq!(fit.b0, -0.5, max_relative = 1e-12);
        let expect = [0.5, -1.0, 0.5];
        for (e, x) in fit.residuals.iter().zip(expect) {
            assert_relative_eq!(*e, x, max_relative = 1e-12);
        }

        let v0 = robust_variance(&fit, HcVariant::Hc0);
        assert_relative_eq!(v0.var_b1, 0.125, max_relative = 1e-12);
        let v1 = robust_variance(&fit, HcVariant::Hc1);
        assert_relative_eq!(v1.var_b1, 0.375, max_relative = 1e-12);
        assert_relative_eq!(v1.var_b1.sqrt(), 0.6123724356957945, max_relative = 1e-12);
    }

    #[test]
    fn hc1_is_hc0_times_small_sample_factor() {
        let fit = ols_fit(&series("Pharmacology", 2014, &PHARMA), None).unwrap();
        let v0 = robust_variance(&fit, HcVariant::Hc0);
        let v1 = robust_variance(&fit, HcVariant::Hc1);
        let factor = 7.0 / 5.0;
        assert_relative_eq!(v1.var_b0, v0.var_b0 * factor, max_relative = 1e-12);
        assert_relative_eq!(v1.var_b1, v0.var_b1 * factor, max_relative = 1e-12);
        assert_relative_eq!(v1.cov_b0_b1, v0.cov_b0_b1 * factor, max_relative = 1e-12);
    }

    #[test]
    fn pharmacology_robust_se_matches_reference() {
        // Reference values from an independent sandwich computation.
        let fit = ols_fit(&series("Pharmacology", 2014, &PHARMA), None)
            .unwrap()
            .with_robust_variance(HcVariant::Hc1);
        let r = fit.robust.unwrap();
        assert_relative_eq!(r.se_b1, 1410.60765691, max_relative = 1e-9);
        assert_relative_eq!(r.se_b0, 3169.45440398, max_relative = 1e-9);
    }

    #[test]
    fn zero_residuals_degenerate_interval() {
        let fit = ols_fit(&series("A", 2014, &[10, 20, 30]), None)
            .unwrap()
            .with_robust_variance(HcVariant::Hc1)
            .with_confidence_interval(0.95)
            .unwrap();
        let r = fit.robust.unwrap();
        assert!(r.se_b0.abs() < 1e-9 && r.se_b1.abs() < 1e-9);
        let ci = fit.ci_b1.unwrap();
        assert_relative_eq!(ci.lower, fit.b1, max_relative = 1e-12);
        assert_relative_eq!(ci.upper, fit.b1, max_relative = 1e-12);
    }

    #[test]
    fn interval_composes_quantile_and_se() {
        let fit = ols_fit(&series("X", 2014, &[0, 0, 3]), None)
            .unwrap()
            .with_robust_variance(HcVariant::Hc1)
            .with_confidence_interval(0.95)
            .unwrap();
        let half = 12.7062 * 0.612372;
        let ci = fit.ci_b1.unwrap();
        assert!((ci.lower - (1.5 - half)).abs() < 1e-3);
        assert!((ci.upper - (1.5 + half)).abs() < 1e-3);
        assert!(ci.contains(fit.b1));
    }

    #[test]
    fn ci_requires_variance_and_valid_level() {
        let fit = ols_fit(&series("X", 2014, &[0, 0, 3]), None).unwrap();
        assert_eq!(
            fit.clone().with_confidence_interval(0.95).unwrap_err(),
            RegressError::MissingVariance
        );
        let fit = fit.with_robust_variance(HcVariant::Hc1);
        assert!(matches!(
            fit.with_confidence_interval(1.0),
            Err(RegressError::InvalidLevel(_))
        ));
    }

    #[test]
    fn normal_equations_hold() {
        let fit = ols_fit(&series("Pharmacology", 2014, &PHARMA), None).unwrap();
        let abs_sum: f64 = fit.residuals.iter().map(|e| e.abs()).sum();
        let sum: f64 = fit.residuals.iter().sum();
        let t_sum: f64 = fit.t_values().zip(&fit.residuals).map(|(t, e)| t * e).sum();
        assert!(sum.abs() < 1e-6 * abs_sum);
        assert!(t_sum.abs() < 1e-6 * abs_sum);
    }

    #[test]
    fn baseline_shift_moves_only_the_intercept() {
        let s = series("Pharmacology", 2014, &PHARMA);
        let base = ols_fit(&s, Some(2014))
            .unwrap()
            .with_robust_variance(HcVariant::Hc1);
        for k in [-3, 1, 5] {
            // Baseline moved k years forward: the intercept is evaluated
            // k years later, b0 + k * b1; everything else is unchanged.
            let shifted = ols_fit(&s, Some(2014 + k))
                .unwrap()
                .with_robust_variance(HcVariant::Hc1);
            assert_relative_eq!(
                shifted.b0,
                base.b0 + k as f64 * base.b1,
                max_relative = 1e-9
            );
            assert_relative_eq!(shifted.b1, base.b1, max_relative = 1e-9);
            assert_relative_eq!(
                shifted.robust.unwrap().se_b1,
                base.robust.unwrap().se_b1,
                max_relative = 1e-9
            );
            for (a, b) in shifted.residuals.iter().zip(&base.residuals) {
                assert_relative_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn fitted_coefficients_minimize_squared_error() {
        let s = series("Pharmacology", 2014, &PHARMA);
        let fit = ols_fit(&s, None).unwrap();
        let rss = |b0: f64, b1: f64| -> f64 {
            s.counts()
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let e = c as f64 - b0 - b1 * i as f64;
                    e * e
                })
                .sum()
        };
        let best = rss(fit.b0, fit.b1);
        for (db0, db1) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            assert!(rss(fit.b0 + db0, fit.b1 + db1) >= best);
        }
    }

    #[test]
    fn fit_all_orders_and_reports_failures() {
        let one = build_corpus(vec![series("A", 2014, &[1, 2, 3])]).unwrap();
        assert_eq!(fit_all(&one, None, HcVariant::Hc1, 0.95).unwrap().len(), 1);

        let corpus = build_corpus(vec![
            series("B", 2014, &[4, 5, 6]),
            series("A", 2014, &[1, 2, 3]),
        ])
        .unwrap();
        let fits = fit_all(&corpus, None, HcVariant::Hc1, 0.95).unwrap();
        assert_eq!(fits.len(), 2);
        assert_eq!(fits[0].series_id, "A");

        let short =
            build_corpus(vec![series("Z", 2014, &[1, 2]), series("Y", 2014, &[1, 2])]).unwrap();
        let err = fit_all(&short, None, HcVariant::Hc1, 0.95).unwrap_err();
        assert_eq!(
            err,
            RegressError::TooFewYears {
                series_id: "Y".into(),
                n: 2
            }
        );
    }

    #[test]
    fn key_figures_of_exact_lines() {
        let corpus = build_corpus(vec![
            series("A", 2014, &[10, 11, 12]),
            series("B", 2014, &[20, 22, 24]),
            series("C", 2014, &[30, 33, 36]),
        ])
        .unwrap();
        let fits = fit_all(&corpus, None, HcVariant::Hc1, 0.95).unwrap();
        let kf = fit_key_figures(&fits).unwrap();
        assert_relative_eq!(kf.slopes.mean, 2.0, max_relative = 1e-12);
        assert_relative_eq!(kf.intercepts.mean, 20.0, max_relative = 1e-12);
        assert_relative_eq!(kf.intercept_slope_r, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn key_figures_error_paths() {
        let corpus = build_corpus(vec![
            series("A", 2014, &[10, 12, 14]),
            series("B", 2014, &[20, 22, 24]),
        ])
        .unwrap();
        let fits = fit_all(&corpus, None, HcVariant::Hc1, 0.95).unwrap();
        // Identical slopes: sd 0 and correlation errors out.
        assert!(matches!(
            fit_key_figures(&fits),
            Err(RegressError::Stats(StatsError::ZeroVariance { .. }))
        ));
        assert!(matches!(
            fit_key_figures(&fits[..1]),
            Err(RegressError::TooFewFits { .. })
        ));
    }

    #[test]
    fn exact_line_fleet_has_zero_variance_intercepts() {
        let fields: Vec<FieldSeries> = (1..=5)
            .map(|k| {
                let counts: Vec<u64> = (0..4).map(|t| (10 + k * t) as u64).collect();
                series(&format!("F{k}"), 2014, &counts)
            })
            .collect();
        let corpus = build_corpus(fields).unwrap();
        let fits = fit_all(&corpus, None, HcVariant::Hc1, 0.95).unwrap();
        let kf = fit_key_figures(&fits);
        // Intercepts are all 10: the correlation is a zero-variance error.
        assert!(matches!(
            kf,
            Err(RegressError::Stats(StatsError::ZeroVariance {
                which: "xs"
            }))
        ));
        let slopes: Vec<f64> = fits.iter().map(|f| f.b1).collect();
        assert_relative_eq!(summarize(&slopes).unwrap().mean, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn exact_line_fleet_recovers_parameters_to_machine_precision() {
        let fields: Vec<FieldSeries> = (0..80)
            .map(|i| {
                let b0 = 100 + 37 * i as u64;
                let b1 = (i % 20) as u64;
                let counts: Vec<u64> = (0..7).map(|t| b0 + b1 * t).collect();
                series(&format!("F{i:03}"), 2014, &counts)
            })
            .collect();
        let corpus = build_corpus(fields).unwrap();
        let fits = fit_all(&corpus, None, HcVariant::Hc1, 0.95).unwrap();
        for (i, fit) in fits.iter().enumerate() {
            assert_relative_eq!(fit.b0, 100.0 + 37.0 * i as f64, max_relative = 1e-9);
            assert_relative_eq!(fit.b1, (i % 20) as f64, epsilon = 1e-9);
            let ci = fit.ci_b1.unwrap();
            assert_relative_eq!(ci.lower, fit.b1, epsilon = 1e-9);
            assert_relative_eq!(ci.upper, fit.b1, epsilon = 1e-9);
        }
    }

    #[test]
    fn projected_change_values() {
        let mut fit = ols_fit(&series("A", 2014, &[10, 20, 30]), None).unwrap();
        fit.b1 = 549.60;
        fit.n = 7;
        assert!((projected_change(&fit, Some(7.0)) - 3847.20).abs() < 1e-9);
        assert!((projected_change(&fit, None) - 3297.60).abs() < 1e-9);
        fit.b1 = 0.0;
        assert_eq!(projected_change(&fit, Some(7.0)), 0.0);
    }

    #[test]
    fn ranking_sorts_by_slope_then_id() {
        let mk = |id: &str, slope: f64| {
            let mut f = ols_fit(&series(id, 2014, &[1, 2, 3]), None).unwrap();
            f.b1 = slope;
            f
        };
        let ranked = rank_by_slope(vec![mk("C", 3.0), mk("B", -1.0), mk("A", 2.0)]);
        let order: Vec<&str> = ranked.fits.iter().map(|f| f.series_id.as_str()).collect();
        assert_eq!(order, ["B", "A", "C"]);

        let ranked = rank_by_slope(vec![mk("B", 1.0), mk("A", 1.0)]);
        let order: Vec<&str> = ranked.fits.iter().map(|f| f.series_id.as_str()).collect();
        assert_eq!(order, ["A", "B"]);
    }

    fn ct_fixture() -> CtCorpus {
        let parent = build_corpus(vec![series("S73", 2014, &[5000, 6000, 7000, 8000])]).unwrap();
        let terms = vec![
            CtSeries::new("S73", "Alpha", 2014, vec![100, 200, 300, 400]).unwrap(),
            CtSeries::new("S73", "Beta", 2014, vec![400, 300, 200, 100]).unwrap(),
            CtSeries::new("S73", "Gamma", 2014, vec![50, 60, 70, 400]).unwrap(),
        ];
        CtCorpus::build(terms, parent).unwrap()
    }

    #[test]
    fn drilldown_orders_ties_by_name_and_computes_percent() {
        let ct = ct_fixture();
        let d = drilldown(&ct, "S73", 2017, 3, None, HcVariant::Hc1, 0.95).unwrap();
        assert_eq!(d.parent_total, 8000);
        let names: Vec<&str> = d.rows.iter().map(|r| r.ct_name.as_str()).collect();
        // Alpha and Gamma tie at 400; Alpha wins by name, Beta trails.
        assert_eq!(names, ["Alpha", "Gamma", "Beta"]);
        assert_relative_eq!(d.rows[0].percent, 5.0, max_relative = 1e-12);
        assert_eq!(d.ranked.fits[0].series_id, "Beta");
    }

    #[test]
    fn drilldown_percent_boundary() {
        let parent = build_corpus(vec![series("S1", 2014, &[10, 10, 10])]).unwrap();
        let terms = vec![CtSeries::new("S1", "All", 2014, vec![10, 10, 10]).unwrap()];
        let ct = CtCorpus::build(terms, parent).unwrap();
        let d = drilldown(&ct, "S1", 2015, 1, None, HcVariant::Hc1, 0.95).unwrap();
        assert_relative_eq!(d.rows[0].percent, 100.0, max_relative = 1e-12);
    }

    #[test]
    fn drilldown_error_paths() {
        let ct = ct_fixture();
        assert!(matches!(
            drilldown(&ct, "S99", 2017, 3, None, HcVariant::Hc1, 0.95),
            Err(RegressError::UnknownField(_))
        ));
        assert!(matches!(
            drilldown(&ct, "S73", 2013, 3, None, HcVariant::Hc1, 0.95),
            Err(RegressError::YearOutOfRange { year: 2013, .. })
        ));
        assert!(matches!(
            drilldown(&ct, "S73", 2017, 0, None, HcVariant::Hc1, 0.95),
            Err(RegressError::InvalidTopK)
        ));
    }
}
