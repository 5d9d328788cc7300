//! Synthetic balanced panels with known linear ground truth, plus Monte
//! Carlo coverage experiments for the slope intervals.
//!
//! Generation is fully determined by the seed: intercept and slope are
//! drawn uniformly per field, Gaussian noise comes from Box-Muller over
//! the same splitmix64 stream, counts are rounded to integers and
//! clamped at zero.

use crate::panel::{build_corpus, Corpus, FieldSeries, Year};
use crate::regress::{fit_all, HcVariant, RegressError};
use crate::rng::SplitMix64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Regress(#[from] RegressError),
}

/// Parameters of a synthetic panel.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_fields: usize,
    pub first_year: Year,
    pub n_years: usize,
    pub intercept_range: (f64, f64),
    pub slope_range: (f64, f64),
    pub noise_sd: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.n_fields == 0 {
            return Err(SynthError::InvalidSpec(
                "n_fields must be at least 1".into(),
            ));
        }
        if self.n_fields > 9999 {
            return Err(SynthError::InvalidSpec(
                "n_fields is capped at 9999 (field ids are F0000..F9998)".into(),
            ));
        }
        if self.n_years < 3 {
            return Err(SynthError::InvalidSpec("n_years must be at least 3".into()));
        }
        if self.intercept_range.0 > self.intercept_range.1 {
            return Err(SynthError::InvalidSpec(
                "intercept range is reversed".into(),
            ));
        }
        if self.slope_range.0 > self.slope_range.1 {
            return Err(SynthError::InvalidSpec("slope range is reversed".into()));
        }
        if self.noise_sd.is_nan() || self.noise_sd < 0.0 {
            return Err(SynthError::InvalidSpec("noise_sd must be >= 0".into()));
        }
        Ok(())
    }
}

/// True per-field coefficients behind a generated panel.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTruth {
    pub field_id: String,
    pub b0: f64,
    pub b1: f64,
    /// How many year cells were clamped to zero.
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub fields: Vec<FieldTruth>,
}

const SECTIONS: [&str; 5] = ["BIO", "ORG", "MAC", "APP", "PIA"];

/// Generates a balanced panel with known coefficients.
///
/// Per field, in id order: draw b0, then b1, then one normal per year
/// (when `noise_sd > 0`); `count = max(0, round(b0 + b1 t + eps))`.
pub fn generate(spec: &SyntheticSpec) -> Result<(Corpus, GroundTruth), SynthError> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let mut series = Vec::with_capacity(spec.n_fields);
    let mut truth = Vec::with_capacity(spec.n_fields);
    for i in 0..spec.n_fields {
        let field_id = format!("F{i:04}");
        let b0 = rng.uniform(spec.intercept_range.0, spec.intercept_range.1);
        let b1 = rng.uniform(spec.slope_range.0, spec.slope_range.1);
        let mut clamped = 0;
        let counts: Vec<u64> = (0..spec.n_years)
            .map(|t| {
                let noise = if spec.noise_sd > 0.0 {
                    rng.next_normal() * spec.noise_sd
                } else {
                    0.0
                };
                let value = (b0 + b1 * t as f64 + noise).round();
                if value < 0.0 {
                    clamped += 1;
                    0
                } else {
                    value as u64
                }
            })
            .collect();
        series.push(
            FieldSeries::new(
                &field_id,
                format!("Synthetic field {i}"),
                SECTIONS[i % SECTIONS.len()],
                spec.first_year,
                counts,
            )
            .expect("synthetic series is valid"),
        );
        truth.push(FieldTruth {
            field_id,
            b0,
            b1,
            clamped,
        });
    }
    let corpus = build_corpus(series).expect("synthetic panel is balanced");
    Ok((corpus, GroundTruth { fields: truth }))
}

/// Fraction of (field, trial) slope intervals that cover the true slope.
///
/// Trial `i` regenerates the panel with seed `spec.seed + i`, fits every
/// field with the given variant at the given level, and checks each
/// interval against the generating slope.
pub fn coverage_experiment(
    spec: &SyntheticSpec,
    trials: usize,
    level: f64,
    variant: HcVariant,
) -> Result<f64, SynthError> {
    spec.validate()?;
    if spec.noise_sd <= 0.0 {
        return Err(SynthError::InvalidSpec(
            "coverage requires noise_sd > 0".into(),
        ));
    }
    if trials < 100 {
        return Err(SynthError::InvalidSpec("need at least 100 trials".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(SynthError::InvalidSpec(
            "level must be strictly between 0 and 1".into(),
        ));
    }
    let mut covered = 0usize;
    let mut total = 0usize;
    for trial in 0..trials {
        let mut trial_spec = spec.clone();
        trial_spec.seed = spec.seed.wrapping_add(trial as u64);
        let (corpus, truth) = generate(&trial_spec)?;
        let fits = fit_all(&corpus, None, variant, level)?;
        for (fit, t) in fits.iter().zip(&truth.fields) {
            debug_assert_eq!(fit.series_id, t.field_id);
            let ci = fit.ci_b1.expect("fit_all attaches intervals");
            if ci.contains(t.b1) {
                covered += 1;
            }
            total += 1;
        }
    }
    Ok(covered as f64 / total as f64)
}
