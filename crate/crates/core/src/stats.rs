//! Descriptive summaries, Pearson correlations and ranking.
//!
//! Conventions: population standard deviation (divide by `n`), and quantiles
//! by linear interpolation between order statistics at 1-based position
//! `(n - 1) q + 1`.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::pipeline::TerritoryReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no values to summarize")]
    Empty,
    #[error("value {0} is not finite")]
    NonFinite(f64),
    #[error("need at least two columns, got {0}")]
    TooFewColumns(usize),
    #[error("need at least three rows, got {0}")]
    TooFewRows(usize),
    #[error("column `{column}` has {found} values, expected {expected}")]
    Ragged {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("correlation undefined: column `{0}` is constant")]
    ConstantColumn(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// `sd / mean`; `None` when the mean is zero.
    pub cv: Option<f64>,
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn descriptive_summary(values: &[f64]) -> Result<DescriptiveSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(bad));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let sd = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let cv = (mean != 0.0).then(|| sd / mean);
    Ok(DescriptiveSummary {
        n,
        mean,
        sd,
        cv,
        min: sorted[0],
        p25: quantile(&sorted, 0.25),
        p50: quantile(&sorted, 0.5),
        p75: quantile(&sorted, 0.75),
        max: sorted[n - 1],
    })
}

/// Pearson correlation of two equal-length samples.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }
}

/// Pairwise Pearson correlations of named columns.
pub fn correlation_matrix(columns: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix, StatsError> {
    if columns.len() < 2 {
        return Err(StatsError::TooFewColumns(columns.len()));
    }
    let n = columns[0].1.len();
    if n < 3 {
        return Err(StatsError::TooFewRows(n));
    }
    for (name, col) in columns {
        if col.len() != n {
            return Err(StatsError::Ragged {
                column: name.clone(),
                expected: n,
                found: col.len(),
            });
        }
        if let Some(&bad) = col.iter().find(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(bad));
        }
        if col.iter().all(|v| *v == col[0]) {
            return Err(StatsError::ConstantColumn(name.clone()));
        }
    }
    let k = columns.len();
    let mut values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in 0..i {
            let r = pearson(&columns[i].1, &columns[j].1)
                .ok_or_else(|| StatsError::ConstantColumn(columns[i].0.clone()))?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        labels: columns.iter().map(|c| c.0.clone()).collect(),
        values,
    })
}

/// Reports ordered by descending index, ties broken by territory name.
pub fn rank_table(reports: &[TerritoryReport]) -> Vec<&TerritoryReport> {
    let mut rows: Vec<&TerritoryReport> = reports.iter().collect();
    rows.sort_by(|a, b| match b.index.total_cmp(&a.index) {
        Ordering::Equal => a.territory.cmp(&b.territory),
        other => other,
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(name: &str, index: f64) -> TerritoryReport {
        TerritoryReport {
            territory: name.into(),
            indicators: vec![],
            subdomains: vec![],
            domains: vec![],
            index,
        }
    }

    #[test]
    fn summary_examples() {
        let s = descriptive_summary(&[4.0, 4.0, 4.0]).unwrap();
        assert_eq!((s.mean, s.sd, s.cv), (4.0, 0.0, Some(0.0)));
        assert_eq!((s.min, s.p25, s.p50, s.p75, s.max), (4.0, 4.0, 4.0, 4.0, 4.0));

        let s = descriptive_summary(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((s.p25, s.p50, s.p75), (2.0, 3.0, 4.0));
        assert!((s.sd - 2f64.sqrt()).abs() < 1e-15);

        let s = descriptive_summary(&[1.0, 2.0]).unwrap();
        assert_eq!((s.p25, s.p50, s.p75), (1.25, 1.5, 1.75));

        assert_eq!(descriptive_summary(&[]), Err(StatsError::Empty));
        assert_eq!(descriptive_summary(&[-1.0, 1.0]).unwrap().cv, None);
    }

    #[test]
    fn correlation_examples() {
        let x = vec![1.0, 2.0, 4.0, 7.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let m = correlation_matrix(&[("x".into(), x.clone()), ("y".into(), x.clone()), ("z".into(), neg)]).unwrap();
        assert!((m.get("x", "y").unwrap() - 1.0).abs() < 1e-12);
        assert!((m.get("x", "z").unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(m.get("z", "z"), Some(1.0));

        let err = correlation_matrix(&[("x".into(), x.clone()), ("c".into(), vec![2.0; 4])]);
        assert_eq!(err, Err(StatsError::ConstantColumn("c".into())));
        assert!(matches!(
            correlation_matrix(&[("x".into(), x.clone()), ("s".into(), vec![1.0, 2.0])]),
            Err(StatsError::Ragged { .. })
        ));
        assert_eq!(
            correlation_matrix(&[("x".into(), x)]),
            Err(StatsError::TooFewColumns(1))
        );
    }

    #[test]
    fn ranking_examples() {
        let reports = vec![report("B", 50.0), report("C", 70.0), report("A", 50.0)];
        let names: Vec<_> = rank_table(&reports).iter().map(|r| r.territory.as_str()).collect();
        assert_eq!(names, ["C", "A", "B"]);
        let single = vec![report("Only", 1.0)];
        assert_eq!(rank_table(&single).len(), 1);
    }

    proptest! {
        #[test]
        fn summary_is_permutation_invariant(mut xs in prop::collection::vec(-1e3f64..1e3, 1..30), seed in any::<u64>()) {
            let a = descriptive_summary(&xs).unwrap();
            let k = (seed as usize) % xs.len();
            xs.rotate_left(k);
            xs.reverse();
            let b = descriptive_summary(&xs).unwrap();
            prop_assert!((a.mean - b.mean).abs() <= 1e-9);
            prop_assert!((a.sd - b.sd).abs() <= 1e-9);
            prop_assert_eq!((a.min, a.p25, a.p50, a.p75, a.max), (b.min, b.p25, b.p50, b.p75, b.max));
        }

        #[test]
        fn summary_scales(xs in prop::collection::vec(1.0f64..1e3, 2..30), lambda in 0.1f64..10.0) {
            let a = descriptive_summary(&xs).unwrap();
            let scaled: Vec<f64> = xs.iter().map(|v| v * lambda).collect();
            let b = descriptive_summary(&scaled).unwrap();
            let tol = 1e-9 * lambda * 1e3;
            for (u, v) in [(a.mean, b.mean), (a.sd, b.sd), (a.min, b.min), (a.p25, b.p25), (a.p50, b.p50), (a.p75, b.p75), (a.max, b.max)] {
                prop_assert!((u * lambda - v).abs() <= tol);
            }
            prop_assert!((a.cv.unwrap() - b.cv.unwrap()).abs() <= 1e-9);
            prop_assert!(a.min <= a.p25 && a.p25 <= a.p50 && a.p50 <= a.p75 && a.p75 <= a.max);
        }

        #[test]
        fn correlation_is_affine_invariant(
            x in prop::collection::vec(-100.0f64..100.0, 5..20),
            y_noise in prop::collection::vec(-100.0f64..100.0, 20),
            scale in 0.1f64..10.0, shift in -50.0f64..50.0,
        ) {
            let y: Vec<f64> = y_noise[..x.len()].to_vec();
            let r = pearson(&x, &y);
            let x2: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
            let r2 = pearson(&x2, &y);
            if let (Some(a), Some(b)) = (r, r2) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }

        #[test]
        fn ranking_is_total_and_stable(idx in prop::collection::vec(0u8..5, 1..12)) {
            let reports: Vec<TerritoryReport> = idx.iter().enumerate().map(|(i, v)| report(&format!("T{i:02}"), *v as f64)).collect();
            let once: Vec<_> = rank_table(&reports).iter().map(|r| r.territory.clone()).collect();
            let mut rev = reports.clone();
            rev.reverse();
            let again: Vec<_> = rank_table(&rev).iter().map(|r| r.territory.clone()).collect();
            prop_assert_eq!(&once, &again);
            for w in rank_table(&reports).windows(2) {
                prop_assert!(w[0].index > w[1].index || (w[0].index == w[1].index && w[0].territory < w[1].territory));
            }
        }
    }
}
