//! SNR sweeps of both outage estimators over one shared channel stream.

use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::exponents::{empirical_slope, SlopeFit};
use crate::model::{db_to_linear, Scenario};
use crate::outage::{tally, OutageEstimate};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub informed: OutageEstimate,
    pub separation: Option<OutageEstimate>,
    pub wall_time_seconds: f64,
}

impl SweepRow {
    fn same_payload(&self, other: &SweepRow) -> bool {
        self.snr_db.to_bits() == other.snr_db.to_bits()
            && self.informed == other.informed
            && self.separation == other.separation
    }
}

/// Slope fitted over rows whose SNR lies inside `[low_db, high_db]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub fit: SlopeFit,
    pub low_db: f64,
    pub high_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub rows: Vec<SweepRow>,
    pub slope_informed: Option<SlopeEstimate>,
    pub slope_separation: Option<SlopeEstimate>,
}

impl SweepResult {
    /// Equality ignoring wall-clock timings.
    pub fn same_payload(&self, other: &SweepResult) -> bool {
        self.scenario == other.scenario
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.same_payload(b))
            && self.slope_informed == other.slope_informed
            && self.slope_separation == other.slope_separation
    }
}

/// Runs both estimators at every grid point on a pool of `workers` threads.
/// The result does not depend on `workers` apart from the timings.
pub fn run_sweep(scenario: &Scenario, workers: usize) -> Result<SweepResult> {
    if workers == 0 {
        return invalid("workers", "must be at least 1");
    }
    scenario.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter {
            name: "workers",
            reason: e.to_string(),
        })?;

    let mut rows = Vec::with_capacity(scenario.snr_grid_db.len());
    for &snr_db in &scenario.snr_grid_db {
        let started = Instant::now();
        let at = |source: Error| Error::AtSnr {
            snr_db,
            source: Box::new(source),
        };
        let counts = pool
            .install(|| tally(scenario, db_to_linear(snr_db)))
            .map_err(at)?;
        let informed =
            OutageEstimate::from_counts(counts.informed, counts.trials, scenario.confidence)
                .map_err(at)?;
        let separation = counts
            .separation
            .map(|c| OutageEstimate::from_counts(c, counts.trials, scenario.confidence))
            .transpose()
            .map_err(at)?;
        rows.push(SweepRow {
            snr_db,
            informed,
            separation,
            wall_time_seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok(SweepResult {
        scenario: scenario.clone(),
        rows,
        slope_informed: None,
        slope_separation: None,
    })
}

fn fit_window<'a>(
    rows: impl Iterator<Item = (f64, &'a OutageEstimate)>,
    low_db: f64,
    high_db: f64,
) -> Result<Option<SlopeEstimate>> {
    let points: Vec<(f64, f64)> = rows
        .filter(|(db, est)| *db >= low_db && *db <= high_db && est.p_hat > 0.0)
        .map(|(db, est)| (db_to_linear(db), est.p_hat))
        .collect();
    if points.len() < 2 {
        return Ok(None);
    }
    match empirical_slope(&points) {
        Ok(fit) => Ok(Some(SlopeEstimate {
            fit,
            low_db,
            high_db,
        })),
        Err(Error::DegenerateRegression(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Fits the high-SNR slope of each estimator over rows in `window_db`.
///
/// A series is left without a slope when fewer than two of its rows in the
/// window have a nonzero estimate; if neither series qualifies this fails.
pub fn attach_slopes(mut result: SweepResult, window_db: (f64, f64)) -> Result<SweepResult> {
    let (low_db, high_db) = window_db;
    if !(low_db <= high_db) {
        return invalid(
            "slope window",
            format!("low end {low_db} dB exceeds high end {high_db} dB"),
        );
    }
    let informed = fit_window(
        result.rows.iter().map(|r| (r.snr_db, &r.informed)),
        low_db,
        high_db,
    )?;
    let separation = fit_window(
        result
            .rows
            .iter()
            .filter_map(|r| r.separation.as_ref().map(|s| (r.snr_db, s))),
        low_db,
        high_db,
    )?;
    if informed.is_none() && separation.is_none() {
        return Err(Error::InsufficientRows { low_db, high_db });
    }
    result.slope_informed = informed;
    result.slope_separation = separation;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelInput, DistortionSpec, SourceModel, SystemConfig};
    use crate::outage::binomial_ci;

    fn scenario(grid: Vec<f64>, trials: u64) -> Scenario {
        Scenario::new(
            SystemConfig::new(1, 2, 1).unwrap(),
            ChannelInput::Gaussian,
            SourceModel::new(1.0).unwrap(),
            DistortionSpec::new(0.25, 0.5).unwrap(),
            grid,
            trials,
            11,
        )
        .unwrap()
    }

    fn synthetic(exponent: i32, rows_db: &[f64]) -> SweepResult {
        let rows = rows_db
            .iter()
            .map(|&db| {
                let trials = 1u64 << 40;
                let p = db_to_linear(db).powi(-exponent);
                let count = (p * trials as f64).round() as u64;
                let (ci_low, ci_high) = binomial_ci(count, trials, 0.95).unwrap();
                SweepRow {
                    snr_db: db,
                    informed: OutageEstimate {
                        p_hat: p,
                        ci_low,
                        ci_high,
                        trials,
                        outage_count: count,
                    },
                    separation: None,
                    wall_time_seconds: 0.0,
                }
            })
            .collect();
        SweepResult {
            scenario: scenario(rows_db.to_vec(), 1),
            rows,
            slope_informed: None,
            slope_separation: None,
        }
    }

    #[test]
    fn synthetic_power_law_slope() {
        let result = attach_slopes(synthetic(8, &[0.0, 2.0, 4.0, 6.0]), (0.0, 6.0)).unwrap();
        let slope = result.slope_informed.unwrap();
        assert!((slope.fit.slope - 8.0).abs() < 1e-9);
        assert_eq!(slope.fit.points, 4);
        assert!(result.slope_separation.is_none());
    }

    #[test]
    fn empty_window_is_an_error() {
        let result = synthetic(2, &[0.0, 2.0, 4.0]);
        assert!(matches!(
            attach_slopes(result.clone(), (10.0, 20.0)),
            Err(Error::InsufficientRows { .. })
        ));
        assert!(attach_slopes(result, (5.0, 1.0)).is_err());
    }

    #[test]
    fn worker_count_does_not_change_payload() {
        let s = scenario(vec![0.0, 5.0, 10.0], 3001)
            .with_coding_rate(1.2)
            .unwrap();
        let one = run_sweep(&s, 1).unwrap();
        let many = run_sweep(&s, 6).unwrap();
        assert!(one.same_payload(&many));
        assert_eq!(one.rows.len(), 3);
    }

    #[test]
    fn optimal_rate_rows_match() {
        let s = scenario(vec![0.0, 4.0, 8.0, 12.0], 4000)
            .with_optimal_rate()
            .unwrap();
        let result = run_sweep(&s, 4).unwrap();
        for row in &result.rows {
            assert_eq!(
                row.informed.outage_count,
                row.separation.unwrap().outage_count
            );
        }
    }

    #[test]
    fn always_met_regime_gives_zero_column() {
        let mut s = scenario(vec![0.0, 10.0], 500)
            .with_coding_rate(2.0)
            .unwrap();
        s.distortion = DistortionSpec::new(0.9, 0.4).unwrap();
        let result = run_sweep(&s, 2).unwrap();
        assert!(result
            .rows
            .iter()
            .all(|r| r.separation.unwrap().outage_count == 0));
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(run_sweep(&scenario(vec![0.0], 10), 0).is_err());
    }
}
