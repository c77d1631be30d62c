//! Scenario descriptions and the per-point result rows they produce.

use ramsey_device::{DeviceParams, ShotMode};

use crate::error::{HarnessError, Result};

/// What a run sweeps over.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    /// Analytic-engine sweep over conditional phases at fixed coherence.
    IdealSweep { c0: f64, betas: Vec<f64> },
    /// Device pipeline over conditional phases.
    BetaSweep { betas: Vec<f64> },
    /// Device pipeline at fixed conditional phase over detector-preparation
    /// delays (seconds).
    DelaySweep { beta: f64, delays: Vec<f64> },
}

/// A full sweep request.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub theta_points: usize,
    pub noise: bool,
    pub shots: ShotMode,
    pub seed: u64,
    pub device: DeviceParams,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.theta_points < 8 {
            return Err(HarnessError::Config(format!(
                "fitted sweeps need at least 8 phase points, got {}",
                self.theta_points
            )));
        }
        self.device.validate()?;
        match &self.kind {
            ScenarioKind::IdealSweep { c0, betas } => {
                if !(0.0..=1.0).contains(c0) {
                    return Err(HarnessError::Config(format!("c0 = {c0} outside [0, 1]")));
                }
                if betas.is_empty() {
                    return Err(HarnessError::Config("empty beta list".into()));
                }
            }
            ScenarioKind::BetaSweep { betas } => {
                if betas.is_empty() {
                    return Err(HarnessError::Config("empty beta list".into()));
                }
                for &b in betas {
                    if !(b > 0.0 && b <= std::f64::consts::PI) {
                        return Err(HarnessError::Config(format!(
                            "conditional phase {b} outside (0, pi]"
                        )));
                    }
                }
            }
            ScenarioKind::DelaySweep { beta, delays } => {
                if !(*beta > 0.0 && *beta <= std::f64::consts::PI) {
                    return Err(HarnessError::Config(format!(
                        "conditional phase {beta} outside (0, pi]"
                    )));
                }
                if delays.is_empty() || delays.iter().any(|&d| d < 0.0 || !d.is_finite()) {
                    return Err(HarnessError::Config("delays must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    /// Uniform phase grid over one full period, endpoints included.
    pub fn theta_grid(&self) -> Vec<f64> {
        let n = self.theta_points;
        (0..n)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64)
            .collect()
    }
}

/// One sweep point: the control value (conditional phase in radians, or
/// delay in microseconds) and the four complementarity quantities, plus the
/// equality diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub control: f64,
    pub visibility: f64,
    pub concurrence: f64,
    pub distinguishability: f64,
    pub c0: f64,
    /// E^2 + V^2 - C0^2.
    pub residual: f64,
    /// sqrt(E^2 + V^2).
    pub quadrature_sum: f64,
}

/// Small headroom above 1 for finite-shot estimates.
const ROW_CEILING: f64 = 1.05;

impl SweepRow {
    pub fn assemble(
        control: f64,
        visibility: f64,
        concurrence: f64,
        distinguishability: f64,
        c0: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("visibility", visibility),
            ("concurrence", concurrence),
            ("distinguishability", distinguishability),
            ("c0", c0),
        ] {
            if !(0.0..=ROW_CEILING).contains(&v) || !v.is_finite() {
                return Err(HarnessError::NumericalConsistency(format!(
                    "{name} = {v} escapes [0, {ROW_CEILING}]"
                )));
            }
        }
        let residual = concurrence * concurrence + visibility * visibility - c0 * c0;
        let quadrature_sum = (concurrence * concurrence + visibility * visibility).sqrt();
        Ok(Self {
            control,
            visibility,
            concurrence,
            distinguishability,
            c0,
            residual,
            quadrature_sum,
        })
    }
}

/// Per-theta fringe samples attached to one sweep row.
#[derive(Debug, Clone)]
pub struct FringeTrace {
    pub control: f64,
    pub thetas: Vec<f64>,
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
}
