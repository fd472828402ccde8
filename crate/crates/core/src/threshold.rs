//! Minimum constant adulticide level that brings R0 below one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{collapse_control, mosquito_viability, ControlLevel, ModelParams};
use crate::reproduction::{r0, R0Route};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
const R0_TOLERANCE: f64 = 1e-6;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub c_star: f64,
    pub r0_at_c_star: f64,
    /// Bracket (c_lo, c_hi) with R0(c_lo) > 1 > R0(c_hi).
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Control level at which the mosquito population collapses.
    pub collapse_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ControlOutcome {
    Threshold(ThresholdResult),
    /// R0 < 1 without control. `r0_uncontrolled` is absent when mosquitoes
    /// cannot persist at all.
    NoControlNeeded {
        r0_uncontrolled: Option<f64>,
    },
    /// R0 ≥ 1 over the whole viable control range.
    Unattainable {
        collapse_bound: f64,
    },
}

pub fn min_control(p: &ModelParams, tol: f64) -> Result<ControlOutcome> {
    min_control_with(p, tol, R0Route::ClosedForm)
}

/// Bisection on g(c) = R0(c) − 1 over [0, c_max], c_max being the collapse
/// bound. Stops once the bracket is no wider than `tol` and
/// |R0(c_star) − 1| < 1e-6.
pub fn min_control_with(p: &ModelParams, tol: f64, route: R0Route) -> Result<ControlOutcome> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    if mosquito_viability(p, ControlLevel::NONE) <= 0.0 {
        return Ok(ControlOutcome::NoControlNeeded { r0_uncontrolled: None });
    }
    let g = |c: f64| -> Result<f64> { Ok(r0(p, ControlLevel::new(c)?, route)? - 1.0) };
    let g0 = g(0.0)?;
    if g0 < 0.0 {
        return Ok(ControlOutcome::NoControlNeeded {
            r0_uncontrolled: Some(g0 + 1.0),
        });
    }
    let collapse_bound = collapse_control(p);
    // largest representable c below the bound with mosquitoes still viable
    let mut hi = collapse_bound;
    while hi > 0.0 && mosquito_viability(p, ControlLevel::new(hi)?) <= 0.0 {
        hi = f64::from_bits(hi.to_bits() - 1);
    }
    if hi <= 0.0 || g(hi)? >= 0.0 {
        return Ok(ControlOutcome::Unattainable { collapse_bound });
    }

    let mut lo = 0.0;
    let mut iterations = 0;
    let (c_star, r0_at_c_star) = loop {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if hi - lo <= tol && gm.abs() < R0_TOLERANCE {
            break (mid, gm + 1.0);
        }
        if iterations == MAX_BISECTIONS || mid <= lo || mid >= hi {
            break (mid, gm + 1.0);
        }
        iterations += 1;
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    };
    Ok(ControlOutcome::Threshold(ThresholdResult {
        c_star,
        r0_at_c_star,
        bracket: (lo, hi),
        iterations,
        collapse_bound,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub c: f64,
    /// `None` where 𝓜(c) ≤ 0 and the mosquito population collapses.
    pub r0: Option<f64>,
}

impl ProfilePoint {
    pub fn collapsed(&self) -> bool {
        self.r0.is_none()
    }
}

/// R0 at each control level of `grid`.
pub fn r0_profile(p: &ModelParams, grid: &[f64]) -> Result<Vec<ProfilePoint>> {
    grid.iter()
        .map(|&c| {
            let level = ControlLevel::new(c)?;
            let r0 = if mosquito_viability(p, level) > 0.0 {
                Some(r0(p, level, R0Route::ClosedForm)?)
            } else {
                None
            };
            Ok(ProfilePoint { c, r0 })
        })
        .collect()
}

/// Inclusive uniform grid from `start` to `stop` (the endpoint is kept when it
/// falls within half a step).
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidConfig(format!(
            "invalid control grid start={start} stop={stop} step={step}"
        )));
    }
    let n = ((stop - start) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}
