//! True quadratic interconnector losses and their market approximations.
//!
//! Market approximations cover only the flow-dependent part `b·|f| + c·f²`.
//! The no-load term `a0` cannot be priced without on/off decisions, so it is
//! left out of clearing and charged in settlement.
//!
//! Both approximations are chords of a convex function, so they never
//! underestimate the variable loss:
//!
//! * the secant factor `gamma = b + c·p_max` meets the curve at `0` and `p_max`;
//! * the piecewise-linear model meets it at every breakpoint, and its largest
//!   gap, reached at segment midpoints, is `c·w²/4` for segment width `w`.

use serde::{Deserialize, Serialize};

use crate::model::QuadraticLossModel;

/// Default number of equal-width segments for piecewise-linear loss factors.
pub const DEFAULT_SEGMENTS: usize = 5;

/// Relative slack when checking a flow against the rating.
const RATING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LossError {
    #[error("flow {flow} MW exceeds rated flow {p_max} MW")]
    FlowOutOfRange { flow: f64, p_max: f64 },
    #[error("rated flow must be positive, got {0}")]
    InvalidRating(f64),
    #[error("segment count must be at least 1")]
    ZeroSegments,
    #[error("loss factor {0} outside [0, 1)")]
    InvalidFactor(f64),
    #[error("invalid piecewise-linear model: {0}")]
    InvalidPwl(&'static str),
}

fn check_range(flow: f64, p_max: f64) -> Result<(), LossError> {
    if !flow.is_finite() || flow.abs() > p_max * (1.0 + RATING_TOLERANCE) {
        return Err(LossError::FlowOutOfRange { flow, p_max });
    }
    Ok(())
}

/// `a0 + b·|f| + c·f²`, for `|f| ≤ p_max`.
pub fn eval_true_loss(model: &QuadraticLossModel, flow: f64) -> Result<f64, LossError> {
    check_range(flow, model.p_max)?;
    Ok(model.a0 + model.variable_loss(flow))
}

/// Flow-dependent part of the true loss, for `|f| ≤ p_max`.
pub fn eval_variable_loss(model: &QuadraticLossModel, flow: f64) -> Result<f64, LossError> {
    check_range(flow, model.p_max)?;
    Ok(model.variable_loss(flow))
}

/// Symmetric linear loss factor: `gamma·|f|` MW lost for `|f|` MW sent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearLossFactor {
    gamma: f64,
}

impl LinearLossFactor {
    pub fn new(gamma: f64) -> Result<Self, LossError> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(LossError::InvalidFactor(gamma));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eval(&self, flow: f64) -> f64 {
        self.gamma * flow.abs()
    }
}

/// Secant through the origin and the rated point of the variable loss.
pub fn linearize_secant(model: &QuadraticLossModel) -> Result<LinearLossFactor, LossError> {
    if !(model.p_max > 0.0) {
        return Err(LossError::InvalidRating(model.p_max));
    }
    LinearLossFactor::new(model.b + model.c * model.p_max)
}

/// Convex piecewise-linear loss curve, symmetric in flow direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwlLossModel {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

impl PwlLossModel {
    /// `breakpoints` start at 0 and strictly increase; one slope per segment,
    /// non-decreasing.
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self, LossError> {
        if slopes.is_empty() || breakpoints.len() != slopes.len() + 1 {
            return Err(LossError::InvalidPwl("need exactly one slope per segment"));
        }
        if breakpoints[0] != 0.0 {
            return Err(LossError::InvalidPwl("first breakpoint must be 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LossError::InvalidPwl("breakpoints must strictly increase"));
        }
        if slopes.iter().any(|s| !s.is_finite()) || slopes.windows(2).any(|w| w[1] < w[0]) {
            return Err(LossError::InvalidPwl("slopes must be finite and non-decreasing"));
        }
        Ok(Self { breakpoints, slopes })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn max_flow(&self) -> f64 {
        *self.breakpoints.last().expect("at least two breakpoints")
    }

    /// `(width, slope)` of each segment in order of increasing flow.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.slopes)
            .map(|(w, &s)| (w[1] - w[0], s))
    }

    pub fn eval(&self, flow: f64) -> Result<f64, LossError> {
        check_range(flow, self.max_flow())?;
        let f = flow.abs();
        let mut total = 0.0;
        for (w, &s) in self.breakpoints.windows(2).zip(&self.slopes) {
            if f <= w[0] {
                break;
            }
            total += s * (f.min(w[1]) - w[0]);
        }
        Ok(total)
    }
}

/// Equal-width segmentation of `[0, p_max]` with secant slopes, so the curve
/// is exact at every breakpoint.
pub fn build_pwl(model: &QuadraticLossModel, segments: usize) -> Result<PwlLossModel, LossError> {
    if segments == 0 {
        return Err(LossError::ZeroSegments);
    }
    if !(model.p_max > 0.0) {
        return Err(LossError::InvalidRating(model.p_max));
    }
    let n = segments as f64;
    let breakpoints: Vec<f64> = (0..=segments)
        .map(|k| if k == segments { model.p_max } else { model.p_max * k as f64 / n })
        .collect();
    let slopes = breakpoints
        .windows(2)
        .map(|w| model.b + model.c * (w[0] + w[1]))
        .collect();
    PwlLossModel::new(breakpoints, slopes)
}

/// Largest gap between an equal-width secant approximation and the variable
/// loss: `c·(p_max/N)²/4`.
pub fn pwl_error_bound(model: &QuadraticLossModel, segments: usize) -> f64 {
    let w = model.p_max / segments as f64;
    model.c * w * w / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> QuadraticLossModel {
        QuadraticLossModel::new(1.0, 0.01, 2e-5, 1000.0)
    }

    #[test]
    fn true_loss_examples() {
        assert!((eval_true_loss(&model(), 500.0).unwrap() - 11.0).abs() < 1e-12);
        assert!((eval_true_loss(&model(), -500.0).unwrap() - 11.0).abs() < 1e-12);
        assert_eq!(eval_true_loss(&model(), 0.0).unwrap(), 1.0);
        assert!(matches!(
            eval_true_loss(&model(), 1000.5),
            Err(LossError::FlowOutOfRange { .. })
        ));
    }

    #[test]
    fn secant_examples() {
        assert!((linearize_secant(&model()).unwrap().gamma() - 0.03).abs() < 1e-15);
        let lossless = QuadraticLossModel::lossless(700.0);
        assert_eq!(linearize_secant(&lossless).unwrap().gamma(), 0.0);
        assert!(linearize_secant(&QuadraticLossModel::lossless(0.0)).is_err());
    }

    #[test]
    fn secant_ordering_follows_lines() {
        let lines = [
            QuadraticLossModel::new(0.0, 0.004, 1e-5, 700.0),
            QuadraticLossModel::new(0.0, 0.006, 1e-5, 1000.0),
            QuadraticLossModel::new(0.0, 0.002, 4e-5, 1600.0),
        ];
        let gammas: Vec<f64> = lines.iter().map(|m| linearize_secant(m).unwrap().gamma()).collect();
        let direct: Vec<f64> = lines.iter().map(|m| m.variable_loss(m.p_max) / m.p_max).collect();
        for (g, d) in gammas.iter().zip(&direct) {
            assert!((g - d).abs() < 1e-15);
        }
        assert!(gammas.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn two_segment_example() {
        let m = QuadraticLossModel::new(0.0, 0.01, 2e-5, 1000.0);
        let pwl = build_pwl(&m, 2).unwrap();
        assert_eq!(pwl.breakpoints(), &[0.0, 500.0, 1000.0]);
        assert!((pwl.slopes()[0] - 0.02).abs() < 1e-15);
        assert!((pwl.slopes()[1] - 0.04).abs() < 1e-15);
        assert!((pwl.eval(750.0).unwrap() - 20.0).abs() < 1e-12);
        assert!((m.variable_loss(750.0) - 18.75).abs() < 1e-12);
        assert_eq!(pwl.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_segment_matches_secant() {
        let pwl = build_pwl(&model(), 1).unwrap();
        assert_eq!(pwl.slopes().len(), 1);
        assert!((pwl.slopes()[0] - linearize_secant(&model()).unwrap().gamma()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(build_pwl(&model(), 0), Err(LossError::ZeroSegments));
        assert!(PwlLossModel::new(vec![0.0, 1.0], vec![0.2, 0.1]).is_err());
        assert!(PwlLossModel::new(vec![0.0, 2.0, 1.0], vec![0.1, 0.2]).is_err());
        assert!(PwlLossModel::new(vec![0.5, 1.0], vec![0.1]).is_err());
        assert!(LinearLossFactor::new(1.0).is_err());
        let pwl = build_pwl(&model(), 3).unwrap();
        assert!(pwl.eval(-1001.0).is_err());
    }

    proptest! {
        #[test]
        fn pwl_is_even_convex_and_exact_at_breakpoints(
            b in 0.0..0.02f64,
            c in 0.0..5e-5f64,
            p_max in 100.0..3000.0f64,
            n in 1usize..12,
            frac in 0.0..1.0f64,
        ) {
            let m = QuadraticLossModel::new(0.0, b, c, p_max);
            let pwl = build_pwl(&m, n).unwrap();
            prop_assert!(pwl.slopes().windows(2).all(|w| w[0] <= w[1]));
            for &x in pwl.breakpoints() {
                prop_assert!((pwl.eval(x).unwrap() - m.variable_loss(x)).abs() <= 1e-9);
            }
            let f = frac * p_max;
            prop_assert_eq!(pwl.eval(f).unwrap(), pwl.eval(-f).unwrap());
            let gap = pwl.eval(f).unwrap() - m.variable_loss(f);
            prop_assert!(gap >= -1e-9);
            prop_assert!(gap <= pwl_error_bound(&m, n) + 1e-9);
        }
    }
}
