//! Log–log scaling of D_max against ε along a channel family.

use serde::Serialize;

use super::{compute_dmax, compute_epsilon, tradeoff_ratio, VerifyConfig};
use crate::channel::{embed_family_as_horizon, ChannelFamily, ChannelFamilySpec};
use crate::random::SeededRng;
use crate::{Error, Result};

/// Fewest certified points a fit accepts.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData { got: points.len(), need: MIN_FIT_POINTS });
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidParameter(format!("log–log fit needs positive coordinates, got ({x}, {y})")));
    }
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidParameter("log–log fit needs at least two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LogLogFit { slope, intercept, r_squared })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub param: f64,
    pub epsilon_lower: f64,
    pub epsilon_upper: f64,
    pub dmax_lower: f64,
    /// `dmax_lower² / (8·epsilon_upper)`
    pub ratio: f64,
    pub certified: bool,
    /// Certified with `ε > 0` and `D > 0`, hence part of the fit.
    pub fitted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingFit {
    pub family: ChannelFamily,
    pub dim: usize,
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Evaluates every parameter on the lifted family model and fits
/// `ln dmax_lower` against `ln epsilon_upper`.
pub fn evaluate_family(
    family: ChannelFamily,
    dim: usize,
    params: &[f64],
    config: &VerifyConfig,
    rng: &SeededRng,
) -> Result<Vec<ScalingPoint>> {
    params
        .iter()
        .enumerate()
        .map(|(k, &param)| {
            let model = embed_family_as_horizon(&ChannelFamilySpec::new(family, dim, param)?)?;
            let point_rng = rng.fork(k as u64);
            let mut diamond = config.diamond.clone();
            diamond.variational.rng = point_rng.fork(1);
            let eps = compute_epsilon(&model, config.tol, &diamond)?;
            let dmax = compute_dmax(&model, config.restarts, &point_rng.fork(2))?;
            Ok(ScalingPoint {
                param,
                epsilon_lower: eps.lower,
                epsilon_upper: eps.upper,
                dmax_lower: dmax.dmax_lower,
                ratio: tradeoff_ratio(dmax.dmax_lower, eps.upper),
                certified: eps.certified,
                fitted: eps.certified && eps.upper > 0.0 && dmax.dmax_lower > 0.0,
            })
        })
        .collect()
}

/// Family sweep plus fit. Refuses with [`Error::InsufficientData`] when
/// fewer than five points are certified with positive values.
pub fn scaling_fit(
    family: ChannelFamily,
    dim: usize,
    params: &[f64],
    config: &VerifyConfig,
    rng: &SeededRng,
) -> Result<ScalingFit> {
    let points = evaluate_family(family, dim, params, config, rng)?;
    fit_points(family, dim, points)
}

pub fn fit_points(family: ChannelFamily, dim: usize, points: Vec<ScalingPoint>) -> Result<ScalingFit> {
    let xy: Vec<(f64, f64)> = points.iter().filter(|p| p.fitted).map(|p| (p.epsilon_upper, p.dmax_lower)).collect();
    let fit = fit_loglog(&xy)?;
    Ok(ScalingFit { family, dim, points, slope: fit.slope, intercept: fit.intercept, r_squared: fit.r_squared })
}
