//! Weighted least-squares fits of fringes and gain sweeps.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analytic::{rate_shape, rate_shape_log_derivative, visibility_closed_form, FringeKind};
use crate::error::{invalid, Error, Result};

pub const DEFAULT_MAX_ITERATIONS: usize = 100;
const ALPHA_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Multiply the covariance by the reduced χ² (for weights that are only
    /// known up to scale).
    pub scale_covariance: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            scale_covariance: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub parameters: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// `√(Σ wᵢ rᵢ²)` at the reported parameters.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Residual norm after every accepted step, starting from the initial guess.
    pub history: Vec<f64>,
    pub flags: Vec<String>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.parameters[i])
    }

    pub fn stderr(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.covariance[i][i].max(0.0).sqrt())
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub phi: f64,
    pub value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub g: f64,
    pub value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub result: FitResult,
    pub visibility: f64,
    pub visibility_stderr: f64,
    /// Data without any fringe; `delta` is meaningless.
    pub flat: bool,
}

struct Outcome {
    x: DVector<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

/// Levenberg-damped Gauss–Newton on weighted residuals `r(x)` (already
/// multiplied by `√w`). `feasible` rejects steps outside the parameter box.
fn levenberg_marquardt(
    x0: DVector<f64>,
    residuals: impl Fn(&DVector<f64>) -> DVector<f64>,
    jacobian: impl Fn(&DVector<f64>) -> DMatrix<f64>,
    feasible: impl Fn(&DVector<f64>) -> bool,
    max_iterations: usize,
) -> Result<Outcome> {
    let mut x = x0;
    let mut r = residuals(&x);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("residuals are not finite at the initial guess".into()));
    }
    let mut cost = r.norm_squared();
    let mut jac = jacobian(&x);
    let mut history = vec![cost.sqrt()];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let scale = jac.norm() * r.norm();
        if cost == 0.0 || grad.amax() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let candidate = &x + &step;
            if !feasible(&candidate) {
                lambda *= 10.0;
                continue;
            }
            let r_new = residuals(&candidate);
            let cost_new = r_new.norm_squared();
            if !cost_new.is_finite() || cost_new >= cost {
                lambda *= 10.0;
                continue;
            }
            let small_step = step.norm() <= 1e-12 * (x.norm() + 1e-12);
            x = candidate;
            r = r_new;
            cost = cost_new;
            jac = jacobian(&x);
            history.push(cost.sqrt());
            lambda = (lambda / 10.0).max(1e-12);
            accepted = true;
            if small_step {
                converged = true;
            }
            break;
        }
        if converged {
            break;
        }
        if !accepted {
            // cost is flat to rounding: polish with undamped steps, then test stationarity
            for _ in 0..3 {
                let Some(step) = (jac.transpose() * &jac)
                    .cholesky()
                    .map(|ch| ch.solve(&-(jac.transpose() * &r)))
                else {
                    break;
                };
                let candidate = &x + &step;
                if !feasible(&candidate) {
                    break;
                }
                let r_new = residuals(&candidate);
                let cost_new = r_new.norm_squared();
                if !(cost_new <= cost * (1.0 + 1e-13)) {
                    break;
                }
                x = candidate;
                r = r_new;
                cost = cost_new;
                jac = jacobian(&x);
            }
            let grad = jac.transpose() * &r;
            let stationary = grad.amax() <= 1e-7 * (jac.norm() * r.norm()).max(f64::MIN_POSITIVE);
            let gauss_newton = (jac.transpose() * &jac).cholesky().map(|ch| ch.solve(&grad));
            let negligible = gauss_newton.is_some_and(|s| s.norm() <= 1e-11 * (x.norm() + 1e-11));
            converged = stationary || negligible;
            break;
        }
    }
    Ok(Outcome {
        x,
        cost,
        iterations,
        converged,
        history,
    })
}

fn covariance(jac: &DMatrix<f64>, cost: f64, n_points: usize, options: &FitOptions) -> Result<DMatrix<f64>> {
    let p = jac.ncols();
    let jtj = jac.transpose() * jac;
    let inv = jtj
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Fit("normal matrix is singular".into()))?;
    let inv = (&inv + inv.transpose()) * 0.5;
    if options.scale_covariance && n_points > p {
        Ok(inv * (cost / (n_points - p) as f64))
    } else {
        Ok(inv)
    }
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn check_weights<'a>(weights: impl Iterator<Item = &'a f64>) -> Result<()> {
    for w in weights {
        if !(*w > 0.0) || !w.is_finite() {
            return Err(invalid(format!("weights must be positive and finite, got {w}")));
        }
    }
    Ok(())
}

fn wrap_phase(delta: f64) -> f64 {
    let mut d = delta.rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

pub fn fit_fringe(points: &[FringePoint]) -> Result<FringeFit> {
    fit_fringe_with(points, &FitOptions::default())
}

/// Fits `A + B cos(2φ + δ)` with `B ≥ 0` and `δ ∈ (−π, π]`.
pub fn fit_fringe_with(points: &[FringePoint], options: &FitOptions) -> Result<FringeFit> {
    if points.len() < 5 {
        return Err(invalid("fringe fit needs at least five points"));
    }
    if points.iter().any(|p| !p.phi.is_finite() || !p.value.is_finite()) {
        return Err(invalid("fringe data must be finite"));
    }
    check_weights(points.iter().map(|p| &p.weight))?;
    let min_phi = points.iter().map(|p| p.phi).fold(f64::INFINITY, f64::min);
    let max_phi = points.iter().map(|p| p.phi).fold(f64::NEG_INFINITY, f64::max);
    let n = points.len() as f64;
    if (max_phi - min_phi) * n / (n - 1.0) < PI * (1.0 - 1e-9) {
        return Err(invalid("fringe data must span at least one period"));
    }

    let a0 = points.iter().map(|p| p.value).sum::<f64>() / n;
    let c = 2.0 / n * points.iter().map(|p| (p.value - a0) * (2.0 * p.phi).cos()).sum::<f64>();
    let s = 2.0 / n * points.iter().map(|p| (p.value - a0) * (2.0 * p.phi).sin()).sum::<f64>();
    let spread = points.iter().map(|p| (p.value - a0).abs()).fold(0.0, f64::max);

    let sqrt_w: Vec<f64> = points.iter().map(|p| p.weight.sqrt()).collect();
    if spread <= 1e-12 * a0.abs() || spread == 0.0 {
        let wsum: f64 = points.iter().map(|p| p.weight).sum();
        let a = points.iter().map(|p| p.weight * p.value).sum::<f64>() / wsum;
        let cost: f64 = points.iter().map(|p| p.weight * (p.value - a).powi(2)).sum();
        let mut var_a = 1.0 / wsum;
        if options.scale_covariance && points.len() > 1 {
            var_a *= cost / (points.len() - 1) as f64;
        }
        let result = FitResult {
            names: vec!["A".into(), "B".into(), "delta".into()],
            parameters: vec![a, 0.0, 0.0],
            covariance: vec![vec![var_a, 0.0, 0.0], vec![0.0; 3], vec![0.0; 3]],
            residual_norm: cost.sqrt(),
            converged: true,
            iterations: 0,
            history: vec![cost.sqrt()],
            flags: vec!["flat".into(), "delta_undefined".into()],
        };
        return Ok(FringeFit {
            result,
            visibility: 0.0,
            visibility_stderr: if a != 0.0 { 0.0 } else { f64::NAN },
            flat: true,
        });
    }

    let x0 = linear_fringe_guess(points).unwrap_or_else(|| DVector::from_vec(vec![a0, c.hypot(s), (-s).atan2(c)]));
    let residuals = |x: &DVector<f64>| {
        DVector::from_iterator(
            points.len(),
            points
                .iter()
                .zip(&sqrt_w)
                .map(|(p, sw)| sw * (p.value - x[0] - x[1] * (2.0 * p.phi + x[2]).cos())),
        )
    };
    let jacobian = |x: &DVector<f64>| {
        DMatrix::from_fn(points.len(), 3, |i, j| {
            let arg = 2.0 * points[i].phi + x[2];
            -sqrt_w[i]
                * match j {
                    0 => 1.0,
                    1 => arg.cos(),
                    _ => -x[1] * arg.sin(),
                }
        })
    };
    let out = levenberg_marquardt(x0, residuals, jacobian, |_| true, options.max_iterations)?;
    let (mut a, mut b, mut delta) = (out.x[0], out.x[1], out.x[2]);
    if b < 0.0 {
        b = -b;
        delta += PI;
    }
    delta = wrap_phase(delta);
    if a == 0.0 {
        a = f64::MIN_POSITIVE;
    }
    let normalized = DVector::from_vec(vec![a, b, delta]);
    let jac = jacobian(&normalized);
    let cov = covariance(&jac, out.cost, points.len(), options)?;
    let grad = DVector::from_vec(vec![-b / (a * a), 1.0 / a, 0.0]);
    let var_v = (grad.transpose() * &cov * &grad)[(0, 0)];
    let mut flags = Vec::new();
    if !out.converged {
        flags.push("iteration_cap".into());
    }
    Ok(FringeFit {
        result: FitResult {
            names: vec!["A".into(), "B".into(), "delta".into()],
            parameters: vec![a, b, delta],
            covariance: to_rows(&cov),
            residual_norm: out.cost.sqrt(),
            converged: out.converged,
            iterations: out.iterations,
            history: out.history,
            flags,
        },
        visibility: b / a,
        visibility_stderr: var_v.max(0.0).sqrt(),
        flat: false,
    })
}

/// Weighted least-squares solution of `A + C cos 2φ + S sin 2φ`, returned as
/// `(A, B, δ)`.
fn linear_fringe_guess(points: &[FringePoint]) -> Option<DVector<f64>> {
    let mut normal = DMatrix::<f64>::zeros(3, 3);
    let mut rhs = DVector::<f64>::zeros(3);
    for p in points {
        let basis = [1.0, (2.0 * p.phi).cos(), (2.0 * p.phi).sin()];
        for i in 0..3 {
            rhs[i] += p.weight * basis[i] * p.value;
            for j in 0..3 {
                normal[(i, j)] += p.weight * basis[i] * basis[j];
            }
        }
    }
    let sol = normal.cholesky()?.solve(&rhs);
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(DVector::from_vec(vec![
        sol[0],
        sol[1].hypot(sol[2]),
        (-sol[2]).atan2(sol[1]),
    ]))
}

fn check_gain_points(points: &[GainPoint], min: usize) -> Result<()> {
    if points.len() < min {
        return Err(invalid(format!("fit needs at least {min} points")));
    }
    if points
        .iter()
        .any(|p| !p.g.is_finite() || !p.value.is_finite() || p.g < 0.0)
    {
        return Err(invalid("gain data must be finite with g >= 0"));
    }
    check_weights(points.iter().map(|p| &p.weight))?;
    let mut gs: Vec<f64> = points.iter().map(|p| p.g).collect();
    gs.sort_by(f64::total_cmp);
    if gs.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("gain values must be distinct"));
    }
    Ok(())
}

pub fn fit_visibility_vs_gain(points: &[GainPoint]) -> Result<FitResult> {
    fit_visibility_vs_gain_with(points, &FitOptions::default())
}

/// Scale `v_max` of `v_max · V(sinh² g)` for same-detector pair fringes,
/// solved in closed form.
pub fn fit_visibility_vs_gain_with(points: &[GainPoint], options: &FitOptions) -> Result<FitResult> {
    check_gain_points(points, 1)?;
    let model: Vec<f64> = points
        .iter()
        .map(|p| visibility_closed_form(FringeKind::SAME_2, p.g.sinh().powi(2)))
        .collect::<Result<_>>()?;
    let sff: f64 = points.iter().zip(&model).map(|(p, f)| p.weight * f * f).sum();
    let svf: f64 = points.iter().zip(&model).map(|(p, f)| p.weight * p.value * f).sum();
    if !(sff > 0.0) {
        return Err(Error::Fit("degenerate visibility model".into()));
    }
    let v_max = svf / sff;
    let cost: f64 = points
        .iter()
        .zip(&model)
        .map(|(p, f)| p.weight * (p.value - v_max * f).powi(2))
        .sum();
    let mut var = 1.0 / sff;
    if options.scale_covariance && points.len() > 1 {
        var *= cost / (points.len() - 1) as f64;
    }
    Ok(FitResult {
        names: vec!["v_max".into()],
        parameters: vec![v_max],
        covariance: vec![vec![var]],
        residual_norm: cost.sqrt(),
        converged: true,
        iterations: 0,
        history: vec![cost.sqrt()],
        flags: Vec::new(),
    })
}

pub fn fit_rate_vs_gain(points: &[GainPoint], order: u8) -> Result<FitResult> {
    fit_rate_vs_gain_with(points, order, &FitOptions::default())
}

/// Fits `rate = σ · shape(sinh²(α g))` in log space, with `shape` the
/// order-2 or order-3 excitation-rate law and `α ∈ (0, 2]`, `σ > 0`.
pub fn fit_rate_vs_gain_with(points: &[GainPoint], order: u8, options: &FitOptions) -> Result<FitResult> {
    if order != 2 && order != 3 {
        return Err(Error::Unsupported(format!("rate fit of order {order}")));
    }
    check_gain_points(points, 3)?;
    if points.iter().any(|p| !(p.value > 0.0) || !(p.g > 0.0)) {
        return Err(invalid("rate fit needs positive rates at positive gains"));
    }
    let log_rates: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
    let weights: Vec<f64> = points.iter().map(|p| p.weight).collect();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let wsum: f64 = weights.iter().sum();
    let log_shape = |alpha: f64, g: f64| rate_shape(order, (alpha * g).sinh().powi(2)).map_or(f64::NAN, f64::ln);
    let log_shape_slope = |alpha: f64, g: f64| {
        let u = alpha * g;
        rate_shape_log_derivative(order, u.sinh().powi(2)) * 2.0 * u.sinh() * u.cosh() * g
    };
    // ln σ at fixed α is the weighted mean offset between data and law
    let log_scale = |alpha: f64| {
        points
            .iter()
            .zip(&log_rates)
            .zip(&weights)
            .map(|((p, lr), w)| w * (lr - log_shape(alpha, p.g)))
            .sum::<f64>()
            / wsum
    };

    let residuals = |x: &DVector<f64>| {
        let c = log_scale(x[0]);
        DVector::from_iterator(
            points.len(),
            points
                .iter()
                .zip(&log_rates)
                .zip(&sqrt_w)
                .map(|((p, lr), sw)| sw * (lr - log_shape(x[0], p.g) - c)),
        )
    };
    let jacobian = |x: &DVector<f64>| {
        let mean_slope = points
            .iter()
            .zip(&weights)
            .map(|(p, w)| w * log_shape_slope(x[0], p.g))
            .sum::<f64>()
            / wsum;
        DMatrix::from_fn(points.len(), 1, |i, _| {
            -sqrt_w[i] * (log_shape_slope(x[0], points[i].g) - mean_slope)
        })
    };
    let feasible = |x: &DVector<f64>| x[0] > 0.0 && x[0] <= ALPHA_MAX && log_scale(x[0]).is_finite();
    let out = levenberg_marquardt(
        DVector::from_vec(vec![1.0]),
        residuals,
        jacobian,
        feasible,
        options.max_iterations,
    )?;
    let alpha = out.x[0];
    let log_sigma = log_scale(alpha);
    let sigma = log_sigma.exp();
    let full_jac = DMatrix::from_fn(points.len(), 2, |i, j| match j {
        0 => -sqrt_w[i] * log_shape_slope(alpha, points[i].g),
        _ => -sqrt_w[i],
    });
    let cov_log = covariance(&full_jac, out.cost, points.len(), options)?;
    let t = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, sigma]);
    let cov = &t * cov_log * t.transpose();
    let mut flags = Vec::new();
    if !out.converged {
        flags.push("iteration_cap".into());
    }
    if alpha >= ALPHA_MAX * (1.0 - 1e-9) {
        flags.push("alpha_at_bound".into());
    }
    Ok(FitResult {
        names: vec!["alpha".into(), "sigma".into()],
        parameters: vec![alpha, sigma],
        covariance: to_rows(&cov),
        residual_norm: out.cost.sqrt(),
        converged: out.converged,
        iterations: out.iterations,
        history: out.history,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{excitation_rate, fringe_closed_form, RateParams};

    fn fringe_points(f: impl Fn(f64) -> f64, n: usize) -> Vec<FringePoint> {
        (0..n)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / n as f64;
                FringePoint {
                    phi,
                    value: f(phi),
                    weight: 1.0,
                }
            })
            .collect()
    }

    #[test]
    fn noiseless_same_detector_fringe() {
        let n = 1.4f64.sinh().powi(2);
        let pts = fringe_points(|p| fringe_closed_form(FringeKind::SAME_2, p, n).unwrap(), 64);
        let fit = fit_fringe(&pts).unwrap();
        assert!(fit.result.converged);
        assert!((fit.result.get("A").unwrap() - 34.6895).abs() < 1e-4);
        assert!((fit.result.get("B").unwrap() - 8.3884).abs() < 1e-4);
        assert!((fit.result.get("delta").unwrap() - PI).abs() < 1e-9);
        assert!((fit.visibility - 0.24182).abs() < 1e-5);
    }

    #[test]
    fn flat_fringe() {
        let fit = fit_fringe(&fringe_points(|_| 5.0, 16)).unwrap();
        assert!(fit.flat && fit.result.converged);
        assert_eq!(fit.visibility, 0.0);
        assert_eq!(fit.result.get("B"), Some(0.0));
    }

    #[test]
    fn negative_amplitude_is_absorbed_in_phase() {
        let pts = fringe_points(|p| 10.0 - 3.0 * (2.0 * p + 0.4).cos(), 24);
        let fit = fit_fringe(&pts).unwrap();
        assert!((fit.result.get("B").unwrap() - 3.0).abs() < 1e-10);
        assert!((fit.result.get("delta").unwrap() - (0.4 - PI)).abs() < 1e-10);
    }

    #[test]
    fn fringe_input_validation() {
        assert!(fit_fringe(&fringe_points(|p| p, 4)).is_err());
        let mut pts = fringe_points(|p| p.cos(), 8);
        pts[2].weight = 0.0;
        assert!(fit_fringe(&pts).is_err());
        let short: Vec<FringePoint> = (0..8)
            .map(|i| FringePoint {
                phi: 0.1 * i as f64,
                value: 1.0,
                weight: 1.0,
            })
            .collect();
        assert!(fit_fringe(&short).is_err());
    }

    #[test]
    fn visibility_scale_round_trip() {
        let pts: Vec<GainPoint> = [0.2, 0.5, 0.9, 1.3, 1.8, 2.5]
            .iter()
            .map(|&g| GainPoint {
                g,
                value: 0.85 * visibility_closed_form(FringeKind::SAME_2, g.sinh().powi(2)).unwrap(),
                weight: 1.0,
            })
            .collect();
        let fit = fit_visibility_vs_gain(&pts).unwrap();
        assert!((fit.parameters[0] - 0.85).abs() < 1e-12);
        let single = [GainPoint {
            g: 0.0,
            value: 0.80,
            weight: 1.0,
        }];
        assert!((fit_visibility_vs_gain(&single).unwrap().parameters[0] - 0.80).abs() < 1e-15);
        let dup = [single[0], single[0]];
        assert!(fit_visibility_vs_gain(&dup).is_err());
    }

    fn rate_points(order: u8, alpha: f64, sigma: f64, gains: &[f64]) -> Vec<GainPoint> {
        let p = RateParams::new(sigma, sigma, 1.0, 1.0).unwrap();
        gains
            .iter()
            .map(|&g| GainPoint {
                g,
                value: excitation_rate(order, (alpha * g).sinh().powi(2), &p).unwrap(),
                weight: 1.0,
            })
            .collect()
    }

    #[test]
    fn rate_round_trips() {
        let gains: Vec<f64> = (1..=12).map(|i| 0.2 * i as f64).collect();
        let fit = fit_rate_vs_gain(&rate_points(2, 0.85, 1.0, &gains), 2).unwrap();
        assert!(fit.converged);
        assert!((fit.get("alpha").unwrap() - 0.85).abs() < 1e-8);
        assert!((fit.get("sigma").unwrap() - 1.0).abs() < 1e-8);
        let fit = fit_rate_vs_gain(&rate_points(3, 1.0, 2.0, &gains), 3).unwrap();
        assert!((fit.get("alpha").unwrap() - 1.0).abs() < 1e-8);
        assert!((fit.get("sigma").unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn accepted_steps_never_increase_residual() {
        let gains: Vec<f64> = (1..=10).map(|i| 0.25 * i as f64).collect();
        let fit = fit_rate_vs_gain(&rate_points(3, 0.7, 5.0, &gains), 3).unwrap();
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.history.len() > 1);
    }

    #[test]
    fn rate_fit_rejects_bad_input() {
        let gains = [0.5, 1.0, 1.5];
        let mut pts = rate_points(2, 1.0, 1.0, &gains);
        assert!(fit_rate_vs_gain(&pts, 4).is_err());
        pts[0].value = 0.0;
        assert!(fit_rate_vs_gain(&pts, 2).is_err());
        assert!(fit_rate_vs_gain(&pts[1..], 2).is_err());
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_phase(0.5), 0.5);
    }
}
