//! Weighted least-squares fit of a first-order fringe
//! `A(1 + V cos(φ − φ₀))` with Poisson weights.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub amplitude: f64,
    pub visibility: f64,
    /// Phase offset in [0, 2π).
    pub phase0: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
}

fn model(theta: &Vector3<f64>, phi: f64) -> f64 {
    theta[0] * (1.0 + theta[1] * (phi - theta[2]).cos())
}

fn chi2(points: &[(f64, f64)], sigmas: &[f64], theta: &Vector3<f64>) -> f64 {
    points
        .iter()
        .zip(sigmas)
        .map(|(&(phi, y), s)| ((y - model(theta, phi)) / s).powi(2))
        .sum()
}

/// Fits `(φ, count)` samples; needs at least 8 points spanning one period.
pub fn fit_fringe(points: &[(f64, f64)]) -> Result<FringeFit> {
    let n = points.len();
    if n < 8 {
        return Err(Error::InvalidArgument(format!("fringe fit needs at least 8 points, got {n}")));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    if hi - lo < TAU * (1.0 - 1.0 / n as f64) - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "phase samples span {:.3} rad, less than one period",
            hi - lo
        )));
    }
    if points.iter().any(|p| !(p.1 >= 0.0 && p.1.is_finite())) {
        return Err(Error::InvalidArgument("fringe counts must be finite and non-negative".into()));
    }
    let sigmas: Vec<f64> = points.iter().map(|p| p.1.max(1.0).sqrt()).collect();

    let (ymin, ymax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let mean = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return Err(Error::InvalidArgument("all fringe counts are zero".into()));
    }
    let (cs, sn) = points
        .iter()
        .fold((0.0, 0.0), |(c, s), p| (c + (p.1 - mean) * p.0.cos(), s + (p.1 - mean) * p.0.sin()));
    let mut theta = Vector3::new(mean, (ymax - ymin) / (ymax + ymin), sn.atan2(cs));

    let mut lambda = 1e-3;
    let mut current = chi2(points, &sigmas, &theta);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&(phi, y), s) in points.iter().zip(&sigmas) {
            let c = (phi - theta[2]).cos();
            let sn = (phi - theta[2]).sin();
            let j = Vector3::new(1.0 + theta[1] * c, theta[0] * c, theta[0] * theta[1] * sn) / *s;
            let r = (y - model(&theta, phi)) / s;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut damped = jtj;
        for i in 0..3 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
        }
        let Some(step) = damped.lu().solve(&jtr) else {
            lambda *= 10.0;
            continue;
        };
        let trial = theta + step;
        let next = chi2(points, &sigmas, &trial);
        if next <= current {
            let change = current - next;
            theta = trial;
            current = next;
            lambda = (lambda * 0.3).max(1e-12);
            if change <= 1e-12 * current.max(1e-300) || current < 1e-20 || step.norm() < 1e-14 * theta.norm() {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                // no downhill step left: at the minimum to machine precision
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::FitNonConvergence { iterations, chi2: current });
    }
    let (mut v, mut phase0) = (theta[1], theta[2]);
    if v < 0.0 {
        v = -v;
        phase0 += std::f64::consts::PI;
    }
    Ok(FringeFit {
        amplitude: theta[0],
        visibility: v.min(1.0),
        phase0: phase0.rem_euclid(TAU),
        reduced_chi2: current / (n - 3).max(1) as f64,
        iterations,
    })
}
