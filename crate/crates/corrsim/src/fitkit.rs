//! Least-squares extraction of correlated and uncorrelated error
//! strengths from mean variance trajectories, with AIC/BIC model-selection
//! scans and quantum-projection-noise bounds.

use crate::gateset::Family;
use crate::stats::VarianceModel;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("refinement failed to reach the coarse-grid optimum")]
    NonConvergence,
    #[error("RSS must be positive, got {0}")]
    InvalidRss(f64),
    #[error("trajectory is empty")]
    EmptyTrajectory,
}

/// Nonnegativity floor for log-space fitting.
const PARAM_FLOOR: f64 = 1e-12;
const GRID_LO: f64 = 1e-8;
const GRID_HI: f64 = 1e-1;
const GRID_PER_DECADE: usize = 25;

/// Two-parameter fit outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub sigma_s2: f64,
    pub sigma_l2: f64,
    pub rss: f64,
    pub n_pts: usize,
    pub kappa: usize,
}

/// One point of a fixed-`sigma_l2` likelihood scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub sigma_l2_fixed: f64,
    pub sigma_s2_refit: f64,
    pub rss: f64,
    pub aic: f64,
    pub rel_likelihood: f64,
    pub bic: f64,
    pub delta_bic: f64,
}

/// Scan with the interpolated 5%-relative-likelihood and ΔBIC = 10
/// interval endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub likelihood_interval: (f64, f64),
    pub bic_interval: (f64, f64),
}

fn rss_for(model: &VarianceModel, traj: &[f64], sigma_s2: f64, sigma_l2: f64) -> f64 {
    traj.iter()
        .enumerate()
        .map(|(i, &v)| {
            let d = v - model.eval(i + 1, sigma_s2, sigma_l2);
            d * d
        })
        .sum()
}

fn log_grid() -> Vec<f64> {
    let decades = (GRID_HI / GRID_LO).log10();
    let steps = (decades * GRID_PER_DECADE as f64).round() as usize;
    let mut grid = Vec::with_capacity(steps + 2);
    grid.push(0.0);
    for i in 0..=steps {
        grid.push(GRID_LO * 10f64.powf(i as f64 / GRID_PER_DECADE as f64));
    }
    grid
}

/// Nelder-Mead on the 2D log-parameter square, relative tolerance 1e-6.
fn nelder_mead_2d<F: Fn(f64, f64) -> f64>(f: F, start: (f64, f64)) -> (f64, f64, f64) {
    let clamp = |t: f64| t.clamp(PARAM_FLOOR.ln(), 1.0f64.ln());
    let eval = |t: &[f64; 2]| f(t[0].exp(), t[1].exp());
    let mut simplex: Vec<[f64; 2]> = vec![
        [clamp(start.0.max(PARAM_FLOOR).ln()), clamp(start.1.max(PARAM_FLOOR).ln())],
        [clamp(start.0.max(PARAM_FLOOR).ln() + 0.5), clamp(start.1.max(PARAM_FLOOR).ln())],
        [clamp(start.0.max(PARAM_FLOOR).ln()), clamp(start.1.max(PARAM_FLOOR).ln() + 0.5)],
    ];
    let mut values: Vec<f64> = simplex.iter().map(&eval).collect();
    for _ in 0..400 {
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let (best, mid, worst) = (order[0], order[1], order[2]);
        let spread = (values[worst] - values[best]).abs();
        if spread <= 1e-6 * values[best].abs().max(1e-300) {
            break;
        }
        let centroid = [
            0.5 * (simplex[best][0] + simplex[mid][0]),
            0.5 * (simplex[best][1] + simplex[mid][1]),
        ];
        let reflect = [
            clamp(2.0 * centroid[0] - simplex[worst][0]),
            clamp(2.0 * centroid[1] - simplex[worst][1]),
        ];
        let fr = eval(&reflect);
        if fr < values[best] {
            let expand = [
                clamp(3.0 * centroid[0] - 2.0 * simplex[worst][0]),
                clamp(3.0 * centroid[1] - 2.0 * simplex[worst][1]),
            ];
            let fe = eval(&expand);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[mid] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract = [
                clamp(0.5 * (centroid[0] + simplex[worst][0])),
                clamp(0.5 * (centroid[1] + simplex[worst][1])),
            ];
            let fc = eval(&contract);
            if fc < values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                for i in 0..3 {
                    if i != best {
                        simplex[i] = [
                            0.5 * (simplex[i][0] + simplex[best][0]),
                            0.5 * (simplex[i][1] + simplex[best][1]),
                        ];
                        values[i] = eval(&simplex[i]);
                    }
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best][0].exp(), simplex[best][1].exp(), values[best])
}

/// Golden-section minimization of a 1D log-parameter.
fn golden_1d<F: Fn(f64) -> f64>(f: F, center: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = (center.max(PARAM_FLOOR).ln() - 1.5).max(PARAM_FLOOR.ln());
    let mut b = (center.max(PARAM_FLOOR).ln() + 1.5).min(0.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    for _ in 0..120 {
        if (b - a).abs() < 1e-9 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d.exp());
        }
    }
    let t = 0.5 * (a + b);
    (t.exp(), f(t.exp()))
}

/// Least-squares estimate of `(sigma_s2, sigma_l2)` for a mean variance
/// trajectory (`traj[i]` is the variance after `i + 1` noise averages):
/// coarse log-grid search followed by Nelder-Mead refinement in log
/// parameters, deterministic throughout.
pub fn fit_error_strengths(
    traj: &[f64],
    j: usize,
    family: Family,
) -> Result<FitResult, FitError> {
    if traj.is_empty() {
        return Err(FitError::EmptyTrajectory);
    }
    let model = VarianceModel::new(j, family);
    let grid = log_grid();
    let candidates: Vec<(f64, f64)> = grid
        .iter()
        .flat_map(|&s| grid.iter().map(move |&l| (s, l)))
        .collect();
    let (mut best_s, mut best_l, mut best_rss) = candidates
        .par_iter()
        .map(|&(s, l)| (s, l, rss_for(&model, traj, s, l)))
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
        .unwrap();

    // local refinement: 2D when both parameters are active, 1D when one
    // sits at zero, nothing when the trajectory is identically zero
    match (best_s > 0.0, best_l > 0.0) {
        (true, true) => {
            let (s, l, r) =
                nelder_mead_2d(|s, l| rss_for(&model, traj, s, l), (best_s, best_l));
            if r <= best_rss {
                (best_s, best_l, best_rss) = (s, l, r);
            } else {
                return Err(FitError::NonConvergence);
            }
        }
        (true, false) => {
            let (s, r) = golden_1d(|s| rss_for(&model, traj, s, 0.0), best_s);
            if r <= best_rss {
                (best_s, best_rss) = (s, r);
            }
        }
        (false, true) => {
            let (l, r) = golden_1d(|l| rss_for(&model, traj, 0.0, l), best_l);
            if r <= best_rss {
                (best_l, best_rss) = (l, r);
            }
        }
        (false, false) => {}
    }
    Ok(FitResult { sigma_s2: best_s, sigma_l2: best_l, rss: best_rss, n_pts: traj.len(), kappa: 2 })
}

/// Akaike information criterion, `AIC = 2k + n ln(RSS)`.
pub fn aic(rss: f64, n_pts: usize, kappa: usize) -> Result<f64, FitError> {
    if rss <= 0.0 {
        return Err(FitError::InvalidRss(rss));
    }
    Ok(2.0 * kappa as f64 + n_pts as f64 * rss.ln())
}

/// `exp((AIC_min - AIC_i) / 2)`.
pub fn relative_likelihood(aic_i: f64, aic_min: f64) -> f64 {
    ((aic_min - aic_i) / 2.0).exp()
}

/// Bayesian information criterion, `BIC = ln(n) k + n ln(RSS/n)`.
pub fn bic(rss: f64, n_pts: usize, kappa: usize) -> Result<f64, FitError> {
    if rss <= 0.0 {
        return Err(FitError::InvalidRss(rss));
    }
    let n = n_pts as f64;
    Ok(n.ln() * kappa as f64 + n * (rss / n).ln())
}

/// Strong model violation when `ΔBIC > 10`.
pub fn bic_violation(delta_bic: f64) -> bool {
    delta_bic > 10.0
}

/// Worst-case quantum projection noise variance `p(1-p)/r`.
pub fn qpn_bound(p: f64, r: u32) -> f64 {
    p * (1.0 - p) / r as f64
}

/// Log-spaced scan grid spanning ±1.25 decades around `center`.
pub fn default_scan_grid(center: f64) -> Vec<f64> {
    let c = center.max(1e-9);
    (0..=120).map(|i| c * 10f64.powf(-1.25 + 2.5 * i as f64 / 120.0)).collect()
}

/// Interval endpoints where a Delta-information curve (0 at the optimum,
/// growing outward) crosses `threshold`. Interpolation runs on the
/// sqrt(Delta) scale, which is linear in log-x for a quadratic valley.
fn interval_crossing(
    grid: &[(f64, f64)],
    threshold: f64,
    best_idx: usize,
) -> (f64, f64) {
    let level = (-threshold).max(0.0).sqrt();
    let height = |y: f64| (-y).max(0.0).sqrt();
    let mut lo = grid[0].0;
    for i in (1..=best_idx).rev() {
        let (x1, y1) = (grid[i].0, height(grid[i].1));
        let (x0, y0) = (grid[i - 1].0, height(grid[i - 1].1));
        if (y0 > level) && (y1 <= level) {
            let t = (y0 - level) / (y0 - y1);
            lo = (x0.ln() + t * (x1.ln() - x0.ln())).exp();
            break;
        }
    }
    let mut hi = grid[grid.len() - 1].0;
    for i in best_idx..grid.len() - 1 {
        let (x0, y0) = (grid[i].0, height(grid[i].1));
        let (x1, y1) = (grid[i + 1].0, height(grid[i + 1].1));
        if (y0 <= level) && (y1 > level) {
            let t = (level - y0) / (y1 - y0);
            hi = (x0.ln() + t * (x1.ln() - x0.ln())).exp();
            break;
        }
    }
    (lo, hi)
}

/// Fixed-`sigma_l2` scan: refit `sigma_s2` at each grid value, score by
/// AIC relative likelihood and ΔBIC, and interpolate the 5%-likelihood
/// and ΔBIC = 10 interval endpoints.
pub fn likelihood_scan(
    traj: &[f64],
    j: usize,
    family: Family,
    sigma_l2_grid: &[f64],
) -> Result<ScanResult, FitError> {
    if traj.is_empty() {
        return Err(FitError::EmptyTrajectory);
    }
    let model = VarianceModel::new(j, family);
    let grid = log_grid();
    let raw: Vec<(f64, f64, f64)> = sigma_l2_grid
        .par_iter()
        .map(|&l| {
            let (mut s, mut r) = grid
                .iter()
                .map(|&s| (s, rss_for(&model, traj, s, l)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            if s > 0.0 {
                let (s2, r2) = golden_1d(|s| rss_for(&model, traj, s, l), s);
                if r2 < r {
                    (s, r) = (s2, r2);
                }
            }
            (l, s, r)
        })
        .collect();

    let n_pts = traj.len();
    let aics: Vec<f64> =
        raw.iter().map(|&(_, _, r)| aic(r, n_pts, 2)).collect::<Result<_, _>>()?;
    let bics: Vec<f64> =
        raw.iter().map(|&(_, _, r)| bic(r, n_pts, 2)).collect::<Result<_, _>>()?;
    let aic_min = aics.iter().copied().fold(f64::INFINITY, f64::min);
    let bic_min = bics.iter().copied().fold(f64::INFINITY, f64::min);
    let points: Vec<ScanPoint> = raw
        .iter()
        .zip(aics.iter().zip(&bics))
        .map(|(&(l, s, r), (&a, &b))| ScanPoint {
            sigma_l2_fixed: l,
            sigma_s2_refit: s,
            rss: r,
            aic: a,
            rel_likelihood: relative_likelihood(a, aic_min),
            bic: b,
            delta_bic: b - bic_min,
        })
        .collect();

    let best_idx = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.aic.partial_cmp(&b.1.aic).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    // both intervals interpolate the same Delta-information curve, so the
    // BIC window (threshold 10) always contains the 5% likelihood window
    // (threshold -2 ln 0.05)
    let daic: Vec<(f64, f64)> =
        points.iter().map(|p| (p.sigma_l2_fixed, -(p.aic - aic_min))).collect();
    let likelihood_interval = interval_crossing(&daic, 2.0 * 0.05f64.ln(), best_idx);
    let dbic: Vec<(f64, f64)> =
        points.iter().map(|p| (p.sigma_l2_fixed, -p.delta_bic)).collect();
    let bic_interval = interval_crossing(&dbic, -10.0, best_idx);
    Ok(ScanResult { points, likelihood_interval, bic_interval })
}
