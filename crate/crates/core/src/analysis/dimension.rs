//! Closed-form upper bound on the dimension of the maximal attractor, the
//! scale choice behind it, and the empirical box-counting dimension.

use serde::{Deserialize, Serialize};

use super::deviation::{large_deviation_beta, LargeDeviation};
use super::fit::linear_fit;
use crate::error::{Error, Result};
use crate::fiber::blend::log_lipschitz_mean;
use crate::skew::{SkewSystem, SliceCover};

/// `d + 2 + α·max(d log L, d log ν, −β) / (log L̂ + α log λ − log ν)`.
pub fn dimension_bound(
    alpha: f64,
    lambda: f64,
    l_hat: f64,
    l: f64,
    nu: f64,
    beta: f64,
    d: usize,
) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::invalid("nu", format!("{nu} is not in (0, 1)")));
    }
    if !(l > 0.0 && l < 1.0) {
        return Err(Error::invalid("L", format!("{l} is not in (0, 1)")));
    }
    if !(beta > 0.0) {
        return Err(Error::invalid("beta", format!("{beta} is not positive")));
    }
    if !(alpha > 0.0 && lambda > 1.0 && l_hat > 0.0) {
        return Err(Error::invalid(
            "alpha/lambda/L_hat",
            "must be positive with λ > 1",
        ));
    }
    let denom = l_hat.ln() + alpha * lambda.ln() - nu.ln();
    if !(denom > 0.0) {
        return Err(Error::Hypothesis(format!(
            "denominator log L̂ + α log λ − log ν = {denom} is not positive"
        )));
    }
    let df = d as f64;
    let top = (df * l.ln()).max(df * nu.ln()).max(-beta);
    let bound = df + 2.0 + alpha * top / denom;
    if !(bound < df + 2.0) {
        return Err(Error::Hypothesis(format!("bound {bound} is not below d+2")));
    }
    Ok(bound)
}

/// `δ = (ν / (L̂ λ^α))^{n/α}`.
pub fn choose_delta(nu: f64, l_hat: f64, lambda: f64, alpha: f64, n: usize) -> f64 {
    (nu / (l_hat * lambda.powf(alpha))).powf(n as f64 / alpha)
}

/// Geometric-sum constant of the plaque-spread estimate:
/// `C_H/(L̂−1)` for `L̂ > 1`, `C_H/(1−L̂)` for `L̂ < 1`, `n·C_H` for `L̂ = 1`.
pub fn plaque_spread_constant(c_h: f64, l_hat: f64, n: usize) -> f64 {
    if l_hat > 1.0 {
        c_h / (l_hat - 1.0)
    } else if l_hat < 1.0 {
        c_h / (1.0 - l_hat)
    } else {
        n as f64 * c_h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCount {
    /// `(δ, N(δ))`.
    pub counts: Vec<(f64, u64)>,
    /// Least-squares slope of `log N` against `−log δ`.
    pub empirical_dim: f64,
    /// Fewer than 10× as many boxes at the finest scale as at the coarsest.
    pub sparse: bool,
}

/// Occupied `δ`-boxes of `T² × [−1,1]^d` over the inner point clouds.
pub fn box_count(sample: &[SliceCover], deltas: &[f64]) -> Result<BoxCount> {
    if deltas.len() < 3 {
        return Err(Error::invalid("deltas", "need at least 3 scales"));
    }
    let lo = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || hi / lo < 4.0 - 1e-12 {
        return Err(Error::invalid(
            "deltas",
            "scales must be positive and span ≥ 2 octaves",
        ));
    }
    let mut counts = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let cells_per_unit = (1.0 / delta).ceil() as i64;
        if cells_per_unit > 1 << 20 {
            return Err(Error::invalid("deltas", "scale too fine"));
        }
        let mut keys: Vec<Vec<i64>> = Vec::new();
        for c in sample {
            let bu = (c.base.u / delta).floor() as i64;
            let bv = (c.base.v / delta).floor() as i64;
            for p in &c.inner {
                let mut k = Vec::with_capacity(2 + p.len());
                k.push(bu);
                k.push(bv);
                k.extend(p.iter().map(|x| ((x + 1.0) / delta).floor() as i64));
                keys.push(k);
            }
        }
        keys.sort_unstable();
        keys.dedup();
        counts.push((delta, keys.len() as u64));
    }
    let x: Vec<f64> = counts.iter().map(|(d, _)| -d.ln()).collect();
    let y: Vec<f64> = counts
        .iter()
        .map(|(_, n)| (*n.max(&1) as f64).ln())
        .collect();
    let empirical_dim = linear_fit(&x, &y)?.0;
    let coarse = counts
        .iter()
        .find(|(d, _)| *d == hi)
        .map(|c| c.1)
        .unwrap_or(0);
    let fine = counts
        .iter()
        .find(|(d, _)| *d == lo)
        .map(|c| c.1)
        .unwrap_or(0);
    Ok(BoxCount {
        counts,
        empirical_dim,
        sparse: fine < 10 * coarse,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub d: usize,
    pub n: usize,
    pub grid: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub l_hat: f64,
    pub l: f64,
    pub nu: f64,
    /// Empirical large-deviation rate.
    pub beta: f64,
    pub average_log_lipschitz: f64,
    pub bound: f64,
    pub delta_n: f64,
    pub large_deviation: LargeDeviation,
    pub box_counts: Vec<(f64, u64)>,
    pub empirical_dim: f64,
    pub sparse_sample: bool,
    pub failed_fibers: usize,
}

/// Box-count scales `2^{-2} … 2^{-6}`.
pub const DEFAULT_DELTAS: [f64; 5] = [0.25, 0.125, 0.0625, 0.03125, 0.015625];
/// Depths of the large-deviation estimate.
pub const DEVIATION_DEPTHS: [usize; 4] = [5, 10, 15, 20];

/// The full dimension pipeline: `L = exp(avg/2)`, `ν = L`, `α = 1`,
/// `L̂ = max_b L_b`, `β` from the violating-set fractions, and the box count
/// of the depth-`n` attractor sample on a `grid × grid` base grid.
pub fn dimension_report(
    s: &SkewSystem,
    n: usize,
    grid: usize,
    mesh: f64,
) -> Result<DimensionReport> {
    let avg = log_lipschitz_mean(&s.family, &s.partition, grid.max(64))?;
    if !(avg < 0.0) {
        return Err(Error::Hypothesis(format!(
            "fiber maps do not contract on average (∫ log L_b = {avg})"
        )));
    }
    let l = (avg / 2.0).exp();
    let nu = l;
    let alpha = 1.0;
    let lambda = s.map().lambda;
    let l_hat = (0..s.family.n_maps())
        .map(|i| s.family.lip(i))
        .fold(0.0, f64::max);
    let ld = large_deviation_beta(s, l, &DEVIATION_DEPTHS, grid)?;
    let bound = dimension_bound(alpha, lambda, l_hat, l, nu, ld.beta, s.d())?;
    let sample = s.attractor_sample(n, grid, mesh)?;
    let failed = sample.iter().filter(|c| c.is_err()).count();
    let ok: Vec<SliceCover> = sample.into_iter().filter_map(|c| c.ok()).collect();
    let bc = box_count(&ok, &DEFAULT_DELTAS)?;
    Ok(DimensionReport {
        d: s.d(),
        n,
        grid,
        alpha,
        lambda,
        l_hat,
        l,
        nu,
        beta: ld.beta,
        average_log_lipschitz: avg,
        bound,
        delta_n: choose_delta(nu, l_hat, lambda, alpha, n),
        large_deviation: ld,
        box_counts: bc.counts,
        empirical_dim: bc.empirical_dim,
        sparse_sample: bc.sparse,
        failed_fibers: failed,
    })
}
