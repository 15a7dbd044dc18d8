//! Empirical large-deviation rate of backward ergodic averages of `log L_b`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::linear_fit;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::skew::SkewSystem;
use crate::torus::TorusPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeDeviation {
    pub threshold: f64,
    pub grid: usize,
    /// `(n, fraction of base points with (1/n) Σ log L_{A^{-i}b} > log L)`.
    pub fractions: Vec<(usize, f64)>,
    /// `−slope` of `log fraction` against `n` (≥ 0); `+∞` when every
    /// fraction is zero.
    pub beta: f64,
}

/// Jitter denominator: `grid · 2^16`.
const JITTER_BITS: u32 = 16;
const JITTER_SEED: u64 = 0x1a_d0_e5;

/// One exact base point per cell of a `grid × grid` partition of the
/// torus, at a seeded position inside the cell. Cell midpoints are not used
/// because points with small denominators are periodic under `A`.
pub fn jittered_grid(grid: usize) -> Vec<TorusPoint> {
    let sub = 1i64 << JITTER_BITS;
    let den = grid as i64 * sub;
    (0..grid * grid)
        .map(|k| {
            let mut rng = stream_rng(JITTER_SEED, k as u64);
            let (i, j) = ((k / grid) as i64, (k % grid) as i64);
            let p = i * sub + rng.random_range(0..sub);
            let r = j * sub + rng.random_range(0..sub);
            TorusPoint::rational(p, r, den).expect("positive denominator")
        })
        .collect()
}

pub fn large_deviation_beta(
    s: &SkewSystem,
    l: f64,
    n_list: &[usize],
    grid: usize,
) -> Result<LargeDeviation> {
    if !(l > 0.0 && l < 1.0) {
        return Err(Error::invalid("L", format!("{l} is not in (0, 1)")));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::invalid("n_list", "need positive depths"));
    }
    if grid == 0 {
        return Err(Error::invalid("grid", "must be positive"));
    }
    let log_l = l.ln();
    let n_max = *n_list.iter().max().expect("nonempty");
    let points = jittered_grid(grid);
    let flags: Vec<Vec<bool>> = points
        .par_iter()
        .map(|b| -> Result<Vec<bool>> {
            let maps = s.backward_maps(b, n_max)?;
            // maps[n_max − i] is f at A^{−i} b.
            let mut prefix = vec![0.0; n_max + 1];
            for i in 1..=n_max {
                prefix[i] = prefix[i - 1] + maps[n_max - i].lip.ln();
            }
            Ok(n_list
                .iter()
                .map(|&n| prefix[n] / n as f64 > log_l)
                .collect())
        })
        .collect::<Result<_>>()?;
    let total = (grid * grid) as f64;
    let fractions: Vec<(usize, f64)> = n_list
        .iter()
        .enumerate()
        .map(|(k, &n)| (n, flags.iter().filter(|f| f[k]).count() as f64 / total))
        .collect();
    let nonzero: Vec<(f64, f64)> = fractions
        .iter()
        .filter(|(_, f)| *f > 0.0)
        .map(|&(n, f)| (n as f64, f.ln()))
        .collect();
    let beta = match nonzero.len() {
        0 => f64::INFINITY,
        1 => -nonzero[0].1 / nonzero[0].0,
        _ => {
            let (x, y): (Vec<f64>, Vec<f64>) = nonzero.into_iter().unzip();
            (-linear_fit(&x, &y)?.0).max(0.0)
        }
    };
    Ok(LargeDeviation {
        threshold: l,
        grid,
        fractions,
        beta,
    })
}
