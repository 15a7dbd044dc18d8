//! Sampling of forward orbits against the slice covers (the likely-limit
//! set lies in the maximal attractor).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{random_exact_point, random_in_ball, stream_rng};
use crate::skew::SkewSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelyLimitReport {
    pub n_points: usize,
    pub n_transient: usize,
    pub n_tail: usize,
    /// Depth of the slice covers compared against.
    pub depth: usize,
    pub mesh: f64,
    /// Largest distance from a tail point to the outer cover of its fiber.
    pub max_distance: f64,
    /// Fraction of visited fibers whose slice has points (always 1).
    pub nonempty_fraction: f64,
    /// `2·mesh`.
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// Iterate `n_points` seeded random initial points `n_transient` steps and
/// compare the next `n_tail` points with the depth-`depth` slice covers.
pub fn likely_limit_sample(
    s: &SkewSystem,
    n_transient: usize,
    n_tail: usize,
    n_points: usize,
    depth: usize,
    mesh: f64,
    seed: u64,
) -> Result<LikelyLimitReport> {
    if n_points < 10 {
        return Err(Error::invalid("n_points", "must be ≥ 10"));
    }
    if n_transient < depth {
        return Err(Error::invalid(
            "n_transient",
            "must be at least the slice depth",
        ));
    }
    let per_point: Vec<(f64, usize, usize)> = (0..n_points)
        .into_par_iter()
        .map(|k| -> Result<(f64, usize, usize)> {
            let mut rng = stream_rng(seed, k as u64);
            let mut b = random_exact_point(&mut rng);
            let mut x = random_in_ball(&mut rng, s.d());
            for _ in 0..n_transient {
                (b, x) = s.step(&b, &x)?;
            }
            let mut worst = 0.0f64;
            let mut nonempty = 0;
            for _ in 0..n_tail.max(1) {
                let cover = s.slice_cover(&b, depth, mesh)?;
                if !cover.outer.is_empty() && !cover.inner.is_empty() {
                    nonempty += 1;
                }
                worst = worst.max(cover.distance_to_outer(&x));
                (b, x) = s.step(&b, &x)?;
            }
            Ok((worst, nonempty, n_tail.max(1)))
        })
        .collect::<Result<_>>()?;
    let max_distance = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
    let nonempty: usize = per_point.iter().map(|p| p.1).sum();
    let visited: usize = per_point.iter().map(|p| p.2).sum();
    Ok(LikelyLimitReport {
        n_points,
        n_transient,
        n_tail,
        depth,
        mesh,
        max_distance,
        nonempty_fraction: nonempty as f64 / visited as f64,
        tolerance: 2.0 * mesh,
        within_tolerance: max_distance <= 2.0 * mesh,
    })
}
