//! Counter-style random streams: one independent ChaCha stream per work item,
//! so parallel and serial runs draw identical numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::torus::TorusPoint;

/// Generator for work item `stream` under the global `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Denominator of random exact base points.
pub const RANDOM_DEN: i64 = 1 << 32;

/// Uniform exact dyadic point `(p, r) / 2³²` of the torus.
pub fn random_exact_point<R: Rng>(rng: &mut R) -> TorusPoint {
    let p = rng.random_range(0..RANDOM_DEN);
    let r = rng.random_range(0..RANDOM_DEN);
    TorusPoint::rational(p, r, RANDOM_DEN).expect("positive denominator")
}

/// Uniform point of the closed unit ball in `R^d` (rejection sampling).
pub fn random_in_ball<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return x;
        }
    }
}

/// Uniform unit vector in `R^d`.
pub fn random_direction<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n2: f64 = x.iter().map(|v| v * v).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return x.into_iter().map(|v| v / n).collect();
        }
    }
}

/// Midpoint `((i + ½)/g, (j + ½)/g)` as an exact point over `2g`.
pub fn grid_midpoint(i: usize, j: usize, g: usize) -> TorusPoint {
    let den = 2 * g as i64;
    TorusPoint::rational(2 * i as i64 + 1, 2 * j as i64 + 1, den).expect("positive denominator")
}
