//! Regular simplex with side 0.5 centered at the origin.

use crate::error::{Error, Result};

pub const SIMPLEX_SIDE: f64 = 0.5;

/// Vertices `p_0..p_d` of a regular simplex in `R^d` with side 0.5 and
/// centroid 0. Built from the Helmert basis of the sum-zero hyperplane of
/// `R^{d+1}`; for `d = 1` this gives `p_0 = −0.25`, `p_1 = 0.25`.
pub fn simplex_vertices(d: usize) -> Result<Vec<Vec<f64>>> {
    if d == 0 {
        return Err(Error::invalid("d", "must be ≥ 1"));
    }
    // Helmert row k (1-based): (1,…,1, −k, 0,…)/√(k(k+1)), k ones.
    let scale = SIMPLEX_SIDE / std::f64::consts::SQRT_2;
    let verts = (0..=d)
        .map(|i| {
            (1..=d)
                .map(|k| {
                    let norm = ((k * (k + 1)) as f64).sqrt();
                    let entry = if i < k {
                        1.0
                    } else if i == k {
                        -(k as f64)
                    } else {
                        0.0
                    };
                    // Standard basis vectors are orthogonal to the centroid
                    // shift, so projecting e_i is just reading row entries.
                    -scale * entry / norm
                })
                .collect()
        })
        .collect();
    Ok(verts)
}

/// Circumradius `0.25·√(2d/(d+1))` of the side-0.5 regular simplex.
pub fn circumradius(d: usize) -> f64 {
    0.25 * (2.0 * d as f64 / (d as f64 + 1.0)).sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_vertices() {
        let v = simplex_vertices(1).unwrap();
        assert!((v[0][0] + 0.25).abs() < 1e-15);
        assert!((v[1][0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn regular_centered_and_circumradius() {
        for d in 1..=6 {
            let v = simplex_vertices(d).unwrap();
            assert_eq!(v.len(), d + 1);
            for i in 0..=d {
                assert!((norm(&v[i]) - circumradius(d)).abs() < 1e-12);
                for j in 0..i {
                    assert!((dist(&v[i], &v[j]) - 0.5).abs() < 1e-12);
                }
            }
            for k in 0..d {
                let c: f64 = v.iter().map(|p| p[k]).sum();
                assert!(c.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d0_rejected() {
        assert!(simplex_vertices(0).is_err());
    }
}
