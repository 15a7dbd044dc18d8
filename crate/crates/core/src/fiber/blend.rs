//! Base-dependent convex combinations `f_b = Σ w_i(b) f_i`.
//!
//! Each index `i` has a bump `β_i = 1 − smoothstep(ρ_i / width)` where `ρ_i`
//! is the torus distance from `b` to the marked rectangles of group `i`.
//! Marked groups are at least `2·width` apart, so at most one bump is
//! nonzero at any base point. The remaining mass `1 − Σβ` is spread evenly
//! over the contraction indices `0..=d`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::FiberMapFamily;
use super::profile::smoothstep;
use super::simplex::norm;
use crate::error::{Error, Result};
use crate::rng::{random_direction, stream_rng};
use crate::torus::{MarkovPartition, TorusPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlendWeights {
    pub w: Vec<f64>,
}

pub fn blend_weights(
    fam: &FiberMapFamily,
    part: &MarkovPartition,
    b: &TorusPoint,
) -> Result<BlendWeights> {
    weights_at(fam, part, b.coords())
}

pub(crate) fn weights_at(
    fam: &FiberMapFamily,
    part: &MarkovPartition,
    b: [f64; 2],
) -> Result<BlendWeights> {
    if let Some(w) = &fam.constant_weights {
        return Ok(BlendWeights { w: w.clone() });
    }
    let marked = part.marked.as_ref().ok_or(Error::NoMarkedRectangles)?;
    if marked.groups.len() != fam.n_maps() {
        return Err(Error::invalid(
            "d",
            format!(
                "partition marked for d={}, family has d={}",
                marked.d, fam.d
            ),
        ));
    }
    let width = fam.weight_width;
    let mut beta = vec![0.0; fam.n_maps()];
    for (i, group) in marked.groups.iter().enumerate() {
        let rho = group
            .iter()
            .map(|&l| part.distance_to_rect(l, b, width))
            .fold(f64::INFINITY, f64::min);
        if rho < width {
            beta[i] = 1.0 - smoothstep(rho / width);
        }
    }
    let total: f64 = beta.iter().sum();
    if total >= 1.0 {
        for x in beta.iter_mut() {
            *x /= total;
        }
    } else {
        let fill = (1.0 - total) / (fam.d as f64 + 1.0);
        for x in beta.iter_mut().take(fam.d + 1) {
            *x += fill;
        }
    }
    Ok(BlendWeights { w: beta })
}

/// The fiber map over one base point, in closed form:
/// `f_b(x) = (linear + rep·φ(|x|))·x + shift`, or a single `f_i` when one
/// weight is exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberMap {
    pub pure: Option<usize>,
    pub linear: f64,
    pub rep: f64,
    pub shift: Vec<f64>,
    /// `L_b = Σ w_i Lip(f_i)`.
    pub lip: f64,
}

impl FiberMap {
    pub fn from_weights(fam: &FiberMapFamily, w: &BlendWeights) -> FiberMap {
        let pure = w.w.iter().position(|&x| x == 1.0);
        let c = 1.0 - fam.eps;
        let wc: f64 = w.w[..=fam.d].iter().sum();
        let rep: f64 = w.w[fam.d + 1..].iter().sum();
        let mut shift = vec![0.0; fam.d];
        for (i, p) in fam.vertices.iter().enumerate() {
            for k in 0..fam.d {
                shift[k] += fam.eps * w.w[i] * p[k];
            }
        }
        let lip = match pure {
            Some(i) => fam.lip(i),
            None => w.w.iter().enumerate().map(|(i, &x)| x * fam.lip(i)).sum(),
        };
        FiberMap {
            pure,
            linear: wc * c,
            rep,
            shift,
            lip,
        }
    }

    pub fn apply_into(&self, fam: &FiberMapFamily, x: &[f64], out: &mut [f64]) {
        if let Some(i) = self.pure {
            fam.eval_into(i, x, out);
            return;
        }
        let mut c = self.linear;
        if self.rep != 0.0 {
            c += self.rep * fam.profile.phi(norm(x));
        }
        for k in 0..fam.d {
            out[k] = c * x[k] + self.shift[k];
        }
    }

    pub fn apply(&self, fam: &FiberMapFamily, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; fam.d];
        self.apply_into(fam, x, &mut out);
        out
    }

    /// Analytic Jacobian at `x`, row major `d×d`.
    pub fn jacobian(&self, fam: &FiberMapFamily, x: &[f64]) -> Vec<f64> {
        let d = fam.d;
        let (lin, rep) = match self.pure {
            Some(i) if fam.is_repellor(i) => (0.0, 1.0),
            Some(_) => (1.0 - fam.eps, 0.0),
            None => (self.linear, self.rep),
        };
        let r = norm(x);
        let phi = fam.profile.phi(r);
        let radial = if r > 0.0 {
            fam.profile.dphi(r) / r
        } else {
            0.0
        };
        let mut jac = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut v = rep * radial * x[i] * x[j];
                if i == j {
                    v += lin + rep * phi;
                }
                jac[i * d + j] = v;
            }
        }
        jac
    }
}

pub fn fiber_map(fam: &FiberMapFamily, part: &MarkovPartition, b: &TorusPoint) -> Result<FiberMap> {
    Ok(FiberMap::from_weights(fam, &blend_weights(fam, part, b)?))
}

/// `f_b(x)`.
pub fn blend(
    fam: &FiberMapFamily,
    part: &MarkovPartition,
    b: &TorusPoint,
    x: &[f64],
) -> Result<Vec<f64>> {
    fam.check_dim(x)?;
    Ok(fiber_map(fam, part, b)?.apply(fam, x))
}

/// `L_b = Σ w_i(b) Lip(f_i)`, an upper bound on `sup_x ‖Df_b(x)‖`.
pub fn lipschitz_in_x(fam: &FiberMapFamily, part: &MarkovPartition, b: &TorusPoint) -> Result<f64> {
    Ok(fiber_map(fam, part, b)?.lip)
}

/// Midpoint-rule `∫ log L_b db` at two resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageLogLipschitz {
    pub resolution: usize,
    pub value: f64,
    /// Same quadrature on the doubled grid.
    pub refined: f64,
    pub delta: f64,
}

pub fn log_lipschitz_mean(fam: &FiberMapFamily, part: &MarkovPartition, res: usize) -> Result<f64> {
    let rows: Vec<f64> = (0..res)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut s = 0.0;
            for j in 0..res {
                let b = [(i as f64 + 0.5) / res as f64, (j as f64 + 0.5) / res as f64];
                let w = weights_at(fam, part, b)?;
                s += FiberMap::from_weights(fam, &w).lip.ln();
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().sum::<f64>() / (res * res) as f64)
}

pub fn average_log_lipschitz(
    fam: &FiberMapFamily,
    part: &MarkovPartition,
    resolution: usize,
) -> Result<AverageLogLipschitz> {
    if resolution < 64 {
        return Err(Error::invalid("resolution", "must be ≥ 64"));
    }
    let value = log_lipschitz_mean(fam, part, resolution)?;
    let refined = log_lipschitz_mean(fam, part, 2 * resolution)?;
    Ok(AverageLogLipschitz {
        resolution,
        value,
        refined,
        delta: (refined - value).abs(),
    })
}

/// Fixed fiber probe set: a 101-point grid for `d = 1`; otherwise the
/// origin, the vertices and their halves and antipodal boundary points,
/// the coordinate axes, and 64 seeded boundary directions.
pub fn probe_points(fam: &FiberMapFamily) -> Vec<Vec<f64>> {
    let d = fam.d;
    if d == 1 {
        return (0..=100).map(|k| vec![-1.0 + 0.02 * k as f64]).collect();
    }
    let mut out = vec![vec![0.0; d]];
    for p in &fam.vertices {
        out.push(p.clone());
        out.push(p.iter().map(|v| 0.5 * v).collect());
        let n = norm(p);
        out.push(p.iter().map(|v| -v / n).collect());
    }
    for k in 0..d {
        for s in [-1.0, 1.0] {
            let mut e = vec![0.0; d];
            e[k] = s;
            out.push(e);
        }
    }
    let mut rng = stream_rng(0x5eed, d as u64);
    for _ in 0..64 {
        out.push(random_direction(&mut rng, d));
    }
    out
}

/// Sampled Lipschitz constant of `b ↦ f_b(x)` (sup over the probe set),
/// using central differences of step `h` along random directions at
/// `pairs` uniform base points.
pub fn lipschitz_in_base_estimate(
    fam: &FiberMapFamily,
    part: &MarkovPartition,
    pairs: usize,
    h: f64,
    seed: u64,
) -> Result<f64> {
    const CHUNK: usize = 1024;
    let probes = probe_points(fam);
    let chunks = pairs.div_ceil(CHUNK);
    let maxima: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<f64> {
            let mut rng = stream_rng(seed, c as u64);
            let mut best = 0.0f64;
            let mut y0 = vec![0.0; fam.d];
            let mut y1 = vec![0.0; fam.d];
            for _ in 0..CHUNK.min(pairs - c * CHUNK) {
                let b = [rng.random::<f64>(), rng.random::<f64>()];
                let th = rng.random::<f64>() * std::f64::consts::TAU;
                let (dx, dy) = (0.5 * h * th.cos(), 0.5 * h * th.sin());
                let lo = weights_at(fam, part, [b[0] - dx, b[1] - dy])?;
                let hi = weights_at(fam, part, [b[0] + dx, b[1] + dy])?;
                if lo == hi {
                    continue;
                }
                let f0 = FiberMap::from_weights(fam, &lo);
                let f1 = FiberMap::from_weights(fam, &hi);
                for x in &probes {
                    f0.apply_into(fam, x, &mut y0);
                    f1.apply_into(fam, x, &mut y1);
                    let diff = y0
                        .iter()
                        .zip(&y1)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    best = best.max(diff / h);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(maxima.into_iter().fold(0.0, f64::max))
}
