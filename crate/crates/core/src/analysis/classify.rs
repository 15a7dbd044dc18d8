//! Empirical fiber classification: bone (certified and propagated), graph
//! (outer slice diameter decaying below a tolerance), or undetermined.

use serde::{Deserialize, Serialize};

use super::bones::{bone_propagate_unstable, leaf_coordinate, BoneCertificate, PropagatedBone};
use super::fit::linear_fit;
use crate::error::Result;
use crate::skew::SkewSystem;
use crate::torus::TorusPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Bone,
    Graph,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Evidence {
    /// Propagated from certificate `cert` (index into the supplied list).
    Bone { cert: usize, bone: PropagatedBone },
    /// Outer diameters at the sampled depths and the tail fit.
    Diameters {
        depths: Vec<usize>,
        diam_outer: Vec<f64>,
        slope: f64,
    },
    /// Why no evidence could be gathered.
    Unavailable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberClass {
    pub b: TorusPoint,
    pub class: Class,
    pub evidence: Evidence,
}

/// Maximum number of depths at which slices are computed.
pub const MAX_SAMPLED_DEPTHS: usize = 32;
/// Mesh of the slice covers used for classification.
pub const CLASSIFY_MESH: f64 = 0.01;
/// Largest stable offset for a point to count as on a certificate's leaf.
pub const LEAF_TOL: f64 = 1e-12;

/// Depths `1..=n_max` when there are few, else evenly spaced samples
/// ending at `n_max`.
pub fn sampled_depths(n_max: usize) -> Vec<usize> {
    if n_max <= MAX_SAMPLED_DEPTHS {
        return (1..=n_max).collect();
    }
    let mut v: Vec<usize> = (1..=MAX_SAMPLED_DEPTHS)
        .map(|k| (k * n_max).div_ceil(MAX_SAMPLED_DEPTHS))
        .collect();
    v.dedup();
    v
}

/// Outer slice diameters of `M_{b,n}` at `depths` (all sharing one
/// backward orbit of length `max(depths)`).
pub fn diameter_sequence(
    s: &SkewSystem,
    b: &TorusPoint,
    depths: &[usize],
    mesh: f64,
) -> Result<Vec<f64>> {
    let n_max = depths.iter().copied().max().unwrap_or(0);
    let maps = s.backward_maps(b, n_max)?;
    depths
        .iter()
        .map(|&n| {
            Ok(
                s.slice_cover_with_maps(b, n, mesh, &maps[n_max - n..], false)?
                    .diam_outer,
            )
        })
        .collect()
}

/// Slope of `log diam_outer` against depth over the tail window
/// (depths ≥ `n_max/2`).
pub fn tail_decay_rate(depths: &[usize], diam: &[f64]) -> Result<f64> {
    let n_max = depths.iter().copied().max().unwrap_or(0);
    let (x, y): (Vec<f64>, Vec<f64>) = depths
        .iter()
        .zip(diam)
        .filter(|(&n, &dm)| 2 * n >= n_max && dm > 0.0)
        .map(|(&n, &dm)| (n as f64, dm.ln()))
        .unzip();
    Ok(linear_fit(&x, &y)?.0)
}

/// Bone evidence for `b` from the certificates: `b` must lie on a
/// certificate's unstable leaf and, for some `n0 ≤ n_max/q`, the point
/// `A^{−q·n0} b` must follow the certificate's word over one period and pass
/// the inclusion test. (Later backward periods are closer to the periodic
/// orbit along the leaf, so they follow the word too.)
pub fn bone_evidence(
    s: &SkewSystem,
    b: &TorusPoint,
    n_max: usize,
    certs: &[BoneCertificate],
) -> Option<(usize, PropagatedBone)> {
    for (ci, cert) in certs.iter().enumerate() {
        let Some(t) = leaf_coordinate(s, cert, b, LEAF_TOL) else {
            continue;
        };
        for n0 in 0..=n_max / cert.q {
            let lam_q = s.map().lambda.powi((cert.q * n0) as i32);
            let follows = (0..cert.q).all(|k| {
                let c = t * s.map().lambda.powi(k as i32) / lam_q;
                let e = s.map().e_u;
                let p = cert.orbit[k];
                let pt = TorusPoint::new(p.u + c * e[0], p.v + c * e[1]);
                s.partition.locate(&pt) == cert.word.labels[k]
            });
            if !follows {
                continue;
            }
            if let Ok(bone) = bone_propagate_unstable(s, cert, t, n0) {
                return Some((ci, bone));
            }
        }
    }
    None
}

/// Classify the fiber over `b`; bone evidence wins over graph evidence.
pub fn classify_fiber(
    s: &SkewSystem,
    b: &TorusPoint,
    n_max: usize,
    tol: f64,
    certs: &[BoneCertificate],
) -> FiberClass {
    if let Some((cert, bone)) = bone_evidence(s, b, n_max, certs) {
        return FiberClass {
            b: *b,
            class: Class::Bone,
            evidence: Evidence::Bone { cert, bone },
        };
    }
    if n_max < 10 {
        return FiberClass {
            b: *b,
            class: Class::Undetermined,
            evidence: Evidence::Unavailable("n_max must be ≥ 10".into()),
        };
    }
    let depths = sampled_depths(n_max);
    let diam = match diameter_sequence(s, b, &depths, CLASSIFY_MESH) {
        Ok(d) => d,
        Err(e) => {
            return FiberClass {
                b: *b,
                class: Class::Undetermined,
                evidence: Evidence::Unavailable(e.to_string()),
            }
        }
    };
    let slope = tail_decay_rate(&depths, &diam).unwrap_or(f64::NAN);
    let last = *diam.last().expect("n_max ≥ 10");
    let class = if last < tol && slope < 0.0 {
        Class::Graph
    } else {
        Class::Undetermined
    };
    FiberClass {
        b: *b,
        class,
        evidence: Evidence::Diameters {
            depths,
            diam_outer: diam,
            slope,
        },
    }
}
