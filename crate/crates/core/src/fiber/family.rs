//! The fiber map family `f_0..f_{d+2}` on the closed unit ball `D ⊂ R^d`.
//!
//! `f_i` for `i ≤ d` is the linear contraction toward simplex vertex `p_i`
//! with coefficient `1 − ε`; `f_{d+1} = f_{d+2}` is the radial repellor
//! `x ↦ x·φ(|x|)`.

use serde::{Deserialize, Serialize};

use super::profile::RadialProfile;
use super::simplex::{norm, simplex_vertices};
use crate::error::{Error, Result};

/// Radii sampled when measuring the repellor's derivative bound.
pub const PROFILE_SAMPLES: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberMapFamily {
    pub d: usize,
    pub eps: f64,
    pub r0: f64,
    pub vertices: Vec<Vec<f64>>,
    pub profile: RadialProfile,
    /// Width of the blending bumps around the marked rectangles.
    pub weight_width: f64,
    /// Measured `sup_D ‖Df_{d+1}‖`.
    pub repellor_lip: f64,
    /// When set, the blend ignores the base point and uses these weights
    /// everywhere (a base-independent family).
    pub constant_weights: Option<Vec<f64>>,
}

/// Initial bump width `1/(40d)`.
pub fn initial_weight_width(d: usize) -> f64 {
    1.0 / (40.0 * d as f64)
}

pub fn make_family(d: usize, eps: f64, r0: f64) -> Result<FiberMapFamily> {
    if d == 0 {
        return Err(Error::invalid("d", "must be ≥ 1"));
    }
    if !(eps > 0.0 && eps < 0.2) {
        return Err(Error::invalid("eps", format!("{eps} is not in (0, 0.2)")));
    }
    if !(r0 > 0.0 && r0 < 0.1) {
        return Err(Error::invalid("r0", format!("{r0} is not in (0, 0.1)")));
    }
    let profile = RadialProfile {
        center: 1.0 + eps / 2.0,
        tail: 1.0 - eps / 2.0,
        radius: 2.0 * r0,
    };
    let measured = profile.sup_derivative(PROFILE_SAMPLES);
    if measured >= 1.0 + eps {
        return Err(Error::RepellorDerivative {
            measured,
            bound: 1.0 + eps,
        });
    }
    Ok(FiberMapFamily {
        d,
        eps,
        r0,
        vertices: simplex_vertices(d)?,
        profile,
        weight_width: initial_weight_width(d),
        repellor_lip: measured,
        constant_weights: None,
    })
}

impl FiberMapFamily {
    /// Number of maps `f_0..f_{d+2}`.
    pub fn n_maps(&self) -> usize {
        self.d + 3
    }

    pub fn is_repellor(&self, i: usize) -> bool {
        i > self.d
    }

    /// Lipschitz constant of `f_i` on `D`.
    pub fn lip(&self, i: usize) -> f64 {
        if self.is_repellor(i) {
            self.repellor_lip
        } else {
            1.0 - self.eps
        }
    }

    /// Replace the repellor profile (for experiments; no range checks).
    pub fn with_profile(mut self, profile: RadialProfile) -> Self {
        self.profile = profile;
        self.repellor_lip = profile.sup_derivative(PROFILE_SAMPLES);
        self
    }

    pub fn with_weight_width(mut self, width: f64) -> Self {
        self.weight_width = width;
        self
    }

    /// Base-independent blend with the given weights (must be a
    /// probability vector of length `d+3`).
    pub fn with_constant_weights(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.n_maps() {
            return Err(Error::invalid("weights", "need d+3 entries"));
        }
        let s: f64 = w.iter().sum();
        if w.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (s - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weights", "not a probability vector"));
        }
        self.constant_weights = Some(w);
        Ok(self)
    }

    pub fn eval_contraction_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let p = &self.vertices[i];
        let c = 1.0 - self.eps;
        for k in 0..self.d {
            out[k] = p[k] + c * (x[k] - p[k]);
        }
    }

    pub fn eval_contraction(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        if i > self.d {
            return Err(Error::invalid(
                "i",
                format!("{i} is not a contraction index"),
            ));
        }
        self.check_dim(x)?;
        let mut out = vec![0.0; self.d];
        self.eval_contraction_into(i, x, &mut out);
        Ok(out)
    }

    pub fn eval_repellor_into(&self, x: &[f64], out: &mut [f64]) {
        let phi = self.profile.phi(norm(x));
        for k in 0..self.d {
            out[k] = x[k] * phi;
        }
    }

    pub fn eval_repellor(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.d];
        self.eval_repellor_into(x, &mut out);
        Ok(out)
    }

    pub fn eval_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        if self.is_repellor(i) {
            self.eval_repellor_into(x, out)
        } else {
            self.eval_contraction_into(i, x, out)
        }
    }

    pub fn eval(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        if i >= self.n_maps() {
            return Err(Error::invalid("i", format!("{i} ≥ d+3")));
        }
        self.check_dim(x)?;
        let mut out = vec![0.0; self.d];
        self.eval_into(i, x, &mut out);
        Ok(out)
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::invalid(
                "x",
                format!("dimension {} ≠ d = {}", x.len(), self.d),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family serializes") + "\n"
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            key: "family".into(),
            reason: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::simplex::circumradius;

    #[test]
    fn contraction_examples() {
        let f = make_family(1, 0.1, 0.05).unwrap();
        assert_eq!(f.eval_contraction(0, &[-0.25]).unwrap(), vec![-0.25]);
        let y = f.eval_contraction(0, &[0.0]).unwrap();
        assert!((y[0] + 0.025).abs() < 1e-15);
        let a = f.eval_contraction(1, &[0.3]).unwrap()[0];
        let b = f.eval_contraction(1, &[-0.7]).unwrap()[0];
        assert!(((a - b).abs() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn repellor_examples() {
        let eps = 0.08;
        let r0 = 0.05;
        let f = make_family(2, eps, r0).unwrap();
        assert_eq!(f.eval_repellor(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let x = [r0 / 2.0, 0.0];
        let y = f.eval_repellor(&x).unwrap();
        assert!(norm(&y) / norm(&x) >= 1.0 + eps / 4.0);
        let x = [0.6, 0.8];
        let y = f.eval_repellor(&x).unwrap();
        assert!((norm(&y) - (1.0 - eps / 2.0)).abs() < 1e-15);
        assert!(f.repellor_lip < 1.0 + eps);
        assert!((f.repellor_lip - (1.0 + eps / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn all_maps_send_boundary_into_disk() {
        for d in 1..=3 {
            let f = make_family(d, 0.19, 0.099).unwrap();
            let mut rng = crate::rng::stream_rng(11, d as u64);
            for _ in 0..2000 {
                let x = crate::rng::random_direction(&mut rng, d);
                for i in 0..f.n_maps() {
                    assert!(norm(&f.eval(i, &x).unwrap()) <= 1.0);
                }
            }
            for p in &f.vertices {
                assert!((norm(p) - circumradius(d)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(make_family(0, 0.05, 0.05).is_err());
        assert!(make_family(1, 0.2, 0.05).is_err());
        assert!(make_family(1, 0.05, 0.1).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let f = make_family(3, 0.0731, 0.0417).unwrap();
        let g = FiberMapFamily::from_json(&f.to_json()).unwrap();
        assert_eq!(f, g);
        for (a, b) in f.vertices.iter().flatten().zip(g.vertices.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
