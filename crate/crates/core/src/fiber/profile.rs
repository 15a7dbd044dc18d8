//! Smooth step functions and the radial repellor profile.

use serde::{Deserialize, Serialize};

/// Cubic smoothstep `3t² − 2t³` on `[0,1]`, clamped outside (C¹).
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

pub fn smoothstep_deriv(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    6.0 * t * (1.0 - t)
}

/// Largest slope of [`smoothstep`].
pub const SMOOTHSTEP_MAX_SLOPE: f64 = 1.5;

/// Quintic smootherstep `6t⁵ − 15t⁴ + 10t³` on `[0,1]`, clamped (C²).
pub fn smootherstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

pub fn smootherstep_deriv(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// Radial factor `φ(r)` falling monotonically from `center` at `r = 0` to
/// `tail` for `r ≥ radius`, through a C² quintic transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub center: f64,
    pub tail: f64,
    pub radius: f64,
}

impl RadialProfile {
    pub fn phi(&self, r: f64) -> f64 {
        if r >= self.radius {
            return self.tail;
        }
        self.center + (self.tail - self.center) * smootherstep(r / self.radius)
    }

    pub fn dphi(&self, r: f64) -> f64 {
        if r >= self.radius {
            return 0.0;
        }
        (self.tail - self.center) * smootherstep_deriv(r / self.radius) / self.radius
    }

    /// Radial derivative of `r ↦ r·φ(r)`, i.e. `φ + rφ′`.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        self.phi(r) + r * self.dphi(r)
    }

    /// `sup_{0≤r≤1} ‖D(x φ(|x|))‖ = sup max(|φ|, |φ + rφ′|)`, sampled on
    /// `samples + 1` radii together with the transition interior.
    pub fn sup_derivative(&self, samples: usize) -> f64 {
        let mut best = 0.0f64;
        let n = samples.max(1);
        let mut probe = |r: f64| {
            best = best
                .max(self.phi(r).abs())
                .max(self.radial_derivative(r).abs());
        };
        for k in 0..=n {
            probe(k as f64 / n as f64);
        }
        let rmax = self.radius.min(1.0);
        for k in 0..=n {
            probe(rmax * k as f64 / n as f64);
        }
        best
    }

    pub fn is_monotone_nonincreasing(&self, samples: usize) -> bool {
        let n = samples.max(1);
        let rmax = (2.0 * self.radius).min(1.0);
        (1..=n).all(|k| {
            self.phi(rmax * k as f64 / n as f64) <= self.phi(rmax * (k - 1) as f64 / n as f64)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_hit_endpoints() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smootherstep(0.0), 0.0);
        assert_eq!(smootherstep(1.0), 1.0);
        assert_eq!(smootherstep(0.5), 0.5);
        assert!((smoothstep_deriv(0.5) - SMOOTHSTEP_MAX_SLOPE).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = RadialProfile {
            center: 1.025,
            tail: 0.975,
            radius: 0.1,
        };
        for k in 1..50 {
            let r = k as f64 * 0.1 / 50.0;
            let h = 1e-7;
            let fd = (p.phi(r + h) - p.phi(r - h)) / (2.0 * h);
            assert!((fd - p.dphi(r)).abs() < 1e-6);
        }
    }

    #[test]
    fn profile_sup_is_center() {
        let eps = 0.05;
        let p = RadialProfile {
            center: 1.0 + eps / 2.0,
            tail: 1.0 - eps / 2.0,
            radius: 0.1,
        };
        assert!((p.sup_derivative(4096) - (1.0 + eps / 2.0)).abs() < 1e-15);
        assert!(p.is_monotone_nonincreasing(4096));
    }
}
