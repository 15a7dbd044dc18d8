use serde::{Deserialize, Serialize};

use super::lattice::{gcd, IMat2};
use crate::error::{Error, Result};

/// A point of T² with rational coordinates `num / den`, reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactPoint {
    pub num: [i64; 2],
    pub den: i64,
}

impl ExactPoint {
    pub fn new(p: i128, r: i128, den: i128) -> Result<Self> {
        if den <= 0 {
            return Err(Error::invalid("den", "denominator must be positive"));
        }
        let p = p.rem_euclid(den);
        let r = r.rem_euclid(den);
        let g = gcd(gcd(p, r), den).max(1);
        let (p, r, den) = (p / g, r / g, den / g);
        let to64 = |x: i128| i64::try_from(x).map_err(|_| Error::Overflow("exact point"));
        Ok(ExactPoint {
            num: [to64(p)?, to64(r)?],
            den: to64(den)?,
        })
    }

    pub fn origin() -> Self {
        ExactPoint {
            num: [0, 0],
            den: 1,
        }
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [
            self.num[0] as f64 / self.den as f64,
            self.num[1] as f64 / self.den as f64,
        ]
    }

    pub fn apply(&self, m: &IMat2) -> Result<Self> {
        let v = m.apply([self.num[0] as i128, self.num[1] as i128])?;
        ExactPoint::new(v[0], v[1], self.den as i128)
    }
}

/// A point of the torus: float coordinates in `[0,1)²`, optionally backed by
/// an exact rational form from which the floats are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub u: f64,
    pub v: f64,
    pub exact: Option<ExactPoint>,
}

/// Reduce into `[0, 1)`; `rem_euclid` can round up to exactly 1.0 for tiny
/// negative inputs.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl TorusPoint {
    pub fn new(u: f64, v: f64) -> Self {
        TorusPoint {
            u: wrap_unit(u),
            v: wrap_unit(v),
            exact: None,
        }
    }

    pub fn from_exact(e: ExactPoint) -> Self {
        let [u, v] = e.to_f64();
        TorusPoint {
            u: wrap_unit(u),
            v: wrap_unit(v),
            exact: Some(e),
        }
    }

    /// Exact point `(p/den, r/den)`.
    pub fn rational(p: i64, r: i64, den: i64) -> Result<Self> {
        Ok(Self::from_exact(ExactPoint::new(
            p as i128,
            r as i128,
            den as i128,
        )?))
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.u, self.v]
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }
}

/// Flat-torus distance between two points.
pub fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let du = (a[0] - b[0]).rem_euclid(1.0);
    let dv = (a[1] - b[1]).rem_euclid(1.0);
    let du = du.min(1.0 - du);
    let dv = dv.min(1.0 - dv);
    du.hypot(dv)
}
