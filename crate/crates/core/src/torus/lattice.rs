//! Exact integer linear algebra on Z² used for periodic points.
//!
//! Everything here is `i128` with checked arithmetic; an overflow is an
//! error, never a silent wrap.

use crate::error::{Error, Result};

/// 2×2 integer matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IMat2(pub [[i128; 2]; 2]);

impl IMat2 {
    pub const IDENTITY: IMat2 = IMat2([[1, 0], [0, 1]]);

    pub fn det(&self) -> Result<i128> {
        let [[a, b], [c, d]] = self.0;
        let ad = a.checked_mul(d).ok_or(Error::Overflow("det"))?;
        let bc = b.checked_mul(c).ok_or(Error::Overflow("det"))?;
        ad.checked_sub(bc).ok_or(Error::Overflow("det"))
    }

    pub fn trace(&self) -> i128 {
        self.0[0][0] + self.0[1][1]
    }

    /// Adjugate: `self · adj = det · I`.
    pub fn adjugate(&self) -> IMat2 {
        let [[a, b], [c, d]] = self.0;
        IMat2([[d, -b], [-c, a]])
    }

    pub fn mul(&self, other: &IMat2) -> Result<IMat2> {
        let mut out = [[0i128; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let x = self.0[i][0]
                    .checked_mul(other.0[0][j])
                    .ok_or(Error::Overflow("matrix product"))?;
                let y = self.0[i][1]
                    .checked_mul(other.0[1][j])
                    .ok_or(Error::Overflow("matrix product"))?;
                *cell = x.checked_add(y).ok_or(Error::Overflow("matrix product"))?;
            }
        }
        Ok(IMat2(out))
    }

    pub fn apply(&self, v: [i128; 2]) -> Result<[i128; 2]> {
        let row = |i: usize| -> Result<i128> {
            let x = self.0[i][0]
                .checked_mul(v[0])
                .ok_or(Error::Overflow("matrix-vector product"))?;
            let y = self.0[i][1]
                .checked_mul(v[1])
                .ok_or(Error::Overflow("matrix-vector product"))?;
            x.checked_add(y)
                .ok_or(Error::Overflow("matrix-vector product"))
        };
        Ok([row(0)?, row(1)?])
    }

    pub fn pow(&self, n: u32) -> Result<IMat2> {
        let mut acc = IMat2::IDENTITY;
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `I − self`.
    pub fn identity_minus(&self) -> IMat2 {
        let [[a, b], [c, d]] = self.0;
        IMat2([[1 - a, -b], [-c, 1 - d]])
    }

    pub fn sub_identity(&self) -> IMat2 {
        let mut m = self.0;
        m[0][0] -= 1;
        m[1][1] -= 1;
        IMat2(m)
    }
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid: returns `(g, x, y)` with `a·x + b·y = g = gcd(a, b) ≥ 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Lower-triangular Hermite basis `[[h11, 0], [h21, h22]]` (columns are the
/// basis vectors `(h11, h21)` and `(0, h22)`) of the lattice spanned by the
/// columns of `m`. Requires `det m ≠ 0`.
pub fn hermite_columns(m: &IMat2) -> Result<(i128, i128, i128)> {
    let det = m.det()?;
    if det == 0 {
        return Err(Error::DegenerateInput("singular lattice basis"));
    }
    // Columns c1 = (a, c), c2 = (b, d). Unimodular column operations bring
    // the first row to (g, 0).
    let [[a, b], [c, d]] = m.0;
    let (g, x, y) = ext_gcd(a, b);
    // New first column = x·c1 + y·c2, second = (-b/g)·c1 + (a/g)·c2.
    let h11 = g;
    let h21 = x * c + y * d;
    let h22 = (-b / g) * c + (a / g) * d;
    let h22 = h22.abs();
    debug_assert_eq!((h11 * h22).abs(), det.abs());
    let h21 = h21.rem_euclid(h22);
    Ok((h11, h21, h22))
}

/// All solutions of `M x ≡ 0 (mod Z²)` for `x ∈ [0,1)²`, returned as integer
/// numerator pairs over the common denominator `|det M|`.
///
/// The numerators form the lattice `adj(M)·Z²`, which contains `|det M|·Z²`;
/// a Hermite basis enumerates its points in `[0, D)²` without search.
pub fn torsion_points(m: &IMat2) -> Result<(Vec<[i128; 2]>, i128)> {
    let det = m.det()?;
    let den = det.abs();
    if den == 0 {
        return Err(Error::DegenerateInput("singular congruence"));
    }
    let (h11, h21, h22) = hermite_columns(&m.adjugate())?;
    if den % h11 != 0 || den % h22 != 0 {
        return Err(Error::DegenerateInput(
            "Hermite basis does not divide the determinant",
        ));
    }
    let mut out = Vec::with_capacity(den as usize);
    for a in 0..den / h11 {
        let p = a * h11;
        let base = (a * h21).rem_euclid(h22);
        for b in 0..den / h22 {
            let r = base + b * h22;
            out.push([p, r]);
        }
    }
    out.sort_unstable();
    Ok((out, den))
}
