use serde::{Deserialize, Serialize};

use super::lattice::IMat2;
use super::point::{wrap_unit, ExactPoint, TorusPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// The hyperbolic automorphism of T² given by `((m, m+1), (m−1, m))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnosovMap {
    pub m: i64,
    pub matrix: IMat2Serde,
    pub inverse: IMat2Serde,
    /// Expanding eigenvalue `m + √(m²−1)`.
    pub lambda: f64,
    pub e_u: [f64; 2],
    pub e_s: [f64; 2],
    /// Columns `e_u`, `e_s`: eigen coordinates → plane.
    basis: [[f64; 2]; 2],
    /// Plane → eigen coordinates.
    basis_inv: [[f64; 2]; 2],
}

/// Serializable mirror of [`IMat2`] (i64 entries).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IMat2Serde(pub [[i64; 2]; 2]);

impl From<IMat2Serde> for IMat2 {
    fn from(m: IMat2Serde) -> Self {
        IMat2([
            [m.0[0][0] as i128, m.0[0][1] as i128],
            [m.0[1][0] as i128, m.0[1][1] as i128],
        ])
    }
}

pub fn make_anosov(m: i64) -> Result<AnosovMap> {
    if m <= 1 {
        return Err(Error::NotHyperbolic { m });
    }
    if m > 1 << 20 {
        return Err(Error::invalid("m", "too large for exact arithmetic"));
    }
    let mf = m as f64;
    let root = (mf * mf - 1.0).sqrt();
    let lambda = mf + root;
    let slope = ((mf - 1.0) / (mf + 1.0)).sqrt();
    let norm = (1.0 + slope * slope).sqrt();
    let e_u = [1.0 / norm, slope / norm];
    let e_s = [1.0 / norm, -slope / norm];
    let basis = [[e_u[0], e_s[0]], [e_u[1], e_s[1]]];
    let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
    let basis_inv = [
        [basis[1][1] / det, -basis[0][1] / det],
        [-basis[1][0] / det, basis[0][0] / det],
    ];
    Ok(AnosovMap {
        m,
        matrix: IMat2Serde([[m, m + 1], [m - 1, m]]),
        inverse: IMat2Serde([[m, -(m + 1)], [-(m - 1), m]]),
        lambda,
        e_u,
        e_s,
        basis,
        basis_inv,
    })
}

impl AnosovMap {
    pub fn imat(&self) -> IMat2 {
        self.matrix.into()
    }

    pub fn imat_inv(&self) -> IMat2 {
        self.inverse.into()
    }

    pub fn lambda_inv(&self) -> f64 {
        1.0 / self.lambda
    }

    pub fn det(&self) -> i64 {
        let a = self.matrix.0;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    /// Apply the integer matrix (or its inverse) in the plane, no reduction.
    pub fn apply_plane(&self, x: [f64; 2], dir: Direction) -> [f64; 2] {
        let a = match dir {
            Direction::Forward => self.matrix.0,
            Direction::Backward => self.inverse.0,
        };
        [
            a[0][0] as f64 * x[0] + a[0][1] as f64 * x[1],
            a[1][0] as f64 * x[0] + a[1][1] as f64 * x[1],
        ]
    }

    pub fn step(&self, p: &TorusPoint, dir: Direction) -> TorusPoint {
        if let Some(e) = p.exact {
            let m = match dir {
                Direction::Forward => self.imat(),
                Direction::Backward => self.imat_inv(),
            };
            // Numerators are < den ≤ i64::MAX and entries are ≤ 2^20, so
            // the i128 product cannot overflow.
            let next = e.apply(&m).expect("exact torus step");
            return TorusPoint::from_exact(next);
        }
        let [u, v] = self.apply_plane([p.u, p.v], dir);
        TorusPoint {
            u: wrap_unit(u),
            v: wrap_unit(v),
            exact: None,
        }
    }

    pub fn step_n(&self, p: &TorusPoint, n: usize, dir: Direction) -> TorusPoint {
        let mut q = *p;
        for _ in 0..n {
            q = self.step(&q, dir);
        }
        q
    }

    /// `[b, A⁻¹b, …, A⁻ⁿb]`.
    pub fn backward_orbit(&self, b: &TorusPoint, n: usize) -> Vec<TorusPoint> {
        let mut out = Vec::with_capacity(n + 1);
        let mut q = *b;
        out.push(q);
        for _ in 0..n {
            q = self.step(&q, Direction::Backward);
            out.push(q);
        }
        out
    }

    /// Number of backward steps a float point may take before the `λⁿ`
    /// amplification of rounding error exceeds 2⁻¹² relative accuracy
    /// (`n·log₂λ ≤ 40`).
    pub fn float_step_budget(&self) -> usize {
        (40.0 / self.lambda.log2()).floor() as usize
    }

    pub fn to_eigen(&self, x: [f64; 2]) -> [f64; 2] {
        let b = &self.basis_inv;
        [
            b[0][0] * x[0] + b[0][1] * x[1],
            b[1][0] * x[0] + b[1][1] * x[1],
        ]
    }

    pub fn from_eigen(&self, e: [f64; 2]) -> [f64; 2] {
        let b = &self.basis;
        [
            b[0][0] * e[0] + b[0][1] * e[1],
            b[1][0] * e[0] + b[1][1] * e[1],
        ]
    }

    /// `|sin ∠(e_u, e_s)|`: area factor of eigen coordinates.
    pub fn eigen_area_factor(&self) -> f64 {
        (self.e_u[0] * self.e_s[1] - self.e_u[1] * self.e_s[0]).abs()
    }

    /// `|det(Aᵠ − I)|`, the number of points fixed by `Aᵠ`.
    pub fn fixed_point_count(&self, q: u32) -> Result<i128> {
        Ok(self.imat().pow(q)?.sub_identity().det()?.abs())
    }

    /// Every fixed point of `Aᵠ`, exactly, sorted by numerators.
    pub fn fixed_points(&self, q: u32) -> Result<Vec<ExactPoint>> {
        let mq = self.imat().pow(q)?.sub_identity();
        let (pts, den) = super::lattice::torsion_points(&mq)?;
        pts.into_iter()
            .map(|[p, r]| ExactPoint::new(p, r, den))
            .collect()
    }

    pub fn unstable_segment(&self, b: &TorusPoint, length: f64) -> Result<UnstableSegment> {
        if !(length >= 0.0) || !length.is_finite() {
            return Err(Error::invalid("length", "must be finite and ≥ 0"));
        }
        Ok(UnstableSegment {
            center: *b,
            length,
            direction: self.e_u,
        })
    }
}

/// A segment of the unstable line through `center`, arc-length parametrized
/// over `[−length/2, length/2]` and wrapped onto the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnstableSegment {
    pub center: TorusPoint,
    pub length: f64,
    pub direction: [f64; 2],
}

impl UnstableSegment {
    pub fn point_at(&self, t: f64) -> TorusPoint {
        TorusPoint::new(
            self.center.u + t * self.direction[0],
            self.center.v + t * self.direction[1],
        )
    }

    pub fn endpoints(&self) -> (TorusPoint, TorusPoint) {
        (
            self.point_at(-self.length / 2.0),
            self.point_at(self.length / 2.0),
        )
    }

    pub fn midpoint(&self) -> TorusPoint {
        self.point_at(0.0)
    }

    /// The image under `A`: stretched by `λ` around `A(center)`.
    pub fn image(&self, a: &AnosovMap) -> UnstableSegment {
        UnstableSegment {
            center: a.step(&self.center, Direction::Forward),
            length: self.length * a.lambda,
            direction: self.direction,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::point::torus_distance;

    #[test]
    fn m3_matrix_and_eigenvalue() {
        let a = make_anosov(3).unwrap();
        assert_eq!(a.matrix.0, [[3, 4], [2, 3]]);
        assert!((a.lambda - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((a.lambda - 5.828_427_1).abs() < 1e-7);
    }

    #[test]
    fn m1_is_rejected() {
        assert_eq!(make_anosov(1).unwrap_err(), Error::NotHyperbolic { m: 1 });
        assert!(make_anosov(0).is_err());
    }

    #[test]
    fn eigenvectors_and_inverse_for_all_small_m() {
        for m in 2..=64 {
            let a = make_anosov(m).unwrap();
            assert_eq!(a.det(), 1);
            assert!((a.lambda * a.lambda_inv() - 1.0).abs() < 1e-12);
            let au = a.apply_plane(a.e_u, Direction::Forward);
            let as_ = a.apply_plane(a.e_s, Direction::Forward);
            for k in 0..2 {
                assert!((au[k] - a.lambda * a.e_u[k]).abs() < 1e-12 * a.lambda);
                assert!((as_[k] - a.e_s[k] / a.lambda).abs() < 1e-12);
            }
            let prod = a.imat().mul(&a.imat_inv()).unwrap();
            assert_eq!(prod, IMat2::IDENTITY);
        }
    }

    #[test]
    fn fixed_points_and_round_trips() {
        let a = make_anosov(3).unwrap();
        let o = a.step(&TorusPoint::new(0.0, 0.0), Direction::Forward);
        assert_eq!((o.u, o.v), (0.0, 0.0));
        let h = a.step(&TorusPoint::new(0.5, 0.5), Direction::Forward);
        assert!((h.u - 0.5).abs() < 1e-15 && (h.v - 0.5).abs() < 1e-15);

        let p = TorusPoint::new(0.1234, 0.9876);
        let back = a.step(&a.step(&p, Direction::Forward), Direction::Backward);
        assert!(torus_distance(p.coords(), back.coords()) < 1e-12);

        let e = TorusPoint::rational(7, 11, 97).unwrap();
        let back = a.step(&a.step(&e, Direction::Forward), Direction::Backward);
        assert_eq!(back.exact, e.exact);
    }

    #[test]
    fn unstable_segment_image() {
        let a = make_anosov(3).unwrap();
        let b = TorusPoint::new(0.3, 0.6);
        let seg = a.unstable_segment(&b, 0.01).unwrap();
        assert!(torus_distance(seg.midpoint().coords(), b.coords()) < 1e-15);
        let zero = a.unstable_segment(&b, 0.0).unwrap();
        let (p0, p1) = zero.endpoints();
        assert!(torus_distance(p0.coords(), b.coords()) < 1e-15);
        assert!(torus_distance(p1.coords(), b.coords()) < 1e-15);

        let img = seg.image(&a);
        assert!((img.length - a.lambda * 0.01).abs() < 1e-15);
        let (e0, e1) = seg.endpoints();
        let (f0, f1) = img.endpoints();
        let ae0 = a.step(&e0, Direction::Forward);
        let ae1 = a.step(&e1, Direction::Forward);
        assert!(torus_distance(ae0.coords(), f0.coords()) < 1e-9);
        assert!(torus_distance(ae1.coords(), f1.coords()) < 1e-9);
    }

    #[test]
    fn negative_length_rejected() {
        let a = make_anosov(3).unwrap();
        assert!(a
            .unstable_segment(&TorusPoint::new(0.0, 0.0), -1.0)
            .is_err());
    }
}
