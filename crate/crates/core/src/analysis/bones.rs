//! Bone certificates: a ball `U` around the repellor's fixed point with
//! `U ⋐ g_{b,q}(U)` along a periodic orbit that stays in the repellor
//! rectangles, and its propagation along the unstable leaf.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::simplex::dist;
use crate::fiber::FiberMap;
use crate::rng::{random_direction, stream_rng};
use crate::skew::SkewSystem;
use crate::torus::{periodic_point_from_word, SymbolicWord, TorusPoint};

/// Least accepted clearance of the compact inclusion.
pub const MIN_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoneCertificate {
    pub word: SymbolicWord,
    /// Exact periodic base point.
    pub b: TorusPoint,
    pub q: usize,
    /// `A^k b`, `k = 0..q`.
    pub orbit: Vec<TorusPoint>,
    pub center: Vec<f64>,
    pub radius: f64,
    /// `min_norm − radius`.
    pub margin: f64,
    /// Minimum over the boundary sample of `|g(c + r·u) − c|`.
    pub min_norm: f64,
}

/// Boundary sample of the unit sphere: `{±1}` for `d = 1`, `2¹²` directions
/// for `d ≤ 3` (uniform angles / Fibonacci sphere), `10⁴` seeded random
/// directions otherwise.
pub fn boundary_directions(d: usize) -> Vec<Vec<f64>> {
    const N: usize = 1 << 12;
    match d {
        1 => vec![vec![-1.0], vec![1.0]],
        2 => (0..N)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / N as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..N)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / N as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    vec![rho * t.cos(), rho * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = stream_rng(0xb0e, d as u64);
            (0..10_000).map(|_| random_direction(&mut rng, d)).collect()
        }
    }
}

/// Push `x` through `maps` in order.
pub(crate) fn push(s: &SkewSystem, maps: &[FiberMap], x: &[f64]) -> Vec<f64> {
    let mut x = x.to_vec();
    let mut y = vec![0.0; x.len()];
    for f in maps {
        f.apply_into(&s.family, &x, &mut y);
        std::mem::swap(&mut x, &mut y);
    }
    x
}

/// `(min boundary image distance from c, |g(c) − c|)` for `g` = the
/// composition of `maps`.
pub fn inclusion_measure(s: &SkewSystem, maps: &[FiberMap], c: &[f64], r: f64) -> (f64, f64) {
    let gc = push(s, maps, c);
    let min_norm = boundary_directions(s.d())
        .iter()
        .map(|u| {
            let x: Vec<f64> = c.iter().zip(u).map(|(a, b)| a + r * b).collect();
            dist(&push(s, maps, &x), c)
        })
        .fold(f64::INFINITY, f64::min);
    (min_norm, dist(&gc, c))
}

/// Labels of the marked rectangles `(d+1, 1)` and `(d+2, 1)`, where the
/// repellor acts alone.
pub fn repellor_labels(s: &SkewSystem) -> Result<[usize; 2]> {
    let m = s
        .partition
        .marked
        .as_ref()
        .ok_or(Error::NoMarkedRectangles)?;
    let d = s.d();
    Ok([m.label(d + 1, 1), m.label(d + 2, 1)])
}

/// Every allowed periodic word of length `1..=q_max` over the repellor
/// labels, by length and then lexicographically.
pub fn repellor_words(s: &SkewSystem, q_max: usize) -> Result<Vec<SymbolicWord>> {
    let rep = repellor_labels(s)?;
    let mut out = Vec::new();
    for q in 1..=q_max {
        out.extend(crate::torus::enumerate_periodic_words(
            &s.partition,
            &rep,
            q,
        )?);
    }
    Ok(out)
}

/// Certify `B(0, r) ⋐ g_{b,q}(B(0, r))` at the periodic point of `w`.
pub fn bone_check(s: &SkewSystem, w: &SymbolicWord, r: f64) -> Result<BoneCertificate> {
    if !(r > 0.0) {
        return Err(Error::DegenerateInput("ball radius must be positive"));
    }
    if r > s.family.r0 {
        return Err(Error::invalid(
            "r",
            format!("{r} exceeds r0 = {}", s.family.r0),
        ));
    }
    let rep = repellor_labels(s)?;
    if w.labels.iter().any(|l| !rep.contains(l)) {
        return Err(Error::invalid(
            "word",
            "letters must be the repellor rectangles (d+1,1), (d+2,1)",
        ));
    }
    let orbit = periodic_point_from_word(&s.partition, w)?
        .ok_or_else(|| Error::Hypothesis("word has no periodic point in its rectangles".into()))?;
    let maps: Vec<FiberMap> = orbit
        .orbit
        .iter()
        .map(|p| s.fiber_map(p))
        .collect::<Result<_>>()?;
    let center = vec![0.0; s.d()];
    let (min_norm, drift) = inclusion_measure(s, &maps, &center, r);
    let margin = min_norm - r;
    if margin < MIN_MARGIN || drift >= r {
        return Err(Error::InclusionFailed {
            min_norm,
            radius: r,
            min_margin: MIN_MARGIN,
        });
    }
    Ok(BoneCertificate {
        word: w.clone(),
        b: orbit.point,
        q: orbit.q,
        orbit: orbit.orbit,
        center,
        radius: r,
        margin,
        min_norm,
    })
}

/// Zero-violation check that `U` lies in the outer cover of `M_{b,kq}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceRecord {
    pub depth: usize,
    pub samples: usize,
    pub violations: usize,
    /// For `d = 1`: the inner cloud reaches both ends of `U`.
    pub inner_spans_u: Option<bool>,
}

/// Sample points of `U`: the center and the boundary directions at radii
/// `r/4, r/2, 3r/4, r`.
pub fn ball_samples(center: &[f64], r: f64) -> Vec<Vec<f64>> {
    let mut out = vec![center.to_vec()];
    for u in boundary_directions(center.len()) {
        for f in [0.25, 0.5, 0.75, 1.0] {
            out.push(center.iter().zip(&u).map(|(a, b)| a + f * r * b).collect());
        }
    }
    out
}

pub fn bone_persistence(
    s: &SkewSystem,
    cert: &BoneCertificate,
    k_max: usize,
    mesh: f64,
) -> Result<Vec<PersistenceRecord>> {
    let samples = ball_samples(&cert.center, cert.radius);
    (1..=k_max)
        .map(|k| {
            let depth = k * cert.q;
            let cover = s.slice_cover(&cert.b, depth, mesh)?;
            let violations = samples.iter().filter(|x| !cover.covers(x, 0.0)).count();
            let inner_spans_u = (s.d() == 1).then(|| {
                let lo = cover
                    .inner
                    .iter()
                    .map(|p| p[0])
                    .fold(f64::INFINITY, f64::min);
                let hi = cover
                    .inner
                    .iter()
                    .map(|p| p[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                lo <= cert.center[0] - cert.radius && hi >= cert.center[0] + cert.radius
            });
            Ok(PersistenceRecord {
                depth,
                samples: samples.len(),
                violations,
                inner_spans_u,
            })
        })
        .collect()
}

/// Image of `U` over a base point reached from the certificate's orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatedBone {
    pub base: TorusPoint,
    pub n0: usize,
    pub center: Vec<f64>,
    /// Least distance from the image of the center to the image of the
    /// boundary sample: the image contains this ball when positive.
    pub inner_radius: f64,
    /// Largest such distance: an enclosing ball.
    pub outer_radius: f64,
}

impl PropagatedBone {
    /// Volume of the inner ball (positive on success).
    pub fn inner_volume(&self) -> f64 {
        let d = self.center.len() as f64;
        let unit = std::f64::consts::PI.powf(d / 2.0) / gamma_half_plus_one(self.center.len());
        unit * self.inner_radius.powf(d)
    }
}

/// `Γ(d/2 + 1)`.
fn gamma_half_plus_one(d: usize) -> f64 {
    // Γ(1) = 1, Γ(3/2) = √π/2, Γ(x+1) = xΓ(x).
    let (mut x, mut g) = if d.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (1.5, std::f64::consts::PI.sqrt() / 2.0)
    };
    while x < d as f64 / 2.0 + 1.0 - 1e-9 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Push `U` along `forward` (`forward[k] = A^k b''`, `k = 0..q·n0`), after
/// re-running the inclusion test over the first period.
fn propagate_on(
    s: &SkewSystem,
    cert: &BoneCertificate,
    forward: &[TorusPoint],
    base: TorusPoint,
    n0: usize,
) -> Result<PropagatedBone> {
    let q = cert.q;
    let period: Vec<TorusPoint> = (0..q)
        .map(|k| {
            forward
                .get(k)
                .copied()
                .unwrap_or_else(|| s.map().step_n(&base, k, crate::torus::Direction::Forward))
        })
        .collect();
    let pmaps: Vec<FiberMap> = period
        .iter()
        .map(|p| s.fiber_map(p))
        .collect::<Result<_>>()?;
    let (min_norm, drift) = inclusion_measure(s, &pmaps, &cert.center, cert.radius);
    if min_norm - cert.radius < MIN_MARGIN || drift >= cert.radius {
        return Err(Error::NeighborhoodCheck {
            depth: q * n0,
            margin: min_norm - cert.radius,
        });
    }
    let maps: Vec<FiberMap> = forward
        .iter()
        .map(|p| s.fiber_map(p))
        .collect::<Result<_>>()?;
    let gc = push(s, &maps, &cert.center);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for u in boundary_directions(s.d()) {
        let x: Vec<f64> = cert
            .center
            .iter()
            .zip(&u)
            .map(|(a, b)| a + cert.radius * b)
            .collect();
        let dd = dist(&push(s, &maps, &x), &gc);
        lo = lo.min(dd);
        hi = hi.max(dd);
    }
    if !(lo > 0.0) {
        return Err(Error::Hypothesis(
            "propagated bone has empty interior".into(),
        ));
    }
    Ok(PropagatedBone {
        base,
        n0,
        center: gc,
        inner_radius: lo,
        outer_radius: hi,
    })
}

/// Propagate the certified ball to `M_{b′}` through `A^{−q·n0}(b′)`, which
/// must pass the inclusion test itself.
pub fn bone_propagate(
    s: &SkewSystem,
    cert: &BoneCertificate,
    b_prime: &TorusPoint,
    n0: usize,
) -> Result<PropagatedBone> {
    let steps = cert.q * n0;
    let mut back = s.map().backward_orbit(b_prime, steps);
    if !b_prime.is_exact() && steps > s.map().float_step_budget() {
        return Err(Error::FloatOrbitBudget {
            steps,
            budget: s.map().float_step_budget(),
        });
    }
    back.reverse();
    // back = [A^{-steps} b′, …, b′]; the maps act on all but the last.
    back.pop();
    propagate_on(s, cert, &back, *b_prime, n0)
}

/// The point `b + t·e_u` of the certificate's unstable leaf.
pub fn unstable_point(s: &SkewSystem, cert: &BoneCertificate, t: f64) -> TorusPoint {
    let e = s.map().e_u;
    TorusPoint::new(cert.b.u + t * e[0], cert.b.v + t * e[1])
}

/// [`bone_propagate`] for `b′ = b + t·e_u`, with the backward orbit
/// computed in closed form (`A^{−k} b′ = A^{−k} b + λ^{−k} t e_u`), so no
/// float budget applies.
pub fn bone_propagate_unstable(
    s: &SkewSystem,
    cert: &BoneCertificate,
    t: f64,
    n0: usize,
) -> Result<PropagatedBone> {
    let forward = unstable_forward_orbit(s, cert, t, n0);
    propagate_on(s, cert, &forward, unstable_point(s, cert, t), n0)
}

/// `A^k b″` for `k = 0..q·n0`, where `b″ = A^{−q·n0}(b + t e_u)`.
pub(crate) fn unstable_forward_orbit(
    s: &SkewSystem,
    cert: &BoneCertificate,
    t: f64,
    n0: usize,
) -> Vec<TorusPoint> {
    let q = cert.q;
    let steps = q * n0;
    let lam = s.map().lambda;
    let e = s.map().e_u;
    (0..steps.max(q))
        .map(|k| {
            let p = cert.orbit[k % q];
            let c = t * lam.powi(k as i32 - steps as i32);
            TorusPoint::new(p.u + c * e[0], p.v + c * e[1])
        })
        .collect()
}

/// Unstable-leaf coordinate of `b` relative to the certificate's point, when
/// `b` lies on that leaf (stable offset ≤ `tol`) — the minimal lift of the
/// displacement is used.
pub fn leaf_coordinate(
    s: &SkewSystem,
    cert: &BoneCertificate,
    b: &TorusPoint,
    tol: f64,
) -> Option<f64> {
    let wrap = |x: f64| x - x.round();
    let delta = [wrap(b.u - cert.b.u), wrap(b.v - cert.b.v)];
    let e = s.map().to_eigen(delta);
    (e[1].abs() <= tol).then_some(e[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::enumerate_periodic_words;

    fn baseline() -> SkewSystem {
        SkewSystem::from_params(12, 1, 0.05, 0.05).unwrap()
    }

    fn rep_words(s: &SkewSystem, q: usize) -> Vec<SymbolicWord> {
        let rep = repellor_labels(s).unwrap();
        enumerate_periodic_words(&s.partition, &rep, q).unwrap()
    }

    #[test]
    fn constant_repellor_word_margin() {
        let s = baseline();
        let w = &rep_words(&s, 1)[0];
        let r = s.family.r0 / 2.0;
        let c = bone_check(&s, w, r).unwrap();
        let expect = (s.family.profile.phi(r) - 1.0) * r;
        assert!((c.margin - expect).abs() < 1e-15);
        assert!(c.margin >= s.family.eps / 4.0 * r);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let s = baseline();
        let w = &rep_words(&s, 1)[0];
        assert!(matches!(
            bone_check(&s, w, 0.0),
            Err(Error::DegenerateInput(_))
        ));
        assert!(bone_check(&s, w, 0.5).is_err());
        let m = s.partition.marked.as_ref().unwrap();
        let wc = SymbolicWord::new(&s.partition, vec![m.label(0, 1)], true).unwrap();
        assert!(bone_check(&s, &wc, 0.01).is_err());
    }

    #[test]
    fn identity_propagation() {
        let s = baseline();
        let c = bone_check(&s, &rep_words(&s, 2)[1], 0.02).unwrap();
        let p = bone_propagate(&s, &c, &c.b, 0).unwrap();
        assert_eq!(p.center, c.center);
        assert!((p.inner_radius - c.radius).abs() < 1e-15);
    }

    #[test]
    fn unstable_propagation_has_volume() {
        let s = baseline();
        let c = bone_check(&s, &rep_words(&s, 1)[0], 0.02).unwrap();
        let t = s.map().lambda.powi(-(c.q as i32)) * 0.01;
        let bp = unstable_point(&s, &c, t);
        let p = bone_propagate(&s, &c, &bp, 1).unwrap();
        assert!(p.inner_radius > 0.0 && p.inner_volume() > 0.0);
        let p2 = bone_propagate_unstable(&s, &c, t, 1).unwrap();
        assert!((p2.inner_radius - p.inner_radius).abs() < 1e-9);
        assert_eq!(
            leaf_coordinate(&s, &c, &bp, 1e-12).map(|x| (x - t).abs() < 1e-12),
            Some(true)
        );
    }

    #[test]
    fn persistence_at_depths() {
        let s = baseline();
        let c = bone_check(&s, &rep_words(&s, 2)[0], 0.025).unwrap();
        for rec in bone_persistence(&s, &c, 10, 0.01).unwrap() {
            assert_eq!(rec.violations, 0);
            assert_eq!(rec.inner_spans_u, Some(true));
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((gamma_half_plus_one(1) - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((gamma_half_plus_one(2) - 1.0).abs() < 1e-15);
        assert!((gamma_half_plus_one(3) - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }
}
