//! Symbolic words over the Markov partition and their periodic points.

use serde::{Deserialize, Serialize};

use super::partition::MarkovPartition;
use super::point::{ExactPoint, TorusPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicWord {
    pub labels: Vec<usize>,
    pub periodic: bool,
}

impl SymbolicWord {
    /// A word whose transitions (including the wrap-around when periodic)
    /// are all allowed.
    pub fn new(part: &MarkovPartition, labels: Vec<usize>, periodic: bool) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyWord);
        }
        for &l in &labels {
            part.rect(l)?;
        }
        for w in labels.windows(2) {
            if !part.is_allowed(w[0], w[1]) {
                return Err(Error::TransitionNotAllowed {
                    from: w[0],
                    to: w[1],
                });
            }
        }
        if periodic {
            let (first, last) = (labels[0], labels[labels.len() - 1]);
            if !part.is_allowed(last, first) {
                return Err(Error::TransitionNotAllowed {
                    from: last,
                    to: first,
                });
            }
        }
        Ok(SymbolicWord { labels, periodic })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// All cyclic words of length `q` over `alphabet` with allowed transitions,
/// one representative (the lexicographically least rotation) per necklace.
pub fn enumerate_periodic_words(
    part: &MarkovPartition,
    alphabet: &[usize],
    q: usize,
) -> Result<Vec<SymbolicWord>> {
    if alphabet.is_empty() {
        return Err(Error::invalid("alphabet", "must be nonempty"));
    }
    if q == 0 {
        return Err(Error::invalid("q", "must be ≥ 1"));
    }
    let mut alpha: Vec<usize> = alphabet.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    for &l in &alpha {
        part.rect(l)?;
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(q);
    fn rec(
        part: &MarkovPartition,
        alpha: &[usize],
        q: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<SymbolicWord>,
    ) {
        if cur.len() == q {
            if part.is_allowed(cur[q - 1], cur[0]) && is_least_rotation(cur) {
                out.push(SymbolicWord {
                    labels: cur.clone(),
                    periodic: true,
                });
            }
            return;
        }
        for &l in alpha {
            // A least rotation never starts below its first letter.
            if !cur.is_empty() && l < cur[0] {
                continue;
            }
            if cur.last().is_none_or(|&p| part.is_allowed(p, l)) {
                cur.push(l);
                rec(part, alpha, q, cur, out);
                cur.pop();
            }
        }
    }
    rec(part, &alpha, q, &mut cur, &mut out);
    Ok(out)
}

fn is_least_rotation(w: &[usize]) -> bool {
    let q = w.len();
    (1..q).all(|k| {
        let rot = w[k..].iter().chain(&w[..k]);
        w.iter().cmp(rot) != std::cmp::Ordering::Greater
    })
}

/// Periodic orbit realizing a periodic word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub point: TorusPoint,
    pub q: usize,
    /// `A^k(point)` for `k = 0..q`.
    pub orbit: Vec<TorusPoint>,
}

/// The unique point whose orbit follows `w` periodically, computed exactly.
///
/// With lifts `X_{k+1} = A·X_k + t_k` (where `t_k` is the shift that brings
/// the image of rectangle `w_k` back to the fundamental domain), periodicity
/// `X_q = X_0` gives `X_0 = (I − A^q)⁻¹ Σ A^{q−1−k} t_k`. Returns `Ok(None)`
/// when some lift falls outside its prescribed rectangle under the half-open
/// membership convention.
pub fn periodic_point_from_word(
    part: &MarkovPartition,
    w: &SymbolicWord,
) -> Result<Option<PeriodicOrbit>> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    if !w.periodic {
        return Err(Error::invalid("word", "must be periodic"));
    }
    let q = w.len();
    let a = part.map.imat();
    let aq = a.pow(q as u32)?;
    let m = aq.identity_minus();
    let det = m.det()?;
    if det == 0 {
        return Err(Error::DegenerateInput("I − A^q is singular"));
    }
    // S = Σ A^{q−1−k} t_k via Horner: S ← A·S + t_k.
    let mut s = [0i128; 2];
    for &l in &w.labels {
        let t = part.rect(l)?.shift;
        let as_ = a.apply(s)?;
        s = [
            as_[0]
                .checked_add(t[0] as i128)
                .ok_or(Error::Overflow("word sum"))?,
            as_[1]
                .checked_add(t[1] as i128)
                .ok_or(Error::Overflow("word sum"))?,
        ];
    }
    let (den, sign) = if det < 0 { (-det, -1) } else { (det, 1) };
    let adj = m.adjugate().apply(s)?;
    let mut num = [adj[0] * sign, adj[1] * sign];
    let start = num;

    let mut orbit = Vec::with_capacity(q);
    for (k, &l) in w.labels.iter().enumerate() {
        let rect = part.rect(l)?;
        let x = [num[0] as f64 / den as f64, num[1] as f64 / den as f64];
        if !rect.eigen.contains_half_open(part.map.to_eigen(x)) {
            return Ok(None);
        }
        let e = ExactPoint::new(num[0], num[1], den)?;
        orbit.push(TorusPoint::from_exact(e));
        let an = a.apply(num)?;
        let sh = rect.shift;
        num = [
            an[0]
                .checked_add(
                    den.checked_mul(sh[0] as i128)
                        .ok_or(Error::Overflow("lift"))?,
                )
                .ok_or(Error::Overflow("lift"))?,
            an[1]
                .checked_add(
                    den.checked_mul(sh[1] as i128)
                        .ok_or(Error::Overflow("lift"))?,
                )
                .ok_or(Error::Overflow("lift"))?,
        ];
        debug_assert!(k < q);
    }
    if num != start {
        return Err(Error::PartitionCheck(
            "periodic lift does not close up".into(),
        ));
    }
    Ok(Some(PeriodicOrbit {
        point: orbit[0],
        q,
        orbit,
    }))
}

/// Exact check that `(A^q − I)·b ∈ Z²`.
pub fn is_exactly_periodic(part: &MarkovPartition, b: &ExactPoint, q: u32) -> Result<bool> {
    let mq = part.map.imat().pow(q)?.sub_identity();
    let v = mq.apply([b.num[0] as i128, b.num[1] as i128])?;
    let den = b.den as i128;
    Ok(v[0].rem_euclid(den) == 0 && v[1].rem_euclid(den) == 0)
}

/// Census of points fixed by `A^q`: `(|det(A^q − I)|, enumerated count)`.
/// Every enumerated point is checked against the congruence and for
/// distinctness.
pub fn fixed_point_census(map: &super::anosov::AnosovMap, q: u32) -> Result<(i128, usize)> {
    let expected = map.fixed_point_count(q)?;
    let pts = map.fixed_points(q)?;
    let mq = map.imat().pow(q)?.sub_identity();
    let mut seen = std::collections::HashSet::with_capacity(pts.len());
    for p in &pts {
        let v = mq.apply([p.num[0] as i128, p.num[1] as i128])?;
        let den = p.den as i128;
        if v[0].rem_euclid(den) != 0 || v[1].rem_euclid(den) != 0 {
            return Err(Error::PartitionCheck(format!(
                "enumerated point {p:?} is not fixed by A^{q}"
            )));
        }
        seen.insert(*p);
    }
    Ok((expected, seen.len()))
}

/// Brute-force count: all `x ∈ (Z/D)²` with `(A^q − I)x ≡ 0 (mod D)`,
/// `D = |det(A^q − I)|`. Quadratic in `D`; meant for small `q`.
pub fn brute_force_fixed_count(map: &super::anosov::AnosovMap, q: u32) -> Result<usize> {
    let mq = map.imat().pow(q)?.sub_identity();
    let d = mq.det()?.abs();
    let [[a, b], [c, e]] = mq.0;
    let (a, b, c, e) = (
        a.rem_euclid(d),
        b.rem_euclid(d),
        c.rem_euclid(d),
        e.rem_euclid(d),
    );
    let mut count = 0;
    for x in 0..d {
        let ax = (a * x) % d;
        let cx = (c * x) % d;
        for y in 0..d {
            if (ax + b * y) % d == 0 && (cx + e * y) % d == 0 {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::anosov::{make_anosov, Direction};
    use crate::torus::partition::build_partition;

    #[test]
    fn census_m3() {
        let a = make_anosov(3).unwrap();
        let expected = [4, 32, 196, 1152, 6724, 39200];
        for q in 1..=6u32 {
            let (d, n) = fixed_point_census(&a, q).unwrap();
            assert_eq!(d, expected[q as usize - 1]);
            assert_eq!(n as i128, d);
        }
        for q in 1..=3u32 {
            assert_eq!(
                brute_force_fixed_count(&a, q).unwrap() as i128,
                expected[q as usize - 1]
            );
        }
    }

    #[test]
    fn origin_word() {
        let a = make_anosov(3).unwrap();
        let p = build_partition(&a).unwrap();
        let l = p.locate(&TorusPoint::new(0.0, 0.0));
        let w = SymbolicWord::new(&p, vec![l], true).unwrap();
        let orb = periodic_point_from_word(&p, &w).unwrap().unwrap();
        assert_eq!(orb.point.exact.unwrap(), ExactPoint::origin());
    }

    #[test]
    fn q1_words_realize_all_fixed_points() {
        let a = make_anosov(3).unwrap();
        let p = build_partition(&a).unwrap();
        let all: Vec<usize> = (0..p.len()).collect();
        let words = enumerate_periodic_words(&p, &all, 1).unwrap();
        let mut pts: Vec<ExactPoint> = words
            .iter()
            .filter_map(|w| periodic_point_from_word(&p, w).unwrap())
            .map(|o| o.point.exact.unwrap())
            .collect();
        pts.sort_by_key(|e| (e.num, e.den));
        pts.dedup();
        assert_eq!(pts.len(), 4);
    }

    #[test]
    fn two_letter_orbit_follows_word() {
        let a = make_anosov(3).unwrap();
        let p = build_partition(&a).unwrap();
        let t11 = p.labels_of_kind((1, 1));
        let w = SymbolicWord::new(&p, vec![t11[0], t11[1]], true).unwrap();
        let orb = periodic_point_from_word(&p, &w).unwrap().unwrap();
        let mut b = orb.point;
        for k in 0..2 {
            assert_eq!(p.locate(&b), w.labels[k]);
            b = a.step(&b, Direction::Forward);
        }
        assert_eq!(b.exact, orb.point.exact);
        assert!(is_exactly_periodic(&p, &orb.point.exact.unwrap(), 2).unwrap());
    }

    #[test]
    fn necklace_counts() {
        let a = make_anosov(3).unwrap();
        let p = build_partition(&a).unwrap();
        let t11 = p.labels_of_kind((1, 1));
        let alpha = [t11[0], t11[1]];
        assert_eq!(enumerate_periodic_words(&p, &alpha, 1).unwrap().len(), 2);
        assert_eq!(enumerate_periodic_words(&p, &alpha, 3).unwrap().len(), 4);
        assert_eq!(enumerate_periodic_words(&p, &alpha, 4).unwrap().len(), 6);
        // (1,2) → (1,2) is never allowed.
        let t12 = p.labels_of_kind((1, 2));
        assert!(enumerate_periodic_words(&p, &t12, 2).unwrap().is_empty());
    }

    #[test]
    fn invalid_words_rejected() {
        let a = make_anosov(3).unwrap();
        let p = build_partition(&a).unwrap();
        let t12 = p.labels_of_kind((1, 2));
        assert!(matches!(
            SymbolicWord::new(&p, vec![t12[0], t12[0]], false),
            Err(Error::TransitionNotAllowed { .. })
        ));
        assert_eq!(SymbolicWord::new(&p, vec![], true), Err(Error::EmptyWord));
    }
}
