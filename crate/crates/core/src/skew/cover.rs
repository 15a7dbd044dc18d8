//! Outer ball covers and inner point clouds of the fiber slices
//! `M_{b,n} = f_{A^{-1}b} ∘ ⋯ ∘ f_{A^{-n}b}(D)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::system::SkewSystem;
use crate::error::{Error, Result};
use crate::fiber::simplex::dist;
use crate::rng::grid_midpoint;
use crate::torus::TorusPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        dist(&self.center, x) <= self.radius + slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceCover {
    pub base: TorusPoint,
    pub n: usize,
    pub outer: Vec<Ball>,
    pub inner: Vec<Vec<f64>>,
    pub diam_outer: f64,
    pub diam_inner: f64,
}

/// Steps between prunings of the outer cover.
pub const PRUNE_EVERY: usize = 5;
/// Exact pairwise diameters up to this many balls/points.
const PAIRWISE_LIMIT: usize = 2048;

/// Mesh-ball cover of `D`: every point of `D` is within `mesh` of a center
/// (radii rounded outward), and all centers lie in `D`.
pub fn initial_cover(d: usize, mesh: f64) -> Vec<Ball> {
    if d == 1 {
        let count = (1.0 / mesh).ceil() as usize;
        let r = 1.0 / count as f64;
        return (0..count)
            .map(|k| Ball {
                center: vec![-1.0 + (2 * k + 1) as f64 * r],
                radius: inflate(r),
            })
            .collect();
    }
    // Cubic cells with half-diagonal `mesh`; centers outside D are
    // projected onto D (projection is 1-Lipschitz and fixes D, so the cell's
    // part in D stays within `mesh` of the projected center).
    let h = 2.0 * mesh / (d as f64).sqrt();
    let per_axis = (2.0 / h).ceil() as usize;
    let h = 2.0 / per_axis as f64;
    let half_diag = 0.5 * h * (d as f64).sqrt();
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let c: Vec<f64> = idx.iter().map(|&i| -1.0 + (i as f64 + 0.5) * h).collect();
        // Distance from the origin to the nearest point of the cell.
        let near2: f64 = c
            .iter()
            .map(|&v| (v.abs() - 0.5 * h).max(0.0).powi(2))
            .sum();
        if near2 <= 1.0 {
            let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let center = if n > 1.0 {
                c.iter().map(|v| v / n).collect()
            } else {
                c
            };
            out.push(Ball {
                center,
                radius: inflate(half_diag),
            });
        }
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Round a propagated radius outward to absorb floating-point error.
fn inflate(r: f64) -> f64 {
    r * (1.0 + 4.0 * f64::EPSILON) + 1e-15
}

/// Remove balls covered by the others without shrinking the union.
/// For `d = 1` this is the minimal interval subcover; otherwise a ball is
/// dropped when a single other ball contains it.
pub fn prune(balls: Vec<Ball>) -> Vec<Ball> {
    if balls.is_empty() {
        return balls;
    }
    if balls[0].center.len() == 1 {
        let mut iv: Vec<(f64, f64, usize)> = balls
            .iter()
            .enumerate()
            .map(|(i, b)| (b.center[0] - b.radius, b.center[0] + b.radius, i))
            .collect();
        iv.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(b.1.total_cmp(&a.1))
                .then(a.2.cmp(&b.2))
        });
        let mut keep = Vec::new();
        let mut k = 0;
        while k < iv.len() {
            // Start of a connected component of the union.
            let mut reach = iv[k].1;
            let mut chosen = iv[k].2;
            keep.push(chosen);
            k += 1;
            loop {
                // Among intervals starting within the current reach, take
                // the one extending furthest.
                let mut best: Option<(f64, usize)> = None;
                while k < iv.len() && iv[k].0 <= reach {
                    if iv[k].1 > reach && best.is_none_or(|(e, _)| iv[k].1 > e) {
                        best = Some((iv[k].1, iv[k].2));
                    }
                    k += 1;
                }
                match best {
                    Some((e, i)) => {
                        reach = e;
                        chosen = i;
                        keep.push(chosen);
                    }
                    None => break,
                }
            }
        }
        keep.sort_unstable();
        keep.dedup();
        return keep.into_iter().map(|i| balls[i].clone()).collect();
    }
    let n = balls.len();
    let mut alive = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || !alive[j] {
                continue;
            }
            let inside =
                dist(&balls[i].center, &balls[j].center) + balls[i].radius <= balls[j].radius;
            let identical = balls[i] == balls[j];
            if inside && (!identical || j < i) {
                alive[i] = false;
                break;
            }
        }
    }
    balls
        .into_iter()
        .zip(alive)
        .filter_map(|(b, a)| a.then_some(b))
        .collect()
}

/// Upper bound on the diameter of a union of balls (capped at 2, the
/// diameter of `D`, which contains every slice).
pub fn outer_diameter(balls: &[Ball]) -> f64 {
    if balls.is_empty() {
        return 0.0;
    }
    let d = balls[0].center.len();
    let bound = if d == 1 {
        let lo = balls
            .iter()
            .map(|b| b.center[0] - b.radius)
            .fold(f64::INFINITY, f64::min);
        let hi = balls
            .iter()
            .map(|b| b.center[0] + b.radius)
            .fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    } else if balls.len() <= PAIRWISE_LIMIT {
        let mut best = 0.0f64;
        for i in 0..balls.len() {
            best = best.max(2.0 * balls[i].radius);
            for j in 0..i {
                best = best.max(
                    dist(&balls[i].center, &balls[j].center) + balls[i].radius + balls[j].radius,
                );
            }
        }
        best
    } else {
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for b in balls {
            for k in 0..d {
                lo[k] = lo[k].min(b.center[k]);
                hi[k] = hi[k].max(b.center[k]);
            }
        }
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        2.0 * balls
            .iter()
            .map(|b| dist(&b.center, &mid) + b.radius)
            .fold(0.0, f64::max)
    };
    bound.min(2.0)
}

/// Lower bound on the diameter of a point cloud (exact for small clouds).
pub fn inner_diameter(points: &[Vec<f64>]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    if points[0].len() == 1 {
        let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = points
            .iter()
            .map(|p| p[0])
            .fold(f64::NEG_INFINITY, f64::max);
        return hi - lo;
    }
    if points.len() <= PAIRWISE_LIMIT {
        let mut best = 0.0f64;
        for i in 0..points.len() {
            for j in 0..i {
                best = best.max(dist(&points[i], &points[j]));
            }
        }
        return best;
    }
    // Double sweep: farthest from the first point, then farthest from that.
    let far = |from: &[f64]| {
        points
            .iter()
            .map(|p| (dist(p, from), p))
            .fold((0.0, &points[0]), |a, b| if b.0 > a.0 { b } else { a })
    };
    let (_, p1) = far(&points[0]);
    far(p1).0
}

/// `(diam_inner, diam_outer)`.
pub fn slice_diameter(c: &SliceCover) -> (f64, f64) {
    (c.diam_inner, c.diam_outer)
}

impl SliceCover {
    pub fn n_balls(&self) -> usize {
        self.outer.len()
    }

    /// Whether `x` lies in some outer ball (with additive `slack`).
    pub fn covers(&self, x: &[f64], slack: f64) -> bool {
        self.outer.iter().any(|b| b.contains(x, slack))
    }

    /// Distance from `x` to the union of the outer balls.
    pub fn distance_to_outer(&self, x: &[f64]) -> f64 {
        self.outer
            .iter()
            .map(|b| (dist(&b.center, x) - b.radius).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Structured text with 17-significant-digit decimals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "base {:.16e} {:.16e}", self.base.u, self.base.v);
        if let Some(e) = self.base.exact {
            let _ = writeln!(s, "base_exact {} {} {}", e.num[0], e.num[1], e.den);
        }
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "diam_inner {:.16e}", self.diam_inner);
        let _ = writeln!(s, "diam_outer {:.16e}", self.diam_outer);
        let _ = writeln!(s, "balls {}", self.outer.len());
        for b in &self.outer {
            s.push_str("ball");
            for c in &b.center {
                let _ = write!(s, " {c:.16e}");
            }
            let _ = writeln!(s, " r {:.16e}", b.radius);
        }
        let _ = writeln!(s, "points {}", self.inner.len());
        for p in &self.inner {
            s.push_str("point");
            for c in p {
                let _ = write!(s, " {c:.16e}");
            }
            s.push('\n');
        }
        s
    }
}

/// CSV header for [`slice_csv_row`].
pub const SLICE_CSV_HEADER: &str = "b_u,b_v,n,diam_inner,diam_outer,n_balls\n";

pub fn slice_csv_row(c: &SliceCover) -> String {
    format!(
        "{:.16e},{:.16e},{},{:.16e},{:.16e},{}\n",
        c.base.u,
        c.base.v,
        c.n,
        c.diam_inner,
        c.diam_outer,
        c.outer.len()
    )
}

impl SkewSystem {
    /// Outer cover and inner cloud of `M_{b,n}` at mesh `mesh`.
    pub fn slice_cover(&self, b: &TorusPoint, n: usize, mesh: f64) -> Result<SliceCover> {
        let maps = self.backward_maps(b, n)?;
        self.slice_cover_with_maps(b, n, mesh, &maps, true)
    }

    /// Slices at every depth `0..=n` along one backward orbit (the cover at
    /// depth `k` uses the last `k` maps).
    pub fn slice_cover_from(&self, b: &TorusPoint, n: usize, mesh: f64) -> Result<SliceCover> {
        self.slice_cover(b, n, mesh)
    }

    pub(crate) fn slice_cover_with_maps(
        &self,
        b: &TorusPoint,
        n: usize,
        mesh: f64,
        maps: &[crate::fiber::FiberMap],
        with_inner: bool,
    ) -> Result<SliceCover> {
        if !(mesh > 0.0 && mesh <= 0.1) {
            return Err(Error::invalid("mesh", format!("{mesh} is not in (0, 0.1]")));
        }
        let fam = &self.family;
        let d = fam.d;
        let mut balls = initial_cover(d, mesh);
        let mut inner: Vec<Vec<f64>> = if with_inner {
            balls.iter().map(|b| b.center.clone()).collect()
        } else {
            Vec::new()
        };
        let mut y = vec![0.0; d];
        for (k, f) in maps.iter().enumerate() {
            for ball in balls.iter_mut() {
                f.apply_into(fam, &ball.center, &mut y);
                ball.center.copy_from_slice(&y);
                ball.radius = inflate(ball.radius * f.lip);
            }
            for p in inner.iter_mut() {
                f.apply_into(fam, p, &mut y);
                p.copy_from_slice(&y);
            }
            if (k + 1) % PRUNE_EVERY == 0 || k + 1 == maps.len() {
                balls = prune(balls);
            }
        }
        let diam_outer = outer_diameter(&balls);
        let diam_inner = inner_diameter(&inner).min(diam_outer);
        Ok(SliceCover {
            base: *b,
            n,
            outer: balls,
            inner,
            diam_outer,
            diam_inner,
        })
    }

    /// Slice covers over the `base_grid × base_grid` grid of exact midpoints,
    /// in row-major grid order. Per-fiber errors are kept, not propagated.
    pub fn attractor_sample(
        &self,
        n: usize,
        base_grid: usize,
        mesh: f64,
    ) -> Result<Vec<Result<SliceCover>>> {
        if base_grid < 16 {
            return Err(Error::invalid("base_grid", "must be ≥ 16"));
        }
        Ok((0..base_grid * base_grid)
            .into_par_iter()
            .map(|k| {
                let b = grid_midpoint(k / base_grid, k % base_grid, base_grid);
                self.slice_cover(&b, n, mesh)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_exact_point, stream_rng};
    use crate::torus::{periodic_point_from_word, SymbolicWord};

    fn baseline() -> SkewSystem {
        SkewSystem::from_params(12, 1, 0.05, 0.05).unwrap()
    }

    #[test]
    fn initial_cover_covers_disk() {
        for d in 1..=3 {
            let mesh = 0.1;
            let c = initial_cover(d, mesh);
            let mut rng = stream_rng(1, d as u64);
            for _ in 0..2000 {
                let x = crate::rng::random_in_ball(&mut rng, d);
                assert!(c.iter().any(|b| b.contains(&x, 0.0)));
            }
            assert!(c.iter().all(|b| b.radius <= mesh + 1e-14));
            assert!(c
                .iter()
                .all(|b| crate::fiber::simplex::norm(&b.center) <= 1.0 + 1e-15));
        }
    }

    #[test]
    fn depth_zero_is_full_disk() {
        let s = baseline();
        let c = s.slice_cover(&TorusPoint::new(0.2, 0.3), 0, 0.01).unwrap();
        assert_eq!(c.diam_outer, 2.0);
        assert_eq!(slice_diameter(&c).1, 2.0);
    }

    #[test]
    fn constant_contraction_word_diameter() {
        let s = baseline();
        let label = s.partition.marked.as_ref().unwrap().label(0, 1);
        let w = SymbolicWord::new(&s.partition, vec![label], true).unwrap();
        let b = periodic_point_from_word(&s.partition, &w)
            .unwrap()
            .unwrap()
            .point;
        let mesh = 0.01;
        for n in [1usize, 5, 10, 20] {
            let c = s.slice_cover(&b, n, mesh).unwrap();
            let g = 0.95f64.powi(n as i32);
            assert!(c.diam_outer <= 2.0 * g + 2.0 * mesh * g);
            assert!((c.diam_outer - 2.0 * g).abs() <= 2.0 * mesh * g);
        }
    }

    #[test]
    fn cover_is_sound_on_dense_images() {
        let s = baseline();
        let mut rng = stream_rng(8, 0);
        for _ in 0..4 {
            let b = random_exact_point(&mut rng);
            for n in 0..=6 {
                let c = s.slice_cover(&b, n, 0.02).unwrap();
                let maps = s.backward_maps(&b, n).unwrap();
                for k in 0..=20_000 {
                    let mut x = vec![-1.0 + 2.0 * k as f64 / 20_000.0];
                    for f in &maps {
                        x = f.apply(&s.family, &x);
                    }
                    assert!(c.covers(&x, 0.0), "n={n} x={x:?}");
                }
                for p in &c.inner {
                    assert!(c.covers(p, 0.0));
                }
                assert!(c.diam_inner <= c.diam_outer);
            }
        }
    }

    #[test]
    fn pruning_preserves_union_d1() {
        let balls: Vec<Ball> = [
            (-0.5, 0.3),
            (-0.4, 0.1),
            (0.0, 0.25),
            (0.1, 0.05),
            (0.8, 0.1),
        ]
        .iter()
        .map(|&(c, r)| Ball {
            center: vec![c],
            radius: r,
        })
        .collect();
        let p = prune(balls.clone());
        assert_eq!(p.len(), 3);
        for k in 0..=1000 {
            let x = [-1.0 + 2.0 * k as f64 / 1000.0];
            assert_eq!(
                balls.iter().any(|b| b.contains(&x, 0.0)),
                p.iter().any(|b| b.contains(&x, 0.0))
            );
        }
    }

    #[test]
    fn diameters_of_simple_covers() {
        let one = [Ball {
            center: vec![0.1, 0.2],
            radius: 0.3,
        }];
        assert!((outer_diameter(&one) - 0.6).abs() < 1e-15);
        let pts = vec![vec![0.0, 0.0], vec![0.3, 0.4]];
        assert!(inner_diameter(&pts) >= 0.5 - 1e-15);
    }

    #[test]
    fn attractor_sample_depth_zero() {
        let s = baseline();
        let all = s.attractor_sample(0, 16, 0.05).unwrap();
        assert_eq!(all.len(), 256);
        for c in all {
            let c = c.unwrap();
            assert_eq!(c.diam_outer, 2.0);
            assert!(!c.inner.is_empty());
        }
    }

    #[test]
    fn text_export_has_17_digits() {
        let s = baseline();
        let c = s
            .slice_cover(&TorusPoint::rational(1, 3, 7).unwrap(), 3, 0.05)
            .unwrap();
        let t = c.to_text();
        assert!(t.contains("base_exact 1 3 7"));
        let line = t.lines().find(|l| l.starts_with("ball ")).unwrap();
        let mant = line
            .split_whitespace()
            .nth(1)
            .unwrap()
            .split('e')
            .next()
            .unwrap();
        assert_eq!(mant.replace(['-', '.'], "").len(), 17);
    }
}
