//! Two-parallelogram pre-Markov partition and its Markov refinement.
//!
//! Geometry is done in eigen coordinates `(u, s)` (components along `e_u`,
//! `e_s`), where `A` acts as `diag(λ, λ⁻¹)`. The lattice vectors `(1,0)` and
//! `(0,−1)` have eigen coordinates `(a₁, b₁)` and `(−a₂, b₂)`, and the two
//! pieces are `Q₁ = [0,a₁]×[0,b₂]` and `Q₂ = [−a₂,0]×[b₂−b₁,b₂]`. Both pieces
//! have their stable sides on `W^s(0)` translates and their unstable sides
//! on `W^u(0)`, which is what makes the refinement Markov.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::anosov::AnosovMap;
use super::point::TorusPoint;
use crate::error::{Error, Result};

/// Axis-aligned box in eigen coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenBox {
    pub u0: f64,
    pub u1: f64,
    pub s0: f64,
    pub s1: f64,
}

impl EigenBox {
    pub fn span_u(&self) -> f64 {
        self.u1 - self.u0
    }

    pub fn span_s(&self) -> f64 {
        self.s1 - self.s0
    }

    /// Half-open membership: min sides included, max sides excluded.
    pub fn contains_half_open(&self, e: [f64; 2]) -> bool {
        self.u0 <= e[0] && e[0] < self.u1 && self.s0 <= e[1] && e[1] < self.s1
    }

    pub fn contains_closed(&self, e: [f64; 2], tol: f64) -> bool {
        self.u0 - tol <= e[0]
            && e[0] <= self.u1 + tol
            && self.s0 - tol <= e[1]
            && e[1] <= self.s1 + tol
    }

    fn violation(&self, e: [f64; 2]) -> f64 {
        (self.u0 - e[0])
            .max(e[0] - self.u1)
            .max(self.s0 - e[1])
            .max(e[1] - self.s1)
            .max(0.0)
    }

    fn translated(&self, du: f64, ds: f64) -> EigenBox {
        EigenBox {
            u0: self.u0 + du,
            u1: self.u1 + du,
            s0: self.s0 + ds,
            s1: self.s1 + ds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovRectangle {
    pub label: usize,
    /// The `(u0, s0)` corner, wrapped onto the torus.
    pub corner: TorusPoint,
    pub span_u: f64,
    pub span_s: f64,
    /// `(a, c)`: the rectangle lies in `Q_a` and its image in `Q_c`.
    pub kind: (u8, u8),
    /// Representative position in the plane, eigen coordinates.
    pub eigen: EigenBox,
    /// Integer vector with `A·X + shift ∈ Q_c` for every `X` in the
    /// representative of this rectangle.
    pub shift: [i64; 2],
    /// Plane corners of the representative, counterclockwise from `(u0, s0)`.
    pub plane_corners: [[f64; 2]; 4],
}

impl MarkovRectangle {
    pub fn area(&self, map: &AnosovMap) -> f64 {
        self.span_u * self.span_s * map.eigen_area_factor()
    }

    fn plane_bbox(&self) -> [f64; 4] {
        let xs = self.plane_corners.map(|c| c[0]);
        let ys = self.plane_corners.map(|c| c[1]);
        [
            xs.iter().cloned().fold(f64::INFINITY, f64::min),
            xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            ys.iter().cloned().fold(f64::INFINITY, f64::min),
            ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ]
    }
}

/// Marked rectangles: `groups[i] = [label of (i,1), label of (i,2)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedRectangles {
    pub d: usize,
    pub groups: Vec<[usize; 2]>,
    /// Achieved minimum torus distance between rectangles of distinct groups.
    pub separation: f64,
    pub required: f64,
}

impl MarkedRectangles {
    pub fn label(&self, i: usize, j: usize) -> usize {
        self.groups[i][j - 1]
    }
}

/// Result of intersecting `A(R)` with `R′` over nearby lattice translates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Largest `u`-extent of a positive-area component.
    pub u_overlap: f64,
    pub s_overlap: f64,
    /// `u_overlap` equals `span_u(R′)` within tolerance.
    pub full: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovPartition {
    pub map: AnosovMap,
    /// `Q₁`, `Q₂` in eigen coordinates.
    pub pre_markov: [EigenBox; 2],
    pub rectangles: Vec<MarkovRectangle>,
    /// `transitions[r]` = sorted labels reachable from `r` in one step.
    pub transitions: Vec<Vec<usize>>,
    pub marked: Option<MarkedRectangles>,
    /// Largest deviation `|u_overlap − span_u(R′)|` over allowed transitions.
    pub crossing_defect: f64,
    pub total_area: f64,
    #[serde(skip)]
    translates: Vec<[f64; 2]>,
}

/// Full-crossing tolerance for the Markov check.
pub const CROSSING_TOL: f64 = 1e-9;
const SPAN_EPS: f64 = 1e-10;
const MIN_AREA: f64 = 1e-12;
/// Lattice translates searched when comparing sets near the fundamental domain.
const TRANSLATE_RADIUS: i64 = 2;

fn lattice_translates() -> Vec<[i64; 2]> {
    let r = TRANSLATE_RADIUS;
    let mut out = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            out.push([i, j]);
        }
    }
    out
}

pub fn build_partition(map: &AnosovMap) -> Result<MarkovPartition> {
    let w1 = map.to_eigen([1.0, 0.0]);
    let w2 = map.to_eigen([0.0, -1.0]);
    let (a1, b1, a2, b2) = (w1[0], w1[1], -w2[0], w2[1]);
    if !(a1 > 0.0 && b1 > 0.0 && a2 > 0.0 && b2 > 0.0) {
        return Err(Error::PartitionCheck(
            "lattice basis is not positively oriented in eigen coordinates".into(),
        ));
    }
    let q = [
        EigenBox {
            u0: 0.0,
            u1: a1,
            s0: 0.0,
            s1: b2,
        },
        EigenBox {
            u0: -a2,
            u1: 0.0,
            s0: b2 - b1,
            s1: b2,
        },
    ];
    let lam = map.lambda;
    let reach_u = a1 + a2 + 1.0;
    let reach_s = (lam + 1.0) * (b1 + b2);
    let k = (reach_u + reach_s).ceil() as i64 + 1;

    struct Raw {
        a: u8,
        c: u8,
        eb: EigenBox,
        tau: [i64; 2],
    }
    let mut raw = Vec::new();
    for (ai, qa) in q.iter().enumerate() {
        for (ci, qc) in q.iter().enumerate() {
            let pre = EigenBox {
                u0: qc.u0 / lam,
                u1: qc.u1 / lam,
                s0: qc.s0 * lam,
                s1: qc.s1 * lam,
            };
            for i in -k..=k {
                for j in -k..=k {
                    let t = map.to_eigen([i as f64, j as f64]);
                    let b = pre.translated(t[0], t[1]);
                    let eb = EigenBox {
                        u0: qa.u0.max(b.u0),
                        u1: qa.u1.min(b.u1),
                        s0: qa.s0.max(b.s0),
                        s1: qa.s1.min(b.s1),
                    };
                    if eb.span_u() <= SPAN_EPS || eb.span_s() <= SPAN_EPS {
                        continue;
                    }
                    let area = eb.span_u() * eb.span_s() * map.eigen_area_factor();
                    if area <= MIN_AREA {
                        return Err(Error::DegenerateRectangle {
                            q_from: ai as u8 + 1,
                            q_to: ci as u8 + 1,
                            area,
                        });
                    }
                    if (eb.s0 - qa.s0).abs() > CROSSING_TOL || (eb.s1 - qa.s1).abs() > CROSSING_TOL
                    {
                        return Err(Error::PartitionCheck(format!(
                            "piece of Q{} ∩ A⁻¹Q{} does not span the stable height",
                            ai + 1,
                            ci + 1
                        )));
                    }
                    raw.push(Raw {
                        a: ai as u8 + 1,
                        c: ci as u8 + 1,
                        eb,
                        tau: [i, j],
                    });
                }
            }
        }
    }
    raw.sort_by(|x, y| x.a.cmp(&y.a).then(x.eb.u0.total_cmp(&y.eb.u0)));

    // Strips of each Q_a must tile its u-range; snap shared edges so the
    // half-open membership is an exact partition.
    for a in 1..=2u8 {
        let qa = q[a as usize - 1];
        let idx: Vec<usize> = (0..raw.len()).filter(|&r| raw[r].a == a).collect();
        if idx.is_empty() {
            return Err(Error::PartitionCheck(format!("Q{a} has no rectangles")));
        }
        let mut edge = qa.u0;
        for &r in &idx {
            if (raw[r].eb.u0 - edge).abs() > CROSSING_TOL {
                return Err(Error::PartitionCheck(format!(
                    "gap or overlap in Q{a} at u = {edge}"
                )));
            }
            raw[r].eb.u0 = edge;
            raw[r].eb.s0 = qa.s0;
            raw[r].eb.s1 = qa.s1;
            edge = raw[r].eb.u1;
        }
        if (edge - qa.u1).abs() > CROSSING_TOL {
            return Err(Error::PartitionCheck(format!("Q{a} is not covered")));
        }
        let last = *idx.last().expect("nonempty");
        raw[last].eb.u1 = qa.u1;
    }

    let am = map.matrix.0;
    let rectangles: Vec<MarkovRectangle> = raw
        .iter()
        .enumerate()
        .map(|(label, r)| {
            let eb = r.eb;
            let corners = [
                map.from_eigen([eb.u0, eb.s0]),
                map.from_eigen([eb.u1, eb.s0]),
                map.from_eigen([eb.u1, eb.s1]),
                map.from_eigen([eb.u0, eb.s1]),
            ];
            let shift = [
                -(am[0][0] * r.tau[0] + am[0][1] * r.tau[1]),
                -(am[1][0] * r.tau[0] + am[1][1] * r.tau[1]),
            ];
            MarkovRectangle {
                label,
                corner: TorusPoint::new(corners[0][0], corners[0][1]),
                span_u: eb.span_u(),
                span_s: eb.span_s(),
                kind: (r.a, r.c),
                eigen: eb,
                shift,
                plane_corners: corners,
            }
        })
        .collect();

    let total_area: f64 = rectangles.iter().map(|r| r.area(map)).sum();
    if (total_area - 1.0).abs() > 1e-9 {
        return Err(Error::PartitionCheck(format!(
            "rectangle areas sum to {total_area}, not 1"
        )));
    }

    let translates: Vec<[f64; 2]> = lattice_translates()
        .into_iter()
        .map(|k| map.to_eigen([k[0] as f64, k[1] as f64]))
        .collect();

    let mut part = MarkovPartition {
        map: map.clone(),
        pre_markov: q,
        rectangles,
        transitions: Vec::new(),
        marked: None,
        crossing_defect: 0.0,
        total_area,
        translates,
    };

    // Each image must land inside Q_c and span its full unstable width.
    for r in &part.rectangles {
        let img = part.image_box(r.label);
        let qc = part.pre_markov[r.kind.1 as usize - 1];
        if !(qc.contains_closed([img.u0, img.s0], CROSSING_TOL)
            && qc.contains_closed([img.u1, img.s1], CROSSING_TOL))
        {
            return Err(Error::PartitionCheck(format!(
                "image of rectangle {} leaves Q{}",
                r.label, r.kind.1
            )));
        }
    }

    let n = part.rectangles.len();
    let mut transitions = vec![Vec::new(); n];
    let mut defect = 0.0f64;
    for (from, row) in transitions.iter_mut().enumerate() {
        for to in 0..n {
            let compatible = part.rectangles[from].kind.1 == part.rectangles[to].kind.0;
            let cross = part.crossing(from, to);
            if compatible {
                if !cross.full {
                    return Err(Error::PartitionCheck(format!(
                        "type-compatible transition {from} -> {to} does not cross fully (u-overlap {})",
                        cross.u_overlap
                    )));
                }
                defect = defect.max((cross.u_overlap - part.rectangles[to].span_u).abs());
                row.push(to);
            } else if cross.full {
                return Err(Error::PartitionCheck(format!(
                    "type-incompatible pair {from} -> {to} crosses fully"
                )));
            }
        }
    }
    part.transitions = transitions;
    part.crossing_defect = defect;
    Ok(part)
}

impl MarkovPartition {
    pub fn len(&self) -> usize {
        self.rectangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rectangles.is_empty()
    }

    pub fn rect(&self, label: usize) -> Result<&MarkovRectangle> {
        self.rectangles.get(label).ok_or(Error::UnknownLabel(label))
    }

    pub fn is_allowed(&self, from: usize, to: usize) -> bool {
        self.transitions
            .get(from)
            .is_some_and(|t| t.binary_search(&to).is_ok())
    }

    pub fn labels_of_kind(&self, kind: (u8, u8)) -> Vec<usize> {
        self.rectangles
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.label)
            .collect()
    }

    fn translates(&self) -> std::borrow::Cow<'_, [[f64; 2]]> {
        if self.translates.is_empty() {
            // Deserialized partitions do not carry the cache.
            std::borrow::Cow::Owned(
                lattice_translates()
                    .into_iter()
                    .map(|k| self.map.to_eigen([k[0] as f64, k[1] as f64]))
                    .collect(),
            )
        } else {
            std::borrow::Cow::Borrowed(&self.translates)
        }
    }

    /// Representative of `A(R) + shift`, eigen coordinates.
    pub fn image_box(&self, label: usize) -> EigenBox {
        let r = &self.rectangles[label];
        let lam = self.map.lambda;
        let t = self.map.to_eigen([r.shift[0] as f64, r.shift[1] as f64]);
        EigenBox {
            u0: lam * r.eigen.u0 + t[0],
            u1: lam * r.eigen.u1 + t[0],
            s0: r.eigen.s0 / lam + t[1],
            s1: r.eigen.s1 / lam + t[1],
        }
    }

    /// Geometric crossing of `A(R_from)` with `R_to` on the torus.
    pub fn crossing(&self, from: usize, to: usize) -> Crossing {
        let img = self.image_box(from);
        let target = self.rectangles[to].eigen;
        let mut best = Crossing {
            u_overlap: 0.0,
            s_overlap: 0.0,
            full: false,
        };
        for t in self.translates().iter() {
            let b = img.translated(t[0], t[1]);
            let du = b.u1.min(target.u1) - b.u0.max(target.u0);
            let ds = b.s1.min(target.s1) - b.s0.max(target.s0);
            if du > SPAN_EPS && ds > SPAN_EPS && du > best.u_overlap {
                best.u_overlap = du;
                best.s_overlap = ds;
            }
        }
        best.full = best.u_overlap > 0.0
            && (best.u_overlap - self.rectangles[to].span_u).abs() <= CROSSING_TOL;
        best
    }

    /// Fundamental-domain representative of `p`: `(piece index 0/1, eigen
    /// coordinates)`. Half-open; points that rounding puts outside every
    /// piece go to the nearest one.
    fn fundamental(&self, p: [f64; 2]) -> (usize, [f64; 2]) {
        let e = self.map.to_eigen(p);
        let mut fallback = (f64::INFINITY, 0usize, e);
        for t in self.translates().iter() {
            let et = [e[0] + t[0], e[1] + t[1]];
            for (qi, q) in self.pre_markov.iter().enumerate() {
                if q.contains_half_open(et) {
                    return (qi, et);
                }
                let v = q.violation(et);
                if v < fallback.0 {
                    fallback = (v, qi, et);
                }
            }
        }
        (fallback.1, fallback.2)
    }

    /// The label of the rectangle containing `p` (half-open convention).
    pub fn locate(&self, p: &TorusPoint) -> usize {
        let (qi, e) = self.fundamental(p.coords());
        let a = qi as u8 + 1;
        let lo = self.rectangles.partition_point(|r| r.kind.0 < a);
        let hi = self.rectangles.partition_point(|r| r.kind.0 <= a);
        let strips = &self.rectangles[lo..hi];
        let k = strips.partition_point(|r| r.eigen.u1 <= e[0]);
        lo + k.min(strips.len() - 1)
    }

    pub fn contains(&self, label: usize, p: &TorusPoint) -> bool {
        self.locate(p) == label
    }

    /// Flat-torus distance from `p` to rectangle `label`, capped at `cap`
    /// (any value ≥ `cap` is reported as `cap`).
    pub fn distance_to_rect(&self, label: usize, p: [f64; 2], cap: f64) -> f64 {
        let r = &self.rectangles[label];
        let bb = r.plane_bbox();
        let mut best = cap;
        let lo_i = (bb[0] - cap - p[0]).ceil() as i64;
        let hi_i = (bb[1] + cap - p[0]).floor() as i64;
        let lo_j = (bb[2] - cap - p[1]).ceil() as i64;
        let hi_j = (bb[3] + cap - p[1]).floor() as i64;
        for i in lo_i..=hi_i {
            for j in lo_j..=hi_j {
                let q = [p[0] + i as f64, p[1] + j as f64];
                let dist = point_parallelogram_distance(&self.map, r, q);
                if dist < best {
                    best = dist;
                    if best == 0.0 {
                        return 0.0;
                    }
                }
            }
        }
        best
    }

    /// Flat-torus distance between two rectangles (0 when they touch).
    pub fn rect_distance(&self, x: usize, y: usize) -> f64 {
        let rx = &self.rectangles[x];
        let ry = &self.rectangles[y];
        let mut best = f64::INFINITY;
        for k in lattice_translates() {
            let shifted: [[f64; 2]; 4] = ry
                .plane_corners
                .map(|c| [c[0] + k[0] as f64, c[1] + k[1] as f64]);
            let t = self.map.to_eigen([k[0] as f64, k[1] as f64]);
            let eb = ry.eigen.translated(t[0], t[1]);
            let overlap_u = eb.u1.min(rx.eigen.u1) - eb.u0.max(rx.eigen.u0);
            let overlap_s = eb.s1.min(rx.eigen.s1) - eb.s0.max(rx.eigen.s0);
            if overlap_u >= 0.0 && overlap_s >= 0.0 {
                return 0.0;
            }
            best = best.min(polygon_distance(&rx.plane_corners, &shifted));
        }
        best
    }

    /// CSV with one row per rectangle.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,corner_u,corner_v,span_u,span_s,type_a,type_c\n");
        for r in &self.rectangles {
            let _ = writeln!(
                s,
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
                r.label, r.corner.u, r.corner.v, r.span_u, r.span_s, r.kind.0, r.kind.1
            );
        }
        s
    }

    /// Transition relation and marked rectangles as JSON.
    pub fn transitions_json(&self) -> String {
        let adjacency: Vec<serde_json::Value> = self
            .transitions
            .iter()
            .enumerate()
            .map(|(l, t)| serde_json::json!({ "label": l, "to": t }))
            .collect();
        let v = serde_json::json!({
            "m": self.map.m,
            "rectangles": self.rectangles.len(),
            "total_area": self.total_area,
            "crossing_defect": self.crossing_defect,
            "transitions": adjacency,
            "marked": self.marked,
        });
        serde_json::to_string_pretty(&v).expect("json") + "\n"
    }
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (ap[0] - t * ab[0]).hypot(ap[1] - t * ab[1])
}

fn point_parallelogram_distance(map: &AnosovMap, r: &MarkovRectangle, q: [f64; 2]) -> f64 {
    if r.eigen.contains_closed(map.to_eigen(q), 0.0) {
        return 0.0;
    }
    let c = &r.plane_corners;
    (0..4)
        .map(|k| seg_dist(q, c[k], c[(k + 1) % 4]))
        .fold(f64::INFINITY, f64::min)
}

/// Distance between two disjoint convex quadrilaterals.
fn polygon_distance(p: &[[f64; 2]; 4], q: &[[f64; 2]; 4]) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..4 {
        for v in p {
            best = best.min(seg_dist(*v, q[k], q[(k + 1) % 4]));
        }
        for v in q {
            best = best.min(seg_dist(*v, p[k], p[(k + 1) % 4]));
        }
    }
    best
}

/// Choose `d+3` groups `(R_{i,1}, R_{i,2})` of types `(1,1)`, `(2,2)` with
/// pairwise inter-group distance ≥ `1/(10d)`.
///
/// Greedy farthest-point selection, started from every candidate first
/// group; the best run wins, ties broken by label order.
pub fn select_marked_rectangles(part: &MarkovPartition, d: usize) -> Result<MarkovPartition> {
    if d == 0 {
        return Err(Error::invalid("d", "must be ≥ 1"));
    }
    let required = 1.0 / (10.0 * d as f64);
    let (best, groups) = best_selection(part, d);
    match groups {
        Some(groups) if best >= required => {
            let mut out = part.clone();
            out.marked = Some(MarkedRectangles {
                d,
                groups,
                separation: best,
                required,
            });
            Ok(out)
        }
        _ => Err(Error::InfeasibleSelection {
            best: best.max(0.0),
            required,
        }),
    }
}

/// Best greedy separation and its groups (`None` when there are too few
/// rectangles of the required types).
pub fn best_selection(part: &MarkovPartition, d: usize) -> (f64, Option<Vec<[usize; 2]>>) {
    let g = d + 3;
    let t1 = part.labels_of_kind((1, 1));
    let t2 = part.labels_of_kind((2, 2));
    if t1.len() < g || t2.len() < g {
        return (0.0, None);
    }
    let n = part.len();
    let mut dist = vec![0.0; n * n];
    let cand: Vec<usize> = t1.iter().chain(t2.iter()).copied().collect();
    for (ix, &x) in cand.iter().enumerate() {
        for &y in &cand[ix + 1..] {
            let v = part.rect_distance(x, y);
            dist[x * n + y] = v;
            dist[y * n + x] = v;
        }
    }
    let dd = |x: usize, y: usize| dist[x * n + y];

    let mut best: (f64, Option<Vec<[usize; 2]>>) = (-1.0, None);
    for &s1 in &t1 {
        for &s2 in &t2 {
            let mut groups = vec![[s1, s2]];
            let mut sep = f64::INFINITY;
            let mut used = vec![false; n];
            used[s1] = true;
            used[s2] = true;
            while groups.len() < g {
                let mut pick: Option<(f64, [usize; 2])> = None;
                for &x in t1.iter().filter(|&&x| !used[x]) {
                    let dx = groups
                        .iter()
                        .flat_map(|gr| gr.iter())
                        .map(|&z| dd(x, z))
                        .fold(f64::INFINITY, f64::min);
                    if pick.is_some_and(|(p, _)| dx <= p) {
                        continue;
                    }
                    for &y in t2.iter().filter(|&&y| !used[y]) {
                        let dy = groups
                            .iter()
                            .flat_map(|gr| gr.iter())
                            .map(|&z| dd(y, z))
                            .fold(f64::INFINITY, f64::min);
                        let score = dx.min(dy);
                        if pick.is_none_or(|(p, _)| score > p) {
                            pick = Some((score, [x, y]));
                        }
                    }
                }
                let (score, pair) = pick.expect("enough candidates");
                used[pair[0]] = true;
                used[pair[1]] = true;
                sep = sep.min(score);
                groups.push(pair);
            }
            if sep > best.0 {
                best = (sep, Some(groups));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::anosov::make_anosov;

    #[test]
    fn area_and_counts_m3() {
        let a = make_anosov(3).unwrap();
        let p = build_partition(&a).unwrap();
        assert!((p.total_area - 1.0).abs() < 1e-9);
        assert_eq!(p.len(), 12);
        assert_eq!(p.labels_of_kind((1, 1)).len(), 3);
        assert_eq!(p.labels_of_kind((1, 2)).len(), 2);
        assert_eq!(p.labels_of_kind((2, 1)).len(), 4);
        assert_eq!(p.labels_of_kind((2, 2)).len(), 3);
    }

    #[test]
    fn type_a1_reachable_from_every_c1() {
        let a = make_anosov(3).unwrap();
        let p = build_partition(&a).unwrap();
        for r in p.rectangles.iter().filter(|r| r.kind.1 == 1) {
            for r2 in p.rectangles.iter().filter(|r| r.kind.0 == 1) {
                assert!(p.is_allowed(r.label, r2.label));
                assert!(p.crossing(r.label, r2.label).full);
            }
        }
    }

    #[test]
    fn locate_agrees_with_image_type() {
        // A point of rectangle (a, c) maps into Q_c.
        let a = make_anosov(4).unwrap();
        let p = build_partition(&a).unwrap();
        for k in 0..400 {
            let pt = TorusPoint::new(
                (k as f64 * 0.618_033_9).fract(),
                (k as f64 * 0.414_213_5).fract(),
            );
            let r = p.locate(&pt);
            let img = a.step(&pt, super::super::anosov::Direction::Forward);
            let r2 = p.locate(&img);
            assert_eq!(p.rectangles[r].kind.1, p.rectangles[r2].kind.0);
            assert!(p.is_allowed(r, r2));
        }
    }

    #[test]
    fn distance_zero_inside_and_positive_outside() {
        let a = make_anosov(3).unwrap();
        let p = build_partition(&a).unwrap();
        let r = &p.rectangles[0];
        let mid = a.from_eigen([
            0.5 * (r.eigen.u0 + r.eigen.u1),
            0.5 * (r.eigen.s0 + r.eigen.s1),
        ]);
        let mid_t = TorusPoint::new(mid[0], mid[1]);
        assert_eq!(p.distance_to_rect(0, mid_t.coords(), 1.0), 0.0);
        assert_eq!(p.locate(&mid_t), 0);
        for l in 1..p.len() {
            assert!(
                p.distance_to_rect(l, mid_t.coords(), 1.0) > 0.0 || p.rect_distance(0, l) == 0.0
            );
        }
    }

    #[test]
    fn small_m_selection_is_infeasible() {
        let a = make_anosov(2).unwrap();
        let p = build_partition(&a).unwrap();
        match select_marked_rectangles(&p, 1) {
            Err(Error::InfeasibleSelection { required, .. }) => {
                assert!((required - 0.1).abs() < 1e-15)
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let a = make_anosov(3).unwrap();
        let p = build_partition(&a).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("label,corner_u,corner_v,span_u,span_s,type_a,type_c\n"));
        assert_eq!(csv.lines().count(), 13);
    }
}
