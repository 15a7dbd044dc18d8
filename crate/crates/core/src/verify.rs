//! Numerical checks of every hypothesis inequality of the construction and
//! the minimal-`m` frontier in `(m, eps, d)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::deviation::jittered_grid;
use crate::error::{Error, Result};
use crate::fiber::blend::probe_points;
use crate::fiber::{
    average_log_lipschitz, lipschitz_in_base_estimate, make_family, AverageLogLipschitz,
    FiberMapFamily,
};
use crate::rng::{random_in_ball, stream_rng};
use crate::skew::system::{ASSEMBLY_RESOLUTION, BASE_LIPSCHITZ_PAIRS, BASE_STEP};
use crate::skew::SkewSystem;
use crate::torus::partition::best_selection;
use crate::torus::{build_partition, make_anosov};

/// Finite-difference step in the fiber.
pub const FIBER_STEP: f64 = 1e-6;
/// Base sample: one jittered point per cell of a `100 × 100` grid.
pub const SPLITTING_BASE_GRID: usize = 100;
/// Fiber sample size.
pub const SPLITTING_FIBER_POINTS: usize = 1000;
/// Tolerance of the refinement-stability test of the average contraction.
pub const REFINEMENT_TOL: f64 = 1e-3;
/// Largest `m` tried by the frontier searches that build partitions.
pub const FRONTIER_MAX_M: i64 = 64;

/// Largest singular value of a row-major `rows × cols` matrix.
fn operator_norm(rows: usize, cols: usize, a: &[f64]) -> f64 {
    if rows == 1 || cols == 1 {
        return a.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    DMatrix::from_row_slice(rows, cols, a)
        .singular_values()
        .max()
}

/// Sampled partial-derivative sup-norms of `(b, x) ↦ f_b(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBounds {
    /// `sup ‖∂f_b(x)/∂b‖`.
    pub base: f64,
    /// `sup ‖∂f_b(x)/∂x‖`.
    pub fiber: f64,
    pub base_samples: usize,
    pub fiber_samples: usize,
}

fn fiber_sample(fam: &FiberMapFamily, n: usize) -> Vec<Vec<f64>> {
    let d = fam.d;
    let mut out = probe_points(fam);
    if d == 1 {
        out.extend((0..n).map(|k| vec![-1.0 + (2 * k + 1) as f64 / n as f64]));
    } else {
        let mut rng = stream_rng(0xf1be, d as u64);
        out.extend((0..n).map(|_| random_in_ball(&mut rng, d)));
    }
    out
}

/// Central differences (`h = 1e-5` in the base, `1e-6` in the fiber) over
/// `base_grid²` jittered base points and the fiber sample.
pub fn derivative_bounds(
    s: &SkewSystem,
    base_grid: usize,
    fiber_points: usize,
) -> Result<DerivativeBounds> {
    let d = s.d();
    let fam = &s.family;
    let xs = fiber_sample(fam, fiber_points);
    let bases = jittered_grid(base_grid);
    let per_base: Vec<(f64, f64)> = bases
        .par_iter()
        .map(|b| -> Result<(f64, f64)> {
            let [u, v] = b.coords();
            let hb = BASE_STEP;
            let f = s.fiber_map_at([u, v])?;
            let fu = [s.fiber_map_at([u + hb, v])?, s.fiber_map_at([u - hb, v])?];
            let fv = [s.fiber_map_at([u, v + hb])?, s.fiber_map_at([u, v - hb])?];
            let (mut y0, mut y1) = (vec![0.0; d], vec![0.0; d]);
            let mut jb = vec![0.0; 2 * d];
            let mut jx = vec![0.0; d * d];
            let mut xp = vec![0.0; d];
            let (mut best_b, mut best_x) = (0.0f64, 0.0f64);
            for x in &xs {
                for (col, pair) in [&fu, &fv].into_iter().enumerate() {
                    pair[0].apply_into(fam, x, &mut y0);
                    pair[1].apply_into(fam, x, &mut y1);
                    for r in 0..d {
                        jb[2 * r + col] = (y0[r] - y1[r]) / (2.0 * hb);
                    }
                }
                best_b = best_b.max(operator_norm(d, 2, &jb));
                for col in 0..d {
                    xp.copy_from_slice(x);
                    xp[col] += FIBER_STEP;
                    f.apply_into(fam, &xp, &mut y0);
                    xp[col] -= 2.0 * FIBER_STEP;
                    f.apply_into(fam, &xp, &mut y1);
                    for r in 0..d {
                        jx[d * r + col] = (y0[r] - y1[r]) / (2.0 * FIBER_STEP);
                    }
                }
                best_x = best_x.max(operator_norm(d, d, &jx));
            }
            Ok((best_b, best_x))
        })
        .collect::<Result<_>>()?;
    Ok(DerivativeBounds {
        base: per_base.iter().map(|p| p.0).fold(0.0, f64::max),
        fiber: per_base.iter().map(|p| p.1).fold(0.0, f64::max),
        base_samples: bases.len(),
        fiber_samples: xs.len(),
    })
}

/// `max(λ⁻¹ + ‖∂f/∂b‖, ‖∂f/∂x‖) < λ`.
pub fn splitting_holds(lambda: f64, base: f64, fiber: f64) -> bool {
    (1.0 / lambda + base).max(fiber) < lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub lambda: f64,
    pub derivatives: DerivativeBounds,
    /// `max(λ⁻¹ + ‖∂f/∂b‖, ‖∂f/∂x‖)`.
    pub lhs: f64,
    pub pass: bool,
}

pub fn dominated_splitting_check(s: &SkewSystem) -> Result<SplittingReport> {
    let der = derivative_bounds(s, SPLITTING_BASE_GRID, SPLITTING_FIBER_POINTS)?;
    Ok(splitting_report(s.map().lambda, der))
}

fn splitting_report(lambda: f64, der: DerivativeBounds) -> SplittingReport {
    SplittingReport {
        lambda,
        derivatives: der,
        lhs: (1.0 / lambda + der.base).max(der.fiber),
        pass: splitting_holds(lambda, der.base, der.fiber),
    }
}

/// `20·d·eps / (λ − 1 − eps)`.
pub fn slope_formula_bound(d: usize, eps: f64, lambda: f64) -> f64 {
    20.0 * d as f64 * eps / (lambda - 1.0 - eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    /// `‖∂f/∂b‖ / (λ − ‖∂f/∂x‖)`.
    pub k0: f64,
    pub bound: f64,
    pub within_bound: bool,
}

pub fn slope_bound(s: &SkewSystem) -> Result<SlopeReport> {
    let der = derivative_bounds(s, SPLITTING_BASE_GRID, SPLITTING_FIBER_POINTS)?;
    slope_from(s, &der)
}

/// Slope of the strong stable direction from measured derivative bounds.
pub fn slope_from(s: &SkewSystem, der: &DerivativeBounds) -> Result<SlopeReport> {
    let lambda = s.map().lambda;
    if !(lambda > der.fiber) {
        return Err(Error::Hypothesis(format!(
            "λ = {lambda} does not exceed ‖∂f/∂x‖ = {}",
            der.fiber
        )));
    }
    let k0 = der.base / (lambda - der.fiber);
    let bound = slope_formula_bound(s.d(), s.family.eps, lambda);
    Ok(SlopeReport {
        k0,
        bound,
        within_bound: k0 <= bound,
    })
}

/// `λ(m) = m + √(m²−1)`.
pub fn lambda_of(m: i64) -> f64 {
    let mf = m as f64;
    mf + (mf * mf - 1.0).sqrt()
}

/// Least `m ≥ 2` with `2·k0_bound < 0.01·eps`, i.e. `λ(m) > 4000d + 1 + eps`.
pub fn graph_density_min_m(d: usize, eps: f64) -> i64 {
    let ok = |m: i64| {
        2.0 * slope_formula_bound(d, eps, lambda_of(m)) < 0.01 * eps && lambda_of(m) > 1.0 + eps
    };
    // Closed-form seed: λ ≈ 2m, so m ≈ (4000d + 1 + eps)/2.
    let mut m = (((4000 * d) as f64 + 1.0 + eps) / 2.0).floor().max(2.0) as i64;
    while m > 2 && ok(m - 1) {
        m -= 1;
    }
    while !ok(m) {
        m += 1;
    }
    m
}

/// Barycentric grid of `J = conv(0.5·p_i)` with `n` subdivisions.
fn simplex_grid(fam: &FiberMapFamily, n: usize) -> Vec<Vec<f64>> {
    let d = fam.d;
    let mut out = Vec::new();
    let mut idx = vec![0usize; d + 1];
    fn rec(
        k: usize,
        left: usize,
        idx: &mut Vec<usize>,
        fam: &FiberMapFamily,
        n: usize,
        out: &mut Vec<Vec<f64>>,
    ) {
        let d = fam.d;
        if k == d {
            idx[d] = left;
            let mut x = vec![0.0; d];
            for (j, &c) in idx.iter().enumerate() {
                for (xr, vr) in x.iter_mut().zip(&fam.vertices[j]) {
                    *xr += 0.5 * vr * c as f64 / n as f64;
                }
            }
            out.push(x);
            return;
        }
        for c in 0..=left {
            idx[k] = c;
            rec(k + 1, left - c, idx, fam, n, out);
        }
    }
    rec(0, n, &mut idx, fam, n, &mut out);
    out
}

/// Facet distances of `x` in a nondegenerate simplex (negative outside).
struct SimplexFacets {
    origin: DVector<f64>,
    inv: DMatrix<f64>,
    grad_norms: Vec<f64>,
}

impl SimplexFacets {
    fn new(vertices: &[Vec<f64>]) -> Result<SimplexFacets> {
        let d = vertices.len() - 1;
        let origin = DVector::from_column_slice(&vertices[0]);
        let t = DMatrix::from_fn(d, d, |r, c| vertices[c + 1][r] - vertices[0][r]);
        let inv = t
            .try_inverse()
            .ok_or(Error::DegenerateInput("degenerate simplex"))?;
        let mut grad_norms = Vec::with_capacity(d + 1);
        let sum = inv.row_sum();
        grad_norms.push(sum.norm());
        for r in 0..d {
            grad_norms.push(inv.row(r).norm());
        }
        Ok(SimplexFacets {
            origin,
            inv,
            grad_norms,
        })
    }

    fn min_distance(&self, x: &[f64]) -> f64 {
        let bary = &self.inv * (DVector::from_column_slice(x) - &self.origin);
        let l0 = 1.0 - bary.sum();
        let mut best = l0 / self.grad_norms[0];
        for (k, l) in bary.iter().enumerate() {
            best = best.min(l / self.grad_norms[k + 1]);
        }
        best
    }
}

/// Grid subdivisions of the `J` cover check, by dimension.
fn cover_subdivisions(d: usize) -> usize {
    match d {
        1 => 400,
        2 => 120,
        3 => 40,
        _ => 12,
    }
}

/// Geometric closure tolerance of the cover check.
const COVER_TOL: f64 = 1e-12;

/// Grid points `x ∈ J` whose closed `r`-ball lies in no `f_i(J)`.
pub fn uncovered_points(fam: &FiberMapFamily, r: f64) -> Result<(usize, usize)> {
    let d = fam.d;
    let c = 1.0 - fam.eps;
    let images: Vec<SimplexFacets> = (0..=d)
        .map(|i| {
            let p = &fam.vertices[i];
            let verts: Vec<Vec<f64>> = fam
                .vertices
                .iter()
                .map(|q| (0..d).map(|k| p[k] + c * (0.5 * q[k] - p[k])).collect())
                .collect();
            SimplexFacets::new(&verts)
        })
        .collect::<Result<_>>()?;
    let grid = simplex_grid(fam, cover_subdivisions(d));
    let bad = grid
        .par_iter()
        .filter(|x| !images.iter().any(|im| im.min_distance(x) >= r - COVER_TOL))
        .count();
    Ok((bad, grid.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDensityReport {
    pub k0_bound: f64,
    /// `2·k0_bound < 0.01·eps`.
    pub condition_a: bool,
    pub grid_points: usize,
    pub uncovered: usize,
    /// Every grid point's closed `4·k0_bound`-ball lies in some `f_i(J)`.
    pub condition_b: bool,
    pub min_m: i64,
    pub pass: bool,
}

/// Graph-density condition for a family over a base of expansion `λ`.
pub fn graph_density_for(fam: &FiberMapFamily, lambda: f64) -> Result<GraphDensityReport> {
    let k0_bound = slope_formula_bound(fam.d, fam.eps, lambda);
    let condition_a = k0_bound > 0.0 && 2.0 * k0_bound < 0.01 * fam.eps;
    let (uncovered, grid_points) = uncovered_points(fam, 4.0 * k0_bound.max(0.0))?;
    let condition_b = uncovered == 0;
    Ok(GraphDensityReport {
        k0_bound,
        condition_a,
        grid_points,
        uncovered,
        condition_b,
        min_m: graph_density_min_m(fam.d, fam.eps),
        pass: condition_a && condition_b,
    })
}

pub fn graph_density_condition(s: &SkewSystem) -> Result<GraphDensityReport> {
    graph_density_for(&s.family, s.map().lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseLipschitzReport {
    pub estimate: f64,
    pub target: f64,
    pub pairs: usize,
    pub pass: bool,
}

pub fn lipschitz_in_base_check(s: &SkewSystem, seed: u64) -> Result<BaseLipschitzReport> {
    let estimate = lipschitz_in_base_estimate(
        &s.family,
        &s.partition,
        BASE_LIPSCHITZ_PAIRS,
        BASE_STEP,
        seed,
    )?;
    let target = 20.0 * s.d() as f64 * s.family.eps;
    Ok(BaseLipschitzReport {
        estimate,
        target,
        pairs: BASE_LIPSCHITZ_PAIRS,
        pass: estimate <= target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub average: AverageLogLipschitz,
    pub pass: bool,
}

pub fn average_contraction_check(s: &SkewSystem) -> Result<ContractionReport> {
    let average = average_log_lipschitz(&s.family, &s.partition, ASSEMBLY_RESOLUTION)?;
    Ok(ContractionReport {
        average,
        pass: average.value < 0.0 && average.refined < 0.0 && average.delta < REFINEMENT_TOL,
    })
}

/// Every check on one system. `pass` covers the hypotheses a single
/// system must satisfy (splitting, slope, Lipschitz-in-base, average
/// contraction); the graph-density condition is a large-`m` sufficient
/// condition and is reported with its minimal `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub m: i64,
    pub d: usize,
    pub eps: f64,
    pub r0: f64,
    pub seed: u64,
    pub widened: bool,
    pub weight_width: f64,
    pub splitting: SplittingReport,
    pub slope: Option<SlopeReport>,
    pub base_lipschitz: BaseLipschitzReport,
    pub contraction: ContractionReport,
    pub graph_density: GraphDensityReport,
    pub pass: bool,
}

pub fn verify_all(s: &SkewSystem, seed: u64) -> Result<VerifyReport> {
    let der = derivative_bounds(s, SPLITTING_BASE_GRID, SPLITTING_FIBER_POINTS)?;
    let splitting = splitting_report(s.map().lambda, der);
    let slope = match slope_from(s, &der) {
        Ok(r) => Some(r),
        Err(Error::Hypothesis(_)) => None,
        Err(e) => return Err(e),
    };
    let base_lipschitz = lipschitz_in_base_check(s, seed)?;
    let contraction = average_contraction_check(s)?;
    let graph_density = graph_density_condition(s)?;
    let pass = splitting.pass
        && slope.is_some_and(|r| r.within_bound)
        && base_lipschitz.pass
        && contraction.pass;
    Ok(VerifyReport {
        m: s.map().m,
        d: s.d(),
        eps: s.family.eps,
        r0: s.family.r0,
        seed,
        widened: s.flags.is_some_and(|f| f.widened),
        weight_width: s.family.weight_width,
        splitting,
        slope,
        base_lipschitz,
        contraction,
        graph_density,
        pass,
    })
}

/// One line of the text verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: &'static str,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
}

impl VerifyReport {
    pub fn records(&self) -> Vec<CheckRecord> {
        let rec = |name, pass, measured, bound, tolerance| CheckRecord {
            name,
            pass,
            measured,
            bound,
            tolerance,
        };
        let sp = &self.splitting;
        let avg = &self.contraction.average;
        let gd = &self.graph_density;
        vec![
            rec("dominated_splitting", sp.pass, sp.lhs, sp.lambda, 0.0),
            match self.slope {
                Some(r) => rec("slope_bound", r.within_bound, r.k0, r.bound, 0.0),
                None => rec("slope_bound", false, f64::INFINITY, 0.0, 0.0),
            },
            rec(
                "lipschitz_in_base",
                self.base_lipschitz.pass,
                self.base_lipschitz.estimate,
                self.base_lipschitz.target,
                0.0,
            ),
            rec(
                "average_contraction",
                avg.value < 0.0 && avg.refined < 0.0,
                avg.value,
                0.0,
                0.0,
            ),
            rec(
                "contraction_refinement",
                avg.delta < REFINEMENT_TOL,
                avg.delta,
                0.0,
                REFINEMENT_TOL,
            ),
            rec(
                "graph_density_a",
                gd.condition_a,
                2.0 * gd.k0_bound,
                0.01 * self.eps,
                0.0,
            ),
            rec(
                "graph_density_b",
                gd.condition_b,
                gd.uncovered as f64,
                0.0,
                COVER_TOL,
            ),
        ]
    }

    /// `name pass measured bound tolerance`, one check per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("name pass measured bound tolerance\n");
        for r in self.records() {
            out.push_str(&format!(
                "{} {} {:e} {:e} {:e}\n",
                r.name,
                if r.pass { "PASS" } else { "FAIL" },
                r.measured,
                r.bound,
                r.tolerance
            ));
        }
        out.push_str(&format!(
            "overall {}\n",
            if self.pass { "PASS" } else { "FAIL" }
        ));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub d: usize,
    pub eps: f64,
    pub r0: f64,
    /// Least `m` admitting a marked-rectangle selection.
    pub selection_m: Option<i64>,
    /// Least `m` (among those with a selection) passing dominated splitting.
    pub splitting_m: Option<i64>,
    pub graph_density_m: i64,
}

/// Least `m ≤ FRONTIER_MAX_M` with a marked-rectangle selection for `d`.
pub fn selection_min_m(d: usize) -> Result<Option<i64>> {
    let required = 1.0 / (10.0 * d as f64);
    for m in 2..=FRONTIER_MAX_M {
        let part = build_partition(&make_anosov(m)?)?;
        let (sep, groups) = best_selection(&part, d);
        if groups.is_some() && sep >= required {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Minimal `m` per check, searched upward and confirmed by direct checks.
pub fn feasibility_frontier(d: usize, eps: f64, r0: f64) -> Result<FeasibilityReport> {
    if d == 0 {
        return Err(Error::invalid("d", "must be ≥ 1"));
    }
    let selection_m = selection_min_m(d)?;
    let mut splitting_m = None;
    if let Some(m0) = selection_m {
        for m in m0..=FRONTIER_MAX_M {
            let s = SkewSystem::from_params(m, d, eps, r0)?;
            if dominated_splitting_check(&s)?.pass {
                splitting_m = Some(m);
                break;
            }
        }
    }
    // Touch the family so invalid (eps, r0) are reported here as well.
    make_family(d, eps, r0)?;
    Ok(FeasibilityReport {
        d,
        eps,
        r0,
        selection_m,
        splitting_m,
        graph_density_m: graph_density_min_m(d, eps),
    })
}
