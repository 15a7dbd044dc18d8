//! The skew product `F(b, x) = (A b, f_b(x))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::blend::weights_at;
use crate::fiber::{
    average_log_lipschitz, lipschitz_in_base_estimate, make_family, FiberMap, FiberMapFamily,
};
use crate::torus::{
    build_partition, make_anosov, select_marked_rectangles, AnosovMap, Direction, MarkovPartition,
    TorusPoint,
};

/// Base pairs used by the assembly-time Lipschitz-in-base check.
pub const BASE_LIPSCHITZ_PAIRS: usize = 100_000;
/// Finite-difference step in base coordinates.
pub const BASE_STEP: f64 = 1e-5;
/// Fixed seed of the assembly-time check (independent of user seeds so that
/// the assembled system depends only on `(m, d, eps, r0)`).
pub const ASSEMBLY_SEED: u64 = 0x00b0_e5ee_d000;
/// Resolution of the assembly-time average-contraction quadrature.
pub const ASSEMBLY_RESOLUTION: usize = 128;

/// Facts established while assembling a system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssemblyFlags {
    /// Sampled Lipschitz constant of `b ↦ f_b` at the final bump width.
    pub base_lipschitz: f64,
    /// `20·d·eps`.
    pub base_lipschitz_target: f64,
    /// Whether the bump width was doubled once to meet the target.
    pub widened: bool,
    /// `∫ log L_b db` (midpoint rule at [`ASSEMBLY_RESOLUTION`]).
    pub average_log_lipschitz: f64,
    /// The average is negative.
    pub contracts_on_average: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewSystem {
    pub partition: MarkovPartition,
    pub family: FiberMapFamily,
    pub flags: Option<AssemblyFlags>,
}

impl SkewSystem {
    /// Assemble from a marked partition and a family; the bump width is
    /// doubled once if the sampled Lipschitz-in-base constant exceeds
    /// `20·d·eps`.
    pub fn new(partition: MarkovPartition, family: FiberMapFamily) -> Result<SkewSystem> {
        if partition.marked.is_none() && family.constant_weights.is_none() {
            return Err(Error::NoMarkedRectangles);
        }
        let target = 20.0 * family.d as f64 * family.eps;
        let mut family = family;
        let mut widened = false;
        let mut est = lipschitz_in_base_estimate(
            &family,
            &partition,
            BASE_LIPSCHITZ_PAIRS,
            BASE_STEP,
            ASSEMBLY_SEED,
        )?;
        if est > target {
            family.weight_width *= 2.0;
            widened = true;
            est = lipschitz_in_base_estimate(
                &family,
                &partition,
                BASE_LIPSCHITZ_PAIRS,
                BASE_STEP,
                ASSEMBLY_SEED,
            )?;
        }
        let avg = average_log_lipschitz(&family, &partition, ASSEMBLY_RESOLUTION)?;
        Ok(SkewSystem {
            partition,
            family,
            flags: Some(AssemblyFlags {
                base_lipschitz: est,
                base_lipschitz_target: target,
                widened,
                average_log_lipschitz: avg.value,
                contracts_on_average: avg.value < 0.0,
            }),
        })
    }

    /// Assemble without any checks or width adjustment.
    pub fn unchecked(partition: MarkovPartition, family: FiberMapFamily) -> SkewSystem {
        SkewSystem {
            partition,
            family,
            flags: None,
        }
    }

    /// Build everything from scalar parameters.
    pub fn from_params(m: i64, d: usize, eps: f64, r0: f64) -> Result<SkewSystem> {
        let a = make_anosov(m)?;
        let p = select_marked_rectangles(&build_partition(&a)?, d)?;
        SkewSystem::new(p, make_family(d, eps, r0)?)
    }

    pub fn map(&self) -> &AnosovMap {
        &self.partition.map
    }

    pub fn d(&self) -> usize {
        self.family.d
    }

    pub fn fiber_map(&self, b: &TorusPoint) -> Result<FiberMap> {
        self.fiber_map_at(b.coords())
    }

    pub(crate) fn fiber_map_at(&self, b: [f64; 2]) -> Result<FiberMap> {
        Ok(FiberMap::from_weights(
            &self.family,
            &weights_at(&self.family, &self.partition, b)?,
        ))
    }

    /// `L_b`.
    pub fn lipschitz_at(&self, b: &TorusPoint) -> Result<f64> {
        Ok(self.fiber_map(b)?.lip)
    }

    /// `F(b, x) = (A b, f_b(x))`.
    pub fn step(&self, b: &TorusPoint, x: &[f64]) -> Result<(TorusPoint, Vec<f64>)> {
        self.family.check_dim(x)?;
        let y = self.fiber_map(b)?.apply(&self.family, x);
        Ok((self.map().step(b, Direction::Forward), y))
    }

    /// `f_{b,n}(x) = f_{A^{n−1}b} ∘ ⋯ ∘ f_b(x)`.
    pub fn iterate_fiber(&self, b: &TorusPoint, n: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.family.check_dim(x)?;
        let mut b = *b;
        let mut x = x.to_vec();
        let mut y = vec![0.0; x.len()];
        for _ in 0..n {
            self.fiber_map(&b)?.apply_into(&self.family, &x, &mut y);
            std::mem::swap(&mut x, &mut y);
            b = self.map().step(&b, Direction::Forward);
        }
        Ok(x)
    }

    /// `[A⁻¹b, …, A⁻ⁿb]`; float base points are limited to the float step
    /// budget.
    pub fn backward_orbit(&self, b: &TorusPoint, n: usize) -> Result<Vec<TorusPoint>> {
        if !b.is_exact() {
            let budget = self.map().float_step_budget();
            if n > budget {
                return Err(Error::FloatOrbitBudget { steps: n, budget });
            }
        }
        let mut orbit = self.map().backward_orbit(b, n);
        orbit.remove(0);
        Ok(orbit)
    }

    /// Fiber maps along the backward orbit, in application order
    /// (`f_{A^{-n}b}` first).
    pub fn backward_maps(&self, b: &TorusPoint, n: usize) -> Result<Vec<FiberMap>> {
        let orbit = self.backward_orbit(b, n)?;
        orbit.iter().rev().map(|p| self.fiber_map(p)).collect()
    }

    /// `(1/n) Σ_{i=1..n} log L_{A^{-i} b}`.
    pub fn backward_log_lipschitz_mean(&self, b: &TorusPoint, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::invalid("n", "must be ≥ 1"));
        }
        let maps = self.backward_maps(b, n)?;
        Ok(maps.iter().map(|f| f.lip.ln()).sum::<f64>() / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::simplex::{dist, norm};
    use crate::rng::{random_exact_point, random_in_ball, stream_rng};
    use crate::torus::{periodic_point_from_word, SymbolicWord};

    fn baseline() -> SkewSystem {
        SkewSystem::from_params(12, 1, 0.05, 0.05).unwrap()
    }

    #[test]
    fn assembly_widens_once_and_meets_targets() {
        let s = baseline();
        let f = s.flags.unwrap();
        assert!(f.widened);
        assert!(f.base_lipschitz <= f.base_lipschitz_target);
        assert!(f.contracts_on_average);
        assert_eq!(s.family.weight_width, 1.0 / 20.0);
    }

    #[test]
    fn fixed_point_in_first_contraction_rectangle() {
        let s = baseline();
        let label = s.partition.marked.as_ref().unwrap().label(0, 1);
        let w = SymbolicWord::new(&s.partition, vec![label], true).unwrap();
        let b = periodic_point_from_word(&s.partition, &w)
            .unwrap()
            .unwrap()
            .point;
        let p0 = s.family.vertices[0].clone();
        let (b1, x1) = s.step(&b, &p0).unwrap();
        assert_eq!(b1.exact, b.exact);
        assert_eq!(x1, p0);
        let x = vec![0.7];
        for n in [0usize, 1, 5, 12] {
            let y = s.iterate_fiber(&b, n, &x).unwrap();
            let expect = 0.95f64.powi(n as i32) * dist(&x, &p0);
            assert!((dist(&y, &p0) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn composition_is_consistent() {
        let s = baseline();
        let mut rng = stream_rng(2, 0);
        for _ in 0..50 {
            let b = random_exact_point(&mut rng);
            let x = random_in_ball(&mut rng, 1);
            let whole = s.iterate_fiber(&b, 9, &x).unwrap();
            let head = s.iterate_fiber(&b, 4, &x).unwrap();
            let b4 = s.map().step_n(&b, 4, Direction::Forward);
            let tail = s.iterate_fiber(&b4, 5, &head).unwrap();
            assert!(dist(&whole, &tail) < 1e-10);
        }
    }

    #[test]
    fn fiber_outputs_stay_in_disk() {
        let s = SkewSystem::from_params(12, 2, 0.1, 0.05).unwrap();
        let mut rng = stream_rng(4, 0);
        for _ in 0..10_000 {
            let b = TorusPoint::new(rand::Rng::random(&mut rng), rand::Rng::random(&mut rng));
            let x = random_in_ball(&mut rng, 2);
            assert!(norm(&s.step(&b, &x).unwrap().1) <= 1.0);
        }
    }

    #[test]
    fn float_budget_enforced() {
        let s = baseline();
        let b = TorusPoint::new(0.3, 0.4);
        let budget = s.map().float_step_budget();
        assert!(s.backward_orbit(&b, budget).is_ok());
        assert!(matches!(
            s.backward_orbit(&b, budget + 1),
            Err(Error::FloatOrbitBudget { .. })
        ));
        let e = TorusPoint::rational(3, 5, 17).unwrap();
        assert!(s.backward_orbit(&e, 100).is_ok());
    }
}
