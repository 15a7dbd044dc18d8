//! Acceptance suite: one test per acceptance criterion, each with its
//! runtime bound.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use bony_core::analysis::classify::{
    diameter_sequence, sampled_depths, tail_decay_rate, CLASSIFY_MESH,
};
use bony_core::analysis::{
    bone_check, bone_persistence, choose_delta, dimension_bound, dimension_report,
    large_deviation_beta, likely_limit_sample, repellor_words,
};
use bony_core::fiber::make_family;
use bony_core::rng::{random_exact_point, stream_rng};
use bony_core::skew::SkewSystem;
use bony_core::torus::symbolic::brute_force_fixed_count;
use bony_core::torus::{
    build_partition, fixed_point_census, make_anosov, periodic_point_from_word, SymbolicWord,
};
use bony_core::verify::{
    average_contraction_check, dominated_splitting_check, graph_density_for, graph_density_min_m,
    lambda_of, lipschitz_in_base_check, REFINEMENT_TOL,
};
use bony_core::Error;

/// Least `m` with a marked-rectangle selection for `d = 1`.
const BASELINE_M: i64 = 12;
const EPS: f64 = 0.05;
const R0: f64 = 0.05;
const MESH: f64 = 0.01;

fn baseline() -> SkewSystem {
    SkewSystem::from_params(BASELINE_M, 1, EPS, R0).unwrap()
}

fn within(start: Instant, limit: Duration) {
    let t = start.elapsed();
    assert!(t < limit, "took {t:?}, limit {limit:?}");
}

#[test]
fn criterion_1_anosov_exactness_and_census() {
    let start = Instant::now();
    let a = make_anosov(3).unwrap();
    assert_eq!(a.matrix.0, [[3, 4], [2, 3]]);
    assert_eq!(a.det(), 1);
    assert!((a.lambda - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    for q in 1..=6u32 {
        let (det, count) = fixed_point_census(&a, q).unwrap();
        assert_eq!(
            det,
            a.imat().pow(q).unwrap().sub_identity().det().unwrap().abs()
        );
        assert_eq!(det as usize, count, "q = {q}");
        if q <= 3 {
            assert_eq!(brute_force_fixed_count(&a, q).unwrap(), count);
        }
    }
    within(start, Duration::from_secs(1));
}

#[test]
fn criterion_2_markov_crossing() {
    let start = Instant::now();
    for m in 3..=5 {
        let p = build_partition(&make_anosov(m).unwrap()).unwrap();
        assert!((p.total_area - 1.0).abs() < 1e-9, "m = {m}");
        let mut transitions = 0;
        for from in 0..p.len() {
            for &to in &p.transitions[from] {
                let c = p.crossing(from, to);
                assert!(c.full, "m = {m}: {from} -> {to}");
                assert!((c.u_overlap - p.rect(to).unwrap().span_u).abs() <= 1e-9);
                transitions += 1;
            }
        }
        assert!(transitions > 0);
        assert!(p.crossing_defect <= 1e-9);
    }
    within(start, Duration::from_secs(60));
}

/// The selection of `d + 3` marked pairs needs `m ≥ 12` for `d = 1`, so
/// the gates are evaluated at that baseline; `m = 3` cannot be assembled.
#[test]
fn criterion_3_literal_m3_construction_is_infeasible() {
    let err = SkewSystem::from_params(3, 1, EPS, R0).unwrap_err();
    assert!(matches!(err, Error::InfeasibleSelection { .. }), "{err}");
}

#[test]
fn criterion_3_hypothesis_gates() {
    let start = Instant::now();
    let s = baseline();
    let split = dominated_splitting_check(&s).unwrap();
    assert!(split.pass, "{split:?}");
    let c = average_contraction_check(&s).unwrap();
    assert!(c.average.value < 0.0 && c.average.refined < 0.0);
    assert!(c.average.delta < REFINEMENT_TOL);
    assert!(c.pass);
    let lip = lipschitz_in_base_check(&s, 0).unwrap();
    assert!(lip.estimate <= 20.0 * EPS, "{lip:?}");
    // Graph density: formula only, at the computed minimal m.
    let m = graph_density_min_m(1, EPS);
    assert_eq!(m, 2001);
    let fam = make_family(1, EPS, R0).unwrap();
    assert!(graph_density_for(&fam, lambda_of(m)).unwrap().pass);
    assert!(
        !graph_density_for(&fam, lambda_of(m - 1))
            .unwrap()
            .condition_a
    );
    within(start, Duration::from_secs(300));
}

#[test]
fn criterion_4_bone_persistence() {
    let start = Instant::now();
    let s = baseline();
    let words = repellor_words(&s, 4).unwrap();
    let mut chosen: Vec<SymbolicWord> = (1..=4)
        .map(|q| words.iter().find(|w| w.len() == q).unwrap().clone())
        .collect();
    chosen.push(
        words
            .iter()
            .filter(|w| w.len() == 4)
            .nth(1)
            .unwrap()
            .clone(),
    );
    assert_eq!(chosen.len(), 5);
    for w in &chosen {
        let cert = bone_check(&s, w, R0 / 2.0).unwrap();
        assert!(cert.margin > 0.0);
        let recs = bone_persistence(&s, &cert, 10, MESH).unwrap();
        assert_eq!(recs.len(), 10);
        for (k, r) in recs.iter().enumerate() {
            assert_eq!(r.depth, (k + 1) * w.len());
            assert_eq!(r.violations, 0, "word {:?} depth {}", w.labels, r.depth);
        }
    }
    within(start, Duration::from_secs(120));
}

#[test]
fn criterion_5_constant_contracting_words() {
    let s = baseline();
    let marked = s.partition.marked.as_ref().unwrap();
    let c = 1.0 - EPS;
    let mut checked = 0;
    for i in 0..=s.d() {
        for j in 1..=2 {
            let w = SymbolicWord::new(&s.partition, vec![marked.label(i, j)], true).unwrap();
            let Some(orbit) = periodic_point_from_word(&s.partition, &w).unwrap() else {
                continue;
            };
            for n in 0..=60 {
                let cover = s.slice_cover(&orbit.point, n, MESH).unwrap();
                let exact = 2.0 * c.powi(n as i32);
                let slack = 2.0 * MESH * c.powi(n as i32);
                assert!(
                    (cover.diam_outer - exact).abs() <= slack,
                    "n={n}: {}",
                    cover.diam_outer
                );
                assert!(cover.diam_outer >= exact - 1e-12);
                assert!(
                    cover.diam_inner <= exact + 1e-12 && cover.diam_inner >= exact - slack - 1e-12,
                    "n={n}: inner {} exact {exact} slack {slack}",
                    cover.diam_inner
                );
            }
            checked += 1;
        }
    }
    assert!(checked > s.d());
}

/// The fitted rate matches the orbit average only once the cover radius
/// term dominates, so the fit uses the tail `n ∈ [400, 800]`.
#[test]
fn criterion_5_random_fibers_follow_orbit_average() {
    let start = Instant::now();
    let s = baseline();
    let n_max = 800;
    let depths = sampled_depths(n_max);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let mut rng = stream_rng(0x5eed_0005, k);
        let b = random_exact_point(&mut rng);
        let diam = diameter_sequence(&s, &b, &depths, CLASSIFY_MESH).unwrap();
        let rate = tail_decay_rate(&depths, &diam).unwrap();
        let avg = s.backward_log_lipschitz_mean(&b, n_max).unwrap();
        assert!(avg < 0.0);
        let rel = ((rate - avg) / avg).abs();
        worst = worst.max(rel);
        assert!(rel <= 0.25, "fiber {k}: rate {rate} vs average {avg}");
    }
    eprintln!("criterion 5: worst relative deviation {worst:.4}");
    within(start, Duration::from_secs(300));
}

#[test]
fn criterion_6_dimension() {
    let start = Instant::now();
    let bound = dimension_bound(1.0, 5.8284, 1.05, 0.95, 0.9, 0.1, 1).unwrap();
    assert!((bound - 2.973_241_443_817_549_6).abs() < 1e-6);
    assert!((choose_delta(0.9, 1.05, 5.8284, 1.0, 1) - 0.147_063_148_916_144_58).abs() < 1e-6);
    let d10 = choose_delta(0.9, 1.05, 5.8284, 1.0, 10);
    assert!((d10 / 4.731_933_236_598_107e-9 - 1.0).abs() < 1e-6);

    let s = baseline();
    let r = dimension_report(&s, 10, 256, MESH).unwrap();
    assert!(r.bound < 3.0);
    assert!(r.empirical_dim <= r.bound + 0.2, "{r:?}");
    assert!(r.empirical_dim < 3.0, "{r:?}");
    assert_eq!(r.failed_fibers, 0);
    within(start, Duration::from_secs(600));
}

#[test]
fn criterion_7_large_deviation() {
    let start = Instant::now();
    let s = baseline();
    let avg = bony_core::fiber::blend::log_lipschitz_mean(&s.family, &s.partition, 256).unwrap();
    let grid = 256;
    let ld = large_deviation_beta(&s, (avg / 2.0).exp(), &[5, 10, 15, 20], grid).unwrap();
    let cell = 1.0 / (grid * grid) as f64;
    for w in ld.fractions.windows(2) {
        assert!(w[1].1 <= w[0].1 + cell, "{:?}", ld.fractions);
    }
    assert!(ld.beta > 0.0, "{ld:?}");
    within(start, Duration::from_secs(300));
}

#[test]
fn criterion_8_likely_limit_containment() {
    let start = Instant::now();
    let s = baseline();
    let r = likely_limit_sample(&s, 200, 10, 100, 10, MESH, 0).unwrap();
    assert!(r.max_distance <= 2.0 * MESH, "{r:?}");
    assert!(r.within_tolerance);
    assert_eq!(r.nonempty_fraction, 1.0);
    within(start, Duration::from_secs(300));
}

fn run_bony(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_bony"))
        .args(args)
        .output()
        .expect("run bony")
        .status
        .code()
        .unwrap_or(-1)
}

fn digests(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let bytes = std::fs::read(entry.path()).unwrap();
        let hex: String = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        out.insert(entry.file_name().to_string_lossy().into_owned(), hex);
    }
    out
}

#[test]
fn criterion_9_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.cfg");
    std::fs::write(
        &config,
        "m=12\nd=1\neps=0.05\nr0=0.05\nseed=7\nmesh=0.01\ngrid=32\nn=10\n",
    )
    .unwrap();
    let cfg = config.to_str().unwrap();
    for cmd in [
        "verify",
        "partition",
        "bones",
        "graph",
        "dimension",
        "sample",
    ] {
        let a = tmp.path().join(format!("{cmd}-a"));
        let b = tmp.path().join(format!("{cmd}-b"));
        let code_a = run_bony(&[cmd, "--config", cfg, "--out", a.to_str().unwrap()]);
        let code_b = run_bony(&[
            cmd,
            "--config",
            cfg,
            "--workers",
            "2",
            "--out",
            b.to_str().unwrap(),
        ]);
        assert_eq!(code_a, 0, "{cmd}");
        assert_eq!(code_b, code_a, "{cmd}");
        let (da, db) = (digests(&a), digests(&b));
        assert!(!da.is_empty(), "{cmd} wrote nothing");
        assert_eq!(da, db, "{cmd} outputs differ");
    }
}
