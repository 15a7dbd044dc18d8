//! Subcommand bodies. Each returns its output files; nothing is written
//! here.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use bony_core::analysis::classify::CLASSIFY_MESH;
use bony_core::analysis::deviation::jittered_grid;
use bony_core::analysis::{
    bone_check, bone_persistence, bone_propagate_unstable, classify_fiber, dimension_report,
    likely_limit_sample, repellor_words, BoneCertificate, Class, Evidence,
};
use bony_core::skew::SkewSystem;
use bony_core::torus::{
    build_partition, fixed_point_census, make_anosov, select_marked_rectangles,
};
use bony_core::verify::verify_all;
use bony_core::Error;

use crate::config::Params;
use crate::image::{log_diameter_image, Gray};

/// Whether every checked hypothesis held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    HypothesisFailure,
}

pub struct Output {
    pub status: Status,
    pub summary: String,
    pub files: Vec<(String, Vec<u8>)>,
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Errors that mean the construction's hypotheses fail for valid input.
pub fn is_hypothesis_error(e: &Error) -> bool {
    !matches!(
        e,
        Error::InvalidParameter { .. } | Error::NotHyperbolic { .. } | Error::Parse { .. }
    )
}

fn status(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::HypothesisFailure
    }
}

fn word_text(labels: &[usize]) -> String {
    labels
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

fn system(p: &Params) -> Result<SkewSystem, Error> {
    SkewSystem::from_params(p.m, p.d, p.eps, p.r0)
}

/// Radius of the certified bone balls.
fn bone_radius(p: &Params) -> f64 {
    p.r0 / 2.0
}

pub fn verify(p: &Params) -> Result<Output> {
    let s = match system(p) {
        Ok(s) => s,
        Err(e) if is_hypothesis_error(&e) => {
            let report = json!({
                "m": p.m, "d": p.d, "eps": p.eps, "r0": p.r0, "seed": p.seed,
                "error": e.to_string(), "pass": false,
            });
            let text = format!(
                "name pass measured bound tolerance\nconstruction FAIL {e}\noverall FAIL\n"
            );
            return Ok(Output {
                status: Status::HypothesisFailure,
                summary: format!("verify: FAIL ({e})"),
                files: vec![
                    ("verify.json".into(), json_bytes(&report)?),
                    ("verify.txt".into(), text.into_bytes()),
                ],
            });
        }
        Err(e) => return Err(e.into()),
    };
    let r = verify_all(&s, p.seed)?;
    Ok(Output {
        status: status(r.pass),
        summary: format!("verify: {}", if r.pass { "PASS" } else { "FAIL" }),
        files: vec![
            ("verify.json".into(), json_bytes(&r)?),
            ("verify.txt".into(), r.to_text().into_bytes()),
        ],
    })
}

/// Fixed-point censuses are enumerated only up to this many points.
const CENSUS_LIMIT: i128 = 1_000_000;

pub fn partition(p: &Params) -> Result<Output> {
    let a = make_anosov(p.m)?;
    let part = build_partition(&a)?;
    let mut census = Vec::new();
    for q in 1..=6u32 {
        let expected = a.fixed_point_count(q)?;
        let enumerated = if expected <= CENSUS_LIMIT {
            Some(fixed_point_census(&a, q)?.1)
        } else {
            None
        };
        census.push(json!({ "q": q, "count": expected.to_string(), "enumerated": enumerated }));
    }
    let (part, selection_error) = match select_marked_rectangles(&part, p.d) {
        Ok(sel) => (sel, None),
        Err(e) if is_hypothesis_error(&e) => (part, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let summary = json!({
        "m": p.m,
        "d": p.d,
        "lambda": a.lambda,
        "rectangles": part.len(),
        "total_area": part.total_area,
        "crossing_defect": part.crossing_defect,
        "fixed_points": census,
        "marked": part.marked,
        "selection_error": selection_error,
    });
    let ok = selection_error.is_none();
    Ok(Output {
        status: status(ok),
        summary: format!(
            "partition: {} rectangles, marked selection {}",
            part.len(),
            if ok { "found" } else { "infeasible" }
        ),
        files: vec![
            ("partition.csv".into(), part.to_csv().into_bytes()),
            (
                "transitions.json".into(),
                part.transitions_json().into_bytes(),
            ),
            ("partition.json".into(), json_bytes(&summary)?),
        ],
    })
}

/// Longest repellor word certified by `bones`.
pub const BONE_MAX_PERIOD: usize = 4;
/// Persistence depths `k·q` for `k ≤` this.
pub const BONE_PERSISTENCE_K: usize = 10;
/// Unstable offsets (times `λ^{-q}`) at which certified bones are propagated.
pub const BONE_OFFSETS: [f64; 4] = [-0.5, -0.1, 0.1, 0.5];

pub fn bones(p: &Params) -> Result<Output> {
    let s = system(p)?;
    let words = repellor_words(&s, BONE_MAX_PERIOD)?;
    let r = bone_radius(p);
    let lam = s.map().lambda;
    let records: Vec<(serde_json::Value, bool)> = words
        .par_iter()
        .map(|w| -> Result<(serde_json::Value, bool)> {
            let cert = match bone_check(&s, w, r) {
                Ok(c) => c,
                Err(e) if is_hypothesis_error(&e) => {
                    return Ok((
                        json!({ "word": word_text(&w.labels), "q": w.len(), "certified": false, "error": e.to_string() }),
                        false,
                    ))
                }
                Err(e) => return Err(e.into()),
            };
            let persistence = bone_persistence(&s, &cert, BONE_PERSISTENCE_K, p.mesh)?;
            let clean = persistence.iter().all(|rec| rec.violations == 0);
            let scale = lam.powi(-(cert.q as i32));
            let propagated: Vec<serde_json::Value> = BONE_OFFSETS
                .iter()
                .map(|&o| match bone_propagate_unstable(&s, &cert, o * scale, 1) {
                    Ok(b) => json!({ "offset": o * scale, "bone": b, "inner_volume": b.inner_volume() }),
                    Err(e) => json!({ "offset": o * scale, "error": e.to_string() }),
                })
                .collect();
            Ok((
                json!({
                    "word": word_text(&w.labels),
                    "q": w.len(),
                    "certified": true,
                    "certificate": cert,
                    "persistence": persistence,
                    "persistence_clean": clean,
                    "propagated": propagated,
                }),
                clean,
            ))
        })
        .collect::<Result<_>>()?;
    let certified = records.iter().filter(|r| r.0["certified"] == true).count();
    let clean = records.iter().filter(|r| r.1).count();
    let pass = certified > 0 && clean == certified;
    let report = json!({
        "m": p.m, "d": p.d, "eps": p.eps, "r0": p.r0, "mesh": p.mesh,
        "radius": r,
        "words": records.len(),
        "certified": certified,
        "persistent": clean,
        "bones": records.into_iter().map(|r| r.0).collect::<Vec<_>>(),
    });
    Ok(Output {
        status: status(pass),
        summary: format!(
            "bones: {certified}/{} words certified, {clean} persistent",
            words.len()
        ),
        files: vec![("bones.json".into(), json_bytes(&report)?)],
    })
}

/// Bone certificates used by the graph census (periods ≤ 2).
fn census_certificates(s: &SkewSystem, r: f64) -> Result<Vec<BoneCertificate>> {
    Ok(repellor_words(s, 2)?
        .iter()
        .filter_map(|w| bone_check(s, w, r).ok())
        .collect())
}

/// Pixel `(row, col)` shows the cell `u = col`, `v = grid − 1 − row`.
fn base_image(grid: usize, per_cell: &[u8]) -> Gray {
    let mut pixels = vec![0u8; grid * grid];
    for i in 0..grid {
        for j in 0..grid {
            pixels[(grid - 1 - j) * grid + i] = per_cell[i * grid + j];
        }
    }
    Gray {
        width: grid,
        height: grid,
        pixels,
    }
}

fn class_byte(c: Class) -> u8 {
    match c {
        Class::Bone => 255,
        Class::Graph => 160,
        Class::Undetermined => 0,
    }
}

pub fn graph(p: &Params) -> Result<Output> {
    if p.n < 10 {
        bail!("graph needs n ≥ 10 (got {})", p.n);
    }
    if p.grid == 0 {
        bail!("grid must be positive");
    }
    let s = system(p)?;
    let certs = census_certificates(&s, bone_radius(p))?;
    let tol = 2.0 * CLASSIFY_MESH;
    let points = jittered_grid(p.grid);
    let classes: Vec<_> = points
        .par_iter()
        .map(|b| classify_fiber(&s, b, p.n, tol, &certs))
        .collect();
    let mut csv = String::from("i,j,u,v,class,diam_outer,slope\n");
    let mut diam = Vec::with_capacity(classes.len());
    let mut counts = [0usize; 3];
    for (k, c) in classes.iter().enumerate() {
        let (last, slope) = match &c.evidence {
            Evidence::Diameters {
                diam_outer, slope, ..
            } => (*diam_outer.last().unwrap_or(&f64::NAN), *slope),
            _ => (f64::NAN, f64::NAN),
        };
        let name = match c.class {
            Class::Bone => "bone",
            Class::Graph => "graph",
            Class::Undetermined => "undetermined",
        };
        counts[match c.class {
            Class::Bone => 0,
            Class::Graph => 1,
            Class::Undetermined => 2,
        }] += 1;
        csv.push_str(&format!(
            "{},{},{:?},{:?},{},{:e},{:e}\n",
            k / p.grid,
            k % p.grid,
            c.b.u,
            c.b.v,
            name,
            last,
            slope
        ));
        diam.push(last);
    }
    let diam_img = log_diameter_image(p.grid, p.grid, &diam)?;
    let diam_img = base_image(p.grid, &diam_img.pixels);
    let class_bytes: Vec<u8> = classes.iter().map(|c| class_byte(c.class)).collect();
    let class_img = base_image(p.grid, &class_bytes);
    let report = json!({
        "m": p.m, "d": p.d, "eps": p.eps, "r0": p.r0,
        "grid": p.grid, "n_max": p.n, "tol": tol,
        "certificates": certs.len(),
        "bone": counts[0], "graph": counts[1], "undetermined": counts[2],
    });
    Ok(Output {
        status: Status::Pass,
        summary: format!(
            "graph: {} bone, {} graph, {} undetermined of {}",
            counts[0],
            counts[1],
            counts[2],
            classes.len()
        ),
        files: vec![
            ("graph.json".into(), json_bytes(&report)?),
            ("graph.csv".into(), csv.into_bytes()),
            ("graph_diameter.pgm".into(), diam_img.to_pgm()),
            ("graph_class.pgm".into(), class_img.to_pgm()),
        ],
    })
}

pub fn dimension(p: &Params) -> Result<Output> {
    let s = system(p)?;
    let r = dimension_report(&s, p.n, p.grid, p.mesh)?;
    let pass = r.bound < (p.d + 2) as f64 && r.empirical_dim <= r.bound + 0.2;
    Ok(Output {
        status: status(pass),
        summary: format!(
            "dimension: bound {:.6}, empirical {:.6}",
            r.bound, r.empirical_dim
        ),
        files: vec![("dimension.json".into(), json_bytes(&r)?)],
    })
}

/// Likely-limit sampling: orbits, transient length, tail length.
pub const SAMPLE_POINTS: usize = 100;
pub const SAMPLE_TRANSIENT: usize = 200;
pub const SAMPLE_TAIL: usize = 10;

pub fn sample(p: &Params) -> Result<Output> {
    let s = system(p)?;
    let r = likely_limit_sample(
        &s,
        SAMPLE_TRANSIENT,
        SAMPLE_TAIL,
        SAMPLE_POINTS,
        p.n,
        p.mesh,
        p.seed,
    )?;
    let pass = r.within_tolerance && r.nonempty_fraction == 1.0;
    Ok(Output {
        status: status(pass),
        summary: format!(
            "sample: max distance {:e} (tolerance {:e}), nonempty fraction {}",
            r.max_distance, r.tolerance, r.nonempty_fraction
        ),
        files: vec![("sample.json".into(), json_bytes(&r)?)],
    })
}
