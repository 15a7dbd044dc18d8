use bony_core::torus::symbolic::brute_force_fixed_count;
use bony_core::torus::{
    build_partition, enumerate_periodic_words, fixed_point_census, make_anosov,
    periodic_point_from_word, Direction, TorusPoint,
};

#[test]
fn census_matches_determinant_for_small_m() {
    for m in 2..=4 {
        let a = make_anosov(m).unwrap();
        for q in 1..=4u32 {
            let (det, count) = fixed_point_census(&a, q).unwrap();
            assert_eq!(det as usize, count, "m={m} q={q}");
            if det < 2_000 {
                assert_eq!(brute_force_fixed_count(&a, q).unwrap(), count);
            }
        }
    }
}

#[test]
fn partitions_cross_and_tile() {
    for m in 3..=8 {
        let p = build_partition(&make_anosov(m).unwrap()).unwrap();
        assert!((p.total_area - 1.0).abs() < 1e-9, "m={m}");
        assert!(p.crossing_defect < 1e-9, "m={m}");
        assert_eq!(p.len() as i64, 4 * m);
        assert_eq!(p.labels_of_kind((1, 1)).len() as i64, m);
        assert_eq!(p.labels_of_kind((2, 2)).len() as i64, m);
        // The 2m − 2 fixed points of A all lie in rectangles of type (j, j).
        let a = &p.map;
        let fixed = a.fixed_points(1).unwrap();
        assert_eq!(fixed.len() as i64, 2 * m - 2);
        for e in fixed {
            let k = p.rect(p.locate(&TorusPoint::from_exact(e))).unwrap().kind;
            assert_eq!(k.0, k.1, "m={m}");
        }
    }
}

#[test]
fn periodic_words_give_exact_periodic_orbits() {
    let a = make_anosov(4).unwrap();
    let p = build_partition(&a).unwrap();
    let alphabet: Vec<usize> = (0..p.len()).collect();
    for q in 1..=2 {
        for w in enumerate_periodic_words(&p, &alphabet, q).unwrap() {
            let Some(orbit) = periodic_point_from_word(&p, &w).unwrap() else {
                continue;
            };
            let back = a.step_n(&orbit.point, q, Direction::Forward);
            assert_eq!(back.exact, orbit.point.exact);
            for (k, pt) in orbit.orbit.iter().enumerate() {
                assert_eq!(p.locate(pt), w.labels[k]);
            }
        }
    }
}
