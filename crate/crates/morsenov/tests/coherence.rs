//! Integration tests for count systems: index formulas, the three claim
//! checks, map construction, the mirror synthesis, JSON round trips, and
//! the end-to-end bound pipeline.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::Value;

use morsenov::chain::{ChainComplex, Degree, GradedModule, LinearMap};
use morsenov::coherence::{
    morse_mirror, run_pipeline, ClassInfo, CoherenceError, CountSystem, IndexData, ZERO_CLASS,
};
use morsenov::homology::CubicalComplex;
use morsenov::morse::{FlowConfig, MorseModel, MorseSystem};
use morsenov::novikov::{NovikovMatrix, NovikovScalar};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn cutoff(n: i64) -> BigRational {
    rat(n)
}

fn complex_of(name: &str) -> ChainComplex {
    let model = MorseModel::parse(name).expect("catalog model name");
    let system = MorseSystem::analyze(model, FlowConfig::default()).expect("analysis succeeds");
    let (complex, _) = system.build_complex().expect("complex builds");
    complex
}

fn mirror_of(name: &str) -> CountSystem {
    morse_mirror(&complex_of(name)).expect("mirror builds")
}

fn betti_of(name: &str) -> Vec<usize> {
    let model = MorseModel::parse(name).expect("catalog model name");
    CubicalComplex::for_model(&model, 1)
        .expect("catalog model has a cell structure")
        .betti()
        .0
}

fn zero_class_only() -> Vec<ClassInfo> {
    vec![ClassInfo {
        id: ZERO_CLASS.into(),
        c1: 0,
        omega: BigRational::zero(),
    }]
}

fn class(id: &str, c1: i64, omega: BigRational) -> ClassInfo {
    ClassInfo {
        id: id.into(),
        c1,
        omega,
    }
}

#[test]
#[allow(clippy::identity_op)] // the asserts spell out each formula term
fn index_formulas_have_the_documented_values() {
    let index = IndexData::new(
        4,
        vec![("p".into(), 3), ("q".into(), 1)],
        vec![("g".into(), 2)],
        vec![
            class("0", 0, rat(0)),
            class("A", 1, BigRational::new(BigInt::from(1), BigInt::from(2))),
        ],
        Vec::new(),
    )
    .unwrap();
    // CZ + 2 c1 − dim/2 + |p| and its counterpart with all signs flipped.
    assert_eq!(index.index_pss("p", "g", "A").unwrap(), 2 + 2 - 2 + 3);
    assert_eq!(index.index_ssp("g", "q", "A").unwrap(), -2 + 2 + 2 - 1);
    assert_eq!(index.index_iota("p", "q", "0").unwrap(), 3 - 1);
    assert_eq!(index.index_iota("p", "q", "A").unwrap(), 2 + 3 - 1);
    assert_eq!(index.index_h("q", "p", "0").unwrap(), 1 - 3 + 1);
    assert!(matches!(
        index.index_pss("missing", "g", "A"),
        Err(CoherenceError::UnknownIdentifier(id)) if id == "missing"
    ));
    assert!(matches!(
        index.index_iota("p", "q", "missing"),
        Err(CoherenceError::UnknownIdentifier(_))
    ));
}

#[test]
fn index_additivity_holds_over_the_whole_sum_table() {
    // A + B = C is the only declared row; identity rows are implicit.
    let index = IndexData::new(
        6,
        vec![("a".into(), 0), ("b".into(), 3), ("c".into(), 6)],
        vec![("g0".into(), -2), ("g1".into(), 1), ("g2".into(), 5)],
        vec![
            class("0", 0, rat(0)),
            class("A", 1, rat(1)),
            class("B", 2, rat(1)),
            class("C", 3, rat(2)),
        ],
        vec![("A".into(), "B".into(), "C".into())],
    )
    .unwrap();
    let ids: Vec<&str> = vec!["0", "A", "B", "C"];
    for p_minus in ["a", "b", "c"] {
        for p_plus in ["a", "b", "c"] {
            for gamma in ["g0", "g1", "g2"] {
                for a_plus in &ids {
                    for a_minus in &ids {
                        let Some(total) = index.class_sum(a_plus, a_minus) else {
                            continue;
                        };
                        let total = total.to_string();
                        let lhs = index.index_pss(p_minus, gamma, a_plus).unwrap()
                            + index.index_ssp(gamma, p_plus, a_minus).unwrap();
                        assert_eq!(
                            lhs,
                            index.index_iota(p_minus, p_plus, &total).unwrap(),
                            "additivity at ({p_minus}, {gamma}, {p_plus}, {a_plus}, {a_minus})"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn class_sum_table_has_implicit_identity_and_symmetry() {
    let index = IndexData::new(
        2,
        vec![("p".into(), 1)],
        Vec::new(),
        vec![
            class("0", 0, rat(0)),
            class("A", 1, rat(1)),
            class("B", 2, rat(3)),
            class("C", 3, rat(4)),
        ],
        vec![("A".into(), "B".into(), "C".into())],
    )
    .unwrap();
    assert_eq!(index.class_sum("0", "A"), Some("A"));
    assert_eq!(index.class_sum("A", "0"), Some("A"));
    assert_eq!(index.class_sum("B", "A"), Some("C"), "declared rows are symmetric");
    assert_eq!(index.class_sum("A", "A"), None, "undeclared pairs have no sum");
    assert_eq!(
        index.decompositions("A"),
        vec![("0".to_string(), "A".to_string()), ("A".to_string(), "0".to_string())]
    );
    // (0,C), (A,B), (B,A), (C,0).
    assert_eq!(index.decompositions("C").len(), 4);
}

#[test]
fn malformed_index_data_is_rejected() {
    let crit = vec![("p".into(), 1)];
    // Odd or nonpositive ambient dimension.
    for bad_dim in [0, -2, 3] {
        let err = IndexData::new(bad_dim, crit.clone(), Vec::new(), zero_class_only(), Vec::new())
            .unwrap_err();
        assert!(err.to_string().contains("even and positive"), "{err}");
    }
    // Grading out of range.
    let err = IndexData::new(
        2,
        vec![("p".into(), 3)],
        Vec::new(),
        zero_class_only(),
        Vec::new(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("outside"), "{err}");
    // Missing zero class.
    let err = IndexData::new(
        2,
        crit.clone(),
        Vec::new(),
        vec![class("A", 0, rat(1))],
        Vec::new(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("zero class"), "{err}");
    // Zero class with nonzero weight.
    let err = IndexData::new(
        2,
        crit.clone(),
        Vec::new(),
        vec![class("0", 0, rat(1))],
        Vec::new(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("c1 = 0 and omega = 0"), "{err}");
    // Duplicate identifiers.
    let err = IndexData::new(
        2,
        vec![("p".into(), 0), ("p".into(), 1)],
        Vec::new(),
        zero_class_only(),
        Vec::new(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("duplicate"), "{err}");
    // A sum row that is not additive in c1.
    let err = IndexData::new(
        2,
        crit.clone(),
        Vec::new(),
        vec![
            class("0", 0, rat(0)),
            class("A", 1, rat(1)),
            class("B", 1, rat(1)),
            class("C", 3, rat(2)),
        ],
        vec![("A".into(), "B".into(), "C".into())],
    )
    .unwrap_err();
    assert!(err.to_string().contains("not additive"), "{err}");
    // Conflicting declarations for the same unordered pair.
    let err = IndexData::new(
        2,
        crit,
        Vec::new(),
        vec![
            class("0", 0, rat(0)),
            class("A", 1, rat(1)),
            class("B", 1, rat(1)),
            class("C", 2, rat(2)),
            class("D", 2, rat(2)),
        ],
        vec![
            ("A".into(), "B".into(), "C".into()),
            ("B".into(), "A".into(), "D".into()),
        ],
    )
    .unwrap_err();
    assert!(err.to_string().contains("conflicting sums"), "{err}");
}

#[test]
fn misplaced_counts_are_rejected_naming_the_formula() {
    let index = IndexData::new(
        2,
        vec![("p0".into(), 2), ("p1".into(), 1), ("p3".into(), 0)],
        vec![("g".into(), 0)],
        zero_class_only(),
        Vec::new(),
    )
    .unwrap();
    let mut s = CountSystem::new(index);

    let err = s.set_morse("p0", "p3", 1).unwrap_err();
    assert!(err.to_string().contains("|p| - |q| = 1"), "{err}");
    assert!(err.to_string().contains("m(p0, p3)"), "{err}");

    let err = s.set_z_iota("p0", "p1", ZERO_CLASS, rat(1)).unwrap_err();
    assert!(err.to_string().contains("index_iota"), "{err}");
    assert!(err.to_string().contains("2*c1(A) + |p_minus| - |p_plus|"), "{err}");

    let err = s.set_z_plus("p0", "g", ZERO_CLASS, rat(1)).unwrap_err();
    assert!(err.to_string().contains("index_pss"), "{err}");
    assert!(
        err.to_string().contains("CZ(gamma) + 2*c1(A) - dim_M/2 + |p|"),
        "{err}"
    );

    let err = s.set_z_minus("g", "p0", ZERO_CLASS, rat(1)).unwrap_err();
    assert!(err.to_string().contains("index_ssp"), "{err}");

    let err = s.set_z_h("p0", "p3", ZERO_CLASS, rat(1)).unwrap_err();
    assert!(err.to_string().contains("index_h = index_iota + 1"), "{err}");

    // Valid placements at the same tuples are accepted.
    s.set_morse("p0", "p1", -2).unwrap();
    s.set_z_iota("p1", "p1", ZERO_CLASS, rat(-1)).unwrap();
    s.set_z_minus("g", "p1", ZERO_CLASS, rat(2)).unwrap();
    s.set_z_h("p3", "p1", ZERO_CLASS, rat(7)).unwrap();
    assert_eq!(s.morse("p0", "p1"), -2);
    assert_eq!(s.morse("p1", "p0"), 0, "unstored counts read as zero");
}

#[test]
fn mirror_of_the_flat_torus_has_the_documented_counts() {
    let mirror = mirror_of("torus_2");
    let index = mirror.index_data();
    assert_eq!(index.dim_m(), 2);
    assert_eq!(
        index.crit(),
        &[
            ("p0".to_string(), 2),
            ("p1".to_string(), 1),
            ("p2".to_string(), 1),
            ("p3".to_string(), 0)
        ]
    );
    assert_eq!(
        index.orbits(),
        &[
            ("gamma_p0".to_string(), -1),
            ("gamma_p1".to_string(), 0),
            ("gamma_p2".to_string(), 0),
            ("gamma_p3".to_string(), 1)
        ]
    );
    assert_eq!(index.classes().len(), 1, "zero class only");

    for (p, g) in index.crit() {
        let sign = if g % 2 == 0 { rat(1) } else { rat(-1) };
        let gamma = format!("gamma_{p}");
        assert_eq!(mirror.z_iota(p, p, ZERO_CLASS), sign);
        assert_eq!(mirror.z_plus(p, &gamma, ZERO_CLASS), sign);
        assert_eq!(mirror.z_minus(&gamma, p, ZERO_CLASS), rat(1));
    }
    // The flat torus has vanishing signed counts, so no m entries at all.
    for (p, _) in index.crit() {
        for (q, _) in index.crit() {
            assert_eq!(mirror.morse(p, q), 0);
        }
    }
}

#[test]
fn every_catalog_mirror_passes_all_three_claims() {
    for name in ["sphere2", "torus_2", "torus_3", "sphere2*torus_1"] {
        let mirror = mirror_of(name);
        for report in mirror.check_claims() {
            assert!(
                report.passed(),
                "{name}: {} failed: {}",
                report.identity(),
                report.summary()
            );
            assert!(report.violations().is_empty());
        }
    }
}

#[test]
fn mirror_maps_are_the_identity_dictionary() {
    let mirror = mirror_of("torus_2");
    let maps = mirror.build_maps().unwrap();
    let n = maps.points.rank();
    assert_eq!(n, 4);
    assert_eq!(maps.orbits.rank(), 4);
    // iota, sign-adjusted, is the identity on the points.
    assert_eq!(maps.iota.matrix(), &NovikovMatrix::identity(n));
    // ssp ∘ pss is the identity as well, and h vanishes.
    let round_trip = maps.ssp.after(&maps.pss).unwrap();
    assert_eq!(round_trip.matrix(), &NovikovMatrix::identity(n));
    assert!(maps.h.matrix().is_exact());
    assert_eq!(maps.h.matrix(), &NovikovMatrix::zero(n, n));
    assert_eq!(maps.d.matrix(), &NovikovMatrix::zero(n, n));
}

#[test]
fn every_single_entry_corruption_is_caught_with_its_tuple_named() {
    let mirror = mirror_of("torus_2");
    let crit: Vec<(String, i64)> = mirror.index_data().crit().to_vec();
    // (family, named point, original value) for every stored count.
    type Mutation = fn(&BigRational) -> BigRational;
    let mutations: [(&str, Mutation); 3] = [
        ("sign-flip", |v| -v.clone()),
        ("doubling", |v| v + v),
        ("zeroing", |_| BigRational::zero()),
    ];
    for (p, g) in &crit {
        let sign = if g % 2 == 0 { rat(1) } else { rat(-1) };
        let gamma = format!("gamma_{p}");
        for (family, original) in [("z_iota", &sign), ("z_plus", &sign), ("z_minus", &rat(1))] {
            for (mutation, apply) in mutations {
                let mut corrupted = mirror.clone();
                let value = apply(original);
                match family {
                    "z_iota" => corrupted.set_z_iota(p, p, ZERO_CLASS, value).unwrap(),
                    "z_plus" => corrupted.set_z_plus(p, &gamma, ZERO_CLASS, value).unwrap(),
                    "z_minus" => corrupted.set_z_minus(&gamma, p, ZERO_CLASS, value).unwrap(),
                    _ => unreachable!(),
                }
                let failing: Vec<_> = corrupted
                    .check_claims()
                    .into_iter()
                    .filter(|r| !r.passed())
                    .collect();
                assert!(
                    !failing.is_empty(),
                    "{mutation} of {family} at {p} went unnoticed"
                );
                let named = failing.iter().any(|report| {
                    report
                        .violations()
                        .iter()
                        .any(|v| v.tuple.contains(p))
                });
                assert!(
                    named,
                    "{mutation} of {family} at {p} was caught, but no violation names {p}"
                );
            }
        }
    }
}

#[test]
fn triangularity_rejects_each_failure_mode_separately() {
    let base = || {
        IndexData::new(
            2,
            vec![("x".into(), 1), ("y".into(), 1)],
            Vec::new(),
            vec![class("0", 0, rat(0)), class("N", 0, rat(-1))],
            Vec::new(),
        )
        .unwrap()
    };
    let diagonal = |s: &mut CountSystem| {
        s.set_z_iota("x", "x", ZERO_CLASS, rat(1)).unwrap();
        s.set_z_iota("y", "y", ZERO_CLASS, rat(1)).unwrap();
    };

    // Nonpositive weight on a nonzero class.
    let mut s = CountSystem::new(base());
    diagonal(&mut s);
    s.set_z_iota("x", "y", "N", rat(1)).unwrap();
    let report = s.check_triangularity();
    assert!(!report.passed());
    assert_eq!(report.violations().len(), 1);
    assert_eq!(report.violations()[0].tuple, vec!["x", "y", "N"]);

    // A nonzero off-diagonal entry on the zero class.
    let mut s = CountSystem::new(base());
    diagonal(&mut s);
    s.set_z_iota("y", "x", ZERO_CLASS, rat(2)).unwrap();
    let report = s.check_triangularity();
    assert!(!report.passed());
    assert_eq!(report.violations()[0].tuple, vec!["y", "x", "0"]);
    assert_eq!(report.violations()[0].residual, "2");

    // A vanishing diagonal entry.
    let mut s = CountSystem::new(base());
    s.set_z_iota("x", "x", ZERO_CLASS, rat(1)).unwrap();
    let report = s.check_triangularity();
    assert!(!report.passed());
    assert_eq!(report.violations()[0].tuple, vec!["y", "y", "0"]);
    assert_eq!(report.violations()[0].residual, "0");

    // Storing an explicit zero on the diagonal is the same failure.
    let mut s = CountSystem::new(base());
    diagonal(&mut s);
    s.set_z_iota("y", "y", ZERO_CLASS, rat(0)).unwrap();
    assert!(!s.check_triangularity().passed());
}

#[test]
fn json_round_trip_is_byte_identical_and_order_insensitive() {
    let mirror = mirror_of("torus_2");
    let first = serde_json::to_string_pretty(&mirror.to_json()).unwrap();
    let second = serde_json::to_string_pretty(&mirror.to_json()).unwrap();
    assert_eq!(first, second, "serialisation is deterministic");

    let reloaded = CountSystem::from_json(&mirror.to_json()).unwrap();
    assert_eq!(reloaded, mirror);
    assert_eq!(
        serde_json::to_string_pretty(&reloaded.to_json()).unwrap(),
        first
    );

    // Reversing every array in the document must not change the result.
    let mut shuffled = mirror.to_json();
    for field in ["crit", "orbits", "classes", "z_iota", "z_plus", "z_minus"] {
        let arr = shuffled
            .get_mut(field)
            .and_then(Value::as_array_mut)
            .unwrap();
        arr.reverse();
    }
    let reordered = CountSystem::from_json(&shuffled).unwrap();
    assert_eq!(reordered, mirror);
    assert_eq!(
        serde_json::to_string_pretty(&reordered.to_json()).unwrap(),
        first
    );
}

#[test]
fn loader_rejects_malformed_documents() {
    let good = mirror_of("torus_2").to_json();

    // Unknown top-level field.
    let mut bad = good.clone();
    bad.as_object_mut()
        .unwrap()
        .insert("z_iotas".into(), Value::Array(Vec::new()));
    let err = CountSystem::from_json(&bad).unwrap_err();
    assert!(err.to_string().contains("z_iotas"), "{err}");

    // Unknown row field.
    let mut bad = good.clone();
    bad["crit"][0]
        .as_object_mut()
        .unwrap()
        .insert("grading".into(), Value::from(2));
    let err = CountSystem::from_json(&bad).unwrap_err();
    assert!(err.to_string().contains("grading"), "{err}");

    // Missing row field.
    let mut bad = good.clone();
    bad["orbits"][0].as_object_mut().unwrap().remove("cz");
    let err = CountSystem::from_json(&bad).unwrap_err();
    assert!(err.to_string().contains("cz"), "{err}");

    // Duplicate count row.
    let mut bad = good.clone();
    let row = bad["z_iota"][0].clone();
    bad["z_iota"].as_array_mut().unwrap().push(row);
    let err = CountSystem::from_json(&bad).unwrap_err();
    assert!(err.to_string().contains("duplicate z_iota row"), "{err}");

    // A count stored at a tuple its index formula forbids: retarget one
    // z_plus row at an orbit of the wrong level.
    let mut bad = good.clone();
    bad["z_plus"][0]
        .as_object_mut()
        .unwrap()
        .insert("to".into(), Value::from("gamma_p3"));
    let err = CountSystem::from_json(&bad).unwrap_err();
    assert!(err.to_string().contains("index_pss"), "{err}");

    // Unparsable rational.
    let mut bad = good;
    bad["z_iota"][0]
        .as_object_mut()
        .unwrap()
        .insert("count".into(), Value::from("one"));
    let err = CountSystem::from_json(&bad).unwrap_err();
    assert!(err.to_string().contains("p/q"), "{err}");
}

#[test]
fn pipeline_derives_the_documented_bounds() {
    for (name, expected) in [("torus_2", 4), ("torus_3", 8), ("sphere2", 2)] {
        let mirror = mirror_of(name);
        let verdict = run_pipeline(&mirror, &betti_of(name), &cutoff(10)).unwrap();
        assert_eq!(verdict.bound, expected, "{name}");
        assert!(verdict.reports.iter().all(|r| r.passed()));
    }
}

#[test]
fn pipeline_verdict_records_every_stage_in_order() {
    let mirror = mirror_of("torus_2");
    let verdict = run_pipeline(&mirror, &betti_of("torus_2"), &cutoff(10)).unwrap();
    let stages: Vec<&str> = verdict.reports.iter().map(|r| r.identity()).collect();
    assert_eq!(
        stages,
        vec![
            "iota-claim",
            "h-claim",
            "triangularity",
            "chain-map",
            "iota-invertibility",
            "chain-homotopy"
        ]
    );
    let steps: Vec<&str> = verdict
        .certificate
        .steps
        .iter()
        .map(|s| s.name.as_str())
        .collect();
    assert_eq!(
        steps,
        vec![
            "inputs",
            "cycles",
            "independence",
            "iota chain map",
            "iota invertible",
            "homotopy on cycles",
            "iota-image independence",
            "surjection onto images",
            "bound"
        ]
    );
    assert_eq!(verdict.to_json()["bound"], Value::from(4));

    // The verdict JSON is deterministic.
    assert_eq!(
        serde_json::to_string_pretty(&verdict.to_json()).unwrap(),
        serde_json::to_string_pretty(
            &run_pipeline(&mirror, &betti_of("torus_2"), &cutoff(10))
                .unwrap()
                .to_json()
        )
        .unwrap()
    );
}

#[test]
fn corrupted_counts_abort_the_pipeline_at_the_named_stage() {
    let mut corrupted = mirror_of("torus_2");
    corrupted
        .set_z_minus("gamma_p3", "p3", ZERO_CLASS, rat(2))
        .unwrap();
    let err = run_pipeline(&corrupted, &betti_of("torus_2"), &cutoff(10)).unwrap_err();
    match err {
        CoherenceError::Stage { stage, detail } => {
            assert_eq!(stage, "h-claim");
            assert!(detail.contains("p3"), "{detail}");
        }
        other => panic!("expected a stage failure, got {other}"),
    }

    // A consistent system over the wrong topology fails only at the end,
    // where the supplied Betti numbers demand more cycles than exist.
    let mut rewired = mirror_of("torus_2");
    rewired.set_morse("p1", "p3", 1).unwrap();
    for report in rewired.check_claims() {
        assert!(report.passed(), "{}", report.summary());
    }
    let err = run_pipeline(&rewired, &betti_of("torus_2"), &cutoff(10)).unwrap_err();
    match err {
        CoherenceError::Stage { stage, detail } => {
            assert_eq!(stage, "arnold-bound");
            assert!(detail.contains("cycles"), "{detail}");
        }
        other => panic!("expected a stage failure, got {other}"),
    }
}

#[test]
fn nonzero_differential_mirror_cancels_residuals_exactly() {
    // d(a) = 3·b: the two claim sums each see ±3 and must cancel.
    let module = GradedModule::graded([("a", 1), ("b", 0)]).unwrap();
    let mut matrix = NovikovMatrix::zero(2, 2);
    matrix.set(1, 0, NovikovScalar::from_int(3));
    let d = LinearMap::new(module.clone(), module.clone(), Degree::Graded(-1), matrix).unwrap();
    let complex = ChainComplex::new(module, d).unwrap();

    let mirror = morse_mirror(&complex).unwrap();
    assert_eq!(mirror.morse("a", "b"), 3);
    for report in mirror.check_claims() {
        assert!(report.passed(), "{}", report.summary());
    }
    // Both homology groups vanish, so the pipeline certifies a bound of 0.
    let verdict = run_pipeline(&mirror, &[0, 0], &cutoff(10)).unwrap();
    assert_eq!(verdict.bound, 0);
}

#[test]
fn weighted_counts_flow_into_novikov_weights() {
    // Extend the flat-torus mirror by a class C of weight 1 carrying a
    // matched pair of corrections: z_iota(p3, p3, C) = 5 balanced by
    // z_minus(gamma_p3, p3, C) = 5.
    let torus = mirror_of("torus_2");
    let index = IndexData::new(
        2,
        torus.index_data().crit().to_vec(),
        torus.index_data().orbits().to_vec(),
        vec![class("0", 0, rat(0)), class("C", 0, rat(1))],
        Vec::new(),
    )
    .unwrap();
    let mut system = CountSystem::new(index);
    for (p, g) in torus.index_data().crit() {
        let sign = if g % 2 == 0 { rat(1) } else { rat(-1) };
        let gamma = format!("gamma_{p}");
        system.set_z_iota(p, p, ZERO_CLASS, sign.clone()).unwrap();
        system.set_z_plus(p, &gamma, ZERO_CLASS, sign).unwrap();
        system.set_z_minus(&gamma, p, ZERO_CLASS, rat(1)).unwrap();
    }
    system.set_z_iota("p3", "p3", "C", rat(5)).unwrap();
    system.set_z_minus("gamma_p3", "p3", "C", rat(5)).unwrap();

    for report in system.check_claims() {
        assert!(report.passed(), "{}", report.summary());
    }
    let maps = system.build_maps().unwrap();
    let p3 = maps.points.index_of("p3").unwrap();
    let expected = NovikovScalar::from_terms([(rat(0), rat(1)), (rat(1), rat(5))]);
    assert_eq!(maps.iota.matrix().get(p3, p3), &expected);
    let gamma_p3 = maps.orbits.index_of("gamma_p3").unwrap();
    assert_eq!(maps.ssp.matrix().get(p3, gamma_p3), &expected);

    // The correction is homotopically invisible: the bound is unchanged.
    let verdict = run_pipeline(&system, &betti_of("torus_2"), &cutoff(10)).unwrap();
    assert_eq!(verdict.bound, 4);
}

#[test]
fn unbalanced_weighted_count_fails_the_h_claim_but_not_triangularity() {
    let torus = mirror_of("torus_2");
    let index = IndexData::new(
        2,
        torus.index_data().crit().to_vec(),
        torus.index_data().orbits().to_vec(),
        vec![class("0", 0, rat(0)), class("C", 0, rat(1))],
        Vec::new(),
    )
    .unwrap();
    let mut system = CountSystem::new(index);
    for (p, g) in torus.index_data().crit() {
        let sign = if g % 2 == 0 { rat(1) } else { rat(-1) };
        let gamma = format!("gamma_{p}");
        system.set_z_iota(p, p, ZERO_CLASS, sign.clone()).unwrap();
        system.set_z_plus(p, &gamma, ZERO_CLASS, sign).unwrap();
        system.set_z_minus(&gamma, p, ZERO_CLASS, rat(1)).unwrap();
    }
    system.set_z_iota("p3", "p3", "C", rat(5)).unwrap();

    assert!(system.check_triangularity().passed(), "weight 1 is positive");
    assert!(system.check_iota_claim().passed());
    let report = system.check_h_claim();
    assert!(!report.passed());
    assert_eq!(report.violations().len(), 1);
    assert_eq!(report.violations()[0].tuple, vec!["p3", "p3", "C"]);
    assert_eq!(report.violations()[0].residual, "5");
}

#[test]
fn mirror_rounds_the_ambient_dimension_up_to_even() {
    assert_eq!(mirror_of("torus_3").index_data().dim_m(), 4);
    assert_eq!(
        mirror_of("torus_3")
            .index_data()
            .orbits()
            .iter()
            .find(|(id, _)| id == "gamma_p0")
            .unwrap()
            .1,
        2 - 3,
        "CZ(gamma_p) = dim_M/2 - |p|"
    );
    assert_eq!(mirror_of("sphere2").index_data().dim_m(), 2);

    // A complex concentrated in gradings 0 and 1 still gets dim_M = 2.
    let module = GradedModule::graded([("a", 1), ("b", 0)]).unwrap();
    let d = LinearMap::zero(&module, &module, Degree::Graded(-1));
    let complex = ChainComplex::new(module, d).unwrap();
    assert_eq!(morse_mirror(&complex).unwrap().index_data().dim_m(), 2);
}

#[test]
fn mirror_requires_an_integer_differential() {
    let module = GradedModule::graded([("a", 1), ("b", 0)]).unwrap();
    let mut matrix = NovikovMatrix::zero(2, 2);
    matrix.set(
        1,
        0,
        NovikovScalar::from_ratio(BigRational::new(BigInt::from(1), BigInt::from(2))),
    );
    let d = LinearMap::new(module.clone(), module.clone(), Degree::Graded(-1), matrix).unwrap();
    let complex = ChainComplex::new(module, d).unwrap();
    let err = morse_mirror(&complex).unwrap_err();
    assert!(err.to_string().contains("integer differential"), "{err}");
}
