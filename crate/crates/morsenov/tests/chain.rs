//! Tests for graded modules, linear maps, the sign-flip anticommutation
//! phenomenon, chain homotopies, and the generator-bound machine.

use morsenov::chain::{
    arnold_bound, check_anticommutation, check_chain_homotopy, check_chain_map, lambda_rank,
    rational_chain, ArnoldInputs, ChainComplex, ChainError, Degree, Generator, GradedModule,
    LinearMap,
};
use morsenov::novikov::{NovikovMatrix, NovikovScalar};
use morsenov::ratio::int_ratio;
use num_rational::BigRational;
use num_traits::One;

fn scalar(n: i64) -> NovikovScalar {
    NovikovScalar::from_int(n)
}

fn t_power(exp: i64) -> NovikovScalar {
    NovikovScalar::monomial(int_ratio(exp), BigRational::one())
}

fn matrix(rows: &[&[i64]]) -> NovikovMatrix {
    NovikovMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&n| scalar(n)).collect())
            .collect(),
    )
}

/// The two-generator complex `d(x) = y` with gradings |x| = 1, |y| = 0,
/// basis order [x, y].
fn interval_complex() -> ChainComplex {
    let module = GradedModule::graded([("x", 1), ("y", 0)]).unwrap();
    let d = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Graded(-1),
        matrix(&[&[0, 0], &[1, 0]]),
    )
    .unwrap();
    ChainComplex::new(module, d).unwrap()
}

// ---------------------------------------------------------------------------
// Modules and map constructors.
// ---------------------------------------------------------------------------

#[test]
fn duplicate_generator_ids_are_rejected() {
    let err = GradedModule::graded([("p", 0), ("p", 1)]).unwrap_err();
    assert!(matches!(err, ChainError::DuplicateGenerator(id) if id == "p"));
}

#[test]
fn map_shape_must_match_modules() {
    let src = GradedModule::graded([("a", 0), ("b", 0)]).unwrap();
    let tgt = GradedModule::graded([("c", 0)]).unwrap();
    let err = LinearMap::new(src, tgt, Degree::Ungraded, matrix(&[&[1, 2], &[3, 4]])).unwrap_err();
    assert!(matches!(err, ChainError::ShapeMismatch(_)));
}

#[test]
fn graded_maps_must_respect_the_declared_shift() {
    let module = GradedModule::graded([("x", 1), ("y", 0)]).unwrap();
    // Entry (x, y) would raise degree by +1 under a declared degree of −1.
    let err = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Graded(-1),
        matrix(&[&[0, 1], &[0, 0]]),
    )
    .unwrap_err();
    assert!(matches!(err, ChainError::DegreeViolation(_)));

    // The same matrix is fine as a degree +1 map or an ungraded map.
    assert!(LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Graded(1),
        matrix(&[&[0, 1], &[0, 0]]),
    )
    .is_ok());
    assert!(LinearMap::new(
        module.clone(),
        module,
        Degree::Ungraded,
        matrix(&[&[0, 1], &[0, 0]]),
    )
    .is_ok());
}

#[test]
fn composition_adds_degrees_and_checks_modules() {
    let c = interval_complex();
    let d = c.differential();
    let dd = d.after(d).unwrap();
    assert_eq!(dd.degree(), Degree::Graded(-2));
    assert!(dd.matrix().vanishes_through(&int_ratio(100)));

    let other = GradedModule::graded([("z", 0)]).unwrap();
    let to_other = LinearMap::zero(c.module(), &other, Degree::Ungraded);
    assert!(matches!(
        d.after(&to_other).unwrap_err(),
        ChainError::ModuleMismatch(_)
    ));
}

#[test]
fn infer_degree_recovers_homogeneous_shifts() {
    let module = GradedModule::graded([("x", 1), ("y", 0)]).unwrap();
    assert_eq!(
        LinearMap::infer_degree(&module, &module, &matrix(&[&[0, 0], &[1, 0]])),
        Degree::Graded(-1)
    );
    assert_eq!(
        LinearMap::infer_degree(&module, &module, &matrix(&[&[0, 1], &[0, 0]])),
        Degree::Graded(1)
    );
    assert_eq!(
        LinearMap::infer_degree(&module, &module, &matrix(&[&[1, 0], &[0, 1]])),
        Degree::Graded(0)
    );
    // Mixed shifts: identity plus a degree −1 corner.
    assert_eq!(
        LinearMap::infer_degree(&module, &module, &matrix(&[&[1, 0], &[1, 1]])),
        Degree::Ungraded
    );
    // Zero map defaults to degree 0.
    assert_eq!(
        LinearMap::infer_degree(&module, &module, &NovikovMatrix::zero(2, 2)),
        Degree::Graded(0)
    );
}

// ---------------------------------------------------------------------------
// The sign phenomenon: a column sign flip anticommutes with d.
// ---------------------------------------------------------------------------

#[test]
fn sign_adjusted_identity_anticommutes_with_the_differential() {
    let c = interval_complex();
    let d = c.differential();
    let flip = LinearMap::identity(c.module()).sign_adjust().unwrap();

    // flip(x) = −x (grading 1), flip(y) = y (grading 0).
    assert_eq!(flip.matrix().get(0, 0), &scalar(-1));
    assert_eq!(flip.matrix().get(1, 1), &scalar(1));

    // Route one: the chain-map identity fails, with the residual at (y, x).
    let as_chain_map = check_chain_map(&flip, d, d, &int_ratio(10)).unwrap();
    assert!(!as_chain_map.passed());
    assert_eq!(as_chain_map.violations().len(), 1);
    assert_eq!(as_chain_map.violations()[0].tuple, vec!["y", "x"]);
    assert_eq!(as_chain_map.violations()[0].residual, "2");

    // Route two: the anticommutation identity holds exactly.
    let as_anti = check_anticommutation(&flip, d, d, &int_ratio(10)).unwrap();
    assert!(as_anti.passed(), "{}", as_anti.summary());
}

#[test]
fn double_sign_adjust_is_the_identity() {
    let module = GradedModule::graded([("a", 3), ("b", 2), ("c", 0)]).unwrap();
    let map = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Ungraded,
        matrix(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]),
    )
    .unwrap();
    let twice = map.sign_adjust().unwrap().sign_adjust().unwrap();
    assert!(twice
        .matrix()
        .sub(map.matrix())
        .unwrap()
        .vanishes_through(&int_ratio(50)));
}

#[test]
fn sign_adjust_requires_source_gradings() {
    let src = GradedModule::ungraded(["o1", "o2"]).unwrap();
    let map = LinearMap::new(
        src.clone(),
        src,
        Degree::Ungraded,
        matrix(&[&[1, 0], &[0, 1]]),
    )
    .unwrap();
    assert!(matches!(
        map.sign_adjust().unwrap_err(),
        ChainError::UngradedGenerator(_)
    ));
}

// ---------------------------------------------------------------------------
// Chain homotopies.
// ---------------------------------------------------------------------------

#[test]
fn identity_is_null_homotopic_on_the_interval_complex() {
    let c = interval_complex();
    let d = c.differential();
    let id = LinearMap::identity(c.module());
    let zero = LinearMap::zero(c.module(), c.module(), Degree::Graded(0));
    // h(y) = x, h(x) = 0: then d∘h + h∘d = id.
    let h = LinearMap::new(
        c.module().clone(),
        c.module().clone(),
        Degree::Graded(1),
        matrix(&[&[0, 1], &[0, 0]]),
    )
    .unwrap();

    let report = check_chain_homotopy(&id, &zero, &h, d, d, &int_ratio(10)).unwrap();
    assert!(report.passed(), "{}", report.summary());

    // Corrupting h breaks the identity at a named tuple.
    let bad_h = LinearMap::new(
        c.module().clone(),
        c.module().clone(),
        Degree::Graded(1),
        matrix(&[&[0, 2], &[0, 0]]),
    )
    .unwrap();
    let report = check_chain_homotopy(&id, &zero, &bad_h, d, d, &int_ratio(10)).unwrap();
    assert!(!report.passed());
    let tuples: Vec<&Vec<String>> = report.violations().iter().map(|v| &v.tuple).collect();
    assert!(tuples.contains(&&vec!["x".to_string(), "x".to_string()]));
    assert!(tuples.contains(&&vec!["y".to_string(), "y".to_string()]));
}

// ---------------------------------------------------------------------------
// Complex constructor invariants.
// ---------------------------------------------------------------------------

#[test]
fn differential_must_square_to_zero() {
    let module = GradedModule::graded([("x", 2), ("y", 1), ("z", 0)]).unwrap();
    // d(x) = y, d(y) = z: d∘d(x) = z ≠ 0.
    let d = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Graded(-1),
        matrix(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0]]),
    )
    .unwrap();
    let err = ChainComplex::new(module, d).unwrap_err();
    assert!(matches!(err, ChainError::DifferentialSquareNonzero(msg) if msg.contains("z") && msg.contains("x")));
}

#[test]
fn differential_must_have_degree_minus_one() {
    let module = GradedModule::graded([("x", 1), ("y", 0)]).unwrap();
    let d = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Ungraded,
        NovikovMatrix::zero(2, 2),
    )
    .unwrap();
    assert!(matches!(
        ChainComplex::new(module, d).unwrap_err(),
        ChainError::DegreeViolation(_)
    ));
}

#[test]
fn complexes_require_fully_graded_modules() {
    let module = GradedModule::new(vec![
        Generator::new("x", 1),
        Generator::ungraded("mystery"),
    ])
    .unwrap();
    let d = LinearMap::zero(&module, &module, Degree::Graded(-1));
    assert!(matches!(
        ChainComplex::new(module, d).unwrap_err(),
        ChainError::UngradedGenerator(id) if id == "mystery"
    ));
}

// ---------------------------------------------------------------------------
// JSON round trips.
// ---------------------------------------------------------------------------

#[test]
fn linear_map_round_trips_through_json() {
    let src = GradedModule::graded([("a", 1), ("b", 0)]).unwrap();
    let tgt = GradedModule::ungraded(["o"]).unwrap();
    let mut m = NovikovMatrix::zero(1, 2);
    m.set(0, 0, t_power(2));
    m.set(0, 1, scalar(-3));
    let map = LinearMap::new(src, tgt, Degree::Ungraded, m).unwrap();

    let json = map.to_json();
    let back = LinearMap::from_json(&json).unwrap();
    assert_eq!(back.to_json(), json);
    assert_eq!(back.degree(), Degree::Ungraded);
    assert_eq!(back.source().generators()[0].grading, Some(1));
}

#[test]
fn chain_complex_round_trips_through_json_with_coords() {
    let module = GradedModule::new(vec![
        Generator::new("p0", 1).with_coords(vec![0.0, 0.5]),
        Generator::new("p1", 0).with_coords(vec![0.5, 0.5]),
    ])
    .unwrap();
    let d = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Graded(-1),
        matrix(&[&[0, 0], &[2, 0]]),
    )
    .unwrap();
    let complex = ChainComplex::new(module, d).unwrap();

    let json = complex.to_json();
    let back = ChainComplex::from_json(&json).unwrap();
    assert_eq!(back.to_json(), json);
    assert_eq!(
        back.module().generators()[0].coords,
        Some(vec![0.0, 0.5])
    );
}

// ---------------------------------------------------------------------------
// Ranks over the Novikov field.
// ---------------------------------------------------------------------------

#[test]
fn lambda_rank_certifies_exact_matrices() {
    let mut m = NovikovMatrix::zero(2, 2);
    m.set(0, 0, scalar(1));
    m.set(1, 1, t_power(3));
    let r = lambda_rank(&m, Some(&int_ratio(10)));
    assert_eq!(r.rank, 2);
    assert!(r.certified);

    // A frozen invariance check: swapping rows and scaling one by a unit
    // of the field leaves the rank untouched.
    let mut swapped = NovikovMatrix::zero(2, 2);
    swapped.set(0, 1, t_power(3).scale(&BigRational::from_integer(7.into())));
    swapped.set(1, 0, scalar(1));
    let r2 = lambda_rank(&swapped, Some(&int_ratio(10)));
    assert_eq!(r2.rank, 2);
    assert!(r2.certified);
}

// ---------------------------------------------------------------------------
// The generator-bound machine.
// ---------------------------------------------------------------------------

/// Everything-trivial inputs modelling a complex with zero differential:
/// four generators in degrees (0, 1, 1, 2), iota the identity, pss/ssp a
/// basis bijection onto an ungraded module, h = 0.
struct TrivialSetup {
    complex: ChainComplex,
    pss: LinearMap,
    ssp: LinearMap,
    iota: LinearMap,
    h: LinearMap,
}

fn trivial_setup() -> TrivialSetup {
    let module = GradedModule::graded([("m", 0), ("s1", 1), ("s2", 1), ("max", 2)]).unwrap();
    let orbits = GradedModule::ungraded(["o0", "o1", "o2", "o3"]).unwrap();
    let d = LinearMap::zero(&module, &module, Degree::Graded(-1));
    let complex = ChainComplex::new(module.clone(), d).unwrap();
    let pss = LinearMap::new(
        module.clone(),
        orbits.clone(),
        Degree::Ungraded,
        NovikovMatrix::identity(4),
    )
    .unwrap();
    let ssp = LinearMap::new(
        orbits,
        module.clone(),
        Degree::Ungraded,
        NovikovMatrix::identity(4),
    )
    .unwrap();
    let iota = LinearMap::identity(&module);
    let h = LinearMap::zero(&module, &module, Degree::Graded(1));
    TrivialSetup {
        complex,
        pss,
        ssp,
        iota,
        h,
    }
}

fn unit_cycles(n: usize) -> Vec<Vec<NovikovScalar>> {
    (0..n)
        .map(|i| {
            let mut v = vec![BigRational::from_integer(0.into()); n]
                .iter()
                .map(|_| NovikovScalar::zero())
                .collect::<Vec<_>>();
            v[i] = NovikovScalar::from_int(1);
            v
        })
        .collect()
}

#[test]
fn bound_machine_certifies_the_trivial_setup() {
    let s = trivial_setup();
    let cycles = unit_cycles(4);
    let cert = arnold_bound(&ArnoldInputs {
        betti: &[1, 2, 1],
        cycles: &cycles,
        pss: &s.pss,
        ssp: &s.ssp,
        iota: &s.iota,
        homotopy: &s.h,
        d: s.complex.differential(),
        cutoff: int_ratio(10),
    })
    .unwrap();
    assert_eq!(cert.bound, 4);
    let names: Vec<&str> = cert.steps.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(
        names,
        vec![
            "inputs",
            "cycles",
            "independence",
            "iota chain map",
            "iota invertible",
            "homotopy on cycles",
            "iota-image independence",
            "surjection onto images",
            "bound",
        ]
    );
}

#[test]
fn bound_machine_rejects_wrong_cycle_count() {
    let s = trivial_setup();
    let cycles = unit_cycles(4)[..3].to_vec();
    let err = arnold_bound(&ArnoldInputs {
        betti: &[1, 2, 1],
        cycles: &cycles,
        pss: &s.pss,
        ssp: &s.ssp,
        iota: &s.iota,
        homotopy: &s.h,
        d: s.complex.differential(),
        cutoff: int_ratio(10),
    })
    .unwrap_err();
    assert!(matches!(err, ChainError::HypothesisFailure(msg) if msg.contains("cycles")));
}

#[test]
fn bound_machine_rejects_non_cycles() {
    // d(x) = y: the chain x is not a cycle.
    let c = interval_complex();
    let module = c.module().clone();
    let orbits = GradedModule::ungraded(["o"]).unwrap();
    let pss = LinearMap::new(
        module.clone(),
        orbits.clone(),
        Degree::Ungraded,
        matrix(&[&[0, 1]]),
    )
    .unwrap();
    let ssp = LinearMap::new(orbits, module.clone(), Degree::Ungraded, matrix(&[&[0], &[1]]))
        .unwrap();
    let iota = LinearMap::identity(&module);
    let h = LinearMap::zero(&module, &module, Degree::Graded(1));

    let x_chain = vec![NovikovScalar::from_int(1), NovikovScalar::zero()];
    let err = arnold_bound(&ArnoldInputs {
        betti: &[1],
        cycles: &[x_chain],
        pss: &pss,
        ssp: &ssp,
        iota: &iota,
        homotopy: &h,
        d: c.differential(),
        cutoff: int_ratio(10),
    })
    .unwrap_err();
    assert!(matches!(err, ChainError::HypothesisFailure(msg) if msg.contains("not cycles")));
}

#[test]
fn bound_machine_rejects_dependent_cycles() {
    let s = trivial_setup();
    let mut cycles = unit_cycles(4);
    cycles[3] = cycles[2].clone();
    let err = arnold_bound(&ArnoldInputs {
        betti: &[1, 2, 1],
        cycles: &cycles,
        pss: &s.pss,
        ssp: &s.ssp,
        iota: &s.iota,
        homotopy: &s.h,
        d: s.complex.differential(),
        cutoff: int_ratio(10),
    })
    .unwrap_err();
    assert!(
        matches!(err, ChainError::HypothesisFailure(msg) if msg.contains("independent"))
    );
}

#[test]
fn bound_machine_rejects_a_non_chain_map_iota() {
    // Interval complex plus a surviving degree-0 generator w: the homology
    // is one class (w), so the machine reaches the iota check, where the
    // sign flip anticommutes instead of commuting.
    let module = GradedModule::graded([("x", 1), ("y", 0), ("w", 0)]).unwrap();
    let d = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Graded(-1),
        matrix(&[&[0, 0, 0], &[1, 0, 0], &[0, 0, 0]]),
    )
    .unwrap();
    let c = ChainComplex::new(module.clone(), d).unwrap();
    let orbits = GradedModule::ungraded(["o"]).unwrap();
    let pss = LinearMap::new(
        module.clone(),
        orbits.clone(),
        Degree::Ungraded,
        matrix(&[&[0, 0, 1]]),
    )
    .unwrap();
    let ssp = LinearMap::new(
        orbits,
        module.clone(),
        Degree::Ungraded,
        matrix(&[&[0], &[0], &[1]]),
    )
    .unwrap();
    let iota = LinearMap::identity(&module).sign_adjust().unwrap();
    let h = LinearMap::zero(&module, &module, Degree::Graded(1));

    let w_cycle = vec![
        NovikovScalar::zero(),
        NovikovScalar::zero(),
        NovikovScalar::from_int(1),
    ];
    let err = arnold_bound(&ArnoldInputs {
        betti: &[1, 0],
        cycles: &[w_cycle],
        pss: &pss,
        ssp: &ssp,
        iota: &iota,
        homotopy: &h,
        d: c.differential(),
        cutoff: int_ratio(10),
    })
    .unwrap_err();
    assert!(matches!(err, ChainError::HypothesisFailure(msg) if msg.contains("chain map")));
}

#[test]
fn bound_machine_rejects_singular_iota() {
    let s = trivial_setup();
    let mut singular = NovikovMatrix::identity(4);
    singular.set(0, 0, NovikovScalar::zero());
    let iota = LinearMap::new(
        s.complex.module().clone(),
        s.complex.module().clone(),
        Degree::Graded(0),
        singular,
    )
    .unwrap();
    let cycles = unit_cycles(4);
    let err = arnold_bound(&ArnoldInputs {
        betti: &[1, 2, 1],
        cycles: &cycles,
        pss: &s.pss,
        ssp: &s.ssp,
        iota: &iota,
        homotopy: &s.h,
        d: s.complex.differential(),
        cutoff: int_ratio(10),
    })
    .unwrap_err();
    assert!(matches!(err, ChainError::HypothesisFailure(msg) if msg.contains("iota not invertible")));
}

#[test]
fn bound_machine_uses_the_explicit_inverse_fallback() {
    // iota = diag(T, 1, 1, 1) fails the constant-term criterion but is an
    // exactly invertible matrix; the machine should certify it via the
    // fallback and then fail later on the homotopy identity, which names
    // the actual obstruction.
    let s = trivial_setup();
    let mut twisted = NovikovMatrix::identity(4);
    twisted.set(0, 0, t_power(1));
    let iota = LinearMap::new(
        s.complex.module().clone(),
        s.complex.module().clone(),
        Degree::Graded(0),
        twisted,
    )
    .unwrap();
    let cycles = unit_cycles(4);
    let err = arnold_bound(&ArnoldInputs {
        betti: &[1, 2, 1],
        cycles: &cycles,
        pss: &s.pss,
        ssp: &s.ssp,
        iota: &iota,
        homotopy: &s.h,
        d: s.complex.differential(),
        cutoff: int_ratio(10),
    })
    .unwrap_err();
    assert!(matches!(err, ChainError::HypothesisFailure(msg) if msg.contains("homotopy identity")));
}

#[test]
fn rational_chain_converts_columns() {
    let col = vec![
        BigRational::from_integer(0.into()),
        BigRational::new(3.into(), 2.into()),
    ];
    let chain = rational_chain(&col);
    assert!(chain[0].is_zero_exact());
    assert_eq!(chain[1].constant_term(), Some(BigRational::new(3.into(), 2.into())));
}
