//! Chain-map and chain-homotopy verification on a two-generator complex,
//! plus the column-sign adjustment that turns an anticommuting map into a
//! genuine chain map.
//!
//! Run with `cargo run --example chain_homotopy`.

use morsenov::chain::{
    check_anticommutation, check_chain_homotopy, check_chain_map, ChainComplex, Degree,
    GradedModule, LinearMap,
};
use morsenov::novikov::{NovikovMatrix, NovikovScalar};
use morsenov::ratio::ratio;

fn main() {
    // A tiny complex: generators x1 in grading 1 and x0 in grading 0, with
    // d(x1) = 2·x0. Over a field its homology vanishes in both gradings.
    let module = GradedModule::graded([("x1", 1), ("x0", 0)]).expect("distinct ids");
    let d = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Graded(-1),
        NovikovMatrix::from_rows(vec![
            vec![NovikovScalar::zero(), NovikovScalar::zero()],
            vec![NovikovScalar::from_int(2), NovikovScalar::zero()],
        ]),
    )
    .expect("degree-homogeneous matrix");
    let complex = ChainComplex::new(module.clone(), d.clone()).expect("d squares to zero");
    println!("differential:\n{}", complex.differential());

    let thru = ratio(10, 1);

    // The identity is a chain map; since homology vanishes it should be
    // chain homotopic to the zero map. The homotopy h(x0) = ½·x1 works:
    // id = d∘h + h∘d exactly.
    let identity = LinearMap::identity(&module);
    let zero = LinearMap::zero(&module, &module, Degree::Graded(0));
    let h = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Graded(1),
        NovikovMatrix::from_rows(vec![
            vec![NovikovScalar::zero(), NovikovScalar::from_ratio(ratio(1, 2))],
            vec![NovikovScalar::zero(), NovikovScalar::zero()],
        ]),
    )
    .expect("degree-homogeneous matrix");

    let report = check_chain_map(&identity, &d, &d, &thru).expect("shapes match");
    println!("{}", report.summary());
    let report = check_chain_homotopy(&identity, &zero, &h, &d, &d, &thru).expect("shapes match");
    println!("{}", report.summary());

    // A map that scales grading g by (−1)^g anticommutes with d instead of
    // commuting with it.
    let flip = LinearMap::new(
        module.clone(),
        module.clone(),
        Degree::Graded(0),
        NovikovMatrix::from_rows(vec![
            vec![NovikovScalar::from_int(-1), NovikovScalar::zero()],
            vec![NovikovScalar::zero(), NovikovScalar::one()],
        ]),
    )
    .expect("degree-homogeneous matrix");
    let as_chain_map = check_chain_map(&flip, &d, &d, &thru).expect("shapes match");
    let as_anti = check_anticommutation(&flip, &d, &d, &thru).expect("shapes match");
    println!("sign flip as a chain map:    {}", as_chain_map.summary());
    println!("sign flip anticommuting:     {}", as_anti.summary());

    // Scaling each column by (−1)^{grading of its source generator} undoes
    // the flip, leaving the identity — a chain map again.
    let adjusted = flip.sign_adjust().expect("fully graded source");
    let report = check_chain_map(&adjusted, &d, &d, &thru).expect("shapes match");
    println!("after the sign adjustment:   {}", report.summary());
}
