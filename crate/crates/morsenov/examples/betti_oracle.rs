//! Two independent routes to the Betti numbers of each catalog manifold:
//! ranks of the flow-derived Morse complex versus an exact cell-structure
//! computation that never sees the flow.
//!
//! Run with `cargo run --example betti_oracle`.

use morsenov::homology::{homology_rank_lambda, CubicalComplex};
use morsenov::morse::{FlowConfig, MorseModel, MorseSystem};
use morsenov::ratio::ratio;

fn main() {
    println!("{:<16} {:<14} {:<14} agree", "model", "morse", "cells");
    for name in ["sphere2", "torus_1", "torus_2", "torus_3", "sphere2*torus_1"] {
        let model = MorseModel::parse(name).expect("catalog model");

        // Route one: find critical points, count trajectories, take ranks.
        let system =
            MorseSystem::analyze(model.clone(), FlowConfig::default()).expect("analysis succeeds");
        let (complex, _) = system.build_complex().expect("complex builds");
        let via_morse = homology_rank_lambda(&complex, &ratio(10, 1)).expect("certified ranks");

        // Route two: a cell structure on the same manifold, reduced with
        // exact rational arithmetic.
        let via_cells = CubicalComplex::for_model(&model, 1)
            .expect("catalog model has a cell structure")
            .betti();

        let agree = via_morse == via_cells;
        println!(
            "{:<16} {:<14} {:<14} {}",
            name,
            via_morse.to_string(),
            via_cells.to_string(),
            agree
        );
        assert!(agree, "the two routes must agree on {name}");
    }
}
