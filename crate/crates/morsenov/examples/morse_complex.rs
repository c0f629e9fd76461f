//! The numerical Morse engine end to end on the flat 2-torus: critical
//! points, signed trajectory counts, and the assembled chain complex.
//!
//! Run with `cargo run --example morse_complex`.

use morsenov::homology::homology_rank_lambda;
use morsenov::morse::{FlowConfig, MorseModel, MorseSystem};
use morsenov::ratio::ratio;

fn main() {
    let model = MorseModel::parse("torus_2").expect("catalog model");
    let system = MorseSystem::analyze(model, FlowConfig::default()).expect("analysis succeeds");

    println!("critical points of {}:", system.model());
    for point in system.points() {
        let coords: Vec<String> = point.coords.iter().map(|x| format!("{x:.4}")).collect();
        println!(
            "  {:<4} index {}  value {:+.4}  at ({})",
            point.id,
            point.index,
            point.value,
            coords.join(", ")
        );
    }

    let (complex, counts) = system.build_complex().expect("complex builds");
    println!("\nconnecting trajectories between adjacent critical points:");
    for count in &counts {
        println!(
            "  {} -> {:<4} unsigned {}  signed {:+}",
            count.from, count.to, count.unsigned, count.signed
        );
    }

    // On the flat torus the two trajectories in each pair carry opposite
    // orientations, so every signed count — and hence the differential —
    // vanishes.
    println!("\ndifferential:\n{}", complex.differential());

    let betti = homology_rank_lambda(&complex, &ratio(10, 1)).expect("certified ranks");
    println!("homology ranks over the Novikov field: {betti}");
}
