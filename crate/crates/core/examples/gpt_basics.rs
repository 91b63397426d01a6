//! States, effects and transformations of a classical trit, composed in
//! sequence and in parallel.
//!
//! Run with `cargo run --example gpt_basics`.

use gptforge::gptcore::{effect_product, state_product};
use gptforge::zoo::classical_simplex;
use gptforge::{compose_par, compose_seq, evaluate, validate_fragment, GptTransformation, Result};

fn main() -> Result<()> {
    let mut trit = classical_simplex(3)?;
    println!("valid fragment: {}", validate_fragment(&trit, 1e-9).is_valid());

    let shift = trit.transformations[0].clone();
    let twice = compose_seq(&shift, &shift)?;
    let p = evaluate(&trit.effects[2], &twice, &trit.states[0])?;
    println!("P({} | {} then {}) = {p}", trit.effects[2].label, trit.states[0].label, twice.label);

    trit.systems.register_composite("trit^2", "simplex3", "simplex3")?;
    let reg = &trit.systems;
    let pair = state_product(reg, &trit.states[0], &trit.states[1])?;
    let both = compose_par(reg, &shift, &GptTransformation::identity(shift.in_system.clone()))?;
    let joint = effect_product(reg, &trit.effects[1], &trit.effects[1])?;
    println!(
        "P({} | {} then {}) = {}",
        joint.label,
        pair.label,
        both.label,
        evaluate(&joint, &both, &pair)?
    );
    Ok(())
}
