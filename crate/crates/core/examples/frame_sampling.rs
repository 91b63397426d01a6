//! Random exact qubit frames are never positive, and overcomplete models pay
//! for it in ontic states.
//!
//! `cargo run --release --example frame_sampling -- 5000 8` samples 5000
//! frames on 8 threads.

use gptforge::embed::cardinality_check;
use gptforge::frames::exactness_check;
use gptforge::frames::FrameModel;
use gptforge::quantum::{quantum_system, random_frame_witnesses};
use gptforge::zoo::{eight_state_frame, toy_bit_frame};
use gptforge::Result;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let count = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let jobs = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);

    let w = random_frame_witnesses(2, count, 0, jobs)?;
    let best = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("{count} frames, closest to positive: min eigenvalue {best:.4}");

    let qubit = quantum_system("qubit", 2)?;
    for (name, entry) in [("toy bit", toy_bit_frame(&qubit)?), ("8-state", eight_state_frame(&qubit)?)] {
        let ex = exactness_check(&FrameModel::single(entry), "qubit")?;
        let card = cardinality_check(ex.n_ontic as u64, ex.dim as u64);
        println!("{name}: {} ontic states, gamma {}, exact {}", ex.n_ontic, card.gamma, card.pass);
    }
    Ok(())
}
