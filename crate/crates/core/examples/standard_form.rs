//! Tomography of a qubit from {0, 1, +, +i}: the identity decomposition,
//! standard forms of two gates and their composite.

use gptforge::quantum::{hadamard, phase_gate, stabilizer_fragment, unitary_channel, HermitianBasis};
use gptforge::tomo::{compose_raw, identity_decomposition_check, transition_matrix, SpanningSet};
use gptforge::{compose_seq, Result};

fn main() -> Result<()> {
    let f = stabilizer_fragment(2)?;
    let sys = f.systems.get("qubit")?;
    let pick = ["0", "1", "+", "+i"];
    let states = pick
        .iter()
        .map(|l| f.states.iter().find(|s| s.label == format!("|{l}>")).unwrap().vec.clone())
        .collect();
    let effects = pick
        .iter()
        .map(|l| f.effects.iter().find(|e| e.label == format!("<{l}|")).unwrap().covec.clone())
        .collect();
    let set = SpanningSet::new(&sys, states, effects)?;

    let id = identity_decomposition_check(&set, 1e-9)?;
    println!("identity decomposition residual {:.1e} (cond {:.1})", id.residual, id.cond);
    println!("N_1 =\n{:.3}", set.identity_transition());

    let basis = HermitianBasis::gell_mann(2);
    let h = unitary_channel("H", &hadamard(), &basis, sys.clone(), 1e-9)?;
    let s = unitary_channel("S", &phase_gate(2), &basis, sys, 1e-9)?;
    let th = transition_matrix(&h, &set, &set)?;
    let ts = transition_matrix(&s, &set, &set)?;
    println!("standard form of H =\n{:.3}", th.standard);

    let raw = compose_raw(&ts, &th, 1e-9)?;
    let direct = transition_matrix(&compose_seq(&s, &h)?, &set, &set)?;
    println!(
        "S after H: raw route vs direct {:.1e}",
        (&raw.m - &direct.m).amax()
    );
    Ok(())
}
