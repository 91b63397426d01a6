//! Gross's discrete Wigner function for a qutrit.

use gptforge::frames::{positivity_report, represent, FrameModel};
use gptforge::quantum::{gross_wigner_frame, ket, projector, stabilizer_fragment, stabilizer_states};
use gptforge::Result;

fn main() -> Result<()> {
    let f = stabilizer_fragment(3)?;
    let sys = f.systems.get("qutrit")?;
    let (w, entry, check) = gross_wigner_frame(3, &sys)?;
    println!("frame invariants hold: {}", check.passes(1e-9));

    for (label, psi) in stabilizer_states(3)?.iter().take(4) {
        let vals: Vec<String> = w.wigner(&projector(psi)).iter().map(|x| format!("{x:+.3}")).collect();
        println!("W({label}) = [{}]", vals.join(" "));
    }
    let strange = projector(&(ket(3, 1) - ket(3, 2)));
    let min = w.wigner(&strange).into_iter().fold(f64::INFINITY, f64::min);
    println!("W(|1>-|2>) has minimum {min:+.3}");

    let model = FrameModel::single(entry);
    let rep = positivity_report(&model, &f, 1e-9)?;
    println!("stabilizer fragment positive: {} ({} processes)", rep.positive, rep.processes.len());
    let fourier = f.transformations.iter().find(|t| t.label == "F").unwrap();
    let perm = represent(&model, fourier)?.map(|x| x.round().abs());
    println!("F on phase space:\n{perm}");
    Ok(())
}
