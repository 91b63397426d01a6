//! The tetrahedral toy-bit frame on the qubit stabilizer prepare-measure
//! fragment: a positive frame, an ontological model and a simplex embedding
//! that all agree.

use gptforge::embed::{embed_test, reduce_certificate, verify_certificate, Certificate, EmbedOptions, EmbedOutcome};
use gptforge::frames::{positivity_report, quasi_to_ontological, FrameModel, OntologicalOutcome};
use gptforge::quantum::stabilizer_fragment;
use gptforge::zoo::toy_bit_frame;
use gptforge::Result;

fn main() -> Result<()> {
    let tol = 1e-9;
    let full = stabilizer_fragment(2)?;
    let pm = full.clone().prepare_measure();
    let sys = pm.systems.get("qubit")?;
    let model = FrameModel::single(toy_bit_frame(&sys)?);

    let rep = positivity_report(&model, &pm, tol)?;
    println!("prepare-measure: positive {} (min {:.2})", rep.positive, rep.min_entry);
    if let OntologicalOutcome::Model(m) = quasi_to_ontological(&rep) {
        let (label, _, dist) = &m.processes[0];
        println!("  {label} -> {:?}", dist.as_slice());
    }
    // the gates permute the tetrahedron into its mirror image
    let rep = positivity_report(&model, &full, tol)?;
    println!("with Cliffords: positive {} (worst {:?})", rep.positive, rep.witness);

    let EmbedOutcome::Feasible(cert) = embed_test(&pm, "qubit", EmbedOptions::default())? else {
        unreachable!("the toy-bit fragment embeds")
    };
    let r = reduce_certificate(&cert, 4, tol);
    let check = verify_certificate(&Certificate::Embedding(r.certificate.clone()), &pm, tol)?;
    println!(
        "embedding: {} -> {} terms, verified {}",
        r.initial_count, r.achieved_count, check.valid
    );
    let (entry, _) = r.certificate.to_frame(&sys, tol)?;
    println!("induced frame chi =\n{:.3}", entry.chi);
    Ok(())
}
