//! Raw statistics of qubit stabilizer procedures, some prepared in two
//! contexts, quotiented into a GPT fragment.

use gptforge::quotient::{check_congruence, check_unique_deterministic_effect, quotient, Signature};
use gptforge::zoo::qubit_stabilizer_stats;
use gptforge::Result;

fn main() -> Result<()> {
    let table = qubit_stabilizer_stats()?;
    let tol = 1e-9;
    let det = check_unique_deterministic_effect(&table, tol)?;
    println!("{} procedures; deterministic effect unique: {}", table.procedures.len(), det.unique);

    let q = quotient(&table, tol)?;
    println!(
        "classes: {} states, {} effects, {} transformations",
        q.classes.count(|s| matches!(s, Signature::Preparation { .. })),
        q.classes.count(|s| matches!(s, Signature::Effect { .. })),
        q.classes.count(|s| matches!(s, Signature::Transformation { .. })),
    );
    let plus = q.classes.class_of("|+>", "H-after-|0>").expect("listed in the table");
    println!("`|+>` prepared as H|0> lands in class {} with {} members", plus.label, plus.members.len());

    let cong = check_congruence(&table, &q, tol)?;
    for c in &cong.checks {
        println!("  {:<18} {:.1e}", c.procedure, c.deviation);
    }
    println!("congruent: {}", cong.pass);
    Ok(())
}
