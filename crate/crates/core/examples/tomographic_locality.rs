//! Parameter counting for composite systems.

use gptforge::quantum::{hermitian_dim, real_symmetric_dim};
use gptforge::tomo::tomographic_locality_check;

fn main() {
    for (name, a, b, joint) in [
        ("complex qubits", hermitian_dim(2), hermitian_dim(2), hermitian_dim(4)),
        ("complex qutrits", hermitian_dim(3), hermitian_dim(3), hermitian_dim(9)),
        ("real qubits", real_symmetric_dim(2), real_symmetric_dim(2), real_symmetric_dim(4)),
        ("real qutrits", real_symmetric_dim(3), real_symmetric_dim(3), real_symmetric_dim(9)),
    ] {
        let v = tomographic_locality_check(a, b, joint);
        println!(
            "{name:<16} {a} x {b} = {:>3} vs {joint:>3}: local {} (deficit {})",
            v.local_parameters, v.tomographically_local, v.deficit
        );
    }
}
