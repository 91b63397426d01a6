//! Simplex-embedding tests with certificates: a square GPT that does not
//! embed and a classical trit that does.

use nalgebra::DVector;

use gptforge::embed::{embed_test, verify_certificate, Certificate, EmbedOptions};
use gptforge::schema::{to_canonical, CertificateDoc};
use gptforge::zoo::classical_simplex;
use gptforge::{GptEffect, GptFragment, GptState, Result, SystemRegistry, SystemSpec};

fn square() -> Result<GptFragment> {
    let mut reg = SystemRegistry::new();
    let sys = reg.register(SystemSpec::with_leading_unit("square", 3)?)?;
    let mut f = GptFragment::new(reg);
    for (i, (x, y)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0)].into_iter().enumerate() {
        f.states.push(GptState::new(format!("v{i}"), sys.clone(), DVector::from_vec(vec![1.0, x, y]))?);
    }
    for (i, (x, y)) in [(0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)].into_iter().enumerate() {
        f.effects.push(GptEffect::new(format!("f{i}"), sys.clone(), DVector::from_vec(vec![0.5, x, y]))?);
    }
    Ok(f.with_cones_from_members())
}

fn main() -> Result<()> {
    let tol = 1e-9;
    for (name, f, system) in [("square", square()?, "square"), ("trit", classical_simplex(3)?, "simplex3")] {
        for exact in [false, true] {
            let out = embed_test(&f, system, EmbedOptions { tol, exact })?;
            let cert = out.certificate();
            let check = verify_certificate(&cert, &f, tol)?;
            let what = match &cert {
                Certificate::Embedding(c) => format!("embeds with {} terms", c.ontic_count),
                Certificate::Farkas(y) => format!("refused, Farkas gap {}", y.gap),
            };
            println!("{name} (exact {exact}): {what}; certificate valid {}", check.valid);
        }
    }
    let cert = embed_test(&square()?, "square", EmbedOptions::default())?.certificate();
    print!("{}", to_canonical(&CertificateDoc::from_certificate(&cert))?);
    Ok(())
}
