//! Hilbert-space front end.
//!
//! Coordinates come from a Hermitian operator basis `B_0 = I, B_1.. ` with
//! `tr(B_j B_k) = d delta_jk`: generalized Gell-Mann matrices scaled by
//! `sqrt(d/2)`, which for a qubit are exactly `I, X, Y, Z`. A state has
//! coordinates `v_k = tr(B_k rho)` (so `v_0 = tr rho` and the unit effect is
//! `(1, 0, .., 0)`), an effect has `e_k = tr(B_k E) / d`, and `e . v =
//! tr(E rho)`. Complex arithmetic stays inside this module.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frames::{build_frame, sample_frame, FrameCheck, FrameEntry, FrameModel};
use crate::gptcore::{GptEffect, GptFragment, GptState, GptTransformation, SystemRegistry, SystemSpec};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone)]
pub struct HermitianBasis {
    pub hilbert_dim: usize,
    pub elements: Vec<CMatrix>,
}

impl HermitianBasis {
    /// Identity followed by scaled generalized Gell-Mann matrices: for each
    /// pair `j < k` the symmetric then antisymmetric element, then the
    /// diagonal ones.
    pub fn gell_mann(d: usize) -> Self {
        assert!(d >= 1);
        let s = (d as f64 / 2.0).sqrt();
        let mut elements = vec![CMatrix::identity(d, d)];
        for j in 0..d {
            for k in j + 1..d {
                let mut sym = CMatrix::zeros(d, d);
                sym[(j, k)] = ONE * s;
                sym[(k, j)] = ONE * s;
                elements.push(sym);
                let mut anti = CMatrix::zeros(d, d);
                anti[(j, k)] = -I * s;
                anti[(k, j)] = I * s;
                elements.push(anti);
            }
        }
        for l in 1..d {
            let c = (2.0 / (l * (l + 1)) as f64).sqrt() * s;
            let mut diag = CMatrix::zeros(d, d);
            for j in 0..l {
                diag[(j, j)] = ONE * c;
            }
            diag[(l, l)] = ONE * (-(l as f64) * c);
            elements.push(diag);
        }
        Self {
            hilbert_dim: d,
            elements,
        }
    }

    pub fn gpt_dim(&self) -> usize {
        self.elements.len()
    }

    /// Max deviation from `tr(B_j B_k) = d delta_jk`.
    pub fn orthogonality_residual(&self) -> f64 {
        let d = self.hilbert_dim as f64;
        let mut worst = 0.0_f64;
        for (j, a) in self.elements.iter().enumerate() {
            for (k, b) in self.elements.iter().enumerate() {
                let t = (a * b).trace();
                let target = if j == k { d } else { 0.0 };
                worst = worst.max((t - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    fn coords(&self, op: &CMatrix, what: &str, tol: f64) -> Result<DVector<f64>> {
        let d = self.hilbert_dim;
        if op.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                context: format!("{what} operator"),
                expected: d,
                got: op.nrows(),
            });
        }
        let herm = hermiticity_residual(op);
        if herm > tol {
            return Err(Error::Invalid(format!(
                "{what} is not Hermitian (residual {herm:.3e})"
            )));
        }
        Ok(DVector::from_iterator(
            self.gpt_dim(),
            self.elements.iter().map(|b| (b * op).trace().re),
        ))
    }

    pub fn state_vector(&self, rho: &CMatrix, tol: f64) -> Result<DVector<f64>> {
        self.coords(rho, "state", tol)
    }

    pub fn effect_covector(&self, effect: &CMatrix, tol: f64) -> Result<DVector<f64>> {
        Ok(self.coords(effect, "effect", tol)? / self.hilbert_dim as f64)
    }

    /// `M_kl = tr(B_k F(B_l)) / d` for a linear superoperator `F`.
    pub fn superoperator_matrix(&self, f: impl Fn(&CMatrix) -> CMatrix) -> DMatrix<f64> {
        let n = self.gpt_dim();
        let d = self.hilbert_dim as f64;
        let images: Vec<CMatrix> = self.elements.iter().map(&f).collect();
        DMatrix::from_fn(n, n, |k, l| (&self.elements[k] * &images[l]).trace().re / d)
    }

    pub fn kraus_matrix(&self, kraus: &[CMatrix]) -> DMatrix<f64> {
        self.superoperator_matrix(|x| apply_kraus(kraus, x))
    }

    /// Operator with state coordinates `v`.
    pub fn state_operator(&self, v: &DVector<f64>) -> CMatrix {
        let d = self.hilbert_dim as f64;
        self.combine(v) / C64::new(d, 0.0)
    }

    /// Operator with effect coordinates `e`.
    pub fn effect_operator(&self, e: &DVector<f64>) -> CMatrix {
        self.combine(e)
    }

    fn combine(&self, c: &DVector<f64>) -> CMatrix {
        let d = self.hilbert_dim;
        let mut out = CMatrix::zeros(d, d);
        for (ck, b) in c.iter().zip(&self.elements) {
            out += b * C64::new(*ck, 0.0);
        }
        out
    }
}

pub fn hermiticity_residual(op: &CMatrix) -> f64 {
    let diff = op - op.adjoint();
    diff.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn apply_kraus(kraus: &[CMatrix], x: &CMatrix) -> CMatrix {
    let d = kraus.first().map_or(x.nrows(), |k| k.nrows());
    let mut out = CMatrix::zeros(d, x.ncols());
    for k in kraus {
        out += k * x * k.adjoint();
    }
    out
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(op: &CMatrix) -> f64 {
    let h = (op + op.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// GPT system for a `d`-level quantum system in the Gell-Mann coordinates.
pub fn quantum_system(id: impl Into<String>, d: usize) -> Result<SystemSpec> {
    SystemSpec::with_leading_unit(id, d * d)
}

pub fn to_gpt_state(
    label: impl Into<String>,
    rho: &CMatrix,
    basis: &HermitianBasis,
    system: Arc<SystemSpec>,
    tol: f64,
) -> Result<GptState> {
    let v = basis.state_vector(rho, tol)?;
    let trace = rho.trace().re;
    if (trace - 1.0).abs() <= tol {
        GptState::new(label, system, v)
    } else {
        GptState::subnormalized(label, system, v)
    }
}

pub fn to_gpt_effect(
    label: impl Into<String>,
    effect: &CMatrix,
    basis: &HermitianBasis,
    system: Arc<SystemSpec>,
    tol: f64,
) -> Result<GptEffect> {
    GptEffect::new(label, system, basis.effect_covector(effect, tol)?)
}

/// Converts a Kraus channel; when `channel` is set the Kraus operators must
/// satisfy `sum K^dag K = I` within `tol`.
pub fn to_gpt_channel(
    label: impl Into<String>,
    kraus: &[CMatrix],
    basis: &HermitianBasis,
    system: Arc<SystemSpec>,
    channel: bool,
    tol: f64,
) -> Result<GptTransformation> {
    let d = basis.hilbert_dim;
    if kraus.is_empty() {
        return Err(Error::Invalid("no Kraus operators".into()));
    }
    if let Some(k) = kraus.iter().find(|k| k.shape() != (d, d)) {
        return Err(Error::DimensionMismatch {
            context: "Kraus operator".into(),
            expected: d,
            got: k.nrows(),
        });
    }
    if channel {
        let mut sum = CMatrix::zeros(d, d);
        for k in kraus {
            sum += k.adjoint() * k;
        }
        let r = (sum - CMatrix::identity(d, d))
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()));
        if r > tol {
            return Err(Error::Invalid(format!(
                "Kraus operators are not trace preserving (residual {r:.3e})"
            )));
        }
    }
    GptTransformation::new(label, system.clone(), system, basis.kraus_matrix(kraus), channel)
}

pub fn unitary_channel(
    label: impl Into<String>,
    u: &CMatrix,
    basis: &HermitianBasis,
    system: Arc<SystemSpec>,
    tol: f64,
) -> Result<GptTransformation> {
    to_gpt_channel(label, std::slice::from_ref(u), basis, system, true, tol)
}

pub fn ket(d: usize, j: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[j] = ONE;
    v
}

pub fn projector(psi: &CVector) -> CMatrix {
    let n = psi.norm();
    let p = psi / C64::new(n, 0.0);
    &p * p.adjoint()
}

pub fn omega(d: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI / d as f64)
}

/// `X|j> = |j+1 mod d>`.
pub fn shift(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| if r == (c + 1) % d { ONE } else { ZERO })
}

/// `Z|j> = w^j |j>`.
pub fn clock(d: usize) -> CMatrix {
    let w = omega(d);
    CMatrix::from_fn(d, d, |r, c| if r == c { w.powu(r as u32) } else { ZERO })
}

/// `F|j> = d^{-1/2} sum_k w^{jk} |k>`.
pub fn fourier(d: usize) -> CMatrix {
    let w = omega(d);
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |k, j| w.powu(((j * k) % d) as u32) * s)
}

/// Qubit: `diag(1, i)`; odd `d`: `|j> -> w^{j(j-1)/2} |j>`.
pub fn phase_gate(d: usize) -> CMatrix {
    if d == 2 {
        return CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, I]));
    }
    let w = omega(d);
    CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            w.powu(((r * (r + d - 1) / 2) % d) as u32)
        } else {
            ZERO
        }
    })
}

pub fn hadamard() -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    CMatrix::from_row_slice(2, 2, &[ONE * s, ONE * s, ONE * s, -ONE * s])
}

/// Pure stabilizer states: 6 for a qubit, 12 for a qutrit.
///
/// Qutrit states are the computational basis plus the quadratic-phase
/// states `3^{-1/2} sum_j w^{a j^2 + b j} |j>`, which are the eigenvectors
/// of `X`, `XZ` and `XZ^2`.
pub fn stabilizer_states(d: usize) -> Result<Vec<(String, CVector)>> {
    match d {
        2 => {
            let s = 1.0 / 2f64.sqrt();
            let mk = |a: C64, b: C64| CVector::from_vec(vec![a * s, b * s]);
            Ok(vec![
                ("0".into(), ket(2, 0)),
                ("1".into(), ket(2, 1)),
                ("+".into(), mk(ONE, ONE)),
                ("-".into(), mk(ONE, -ONE)),
                ("+i".into(), mk(ONE, I)),
                ("-i".into(), mk(ONE, -I)),
            ])
        }
        3 => {
            let w = omega(3);
            let s = 1.0 / 3f64.sqrt();
            let mut out: Vec<(String, CVector)> = (0..3).map(|j| (format!("z{j}"), ket(3, j))).collect();
            for a in 0..3 {
                for b in 0..3 {
                    let v = CVector::from_fn(3, |j, _| w.powu(((a * j * j + b * j) % 3) as u32) * s);
                    out.push((format!("q{a}{b}"), v));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported(format!(
            "stabilizer fragments are available for d = 2 or 3, not {d}"
        ))),
    }
}

/// Generating set used for stabilizer fragments: `H, S, X, Z` for a qubit,
/// `F, S, X, Z` for a qutrit.
pub fn clifford_generators(d: usize) -> Result<Vec<(String, CMatrix)>> {
    match d {
        2 => Ok(vec![
            ("H".into(), hadamard()),
            ("S".into(), phase_gate(2)),
            ("X".into(), shift(2)),
            ("Z".into(), clock(2)),
        ]),
        3 => Ok(vec![
            ("F".into(), fourier(3)),
            ("S".into(), phase_gate(3)),
            ("X".into(), shift(3)),
            ("Z".into(), clock(3)),
        ]),
        _ => Err(Error::Unsupported(format!("no Clifford generators for d = {d}"))),
    }
}

/// Stabilizer states, their rank-1 effects and the Clifford generators of
/// [`clifford_generators`], with the states and effects as cone rays.
pub fn stabilizer_fragment(d: usize) -> Result<GptFragment> {
    let states = stabilizer_states(d)?;
    let basis = HermitianBasis::gell_mann(d);
    let id = if d == 2 { "qubit" } else { "qutrit" };
    let mut reg = SystemRegistry::new();
    let sys = reg.register(quantum_system(id, d)?)?;
    let mut f = GptFragment::new(reg);
    let tol = 1e-12;
    for (label, psi) in &states {
        let p = projector(psi);
        f.states.push(to_gpt_state(format!("|{label}>"), &p, &basis, sys.clone(), tol)?);
        f.effects.push(to_gpt_effect(format!("<{label}|"), &p, &basis, sys.clone(), tol)?);
    }
    for (label, u) in clifford_generators(d)? {
        f.transformations.push(unitary_channel(label, &u, &basis, sys.clone(), 1e-10)?);
    }
    Ok(f.with_cones_from_members())
}

fn is_odd_prime(d: usize) -> bool {
    d >= 3 && d % 2 == 1 && (3..).step_by(2).take_while(|k| k * k <= d).all(|k| d % k != 0)
}

/// Phase-point operators of Gross's discrete Wigner function.
#[derive(Debug, Clone)]
pub struct WignerFrame {
    pub dim: usize,
    /// `A_(q,p)` at index `q * dim + p`.
    pub phase_point_ops: Vec<CMatrix>,
}

impl WignerFrame {
    pub fn label(&self, idx: usize) -> String {
        format!("({},{})", idx / self.dim, idx % self.dim)
    }

    /// `(max |tr A - 1|, max |tr(A A') - d delta|, max |sum A - d I|)`.
    pub fn invariant_residuals(&self) -> (f64, f64, f64) {
        let d = self.dim as f64;
        let trace = self
            .phase_point_ops
            .iter()
            .map(|a| (a.trace() - ONE).norm())
            .fold(0.0_f64, f64::max);
        let mut gram = 0.0_f64;
        for (i, a) in self.phase_point_ops.iter().enumerate() {
            for (j, b) in self.phase_point_ops.iter().enumerate() {
                let t = (a * b).trace();
                let target = if i == j { d } else { 0.0 };
                gram = gram.max((t - C64::new(target, 0.0)).norm());
            }
        }
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for a in &self.phase_point_ops {
            sum += a;
        }
        let total = (sum - CMatrix::identity(self.dim, self.dim) * C64::new(d, 0.0))
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()));
        (trace, gram, total)
    }

    /// `W(q,p) = tr(A_(q,p) rho) / d`.
    pub fn wigner(&self, rho: &CMatrix) -> Vec<f64> {
        let d = self.dim as f64;
        self.phase_point_ops
            .iter()
            .map(|a| (a * rho).trace().re / d)
            .collect()
    }
}

/// Builds Gross's frame for an odd prime `d <= 7` and the matching frame
/// entry (dual frame `A_l / d`, frame `A_l`) in the Gell-Mann coordinates.
pub fn gross_wigner_frame(d: usize, system: &SystemSpec) -> Result<(WignerFrame, FrameEntry, FrameCheck)> {
    if !is_odd_prime(d) {
        return Err(Error::Unsupported(format!(
            "Gross's Wigner function needs an odd prime dimension, got {d}"
        )));
    }
    if d > 7 {
        return Err(Error::TooLarge { dim: d, max: 7 });
    }
    if system.dim != d * d {
        return Err(Error::DimensionMismatch {
            context: "Gross frame system".into(),
            expected: d * d,
            got: system.dim,
        });
    }
    let w = omega(d);
    let x = shift(d);
    let z = clock(d);
    let half = (d + 1) / 2; // inverse of 2 mod d
    let displacement = |q: usize, p: usize| -> CMatrix {
        let phase_exp = (half * q * p) % d;
        let xq = x.pow(q as u32);
        let zp = z.pow(p as u32);
        xq * zp * w.powu(phase_exp as u32)
    };
    let mut a0 = CMatrix::zeros(d, d);
    for q in 0..d {
        for p in 0..d {
            a0 += displacement(q, p);
        }
    }
    a0 /= C64::new(d as f64, 0.0);
    let mut ops = Vec::with_capacity(d * d);
    for q in 0..d {
        for p in 0..d {
            let dqp = displacement(q, p);
            ops.push(&dqp * &a0 * dqp.adjoint());
        }
    }
    let frame = WignerFrame {
        dim: d,
        phase_point_ops: ops,
    };
    let basis = HermitianBasis::gell_mann(d);
    let mut rows = Vec::with_capacity(d * d * d * d);
    for a in &frame.phase_point_ops {
        let dual = a / C64::new(d as f64, 0.0);
        rows.extend(basis.effect_covector(&dual, 1e-10)?.iter().cloned());
    }
    let chi = DMatrix::from_row_slice(d * d, d * d, &rows);
    let labels = (0..d * d).map(|i| frame.label(i)).collect();
    let (entry, check) = build_frame(system, labels, chi, 1e-9, false)?;
    Ok((frame, entry, check))
}

/// Something a frame model can represent.
#[derive(Debug, Clone, Copy)]
pub enum Representable<'a> {
    State(&'a GptState),
    Effect(&'a GptEffect),
    Channel(&'a GptTransformation),
}

/// Most negative entry of the representation, or 0 if there is none.
pub fn negativity(model: &FrameModel, item: Representable<'_>) -> Result<f64> {
    let min = match item {
        Representable::State(s) => crate::frames::represent_state(model, &s.system.id, &s.vec)?.min(),
        Representable::Effect(e) => crate::frames::represent_effect(model, &e.system.id, &e.covec)?.min(),
        Representable::Channel(t) => crate::frames::represent(model, t)?.min(),
    };
    Ok(min.min(0.0))
}

/// Smallest eigenvalue among the operators of all frame vectors `F_l` and
/// dual-frame operators `D*_l`; negative means the frame is not positive.
pub fn frame_positivity_witness(entry: &FrameEntry, basis: &HermitianBasis) -> f64 {
    let mut worst = f64::INFINITY;
    for l in 0..entry.n() {
        worst = worst.min(min_eigenvalue(&basis.state_operator(&entry.frame_vector(l))));
        worst = worst.min(min_eigenvalue(&basis.effect_operator(&entry.dual_vector(l))));
    }
    worst
}

/// Positivity witnesses of `count` random exact frames for a `d`-level
/// system. Sample `i` draws from its own ChaCha stream, so results do not
/// depend on `jobs`.
pub fn random_frame_witnesses(d: usize, count: usize, seed: u64, jobs: usize) -> Result<Vec<f64>> {
    let system = quantum_system("sampled", d)?;
    let basis = HermitianBasis::gell_mann(d);
    let one = |i: usize| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        loop {
            let chi = sample_frame(&mut rng, &system.unit_effect);
            let labels = (0..chi.nrows()).map(|l| format!("l{l}")).collect();
            match build_frame(&system, labels, chi, 1e-9, false) {
                Ok((entry, _)) => return Ok(frame_positivity_witness(&entry, &basis)),
                Err(Error::Singular { .. } | Error::IllConditioned { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    };
    let jobs = jobs.clamp(1, count.max(1));
    let mut out = vec![0.0; count];
    let chunk = count.div_ceil(jobs).max(1);
    std::thread::scope(|scope| -> Result<()> {
        let handles: Vec<_> = out
            .chunks_mut(chunk)
            .enumerate()
            .map(|(c, slot)| {
                let one = &one;
                scope.spawn(move || -> Result<()> {
                    for (k, w) in slot.iter_mut().enumerate() {
                        *w = one(c * chunk + k)?;
                    }
                    Ok(())
                })
            })
            .collect();
        for h in handles {
            h.join().map_err(|_| Error::Invalid("sampling thread panicked".into()))??;
        }
        Ok(())
    })?;
    Ok(out)
}

/// Dimension of the real span of `n x n` density matrices.
pub fn hermitian_dim(n: u64) -> u64 {
    n * n
}

/// Dimension of the span of real symmetric `n x n` density matrices.
pub fn real_symmetric_dim(n: u64) -> u64 {
    n * (n + 1) / 2
}
