//! Ready-made models and a builder for Born-rule statistics tables.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frames::{build_frame, FrameEntry};
use crate::gptcore::{GptEffect, GptFragment, GptState, GptTransformation, SystemRegistry, SystemSpec};
use crate::quantum::{
    apply_kraus, gross_wigner_frame, hadamard, phase_gate, projector, quantum_system, real_symmetric_dim,
    stabilizer_fragment, stabilizer_states, to_gpt_effect, to_gpt_state, CMatrix, HermitianBasis,
};
use crate::quotient::{Procedure, Signature, StatsTable, SystemTesters, TesterSet};
use crate::schema::{
    to_canonical, FragmentDoc, FrameDoc, StatsTableDoc, TomlocDoc, TOMLOC_V1,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZooModel {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const MODELS: [ZooModel; 8] = [
    ZooModel {
        name: "classical-simplex",
        summary: "d-outcome classical system: vertices, indicator effects, cyclic shift (fragment.v1)",
    },
    ZooModel {
        name: "qubit-gpt",
        summary: "qubit stabilizer states and effects, the |T> state and effect, Clifford generators (fragment.v1)",
    },
    ZooModel {
        name: "qubit-stabilizer",
        summary: "6 qubit stabilizer states and effects with H, S, X, Z (fragment.v1; --stats for statstable.v1)",
    },
    ZooModel {
        name: "qutrit-stabilizer",
        summary: "12 qutrit stabilizer states and effects with F, S, X, Z (fragment.v1)",
    },
    ZooModel {
        name: "gross-wigner-frame",
        summary: "Gross's phase-point frame for an odd prime d, default 3 (frame.v1)",
    },
    ZooModel {
        name: "toy-bit-frame",
        summary: "4-state tetrahedral frame positive on the qubit stabilizer prepare-measure fragment (frame.v1)",
    },
    ZooModel {
        name: "eight-state-model",
        summary: "overcomplete 8-state cube model of a qubit, gamma = 2 (frame.v1)",
    },
    ZooModel {
        name: "real-stabilizer-dims",
        summary: "real-quantum dimension triple (6, 6, 45) for the locality check (tomloc.v1)",
    },
];

#[derive(Debug, Clone)]
pub enum ZooItem {
    Fragment(GptFragment),
    Frame { system: SystemSpec, entry: FrameEntry },
    Stats(StatsTable),
    Tomloc(TomlocDoc),
}

impl ZooItem {
    pub fn to_json(&self) -> Result<String> {
        match self {
            ZooItem::Fragment(f) => to_canonical(&FragmentDoc::from_fragment(f)),
            ZooItem::Frame { system, entry } => to_canonical(&FrameDoc::from_entry(system, entry)),
            ZooItem::Stats(t) => to_canonical(&StatsTableDoc::from_table(t)),
            ZooItem::Tomloc(t) => to_canonical(t),
        }
    }
}

/// Builds a model by name; `param` is the dimension where one applies.
pub fn emit(name: &str, param: Option<usize>, stats: bool) -> Result<ZooItem> {
    if stats && name != "qubit-stabilizer" {
        return Err(Error::Unsupported(format!("`{name}` has no statistics table")));
    }
    Ok(match name {
        "classical-simplex" => ZooItem::Fragment(classical_simplex(param.unwrap_or(3))?),
        "qubit-gpt" => ZooItem::Fragment(qubit_gpt()?),
        "qubit-stabilizer" if stats => ZooItem::Stats(qubit_stabilizer_stats()?),
        "qubit-stabilizer" => ZooItem::Fragment(stabilizer_fragment(2)?),
        "qutrit-stabilizer" => ZooItem::Fragment(stabilizer_fragment(3)?),
        "gross-wigner-frame" => {
            let d = param.unwrap_or(3);
            let system = quantum_system(format!("qudit{d}"), d)?;
            let (_, entry, _) = gross_wigner_frame(d, &system)?;
            ZooItem::Frame { system, entry }
        }
        "toy-bit-frame" => {
            let system = quantum_system("qubit", 2)?;
            let entry = toy_bit_frame(&system)?;
            ZooItem::Frame { system, entry }
        }
        "eight-state-model" => {
            let system = quantum_system("qubit", 2)?;
            let entry = eight_state_frame(&system)?;
            ZooItem::Frame { system, entry }
        }
        "real-stabilizer-dims" => ZooItem::Tomloc(real_stabilizer_dims()),
        other => {
            return Err(Error::Invalid(format!(
                "unknown zoo model `{other}`; try `zoo list`"
            )))
        }
    })
}

pub fn classical_simplex(d: usize) -> Result<GptFragment> {
    if d == 0 {
        return Err(Error::Invalid("simplex needs at least one vertex".into()));
    }
    let mut reg = SystemRegistry::new();
    let sys = reg.register(SystemSpec::classical(format!("simplex{d}"), d)?)?;
    let mut f = GptFragment::new(reg);
    for i in 0..d {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        f.states.push(GptState::new(format!("s{i}"), sys.clone(), v.clone())?);
        f.effects.push(GptEffect::new(format!("e{i}"), sys.clone(), v)?);
    }
    let shift = DMatrix::from_fn(d, d, |r, c| if r == (c + 1) % d { 1.0 } else { 0.0 });
    f.transformations
        .push(GptTransformation::new("shift", sys.clone(), sys, shift, true)?);
    Ok(f.with_cones_from_members())
}

pub fn qubit_gpt() -> Result<GptFragment> {
    let mut f = stabilizer_fragment(2)?;
    let sys = f.systems.get("qubit")?;
    let basis = HermitianBasis::gell_mann(2);
    let r = 1.0 / 3f64.sqrt();
    let t = basis.state_operator(&DVector::from_vec(vec![1.0, r, r, r]));
    f.states.push(to_gpt_state("|T>", &t, &basis, sys.clone(), 1e-12)?);
    f.effects.push(to_gpt_effect("<T|", &t, &basis, sys, 1e-12)?);
    Ok(f.with_cones_from_members())
}

/// Rows `(1, s) / 4` for the tetrahedron `s` in
/// `{(+,+,+), (-,-,+), (+,-,-), (-,+,-)}`.
pub fn toy_bit_frame(system: &SystemSpec) -> Result<FrameEntry> {
    let signs = [[1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0]];
    let rows: Vec<f64> = signs
        .iter()
        .flat_map(|s| [0.25, 0.25 * s[0], 0.25 * s[1], 0.25 * s[2]])
        .collect();
    let chi = DMatrix::from_row_slice(4, 4, &rows);
    let labels = ["+++", "--+", "+--", "-+-"].iter().map(|s| s.to_string()).collect();
    Ok(build_frame(system, labels, chi, 1e-12, false)?.0)
}

/// Rows `(1, l) / 8` for the cube vertices `l` in `{+1, -1}^3`.
pub fn eight_state_frame(system: &SystemSpec) -> Result<FrameEntry> {
    let mut rows = Vec::with_capacity(32);
    let mut labels = Vec::with_capacity(8);
    for bits in 0..8u32 {
        let s: Vec<f64> = (0..3).map(|k| if bits >> (2 - k) & 1 == 0 { 1.0 } else { -1.0 }).collect();
        labels.push(s.iter().map(|x| if *x > 0.0 { '+' } else { '-' }).collect());
        rows.extend([0.125, 0.125 * s[0], 0.125 * s[1], 0.125 * s[2]]);
    }
    let chi = DMatrix::from_row_slice(8, 4, &rows);
    Ok(build_frame(system, labels, chi, 1e-12, true)?.0)
}

/// Real density matrices of one qutrit vs two.
pub fn real_stabilizer_dims() -> TomlocDoc {
    TomlocDoc {
        schema: TOMLOC_V1.into(),
        name: "real-qutrit-stabilizer".into(),
        dim_a: real_symmetric_dim(3),
        dim_b: real_symmetric_dim(3),
        dim_joint: real_symmetric_dim(9),
    }
}

/// Builds a single-system [`StatsTable`] from density operators, POVM
/// elements and Kraus channels via the Born rule.
#[derive(Debug, Clone)]
pub struct QuantumTableBuilder {
    system: String,
    state_testers: Vec<CMatrix>,
    effect_testers: Vec<CMatrix>,
    table: StatsTable,
}

fn born(effect: &CMatrix, rho: &CMatrix) -> f64 {
    (effect * rho).trace().re.clamp(0.0, 1.0)
}

impl QuantumTableBuilder {
    /// State testers are added to the table as preparations with context
    /// `tester`.
    pub fn new(
        system: impl Into<String>,
        state_testers: Vec<(String, CMatrix)>,
        effect_testers: Vec<(String, CMatrix)>,
    ) -> Result<Self> {
        let system = system.into();
        let tester_refs = state_testers.iter().map(|(id, _)| format!("{id}@tester")).collect();
        let labels = effect_testers.iter().map(|(id, _)| id.clone()).collect();
        let mut b = Self {
            table: StatsTable {
                systems: vec![SystemTesters {
                    system: system.clone(),
                    effects: TesterSet::new(format!("{system}-effects"), labels)?,
                    states: TesterSet::new(format!("{system}-states"), tester_refs)?,
                }],
                procedures: Vec::new(),
                deterministic_effect_ids: Vec::new(),
            },
            system,
            state_testers: state_testers.iter().map(|(_, r)| r.clone()).collect(),
            effect_testers: effect_testers.into_iter().map(|(_, e)| e).collect(),
        };
        for (id, rho) in &state_testers {
            b.preparation(id, "tester", rho, &[]);
        }
        Ok(b)
    }

    pub fn preparation(&mut self, id: &str, context: &str, rho: &CMatrix, parts: &[&str]) -> &mut Self {
        let stats = self.effect_testers.iter().map(|e| born(e, rho)).collect();
        self.push(id, context, Signature::Preparation { output: self.system.clone() }, stats, parts)
    }

    pub fn effect(&mut self, id: &str, context: &str, effect: &CMatrix, parts: &[&str]) -> &mut Self {
        let stats = self.state_testers.iter().map(|r| born(effect, r)).collect();
        self.push(id, context, Signature::Effect { input: self.system.clone() }, stats, parts)
    }

    pub fn transformation(&mut self, id: &str, context: &str, kraus: &[CMatrix], parts: &[&str]) -> &mut Self {
        let mut stats = Vec::with_capacity(self.state_testers.len() * self.effect_testers.len());
        for rho in &self.state_testers {
            let out = apply_kraus(kraus, rho);
            stats.extend(self.effect_testers.iter().map(|e| born(e, &out)));
        }
        let sig = Signature::Transformation {
            input: self.system.clone(),
            output: self.system.clone(),
        };
        self.push(id, context, sig, stats, parts)
    }

    pub fn deterministic(&mut self, reference: &str) -> &mut Self {
        self.table.deterministic_effect_ids.push(reference.to_string());
        self
    }

    fn push(&mut self, id: &str, context: &str, signature: Signature, stats: Vec<f64>, parts: &[&str]) -> &mut Self {
        self.table.procedures.push(Procedure {
            id: id.to_string(),
            context: context.to_string(),
            signature,
            stats,
            parts: parts.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    pub fn build(&self) -> StatsTable {
        self.table.clone()
    }
}

/// Qubit stabilizer table: every stabilizer state prepared in two contexts,
/// the six rank-1 effects, two realizations of the discard, and wired
/// Clifford procedures.
pub fn qubit_stabilizer_stats() -> Result<StatsTable> {
    let states: Vec<(String, CMatrix)> = stabilizer_states(2)?
        .into_iter()
        .map(|(l, psi)| (format!("|{l}>"), projector(&psi)))
        .collect();
    let effects: Vec<(String, CMatrix)> = states
        .iter()
        .map(|(l, p)| (format!("<{}|", &l[1..l.len() - 1]), p.clone()))
        .collect();
    let mut b = QuantumTableBuilder::new("qubit", states.clone(), effects.clone())?;
    for (id, rho) in &states {
        b.preparation(id, "via-clifford", rho, &[]);
    }
    for (id, e) in &effects {
        b.effect(id, "", e, &[]);
    }
    let id2 = CMatrix::identity(2, 2);
    b.effect("discard", "measure-Z", &id2, &[]);
    b.effect("discard", "measure-X", &id2, &[]);
    b.deterministic("discard@measure-Z").deterministic("discard@measure-X");
    let h = hadamard();
    let s = phase_gate(2);
    b.transformation("H", "", std::slice::from_ref(&h), &[]);
    b.transformation("S", "", std::slice::from_ref(&s), &[]);
    b.transformation("SH", "", &[&s * &h], &["H", "S"]);
    let plus = &h * states[0].1.clone() * h.adjoint();
    b.preparation("|+>", "H-after-|0>", &plus, &["|0>", "H"]);
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotient::{check_congruence, quotient};
    use crate::tomo::tomographic_locality_check;

    #[test]
    fn list_has_eight_models() {
        assert_eq!(MODELS.len(), 8);
        for m in MODELS {
            let item = emit(m.name, None, false).unwrap();
            let text = item.to_json().unwrap();
            assert!(text.ends_with('\n'));
        }
        assert!(emit("nope", None, false).is_err());
    }

    #[test]
    fn qutrit_stabilizer_has_twelve_states() {
        let ZooItem::Fragment(f) = emit("qutrit-stabilizer", None, false).unwrap() else { panic!() };
        assert_eq!(f.states.len(), 12);
    }

    #[test]
    fn real_dims_fixture() {
        let t = real_stabilizer_dims();
        assert_eq!((t.dim_a, t.dim_b, t.dim_joint), (6, 6, 45));
        assert!(!tomographic_locality_check(t.dim_a, t.dim_b, t.dim_joint).tomographically_local);
    }

    #[test]
    fn stabilizer_stats_quotient_to_six_states() {
        let t = qubit_stabilizer_stats().unwrap();
        let q = quotient(&t, 1e-9).unwrap();
        assert_eq!(q.classes.count(|s| matches!(s, Signature::Preparation { .. })), 6);
        assert_eq!(q.fragment.states.len(), 6);
        assert_eq!(q.fragment.systems.get("qubit").unwrap().dim, 4);
        assert!(check_congruence(&t, &q, 1e-9).unwrap().pass);
    }

    #[test]
    fn eight_state_frame_is_overcomplete() {
        let sys = quantum_system("qubit", 2).unwrap();
        let e = eight_state_frame(&sys).unwrap();
        assert_eq!(e.n(), 8);
        assert!(!e.exact);
    }
}
