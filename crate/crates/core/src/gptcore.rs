//! Systems, states, effects and transformations of a generalized
//! probabilistic theory, represented as real vectors, covectors and matrices.
//!
//! Transformations are stored in standard form: the matrix that composes by
//! plain matrix product in sequence and by Kronecker product in parallel.
//! Composite systems must be registered explicitly; the tensor index order is
//! row-major, i.e. index `(i, j)` of `A (x) B` is `i * dim_B + j`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{kron, kron_vec, max_abs_vec};
use crate::lp::cone_membership;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub id: String,
    pub dim: usize,
    /// The unique deterministic effect.
    pub unit_effect: DVector<f64>,
    /// Factor ids when this is a registered composite.
    pub factors: Option<(String, String)>,
}

impl SystemSpec {
    pub fn new(id: impl Into<String>, unit_effect: DVector<f64>) -> Result<Self> {
        let id = id.into();
        if unit_effect.is_empty() {
            return Err(Error::Invalid(format!("system `{id}` has dimension 0")));
        }
        if unit_effect.iter().all(|x| *x == 0.0) {
            return Err(Error::Invalid(format!("system `{id}` has a zero unit effect")));
        }
        Ok(Self {
            id,
            dim: unit_effect.len(),
            unit_effect,
            factors: None,
        })
    }

    /// A system whose unit effect is the first coordinate functional.
    pub fn with_leading_unit(id: impl Into<String>, dim: usize) -> Result<Self> {
        let mut u = DVector::zeros(dim);
        if dim > 0 {
            u[0] = 1.0;
        }
        Self::new(id, u)
    }

    /// Classical system of `dim` outcomes: unit effect `(1, .., 1)`.
    pub fn classical(id: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new(id, DVector::from_element(dim, 1.0))
    }

    pub fn is_composite(&self) -> bool {
        self.factors.is_some()
    }
}

/// Registry of systems, including explicitly registered composites.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemRegistry {
    systems: BTreeMap<String, Arc<SystemSpec>>,
    composites: BTreeMap<(String, String), String>,
}

impl SystemRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, spec: SystemSpec) -> Result<Arc<SystemSpec>> {
        if let Some(existing) = self.systems.get(&spec.id) {
            if **existing == spec {
                return Ok(existing.clone());
            }
            return Err(Error::Invalid(format!(
                "system `{}` registered twice with different data",
                spec.id
            )));
        }
        if let Some((a, b)) = &spec.factors {
            let sa = self.get(a)?;
            let sb = self.get(b)?;
            let expected = kron_vec(&sa.unit_effect, &sb.unit_effect);
            if spec.dim != sa.dim * sb.dim || spec.unit_effect != expected {
                return Err(Error::Invalid(format!(
                    "composite `{}` is not the tensor of `{a}` and `{b}`",
                    spec.id
                )));
            }
            self.composites
                .insert((a.clone(), b.clone()), spec.id.clone());
        }
        let arc = Arc::new(spec);
        self.systems.insert(arc.id.clone(), arc.clone());
        Ok(arc)
    }

    /// Registers `id` as the composite of `a` and `b` (in that order).
    pub fn register_composite(&mut self, id: impl Into<String>, a: &str, b: &str) -> Result<Arc<SystemSpec>> {
        let sa = self.get(a)?;
        let sb = self.get(b)?;
        let unit = kron_vec(&sa.unit_effect, &sb.unit_effect);
        let spec = SystemSpec {
            id: id.into(),
            dim: unit.len(),
            unit_effect: unit,
            factors: Some((a.to_string(), b.to_string())),
        };
        self.register(spec)
    }

    pub fn get(&self, id: &str) -> Result<Arc<SystemSpec>> {
        self.systems
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSystem(id.to_string()))
    }

    pub fn composite_of(&self, a: &str, b: &str) -> Result<Arc<SystemSpec>> {
        let id = self
            .composites
            .get(&(a.to_string(), b.to_string()))
            .ok_or_else(|| Error::CompositeNotRegistered(a.to_string(), b.to_string()))?;
        self.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<SystemSpec>> {
        self.systems.values()
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GptState {
    pub label: String,
    pub system: Arc<SystemSpec>,
    pub vec: DVector<f64>,
    pub normalized: bool,
}

impl GptState {
    pub fn new(label: impl Into<String>, system: Arc<SystemSpec>, vec: DVector<f64>) -> Result<Self> {
        check_len("state", system.dim, vec.len())?;
        Ok(Self {
            label: label.into(),
            system,
            vec,
            normalized: true,
        })
    }

    pub fn subnormalized(label: impl Into<String>, system: Arc<SystemSpec>, vec: DVector<f64>) -> Result<Self> {
        let mut s = Self::new(label, system, vec)?;
        s.normalized = false;
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        self.system.unit_effect.dot(&self.vec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GptEffect {
    pub label: String,
    pub system: Arc<SystemSpec>,
    /// Covector, stored as a column for convenience.
    pub covec: DVector<f64>,
}

impl GptEffect {
    pub fn new(label: impl Into<String>, system: Arc<SystemSpec>, covec: DVector<f64>) -> Result<Self> {
        check_len("effect", system.dim, covec.len())?;
        Ok(Self {
            label: label.into(),
            system,
            covec,
        })
    }

    pub fn unit(system: Arc<SystemSpec>) -> Self {
        Self {
            label: format!("u[{}]", system.id),
            covec: system.unit_effect.clone(),
            system,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GptTransformation {
    pub label: String,
    pub in_system: Arc<SystemSpec>,
    pub out_system: Arc<SystemSpec>,
    /// `dim_out x dim_in`, standard form.
    pub mat: DMatrix<f64>,
    pub channel: bool,
}

impl GptTransformation {
    pub fn new(
        label: impl Into<String>,
        in_system: Arc<SystemSpec>,
        out_system: Arc<SystemSpec>,
        mat: DMatrix<f64>,
        channel: bool,
    ) -> Result<Self> {
        check_len("transformation rows", out_system.dim, mat.nrows())?;
        check_len("transformation columns", in_system.dim, mat.ncols())?;
        Ok(Self {
            label: label.into(),
            in_system,
            out_system,
            mat,
            channel,
        })
    }

    pub fn identity(system: Arc<SystemSpec>) -> Self {
        let d = system.dim;
        Self {
            label: format!("id[{}]", system.id),
            in_system: system.clone(),
            out_system: system,
            mat: DMatrix::identity(d, d),
            channel: true,
        }
    }

    /// `max |u_out . mat - u_in|`.
    pub fn channel_residual(&self) -> f64 {
        let row = self.mat.transpose() * &self.out_system.unit_effect;
        max_abs_vec(&(row - &self.in_system.unit_effect))
    }
}

fn check_len(context: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            context: context.to_string(),
            expected,
            got,
        });
    }
    Ok(())
}

fn same_system(a: &SystemSpec, b: &SystemSpec, what: &str) -> Result<()> {
    if a.id != b.id || a.dim != b.dim {
        return Err(Error::SystemMismatch(format!(
            "{what}: `{}` (dim {}) vs `{}` (dim {})",
            a.id, a.dim, b.id, b.dim
        )));
    }
    Ok(())
}

/// Probability `effect . transform . state`.
pub fn evaluate(effect: &GptEffect, transform: &GptTransformation, state: &GptState) -> Result<f64> {
    check_len("evaluate: state", transform.mat.ncols(), state.vec.len())?;
    check_len("evaluate: effect", transform.mat.nrows(), effect.covec.len())?;
    same_system(&transform.in_system, &state.system, "evaluate input")?;
    same_system(&transform.out_system, &effect.system, "evaluate output")?;
    Ok(effect.covec.dot(&(&transform.mat * &state.vec)))
}

/// `t2 after t1`.
pub fn compose_seq(t2: &GptTransformation, t1: &GptTransformation) -> Result<GptTransformation> {
    same_system(&t1.out_system, &t2.in_system, "sequential composition")?;
    Ok(GptTransformation {
        label: format!("{}*{}", t2.label, t1.label),
        in_system: t1.in_system.clone(),
        out_system: t2.out_system.clone(),
        mat: &t2.mat * &t1.mat,
        channel: t1.channel && t2.channel,
    })
}

/// `t1 (x) t2` on registered composites.
pub fn compose_par(
    registry: &SystemRegistry,
    t1: &GptTransformation,
    t2: &GptTransformation,
) -> Result<GptTransformation> {
    let input = registry.composite_of(&t1.in_system.id, &t2.in_system.id)?;
    let output = registry.composite_of(&t1.out_system.id, &t2.out_system.id)?;
    Ok(GptTransformation {
        label: format!("{}(x){}", t1.label, t2.label),
        in_system: input,
        out_system: output,
        mat: kron(&t1.mat, &t2.mat),
        channel: t1.channel && t2.channel,
    })
}

pub fn state_product(registry: &SystemRegistry, a: &GptState, b: &GptState) -> Result<GptState> {
    let sys = registry.composite_of(&a.system.id, &b.system.id)?;
    Ok(GptState {
        label: format!("{}(x){}", a.label, b.label),
        system: sys,
        vec: kron_vec(&a.vec, &b.vec),
        normalized: a.normalized && b.normalized,
    })
}

pub fn effect_product(registry: &SystemRegistry, a: &GptEffect, b: &GptEffect) -> Result<GptEffect> {
    let sys = registry.composite_of(&a.system.id, &b.system.id)?;
    Ok(GptEffect {
        label: format!("{}(x){}", a.label, b.label),
        system: sys,
        covec: kron_vec(&a.covec, &b.covec),
    })
}

/// A finite fragment of a GPT, optionally with polyhedral cone generators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GptFragment {
    pub systems: SystemRegistry,
    pub states: Vec<GptState>,
    pub effects: Vec<GptEffect>,
    pub transformations: Vec<GptTransformation>,
    pub state_cone_rays: BTreeMap<String, Vec<DVector<f64>>>,
    pub effect_cone_rays: BTreeMap<String, Vec<DVector<f64>>>,
}

impl GptFragment {
    pub fn new(systems: SystemRegistry) -> Self {
        Self {
            systems,
            ..Default::default()
        }
    }

    pub fn states_of<'a>(&'a self, system: &'a str) -> impl Iterator<Item = &'a GptState> + 'a {
        self.states.iter().filter(move |s| s.system.id == system)
    }

    pub fn effects_of<'a>(&'a self, system: &'a str) -> impl Iterator<Item = &'a GptEffect> + 'a {
        self.effects.iter().filter(move |e| e.system.id == system)
    }

    /// Uses the listed states and effects of each system as cone generators.
    pub fn with_cones_from_members(mut self) -> Self {
        for sys in self.systems.iter() {
            let s: Vec<_> = self.states_of(&sys.id).map(|s| s.vec.clone()).collect();
            let e: Vec<_> = self.effects_of(&sys.id).map(|e| e.covec.clone()).collect();
            if !s.is_empty() {
                self.state_cone_rays.insert(sys.id.clone(), s);
            }
            if !e.is_empty() {
                self.effect_cone_rays.insert(sys.id.clone(), e);
            }
        }
        self
    }

    /// Drops transformations, leaving a prepare-measure fragment.
    pub fn prepare_measure(mut self) -> Self {
        self.transformations.clear();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    System,
    Dimension,
    Normalization,
    Probability,
    Channel,
    ConeMembership,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
    pub magnitude: f64,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {}: {} (|{:.3e}|)", self.kind, self.subject, self.message, self.magnitude)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every structural invariant of a fragment and lists violations.
pub fn validate_fragment(f: &GptFragment, tol: f64) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |kind, subject: &str, magnitude: f64, message: String| {
        out.push(Violation {
            kind,
            subject: subject.to_string(),
            magnitude,
            message,
        })
    };

    for sys in f.systems.iter() {
        if sys.dim == 0 || sys.unit_effect.len() != sys.dim {
            push(ViolationKind::System, &sys.id, 0.0, "dimension/unit mismatch".into());
        }
        if sys.unit_effect.iter().all(|x| *x == 0.0) {
            push(ViolationKind::System, &sys.id, 0.0, "zero unit effect".into());
        }
    }

    for s in &f.states {
        if s.vec.len() != s.system.dim {
            push(ViolationKind::Dimension, &s.label, 0.0, "state length".into());
            continue;
        }
        let n = s.norm();
        if s.normalized && (n - 1.0).abs() > tol {
            push(
                ViolationKind::Normalization,
                &s.label,
                n - 1.0,
                format!("u.s={n}"),
            );
        } else if !s.normalized && (n < -tol || n > 1.0 + tol) {
            push(
                ViolationKind::Normalization,
                &s.label,
                n,
                format!("u.s={n} outside [0,1]"),
            );
        }
    }

    for e in &f.effects {
        if e.covec.len() != e.system.dim {
            push(ViolationKind::Dimension, &e.label, 0.0, "effect length".into());
            continue;
        }
        for s in f.states_of(&e.system.id) {
            if s.vec.len() != e.covec.len() {
                continue;
            }
            let p = e.covec.dot(&s.vec);
            if p > 1.0 + tol {
                push(
                    ViolationKind::Probability,
                    &format!("{} on {}", e.label, s.label),
                    p - 1.0,
                    format!("evaluate={}>1", fmt_short(p)),
                );
            } else if p < -tol {
                push(
                    ViolationKind::Probability,
                    &format!("{} on {}", e.label, s.label),
                    p,
                    format!("evaluate={}<0", fmt_short(p)),
                );
            }
        }
    }

    for t in &f.transformations {
        if t.mat.shape() != (t.out_system.dim, t.in_system.dim) {
            push(ViolationKind::Dimension, &t.label, 0.0, "matrix shape".into());
            continue;
        }
        if t.channel {
            let r = t.channel_residual();
            if r > tol {
                push(ViolationKind::Channel, &t.label, r, "u_out.T != u_in".into());
            }
        }
    }

    for (sys, rays) in &f.state_cone_rays {
        for s in f.states_of(sys) {
            match cone_membership(rays, &s.vec, tol) {
                Ok(true) => {}
                Ok(false) => push(
                    ViolationKind::ConeMembership,
                    &s.label,
                    0.0,
                    format!("state outside cone of `{sys}`"),
                ),
                Err(e) => push(ViolationKind::ConeMembership, &s.label, 0.0, e.to_string()),
            }
        }
    }
    for (sys, rays) in &f.effect_cone_rays {
        for e in f.effects_of(sys) {
            match cone_membership(rays, &e.covec, tol) {
                Ok(true) => {}
                Ok(false) => push(
                    ViolationKind::ConeMembership,
                    &e.label,
                    0.0,
                    format!("effect outside cone of `{sys}`"),
                ),
                Err(err) => push(ViolationKind::ConeMembership, &e.label, 0.0, err.to_string()),
            }
        }
    }

    ValidationReport { violations: out }
}

fn fmt_short(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    format!("{r}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit() -> (SystemRegistry, Arc<SystemSpec>) {
        let mut reg = SystemRegistry::new();
        let b = reg.register(SystemSpec::classical("bit", 2).unwrap()).unwrap();
        (reg, b)
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    #[test]
    fn classical_bit_evaluate() {
        let (_, b) = bit();
        let e = GptEffect::new("e0", b.clone(), v(&[1.0, 0.0])).unwrap();
        let id = GptTransformation::identity(b.clone());
        let s0 = GptState::new("s0", b.clone(), v(&[1.0, 0.0])).unwrap();
        let s1 = GptState::new("s1", b.clone(), v(&[0.0, 1.0])).unwrap();
        assert_eq!(evaluate(&e, &id, &s0).unwrap(), 1.0);
        assert_eq!(evaluate(&e, &id, &s1).unwrap(), 0.0);
    }

    #[test]
    fn qubit_pauli_coordinates_born_rule() {
        let q = Arc::new(SystemSpec::with_leading_unit("q", 4).unwrap());
        let e_plus = GptEffect::new("E+", q.clone(), v(&[0.5, 0.5, 0.0, 0.0])).unwrap();
        let s_i = GptState::new("i", q.clone(), v(&[1.0, 0.0, 1.0, 0.0])).unwrap();
        let p = evaluate(&e_plus, &GptTransformation::identity(q), &s_i).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let (_, b) = bit();
        let q = Arc::new(SystemSpec::with_leading_unit("q", 4).unwrap());
        let e = GptEffect::new("e", q, v(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        let s = GptState::new("s", b.clone(), v(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            evaluate(&e, &GptTransformation::identity(b), &s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn not_not_is_identity() {
        let (_, b) = bit();
        let not = GptTransformation::new(
            "NOT",
            b.clone(),
            b.clone(),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            true,
        )
        .unwrap();
        let nn = compose_seq(&not, &not).unwrap();
        assert_eq!(nn.mat, DMatrix::identity(2, 2));
        assert!(nn.channel);
        let id = GptTransformation::identity(b);
        assert_eq!(compose_seq(&id, &id).unwrap().mat, DMatrix::identity(2, 2));
    }

    #[test]
    fn x_rotation_by_pi_twice() {
        let q = Arc::new(SystemSpec::with_leading_unit("q", 4).unwrap());
        let rx = GptTransformation::new(
            "Rx(pi)",
            q.clone(),
            q.clone(),
            DMatrix::from_diagonal(&v(&[1.0, 1.0, -1.0, -1.0])),
            true,
        )
        .unwrap();
        assert_eq!(compose_seq(&rx, &rx).unwrap().mat, DMatrix::identity(4, 4));
    }

    #[test]
    fn sequential_mismatch() {
        let (_, b) = bit();
        let q = Arc::new(SystemSpec::with_leading_unit("q", 4).unwrap());
        let r = compose_seq(&GptTransformation::identity(q), &GptTransformation::identity(b));
        assert!(matches!(r, Err(Error::SystemMismatch(_))));
    }

    #[test]
    fn parallel_composition_of_bits() {
        let (mut reg, b) = bit();
        let err = compose_par(
            &reg,
            &GptTransformation::identity(b.clone()),
            &GptTransformation::identity(b.clone()),
        );
        assert!(matches!(err, Err(Error::CompositeNotRegistered(..))));
        reg.register_composite("bit2", "bit", "bit").unwrap();
        let id = GptTransformation::identity(b.clone());
        let idid = compose_par(&reg, &id, &id).unwrap();
        assert_eq!(idid.mat, DMatrix::identity(4, 4));
        assert_eq!(idid.in_system.unit_effect, v(&[1.0; 4]));

        let not = GptTransformation::new(
            "NOT",
            b.clone(),
            b,
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            true,
        )
        .unwrap();
        let nid = compose_par(&reg, &not, &id).unwrap();
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(nid.mat, expect);
    }

    #[test]
    fn qubit_identity_tensor() {
        let mut reg = SystemRegistry::new();
        let q = reg.register(SystemSpec::with_leading_unit("q", 4).unwrap()).unwrap();
        reg.register_composite("qq", "q", "q").unwrap();
        let id = GptTransformation::identity(q);
        assert_eq!(compose_par(&reg, &id, &id).unwrap().mat, DMatrix::identity(16, 16));
    }

    #[test]
    fn validate_classical_and_violation() {
        let (reg, b) = bit();
        let mut f = GptFragment::new(reg);
        f.states.push(GptState::new("s0", b.clone(), v(&[1.0, 0.0])).unwrap());
        f.states.push(GptState::new("s1", b.clone(), v(&[0.0, 1.0])).unwrap());
        f.effects.push(GptEffect::new("e0", b.clone(), v(&[1.0, 0.0])).unwrap());
        f.effects.push(GptEffect::new("e1", b.clone(), v(&[0.0, 1.0])).unwrap());
        let f = f.with_cones_from_members();
        assert!(validate_fragment(&f, DEFAULT_TOL).is_valid());

        let mut g = f.clone();
        g.effects.push(GptEffect::new("bad", b, v(&[2.0, 0.0])).unwrap());
        let rep = validate_fragment(&g, DEFAULT_TOL);
        assert!(rep
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::Probability && v.message == "evaluate=2>1"));
    }

    #[test]
    fn channel_flag_checked() {
        let (reg, b) = bit();
        let mut f = GptFragment::new(reg);
        f.transformations.push(
            GptTransformation::new("leaky", b.clone(), b, DMatrix::from_diagonal(&v(&[1.0, 0.5])), true).unwrap(),
        );
        let rep = validate_fragment(&f, DEFAULT_TOL);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].kind, ViolationKind::Channel);
    }
}
