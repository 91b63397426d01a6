//! Frame / dual-frame representations.
//!
//! A frame model fixes, per system, an `n x dim` matrix `chi` whose rows are
//! the dual-frame covectors `D_l`. The frame vectors `F_l` are the columns of
//! `chi^{-1}` and are always derived, never stored independently, so
//! `D_l'(F_l) = delta` holds by construction. A process `T` is represented by
//! the quasistochastic matrix `chi_out T chi_in^{-1}`; the model is an
//! ontological model exactly when every such matrix is entrywise
//! nonnegative.
//!
//! Overcomplete (`n > dim`) fragment-level models such as the 8-state model
//! are allowed behind an explicit flag; `chi^{-1}` is then the
//! Moore-Penrose left inverse and exactness-dependent checks are marked N/A.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gptcore::{GptFragment, GptTransformation, SystemRegistry, SystemSpec};
use crate::linalg::{inverse_with_condition, kron, max_abs_vec, max_diff, rank};

#[derive(Debug, Clone, PartialEq)]
pub struct OnticSpace {
    pub system: String,
    pub labels: Vec<String>,
}

impl OnticSpace {
    pub fn new(system: impl Into<String>, labels: Vec<String>) -> Result<Self> {
        let system = system.into();
        if labels.is_empty() {
            return Err(Error::Invalid(format!("empty ontic space for `{system}`")));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::Invalid(format!("duplicate ontic label `{l}`")));
            }
        }
        Ok(Self { system, labels })
    }

    pub fn numbered(system: impl Into<String>, n: usize) -> Result<Self> {
        Self::new(system, (0..n).map(|i| format!("l{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameEntry {
    pub ontic: OnticSpace,
    /// Rows are the dual-frame covectors `D_l`.
    pub chi: DMatrix<f64>,
    /// Columns are the frame vectors `F_l`.
    pub chi_inv: DMatrix<f64>,
    /// `n == dim`.
    pub exact: bool,
}

impl FrameEntry {
    pub fn n(&self) -> usize {
        self.chi.nrows()
    }

    pub fn dim(&self) -> usize {
        self.chi.ncols()
    }

    pub fn dual_vector(&self, l: usize) -> DVector<f64> {
        self.chi.row(l).transpose()
    }

    pub fn frame_vector(&self, l: usize) -> DVector<f64> {
        self.chi_inv.column(l).into_owned()
    }
}

/// Residuals of the frame invariants; `None` marks a check that does not
/// apply (overcomplete frames).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCheck {
    pub biorthogonality: Option<f64>,
    pub normalization: f64,
    pub frame_unit: Option<f64>,
    pub reconstruction: f64,
    pub cond: Option<f64>,
}

impl FrameCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.biorthogonality.is_none_or(|r| r <= tol)
            && self.normalization <= tol
            && self.frame_unit.is_none_or(|r| r <= tol)
            && self.reconstruction <= tol
    }
}

/// Builds and checks one system's frame from its `chi`.
///
/// `chi` must be square unless `overcomplete` is set.
pub fn build_frame(
    system: &SystemSpec,
    labels: Vec<String>,
    chi: DMatrix<f64>,
    tol: f64,
    overcomplete: bool,
) -> Result<(FrameEntry, FrameCheck)> {
    if chi.ncols() != system.dim {
        return Err(Error::DimensionMismatch {
            context: format!("chi columns for `{}`", system.id),
            expected: system.dim,
            got: chi.ncols(),
        });
    }
    let n = chi.nrows();
    let ontic = OnticSpace::new(system.id.clone(), labels)?;
    if ontic.len() != n {
        return Err(Error::DimensionMismatch {
            context: "ontic labels".into(),
            expected: n,
            got: ontic.len(),
        });
    }
    if n != system.dim && !overcomplete {
        return Err(Error::Invalid(format!(
            "frame for `{}` has {n} ontic states but dimension {}; fragment-level models must opt in",
            system.id, system.dim
        )));
    }

    let (chi_inv, cond) = if n == system.dim {
        let (inv, cond) = inverse_with_condition(&chi)?;
        (inv, Some(cond))
    } else {
        let r = rank(&chi, 1e-12);
        if r < system.dim {
            return Err(Error::Singular { rank: r, dim: system.dim });
        }
        let pinv = chi
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Invalid(e.to_string()))?;
        (pinv, None)
    };

    let col_sums = chi.row_sum().transpose();
    let normalization = max_abs_vec(&(col_sums - &system.unit_effect));
    if normalization > tol {
        return Err(Error::Normalization {
            residual: normalization,
        });
    }

    let exact = n == system.dim;
    let reconstruction = max_diff(&(&chi_inv * &chi), &DMatrix::identity(system.dim, system.dim));
    let biorthogonality = exact.then(|| max_diff(&(&chi * &chi_inv), &DMatrix::identity(n, n)));
    let frame_unit = exact.then(|| {
        let u_f = chi_inv.transpose() * &system.unit_effect;
        u_f.iter().fold(0.0_f64, |acc, x| acc.max((x - 1.0).abs()))
    });
    let check = FrameCheck {
        biorthogonality,
        normalization,
        frame_unit,
        reconstruction,
        cond,
    };
    Ok((
        FrameEntry {
            ontic,
            chi,
            chi_inv,
            exact,
        },
        check,
    ))
}

/// Frames for several systems, with composites as tensor products.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameModel {
    pub entries: BTreeMap<String, FrameEntry>,
    /// composite id -> factor ids
    pub composite_registry: BTreeMap<String, (String, String)>,
}

impl FrameModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(entry: FrameEntry) -> Self {
        let mut m = Self::new();
        m.insert(entry);
        m
    }

    pub fn insert(&mut self, entry: FrameEntry) {
        self.entries.insert(entry.ontic.system.clone(), entry);
    }

    /// Adds the product frame on a registered composite system.
    pub fn insert_product(&mut self, registry: &SystemRegistry, composite: &str) -> Result<()> {
        let sys = registry.get(composite)?;
        let (a, b) = sys
            .factors
            .clone()
            .ok_or_else(|| Error::Invalid(format!("`{composite}` is not a composite system")))?;
        let ea = self.entry(&a)?;
        let eb = self.entry(&b)?;
        let labels = ea
            .ontic
            .labels
            .iter()
            .flat_map(|x| eb.ontic.labels.iter().map(move |y| format!("{x}|{y}")))
            .collect();
        let entry = FrameEntry {
            ontic: OnticSpace::new(composite, labels)?,
            chi: kron(&ea.chi, &eb.chi),
            chi_inv: kron(&ea.chi_inv, &eb.chi_inv),
            exact: ea.exact && eb.exact,
        };
        self.entries.insert(composite.to_string(), entry);
        self.composite_registry.insert(composite.to_string(), (a, b));
        Ok(())
    }

    pub fn entry(&self, system: &str) -> Result<&FrameEntry> {
        self.entries
            .get(system)
            .ok_or_else(|| Error::UnknownSystem(system.to_string()))
    }

    /// Ontic separability: every registered composite's `chi` is exactly
    /// the Kronecker product of its factors'.
    pub fn composites_are_products(&self) -> bool {
        self.composite_registry.iter().all(|(c, (a, b))| {
            match (self.entries.get(c), self.entries.get(a), self.entries.get(b)) {
                (Some(ec), Some(ea), Some(eb)) => ec.chi == kron(&ea.chi, &eb.chi),
                _ => false,
            }
        })
    }
}

/// `chi_out T chi_in^{-1}`.
pub fn represent(model: &FrameModel, t: &GptTransformation) -> Result<DMatrix<f64>> {
    let ein = model.entry(&t.in_system.id)?;
    let eout = model.entry(&t.out_system.id)?;
    Ok(&eout.chi * &t.mat * &ein.chi_inv)
}

/// Quasidistribution `chi s` over the ontic states.
pub fn represent_state(model: &FrameModel, system: &str, vec: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(&model.entry(system)?.chi * vec)
}

/// Response function `l -> e(F_l)`.
pub fn represent_effect(model: &FrameModel, system: &str, covec: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(model.entry(system)?.chi_inv.transpose() * covec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProcessKind {
    State,
    Effect,
    Transformation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentedProcess {
    pub label: String,
    pub kind: ProcessKind,
    /// `n_out x n_in`; states are columns, effects are rows.
    pub matrix: DMatrix<f64>,
    pub min_entry: f64,
    /// Largest deviation of a column sum from its required value, where one
    /// is required (states and channels).
    pub normalization_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiModelReport {
    pub processes: Vec<RepresentedProcess>,
    pub min_entry: f64,
    pub quasistochastic: bool,
    pub positive: bool,
    /// Label of the process holding the most negative entry.
    pub witness: Option<String>,
    pub tol: f64,
}

/// Represents every process of `fragment` and decides positivity.
pub fn positivity_report(model: &FrameModel, fragment: &GptFragment, tol: f64) -> Result<QuasiModelReport> {
    let mut processes = Vec::new();
    for s in &fragment.states {
        let q = represent_state(model, &s.system.id, &s.vec)?;
        let target = s.system.unit_effect.dot(&s.vec);
        let sum: f64 = q.iter().sum();
        let m = DMatrix::from_column_slice(q.len(), 1, q.as_slice());
        processes.push(RepresentedProcess {
            label: s.label.clone(),
            kind: ProcessKind::State,
            min_entry: m.min(),
            matrix: m,
            normalization_residual: Some((sum - target).abs()),
        });
    }
    for e in &fragment.effects {
        let r = represent_effect(model, &e.system.id, &e.covec)?;
        let m = DMatrix::from_row_slice(1, r.len(), r.as_slice());
        processes.push(RepresentedProcess {
            label: e.label.clone(),
            kind: ProcessKind::Effect,
            min_entry: m.min(),
            matrix: m,
            normalization_residual: None,
        });
    }
    for t in &fragment.transformations {
        let m = represent(model, t)?;
        let residual = t.channel.then(|| {
            m.column_iter()
                .map(|c| (c.sum() - 1.0).abs())
                .fold(0.0_f64, f64::max)
        });
        processes.push(RepresentedProcess {
            label: t.label.clone(),
            kind: ProcessKind::Transformation,
            min_entry: if m.is_empty() { 0.0 } else { m.min() },
            matrix: m,
            normalization_residual: residual,
        });
    }
    Ok(summarize(processes, tol))
}

fn summarize(processes: Vec<RepresentedProcess>, tol: f64) -> QuasiModelReport {
    let mut min_entry = f64::INFINITY;
    let mut witness = None;
    for p in &processes {
        if p.min_entry < min_entry {
            min_entry = p.min_entry;
            witness = Some(p.label.clone());
        }
    }
    if processes.is_empty() {
        min_entry = 0.0;
    }
    let quasistochastic = processes
        .iter()
        .all(|p| p.normalization_residual.is_none_or(|r| r <= tol));
    let positive = min_entry >= -tol;
    QuasiModelReport {
        processes,
        min_entry,
        quasistochastic,
        positive,
        witness: if positive { None } else { witness },
        tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureVerdict {
    pub pass: bool,
    pub adequacy_residual: f64,
    /// Worst (effect, state) pair for empirical adequacy.
    pub adequacy_location: Option<(String, String)>,
    /// `max |rep_effects - rep_states^{-1}|`; `None` when not square.
    pub inverse_residual: Option<f64>,
    pub inverse_location: Option<(usize, usize)>,
}

/// Checks that a pair of linear representation maps is empirically
/// adequate on `system` and that the effect map is the inverse of the state
/// map.
///
/// `rep_states` is `n x dim` (acting `s -> R_S s`), `rep_effects` is
/// `dim x n` (acting `e -> e R_E`).
pub fn verify_structure(
    rep_states: &DMatrix<f64>,
    rep_effects: &DMatrix<f64>,
    fragment: &GptFragment,
    system: &str,
    tol: f64,
) -> Result<StructureVerdict> {
    let sys = fragment.systems.get(system)?;
    if rep_states.ncols() != sys.dim || rep_effects.nrows() != sys.dim || rep_states.nrows() != rep_effects.ncols() {
        return Err(Error::DimensionMismatch {
            context: "representation maps".into(),
            expected: sys.dim,
            got: rep_states.ncols(),
        });
    }
    let mut adequacy_residual = 0.0_f64;
    let mut adequacy_location = None;
    for e in fragment.effects_of(system) {
        let re = rep_effects.transpose() * &e.covec;
        for s in fragment.states_of(system) {
            let rs = rep_states * &s.vec;
            let r = (re.dot(&rs) - e.covec.dot(&s.vec)).abs();
            if r > adequacy_residual {
                adequacy_residual = r;
                adequacy_location = Some((e.label.clone(), s.label.clone()));
            }
        }
    }

    let states: Vec<DVector<f64>> = fragment.states_of(system).map(|s| s.vec.clone()).collect();
    let spans_full = !states.is_empty() && rank(&DMatrix::from_columns(&states), 1e-10) == sys.dim;
    let (inverse_residual, inverse_location) = if rep_states.is_square() {
        match inverse_with_condition(rep_states) {
            Ok((inv, _)) => {
                let mut worst = 0.0_f64;
                let mut loc = None;
                for i in 0..inv.nrows() {
                    for j in 0..inv.ncols() {
                        let r = (inv[(i, j)] - rep_effects[(i, j)]).abs();
                        if r > worst {
                            worst = r;
                            loc = Some((i, j));
                        }
                    }
                }
                (Some(worst), loc)
            }
            Err(e) if spans_full => return Err(e),
            Err(_) => (None, None),
        }
    } else if spans_full {
        return Err(Error::Invalid(format!(
            "state representation is {}x{} but the fragment spans the full space",
            rep_states.nrows(),
            rep_states.ncols()
        )));
    } else {
        (None, None)
    };

    let pass = adequacy_residual <= tol && inverse_residual.is_none_or(|r| r <= tol);
    Ok(StructureVerdict {
        pass,
        adequacy_residual,
        adequacy_location,
        inverse_residual,
        inverse_location,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactnessVerdict {
    pub n_ontic: usize,
    pub dim: usize,
    /// Ontological excess baggage factor `n / dim`.
    pub gamma: f64,
    pub full_rank: bool,
    pub pass: bool,
}

pub fn exactness_check(model: &FrameModel, system: &str) -> Result<ExactnessVerdict> {
    let e = model.entry(system)?;
    let full_rank = rank(&e.chi, 1e-12) == e.dim();
    Ok(ExactnessVerdict {
        n_ontic: e.n(),
        dim: e.dim(),
        gamma: e.n() as f64 / e.dim() as f64,
        full_rank,
        pass: e.n() == e.dim() && full_rank,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OntologicalModel {
    /// Same matrices as the report, now read as (sub)stochastic maps.
    pub processes: Vec<(String, ProcessKind, DMatrix<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OntologicalOutcome {
    Model(OntologicalModel),
    Refused { min_entry: f64, process: String },
}

/// A positive quasiprobabilistic model is an ontological model; anything
/// else is refused with its most negative entry.
pub fn quasi_to_ontological(report: &QuasiModelReport) -> OntologicalOutcome {
    if !report.positive {
        return OntologicalOutcome::Refused {
            min_entry: report.min_entry,
            process: report.witness.clone().unwrap_or_default(),
        };
    }
    let tol = report.tol;
    OntologicalOutcome::Model(OntologicalModel {
        processes: report
            .processes
            .iter()
            .map(|p| {
                // clamp round-off within tolerance
                let m = p.matrix.map(|x| if x < 0.0 && x >= -tol { 0.0 } else { x });
                (p.label.clone(), p.kind, m)
            })
            .collect(),
    })
}

/// Samples a square `chi` with rows summing to `unit`.
///
/// `chi = I + G` with `G` uniform in `[-1, 1]`; rows are rescaled so their
/// unit-direction component is `1/n`, then one affine correction makes the
/// rows sum to `unit` exactly. Singular or badly scaled draws are retried.
pub fn sample_frame<R: Rng + ?Sized>(rng: &mut R, unit: &DVector<f64>) -> DMatrix<f64> {
    let d = unit.len();
    let u_norm2 = unit.norm_squared();
    loop {
        let mut chi = DMatrix::<f64>::identity(d, d);
        for x in chi.iter_mut() {
            *x += rng.random_range(-1.0..=1.0);
        }
        let mut ok = true;
        for mut row in chi.row_iter_mut() {
            let along = row.transpose().dot(unit) / u_norm2;
            if along.abs() < 0.05 {
                ok = false;
                break;
            }
            row /= along * d as f64;
        }
        if !ok {
            continue;
        }
        let gap = (unit - chi.row_sum().transpose()) / d as f64;
        for mut row in chi.row_iter_mut() {
            row += gap.transpose();
        }
        if inverse_with_condition(&chi).is_ok() {
            return chi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gptcore::{GptEffect, GptState, SystemRegistry};
    use rand::SeedableRng;
    use std::sync::Arc;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    pub(crate) fn toy_bit_chi() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            4,
            4,
            &[
                0.25, 0.25, 0.25, 0.25, //
                0.25, -0.25, -0.25, 0.25, //
                0.25, 0.25, -0.25, -0.25, //
                0.25, -0.25, 0.25, -0.25,
            ],
        )
    }

    fn qubit() -> SystemSpec {
        SystemSpec::with_leading_unit("q", 4).unwrap()
    }

    #[test]
    fn classical_identity_frame() {
        let b = SystemSpec::classical("bit", 2).unwrap();
        let (e, c) = build_frame(&b, vec!["0".into(), "1".into()], DMatrix::identity(2, 2), 1e-9, false).unwrap();
        assert!(c.passes(1e-12));
        assert_eq!(e.chi_inv, DMatrix::identity(2, 2));
    }

    #[test]
    fn toy_bit_frame_inverse() {
        let q = qubit();
        let labels = (0..4).map(|i| format!("l{i}")).collect();
        let (e, c) = build_frame(&q, labels, toy_bit_chi(), 1e-12, false).unwrap();
        assert!(c.passes(1e-12));
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 1.0, 1.0, 1.0, //
                1.0, -1.0, 1.0, -1.0, //
                1.0, -1.0, -1.0, 1.0, //
                1.0, 1.0, -1.0, -1.0,
            ],
        );
        assert!(max_diff(&e.chi_inv, &expect) < 1e-12);
    }

    #[test]
    fn duplicated_row_is_singular() {
        let q = qubit();
        let mut chi = toy_bit_chi();
        let r0 = chi.row(0).into_owned();
        chi.set_row(1, &r0);
        let labels = (0..4).map(|i| format!("l{i}")).collect();
        let err = build_frame(&q, labels, chi, 1e-9, false).unwrap_err();
        assert!(err.to_string().starts_with("singular"), "{err}");
    }

    #[test]
    fn normalization_failure() {
        let q = qubit();
        let labels = (0..4).map(|i| format!("l{i}")).collect();
        let err = build_frame(&q, labels, toy_bit_chi() * 2.0, 1e-9, false).unwrap_err();
        assert!(matches!(err, Error::Normalization { .. }));
    }

    #[test]
    fn overcomplete_requires_flag() {
        let q = qubit();
        let mut rows = Vec::new();
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    rows.extend_from_slice(&[0.125, 0.125 * sx, 0.125 * sy, 0.125 * sz]);
                }
            }
        }
        let chi = DMatrix::from_row_slice(8, 4, &rows);
        let labels: Vec<String> = (0..8).map(|i| format!("l{i}")).collect();
        assert!(build_frame(&q, labels.clone(), chi.clone(), 1e-9, false).is_err());
        let (e, c) = build_frame(&q, labels, chi, 1e-9, true).unwrap();
        assert!(c.biorthogonality.is_none());
        assert!(c.passes(1e-12));
        let m = FrameModel::single(e);
        let ex = exactness_check(&m, "q").unwrap();
        assert_eq!(ex.gamma, 2.0);
        assert!(!ex.pass);
    }

    #[test]
    fn represent_identity_and_states() {
        let q = Arc::new(qubit());
        let labels = (0..4).map(|i| format!("l{i}")).collect();
        let (e, _) = build_frame(&q, labels, toy_bit_chi(), 1e-12, false).unwrap();
        let model = FrameModel::single(e);
        let id = represent(&model, &GptTransformation::identity(q.clone())).unwrap();
        assert!(max_diff(&id, &DMatrix::identity(4, 4)) < 1e-12);

        let zero = represent_state(&model, "q", &v(&[1.0, 0.0, 0.0, 1.0])).unwrap();
        let mut sorted: Vec<f64> = zero.iter().cloned().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sorted, vec![0.0, 0.0, 0.5, 0.5]);

        let r = 1.0 / 3f64.sqrt();
        let magic = represent_state(&model, "q", &v(&[1.0, -r, -r, -r])).unwrap();
        assert!(magic.min() < 0.0);
        assert!((magic.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unregistered_system() {
        let model = FrameModel::new();
        let q = Arc::new(qubit());
        assert!(matches!(
            represent(&model, &GptTransformation::identity(q)),
            Err(Error::UnknownSystem(_))
        ));
    }

    #[test]
    fn structure_verification() {
        let mut reg = SystemRegistry::new();
        let q = reg.register(qubit()).unwrap();
        let mut f = GptFragment::new(reg);
        for (i, r) in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]]
            .iter()
            .enumerate()
        {
            f.states.push(GptState::new(format!("s{i}"), q.clone(), v(&[1.0, r[0], r[1], r[2]])).unwrap());
            f.effects
                .push(GptEffect::new(format!("e{i}"), q.clone(), v(&[0.5, 0.5 * r[0], 0.5 * r[1], 0.5 * r[2]])).unwrap());
        }
        let chi = toy_bit_chi();
        let inv = chi.clone().try_inverse().unwrap();
        let ok = verify_structure(&chi, &inv, &f, "q", 1e-9).unwrap();
        assert!(ok.pass);
        assert!(ok.adequacy_residual < 1e-12);

        let mut bad = inv.clone();
        bad[(2, 1)] += 1e-3;
        let v = verify_structure(&chi, &bad, &f, "q", 1e-9).unwrap();
        assert!(!v.pass);
        assert_eq!(v.inverse_location, Some((2, 1)));
        assert!((v.inverse_residual.unwrap() - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn refusal_names_witness() {
        let report = QuasiModelReport {
            processes: vec![RepresentedProcess {
                label: "T".into(),
                kind: ProcessKind::Transformation,
                matrix: DMatrix::from_row_slice(2, 2, &[1.08, -0.08, -0.08, 1.08]),
                min_entry: -0.08,
                normalization_residual: Some(0.0),
            }],
            min_entry: -0.08,
            quasistochastic: true,
            positive: false,
            witness: Some("T".into()),
            tol: 1e-9,
        };
        match quasi_to_ontological(&report) {
            OntologicalOutcome::Refused { min_entry, process } => {
                assert_eq!(min_entry, -0.08);
                assert_eq!(process, "T");
            }
            other => panic!("{other:?}"),
        }
        let empty = summarize(Vec::new(), 1e-9);
        assert!(matches!(quasi_to_ontological(&empty), OntologicalOutcome::Model(m) if m.processes.is_empty()));
    }

    #[test]
    fn sampled_frames_are_normalized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let q = qubit();
        for _ in 0..50 {
            let chi = sample_frame(&mut rng, &q.unit_effect);
            let labels = (0..4).map(|i| format!("l{i}")).collect();
            let (_, c) = build_frame(&q, labels, chi, 1e-9, false).unwrap();
            assert!(c.passes(1e-9));
        }
    }
}
