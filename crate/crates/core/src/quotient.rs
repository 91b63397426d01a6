//! From context-labelled operational statistics to a GPT fragment.
//!
//! Statistics are taken against local testers only. For a system `A` the
//! table lists effect testers (opaque labels) and state testers (ids of
//! preparations in the table). A preparation of `A` carries one probability
//! per effect tester, an effect on `A` one per state tester, and a
//! transformation `A -> B` one per pair `(state tester b of A, effect tester
//! a of B)` at index `b * m_B + a`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frames::{represent, represent_effect, represent_state, FrameModel};
use crate::gptcore::{GptEffect, GptFragment, GptState, GptTransformation, SystemRegistry, SystemSpec};
use crate::linalg::{independent_subset, least_squares, max_diff, max_diff_vec};

/// Slack allowed on the `[0, 1]` range of raw statistics.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TesterSet {
    pub id: String,
    pub description: Vec<String>,
}

impl TesterSet {
    pub fn new(id: impl Into<String>, description: Vec<String>) -> Result<Self> {
        let id = id.into();
        if description.is_empty() {
            return Err(Error::Invalid(format!("tester set `{id}` is empty")));
        }
        Ok(Self { id, description })
    }

    pub fn size(&self) -> usize {
        self.description.len()
    }
}

/// Local testers of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemTesters {
    pub system: String,
    /// Labels of the effect testers.
    pub effects: TesterSet,
    /// References (`id` or `id@context`) to preparations used as state testers.
    pub states: TesterSet,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Signature {
    Preparation { output: String },
    Effect { input: String },
    Transformation { input: String, output: String },
}

impl Signature {
    pub fn input(&self) -> Option<&str> {
        match self {
            Signature::Preparation { .. } => None,
            Signature::Effect { input } | Signature::Transformation { input, .. } => Some(input),
        }
    }

    pub fn output(&self) -> Option<&str> {
        match self {
            Signature::Effect { .. } => None,
            Signature::Preparation { output } | Signature::Transformation { output, .. } => Some(output),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Procedure {
    pub id: String,
    pub context: String,
    pub signature: Signature,
    pub stats: Vec<f64>,
    /// Wiring: references to the procedures this one is built from, in
    /// temporal order. Empty for primitive procedures.
    pub parts: Vec<String>,
}

impl Procedure {
    pub fn key(&self) -> (String, String) {
        (self.id.clone(), self.context.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatsTable {
    pub systems: Vec<SystemTesters>,
    pub procedures: Vec<Procedure>,
    pub deterministic_effect_ids: Vec<String>,
}

impl StatsTable {
    pub fn testers(&self, system: &str) -> Result<&SystemTesters> {
        self.systems
            .iter()
            .find(|s| s.system == system)
            .ok_or_else(|| Error::UnknownSystem(system.to_string()))
    }

    /// Resolves `id` (first procedure with that id) or `id@context`.
    pub fn find(&self, reference: &str) -> Result<usize> {
        let hit = match reference.split_once('@') {
            Some((id, ctx)) => self.procedures.iter().position(|p| p.id == id && p.context == ctx),
            None => self.procedures.iter().position(|p| p.id == reference),
        };
        hit.ok_or_else(|| Error::Invalid(format!("unknown procedure `{reference}`")))
    }

    pub fn expected_len(&self, sig: &Signature) -> Result<usize> {
        Ok(match sig {
            Signature::Preparation { output } => self.testers(output)?.effects.size(),
            Signature::Effect { input } => self.testers(input)?.states.size(),
            Signature::Transformation { input, output } => {
                self.testers(input)?.states.size() * self.testers(output)?.effects.size()
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.procedures.is_empty() {
            return Err(Error::Invalid("no procedures".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.systems {
            if !seen.insert(s.system.clone()) {
                return Err(Error::Invalid(format!("system `{}` listed twice", s.system)));
            }
        }
        let mut keys = std::collections::BTreeSet::new();
        for p in &self.procedures {
            if !keys.insert(p.key()) {
                return Err(Error::Invalid(format!("duplicate procedure `{}@{}`", p.id, p.context)));
            }
            let n = self.expected_len(&p.signature)?;
            if p.stats.len() != n {
                return Err(Error::DimensionMismatch {
                    context: format!("stats of `{}@{}`", p.id, p.context),
                    expected: n,
                    got: p.stats.len(),
                });
            }
            if let Some(x) = p.stats.iter().find(|x| !(**x >= -RANGE_SLACK && **x <= 1.0 + RANGE_SLACK)) {
                return Err(Error::Invalid(format!(
                    "`{}@{}` has statistic {x} outside [0, 1]",
                    p.id, p.context
                )));
            }
            for part in &p.parts {
                self.find(part)?;
            }
        }
        for s in &self.systems {
            for r in &s.states.description {
                let i = self.find(r)?;
                let want = Signature::Preparation {
                    output: s.system.clone(),
                };
                if self.procedures[i].signature != want {
                    return Err(Error::Invalid(format!(
                        "state tester `{r}` is not a preparation of `{}`",
                        s.system
                    )));
                }
            }
        }
        for id in &self.deterministic_effect_ids {
            let i = self.find(id)?;
            if !matches!(self.procedures[i].signature, Signature::Effect { .. }) {
                return Err(Error::Invalid(format!("deterministic effect `{id}` is not an effect")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassInfo {
    /// Label of the class in the emitted fragment.
    pub label: String,
    pub signature: Signature,
    /// `(id, context)` of every member, in table order.
    pub members: Vec<(String, String)>,
    /// Mean statistics of the members.
    pub stats: Vec<f64>,
    /// Position in the fragment's states, effects or transformations.
    pub fragment_index: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassMap {
    pub classes: Vec<ClassInfo>,
    pub index: BTreeMap<(String, String), usize>,
}

impl ClassMap {
    pub fn class_of(&self, id: &str, context: &str) -> Option<&ClassInfo> {
        self.index
            .get(&(id.to_string(), context.to_string()))
            .map(|&i| &self.classes[i])
    }

    pub fn count(&self, pred: impl Fn(&Signature) -> bool) -> usize {
        self.classes.iter().filter(|c| pred(&c.signature)).count()
    }
}

/// Basis choice for one system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemBasis {
    pub system: String,
    /// Class indices of the spanning preparations, in basis order.
    pub basis_classes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    pub fragment: GptFragment,
    pub classes: ClassMap,
    pub bases: Vec<SystemBasis>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // smaller root wins so classes are keyed by first-seen member
        if ra < rb {
            self.0[rb] = ra;
        } else if rb < ra {
            self.0[ra] = rb;
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Groups stat vectors within `tol`; fails if the grouping depends on the order
/// of comparisons or on chaining.
fn group(items: &[&[f64]], tol: f64, what: &str) -> Result<Vec<Vec<usize>>> {
    let n = items.len();
    let mut uf = UnionFind((0..n).collect());
    for i in 0..n {
        for j in i + 1..n {
            if dist(items[i], items[j]) <= tol {
                uf.union(i, j);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(items[i], items[j]);
            let same = uf.find(i) == uf.find(j);
            if same && d > 2.0 * tol {
                return Err(Error::AmbiguousClasses(format!(
                    "{what}: items {i} and {j} are {d:.3e} apart but chained into one class; use a smaller tolerance or cleaner data"
                )));
            }
            if !same && d <= 2.0 * tol {
                return Err(Error::AmbiguousClasses(format!(
                    "{what}: items {i} and {j} are {d:.3e} apart but fall in different classes; use a smaller tolerance or cleaner data"
                )));
            }
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = uf.find(i);
        by_root.entry(r).or_default().push(i);
    }
    Ok(by_root.into_values().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicEffectReport {
    pub unique: bool,
    /// Worst pair and its max-norm distance.
    pub offending: Option<(String, String, f64)>,
}

/// Are all flagged deterministic effects of each system operationally equivalent?
pub fn check_unique_deterministic_effect(table: &StatsTable, tol: f64) -> Result<DeterministicEffectReport> {
    if table.deterministic_effect_ids.is_empty() {
        return Err(Error::Invalid("no deterministic effects flagged".into()));
    }
    let mut flagged = Vec::new();
    for r in &table.deterministic_effect_ids {
        flagged.push(&table.procedures[table.find(r)?]);
    }
    let mut worst: Option<(String, String, f64)> = None;
    for (i, a) in flagged.iter().enumerate() {
        for b in flagged.iter().skip(i + 1) {
            if a.signature != b.signature {
                continue;
            }
            let d = dist(&a.stats, &b.stats);
            if worst.as_ref().is_none_or(|w| d > w.2) {
                worst = Some((format!("{}@{}", a.id, a.context), format!("{}@{}", b.id, b.context), d));
            }
        }
    }
    let unique = worst.as_ref().is_none_or(|w| w.2 <= tol);
    Ok(DeterministicEffectReport {
        unique,
        offending: if unique { None } else { worst },
    })
}

/// `mixed = weight * first + (1 - weight) * second`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub mixed: String,
    pub weight: f64,
    pub first: String,
    pub second: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureCheck {
    pub mixture: Mixture,
    pub max_deviation: f64,
    /// Stat index of the worst deviation.
    pub location: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub checks: Vec<MixtureCheck>,
    pub pass: bool,
}

pub fn check_convex_closure(table: &StatsTable, mixtures: &[Mixture], tol: f64) -> Result<ConvexityReport> {
    let mut checks = Vec::new();
    for m in mixtures {
        let t1 = &table.procedures[table.find(&m.mixed)?];
        let t2 = &table.procedures[table.find(&m.first)?];
        let t3 = &table.procedures[table.find(&m.second)?];
        if t1.stats.len() != t2.stats.len() || t1.stats.len() != t3.stats.len() {
            return Err(Error::DimensionMismatch {
                context: format!("mixture `{}`", m.mixed),
                expected: t1.stats.len(),
                got: t2.stats.len().max(t3.stats.len()),
            });
        }
        let mut worst = (0.0_f64, 0usize);
        for i in 0..t1.stats.len() {
            let want = m.weight * t2.stats[i] + (1.0 - m.weight) * t3.stats[i];
            let dev = (t1.stats[i] - want).abs();
            if dev > worst.0 {
                worst = (dev, i);
            }
        }
        checks.push(MixtureCheck {
            mixture: m.clone(),
            max_deviation: worst.0,
            location: worst.1,
            pass: worst.0 <= tol,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ConvexityReport { checks, pass })
}

fn mean(rows: &[&[f64]]) -> Vec<f64> {
    let n = rows.len() as f64;
    let mut out = vec![0.0; rows[0].len()];
    for r in rows {
        for (o, x) in out.iter_mut().zip(r.iter()) {
            *o += x;
        }
    }
    out.iter_mut().for_each(|x| *x /= n);
    out
}

/// Groups procedures into classes and builds the GPT fragment they define.
pub fn quotient(table: &StatsTable, tol: f64) -> Result<Quotient> {
    table.validate()?;

    // classes, grouped per signature
    let mut by_sig: BTreeMap<&Signature, Vec<usize>> = BTreeMap::new();
    for (i, p) in table.procedures.iter().enumerate() {
        by_sig.entry(&p.signature).or_default().push(i);
    }
    let mut raw: Vec<(usize, Vec<usize>)> = Vec::new(); // (first member, members)
    for (sig, members) in &by_sig {
        let stats: Vec<&[f64]> = members.iter().map(|&i| table.procedures[i].stats.as_slice()).collect();
        for g in group(&stats, tol, &format!("{sig:?}"))? {
            let ms: Vec<usize> = g.iter().map(|&k| members[k]).collect();
            raw.push((ms[0], ms));
        }
    }
    raw.sort();

    let mut id_classes: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, ms) in &raw {
        *id_classes.entry(table.procedures[ms[0]].id.as_str()).or_default() += 1;
    }
    let mut map = ClassMap::default();
    for (ci, (_, ms)) in raw.iter().enumerate() {
        let first = &table.procedures[ms[0]];
        let label = if id_classes[first.id.as_str()] > 1 {
            format!("{}@{}", first.id, first.context)
        } else {
            first.id.clone()
        };
        let rows: Vec<&[f64]> = ms.iter().map(|&i| table.procedures[i].stats.as_slice()).collect();
        for &i in ms {
            map.index.insert(table.procedures[i].key(), ci);
        }
        map.classes.push(ClassInfo {
            label,
            signature: first.signature.clone(),
            members: ms.iter().map(|&i| table.procedures[i].key()).collect(),
            stats: mean(&rows),
            fragment_index: 0,
        });
    }

    if !table.deterministic_effect_ids.is_empty() {
        let rep = check_unique_deterministic_effect(table, tol)?;
        if let Some((a, b, d)) = rep.offending {
            return Err(Error::Inconsistent(format!(
                "deterministic effects `{a}` and `{b}` differ by {d:.3e}"
            )));
        }
    }

    // per-system coordinates
    struct Coords {
        spec: Arc<SystemSpec>,
        /// effect-tester covectors as rows (m_E x k)
        effect_testers: DMatrix<f64>,
        /// state-tester coordinates as rows (m_S x k)
        state_testers: DMatrix<f64>,
        basis: Vec<usize>,
    }
    let mut registry = SystemRegistry::new();
    let mut coords: BTreeMap<String, Coords> = BTreeMap::new();
    let mut state_coords: BTreeMap<usize, DVector<f64>> = BTreeMap::new();
    for st in &table.systems {
        let sys = st.system.as_str();
        let preps: Vec<usize> = (0..map.classes.len())
            .filter(|&c| map.classes[c].signature == Signature::Preparation { output: sys.to_string() })
            .collect();
        if preps.is_empty() {
            return Err(Error::Invalid(format!("system `{sys}` has no preparations")));
        }
        let vecs: Vec<DVector<f64>> = preps
            .iter()
            .map(|&c| DVector::from_vec(map.classes[c].stats.clone()))
            .collect();
        let picked = independent_subset(&vecs, tol);
        let basis: Vec<usize> = picked.iter().map(|&i| preps[i]).collect();
        let b = DMatrix::from_columns(&picked.iter().map(|&i| vecs[i].clone()).collect::<Vec<_>>());
        let k = basis.len();
        for (&c, v) in preps.iter().zip(&vecs) {
            let (x, r) = least_squares(&b, v);
            if r > tol * 10.0 {
                return Err(Error::Inconsistent(format!(
                    "preparation `{}` is not in the span of the basis (residual {r:.3e})",
                    map.classes[c].label
                )));
            }
            state_coords.insert(c, x);
        }
        let mut w = DMatrix::zeros(st.states.size(), k);
        for (beta, r) in st.states.description.iter().enumerate() {
            let p = &table.procedures[table.find(r)?];
            let c = map.index[&p.key()];
            w.row_mut(beta).copy_from(&state_coords[&c].transpose());
        }
        if crate::linalg::rank(&w, 1e-9) < k {
            return Err(Error::Inconsistent(format!(
                "state testers of `{sys}` do not span its {k}-dimensional state space"
            )));
        }
        // unit effect: the deterministic class if any, else ones on the basis
        let det = table
            .deterministic_effect_ids
            .iter()
            .filter_map(|r| table.find(r).ok())
            .find(|&i| table.procedures[i].signature == Signature::Effect { input: sys.to_string() });
        let unit = match det {
            Some(i) => {
                let (u, r) = least_squares(&w, &DVector::from_vec(table.procedures[i].stats.clone()));
                if r > tol * 10.0 {
                    return Err(Error::Inconsistent(format!(
                        "deterministic effect on `{sys}` is not linear on the state testers (residual {r:.3e})"
                    )));
                }
                u
            }
            None => DVector::from_element(k, 1.0),
        };
        let spec = registry.register(SystemSpec::new(sys, unit)?)?;
        coords.insert(
            sys.to_string(),
            Coords {
                spec,
                effect_testers: b,
                state_testers: w,
                basis,
            },
        );
    }

    let mut fragment = GptFragment::new(registry);
    for ci in 0..map.classes.len() {
        let class = &map.classes[ci];
        let label = class.label.clone();
        match &class.signature {
            Signature::Preparation { output } => {
                let c = &coords[output];
                let v = state_coords[&ci].clone();
                let norm = c.spec.unit_effect.dot(&v);
                let s = if (norm - 1.0).abs() <= tol * 10.0 {
                    GptState::new(label, c.spec.clone(), v)?
                } else {
                    GptState::subnormalized(label, c.spec.clone(), v)?
                };
                map.classes[ci].fragment_index = fragment.states.len();
                fragment.states.push(s);
            }
            Signature::Effect { input } => {
                let c = &coords[input];
                let p = DVector::from_vec(class.stats.clone());
                let (e, r) = least_squares(&c.state_testers, &p);
                if r > tol * 10.0 {
                    return Err(Error::Inconsistent(format!(
                        "effect `{label}` is not linear on the state testers (residual {r:.3e})"
                    )));
                }
                map.classes[ci].fragment_index = fragment.effects.len();
                fragment.effects.push(GptEffect::new(label, c.spec.clone(), e)?);
            }
            Signature::Transformation { input, output } => {
                let (ca, cb) = (&coords[input], &coords[output]);
                let (ms, me) = (ca.state_testers.nrows(), cb.effect_testers.nrows());
                // n[(alpha, beta)] = E_alpha . M . w_beta
                let n = DMatrix::from_fn(me, ms, |a, b| class.stats[b * me + a]);
                let left = cb
                    .effect_testers
                    .clone()
                    .pseudo_inverse(1e-12)
                    .map_err(|e| Error::Invalid(e.to_string()))?;
                let right = ca
                    .state_testers
                    .transpose()
                    .pseudo_inverse(1e-12)
                    .map_err(|e| Error::Invalid(e.to_string()))?;
                let m = &left * &n * &right;
                let r = max_diff(&(&cb.effect_testers * &m * ca.state_testers.transpose()), &n);
                if r > tol * 10.0 {
                    return Err(Error::Inconsistent(format!(
                        "transformation `{label}` is not linear on the testers (residual {r:.3e})"
                    )));
                }
                let channel = max_diff_vec(&(m.transpose() * &cb.spec.unit_effect), &ca.spec.unit_effect) <= tol * 10.0;
                map.classes[ci].fragment_index = fragment.transformations.len();
                fragment
                    .transformations
                    .push(GptTransformation::new(label, ca.spec.clone(), cb.spec.clone(), m, channel)?);
            }
        }
    }
    let bases = table
        .systems
        .iter()
        .map(|s| SystemBasis {
            system: s.system.clone(),
            basis_classes: coords[&s.system].basis.clone(),
        })
        .collect();
    Ok(Quotient {
        fragment: fragment.with_cones_from_members(),
        classes: map,
        bases,
    })
}

/// The GPT representation of a class.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassValue {
    State(DVector<f64>),
    Effect(DVector<f64>),
    Transformation(DMatrix<f64>),
    Probability(f64),
}

impl ClassValue {
    fn distance(&self, other: &ClassValue) -> Option<f64> {
        match (self, other) {
            (ClassValue::State(a), ClassValue::State(b)) | (ClassValue::Effect(a), ClassValue::Effect(b)) => {
                (a.len() == b.len()).then(|| max_diff_vec(a, b))
            }
            (ClassValue::Transformation(a), ClassValue::Transformation(b)) => {
                (a.shape() == b.shape()).then(|| max_diff(a, b))
            }
            (ClassValue::Probability(a), ClassValue::Probability(b)) => Some((a - b).abs()),
            _ => None,
        }
    }
}

impl Quotient {
    pub fn value(&self, class: usize) -> ClassValue {
        let c = &self.classes.classes[class];
        match c.signature {
            Signature::Preparation { .. } => ClassValue::State(self.fragment.states[c.fragment_index].vec.clone()),
            Signature::Effect { .. } => ClassValue::Effect(self.fragment.effects[c.fragment_index].covec.clone()),
            Signature::Transformation { .. } => {
                ClassValue::Transformation(self.fragment.transformations[c.fragment_index].mat.clone())
            }
        }
    }

    /// Composes class representations in temporal order.
    pub fn compose(&self, classes: &[usize]) -> Result<ClassValue> {
        let mut acc: Option<ClassValue> = None;
        for &c in classes {
            let next = self.value(c);
            acc = Some(match (acc, next) {
                (None, v) => v,
                (Some(ClassValue::State(v)), ClassValue::Transformation(m)) if m.ncols() == v.len() => {
                    ClassValue::State(m * v)
                }
                (Some(ClassValue::State(v)), ClassValue::Effect(e)) if e.len() == v.len() => {
                    ClassValue::Probability(e.dot(&v))
                }
                (Some(ClassValue::Transformation(m1)), ClassValue::Transformation(m2)) if m2.ncols() == m1.nrows() => {
                    ClassValue::Transformation(m2 * m1)
                }
                (Some(ClassValue::Transformation(m)), ClassValue::Effect(e)) if e.len() == m.nrows() => {
                    ClassValue::Effect(m.transpose() * e)
                }
                _ => return Err(Error::SystemMismatch("wiring composes incompatible procedures".into())),
            });
        }
        acc.ok_or_else(|| Error::Invalid("empty wiring".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CongruenceCheck {
    pub procedure: String,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CongruenceReport {
    pub checks: Vec<CongruenceCheck>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Compares every wired procedure's own class with the composite of its parts' classes.
pub fn check_congruence(table: &StatsTable, q: &Quotient, tol: f64) -> Result<CongruenceReport> {
    let mut checks = Vec::new();
    for p in table.procedures.iter().filter(|p| !p.parts.is_empty()) {
        let parts: Vec<usize> = p
            .parts
            .iter()
            .map(|r| table.find(r).map(|i| q.classes.index[&table.procedures[i].key()]))
            .collect::<Result<_>>()?;
        let composed = q.compose(&parts)?;
        let own = q.value(q.classes.index[&p.key()]);
        let deviation = own
            .distance(&composed)
            .ok_or_else(|| Error::SystemMismatch(format!("wiring of `{}` yields a different kind of process", p.id)))?;
        checks.push(CongruenceCheck {
            procedure: format!("{}@{}", p.id, p.context),
            deviation,
        });
    }
    let max_deviation = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    Ok(CongruenceReport {
        pass: max_deviation <= tol,
        checks,
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NcRow {
    pub id: String,
    pub context: String,
    pub class: String,
    /// Distribution, response function, or row-major stochastic matrix.
    pub values: Vec<f64>,
}

/// Pulls a frame model of the quotiented GPT back to every raw procedure.
///
/// The representation is computed once per class, so members of one class
/// receive identical rows.
pub fn nc_model_from_gpt_model(table: &StatsTable, q: &Quotient, model: &FrameModel) -> Result<Vec<NcRow>> {
    let mut per_class: Vec<Option<Vec<f64>>> = vec![None; q.classes.classes.len()];
    let mut rows = Vec::with_capacity(table.procedures.len());
    for p in &table.procedures {
        let ci = *q
            .classes
            .index
            .get(&p.key())
            .ok_or_else(|| Error::Invalid(format!("`{}@{}` has no class", p.id, p.context)))?;
        if per_class[ci].is_none() {
            let c = &q.classes.classes[ci];
            let values = match &c.signature {
                Signature::Preparation { output } => {
                    represent_state(model, output, &q.fragment.states[c.fragment_index].vec)?
                        .iter()
                        .cloned()
                        .collect()
                }
                Signature::Effect { input } => represent_effect(model, input, &q.fragment.effects[c.fragment_index].covec)?
                    .iter()
                    .cloned()
                    .collect(),
                Signature::Transformation { .. } => {
                    let m = represent(model, &q.fragment.transformations[c.fragment_index])?;
                    m.transpose().iter().cloned().collect()
                }
            };
            per_class[ci] = Some(values);
        }
        rows.push(NcRow {
            id: p.id.clone(),
            context: p.context.clone(),
            class: q.classes.classes[ci].label.clone(),
            values: per_class[ci].clone().expect("filled above"),
        });
    }
    Ok(rows)
}

/// Change of coordinates from a quotient's basis to another parametrization:
/// column `i` is the other parametrization of basis preparation `i`.
pub fn basis_matrix(q: &Quotient, system: &str, embed: impl Fn(&ClassInfo) -> Result<DVector<f64>>) -> Result<DMatrix<f64>> {
    let b = q
        .bases
        .iter()
        .find(|b| b.system == system)
        .ok_or_else(|| Error::UnknownSystem(system.to_string()))?;
    let cols: Vec<DVector<f64>> = b
        .basis_classes
        .iter()
        .map(|&c| embed(&q.classes.classes[c]))
        .collect::<Result<_>>()?;
    if cols.is_empty() {
        return Err(Error::Invalid("empty basis".into()));
    }
    Ok(DMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Classical bit: testers are the two indicator effects and the two vertices.
    fn bit_table() -> StatsTable {
        let testers = SystemTesters {
            system: "bit".into(),
            effects: TesterSet::new("e", vec!["is0".into(), "is1".into()]).unwrap(),
            states: TesterSet::new("s", vec!["zero".into(), "one".into()]).unwrap(),
        };
        let prep = |id: &str, ctx: &str, p0: f64| Procedure {
            id: id.into(),
            context: ctx.into(),
            signature: Signature::Preparation { output: "bit".into() },
            stats: vec![p0, 1.0 - p0],
            parts: vec![],
        };
        let eff = |id: &str, ctx: &str, s: [f64; 2]| Procedure {
            id: id.into(),
            context: ctx.into(),
            signature: Signature::Effect { input: "bit".into() },
            stats: s.to_vec(),
            parts: vec![],
        };
        StatsTable {
            systems: vec![testers],
            procedures: vec![
                prep("zero", "", 1.0),
                prep("one", "", 0.0),
                prep("half", "coin-A", 0.5),
                prep("half", "coin-B", 0.5),
                prep("quarter", "", 0.25),
                eff("is0", "", [1.0, 0.0]),
                eff("discard", "left", [1.0, 1.0]),
                eff("discard", "right", [1.0, 1.0]),
                Procedure {
                    id: "flip".into(),
                    context: "".into(),
                    signature: Signature::Transformation {
                        input: "bit".into(),
                        output: "bit".into(),
                    },
                    // beta = zero: (is0, is1) = (0, 1); beta = one: (1, 0)
                    stats: vec![0.0, 1.0, 1.0, 0.0],
                    parts: vec![],
                },
                Procedure {
                    id: "flipped-zero".into(),
                    context: "".into(),
                    signature: Signature::Preparation { output: "bit".into() },
                    stats: vec![0.0, 1.0],
                    parts: vec!["zero".into(), "flip".into()],
                },
            ],
            deterministic_effect_ids: vec!["discard@left".into(), "discard@right".into()],
        }
    }

    #[test]
    fn duplicates_share_a_class() {
        let t = bit_table();
        let q = quotient(&t, 1e-9).unwrap();
        let a = q.classes.class_of("half", "coin-A").unwrap();
        let b = q.classes.class_of("half", "coin-B").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.members.len(), 2);
        // flipped-zero joins `one`
        assert_eq!(q.classes.class_of("flipped-zero", "").unwrap().label, "one");
        assert_eq!(q.classes.count(|s| matches!(s, Signature::Preparation { .. })), 4);
        assert!(crate::gptcore::validate_fragment(&q.fragment, 1e-9).is_valid());
    }

    #[test]
    fn separated_stats_are_distinct() {
        let mut t = bit_table();
        t.procedures[3].stats = vec![0.8, 0.2];
        let q = quotient(&t, 1e-9).unwrap();
        assert_ne!(
            q.classes.class_of("half", "coin-A").unwrap().label,
            q.classes.class_of("half", "coin-B").unwrap().label
        );
    }

    #[test]
    fn chaining_is_an_error() {
        let mut t = bit_table();
        t.procedures[2].stats = vec![0.5, 0.5];
        t.procedures[3].stats = vec![0.5 + 0.8e-9, 0.5 - 0.8e-9];
        t.procedures.push(Procedure {
            id: "half".into(),
            context: "coin-C".into(),
            signature: Signature::Preparation { output: "bit".into() },
            stats: vec![0.5 + 1.6e-9, 0.5 - 1.6e-9],
            parts: vec![],
        });
        t.procedures.push(Procedure {
            id: "half".into(),
            context: "coin-D".into(),
            signature: Signature::Preparation { output: "bit".into() },
            stats: vec![0.5 + 2.4e-9, 0.5 - 2.4e-9],
            parts: vec![],
        });
        assert!(matches!(quotient(&t, 1e-9), Err(Error::AmbiguousClasses(_))));
    }

    #[test]
    fn deterministic_effects() {
        let t = bit_table();
        assert!(check_unique_deterministic_effect(&t, 1e-9).unwrap().unique);
        let mut bad = t.clone();
        bad.procedures[7].stats = vec![0.9, 1.0];
        let rep = check_unique_deterministic_effect(&bad, 1e-9).unwrap();
        assert!(!rep.unique);
        let (a, b, d) = rep.offending.unwrap();
        assert_eq!((a.as_str(), b.as_str()), ("discard@left", "discard@right"));
        assert!((d - 0.1).abs() < 1e-12);
        assert!(matches!(quotient(&bad, 1e-9), Err(Error::Inconsistent(_))));
        let mut none = t;
        none.deterministic_effect_ids.clear();
        assert!(check_unique_deterministic_effect(&none, 1e-9).is_err());
    }

    #[test]
    fn convexity_report() {
        let t = bit_table();
        let ok = Mixture {
            mixed: "quarter".into(),
            weight: 0.25,
            first: "zero".into(),
            second: "one".into(),
        };
        let unit = Mixture {
            mixed: "zero".into(),
            weight: 1.0,
            first: "zero".into(),
            second: "one".into(),
        };
        let bad = Mixture {
            mixed: "half@coin-A".into(),
            weight: 0.25,
            first: "zero".into(),
            second: "one".into(),
        };
        let r = check_convex_closure(&t, &[ok, unit, bad], 1e-9).unwrap();
        assert!(r.checks[0].pass && r.checks[1].pass);
        assert!(!r.checks[2].pass);
        assert!(!r.pass);
        assert!((r.checks[2].max_deviation - 0.25).abs() < 1e-12);
    }

    #[test]
    fn congruence_and_idempotence() {
        let t = bit_table();
        let q = quotient(&t, 1e-9).unwrap();
        let rep = check_congruence(&t, &q, 1e-9).unwrap();
        assert_eq!(rep.checks.len(), 1);
        assert!(rep.pass);

        // re-quotienting one representative per class gives the same classes
        let mut reps = t.clone();
        reps.procedures = q
            .classes
            .classes
            .iter()
            .map(|c| t.procedures[t.find(&format!("{}@{}", c.members[0].0, c.members[0].1)).unwrap()].clone())
            .collect();
        let keep: Vec<String> = reps
            .deterministic_effect_ids
            .iter()
            .filter(|r| reps.find(r).is_ok())
            .cloned()
            .collect();
        reps.deterministic_effect_ids = keep;
        let q2 = quotient(&reps, 1e-9).unwrap();
        assert_eq!(q2.classes.classes.len(), q.classes.classes.len());
        for (a, b) in q.classes.classes.iter().zip(&q2.classes.classes) {
            assert_eq!(a.stats, b.stats);
        }
    }

    #[test]
    fn empty_table() {
        let t = StatsTable::default();
        let err = quotient(&t, 1e-9).unwrap_err();
        assert!(err.to_string().contains("no procedures"));
    }
}
