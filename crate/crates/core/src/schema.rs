//! Versioned JSON documents and their canonical encoding.
//!
//! Canonical output has sorted object keys, no insignificant whitespace
//! beyond a trailing newline, and floats printed with 17 significant digits
//! in `%g` style, so `emit -> parse -> emit` is byte-identical.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::embed::{Certificate, ConeDescription, EmbeddingCertificate, FarkasCertificate};
use crate::error::{Error, Result};
use crate::frames::{build_frame, FrameCheck, FrameEntry};
use crate::gptcore::{GptEffect, GptFragment, GptState, GptTransformation, SystemRegistry, SystemSpec};
use crate::quotient::{Procedure, Signature, StatsTable, SystemTesters, TesterSet};

pub const FRAGMENT_V1: &str = "fragment.v1";
pub const STATSTABLE_V1: &str = "statstable.v1";
pub const FRAME_V1: &str = "frame.v1";
pub const CONE_V1: &str = "cone.v1";
pub const CERTIFICATE_V1: &str = "certificate.v1";
pub const REPORT_V1: &str = "report.v1";
pub const TOMLOC_V1: &str = "tomloc.v1";

/// `%.17g`.
pub fn format_g17(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::Invalid(format!("non-finite number {x} cannot be written as JSON")));
    }
    if x == 0.0 {
        return Ok(if x.is_sign_negative() { "-0".into() } else { "0".into() });
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if neg { "-" } else { "" };
    if !(-4..17).contains(&exp) {
        let mut m = format!("{}.{}", &digits[..1], &digits[1..]);
        trim_fraction(&mut m);
        let es = if exp < 0 { '-' } else { '+' };
        return Ok(format!("{sign}{m}e{es}{:02}", exp.abs()));
    }
    let mut s = if exp >= 0 {
        let int_len = exp as usize + 1;
        format!("{}.{}", &digits[..int_len], &digits[int_len..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    trim_fraction(&mut s);
    Ok(format!("{sign}{s}"))
}

fn trim_fraction(s: &mut String) {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
}

fn write_value(v: &Value, out: &mut String) -> Result<()> {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_g17(n.as_f64().expect("number"))?);
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s)?),
        Value::Array(xs) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(x, out)?;
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k)?);
                out.push(':');
                write_value(&m[k], out)?;
            }
            out.push('}');
        }
    }
    Ok(())
}

/// Canonical JSON text of any serializable value, with a trailing newline.
pub fn to_canonical<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, &mut out)?;
    out.push('\n');
    Ok(out)
}

/// Parses a document and checks its `schema` tag.
pub fn parse<T: DeserializeOwned>(text: &str, schema: &str) -> Result<T> {
    let v: Value = serde_json::from_str(text)?;
    let found = v.get("schema").and_then(Value::as_str).unwrap_or("<missing>");
    if found != schema {
        return Err(Error::Invalid(format!("expected schema `{schema}`, found `{found}`")));
    }
    Ok(serde_json::from_value(v)?)
}

/// The `schema` tag of an arbitrary document.
pub fn schema_of(text: &str) -> Result<String> {
    let v: Value = serde_json::from_str(text)?;
    v.get("schema")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Invalid("document has no `schema` field".into()))
}

fn flat(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().iter().cloned().collect()
}

fn unflat(rows: usize, cols: usize, data: &[f64], what: &str) -> Result<DMatrix<f64>> {
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            context: what.to_string(),
            expected: rows * cols,
            got: data.len(),
        });
    }
    Ok(DMatrix::from_row_slice(rows, cols, data))
}

fn vecs(v: &[DVector<f64>]) -> Vec<Vec<f64>> {
    v.iter().map(|x| x.iter().cloned().collect()).collect()
}

fn dvecs(v: &[Vec<f64>]) -> Vec<DVector<f64>> {
    v.iter().map(|x| DVector::from_vec(x.clone())).collect()
}

// ---------------------------------------------------------------- fragment.v1

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub id: String,
    pub dim: usize,
    pub unit_effect: Vec<f64>,
    /// Factor ids of a composite, row-major index `i * dim_b + j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<[String; 2]>,
}

impl SystemDoc {
    pub fn from_spec(s: &SystemSpec) -> Self {
        Self {
            id: s.id.clone(),
            dim: s.dim,
            unit_effect: s.unit_effect.iter().cloned().collect(),
            factors: s.factors.clone().map(|(a, b)| [a, b]),
        }
    }

    pub fn to_spec(&self) -> Result<SystemSpec> {
        let mut s = SystemSpec::new(self.id.clone(), DVector::from_vec(self.unit_effect.clone()))?;
        if s.dim != self.dim {
            return Err(Error::DimensionMismatch {
                context: format!("unit effect of `{}`", self.id),
                expected: self.dim,
                got: s.dim,
            });
        }
        s.factors = self.factors.clone().map(|[a, b]| (a, b));
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub label: String,
    pub system: String,
    pub vec: Vec<f64>,
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectDoc {
    pub label: String,
    pub system: String,
    pub covec: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformationDoc {
    pub label: String,
    pub in_system: String,
    pub out_system: String,
    /// Row-major, `dim_out x dim_in`.
    pub mat: Vec<f64>,
    pub channel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentDoc {
    pub schema: String,
    pub systems: Vec<SystemDoc>,
    pub states: Vec<StateDoc>,
    pub effects: Vec<EffectDoc>,
    pub transformations: Vec<TransformationDoc>,
    #[serde(default)]
    pub state_cone_rays: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    pub effect_cone_rays: BTreeMap<String, Vec<Vec<f64>>>,
}

impl FragmentDoc {
    pub fn from_fragment(f: &GptFragment) -> Self {
        Self {
            schema: FRAGMENT_V1.into(),
            systems: f.systems.iter().map(|s| SystemDoc::from_spec(s)).collect(),
            states: f
                .states
                .iter()
                .map(|s| StateDoc {
                    label: s.label.clone(),
                    system: s.system.id.clone(),
                    vec: s.vec.iter().cloned().collect(),
                    normalized: s.normalized,
                })
                .collect(),
            effects: f
                .effects
                .iter()
                .map(|e| EffectDoc {
                    label: e.label.clone(),
                    system: e.system.id.clone(),
                    covec: e.covec.iter().cloned().collect(),
                })
                .collect(),
            transformations: f
                .transformations
                .iter()
                .map(|t| TransformationDoc {
                    label: t.label.clone(),
                    in_system: t.in_system.id.clone(),
                    out_system: t.out_system.id.clone(),
                    mat: flat(&t.mat),
                    channel: t.channel,
                })
                .collect(),
            state_cone_rays: f.state_cone_rays.iter().map(|(k, v)| (k.clone(), vecs(v))).collect(),
            effect_cone_rays: f.effect_cone_rays.iter().map(|(k, v)| (k.clone(), vecs(v))).collect(),
        }
    }

    pub fn to_fragment(&self) -> Result<GptFragment> {
        let reg = registry_from_docs(&self.systems)?;
        let mut f = GptFragment::new(reg);
        for s in &self.states {
            let sys = f.systems.get(&s.system)?;
            let v = DVector::from_vec(s.vec.clone());
            f.states.push(if s.normalized {
                GptState::new(s.label.clone(), sys, v)?
            } else {
                GptState::subnormalized(s.label.clone(), sys, v)?
            });
        }
        for e in &self.effects {
            let sys = f.systems.get(&e.system)?;
            f.effects
                .push(GptEffect::new(e.label.clone(), sys, DVector::from_vec(e.covec.clone()))?);
        }
        for t in &self.transformations {
            let a = f.systems.get(&t.in_system)?;
            let b = f.systems.get(&t.out_system)?;
            let m = unflat(b.dim, a.dim, &t.mat, &format!("matrix of `{}`", t.label))?;
            f.transformations
                .push(GptTransformation::new(t.label.clone(), a, b, m, t.channel)?);
        }
        for (k, v) in &self.state_cone_rays {
            f.systems.get(k)?;
            f.state_cone_rays.insert(k.clone(), dvecs(v));
        }
        for (k, v) in &self.effect_cone_rays {
            f.systems.get(k)?;
            f.effect_cone_rays.insert(k.clone(), dvecs(v));
        }
        Ok(f)
    }
}

/// Registers plain systems first, then composites once their factors exist.
pub fn registry_from_docs(docs: &[SystemDoc]) -> Result<SystemRegistry> {
    let mut reg = SystemRegistry::new();
    let mut pending: Vec<&SystemDoc> = docs.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for d in pending {
            let ready = match &d.factors {
                None => true,
                Some([a, b]) => reg.get(a).is_ok() && reg.get(b).is_ok(),
            };
            if ready {
                reg.register(d.to_spec()?)?;
            } else {
                rest.push(d);
            }
        }
        if rest.len() == before {
            return Err(Error::Invalid(format!(
                "composite `{}` refers to unknown factors",
                rest[0].id
            )));
        }
        pending = rest;
    }
    Ok(reg)
}

// ------------------------------------------------------------- statstable.v1

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TesterSetDoc {
    pub id: String,
    pub description: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemTestersDoc {
    pub system: String,
    pub effect_testers: TesterSetDoc,
    /// References to preparations in the table (`id` or `id@context`).
    pub state_testers: TesterSetDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcedureKind {
    Preparation,
    Effect,
    Transformation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcedureDoc {
    pub id: String,
    pub context: String,
    pub kind: ProcedureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub stats: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsTableDoc {
    pub schema: String,
    pub systems: Vec<SystemTestersDoc>,
    pub procedures: Vec<ProcedureDoc>,
    #[serde(default)]
    pub deterministic_effect_ids: Vec<String>,
}

impl StatsTableDoc {
    pub fn from_table(t: &StatsTable) -> Self {
        let ts = |t: &TesterSet| TesterSetDoc {
            id: t.id.clone(),
            description: t.description.clone(),
        };
        Self {
            schema: STATSTABLE_V1.into(),
            systems: t
                .systems
                .iter()
                .map(|s| SystemTestersDoc {
                    system: s.system.clone(),
                    effect_testers: ts(&s.effects),
                    state_testers: ts(&s.states),
                })
                .collect(),
            procedures: t
                .procedures
                .iter()
                .map(|p| {
                    let kind = match p.signature {
                        Signature::Preparation { .. } => ProcedureKind::Preparation,
                        Signature::Effect { .. } => ProcedureKind::Effect,
                        Signature::Transformation { .. } => ProcedureKind::Transformation,
                    };
                    ProcedureDoc {
                        id: p.id.clone(),
                        context: p.context.clone(),
                        kind,
                        input: p.signature.input().map(str::to_string),
                        output: p.signature.output().map(str::to_string),
                        stats: p.stats.clone(),
                        parts: p.parts.clone(),
                    }
                })
                .collect(),
            deterministic_effect_ids: t.deterministic_effect_ids.clone(),
        }
    }

    pub fn to_table(&self) -> Result<StatsTable> {
        let systems = self
            .systems
            .iter()
            .map(|s| {
                Ok(SystemTesters {
                    system: s.system.clone(),
                    effects: TesterSet::new(s.effect_testers.id.clone(), s.effect_testers.description.clone())?,
                    states: TesterSet::new(s.state_testers.id.clone(), s.state_testers.description.clone())?,
                })
            })
            .collect::<Result<_>>()?;
        let procedures = self
            .procedures
            .iter()
            .map(|p| {
                let need = |x: &Option<String>, what: &str| {
                    x.clone()
                        .ok_or_else(|| Error::Invalid(format!("procedure `{}` lacks its {what} system", p.id)))
                };
                let signature = match p.kind {
                    ProcedureKind::Preparation => Signature::Preparation {
                        output: need(&p.output, "output")?,
                    },
                    ProcedureKind::Effect => Signature::Effect {
                        input: need(&p.input, "input")?,
                    },
                    ProcedureKind::Transformation => Signature::Transformation {
                        input: need(&p.input, "input")?,
                        output: need(&p.output, "output")?,
                    },
                };
                Ok(Procedure {
                    id: p.id.clone(),
                    context: p.context.clone(),
                    signature,
                    stats: p.stats.clone(),
                    parts: p.parts.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(StatsTable {
            systems,
            procedures,
            deterministic_effect_ids: self.deterministic_effect_ids.clone(),
        })
    }
}

// ------------------------------------------------------------------ frame.v1

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDoc {
    pub schema: String,
    pub system: SystemDoc,
    pub labels: Vec<String>,
    /// Row-major, one row (dual-frame covector) per ontic state.
    pub chi: Vec<f64>,
    /// More ontic states than the dimension.
    #[serde(default)]
    pub overcomplete: bool,
}

impl FrameDoc {
    pub fn from_entry(system: &SystemSpec, e: &FrameEntry) -> Self {
        Self {
            schema: FRAME_V1.into(),
            system: SystemDoc::from_spec(system),
            labels: e.ontic.labels.clone(),
            chi: flat(&e.chi),
            overcomplete: !e.exact,
        }
    }

    /// Rebuilds the frame, recomputing and checking its inverse.
    pub fn to_entry(&self, tol: f64) -> Result<(SystemSpec, FrameEntry, FrameCheck)> {
        let spec = self.system.to_spec()?;
        let chi = unflat(self.labels.len(), spec.dim, &self.chi, "chi")?;
        let (e, c) = build_frame(&spec, self.labels.clone(), chi, tol, self.overcomplete)?;
        Ok((spec, e, c))
    }
}

// ------------------------------------------------------------------- cone.v1

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDoc {
    pub schema: String,
    pub ambient_dim: usize,
    pub rays: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<Vec<f64>>>,
}

impl ConeDoc {
    pub fn from_cone(c: &ConeDescription) -> Self {
        Self {
            schema: CONE_V1.into(),
            ambient_dim: c.ambient_dim,
            rays: vecs(&c.rays),
            facets: c.facets.as_ref().map(|f| vecs(f)),
        }
    }

    pub fn to_cone(&self) -> Result<ConeDescription> {
        let mut c = ConeDescription::new(self.ambient_dim, dvecs(&self.rays))?;
        if let Some(f) = &self.facets {
            if let Some(v) = f.iter().find(|v| v.len() != self.ambient_dim) {
                return Err(Error::DimensionMismatch {
                    context: "cone facet".into(),
                    expected: self.ambient_dim,
                    got: v.len(),
                });
            }
            c.facets = Some(dvecs(f));
        }
        Ok(c)
    }
}

// ------------------------------------------------------------ certificate.v1

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingDoc {
    /// Row-major `|f| x |d|`.
    pub weights: Vec<f64>,
    pub f: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub reconstructed: Vec<f64>,
    pub ontic_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarkasDoc {
    pub functional: Vec<f64>,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    Embedding,
    Farkas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub schema: String,
    pub kind: CertificateKind,
    pub system: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub farkas: Option<FarkasDoc>,
}

impl CertificateDoc {
    pub fn from_certificate(c: &Certificate) -> Self {
        match c {
            Certificate::Embedding(e) => Self {
                schema: CERTIFICATE_V1.into(),
                kind: CertificateKind::Embedding,
                system: e.system.clone(),
                dim: e.target.nrows(),
                embedding: Some(EmbeddingDoc {
                    weights: flat(&e.weights),
                    f: vecs(&e.f),
                    d: vecs(&e.d),
                    target: flat(&e.target),
                    reconstructed: flat(&e.reconstructed),
                    ontic_count: e.ontic_count,
                }),
                farkas: None,
            },
            Certificate::Farkas(y) => Self {
                schema: CERTIFICATE_V1.into(),
                kind: CertificateKind::Farkas,
                system: y.system.clone(),
                dim: y.functional.nrows(),
                embedding: None,
                farkas: Some(FarkasDoc {
                    functional: flat(&y.functional),
                    gap: y.gap,
                }),
            },
        }
    }

    /// Decodes the stored data verbatim; nothing is recomputed, so a
    /// tampered document stays tampered for the verifier to catch.
    pub fn to_certificate(&self) -> Result<Certificate> {
        let n = self.dim;
        match (self.kind, &self.embedding, &self.farkas) {
            (CertificateKind::Embedding, Some(e), None) => {
                let f = dvecs(&e.f);
                let d = dvecs(&e.d);
                Ok(Certificate::Embedding(EmbeddingCertificate {
                    system: self.system.clone(),
                    weights: unflat(f.len(), d.len(), &e.weights, "weights")?,
                    f,
                    d,
                    target: unflat(n, n, &e.target, "target")?,
                    reconstructed: unflat(n, n, &e.reconstructed, "reconstructed")?,
                    ontic_count: e.ontic_count,
                }))
            }
            (CertificateKind::Farkas, None, Some(y)) => Ok(Certificate::Farkas(FarkasCertificate {
                system: self.system.clone(),
                functional: unflat(n, n, &y.functional, "functional")?,
                gap: y.gap,
            })),
            _ => Err(Error::Invalid("certificate body does not match its kind".into())),
        }
    }
}

// ---------------------------------------------------------------- tomloc.v1

/// Dimension triple for a tomographic-locality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomlocDoc {
    pub schema: String,
    pub name: String,
    pub dim_a: u64,
    pub dim_b: u64,
    pub dim_joint: u64,
}
