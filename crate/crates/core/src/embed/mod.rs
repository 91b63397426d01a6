//! Simplex-embedding test for polyhedral fragments.
//!
//! A fragment embeds into a simplex of its own dimension iff the projector
//! onto the state span decomposes as `sum c_ab f_a d_b^T` with `c >= 0`,
//! where `f_a` generate the dual of the effect cone and `d_b` the dual of the
//! state cone. Both outcomes come with a certificate that is re-checked by
//! [`verify_certificate`] before it is returned.

mod dd;

pub use dd::{dual_cone, ConeDescription, MAX_DD_DIM};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frames::{build_frame, FrameCheck, FrameEntry};
use crate::gptcore::{GptFragment, SystemSpec};
use crate::linalg::{max_abs, max_abs_vec, max_diff, null_space, orthonormal_span};
use crate::lp::{solve_feasibility, solve_feasibility_exact, Feasibility, EXACT_MAX_VARS};

/// Dense LPs above this many columns are refused.
pub const MAX_LP_COLUMNS: usize = 60_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCertificate {
    pub system: String,
    /// `weights[(a, b)] = c_ab`.
    pub weights: DMatrix<f64>,
    /// Effect-dual generators (vectors), ambient coordinates.
    pub f: Vec<DVector<f64>>,
    /// State-dual generators (covectors), ambient coordinates.
    pub d: Vec<DVector<f64>>,
    /// Projector onto the state span the certificate decomposes.
    pub target: DMatrix<f64>,
    pub reconstructed: DMatrix<f64>,
    pub ontic_count: usize,
}

impl EmbeddingCertificate {
    /// Assembles a certificate and recomputes `reconstructed` and `ontic_count`.
    pub fn new(
        system: impl Into<String>,
        weights: DMatrix<f64>,
        f: Vec<DVector<f64>>,
        d: Vec<DVector<f64>>,
        target: DMatrix<f64>,
    ) -> Result<Self> {
        let dim = target.nrows();
        if weights.shape() != (f.len(), d.len()) {
            return Err(Error::DimensionMismatch {
                context: "certificate weights".into(),
                expected: f.len() * d.len(),
                got: weights.len(),
            });
        }
        if let Some(v) = f.iter().chain(d.iter()).find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                context: "certificate generator".into(),
                expected: dim,
                got: v.len(),
            });
        }
        let reconstructed = reconstruct(&weights, &f, &d, dim);
        let ontic_count = weights.iter().filter(|c| **c != 0.0).count();
        Ok(Self {
            system: system.into(),
            weights,
            f,
            d,
            target,
            reconstructed,
            ontic_count,
        })
    }

    /// Nonzero terms as `(a, b, c_ab)`, row-major.
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for a in 0..self.weights.nrows() {
            for b in 0..self.weights.ncols() {
                let c = self.weights[(a, b)];
                if c != 0.0 {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    /// The frame `D_l = c_ab d_b`, `F_l = f_a` induced by the nonzero terms.
    ///
    /// Only possible when the certificate has exactly `dim` terms and the
    /// states span the whole space.
    pub fn to_frame(&self, system: &SystemSpec, tol: f64) -> Result<(FrameEntry, FrameCheck)> {
        let terms = self.terms();
        let rows: Vec<f64> = terms
            .iter()
            .flat_map(|(_, b, c)| (&self.d[*b] * *c).iter().cloned().collect::<Vec<_>>())
            .collect();
        let chi = DMatrix::from_row_slice(terms.len(), system.dim, &rows);
        let labels = terms.iter().map(|(a, b, _)| format!("f{a}d{b}")).collect();
        build_frame(system, labels, chi, tol, false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub system: String,
    /// `Y` with `<Y, f d^T> <= 0` for all generator pairs.
    pub functional: DMatrix<f64>,
    /// `<Y, target>`, normalized to 1 by [`embed_test`].
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    Embedding(EmbeddingCertificate),
    Farkas(FarkasCertificate),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbedOutcome {
    Feasible(EmbeddingCertificate),
    Infeasible(FarkasCertificate),
}

impl EmbedOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, EmbedOutcome::Feasible(_))
    }

    pub fn certificate(&self) -> Certificate {
        match self {
            EmbedOutcome::Feasible(c) => Certificate::Embedding(c.clone()),
            EmbedOutcome::Infeasible(c) => Certificate::Farkas(c.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedOptions {
    pub tol: f64,
    /// Solve in exact rational arithmetic (at most [`EXACT_MAX_VARS`] columns).
    pub exact: bool,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            tol: crate::gptcore::DEFAULT_TOL,
            exact: false,
        }
    }
}

fn reconstruct(weights: &DMatrix<f64>, f: &[DVector<f64>], d: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for a in 0..f.len() {
        for b in 0..d.len() {
            let c = weights[(a, b)];
            if c != 0.0 {
                m += (&f[a] * d[b].transpose()) * c;
            }
        }
    }
    m
}

/// Generator data derived from a fragment, shared by solver and verifier.
#[derive(Debug, Clone)]
pub struct EmbeddingProblem {
    pub system: String,
    pub ambient_dim: usize,
    /// Orthonormal basis of the state span, as columns.
    pub span: DMatrix<f64>,
    pub projector: DMatrix<f64>,
    pub f: Vec<DVector<f64>>,
    pub d: Vec<DVector<f64>>,
}

impl EmbeddingProblem {
    pub fn span_dim(&self) -> usize {
        self.span.ncols()
    }

    /// Builds the projected dual generators for one system of `fragment`.
    pub fn from_fragment(fragment: &GptFragment, system: &str, tol: f64) -> Result<Self> {
        let spec = fragment.systems.get(system)?;
        let n = spec.dim;
        let states = fragment
            .state_cone_rays
            .get(system)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| Error::Invalid(format!("missing state cone data for `{system}`")))?;
        let effects = fragment
            .effect_cone_rays
            .get(system)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| Error::Invalid(format!("missing effect cone data for `{system}`")))?;
        if let Some(v) = states.iter().chain(effects.iter()).find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                context: format!("cone ray of `{system}`"),
                expected: n,
                got: v.len(),
            });
        }
        let q = orthonormal_span(states, n, tol);
        let k = q.ncols();
        if k == 0 {
            return Err(Error::DegenerateCone("states span {0}".into()));
        }
        if k > MAX_DD_DIM {
            return Err(Error::TooLarge { dim: k, max: MAX_DD_DIM });
        }
        let qt = q.transpose();
        let project = |v: &DVector<f64>| &qt * v;
        let s_hat: Vec<_> = states.iter().map(project).filter(|v| max_abs_vec(v) > tol).collect();
        let e_hat: Vec<_> = effects.iter().map(project).filter(|v| max_abs_vec(v) > tol).collect();
        if e_hat.is_empty() {
            return Err(Error::DegenerateCone("effects vanish on the state span".into()));
        }
        let u_hat = &qt * &spec.unit_effect;

        let f_hat = dual_cone(&ConeDescription::new(k, e_hat)?, tol)?.rays;
        let d_hat = dual_cone(&ConeDescription::new(k, s_hat)?, tol)?.rays;
        let f = f_hat
            .into_iter()
            .map(|v| {
                let uf = u_hat.dot(&v);
                let v = if uf > tol { v / uf } else { v };
                &q * v
            })
            .collect();
        let d = d_hat.into_iter().map(|v| &q * v).collect();
        Ok(Self {
            system: system.to_string(),
            ambient_dim: n,
            projector: &q * &qt,
            span: q,
            f,
            d,
        })
    }

    /// Equality system in span coordinates: one column per pair `(a, b)`,
    /// index `a * |d| + b`; one row per entry of the `k x k` identity.
    fn lp_system(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let k = self.span_dim();
        let qt = self.span.transpose();
        let f_hat: Vec<_> = self.f.iter().map(|v| &qt * v).collect();
        let d_hat: Vec<_> = self.d.iter().map(|v| &qt * v).collect();
        let cols = f_hat.len() * d_hat.len();
        let mut a = vec![vec![0.0; cols]; k * k];
        for (ia, fa) in f_hat.iter().enumerate() {
            for (ib, db) in d_hat.iter().enumerate() {
                let col = ia * d_hat.len() + ib;
                for i in 0..k {
                    for j in 0..k {
                        a[i * k + j][col] = fa[i] * db[j];
                    }
                }
            }
        }
        let mut b = vec![0.0; k * k];
        for i in 0..k {
            b[i * k + i] = 1.0;
        }
        (a, b)
    }
}

/// Rejects embedding into fewer ontic states than the state-span dimension.
pub fn check_embedding_dimension(requested: usize, fragment: &GptFragment, system: &str, tol: f64) -> Result<()> {
    let spec = fragment.systems.get(system)?;
    let states: Vec<_> = fragment
        .state_cone_rays
        .get(system)
        .cloned()
        .unwrap_or_else(|| fragment.states_of(system).map(|s| s.vec.clone()).collect());
    let k = orthonormal_span(&states, spec.dim, tol).ncols();
    if requested < k {
        return Err(Error::Invalid(format!(
            "no embedding into {requested} ontic states: the states span {k} dimensions"
        )));
    }
    Ok(())
}

/// Decides simplex-embeddability of one system of a polyhedral fragment.
pub fn embed_test(fragment: &GptFragment, system: &str, opts: EmbedOptions) -> Result<EmbedOutcome> {
    let problem = EmbeddingProblem::from_fragment(fragment, system, opts.tol)?;
    let (a, b) = problem.lp_system();
    let cols = problem.f.len() * problem.d.len();
    if cols > MAX_LP_COLUMNS {
        return Err(Error::TooLarge {
            dim: cols,
            max: MAX_LP_COLUMNS,
        });
    }

    let solve = |exact: bool| -> Result<Feasibility<f64>> {
        if exact {
            solve_feasibility_exact(&a, &b)
        } else {
            solve_feasibility(&a, &b, 1e-9)
        }
    };
    let mut outcome = finish(&problem, solve(opts.exact)?, opts.tol)?;
    if outcome.is_none() && !opts.exact && cols <= EXACT_MAX_VARS {
        outcome = finish(&problem, solve(true)?, opts.tol)?;
    }
    outcome.ok_or_else(|| {
        Error::Lp("solver answer failed independent verification; retry in exact mode".into())
    })
}

fn finish(problem: &EmbeddingProblem, answer: Feasibility<f64>, tol: f64) -> Result<Option<EmbedOutcome>> {
    let nd = problem.d.len();
    let out = match answer {
        Feasibility::Feasible { x } => {
            let clean: Vec<f64> = x.iter().map(|c| if *c <= 1e-12 { 0.0 } else { *c }).collect();
            let weights = DMatrix::from_row_slice(problem.f.len(), nd, &clean);
            let cert = EmbeddingCertificate::new(
                &problem.system,
                weights,
                problem.f.clone(),
                problem.d.clone(),
                problem.projector.clone(),
            )?;
            EmbedOutcome::Feasible(cert)
        }
        Feasibility::Infeasible { y } => {
            let k = problem.span_dim();
            let y_hat = DMatrix::from_row_slice(k, k, &y);
            let gap = y_hat.trace();
            if gap <= 0.0 {
                return Ok(None);
            }
            let functional = &problem.span * (y_hat / gap) * problem.span.transpose();
            EmbedOutcome::Infeasible(FarkasCertificate {
                system: problem.system.clone(),
                functional,
                gap: 1.0,
            })
        }
    };
    let check = verify_against(problem, &out.certificate(), tol)?;
    Ok(check.valid.then_some(out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub valid: bool,
    /// Human-readable reasons for rejection; empty when valid.
    pub failures: Vec<String>,
    pub residual: f64,
}

/// Re-checks a certificate against a fragment without consulting the LP.
pub fn verify_certificate(cert: &Certificate, fragment: &GptFragment, tol: f64) -> Result<CertificateCheck> {
    let system = match cert {
        Certificate::Embedding(c) => &c.system,
        Certificate::Farkas(c) => &c.system,
    };
    let problem = EmbeddingProblem::from_fragment(fragment, system, tol)?;
    let mut check = verify_against(&problem, cert, tol)?;
    if let Certificate::Embedding(c) = cert {
        // generators must be positive on the fragment's own rays
        let states = &fragment.state_cone_rays[system];
        let effects = &fragment.effect_cone_rays[system];
        for (i, f) in c.f.iter().enumerate() {
            let worst = effects.iter().map(|e| e.dot(f)).fold(f64::INFINITY, f64::min);
            if worst < -tol * (1.0 + max_abs_vec(f)) {
                check.failures.push(format!("f[{i}] is negative on an effect ({worst:.3e})"));
            }
        }
        for (i, d) in c.d.iter().enumerate() {
            let worst = states.iter().map(|s| s.dot(d)).fold(f64::INFINITY, f64::min);
            if worst < -tol * (1.0 + max_abs_vec(d)) {
                check.failures.push(format!("d[{i}] is negative on a state ({worst:.3e})"));
            }
        }
        check.valid = check.failures.is_empty();
    }
    Ok(check)
}

fn verify_against(problem: &EmbeddingProblem, cert: &Certificate, tol: f64) -> Result<CertificateCheck> {
    let n = problem.ambient_dim;
    let mut failures = Vec::new();
    let residual;
    match cert {
        Certificate::Embedding(c) => {
            if c.target.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    context: "certificate target".into(),
                    expected: n,
                    got: c.target.nrows(),
                });
            }
            if c.weights.shape() != (c.f.len(), c.d.len()) {
                return Err(Error::DimensionMismatch {
                    context: "certificate weights".into(),
                    expected: c.f.len() * c.d.len(),
                    got: c.weights.len(),
                });
            }
            if let Some(v) = c.f.iter().chain(c.d.iter()).find(|v| v.len() != n) {
                return Err(Error::DimensionMismatch {
                    context: "certificate generator".into(),
                    expected: n,
                    got: v.len(),
                });
            }
            let min_w = c.weights.iter().cloned().fold(0.0_f64, f64::min);
            if min_w < -tol {
                failures.push(format!("negative weight {min_w:.3e}"));
            }
            let recon = reconstruct(&c.weights, &c.f, &c.d, n);
            let mut scale = 1.0;
            for a in 0..c.f.len() {
                for b in 0..c.d.len() {
                    scale += c.weights[(a, b)].abs() * max_abs_vec(&c.f[a]) * max_abs_vec(&c.d[b]);
                }
            }
            residual = max_diff(&recon, &problem.projector);
            if residual > tol * scale {
                failures.push(format!("reconstruction residual {residual:.3e}"));
            }
            if max_diff(&recon, &c.reconstructed) > tol * scale {
                failures.push("stored reconstruction does not match the weights".into());
            }
            let nonzero = c.weights.iter().filter(|w| **w != 0.0).count();
            if nonzero != c.ontic_count {
                failures.push(format!("ontic_count {} but {nonzero} nonzero weights", c.ontic_count));
            }
        }
        Certificate::Farkas(c) => {
            if c.functional.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    context: "Farkas functional".into(),
                    expected: n,
                    got: c.functional.nrows(),
                });
            }
            let y = &c.functional;
            let gap = (y.transpose() * &problem.projector).trace();
            let ymax = max_abs(y).max(1.0);
            let mut worst = f64::NEG_INFINITY;
            for f in &problem.f {
                let yf = y.transpose() * f;
                for d in &problem.d {
                    let v = yf.dot(d) / (max_abs_vec(f) * max_abs_vec(d));
                    worst = worst.max(v);
                }
            }
            residual = worst.max(0.0);
            if worst > tol * ymax {
                failures.push(format!("functional is positive on a generator pair ({worst:.3e})"));
            }
            if !(c.gap > tol) {
                failures.push(format!("gap {:.3e} is not positive", c.gap));
            }
            if gap < c.gap - tol * ymax || gap <= tol {
                failures.push(format!("<Y, target> = {gap:.3e} below the stated gap {:.3e}", c.gap));
            }
        }
    }
    Ok(CertificateCheck {
        valid: failures.is_empty(),
        failures,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub certificate: EmbeddingCertificate,
    pub initial_count: usize,
    pub achieved_count: usize,
}

/// Best-effort reduction of the number of nonzero terms toward `target_count`.
///
/// First removes terms along null-space directions of the active columns,
/// then tries dropping single terms and re-solving on the remaining support.
/// A step is kept only if the reconstruction residual stays within `tol`.
pub fn reduce_certificate(cert: &EmbeddingCertificate, target_count: usize, tol: f64) -> Reduction {
    let n = cert.target.nrows();
    let nd = cert.d.len();
    let column = |idx: usize| -> DVector<f64> {
        let (a, b) = (idx / nd, idx % nd);
        let m = &cert.f[a] * cert.d[b].transpose();
        DVector::from_iterator(n * n, m.transpose().iter().cloned())
    };
    let target = DVector::from_iterator(n * n, cert.target.transpose().iter().cloned());
    let mut w: Vec<f64> = cert.weights.transpose().iter().cloned().collect();
    let residual_of = |w: &[f64]| -> f64 {
        let mut acc = DVector::zeros(n * n);
        for (i, c) in w.iter().enumerate() {
            if *c != 0.0 {
                acc += column(i) * *c;
            }
        }
        (acc - &target).amax()
    };
    let start = residual_of(&w);
    let budget = start.max(tol);
    let initial = w.iter().filter(|c| **c != 0.0).count();

    // Caratheodory elimination along null directions of the active columns
    loop {
        let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] != 0.0).collect();
        if support.len() <= target_count {
            break;
        }
        let cols: Vec<DVector<f64>> = support.iter().map(|&i| column(i)).collect();
        let ns = null_space(&DMatrix::from_columns(&cols), 1e-10);
        if ns.ncols() == 0 {
            break;
        }
        let mut z = ns.column(0).into_owned();
        if z.iter().all(|v| *v <= 1e-12) {
            z = -z;
        }
        let mut step = f64::INFINITY;
        let mut hit = None;
        for (j, &i) in support.iter().enumerate() {
            if z[j] > 1e-12 {
                let t = w[i] / z[j];
                if t < step {
                    step = t;
                    hit = Some(i);
                }
            }
        }
        let Some(hit) = hit else { break };
        let mut trial = w.clone();
        for (j, &i) in support.iter().enumerate() {
            trial[i] -= step * z[j];
            if trial[i] < 1e-12 {
                trial[i] = 0.0;
            }
        }
        trial[hit] = 0.0;
        if residual_of(&trial) > budget {
            break;
        }
        w = trial;
    }

    // greedy: drop one term and re-solve on the rest
    'outer: loop {
        let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] != 0.0).collect();
        if support.len() <= target_count {
            break;
        }
        let mut order = support.clone();
        order.sort_by(|x, y| w[*x].total_cmp(&w[*y]));
        for drop in order {
            let rest: Vec<usize> = support.iter().cloned().filter(|&i| i != drop).collect();
            let cols: Vec<DVector<f64>> = rest.iter().map(|&i| column(i)).collect();
            let a: Vec<Vec<f64>> = (0..n * n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
            let b: Vec<f64> = target.iter().cloned().collect();
            if let Ok(Feasibility::Feasible { x }) = solve_feasibility(&a, &b, 1e-9) {
                let mut trial = vec![0.0; w.len()];
                for (j, &i) in rest.iter().enumerate() {
                    trial[i] = if x[j] <= 1e-12 { 0.0 } else { x[j] };
                }
                if residual_of(&trial) <= budget {
                    w = trial;
                    continue 'outer;
                }
            }
        }
        break;
    }

    let weights = DMatrix::from_row_slice(cert.f.len(), nd, &w);
    let certificate = EmbeddingCertificate::new(
        cert.system.clone(),
        weights,
        cert.f.clone(),
        cert.d.clone(),
        cert.target.clone(),
    )
    .expect("shapes unchanged");
    let achieved_count = certificate.ontic_count;
    Reduction {
        certificate,
        initial_count: initial,
        achieved_count,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardinalityVerdict {
    pub n_ontic: u64,
    pub gpt_dim: u64,
    pub gamma: f64,
    pub pass: bool,
}

/// A noncontextual model of a GPT needs exactly as many ontic states as the
/// GPT dimension.
pub fn cardinality_check(n_ontic: u64, gpt_dim: u64) -> CardinalityVerdict {
    CardinalityVerdict {
        n_ontic,
        gpt_dim,
        gamma: n_ontic as f64 / gpt_dim.max(1) as f64,
        pass: n_ontic == gpt_dim,
    }
}
