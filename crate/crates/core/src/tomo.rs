//! Transition matrices over spanning states/effects, the identity
//! decomposition, conversion to standard form, and tomographic locality.
//!
//! For a process `T: A -> B` with spanning states `P_j` of `A` and spanning
//! effects `E_k` of `B`, the raw transition matrix is `N_T[k][j] = E_k T P_j`.
//! With `M_1 = N_1^{-1}` for the identity on each side,
//! `M_T = M_1B N_T M_1A` and the standard form is `M_T N_1A`, which composes
//! by ordinary matrix product.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gptcore::{GptTransformation, SystemSpec};
use crate::linalg::{inverse_with_condition, kron, kron_vec, max_abs, max_diff, rank};

/// Spanning states (vectors) and spanning effects (covectors) of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningSet {
    pub system: String,
    pub dim: usize,
    pub states: Vec<DVector<f64>>,
    pub effects: Vec<DVector<f64>>,
}

impl SpanningSet {
    pub fn new(system: &SystemSpec, states: Vec<DVector<f64>>, effects: Vec<DVector<f64>>) -> Result<Self> {
        for v in states.iter().chain(effects.iter()) {
            if v.len() != system.dim {
                return Err(Error::DimensionMismatch {
                    context: format!("spanning set of `{}`", system.id),
                    expected: system.dim,
                    got: v.len(),
                });
            }
        }
        Ok(Self {
            system: system.id.clone(),
            dim: system.dim,
            states,
            effects,
        })
    }

    /// Product spanning set, row-major like [`crate::gptcore::compose_par`].
    pub fn product(a: &SpanningSet, b: &SpanningSet, system: &SystemSpec) -> Result<Self> {
        let states = a
            .states
            .iter()
            .flat_map(|x| b.states.iter().map(move |y| kron_vec(x, y)))
            .collect();
        let effects = a
            .effects
            .iter()
            .flat_map(|x| b.effects.iter().map(move |y| kron_vec(x, y)))
            .collect();
        Self::new(system, states, effects)
    }

    /// Columns are the spanning states.
    pub fn state_matrix(&self) -> DMatrix<f64> {
        if self.states.is_empty() {
            return DMatrix::zeros(self.dim, 0);
        }
        DMatrix::from_columns(&self.states)
    }

    /// Rows are the spanning effects.
    pub fn effect_matrix(&self) -> DMatrix<f64> {
        if self.effects.is_empty() {
            return DMatrix::zeros(0, self.dim);
        }
        DMatrix::from_columns(&self.effects).transpose()
    }

    /// Rejects sets that are not tomographically complete.
    fn check_complete(&self) -> Result<()> {
        let rs = rank(&self.state_matrix(), 1e-10);
        if rs < self.dim || self.states.len() != self.dim {
            return Err(Error::Singular {
                rank: rs.min(self.states.len()),
                dim: self.dim,
            });
        }
        let re = rank(&self.effect_matrix(), 1e-10);
        if re < self.dim || self.effects.len() != self.dim {
            return Err(Error::Singular {
                rank: re.min(self.effects.len()),
                dim: self.dim,
            });
        }
        Ok(())
    }

    /// `N_1[i][j] = E_i . P_j`.
    pub fn identity_transition(&self) -> DMatrix<f64> {
        self.effect_matrix() * self.state_matrix()
    }

    /// Standard-form coordinates of a state: `M_1 (E s)`, i.e. the
    /// coefficients of `s` in the spanning states.
    pub fn state_coordinates(&self, s: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_complete()?;
        let (m, _) = inverse_with_condition(&self.identity_transition())?;
        Ok(m * (self.effect_matrix() * s))
    }

    /// Standard-form coordinates of an effect: its values `e . P_j`.
    pub fn effect_coordinates(&self, e: &DVector<f64>) -> DVector<f64> {
        self.state_matrix().transpose() * e
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    /// `E_k T P_j`.
    pub raw_n: DMatrix<f64>,
    /// `M_1B N_T M_1A`.
    pub m: DMatrix<f64>,
    /// `M N_1A`.
    pub standard: DMatrix<f64>,
    pub n_id_in: DMatrix<f64>,
    pub n_id_out: DMatrix<f64>,
    pub m_id_in: DMatrix<f64>,
    pub m_id_out: DMatrix<f64>,
    /// 1-norm condition numbers of `N_1A` and `N_1B`.
    pub cond_in: f64,
    pub cond_out: f64,
}

impl TransitionMatrix {
    /// Builds the representation from raw statistics only.
    pub fn from_statistics(raw_n: DMatrix<f64>, n_id_in: DMatrix<f64>, n_id_out: DMatrix<f64>) -> Result<Self> {
        if raw_n.shape() != (n_id_out.nrows(), n_id_in.ncols()) {
            return Err(Error::DimensionMismatch {
                context: "raw transition matrix".into(),
                expected: n_id_out.nrows() * n_id_in.ncols(),
                got: raw_n.len(),
            });
        }
        let (m_id_in, cond_in) = inverse_with_condition(&n_id_in)?;
        let (m_id_out, cond_out) = inverse_with_condition(&n_id_out)?;
        let m = &m_id_out * &raw_n * &m_id_in;
        let standard = &m * &n_id_in;
        Ok(Self {
            raw_n,
            m,
            standard,
            n_id_in,
            n_id_out,
            m_id_in,
            m_id_out,
            cond_in,
            cond_out,
        })
    }
}

/// Transition matrix of `t` relative to the given spanning sets.
pub fn transition_matrix(t: &GptTransformation, input: &SpanningSet, output: &SpanningSet) -> Result<TransitionMatrix> {
    if input.system != t.in_system.id || output.system != t.out_system.id {
        return Err(Error::SystemMismatch(format!(
            "spanning sets for `{}`->`{}` used with `{}`->`{}`",
            input.system, output.system, t.in_system.id, t.out_system.id
        )));
    }
    input.check_complete()?;
    output.check_complete()?;
    let raw = output.effect_matrix() * &t.mat * input.state_matrix();
    TransitionMatrix::from_statistics(raw, input.identity_transition(), output.identity_transition())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityDecomposition {
    pub holds: bool,
    pub residual: f64,
    pub cond: f64,
    /// `sum_ij M[j][i] P_j E_i`.
    pub reconstruction: DMatrix<f64>,
}

/// Checks `1 = sum_ij [M_1]_i^j |P_j><E_i|` on the GPT vector space.
pub fn identity_decomposition_check(set: &SpanningSet, tol: f64) -> Result<IdentityDecomposition> {
    set.check_complete()?;
    let (m, cond) = inverse_with_condition(&set.identity_transition())?;
    let mut recon = DMatrix::zeros(set.dim, set.dim);
    for (i, e) in set.effects.iter().enumerate() {
        for (j, p) in set.states.iter().enumerate() {
            let c = m[(j, i)];
            if c != 0.0 {
                recon += c * p * e.transpose();
            }
        }
    }
    let residual = max_diff(&recon, &DMatrix::identity(set.dim, set.dim));
    Ok(IdentityDecomposition {
        holds: residual <= tol,
        residual,
        cond,
        reconstruction: recon,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawComposition {
    /// `M_T' N_1B M_T`.
    pub m: DMatrix<f64>,
    /// Max-norm gap to the standard-form route.
    pub residual: f64,
}

/// Composes in the raw `M` representation (which needs the `N_1B` sandwich)
/// and cross-checks against the product of standard forms.
pub fn compose_raw(tm2: &TransitionMatrix, tm1: &TransitionMatrix, tol: f64) -> Result<RawComposition> {
    if tm1.n_id_out.shape() != tm2.n_id_in.shape() || max_diff(&tm1.n_id_out, &tm2.n_id_in) > tol {
        return Err(Error::Invalid(
            "basis mismatch: output spanning set of the first process differs from the input set of the second".into(),
        ));
    }
    let m = &tm2.m * &tm1.n_id_out * &tm1.m;
    let standard = &tm2.standard * &tm1.standard;
    let m_std = standard * &tm1.m_id_in;
    let residual = max_diff(&m, &m_std);
    let scale = 1.0 + max_abs(&m);
    if residual > tol * scale {
        return Err(Error::Inconsistent(format!(
            "raw and standard composition disagree by {residual:.3e}"
        )));
    }
    Ok(RawComposition { m, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalityVerdict {
    pub tomographically_local: bool,
    pub local_parameters: u64,
    pub joint_parameters: u64,
    /// `joint - local`; positive means local statistics under-determine.
    pub deficit: i64,
}

/// Dimension-counting test: local iff `dim_joint == dim_a * dim_b`.
pub fn tomographic_locality_check(dim_a: u64, dim_b: u64, dim_joint: u64) -> LocalityVerdict {
    let local = dim_a * dim_b;
    LocalityVerdict {
        tomographically_local: local == dim_joint,
        local_parameters: local,
        joint_parameters: dim_joint,
        deficit: dim_joint as i64 - local as i64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairingVerdict {
    pub joint_rank: usize,
    pub product_rank: usize,
    pub tomographically_local: bool,
}

/// Fragment-level check: local product effects must separate the span of the
/// joint states, i.e. the product-pairing matrix has full rank on that span.
pub fn product_pairing_rank(
    joint_states: &[DVector<f64>],
    effects_a: &[DVector<f64>],
    effects_b: &[DVector<f64>],
    tol: f64,
) -> Result<PairingVerdict> {
    if joint_states.is_empty() {
        return Err(Error::Invalid("no joint states".into()));
    }
    let d = joint_states[0].len();
    let products: Vec<DVector<f64>> = effects_a
        .iter()
        .flat_map(|a| effects_b.iter().map(move |b| kron_vec(a, b)))
        .collect();
    if let Some(p) = products.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            context: "product effect".into(),
            expected: d,
            got: p.len(),
        });
    }
    let states = DMatrix::from_columns(joint_states);
    let pairing = DMatrix::from_columns(&products).transpose() * &states;
    let joint_rank = rank(&states, tol);
    let product_rank = rank(&pairing, tol);
    Ok(PairingVerdict {
        joint_rank,
        product_rank,
        tomographically_local: joint_rank == product_rank,
    })
}

/// Standard form of `t1 (x) t2` from the factors' standard forms.
pub fn standard_par(a: &TransitionMatrix, b: &TransitionMatrix) -> DMatrix<f64> {
    kron(&a.standard, &b.standard)
}
