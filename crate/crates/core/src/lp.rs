//! Dense phase-1 simplex for equality-form feasibility problems.
//!
//! Solves `A x = b, x >= 0` and returns either a feasible point or a Farkas
//! vector `y` with `A^T y <= 0` and `b^T y > 0`. The equality rows are
//! row-reduced first, so rank-deficient systems are handled and an
//! inconsistent row yields its own Farkas vector directly. Pivoting follows
//! Bland's rule, which rules out cycling.
//!
//! The solver is generic over [`LpScalar`]: `f64` with a tolerance, or
//! `BigRational` for exact arithmetic.

use std::fmt::Debug;

use nalgebra::DVector;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational mode is refused beyond this many variables.
pub const EXACT_MAX_VARS: usize = 200;

const MAX_PIVOTS: usize = 200_000;

pub trait LpScalar: Clone + Debug + PartialOrd + Signed + Zero + One {
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
}

impl LpScalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
    }
    fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<F> {
    Feasible { x: Vec<F> },
    /// `A^T y <= 0` and `b^T y > 0`.
    Infeasible { y: Vec<F> },
}

impl<F: LpScalar> Feasibility<F> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Row-reduced system `R x = beta` where `R = L A`, `beta = L b`.
struct Reduced<F> {
    rows: Vec<Vec<F>>,
    rhs: Vec<F>,
    combos: Vec<Vec<F>>,
}

enum Reduction<F> {
    Ok(Reduced<F>),
    Inconsistent(Vec<F>),
}

fn reduce_rows<F: LpScalar>(a: &[Vec<F>], b: &[F], eps: &F) -> Reduction<F> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut rows: Vec<Vec<F>> = a.to_vec();
    let mut rhs: Vec<F> = b.to_vec();
    let mut combos: Vec<Vec<F>> = (0..m)
        .map(|i| {
            let mut e = vec![F::zero(); m];
            e[i] = F::one();
            e
        })
        .collect();

    let mut pivot_row = 0;
    for col in 0..n {
        if pivot_row == m {
            break;
        }
        // partial pivoting on magnitude
        let mut best = None;
        let mut best_val = eps.clone();
        for (r, row) in rows.iter().enumerate().skip(pivot_row) {
            let v = row[col].abs();
            if v > best_val {
                best_val = v;
                best = Some(r);
            }
        }
        let Some(p) = best else { continue };
        rows.swap(pivot_row, p);
        rhs.swap(pivot_row, p);
        combos.swap(pivot_row, p);
        let piv = rows[pivot_row][col].clone();
        for r in 0..m {
            if r == pivot_row || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone() / piv.clone();
            let (src, dst) = if r < pivot_row {
                let (lo, hi) = rows.split_at_mut(pivot_row);
                (&hi[0], &mut lo[r])
            } else {
                let (lo, hi) = rows.split_at_mut(r);
                (&lo[pivot_row], &mut hi[0])
            };
            for c in col..n {
                if !src[c].is_zero() {
                    dst[c] = dst[c].clone() - f.clone() * src[c].clone();
                }
            }
            dst[col] = F::zero();
            rhs[r] = rhs[r].clone() - f.clone() * rhs[pivot_row].clone();
            let (csrc, cdst) = if r < pivot_row {
                let (lo, hi) = combos.split_at_mut(pivot_row);
                (&hi[0], &mut lo[r])
            } else {
                let (lo, hi) = combos.split_at_mut(r);
                (&lo[pivot_row], &mut hi[0])
            };
            for c in 0..m {
                if !csrc[c].is_zero() {
                    cdst[c] = cdst[c].clone() - f.clone() * csrc[c].clone();
                }
            }
        }
        pivot_row += 1;
    }

    // rows below the pivots have vanished in A; their rhs must vanish too
    let mut worst: Option<usize> = None;
    let mut worst_val = eps.clone();
    for r in pivot_row..m {
        let v = rhs[r].abs();
        if v > worst_val {
            worst_val = v;
            worst = Some(r);
        }
    }
    if let Some(r) = worst {
        let sign = if rhs[r].is_negative() {
            -F::one()
        } else {
            F::one()
        };
        let y = combos[r].iter().map(|c| c.clone() * sign.clone()).collect();
        return Reduction::Inconsistent(y);
    }
    rows.truncate(pivot_row);
    rhs.truncate(pivot_row);
    combos.truncate(pivot_row);
    Reduction::Ok(Reduced { rows, rhs, combos })
}

/// Decide feasibility of `A x = b, x >= 0`.
///
/// `eps` is the pivot/feasibility tolerance; pass zero for exact scalars.
pub fn solve_feasibility<F: LpScalar>(a: &[Vec<F>], b: &[F], eps: F) -> Result<Feasibility<F>> {
    let m = a.len();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            context: "lp rhs".into(),
            expected: m,
            got: b.len(),
        });
    }
    let n = a.first().map_or(0, |r| r.len());
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("ragged constraint matrix".into()));
    }

    let mut red = match reduce_rows(a, b, &eps) {
        Reduction::Inconsistent(y) => return Ok(Feasibility::Infeasible { y }),
        Reduction::Ok(r) => r,
    };
    let r = red.rows.len();
    if r == 0 {
        return Ok(Feasibility::Feasible {
            x: vec![F::zero(); n],
        });
    }
    for i in 0..r {
        if red.rhs[i].is_negative() {
            red.rhs[i] = -red.rhs[i].clone();
            for v in red.rows[i].iter_mut() {
                *v = -v.clone();
            }
            for v in red.combos[i].iter_mut() {
                *v = -v.clone();
            }
        }
    }

    // tableau: structural | artificial | rhs
    let width = n + r + 1;
    let mut tab: Vec<Vec<F>> = (0..r)
        .map(|i| {
            let mut row = Vec::with_capacity(width);
            row.extend(red.rows[i].iter().cloned());
            row.extend((0..r).map(|k| if k == i { F::one() } else { F::zero() }));
            row.push(red.rhs[i].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (0..r).map(|i| n + i).collect();
    // reduced costs of the phase-1 objective (sum of artificials)
    let mut cost = vec![F::zero(); width];
    for row in &tab {
        for j in 0..n {
            cost[j] = cost[j].clone() - row[j].clone();
        }
        cost[width - 1] = cost[width - 1].clone() - row[width - 1].clone();
    }

    let mut pivots = 0;
    loop {
        let Some(enter) = (0..n + r).find(|&j| cost[j] < -eps.clone()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio: Option<F> = None;
        for i in 0..r {
            if tab[i][enter] > eps {
                let ratio = tab[i][width - 1].clone() / tab[i][enter].clone();
                let better = match &best_ratio {
                    None => true,
                    Some(br) => {
                        ratio < *br || (ratio == *br && basis[i] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best_ratio = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(p) = leave else {
            return Err(Error::Lp("unbounded phase-1 direction".into()));
        };
        pivot(&mut tab, &mut cost, p, enter);
        basis[p] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Lp(
                "pivot stall; retry in exact rational mode".into(),
            ));
        }
    }

    let objective = -cost[width - 1].clone();
    if objective > eps {
        // y_r = c_B^T B^{-1}, read off the artificial block
        let mut y_r = vec![F::zero(); r];
        for (i, row) in tab.iter().enumerate() {
            if basis[i] >= n {
                for k in 0..r {
                    y_r[k] = y_r[k].clone() + row[n + k].clone();
                }
            }
        }
        let mut y = vec![F::zero(); m];
        for (k, yk) in y_r.iter().enumerate() {
            for (i, l) in red.combos[k].iter().enumerate() {
                y[i] = y[i].clone() + yk.clone() * l.clone();
            }
        }
        return Ok(Feasibility::Infeasible { y });
    }
    let mut x = vec![F::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab[i][width - 1].clone();
        }
    }
    Ok(Feasibility::Feasible { x })
}

fn pivot<F: LpScalar>(tab: &mut [Vec<F>], cost: &mut [F], p: usize, q: usize) {
    let width = tab[p].len();
    let piv = tab[p][q].clone();
    for c in 0..width {
        if !tab[p][c].is_zero() {
            tab[p][c] = tab[p][c].clone() / piv.clone();
        }
    }
    tab[p][q] = F::one();
    let prow = tab[p].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == p || row[q].is_zero() {
            continue;
        }
        let f = row[q].clone();
        for c in 0..width {
            if !prow[c].is_zero() {
                row[c] = row[c].clone() - f.clone() * prow[c].clone();
            }
        }
        row[q] = F::zero();
    }
    if !cost[q].is_zero() {
        let f = cost[q].clone();
        for c in 0..width {
            if !prow[c].is_zero() {
                cost[c] = cost[c].clone() - f.clone() * prow[c].clone();
            }
        }
        cost[q] = F::zero();
    }
}

/// Converts an `f64` system to exact rationals and solves it exactly.
pub fn solve_feasibility_exact(a: &[Vec<f64>], b: &[f64]) -> Result<Feasibility<f64>> {
    let n = a.first().map_or(0, |r| r.len());
    if n > EXACT_MAX_VARS {
        return Err(Error::TooLarge {
            dim: n,
            max: EXACT_MAX_VARS,
        });
    }
    let aq: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_f64(*x)).collect())
        .collect();
    let bq: Vec<BigRational> = b.iter().map(|x| BigRational::from_f64(*x)).collect();
    Ok(match solve_feasibility(&aq, &bq, BigRational::zero())? {
        Feasibility::Feasible { x } => Feasibility::Feasible {
            x: x.iter().map(LpScalar::to_f64).collect(),
        },
        Feasibility::Infeasible { y } => Feasibility::Infeasible {
            y: y.iter().map(LpScalar::to_f64).collect(),
        },
    })
}

/// Is `x` a nonnegative combination of `rays` (within `tol`)?
pub fn cone_membership(rays: &[DVector<f64>], x: &DVector<f64>, tol: f64) -> Result<bool> {
    let d = x.len();
    if rays.is_empty() {
        return Ok(x.iter().all(|v| v.abs() <= tol));
    }
    if let Some(r) = rays.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            context: "cone ray".into(),
            expected: d,
            got: r.len(),
        });
    }
    let a: Vec<Vec<f64>> = (0..d)
        .map(|i| rays.iter().map(|r| r[i]).collect())
        .collect();
    let b: Vec<f64> = x.iter().cloned().collect();
    match solve_feasibility(&a, &b, tol.min(1e-9))? {
        Feasibility::Infeasible { .. } => Ok(false),
        Feasibility::Feasible { x: w } => {
            let mut recon = DVector::zeros(d);
            for (wi, r) in w.iter().zip(rays) {
                recon.axpy(*wi, r, 1.0);
            }
            let scale = 1.0 + x.amax();
            Ok(crate::linalg::max_diff_vec(&recon, x) <= tol.max(1e-9) * scale
                && w.iter().all(|v| *v >= -tol))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_farkas(a: &[Vec<f64>], b: &[f64], y: &[f64]) {
        let by: f64 = b.iter().zip(y).map(|(b, y)| b * y).sum();
        assert!(by > 1e-9, "b^T y = {by}");
        for j in 0..a[0].len() {
            let col: f64 = a.iter().zip(y).map(|(row, y)| row[j] * y).sum();
            assert!(col <= 1e-9, "A^T y [{j}] = {col}");
        }
    }

    #[test]
    fn simple_feasible() {
        let a = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let b = vec![1.0, 1.0];
        match solve_feasibility(&a, &b, 1e-12).unwrap() {
            Feasibility::Feasible { x } => {
                assert!(x.iter().all(|v| *v >= 0.0));
                assert!((x[0] + x[1] - 1.0).abs() < 1e-12);
                assert!((x[1] + x[2] - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_is_infeasible_with_certificate() {
        let a = vec![vec![1.0, 2.0], vec![1.0, 1.0]];
        let b = vec![-1.0, 0.5];
        match solve_feasibility(&a, &b, 1e-12).unwrap() {
            Feasibility::Infeasible { y } => check_farkas(&a, &b, &y),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_rows_give_certificate() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let b = vec![1.0, 3.0];
        match solve_feasibility(&a, &b, 1e-12).unwrap() {
            Feasibility::Infeasible { y } => check_farkas(&a, &b, &y),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let a = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let b = vec![0.5, 0.5, 2.0];
        assert!(solve_feasibility(&a, &b, 1e-12).unwrap().is_feasible());
    }

    #[test]
    fn exact_mode_agrees() {
        let a = vec![vec![1.0, 2.0, -1.0], vec![3.0, -1.0, 0.5]];
        let b = vec![1.0, 2.0];
        let f = solve_feasibility(&a, &b, 1e-12).unwrap();
        let e = solve_feasibility_exact(&a, &b).unwrap();
        assert_eq!(f.is_feasible(), e.is_feasible());
        let b2 = vec![-1.0, -2.0];
        let a2 = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        match solve_feasibility_exact(&a2, &b2).unwrap() {
            Feasibility::Infeasible { y } => check_farkas(&a2, &b2, &y),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn membership() {
        let rays = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![1.0, 1.0]),
        ];
        assert!(cone_membership(&rays, &DVector::from_vec(vec![2.0, 1.0]), 1e-9).unwrap());
        assert!(!cone_membership(&rays, &DVector::from_vec(vec![0.0, 1.0]), 1e-9).unwrap());
    }
}
