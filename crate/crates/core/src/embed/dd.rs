//! Double-description enumeration of dual cones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{max_abs_vec, rank};

/// Double description is kept to desk-scale dimensions.
pub const MAX_DD_DIM: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConeDescription {
    pub ambient_dim: usize,
    /// Generators.
    pub rays: Vec<DVector<f64>>,
    /// Optional dual generators; `facet . ray >= 0` for every pair.
    pub facets: Option<Vec<DVector<f64>>>,
}

impl ConeDescription {
    pub fn new(ambient_dim: usize, rays: Vec<DVector<f64>>) -> Result<Self> {
        for r in &rays {
            if r.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    context: "cone ray".into(),
                    expected: ambient_dim,
                    got: r.len(),
                });
            }
            if max_abs_vec(r) == 0.0 {
                return Err(Error::DegenerateCone("zero ray".into()));
            }
        }
        Ok(Self {
            ambient_dim,
            rays,
            facets: None,
        })
    }

    /// Largest violation of `facet . ray >= 0`, if facets are present.
    pub fn facet_violation(&self) -> Option<f64> {
        self.facets.as_ref().map(|fs| {
            let mut worst = 0.0_f64;
            for f in fs {
                for r in &self.rays {
                    worst = worst.max(-f.dot(r));
                }
            }
            worst
        })
    }
}

#[derive(Debug, Clone)]
struct Ray {
    v: DVector<f64>,
    /// tight[i] for each processed constraint
    tight: Vec<bool>,
}

fn normalized(v: DVector<f64>) -> DVector<f64> {
    let m = max_abs_vec(&v);
    if m > 0.0 {
        v / m
    } else {
        v
    }
}

/// Generators of `{y : y . x >= 0 for all x in cone(rays)}`.
///
/// Lineality directions of the dual are returned as `+l` and `-l` pairs.
/// The input rays are attached as the facets of the result.
pub fn dual_cone(c: &ConeDescription, tol: f64) -> Result<ConeDescription> {
    let d = c.ambient_dim;
    if d > MAX_DD_DIM {
        return Err(Error::TooLarge { dim: d, max: MAX_DD_DIM });
    }
    if d == 0 {
        return Err(Error::DegenerateCone("ambient dimension 0".into()));
    }
    let constraints: Vec<DVector<f64>> = c
        .rays
        .iter()
        .filter(|r| max_abs_vec(r) > 0.0)
        .map(|r| normalized(r.clone()))
        .collect();
    if constraints.is_empty() {
        return Err(Error::DegenerateCone("cone has no nonzero generators".into()));
    }
    let eps = tol.max(1e-12);

    let mut lineality: Vec<DVector<f64>> = (0..d)
        .map(|i| {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (j, a) in constraints.iter().enumerate() {
        // a lineality direction not orthogonal to `a` becomes a ray
        let pick = lineality
            .iter()
            .enumerate()
            .map(|(i, l)| (i, a.dot(l)))
            .filter(|(_, s)| s.abs() > eps)
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()));
        if let Some((idx, s)) = pick {
            let mut l = lineality.swap_remove(idx);
            if s < 0.0 {
                l = -l;
            }
            let al = s.abs();
            for other in lineality.iter_mut() {
                let f = a.dot(other) / al;
                other.axpy(-f, &l, 1.0);
            }
            for r in rays.iter_mut() {
                let f = a.dot(&r.v) / al;
                r.v.axpy(-f, &l, 1.0);
                r.v = normalized(r.v.clone());
                r.tight.push(true);
            }
            let mut tight = vec![true; j];
            tight.push(false);
            rays.push(Ray {
                v: normalized(l),
                tight,
            });
            continue;
        }

        let vals: Vec<f64> = rays.iter().map(|r| a.dot(&r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > eps).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -eps).collect();
        let pointed_dim = d - lineality.len();

        let mut created = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common: Vec<usize> = (0..j)
                    .filter(|&i| rays[p].tight[i] && rays[n].tight[i])
                    .collect();
                if pointed_dim >= 2 && common.len() + 2 < pointed_dim {
                    continue;
                }
                let dominated = rays.iter().enumerate().any(|(k, r)| {
                    k != p && k != n && common.iter().all(|&i| r.tight[i])
                });
                if dominated {
                    continue;
                }
                if pointed_dim >= 2 {
                    let rows: Vec<DVector<f64>> = common.iter().map(|&i| constraints[i].clone()).collect();
                    let r = if rows.is_empty() {
                        0
                    } else {
                        rank(&DMatrix::from_columns(&rows), 1e-9)
                    };
                    if r + 2 != pointed_dim {
                        continue;
                    }
                }
                let v = normalized(vals[p] * &rays[n].v - vals[n] * &rays[p].v);
                let mut tight: Vec<bool> = (0..j).map(|i| rays[p].tight[i] && rays[n].tight[i]).collect();
                tight.push(true);
                created.push(Ray { v, tight });
            }
        }

        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i] < -eps {
                continue;
            }
            r.tight.push(vals[i].abs() <= eps);
            next.push(r);
        }
        next.extend(created);
        rays = next;
    }

    let mut out: Vec<DVector<f64>> = Vec::new();
    let mut push = |v: DVector<f64>| {
        let v = normalized(v);
        if max_abs_vec(&v) == 0.0 {
            return;
        }
        if !out.iter().any(|w| crate::linalg::max_diff_vec(w, &v) <= 1e-9) {
            out.push(v);
        }
    };
    for r in rays {
        push(r.v);
    }
    for l in lineality {
        push(l.clone());
        push(-l);
    }
    if out.is_empty() {
        return Err(Error::DegenerateCone("dual cone is {0}".into()));
    }
    Ok(ConeDescription {
        ambient_dim: d,
        rays: out,
        facets: Some(c.rays.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::cone_membership;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    fn mutually_contained(a: &[DVector<f64>], b: &[DVector<f64>]) -> bool {
        a.iter().all(|x| cone_membership(b, x, 1e-9).unwrap())
            && b.iter().all(|x| cone_membership(a, x, 1e-9).unwrap())
    }

    #[test]
    fn orthant_is_self_dual() {
        let c = ConeDescription::new(2, vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let d = dual_cone(&c, 1e-9).unwrap();
        assert_eq!(d.rays.len(), 2);
        assert!(mutually_contained(&d.rays, &c.rays));
        assert_eq!(d.facet_violation(), Some(0.0));
    }

    #[test]
    fn single_ray_gives_halfplane() {
        let c = ConeDescription::new(2, vec![v(&[1.0, 1.0])]).unwrap();
        let d = dual_cone(&c, 1e-9).unwrap();
        // halfplane y1 + y2 >= 0: the boundary line in both directions plus an interior ray
        assert!(d.rays.iter().all(|r| r[0] + r[1] >= -1e-12));
        assert!(cone_membership(&d.rays, &v(&[1.0, -1.0]), 1e-9).unwrap());
        assert!(cone_membership(&d.rays, &v(&[-1.0, 1.0]), 1e-9).unwrap());
        assert!(cone_membership(&d.rays, &v(&[1.0, 0.0]), 1e-9).unwrap());
        assert!(cone_membership(&d.rays, &v(&[0.0, 1.0]), 1e-9).unwrap());
        assert!(!cone_membership(&d.rays, &v(&[-1.0, 0.0]), 1e-9).unwrap());
        let dd = dual_cone(&d, 1e-9).unwrap();
        assert!(mutually_contained(&dd.rays, &c.rays));
    }

    #[test]
    fn octahedron_dual_is_cube() {
        let mut rays = Vec::new();
        for i in 1..4 {
            for s in [1.0, -1.0] {
                let mut r = v(&[1.0, 0.0, 0.0, 0.0]);
                r[i] = s;
                rays.push(r);
            }
        }
        let c = ConeDescription::new(4, rays.clone()).unwrap();
        let d = dual_cone(&c, 1e-9).unwrap();
        assert_eq!(d.rays.len(), 8);
        for r in &d.rays {
            assert!((r[0] - 1.0).abs() < 1e-12);
            for i in 1..4 {
                assert!((r[i].abs() - 1.0).abs() < 1e-12);
            }
        }
        // each cube vertex is tight on exactly 3 octahedron rays, each octahedron ray on 4 vertices
        for r in &d.rays {
            assert_eq!(rays.iter().filter(|x| x.dot(r).abs() < 1e-12).count(), 3);
        }
        for x in &rays {
            assert_eq!(d.rays.iter().filter(|r| x.dot(r).abs() < 1e-12).count(), 4);
        }
        let dd = dual_cone(&d, 1e-9).unwrap();
        assert!(mutually_contained(&dd.rays, &rays));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            ConeDescription::new(2, vec![v(&[0.0, 0.0])]),
            Err(Error::DegenerateCone(_))
        ));
        let big = ConeDescription::new(13, vec![DVector::from_element(13, 1.0)]).unwrap();
        assert!(matches!(dual_cone(&big, 1e-9), Err(Error::TooLarge { .. })));
        let whole = ConeDescription::new(1, vec![v(&[1.0]), v(&[-1.0])]).unwrap();
        assert!(matches!(dual_cone(&whole, 1e-9), Err(Error::DegenerateCone(_))));
    }
}
