//! Small dense linear-algebra helpers on `&[f64]` vectors.
//!
//! The hot paths (d = 2, 3) are written out by hand; everything else goes
//! through `nalgebra`.

use nalgebra::{DMatrix, DVector};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|x| x * k).collect()
}

/// `a + k * b`
#[inline]
pub fn axpy(a: &[f64], k: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + k * y).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Vector orthogonal to the `d - 1` rows of `rows` (each of length `d`),
/// with norm equal to the `(d-1)`-volume of the parallelotope they span.
pub fn generalized_cross(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows.len() + 1;
    debug_assert!(rows.iter().all(|r| r.len() == d));
    match d {
        1 => vec![1.0],
        2 => vec![rows[0][1], -rows[0][0]],
        3 => {
            let (a, b) = (&rows[0], &rows[1]);
            vec![
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        }
        _ => (0..d)
            .map(|skip| {
                let minor = DMatrix::from_fn(d - 1, d - 1, |r, c| {
                    rows[r][if c < skip { c } else { c + 1 }]
                });
                let sign = if skip % 2 == 0 { 1.0 } else { -1.0 };
                sign * minor.determinant()
            })
            .collect(),
    }
}

/// Solves `A x = b` for square `A` given by rows. Returns `None` when
/// `|det A|` is at most `det_tol` (rows are expected to be unit vectors, so
/// the determinant is scale free).
pub fn solve_square(rows: &[&[f64]], b: &[f64], det_tol: f64) -> Option<Vec<f64>> {
    let d = rows.len();
    match d {
        1 => {
            let a = rows[0][0];
            (a.abs() > det_tol).then(|| vec![b[0] / a])
        }
        2 => {
            let (a, c) = (rows[0], rows[1]);
            let det = a[0] * c[1] - a[1] * c[0];
            if det.abs() <= det_tol {
                return None;
            }
            Some(vec![
                (b[0] * c[1] - a[1] * b[1]) / det,
                (a[0] * b[1] - b[0] * c[0]) / det,
            ])
        }
        3 => {
            let (r0, r1, r2) = (rows[0], rows[1], rows[2]);
            let c0 = [
                r1[1] * r2[2] - r1[2] * r2[1],
                r1[2] * r2[0] - r1[0] * r2[2],
                r1[0] * r2[1] - r1[1] * r2[0],
            ];
            let det = r0[0] * c0[0] + r0[1] * c0[1] + r0[2] * c0[2];
            if det.abs() <= det_tol {
                return None;
            }
            let c1 = [
                r2[1] * r0[2] - r2[2] * r0[1],
                r2[2] * r0[0] - r2[0] * r0[2],
                r2[0] * r0[1] - r2[1] * r0[0],
            ];
            let c2 = [
                r0[1] * r1[2] - r0[2] * r1[1],
                r0[2] * r1[0] - r0[0] * r1[2],
                r0[0] * r1[1] - r0[1] * r1[0],
            ];
            // x = (b0 c0 + b1 c1 + b2 c2) / det  (inverse = adjugate / det)
            Some(
                (0..3)
                    .map(|k| (b[0] * c0[k] + b[1] * c1[k] + b[2] * c2[k]) / det)
                    .collect(),
            )
        }
        _ => {
            let a = DMatrix::from_fn(d, d, |r, c| rows[r][c]);
            let lu = a.lu();
            if lu.determinant().abs() <= det_tol {
                return None;
            }
            lu.solve(&DVector::from_column_slice(b))
                .map(|x| x.iter().copied().collect())
        }
    }
}

/// Least-squares view of an `m x d` system `A x = b`.
pub struct AffineSolution {
    /// Numerical rank of `A`.
    pub rank: usize,
    /// Minimum-norm least-squares solution.
    pub x: Vec<f64>,
    /// `|A x - b|` at the minimum-norm solution.
    pub residual: f64,
    /// Orthonormal basis of the null space of `A` (`d - rank` vectors).
    pub null_space: Vec<Vec<f64>>,
}

pub fn solve_affine(rows: &[&[f64]], b: &[f64], rank_tol: f64) -> AffineSolution {
    let m = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    // Pad to a square matrix so the SVD exposes a full right basis.
    let n = m.max(d);
    let a = DMatrix::from_fn(n, d, |r, c| if r < m { rows[r][c] } else { 0.0 });
    let mut rhs = DVector::zeros(n);
    for (i, v) in b.iter().enumerate() {
        rhs[i] = *v;
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut x = DVector::zeros(d);
    let mut rank = 0;
    let mut null_space = Vec::new();
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        let v_row = v_t.row(k);
        if sigma > rank_tol {
            rank += 1;
            let coeff = u.column(k).dot(&rhs) / sigma;
            x += v_row.transpose() * coeff;
        } else {
            null_space.push(v_row.iter().copied().collect());
        }
    }
    let residual = (&a * &x - rhs).norm();
    AffineSolution {
        rank,
        x: x.iter().copied().collect(),
        residual,
        null_space,
    }
}

/// Orthonormalizes `vectors` (Gram-Schmidt), dropping near-dependent ones.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let c = dot(&w, b);
            w = axpy(&w, -c, b);
        }
        let n = norm(&w);
        if n > tol {
            basis.push(scale(&w, 1.0 / n));
        }
    }
    basis
}

/// Volume of the unit ball in dimension `k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    // κ_0 = 1, κ_1 = 2, κ_k = κ_{k-2} * 2π / k
    let mut vol = [1.0, 2.0];
    for j in 2..=k {
        vol[j % 2] *= 2.0 * std::f64::consts::PI / j as f64;
    }
    vol[k % 2]
}
