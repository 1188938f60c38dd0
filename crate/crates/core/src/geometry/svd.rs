//! One-sided Jacobi SVD for 3x3 matrices and the nearest-rotation projection
//! built on it.

use super::rotation::{det3, Rotation};
use crate::error::{Error, Result};

type Mat3 = [[f64; 3]; 3];

/// `M = U · diag(sigma) · Vᵀ` with `sigma` sorted in descending order.
///
/// `V` is always a proper orthogonal matrix product of Givens rotations and
/// column swaps. Columns of `U` belonging to zero singular values are
/// completed to an orthonormal basis.
#[derive(Debug, Clone, Copy)]
pub struct Svd3 {
    pub u: Mat3,
    pub sigma: [f64; 3],
    pub v: Mat3,
}

const MAX_SWEEPS: usize = 64;

pub fn svd3(m: &Mat3) -> Svd3 {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
            for row in &a {
                alpha += row[p] * row[p];
                beta += row[q] * row[q];
                gamma += row[p] * row[q];
            }
            if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            for mat in [&mut a, &mut v] {
                for row in mat.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma = [0.0; 3];
    for (c, s) in sigma.iter_mut().enumerate() {
        *s = (a[0][c] * a[0][c] + a[1][c] * a[1][c] + a[2][c] * a[2][c]).sqrt();
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let col = |mat: &Mat3, c: usize| [mat[0][c], mat[1][c], mat[2][c]];
    let mut u_cols = [[0.0; 3]; 3];
    let mut v_cols = [[0.0; 3]; 3];
    let mut sorted = [0.0; 3];
    for (k, &c) in order.iter().enumerate() {
        sorted[k] = sigma[c];
        v_cols[k] = col(&v, c);
        u_cols[k] = col(&a, c);
    }

    let tiny = sorted[0] * 1e-13;
    for k in 0..3 {
        if sorted[k] > tiny && sorted[k] > 0.0 {
            let inv = 1.0 / sorted[k];
            u_cols[k] = u_cols[k].map(|x| x * inv);
        } else {
            u_cols[k] = complete_basis(&u_cols[..k]);
        }
    }

    let from_cols = |cols: &[[f64; 3]; 3]| {
        let mut m = [[0.0; 3]; 3];
        for (c, column) in cols.iter().enumerate() {
            for r in 0..3 {
                m[r][c] = column[r];
            }
        }
        m
    };
    Svd3 {
        u: from_cols(&u_cols),
        sigma: sorted,
        v: from_cols(&v_cols),
    }
}

/// Unit vector orthogonal to the given (orthonormal) vectors.
fn complete_basis(existing: &[[f64; 3]]) -> [f64; 3] {
    match existing {
        [a, b, ..] => normalize(cross(*a, *b)),
        [a] => {
            let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            normalize(cross(*a, helper))
        }
        [] => [1.0, 0.0, 0.0],
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    a.map(|x| x / n)
}

/// Nearest rotation to `m` in Frobenius norm:
/// `U · diag(1, 1, det(U·Vᵀ)) · Vᵀ`.
///
/// Fails when two or more singular values vanish, since the minimizer is
/// then not unique.
pub fn procrustes_so3(m: &Mat3) -> Result<Rotation> {
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite matrix {m:?}")));
    }
    let Svd3 { u, sigma, v } = svd3(m);
    if sigma[0] == 0.0 || sigma[1] <= sigma[0] * 1e-12 {
        return Err(Error::Degenerate(format!(
            "rank < 2 (singular values {sigma:?}); nearest rotation is not unique"
        )));
    }
    let d = if det3(&u) * det3(&v) < 0.0 { -1.0 } else { 1.0 };
    let scale = [1.0, 1.0, d];
    let mut r = [[0.0; 3]; 3];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            *out = (0..3).map(|k| u[i][k] * scale[k] * v[j][k]).sum();
        }
    }
    Ok(Rotation::from_matrix_unchecked(r))
}
