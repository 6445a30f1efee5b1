//! Dense linear algebra helpers on complex matrices: matrix exponential,
//! Hermitian and general eigendecompositions, Gram-Schmidt, norms.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// Largest 1-norms for which the degree-m diagonal Pade approximant is
// accurate to double precision without scaling.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA13: f64 = 5.371920351148152;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Induced 1-norm (max column sum of moduli).
pub fn norm_1(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Induced ∞-norm (max row sum of moduli).
pub fn norm_inf(a: &CMatrix) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn norm_2(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn hermitian_defect(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

fn is_real(a: &CMatrix) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

/// Matrix exponential by scaling and squaring with diagonal Pade approximants
/// of degree 3, 5, 7, 9 or 13.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm of a non-square matrix");
    let norm = norm_1(a);
    if !norm.is_finite() {
        return Err(Error::Overflow);
    }
    let eye = identity(n);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let a2 = a * a;
            let mut u = CMatrix::zeros(n, n);
            let mut v = CMatrix::zeros(n, n);
            let mut power = eye.clone();
            for k in 0..=m / 2 {
                v += &power * real(coeffs[2 * k]);
                u += &power * real(coeffs[2 * k + 1]);
                power = &power * &a2;
            }
            let u = a * u;
            return pade_quotient(&u, &v).and_then(check_finite);
        }
    }
    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    let scaled = a * real(2f64.powi(-s));
    let b = &PADE13;
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]));
    let u = &scaled
        * (inner_u
            + &a6 * real(b[7])
            + &a4 * real(b[5])
            + &a2 * real(b[3])
            + &eye * real(b[1]));
    let inner_v = &a6 * (&a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]));
    let v = inner_v + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + &eye * real(b[0]);
    let mut r = pade_quotient(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
        if !r.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Overflow);
        }
    }
    check_finite(r)
}

fn pade_quotient(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let denom = v - u;
    let numer = v + u;
    denom.lu().solve(&numer).ok_or(Error::Overflow)
}

fn check_finite(m: CMatrix) -> Result<CMatrix> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(m)
    } else {
        Err(Error::Overflow)
    }
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, columns
/// of the returned matrix are the orthonormal eigenvectors. Real input is
/// routed through the real symmetric solver.
pub fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let (values, vectors): (Vec<f64>, CMatrix) = if is_real(a) {
        let re = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)].re + a[(j, i)].re));
        let eig = SymmetricEigen::try_new(re, 1e-15, 0)
            .ok_or_else(|| Error::ConvergenceFailure("real symmetric eigensolver".into()))?;
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(real),
        )
    } else {
        let herm = (a + a.adjoint()) * real(0.5);
        let eig = SymmetricEigen::try_new(herm, 1e-15, 0)
            .ok_or_else(|| Error::ConvergenceFailure("hermitian eigensolver".into()))?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, k| vectors[(r, order[k])]);
    Ok((sorted_values, sorted_vectors))
}

/// Eigendecomposition of a general square matrix through the complex Schur
/// form `A = Q T Qᴴ`. Eigenvectors are unit-norm columns, returned in the
/// order of the Schur diagonal.
pub fn general_eigen(a: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let schur = Schur::try_new(a.clone(), 1e-15, 100 * n.max(10))
        .ok_or_else(|| Error::ConvergenceFailure("complex Schur iteration".into()))?;
    let (q, t) = schur.unpack();
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let mut x = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = real(1.0);
        for j in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for l in j + 1..=k {
                acc += t[(j, l)] * x[(l, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < f64::EPSILON * scale {
                denom = real(f64::EPSILON * scale);
            }
            x[(j, k)] = -acc / denom;
        }
    }
    let mut v = q * x;
    for k in 0..n {
        let norm = v.column(k).norm();
        if norm > 0.0 {
            let mut col = v.column_mut(k);
            col /= real(norm);
        }
    }
    Ok((values, v))
}

/// 2-norm condition number of a square matrix.
pub fn condition_number(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let sv = a.clone().singular_values();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        sv.max() / min
    }
}

/// Outcome of sequential Gram-Schmidt orthonormalization.
pub struct Orthonormalized {
    /// Accepted orthonormal columns.
    pub basis: CMatrix,
    /// For each input vector, its residual norm relative to its own norm after
    /// removing the components along previously accepted columns.
    pub relative_residuals: Vec<f64>,
    /// Indices of the input vectors that were accepted.
    pub accepted: Vec<usize>,
}

/// Modified Gram-Schmidt with one reorthogonalization pass, processing the
/// vectors in input order. Vectors whose relative residual falls below
/// `drop_tol` are skipped.
pub fn gram_schmidt(vectors: &[CVector], dim: usize, drop_tol: f64) -> Orthonormalized {
    let mut cols: Vec<CVector> = Vec::new();
    let mut relative_residuals = Vec::with_capacity(vectors.len());
    let mut accepted = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let norm0 = v.norm();
        if norm0 == 0.0 {
            relative_residuals.push(0.0);
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&w);
                w -= q * proj;
            }
        }
        let rel = w.norm() / norm0;
        relative_residuals.push(rel);
        if rel > drop_tol {
            let norm = w.norm();
            cols.push(w / real(norm));
            accepted.push(idx);
        }
    }
    let basis = if cols.is_empty() {
        CMatrix::zeros(dim, 0)
    } else {
        CMatrix::from_columns(&cols)
    };
    Orthonormalized {
        basis,
        relative_residuals,
        accepted,
    }
}

/// Unitary polar factor `U Vᴴ` of a square matrix with SVD `U Σ Vᴴ`.
pub fn polar_unitary(a: &CMatrix) -> CMatrix {
    if a.is_empty() {
        return a.clone();
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    u * v_t
}

pub fn to_complex_vector(values: &[f64]) -> CVector {
    DVector::from_iterator(values.len(), values.iter().map(|&x| real(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn from_real(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| real(rows[i][j]))
    }

    // Oracle: exp(A) = V diag(exp(λ)) V⁻¹ via the general eigendecomposition.
    fn expm_by_eigen(a: &CMatrix) -> CMatrix {
        let (vals, v) = general_eigen(a).unwrap();
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            vals.len(),
            vals.iter().map(|z| z.exp()),
        ));
        let v_inv = v.clone().try_inverse().unwrap();
        v * d * v_inv
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMatrix::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), identity(3));
    }

    #[test]
    fn expm_of_pauli_x_is_hyperbolic() {
        let a = from_real(&[&[0.0, -1.0], &[-1.0, 0.0]]);
        let e = expm(&a).unwrap();
        let (ch, sh) = (1f64.cosh(), 1f64.sinh());
        assert_relative_eq!(e[(0, 0)].re, ch, epsilon = 1e-14);
        assert_relative_eq!(e[(0, 1)].re, -sh, epsilon = 1e-14);
        assert_relative_eq!(e[(1, 1)].re, ch, epsilon = 1e-14);
    }

    #[test]
    fn expm_matches_eigen_oracle_across_scales() {
        // Norms chosen to exercise every Pade degree and the scaled branch.
        let base = CMatrix::from_fn(4, 4, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 - 1.0) * real(0.3)
        });
        for scale in [0.001, 0.05, 0.5, 2.0, 6.0, 40.0] {
            let a = &base * real(scale / norm_1(&base));
            let e = expm(&a).unwrap();
            let oracle = expm_by_eigen(&a);
            let err = max_abs(&(&e - &oracle)) / max_abs(&oracle);
            assert!(err < 1e-10, "scale {scale}: relative error {err:e}");
        }
    }

    #[test]
    fn expm_overflow_is_reported() {
        let a = CMatrix::identity(2, 2) * real(1e6);
        assert!(matches!(expm(&a), Err(Error::Overflow)));
    }

    #[test]
    fn hermitian_eigen_sorted_and_orthonormal() {
        let a = CMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                real([3.0, 1.0, 2.0][i])
            } else if i < j {
                c(0.1, 0.2 * (i + j) as f64)
            } else {
                c(0.1, -0.2 * (i + j) as f64)
            }
        });
        let (vals, vecs) = hermitian_eigen(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let gram = vecs.adjoint() * &vecs;
        assert!(max_abs(&(gram - identity(3))) < 1e-13);
        for (k, &lambda) in vals.iter().enumerate() {
            let x = vecs.column(k).into_owned();
            let r = &a * &x - &x * real(lambda);
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn general_eigen_residuals_small() {
        let a = CMatrix::from_fn(5, 5, |i, j| c((i as f64 - j as f64).sin(), 0.1 * (i * j) as f64));
        let (vals, vecs) = general_eigen(&a).unwrap();
        for (k, lambda) in vals.iter().enumerate() {
            let x = vecs.column(k).into_owned();
            let r = &a * &x - &x * *lambda;
            assert!(r.norm() < 1e-11, "residual {}", r.norm());
        }
    }

    #[test]
    fn gram_schmidt_flags_dependent_vectors() {
        let v1 = to_complex_vector(&[1.0, 1.0, 0.0]);
        let v2 = to_complex_vector(&[2.0, 2.0, 0.0]);
        let out = gram_schmidt(&[v1, v2], 3, 1e-10);
        assert_eq!(out.accepted, vec![0]);
        assert!(out.relative_residuals[1] < 1e-14);
    }
}
