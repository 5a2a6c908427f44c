//! Small dense linear algebra on row-major `n × n` buffers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::math::sqrt;

/// Modified Gram–Schmidt on the columns of the row-major matrix `a`.
///
/// On return `a` holds Q and the returned row-major buffer holds the upper
/// triangular R with `Q R` equal to the input. Returns `None` when a column
/// collapses (norm below `min_norm` after projection).
pub fn mgs_qr(a: &mut [f64], n: usize, min_norm: f64) -> Option<Vec<f64>> {
    let mut r = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..j {
            let mut d = 0.0;
            for row in 0..n {
                d += a[row * n + i] * a[row * n + j];
            }
            r[i * n + j] = d;
            for row in 0..n {
                a[row * n + j] -= d * a[row * n + i];
            }
        }
        let mut nrm = 0.0;
        for row in 0..n {
            nrm += a[row * n + j] * a[row * n + j];
        }
        let nrm = sqrt(nrm);
        if !(nrm > min_norm) {
            return None;
        }
        r[j * n + j] = nrm;
        for row in 0..n {
            a[row * n + j] /= nrm;
        }
    }
    Some(r)
}

/// Row-major product `a · b` of two `n × n` matrices.
pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Eigenvalues sorted by modulus, largest first.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));
    ev
}

/// Solves `a x = b` in the least-squares / minimum-norm sense via SVD.
pub fn solve_min_norm(a: &DMatrix<f64>, b: &[f64], eps: f64) -> Option<Vec<f64>> {
    let svd = a.clone().svd(true, true);
    let rhs = nalgebra::DVector::from_column_slice(b);
    svd.solve(&rhs, eps).ok().map(|x| x.iter().copied().collect())
}
