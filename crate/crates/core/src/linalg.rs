//! Dense linear algebra used by the fluctuation analysis: eigen-decomposition
//! of real non-symmetric matrices, the continuous Lyapunov equation and
//! symplectic spectra of covariance matrices.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::{Error, Result};

pub type Complex64 = Complex<f64>;

fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Complex Schur form `m = q t q^H` of a real matrix.
fn schur(m: &DMatrix<f64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let schur = complexify(m)
        .try_schur(f64::EPSILON, 100 * m.nrows().max(10))
        .ok_or(Error::EigenFailure)?;
    Ok(schur.unpack())
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let (_, t) = schur(m)?;
    Ok(t.diagonal().iter().copied().collect())
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// Unit-norm eigenvectors as columns.
    pub vectors: DMatrix<Complex64>,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

/// Full eigen-decomposition of a real matrix; fails when the eigenvector
/// basis is near-defective (condition number above `1e8`).
pub fn eigen_decomposition(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = m.nrows();
    let (q, t) = schur(m)?;
    let small = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        col /= Complex64::new(norm, 0.0);
    }
    let sv = vectors.clone().svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    if !(condition <= 1e8) {
        return Err(Error::NearDefective { condition });
    }
    Ok(EigenDecomposition {
        values: t.diagonal().iter().copied().collect(),
        vectors,
        condition,
    })
}

/// Solves `t y + y t^H = g` for upper-triangular `t`.
fn triangular_sylvester(
    t: &DMatrix<Complex64>,
    g: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let n = t.nrows();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for j in (0..n).rev() {
        for i in (0..n).rev() {
            let mut s = g[(i, j)];
            for k in i + 1..n {
                s -= t[(i, k)] * y[(k, j)];
            }
            for k in j + 1..n {
                s -= y[(i, k)] * t[(j, k)].conj();
            }
            let d = t[(i, i)] + t[(j, j)].conj();
            if d.norm() == 0.0 {
                return Err(Error::LyapunovFailed {
                    residual: f64::INFINITY,
                });
            }
            y[(i, j)] = s / d;
        }
    }
    Ok(y)
}

fn lyapunov_residual(m: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    m * c + c * m.transpose() + d
}

/// Solves the continuous Lyapunov equation `m c + c m^T + d = 0` for a
/// Hurwitz matrix `m` and symmetric `d` (Bartels-Stewart on the complex
/// Schur form, followed by iterative refinement).
///
/// Returns the symmetric solution and the relative residual
/// `|m c + c m^T + d| / |d|` in the Frobenius norm.
pub fn solve_lyapunov(m: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let ms = m / scale;
    let (q, t) = schur(&ms)?;
    let qh = q.adjoint();
    let solve = |rhs: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let g = &qh * complexify(rhs) * &q;
        let y = triangular_sylvester(&t, &(-g))?;
        let c = (&q * y * &qh).map(|z| z.re);
        Ok((&c + c.transpose()) * 0.5)
    };
    let ds = d / scale;
    let mut c = solve(&ds)?;
    let dnorm = ds.norm().max(f64::MIN_POSITIVE);
    let mut residual = lyapunov_residual(&ms, &c, &ds).norm() / dnorm;
    for _ in 0..3 {
        if residual < 1e-14 {
            break;
        }
        let r = lyapunov_residual(&ms, &c, &ds);
        let candidate = &c + solve(&r)?;
        let next = lyapunov_residual(&ms, &candidate, &ds).norm() / dnorm;
        if next >= residual {
            break;
        }
        c = candidate;
        residual = next;
    }
    if !residual.is_finite() {
        return Err(Error::LyapunovFailed { residual });
    }
    Ok((c, residual))
}

/// Block-diagonal symplectic form with blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues (ascending, one per mode) of a positive-definite
/// covariance matrix in `(Q_1, P_1, Q_2, P_2, ...)` ordering.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = cov.nrows();
    if n % 2 != 0 || cov.ncols() != n {
        return Err(Error::InvalidParameter(
            "covariance must be square with even dimension".into(),
        ));
    }
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let smallest = eig.eigenvalues.min();
    if !(smallest > 0.0) {
        return Err(Error::UnphysicalCovariance(smallest));
    }
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let a = &root * symplectic_form(n / 2) * &root;
    let squares = SymmetricEigen::new(a.transpose() * &a).eigenvalues;
    let mut sorted: Vec<f64> = squares.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted
        .chunks_exact(2)
        .map(|p| (0.5 * (p[0] + p[1])).max(0.0).sqrt())
        .collect())
}

pub(crate) mod serde_matrix {
    //! Serializes a matrix as a list of rows.
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_rotation_generator() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, -2.0, -1.0]);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - Complex64::new(-1.0, -2.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(-1.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, -3.0, 0.2, 1.0, 0.0, 4.0, -2.0]);
        let e = eigen_decomposition(&m).unwrap();
        let mc = complexify(&m);
        for (k, &lambda) in e.values.iter().enumerate() {
            let v = e.vectors.column(k);
            let r = &mc * v - v * lambda;
            assert!(r.norm() < 1e-13);
        }
    }

    #[test]
    fn defective_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        assert!(matches!(
            eigen_decomposition(&m),
            Err(Error::NearDefective { .. })
        ));
    }

    #[test]
    fn scalar_lyapunov() {
        let m = DMatrix::from_element(1, 1, -2.0);
        let d = DMatrix::from_element(1, 1, 4.0);
        let (c, res) = solve_lyapunov(&m, &d).unwrap();
        assert!((c[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(res < 1e-15);
    }

    #[test]
    fn symplectic_spectrum_of_thermal_state() {
        let mut c = DMatrix::identity(4, 4);
        c[(2, 2)] = 3.0;
        c[(3, 3)] = 3.0;
        let nu = symplectic_eigenvalues(&c).unwrap();
        assert!((nu[0] - 1.0).abs() < 1e-14 && (nu[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn squeezed_vacuum_is_pure() {
        let r: f64 = 0.7;
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            (2.0 * r).exp(),
            (-2.0 * r).exp(),
        ]));
        let nu = symplectic_eigenvalues(&c).unwrap();
        assert!((nu[0] - 1.0).abs() < 1e-14);
    }
}
