//! Damped Newton descent with an eigenvalue-modified Hessian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::potential::Landscape;
use crate::Result;

#[derive(Debug, Clone, Copy)]
pub(crate) struct MinimizerOptions {
    /// Max-norm of the scaled gradient at convergence.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest coordinate change per step (scaled units).
    pub max_step: f64,
}

impl MinimizerOptions {
    pub fn for_landscape(landscape: &Landscape) -> Self {
        MinimizerOptions {
            tolerance: 1e-12,
            max_iterations: 500,
            max_step: (0.3_f64).min(0.3 / landscape.k()),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub z: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Newton direction with the Hessian spectrum replaced by `max(|lambda|, floor)`.
fn descent_direction(h: DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(h);
    let scale = eig.eigenvalues.amax().max(1e-300);
    let floor = 1e-10 * scale;
    let mut coeffs = eig.eigenvectors.tr_mul(g);
    for (c, &lambda) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c /= lambda.abs().max(floor);
    }
    -(&eig.eigenvectors * coeffs)
}

pub(crate) fn minimize(
    landscape: &Landscape,
    start: &[f64],
    options: MinimizerOptions,
) -> Result<Outcome> {
    let mut z = DVector::from_column_slice(start);
    let mut value = landscape.value(z.as_slice())?;
    let mut grad = landscape.gradient(z.as_slice())?;
    let mut gmax = grad.amax();
    let mut iterations = 0;
    let mut polish = 0;

    while iterations < options.max_iterations {
        if gmax < options.tolerance {
            // A couple of extra steps take the gradient down to roundoff.
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        iterations += 1;
        let h = landscape.hessian_full(z.as_slice())?;
        let mut dir = descent_direction(h, &grad);
        let longest = dir.amax();
        if longest > options.max_step {
            dir *= options.max_step / longest;
        }
        let slope = grad.dot(&dir);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &z + &dir * t;
            if let Ok(v) = landscape.value(trial.as_slice()) {
                if v <= value + 1e-4 * t * slope {
                    let g = landscape.gradient(trial.as_slice())?;
                    accepted = Some((trial, v, g));
                    break;
                }
                // Close to the minimum the energy change is below roundoff;
                // fall back to the gradient as merit function.
                if (v - value).abs() <= 1e-13 * (value.abs() + 1.0) {
                    let g = landscape.gradient(trial.as_slice())?;
                    if g.amax() < gmax {
                        accepted = Some((trial, v, g));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((_, _, g)) if polish > 0 && g.amax() >= gmax => break,
            Some((trial, v, g)) => {
                z = trial;
                value = v;
                gmax = g.amax();
                grad = g;
            }
            None => break,
        }
    }
    Ok(Outcome {
        z: z.as_slice().to_vec(),
        iterations,
        converged: gmax < options.tolerance,
    })
}

/// Equilibrium of `N` ions in a 1D harmonic well, in units of `l`, ascending.
pub(crate) fn axial_chain(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let half = 1.3 * (n as f64).powf(0.6);
    let mut u: Vec<f64> = (0..n)
        .map(|i| half * (2.0 * i as f64 / (n - 1) as f64 - 1.0))
        .collect();

    let gradient = |u: &[f64]| -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            let mut g = u[i];
            for (j, uj) in u.iter().enumerate() {
                if j != i {
                    let d = u[i] - uj;
                    g -= d.signum() / (d * d);
                }
            }
            g
        })
    };
    let energy = |u: &[f64]| -> f64 {
        let mut e = 0.0;
        for i in 0..n {
            e += 0.5 * u[i] * u[i];
            for j in i + 1..n {
                e += 1.0 / (u[j] - u[i]);
            }
        }
        e
    };

    for _ in 0..200 {
        let g = gradient(&u);
        if g.amax() < 1e-14 {
            break;
        }
        let mut h = DMatrix::identity(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let c = 2.0 / (u[j] - u[i]).abs().powi(3);
                h[(i, i)] += c;
                h[(j, j)] += c;
                h[(i, j)] -= c;
                h[(j, i)] -= c;
            }
        }
        let Some(step) = h.cholesky().map(|c| -c.solve(&g)) else {
            break;
        };
        // Keep the ordering: no gap may close by more than 90 %.
        let mut t: f64 = 1.0;
        for i in 0..n - 1 {
            let closing = step[i] - step[i + 1];
            if closing > 0.0 {
                t = t.min(0.9 * (u[i + 1] - u[i]) / closing);
            }
        }
        let e0 = energy(&u);
        let slope = g.dot(&step);
        let mut next = u.clone();
        for _ in 0..60 {
            next = u.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let e = energy(&next);
            if e <= e0 + 1e-4 * t * slope || (e - e0).abs() <= 1e-14 * e0.abs() {
                break;
            }
            t *= 0.5;
        }
        if next == u {
            break;
        }
        u = next;
    }
    // The exact solution is symmetric about the trap centre.
    (0..n).map(|i| 0.5 * (u[i] - u[n - 1 - i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_ions() {
        let u = axial_chain(2);
        let expected = 0.5 * 2f64.cbrt();
        assert!((u[1] - expected).abs() < 1e-14);
        assert!((u[0] + expected).abs() < 1e-14);
    }

    #[test]
    fn three_ions() {
        // Force balance on the outer ion: u = 1/u^2 + 1/(2u)^2.
        let u = axial_chain(3);
        let expected = (1.25f64).cbrt();
        assert!(u[1].abs() < 1e-15);
        assert!((u[2] - expected).abs() < 1e-13);
    }

    #[test]
    fn long_chain_is_ordered_and_balanced() {
        let u = axial_chain(60);
        assert!(u.windows(2).all(|w| w[1] > w[0]));
        for i in 0..60 {
            let mut f = u[i];
            for j in 0..60 {
                if j != i {
                    let d = u[i] - u[j];
                    f -= d.signum() / (d * d);
                }
            }
            assert!(f.abs() < 1e-11, "ion {i}: residual force {f}");
        }
    }
}
