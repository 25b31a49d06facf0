use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::precond::RealizedPreconditioner;

#[derive(Debug, Clone, Copy)]
pub struct MinresOptions {
    /// Stop when the preconditioned residual norm drops by this factor.
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for MinresOptions {
    fn default() -> Self {
        MinresOptions {
            rtol: 1e-8,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinresOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Preconditioned residual norm after each iteration, starting with the
    /// initial one.
    pub residuals: Vec<f64>,
}

/// Preconditioned MINRES from a zero initial guess.
pub fn minres(
    a: &SparseMatrix,
    precond: &RealizedPreconditioner,
    rhs: &[f64],
    opts: MinresOptions,
) -> Result<MinresOutcome> {
    if precond.dim() != a.nrows() {
        return Err(Error::Dimension(format!(
            "preconditioner of size {} for a system of size {}",
            precond.dim(),
            a.nrows()
        )));
    }
    minres_with(a, |x| precond.apply(x), rhs, opts)
}

/// MINRES with an arbitrary SPD preconditioner action `p`. The
/// preconditioned residual norm `sqrt(r^T P r)` is tracked by the Lanczos
/// recurrence, so no extra products are needed.
pub fn minres_with<P>(
    a: &SparseMatrix,
    p: P,
    rhs: &[f64],
    opts: MinresOptions,
) -> Result<MinresOutcome>
where
    P: Fn(&[f64]) -> Vec<f64>,
{
    let n = a.nrows();
    if a.ncols() != n || rhs.len() != n {
        return Err(Error::Dimension(format!(
            "{}x{} matrix with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            rhs.len()
        )));
    }
    let asym = a.asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();

    let mut x = vec![0.0; n];
    let mut v_prev = vec![0.0; n];
    let mut v = rhs.to_vec();
    let mut z = p(&v);
    let mut gamma = positive_sqrt(dot(&z, &v))?;
    let mut gamma_prev = 1.0;
    let mut eta = gamma;
    let r0 = gamma;
    let mut residuals = vec![r0];
    if r0 == 0.0 {
        return Ok(MinresOutcome {
            solution: x,
            iterations: 0,
            converged: true,
            residuals,
        });
    }
    let (mut c_prev, mut c, mut s_prev, mut s) = (1.0, 1.0, 0.0, 0.0);
    let mut w_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut az = vec![0.0; n];

    for it in 1..=opts.max_iter {
        for zi in z.iter_mut() {
            *zi /= gamma;
        }
        a.mul_vec_into(&z, &mut az);
        let delta = dot(&az, &z);
        let v_next: Vec<f64> = (0..n)
            .map(|i| az[i] - delta / gamma * v[i] - gamma / gamma_prev * v_prev[i])
            .collect();
        let z_next = p(&v_next);
        let gamma_next = positive_sqrt(dot(&z_next, &v_next))?;

        let a0 = c * delta - c_prev * s * gamma;
        let a1 = a0.hypot(gamma_next);
        let a2 = s * delta + c_prev * c * gamma;
        let a3 = s_prev * gamma;
        let c_next = a0 / a1;
        let s_next = gamma_next / a1;
        let w_next: Vec<f64> = (0..n)
            .map(|i| (z[i] - a3 * w_prev[i] - a2 * w[i]) / a1)
            .collect();
        for i in 0..n {
            x[i] += c_next * eta * w_next[i];
        }
        eta *= -s_next;
        residuals.push(eta.abs());

        if eta.abs() <= opts.rtol * r0 || gamma_next == 0.0 {
            return Ok(MinresOutcome {
                solution: x,
                iterations: it,
                converged: true,
                residuals,
            });
        }
        v_prev = std::mem::replace(&mut v, v_next);
        z = z_next;
        gamma_prev = gamma;
        gamma = gamma_next;
        (c_prev, c) = (c, c_next);
        (s_prev, s) = (s, s_next);
        w_prev = std::mem::replace(&mut w, w_next);
    }
    Ok(MinresOutcome {
        solution: x,
        iterations: opts.max_iter,
        converged: false,
        residuals,
    })
}

fn positive_sqrt(v: f64) -> Result<f64> {
    if v < 0.0 {
        // Lanczos vectors are P-orthogonal only for an SPD preconditioner.
        if v > -1e-14 {
            return Ok(0.0);
        }
        return Err(Error::NotPositiveDefinite {
            context: "MINRES preconditioner".into(),
        });
    }
    Ok(v.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conductivity::Conductivity;
    use crate::forms::{build_biot_system, build_darcy_system, manufactured_rhs};
    use crate::linalg::{SpdFactor, Triplets};
    use crate::mesh::{BoundaryTag, Mesh};
    use crate::precond::{biot_b2, darcy_b1};

    fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.mul_vec(x);
        ax.iter()
            .zip(b)
            .map(|(u, v)| (u - v).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let biot = build_biot_system(&Mesh::unit_square(2).unwrap(), 1.0).unwrap();
        let crate::forms::AssembledSaddleSystem::Biot(b) = &biot else {
            unreachable!()
        };
        let a = &b.elasticity;
        let f = SpdFactor::from_sparse(a, "a").unwrap();
        let rhs: Vec<f64> = (0..a.nrows()).map(|i| (i as f64).sin()).collect();
        let out = minres_with(a, |x| f.solve(x), &rhs, MinresOptions::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert!(residual(a, &out.solution, &rhs) < 1e-10);
    }

    #[test]
    fn solves_indefinite_diagonal() {
        let mut t = Triplets::new(4, 4);
        for (i, d) in [3.0, -1.0, 2.0, -5.0].into_iter().enumerate() {
            t.push(i, i, d);
        }
        let a = t.build();
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let out = minres_with(&a, |x| x.to_vec(), &rhs, MinresOptions::default()).unwrap();
        assert!(out.converged && out.iterations <= 4);
        for (x, (b, d)) in out
            .solution
            .iter()
            .zip(rhs.iter().zip([3.0, -1.0, 2.0, -5.0]))
        {
            assert!((x - b / d).abs() < 1e-10);
        }
    }

    #[test]
    fn preconditioned_darcy_solve() {
        let m = Mesh::unit_square(8).unwrap();
        let s = build_darcy_system(
            &m,
            Conductivity::constant(1e-6).unwrap(),
            &[BoundaryTag::Left],
        )
        .unwrap();
        let a = s.matrix();
        let p = darcy_b1(&s).unwrap().realize().unwrap();
        let rhs = manufactured_rhs(&s);
        let out = minres(
            &a,
            &p,
            &rhs,
            MinresOptions {
                rtol: 1e-10,
                max_iter: 500,
            },
        )
        .unwrap();
        assert!(out.converged);
        assert!(out.iterations < 60, "{}", out.iterations);
        // true residual in the preconditioner norm against the recurrence
        let ax = a.mul_vec(&out.solution);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        let pr = p.apply(&r);
        let true_norm = r.iter().zip(&pr).map(|(u, v)| u * v).sum::<f64>().sqrt();
        let estimate = *out.residuals.last().unwrap();
        assert!(
            true_norm <= 1e-10 * out.residuals[0] + 10.0 * estimate,
            "{true_norm} vs {estimate}"
        );
        assert!(true_norm <= 1e-9 * out.residuals[0]);
    }

    #[test]
    fn residual_history_is_monotone_and_iterations_follow_tolerance() {
        let s = build_biot_system(&Mesh::unit_square(4).unwrap(), 1e-2).unwrap();
        let a = s.matrix();
        let p = biot_b2(&s).unwrap().realize().unwrap();
        let rhs = manufactured_rhs(&s);
        let mut last = 0;
        for rtol in [1e-2, 1e-4, 1e-6, 1e-8] {
            let out = minres(
                &a,
                &p,
                &rhs,
                MinresOptions {
                    rtol,
                    max_iter: 1000,
                },
            )
            .unwrap();
            assert!(out.converged);
            assert!(out.iterations >= last);
            last = out.iterations;
            for w in out.residuals.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn rejects_nonsymmetric_matrix() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 1, 1.0);
        let a = t.build();
        assert!(matches!(
            minres_with(&a, |x| x.to_vec(), &[1.0, 1.0], MinresOptions::default()),
            Err(Error::NotSymmetric(_))
        ));
    }
}
