//! BFGS ascent for smooth low-dimensional objectives with analytic
//! gradients. Used by the likelihood fitters in log-parameter space.

use alloc::vec;
use alloc::vec::Vec;

/// Outcome of a maximization run.
#[derive(Debug, Clone)]
pub struct MaximizeResult {
    pub x: Vec<f64>,
    pub fval: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximize `f` from `x0`, stopping when the gradient infinity norm
/// drops below `tol`. The objective returns `(value, gradient)`;
/// non-finite values are treated as minus infinity by the line search.
pub fn maximize<F>(f: F, x0: &[f64], tol: f64, max_iter: usize) -> MaximizeResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut gx) = f(&x);
    // inverse Hessian approximation, identity start
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }

    let mut iterations = 0;
    while iterations < max_iter {
        let gnorm = inf_norm(&gx);
        if gnorm < tol && fx.is_finite() {
            return MaximizeResult {
                x,
                fval: fx,
                grad_inf_norm: gnorm,
                iterations,
                converged: true,
            };
        }
        iterations += 1;

        // ascent direction d = H g
        let mut d = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += h[i * n + j] * gx[j];
            }
            d[i] = s;
        }
        let mut dir_deriv: f64 = d.iter().zip(&gx).map(|(a, b)| a * b).sum();
        if !(dir_deriv > 0.0) || !dir_deriv.is_finite() {
            // H lost positive definiteness; restart along the gradient
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            d.copy_from_slice(&gx);
            dir_deriv = gx.iter().map(|g| g * g).sum();
            if dir_deriv == 0.0 {
                break;
            }
        }

        // backtracking Armijo line search
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = f(&xt);
            if ft.is_finite() && ft >= fx + 1e-4 * step * dir_deriv {
                accepted = Some((xt, ft, gt));
                break;
            }
            // near the optimum the objective is flat to machine
            // precision while the gradient still carries information;
            // accept steps that shrink the gradient without losing
            // more than rounding noise in f
            if ft.is_finite()
                && ft >= fx - 1e-11 * (1.0 + fx.abs())
                && inf_norm(&gt) < 0.9 * inf_norm(&gx)
            {
                accepted = Some((xt, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            // no uphill progress at the smallest step; report where we are
            break;
        };

        // BFGS update of the inverse Hessian (maximization form:
        // curvature uses y = g_old - g_new so that s'y > 0 uphill)
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gx.iter().zip(&gn).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let mut hy = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += h[i * n + j] * y[j];
                }
                hy[i] = acc;
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let c1 = (sy + yhy) / (sy * sy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += c1 * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }

        x = xn;
        fx = fn_;
        gx = gn;
    }

    let gnorm = inf_norm(&gx);
    MaximizeResult {
        converged: gnorm < tol && fx.is_finite(),
        x,
        fval: fx,
        grad_inf_norm: gnorm,
        iterations,
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        // maximize -( (x-3)^2 + 10 (y+1)^2 )
        let f = |p: &[f64]| {
            let (x, y) = (p[0], p[1]);
            let v = -((x - 3.0).powi(2) + 10.0 * (y + 1.0).powi(2));
            (v, alloc::vec![-2.0 * (x - 3.0), -20.0 * (y + 1.0)])
        };
        let r = maximize(f, &[0.0, 0.0], 1e-10, 200);
        assert!(r.converged);
        assert!((r.x[0] - 3.0).abs() < 1e-8);
        assert!((r.x[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock_flipped() {
        // classic banana, negated so the optimum is a maximum at (1,1)
        let f = |p: &[f64]| {
            let (x, y) = (p[0], p[1]);
            let v = -((1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2));
            let gx = -(-2.0 * (1.0 - x) - 400.0 * x * (y - x * x));
            let gy = -(200.0 * (y - x * x));
            (v, alloc::vec![gx, gy])
        };
        let r = maximize(f, &[-1.2, 1.0], 1e-8, 500);
        assert!(r.converged, "grad norm {}", r.grad_inf_norm);
        assert!((r.x[0] - 1.0).abs() < 1e-6);
        assert!((r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn survives_non_finite_regions() {
        // objective is -inf for x <= 0; optimizer must stay in bounds
        let f = |p: &[f64]| {
            let x = p[0];
            if x <= 0.0 {
                return (f64::NEG_INFINITY, alloc::vec![0.0]);
            }
            (x.ln() - x, alloc::vec![1.0 / x - 1.0])
        };
        let r = maximize(f, &[3.0], 1e-12, 100);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-9);
    }
}
