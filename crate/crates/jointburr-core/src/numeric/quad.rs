//! Gauss-Legendre quadrature: fixed-order rules with nodes computed by
//! Newton iteration on the Legendre recurrence, and an adaptive driver
//! built on an embedded low/high order pair with largest-error-first
//! panel splitting.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use super::math::cos;
use crate::error::{Error, Result};

/// A fixed-order Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the `n`-point rule. Nodes are the roots of `P_n`, found by
    /// Newton from the Chebyshev initial guess; accurate to ~1e-15.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut pp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence up to P_n and its derivative at x
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / pp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate a scalar integrand over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }

    /// Integrate a vector-valued integrand; `f` writes the component
    /// values for abscissa `x` into the scratch slice.
    pub fn integrate_vec<F: Fn(f64, &mut [f64])>(
        &self,
        a: f64,
        b: f64,
        dim: usize,
        f: F,
    ) -> Vec<f64> {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = vec![0.0; dim];
        let mut buf = vec![0.0; dim];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            f(c + h * x, &mut buf);
            for (s, v) in acc.iter_mut().zip(&buf) {
                *s += w * v;
            }
        }
        for s in &mut acc {
            *s *= h;
        }
        acc
    }
}

/// One refined panel of an adaptive integration, with its integral
/// estimate from the high-order rule.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub integral: f64,
}

struct Work {
    err: f64,
    a: f64,
    b: f64,
    vals: Vec<f64>,
}

impl PartialEq for Work {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Work {}
impl PartialOrd for Work {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Work {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive quadrature over a finite interval with a 30/61 point
/// embedded Gauss-Legendre pair.
///
/// Termination is absolute-or-relative: refinement stops once the
/// summed panel error drops below `abs_tol` or `rel_tol` times the
/// largest component magnitude, whichever is larger.
#[derive(Debug, Clone)]
pub struct AdaptiveQuad {
    lo: GaussLegendre,
    hi: GaussLegendre,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
}

impl AdaptiveQuad {
    pub fn new(abs_tol: f64) -> Self {
        Self {
            lo: GaussLegendre::new(30),
            hi: GaussLegendre::new(61),
            abs_tol,
            rel_tol: 1e-10,
            max_panels: 4000,
        }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    /// Integrate a scalar integrand over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> Result<f64> {
        let v = self.integrate_vec(a, b, 1, |x, out| out[0] = f(x))?;
        Ok(v[0])
    }

    /// Integrate a vector-valued integrand over `[a, b]`; all components
    /// share abscissae, so expensive common factors are evaluated once.
    pub fn integrate_vec<F: Fn(f64, &mut [f64])>(
        &self,
        a: f64,
        b: f64,
        dim: usize,
        f: F,
    ) -> Result<Vec<f64>> {
        let (vals, _) = self.run_vec(a, b, dim, &f, None)?;
        Ok(vals)
    }

    /// Like `integrate`, but also return the refined panels (ascending),
    /// so callers can build cumulative integrals for repeated tail
    /// evaluations.
    pub fn panels<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> Result<Vec<Panel>> {
        let g = |x: f64, out: &mut [f64]| out[0] = f(x);
        let (_, mut panels) = self.run_vec(a, b, 1, &g, Some(()))?;
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        Ok(panels)
    }

    fn eval_panel<F: Fn(f64, &mut [f64])>(
        &self,
        a: f64,
        b: f64,
        dim: usize,
        f: &F,
    ) -> (Vec<f64>, f64) {
        let hi = self.hi.integrate_vec(a, b, dim, f);
        let lo = self.lo.integrate_vec(a, b, dim, f);
        let mut err = 0.0f64;
        for (h, l) in hi.iter().zip(&lo) {
            err = err.max((h - l).abs());
        }
        (hi, err)
    }

    fn run_vec<F: Fn(f64, &mut [f64])>(
        &self,
        a: f64,
        b: f64,
        dim: usize,
        f: &F,
        collect: Option<()>,
    ) -> Result<(Vec<f64>, Vec<Panel>)> {
        if !(b > a) {
            return Ok((vec![0.0; dim], Vec::new()));
        }
        let mut heap = BinaryHeap::new();
        let (vals, err) = self.eval_panel(a, b, dim, f);
        let mut total_err = err;
        let mut total: Vec<f64> = vals.clone();
        heap.push(Work { err, a, b, vals });
        let mut done: Vec<Work> = Vec::new();

        while total_err > self.abs_tol.max(self.rel_tol * max_abs(&total)) {
            let Some(worst) = heap.pop() else { break };
            if done.len() + heap.len() >= self.max_panels {
                return Err(Error::QuadratureNonConvergence);
            }
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval at floating-point resolution; accept as is
                total_err -= worst.err;
                done.push(Work { err: 0.0, ..worst });
                continue;
            }
            let (lv, le) = self.eval_panel(worst.a, mid, dim, f);
            let (rv, re) = self.eval_panel(mid, worst.b, dim, f);
            for i in 0..dim {
                total[i] += lv[i] + rv[i] - worst.vals[i];
            }
            total_err += le + re - worst.err;
            heap.push(Work {
                err: le,
                a: worst.a,
                b: mid,
                vals: lv,
            });
            heap.push(Work {
                err: re,
                a: mid,
                b: worst.b,
                vals: rv,
            });
        }

        let panels = if collect.is_some() {
            done.iter()
                .chain(heap.iter())
                .map(|w| Panel {
                    a: w.a,
                    b: w.b,
                    integral: w.vals[0],
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok((total, panels))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
