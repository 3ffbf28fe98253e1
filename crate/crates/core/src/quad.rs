//! Gauss-Hermite quadrature, pre-scaled for expectations under the
//! standard normal distribution.
//!
//! Nodes and weights come from Newton iteration on the orthonormal Hermite
//! recurrence (the classic `gauher` scheme); a 64-node rule integrates the
//! smooth integrands of the model zoo far below statistical noise.

use crate::real::Real;

/// Default node count used by the model zoo.
pub const DEFAULT_NODES: usize = 64;

/// A quadrature rule such that `expectation(f)` ≈ E[f(Z)], Z ~ N(0, 1).
#[derive(Debug, Clone)]
pub struct GaussHermite<R> {
    nodes: Vec<R>,
    weights: Vec<R>,
}

impl<R: Real> GaussHermite<R> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one node");
        let (x, w) = hermite_nodes(n);
        let sqrt2 = std::f64::consts::SQRT_2;
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        GaussHermite {
            nodes: x.iter().map(|&v| R::of(v * sqrt2)).collect(),
            weights: w.iter().map(|&v| R::of(v * inv_sqrt_pi)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// E[f(Z)] for Z ~ N(0, 1).
    pub fn expectation<F: Fn(R) -> R>(&self, f: F) -> R {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// E[f(Z1, Z2)] for independent standard normal Z1, Z2 (tensor rule).
    pub fn expectation_2d<F: Fn(R, R) -> R>(&self, f: F) -> R {
        let mut total = R::zero();
        for (&x, &wx) in self.nodes.iter().zip(&self.weights) {
            let mut inner = R::zero();
            for (&y, &wy) in self.nodes.iter().zip(&self.weights) {
                inner += wy * f(x, y);
            }
            total += wx * inner;
        }
        total
    }
}

/// Physicists' Gauss-Hermite nodes and weights for weight exp(-x²).
fn hermite_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    const EPS: f64 = 3e-14;
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^(-1/4)
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= EPS {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // Odd rules have a node exactly at the origin.
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}
