//! Quadrature rules shared by the operator and transform modules.
//!
//! Radial integrals use Gauss-Legendre on a finite interval. Sphere integrals
//! use a Gauss-Legendre x uniform-azimuth product rule: with `l` polar nodes
//! and `2l` azimuthal nodes the rule integrates all spherical harmonics of
//! degree `<= 2l - 1` exactly, so `exactness(deg)` picks `l = ceil((deg+1)/2)`.

use serde::{Deserialize, Serialize};

/// Gauss-Legendre nodes and weights on `[a, b]`.
///
/// Nodes are found by Newton iteration on the Legendre recurrence; the
/// standard starting guesses converge for any practical order.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    assert!(b > a, "empty interval");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..n {
        nodes[i] = mid + half * nodes[i];
        weights[i] *= half;
    }
    (nodes, weights)
}

/// Node of a sphere rule: unit direction plus weight (weights sum to 4 pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereNode {
    pub dir: [f64; 3],
    pub weight: f64,
}

/// Product rule on the unit sphere with polynomial exactness `degree`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub id: String,
    pub degree: usize,
    pub nodes: Vec<SphereNode>,
}

impl SphereRule {
    /// Build the Gauss-Legendre x azimuth product rule of at least the given
    /// polynomial exactness.
    pub fn with_exactness(degree: usize) -> SphereRule {
        let l = (degree + 2) / 2; // smallest l with 2l - 1 >= degree
        let n_phi = 2 * l;
        let (ct_nodes, ct_weights) = gauss_legendre(l, -1.0, 1.0);
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(l * n_phi);
        for (ct, wt) in ct_nodes.iter().zip(&ct_weights) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = dphi * (j as f64 + 0.5);
                nodes.push(SphereNode {
                    dir: [st * phi.cos(), st * phi.sin(), *ct],
                    weight: wt * dphi,
                });
            }
        }
        SphereRule {
            id: format!("glprod{}", 2 * l - 1),
            degree: 2 * l - 1,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Discretization choices for the transform and operator inner products.
///
/// `spherical_degree` controls the sphere rule (used both for spatial angular
/// integrals and as the stored direction grid), `radial_order` the
/// Gauss-Legendre rule on `[0, radial_cutoff]`, and the `rho` window/count the
/// uniform spectral grid (trapezoid weights on the closed window).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QuadratureSpec {
    pub spherical_degree: usize,
    pub radial_order: usize,
    pub radial_cutoff: f64,
    pub rho_max: f64,
    pub rho_count: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        // The spherical degree is sized so the stored direction grid resolves
        // the plane-wave kernel out to |rho| ~ degree/(2 ball radius); degree
        // 29 keeps the roundtrip reconstruction error near 1e-3 on the
        // default test family instead of the ~1e-2 floor a degree-23 rule
        // leaves behind.
        QuadratureSpec {
            spherical_degree: 29,
            radial_order: 200,
            radial_cutoff: 6.0,
            rho_max: 24.0,
            rho_count: 481,
        }
    }
}

impl QuadratureSpec {
    pub fn sphere_rule(&self) -> SphereRule {
        SphereRule::with_exactness(self.spherical_degree)
    }

    pub fn radial_rule(&self) -> (Vec<f64>, Vec<f64>) {
        gauss_legendre(self.radial_order, 0.0, self.radial_cutoff)
    }

    /// Uniform `rho` grid over `[-rho_max, rho_max]`.
    pub fn rho_grid(&self) -> Vec<f64> {
        assert!(self.rho_count >= 2, "rho grid needs at least two points");
        let n = self.rho_count;
        let h = 2.0 * self.rho_max / (n - 1) as f64;
        (0..n).map(|i| -self.rho_max + h * i as f64).collect()
    }

    /// Trapezoid weights matching `rho_grid`.
    pub fn rho_weights(&self) -> Vec<f64> {
        let n = self.rho_count;
        let h = 2.0 * self.rho_max / (n - 1) as f64;
        (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect()
    }

    /// Same spec with the `rho` grid refined by the given factor.
    pub fn refine_rho(&self, factor: usize) -> QuadratureSpec {
        let mut s = self.clone();
        s.rho_count = (self.rho_count - 1) * factor + 1;
        s
    }
}
