//! Radial Gauss-Laguerre rules and discrete phase grids used to discretize
//! coherent-state resolutions of the identity.
//!
//! The radial measure is e^{-J} dJ on [0, ∞). A Q-point Gauss rule integrates
//! J^n exactly for n ≤ 2Q - 1, and a uniform K-point phase grid reproduces the
//! orthogonality of e^{i(n - n')γ} for |n - n'| < K.

use crate::{param, Error, Result};
use serde::{Deserialize, Serialize};

/// Nodes and weights for ∫_0^∞ f(J) e^{-J} dJ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Order of the Gauss rule that produced the nodes, if any.
    pub gauss_order: Option<usize>,
}

impl RadialRule {
    /// A rule from explicit nodes and weights (not assumed to be Gaussian).
    pub fn custom(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return param("radial rule needs matching, nonempty node and weight lists");
        }
        if nodes.iter().chain(&weights).any(|x| !x.is_finite()) || nodes.iter().any(|&x| x < 0.0) {
            return param("radial nodes must be finite and nonnegative, weights finite");
        }
        Ok(Self { nodes, weights, gauss_order: None })
    }

    /// Applies the rule to `f`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Largest monomial degree integrated exactly, if this is a Gauss rule.
    pub fn exact_degree(&self) -> Option<usize> {
        self.gauss_order.map(|q| 2 * q - 1)
    }
}

/// Laguerre polynomials L_{q-1}(x), L_q(x) by the three-term recurrence.
fn laguerre_pair(q: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    if q == 0 {
        return (0.0, prev);
    }
    let mut cur = 1.0 - x;
    for k in 1..q {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// Q-point Gauss-Laguerre rule.
///
/// Initial nodes come from the symmetric Jacobi matrix and are polished by
/// Newton steps on L_Q. Weights use x / ((Q+1)² L_{Q+1}(x)²), which keeps the
/// tiny weights of the far nodes relatively accurate.
pub fn gauss_laguerre(q: usize) -> Result<RadialRule> {
    if q == 0 {
        return param("Gauss-Laguerre order must be positive");
    }
    if q > 300 {
        return param("Gauss-Laguerre order above 300 is not supported");
    }
    let jacobi = nalgebra::DMatrix::<f64>::from_fn(q, q, |i, j| {
        if i == j {
            (2 * i + 1) as f64
        } else if i + 1 == j {
            j as f64
        } else if j + 1 == i {
            i as f64
        } else {
            0.0
        }
    });
    let mut guesses: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    guesses.sort_by(|a, b| a.total_cmp(b));
    let qf = q as f64;
    let mut nodes = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    for &x0 in &guesses {
        let mut x = x0.max(f64::MIN_POSITIVE);
        for _ in 0..100 {
            let (lm1, l) = laguerre_pair(q, x);
            let dl = qf * (l - lm1) / x;
            let step = l / dl;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1e-300) {
                break;
            }
        }
        let (_, lq1) = laguerre_pair(q + 1, x);
        let w = x / ((qf + 1.0) * (qf + 1.0) * lq1 * lq1);
        if !(x.is_finite() && w.is_finite() && x > 0.0) {
            return Err(Error::Solver(format!("Gauss-Laguerre refinement failed at Q = {q}")));
        }
        nodes.push(x);
        weights.push(w);
    }
    Ok(RadialRule { nodes, weights, gauss_order: Some(q) })
}

/// Uniform phase grid 2πk/K, k = 0..K-1.
pub fn phase_grid(k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return param("phase grid needs at least one point");
    }
    Ok((0..k).map(|i| 2.0 * std::f64::consts::PI * i as f64 / k as f64).collect())
}

/// A product rule over the radial action, one or more phase angles, and an
/// optional point mass at J = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub radial: RadialRule,
    /// Points of the uniform grid for each angle variable.
    pub phases: usize,
    /// Points of the uniform grid for the degeneracy angle θ, when present.
    pub theta_points: Option<usize>,
    /// Weight of a point mass at J = 0 added to the radial measure.
    pub point_mass: Option<f64>,
}

impl QuadratureRule {
    pub fn gauss(q: usize, phases: usize) -> Result<Self> {
        if phases == 0 {
            return param("phase grid needs at least one point");
        }
        Ok(Self { radial: gauss_laguerre(q)?, phases, theta_points: None, point_mass: None })
    }

    pub fn with_theta(mut self, points: usize) -> Result<Self> {
        if points == 0 {
            return param("θ grid needs at least one point");
        }
        self.theta_points = Some(points);
        Ok(self)
    }

    pub fn with_point_mass(mut self, weight: f64) -> Result<Self> {
        if !weight.is_finite() {
            return param("point mass must be finite");
        }
        self.point_mass = Some(weight);
        Ok(self)
    }

    /// Refuses Gauss rules that cannot resolve labels up to `n_max` exactly.
    ///
    /// Radial exactness needs degree 2 n_max (Q ≥ n_max + 1); phase
    /// orthogonality needs K ≥ 2 n_max + 1. Custom rules are not refused.
    pub fn check_for(&self, n_max: usize) -> Result<()> {
        let need_q = n_max + 1;
        let need_k = 2 * n_max + 1;
        if let Some(q) = self.radial.gauss_order {
            if q < need_q || self.phases < need_k {
                return Err(Error::Coarse { q: need_q, k: need_k });
            }
        }
        Ok(())
    }

    /// Checks the θ grid for labels up to `d_max`.
    pub fn check_theta(&self, d_max: usize) -> Result<()> {
        let need = 2 * d_max + 1;
        match self.theta_points {
            Some(t) if self.radial.gauss_order.is_some() && t < need => Err(Error::Coarse {
                q: self.radial.gauss_order.unwrap_or(0),
                k: need,
            }),
            None => param("rule has no θ grid"),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn two_point_rule_matches_closed_form() {
        // Nodes 2 ∓ √2, weights (2 ± √2)/4.
        let r = gauss_laguerre(2).unwrap();
        let s = 2f64.sqrt();
        assert!((r.nodes[0] - (2.0 - s)).abs() < 1e-14);
        assert!((r.nodes[1] - (2.0 + s)).abs() < 1e-14);
        assert!((r.weights[0] - (2.0 + s) / 4.0).abs() < 1e-14);
        assert!((r.weights[1] - (2.0 - s) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_one() {
        for q in [1, 5, 20, 40, 80] {
            let r = gauss_laguerre(q).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "Q={q}: {s}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn exact_up_to_degree_2q_minus_1() {
        let q = 40;
        let r = gauss_laguerre(q).unwrap();
        for n in 0..=30 {
            let got = r.integrate(|x| x.powi(n as i32)) / factorial(n);
            assert!((got - 1.0).abs() < 1e-10, "n={n}: {got}");
        }
    }

    #[test]
    fn phase_grid_orthogonality() {
        let k = 7;
        let g = phase_grid(k).unwrap();
        for d in 1..k as i32 {
            let s: num_complex::Complex64 =
                g.iter().map(|&t| num_complex::Complex64::from_polar(1.0, d as f64 * t)).sum();
            assert!(s.norm() < 1e-12);
        }
    }

    #[test]
    fn coarse_rules_are_refused() {
        let r = QuadratureRule::gauss(5, 21).unwrap();
        assert_eq!(r.check_for(10), Err(Error::Coarse { q: 11, k: 21 }));
        let r = QuadratureRule::gauss(11, 20).unwrap();
        assert!(r.check_for(10).is_err());
        assert!(QuadratureRule::gauss(11, 21).unwrap().check_for(10).is_ok());
    }

    proptest! {
        #[test]
        fn moment_exactness(q in 1usize..30, n in 0usize..20) {
            prop_assume!(n <= 2 * q - 1);
            let r = gauss_laguerre(q).unwrap();
            let got = r.integrate(|x| x.powi(n as i32)) / factorial(n);
            prop_assert!((got - 1.0).abs() < 1e-9);
        }
    }
}
