//! Gauss–Legendre rules and composite integration on b-adic cell grids.

use std::num::NonZeroUsize;

use num_complex::Complex64;

/// An n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes ascending.
    pub fn new(n: usize) -> Self {
        let n = NonZeroUsize::new(n).expect("Gauss-Legendre rule needs at least one node");
        let mut pairs = gauss_quad::legendre::GaussLegendre::new(n).as_node_weight_pairs().to_vec();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node/weight pairs mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        self.mapped(a, b).map(|(x, w)| f(x) * w).sum()
    }

    /// Composite rule over `cells` equal subintervals of `[a, b]`.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, cells: usize, mut f: F) -> f64 {
        let h = (b - a) / cells as f64;
        (0..cells)
            .map(|m| {
                let lo = a + m as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_monomials_exactly() {
        for n in [1usize, 2, 5, 16, 32] {
            let rule = GaussLegendre::new(n);
            let total: f64 = rule.weights().iter().sum();
            assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
            for d in 0..(2 * n) {
                let s = rule.integrate(-1.0, 1.0, |x| x.powi(d as i32));
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert_abs_diff_eq!(s, exact, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let rule = GaussLegendre::new(16);
        for w in rule.nodes().windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..16 {
            assert_abs_diff_eq!(rule.nodes()[i], -rule.nodes()[15 - i], epsilon = 1e-15);
        }
    }

    #[test]
    fn composite_exp() {
        let rule = GaussLegendre::new(8);
        let s = rule.composite(0.0, 1.0, 16, f64::exp);
        assert_abs_diff_eq!(s, std::f64::consts::E - 1.0, epsilon = 1e-14);
    }
}
