use crate::error::{invalid, Result};

/// Velocity quadrature on the reference interval `[-1, 1]`.
///
/// Nodes are symmetric about 0 and the weights sum to 2, so integrating the
/// constant 1 returns the interval length exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl VelocityQuadrature {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(invalid("quadrature needs matching, non-empty node/weight lists"));
        }
        if nodes.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(invalid("quadrature nodes must lie in [-1, 1]"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(invalid("quadrature weights must be positive"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 2.0).abs() > 1e-10 {
            return Err(invalid(format!("quadrature weights sum to {sum}, expected 2")));
        }
        let n = nodes.len();
        for i in 0..n {
            let mirror = nodes[n - 1 - i];
            if (nodes[i] + mirror).abs() > 1e-12 {
                return Err(invalid("quadrature nodes must be symmetric about 0"));
            }
        }
        Ok(Self { nodes, weights })
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

    /// Integrate `f` over `[-1, 1]`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Affinely map the rule onto `[a, b]`; weights then sum to `b - a`.
    pub fn mapped_to(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let nodes = self.nodes.iter().map(|&x| mid + half * x).collect();
        let weights = self.weights.iter().map(|&w| w * half).collect();
        (nodes, weights)
    }
}

/// Gauss-Legendre rule with `n` nodes on `[-1, 1]`, exact for polynomials of
/// degree `2n - 1`.
///
/// Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
/// iteration from the Chebyshev-like initial guess; weights are
/// `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize) -> Result<VelocityQuadrature> {
    if n == 0 {
        return Err(invalid("gauss_legendre needs at least one node"));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess for the i-th root in decreasing order.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_with_derivative(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // The middle node of an odd rule is exactly 0.
        nodes[n / 2] = 0.0;
    }
    VelocityQuadrature::new(nodes, weights)
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_node_rule_is_the_midpoint() {
        let q = gauss_legendre(1).unwrap();
        assert_eq!(q.nodes(), &[0.0]);
        assert_eq!(q.weights(), &[2.0]);
    }

    #[test]
    fn two_node_rule_matches_the_closed_form() {
        let q = gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((q.nodes()[0] + r).abs() < 1e-15);
        assert!((q.nodes()[1] - r).abs() < 1e-15);
        assert!((q.weights()[0] - 1.0).abs() < 1e-15);
        assert!((q.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sixteen_nodes_integrate_v30_exactly() {
        // Degree 30 <= 2*16 - 1, so the rule is exact: integral is 2/31.
        let q = gauss_legendre(16).unwrap();
        let got = q.integrate(|v| v.powi(30));
        assert!((got - 2.0 / 31.0).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn exact_for_all_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..=12 {
            let q = gauss_legendre(n).unwrap();
            for deg in 0..=(2 * n - 1) {
                let got = q.integrate(|v| v.powi(deg as i32));
                let want = if deg % 2 == 0 {
                    2.0 / (deg as f64 + 1.0)
                } else {
                    0.0
                };
                assert!(
                    (got - want).abs() < 1e-13,
                    "n={n} deg={deg}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn zero_nodes_is_an_error() {
        assert!(gauss_legendre(0).is_err());
    }

    #[test]
    fn mapping_preserves_total_weight() {
        let q = gauss_legendre(16).unwrap();
        let (nodes, weights) = q.mapped_to(0.0, 1.0);
        assert!(nodes.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let sum: f64 = weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // v^2 on [0, 1] integrates to 1/3; used by diffusion-limit scalings.
        let m2: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&v, &w)| w * v * v)
            .sum();
        assert!((m2 - 1.0 / 3.0).abs() < 1e-13);
    }
}
