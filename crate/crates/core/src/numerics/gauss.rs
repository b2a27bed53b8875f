//! Gauss-Legendre nodes and weights on [-1, 1].
//!
//! Newton iteration on P_n starting from the Chebyshev-angle estimate; the
//! rule integrates polynomials of degree <= 2n-1 exactly.

/// Legendre polynomial value and derivative at `x` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes (ascending) and weights of the n-point rule.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // root estimate for the (i+1)-th root counted from +1
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_pair(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn five_point_rule_matches_published_nodes() {
        let (x, w) = gauss_legendre(5);
        let expect_x = [-0.906179845938664, -0.538469310105683, 0.0, 0.538469310105683, 0.906179845938664];
        let expect_w = [0.236926885056189, 0.478628670499366, 0.568888888888889, 0.478628670499366, 0.236926885056189];
        for i in 0..5 {
            assert_relative_eq!(x[i], expect_x[i], epsilon = 1e-14);
            assert_relative_eq!(w[i], expect_w[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn integrates_monomials_to_machine_precision() {
        for n in [1usize, 2, 3, 8, 33, 202] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
            // highest exactly integrable even power
            let p = if 2 * n > 2 { (2 * n - 2) & !1 } else { 0 };
            let quad: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
            assert_relative_eq!(quad, 2.0 / (p as f64 + 1.0), epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let (x, _) = gauss_legendre(40);
        for i in 1..x.len() {
            assert!(x[i] > x[i - 1]);
        }
        for i in 0..x.len() {
            assert_relative_eq!(x[i], -x[x.len() - 1 - i], epsilon = 1e-15);
        }
    }
}
