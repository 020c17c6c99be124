//! Quadrature helpers: Gauss–Legendre nodes and weights.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Roots are found by Newton iteration on the Legendre recurrence and then
/// mirrored, so the returned nodes are exactly symmetric about zero (the
/// detuning-sign-flip closure downstream relies on this).
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Gauss-Legendre rule needs at least two nodes");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = (n + 1) / 2;
    for i in 0..half {
        // Tricomi-style initial guess for the i-th root in descending order.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() < 1e-15 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `n`-point Gauss–Legendre rule mapped onto `[a, b]`.
pub(crate) fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| wi * half).collect(),
    )
}

/// Value and derivative of the Legendre polynomial `P_n` at `z`.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // The n-point rule is exact up to degree 2n-1.
        let (x, w) = gauss_legendre(8);
        for deg in 0..=15usize {
            let quad: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| wi * xi.powi(deg as i32))
                .sum();
            let exact = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert!(
                (quad - exact).abs() < 1e-13,
                "degree {deg}: {quad} vs {exact}"
            );
        }
    }

    #[test]
    fn nodes_are_symmetric() {
        for n in [2usize, 17, 96, 255] {
            let (x, w) = gauss_legendre(n);
            for i in 0..n {
                assert_eq!(x[i], -x[n - 1 - i]);
                assert_eq!(w[i], w[n - 1 - i]);
            }
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mapped_rule_integrates_gaussian() {
        // Window wide enough that the truncated tails are below 1e-12.
        let (x, w) = gauss_legendre_on(-12.0, 12.0, 200);
        let quad: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| wi * (-0.5 * xi * xi).exp())
            .sum();
        assert!((quad - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }
}
