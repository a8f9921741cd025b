//! Angular quadrature for the sector reduction.

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Golub-Welsch), nodes
/// ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Associated Legendre functions of order `m` normalized so that
/// `int_{-1}^{1} N_l^2 dx = 1`, for `l = m..=l_max`, and their
/// `theta`-derivatives. Requires `|x| < 1`.
pub fn normalized_legendre(m: usize, l_max: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let s = (1.0 - x * x).sqrt();
    let mut mm = (0.5f64).sqrt();
    for k in 1..=m {
        mm *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    let len = l_max + 1 - m;
    let mut val = vec![0.0; len];
    val[0] = mm;
    if len > 1 {
        val[1] = x * ((2 * m + 3) as f64).sqrt() * mm;
    }
    let a = |l: usize| (((4 * l * l - 1) as f64) / ((l * l - m * m) as f64)).sqrt();
    for l in m + 2..=l_max {
        val[l - m] = a(l) * (x * val[l - 1 - m] - val[l - 2 - m] / a(l - 1));
    }
    let deriv = (m..=l_max)
        .map(|l| {
            let lower = if l > m {
                let k = ((2 * l + 1) as f64 * (l * l - m * m) as f64 / (2 * l - 1) as f64).sqrt();
                k * val[l - 1 - m]
            } else {
                0.0
            };
            (l as f64 * x * val[l - m] - lower) / s
        })
        .collect();
    (val, deriv)
}
