#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Repeatedly deletes the leftmost cancelling pair until none is left.
pub fn naive_reduce(values: &[i32]) -> Vec<i32> {
    let mut w = values.to_vec();
    loop {
        match (0..w.len().saturating_sub(1)).find(|&i| w[i] == -w[i + 1]) {
            Some(i) => {
                w.drain(i..i + 2);
            }
            None => return w,
        }
    }
}

pub fn naive_is_cyclically_reduced(values: &[i32]) -> bool {
    let reduced = values.windows(2).all(|p| p[0] != -p[1]);
    reduced && (values.len() < 2 || values[0] != -values[values.len() - 1])
}

/// Every tuple over the signed alphabet of rank `n`, in no particular order.
pub fn all_tuples(n: u32, len: usize) -> Vec<Vec<i32>> {
    let alphabet: Vec<i32> = (1..=n as i32).flat_map(|g| [g, -g]).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |&a| {
                    let mut next = w.clone();
                    next.push(a);
                    next
                })
            })
            .collect();
    }
    out
}

/// Upper-tail p-value of Pearson's statistic against uniform expectation.
pub fn chi_square_uniform_p(observed: &[u64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let expected = total as f64 / observed.len() as f64;
    let stat: f64 = observed.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

/// Eigenvalues of a dense symmetric matrix by Householder reduction to
/// tridiagonal form followed by Sturm-count bisection.
pub fn sturm_eigenvalues(matrix: &[Vec<f64>], tol: f64) -> Vec<f64> {
    let (diag, off) = tridiagonalize(matrix);
    let size = diag.len();
    let bound = diag
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < size { off[i].abs() } else { 0.0 };
            d.abs() + left + right
        })
        .fold(0.0, f64::max)
        + 1.0;
    (0..size)
        .map(|i| {
            // smallest x with more than i eigenvalues below it
            let (mut lo, mut hi) = (-bound, bound);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if count_below(&diag, &off, mid) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        q = diag[i] - x - if i > 0 { coupling / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonalize(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for k in 0..n.saturating_sub(2) {
        let alpha_sq: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum();
        if alpha_sq < 1e-300 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -alpha_sq.sqrt() } else { alpha_sq.sqrt() };
        let mut v = vec![0.0; n];
        v[k + 1] = a[k + 1][k] - alpha;
        for i in k + 2..n {
            v[i] = a[i][k];
        }
        let norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if norm_sq < 1e-300 {
            continue;
        }
        // A <- H A H with H = I - 2 v v^T / |v|^2
        let p: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * v[j]).sum::<f64>() * 2.0 / norm_sq).collect();
        let c: f64 = (0..n).map(|i| v[i] * p[i]).sum::<f64>() / norm_sq;
        let q: Vec<f64> = (0..n).map(|i| p[i] - c * v[i]).collect();
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= v[i] * q[j] + q[i] * v[j];
            }
        }
    }
    let diag = (0..n).map(|i| a[i][i]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| a[i + 1][i]).collect();
    (diag, off)
}
