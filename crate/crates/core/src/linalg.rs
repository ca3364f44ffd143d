//! Dense least squares by Householder QR.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct LeastSquares<T> {
    pub coeffs: Vec<T>,
    /// Columns found linearly dependent on earlier columns; their coefficient is zero.
    pub dropped: Vec<usize>,
}

/// Solves `min ||A x - y||` for a row-major `rows × cols` matrix.
///
/// Columns are processed in order; a column whose component orthogonal to the
/// span of the preceding kept columns is below `rel_tol` times its own norm is
/// dropped, so earlier columns take precedence in rank-deficient designs.
pub fn least_squares<T: Real>(
    a: &[T],
    rows: usize,
    cols: usize,
    y: &[T],
    rel_tol: T,
) -> LeastSquares<T> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(y.len(), rows);
    let mut m = a.to_vec();
    let mut rhs = y.to_vec();
    let at = |i: usize, j: usize| i * cols + j;

    let col_norms: Vec<T> = (0..cols)
        .map(|j| {
            (0..rows)
                .map(|i| m[at(i, j)] * m[at(i, j)])
                .sum::<T>()
                .sqrt()
        })
        .collect();

    let mut kept: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    let mut rank = 0usize;
    for j in 0..cols {
        if rank >= rows {
            dropped.push(j);
            continue;
        }
        let norm = (rank..rows)
            .map(|i| m[at(i, j)] * m[at(i, j)])
            .sum::<T>()
            .sqrt();
        if col_norms[j] == T::zero() || norm <= rel_tol * col_norms[j] {
            dropped.push(j);
            continue;
        }
        let x0 = m[at(rank, j)];
        let alpha = if x0 > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (rank..rows).map(|i| m[at(i, j)]).collect();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|x| *x * *x).sum();
        if vnorm2 > T::zero() {
            for jj in j..cols {
                reflect(&v, vnorm2, |k| at(rank + k, jj), &mut m);
            }
            reflect(&v, vnorm2, |k| rank + k, &mut rhs);
        }
        kept.push(j);
        rank += 1;
    }

    let mut coeffs = vec![T::zero(); cols];
    for r in (0..rank).rev() {
        let j = kept[r];
        let mut s = rhs[r];
        for &jj in kept.iter().skip(r + 1) {
            s = s - m[at(r, jj)] * coeffs[jj];
        }
        coeffs[j] = s / m[at(r, j)];
    }
    LeastSquares { coeffs, dropped }
}

/// Applies `I - 2 v vᵀ / |v|²` to the entries of `data` addressed by `index(k)`.
fn reflect<T: Real>(v: &[T], vnorm2: T, index: impl Fn(usize) -> usize, data: &mut [T]) {
    let dot: T = v
        .iter()
        .enumerate()
        .map(|(k, vk)| *vk * data[index(k)])
        .sum();
    let scale = T::lit(2.0) * dot / vnorm2;
    for (k, vk) in v.iter().enumerate() {
        let p = index(k);
        data[p] = data[p] - scale * *vk;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_linear_model() {
        let rows = 20;
        let mut a = Vec::new();
        let mut y = Vec::new();
        for i in 0..rows {
            let x = i as f64 * 0.3;
            a.extend_from_slice(&[1.0, x, x * x]);
            y.push(2.0 - 0.5 * x + 0.25 * x * x);
        }
        let ls = least_squares(&a, rows, 3, &y, 1e-10);
        assert!(ls.dropped.is_empty());
        for (c, w) in ls.coeffs.iter().zip([2.0, -0.5, 0.25]) {
            assert!((c - w).abs() < 1e-12);
        }
    }

    #[test]
    fn drops_later_dependent_column() {
        let rows = 10;
        let mut a = Vec::new();
        let mut y = Vec::new();
        for i in 0..rows {
            a.extend_from_slice(&[1.0, i as f64, 3.0]);
            y.push(1.0 + i as f64);
        }
        let ls = least_squares(&a, rows, 3, &y, 1e-10);
        assert_eq!(ls.dropped, vec![2]);
        assert!((ls.coeffs[0] - 1.0).abs() < 1e-12);
        assert!((ls.coeffs[1] - 1.0).abs() < 1e-12);
        assert_eq!(ls.coeffs[2], 0.0);
    }
}
