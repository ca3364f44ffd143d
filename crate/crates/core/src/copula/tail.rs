use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::Autocopula;
use crate::scalar::Real;

/// Lower curve `C(u,u)/u` and upper curve `C̄(u,u)/(1−u)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TailCurves<T> {
    pub u: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> TailCurves<T> {
    /// CSV with columns `u,lower,upper`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "u,lower,upper")?;
        for ((u, l), h) in self.u.iter().zip(&self.lower).zip(&self.upper) {
            writeln!(w, "{u},{l},{h}")?;
        }
        Ok(())
    }
}

/// `[0.02, 0.04, …, 0.98]`.
pub fn default_tail_grid<T: Real>() -> Vec<T> {
    (1..=49)
        .map(|k| T::from_usize_lossy(k) / T::lit(50.0))
        .collect()
}

fn unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// Tail curves of a copula, using
/// `upper(u) = (1 − C(1,u) − C(u,1) + C(u,u))/(1−u)`.
pub fn tail_curves_from_copula<T: Real, C: Autocopula<T> + ?Sized>(
    c: &C,
    grid: &[T],
) -> TailCurves<T> {
    let lower = grid.iter().map(|&u| unit(c.cdf(u, u) / u)).collect();
    let upper = grid
        .iter()
        .map(|&u| {
            unit(
                (T::one() - c.cdf(T::one(), u) - c.cdf(u, T::one()) + c.cdf(u, u)) / (T::one() - u),
            )
        })
        .collect();
    TailCurves {
        u: grid.to_vec(),
        lower,
        upper,
    }
}

/// Tail curves of the rank-based empirical copula of `pairs`.
///
/// Each coordinate is replaced by its rank divided by `n` (ties in index
/// order); `lower(u) = #{R ≤ nu, S ≤ nu}/(nu)` and
/// `upper(u) = #{R > nu, S > nu}/(n(1−u))`, clamped to `[0, 1]`.
pub fn tail_curves_from_pairs<T: Real>(pairs: &[(T, T)], grid: &[T]) -> TailCurves<T> {
    let n = pairs.len();
    let ranks = |get: fn(&(T, T)) -> T| {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            get(&pairs[a])
                .partial_cmp(&get(&pairs[b]))
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut r = vec![0usize; n];
        for (k, &i) in order.iter().enumerate() {
            r[i] = k + 1;
        }
        r
    };
    let r1 = ranks(|p| p.0);
    let r2 = ranks(|p| p.1);
    let nf = T::from_usize_lossy(n);
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    for &u in grid {
        let cut = u * nf;
        let (mut lo, mut hi) = (0usize, 0usize);
        for (&a, &b) in r1.iter().zip(&r2) {
            let (a, b) = (T::from_usize_lossy(a), T::from_usize_lossy(b));
            if a <= cut && b <= cut {
                lo += 1;
            }
            if a > cut && b > cut {
                hi += 1;
            }
        }
        lower.push(unit(T::from_usize_lossy(lo) / cut));
        upper.push(unit(T::from_usize_lossy(hi) / (nf * (T::one() - u))));
    }
    TailCurves {
        u: grid.to_vec(),
        lower,
        upper,
    }
}

/// Consecutive pairs `(v_{t−1}, v_t)`.
pub fn lag_pairs<T: Copy>(v: &[T]) -> Vec<(T, T)> {
    v.windows(2).map(|w| (w[0], w[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::super::families::{Comonotone, Independence};
    use super::*;

    #[test]
    fn closed_form_families() {
        let grid = default_tail_grid::<f64>();
        let ind = tail_curves_from_copula(&Independence, &grid);
        let com = tail_curves_from_copula(&Comonotone, &grid);
        for k in 0..grid.len() {
            assert!((ind.lower[k] - grid[k]).abs() < 1e-14);
            // C̄(u,u) = (1−u)² under independence
            assert!((ind.upper[k] - (1.0 - grid[k])).abs() < 1e-14);
            assert!((com.lower[k] - 1.0).abs() < 1e-14);
            assert!((com.upper[k] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_curves_of_comonotone_pairs() {
        let pairs: Vec<(f64, f64)> = (0..200)
            .map(|i| (i as f64 / 200.0, (i as f64).powi(3)))
            .collect();
        let t = tail_curves_from_pairs(&pairs, &[0.1, 0.5, 0.9]);
        assert_eq!(t.lower, vec![1.0; 3]);
        assert_eq!(t.upper, vec![1.0; 3]);
        let anti: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| (a, -b)).collect();
        let t = tail_curves_from_pairs(&anti, &[0.1, 0.4, 0.6, 0.9]);
        assert_eq!(t.lower[..2], [0.0; 2]);
        assert_eq!(t.upper[2..], [0.0; 2]);
    }

    #[test]
    fn csv_layout() {
        let t = TailCurves {
            u: vec![0.5],
            lower: vec![0.25],
            upper: vec![0.75],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "u,lower,upper\n0.5,0.25,0.75\n"
        );
    }
}
