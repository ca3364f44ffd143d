//! Derivative-free minimizers: Nelder–Mead simplex and golden-section search.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct NelderMeadOptions<T> {
    /// Convergence threshold on the spread of objective values over the simplex.
    pub ftol: T,
    /// Total iteration budget across restarts.
    pub max_iter: usize,
    /// Number of times to rebuild the simplex around the incumbent after it
    /// collapses. Restarting guards against premature contraction.
    pub restarts: usize,
}

impl<T: Real> Default for NelderMeadOptions<T> {
    fn default() -> Self {
        Self {
            ftol: T::lit(1e-8),
            max_iter: 10_000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0` with an axis-aligned initial simplex of
/// edge lengths `step`. Non-finite objective values are treated as `+inf`.
pub fn nelder_mead<T: Real, F: FnMut(&[T]) -> T>(
    mut f: F,
    x0: &[T],
    step: &[T],
    opts: &NelderMeadOptions<T>,
) -> Minimum<T> {
    let n = x0.len();
    assert_eq!(step.len(), n);
    let mut eval = |x: &[T]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            T::infinity()
        }
    };
    let half = T::lit(0.5);
    let two = T::lit(2.0);

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0);
    let mut iterations = 0usize;
    let mut converged = false;

    for round in 0..=opts.restarts {
        let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
        let mut values: Vec<T> = Vec::with_capacity(n + 1);
        simplex.push(best_x.clone());
        values.push(best_f);
        for i in 0..n {
            let mut v = best_x.clone();
            v[i] = v[i] + step[i];
            values.push(eval(&v));
            simplex.push(v);
        }
        let start_f = best_f;
        converged = false;

        while iterations < opts.max_iter {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            if (values[n] - values[0]).abs() <= opts.ftol {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![T::zero(); n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c = *c + *x;
                }
            }
            let nf = T::from_usize_lossy(n);
            for c in centroid.iter_mut() {
                *c = *c / nf;
            }
            let along = |t: T| -> Vec<T> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| *c + t * (*w - *c))
                    .collect()
            };

            let xr = along(-T::one());
            let fr = eval(&xr);
            if fr < values[0] {
                let xe = along(-two);
                let fe = eval(&xe);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
            } else if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
            } else {
                let (xc, fc) = if fr < values[n] {
                    let xc = along(-half);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(half);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < values[n].min(fr) {
                    simplex[n] = xc;
                    values[n] = fc;
                } else {
                    for i in 1..=n {
                        let shrunk: Vec<T> = simplex[0]
                            .iter()
                            .zip(&simplex[i])
                            .map(|(b, x)| *b + half * (*x - *b))
                            .collect();
                        values[i] = eval(&shrunk);
                        simplex[i] = shrunk;
                    }
                }
            }
        }

        let (imin, _) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if values[imin] < best_f {
            best_f = values[imin];
            best_x = simplex[imin].clone();
        }
        if !converged {
            break;
        }
        if round > 0 && (start_f - best_f).abs() <= opts.ftol {
            break;
        }
    }

    Minimum {
        x: best_x,
        value: best_f,
        iterations,
        converged,
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_section<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, xtol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut guard = 0;
    while (b - a).abs() > xtol && guard < 500 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        guard += 1;
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
