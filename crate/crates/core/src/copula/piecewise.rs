use crate::error::{Error, Result};
use crate::scalar::Real;

/// Continuous nondecreasing piecewise-linear function through `(xs[i], ys[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<T> {
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Real> PiecewiseLinear<T> {
    /// Requires at least two knots, strictly increasing `xs` and
    /// nondecreasing `ys`.
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidParams(
                "need at least two knots of matching length".into(),
            ));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("knots must be finite".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams(
                "knot abscissae must be strictly increasing".into(),
            ));
        }
        if ys.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParams(
                "knot values must be nondecreasing".into(),
            ));
        }
        Ok(Self { xs, ys })
    }

    pub(crate) fn new_unchecked(xs: Vec<T>, ys: Vec<T>) -> Self {
        debug_assert!(Self::new(xs.clone(), ys.clone()).is_ok());
        Self { xs, ys }
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }
    pub fn ys(&self) -> &[T] {
        &self.ys
    }

    /// Value at `x`, clamped to the end values outside the knot range.
    pub fn eval(&self, x: T) -> T {
        interp(&self.xs, &self.ys, x)
    }

    /// Smallest `x` with `f(x) = y` for `y` within the value range; values
    /// outside it are clamped to the end knots.
    pub fn inverse(&self, y: T) -> T {
        let n = self.ys.len();
        if !(y > self.ys[0]) {
            return self.xs[0];
        }
        if y >= self.ys[n - 1] {
            // first knot that reaches the top value
            let k = self.ys.partition_point(|&v| v < self.ys[n - 1]);
            return self.xs[k];
        }
        // ys[k-1] < y <= ys[k]
        let k = self.ys.partition_point(|&v| v < y);
        lerp_inverse(self.xs[k - 1], self.xs[k], self.ys[k - 1], self.ys[k], y)
    }
}

/// Linear interpolation through sorted `xs`, clamped outside.
pub(crate) fn interp<T: Real>(xs: &[T], ys: &[T], x: T) -> T {
    let n = xs.len();
    if !(x > xs[0]) {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x); // xs[k-1] <= x < xs[k]
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    ys[k - 1] + w * (ys[k] - ys[k - 1])
}

fn lerp_inverse<T: Real>(x0: T, x1: T, y0: T, y1: T, y: T) -> T {
    let w = (y - y0) / (y1 - y0);
    (x0 + w * (x1 - x0)).max(x0).min(x1)
}

/// Index `i` with `knots[i] <= x < knots[i+1]`, clamped to the last cell.
pub(crate) fn cell_index<T: Real>(knots: &[T], x: T) -> usize {
    let k = knots.partition_point(|&v| v <= x);
    k.clamp(1, knots.len() - 1) - 1
}
