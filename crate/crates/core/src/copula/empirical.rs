use serde::{Deserialize, Serialize};

use super::partition::{build_partition, RectPartition};
use super::piecewise::{cell_index, interp, PiecewiseLinear};
use super::{Autocopula, Conditioning};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const COPULA_FORMAT_VERSION: u32 = 1;

/// Piecewise-bilinear copula built from a rectangle partition of PIT pairs.
///
/// The joint distribution `Φ` has constant density on each rectangle. Its
/// cumulative mass is tabulated at the corners of the refined grid (all
/// distinct rectangle edges) as integer multiples of `2^-p`, where `p` is the
/// mantissa width of `T`; every cell receives at least one unit. Corner
/// values and all their differences are therefore exact, which makes the
/// boundary conditions and 2-increasing property hold without rounding slack.
///
/// `Φ₁(x) = Φ(x, 1)` and `Φ₂(y) = Φ(1, y)` are piecewise linear with knots at
/// the grid edges, so `C(u₁, u₂) = Φ(Φ₁⁻¹(u₁), Φ₂⁻¹(u₂))` is bilinear on the
/// image grid `Φ₁(X) × Φ₂(Y)` with the same corner table.
#[derive(Debug, Clone)]
pub struct EmpiricalAutocopula<T> {
    partition: RectPartition<T>,
    xs: Vec<T>,
    ys: Vec<T>,
    /// `(nx+1) × (ny+1)` row-major cumulative masses; row index follows `xs`.
    mass: Vec<T>,
    p1: Vec<T>,
    p2: Vec<T>,
    /// Owning rectangle of each refined cell, `nx × ny` row-major.
    owner: Vec<usize>,
}

impl<T: Real> PartialEq for EmpiricalAutocopula<T> {
    fn eq(&self, other: &Self) -> bool {
        self.partition == other.partition
    }
}

impl<T: Real> EmpiricalAutocopula<T> {
    /// Partitions the pairs (see [`build_partition`]) and builds the copula.
    pub fn fit(pairs: &[(T, T)], target_per_rect: usize) -> Result<Self> {
        Self::from_partition(build_partition(pairs, target_per_rect)?)
    }

    /// Builds `Φ` from a partition, verifying that it tiles the unit square.
    pub fn from_partition(partition: RectPartition<T>) -> Result<Self> {
        let rects = partition.rects();
        let xs = edges(rects.iter().flat_map(|r| [r.u1_lo, r.u1_hi]));
        let ys = edges(rects.iter().flat_map(|r| [r.u2_lo, r.u2_hi]));
        if xs[0] != T::zero()
            || ys[0] != T::zero()
            || xs[xs.len() - 1] != T::one()
            || ys[ys.len() - 1] != T::one()
        {
            return Err(Error::InvalidParams(
                "rectangles do not span [0, 1]²".into(),
            ));
        }
        let (nx, ny) = (xs.len() - 1, ys.len() - 1);
        let locate = |k: &[T], v: T| k.binary_search_by(|a| a.partial_cmp(&v).unwrap()).unwrap();

        const NONE: usize = usize::MAX;
        let mut owner = vec![NONE; nx * ny];
        let mut spans = Vec::with_capacity(rects.len());
        for (r_idx, r) in rects.iter().enumerate() {
            let (i0, i1) = (locate(&xs, r.u1_lo), locate(&xs, r.u1_hi));
            let (j0, j1) = (locate(&ys, r.u2_lo), locate(&ys, r.u2_hi));
            for i in i0..i1 {
                for j in j0..j1 {
                    let o = &mut owner[i * ny + j];
                    if *o != NONE {
                        return Err(Error::InvalidParams(format!(
                            "rectangles {} and {r_idx} overlap",
                            *o
                        )));
                    }
                    *o = r_idx;
                }
            }
            spans.push((i0, i1, j0, j1));
        }
        if owner.contains(&NONE) {
            return Err(Error::InvalidParams(
                "rectangles leave part of [0, 1]² uncovered".into(),
            ));
        }

        let units = mass_units::<T>();
        let total = partition.total_count();
        let rect_units = apportion(
            &rects
                .iter()
                .map(|r| r.count as f64 / total as f64)
                .collect::<Vec<_>>(),
            units,
            0,
        );
        let mut cell_units = vec![0u64; nx * ny];
        for (r_idx, &(i0, i1, j0, j1)) in spans.iter().enumerate() {
            let mut cells = Vec::new();
            let mut w = Vec::new();
            for i in i0..i1 {
                for j in j0..j1 {
                    cells.push(i * ny + j);
                    w.push(((xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j])).as_f64());
                }
            }
            let wsum: f64 = w.iter().sum();
            let shares: Vec<f64> = w.iter().map(|a| a / wsum).collect();
            if rect_units[r_idx] < cells.len() as u64 {
                return Err(Error::Degenerate(
                    "too many grid cells for the mass resolution".into(),
                ));
            }
            for (c, u) in cells
                .into_iter()
                .zip(apportion(&shares, rect_units[r_idx], 1))
            {
                cell_units[c] = u;
            }
        }

        let mut cum = vec![0u64; (nx + 1) * (ny + 1)];
        for i in 0..nx {
            for j in 0..ny {
                cum[(i + 1) * (ny + 1) + j + 1] =
                    cum[i * (ny + 1) + j + 1] + cum[(i + 1) * (ny + 1) + j] - cum[i * (ny + 1) + j]
                        + cell_units[i * ny + j];
            }
        }
        debug_assert_eq!(cum[cum.len() - 1], units);
        let scale = T::one() / T::from_u64(units).unwrap();
        let mass: Vec<T> = cum
            .iter()
            .map(|&c| T::from_u64(c).unwrap() * scale)
            .collect();
        let p1 = (0..=nx).map(|i| mass[i * (ny + 1) + ny]).collect();
        let p2 = (0..=ny).map(|j| mass[nx * (ny + 1) + j]).collect();
        Ok(Self {
            partition,
            xs,
            ys,
            mass,
            p1,
            p2,
            owner,
        })
    }

    pub fn partition(&self) -> &RectPartition<T> {
        &self.partition
    }

    /// Refined grid edges on the first and second axis.
    pub fn grid(&self) -> (&[T], &[T]) {
        (&self.xs, &self.ys)
    }

    /// Knot values `Φ₁(xs)` and `Φ₂(ys)`.
    pub fn marginal_knots(&self) -> (&[T], &[T]) {
        (&self.p1, &self.p2)
    }

    /// Cumulative mass at grid corner `(i, j)`.
    pub fn corner(&self, i: usize, j: usize) -> T {
        self.mass[i * (self.ys.len()) + j]
    }

    fn bilinear(&self, kx: &[T], ky: &[T], x: T, y: T) -> T {
        let (x, y) = (clamp01(x), clamp01(y));
        let i = cell_index(kx, x);
        let j = cell_index(ky, y);
        let wx = (x - kx[i]) / (kx[i + 1] - kx[i]);
        let wy = (y - ky[j]) / (ky[j + 1] - ky[j]);
        let lo = lerp(self.corner(i, j), self.corner(i + 1, j), wx);
        let hi = lerp(self.corner(i, j + 1), self.corner(i + 1, j + 1), wx);
        lerp(lo, hi, wy)
    }

    /// Joint distribution function `Φ(x, y)` of the PIT pairs.
    pub fn phi(&self, x: T, y: T) -> T {
        self.bilinear(&self.xs, &self.ys, x, y)
    }

    pub fn phi1(&self, x: T) -> T {
        interp(&self.xs, &self.p1, clamp01(x))
    }
    pub fn phi2(&self, y: T) -> T {
        interp(&self.ys, &self.p2, clamp01(y))
    }
    pub fn phi1_inv(&self, u: T) -> T {
        interp(&self.p1, &self.xs, clamp01(u))
    }
    pub fn phi2_inv(&self, u: T) -> T {
        interp(&self.p2, &self.ys, clamp01(u))
    }

    /// Density of `Φ` at `(x, y)`: `count / (total · area)` of the owning rectangle.
    pub fn density(&self, x: T, y: T) -> T {
        let i = cell_index(&self.xs, clamp01(x));
        let j = cell_index(&self.ys, clamp01(y));
        let r = &self.partition.rects()[self.owner[i * (self.ys.len() - 1) + j]];
        T::from_u64(r.count).unwrap()
            / (T::from_u64(self.partition.total_count()).unwrap() * r.area())
    }

    /// `u ↦ C(u₁, u)/u₁`, knotted at `Φ₂(ys)`.
    pub fn conditional_cdf(&self, u1: T) -> Result<PiecewiseLinear<T>> {
        if !(u1 > T::zero() && u1 <= T::one()) {
            return Err(Error::Domain(format!(
                "conditioning value must be in (0, 1], got {u1}"
            )));
        }
        let i = cell_index(&self.p1, u1);
        let wx = (u1 - self.p1[i]) / (self.p1[i + 1] - self.p1[i]);
        let ny = self.ys.len() - 1;
        let mut ys: Vec<T> = (0..=ny)
            .map(|j| {
                (lerp_monotone(self.corner(i, j), self.corner(i + 1, j), wx) / u1).min(T::one())
            })
            .collect();
        ys[0] = T::zero();
        ys[ny] = T::one();
        Ok(PiecewiseLinear::new_unchecked(self.p2.clone(), ys))
    }

    /// `u ↦ ∂C/∂u₁(u₁, u)`, exact on the bilinear cell containing `u₁`
    /// (the right-hand cell at a knot).
    pub fn conditional_partial_cdf(&self, u1: T) -> PiecewiseLinear<T> {
        let i = cell_index(&self.p1, clamp01(u1));
        let ny = self.ys.len() - 1;
        let width = self.corner(i + 1, ny) - self.corner(i, ny);
        let mut ys: Vec<T> = (0..=ny)
            .map(|j| ((self.corner(i + 1, j) - self.corner(i, j)) / width).min(T::one()))
            .collect();
        ys[ny] = T::one();
        PiecewiseLinear::new_unchecked(self.p2.clone(), ys)
    }
}

impl<T: Real> Autocopula<T> for EmpiricalAutocopula<T> {
    fn cdf(&self, u1: T, u2: T) -> T {
        self.bilinear(&self.p1, &self.p2, u1, u2)
    }

    fn to_copula_scale(&self, v: T) -> T {
        self.phi1(v)
    }

    fn from_copula_scale(&self, u: T) -> T {
        self.phi2_inv(u)
    }

    fn conditional(&self, u1: T, u: T, mode: Conditioning) -> Result<T> {
        Ok(match mode {
            Conditioning::Cumulative => self.conditional_cdf(u1)?.eval(u),
            Conditioning::Partial => self.conditional_partial_cdf(u1).eval(u),
        })
    }

    fn sample_conditional(&self, u1: T, w: T, mode: Conditioning) -> Result<T> {
        Ok(match mode {
            Conditioning::Cumulative => self.conditional_cdf(u1)?.inverse(w),
            Conditioning::Partial => self.conditional_partial_cdf(u1).inverse(w),
        })
    }
}

fn clamp01<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

fn lerp<T: Real>(a: T, b: T, w: T) -> T {
    a + w * (b - a)
}

/// `(1-w)a + wb`: nondecreasing in `a` and `b` under rounding.
fn lerp_monotone<T: Real>(a: T, b: T, w: T) -> T {
    (T::one() - w) * a + w * b
}

fn edges<T: Real>(it: impl Iterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = it.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// Mass resolution: one unit is `2^-p` with `p` the significand width, so
/// every cumulative sum up to 1 is exactly representable in `T`.
fn mass_units<T: Real>() -> u64 {
    (2.0 / T::epsilon().as_f64()).round() as u64
}

/// Splits `total` integer units in proportion to `shares` (summing to about
/// one) by largest remainder, giving every entry at least `min_each`.
fn apportion(shares: &[f64], total: u64, min_each: u64) -> Vec<u64> {
    let base = min_each * shares.len() as u64;
    let rest = (total - base) as f64;
    let mut out: Vec<u64> = shares
        .iter()
        .map(|s| min_each + (s * rest).floor() as u64)
        .collect();
    let assigned: u64 = out.iter().sum();
    if assigned > total {
        // float rounding overshoot; trim from the largest entries
        let mut order: Vec<usize> = (0..out.len()).collect();
        order.sort_by(|&a, &b| out[b].cmp(&out[a]).then(a.cmp(&b)));
        for &k in order.iter().cycle().take((assigned - total) as usize) {
            out[k] -= 1;
        }
        return out;
    }
    let mut order: Vec<usize> = (0..out.len()).collect();
    let frac = |k: usize| shares[k] * rest - (shares[k] * rest).floor();
    order.sort_by(|&a, &b| frac(b).partial_cmp(&frac(a)).unwrap().then(a.cmp(&b)));
    for &k in order.iter().cycle().take((total - assigned) as usize) {
        out[k] += 1;
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct CopulaFile<T> {
    version: u32,
    #[serde(flatten)]
    partition: RectPartition<T>,
    phi1_knots: Knots<T>,
    phi2_knots: Knots<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct Knots<T> {
    x: Vec<T>,
    u: Vec<T>,
}

impl<T: Real> Serialize for EmpiricalAutocopula<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CopulaFile {
            version: COPULA_FORMAT_VERSION,
            partition: self.partition.clone(),
            phi1_knots: Knots {
                x: self.xs.clone(),
                u: self.p1.clone(),
            },
            phi2_knots: Knots {
                x: self.ys.clone(),
                u: self.p2.clone(),
            },
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for EmpiricalAutocopula<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = CopulaFile::<T>::deserialize(d)?;
        if f.version != COPULA_FORMAT_VERSION {
            return Err(D::Error::custom(format!(
                "unsupported copula version {}",
                f.version
            )));
        }
        let c = Self::from_partition(f.partition).map_err(D::Error::custom)?;
        let same = c.xs == f.phi1_knots.x
            && c.p1 == f.phi1_knots.u
            && c.ys == f.phi2_knots.x
            && c.p2 == f.phi2_knots.u;
        if !same {
            return Err(D::Error::custom(
                "stored marginal knots disagree with the rectangles",
            ));
        }
        Ok(c)
    }
}
