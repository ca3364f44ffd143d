use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Maximum jitter applied to tied coordinates before splitting.
pub const TIE_JITTER: f64 = 1e-12;

/// Axis-aligned rectangle `[u1_lo, u1_hi] × [u2_lo, u2_hi]` holding `count` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Rect<T> {
    pub u1_lo: T,
    pub u1_hi: T,
    pub u2_lo: T,
    pub u2_hi: T,
    pub count: u64,
}

impl<T: Real> Rect<T> {
    pub fn area(&self) -> T {
        (self.u1_hi - self.u1_lo) * (self.u2_hi - self.u2_lo)
    }

    pub fn contains(&self, u1: T, u2: T) -> bool {
        u1 >= self.u1_lo && u1 <= self.u1_hi && u2 >= self.u2_lo && u2 <= self.u2_hi
    }
}

/// Tiling of the unit square into rectangles with sample counts.
///
/// Exact tiling is verified when a copula is built from the partition; this
/// type only checks per-rectangle sanity and the count balance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "PartitionRepr<T>",
    into = "PartitionRepr<T>",
    bound = "T: Real"
)]
pub struct RectPartition<T> {
    rects: Vec<Rect<T>>,
    total_count: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct PartitionRepr<T> {
    rectangles: Vec<(T, T, T, T, u64)>,
    total_count: u64,
}

impl<T: Real> TryFrom<PartitionRepr<T>> for RectPartition<T> {
    type Error = Error;
    fn try_from(r: PartitionRepr<T>) -> Result<Self> {
        let rects = r
            .rectangles
            .into_iter()
            .map(|(u1_lo, u1_hi, u2_lo, u2_hi, count)| Rect {
                u1_lo,
                u1_hi,
                u2_lo,
                u2_hi,
                count,
            })
            .collect();
        let p = Self::new(rects)?;
        if p.total_count != r.total_count {
            return Err(Error::InvalidParams(format!(
                "total_count {} does not match rectangle counts {}",
                r.total_count, p.total_count
            )));
        }
        Ok(p)
    }
}

impl<T: Real> From<RectPartition<T>> for PartitionRepr<T> {
    fn from(p: RectPartition<T>) -> Self {
        PartitionRepr {
            rectangles: p
                .rects
                .iter()
                .map(|r| (r.u1_lo, r.u1_hi, r.u2_lo, r.u2_hi, r.count))
                .collect(),
            total_count: p.total_count,
        }
    }
}

impl<T: Real> RectPartition<T> {
    pub fn new(rects: Vec<Rect<T>>) -> Result<Self> {
        if rects.is_empty() {
            return Err(Error::InvalidParams("partition has no rectangles".into()));
        }
        let (zero, one) = (T::zero(), T::one());
        for r in &rects {
            let ok = r.u1_lo >= zero
                && r.u1_lo < r.u1_hi
                && r.u1_hi <= one
                && r.u2_lo >= zero
                && r.u2_lo < r.u2_hi
                && r.u2_hi <= one;
            if !ok {
                return Err(Error::InvalidParams(format!("invalid rectangle {r:?}")));
            }
            if r.count == 0 {
                return Err(Error::InvalidParams(format!("empty rectangle {r:?}")));
            }
        }
        let min = rects.iter().map(|r| r.count).min().unwrap();
        let max = rects.iter().map(|r| r.count).max().unwrap();
        if max > 2 * min {
            return Err(Error::InvalidParams(format!(
                "unbalanced counts: max {max} > 2 × min {min}"
            )));
        }
        let total_count = rects.iter().map(|r| r.count).sum();
        Ok(Self { rects, total_count })
    }

    pub fn rects(&self) -> &[Rect<T>] {
        &self.rects
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }
}

/// `max(32, ⌈n/256⌉)`.
pub fn default_target(n: usize) -> usize {
    32.max(n.div_ceil(256))
}

/// Equal-count partition by recursive median splits, alternating axes and
/// starting with the first coordinate, until every leaf holds at most
/// `target` pairs.
///
/// Splits fall midway between the two middle coordinates, so sibling counts
/// differ by at most one. Tied coordinates are first separated by a
/// deterministic jitter of at most [`TIE_JITTER`].
pub fn build_partition<T: Real>(pairs: &[(T, T)], target: usize) -> Result<RectPartition<T>> {
    if target == 0 {
        return Err(Error::InvalidParams(
            "target_per_rect must be positive".into(),
        ));
    }
    if pairs.len() < 4 * target {
        return Err(Error::InsufficientData(format!(
            "need at least 4 × target = {} pairs, got {}",
            4 * target,
            pairs.len()
        )));
    }
    let (zero, one) = (T::zero(), T::one());
    if pairs
        .iter()
        .any(|&(a, b)| !(a >= zero && a <= one && b >= zero && b <= one))
    {
        return Err(Error::Domain("pairs must lie in [0, 1]²".into()));
    }
    let xs = untie(pairs.iter().map(|p| p.0).collect())?;
    let ys = untie(pairs.iter().map(|p| p.1).collect())?;
    let coords = [xs, ys];

    let mut rects = Vec::new();
    let root = Rect {
        u1_lo: zero,
        u1_hi: one,
        u2_lo: zero,
        u2_hi: one,
        count: 0,
    };
    let mut stack = vec![((0..pairs.len()).collect::<Vec<_>>(), root, 0usize)];
    // depth-first, left child first, so leaf order is deterministic
    while let Some((mut idx, rect, axis)) = stack.pop() {
        if idx.len() <= target {
            rects.push(Rect {
                count: idx.len() as u64,
                ..rect
            });
            continue;
        }
        let split = [axis, 1 - axis]
            .into_iter()
            .find_map(|ax| median_split(&coords[ax], &mut idx, &rect, ax).map(|s| (ax, s)));
        let Some((ax, s)) = split else {
            rects.push(Rect {
                count: idx.len() as u64,
                ..rect
            });
            continue;
        };
        let right = idx.split_off(idx.len() / 2);
        let (mut lo, mut hi) = (rect, rect);
        if ax == 0 {
            lo.u1_hi = s;
            hi.u1_lo = s;
        } else {
            lo.u2_hi = s;
            hi.u2_lo = s;
        }
        stack.push((right, hi, 1 - ax));
        stack.push((idx, lo, 1 - ax));
    }
    RectPartition::new(rects)
        .map_err(|e| Error::Degenerate(format!("partition could not be balanced: {e}")))
}

/// Sorts `idx` by coordinate and returns the split point between the two
/// middle values, or `None` if it would give a zero-width child.
fn median_split<T: Real>(c: &[T], idx: &mut [usize], rect: &Rect<T>, axis: usize) -> Option<T> {
    idx.sort_by(|&a, &b| c[a].partial_cmp(&c[b]).unwrap().then(a.cmp(&b)));
    let k = idx.len() / 2;
    let (a, b) = (c[idx[k - 1]], c[idx[k]]);
    let s = a + (b - a) / T::lit(2.0);
    let (lo, hi) = if axis == 0 {
        (rect.u1_lo, rect.u1_hi)
    } else {
        (rect.u2_lo, rect.u2_hi)
    };
    (s > lo && s < hi && a < b).then_some(s)
}

/// Spreads runs of equal values over at most `TIE_JITTER`, staying strictly
/// between the neighbouring distinct values and inside `[0, 1]`.
fn untie<T: Real>(mut v: Vec<T>) -> Result<Vec<T>> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap().then(a.cmp(&b)));
    let jit = T::lit(TIE_JITTER);
    let mut s = 0;
    while s < order.len() {
        let val = v[order[s]];
        let mut e = s + 1;
        while e < order.len() && v[order[e]] == val {
            e += 1;
        }
        let m = e - s;
        if m > 1 {
            let above = if e < order.len() {
                v[order[e]]
            } else {
                T::one()
            } - val;
            let below = val - if s > 0 { v[order[s - 1]] } else { T::zero() };
            let (room, sign) = if above >= below {
                (above, T::one())
            } else {
                (below, -T::one())
            };
            let step = jit.min(room / T::lit(2.0)) / T::from_usize_lossy(m);
            for (k, &i) in order[s..e].iter().enumerate() {
                v[i] = val + sign * step * T::from_usize_lossy(k);
            }
            if order[s..e].windows(2).any(|w| v[w[0]] == v[w[1]]) {
                return Err(Error::Degenerate(format!(
                    "{m} tied coordinates at {val} cannot be separated"
                )));
            }
        }
        s = e;
    }
    Ok(v)
}
