//! Pareto dominance, fast non-dominated sorting and crowding distance.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `a` dominates `b` under minimization: no worse anywhere, better somewhere.
pub fn dominates<T: Scalar>(a: &[T], b: &[T]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked<T: Scalar>(a: &[T], b: &[T]) -> bool {
    let mut strictly = false;
    for (&x, &y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Partitions objective vectors into successive non-dominated fronts.
/// Indices inside each front are ascending.
pub fn fast_non_dominated_sort<T: Scalar, V: AsRef<[T]>>(objectives: &[V]) -> Result<Vec<Vec<usize>>> {
    let n = objectives.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = objectives[0].as_ref().len();
    for (i, o) in objectives.iter().enumerate() {
        let o = o.as_ref();
        if o.is_empty() {
            return Err(Error::Unevaluated { index: i });
        }
        if o.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: o.len(),
            });
        }
    }
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (objectives[i].as_ref(), objectives[j].as_ref());
            if dominates_unchecked(a, b) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates_unchecked(b, a) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(fronts)
}

/// Rank per index from a list of fronts.
pub fn ranks_from_fronts(fronts: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut ranks = vec![0; n];
    for (r, f) in fronts.iter().enumerate() {
        for &i in f {
            ranks[i] = r;
        }
    }
    ranks
}

/// Crowding distance of each member of one front.
///
/// Per objective, members are sorted by value; the two extremes get
/// +inf and interior members accumulate (next - prev) / (max - min).
/// Objectives that are constant over the front contribute nothing.
pub fn crowding_distance<T: Scalar, V: AsRef<[T]>>(front: &[V]) -> Vec<T> {
    let n = front.len();
    if n <= 2 {
        return vec![T::infinity(); n];
    }
    let m = front[0].as_ref().len();
    let mut dist = vec![T::zero(); n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let val = |i: usize| front[i].as_ref()[k];
        order.sort_by(|&a, &b| val(a).partial_cmp(&val(b)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        let (lo, hi) = (val(order[0]), val(order[n - 1]));
        let span = hi - lo;
        if span <= T::zero() {
            continue;
        }
        dist[order[0]] = T::infinity();
        dist[order[n - 1]] = T::infinity();
        for w in order.windows(3) {
            let mid = w[1];
            if dist[mid].is_finite() {
                dist[mid] = dist[mid] + (val(w[2]) - val(w[0])) / span;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[1.0, 1.0], &[2.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[2.0, 1.0]).unwrap());
        assert!(!dominates(&[2.0, 1.0], &[1.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(dominates(&[1.0, 1.0], &[1.0, 2.0]).unwrap());
        assert!(dominates(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn chain_and_antichain() {
        let chain = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert_eq!(fast_non_dominated_sort(&chain).unwrap(), vec![vec![0], vec![1], vec![2]]);
        let anti = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(fast_non_dominated_sort(&anti).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn unevaluated_rejected() {
        let objs: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![]];
        assert!(matches!(fast_non_dominated_sort(&objs), Err(Error::Unevaluated { index: 1 })));
    }

    #[test]
    fn crowding_examples() {
        assert_eq!(crowding_distance(&[[1.0, 2.0]]), vec![f64::INFINITY]);
        assert_eq!(crowding_distance(&[[1.0, 2.0], [2.0, 1.0]]), vec![f64::INFINITY; 2]);
        let d = crowding_distance(&[[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]]);
        assert_eq!(d[0], f64::INFINITY);
        assert_eq!(d[2], f64::INFINITY);
        assert_eq!(d[1], 2.0);
    }

    #[test]
    fn degenerate_objective_contributes_nothing() {
        let d = crowding_distance(&[[1.0, 5.0], [2.0, 5.0], [4.0, 5.0]]);
        assert_eq!(d, vec![f64::INFINITY, 1.0, f64::INFINITY]);
        let d = crowding_distance(&[[5.0, 5.0], [5.0, 5.0], [5.0, 5.0]]);
        assert_eq!(d, vec![0.0; 3]);
    }
}
