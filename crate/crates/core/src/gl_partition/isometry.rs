//! Isometry search between small point sets.

use crate::scalar::{eq_tol, Scalar};

use super::FiniteMetricSpace;

/// Largest block the backtracking search accepts.
pub const MAX_ISOMETRY_POINTS: usize = 16;

fn sorted_profile<T: Scalar>(space: &FiniteMetricSpace<T>, point: usize, set: &[usize]) -> Vec<T> {
    let mut row: Vec<T> = set.iter().map(|&q| space.distance(point, q)).collect();
    row.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    row
}

fn same_multiset<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| eq_tol(x, y))
}

/// Searches for a bijection `left -> right` preserving all pairwise distances.
///
/// Returns the image of each `left[i]` as a position in `right`. Callers must
/// keep both sets at or below [`MAX_ISOMETRY_POINTS`].
pub fn find_isometry<T: Scalar>(
    s1: &FiniteMetricSpace<T>,
    left: &[usize],
    s2: &FiniteMetricSpace<T>,
    right: &[usize],
) -> Option<Vec<usize>> {
    if left.len() != right.len() {
        return None;
    }
    let all_pairs = |s: &FiniteMetricSpace<T>, set: &[usize]| {
        let mut v: Vec<T> = Vec::new();
        for (i, &p) in set.iter().enumerate() {
            for &q in &set[i + 1..] {
                v.push(s.distance(p, q));
            }
        }
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        v
    };
    if !same_multiset(&all_pairs(s1, left), &all_pairs(s2, right)) {
        return None;
    }
    let lp: Vec<Vec<T>> = left.iter().map(|&p| sorted_profile(s1, p, left)).collect();
    let rp: Vec<Vec<T>> = right.iter().map(|&p| sorted_profile(s2, p, right)).collect();
    let candidates: Vec<Vec<usize>> =
        lp.iter().map(|l| (0..right.len()).filter(|&j| same_multiset(l, &rp[j])).collect()).collect();

    let mut image = vec![usize::MAX; left.len()];
    let mut used = vec![false; right.len()];
    #[allow(clippy::too_many_arguments)]
    fn extend<T: Scalar>(
        i: usize,
        s1: &FiniteMetricSpace<T>,
        left: &[usize],
        s2: &FiniteMetricSpace<T>,
        right: &[usize],
        candidates: &[Vec<usize>],
        image: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if i == left.len() {
            return true;
        }
        for &j in &candidates[i] {
            if used[j] {
                continue;
            }
            let consistent =
                (0..i).all(|h| eq_tol(s1.distance(left[h], left[i]), s2.distance(right[image[h]], right[j])));
            if !consistent {
                continue;
            }
            image[i] = j;
            used[j] = true;
            if extend(i + 1, s1, left, s2, right, candidates, image, used) {
                return true;
            }
            used[j] = false;
        }
        false
    }
    extend(0, s1, left, s2, right, &candidates, &mut image, &mut used).then_some(image)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflected_triangle_is_isometric() {
        let s1 = FiniteMetricSpace::<u64>::from_line(&[0, 1, 4]).unwrap();
        let s2 = FiniteMetricSpace::<u64>::from_line(&[10, 13, 14]).unwrap();
        let map = find_isometry(&s1, &[0, 1, 2], &s2, &[0, 1, 2]).unwrap();
        assert_eq!(map, vec![2, 1, 0]);
    }

    #[test]
    fn equal_multisets_but_no_isometry() {
        // Both have pairwise distances {1,1,2,2,3,3} with different arrangements.
        let s1 = FiniteMetricSpace::<u64>::new(
            (0..4).map(|i| i.to_string()).collect(),
            vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]],
        )
        .unwrap();
        let s2 = FiniteMetricSpace::<u64>::new(
            (0..4).map(|i| i.to_string()).collect(),
            vec![vec![0, 1, 1, 2], vec![1, 0, 2, 3], vec![1, 2, 0, 3], vec![2, 3, 3, 0]],
        )
        .unwrap();
        assert!(find_isometry(&s1, &[0, 1, 2, 3], &s2, &[0, 1, 2, 3]).is_none());
    }
}
