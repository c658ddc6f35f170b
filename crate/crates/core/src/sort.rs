//! Stable merge sort for comparators that are not guaranteed to be a total
//! order (the continuous-domination predicate is not transitive). The std
//! sorts may panic on such comparators.

use std::cmp::Ordering;

/// Sorts `items` stably with `cmp`. Terminates and yields a permutation for
/// any comparator; equal elements (and comparator cycles) keep input order
/// wherever the merge never has to decide between them.
pub(crate) fn stable_sort_by<T: Clone, F>(items: &mut [T], mut cmp: F)
where
    F: FnMut(&T, &T) -> Ordering,
{
    let n = items.len();
    if n < 2 {
        return;
    }
    let mut buf: Vec<T> = items.to_vec();
    let mut width = 1;
    // src alternates between `items` and `buf`; `in_items` tracks which holds the data.
    let mut in_items = true;
    while width < n {
        {
            let (src, dst): (&[T], &mut [T]) = if in_items {
                (&*items, &mut buf[..])
            } else {
                (&buf[..], &mut *items)
            };
            let mut start = 0;
            while start < n {
                let mid = (start + width).min(n);
                let end = (start + 2 * width).min(n);
                let (mut i, mut j, mut k) = (start, mid, start);
                while i < mid && j < end {
                    // take from the right run only when strictly smaller
                    if cmp(&src[j], &src[i]) == Ordering::Less {
                        dst[k] = src[j].clone();
                        j += 1;
                    } else {
                        dst[k] = src[i].clone();
                        i += 1;
                    }
                    k += 1;
                }
                while i < mid {
                    dst[k] = src[i].clone();
                    i += 1;
                    k += 1;
                }
                while j < end {
                    dst[k] = src[j].clone();
                    j += 1;
                    k += 1;
                }
                start = end;
            }
        }
        in_items = !in_items;
        width *= 2;
    }
    if !in_items {
        items.clone_from_slice(&buf);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_is_stable() {
        let mut v: Vec<(u32, usize)> = [5, 1, 4, 1, 5, 9, 2, 6, 5, 3]
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i))
            .collect();
        stable_sort_by(&mut v, |a, b| a.0.cmp(&b.0));
        let keys: Vec<u32> = v.iter().map(|p| p.0).collect();
        assert_eq!(keys, vec![1, 1, 2, 3, 4, 5, 5, 5, 6, 9]);
        // equal keys keep input order
        let fives: Vec<usize> = v.iter().filter(|p| p.0 == 5).map(|p| p.1).collect();
        assert_eq!(fives, vec![0, 4, 8]);
    }

    #[test]
    fn cyclic_comparator_still_permutes() {
        // rock-paper-scissors ordering
        let mut v: Vec<u8> = (0..30).map(|i| (i % 3) as u8).collect();
        stable_sort_by(&mut v, |a, b| {
            if (a + 1) % 3 == *b {
                Ordering::Less
            } else if (b + 1) % 3 == *a {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        });
        assert_eq!(v.iter().filter(|&&x| x == 0).count(), 10);
        assert_eq!(v.len(), 30);
    }
}
