use super::{Frame, FrameClass, KripkeError};
use crate::limits::Limits;

/// Every frame with `1..=max_worlds` worlds in `class`, ordered by world
/// count and then by edge code. With `dedup`, only the representative
/// with the least code in each isomorphism class is kept.
pub fn enumerate_frames(
    max_worlds: usize,
    class: FrameClass,
    dedup: bool,
    limits: &Limits,
) -> Result<impl Iterator<Item = Frame>, KripkeError> {
    let cap = limits.max_frame_worlds.min(8);
    if max_worlds > cap {
        return Err(KripkeError::CapExceeded {
            requested: max_worlds,
            cap,
        });
    }
    Ok((1..=max_worlds).flat_map(move |n| {
        let perms = if dedup { permutations(n) } else { Vec::new() };
        let diagonal = diagonal_mask(n);
        let (free_mask, fixed) = if class.requires_reflexive() {
            (full_mask(n) & !diagonal, diagonal)
        } else if class == FrameClass::StrictPartialOrder {
            (full_mask(n) & !diagonal, 0)
        } else {
            (full_mask(n), 0)
        };
        let free_bits = free_mask.count_ones();
        (0..(1u64 << free_bits)).filter_map(move |i| {
            let code = deposit(i, free_mask) | fixed;
            let fr = Frame::from_code(n, code);
            if !class.contains(&fr) {
                return None;
            }
            if dedup && perms.iter().any(|p| permuted_code(code, n, p) < code) {
                return None;
            }
            Some(fr)
        })
    }))
}

pub fn frame_count(
    max_worlds: usize,
    class: FrameClass,
    dedup: bool,
    limits: &Limits,
) -> Result<usize, KripkeError> {
    Ok(enumerate_frames(max_worlds, class, dedup, limits)?.count())
}

/// Least edge code over all relabelings of `fr` (at most 8 worlds).
pub fn canonical_code(fr: &Frame) -> u64 {
    let n = fr.world_count();
    let code = fr.code();
    permutations(n)
        .iter()
        .map(|p| permuted_code(code, n, p))
        .min()
        .unwrap_or(code)
}

pub fn is_canonical(fr: &Frame) -> bool {
    canonical_code(fr) == fr.code()
}

fn full_mask(n: usize) -> u64 {
    if n * n >= 64 {
        u64::MAX
    } else {
        (1u64 << (n * n)) - 1
    }
}

fn diagonal_mask(n: usize) -> u64 {
    (0..n).fold(0u64, |acc, i| acc | (1u64 << (i * n + i)))
}

/// Scatter the low bits of `value` into the set bits of `mask`, in order.
fn deposit(mut value: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut m = mask;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        if value & 1 != 0 {
            out |= bit;
        }
        value >>= 1;
        m &= m - 1;
    }
    out
}

fn permuted_code(code: u64, n: usize, perm: &[usize]) -> u64 {
    let mut out = 0u64;
    let mut c = code;
    while c != 0 {
        let bit = c.trailing_zeros() as usize;
        c &= c - 1;
        let (i, j) = (bit / n, bit % n);
        out |= 1u64 << (perm[i] * n + perm[j]);
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(n: usize, class: FrameClass, dedup: bool) -> usize {
        frame_count(n, class, dedup, &Limits::default()).unwrap()
    }

    /// Count with the class predicate applied to every raw relation, with no
    /// reflexivity shortcut and with isomorphism checked by brute force.
    fn brute_count(n: usize, class: FrameClass, dedup: bool) -> usize {
        let mut seen: Vec<Frame> = Vec::new();
        let mut total = 0;
        for k in 1..=n {
            for code in 0..(1u64 << (k * k)) {
                let fr = Frame::from_code(k, code);
                if !class.contains(&fr) {
                    continue;
                }
                if dedup {
                    let iso = seen.iter().any(|g| {
                        g.world_count() == k
                            && permutations(k).iter().any(|p| fr.permuted(p) == *g)
                    });
                    if iso {
                        continue;
                    }
                    seen.push(fr);
                }
                total += 1;
            }
        }
        total
    }

    #[test]
    fn single_world_preorder() {
        let frames: Vec<Frame> = enumerate_frames(1, FrameClass::Preorder, false, &Limits::default())
            .unwrap()
            .collect();
        assert_eq!(frames, vec![Frame::new(1, [(0, 0)]).unwrap()]);
    }

    #[test]
    fn arbitrary_counts() {
        // One-world frames (2) plus two-world frames (16).
        assert_eq!(count(2, FrameClass::Arbitrary, false), 2 + 16);
        let two_world_only = enumerate_frames(2, FrameClass::Arbitrary, false, &Limits::default())
            .unwrap()
            .filter(|f| f.world_count() == 2)
            .count();
        assert_eq!(two_world_only, 16);
    }

    #[test]
    fn directed_preorders_up_to_two_worlds() {
        // Frozen from the brute-force oracle below: the point, the 2-chain,
        // the 2-cluster and two disjoint points.
        assert_eq!(brute_count(2, FrameClass::DirectedPreorder, true), 4);
        assert_eq!(count(2, FrameClass::DirectedPreorder, true), 4);
    }

    #[test]
    fn enumeration_matches_brute_force_oracle() {
        for class in FrameClass::ALL {
            for dedup in [false, true] {
                assert_eq!(
                    count(3, class, dedup),
                    brute_count(3, class, dedup),
                    "{class} dedup={dedup}"
                );
            }
        }
    }

    #[test]
    fn known_preorder_counts() {
        // Labeled and unlabeled preorders on exactly n points: 1, 4, 29, 355
        // and 1, 3, 9, 33.
        let exact = |n: usize, dedup: bool| {
            enumerate_frames(n, FrameClass::Preorder, dedup, &Limits::default())
                .unwrap()
                .filter(|f| f.world_count() == n)
                .count()
        };
        assert_eq!((1..=4).map(|n| exact(n, false)).collect::<Vec<_>>(), vec![1, 4, 29, 355]);
        assert_eq!((1..=4).map(|n| exact(n, true)).collect::<Vec<_>>(), vec![1, 3, 9, 33]);
    }

    #[test]
    fn order_is_by_size_then_code() {
        let frames: Vec<Frame> = enumerate_frames(3, FrameClass::Preorder, false, &Limits::default())
            .unwrap()
            .collect();
        for pair in frames.windows(2) {
            let key = |f: &Frame| (f.world_count(), f.code());
            assert!(key(&pair[0]) < key(&pair[1]));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let limits = Limits {
            max_frame_worlds: 3,
            ..Limits::default()
        };
        assert!(matches!(
            enumerate_frames(4, FrameClass::Preorder, false, &limits),
            Err(KripkeError::CapExceeded { requested: 4, cap: 3 })
        ));
    }

    #[test]
    fn canonical_code_is_relabeling_invariant() {
        let fr = Frame::new(3, [(0, 0), (1, 1), (2, 2), (2, 0)]).unwrap();
        let c = canonical_code(&fr);
        for p in permutations(3) {
            assert_eq!(canonical_code(&fr.permuted(&p)), c);
        }
    }
}
