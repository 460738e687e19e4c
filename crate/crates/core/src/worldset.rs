use std::fmt;

/// Largest number of worlds a [`WorldSet`] can index.
pub const MAX_WORLDS: usize = 256;

const WORDS: usize = MAX_WORLDS / 64;

/// Fixed-capacity bit set over world indices `0..MAX_WORLDS`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct WorldSet([u64; WORDS]);

impl WorldSet {
    pub const fn empty() -> Self {
        WorldSet([0; WORDS])
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_WORLDS, "world index out of range");
        let mut words = [0u64; WORDS];
        for (i, word) in words.iter_mut().enumerate() {
            let lo = i * 64;
            if n >= lo + 64 {
                *word = u64::MAX;
            } else if n > lo {
                *word = (1u64 << (n - lo)) - 1;
            }
        }
        WorldSet(words)
    }

    pub fn singleton(w: usize) -> Self {
        let mut s = Self::empty();
        s.insert(w);
        s
    }

    /// Bits of `mask` read as worlds `0..64`.
    pub fn from_mask(mask: u64) -> Self {
        let mut words = [0u64; WORDS];
        words[0] = mask;
        WorldSet(words)
    }

    /// Low 64 worlds as a mask.
    pub fn low_mask(&self) -> u64 {
        self.0[0]
    }

    pub fn insert(&mut self, w: usize) {
        assert!(w < MAX_WORLDS, "world index out of range");
        self.0[w / 64] |= 1u64 << (w % 64);
    }

    pub fn remove(&mut self, w: usize) {
        if w < MAX_WORLDS {
            self.0[w / 64] &= !(1u64 << (w % 64));
        }
    }

    pub fn contains(&self, w: usize) -> bool {
        w < MAX_WORLDS && self.0[w / 64] & (1u64 << (w % 64)) != 0
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..WORDS {
            out.0[i] |= other.0[i];
        }
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..WORDS {
            out.0[i] &= other.0[i];
        }
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..WORDS {
            out.0[i] &= !other.0[i];
        }
        out
    }

    /// Complement relative to `{0, .., n-1}`.
    pub fn complement(&self, n: usize) -> Self {
        Self::full(n).difference(self)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        (0..WORDS).all(|i| self.0[i] & !other.0[i] == 0)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        (0..WORDS).any(|i| self.0[i] & other.0[i] != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..WORDS).flat_map(move |i| {
            let mut word = self.0[i];
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(i * 64 + bit)
            })
        })
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

impl FromIterator<usize> for WorldSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = WorldSet::empty();
        for w in iter {
            s.insert(w);
        }
        s
    }
}

impl fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_complement_cross_word_boundaries() {
        for n in [0, 1, 63, 64, 65, 128, 200, 256] {
            let full = WorldSet::full(n);
            assert_eq!(full.len(), n);
            assert!(full.complement(n).is_empty());
        }
        let s: WorldSet = [3, 70, 255].into_iter().collect();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![3, 70, 255]);
        assert_eq!(s.complement(256).len(), 253);
        assert!(s.is_subset(&WorldSet::full(256)));
        assert!(!s.is_subset(&WorldSet::full(255)));
    }
}
