//! Fixed-capacity variable sets backed by a single machine word.

use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};

use serde::{Deserialize, Serialize};

/// Maximum number of variables a graph may hold.
pub const MAX_VARS: usize = 64;

/// A set of variable indices, stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarSet(u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        VarSet(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn singleton(index: usize) -> Self {
        debug_assert!(index < MAX_VARS);
        VarSet(1u64 << index)
    }

    /// The set {0, 1, ..., n-1}.
    pub fn full(n: usize) -> Self {
        if n >= MAX_VARS {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn contains(self, index: usize) -> bool {
        index < MAX_VARS && self.0 & (1u64 << index) != 0
    }

    #[inline]
    pub fn insert(&mut self, index: usize) {
        self.0 |= 1u64 << index;
    }

    #[inline]
    pub fn remove(&mut self, index: usize) {
        self.0 &= !(1u64 << index);
    }

    #[inline]
    pub fn with(self, index: usize) -> Self {
        VarSet(self.0 | (1u64 << index))
    }

    #[inline]
    pub fn without(self, index: usize) -> Self {
        VarSet(self.0 & !(1u64 << index))
    }

    #[inline]
    pub fn union(self, other: VarSet) -> Self {
        VarSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: VarSet) -> Self {
        VarSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: VarSet) -> Self {
        VarSet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: VarSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Smallest member, if any.
    #[inline]
    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// Members in ascending index order.
    pub fn iter(self) -> VarSetIter {
        VarSetIter(self.0)
    }

    /// All nonempty subsets of `self`, in ascending bitmask order.
    pub fn nonempty_subsets(self) -> SubsetIter {
        SubsetIter {
            mask: self.0,
            next: Some(self.0 & self.0.wrapping_neg()),
            started: false,
        }
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = VarSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl BitOr for VarSet {
    type Output = VarSet;
    fn bitor(self, rhs: VarSet) -> VarSet {
        self.union(rhs)
    }
}

impl BitAnd for VarSet {
    type Output = VarSet;
    fn bitand(self, rhs: VarSet) -> VarSet {
        self.intersection(rhs)
    }
}

impl Sub for VarSet {
    type Output = VarSet;
    fn sub(self, rhs: VarSet) -> VarSet {
        self.difference(rhs)
    }
}

impl Not for VarSet {
    type Output = VarSet;
    fn not(self) -> VarSet {
        VarSet(!self.0)
    }
}

pub struct VarSetIter(u64);

impl Iterator for VarSetIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for VarSetIter {}

/// Enumerates submasks of a mask in increasing numeric order.
pub struct SubsetIter {
    mask: u64,
    next: Option<u64>,
    started: bool,
}

impl Iterator for SubsetIter {
    type Item = VarSet;

    fn next(&mut self) -> Option<VarSet> {
        if self.mask == 0 {
            return None;
        }
        let cur = self.next?;
        if self.started && cur == 0 {
            self.next = None;
            return None;
        }
        self.started = true;
        // next submask in increasing order: (cur - mask) & mask
        let nxt = cur.wrapping_sub(self.mask) & self.mask;
        self.next = if nxt == 0 { None } else { Some(nxt) };
        Some(VarSet(cur))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn subsets_ascending_and_complete() {
        let s: VarSet = [1, 3, 4].into_iter().collect();
        let subs: Vec<u64> = s.nonempty_subsets().map(|v| v.bits()).collect();
        assert_eq!(subs.len(), 7);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        assert!(subs.iter().all(|&b| b & !s.bits() == 0 && b != 0));
        assert_eq!(VarSet::EMPTY.nonempty_subsets().count(), 0);
    }

    #[test]
    fn iteration_order() {
        let s: VarSet = [5, 0, 63].into_iter().collect();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 5, 63]);
        assert_eq!(s.first(), Some(0));
        assert_eq!(VarSet::full(64).len(), 64);
    }

    proptest! {
        #[test]
        fn set_algebra(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let (a, b, c) = (VarSet(a), VarSet(b), VarSet(c));
            prop_assert_eq!(a | (b & c), (a | b) & (a | c));
            prop_assert_eq!(a & (b | c), (a & b) | (a & c));
            prop_assert_eq!(a - (b | c), (a - b) & (a - c));
            prop_assert!((a & b).is_subset(a));
            prop_assert!((a - b).is_disjoint(b));
            prop_assert_eq!((a | b).len() + (a & b).len(), a.len() + b.len());
        }
    }
}
