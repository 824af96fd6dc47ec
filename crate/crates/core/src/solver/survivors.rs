use serde::{Deserialize, Serialize};

use crate::model::ProfileGrid;

/// Set of surviving action profiles, one bit per profile of the full grid,
/// tagged with the iteration round that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivorSet {
    bits: Vec<u64>,
    len: usize,
    round: usize,
}

impl SurvivorSet {
    pub fn empty(len: usize) -> Self {
        Self {
            bits: vec![0; len.div_ceil(64)],
            len,
            round: 0,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for w in s.bits.iter_mut() {
            *w = u64::MAX;
        }
        s.trim();
        s
    }

    pub fn from_profiles(len: usize, profiles: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(len);
        for p in profiles {
            s.insert(p);
        }
        s
    }

    /// Product of per-player sets of own action indices.
    pub fn from_product(grid: &ProfileGrid, sets: &[Vec<usize>]) -> Self {
        let mut s = Self::empty(grid.len());
        for_each_product(sets, |coords| s.insert(grid.encode(coords)));
        s
    }

    fn trim(&mut self) {
        let extra = self.bits.len() * 64 - self.len;
        if extra > 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }

    /// Size of the underlying profile grid.
    pub fn grid_len(&self) -> usize {
        self.len
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn with_round(mut self, round: usize) -> Self {
        self.round = round;
        self
    }

    #[inline]
    pub fn contains(&self, p: usize) -> bool {
        p < self.len && self.bits[p / 64] >> (p % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, p: usize) {
        self.bits[p / 64] |= 1 << (p % 64);
    }

    #[inline]
    pub fn remove(&mut self, p: usize) {
        self.bits[p / 64] &= !(1 << (p % 64));
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Profiles in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Bitmask equality, ignoring the round tag.
    pub fn same_profiles(&self, other: &Self) -> bool {
        self.len == other.len && self.bits == other.bits
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect(),
            len: self.len,
            round: self.round,
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect(),
            len: self.len,
            round: self.round,
        }
    }

    /// Per-player projections: `out[i][x]` is true when some surviving
    /// profile has player `i` at action index `x`.
    pub fn projections(&self, grid: &ProfileGrid) -> Vec<Vec<bool>> {
        let mut out: Vec<Vec<bool>> = grid.dims().iter().map(|&d| vec![false; d]).collect();
        for p in self.iter() {
            for (i, proj) in out.iter_mut().enumerate() {
                proj[grid.coord(p, i)] = true;
            }
        }
        out
    }

    /// Smallest product set containing this one.
    pub fn product_hull(&self, grid: &ProfileGrid) -> Self {
        let sets: Vec<Vec<usize>> = self
            .projections(grid)
            .into_iter()
            .map(|proj| (0..proj.len()).filter(|&x| proj[x]).collect())
            .collect();
        Self::from_product(grid, &sets).with_round(self.round)
    }

    pub fn is_product(&self, grid: &ProfileGrid) -> bool {
        self.same_profiles(&self.product_hull(grid))
    }
}

/// Calls `f` on every coordinate vector of the product of `sets`.
pub(crate) fn for_each_product(sets: &[Vec<usize>], mut f: impl FnMut(&[usize])) {
    if sets.iter().any(|s| s.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; sets.len()];
    let mut coords: Vec<usize> = sets.iter().map(|s| s[0]).collect();
    loop {
        f(&coords);
        let mut k = sets.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < sets[k].len() {
                coords[k] = sets[k][idx[k]];
                break;
            }
            idx[k] = 0;
            coords[k] = sets[k][0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_operations() {
        let mut s = SurvivorSet::empty(130);
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert_eq!(s.to_vec(), vec![0, 64, 129]);
        assert_eq!(s.count(), 3);
        s.remove(64);
        assert!(!s.contains(64));
        let full = SurvivorSet::full(130);
        assert_eq!(full.count(), 130);
        assert!(s.is_subset(&full));
        assert!(!full.is_subset(&s));
        assert_eq!(full.intersect(&s), s);
    }

    #[test]
    fn product_hull() {
        let grid = ProfileGrid::new(vec![3, 3]);
        let s = SurvivorSet::from_profiles(9, [grid.encode(&[0, 1]), grid.encode(&[2, 2])]);
        assert!(!s.is_product(&grid));
        let hull = s.product_hull(&grid);
        assert_eq!(hull.count(), 4);
        assert!(hull.is_product(&grid));
        assert!(s.is_subset(&hull));
    }

    #[test]
    fn product_enumeration_order() {
        let mut seen = vec![];
        for_each_product(&[vec![0, 2], vec![1], vec![3, 4]], |c| seen.push(c.to_vec()));
        assert_eq!(
            seen,
            vec![vec![0, 1, 3], vec![0, 1, 4], vec![2, 1, 3], vec![2, 1, 4]]
        );
    }
}
