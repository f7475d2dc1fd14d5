//! Per-link frequency-slot occupancy with First-Fit / Last-Fit window search.
//!
//! Every allocation is one contiguous slot interval occupying the same
//! indices on every link of its set.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::topology::LinkId;

pub const DEFAULT_SLOTS: usize = 320;
pub const SLOT_WIDTH_GHZ: f64 = 12.5;
pub const DEFAULT_GUARD_SLOTS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SlotRange {
    pub start: usize,
    pub width: usize,
}

impl SlotRange {
    pub fn new(start: usize, width: usize) -> Self {
        Self { start, width }
    }

    /// One past the last slot.
    pub fn end(&self) -> usize {
        self.start + self.width
    }
}

/// Allocation faults. These are program-invariant violations, never blocking events.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectrumError {
    #[error("slot range [{start}, {end}) does not fit a {slots}-slot grid")]
    OutOfGrid { start: usize, end: usize, slots: usize },
    #[error("empty slot range")]
    EmptyRange,
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("slot {slot} on link {link} is already allocated")]
    DoubleAllocation { link: LinkId, slot: usize },
    #[error("link {link} holds no allocation at [{start}, {end})")]
    ForeignRelease { link: LinkId, start: usize, end: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumState {
    slots: usize,
    words: usize,
    bits: Vec<u64>,
    // per link: start -> width of each active allocation
    allocations: Vec<BTreeMap<usize, usize>>,
}

impl SpectrumState {
    pub fn new(link_count: usize, slots: usize) -> Self {
        assert!(slots > 0, "spectrum needs at least one slot");
        let words = slots.div_ceil(64);
        Self {
            slots,
            words,
            bits: vec![0; link_count * words],
            allocations: vec![BTreeMap::new(); link_count],
        }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn link_count(&self) -> usize {
        self.allocations.len()
    }

    fn row(&self, link: LinkId) -> &[u64] {
        &self.bits[link * self.words..(link + 1) * self.words]
    }

    pub fn is_busy(&self, link: LinkId, slot: usize) -> bool {
        self.row(link)[slot / 64] >> (slot % 64) & 1 == 1
    }

    pub fn busy_count(&self, link: LinkId) -> usize {
        self.row(link).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn total_busy(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Union of the occupancy of all `links`.
    fn combined(&self, links: &[LinkId]) -> Vec<u64> {
        let mut mask = vec![0u64; self.words];
        for &l in links {
            for (m, w) in mask.iter_mut().zip(self.row(l)) {
                *m |= w;
            }
        }
        mask
    }

    /// Lowest start of a `width`-slot window free on every link.
    pub fn find_first_fit(&self, links: &[LinkId], width: usize) -> Option<SlotRange> {
        if width == 0 || width > self.slots || links.is_empty() {
            return None;
        }
        let mask = self.combined(links);
        let mut run = 0;
        for slot in 0..self.slots {
            if mask[slot / 64] >> (slot % 64) & 1 == 1 {
                run = 0;
            } else {
                run += 1;
                if run == width {
                    return Some(SlotRange::new(slot + 1 - width, width));
                }
            }
        }
        None
    }

    /// Highest start of a `width`-slot window free on every link.
    pub fn find_last_fit(&self, links: &[LinkId], width: usize) -> Option<SlotRange> {
        if width == 0 || width > self.slots || links.is_empty() {
            return None;
        }
        let mask = self.combined(links);
        let mut run = 0;
        for slot in (0..self.slots).rev() {
            if mask[slot / 64] >> (slot % 64) & 1 == 1 {
                run = 0;
            } else {
                run += 1;
                if run == width {
                    return Some(SlotRange::new(slot, width));
                }
            }
        }
        None
    }

    fn check(&self, links: &[LinkId], range: SlotRange) -> Result<(), SpectrumError> {
        if range.width == 0 {
            return Err(SpectrumError::EmptyRange);
        }
        if range.end() > self.slots {
            return Err(SpectrumError::OutOfGrid {
                start: range.start,
                end: range.end(),
                slots: self.slots,
            });
        }
        if let Some(&l) = links.iter().find(|&&l| l >= self.link_count()) {
            return Err(SpectrumError::UnknownLink(l));
        }
        Ok(())
    }

    fn set(&mut self, link: LinkId, range: SlotRange, value: bool) {
        let base = link * self.words;
        for slot in range.start..range.end() {
            let word = &mut self.bits[base + slot / 64];
            if value {
                *word |= 1 << (slot % 64);
            } else {
                *word &= !(1 << (slot % 64));
            }
        }
    }

    /// Marks `range` busy on every link. Leaves the state untouched on error.
    pub fn allocate(&mut self, links: &[LinkId], range: SlotRange) -> Result<(), SpectrumError> {
        self.check(links, range)?;
        for &link in links {
            if let Some(slot) = (range.start..range.end()).find(|&s| self.is_busy(link, s)) {
                return Err(SpectrumError::DoubleAllocation { link, slot });
            }
        }
        for &link in links {
            self.set(link, range, true);
            self.allocations[link].insert(range.start, range.width);
        }
        Ok(())
    }

    /// Frees an allocation previously made with exactly this range on every link.
    pub fn release(&mut self, links: &[LinkId], range: SlotRange) -> Result<(), SpectrumError> {
        self.check(links, range)?;
        for &link in links {
            if self.allocations[link].get(&range.start) != Some(&range.width) {
                return Err(SpectrumError::ForeignRelease {
                    link,
                    start: range.start,
                    end: range.end(),
                });
            }
        }
        for &link in links {
            self.set(link, range, false);
            self.allocations[link].remove(&range.start);
        }
        Ok(())
    }

    /// Active allocations on `link` as (start, width).
    pub fn allocations(&self, link: LinkId) -> impl Iterator<Item = SlotRange> + '_ {
        self.allocations[link].iter().map(|(&s, &w)| SlotRange::new(s, w))
    }

    /// Verifies that occupancy bits are exactly the union of non-overlapping
    /// recorded allocations on every link.
    pub fn verify(&self) -> Result<(), String> {
        for link in 0..self.link_count() {
            let mut expected = vec![false; self.slots];
            let mut prev_end = 0;
            for r in self.allocations(link) {
                if r.start < prev_end {
                    return Err(format!("link {link}: overlapping allocations at slot {}", r.start));
                }
                prev_end = r.end();
                expected[r.start..r.end()].iter_mut().for_each(|b| *b = true);
            }
            for (slot, &want) in expected.iter().enumerate() {
                if self.is_busy(link, slot) != want {
                    return Err(format!("link {link}: slot {slot} bit disagrees with allocations"));
                }
            }
        }
        Ok(())
    }

    /// Hex bitmap of one link, most significant slot first.
    pub fn dump_hex(&self, link: LinkId) -> String {
        let mut out = String::with_capacity(self.words * 16);
        for w in self.row(link).iter().rev() {
            let _ = write!(out, "{w:016x}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn busy(state: &mut SpectrumState, link: LinkId, start: usize, end: usize) {
        state.allocate(&[link], SlotRange::new(start, end - start)).unwrap();
    }

    #[test]
    fn first_fit_basics() {
        let mut s = SpectrumState::new(2, DEFAULT_SLOTS);
        assert_eq!(s.find_first_fit(&[0, 1], 4), Some(SlotRange::new(0, 4)));
        busy(&mut s, 0, 0, 4);
        assert_eq!(s.find_first_fit(&[0], 4).unwrap().start, 4);
    }

    #[test]
    fn first_fit_across_two_masks() {
        let mut s = SpectrumState::new(2, DEFAULT_SLOTS);
        busy(&mut s, 0, 0, 10);
        busy(&mut s, 1, 5, 15);
        assert_eq!(s.find_first_fit(&[0, 1], 3).unwrap().start, 15);
    }

    #[test]
    fn last_fit_basics() {
        let mut s = SpectrumState::new(1, DEFAULT_SLOTS);
        assert_eq!(s.find_last_fit(&[0], 4).unwrap().start, 316);
        busy(&mut s, 0, 316, 320);
        assert_eq!(s.find_last_fit(&[0], 4).unwrap().start, 312);
    }

    #[test]
    fn allocation_faults_leave_state_untouched() {
        let mut s = SpectrumState::new(2, DEFAULT_SLOTS);
        s.allocate(&[0, 1], SlotRange::new(10, 4)).unwrap();
        assert_eq!(s.find_first_fit(&[0], 4).unwrap().start, 0);
        let before = s.clone();
        assert_eq!(
            s.allocate(&[1, 0], SlotRange::new(12, 2)),
            Err(SpectrumError::DoubleAllocation { link: 1, slot: 12 })
        );
        assert!(matches!(
            s.release(&[0], SlotRange::new(10, 2)),
            Err(SpectrumError::ForeignRelease { .. })
        ));
        assert!(matches!(
            s.allocate(&[0], SlotRange::new(318, 4)),
            Err(SpectrumError::OutOfGrid { .. })
        ));
        assert_eq!(s, before);
        s.release(&[0, 1], SlotRange::new(10, 4)).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn window_larger_than_grid() {
        let s = SpectrumState::new(1, 8);
        assert!(s.find_first_fit(&[0], 9).is_none());
        assert!(s.find_last_fit(&[0], 0).is_none());
    }

    #[test]
    fn hex_dump() {
        let mut s = SpectrumState::new(1, 128);
        busy(&mut s, 0, 0, 4);
        assert_eq!(s.dump_hex(0), format!("{:016x}{:016x}", 0, 0xf));
    }
}
