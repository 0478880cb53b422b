//! Slot-grid bookkeeping for one direction of a fiber.

use thiserror::Error;

use crate::topology::LinkId;

/// Slots per link direction.
pub const SLOT_COUNT: usize = 320;

/// Free slots required between two adjacent lightpaths.
pub const GUARDBAND_SLOTS: usize = 2;

/// Identifier of an established lightpath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LightpathId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotState {
    Free,
    Used(LightpathId),
    /// Excluded from allocation by the jamming-aware control plane.
    Forbidden,
}

/// Contiguous slot range `[start, start + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotBlock {
    pub start: usize,
    pub width: usize,
}

impl SlotBlock {
    pub fn new(start: usize, width: usize) -> Self {
        SlotBlock { start, width }
    }

    pub fn end(&self) -> usize {
        self.start + self.width
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }

    pub fn overlaps(&self, other: &SlotBlock) -> bool {
        self.start < other.end() && other.start < self.end()
    }

    /// Number of slots shared with `other`.
    pub fn overlap(&self, other: &SlotBlock) -> usize {
        self.end()
            .min(other.end())
            .saturating_sub(self.start.max(other.start))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("slot {slot} on {link} is not free ({state:?})")]
    Collision {
        link: LinkId,
        slot: usize,
        state: SlotState,
    },
    #[error("block {start}+{width} exceeds the {slot_count}-slot grid")]
    OutOfRange {
        start: usize,
        width: usize,
        slot_count: usize,
    },
    #[error("lightpath {0:?} holds no slots on {1}")]
    UnknownLightpath(LightpathId, LinkId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotGrid {
    link: LinkId,
    slots: Vec<SlotState>,
}

impl SlotGrid {
    pub fn new(link: LinkId) -> Self {
        Self::with_slots(link, SLOT_COUNT)
    }

    pub fn with_slots(link: LinkId, slot_count: usize) -> Self {
        SlotGrid {
            link,
            slots: vec![SlotState::Free; slot_count],
        }
    }

    pub fn link(&self) -> LinkId {
        self.link
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn state(&self, slot: usize) -> SlotState {
        self.slots[slot]
    }

    pub fn slots(&self) -> &[SlotState] {
        &self.slots
    }

    pub fn count_used(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s, SlotState::Used(_)))
            .count()
    }

    pub fn count_free(&self) -> usize {
        self.slots.iter().filter(|s| **s == SlotState::Free).count()
    }

    pub fn count_forbidden(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| **s == SlotState::Forbidden)
            .count()
    }

    /// Marks free slots of `block` forbidden; used slots are left alone.
    /// Returns how many slots changed.
    pub fn forbid(&mut self, block: SlotBlock) -> usize {
        let end = block.end().min(self.slots.len());
        let mut changed = 0;
        for s in &mut self.slots[block.start.min(end)..end] {
            if *s == SlotState::Free {
                *s = SlotState::Forbidden;
                changed += 1;
            }
        }
        changed
    }

    fn is_used(&self, slot: usize) -> bool {
        matches!(self.slots[slot], SlotState::Used(_))
    }

    /// Whether `block` can host a new lightpath on this grid.
    pub fn fits(&self, block: SlotBlock, forbidden_aware: bool) -> bool {
        let n = self.slots.len();
        if block.width == 0 || block.end() > n {
            return false;
        }
        let body_ok = self.slots[block.range()].iter().all(|s| match s {
            SlotState::Free => true,
            SlotState::Forbidden => !forbidden_aware,
            SlotState::Used(_) => false,
        });
        if !body_ok {
            return false;
        }
        let lo = block.start.saturating_sub(GUARDBAND_SLOTS);
        let hi = (block.end() + GUARDBAND_SLOTS).min(n);
        !(lo..block.start).any(|s| self.is_used(s)) && !(block.end()..hi).any(|s| self.is_used(s))
    }
}

/// Lowest-start block of `width` slots that fits on every grid of a route.
///
/// A block fits when all its slots are free (forbidden slots also count as
/// unavailable when `forbidden_aware`) and no used slot lies within
/// [`GUARDBAND_SLOTS`] of either edge. The guardband is checked only against
/// used slots, never against forbidden ones.
pub fn first_fit(grids: &[&SlotGrid], width: usize, forbidden_aware: bool) -> Option<SlotBlock> {
    first_fit_from(grids, width, forbidden_aware, 0)
}

/// [`first_fit`] restricted to blocks starting at or after `from`.
pub fn first_fit_from(
    grids: &[&SlotGrid],
    width: usize,
    forbidden_aware: bool,
    from: usize,
) -> Option<SlotBlock> {
    let n = grids.first()?.slot_count();
    if width == 0 || width > n {
        return None;
    }
    // per-slot availability of the body and of the guard zone, merged over the route
    let mut body_blocked = vec![false; n];
    let mut used = vec![false; n];
    for g in grids {
        for (i, s) in g.slots.iter().enumerate() {
            match s {
                SlotState::Free => {}
                SlotState::Forbidden => body_blocked[i] |= forbidden_aware,
                SlotState::Used(_) => {
                    body_blocked[i] = true;
                    used[i] = true;
                }
            }
        }
    }
    let mut start = from;
    'outer: while start + width <= n {
        for i in start..start + width {
            if body_blocked[i] {
                start = i + 1;
                continue 'outer;
            }
        }
        let lo = start.saturating_sub(GUARDBAND_SLOTS);
        if let Some(last) = (lo..start).rev().find(|&i| used[i]) {
            start = last + GUARDBAND_SLOTS + 1;
            continue;
        }
        let hi = (start + width + GUARDBAND_SLOTS).min(n);
        if (start + width..hi).any(|i| used[i]) {
            start += 1;
            continue;
        }
        return Some(SlotBlock::new(start, width));
    }
    None
}

/// Marks `block` used by `id` on every grid; all-or-nothing.
pub fn allocate(
    grids: &mut [&mut SlotGrid],
    block: SlotBlock,
    id: LightpathId,
) -> Result<(), SpectrumError> {
    for g in grids.iter() {
        if block.end() > g.slot_count() {
            return Err(SpectrumError::OutOfRange {
                start: block.start,
                width: block.width,
                slot_count: g.slot_count(),
            });
        }
        if let Some(slot) = block.range().find(|&s| g.slots[s] != SlotState::Free) {
            return Err(SpectrumError::Collision {
                link: g.link,
                slot,
                state: g.slots[slot],
            });
        }
    }
    for g in grids.iter_mut() {
        for s in &mut g.slots[block.range()] {
            *s = SlotState::Used(id);
        }
    }
    Ok(())
}

/// Frees every slot held by `id`; forbidden marks are untouched.
pub fn release(grids: &mut [&mut SlotGrid], id: LightpathId) -> Result<(), SpectrumError> {
    for g in grids.iter() {
        if !g.slots.contains(&SlotState::Used(id)) {
            return Err(SpectrumError::UnknownLightpath(id, g.link));
        }
    }
    for g in grids.iter_mut() {
        for s in g.slots.iter_mut().filter(|s| **s == SlotState::Used(id)) {
            *s = SlotState::Free;
        }
    }
    Ok(())
}

/// Fraction of slots in use; forbidden slots count as not used.
pub fn utilization(grid: &SlotGrid) -> f64 {
    grid.count_used() as f64 / grid.slot_count() as f64
}
