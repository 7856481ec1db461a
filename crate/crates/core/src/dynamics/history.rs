//! Contact and release events between neighbouring particles.

use crate::monotone::BlockPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    Contact,
    Release,
}

/// Change of status of the interface between particles `interface` and
/// `interface + 1`, first observed at `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactEvent {
    pub step: usize,
    pub t: f64,
    pub interface: usize,
    pub kind: ContactKind,
}

/// Tracks which neighbouring pairs share a congested block from one state to the next.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockHistory {
    joined: Vec<bool>,
    events: Vec<ContactEvent>,
}

fn joined_pairs(blocks: &BlockPartition, n: usize) -> Vec<bool> {
    let mut joined = vec![false; n.saturating_sub(1)];
    for b in blocks.iter() {
        joined[b.lo..b.hi].fill(true);
    }
    joined
}

impl BlockHistory {
    /// Starts from the partition of the initial state; contacts present there are not
    /// reported as events.
    pub fn new(initial: &BlockPartition, n: usize) -> Self {
        Self {
            joined: joined_pairs(initial, n),
            events: Vec::new(),
        }
    }

    pub fn record(&mut self, step: usize, t: f64, blocks: &BlockPartition) {
        let now = joined_pairs(blocks, self.joined.len() + 1);
        for (i, (&before, &after)) in self.joined.iter().zip(&now).enumerate() {
            if before != after {
                self.events.push(ContactEvent {
                    step,
                    t,
                    interface: i,
                    kind: if after {
                        ContactKind::Contact
                    } else {
                        ContactKind::Release
                    },
                });
            }
        }
        self.joined = now;
    }

    pub fn events(&self) -> &[ContactEvent] {
        &self.events
    }

    pub fn is_joined(&self, interface: usize) -> bool {
        self.joined.get(interface).copied().unwrap_or(false)
    }

    /// First event of `kind` at `interface`.
    pub fn first(&self, interface: usize, kind: ContactKind) -> Option<&ContactEvent> {
        self.events
            .iter()
            .find(|e| e.interface == interface && e.kind == kind)
    }

    /// First event of `kind` at `interface` strictly after `step`.
    pub fn first_after(
        &self,
        interface: usize,
        kind: ContactKind,
        step: usize,
    ) -> Option<&ContactEvent> {
        self.events
            .iter()
            .find(|e| e.interface == interface && e.kind == kind && e.step > step)
    }

    pub fn count(&self, kind: ContactKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::Block;

    #[test]
    fn contact_then_release() {
        let mut h = BlockHistory::new(&BlockPartition::empty(), 4);
        let joined = BlockPartition::new(vec![Block { lo: 1, hi: 2 }]).unwrap();
        h.record(1, 0.1, &BlockPartition::empty());
        h.record(2, 0.2, &joined);
        h.record(3, 0.3, &joined);
        h.record(4, 0.4, &BlockPartition::empty());
        assert_eq!(h.events().len(), 2);
        assert_eq!(h.first(1, ContactKind::Contact).unwrap().step, 2);
        assert_eq!(h.first_after(1, ContactKind::Release, 2).unwrap().step, 4);
        assert!(h.first(0, ContactKind::Contact).is_none());
        assert!(!h.is_joined(1));
    }
}
