use alloc::vec::Vec;

use crate::domain::{ItemId, Quarters};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WalkIssue<'a> {
    /// The item is on board but not on top of the stack.
    Lifo(&'a ItemId),
    /// The item is neither on board nor picked up earlier.
    Orphaned(&'a ItemId),
    /// Pickup of an item that is already on board.
    AlreadyOnBoard(&'a ItemId),
    /// Pickup of an item with no known demand.
    Unknown(&'a ItemId),
    /// Load after a pickup exceeds capacity.
    Capacity { load: Quarters },
    /// Picked up by this route but never delivered by it.
    Undelivered(&'a ItemId),
}

/// Simulates a vehicle's cargo stack over a sequence of stops: at each stop
/// all deliveries are popped in list order, then all pickups are pushed.
#[derive(Clone, Debug)]
pub struct StackWalker<'a> {
    capacity: Quarters,
    stack: Vec<(&'a ItemId, Quarters, bool)>,
    load: Quarters,
}

impl<'a> StackWalker<'a> {
    /// `cargo` is bottom-first with its demands.
    pub fn new(capacity: Quarters, cargo: impl IntoIterator<Item = (&'a ItemId, Quarters)>) -> Self {
        let stack: Vec<_> = cargo.into_iter().map(|(id, q)| (id, q, false)).collect();
        let load = stack.iter().map(|e| e.1).sum();
        Self { capacity, stack, load }
    }

    pub fn load(&self) -> Quarters {
        self.load
    }

    pub fn visit(
        &mut self,
        deliveries: &'a [ItemId],
        pickups: &'a [ItemId],
        demand: impl Fn(&ItemId) -> Option<Quarters>,
        mut on_issue: impl FnMut(WalkIssue<'a>),
    ) {
        for id in deliveries {
            match self.stack.last() {
                Some((top, q, _)) if *top == id => {
                    self.load -= *q;
                    self.stack.pop();
                }
                _ => match self.stack.iter().position(|e| e.0 == id) {
                    Some(pos) => {
                        on_issue(WalkIssue::Lifo(id));
                        let (_, q, _) = self.stack.remove(pos);
                        self.load -= q;
                    }
                    None => on_issue(WalkIssue::Orphaned(id)),
                },
            }
        }
        let mut over = false;
        for id in pickups {
            if self.stack.iter().any(|e| e.0 == id) {
                on_issue(WalkIssue::AlreadyOnBoard(id));
                continue;
            }
            let Some(q) = demand(id) else {
                on_issue(WalkIssue::Unknown(id));
                continue;
            };
            self.stack.push((id, q, true));
            self.load += q;
            if self.load > self.capacity && !over {
                over = true;
                on_issue(WalkIssue::Capacity { load: self.load });
            }
        }
    }

    /// Reports items this walk picked up that are still on board.
    pub fn finish(self, mut on_issue: impl FnMut(WalkIssue<'a>)) -> Quarters {
        for (id, _, picked_here) in &self.stack {
            if *picked_here {
                on_issue(WalkIssue::Undelivered(id));
            }
        }
        self.load
    }

    /// Item ids currently on board, bottom first.
    pub fn stack(&self) -> impl Iterator<Item = &'a ItemId> + '_ {
        self.stack.iter().map(|e| e.0)
    }
}
