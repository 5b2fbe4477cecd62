//! Event queue for the engine: a min-heap ordered by time, then a fixed
//! per-kind priority, then insertion sequence, giving a total order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::workflow::TaskIndex;
use crate::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum EventKind {
    /// A running invocation reaches its nominal duration. `token` voids
    /// completions that were overtaken by an eviction or cancellation.
    InvocationComplete { job: u32, replica: u32, token: u64 },
    InteractiveLogout { resource: u32 },
    InteractiveLogin { resource: u32, logout: Timestamp },
    NightlyReboot,
    /// A workload row (workflow or background task) enters the system.
    Arrival { row: u32 },
    /// A workflow task has its dependencies met and asks the policy for a
    /// replica count.
    TaskReady { workflow: u32, task: TaskIndex },
    QueueDispatch,
}

impl EventKind {
    /// Tie order at equal times: completions land before evictions so a
    /// task finishing exactly at a login or reboot still completes, and
    /// dispatch runs after every other state change at that instant.
    fn priority(&self) -> u8 {
        match self {
            EventKind::InvocationComplete { .. } => 0,
            EventKind::InteractiveLogout { .. } => 1,
            EventKind::InteractiveLogin { .. } => 2,
            EventKind::NightlyReboot => 3,
            EventKind::Arrival { .. } => 4,
            EventKind::TaskReady { .. } => 5,
            EventKind::QueueDispatch => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Event {
    pub time: Timestamp,
    pub seq: u64,
    pub kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the earliest event.
        other
            .time
            .cmp(&self.time)
            .then(other.kind.priority().cmp(&self.kind.priority()))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub(crate) struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, time: Timestamp, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, seq, kind });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_by_time_priority_sequence() {
        let mut q = EventQueue::default();
        q.push(10, EventKind::QueueDispatch);
        q.push(10, EventKind::InteractiveLogin { resource: 0, logout: 20 });
        q.push(10, EventKind::InvocationComplete { job: 1, replica: 0, token: 0 });
        q.push(5, EventKind::NightlyReboot);
        q.push(10, EventKind::InteractiveLogout { resource: 1 });

        assert_eq!(q.pop().unwrap().kind, EventKind::NightlyReboot);
        assert!(matches!(q.pop().unwrap().kind, EventKind::InvocationComplete { .. }));
        assert!(matches!(q.pop().unwrap().kind, EventKind::InteractiveLogout { .. }));
        assert!(matches!(q.pop().unwrap().kind, EventKind::InteractiveLogin { .. }));
        assert_eq!(q.pop().unwrap().kind, EventKind::QueueDispatch);
        assert!(q.pop().is_none());
    }

    #[test]
    fn equal_events_keep_insertion_order() {
        let mut q = EventQueue::default();
        q.push(3, EventKind::Arrival { row: 0 });
        q.push(3, EventKind::Arrival { row: 1 });
        assert_eq!(q.pop().unwrap().kind, EventKind::Arrival { row: 0 });
        assert_eq!(q.pop().unwrap().kind, EventKind::Arrival { row: 1 });
    }
}
