use serde::{Deserialize, Serialize};

use super::goal::UserGoal;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgendaItem {
    Inform { slot: String, value: String },
    Request { slot: String },
    Bye,
}

/// Stack of pending user acts; the top is the end of the vector and `Bye`
/// always sits at the bottom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agenda {
    stack: Vec<AgendaItem>,
    capacity: usize,
}

impl Agenda {
    pub fn new(goal: &UserGoal) -> Self {
        let mut stack = vec![AgendaItem::Bye];
        for r in goal.requests.iter().rev() {
            stack.push(AgendaItem::Request { slot: r.clone() });
        }
        for (slot, value) in goal.constraints.iter().rev() {
            stack.push(AgendaItem::Inform {
                slot: slot.clone(),
                value: value.clone(),
            });
        }
        Self {
            stack,
            capacity: 4 * (goal.constraints.len() + goal.requests.len()),
        }
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn top(&self) -> Option<&AgendaItem> {
        self.stack.last()
    }

    /// Pushes an item above the current top. `Bye` is never pushed and the
    /// push is dropped once the stack is at capacity.
    pub fn push(&mut self, item: AgendaItem) -> bool {
        if item == AgendaItem::Bye || self.stack.len() >= self.capacity {
            return false;
        }
        self.stack.push(item);
        true
    }

    /// Removes every pending inform for `slot`; true if one was pending.
    pub fn remove_inform(&mut self, slot: &str) -> bool {
        let before = self.stack.len();
        self.stack
            .retain(|i| !matches!(i, AgendaItem::Inform { slot: s, .. } if s == slot));
        self.stack.len() != before
    }

    pub fn remove_request(&mut self, slot: &str) -> bool {
        let before = self.stack.len();
        self.stack
            .retain(|i| !matches!(i, AgendaItem::Request { slot: s } if s == slot));
        self.stack.len() != before
    }

    /// Pending informs, topmost first.
    pub fn pending_informs(&self) -> Vec<(&str, &str)> {
        self.stack
            .iter()
            .rev()
            .filter_map(|i| match i {
                AgendaItem::Inform { slot, value } => Some((slot.as_str(), value.as_str())),
                _ => None,
            })
            .collect()
    }

    /// Topmost pending request.
    pub fn next_request(&self) -> Option<&str> {
        self.stack.iter().rev().find_map(|i| match i {
            AgendaItem::Request { slot } => Some(slot.as_str()),
            _ => None,
        })
    }

    /// Pending requests, topmost first.
    pub fn pending_requests(&self) -> Vec<&str> {
        self.stack
            .iter()
            .rev()
            .filter_map(|i| match i {
                AgendaItem::Request { slot } => Some(slot.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn has_request(&self, slot: &str) -> bool {
        self.stack
            .iter()
            .any(|i| matches!(i, AgendaItem::Request { slot: s } if s == slot))
    }

    /// Re-queues a request that was answered for an entity the user no
    /// longer considers.
    pub fn restore_request(&mut self, slot: &str) {
        if !self.has_request(slot) {
            // insert just above Bye so constraints stay on top
            self.stack.insert(
                1,
                AgendaItem::Request {
                    slot: slot.to_string(),
                },
            );
        }
    }

    pub fn is_bottom_bye(&self) -> bool {
        self.stack.first() == Some(&AgendaItem::Bye)
            && self.stack.iter().filter(|i| **i == AgendaItem::Bye).count() == 1
    }
}
