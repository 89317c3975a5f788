use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_len, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Row-major mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub size: usize,
    pub states: Vec<f64>,
    pub actions: Vec<f64>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<f64>,
}

impl Batch {
    pub fn from_transitions(items: &[Transition]) -> Self {
        let mut b = Self {
            size: items.len(),
            states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_states: Vec::new(),
        };
        for t in items {
            b.states.extend_from_slice(&t.state);
            b.actions.extend_from_slice(&t.action);
            b.rewards.push(t.reward);
            b.next_states.extend_from_slice(&t.next_state);
        }
        b
    }
}

/// Ring buffer; once full, each insertion overwrites the oldest entry.
/// Storage grows on demand up to `capacity`.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    states: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_states: Vec<f64>,
    len: usize,
    head: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            state_dim,
            action_dim,
            states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_states: Vec::new(),
            len: 0,
            head: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(
        &mut self,
        state: &[f64],
        action: &[f64],
        reward: f64,
        next_state: &[f64],
    ) -> Result<()> {
        check_len("replay state", self.state_dim, state.len())?;
        check_len("replay action", self.action_dim, action.len())?;
        check_len("replay next state", self.state_dim, next_state.len())?;
        if self.len < self.capacity {
            self.states.extend_from_slice(state);
            self.actions.extend_from_slice(action);
            self.rewards.push(reward);
            self.next_states.extend_from_slice(next_state);
            self.len += 1;
        } else {
            let (s, a) = (self.state_dim, self.action_dim);
            let i = self.head;
            self.states[i * s..(i + 1) * s].copy_from_slice(state);
            self.actions[i * a..(i + 1) * a].copy_from_slice(action);
            self.rewards[i] = reward;
            self.next_states[i * s..(i + 1) * s].copy_from_slice(next_state);
            self.head = (self.head + 1) % self.capacity;
        }
        Ok(())
    }

    fn slot(&self, age: usize) -> usize {
        if self.len < self.capacity {
            age
        } else {
            (self.head + age) % self.capacity
        }
    }

    /// Transition by age, 0 being the oldest still stored.
    pub fn get(&self, age: usize) -> Option<Transition> {
        if age >= self.len {
            return None;
        }
        let i = self.slot(age);
        let (s, a) = (self.state_dim, self.action_dim);
        Some(Transition {
            state: self.states[i * s..(i + 1) * s].to_vec(),
            action: self.actions[i * a..(i + 1) * a].to_vec(),
            reward: self.rewards[i],
            next_state: self.next_states[i * s..(i + 1) * s].to_vec(),
        })
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Batch {
        let (s, a) = (self.state_dim, self.action_dim);
        let mut b = Batch {
            size,
            states: Vec::with_capacity(size * s),
            actions: Vec::with_capacity(size * a),
            rewards: Vec::with_capacity(size),
            next_states: Vec::with_capacity(size * s),
        };
        if self.len == 0 {
            b.size = 0;
            return b;
        }
        for _ in 0..size {
            let i = rng.random_range(0..self.len);
            b.states.extend_from_slice(&self.states[i * s..(i + 1) * s]);
            b.actions
                .extend_from_slice(&self.actions[i * a..(i + 1) * a]);
            b.rewards.push(self.rewards[i]);
            b.next_states
                .extend_from_slice(&self.next_states[i * s..(i + 1) * s]);
        }
        b
    }
}
