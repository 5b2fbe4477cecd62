//! Replica-count policies: single submission, fixed N, and an ε-greedy
//! n-armed bandit over (hour-of-day, contingency-bin) states with
//! sample-average reward estimates.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{hour_of_day, Timestamp};

pub mod qtable_io;

/// Failure penalty; successful rewards live in [0, 1], so all rewards fit
/// in [-REWARD_BOUND, REWARD_BOUND].
pub const REWARD_FAILURE: f64 = -5.0;
pub const REWARD_BOUND: f64 = 5.0;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("qtable csv error")]
    Csv(#[from] csv::Error),
    #[error("qtable row {row}: {msg}")]
    InvalidRow { row: usize, msg: String },
}

/// Bandit state: submission hour (0–23) crossed with a discretised
/// contingency proportion (bins 0..=n+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct State {
    pub hour: u8,
    pub phi_bin: u8,
}

/// Maps a submission time and contingency proportion onto a [`State`].
///
/// Bin 0 holds φ′ ≤ 0, bin n+1 holds φ′ > P, and bin i(1..=n) holds
/// (i−1)P/n < φ′ ≤ iP/n.
pub fn discretize(submit_time: Timestamp, phi: f64, p_max: f64, n: u32) -> State {
    debug_assert!(n >= 1 && p_max > 0.0);
    let phi_bin = if phi.is_nan() || phi <= 0.0 {
        0
    } else if phi > p_max {
        n + 1
    } else {
        ((phi * n as f64 / p_max).ceil() as u32).clamp(1, n)
    };
    State { hour: hour_of_day(submit_time), phi_bin: phi_bin as u8 }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
struct Cell {
    count: u64,
    mean: f64,
}

/// Per-(state, action) sample counts and mean rewards. Dense over
/// 24·(n+2) states and `actions` replica counts; unvisited cells sit at
/// the zero initialisation value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n: u32,
    p_max: f64,
    actions: u8,
    cells: Vec<Cell>,
}

impl QTable {
    pub fn new(n: u32, p_max: f64, actions: u8) -> Self {
        assert!(n >= 1, "need at least one interior contingency bin");
        assert!(p_max > 0.0, "P must be positive");
        assert!(actions >= 1, "need at least one action");
        let states = 24 * (n as usize + 2);
        QTable { n, p_max, actions, cells: vec![Cell::default(); states * actions as usize] }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn actions(&self) -> u8 {
        self.actions
    }

    pub fn state_count(&self) -> usize {
        24 * (self.n as usize + 2)
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn discretize(&self, submit_time: Timestamp, phi: f64) -> State {
        discretize(submit_time, phi, self.p_max, self.n)
    }

    fn index(&self, state: State, action: u8) -> usize {
        debug_assert!((state.hour as usize) < 24);
        debug_assert!((state.phi_bin as u32) < self.n + 2);
        debug_assert!(action >= 1 && action <= self.actions);
        let state_idx = state.hour as usize * (self.n as usize + 2) + state.phi_bin as usize;
        state_idx * self.actions as usize + (action as usize - 1)
    }

    pub fn mean(&self, state: State, action: u8) -> f64 {
        self.cells[self.index(state, action)].mean
    }

    pub fn count(&self, state: State, action: u8) -> u64 {
        self.cells[self.index(state, action)].count
    }

    /// Incremental sample-average update; the first sample replaces the
    /// initialisation value entirely.
    pub fn update(&mut self, state: State, action: u8, reward: f64) {
        let idx = self.index(state, action);
        let cell = &mut self.cells[idx];
        cell.count += 1;
        cell.mean += (reward - cell.mean) / cell.count as f64;
    }

    /// Overwrites one cell wholesale; used when loading a persisted table.
    pub(crate) fn set_cell(&mut self, state: State, action: u8, count: u64, mean: f64) {
        let idx = self.index(state, action);
        self.cells[idx] = Cell { count, mean };
    }

    /// Exploitation argmax; ties resolve to the smallest replica count.
    pub fn best_action(&self, state: State) -> u8 {
        let mut best = 1u8;
        let mut best_mean = self.mean(state, 1);
        for a in 2..=self.actions {
            let m = self.mean(state, a);
            if m > best_mean {
                best = a;
                best_mean = m;
            }
        }
        best
    }

    /// States with at least one observed reward.
    pub fn visited_states(&self) -> Vec<State> {
        let bins = self.n as usize + 2;
        (0..self.state_count())
            .map(|i| State { hour: (i / bins) as u8, phi_bin: (i % bins) as u8 })
            .filter(|&s| (1..=self.actions).any(|a| self.count(s, a) > 0))
            .collect()
    }
}

/// ε-greedy selection. Draws once from `rng` for the explore/exploit
/// branch and once more when exploring, so replays with the same RNG
/// stream reproduce the same choices.
pub fn select_action(table: &QTable, state: State, epsilon: f64, rng: &mut impl Rng) -> u8 {
    let draw: f64 = rng.gen();
    if draw < epsilon {
        rng.gen_range(1..=table.actions())
    } else {
        table.best_action(state)
    }
}

/// σ_t = min(1, bad/(a·d_t·Ξ)): wasted replica energy normalised by the
/// energy an a-way replication of the task would nominally consume.
pub fn compute_sigma(bad_wh: f64, action: u8, duration_hours: f64, xi_watts: f64) -> f64 {
    debug_assert!(action >= 1 && duration_hours > 0.0 && xi_watts > 0.0);
    let nominal = action as f64 * duration_hours * xi_watts;
    (bad_wh / nominal).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSignal {
    pub value: f64,
    pub sigma: f64,
    pub succeeded: bool,
}

/// +1−σ on success, −5 on failure.
pub fn reward(succeeded: bool, sigma: f64) -> RewardSignal {
    debug_assert!((0.0..=1.0).contains(&sigma));
    let value = if succeeded { 1.0 - sigma } else { REWARD_FAILURE };
    RewardSignal { value, sigma, succeeded }
}

/// How ε evolves as rewards arrive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EpsilonSchedule {
    /// Fixed ε forever.
    Constant { epsilon: f64 },
    /// ε1 until `switch_after` rewards have been observed, then ε2.
    InitialHigh { eps_initial: f64, eps_final: f64, switch_after: u64, observed: u64 },
    /// Per-action sliding windows of the last `window` rewards; when a
    /// window mean drifts from the action's long-run mean by more than
    /// `deviation·max(1, |long_run|)`, ε is boosted for the next `window`
    /// rewards.
    DriftWindow {
        window: usize,
        deviation: f64,
        eps_hi: f64,
        eps_lo: f64,
        recent: Vec<VecDeque<f64>>,
        totals: Vec<(u64, f64)>,
        boost_left: u64,
    },
}

impl EpsilonSchedule {
    pub fn constant(epsilon: f64) -> Self {
        assert!((0.0..=1.0).contains(&epsilon));
        EpsilonSchedule::Constant { epsilon }
    }

    pub fn initial_high(eps_initial: f64, eps_final: f64, switch_after: u64) -> Self {
        assert!((0.0..=1.0).contains(&eps_initial) && (0.0..=1.0).contains(&eps_final));
        EpsilonSchedule::InitialHigh { eps_initial, eps_final, switch_after, observed: 0 }
    }

    pub fn drift_window(window: usize, deviation: f64, eps_hi: f64, eps_lo: f64, actions: u8) -> Self {
        assert!(window >= 1 && actions >= 1);
        assert!((0.0..=1.0).contains(&eps_hi) && (0.0..=1.0).contains(&eps_lo));
        EpsilonSchedule::DriftWindow {
            window,
            deviation,
            eps_hi,
            eps_lo,
            recent: vec![VecDeque::with_capacity(window); actions as usize],
            totals: vec![(0, 0.0); actions as usize],
            boost_left: 0,
        }
    }

    /// The ε to use for the next decision.
    pub fn current(&self) -> f64 {
        match self {
            EpsilonSchedule::Constant { epsilon } => *epsilon,
            EpsilonSchedule::InitialHigh { eps_initial, eps_final, switch_after, observed } => {
                if observed < switch_after {
                    *eps_initial
                } else {
                    *eps_final
                }
            }
            EpsilonSchedule::DriftWindow { eps_hi, eps_lo, boost_left, .. } => {
                if *boost_left > 0 {
                    *eps_hi
                } else {
                    *eps_lo
                }
            }
        }
    }

    /// Feeds the latest observed reward into the schedule and returns the
    /// ε now in force.
    pub fn schedule_tick(&mut self, action: u8, reward_value: f64) -> f64 {
        match self {
            EpsilonSchedule::Constant { .. } => {}
            EpsilonSchedule::InitialHigh { observed, .. } => {
                *observed += 1;
            }
            EpsilonSchedule::DriftWindow {
                window, deviation, recent, totals, boost_left, ..
            } => {
                let slot = (action as usize - 1).min(recent.len() - 1);
                let (count, sum) = &mut totals[slot];
                *count += 1;
                *sum += reward_value;
                let long_run = *sum / *count as f64;
                let win = &mut recent[slot];
                if win.len() == *window {
                    win.pop_front();
                }
                win.push_back(reward_value);
                let win_mean = win.iter().sum::<f64>() / win.len() as f64;
                if (win_mean - long_run).abs() > *deviation * long_run.abs().max(1.0) {
                    *boost_left = *window as u64;
                } else if *boost_left > 0 {
                    *boost_left -= 1;
                }
            }
        }
        self.current()
    }
}

/// The bandit policy: Q estimates plus an ε schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlPolicy {
    pub table: QTable,
    pub schedule: EpsilonSchedule,
}

impl RlPolicy {
    pub fn new(table: QTable, schedule: EpsilonSchedule) -> Self {
        RlPolicy { table, schedule }
    }
}

/// A replica-count decision. `state` is present only for the bandit and
/// must be echoed back in [`PolicyKind::observe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: u8,
    pub state: Option<State>,
}

/// The three enactment mechanisms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolicyKind {
    Single,
    Fixed(u8),
    Rl(Box<RlPolicy>),
}

impl PolicyKind {
    pub fn max_replicas(&self) -> u8 {
        match self {
            PolicyKind::Single => 1,
            PolicyKind::Fixed(n) => *n,
            PolicyKind::Rl(rl) => rl.table.actions(),
        }
    }

    /// Decides how many replicas to submit for a task arriving at
    /// `submit_time` with contingency proportion `phi`.
    pub fn decide(&mut self, submit_time: Timestamp, phi: f64, rng: &mut impl Rng) -> Decision {
        match self {
            PolicyKind::Single => Decision { action: 1, state: None },
            PolicyKind::Fixed(n) => Decision { action: *n, state: None },
            PolicyKind::Rl(rl) => {
                let state = rl.table.discretize(submit_time, phi);
                let action = select_action(&rl.table, state, rl.schedule.current(), rng);
                Decision { action, state: Some(state) }
            }
        }
    }

    /// Feeds a task outcome back into the bandit; a no-op for the static
    /// policies. Returns the reward signal that was applied.
    pub fn observe(
        &mut self,
        state: State,
        action: u8,
        succeeded: bool,
        sigma: f64,
    ) -> Option<RewardSignal> {
        match self {
            PolicyKind::Rl(rl) => {
                let signal = reward(succeeded, sigma);
                rl.table.update(state, action, signal.value);
                rl.schedule.schedule_tick(action, signal.value);
                Some(signal)
            }
            _ => None,
        }
    }
}
