//! Deterministic event triggering: geometric threshold schedules, the
//! trigger decision, and per-variable last-broadcast caches.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric threshold sequence e_k = E * s^k. Non-increasing and summable
/// by construction for s in [0, 1). E = 0 is the degenerate always-trigger
/// schedule used to recover the periodic baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerSchedule {
    #[serde(rename = "E")]
    pub initial: f64,
    #[serde(rename = "s")]
    pub decay: f64,
}

impl TriggerSchedule {
    pub fn new(initial: f64, decay: f64) -> Result<Self> {
        if !(initial >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "trigger magnitude E = {initial} must be non-negative"
            )));
        }
        if !(0.0..1.0).contains(&decay) {
            return Err(Error::InvalidScenario(format!(
                "trigger decay s = {decay} must lie in [0, 1)"
            )));
        }
        Ok(TriggerSchedule { initial, decay })
    }

    /// e_k = E * s^k.
    pub fn threshold_at(&self, k: usize) -> f64 {
        self.initial * self.decay.powi(k as i32)
    }

    /// Sum of the whole sequence, E / (1 - s).
    pub fn total(&self) -> f64 {
        self.initial / (1.0 - self.decay)
    }
}

/// True iff the deviation between the live value and the last broadcast
/// reaches the threshold. Equality triggers.
pub fn should_trigger(current: ArrayView1<f64>, cached: ArrayView1<f64>, threshold: f64) -> bool {
    let dev = current
        .iter()
        .zip(cached.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    dev >= threshold
}

/// Last-broadcast cache and triggering history for one exchanged variable.
/// The engine keeps one instance for the dual estimates and one for the
/// gradient trackers.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerState {
    /// Last broadcast value per agent, n x m.
    pub cache: Array2<f64>,
    /// Triggering iterations per agent; iteration 0 is always present.
    pub instants: Vec<Vec<usize>>,
    /// Cumulative broadcast count (one per agent per triggering instant,
    /// regardless of fan-out).
    pub events: u64,
    /// Cumulative per-link message count (one per out-neighbor reached).
    pub messages: u64,
}

impl TriggerState {
    /// Seed the cache with the mandatory iteration-0 broadcast of every
    /// agent. `out_degrees[i]` is the fan-out of agent i on the relevant
    /// graph.
    pub fn seed(values: &Array2<f64>, out_degrees: &[usize]) -> Self {
        let n = values.nrows();
        TriggerState {
            cache: values.clone(),
            instants: vec![vec![0]; n],
            events: n as u64,
            messages: out_degrees.iter().map(|&d| d as u64).sum(),
        }
    }

    /// Replace agent `agent`'s cache with `value` at iteration `k`,
    /// appending the instant and advancing both counters.
    pub fn record_broadcast(
        &mut self,
        agent: usize,
        value: ArrayView1<f64>,
        k: usize,
        out_degree: usize,
    ) -> Result<()> {
        let last = *self.instants[agent]
            .last()
            .expect("instant lists are seeded with iteration 0");
        if k <= last {
            return Err(Error::OutOfOrder {
                agent,
                last,
                attempted: k,
            });
        }
        self.cache.row_mut(agent).assign(&value);
        self.instants[agent].push(k);
        self.events += 1;
        self.messages += out_degree as u64;
        Ok(())
    }

    /// Euclidean deviation between agent `agent`'s live value and its cache.
    pub fn deviation(&self, agent: usize, current: ArrayView1<f64>) -> f64 {
        self.cache
            .row(agent)
            .iter()
            .zip(current.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}
