//! Scenario definition, JSON (de)serialization, validation against the
//! standing assumptions, and seeded generation of large random scenarios.
//!
//! Schema: {"name", "n", "edges" | "edges_R" + "edges_C",
//! "agents": [{"kind", "a", "b", "d", "e", "f", "lo", "hi", "demand"}],
//! "alpha", "trigger": {"E", "s"}, "K", "seed"}.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{check_spanning_trees, DiGraph, NetworkModel};
use crate::objective::{CostKind, CostModel};
use crate::trigger::TriggerSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub kind: CostKind,
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    pub lo: f64,
    pub hi: f64,
    pub demand: f64,
}

impl AgentSpec {
    pub fn cost_model(&self) -> Result<CostModel> {
        match self.kind {
            CostKind::Quadratic => {
                CostModel::quadratic(self.a, self.b, self.lo, self.hi, self.demand)
            }
            CostKind::QuadraticExp => {
                let (d, e, f) = match (self.d, self.e, self.f) {
                    (Some(d), Some(e), Some(f)) => (d, e, f),
                    _ => {
                        return Err(Error::InvalidScenario(
                            "quadratic_exp agent is missing one of d, e, f".into(),
                        ))
                    }
                };
                CostModel::quadratic_exp(self.a, self.b, d, e, f, self.lo, self.hi, self.demand)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    /// Shared edge list for both mixing graphs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    #[serde(rename = "edges_R", default, skip_serializing_if = "Option::is_none")]
    pub edges_r: Option<Vec<(usize, usize)>>,
    #[serde(rename = "edges_C", default, skip_serializing_if = "Option::is_none")]
    pub edges_c: Option<Vec<(usize, usize)>>,
    pub agents: Vec<AgentSpec>,
    pub alpha: f64,
    pub trigger: TriggerSchedule,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        Scenario::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    /// Bundled scenarios shipped with the crate.
    pub fn builtin(name: &str) -> Option<Scenario> {
        let text = match name {
            "case1" => include_str!("../scenarios/case1.json"),
            "case2" => include_str!("../scenarios/case2.json"),
            _ => return None,
        };
        Some(Scenario::from_json(text).expect("bundled scenarios are valid"))
    }

    #[allow(clippy::type_complexity)]
    fn edge_lists(&self) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
        match (&self.edges, &self.edges_r, &self.edges_c) {
            (Some(shared), None, None) => Ok((shared.clone(), shared.clone())),
            (None, Some(r), Some(c)) => Ok((r.clone(), c.clone())),
            _ => Err(Error::InvalidScenario(
                "specify either \"edges\" or both \"edges_R\" and \"edges_C\"".into(),
            )),
        }
    }

    pub fn graph_r(&self) -> Result<DiGraph> {
        let (r, _) = self.edge_lists()?;
        DiGraph::new(self.n, r)
    }

    pub fn graph_c(&self) -> Result<DiGraph> {
        let (_, c) = self.edge_lists()?;
        DiGraph::new(self.n, c)
    }

    pub fn cost_models(&self) -> Result<Vec<CostModel>> {
        self.agents.iter().map(AgentSpec::cost_model).collect()
    }

    pub fn schedule(&self) -> Result<TriggerSchedule> {
        TriggerSchedule::new(self.trigger.initial, self.trigger.decay)
    }

    /// Validate the standing assumptions; error messages name the failed
    /// assumption.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidScenario("n must be at least 1".into()));
        }
        if self.agents.len() != self.n {
            return Err(Error::InvalidScenario(format!(
                "{} agents listed for n = {}",
                self.agents.len(),
                self.n
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "step size alpha = {} must be positive",
                self.alpha
            )));
        }
        self.schedule()?;
        let costs = self.cost_models()?;

        // Feasibility: some point inside the boxes meets the balance.
        let total_lo: f64 = costs.iter().map(|c| c.box_lo).sum();
        let total_hi: f64 = costs.iter().map(|c| c.box_hi).sum();
        let total_demand: f64 = costs.iter().map(|c| c.demand.sum()).sum();
        if total_demand < total_lo || total_demand > total_hi {
            return Err(Error::InvalidScenario(format!(
                "feasibility (Slater) requirement: total demand {total_demand} outside the aggregate \
                 box [{total_lo}, {total_hi}]"
            )));
        }

        // Connectivity: spanning trees with a common root.
        let graph_r = self.graph_r()?;
        let graph_c = self.graph_c()?;
        let (ok, _) = check_spanning_trees(&graph_r, &graph_c);
        if !ok {
            return Err(Error::InvalidScenario(
                "connectivity requirement: the pull graph and transposed push graph share no \
                 spanning-tree root"
                    .into(),
            ));
        }

        // Stochasticity holds by construction of the uniform weights; verify
        // numerically anyway.
        let r = crate::network::build_row_stochastic(&graph_r);
        let c = crate::network::build_col_stochastic(&graph_c);
        for i in 0..self.n {
            if (r.row(i).sum() - 1.0).abs() >= 1e-12 || (c.column(i).sum() - 1.0).abs() >= 1e-12 {
                return Err(Error::InvalidScenario(
                    "stochastic-weight requirement: row/column sums off by more than 1e-12"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Build the simulation inputs.
    pub fn build(&self) -> Result<(NetworkModel, Vec<CostModel>, TriggerSchedule)> {
        self.validate()?;
        let net = NetworkModel::build(self.graph_r()?, self.graph_c()?)?;
        Ok((net, self.cost_models()?, self.schedule()?))
    }

    pub fn total_demand(&self) -> f64 {
        self.agents.iter().map(|a| a.demand).sum()
    }
}

/// Seeded random scenario on a strongly connected digraph: a directed
/// Hamiltonian cycle backbone plus random chords, quadratic generators
/// with coefficients a in [0.01, 0.05] and b in [1, 5], and demands scaled
/// so the balance constraint stays strictly feasible. Deterministic for a
/// fixed seed.
pub fn gen_large_scenario(n: usize, gen_fraction: f64, seed: u64) -> Result<Scenario> {
    if n < 2 {
        return Err(Error::InvalidScenario(
            "generated scenarios need at least 2 agents".into(),
        ));
    }
    if !(0.0..=1.0).contains(&gen_fraction) {
        return Err(Error::InvalidScenario(format!(
            "gen_fraction = {gen_fraction} must lie in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Cycle backbone: each agent receives from its successor.
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let mut seen: std::collections::BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    for _ in 0..2 * n {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && seen.insert((u, v)) {
            edges.push((u, v));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let gen_count = ((gen_fraction * n as f64).round() as usize).clamp(1, n);
    let mut is_generator = vec![false; n];
    for &i in order.iter().take(gen_count) {
        is_generator[i] = true;
    }

    let mut agents = Vec::with_capacity(n);
    for &gen in &is_generator {
        let demand = rng.random_range(5.0..30.0);
        if gen {
            agents.push(AgentSpec {
                kind: CostKind::Quadratic,
                a: rng.random_range(0.01..0.05),
                b: rng.random_range(1.0..5.0),
                d: None,
                e: None,
                f: None,
                lo: 0.0,
                hi: rng.random_range(60.0..120.0),
                demand,
            });
        } else {
            agents.push(AgentSpec {
                kind: CostKind::Quadratic,
                a: 1.0,
                b: 0.0,
                d: None,
                e: None,
                f: None,
                lo: 0.0,
                hi: 0.0,
                demand,
            });
        }
    }

    // Keep the demand comfortably inside the aggregate capacity.
    let total_hi: f64 = agents.iter().map(|a| a.hi).sum();
    let total_demand: f64 = agents.iter().map(|a| a.demand).sum();
    if total_demand > 0.9 * total_hi {
        let scale = 0.9 * total_hi / total_demand;
        for a in &mut agents {
            a.demand *= scale;
        }
    }

    let scenario = Scenario {
        name: format!("gen_n{n}_seed{seed}"),
        n,
        edges: Some(edges),
        edges_r: None,
        edges_c: None,
        agents,
        alpha: 0.015,
        trigger: TriggerSchedule {
            initial: 0.5,
            decay: 0.98,
        },
        k: 5000,
        seed: Some(seed),
    };
    scenario.validate()?;
    Ok(scenario)
}
