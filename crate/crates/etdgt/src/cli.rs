//! Run orchestration behind the command-line interface: scenario loading
//! with overrides, oracle/bounds/trace file emission, and the run summary.

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::engine::{self, Algorithm, MetricsTrace};
use crate::error::Result;
use crate::oracle::{self, OracleSolution};
use crate::scenario::Scenario;
use crate::stepsize::BoundReport;

/// Resolve a scenario argument: an existing file path first, then a
/// bundled scenario name.
pub fn resolve_scenario(arg: &str) -> Result<Scenario> {
    let path = Path::new(arg);
    if path.exists() {
        return Scenario::load(path);
    }
    if let Some(s) = Scenario::builtin(arg) {
        return Ok(s);
    }
    Err(crate::error::Error::InvalidScenario(format!(
        "scenario '{arg}' is neither a file nor a bundled scenario"
    )))
}

/// CLI overrides applied to a loaded scenario before running.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub threshold_e: Option<f64>,
    pub threshold_s: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut Scenario) -> Result<()> {
        if let Some(k) = self.k {
            scenario.k = k;
        }
        if let Some(alpha) = self.alpha {
            scenario.alpha = alpha;
        }
        if let Some(e) = self.threshold_e {
            scenario.trigger.initial = e;
        }
        if let Some(s) = self.threshold_s {
            scenario.trigger.decay = s;
        }
        scenario.validate()
    }
}

/// Files written by a `run` invocation.
#[derive(Debug, Clone)]
pub struct RunOutputs {
    pub traces: Vec<(Algorithm, PathBuf)>,
    pub oracle_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: serde_json::Value,
}

fn final_metrics_json(trace: &MetricsTrace, oracle: &OracleSolution) -> serde_json::Value {
    let last = trace.final_row();
    let w_norm = oracle.w_star.iter().map(|x| x * x).sum::<f64>().sqrt();
    json!({
        "k": last.k,
        "consensus_error": last.consensus_error,
        "tracking_error": last.tracking_error,
        "grad_norm": last.grad_norm,
        "primal_err": last.primal_err,
        "primal_err_relative": last.primal_err / w_norm,
        "primal_residual": last.primal_residual,
        "supply_gap": last.supply_gap,
        "dual_gap": last.dual_gap,
        "comm_events_w": last.comm_w,
        "comm_events_s": last.comm_s,
        "comm_events_total": last.comm_w + last.comm_s,
        "comm_messages_total": last.comm_messages,
    })
}

/// Solve the oracle, run every requested algorithm, and write the trace
/// CSVs, the oracle JSON, and the summary JSON into `out_dir`.
pub fn run_case(
    scenario: &Scenario,
    algorithms: &[Algorithm],
    out_dir: &Path,
) -> Result<RunOutputs> {
    std::fs::create_dir_all(out_dir)?;
    let (net, costs, _) = scenario.build()?;
    let sol = oracle::solve_centralized(&costs)?;
    let oracle_path = out_dir.join(format!("{}_oracle.json", scenario.name));
    std::fs::write(
        &oracle_path,
        serde_json::to_string_pretty(&sol.to_json_value()).expect("json") + "\n",
    )?;

    let bounds = BoundReport::compute(scenario)?;

    // Independent runs fan out across threads; everything they share is
    // immutable. Outputs are written afterwards in argument order.
    let mut completed: Vec<(Algorithm, MetricsTrace)> = Vec::with_capacity(algorithms.len());
    let mut joined: Vec<(Algorithm, crate::error::Result<MetricsTrace>)> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = algorithms
            .iter()
            .map(|&alg| {
                let (net, costs, sol) = (&net, &costs, &sol);
                scope.spawn(move || {
                    (
                        alg,
                        engine::run_with(scenario, net, costs, alg, scenario.k, Some(sol)),
                    )
                })
            })
            .collect();
        for handle in handles {
            joined.push(handle.join().expect("simulation thread panicked"));
        }
    });
    for (alg, result) in joined {
        completed.push((alg, result?));
    }

    let mut traces = Vec::new();
    let mut runs = serde_json::Map::new();
    let mut totals: Vec<(Algorithm, u64, u64)> = Vec::new();
    for (alg, trace) in &completed {
        let alg = *alg;
        let path = out_dir.join(format!("{}_{}.csv", scenario.name, alg.file_tag()));
        trace.write_csv(&path)?;
        let last = trace.final_row();
        totals.push((alg, last.comm_w + last.comm_s, last.comm_messages));
        let mut entry = final_metrics_json(trace, &sol);
        if alg == Algorithm::EtDgt {
            // Partial gradient-energy sum up to the warmup index of the
            // sublinear bound, evaluated from the trace.
            let k0 = bounds.k0.ceil() as usize;
            let sum: f64 = trace
                .rows
                .iter()
                .take(k0.saturating_add(1).min(trace.rows.len()))
                .map(|r| r.grad_norm * r.grad_norm)
                .sum();
            entry["grad_energy_to_k0"] = json!(sum);
        }
        runs.insert(alg.file_tag().to_string(), entry);
        traces.push((alg, path));
    }

    let et = totals.iter().find(|t| t.0 == Algorithm::EtDgt);
    let pd = totals.iter().find(|t| t.0 == Algorithm::Ddgt);
    let ratios = match (et, pd) {
        (Some(e), Some(d)) if d.1 > 0 && d.2 > 0 => {
            Some((e.1 as f64 / d.1 as f64, e.2 as f64 / d.2 as f64))
        }
        _ => None,
    };
    let mut summary = json!({
        "scenario": scenario.name,
        "n": scenario.n,
        "K": scenario.k,
        "alpha": scenario.alpha,
        "trigger": {"E": scenario.trigger.initial, "s": scenario.trigger.decay},
        "total_demand": scenario.total_demand(),
        "oracle": {
            "x_star": sol.x_star.to_vec(),
            "f_star": sol.f_star,
            "kkt_residual": sol.kkt_residual,
        },
        "runs": serde_json::Value::Object(runs),
        "bounds": serde_json::to_value(&bounds).expect("json"),
    });
    if let Some((events, messages)) = ratios {
        summary["comm_ratio_events"] = json!(events);
        summary["comm_ratio_messages"] = json!(messages);
    }

    let summary_path = out_dir.join(format!("{}_summary.json", scenario.name));
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("json") + "\n",
    )?;

    Ok(RunOutputs {
        traces,
        oracle_path,
        summary_path,
        summary,
    })
}
