//! Greedy rollouts of trained policies and method comparison reports.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{encode_state, select_actions, Checkpoint, SelectionRule};
use crate::baselines::{enumerate_optimal, ga_optimize, GaConfig};
use crate::env::{sample_scenario_with, DamageScenario, EpisodeRecord, RecoveryEnv, ScenarioKind};
use crate::error::{input_err, Error, Result};
use crate::functionality::System;
use crate::nn::QNetworkParams;
use crate::schema::format_sequence;

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub record: EpisodeRecord,
    /// Components repaired at each step.
    pub steps: Vec<Vec<usize>>,
}

fn check_dimensions(checkpoint: &Checkpoint, system: &System) -> Result<()> {
    let n = system.component_count();
    let cfg = checkpoint.network.config();
    let expect_in = crate::agent::input_dim(n, checkpoint.resource_units);
    if cfg.output_dim != n || cfg.input_dim != expect_in {
        return input_err(format!(
            "checkpoint network is {}->{}, system `{}` needs {}->{}",
            cfg.input_dim,
            cfg.output_dim,
            system.spec().name(),
            expect_in,
            n
        ));
    }
    Ok(())
}

/// Pure greedy masked rollout until functionality is restored.
pub fn rollout(checkpoint: &Checkpoint, system: &System, scenario: &DamageScenario) -> Result<Rollout> {
    check_dimensions(checkpoint, system)?;
    greedy_rollout(&checkpoint.network, checkpoint.resource_units, system, scenario)
}

/// Greedy rollout of a bare network; ties go to the lower component index.
pub fn greedy_rollout(
    network: &QNetworkParams,
    resource_units: usize,
    system: &System,
    scenario: &DamageScenario,
) -> Result<Rollout> {
    let mut env = RecoveryEnv::new(system).with_resource_units(resource_units)?;
    env.reset(scenario)?;
    // Greedy selection never draws from the generator.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut steps = Vec::new();
    while !env.done() {
        let state = env.state();
        let mask: Vec<bool> = (0..state.len()).map(|i| !state.is_operational(i)).collect();
        let q = network.forward(&encode_state(state, resource_units))?;
        let actions = select_actions(&q, &mask, resource_units, SelectionRule::Greedy, &mut rng)?;
        env.step(&actions)?;
        steps.push(actions);
    }
    debug_assert_eq!(env.rejected_actions(), 0);
    Ok(Rollout { record: env.record()?, steps })
}

/// Re-simulates grouped steps from `scenario`.
pub fn replay_steps(
    system: &System,
    scenario: &DamageScenario,
    steps: &[Vec<usize>],
    resource_units: usize,
) -> Result<EpisodeRecord> {
    let mut env = RecoveryEnv::new(system).with_resource_units(resource_units)?;
    env.reset(scenario)?;
    for s in steps {
        env.step(s)?;
    }
    env.record()
}

/// `count` seeded random scenarios, cycling through the damage counts in `ks`.
pub fn generate_scenarios(n: usize, ks: &[usize], count: usize, seed: u64) -> Result<Vec<DamageScenario>> {
    if ks.is_empty() {
        return input_err("at least one damage count is required");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let k = ks[i % ks.len()];
            let mut s = sample_scenario_with(n, ScenarioKind::RandomK(k), &mut rng)?;
            s.label = format!("s{i:03}-k{k}");
            Ok(s)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub scenario: String,
    pub lor: f64,
    pub seconds: f64,
    /// Components repaired at each step, 0-based.
    pub steps: Vec<Vec<usize>>,
}

impl ReportRow {
    /// `4-2-5` for single repairs; concurrent repairs are joined with `+`.
    pub fn sequence(&self) -> String {
        self.steps
            .iter()
            .map(|s| s.iter().map(|c| (c + 1).to_string()).collect::<Vec<_>>().join("+"))
            .collect::<Vec<_>>()
            .join("-")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub count: usize,
    pub mean_lor: f64,
    /// Population standard deviation.
    pub std_lor: f64,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub method: String,
    pub scenario: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
    pub errors: Vec<ScenarioError>,
}

impl ComparisonReport {
    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn methods(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method.clone());
            }
        }
        out
    }

    pub fn summary(&self) -> Vec<MethodSummary> {
        self.methods()
            .into_iter()
            .map(|m| {
                let lors: Vec<f64> = self.rows_for(&m).map(|r| r.lor).collect();
                let secs: Vec<f64> = self.rows_for(&m).map(|r| r.seconds).collect();
                let n = lors.len() as f64;
                let mean = lors.iter().sum::<f64>() / n;
                let var = lors.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
                MethodSummary {
                    count: lors.len(),
                    mean_lor: mean,
                    std_lor: var.sqrt(),
                    mean_seconds: secs.iter().sum::<f64>() / n,
                    method: m,
                }
            })
            .collect()
    }

    /// Fraction of scenarios with both methods where `a` scores a LoR no worse than `b`.
    pub fn win_fraction(&self, a: &str, b: &str) -> Option<f64> {
        let mut paired = 0usize;
        let mut wins = 0usize;
        for ra in self.rows_for(a) {
            if let Some(rb) = self.rows_for(b).find(|r| r.scenario == ra.scenario) {
                paired += 1;
                if ra.lor <= rb.lor {
                    wins += 1;
                }
            }
        }
        (paired > 0).then(|| wins as f64 / paired as f64)
    }

    /// `method,scenario,lor,sequence`; timings are kept out so the file is reproducible.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "scenario", "lor", "sequence"])?;
        for r in &self.rows {
            w.write_record([r.method.as_str(), r.scenario.as_str(), &r.lor.to_string(), &r.sequence()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable summary including wall-clock timings.
    pub fn text_summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14} {:>6} {:>14} {:>12} {:>12}", "method", "runs", "mean_lor", "std_lor", "mean_secs");
        for m in self.summary() {
            let _ = writeln!(
                s,
                "{:<14} {:>6} {:>14.3} {:>12.3} {:>12.6}",
                m.method, m.count, m.mean_lor, m.std_lor, m.mean_seconds
            );
        }
        let methods = self.methods();
        for a in &methods {
            for b in &methods {
                if a != b {
                    if let Some(f) = self.win_fraction(a, b) {
                        let _ = writeln!(s, "{a} <= {b}: {:.3}", f);
                    }
                }
            }
        }
        if !self.errors.is_empty() {
            let _ = writeln!(s, "errors:");
            for e in &self.errors {
                let _ = writeln!(s, "  {} {}: {}", e.method, e.scenario, e.message);
            }
        }
        let _ = writeln!(s, "timings:");
        for r in &self.rows {
            let _ = writeln!(s, "  {} {} {:.6}", r.method, r.scenario, r.seconds);
        }
        s
    }
}

/// Rolls the checkpoint out on every scenario; failures are recorded per scenario.
pub fn batch_eval(checkpoint: &Checkpoint, system: &System, scenarios: &[DamageScenario]) -> ComparisonReport {
    let method = checkpoint.algorithm.name().to_string();
    let mut report = ComparisonReport::default();
    for sc in scenarios {
        let start = Instant::now();
        match rollout(checkpoint, system, sc) {
            Ok(r) => report.rows.push(ReportRow {
                method: method.clone(),
                scenario: sc.label.clone(),
                lor: r.record.lor,
                seconds: start.elapsed().as_secs_f64(),
                steps: r.steps,
            }),
            Err(e) => report.errors.push(ScenarioError {
                method: method.clone(),
                scenario: sc.label.clone(),
                message: e.to_string(),
            }),
        }
    }
    report
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub max_enum: usize,
    pub ga: GaConfig,
    pub ga_seeds: Vec<u64>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { max_enum: crate::baselines::DEFAULT_MAX_ENUM, ga: GaConfig::default(), ga_seeds: (0..10).collect() }
    }
}

/// Enumeration (when small enough), best-of-seeds GA, and the DRL rollout on each scenario.
///
/// The GA row's time is the total over all seeds.
pub fn compare(
    system: &System,
    scenarios: &[DamageScenario],
    checkpoint: Option<&Checkpoint>,
    opts: &CompareOptions,
) -> Result<ComparisonReport> {
    if opts.ga_seeds.is_empty() && checkpoint.is_none() && opts.max_enum == 0 {
        return input_err("nothing to compare");
    }
    let mut report = ComparisonReport::default();
    let push_err = |report: &mut ComparisonReport, method: &str, sc: &DamageScenario, e: Error| {
        report.errors.push(ScenarioError {
            method: method.into(),
            scenario: sc.label.clone(),
            message: e.to_string(),
        })
    };
    for sc in scenarios {
        if sc.initial_state.damaged_count() <= opts.max_enum {
            let start = Instant::now();
            match enumerate_optimal(system, sc, opts.max_enum) {
                Ok(e) => report.rows.push(ReportRow {
                    method: "enumeration".into(),
                    scenario: sc.label.clone(),
                    lor: e.best.lor,
                    seconds: start.elapsed().as_secs_f64(),
                    steps: e.best.order.iter().map(|&c| vec![c]).collect(),
                }),
                Err(e) => push_err(&mut report, "enumeration", sc, e),
            }
        }
        if !opts.ga_seeds.is_empty() && sc.initial_state.damaged_count() > 0 {
            let start = Instant::now();
            let mut best: Option<crate::baselines::SequenceSolution> = None;
            let mut failure = None;
            for &seed in &opts.ga_seeds {
                match ga_optimize(system, sc, &GaConfig { seed, ..opts.ga.clone() }) {
                    Ok(r) => {
                        if best.as_ref().is_none_or(|b| r.best.lor < b.lor) {
                            best = Some(r.best);
                        }
                    }
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            let seconds = start.elapsed().as_secs_f64();
            match (failure, best) {
                (Some(e), _) => push_err(&mut report, "ga-best", sc, e),
                (None, Some(b)) => report.rows.push(ReportRow {
                    method: "ga-best".into(),
                    scenario: sc.label.clone(),
                    lor: b.lor,
                    seconds,
                    steps: b.order.iter().map(|&c| vec![c]).collect(),
                }),
                (None, None) => {}
            }
        }
        if let Some(cp) = checkpoint {
            let start = Instant::now();
            match rollout(cp, system, sc) {
                Ok(r) => report.rows.push(ReportRow {
                    method: "drl".into(),
                    scenario: sc.label.clone(),
                    lor: r.record.lor,
                    seconds: start.elapsed().as_secs_f64(),
                    steps: r.steps,
                }),
                Err(e) => push_err(&mut report, "drl", sc, e),
            }
        }
    }
    Ok(report)
}

/// LoR of each model (rows) on each scenario (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct CrossMatrix {
    pub models: Vec<String>,
    pub scenarios: Vec<String>,
    pub lor: Vec<Vec<f64>>,
    pub rollouts: Vec<Vec<Rollout>>,
}

impl CrossMatrix {
    /// Long-form `model,scenario,lor,sequence`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["model", "scenario", "lor", "sequence"])?;
        for (i, m) in self.models.iter().enumerate() {
            for (j, s) in self.scenarios.iter().enumerate() {
                let seq = format_sequence(&self.rollouts[i][j].record.repair_sequence);
                w.write_record([m.as_str(), s.as_str(), &self.lor[i][j].to_string(), &seq])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn cross_test(
    models: &[(String, Checkpoint)],
    system: &System,
    scenarios: &[DamageScenario],
) -> Result<CrossMatrix> {
    let mut lor = Vec::with_capacity(models.len());
    let mut rollouts = Vec::with_capacity(models.len());
    for (_, cp) in models {
        let row = scenarios.iter().map(|sc| rollout(cp, system, sc)).collect::<Result<Vec<_>>>()?;
        lor.push(row.iter().map(|r| r.record.lor).collect());
        rollouts.push(row);
    }
    Ok(CrossMatrix {
        models: models.iter().map(|(n, _)| n.clone()).collect(),
        scenarios: scenarios.iter().map(|s| s.label.clone()).collect(),
        lor,
        rollouts,
    })
}
