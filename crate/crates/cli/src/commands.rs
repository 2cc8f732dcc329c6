use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::json;

use repairq::agent::{ScenarioPolicy, Trainer};
use repairq::baselines::{enumerate_optimal, ga_optimize, GaConfig};
use repairq::env::DamageScenario;
use repairq::evaluation::{batch_eval, compare, cross_test, generate_scenarios, CompareOptions};
use repairq::schema::{format_sequence, GeneratorEntry, ScenarioSetFile};
use repairq::{Algorithm, Checkpoint, TrainConfig};

use crate::manifest::{file_ref, FileRef, Manifest, RunDir};
use crate::scenarios::{self, Loaded};
use crate::{usage, Cli, Command, CompareArgs, CrosstestArgs, EnumerateArgs, GaArgs, GaFlags, GenArgs, RolloutArgs, TrainArgs};

pub fn run(command: Command, args: Vec<String>) -> Result<()> {
    match command {
        Command::Train(a) => train(a, args),
        Command::Rollout(a) => rollout(a, args),
        Command::Enumerate(a) => enumerate(a, args),
        Command::Ga(a) => ga(a, args),
        Command::Compare(a) => compare_cmd(a, args),
        Command::Crosstest(a) => crosstest(a, args),
        Command::Genscenarios(a) => genscenarios(a, args),
        Command::Rerun { manifest } => rerun(&manifest),
    }
}

fn rerun(path: &Path) -> Result<()> {
    let manifest = Manifest::load(path)?;
    let argv = std::iter::once("repairq".to_string()).chain(manifest.args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => return usage(format!("manifest arguments no longer parse: {e}")),
    };
    if matches!(cli.command, Command::Rerun { .. }) {
        return usage("a manifest cannot describe a rerun");
    }
    run(cli.command, manifest.args)
}

/// Creates the run directory and writes the manifest before any work starts.
struct Run {
    dir: RunDir,
}

impl Run {
    fn start(
        command: &str,
        args: Vec<String>,
        config: serde_json::Value,
        seed: u64,
        loaded: &Loaded,
        inputs: Vec<FileRef>,
        artifacts: &[&str],
    ) -> Result<Self> {
        let dir = RunDir::create(seed)?;
        let mut all = vec!["manifest.json".to_string()];
        all.extend(artifacts.iter().map(|s| s.to_string()));
        dir.write_manifest(&Manifest {
            command: command.to_string(),
            args,
            config,
            seed,
            fixture: loaded.fixture.clone(),
            inputs,
            artifacts: all,
            started_at: chrono::Utc::now().to_rfc3339(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        })?;
        println!("run directory: {}", dir.path.display());
        Ok(Self { dir })
    }

    fn csv(&self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> repairq::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.dir.write(name, buf)
    }
}

fn train_config(a: &TrainArgs, loaded: &Loaded) -> Result<TrainConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            match serde_json::from_str::<TrainConfig>(&text) {
                Ok(c) => c,
                Err(e) => return usage(format!("bad training config {}: {e}", path.display())),
            }
        }
        None => TrainConfig::for_system(loaded.file.name.as_str(), a.algo.unwrap_or(Algorithm::Dqn)),
    };
    if let Some(v) = a.algo {
        cfg.algorithm = v;
    }
    if let Some(v) = a.episodes {
        cfg.episodes = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.units {
        cfg.resource_units = v;
    }
    if let Some(v) = a.exploitation {
        cfg.exploitation = v;
    }
    if let Some(k) = a.random_k {
        cfg.scenarios = ScenarioPolicy::RandomK(k);
    }
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.target_sync {
        cfg.target_sync = v;
    }
    if let Some(v) = &a.hidden {
        cfg.hidden = v.clone();
    }
    if a.raw_rewards {
        cfg.normalize_rewards = false;
    }
    if let Err(e) = cfg.validate() {
        return usage(e.to_string());
    }
    if let ScenarioPolicy::RandomK(k) = cfg.scenarios {
        if k == 0 || k > loaded.n() {
            return usage(format!("--random-k must lie in 1..={}", loaded.n()));
        }
    }
    Ok(cfg)
}

fn train(a: TrainArgs, args: Vec<String>) -> Result<()> {
    let loaded = scenarios::load_system(&a.system.system)?;
    let cfg = train_config(&a, &loaded)?;
    let inputs = a.config.as_deref().map(file_ref).transpose()?.into_iter().collect();
    let run = Run::start(
        "train",
        args,
        serde_json::to_value(&cfg)?,
        cfg.seed,
        &loaded,
        inputs,
        &["checkpoint.json", "episodes.csv", "losses.csv", "summary.txt"],
    )?;
    let start = Instant::now();
    let mut trainer = Trainer::new(&loaded.system, &cfg)?;
    let every = (cfg.episodes / 10).max(1);
    for e in 0..cfg.episodes {
        let log = trainer.run_episode()?;
        if (e + 1) % every == 0 || e + 1 == cfg.episodes {
            eprintln!(
                "episode {:>6}/{}  lor {:>10}  greedy {:>10}  best {:>10}  eps {:.3}",
                e + 1,
                cfg.episodes,
                log.lor,
                log.greedy_lor,
                trainer.best().map_or(f64::NAN, |b| b.lor),
                log.epsilon
            );
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let out = trainer.finish()?;
    out.checkpoint.save(run.dir.file("checkpoint.json"))?;
    run.csv("episodes.csv", |b| out.log.write_episodes_csv(b))?;
    run.csv("losses.csv", |b| out.log.write_losses_csv(b))?;
    let summary = format!(
        "algorithm {}\nbest_lor {}\nbest_episode {}\nsequence {}\ninvalid_actions {}\ntarget_syncs {}\nseconds {seconds:.3}\n",
        cfg.algorithm.name(),
        out.checkpoint.lor,
        out.checkpoint.episode,
        steps_text(&out.checkpoint.steps),
        out.log.invalid_actions,
        out.log.target_syncs,
    );
    run.dir.write("summary.txt", &summary)?;
    print!("{summary}");
    Ok(())
}

/// 1-based grouped steps as `4-2+5-1`.
fn steps_text(steps: &[Vec<usize>]) -> String {
    steps
        .iter()
        .map(|s| s.iter().map(usize::to_string).collect::<Vec<_>>().join("+"))
        .collect::<Vec<_>>()
        .join("-")
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

fn check_match(cp: &Checkpoint, loaded: &Loaded, path: &Path) -> Result<()> {
    if cp.system != loaded.file.name || cp.component_count() != loaded.n() {
        anyhow::bail!(
            "checkpoint {} was trained on `{}` ({} components), not `{}` ({} components)",
            path.display(),
            cp.system,
            cp.component_count(),
            loaded.file.name,
            loaded.n()
        );
    }
    Ok(())
}

fn rollout(a: RolloutArgs, args: Vec<String>) -> Result<()> {
    let cp = load_checkpoint(&a.checkpoint)?;
    let loaded = scenarios::load_system(a.system.as_deref().unwrap_or(&cp.system))?;
    let (list, scen_file) = match (&a.scenarios, scenarios::one(&loaded, &a.one)?) {
        (Some(spec), _) => scenarios::set(&loaded, spec)?,
        (None, Some(s)) => (vec![s], None),
        (None, None) => (vec![cp.damage_scenario()?], None),
    };
    let mut inputs = vec![file_ref(&a.checkpoint)?];
    inputs.extend(scen_file);
    let config = json!({ "scenarios": list.iter().map(|s| &s.label).collect::<Vec<_>>() });
    let run = Run::start("rollout", args, config, 0, &loaded, inputs, &["report.csv", "curves.csv", "summary.txt"])?;
    check_match(&cp, &loaded, &a.checkpoint)?;
    let report = batch_eval(&cp, &loaded.system, &list);
    if let Some(e) = report.errors.first() {
        anyhow::bail!("rollout on `{}` failed: {}", e.scenario, e.message);
    }
    run.csv("report.csv", |b| report.write_csv(b))?;
    let mut curves = String::from("scenario,time,functionality\n");
    for sc in &list {
        let r = repairq::rollout(&cp, &loaded.system, sc)?;
        for (t, f) in r.record.curve.points() {
            curves.push_str(&format!("{},{t},{f}\n", sc.label));
        }
    }
    run.dir.write("curves.csv", curves)?;
    let summary = report.text_summary();
    run.dir.write("summary.txt", &summary)?;
    for row in &report.rows {
        println!("{}: lor {} sequence {}", row.scenario, row.lor, row.sequence());
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs, args: Vec<String>) -> Result<()> {
    let loaded = scenarios::load_system(&a.system.system)?;
    let sc = scenarios::one_required(&loaded, &a.one)?;
    let m = sc.initial_state.damaged_count();
    if m > a.max_enum {
        return usage(format!(
            "enumeration refused: {m} damaged components exceeds the limit of {}; raise --max-enum to allow it",
            a.max_enum
        ));
    }
    let config = json!({ "scenario": sc.label, "damaged": sc.damaged().iter().map(|c| c + 1).collect::<Vec<_>>(), "max_enum": a.max_enum });
    let run = Run::start("enumerate", args, config, 0, &loaded, vec![], &["optimal.csv", "curves.csv"])?;
    let e = enumerate_optimal(&loaded.system, &sc, a.max_enum)?;
    let mut optimal = String::from("sequence,lor\n");
    for o in &e.optimal_orders {
        optimal.push_str(&format!("{},{}\n", format_sequence(o), e.best.lor));
    }
    run.dir.write("optimal.csv", optimal)?;
    let mut curves = String::from("curve,time,functionality\n");
    for (i, c) in e.curves.iter().enumerate() {
        for (t, f) in c.points() {
            curves.push_str(&format!("{},{t},{f}\n", i + 1));
        }
    }
    run.dir.write("curves.csv", curves)?;
    println!("scenario {}: {} orders evaluated, {} distinct curves", sc.label, e.sequences, e.curves.len());
    println!("optimal lor {}", e.best.lor);
    for o in &e.optimal_orders {
        println!("  {}", format_sequence(o));
    }
    Ok(())
}

fn ga_config(f: &GaFlags, seed: u64) -> Result<GaConfig> {
    let d = GaConfig::default();
    let cfg = GaConfig {
        population_size: f.population.unwrap_or(d.population_size),
        generations: f.generations.unwrap_or(d.generations),
        crossover_rate: f.crossover_rate.unwrap_or(d.crossover_rate),
        mutation_rate: f.mutation_rate.unwrap_or(d.mutation_rate),
        tournament_size: f.tournament.unwrap_or(d.tournament_size),
        elite_count: f.elite.unwrap_or(d.elite_count),
        seed,
    };
    match cfg.validate() {
        Ok(()) => Ok(cfg),
        Err(e) => usage(e.to_string()),
    }
}

fn ga(a: GaArgs, args: Vec<String>) -> Result<()> {
    let loaded = scenarios::load_system(&a.system.system)?;
    let sc = scenarios::one_required(&loaded, &a.one)?;
    if sc.initial_state.damaged_count() == 0 {
        return usage("the scenario has no damaged components");
    }
    if a.seeds == 0 {
        return usage("--seeds must be at least 1");
    }
    let base = ga_config(&a.ga, a.seed)?;
    let config = json!({ "scenario": sc.label, "ga": base, "seeds": a.seeds });
    let run = Run::start("ga", args, config, a.seed, &loaded, vec![], &["ga.csv", "history.csv", "curve.csv"])?;
    let mut runs = String::from("seed,lor,sequence\n");
    let mut history = String::from("seed,generation,best_lor\n");
    let mut best: Option<repairq::SequenceSolution> = None;
    for seed in a.seed..a.seed + a.seeds {
        let out = ga_optimize(&loaded.system, &sc, &GaConfig { seed, ..base.clone() })?;
        runs.push_str(&format!("{seed},{},{}\n", out.best.lor, format_sequence(&out.best.order)));
        for (g, l) in out.history.iter().enumerate() {
            history.push_str(&format!("{seed},{g},{l}\n"));
        }
        println!("seed {seed}: lor {} sequence {}", out.best.lor, format_sequence(&out.best.order));
        if best.as_ref().is_none_or(|b| out.best.lor < b.lor) {
            best = Some(out.best);
        }
    }
    let best = best.expect("at least one seed");
    run.dir.write("ga.csv", runs)?;
    run.dir.write("history.csv", history)?;
    run.csv("curve.csv", |b| best.curve.write_csv(b))?;
    println!("best lor {}", best.lor);
    Ok(())
}

fn compare_cmd(a: CompareArgs, args: Vec<String>) -> Result<()> {
    let loaded = scenarios::load_system(&a.system.system)?;
    let (list, scen_file) = scenarios::set(&loaded, &a.scenarios)?;
    let cp = a.checkpoint.as_deref().map(load_checkpoint).transpose()?;
    let opts = CompareOptions { max_enum: a.max_enum, ga: ga_config(&a.ga, 0)?, ga_seeds: (0..a.ga_seeds).collect() };
    let mut inputs: Vec<FileRef> = a.checkpoint.as_deref().map(file_ref).transpose()?.into_iter().collect();
    inputs.extend(scen_file);
    let config = json!({
        "scenarios": list.iter().map(|s| &s.label).collect::<Vec<_>>(),
        "max_enum": opts.max_enum,
        "ga": opts.ga,
        "ga_seeds": opts.ga_seeds,
    });
    let run = Run::start("compare", args, config, 0, &loaded, inputs, &["report.csv", "summary.txt"])?;
    if let (Some(cp), Some(path)) = (&cp, &a.checkpoint) {
        check_match(cp, &loaded, path)?;
    }
    let report = compare(&loaded.system, &list, cp.as_ref(), &opts)?;
    run.csv("report.csv", |b| report.write_csv(b))?;
    let summary = report.text_summary();
    run.dir.write("summary.txt", &summary)?;
    print!("{summary}");
    if !report.errors.is_empty() {
        anyhow::bail!("{} scenario evaluations failed", report.errors.len());
    }
    Ok(())
}

fn model_arg(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((name, path)) => (name.to_string(), PathBuf::from(path)),
        None => {
            let p = PathBuf::from(spec);
            let name = p
                .parent()
                .and_then(|d| d.file_name())
                .map(|d| d.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            (name, p)
        }
    }
}

fn crosstest(a: CrosstestArgs, args: Vec<String>) -> Result<()> {
    let loaded = scenarios::load_system(&a.system.system)?;
    let (list, scen_file) = scenarios::set(&loaded, &a.scenarios)?;
    let mut models = Vec::new();
    let mut inputs = Vec::new();
    for spec in &a.checkpoints {
        let (name, path) = model_arg(spec);
        let cp = load_checkpoint(&path)?;
        inputs.push(file_ref(&path)?);
        models.push((name, path, cp));
    }
    inputs.extend(scen_file);
    let config = json!({
        "models": models.iter().map(|(n, _, _)| n).collect::<Vec<_>>(),
        "scenarios": list.iter().map(|s| &s.label).collect::<Vec<_>>(),
    });
    let run = Run::start("crosstest", args, config, 0, &loaded, inputs, &["crosstest.csv"])?;
    for (_, path, cp) in &models {
        check_match(cp, &loaded, path)?;
    }
    let named: Vec<(String, Checkpoint)> = models.into_iter().map(|(n, _, cp)| (n, cp)).collect();
    let m = cross_test(&named, &loaded.system, &list)?;
    run.csv("crosstest.csv", |b| m.write_csv(b))?;
    for (i, model) in m.models.iter().enumerate() {
        let mean = m.lor[i].iter().sum::<f64>() / m.lor[i].len() as f64;
        println!("{model}: mean lor {mean:.3} over {} scenarios", m.scenarios.len());
    }
    Ok(())
}

fn genscenarios(a: GenArgs, args: Vec<String>) -> Result<()> {
    let loaded = scenarios::load_system(&a.system)?;
    let n = loaded.n();
    if let Some(&k) = a.k.iter().find(|&&k| k == 0 || k > n) {
        return usage(format!("--k {k} outside 1..={n}"));
    }
    if a.count == 0 {
        return usage("--count must be positive");
    }
    let config = json!({ "k": a.k, "count": a.count, "seed": a.seed });
    let run = Run::start("genscenarios", args, config, a.seed, &loaded, vec![], &["scenarios.json"])?;
    let list: Vec<DamageScenario> = generate_scenarios(n, &a.k, a.count, a.seed)?;
    let mut file = ScenarioSetFile::from_scenarios(&loaded.file.name, n, &list);
    file.generator = Some(GeneratorEntry { k: a.k.clone(), count: a.count, seed: a.seed });
    run.dir.write("scenarios.json", file.to_json()? + "\n")?;
    println!("{} scenarios written", list.len());
    Ok(())
}
