use std::path::Path;

use anyhow::Result;
use repairq::env::DamageScenario;
use repairq::fixtures::fixture_text;
use repairq::schema::{state_from_damaged_one_based, ScenarioSetFile, SystemFile};
use repairq::System;

use crate::manifest::{file_ref, sha256_hex, FileRef, FixtureRef};
use crate::{usage, ScenarioArgs};

/// A system together with the file it came from.
pub struct Loaded {
    pub file: SystemFile,
    pub system: System,
    pub fixture: FixtureRef,
}

impl Loaded {
    pub fn n(&self) -> usize {
        self.system.component_count()
    }
}

pub fn load_system(name: &str) -> Result<Loaded> {
    let text = match fixture_text(name) {
        Ok(t) => t,
        Err(repairq::Error::UnknownFixture(_)) => {
            return usage(format!("unknown system `{name}` (built-in: mimo, substation, or a file path)"))
        }
        Err(e) => return Err(e.into()),
    };
    let file = SystemFile::parse(&text)?;
    let system = file.system()?;
    Ok(Loaded { file, system, fixture: FixtureRef { name: name.to_string(), sha256: sha256_hex(text.as_bytes()) } })
}

/// The scenario picked by `--scenario` or `--damaged`, if either was given.
pub fn one(loaded: &Loaded, args: &ScenarioArgs) -> Result<Option<DamageScenario>> {
    if let Some(name) = &args.scenario {
        return match loaded.file.scenario(name) {
            Ok(s) => Ok(Some(s)),
            Err(e) => usage(e.to_string()),
        };
    }
    if let Some(ids) = &args.damaged {
        let state = match state_from_damaged_one_based(loaded.n(), ids) {
            Ok(s) => s,
            Err(e) => return usage(e.to_string()),
        };
        let label = ids.iter().map(usize::to_string).collect::<Vec<_>>().join("-");
        return Ok(Some(DamageScenario::new(format!("damaged-{label}"), state)));
    }
    Ok(None)
}

pub fn one_required(loaded: &Loaded, args: &ScenarioArgs) -> Result<DamageScenario> {
    match one(loaded, args)? {
        Some(s) => Ok(s),
        None => usage("a scenario is required: pass --scenario NAME or --damaged IDS"),
    }
}

/// Resolves a scenario-set spec: `ds`, `catalog`, a scenario file, or catalog names.
pub fn set(loaded: &Loaded, spec: &str) -> Result<(Vec<DamageScenario>, Option<FileRef>)> {
    let names: Vec<String> = match spec {
        "catalog" => loaded.file.scenarios.keys().cloned().collect(),
        "ds" => loaded.file.scenarios.keys().filter(|k| k.starts_with("ds")).cloned().collect(),
        path if Path::new(path).is_file() => {
            let file = ScenarioSetFile::parse(&std::fs::read_to_string(path)?)?;
            if file.components != loaded.n() {
                return usage(format!(
                    "scenario file has {} components, system `{}` has {}",
                    file.components,
                    loaded.fixture.name,
                    loaded.n()
                ));
            }
            return Ok((file.scenarios()?, Some(file_ref(Path::new(path))?)));
        }
        list => list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
    };
    if names.is_empty() {
        return usage(format!("scenario set `{spec}` is empty"));
    }
    let mut out = Vec::with_capacity(names.len());
    for name in &names {
        match loaded.file.scenario(name) {
            Ok(s) => out.push(s),
            Err(e) => return usage(e.to_string()),
        }
    }
    Ok((out, None))
}
