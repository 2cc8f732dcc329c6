//! Built-in systems shipped as data files.
//!
//! `mimo` is the five-component multi-input multi-output example and
//! `substation` the 30-vertex, 43-macrocomponent step-down substation. Both
//! carry a `provenance` block describing how approximate they are. Any name
//! that points at an existing file is loaded from disk instead, so corrected
//! fixtures need no rebuild.

use std::path::Path;

use crate::env::DamageScenario;
use crate::error::{Error, Result};
use crate::functionality::System;
use crate::schema::SystemFile;

pub const FIXTURE_NAMES: [&str; 2] = ["mimo", "substation"];

const MIMO: &str = include_str!("../fixtures/mimo.json");
const SUBSTATION: &str = include_str!("../fixtures/substation.json");

/// Raw text of a built-in fixture or of a system file on disk.
pub fn fixture_text(name: &str) -> Result<String> {
    match name {
        "mimo" => Ok(MIMO.to_string()),
        "substation" => Ok(SUBSTATION.to_string()),
        other if Path::new(other).is_file() => Ok(std::fs::read_to_string(other)?),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

pub fn fixture_file(name: &str) -> Result<SystemFile> {
    let text = fixture_text(name)?;
    SystemFile::parse(&text).map_err(|e| Error::Fixture { name: name.into(), reason: e.to_string() })
}

/// Loads and validates a fixture.
pub fn load_fixture(name: &str) -> Result<System> {
    fixture_file(name)?
        .system()
        .map_err(|e| Error::Fixture { name: name.into(), reason: e.to_string() })
}

/// A loaded fixture together with its scenario catalog.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub file: SystemFile,
    pub system: System,
}

impl Fixture {
    pub fn load(name: &str) -> Result<Self> {
        let file = fixture_file(name)?;
        let system = file
            .system()
            .map_err(|e| Error::Fixture { name: name.into(), reason: e.to_string() })?;
        Ok(Self { file, system })
    }

    pub fn scenario_names(&self) -> Vec<&str> {
        self.file.scenarios.keys().map(String::as_str).collect()
    }

    pub fn scenario(&self, name: &str) -> Result<DamageScenario> {
        self.file.scenario(name)
    }
}
