//! Run records and the on-disk run directory.
//!
//! A run directory holds `run.json` plus one file per artifact. Each artifact
//! belongs to a stage; once a stage is marked complete its artifacts are
//! sealed and later stages may only add new files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::topic::Topic;
use crate::CoreError;

pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Storm,
    StormNoPerspective,
    StormNoConversation,
    StormNoOutline,
    DirectGen,
    Rag,
    Orag,
    RagExpand,
}

impl RunMode {
    pub const ALL: [RunMode; 8] = [
        RunMode::Storm,
        RunMode::StormNoPerspective,
        RunMode::StormNoConversation,
        RunMode::StormNoOutline,
        RunMode::DirectGen,
        RunMode::Rag,
        RunMode::Orag,
        RunMode::RagExpand,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Storm => "storm",
            RunMode::StormNoPerspective => "storm_no_perspective",
            RunMode::StormNoConversation => "storm_no_conversation",
            RunMode::StormNoOutline => "storm_no_outline",
            RunMode::DirectGen => "direct_gen",
            RunMode::Rag => "rag",
            RunMode::Orag => "orag",
            RunMode::RagExpand => "rag_expand",
        }
    }

    /// Modes that run the perspective-guided research stage.
    pub fn is_storm_family(self) -> bool {
        matches!(
            self,
            RunMode::Storm | RunMode::StormNoPerspective | RunMode::StormNoConversation | RunMode::StormNoOutline
        )
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RunMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Prewriting,
    Writing,
    Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub mode: RunMode,
    pub topic: Topic,
    pub created_at: DateTime<Utc>,
    config: serde_json::Value,
    #[serde(default)]
    pub completed_stages: Vec<Stage>,
    /// Artifact file name to the stage that produced it.
    #[serde(default)]
    pub artifacts: BTreeMap<String, Stage>,
}

impl RunRecord {
    pub fn new(run_id: impl Into<String>, mode: RunMode, topic: Topic, config: serde_json::Value, now: DateTime<Utc>) -> Self {
        RunRecord {
            run_id: run_id.into(),
            mode,
            topic,
            created_at: now,
            config,
            completed_stages: Vec::new(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> &serde_json::Value {
        &self.config
    }

    pub fn is_complete(&self, stage: Stage) -> bool {
        self.completed_stages.contains(&stage)
    }
}

/// `<UTC timestamp>-<topic slug>`, sortable by creation time.
pub fn make_run_id(now: DateTime<Utc>, topic: &Topic) -> String {
    format!("{}-{}", now.format("%Y%m%dT%H%M%SZ"), topic.slug())
}

#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    record: RunRecord,
}

impl RunDir {
    /// Creates `base/<run_id>` or reopens it if it already exists with the
    /// same config snapshot.
    pub fn create(base: &Path, record: RunRecord) -> Result<Self, CoreError> {
        let root = base.join(&record.run_id);
        if root.join(RUN_FILE).exists() {
            let existing = Self::open(&root)?;
            if existing.record.config != record.config || existing.record.mode != record.mode {
                return Err(CoreError::ConfigChanged);
            }
            return Ok(existing);
        }
        fs::create_dir_all(&root).map_err(|e| CoreError::io(&root, e))?;
        let dir = RunDir { root, record };
        dir.save()?;
        Ok(dir)
    }

    pub fn open(root: &Path) -> Result<Self, CoreError> {
        let path = root.join(RUN_FILE);
        if !path.exists() {
            return Err(CoreError::MissingArtifact(path.display().to_string()));
        }
        let record = read_json_file(&path)?;
        Ok(RunDir { root: root.to_path_buf(), record })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn path_of(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn has_artifact(&self, name: &str) -> bool {
        self.record.artifacts.contains_key(name) && self.path_of(name).exists()
    }

    pub fn write_artifact(&mut self, name: &str, stage: Stage, bytes: &[u8]) -> Result<PathBuf, CoreError> {
        if let Some(&owner) = self.record.artifacts.get(name) {
            if self.record.is_complete(owner) {
                return Err(CoreError::StageSealed { name: name.into(), stage: owner });
            }
        }
        if self.record.is_complete(stage) {
            return Err(CoreError::StageSealed { name: name.into(), stage });
        }
        let path = self.path_of(name);
        write_atomic(&path, bytes)?;
        self.record.artifacts.insert(name.to_string(), stage);
        self.save()?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, stage: Stage, value: &T) -> Result<PathBuf, CoreError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CoreError::Json { path: self.path_of(name), source: e })?;
        bytes.push(b'\n');
        self.write_artifact(name, stage, &bytes)
    }

    pub fn read_text(&self, name: &str) -> Result<String, CoreError> {
        let path = self.path_of(name);
        if !path.exists() {
            return Err(CoreError::MissingArtifact(name.into()));
        }
        fs::read_to_string(&path).map_err(|e| CoreError::io(path, e))
    }

    pub fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<T, CoreError> {
        let path = self.path_of(name);
        if !path.exists() {
            return Err(CoreError::MissingArtifact(name.into()));
        }
        read_json_file(&path)
    }

    pub fn complete_stage(&mut self, stage: Stage) -> Result<(), CoreError> {
        if !self.record.is_complete(stage) {
            self.record.completed_stages.push(stage);
            self.save()?;
        }
        Ok(())
    }

    fn save(&self) -> Result<(), CoreError> {
        let path = self.root.join(RUN_FILE);
        let mut bytes = serde_json::to_vec_pretty(&self.record).map_err(|e| CoreError::Json { path: path.clone(), source: e })?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)
    }
}

pub fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T, CoreError> {
    let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CoreError::Json { path: path.to_path_buf(), source: e })
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CoreError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CoreError::io(parent, e))?;
    }
    let tmp = path.with_extension("tmp~");
    fs::write(&tmp, bytes).map_err(|e| CoreError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CoreError::io(path, e))
}
