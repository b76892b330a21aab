//! Experience records and their JSONL stream.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explore::ExplorationTrace;
use crate::planner::PlanEpisode;

#[derive(Debug, Error)]
pub enum ExperienceError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum Experience {
    Plan(Box<PlanEpisode>),
    Explore(Box<ExplorationTrace>),
}

/// One line of the experience stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperienceRecord {
    pub id: String,
    #[serde(flatten)]
    pub experience: Experience,
    pub seed: u64,
    pub catalog_version: String,
}

impl ExperienceRecord {
    pub fn plan(id: impl Into<String>, episode: PlanEpisode, seed: u64) -> Self {
        let catalog_version = episode.initial_state.catalog().version_tag();
        ExperienceRecord { id: id.into(), experience: Experience::Plan(Box::new(episode)), seed, catalog_version }
    }

    pub fn explore(id: impl Into<String>, trace: ExplorationTrace, seed: u64) -> Self {
        let catalog_version = trace.initial_state.catalog().version_tag();
        ExperienceRecord { id: id.into(), experience: Experience::Explore(Box::new(trace)), seed, catalog_version }
    }

    pub fn as_plan(&self) -> Option<&PlanEpisode> {
        match &self.experience {
            Experience::Plan(p) => Some(p),
            Experience::Explore(_) => None,
        }
    }

    pub fn as_explore(&self) -> Option<&ExplorationTrace> {
        match &self.experience {
            Experience::Explore(t) => Some(t),
            Experience::Plan(_) => None,
        }
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), ExperienceError> {
    let io = |source| ExperienceError::Io { path: path.display().to_string(), source };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        out.write_all(line.as_bytes()).map_err(io)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ExperienceError> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|source| ExperienceError::Io { path: name.clone(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| ExperienceError::Io { path: name.clone(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| ExperienceError::Parse {
            path: name.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::explore::{explore, PolicyBias};
    use crate::goals::builtin_activities;
    use crate::planner::{plan, PlannerConfig};
    use crate::world::{sample_scene, Catalog, SceneSize};

    #[test]
    fn jsonl_round_trip() {
        let c = Arc::new(Catalog::builtin());
        let act = &builtin_activities(&c)[0];
        let s = sample_scene(&c, 1, SceneSize::Medium);
        let ep = plan(&s, act, &PlannerConfig::default()).unwrap();
        let tr = explore(&s, 2, 12, &PolicyBias::default(), 5).unwrap();
        let recs = vec![ExperienceRecord::plan("plan-0", ep, 1), ExperienceRecord::explore("explore-0", tr, 5)];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.jsonl");
        write_jsonl(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["kind"], "plan");
        assert_eq!(first["catalog_version"], "homeworld-household/1");
        assert!(first["payload"]["steps"].is_array());
        let back: Vec<ExperienceRecord> = read_jsonl(&path).unwrap();
        let dir2 = dir.path().join("again.jsonl");
        write_jsonl(&dir2, &back).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&dir2).unwrap());
        assert!(back[0].as_plan().is_some() && back[1].as_explore().is_some());
    }

    #[test]
    fn parse_error_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "\n{\"kind\": \"plan\"}\n").unwrap();
        match read_jsonl::<ExperienceRecord>(&path) {
            Err(ExperienceError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
