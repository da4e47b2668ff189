//! Append-only JSON-lines event log per session, replayed on start.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use chute_core::{parse_instance, ReferencePoint};

use crate::session::{NavigationRecord, RunSettings, Session};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Event {
    Created {
        session: Uuid,
        /// The instance document, so that a log is self-contained.
        instance: serde_json::Value,
        y_star: ReferencePoint,
        defaults: RunSettings,
        created_at: f64,
    },
    /// Carries the shell delta of the run in `delta_lower`/`delta_upper`.
    Navigated { record: Box<NavigationRecord> },
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path} line {line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Appends one event and syncs it to disk.
pub fn append(path: &Path, event: &Event) -> Result<(), StoreError> {
    let mut line = serde_json::to_string(event).expect("event serializes");
    line.push('\n');
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    file.write_all(line.as_bytes()).map_err(io_err(path))?;
    file.sync_data().map_err(io_err(path))
}

/// Rebuilds a session from its log. A torn final line is cut off so that
/// later appends start on a fresh line; damage anywhere else is an error.
pub fn replay(path: &Path) -> Result<Session, StoreError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let corrupt = |line: usize, message: String| StoreError::Corrupt {
        path: path.display().to_string(),
        line,
        message,
    };
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut session: Option<Session> = None;
    for (i, line) in lines.iter().enumerate() {
        let event: Event = match serde_json::from_str(line) {
            Ok(e) => e,
            Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => {
                let keep = text.rfind('\n').map_or(0, |p| p + 1) as u64;
                OpenOptions::new()
                    .write(true)
                    .open(path)
                    .and_then(|f| f.set_len(keep))
                    .map_err(io_err(path))?;
                break;
            }
            Err(e) => return Err(corrupt(i + 1, e.to_string())),
        };
        match (event, session.as_mut()) {
            (
                Event::Created {
                    session: id,
                    instance,
                    y_star,
                    defaults,
                    created_at,
                },
                None,
            ) => {
                let inst = parse_instance(&instance.to_string()).map_err(|e| corrupt(i + 1, e.to_string()))?;
                session = Some(Session::new(id, Arc::new(inst), y_star, defaults, created_at));
            }
            (Event::Navigated { record }, Some(s)) => {
                s.apply(*record).map_err(|e| corrupt(i + 1, e.to_string()))?;
            }
            (Event::Created { .. }, Some(_)) => return Err(corrupt(i + 1, "second created event".into())),
            (Event::Navigated { .. }, None) => return Err(corrupt(i + 1, "navigation before creation".into())),
        }
    }
    session.ok_or_else(|| corrupt(0, "empty log".into()))
}
