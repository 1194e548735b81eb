//! Append-only JSONL log of provider calls.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, LineWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use platoon_cache_core::policy::PromptBundle;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const OUTCOME_OK: &str = "ok";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub round: u32,
    pub seed: u64,
    pub attempt: u32,
    pub prompt_digest: String,
    pub request: Value,
    pub response: Option<String>,
    pub latency_ms: u64,
    pub outcome: String,
}

/// The chat-completions body sent for one prompt: the role text as the
/// system message, task and data as the user message. Credentials travel
/// in headers and never appear here.
pub fn chat_request(model: &str, temperature: f64, prompt: &PromptBundle) -> Value {
    json!({
        "model": model,
        "temperature": temperature,
        "messages": [
            {"role": "system", "content": prompt.role_text},
            {"role": "user", "content": format!("{}\n\n{}", prompt.task_text, prompt.info_text)},
        ],
    })
}

pub struct TranscriptLog {
    path: PathBuf,
    out: Mutex<LineWriter<File>>,
}

impl TranscriptLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { path: path.to_owned(), out: Mutex::new(LineWriter::new(file)) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, entry: &TranscriptEntry) -> io::Result<()> {
        let line = serde_json::to_string(entry)?;
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        writeln!(out, "{line}")
    }
}

pub fn read_transcript(path: &Path) -> io::Result<Vec<TranscriptEntry>> {
    let file = File::open(path)?;
    let mut entries = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), n + 1)))?;
        entries.push(entry);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let log = TranscriptLog::open(&dir.path().join("t/transcript.jsonl")).unwrap();
        let entry = TranscriptEntry {
            round: 2,
            seed: 9,
            attempt: 0,
            prompt_digest: "ab".into(),
            request: json!({"model": "m"}),
            response: Some("[1, 2]".into()),
            latency_ms: 3,
            outcome: OUTCOME_OK.into(),
        };
        log.append(&entry).unwrap();
        log.append(&entry).unwrap();
        assert_eq!(read_transcript(log.path()).unwrap(), vec![entry.clone(), entry]);
    }
}
