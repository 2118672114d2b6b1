//! Append-only JSON-lines record log.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::ServiceResult;
use crate::session::TranscriptTurn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireRecord {
    pub session_id: String,
    pub policy: String,
    pub success: bool,
    pub ask_if_nec: u8,
    pub overall: u8,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    pub turns: usize,
    pub transcript: Vec<TranscriptTurn>,
}

/// Single writer over the log file. Each record is one line, flushed on write.
#[derive(Debug)]
pub struct RecordLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl RecordLog {
    pub fn open(path: impl AsRef<Path>) -> ServiceResult<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &QuestionnaireRecord) -> ServiceResult<()> {
        let mut line = serde_json::to_string(record).map_err(std::io::Error::from)?;
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|p| p.into_inner());
        file.write_all(line.as_bytes())?;
        file.flush()?;
        Ok(())
    }

    /// Reads every well-formed record; malformed lines are skipped with a warning.
    pub fn read_all(&self) -> ServiceResult<Vec<QuestionnaireRecord>> {
        let reader = BufReader::new(File::open(&self.path)?);
        let mut out = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(&line) {
                Ok(r) => out.push(r),
                Err(e) => log::warn!("{}:{}: skipping record: {e}", self.path.display(), n + 1),
            }
        }
        Ok(out)
    }
}
