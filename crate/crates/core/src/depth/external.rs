//! Out-of-process scorer: a command that receives a sample's raster paths
//! and prints one number.

use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};

pub const DEFAULT_EXTERNAL_TIMEOUT: Duration = Duration::from_secs(60);

const EXTERNAL_SLOT: u8 = 9;
const POLL_INTERVAL: Duration = Duration::from_millis(5);

/// Invoked as `program args... ref_tex_1..k dist_tex_1..k [ref_depth_1..k dist_depth_1..k]`;
/// must exit 0 and print a single finite decimal on stdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalScorer {
    pub program: PathBuf,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
}

fn default_timeout_secs() -> f64 {
    DEFAULT_EXTERNAL_TIMEOUT.as_secs_f64()
}

impl ExternalScorer {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        ExternalScorer {
            program: program.into(),
            args: Vec::new(),
            timeout_secs: default_timeout_secs(),
        }
    }

    /// Parses a shell-free command line: whitespace-separated program and
    /// leading arguments.
    pub fn from_command_line(line: &str) -> Result<Self> {
        let mut parts = line.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::InvalidParameter("empty external scorer command".into()))?;
        Ok(ExternalScorer {
            program: program.into(),
            args: parts.map(str::to_string).collect(),
            timeout_secs: default_timeout_secs(),
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout_secs = timeout.as_secs_f64();
        self
    }

    /// Raw value printed by the command; every failure is reported as
    /// [`Error::ScorerUnavailable`].
    pub fn score(&self, sample: &Sample) -> Result<f64> {
        let unavailable = |reason: String| Error::ScorerUnavailable {
            scorer: EXTERNAL_SLOT,
            sample: sample.id.clone(),
            reason,
        };
        let paths = sample
            .paths()
            .ok_or_else(|| unavailable("sample has no file paths".into()))?;
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .args(paths.as_args())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| unavailable(format!("cannot start {}: {e}", self.program.display())))?;
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut buf = String::new();
            stdout.read_to_string(&mut buf).map(|_| buf)
        });
        let deadline = Instant::now() + Duration::from_secs_f64(self.timeout_secs.max(0.0));
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(unavailable(format!("timed out after {} s", self.timeout_secs)));
                }
                Ok(None) => std::thread::sleep(POLL_INTERVAL),
                Err(e) => return Err(unavailable(format!("wait failed: {e}"))),
            }
        };
        let output = reader
            .join()
            .map_err(|_| unavailable("stdout reader panicked".into()))?
            .map_err(|e| unavailable(format!("reading stdout: {e}")))?;
        if !status.success() {
            return Err(unavailable(format!("exited with {status}")));
        }
        let text = output.trim();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(unavailable(format!("unparseable output '{text}'"))),
        }
    }
}
