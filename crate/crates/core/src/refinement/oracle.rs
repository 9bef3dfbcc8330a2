//! Oracle wire protocol.
//!
//! Each request is one JSON object on one line:
//!
//! ```json
//! {"kind":"category","subject":"Q123","candidate":{...},"categories":[...]}
//! {"kind":"module","subject":"people","no_module_count":4,"properties":[...],"samples":[...],"modules":[...]}
//! {"kind":"refinement","subject":"schema","round":0,"r_c":0.6,"r_m":0.9,"categories":[...]}
//! ```
//!
//! and is answered by exactly one JSON line:
//!
//! ```json
//! {"verdict":"assign","category":"places","module":"nature","rationale":"..."}
//! {"verdict":"indicator","module":"sports","property":"P54","values":[],"rationale":"..."}
//! {"verdict":"module_edit","edits":[{"op":"create","category":"people","module":{...}}]}
//! {"verdict":"decline","rationale":"too generic"}
//! ```
//!
//! A scripted answer file holds response lines that also carry the `kind`
//! and `subject` they answer. Each scripted answer is used at most once.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::candidates::CandidateType;
use crate::error::{Error, Result};
use crate::ids::Pid;
use crate::ingest::SampleInstance;
use crate::schema::{ModuleEdit, ModuleKind, SchemaConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Category,
    Module,
    Refinement,
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RequestKind::Category => "category",
            RequestKind::Module => "module",
            RequestKind::Refinement => "refinement",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSummary {
    pub name: String,
    pub kind: ModuleKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub id: String,
    pub modules: Vec<ModuleSummary>,
}

pub fn summarize(schema: &SchemaConfig) -> Vec<CategorySummary> {
    schema
        .categories
        .iter()
        .map(|c| CategorySummary {
            id: c.id.clone(),
            modules: c
                .modules
                .iter()
                .map(|m| ModuleSummary { name: m.name.clone(), kind: m.kind })
                .collect(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCount {
    pub property: Pid,
    pub label: Option<String>,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RequestBody {
    /// Which category (and module) should gate this type?
    Category { candidate: CandidateType, categories: Vec<CategorySummary> },
    /// Which module should cover the no-module entities of a category?
    Module {
        no_module_count: u64,
        properties: Vec<PropertyCount>,
        samples: Vec<SampleInstance>,
        modules: Vec<ModuleSummary>,
    },
    /// Should modules be created, merged or split?
    Refinement { round: usize, r_c: f64, r_m: f64, categories: Vec<CategorySummary> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    /// Type id, category id, or `schema`.
    pub subject: String,
    #[serde(flatten)]
    pub body: RequestBody,
}

impl OracleRequest {
    pub fn kind(&self) -> RequestKind {
        match self.body {
            RequestBody::Category { .. } => RequestKind::Category,
            RequestBody::Module { .. } => RequestKind::Module,
            RequestBody::Refinement { .. } => RequestKind::Refinement,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Assign {
        category: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        module: Option<String>,
    },
    Indicator {
        /// Defaults to the request subject.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        category: Option<String>,
        module: String,
        property: String,
        #[serde(default)]
        values: Vec<String>,
    },
    ModuleEdit { edits: Vec<ModuleEdit> },
    Decline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResponse {
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(default)]
    pub rationale: String,
}

impl OracleResponse {
    pub fn decline(rationale: impl Into<String>) -> Self {
        OracleResponse { verdict: Verdict::Decline, rationale: rationale.into() }
    }
}

/// Why an oracle gave no usable answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleFailure {
    Timeout,
    Protocol(String),
    Unavailable(String),
}

impl fmt::Display for OracleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleFailure::Timeout => f.write_str("timeout"),
            OracleFailure::Protocol(m) => write!(f, "protocol violation: {m}"),
            OracleFailure::Unavailable(m) => write!(f, "unavailable: {m}"),
        }
    }
}

pub trait Oracle {
    fn consult(&mut self, request: &OracleRequest) -> Result<OracleResponse, OracleFailure>;

    /// Whether a human stands behind the answers.
    fn interactive(&self) -> bool {
        false
    }
}

pub fn parse_response(line: &str) -> Result<OracleResponse, OracleFailure> {
    serde_json::from_str(line.trim()).map_err(|e| OracleFailure::Protocol(e.to_string()))
}

#[derive(Deserialize)]
struct ScriptLine {
    kind: RequestKind,
    subject: String,
    #[serde(flatten)]
    response: OracleResponse,
}

/// Answers from a static file. Unanswered requests are declined.
#[derive(Clone, Debug, Default)]
pub struct ScriptedOracle {
    answers: HashMap<(RequestKind, String), Vec<OracleResponse>>,
}

impl ScriptedOracle {
    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let mut answers: HashMap<_, Vec<_>> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let s: ScriptLine = serde_json::from_str(line).map_err(|e| Error::Parse {
                file: "<oracle script>".into(),
                line: Some(i + 1),
                message: e.to_string(),
            })?;
            answers.entry((s.kind, s.subject)).or_default().push(s.response);
        }
        for v in answers.values_mut() {
            v.reverse();
        }
        Ok(ScriptedOracle { answers })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        Self::from_str(&text).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse { file: path.to_path_buf(), line, message },
            e => e,
        })
    }

    pub fn remaining(&self) -> usize {
        self.answers.values().map(Vec::len).sum()
    }
}

impl Oracle for ScriptedOracle {
    fn consult(&mut self, request: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        let key = (request.kind(), request.subject.clone());
        Ok(self
            .answers
            .get_mut(&key)
            .and_then(Vec::pop)
            .unwrap_or_else(|| OracleResponse::decline("no scripted answer")))
    }
}

/// An external process speaking the protocol over stdin/stdout, started
/// with `sh -c`. A process that times out is killed and restarted on the
/// next request.
pub struct ProcessOracle {
    command: String,
    timeout: Duration,
    running: Option<(Child, ChildStdin, Receiver<String>)>,
}

impl ProcessOracle {
    pub fn new(command: impl Into<String>, timeout: Duration) -> Self {
        ProcessOracle { command: command.into(), timeout, running: None }
    }

    fn start(&mut self) -> Result<(), OracleFailure> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| OracleFailure::Unavailable(e.to_string()))?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = child.stdout.take().expect("piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        self.running = Some((child, stdin, rx));
        Ok(())
    }

    fn stop(&mut self) {
        if let Some((mut child, stdin, _)) = self.running.take() {
            drop(stdin);
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl Drop for ProcessOracle {
    fn drop(&mut self) {
        self.stop();
    }
}

impl Oracle for ProcessOracle {
    fn consult(&mut self, request: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        if self.running.is_none() {
            self.start()?;
        }
        let line = serde_json::to_string(request).map_err(|e| OracleFailure::Protocol(e.to_string()))?;
        let (_, stdin, rx) = self.running.as_mut().expect("started");
        if writeln!(stdin, "{line}").and_then(|_| stdin.flush()).is_err() {
            self.stop();
            return Err(OracleFailure::Unavailable("oracle process closed its input".into()));
        }
        match rx.recv_timeout(self.timeout) {
            Ok(reply) => parse_response(&reply),
            Err(RecvTimeoutError::Timeout) => {
                self.stop();
                Err(OracleFailure::Timeout)
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.stop();
                Err(OracleFailure::Unavailable("oracle process exited".into()))
            }
        }
    }
}

/// A person at a console. Each request is printed as JSON; the reply is a
/// response JSON line, `decline`, or `assign <category> [module]`.
pub struct ConsoleOracle<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> ConsoleOracle<R, W> {
    pub fn new(input: R, output: W) -> Self {
        ConsoleOracle { input, output }
    }
}

impl<R: BufRead, W: Write> Oracle for ConsoleOracle<R, W> {
    fn consult(&mut self, request: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        let shown = serde_json::to_string_pretty(request).map_err(|e| OracleFailure::Protocol(e.to_string()))?;
        let io = |e: std::io::Error| OracleFailure::Unavailable(e.to_string());
        writeln!(self.output, "{shown}\n> ").map_err(io)?;
        self.output.flush().map_err(io)?;
        let mut line = String::new();
        if self.input.read_line(&mut line).map_err(io)? == 0 {
            return Err(OracleFailure::Unavailable("console closed".into()));
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["decline", ..] => Ok(OracleResponse::decline(words[1..].join(" "))),
            ["assign", category] => Ok(OracleResponse {
                verdict: Verdict::Assign { category: category.to_string(), module: None },
                rationale: String::new(),
            }),
            ["assign", category, module] => Ok(OracleResponse {
                verdict: Verdict::Assign { category: category.to_string(), module: Some(module.to_string()) },
                rationale: String::new(),
            }),
            _ => parse_response(&line),
        }
    }

    fn interactive(&self) -> bool {
        true
    }
}

/// Build an oracle from a CLI argument: `exec:<command>`, `interactive`, or a
/// path to a scripted answer file.
pub fn open_oracle(arg: &str, timeout: Duration) -> Result<Box<dyn Oracle>> {
    if let Some(cmd) = arg.strip_prefix("exec:") {
        return Ok(Box::new(ProcessOracle::new(cmd, timeout)));
    }
    if arg == "interactive" {
        let stdin = std::io::stdin();
        return Ok(Box::new(ConsoleOracle::new(BufReader::new(stdin), std::io::stderr())));
    }
    Ok(Box::new(ScriptedOracle::load(arg)?))
}
