//! Line protocol for agents outside the process.
//!
//! ```text
//! -> EVAL <base64 state bytes>
//! <- QVALUES <action>:<q> <action>:<q> ...
//! <- ERR <message>
//! ```
//!
//! One request line gets exactly one reply line. Action tokens contain no
//! whitespace; the value follows the last `:`.

use std::path::Path;
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use sarfa_core::{QOracle, QProfile};

use crate::config::OracleConfig;
use crate::process::LineProcess;
use crate::AgentError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    Eval(Vec<u8>),
}

impl Request {
    pub fn to_line(&self) -> String {
        match self {
            Request::Eval(bytes) => format!("EVAL {}", STANDARD.encode(bytes)),
        }
    }

    pub fn parse(line: &str) -> Result<Request, AgentError> {
        let bad = || AgentError::MalformedReply(line.to_owned());
        let payload = line.strip_prefix("EVAL ").ok_or_else(bad)?;
        STANDARD.decode(payload.trim_end()).map(Request::Eval).map_err(|_| bad())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    QValues(Vec<(String, f64)>),
    Error(String),
}

impl Reply {
    pub fn to_line(&self) -> String {
        match self {
            Reply::QValues(entries) => {
                let mut line = String::from("QVALUES");
                for (action, q) in entries {
                    line.push(' ');
                    line.push_str(action);
                    line.push(':');
                    line.push_str(&q.to_string());
                }
                line
            }
            Reply::Error(msg) if msg.is_empty() => "ERR".to_owned(),
            Reply::Error(msg) => format!("ERR {msg}"),
        }
    }

    /// Parses a reply; `QVALUES` must list at least one action, each once.
    pub fn parse(line: &str) -> Result<Reply, AgentError> {
        let bad = || AgentError::MalformedReply(line.to_owned());
        let line = line.trim_end_matches(['\r', '\n']);
        if let Some(rest) = line.strip_prefix("ERR") {
            if rest.is_empty() || rest.starts_with(' ') {
                return Ok(Reply::Error(rest.strip_prefix(' ').unwrap_or(rest).to_owned()));
            }
            return Err(bad());
        }
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("QVALUES") {
            return Err(bad());
        }
        let mut entries: Vec<(String, f64)> = Vec::new();
        for tok in tokens {
            let (action, value) = tok.rsplit_once(':').ok_or_else(bad)?;
            let q: f64 = value.parse().map_err(|_| bad())?;
            if action.is_empty() || !q.is_finite() || entries.iter().any(|(a, _)| a == action) {
                return Err(bad());
            }
            entries.push((action.to_owned(), q));
        }
        if entries.is_empty() {
            return Err(bad());
        }
        Ok(Reply::QValues(entries))
    }
}

pub struct ExternalSession {
    process: LineProcess,
    timeout: Duration,
}

impl ExternalSession {
    pub fn open(config: &OracleConfig) -> Result<Self, AgentError> {
        let path = config
            .executable_path
            .as_deref()
            .ok_or_else(|| AgentError::Config("external oracle needs an executable".into()))?;
        Ok(ExternalSession {
            process: LineProcess::spawn(Path::new(path), &config.args)?,
            timeout: Duration::from_millis(config.eval_timeout_ms),
        })
    }

    pub fn external_evaluate(&mut self, state: &[u8]) -> Result<QProfile, AgentError> {
        self.process.send(&Request::Eval(state.to_vec()).to_line())?;
        let line = self
            .process
            .recv(Instant::now() + self.timeout, self.timeout, "QVALUES reply")?;
        match Reply::parse(&line)? {
            Reply::QValues(entries) => QProfile::new(format!("blob:{}", state.len()), entries)
                .map_err(|_| AgentError::MalformedReply(line)),
            Reply::Error(msg) => Err(AgentError::Remote(msg)),
        }
    }
}

impl QOracle<[u8]> for ExternalSession {
    type Error = AgentError;

    fn evaluate(&mut self, state: &[u8]) -> Result<QProfile, AgentError> {
        self.external_evaluate(state)
    }
}

impl Drop for ExternalSession {
    fn drop(&mut self) {
        self.process.shutdown(None);
    }
}
