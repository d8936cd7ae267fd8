use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use crate::AgentError;

/// A child process spoken to in newline-delimited text. Stdout is drained by
/// a reader thread so that reads can time out.
pub(crate) struct LineProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl LineProcess {
    pub(crate) fn spawn(program: &Path, args: &[String]) -> Result<Self, AgentError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| AgentError::Spawn {
                path: program.display().to_string(),
                source,
            })?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(LineProcess { child, stdin, lines })
    }

    pub(crate) fn send(&mut self, line: &str) -> Result<(), AgentError> {
        log::trace!("> {line}");
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(AgentError::BrokenPipe)
    }

    /// Next line before `deadline`.
    pub(crate) fn recv(
        &mut self,
        deadline: Instant,
        timeout: Duration,
        waiting_for: &'static str,
    ) -> Result<String, AgentError> {
        let remaining = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(remaining) {
            Ok(line) => {
                log::trace!("< {line}");
                Ok(line)
            }
            Err(RecvTimeoutError::Timeout) => Err(AgentError::Timeout(timeout, waiting_for)),
            Err(RecvTimeoutError::Disconnected) => Err(AgentError::Crashed),
        }
    }

    /// Reads lines until one satisfies `done`, which is returned.
    pub(crate) fn recv_until(
        &mut self,
        timeout: Duration,
        waiting_for: &'static str,
        mut done: impl FnMut(&str) -> bool,
    ) -> Result<String, AgentError> {
        let deadline = Instant::now() + timeout;
        loop {
            let line = self.recv(deadline, timeout, waiting_for)?;
            if done(&line) {
                return Ok(line);
            }
        }
    }

    pub(crate) fn shutdown(&mut self, farewell: Option<&str>) {
        if let Some(line) = farewell {
            let _ = self.send(line);
            let deadline = Instant::now() + Duration::from_millis(200);
            while Instant::now() < deadline {
                if matches!(self.child.try_wait(), Ok(Some(_))) {
                    return;
                }
                thread::sleep(Duration::from_millis(5));
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
