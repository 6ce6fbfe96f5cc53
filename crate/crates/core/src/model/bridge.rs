//! Line protocol to a policy living in another process.
//!
//! On startup the process prints `HELLO <inputs> <outputs>`. Each request is
//! one line of space-separated decimal floats (the normalized state); each
//! response is one line of `outputs` floats in `[-1, 1]`. All lines end in LF.
//!
//! The command string is split on whitespace into program and arguments; no
//! shell is involved.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::{check_input, ActionVector, Concurrency, ModelError, PolicyModel};
use crate::scan::ModelState;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone)]
pub struct BridgeConfig {
    pub command: String,
    pub input_len: usize,
    pub output_len: usize,
    pub timeout: Duration,
}

impl BridgeConfig {
    pub fn new(command: impl Into<String>, input_len: usize, output_len: usize) -> Self {
        Self { command: command.into(), input_len, output_len, timeout: DEFAULT_TIMEOUT }
    }
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    broken: bool,
}

impl Process {
    fn recv(&mut self, timeout: Duration) -> Result<String, ModelError> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(ModelError::Io(e)),
            Err(RecvTimeoutError::Timeout) => Err(ModelError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(ModelError::Exited),
        }
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Policy backed by an external process. Calls are serialized.
pub struct ExternalPolicy {
    config: BridgeConfig,
    process: Mutex<Process>,
}

impl std::fmt::Debug for ExternalPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalPolicy").field("config", &self.config).finish_non_exhaustive()
    }
}

fn parse_hello(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    if parts.next()? != "HELLO" {
        return None;
    }
    let inputs = parts.next()?.parse().ok()?;
    let outputs = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some((inputs, outputs))
}

fn parse_action(line: &str, expected: usize) -> Result<Vec<f64>, ModelError> {
    let malformed = |reason: String| ModelError::Malformed { line: line.to_string(), reason };
    let values = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| malformed(format!("`{t}` is not a number"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(malformed(format!("expected {expected} values, found {}", values.len())));
    }
    if let Some(v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
        return Err(malformed(format!("value {v} outside [-1, 1]")));
    }
    Ok(values)
}

impl ExternalPolicy {
    /// Starts the process and completes the handshake.
    pub fn spawn(config: BridgeConfig) -> Result<Self, ModelError> {
        let mut words = config.command.split_whitespace();
        let program = words.next().ok_or_else(|| ModelError::Spawn {
            command: config.command.clone(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty command"),
        })?;
        let mut child = Command::new(program)
            .args(words)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ModelError::Spawn { command: config.command.clone(), source })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut process = Process { child, stdin, lines, broken: false };
        let hello = match process.recv(config.timeout) {
            Ok(line) => line,
            Err(e) => {
                process.kill();
                return Err(ModelError::Handshake(format!("no HELLO line: {e}")));
            }
        };
        match parse_hello(&hello) {
            Some((i, o)) if i == config.input_len && o == config.output_len => {}
            Some((i, o)) => {
                process.kill();
                return Err(ModelError::Handshake(format!(
                    "process declares {i} inputs / {o} outputs, expected {} / {}",
                    config.input_len, config.output_len
                )));
            }
            None => {
                process.kill();
                return Err(ModelError::Handshake(format!("expected `HELLO <inputs> <outputs>`, got {hello:?}")));
            }
        }
        Ok(Self { config, process: Mutex::new(process) })
    }

    pub fn config(&self) -> &BridgeConfig {
        &self.config
    }

    fn exchange(&self, process: &mut Process, state: &ModelState) -> Result<Vec<f64>, ModelError> {
        let mut line = String::with_capacity(state.len() * 20);
        for (i, v) in state.values().iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        process.stdin.write_all(line.as_bytes()).and_then(|_| process.stdin.flush()).map_err(|e| {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                ModelError::Exited
            } else {
                ModelError::Io(e)
            }
        })?;
        let reply = process.recv(self.config.timeout)?;
        parse_action(&reply, self.config.output_len)
    }
}

impl PolicyModel for ExternalPolicy {
    fn input_len(&self) -> usize {
        self.config.input_len
    }

    fn output_len(&self) -> usize {
        self.config.output_len
    }

    fn act(&self, state: &ModelState) -> Result<ActionVector, ModelError> {
        check_input(self.config.input_len, state)?;
        let mut process = self.process.lock().unwrap_or_else(|p| p.into_inner());
        if process.broken {
            return Err(ModelError::Exited);
        }
        match self.exchange(&mut process, state) {
            Ok(values) => ActionVector::new(values),
            Err(e) => {
                // the stream is out of step after any failure; do not reuse it
                process.broken = true;
                process.kill();
                Err(e)
            }
        }
    }

    fn concurrency(&self) -> Concurrency {
        Concurrency::Serialized
    }

    fn describe(&self) -> String {
        format!("exec:{}", self.config.command)
    }
}

impl Drop for ExternalPolicy {
    fn drop(&mut self) {
        let process = self.process.get_mut().unwrap_or_else(|p| p.into_inner());
        process.kill();
    }
}
