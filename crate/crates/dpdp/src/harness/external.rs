//! Runs a dispatching algorithm as a separate process over the file
//! protocol.
//!
//! Every round the input documents are written to the interaction
//! directory, the algorithm is signalled, and the harness waits for a line
//! reading exactly `SUCCESS` on the algorithm's standard output. Token,
//! process exit and the per-round deadline race; whichever comes first
//! decides the round.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use dpdp_core::{DispatchPlan, DispatchPolicy, PlanningContext, PolicyError, Snapshot};

use crate::io::{check_schema, DispatchDocs, ProtocolError, SnapshotDocs};

pub const SUCCESS_TOKEN: &str = "SUCCESS";
/// Set for the child process to the interaction directory.
pub const INTERACTION_DIR_ENV: &str = "DPDP_INTERACTION_DIR";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProcessMode {
    /// A new process per round, like the original simulator.
    #[default]
    Fresh,
    /// One process for the whole run; each round is announced by writing a
    /// line with the epoch number to its standard input.
    Persistent,
}

#[derive(Clone, Debug)]
pub struct ExternalConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub dir: PathBuf,
    pub limit: Duration,
    pub mode: ProcessMode,
}

#[derive(Debug, thiserror::Error)]
pub enum RoundError {
    #[error("no {SUCCESS_TOKEN} within {0:?}")]
    Timeout(Duration),
    #[error("algorithm exited without {SUCCESS_TOKEN} ({0})")]
    Exited(String),
    #[error("cannot start algorithm: {0}")]
    Spawn(String),
    #[error(transparent)]
    Files(#[from] ProtocolError),
    #[error("interaction document failed its schema check: {0}")]
    Schema(String),
}

impl From<RoundError> for PolicyError {
    fn from(e: RoundError) -> Self {
        match e {
            RoundError::Timeout(_) => PolicyError::Timeout,
            other => PolicyError::Protocol(other.to_string()),
        }
    }
}

enum Signal {
    Token,
    Eof,
}

fn watch(stdout: impl std::io::Read + Send + 'static) -> Receiver<Signal> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let Ok(line) = line else { break };
            if line.trim_end_matches('\r') == SUCCESS_TOKEN && tx.send(Signal::Token).is_err() {
                return;
            }
        }
        let _ = tx.send(Signal::Eof);
    });
    rx
}

fn describe(status: std::io::Result<ExitStatus>) -> String {
    match status {
        Ok(s) => s.to_string(),
        Err(e) => e.to_string(),
    }
}

/// Kills the child and anything it started, which might otherwise hold our
/// inherited pipes open.
fn kill(child: &mut Child) {
    #[cfg(unix)]
    // SAFETY: plain syscall on the process group created at spawn.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
    let _ = child.wait();
}

struct Running {
    child: Child,
    stdin: Option<ChildStdin>,
    signals: Receiver<Signal>,
}

impl Running {
    fn spawn(config: &ExternalConfig) -> Result<Self, RoundError> {
        let (program, args) = config.command.split_first().ok_or_else(|| RoundError::Spawn("empty command".into()))?;
        let stdin = match config.mode {
            ProcessMode::Fresh => Stdio::null(),
            ProcessMode::Persistent => Stdio::piped(),
        };
        let mut command = Command::new(program);
        #[cfg(unix)]
        std::os::unix::process::CommandExt::process_group(&mut command, 0);
        let mut child = command
            .args(args)
            .env(INTERACTION_DIR_ENV, &config.dir)
            .stdin(stdin)
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| RoundError::Spawn(format!("{program}: {e}")))?;
        let stdout = child.stdout.take().expect("stdout is piped");
        let stdin = child.stdin.take();
        Ok(Running { child, stdin, signals: watch(stdout) })
    }

    fn await_token(&mut self, limit: Duration) -> Result<(), RoundError> {
        match self.signals.recv_timeout(limit) {
            Ok(Signal::Token) => Ok(()),
            Ok(Signal::Eof) | Err(RecvTimeoutError::Disconnected) => Err(RoundError::Exited(describe(self.child.wait()))),
            Err(RecvTimeoutError::Timeout) => {
                kill(&mut self.child);
                Err(RoundError::Timeout(limit))
            }
        }
    }

    /// Gives a process that already answered until `deadline` to exit.
    fn reap(mut self, deadline: Instant) {
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(2));
        }
        kill(&mut self.child);
    }
}

impl Drop for Running {
    fn drop(&mut self) {
        self.stdin.take();
        if let Ok(None) = self.child.try_wait() {
            let deadline = Instant::now() + Duration::from_millis(500);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = self.child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(2));
            }
            kill(&mut self.child);
        }
    }
}

/// A [`DispatchPolicy`] backed by an external program.
pub struct ExternalAlgorithm {
    config: ExternalConfig,
    persistent: Option<Running>,
    epoch: u64,
}

impl ExternalAlgorithm {
    pub fn new(config: ExternalConfig) -> Self {
        ExternalAlgorithm { config, persistent: None, epoch: 0 }
    }

    pub fn config(&self) -> &ExternalConfig {
        &self.config
    }

    /// One full round: inputs out, plan back.
    pub fn round(&mut self, ctx: &PlanningContext<'_>, snapshot: &Snapshot) -> Result<DispatchPlan, RoundError> {
        let dir = &self.config.dir;
        std::fs::create_dir_all(dir).map_err(|e| RoundError::Spawn(format!("{}: {e}", dir.display())))?;
        let docs = SnapshotDocs::from_snapshot(snapshot, ctx.network, ctx.config);
        for (file, value) in [
            (crate::io::protocol::VEHICLE_INFO, serde_json::to_value(&docs.vehicles)),
            (crate::io::protocol::UNALLOCATED_ITEMS, serde_json::to_value(&docs.unallocated)),
            (crate::io::protocol::ONGOING_ITEMS, serde_json::to_value(&docs.ongoing)),
        ] {
            let value = value.map_err(|e| RoundError::Schema(e.to_string()))?;
            check_schema(file, &value).map_err(RoundError::Schema)?;
        }
        DispatchDocs::clear(dir)?;
        docs.write(dir)?;

        let limit = self.config.limit;
        let deadline = Instant::now() + limit;
        match self.config.mode {
            ProcessMode::Fresh => {
                let mut run = Running::spawn(&self.config)?;
                run.await_token(limit)?;
                run.reap(deadline);
            }
            ProcessMode::Persistent => {
                if self.persistent.is_none() {
                    self.persistent = Some(Running::spawn(&self.config)?);
                }
                let run = self.persistent.as_mut().expect("just started");
                let announce = run.stdin.as_mut().map(|s| writeln!(s, "{}", self.epoch).and_then(|()| s.flush()));
                if let Some(Err(e)) = announce {
                    self.persistent = None;
                    return Err(RoundError::Exited(format!("stdin closed: {e}")));
                }
                if let Err(e) = run.await_token(limit) {
                    self.persistent = None;
                    return Err(e);
                }
            }
        }
        self.epoch += 1;
        Ok(DispatchDocs::read(dir)?.to_plan(snapshot, ctx.network, ctx.config)?)
    }
}

impl DispatchPolicy for ExternalAlgorithm {
    fn dispatch(&mut self, ctx: &PlanningContext<'_>, snapshot: &Snapshot) -> Result<DispatchPlan, PolicyError> {
        Ok(self.round(ctx, snapshot)?)
    }
}
