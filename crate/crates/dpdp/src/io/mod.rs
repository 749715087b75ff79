//! File formats: instance tables, interaction documents and run artefacts.

pub mod protocol;
pub mod tables;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use dpdp_core::{EventLog, SimEvent};

pub use protocol::{check_input_schema, check_schema, DispatchDocs, ProtocolError, SnapshotDocs, StopDoc};
pub use tables::{read_instance, read_network, write_instance, TableError};

/// One JSON event per line.
pub fn write_event_log(path: &Path, log: &EventLog) -> anyhow::Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    for e in log.iter() {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_event_log(path: &Path) -> anyhow::Result<EventLog> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut events = Vec::new();
    for (k, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: SimEvent = serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), k + 1))?;
        events.push(e);
    }
    Ok(EventLog { events })
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut body = serde_json::to_vec_pretty(value)?;
    body.push(b'\n');
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}
