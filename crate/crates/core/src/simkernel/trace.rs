//! Plain-text trace emission.
//!
//! One record per line, space-separated:
//!
//! ```text
//! <time> <TAG> <node> <pkt> <src> <dst> <mode> <x> <y> <extra>
//! ```
//!
//! Time and coordinates print with six decimals; fields a record does not
//! carry print as `-`. Records must arrive in nondecreasing time order, so
//! a trace file is byte-reproducible from the scenario and seed.

use std::fmt;
use std::io::Write;
use std::sync::{Arc, Mutex};

use crate::forwarding::GpsrMode;
use crate::neighbor::NodeId;

use super::event::SimTime;
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceTag {
    Send,
    Fwd,
    Recv,
    Drop,
    Beacon,
    Heard,
    Evict,
    EnterPerim,
    ExitPerim,
    Move,
}

impl TraceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceTag::Send => "SEND",
            TraceTag::Fwd => "FWD",
            TraceTag::Recv => "RECV",
            TraceTag::Drop => "DROP",
            TraceTag::Beacon => "BEACON",
            TraceTag::Heard => "HEARD",
            TraceTag::Evict => "EVICT",
            TraceTag::EnterPerim => "ENTER_PERIM",
            TraceTag::ExitPerim => "EXIT_PERIM",
            TraceTag::Move => "MOVE",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub time: SimTime,
    pub tag: TraceTag,
    pub node: NodeId,
    pub packet: Option<u64>,
    pub src: Option<NodeId>,
    pub dst: Option<NodeId>,
    pub mode: Option<GpsrMode>,
    pub x: f64,
    pub y: f64,
    pub extra: Option<String>,
}

impl TraceRecord {
    /// Bare record carrying only the acting node and its position; packet
    /// fields are filled in by the caller as needed.
    pub fn at(time: SimTime, tag: TraceTag, node: NodeId, x: f64, y: f64) -> Self {
        TraceRecord {
            time,
            tag,
            node,
            packet: None,
            src: None,
            dst: None,
            mode: None,
            x,
            y,
            extra: None,
        }
    }
}

struct OrDash<T>(Option<T>);

impl<T: fmt::Display> fmt::Display for OrDash<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "-"),
        }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = self.mode.map(|m| match m {
            GpsrMode::Greedy => "G",
            GpsrMode::Perimeter => "P",
        });
        write!(
            f,
            "{:.6} {} {} {} {} {} {} {:.6} {:.6} {}",
            self.time,
            self.tag.as_str(),
            self.node,
            OrDash(self.packet),
            OrDash(self.src),
            OrDash(self.dst),
            OrDash(mode),
            self.x,
            self.y,
            OrDash(self.extra.as_deref()),
        )
    }
}

/// Appends records to a sink, enforcing time order.
pub struct TraceWriter<W: Write> {
    sink: W,
    last_time: SimTime,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(sink: W) -> Self {
        TraceWriter {
            sink,
            last_time: 0.0,
        }
    }

    pub fn emit(&mut self, record: &TraceRecord) -> Result<(), SimError> {
        if record.time < self.last_time {
            return Err(SimError::TraceOrder {
                record_time: record.time,
                last_time: self.last_time,
            });
        }
        writeln!(self.sink, "{record}")?;
        self.last_time = record.time;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), SimError> {
        self.sink.flush()?;
        Ok(())
    }
}

/// In-memory trace sink; clones share the buffer, so the bytes stay
/// reachable after the run consumes the writer.
#[derive(Clone, Default)]
pub struct MemorySink(Arc<Mutex<Vec<u8>>>);

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contents(&self) -> Vec<u8> {
        self.0.lock().expect("sink lock").clone()
    }

    pub fn into_utf8(self) -> String {
        String::from_utf8(self.contents()).expect("trace is ascii")
    }
}

impl Write for MemorySink {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().expect("sink lock").extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}
