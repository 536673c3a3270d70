use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Orientation;
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Discovery,
    Catch,
    Arrival,
    Meeting,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Discovery => "discovery",
            EventKind::Catch => "catch",
            EventKind::Arrival => "arrival",
            EventKind::Meeting => "meeting",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One protocol event.
///
/// Participants are robot indexes in cycle order (0-based). Their order is
/// meaningful: `(left, right)` for discoveries, `(catcher, caught)` for
/// catches and `(arriver, waiter)` for meetings. Positions are the
/// contact positions at the event time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event<T> {
    pub time: T,
    pub kind: EventKind,
    pub robot_a: usize,
    pub robot_b: Option<usize>,
    /// 0-based boundary index; `n - 1` is the pinned boundary at `L`.
    pub boundary: usize,
    pub position_a: T,
    pub position_b: Option<T>,
}

impl<T: Copy> Event<T> {
    pub fn participants(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.robot_a).chain(self.robot_b)
    }

    pub fn involves(&self, robot: usize) -> bool {
        self.robot_a == robot || self.robot_b == Some(robot)
    }
}

/// Full boundary and traversing-time vectors right after an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<T> {
    pub y: Vec<Option<T>>,
    pub e: Vec<Option<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord<T> {
    pub event: Event<T>,
    /// Value of the event's boundary after the event.
    pub y_value: Option<T>,
    pub e_a: Option<T>,
    pub e_b: Option<T>,
    pub snapshot: Option<Snapshot<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata<T> {
    pub robot_ids: Vec<u32>,
    /// Orientations at the start of the run.
    #[serde(default)]
    pub initial_orientations: Vec<Orientation>,
    pub length: T,
    pub t_star: T,
    pub convergence_rtol: f64,
    pub converged_at: Option<T>,
}

/// Append-only, time-ordered event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace<T> {
    pub metadata: TraceMetadata<T>,
    pub records: Vec<TraceRecord<T>>,
}

pub const CSV_HEADER: &str = "time,kind,robot_a,robot_b,boundary_index,y_value,e_a,e_b";

fn cell<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| format!("{x:.9}")).unwrap_or_default()
}

impl<T: Scalar> Trace<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event<T>> + '_ {
        self.records.iter().map(|r| &r.event)
    }

    pub fn meetings(&self) -> impl Iterator<Item = &Event<T>> + '_ {
        self.events().filter(|e| e.kind == EventKind::Meeting)
    }

    /// Writes the trace as CSV. Robot columns hold robot ids, the boundary
    /// index is 1-based and unknown values are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let ids = &self.metadata.robot_ids;
        for rec in &self.records {
            let ev = &rec.event;
            writeln!(
                out,
                "{:.9},{},{},{},{},{},{},{}",
                ev.time,
                ev.kind,
                ids[ev.robot_a],
                ev.robot_b.map(|b| ids[b].to_string()).unwrap_or_default(),
                ev.boundary + 1,
                cell(rec.y_value),
                cell(rec.e_a),
                cell(rec.e_b),
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}
