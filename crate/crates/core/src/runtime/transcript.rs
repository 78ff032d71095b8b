//! Ordered event log for a scenario run.
//!
//! Structured records are one line per event, tab separated, in a fixed
//! column order:
//!
//! ```text
//! <step>\t<actor>\t<kind>\t<name=hex,...|->\t<verdict|->
//! ```
//!
//! Field pairs are sorted by name.

use std::fmt::{self, Write as _};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Actor {
    RegistrationCenter,
    Client,
    Server,
    Adversary,
    Harness,
}

impl Actor {
    pub fn name(self) -> &'static str {
        match self {
            Actor::RegistrationCenter => "registration-center",
            Actor::Client => "client",
            Actor::Server => "server",
            Actor::Adversary => "adversary",
            Actor::Harness => "harness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Send,
    Receive,
    Verify,
    Reject,
    Accept,
    AdversaryAction,
    KeyDerived,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Send => "send",
            EventKind::Receive => "receive",
            EventKind::Verify => "verify",
            EventKind::Reject => "reject",
            EventKind::Accept => "accept",
            EventKind::AdversaryAction => "adversary-action",
            EventKind::KeyDerived => "key-derived",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub step: usize,
    pub actor: Actor,
    pub kind: EventKind,
    /// `(name, lowercase hex)`, sorted by name.
    pub fields: Vec<(String, String)>,
    pub verdict: Option<String>,
}

impl Event {
    pub fn to_record(&self) -> String {
        let fields = if self.fields.is_empty() {
            "-".to_owned()
        } else {
            self.fields
                .iter()
                .map(|(n, v)| format!("{n}={v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.step,
            self.actor.name(),
            self.kind.name(),
            fields,
            self.verdict.as_deref().unwrap_or("-")
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(
        &mut self,
        actor: Actor,
        kind: EventKind,
        mut fields: Vec<(String, String)>,
        verdict: &str,
    ) {
        fields.sort();
        self.events.push(Event {
            step: self.events.len(),
            actor,
            kind,
            fields,
            verdict: (!verdict.is_empty()).then(|| verdict.to_owned()),
        });
    }

    pub fn verify(&mut self, actor: Actor, check: &str, ok: bool) {
        let verdict = format!("{check}:{}", if ok { "ok" } else { "fail" });
        self.record(actor, EventKind::Verify, vec![], &verdict);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn last(&self) -> Option<&Event> {
        self.events.last()
    }

    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_record());
            out.push('\n');
        }
        out
    }

    /// Human-oriented rendering; fields go on indented lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(
                out,
                "[{:03}] {:<20} {:<17} {}",
                e.step,
                e.actor.name(),
                e.kind.name(),
                e.verdict.as_deref().unwrap_or("")
            );
            for (n, v) in &e.fields {
                let _ = writeln!(out, "        {n:<10} {v}");
            }
        }
        out
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_records())
    }
}
