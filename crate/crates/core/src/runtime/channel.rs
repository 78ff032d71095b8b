//! A message channel under adversary control.
//!
//! Messages cross the channel as [`Frame`]s: a kind tag plus ordered, named
//! byte fields. The adversary acts on frames without knowing which scheme
//! produced them.

use std::collections::VecDeque;
use std::fmt;

use super::transcript::{Actor, EventKind, Transcript};
use crate::error::AuthError;
use crate::hash_codec::Digest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Login,
    Response,
}

impl FrameKind {
    pub fn name(self) -> &'static str {
        match self {
            FrameKind::Login => "login",
            FrameKind::Response => "response",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub fields: Vec<(String, Vec<u8>)>,
}

impl Frame {
    pub fn new(kind: FrameKind) -> Self {
        Frame {
            kind,
            fields: Vec::new(),
        }
    }

    pub fn with(mut self, name: &str, value: impl AsRef<[u8]>) -> Self {
        self.fields.push((name.to_owned(), value.as_ref().to_vec()));
        self
    }

    pub fn field(&self, name: &str) -> Option<&[u8]> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn field_mut(&mut self, name: &str) -> Option<&mut Vec<u8>> {
        self.fields
            .iter_mut()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    /// Field name and hex value pairs, for transcripts.
    pub fn hex_fields(&self) -> Vec<(String, String)> {
        self.fields
            .iter()
            .map(|(n, v)| (n.clone(), hex::encode(v)))
            .collect()
    }

    /// Checks the kind and that exactly `names` are present, in order.
    pub fn expect_fields(&self, kind: FrameKind, names: &[&str]) -> Result<(), AuthError> {
        if self.kind != kind {
            return Err(AuthError::MalformedMessage(format!(
                "expected {} frame, got {}",
                kind.name(),
                self.kind.name()
            )));
        }
        let got: Vec<&str> = self.fields.iter().map(|(n, _)| n.as_str()).collect();
        if got != names {
            return Err(AuthError::MalformedMessage(format!(
                "expected fields {names:?}, got {got:?}"
            )));
        }
        Ok(())
    }

    /// Reads a field as a digest of exactly `len` bytes.
    pub fn digest(&self, name: &str, len: usize) -> Result<Digest, AuthError> {
        let bytes = self
            .field(name)
            .ok_or_else(|| AuthError::MalformedMessage(format!("missing field {name}")))?;
        if bytes.len() != len {
            return Err(AuthError::MalformedMessage(format!(
                "field {name} is {} bytes, expected {len}",
                bytes.len()
            )));
        }
        Ok(Digest::from_bytes(bytes))
    }
}

/// Typed protocol messages that travel as frames.
pub trait WireMessage: Sized {
    const KIND: FrameKind;
    /// Field names, in wire order.
    const FIELDS: &'static [&'static str];

    fn to_frame(&self) -> Frame;

    fn from_frame(frame: &Frame, digest_len: usize) -> Result<Self, AuthError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdversaryPolicy {
    /// Deliver everything unmodified and in order.
    Passive,
    /// After the honest exchange, resend the `index`-th captured frame.
    Replay { index: usize },
    /// Flip `bit` (MSB-first) of `field` in the first frame carrying it.
    Tamper { field: String, bit: usize },
    /// Silently discard the `index`-th frame sent.
    Drop { index: usize },
    /// Deliver `frame` ahead of the first honest frame.
    Inject { frame: Frame },
}

impl fmt::Display for AdversaryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryPolicy::Passive => f.write_str("passive"),
            AdversaryPolicy::Replay { index } => write!(f, "replay({index})"),
            AdversaryPolicy::Tamper { field, bit } => write!(f, "tamper({field},{bit})"),
            AdversaryPolicy::Drop { index } => write!(f, "drop({index})"),
            AdversaryPolicy::Inject { frame } => write!(f, "inject({})", frame.kind.name()),
        }
    }
}

#[derive(Debug)]
pub struct AdversarialChannel {
    policy: AdversaryPolicy,
    queue: VecDeque<(Actor, Frame)>,
    captured: Vec<Frame>,
    honest_sent: usize,
    actions: usize,
    tampered: bool,
    injected: bool,
}

impl AdversarialChannel {
    pub fn new(policy: AdversaryPolicy) -> Self {
        AdversarialChannel {
            policy,
            queue: VecDeque::new(),
            captured: Vec::new(),
            honest_sent: 0,
            actions: 0,
            tampered: false,
            injected: false,
        }
    }

    pub fn passive() -> Self {
        Self::new(AdversaryPolicy::Passive)
    }

    pub fn policy(&self) -> &AdversaryPolicy {
        &self.policy
    }

    /// Frames handed to the channel by honest actors.
    pub fn messages_sent(&self) -> usize {
        self.honest_sent
    }

    pub fn adversary_actions(&self) -> usize {
        self.actions
    }

    pub fn captured(&self) -> &[Frame] {
        &self.captured
    }

    pub fn send(&mut self, from: Actor, frame: Frame, transcript: &mut Transcript) {
        let index = self.honest_sent;
        self.honest_sent += 1;
        transcript.record(from, EventKind::Send, frame.hex_fields(), frame.kind.name());
        self.captured.push(frame.clone());

        if let AdversaryPolicy::Inject { frame: forged } = &self.policy {
            if !self.injected {
                self.injected = true;
                self.actions += 1;
                transcript.record(
                    Actor::Adversary,
                    EventKind::AdversaryAction,
                    forged.hex_fields(),
                    "inject",
                );
                self.queue.push_back((Actor::Adversary, forged.clone()));
            }
        }

        match &self.policy {
            AdversaryPolicy::Drop { index: target } if *target == index => {
                self.actions += 1;
                transcript.record(
                    Actor::Adversary,
                    EventKind::AdversaryAction,
                    vec![],
                    &format!("drop:{index}"),
                );
            }
            AdversaryPolicy::Tamper { field, bit }
                if !self.tampered && frame.field(field).is_some() =>
            {
                let mut frame = frame;
                let target = frame.field_mut(field).expect("checked above");
                let bit = *bit;
                if bit < target.len() * 8 {
                    target[bit / 8] ^= 0x80 >> (bit % 8);
                }
                self.tampered = true;
                self.actions += 1;
                transcript.record(
                    Actor::Adversary,
                    EventKind::AdversaryAction,
                    vec![(field.clone(), hex::encode(frame.field(field).unwrap()))],
                    &format!("tamper:{field}:{bit}"),
                );
                self.queue.push_back((from, frame));
            }
            _ => self.queue.push_back((from, frame)),
        }
    }

    /// Takes the oldest queued frame of `kind`, the kind `to` accepts.
    pub fn recv(
        &mut self,
        to: Actor,
        kind: FrameKind,
        transcript: &mut Transcript,
    ) -> Option<Frame> {
        let pos = self.queue.iter().position(|(_, f)| f.kind == kind)?;
        let (_, frame) = self.queue.remove(pos)?;
        transcript.record(
            to,
            EventKind::Receive,
            frame.hex_fields(),
            frame.kind.name(),
        );
        Some(frame)
    }

    /// Lets a replaying adversary resend its captured frame. Returns whether
    /// anything was queued.
    pub fn adversary_turn(&mut self, transcript: &mut Transcript) -> bool {
        let AdversaryPolicy::Replay { index } = self.policy else {
            return false;
        };
        let Some(frame) = self.captured.get(index).cloned() else {
            return false;
        };
        self.actions += 1;
        transcript.record(
            Actor::Adversary,
            EventKind::AdversaryAction,
            frame.hex_fields(),
            &format!("replay:{index}"),
        );
        self.queue.push_back((Actor::Adversary, frame));
        true
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}
