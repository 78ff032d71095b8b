//! Scripted protocol runs through the adversarial channel.
//!
//! A run is a pure function of `(scheme, scenario, seed, hash config)`.
//! Each actor draws from its own ChaCha stream of the seed, so adding a draw
//! in one actor never shifts another actor's values.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::channel::{AdversarialChannel, AdversaryPolicy, FrameKind, WireMessage};
use super::transcript::{Actor, EventKind, Transcript};
use super::{Identity, RegistrationCenter, ServerState, SessionKey};
use crate::baseline::Baseline;
use crate::error::AuthError;
use crate::hash_codec::{HashConfig, Hasher, SeededRng};
use crate::improved::{Improved, ImprovedCard};
use crate::scheme::{Scheme, ServerSessionInfo};

pub use crate::scheme::SchemeKind;

const STREAM_INPUTS: u64 = 0;
const STREAM_CENTER: u64 = 1;
const STREAM_CLIENT: u64 = 2;
const STREAM_SERVER: u64 = 3;
const STREAM_ADVERSARY: u64 = 4;

const SERVER_ID: &str = "auth-server-01";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    Honest,
    WrongPassword,
    WrongPasswordChange,
    CorrectPasswordChange,
    Replay,
    Tamper,
    StolenCard,
    HashCount,
    DoubleLogin,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 9] = [
        ScenarioId::Honest,
        ScenarioId::WrongPassword,
        ScenarioId::WrongPasswordChange,
        ScenarioId::CorrectPasswordChange,
        ScenarioId::Replay,
        ScenarioId::Tamper,
        ScenarioId::StolenCard,
        ScenarioId::HashCount,
        ScenarioId::DoubleLogin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Honest => "honest",
            ScenarioId::WrongPassword => "wrong-password",
            ScenarioId::WrongPasswordChange => "wrong-password-change",
            ScenarioId::CorrectPasswordChange => "correct-password-change",
            ScenarioId::Replay => "replay",
            ScenarioId::Tamper => "tamper",
            ScenarioId::StolenCard => "stolen-card",
            ScenarioId::HashCount => "hash-count",
            ScenarioId::DoubleLogin => "double-login",
        }
    }

    /// Scenarios on which the two schemes are meant to disagree.
    pub fn schemes_diverge(self) -> bool {
        matches!(
            self,
            ScenarioId::WrongPassword | ScenarioId::WrongPasswordChange
        )
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| ScenarioError::UnknownScenario(s.to_owned()))
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("scenario setup failed: {0}")]
    Setup(AuthError),
}

/// Where in the exchange a rejection happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExchangeStage {
    /// On the user's card, before anything is sent.
    Card,
    /// At the server, on the login message.
    Server,
    /// At the client, on the server's response.
    Client,
}

impl ExchangeStage {
    pub fn name(self) -> &'static str {
        match self {
            ExchangeStage::Card => "card",
            ExchangeStage::Server => "server",
            ExchangeStage::Client => "client",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject {
        stage: ExchangeStage,
        reason: AuthError,
    },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn reason(&self) -> Option<&AuthError> {
        match self {
            Verdict::Accept => None,
            Verdict::Reject { reason, .. } => Some(reason),
        }
    }

    pub fn outcome(&self) -> Outcome {
        match self {
            Verdict::Accept => Outcome::Accept,
            Verdict::Reject {
                stage: ExchangeStage::Card,
                ..
            } => Outcome::LocalReject,
            Verdict::Reject { .. } => Outcome::RemoteReject,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => f.write_str("accept"),
            Verdict::Reject { stage, reason } => {
                write!(f, "reject:{}:{}", stage.name(), reason.code())
            }
        }
    }
}

/// Coarse verdict class used to compare the two schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Accept,
    /// Refused on the card; nothing reached the network.
    LocalReject,
    /// Refused after a message crossed the channel.
    RemoteReject,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Accept => "accept",
            Outcome::LocalReject => "local-reject",
            Outcome::RemoteReject => "remote-reject",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionKeys {
    pub client: SessionKey,
    pub server: SessionKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioResult {
    pub scheme: SchemeKind,
    pub scenario: ScenarioId,
    pub seed: u64,
    pub verdict: Verdict,
    /// Frames put on the channel by the client and server.
    pub messages_sent: usize,
    pub adversary_actions: usize,
    /// Hash invocations during login and authentication only.
    pub client_hashes: u64,
    pub server_hashes: u64,
    /// Present iff the verdict is accept.
    pub session_keys: Option<SessionKeys>,
    pub logins_accepted: usize,
    pub logins_rejected: usize,
    /// Whether a password change modified the card.
    pub card_changed: Option<bool>,
    /// Whether `e_i ⊕ r_i` read off a stolen card equals `h(ID_i ‖ X_s)`.
    pub extraction_matches: Option<bool>,
    /// Bytes of per-user data on the card.
    pub card_bytes: usize,
}

impl ScenarioResult {
    /// True when the run reproduced the documented outcome for its scheme
    /// and scenario.
    pub fn matches_expected(&self) -> bool {
        expected_verdict(self.scheme, self.scenario).admits(&self.verdict)
            && match (self.scenario, self.scheme) {
                (ScenarioId::WrongPasswordChange, SchemeKind::Baseline) => {
                    self.card_changed == Some(true)
                }
                (ScenarioId::WrongPasswordChange, SchemeKind::Improved) => {
                    self.card_changed == Some(false)
                }
                (ScenarioId::CorrectPasswordChange, _) => self.card_changed == Some(true),
                (ScenarioId::StolenCard, SchemeKind::Improved) => {
                    self.extraction_matches == Some(true)
                }
                (ScenarioId::DoubleLogin, _) => self.logins_accepted == 2,
                (ScenarioId::Replay, _) => self.logins_accepted == 1,
                _ => true,
            }
            && self
                .session_keys
                .as_ref()
                .is_none_or(|k| k.client == k.server)
    }
}

/// The verdict a scenario should end with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpectedVerdict {
    Accept,
    Reject {
        stage: ExchangeStage,
        reason: AuthError,
    },
    /// Any rejection after a message crossed the channel.
    AnyRemoteReject,
}

impl ExpectedVerdict {
    pub fn admits(&self, verdict: &Verdict) -> bool {
        match self {
            ExpectedVerdict::Accept => verdict.is_accept(),
            ExpectedVerdict::Reject { stage, reason } => {
                *verdict
                    == Verdict::Reject {
                        stage: *stage,
                        reason: reason.clone(),
                    }
            }
            ExpectedVerdict::AnyRemoteReject => verdict.outcome() == Outcome::RemoteReject,
        }
    }
}

impl fmt::Display for ExpectedVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpectedVerdict::Accept => f.write_str("accept"),
            ExpectedVerdict::Reject { stage, reason } => {
                write!(f, "reject:{}:{}", stage.name(), reason.code())
            }
            ExpectedVerdict::AnyRemoteReject => f.write_str("reject:<server|client>:*"),
        }
    }
}

pub fn expected_verdict(scheme: SchemeKind, scenario: ScenarioId) -> ExpectedVerdict {
    use ExchangeStage::*;
    match (scenario, scheme) {
        (ScenarioId::Honest | ScenarioId::HashCount | ScenarioId::CorrectPasswordChange, _) => {
            ExpectedVerdict::Accept
        }
        (ScenarioId::WrongPassword, SchemeKind::Baseline) => ExpectedVerdict::Reject {
            stage: Server,
            reason: AuthError::AuthM5,
        },
        (ScenarioId::WrongPassword, SchemeKind::Improved) => ExpectedVerdict::Reject {
            stage: Card,
            reason: AuthError::WrongPassword,
        },
        (ScenarioId::WrongPasswordChange, SchemeKind::Baseline) => ExpectedVerdict::Reject {
            stage: Server,
            reason: AuthError::AuthM5,
        },
        (ScenarioId::WrongPasswordChange, SchemeKind::Improved) => ExpectedVerdict::Accept,
        (ScenarioId::Replay | ScenarioId::DoubleLogin, _) => ExpectedVerdict::Reject {
            stage: Server,
            reason: AuthError::Replay,
        },
        (ScenarioId::Tamper, _) => ExpectedVerdict::AnyRemoteReject,
        (ScenarioId::StolenCard, _) => ExpectedVerdict::Reject {
            stage: Card,
            reason: AuthError::BiometricMismatch,
        },
    }
}

/// Random but well-formed user inputs for one run.
#[derive(Debug, Clone)]
pub struct UserInputs {
    pub id: Identity,
    pub password: Vec<u8>,
    pub biometric: Vec<u8>,
}

impl UserInputs {
    pub fn generate(rng: &mut SeededRng) -> Self {
        const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_-.";
        let id_len = 3 + rng.below(14) as usize;
        let mut id = b"u".to_vec();
        id.extend((0..id_len).map(|_| ALPHABET[rng.below(ALPHABET.len() as u64) as usize]));
        let pw_len = 1 + rng.below(32) as usize;
        UserInputs {
            id: Identity::new(id),
            password: rng.bytes(pw_len),
            biometric: rng.bytes(64),
        }
    }

    /// A password guaranteed to differ from the real one.
    pub fn wrong_password(&self) -> Vec<u8> {
        let mut pw = self.password.clone();
        pw[0] ^= 0x01;
        pw
    }

    pub fn new_password(&self) -> Vec<u8> {
        let mut pw = self.password.clone();
        pw.push(b'!');
        if pw.len() > super::MAX_PASSWORD_LEN {
            pw.remove(0);
            pw[0] ^= 0x02;
        }
        pw
    }
}

pub fn run_scenario(
    scheme: SchemeKind,
    scenario: ScenarioId,
    seed: u64,
    hash: HashConfig,
) -> Result<(Transcript, ScenarioResult), ScenarioError> {
    match scheme {
        SchemeKind::Baseline => Run::<Baseline>::new(scenario, seed, hash)?.execute(),
        SchemeKind::Improved => Run::<Improved>::new(scenario, seed, hash)?.execute(),
    }
}

struct Attempt {
    verdict: Verdict,
    keys: Option<SessionKeys>,
}

struct Run<S: Scheme> {
    scenario: ScenarioId,
    seed: u64,
    transcript: Transcript,
    channel: AdversarialChannel,
    client_hasher: Hasher,
    server_hasher: Hasher,
    /// Registration, password changes and harness checks.
    offline_hasher: Hasher,
    client_rng: SeededRng,
    server_rng: SeededRng,
    adversary_rng: SeededRng,
    center: RegistrationCenter,
    server: ServerState,
    inputs: UserInputs,
    card: S::Card,
    logins_accepted: usize,
    logins_rejected: usize,
    card_changed: Option<bool>,
    extraction_matches: Option<bool>,
}

impl<S: Scheme> Run<S>
where
    S::Card: StolenCard,
{
    fn new(scenario: ScenarioId, seed: u64, hash: HashConfig) -> Result<Self, ScenarioError> {
        let offline_hasher = Hasher::new(hash);
        let mut inputs_rng = SeededRng::with_stream(seed, STREAM_INPUTS);
        let mut center_rng = SeededRng::with_stream(seed, STREAM_CENTER);
        let mut adversary_rng = SeededRng::with_stream(seed, STREAM_ADVERSARY);

        let inputs = UserInputs::generate(&mut inputs_rng);
        let center = RegistrationCenter::generate(&offline_hasher, &mut center_rng);
        let server = ServerState::new(&center, Identity::from(SERVER_ID));
        let card = S::register(
            &center,
            &offline_hasher,
            &inputs.id,
            &inputs.password,
            &inputs.biometric,
            &mut center_rng,
        )
        .map_err(ScenarioError::Setup)?;

        let policy = match scenario {
            ScenarioId::Replay => AdversaryPolicy::Replay { index: 0 },
            ScenarioId::DoubleLogin => AdversaryPolicy::Replay { index: 2 },
            ScenarioId::Tamper => {
                let (field, bit) =
                    pick_tamper_target::<S>(&inputs.id, hash.digest_len(), &mut adversary_rng);
                AdversaryPolicy::Tamper { field, bit }
            }
            _ => AdversaryPolicy::Passive,
        };

        let mut transcript = Transcript::new();
        transcript.record(
            Actor::RegistrationCenter,
            EventKind::Verify,
            vec![("ID".into(), hex::encode(inputs.id.as_bytes()))],
            "registered",
        );

        Ok(Run {
            scenario,
            seed,
            transcript,
            channel: AdversarialChannel::new(policy),
            client_hasher: Hasher::new(hash),
            server_hasher: Hasher::new(hash),
            offline_hasher,
            client_rng: SeededRng::with_stream(seed, STREAM_CLIENT),
            server_rng: SeededRng::with_stream(seed, STREAM_SERVER),
            adversary_rng,
            center,
            server,
            inputs,
            card,
            logins_accepted: 0,
            logins_rejected: 0,
            card_changed: None,
            extraction_matches: None,
        })
    }

    fn execute(mut self) -> Result<(Transcript, ScenarioResult), ScenarioError> {
        let password = self.inputs.password.clone();
        let final_attempt = match self.scenario {
            ScenarioId::Honest => self.attempt(&password),
            ScenarioId::HashCount => {
                let attempt = self.attempt(&password);
                let counts = format!(
                    "hash-count:client={}:server={}",
                    self.client_hasher.count(),
                    self.server_hasher.count()
                );
                self.transcript
                    .record(Actor::Harness, EventKind::Verify, vec![], &counts);
                attempt
            }
            ScenarioId::WrongPassword => {
                let wrong = self.inputs.wrong_password();
                self.attempt(&wrong)
            }
            ScenarioId::WrongPasswordChange => {
                let wrong = self.inputs.wrong_password();
                let new = self.inputs.new_password();
                let applied = self.change_password(&wrong, &new);
                if applied {
                    // the card now answers to neither password
                    self.attempt(&password);
                    self.attempt(&new)
                } else {
                    self.attempt(&password)
                }
            }
            ScenarioId::CorrectPasswordChange => {
                let new = self.inputs.new_password();
                self.change_password(&password, &new);
                self.attempt(&new)
            }
            ScenarioId::Replay | ScenarioId::DoubleLogin => {
                let mut last = self.attempt(&password);
                if self.scenario == ScenarioId::DoubleLogin {
                    let first_entry = self.server.replay_db.get(&self.inputs.id).cloned();
                    last = self.attempt(&password);
                    let second_entry = self.server.replay_db.get(&self.inputs.id).cloned();
                    let replaced = first_entry.is_some()
                        && second_entry.is_some()
                        && first_entry != second_entry;
                    self.transcript
                        .verify(Actor::Harness, "replay-db-entry-replaced", replaced);
                }
                if self.channel.adversary_turn(&mut self.transcript) {
                    match self.serve() {
                        Some(Err(reason)) => {
                            last = Attempt {
                                verdict: Verdict::Reject {
                                    stage: ExchangeStage::Server,
                                    reason,
                                },
                                keys: None,
                            }
                        }
                        Some(Ok(server_key)) => {
                            // the server took the replay
                            let client = last
                                .keys
                                .map(|k| k.client)
                                .unwrap_or_else(|| server_key.clone());
                            last = Attempt {
                                verdict: Verdict::Accept,
                                keys: Some(SessionKeys {
                                    client,
                                    server: server_key,
                                }),
                            }
                        }
                        None => {}
                    }
                }
                last
            }
            ScenarioId::Tamper => self.attempt(&password),
            ScenarioId::StolenCard => self.stolen_card(),
        };
        Ok(self.finish(final_attempt))
    }

    fn finish(mut self, attempt: Attempt) -> (Transcript, ScenarioResult) {
        match (&attempt.verdict, &attempt.keys) {
            (Verdict::Accept, Some(keys)) => self.transcript.record(
                Actor::Harness,
                EventKind::Accept,
                vec![
                    ("client_SK".into(), keys.client.to_hex()),
                    ("server_SK".into(), keys.server.to_hex()),
                ],
                "accept",
            ),
            (verdict, _) => self.transcript.record(
                Actor::Harness,
                EventKind::Reject,
                vec![],
                &verdict.to_string(),
            ),
        }
        let session_keys = if attempt.verdict.is_accept() {
            attempt.keys
        } else {
            None
        };
        let result = ScenarioResult {
            scheme: S::KIND,
            scenario: self.scenario,
            seed: self.seed,
            verdict: attempt.verdict,
            messages_sent: self.channel.messages_sent(),
            adversary_actions: self.channel.adversary_actions(),
            client_hashes: self.client_hasher.count(),
            server_hashes: self.server_hasher.count(),
            session_keys,
            logins_accepted: self.logins_accepted,
            logins_rejected: self.logins_rejected,
            card_changed: self.card_changed,
            extraction_matches: self.extraction_matches,
            card_bytes: S::storage_bytes(&self.card),
        };
        (self.transcript, result)
    }

    /// Returns whether the card was modified.
    fn change_password(&mut self, old: &[u8], new: &[u8]) -> bool {
        let before = self.card.clone();
        let result = S::change_password(
            &mut self.card,
            &self.offline_hasher,
            &self.inputs.biometric,
            old,
            new,
        );
        let changed = self.card != before;
        let verdict = match &result {
            Ok(()) => "password-change:applied".to_owned(),
            Err(e) => format!("password-change:rejected:{}", e.code()),
        };
        self.transcript
            .record(Actor::Client, EventKind::Verify, vec![], &verdict);
        self.card_changed = Some(changed);
        changed
    }

    fn stolen_card(&mut self) -> Attempt {
        match self.card.extract_identity_key() {
            Some(extracted) => {
                self.transcript.record(
                    Actor::Adversary,
                    EventKind::AdversaryAction,
                    vec![("extracted".into(), extracted.to_hex())],
                    "read-card",
                );
                let truth = self
                    .offline_hasher
                    .hash(&[self.inputs.id.as_ref(), self.center.master_key().as_ref()])
                    .expect("small inputs always frame");
                let matches = extracted == truth;
                self.transcript
                    .verify(Actor::Harness, "extracted==h(ID||Xs)", matches);
                self.extraction_matches = Some(matches);
            }
            None => {
                self.transcript.record(
                    Actor::Adversary,
                    EventKind::AdversaryAction,
                    vec![],
                    "read-card:no-verifier",
                );
            }
        }
        let fake_biometric = self.adversary_rng.bytes(64);
        let guess = self.adversary_rng.bytes(8);
        let before = self.card.clone();
        let change = S::change_password(
            &mut self.card,
            &self.offline_hasher,
            &fake_biometric,
            &guess,
            b"attacker",
        );
        let verdict = match change {
            Ok(()) => "password-change:applied".to_owned(),
            Err(e) => format!("password-change:rejected:{}", e.code()),
        };
        self.transcript.record(
            Actor::Adversary,
            EventKind::AdversaryAction,
            vec![],
            &verdict,
        );
        self.card_changed = Some(self.card != before);
        self.attempt_with(&guess, &fake_biometric)
    }

    fn attempt(&mut self, password: &[u8]) -> Attempt {
        let biometric = self.inputs.biometric.clone();
        self.attempt_with(password, &biometric)
    }

    /// One login plus authentication through the channel.
    fn attempt_with(&mut self, password: &[u8], biometric: &[u8]) -> Attempt {
        let login = S::login(
            &self.card,
            &self.client_hasher,
            biometric,
            password,
            &self.inputs.id,
            &mut self.client_rng,
        );
        let (msg, session) = match login {
            Ok(pair) => pair,
            Err(reason) => {
                let verdict = Verdict::Reject {
                    stage: ExchangeStage::Card,
                    reason,
                };
                self.transcript.record(
                    Actor::Client,
                    EventKind::Reject,
                    vec![],
                    &verdict.to_string(),
                );
                self.logins_rejected += 1;
                return Attempt {
                    verdict,
                    keys: None,
                };
            }
        };
        self.channel
            .send(Actor::Client, msg.to_frame(), &mut self.transcript);

        let mut server_key = None;
        let mut server_reject = None;
        while let Some(result) = self.serve() {
            match result {
                Ok(key) => server_key = Some(key),
                Err(reason) => server_reject = Some(reason),
            }
        }

        let digest_len = self.client_hasher.digest_len();
        let Some(frame) =
            self.channel
                .recv(Actor::Client, FrameKind::Response, &mut self.transcript)
        else {
            let verdict = match server_reject {
                Some(reason) => Verdict::Reject {
                    stage: ExchangeStage::Server,
                    reason,
                },
                None => {
                    let verdict = Verdict::Reject {
                        stage: ExchangeStage::Client,
                        reason: AuthError::NoResponse,
                    };
                    self.transcript.record(
                        Actor::Client,
                        EventKind::Reject,
                        vec![],
                        &verdict.to_string(),
                    );
                    verdict
                }
            };
            self.logins_rejected += 1;
            return Attempt {
                verdict,
                keys: None,
            };
        };

        let checked = S::Response::from_frame(&frame, digest_len).and_then(|resp| {
            S::verify_response(
                &session,
                &self.card,
                &self.client_hasher,
                &resp,
                self.server.identity(),
            )
        });
        match checked {
            Ok(client_key) => {
                self.log_checks(Actor::Client, S::CLIENT_CHECKS, None);
                self.transcript.record(
                    Actor::Client,
                    EventKind::KeyDerived,
                    vec![("SK".into(), client_key.to_hex())],
                    "",
                );
                self.transcript.record(
                    Actor::Client,
                    EventKind::Accept,
                    vec![],
                    "server-authenticated",
                );
                self.logins_accepted += 1;
                let server = server_key.unwrap_or_else(|| client_key.clone());
                Attempt {
                    verdict: Verdict::Accept,
                    keys: Some(SessionKeys {
                        client: client_key,
                        server,
                    }),
                }
            }
            Err(reason) => {
                self.log_checks(Actor::Client, S::CLIENT_CHECKS, Some(&reason));
                let verdict = Verdict::Reject {
                    stage: ExchangeStage::Client,
                    reason,
                };
                self.transcript.record(
                    Actor::Client,
                    EventKind::Reject,
                    vec![],
                    &verdict.to_string(),
                );
                self.logins_rejected += 1;
                Attempt {
                    verdict,
                    keys: None,
                }
            }
        }
    }

    /// Lets the server handle one queued login frame, if any.
    fn serve(&mut self) -> Option<Result<SessionKey, AuthError>> {
        let frame = self
            .channel
            .recv(Actor::Server, FrameKind::Login, &mut self.transcript)?;
        let digest_len = self.server_hasher.digest_len();
        let result = S::Login::from_frame(&frame, digest_len).and_then(|msg| {
            S::authenticate(
                &mut self.server,
                &self.server_hasher,
                &msg,
                &mut self.server_rng,
            )
        });
        Some(match result {
            Ok((resp, session)) => {
                self.transcript.verify(Actor::Server, "ID-format", true);
                self.log_checks(Actor::Server, S::SERVER_CHECKS, None);
                self.transcript
                    .verify(Actor::Server, "replay-db-fresh", true);
                let key = session.session_key().clone();
                self.transcript.record(
                    Actor::Server,
                    EventKind::KeyDerived,
                    vec![("SK".into(), key.to_hex())],
                    "",
                );
                self.channel
                    .send(Actor::Server, resp.to_frame(), &mut self.transcript);
                Ok(key)
            }
            Err(reason) => {
                match &reason {
                    AuthError::Format => self.transcript.verify(Actor::Server, "ID-format", false),
                    AuthError::MalformedMessage(_) => {}
                    other => {
                        self.transcript.verify(Actor::Server, "ID-format", true);
                        self.log_checks(Actor::Server, S::SERVER_CHECKS, Some(other));
                        if *other == AuthError::Replay {
                            self.transcript
                                .verify(Actor::Server, "replay-db-fresh", false);
                        }
                    }
                }
                let verdict = Verdict::Reject {
                    stage: ExchangeStage::Server,
                    reason: reason.clone(),
                };
                self.transcript.record(
                    Actor::Server,
                    EventKind::Reject,
                    vec![],
                    &verdict.to_string(),
                );
                Err(reason)
            }
        })
    }

    /// Logs checks in order up to and including the failing one.
    fn log_checks(
        &mut self,
        actor: Actor,
        checks: &[(&str, AuthError)],
        failed: Option<&AuthError>,
    ) {
        for (name, err) in checks {
            let ok = failed != Some(err);
            self.transcript.verify(actor, name, ok);
            if !ok {
                break;
            }
        }
    }
}

/// Card types an attacker can read `h(ID_i ‖ X_s)` off.
pub trait StolenCard {
    fn extract_identity_key(&self) -> Option<crate::hash_codec::Digest>;
}

impl StolenCard for crate::baseline::BaselineCard {
    fn extract_identity_key(&self) -> Option<crate::hash_codec::Digest> {
        None
    }
}

impl StolenCard for ImprovedCard {
    fn extract_identity_key(&self) -> Option<crate::hash_codec::Digest> {
        Some(ImprovedCard::extract_identity_key(self))
    }
}

/// Chooses a field uniformly over both wire messages, then a bit in it.
fn pick_tamper_target<S: Scheme>(
    id: &Identity,
    digest_len: usize,
    rng: &mut SeededRng,
) -> (String, usize) {
    let fields: Vec<&str> = S::Login::FIELDS
        .iter()
        .chain(S::Response::FIELDS)
        .copied()
        .collect();
    let field = fields[rng.below(fields.len() as u64) as usize];
    let len = if field == "ID" {
        id.as_bytes().len()
    } else {
        digest_len
    };
    let bit = rng.below((len * 8) as u64) as usize;
    (field.to_owned(), bit)
}
