//! Actors, the adversarial channel, the replay database and scenario runs.

use std::fmt;

use crate::error::AuthError;
use crate::hash_codec::{Digest, Hasher, SeededRng};

pub mod channel;
pub mod cost;
pub mod replay_db;
pub mod scenario;
pub mod transcript;

pub use channel::{AdversarialChannel, AdversaryPolicy, Frame, FrameKind};
pub use cost::PhaseCosts;
pub use replay_db::{Freshness, ReplayDb, SnapshotError};
pub use scenario::{
    expected_verdict, run_scenario, ExchangeStage, ExpectedVerdict, Outcome, ScenarioError,
    ScenarioId, ScenarioResult, SchemeKind, SessionKeys, UserInputs, Verdict,
};
pub use transcript::{Actor, Event, EventKind, Transcript};

pub const MAX_ID_LEN: usize = 64;
pub const MAX_PASSWORD_LEN: usize = 64;

/// A user or server identity as raw bytes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identity(Vec<u8>);

impl Identity {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Identity(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl AsRef<[u8]> for Identity {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl From<&str> for Identity {
    fn from(s: &str) -> Self {
        Identity(s.as_bytes().to_vec())
    }
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Identity({:?})", String::from_utf8_lossy(&self.0))
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.0))
    }
}

/// 1 to 64 bytes of printable 7-bit characters, no whitespace.
pub fn check_id_format(id: &[u8]) -> bool {
    (1..=MAX_ID_LEN).contains(&id.len()) && id.iter().all(|b| b.is_ascii_graphic())
}

pub(crate) fn check_password(pw: &[u8]) -> Result<(), AuthError> {
    if (1..=MAX_PASSWORD_LEN).contains(&pw.len()) {
        Ok(())
    } else {
        Err(AuthError::InvalidPassword)
    }
}

/// The registration center's long-term secrets `{X_s, y}`. Nothing per user.
#[derive(Clone)]
pub struct RegistrationCenter {
    master_key: Digest,
    shared_secret: Digest,
}

impl RegistrationCenter {
    pub fn new(master_key: Digest, shared_secret: Digest) -> Self {
        RegistrationCenter {
            master_key,
            shared_secret,
        }
    }

    pub fn generate(hasher: &Hasher, rng: &mut SeededRng) -> Self {
        let master_key = hasher.random_digest(rng);
        let shared_secret = hasher.random_digest(rng);
        RegistrationCenter {
            master_key,
            shared_secret,
        }
    }

    /// `X_s`.
    pub fn master_key(&self) -> &Digest {
        &self.master_key
    }

    /// `y`.
    pub fn shared_secret(&self) -> &Digest {
        &self.shared_secret
    }
}

impl fmt::Debug for RegistrationCenter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RegistrationCenter { .. }")
    }
}

/// Server long-term state plus its replay database.
#[derive(Clone)]
pub struct ServerState {
    master_key: Digest,
    shared_secret: Digest,
    identity: Identity,
    pub replay_db: ReplayDb,
}

impl ServerState {
    pub fn new(center: &RegistrationCenter, identity: Identity) -> Self {
        ServerState {
            master_key: center.master_key.clone(),
            shared_secret: center.shared_secret.clone(),
            identity,
            replay_db: ReplayDb::default(),
        }
    }

    pub fn master_key(&self) -> &Digest {
        &self.master_key
    }

    pub fn shared_secret(&self) -> &Digest {
        &self.shared_secret
    }

    /// `SID_i`.
    pub fn identity(&self) -> &Identity {
        &self.identity
    }
}

impl fmt::Debug for ServerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ServerState")
            .field("identity", &self.identity)
            .field("replay_db_entries", &self.replay_db.len())
            .finish_non_exhaustive()
    }
}

/// A session key agreed at the end of mutual authentication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionKey(pub Digest);

impl SessionKey {
    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_format() {
        assert!(check_id_format(b"alice01"));
        assert!(!check_id_format(b""));
        assert!(!check_id_format(&[b'a'; 65]));
        assert!(check_id_format(&[b'a'; 64]));
        assert!(!check_id_format(b"al ice"));
        assert!(!check_id_format(b"alice\t"));
        assert!(!check_id_format(&[b'a', 0x80]));
        assert!(!check_id_format(&[b'a', 0x7f]));
    }

    #[test]
    fn password_bounds() {
        assert_eq!(check_password(b""), Err(AuthError::InvalidPassword));
        assert!(check_password(&[0u8; 64]).is_ok());
        assert_eq!(check_password(&[0u8; 65]), Err(AuthError::InvalidPassword));
    }

    #[test]
    fn debug_hides_secrets() {
        let h = Hasher::new(Default::default());
        let rc = RegistrationCenter::generate(&h, &mut SeededRng::new(3));
        let server = ServerState::new(&rc, "srv".into());
        let hexkey = rc.master_key().to_hex();
        assert!(!format!("{rc:?}").contains(&hexkey));
        assert!(!format!("{server:?}").contains(&hexkey));
    }
}
