//! The common shape of both authentication schemes, so scenarios can be
//! written once and run against either.

use std::fmt;
use std::str::FromStr;

use crate::error::AuthError;
use crate::hash_codec::{Digest, Hasher, SeededRng};
use crate::runtime::channel::WireMessage;
use crate::runtime::{Identity, RegistrationCenter, ServerState, SessionKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Baseline,
    Improved,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 2] = [SchemeKind::Baseline, SchemeKind::Improved];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Baseline => "baseline",
            SchemeKind::Improved => "improved",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(SchemeKind::Baseline),
            "improved" => Ok(SchemeKind::Improved),
            other => Err(format!(
                "unknown scheme `{other}` (expected baseline or improved)"
            )),
        }
    }
}

/// What the server keeps from one accepted login.
pub trait ServerSessionInfo {
    fn session_key(&self) -> &SessionKey;
    fn recovered_nonce(&self) -> &Digest;
}

pub trait Scheme {
    const KIND: SchemeKind;
    /// Checks the server runs on a login message, in order, paired with the
    /// error each one raises.
    const SERVER_CHECKS: &'static [(&'static str, AuthError)];
    /// Checks the client runs on the server's response, in order.
    const CLIENT_CHECKS: &'static [(&'static str, AuthError)];

    type Card: Clone + PartialEq + fmt::Debug;
    type Login: WireMessage + Clone + fmt::Debug;
    type Response: WireMessage + Clone + fmt::Debug;
    type ClientSession: fmt::Debug;
    type ServerSession: ServerSessionInfo + fmt::Debug;

    fn register(
        center: &RegistrationCenter,
        hasher: &Hasher,
        id: &Identity,
        password: &[u8],
        biometric: &[u8],
        rng: &mut SeededRng,
    ) -> Result<Self::Card, AuthError>;

    fn login(
        card: &Self::Card,
        hasher: &Hasher,
        biometric: &[u8],
        password: &[u8],
        id: &Identity,
        rng: &mut SeededRng,
    ) -> Result<(Self::Login, Self::ClientSession), AuthError>;

    fn authenticate(
        server: &mut ServerState,
        hasher: &Hasher,
        msg: &Self::Login,
        rng: &mut SeededRng,
    ) -> Result<(Self::Response, Self::ServerSession), AuthError>;

    fn verify_response(
        session: &Self::ClientSession,
        card: &Self::Card,
        hasher: &Hasher,
        resp: &Self::Response,
        server_id: &Identity,
    ) -> Result<SessionKey, AuthError>;

    fn change_password(
        card: &mut Self::Card,
        hasher: &Hasher,
        biometric: &[u8],
        old_password: &[u8],
        new_password: &[u8],
    ) -> Result<(), AuthError>;

    /// Bytes of per-user data held on the card.
    fn storage_bytes(card: &Self::Card) -> usize;
}
