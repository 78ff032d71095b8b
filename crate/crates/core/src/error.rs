use thiserror::Error;

use crate::hash_codec::CodecError;

/// Every way a protocol step can refuse to continue.
///
/// Each variant names the check that fired, so attack scenarios can assert
/// which one rejected a run.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuthError {
    #[error("malformed identity")]
    MalformedIdentity,
    #[error("password must be 1 to 64 bytes")]
    InvalidPassword,
    #[error("biometric sample does not match the card template")]
    BiometricMismatch,
    #[error("incorrect password")]
    WrongPassword,
    #[error("incorrect old password")]
    WrongOldPassword,
    #[error("identity failed the server format check")]
    Format,
    #[error("malformed wire message: {0}")]
    MalformedMessage(String),
    #[error("user authentication failed: M8 != M3")]
    AuthM8,
    #[error("user authentication failed: M5 mismatch")]
    AuthM5,
    #[error("login message is a replay")]
    Replay,
    #[error("server authentication failed: M11 mismatch")]
    ServerAuthM11,
    #[error("server authentication failed: M14 != M11")]
    ServerAuthM14,
    #[error("server authentication failed: M12 mismatch")]
    ServerAuthM12,
    #[error("no response arrived")]
    NoResponse,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl AuthError {
    /// Stable kebab-case code used in transcripts and CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            AuthError::MalformedIdentity => "malformed-identity",
            AuthError::InvalidPassword => "invalid-password",
            AuthError::BiometricMismatch => "biometric-mismatch",
            AuthError::WrongPassword => "wrong-password",
            AuthError::WrongOldPassword => "wrong-old-password",
            AuthError::Format => "format",
            AuthError::MalformedMessage(_) => "malformed-message",
            AuthError::AuthM8 => "auth-m8",
            AuthError::AuthM5 => "auth-m5",
            AuthError::Replay => "replay",
            AuthError::ServerAuthM11 => "server-auth-m11",
            AuthError::ServerAuthM14 => "server-auth-m14",
            AuthError::ServerAuthM12 => "server-auth-m12",
            AuthError::NoResponse => "no-response",
            AuthError::Codec(_) => "codec",
        }
    }
}
