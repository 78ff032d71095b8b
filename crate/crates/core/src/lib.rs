//! Biometric smart-card remote user authentication.
//!
//! Two hash-and-XOR schemes share one registration model:
//!
//! - [`baseline`]: the original scheme, kept with its flaws (no password
//!   check at login, no old-password check on password change);
//! - [`improved`]: the hardened scheme, which verifies the password on the
//!   card and adds `M_3` / `M_11` to the two wire messages.
//!
//! [`runtime`] wires both into actors that talk over an
//! [`AdversarialChannel`](runtime::AdversarialChannel), keeps the server's
//! replay database, and runs scripted attack scenarios that produce
//! deterministic transcripts. [`cli`] is the command-line front end.

pub mod baseline;
pub mod cli;
mod credentials;
pub mod error;
pub mod hash_codec;
pub mod improved;
pub mod runtime;
pub mod scheme;

pub use error::AuthError;
pub use hash_codec::{Digest, HashAlgorithm, HashConfig, Hasher, SeededRng};
pub use runtime::{Identity, RegistrationCenter, ServerState, SessionKey};
pub use scheme::{Scheme, SchemeKind};
