//! The hardened scheme.
//!
//! Differences from [`crate::baseline`]:
//! - the card stores `r_i` and refuses a wrong password before anything is
//!   sent;
//! - the login carries `M_3` and the server checks `M_8 = M_3` before `M_5`;
//! - the response carries `M_11 = h(y ‖ R_s)`, which the client checks as
//!   `M_14 = M_11` before `M_12`;
//! - password change verifies the old password and replaces `e_i` and `r_i`
//!   together, or nothing.

use crate::credentials::{check_biometric, enroll, masked_password, password_verifier};
use crate::error::AuthError;
use crate::hash_codec::{xor, Digest, Hasher, SeededRng, NONCE_LEN};
use crate::runtime::channel::{Frame, FrameKind, WireMessage};
use crate::runtime::{
    check_id_format, check_password, Freshness, Identity, RegistrationCenter, ServerState,
    SessionKey,
};
use crate::scheme::{Scheme, SchemeKind, ServerSessionInfo};

/// Card contents `{f_i, r_i, e_i, y, N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovedCard {
    /// `f_i = h(B_i)`
    pub template: Digest,
    /// `r_i = h(h(N ‖ PW_i) ‖ f_i)`
    pub verifier: Digest,
    /// `e_i = h(ID_i ‖ X_s) ⊕ r_i`
    pub masked_key: Digest,
    /// `y`
    pub shared_secret: Digest,
    /// `N`
    pub salt: [u8; NONCE_LEN],
}

impl ImprovedCard {
    pub fn storage_bytes(&self) -> usize {
        self.template.len()
            + self.verifier.len()
            + self.masked_key.len()
            + self.shared_secret.len()
            + NONCE_LEN
    }

    /// What an attacker reading the card's memory learns: `e_i ⊕ r_i`,
    /// which is `h(ID_i ‖ X_s)`.
    pub fn extract_identity_key(&self) -> Digest {
        xor(&self.masked_key, &self.verifier).expect("card fields share one width")
    }

    /// On a wrong old password the card is left untouched.
    pub fn change_password(
        &mut self,
        hasher: &Hasher,
        biometric: &[u8],
        old_password: &[u8],
        new_password: &[u8],
    ) -> Result<(), AuthError> {
        check_biometric(hasher, &self.template, biometric)?;
        check_password(old_password)?;
        check_password(new_password)?;
        let old_rpw = masked_password(hasher, &self.salt, old_password)?;
        let old_verifier = password_verifier(hasher, &old_rpw, &self.template)?;
        if old_verifier != self.verifier {
            return Err(AuthError::WrongOldPassword);
        }
        let identity_key = xor(&self.masked_key, &old_verifier)?;
        let new_rpw = masked_password(hasher, &self.salt, new_password)?;
        let new_verifier = password_verifier(hasher, &new_rpw, &self.template)?;
        let new_masked_key = xor(&identity_key, &new_verifier)?;
        self.masked_key = new_masked_key;
        self.verifier = new_verifier;
        Ok(())
    }
}

/// `⟨ID_i, M_2, M_3, M_4, M_5⟩`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovedLoginMessage {
    pub id: Identity,
    pub m2: Digest,
    pub m3: Digest,
    pub m4: Digest,
    pub m5: Digest,
}

/// `⟨M_10, M_11, M_12⟩`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovedAuthResponse {
    pub m10: Digest,
    pub m11: Digest,
    pub m12: Digest,
}

#[derive(Debug, Clone)]
pub struct ImprovedClientSession {
    pub rpw: Digest,
    pub m1: Digest,
    pub m3: Digest,
    pub client_nonce: Digest,
}

#[derive(Debug, Clone)]
pub struct ImprovedServerSession {
    pub m6: Digest,
    pub m7: Digest,
    pub m8: Digest,
    pub m9: Digest,
    pub server_nonce: Digest,
    pub session_key: SessionKey,
}

impl ServerSessionInfo for ImprovedServerSession {
    fn session_key(&self) -> &SessionKey {
        &self.session_key
    }

    fn recovered_nonce(&self) -> &Digest {
        &self.m7
    }
}

/// Client-side values from checking a response: `M_13` and `M_14`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseCheck {
    pub m13: Digest,
    pub m14: Digest,
}

impl WireMessage for ImprovedLoginMessage {
    const KIND: FrameKind = FrameKind::Login;
    const FIELDS: &'static [&'static str] = &["ID", "M2", "M3", "M4", "M5"];

    fn to_frame(&self) -> Frame {
        Frame::new(FrameKind::Login)
            .with("ID", &self.id)
            .with("M2", &self.m2)
            .with("M3", &self.m3)
            .with("M4", &self.m4)
            .with("M5", &self.m5)
    }

    fn from_frame(frame: &Frame, digest_len: usize) -> Result<Self, AuthError> {
        frame.expect_fields(Self::KIND, Self::FIELDS)?;
        Ok(ImprovedLoginMessage {
            id: Identity::new(frame.field("ID").unwrap_or_default()),
            m2: frame.digest("M2", digest_len)?,
            m3: frame.digest("M3", digest_len)?,
            m4: frame.digest("M4", digest_len)?,
            m5: frame.digest("M5", digest_len)?,
        })
    }
}

impl WireMessage for ImprovedAuthResponse {
    const KIND: FrameKind = FrameKind::Response;
    const FIELDS: &'static [&'static str] = &["M10", "M11", "M12"];

    fn to_frame(&self) -> Frame {
        Frame::new(FrameKind::Response)
            .with("M10", &self.m10)
            .with("M11", &self.m11)
            .with("M12", &self.m12)
    }

    fn from_frame(frame: &Frame, digest_len: usize) -> Result<Self, AuthError> {
        frame.expect_fields(Self::KIND, Self::FIELDS)?;
        Ok(ImprovedAuthResponse {
            m10: frame.digest("M10", digest_len)?,
            m11: frame.digest("M11", digest_len)?,
            m12: frame.digest("M12", digest_len)?,
        })
    }
}

/// Same derivation as the baseline, but `r_i` is kept on the card.
pub fn register(
    center: &RegistrationCenter,
    hasher: &Hasher,
    id: &Identity,
    password: &[u8],
    biometric: &[u8],
    rng: &mut SeededRng,
) -> Result<ImprovedCard, AuthError> {
    let enrollment = enroll(center, hasher, id, password, biometric, rng)?;
    Ok(ImprovedCard {
        template: enrollment.template,
        verifier: enrollment.verifier,
        masked_key: enrollment.masked_key,
        shared_secret: center.shared_secret().clone(),
        salt: enrollment.salt,
    })
}

pub fn login(
    card: &ImprovedCard,
    hasher: &Hasher,
    biometric: &[u8],
    password: &[u8],
    id: &Identity,
    rng: &mut SeededRng,
) -> Result<(ImprovedLoginMessage, ImprovedClientSession), AuthError> {
    check_biometric(hasher, &card.template, biometric)?;
    check_password(password)?;
    let rpw = masked_password(hasher, &card.salt, password)?;
    let verifier = password_verifier(hasher, &rpw, &card.template)?;
    if verifier != card.verifier {
        return Err(AuthError::WrongPassword);
    }
    // R_c is drawn only once the password is known good
    let client_nonce = hasher.random_digest(rng);
    build_login(card, hasher, id, rpw, verifier, client_nonce)
}

/// Login computations after both local gates, with `R_c` supplied.
pub fn login_with_nonce(
    card: &ImprovedCard,
    hasher: &Hasher,
    password: &[u8],
    id: &Identity,
    client_nonce: Digest,
) -> Result<(ImprovedLoginMessage, ImprovedClientSession), AuthError> {
    check_password(password)?;
    let rpw = masked_password(hasher, &card.salt, password)?;
    let verifier = password_verifier(hasher, &rpw, &card.template)?;
    if verifier != card.verifier {
        return Err(AuthError::WrongPassword);
    }
    build_login(card, hasher, id, rpw, verifier, client_nonce)
}

fn build_login(
    card: &ImprovedCard,
    hasher: &Hasher,
    id: &Identity,
    rpw: Digest,
    verifier: Digest,
    client_nonce: Digest,
) -> Result<(ImprovedLoginMessage, ImprovedClientSession), AuthError> {
    let m1 = xor(&card.masked_key, &verifier)?;
    let m2 = xor(&m1, &client_nonce)?;
    let m3 = hasher.hash(&[card.shared_secret.as_ref(), client_nonce.as_ref()])?;
    let m4 = xor(&rpw, &m3)?;
    let m5 = hasher.hash(&[m2.as_ref(), m3.as_ref(), m4.as_ref()])?;
    Ok((
        ImprovedLoginMessage {
            id: id.clone(),
            m2,
            m3: m3.clone(),
            m4,
            m5,
        },
        ImprovedClientSession {
            rpw,
            m1,
            m3,
            client_nonce,
        },
    ))
}

pub fn authenticate(
    server: &mut ServerState,
    hasher: &Hasher,
    msg: &ImprovedLoginMessage,
    rng: &mut SeededRng,
) -> Result<(ImprovedAuthResponse, ImprovedServerSession), AuthError> {
    let server_nonce = hasher.random_digest(rng);
    authenticate_with_nonce(server, hasher, msg, server_nonce)
}

/// Order: ID format, `M_8 = M_3`, `M_5`, replay database, response.
pub fn authenticate_with_nonce(
    server: &mut ServerState,
    hasher: &Hasher,
    msg: &ImprovedLoginMessage,
    server_nonce: Digest,
) -> Result<(ImprovedAuthResponse, ImprovedServerSession), AuthError> {
    if !check_id_format(msg.id.as_bytes()) {
        return Err(AuthError::Format);
    }
    let y = server.shared_secret().clone();
    let m6 = hasher.hash(&[msg.id.as_ref(), server.master_key().as_ref()])?;
    let m7 = xor(&msg.m2, &m6)?;
    let m8 = hasher.hash(&[y.as_ref(), m7.as_ref()])?;
    if m8 != msg.m3 {
        return Err(AuthError::AuthM8);
    }
    if msg.m5 != hasher.hash(&[msg.m2.as_ref(), m8.as_ref(), msg.m4.as_ref()])? {
        return Err(AuthError::AuthM5);
    }
    if server.replay_db.check_and_store(&msg.id, &m7) == Freshness::Replayed {
        return Err(AuthError::Replay);
    }
    let sid = server.identity().clone();
    let m9 = xor(&msg.m4, &m8)?;
    let pad = hasher.hash(&[m9.as_ref(), sid.as_ref(), y.as_ref()])?;
    let m10 = xor(&xor(&pad, &m8)?, &server_nonce)?;
    let m11 = hasher.hash(&[y.as_ref(), server_nonce.as_ref()])?;
    let m12 = hasher.hash(&[m6.as_ref(), m9.as_ref(), y.as_ref(), server_nonce.as_ref()])?;
    let key = hasher.hash(&[
        m9.as_ref(),
        m8.as_ref(),
        server_nonce.as_ref(),
        sid.as_ref(),
    ])?;
    Ok((
        ImprovedAuthResponse { m10, m11, m12 },
        ImprovedServerSession {
            m6,
            m7,
            m8,
            m9,
            server_nonce,
            session_key: SessionKey(key),
        },
    ))
}

/// Checks `M_14 = M_11`, then `M_12`, then derives the session key.
pub fn verify_response(
    session: &ImprovedClientSession,
    card: &ImprovedCard,
    hasher: &Hasher,
    resp: &ImprovedAuthResponse,
    server_id: &Identity,
) -> Result<SessionKey, AuthError> {
    let (key, _) = verify_response_detailed(session, card, hasher, resp, server_id)?;
    Ok(key)
}

pub fn verify_response_detailed(
    session: &ImprovedClientSession,
    card: &ImprovedCard,
    hasher: &Hasher,
    resp: &ImprovedAuthResponse,
    server_id: &Identity,
) -> Result<(SessionKey, ResponseCheck), AuthError> {
    let y = &card.shared_secret;
    let pad = hasher.hash(&[session.rpw.as_ref(), server_id.as_ref(), y.as_ref()])?;
    let m13 = xor(&xor(&pad, &session.m3)?, &resp.m10)?;
    let m14 = hasher.hash(&[y.as_ref(), m13.as_ref()])?;
    if m14 != resp.m11 {
        return Err(AuthError::ServerAuthM14);
    }
    let expected = hasher.hash(&[
        session.m1.as_ref(),
        session.rpw.as_ref(),
        y.as_ref(),
        m13.as_ref(),
    ])?;
    if resp.m12 != expected {
        return Err(AuthError::ServerAuthM12);
    }
    let key = hasher.hash(&[
        session.rpw.as_ref(),
        session.m3.as_ref(),
        m13.as_ref(),
        server_id.as_ref(),
    ])?;
    Ok((SessionKey(key), ResponseCheck { m13, m14 }))
}

pub struct Improved;

impl Scheme for Improved {
    const KIND: SchemeKind = SchemeKind::Improved;
    const SERVER_CHECKS: &'static [(&'static str, AuthError)] =
        &[("M8==M3", AuthError::AuthM8), ("M5", AuthError::AuthM5)];
    const CLIENT_CHECKS: &'static [(&'static str, AuthError)] = &[
        ("M14==M11", AuthError::ServerAuthM14),
        ("M12", AuthError::ServerAuthM12),
    ];

    type Card = ImprovedCard;
    type Login = ImprovedLoginMessage;
    type Response = ImprovedAuthResponse;
    type ClientSession = ImprovedClientSession;
    type ServerSession = ImprovedServerSession;

    fn register(
        center: &RegistrationCenter,
        hasher: &Hasher,
        id: &Identity,
        password: &[u8],
        biometric: &[u8],
        rng: &mut SeededRng,
    ) -> Result<ImprovedCard, AuthError> {
        register(center, hasher, id, password, biometric, rng)
    }

    fn login(
        card: &ImprovedCard,
        hasher: &Hasher,
        biometric: &[u8],
        password: &[u8],
        id: &Identity,
        rng: &mut SeededRng,
    ) -> Result<(ImprovedLoginMessage, ImprovedClientSession), AuthError> {
        login(card, hasher, biometric, password, id, rng)
    }

    fn authenticate(
        server: &mut ServerState,
        hasher: &Hasher,
        msg: &ImprovedLoginMessage,
        rng: &mut SeededRng,
    ) -> Result<(ImprovedAuthResponse, ImprovedServerSession), AuthError> {
        authenticate(server, hasher, msg, rng)
    }

    fn verify_response(
        session: &ImprovedClientSession,
        card: &ImprovedCard,
        hasher: &Hasher,
        resp: &ImprovedAuthResponse,
        server_id: &Identity,
    ) -> Result<SessionKey, AuthError> {
        verify_response(session, card, hasher, resp, server_id)
    }

    fn change_password(
        card: &mut ImprovedCard,
        hasher: &Hasher,
        biometric: &[u8],
        old_password: &[u8],
        new_password: &[u8],
    ) -> Result<(), AuthError> {
        card.change_password(hasher, biometric, old_password, new_password)
    }

    fn storage_bytes(card: &ImprovedCard) -> usize {
        card.storage_bytes()
    }
}
