//! The original scheme, including its two flaws: the card never checks the
//! entered password at login, and password change never checks the old one.
//!
//! Both flaws are kept as-is. The attack scenarios reproduce them.

use crate::credentials::{check_biometric, enroll, masked_password, password_verifier};
use crate::error::AuthError;
use crate::hash_codec::{xor, Digest, Hasher, SeededRng, NONCE_LEN};
use crate::runtime::channel::{Frame, FrameKind, WireMessage};
use crate::runtime::{
    check_id_format, check_password, Freshness, Identity, RegistrationCenter, ServerState,
    SessionKey,
};
use crate::scheme::{Scheme, SchemeKind, ServerSessionInfo};

/// Card contents `{f_i, e_i, y, N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineCard {
    /// `f_i = h(B_i)`
    pub template: Digest,
    /// `e_i = h(ID_i ‖ X_s) ⊕ r_i`
    pub masked_key: Digest,
    /// `y`
    pub shared_secret: Digest,
    /// `N`
    pub salt: [u8; NONCE_LEN],
}

impl BaselineCard {
    pub fn storage_bytes(&self) -> usize {
        self.template.len() + self.masked_key.len() + self.shared_secret.len() + NONCE_LEN
    }

    /// Replaces `e_i` for the new password. The old password is not checked,
    /// so a wrong one silently corrupts the card.
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
        let unmasked = xor(&self.masked_key, &old_verifier)?;
        let new_rpw = masked_password(hasher, &self.salt, new_password)?;
        let new_verifier = password_verifier(hasher, &new_rpw, &self.template)?;
        self.masked_key = xor(&unmasked, &new_verifier)?;
        Ok(())
    }
}

/// `(ID_i, M_2, M_4, M_5)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineLoginMessage {
    pub id: Identity,
    pub m2: Digest,
    pub m4: Digest,
    pub m5: Digest,
}

/// `(M_10, M_11)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineAuthResponse {
    pub m10: Digest,
    pub m11: Digest,
}

#[derive(Debug, Clone)]
pub struct BaselineClientSession {
    pub rpw: Digest,
    pub m1: Digest,
    pub m3: Digest,
    pub client_nonce: Digest,
}

#[derive(Debug, Clone)]
pub struct BaselineServerSession {
    pub m6: Digest,
    pub m7: Digest,
    pub m8: Digest,
    pub m9: Digest,
    pub server_nonce: Digest,
    pub session_key: SessionKey,
}

impl ServerSessionInfo for BaselineServerSession {
    fn session_key(&self) -> &SessionKey {
        &self.session_key
    }

    fn recovered_nonce(&self) -> &Digest {
        &self.m7
    }
}

impl WireMessage for BaselineLoginMessage {
    const KIND: FrameKind = FrameKind::Login;
    const FIELDS: &'static [&'static str] = &["ID", "M2", "M4", "M5"];

    fn to_frame(&self) -> Frame {
        Frame::new(FrameKind::Login)
            .with("ID", &self.id)
            .with("M2", &self.m2)
            .with("M4", &self.m4)
            .with("M5", &self.m5)
    }

    fn from_frame(frame: &Frame, digest_len: usize) -> Result<Self, AuthError> {
        frame.expect_fields(Self::KIND, Self::FIELDS)?;
        Ok(BaselineLoginMessage {
            id: Identity::new(frame.field("ID").unwrap_or_default()),
            m2: frame.digest("M2", digest_len)?,
            m4: frame.digest("M4", digest_len)?,
            m5: frame.digest("M5", digest_len)?,
        })
    }
}

impl WireMessage for BaselineAuthResponse {
    const KIND: FrameKind = FrameKind::Response;
    const FIELDS: &'static [&'static str] = &["M10", "M11"];

    fn to_frame(&self) -> Frame {
        Frame::new(FrameKind::Response)
            .with("M10", &self.m10)
            .with("M11", &self.m11)
    }

    fn from_frame(frame: &Frame, digest_len: usize) -> Result<Self, AuthError> {
        frame.expect_fields(Self::KIND, Self::FIELDS)?;
        Ok(BaselineAuthResponse {
            m10: frame.digest("M10", digest_len)?,
            m11: frame.digest("M11", digest_len)?,
        })
    }
}

pub fn register(
    center: &RegistrationCenter,
    hasher: &Hasher,
    id: &Identity,
    password: &[u8],
    biometric: &[u8],
    rng: &mut SeededRng,
) -> Result<BaselineCard, AuthError> {
    let enrollment = enroll(center, hasher, id, password, biometric, rng)?;
    Ok(BaselineCard {
        template: enrollment.template,
        masked_key: enrollment.masked_key,
        shared_secret: center.shared_secret().clone(),
        salt: enrollment.salt,
    })
}

/// Builds a login message. Any well-formed password is accepted; only the
/// biometric gate can stop it.
pub fn login(
    card: &BaselineCard,
    hasher: &Hasher,
    biometric: &[u8],
    password: &[u8],
    id: &Identity,
    rng: &mut SeededRng,
) -> Result<(BaselineLoginMessage, BaselineClientSession), AuthError> {
    check_biometric(hasher, &card.template, biometric)?;
    let client_nonce = hasher.random_digest(rng);
    login_with_nonce(card, hasher, password, id, client_nonce)
}

/// Login computations after the biometric gate, with `R_c` supplied.
pub fn login_with_nonce(
    card: &BaselineCard,
    hasher: &Hasher,
    password: &[u8],
    id: &Identity,
    client_nonce: Digest,
) -> Result<(BaselineLoginMessage, BaselineClientSession), AuthError> {
    check_password(password)?;
    let rpw = masked_password(hasher, &card.salt, password)?;
    let verifier = password_verifier(hasher, &rpw, &card.template)?;
    let m1 = xor(&card.masked_key, &verifier)?;
    let m2 = xor(&m1, &client_nonce)?;
    let m3 = hasher.hash(&[card.shared_secret.as_ref(), client_nonce.as_ref()])?;
    let m4 = xor(&rpw, &m3)?;
    let m5 = hasher.hash(&[m2.as_ref(), m3.as_ref(), m4.as_ref()])?;
    Ok((
        BaselineLoginMessage {
            id: id.clone(),
            m2,
            m4,
            m5,
        },
        BaselineClientSession {
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
    msg: &BaselineLoginMessage,
    rng: &mut SeededRng,
) -> Result<(BaselineAuthResponse, BaselineServerSession), AuthError> {
    let server_nonce = hasher.random_digest(rng);
    authenticate_with_nonce(server, hasher, msg, server_nonce)
}

/// Server side of authentication with `R_s` supplied.
///
/// Order: ID format, `M_5`, replay database, response.
pub fn authenticate_with_nonce(
    server: &mut ServerState,
    hasher: &Hasher,
    msg: &BaselineLoginMessage,
    server_nonce: Digest,
) -> Result<(BaselineAuthResponse, BaselineServerSession), AuthError> {
    if !check_id_format(msg.id.as_bytes()) {
        return Err(AuthError::Format);
    }
    let y = server.shared_secret().clone();
    let m6 = hasher.hash(&[msg.id.as_ref(), server.master_key().as_ref()])?;
    let m7 = xor(&msg.m2, &m6)?;
    let m8 = hasher.hash(&[y.as_ref(), m7.as_ref()])?;
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
    let m11 = hasher.hash(&[m6.as_ref(), m9.as_ref(), y.as_ref(), server_nonce.as_ref()])?;
    let key = hasher.hash(&[
        m9.as_ref(),
        m8.as_ref(),
        server_nonce.as_ref(),
        sid.as_ref(),
    ])?;
    Ok((
        BaselineAuthResponse { m10, m11 },
        BaselineServerSession {
            m6,
            m7,
            m8,
            m9,
            server_nonce,
            session_key: SessionKey(key),
        },
    ))
}

/// Client check of `M_11` and derivation of the session key.
pub fn verify_response(
    session: &BaselineClientSession,
    card: &BaselineCard,
    hasher: &Hasher,
    resp: &BaselineAuthResponse,
    server_id: &Identity,
) -> Result<SessionKey, AuthError> {
    let y = &card.shared_secret;
    let pad = hasher.hash(&[session.rpw.as_ref(), server_id.as_ref(), y.as_ref()])?;
    // M_12, the server nonce as the client recovers it
    let m12 = xor(&xor(&pad, &session.m3)?, &resp.m10)?;
    let expected = hasher.hash(&[
        session.m1.as_ref(),
        session.rpw.as_ref(),
        y.as_ref(),
        m12.as_ref(),
    ])?;
    if resp.m11 != expected {
        return Err(AuthError::ServerAuthM11);
    }
    let key = hasher.hash(&[
        session.rpw.as_ref(),
        session.m3.as_ref(),
        m12.as_ref(),
        server_id.as_ref(),
    ])?;
    Ok(SessionKey(key))
}

/// Recovers `M_12` as the client would. Exposed for tests.
pub fn recover_server_nonce(
    session: &BaselineClientSession,
    card: &BaselineCard,
    hasher: &Hasher,
    resp: &BaselineAuthResponse,
    server_id: &Identity,
) -> Result<Digest, AuthError> {
    let pad = hasher.hash(&[
        session.rpw.as_ref(),
        server_id.as_ref(),
        card.shared_secret.as_ref(),
    ])?;
    Ok(xor(&xor(&pad, &session.m3)?, &resp.m10)?)
}

pub struct Baseline;

impl Scheme for Baseline {
    const KIND: SchemeKind = SchemeKind::Baseline;
    const SERVER_CHECKS: &'static [(&'static str, AuthError)] = &[("M5", AuthError::AuthM5)];
    const CLIENT_CHECKS: &'static [(&'static str, AuthError)] =
        &[("M11", AuthError::ServerAuthM11)];

    type Card = BaselineCard;
    type Login = BaselineLoginMessage;
    type Response = BaselineAuthResponse;
    type ClientSession = BaselineClientSession;
    type ServerSession = BaselineServerSession;

    fn register(
        center: &RegistrationCenter,
        hasher: &Hasher,
        id: &Identity,
        password: &[u8],
        biometric: &[u8],
        rng: &mut SeededRng,
    ) -> Result<BaselineCard, AuthError> {
        register(center, hasher, id, password, biometric, rng)
    }

    fn login(
        card: &BaselineCard,
        hasher: &Hasher,
        biometric: &[u8],
        password: &[u8],
        id: &Identity,
        rng: &mut SeededRng,
    ) -> Result<(BaselineLoginMessage, BaselineClientSession), AuthError> {
        login(card, hasher, biometric, password, id, rng)
    }

    fn authenticate(
        server: &mut ServerState,
        hasher: &Hasher,
        msg: &BaselineLoginMessage,
        rng: &mut SeededRng,
    ) -> Result<(BaselineAuthResponse, BaselineServerSession), AuthError> {
        authenticate(server, hasher, msg, rng)
    }

    fn verify_response(
        session: &BaselineClientSession,
        card: &BaselineCard,
        hasher: &Hasher,
        resp: &BaselineAuthResponse,
        server_id: &Identity,
    ) -> Result<SessionKey, AuthError> {
        verify_response(session, card, hasher, resp, server_id)
    }

    fn change_password(
        card: &mut BaselineCard,
        hasher: &Hasher,
        biometric: &[u8],
        old_password: &[u8],
        new_password: &[u8],
    ) -> Result<(), AuthError> {
        card.change_password(hasher, biometric, old_password, new_password)
    }

    fn storage_bytes(card: &BaselineCard) -> usize {
        card.storage_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash_codec::HashConfig;

    struct Fixture {
        hasher: Hasher,
        center: RegistrationCenter,
        server: ServerState,
        id: Identity,
        card: BaselineCard,
        rng: SeededRng,
    }

    const PW: &[u8] = b"correct horse";
    const BIO: &[u8] = b"left index fingerprint";

    fn fixture(seed: u64) -> Fixture {
        let hasher = Hasher::new(HashConfig::default());
        let mut rng = SeededRng::new(seed);
        let center = RegistrationCenter::generate(&hasher, &mut rng);
        let server = ServerState::new(&center, "server-01".into());
        let id = Identity::from("alice01");
        let card = register(&center, &hasher, &id, PW, BIO, &mut rng).unwrap();
        Fixture {
            hasher,
            center,
            server,
            id,
            card,
            rng,
        }
    }

    fn identity_key(f: &Fixture) -> Digest {
        f.hasher
            .hash(&[f.id.as_ref(), f.center.master_key().as_ref()])
            .unwrap()
    }

    #[test]
    fn registration_cancels_verifier() {
        let f = fixture(1);
        let rpw = f.hasher.hash(&[&f.card.salt, PW]).unwrap();
        let r = f
            .hasher
            .hash(&[rpw.as_ref(), f.card.template.as_ref()])
            .unwrap();
        assert_eq!(xor(&f.card.masked_key, &r).unwrap(), identity_key(&f));
        assert_eq!(f.card.template, f.hasher.hash(&[BIO]).unwrap());
        assert_eq!(&f.card.shared_secret, f.center.shared_secret());
    }

    #[test]
    fn registration_depends_on_rng() {
        let f = fixture(1);
        let mut other = SeededRng::new(999);
        let card = register(&f.center, &f.hasher, &f.id, PW, BIO, &mut other).unwrap();
        assert_ne!(card.salt, f.card.salt);
        assert_ne!(card.masked_key, f.card.masked_key);
    }

    #[test]
    fn registration_rejects_bad_id() {
        let mut f = fixture(1);
        let err = register(
            &f.center,
            &f.hasher,
            &Identity::from("has space"),
            PW,
            BIO,
            &mut f.rng,
        );
        assert_eq!(err.unwrap_err(), AuthError::MalformedIdentity);
    }

    #[test]
    fn honest_run_cancellations() {
        let mut f = fixture(2);
        let (msg, session) = login(&f.card, &f.hasher, BIO, PW, &f.id, &mut f.rng).unwrap();
        let (resp, server_session) =
            authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap();
        assert_eq!(server_session.m7, session.client_nonce);
        assert_eq!(server_session.m8, session.m3);
        assert_eq!(server_session.m9, session.rpw);
        assert_eq!(server_session.m6, identity_key(&f));
        let sid = f.server.identity().clone();
        let m12 = recover_server_nonce(&session, &f.card, &f.hasher, &resp, &sid).unwrap();
        assert_eq!(m12, server_session.server_nonce);
        let key = verify_response(&session, &f.card, &f.hasher, &resp, &sid).unwrap();
        assert_eq!(key, server_session.session_key);
    }

    #[test]
    fn wrong_password_still_sends_then_fails_m5() {
        let mut f = fixture(3);
        let (msg, _) = login(&f.card, &f.hasher, BIO, b"wrong", &f.id, &mut f.rng).unwrap();
        let err = authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap_err();
        assert_eq!(err, AuthError::AuthM5);
        assert!(f.server.replay_db.is_empty());
    }

    #[test]
    fn biometric_gate() {
        let mut f = fixture(4);
        let err = login(&f.card, &f.hasher, b"someone else", PW, &f.id, &mut f.rng).unwrap_err();
        assert_eq!(err, AuthError::BiometricMismatch);
    }

    #[test]
    fn resend_is_replay() {
        let mut f = fixture(5);
        let (msg, _) = login(&f.card, &f.hasher, BIO, PW, &f.id, &mut f.rng).unwrap();
        authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap();
        let err = authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap_err();
        assert_eq!(err, AuthError::Replay);
    }

    #[test]
    fn forged_m5_is_rejected() {
        let mut f = fixture(6);
        let (mut msg, _) = login(&f.card, &f.hasher, BIO, PW, &f.id, &mut f.rng).unwrap();
        msg.m5 = f.hasher.random_digest(&mut f.rng);
        assert_eq!(
            authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap_err(),
            AuthError::AuthM5
        );
    }

    #[test]
    fn bad_id_format_is_rejected_first() {
        let mut f = fixture(7);
        let (mut msg, _) = login(&f.card, &f.hasher, BIO, PW, &f.id, &mut f.rng).unwrap();
        msg.id = Identity::new(Vec::new());
        f.hasher.reset();
        assert_eq!(
            authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap_err(),
            AuthError::Format
        );
        assert_eq!(f.hasher.count(), 0);
    }

    #[test]
    fn flipped_m10_bits_are_rejected() {
        let mut f = fixture(8);
        let sid = f.server.identity().clone();
        for _ in 0..100 {
            let (msg, session) = login(&f.card, &f.hasher, BIO, PW, &f.id, &mut f.rng).unwrap();
            let (mut resp, _) = authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap();
            let bit = f.rng.below(256) as usize;
            resp.m10.flip_bit(bit);
            assert_eq!(
                verify_response(&session, &f.card, &f.hasher, &resp, &sid).unwrap_err(),
                AuthError::ServerAuthM11
            );
        }
    }

    #[test]
    fn correct_change_then_new_password_works() {
        let mut f = fixture(9);
        f.card
            .change_password(&f.hasher, BIO, PW, b"new secret")
            .unwrap();
        let (msg, session) =
            login(&f.card, &f.hasher, BIO, b"new secret", &f.id, &mut f.rng).unwrap();
        let (resp, server_session) =
            authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap();
        let sid = f.server.identity().clone();
        let key = verify_response(&session, &f.card, &f.hasher, &resp, &sid).unwrap();
        assert_eq!(key, server_session.session_key);
    }

    #[test]
    fn wrong_old_password_corrupts_card() {
        let mut f = fixture(10);
        let before = f.card.clone();
        f.card
            .change_password(&f.hasher, BIO, b"not it", b"new secret")
            .unwrap();
        assert_ne!(f.card, before);
        for pw in [&b"new secret"[..], PW, b"not it"] {
            for _ in 0..3 {
                let (msg, _) = login(&f.card, &f.hasher, BIO, pw, &f.id, &mut f.rng).unwrap();
                assert_eq!(
                    authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap_err(),
                    AuthError::AuthM5
                );
            }
        }
    }

    #[test]
    fn change_needs_biometric() {
        let mut f = fixture(11);
        let before = f.card.clone();
        assert_eq!(
            f.card
                .change_password(&f.hasher, b"nope", PW, b"x")
                .unwrap_err(),
            AuthError::BiometricMismatch
        );
        assert_eq!(f.card, before);
    }

    #[test]
    fn wire_round_trip() {
        let mut f = fixture(12);
        let (msg, _) = login(&f.card, &f.hasher, BIO, PW, &f.id, &mut f.rng).unwrap();
        assert_eq!(
            BaselineLoginMessage::from_frame(&msg.to_frame(), 32).unwrap(),
            msg
        );
        let (resp, _) = authenticate(&mut f.server, &f.hasher, &msg, &mut f.rng).unwrap();
        assert_eq!(
            BaselineAuthResponse::from_frame(&resp.to_frame(), 32).unwrap(),
            resp
        );
        assert!(BaselineAuthResponse::from_frame(&msg.to_frame(), 32).is_err());
    }
}
