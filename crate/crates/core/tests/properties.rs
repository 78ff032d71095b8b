use proptest::prelude::*;

use smartauth::baseline::{self, Baseline};
use smartauth::hash_codec::{HashConfig, Hasher, SeededRng};
use smartauth::improved::{self, Improved};
use smartauth::runtime::channel::WireMessage;
use smartauth::runtime::{
    Actor, AdversarialChannel, FrameKind, Identity, RegistrationCenter, ReplayDb, ServerState,
    Transcript,
};
use smartauth::{AuthError, Digest, Scheme};

fn id_strategy() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0x21u8..=0x7e, 1..=64)
}

fn password_strategy() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(any::<u8>(), 1..=64)
}

fn biometric_strategy() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(any::<u8>(), 1..=128)
}

struct World {
    hasher: Hasher,
    rng: SeededRng,
    center: RegistrationCenter,
    server: ServerState,
}

fn world(seed: u64) -> World {
    let hasher = Hasher::new(HashConfig::default());
    let mut rng = SeededRng::new(seed);
    let center = RegistrationCenter::generate(&hasher, &mut rng);
    let server = ServerState::new(&center, Identity::from("auth-server-01"));
    World {
        hasher,
        rng,
        center,
        server,
    }
}

fn exchange<S: Scheme>(
    w: &mut World,
    card: &S::Card,
    bio: &[u8],
    pw: &[u8],
    id: &Identity,
) -> Result<(Digest, Digest), AuthError> {
    use smartauth::scheme::ServerSessionInfo;
    let (msg, cs) = S::login(card, &w.hasher, bio, pw, id, &mut w.rng)?;
    let (resp, ss) = S::authenticate(&mut w.server, &w.hasher, &msg, &mut w.rng)?;
    let key = S::verify_response(&cs, card, &w.hasher, &resp, w.server.identity())?;
    Ok((key.0, ss.session_key().0.clone()))
}

fn honest<S: Scheme>(seed: u64, id: &[u8], pw: &[u8], bio: &[u8]) -> Result<(), TestCaseError> {
    let mut w = world(seed);
    let id = Identity::new(id.to_vec());
    let card = S::register(&w.center, &w.hasher, &id, pw, bio, &mut w.rng).unwrap();
    let (client, server) = exchange::<S>(&mut w, &card, bio, pw, &id).unwrap();
    prop_assert_eq!(client, server);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honest_runs_agree_on_a_key(seed: u64, id in id_strategy(), pw in password_strategy(), bio in biometric_strategy()) {
        honest::<Baseline>(seed, &id, &pw, &bio)?;
        honest::<Improved>(seed, &id, &pw, &bio)?;
    }

    #[test]
    fn improved_password_change_is_all_or_nothing(
        seed: u64,
        id in id_strategy(),
        pw in password_strategy(),
        other in password_strategy(),
        new in password_strategy(),
        bio in biometric_strategy(),
    ) {
        prop_assume!(other != pw && new != pw);
        let mut w = world(seed);
        let id = Identity::new(id);
        let mut card = improved::register(&w.center, &w.hasher, &id, &pw, &bio, &mut w.rng).unwrap();
        let before = card.clone();

        prop_assert_eq!(card.change_password(&w.hasher, &bio, &other, &new), Err(AuthError::WrongOldPassword));
        prop_assert_eq!(&card, &before);
        prop_assert_eq!(card.change_password(&w.hasher, b"not the finger", &pw, &new), Err(AuthError::BiometricMismatch));
        prop_assert_eq!(&card, &before);

        card.change_password(&w.hasher, &bio, &pw, &new).unwrap();
        prop_assert_eq!(card.extract_identity_key(), before.extract_identity_key());
        prop_assert_eq!(
            improved::login(&card, &w.hasher, &bio, &pw, &id, &mut w.rng).err(),
            Some(AuthError::WrongPassword)
        );
        let (client, server) = exchange::<Improved>(&mut w, &card, &bio, &new, &id).unwrap();
        prop_assert_eq!(client, server);
    }

    #[test]
    fn baseline_wrong_change_corrupts_for_both_passwords(
        seed: u64,
        pw in password_strategy(),
        other in password_strategy(),
        new in password_strategy(),
    ) {
        prop_assume!(other != pw);
        let mut w = world(seed);
        let id = Identity::from("user-1");
        let bio = b"sample";
        let mut card = baseline::register(&w.center, &w.hasher, &id, &pw, bio, &mut w.rng).unwrap();
        let before = card.clone();
        card.change_password(&w.hasher, bio, &other, &new).unwrap();
        prop_assert_ne!(&card, &before);
        prop_assert_eq!(exchange::<Baseline>(&mut w, &card, bio, &new, &id).err(), Some(AuthError::AuthM5));
        prop_assert_eq!(exchange::<Baseline>(&mut w, &card, bio, &pw, &id).err(), Some(AuthError::AuthM5));
    }

    #[test]
    fn wire_messages_round_trip(seed: u64) {
        let mut w = world(seed);
        let id = Identity::from("user-2");
        let card = improved::register(&w.center, &w.hasher, &id, b"pw", b"bio", &mut w.rng).unwrap();
        let (msg, _) = improved::login(&card, &w.hasher, b"bio", b"pw", &id, &mut w.rng).unwrap();
        prop_assert_eq!(improved::ImprovedLoginMessage::from_frame(&msg.to_frame(), 32).unwrap(), msg.clone());
        let (resp, _) = improved::authenticate(&mut w.server, &w.hasher, &msg, &mut w.rng).unwrap();
        prop_assert_eq!(improved::ImprovedAuthResponse::from_frame(&resp.to_frame(), 32).unwrap(), resp);
        // a frame of the wrong width is refused
        prop_assert!(improved::ImprovedLoginMessage::from_frame(&msg.to_frame(), 16).is_err());
    }

    #[test]
    fn passive_channel_is_transparent(seed: u64) {
        let mut w = world(seed);
        let id = Identity::from("user-3");
        let card = baseline::register(&w.center, &w.hasher, &id, b"pw", b"bio", &mut w.rng).unwrap();
        let (msg, _) = baseline::login(&card, &w.hasher, b"bio", b"pw", &id, &mut w.rng).unwrap();

        let mut channel = AdversarialChannel::passive();
        let mut transcript = Transcript::new();
        channel.send(Actor::Client, msg.to_frame(), &mut transcript);
        let frame = channel.recv(Actor::Server, FrameKind::Login, &mut transcript).unwrap();
        prop_assert_eq!(baseline::BaselineLoginMessage::from_frame(&frame, 32).unwrap(), msg);
        prop_assert!(channel.is_empty());
        prop_assert!(!channel.adversary_turn(&mut transcript));
        prop_assert_eq!(channel.adversary_actions(), 0);
    }

    #[test]
    fn replay_db_keeps_latest_nonce(ids in prop::collection::vec(0u8..4, 1..40), seed: u64) {
        let mut db = ReplayDb::new();
        let mut rng = SeededRng::new(seed);
        let mut model = std::collections::BTreeMap::new();
        for n in ids {
            let id = Identity::new(vec![b'u', n]);
            let nonce = rng.digest(32);
            let fresh = model.get(&id) != Some(&nonce);
            let got = db.check_and_store(&id, &nonce);
            prop_assert_eq!(got == smartauth::runtime::Freshness::Fresh, fresh);
            prop_assert_eq!(db.check_and_store(&id, &nonce), smartauth::runtime::Freshness::Replayed);
            model.insert(id, nonce);
        }
        prop_assert_eq!(db.len(), model.len());
        prop_assert_eq!(ReplayDb::from_snapshot(&db.to_snapshot()).unwrap(), db);
    }
}

#[test]
fn malformed_ids_are_rejected_at_registration() {
    let mut w = world(0);
    for bad in [&b""[..], b"has space", &[b'a'; 65], &[0xc3, 0xa9]] {
        let id = Identity::new(bad.to_vec());
        assert_eq!(
            improved::register(&w.center, &w.hasher, &id, b"pw", b"bio", &mut w.rng).err(),
            Some(AuthError::MalformedIdentity)
        );
        assert_eq!(
            baseline::register(&w.center, &w.hasher, &id, b"pw", b"bio", &mut w.rng).err(),
            Some(AuthError::MalformedIdentity)
        );
    }
}
