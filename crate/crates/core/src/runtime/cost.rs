//! Per-phase hash invocation counts for one honest run.
//!
//! Login + authentication covers the card's login computations, the
//! server's authentication and the client's response check, both sides
//! combined. The biometric template match is not counted, nor is
//! registration.

use crate::error::AuthError;
use crate::hash_codec::{HashConfig, Hasher, SeededRng};
use crate::runtime::scenario::UserInputs;
use crate::runtime::{Identity, RegistrationCenter, ServerState};
use crate::scheme::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseCosts {
    pub registration: u64,
    pub login: u64,
    pub authentication: u64,
    pub verification: u64,
    pub password_change: u64,
    pub card_bytes: usize,
}

impl PhaseCosts {
    pub fn login_and_authentication(&self) -> u64 {
        self.login + self.authentication + self.verification
    }
}

pub fn measure<S: Scheme>(seed: u64, hash: HashConfig) -> Result<PhaseCosts, AuthError> {
    let hash = HashConfig {
        counting: true,
        ..hash
    };
    let hasher = Hasher::new(hash);
    let mut rng = SeededRng::new(seed);
    let inputs = UserInputs::generate(&mut rng);
    let center = RegistrationCenter::generate(&hasher, &mut rng);
    let mut server = ServerState::new(&center, Identity::from("auth-server-01"));
    let mut costs = PhaseCosts::default();

    hasher.reset();
    let mut card = S::register(
        &center,
        &hasher,
        &inputs.id,
        &inputs.password,
        &inputs.biometric,
        &mut rng,
    )?;
    costs.registration = hasher.count();

    hasher.reset();
    let (msg, session) = S::login(
        &card,
        &hasher,
        &inputs.biometric,
        &inputs.password,
        &inputs.id,
        &mut rng,
    )?;
    costs.login = hasher.count();

    hasher.reset();
    let (resp, _) = S::authenticate(&mut server, &hasher, &msg, &mut rng)?;
    costs.authentication = hasher.count();

    hasher.reset();
    S::verify_response(&session, &card, &hasher, &resp, server.identity())?;
    costs.verification = hasher.count();

    hasher.reset();
    let new = inputs.new_password();
    S::change_password(
        &mut card,
        &hasher,
        &inputs.biometric,
        &inputs.password,
        &new,
    )?;
    costs.password_change = hasher.count();

    costs.card_bytes = S::storage_bytes(&card);
    Ok(costs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::Baseline;
    use crate::improved::Improved;

    #[test]
    fn per_phase_counts() {
        let b = measure::<Baseline>(1, HashConfig::default()).unwrap();
        let i = measure::<Improved>(1, HashConfig::default()).unwrap();
        assert_eq!(
            (b.registration, b.login, b.authentication, b.verification),
            (4, 4, 6, 3)
        );
        assert_eq!(
            (i.registration, i.login, i.authentication, i.verification),
            (4, 4, 7, 4)
        );
        assert_eq!(
            i.login_and_authentication() - b.login_and_authentication(),
            2
        );
        assert_eq!(b.password_change, 4);
        assert_eq!(i.password_change, 4);
        assert_eq!(i.card_bytes - b.card_bytes, 32);
    }
}
