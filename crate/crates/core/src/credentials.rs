//! Card-side derivations shared by both schemes.

use crate::error::AuthError;
use crate::hash_codec::{xor, Digest, Hasher, SeededRng, NONCE_LEN};
use crate::runtime::{check_id_format, check_password, Identity, RegistrationCenter};

/// `RPW_i = h(N ‖ PW_i)`.
pub(crate) fn masked_password(
    hasher: &Hasher,
    salt: &[u8; NONCE_LEN],
    password: &[u8],
) -> Result<Digest, AuthError> {
    Ok(hasher.hash(&[salt, password])?)
}

/// `r_i = h(RPW_i ‖ f_i)`.
pub(crate) fn password_verifier(
    hasher: &Hasher,
    masked_password: &Digest,
    template: &Digest,
) -> Result<Digest, AuthError> {
    Ok(hasher.hash(&[masked_password.as_ref(), template.as_ref()])?)
}

/// `h(B_i)` compared against the stored `f_i`. Exact match only.
pub(crate) fn check_biometric(
    hasher: &Hasher,
    template: &Digest,
    sample: &[u8],
) -> Result<(), AuthError> {
    if hasher.hash_uncounted(&[sample])? == *template {
        Ok(())
    } else {
        Err(AuthError::BiometricMismatch)
    }
}

/// What the registration center derives for one user.
pub(crate) struct Enrollment {
    pub salt: [u8; NONCE_LEN],
    pub template: Digest,
    pub verifier: Digest,
    pub masked_key: Digest,
}

/// Draws `N`, then computes `f_i = h(B_i)`, `r_i = h(h(N ‖ PW_i) ‖ f_i)`
/// and `e_i = h(ID_i ‖ X_s) ⊕ r_i`.
pub(crate) fn enroll(
    center: &RegistrationCenter,
    hasher: &Hasher,
    id: &Identity,
    password: &[u8],
    biometric: &[u8],
    rng: &mut SeededRng,
) -> Result<Enrollment, AuthError> {
    if !check_id_format(id.as_bytes()) {
        return Err(AuthError::MalformedIdentity);
    }
    check_password(password)?;
    let salt = rng.nonce();
    let rpw = masked_password(hasher, &salt, password)?;
    let template = hasher.hash(&[biometric])?;
    let verifier = password_verifier(hasher, &rpw, &template)?;
    let identity_key = hasher.hash(&[id.as_ref(), center.master_key().as_ref()])?;
    let masked_key = xor(&identity_key, &verifier)?;
    Ok(Enrollment {
        salt,
        template,
        verifier,
        masked_key,
    })
}
