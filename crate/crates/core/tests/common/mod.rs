//! Independent reference for the protocol equations.
//!
//! Works on plain byte vectors and calls sha2 directly, so nothing here
//! goes through the crate's hasher, codec or message types.

#![allow(dead_code)]

use sha2::{Digest as _, Sha256};

pub fn h(width: usize, parts: &[&[u8]]) -> Vec<u8> {
    let mut sha = Sha256::new();
    for p in parts {
        sha.update((p.len() as u32).to_be_bytes());
        sha.update(p);
    }
    sha.finalize()[..width].to_vec()
}

pub fn x(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(p, q)| p ^ q).collect()
}

pub struct Inputs<'a> {
    pub width: usize,
    pub master_key: &'a [u8],
    pub shared_secret: &'a [u8],
    pub salt: &'a [u8],
    pub id: &'a [u8],
    pub sid: &'a [u8],
    pub password: &'a [u8],
    pub biometric: &'a [u8],
    pub client_nonce: &'a [u8],
    pub server_nonce: &'a [u8],
}

/// Every intermediate value of one honest run, indexed by message number.
/// `m[11]`, `m[12]` follow the baseline numbering; the hardened response is
/// in `hardened_*`.
#[derive(Debug)]
pub struct Trace {
    pub rpw: Vec<u8>,
    pub template: Vec<u8>,
    pub verifier: Vec<u8>,
    pub identity_key: Vec<u8>,
    pub masked_key: Vec<u8>,
    pub m: [Vec<u8>; 13],
    pub baseline_client_key: Vec<u8>,
    pub server_key: Vec<u8>,
    pub hardened_m11: Vec<u8>,
    pub hardened_m12: Vec<u8>,
    pub hardened_m13: Vec<u8>,
    pub hardened_m14: Vec<u8>,
    pub hardened_client_key: Vec<u8>,
}

pub fn trace(i: &Inputs) -> Trace {
    let w = i.width;
    let rpw = h(w, &[i.salt, i.password]);
    let template = h(w, &[i.biometric]);
    let verifier = h(w, &[&rpw, &template]);
    let identity_key = h(w, &[i.id, i.master_key]);
    let masked_key = x(&identity_key, &verifier);

    let m1 = x(&masked_key, &verifier);
    let m2 = x(&m1, i.client_nonce);
    let m3 = h(w, &[i.shared_secret, i.client_nonce]);
    let m4 = x(&rpw, &m3);
    let m5 = h(w, &[&m2, &m3, &m4]);
    let m6 = h(w, &[i.id, i.master_key]);
    let m7 = x(&m2, &m6);
    let m8 = h(w, &[i.shared_secret, &m7]);
    let m9 = x(&m4, &m8);
    let m10 = x(
        &x(&h(w, &[&m9, i.sid, i.shared_secret]), &m8),
        i.server_nonce,
    );
    let m11 = h(w, &[&m6, &m9, i.shared_secret, i.server_nonce]);
    let m12 = x(&x(&h(w, &[&rpw, i.sid, i.shared_secret]), &m3), &m10);
    let server_key = h(w, &[&m9, &m8, i.server_nonce, i.sid]);
    let baseline_client_key = h(w, &[&rpw, &m3, &m12, i.sid]);

    let hardened_m11 = h(w, &[i.shared_secret, i.server_nonce]);
    let hardened_m12 = m11.clone();
    let hardened_m13 = m12.clone();
    let hardened_m14 = h(w, &[i.shared_secret, &hardened_m13]);
    let hardened_client_key = baseline_client_key.clone();

    Trace {
        rpw,
        template,
        verifier,
        identity_key,
        masked_key,
        m: [vec![], m1, m2, m3, m4, m5, m6, m7, m8, m9, m10, m11, m12],
        baseline_client_key,
        server_key,
        hardened_m11,
        hardened_m12,
        hardened_m13,
        hardened_m14,
        hardened_client_key,
    }
}
