//! Credential hashing, bearer sessions and the authenticated-caller extractor.

use argon2::password_hash::{PasswordHash, PasswordHasher as _, PasswordVerifier as _, SaltString};
use argon2::{Algorithm, Argon2, Params, Version};
use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use axum::http::HeaderMap;
use chrono::Duration;
use glycotrack_core::domain::{Timestamp, UserProfile};
use glycotrack_core::persistence::{Session, Store};
use glycotrack_core::Result as CoreResult;
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::config::HashParams;
use crate::error::ApiError;
use crate::AppState;

pub const MIN_PASSWORD_CHARS: usize = 8;

/// Salted Argon2id hashing of user passwords.
#[derive(Clone)]
pub struct Credentials {
    argon: Argon2<'static>,
    /// Hash of a throwaway password, verified against when the email is
    /// unknown so both failure paths cost the same.
    dummy: String,
}

impl Credentials {
    pub fn new(params: HashParams) -> Self {
        let params = Params::new(params.memory_kib, params.iterations, params.parallelism, None)
            .expect("hash parameters are checked when the config loads");
        let argon = Argon2::new(Algorithm::Argon2id, Version::V0x13, params);
        let mut creds = Credentials {
            argon,
            dummy: String::new(),
        };
        creds.dummy = creds.hash("not-a-real-password");
        creds
    }

    pub fn hash(&self, password: &str) -> String {
        let mut salt = [0u8; 16];
        rand::rng().fill_bytes(&mut salt);
        let salt = SaltString::encode_b64(&salt).expect("16 bytes is a valid salt");
        self.argon
            .hash_password(password.as_bytes(), &salt)
            .expect("argon2 hashing with valid params")
            .to_string()
    }

    pub fn verify(&self, password: &str, stored: &str) -> bool {
        match PasswordHash::new(stored) {
            Ok(parsed) => self.argon.verify_password(password.as_bytes(), &parsed).is_ok(),
            Err(_) => false,
        }
    }

    /// Burns the same work as a real verification.
    pub fn verify_dummy(&self, password: &str) {
        let _ = self.verify(password, &self.dummy);
    }
}

pub fn token_hash(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

/// Issues a fresh random bearer token for `user`; only its hash is stored.
pub fn issue_session(
    store: &dyn Store,
    user: &UserProfile,
    now: Timestamp,
    ttl: Duration,
) -> CoreResult<(String, Session)> {
    let mut raw = [0u8; 32];
    rand::rng().fill_bytes(&mut raw);
    let token = hex::encode(raw);
    let session = Session {
        token_hash: token_hash(&token),
        user: user.id,
        issued_at: now,
        expires_at: now + ttl,
        revoked: false,
    };
    store.create_session(&session)?;
    Ok((token, session))
}

pub fn bearer_token(headers: &HeaderMap) -> Option<&str> {
    let value = headers.get(AUTHORIZATION)?.to_str().ok()?;
    let (scheme, token) = value.split_once(' ')?;
    if !scheme.eq_ignore_ascii_case("bearer") {
        return None;
    }
    let token = token.trim();
    (!token.is_empty()).then_some(token)
}

/// Resolves a raw token to its live session and user.
pub fn authenticate(state: &AppState, token: &str) -> Result<(Session, UserProfile), ApiError> {
    let session = state
        .store
        .session(&token_hash(token))?
        .ok_or_else(ApiError::invalid_token)?;
    if session.revoked || state.clock.now() >= session.expires_at {
        return Err(ApiError::invalid_token());
    }
    let user = state.store.user(session.user).map_err(|_| ApiError::invalid_token())?;
    Ok((session, user))
}

/// The authenticated user behind a request.
#[derive(Debug, Clone)]
pub struct Caller {
    pub profile: UserProfile,
    pub session: Session,
}

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = bearer_token(&parts.headers).ok_or_else(ApiError::unauthenticated)?;
        let (session, profile) = authenticate(state, token)?;
        Ok(Caller { profile, session })
    }
}
