#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use axum::body::{Body, Bytes};
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use chrono::{DateTime, Duration, Utc};
use glycotrack_core::clock::ManualClock;
use glycotrack_core::domain::UserId;
use glycotrack_core::persistence::{MemoryStore, Store};
use glycotrack_server::auth::Credentials;
use glycotrack_server::config::HashParams;
use glycotrack_server::AppState;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

pub const PASSWORD: &str = "s3cret-pass";

/// Cheap Argon2 costs so suites can register many users.
pub const TEST_HASH: HashParams = HashParams {
    memory_kib: 64,
    iterations: 1,
    parallelism: 1,
};

pub fn start_time() -> DateTime<Utc> {
    "2025-01-15T12:00:00Z".parse().unwrap()
}

pub struct TestApp {
    pub router: Router,
    pub store: Arc<dyn Store>,
    pub clock: Arc<ManualClock>,
}

#[derive(Debug)]
pub struct Resp {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub raw: Bytes,
    pub body: Value,
}

impl Resp {
    /// Asserts the status and that the body matches the named schema
    /// definition. Returns the body.
    #[track_caller]
    pub fn expect(&self, status: StatusCode, schema: &str) -> &Value {
        assert_eq!(self.status, status, "unexpected status; body: {}", self.body);
        assert_schema(schema, &self.body);
        &self.body
    }

    /// Asserts an error envelope with `status` and `code`.
    #[track_caller]
    pub fn expect_error(&self, status: StatusCode, code: &str) -> &Value {
        self.expect(status, "Error");
        assert_eq!(self.body["code"], code, "body: {}", self.body);
        assert_eq!(self.body["status"], status.as_u16());
        &self.body
    }

    pub fn detail_codes(&self) -> Vec<String> {
        self.body["details"]
            .as_array()
            .map(|d| d.iter().map(|v| v["code"].as_str().unwrap().to_string()).collect())
            .unwrap_or_default()
    }
}

fn schema_doc() -> &'static Value {
    static DOC: OnceLock<Value> = OnceLock::new();
    DOC.get_or_init(|| {
        serde_json::from_str(include_str!("../../schemas/api.schema.json")).expect("schema document parses")
    })
}

fn validator(name: &str) -> Arc<jsonschema::Validator> {
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<jsonschema::Validator>>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache
        .entry(name.to_string())
        .or_insert_with(|| {
            let mut doc = schema_doc().clone();
            assert!(doc["$defs"].get(name).is_some(), "no schema definition {name}");
            doc["$ref"] = json!(format!("#/$defs/{name}"));
            Arc::new(jsonschema::validator_for(&doc).expect("schema compiles"))
        })
        .clone()
}

#[track_caller]
pub fn assert_schema(name: &str, value: &Value) {
    let errors: Vec<String> = validator(name)
        .iter_errors(value)
        .map(|e| format!("{e} at {}", e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{name} schema violations: {errors:?}\nbody: {value}");
}

impl TestApp {
    pub fn new() -> Self {
        Self::with_store(Arc::new(MemoryStore::new()))
    }

    pub fn with_store(store: Arc<dyn Store>) -> Self {
        let clock = Arc::new(ManualClock::new(start_time()));
        let state = AppState::new(store.clone(), clock.clone(), Credentials::new(TEST_HASH), Duration::hours(24));
        TestApp {
            router: glycotrack_server::app(state),
            store,
            clock,
        }
    }

    pub async fn send(&self, req: Request<Body>) -> Resp {
        let res = self.router.clone().oneshot(req).await.expect("router is infallible");
        let status = res.status();
        let headers = res.headers().clone();
        let raw = res.into_body().collect().await.expect("body collects").to_bytes();
        let body = if raw.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&raw).unwrap_or_else(|e| panic!("non-JSON body ({e}): {raw:?}"))
        };
        if !status.is_success() {
            assert_schema("Error", &body);
        }
        Resp {
            status,
            headers,
            raw,
            body,
        }
    }

    pub async fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> Resp {
        let mut req = Request::builder().method(method).uri(path);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string()))
                .unwrap(),
            None => req.body(Body::empty()).unwrap(),
        };
        self.send(req).await
    }

    pub async fn get(&self, path: &str, token: Option<&str>) -> Resp {
        self.call(Method::GET, path, token, None).await
    }

    pub async fn post(&self, path: &str, token: Option<&str>, body: Value) -> Resp {
        self.call(Method::POST, path, token, Some(body)).await
    }

    pub async fn put(&self, path: &str, token: Option<&str>, body: Value) -> Resp {
        self.call(Method::PUT, path, token, Some(body)).await
    }

    pub async fn delete(&self, path: &str, token: Option<&str>) -> Resp {
        self.call(Method::DELETE, path, token, None).await
    }

    pub async fn register(&self, role: &str, name: &str, email: &str) -> Value {
        let mut body = json!({"role": role, "display_name": name, "email": email, "password": PASSWORD});
        if role == "patient" {
            body["height_m"] = json!(1.75);
        }
        self.post("/v1/auth/register", None, body)
            .await
            .expect(StatusCode::CREATED, "Profile")
            .clone()
    }

    pub async fn login(&self, email: &str) -> String {
        let r = self
            .post("/v1/auth/login", None, json!({"email": email, "password": PASSWORD}))
            .await;
        r.expect(StatusCode::OK, "Login")["token"].as_str().unwrap().to_string()
    }

    /// Registers and logs in; returns the new user's id and token.
    pub async fn user(&self, role: &str, name: &str) -> (UserId, String) {
        let email = format!("{}@example.org", name.to_lowercase().replace(' ', "."));
        let profile = self.register(role, name, &email).await;
        let token = self.login(&email).await;
        (UserId(profile["id"].as_u64().unwrap()), token)
    }

    pub async fn link(&self, patient_token: &str, supervisor: UserId) {
        self.post("/v1/me/supervisors", Some(patient_token), json!({"supervisor_id": supervisor.0}))
            .await
            .expect(StatusCode::CREATED, "Link");
    }
}

/// A valid creation body for each record kind, timestamped `at`.
pub fn sample_body(kind: &str, at: &str) -> Value {
    match kind {
        "glucose" => json!({"taken_at": at, "value": 100, "unit": "mg/dL", "meal": "breakfast", "relation": "before"}),
        "insulin" => json!({"taken_at": at, "units": 4.5, "insulin_kind": "rapid", "meal": "breakfast", "relation": "before"}),
        "carbs" => json!({"taken_at": at, "grams": 45, "meal": "breakfast", "relation": "before"}),
        "medication" => json!({"taken_at": at, "name": "Metformin", "dose": "850 mg"}),
        "activity" => json!({"performed_at": at, "intensity": "moderate", "duration_min": 30}),
        "weight" => json!({"measured_at": at, "value": 70, "unit": "kg"}),
        "blood_pressure" => json!({"measured_at": at, "systolic": 120, "diastolic": 80}),
        other => panic!("unknown kind {other}"),
    }
}

/// A body for `kind` that breaks a value bound.
pub fn invalid_body(kind: &str, at: &str) -> Value {
    let mut b = sample_body(kind, at);
    match kind {
        "glucose" => b["value"] = json!(5),
        "insulin" => b["units"] = json!(0),
        "carbs" => b["grams"] = json!(1001),
        "medication" => b["name"] = json!(""),
        "activity" => b["duration_min"] = json!(0),
        "weight" => b["value"] = json!(0.5),
        "blood_pressure" => b["diastolic"] = json!(130),
        _ => unreachable!(),
    }
    b
}

pub const KINDS: [&str; 7] = ["glucose", "insulin", "carbs", "medication", "activity", "weight", "blood_pressure"];
