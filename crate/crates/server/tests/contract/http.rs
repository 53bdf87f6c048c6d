use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use chrono::Duration;
use crate::common::{invalid_body, sample_body, TestApp, KINDS, PASSWORD};
use glycotrack_core::analytics::{PatientAnalytics, Window};
use glycotrack_core::domain::RecordKind;
use glycotrack_core::units::GlucoseUnit;
use serde_json::json;

const AT: &str = "2025-01-14T08:00:00Z";

pub async fn health_and_unknown_routes() {
    let app = TestApp::new();
    app.get("/v1/health", None).await.expect(StatusCode::OK, "Health");
    app.get("/v1/nope", None).await.expect_error(StatusCode::NOT_FOUND, "not_found");
    app.get("/elsewhere", None).await.expect_error(StatusCode::NOT_FOUND, "not_found");
    app.delete("/v1/health", None)
        .await
        .expect_error(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed");
}

pub async fn registration_defaults_and_errors() {
    let app = TestApp::new();
    let p = app.register("patient", "Pat", "Pat@Example.org").await;
    assert_eq!(p["role"], "patient");
    assert_eq!(p["email"], "pat@example.org");
    assert_eq!(p["units"], json!({"glucose": "mg/dL", "weight": "kg"}));
    assert_eq!(p["language"], "en");
    assert_eq!(p["targets"]["glucose_low"], 70.0);
    assert_eq!(p["targets"]["glucose_high"], 180.0);

    let s = app.register("supervisor", "Sup", "sup@example.org").await;
    assert_eq!(s["targets"], json!(null));

    let dup = json!({"role": "patient", "display_name": "Other", "email": "pat@example.org", "password": PASSWORD});
    app.post("/v1/auth/register", None, dup)
        .await
        .expect_error(StatusCode::CONFLICT, "email_taken");

    let weak = json!({"role": "patient", "display_name": "W", "email": "w@example.org", "password": "1234567"});
    let r = app.post("/v1/auth/register", None, weak).await;
    r.expect_error(StatusCode::UNPROCESSABLE_ENTITY, "validation");
    assert_eq!(r.detail_codes(), ["password.too_short"]);

    let eight = json!({"role": "patient", "display_name": "W", "email": "w@example.org", "password": "12345678"});
    app.post("/v1/auth/register", None, eight).await.expect(StatusCode::CREATED, "Profile");

    let bad_email = json!({"role": "patient", "display_name": "X", "email": "nope", "password": PASSWORD});
    let r = app.post("/v1/auth/register", None, bad_email).await;
    assert_eq!(r.detail_codes(), ["profile.email_invalid"]);
}

pub async fn login_logout_lifecycle() {
    let app = TestApp::new();
    let (_, token) = app.user("patient", "Pat").await;
    app.get("/v1/me", Some(&token)).await.expect(StatusCode::OK, "Profile");
    app.get("/v1/me", None).await.expect_error(StatusCode::UNAUTHORIZED, "unauthenticated");
    app.get("/v1/me", Some("deadbeef"))
        .await
        .expect_error(StatusCode::UNAUTHORIZED, "invalid_token");

    let r = app.call(Method::POST, "/v1/auth/logout", Some(&token), None).await;
    assert_eq!(r.status, StatusCode::NO_CONTENT);
    let r = app.get("/v1/me", Some(&token)).await;
    r.expect_error(StatusCode::UNAUTHORIZED, "invalid_token");
    assert_eq!(r.headers["www-authenticate"], "Bearer");
}

pub async fn bad_credentials_are_indistinguishable() {
    let app = TestApp::new();
    app.register("patient", "Pat", "pat@example.org").await;
    let wrong_pw = app
        .post("/v1/auth/login", None, json!({"email": "pat@example.org", "password": "wrong-password"}))
        .await;
    let unknown = app
        .post("/v1/auth/login", None, json!({"email": "ghost@example.org", "password": "wrong-password"}))
        .await;
    wrong_pw.expect_error(StatusCode::UNAUTHORIZED, "invalid_credentials");
    assert_eq!(wrong_pw.status, unknown.status);
    assert_eq!(wrong_pw.raw, unknown.raw);
}

pub async fn tokens_expire_after_ttl() {
    let app = TestApp::new();
    let (_, token) = app.user("patient", "Pat").await;
    app.clock.advance(Duration::hours(24) - Duration::seconds(1));
    app.get("/v1/me", Some(&token)).await.expect(StatusCode::OK, "Profile");
    app.clock.advance(Duration::seconds(1));
    app.get("/v1/me", Some(&token))
        .await
        .expect_error(StatusCode::UNAUTHORIZED, "invalid_token");
}

pub async fn crud_for_every_kind() {
    let app = TestApp::new();
    let (pid, token) = app.user("patient", "Pat").await;
    let t = Some(token.as_str());
    for kind in KINDS {
        let base = format!("/v1/patients/{}/records/{kind}", pid.0);
        let created = app.post(&base, t, sample_body(kind, AT)).await;
        let created = created.expect(StatusCode::CREATED, "Record").clone();
        assert_eq!(created["kind"], kind);
        let id = created["id"].as_u64().unwrap();

        let list = app.get(&base, t).await;
        let list = list.expect(StatusCode::OK, "RecordList");
        assert_eq!(list.as_array().unwrap().len(), 1);
        assert_eq!(list[0], created);

        let one = format!("{base}/{id}");
        assert_eq!(app.get(&one, t).await.expect(StatusCode::OK, "Record"), &created);

        let mut changed = sample_body(kind, "2025-01-14T09:30:00Z");
        changed["note"] = json!("edited");
        let updated = app.put(&one, t, changed).await;
        let updated = updated.expect(StatusCode::OK, "Record");
        assert_eq!(updated["id"], id);
        assert_eq!(updated["note"], "edited");

        let r = app.delete(&one, t).await;
        assert_eq!(r.status, StatusCode::NO_CONTENT);
        app.get(&one, t).await.expect_error(StatusCode::NOT_FOUND, "not_found");
        app.delete(&one, t).await.expect_error(StatusCode::NOT_FOUND, "not_found");
    }
}

pub async fn validation_failures_are_422_and_store_unchanged() {
    let app = TestApp::new();
    let (pid, token) = app.user("patient", "Pat").await;
    let t = Some(token.as_str());
    for kind in KINDS {
        let base = format!("/v1/patients/{}/records/{kind}", pid.0);
        app.post(&base, t, invalid_body(kind, AT))
            .await
            .expect_error(StatusCode::UNPROCESSABLE_ENTITY, "validation");
        let future = app.post(&base, t, sample_body(kind, "2025-01-16T00:00:00Z")).await;
        future.expect_error(StatusCode::UNPROCESSABLE_ENTITY, "validation");
        assert_eq!(future.detail_codes(), ["timestamp.in_future"]);
        let mut extra = sample_body(kind, AT);
        extra["surprise"] = json!(1);
        app.post(&base, t, extra)
            .await
            .expect_error(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body");
    }
    assert_eq!(app.store.snapshot().unwrap().records.len(), 0);

    let base = format!("/v1/patients/{}/records/glucose", pid.0);
    let garbled = Request::builder()
        .method(Method::POST)
        .uri(&base)
        .header("authorization", format!("Bearer {token}"))
        .header("content-type", "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    app.send(garbled)
        .await
        .expect_error(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body");
    let no_type = Request::builder()
        .method(Method::POST)
        .uri(&base)
        .header("authorization", format!("Bearer {token}"))
        .body(Body::from("{}"))
        .unwrap();
    app.send(no_type)
        .await
        .expect_error(StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_media_type");

    let half_slot = json!({"taken_at": AT, "value": 100, "relation": "after"});
    let r = app.post(&base, t, half_slot).await;
    assert_eq!(r.detail_codes(), ["slot.relation_without_meal"]);
    let bad_bp = json!({"measured_at": AT, "systolic": 80, "diastolic": 90});
    let r = app
        .post(&format!("/v1/patients/{}/records/blood_pressure", pid.0), t, bad_bp)
        .await;
    assert_eq!(r.detail_codes(), ["bp.systolic_not_greater"]);
}

pub async fn unknown_ids_and_kinds_are_404() {
    let app = TestApp::new();
    let (pid, token) = app.user("patient", "Pat").await;
    let t = Some(token.as_str());
    let base = format!("/v1/patients/{}/records", pid.0);
    let g = app.post(&format!("{base}/glucose"), t, sample_body("glucose", AT)).await;
    let gid = g.body["id"].as_u64().unwrap();
    app.get(&format!("{base}/glucose/999"), t).await.expect_error(StatusCode::NOT_FOUND, "not_found");
    app.get(&format!("{base}/glucose/abc"), t).await.expect_error(StatusCode::NOT_FOUND, "not_found");
    app.get(&format!("{base}/weight/{gid}"), t).await.expect_error(StatusCode::NOT_FOUND, "not_found");
    app.get(&format!("{base}/sleep"), t).await.expect_error(StatusCode::NOT_FOUND, "not_found");
    app.put(&format!("{base}/glucose/999"), t, sample_body("glucose", AT))
        .await
        .expect_error(StatusCode::NOT_FOUND, "not_found");
}

pub async fn list_window_is_half_open_and_validated() {
    let app = TestApp::new();
    let (pid, token) = app.user("patient", "Pat").await;
    let t = Some(token.as_str());
    let base = format!("/v1/patients/{}/records/glucose", pid.0);
    for at in ["2025-01-10T00:00:00Z", "2025-01-11T00:00:00Z", "2025-01-12T00:00:00Z"] {
        app.post(&base, t, sample_body("glucose", at)).await.expect(StatusCode::CREATED, "Record");
    }
    let r = app
        .get(&format!("{base}?from=2025-01-10T00:00:00Z&to=2025-01-12T00:00:00Z"), t)
        .await;
    let times: Vec<&str> = r.expect(StatusCode::OK, "RecordList").as_array().unwrap()
        .iter()
        .map(|v| v["taken_at"].as_str().unwrap())
        .collect();
    assert_eq!(times, ["2025-01-10T00:00:00Z", "2025-01-11T00:00:00Z"]);

    let r = app
        .get(&format!("{base}?from=2025-01-12T00:00:00Z&to=2025-01-10T00:00:00Z"), t)
        .await;
    r.expect_error(StatusCode::UNPROCESSABLE_ENTITY, "validation");
    assert_eq!(r.detail_codes(), ["window.inverted"]);
    let r = app.get(&format!("{base}?from=yesterday"), t).await;
    assert_eq!(r.detail_codes(), ["query.invalid"]);
}

pub async fn values_follow_the_requesters_units() {
    let app = TestApp::new();
    let (pid, ptoken) = app.user("patient", "Pat").await;
    let (sid, stoken) = app.user("supervisor", "Doc").await;
    app.link(&ptoken, sid).await;
    app.put("/v1/me/settings/units", Some(&stoken), json!({"glucose": "mmol/L", "weight": "lbs"}))
        .await
        .expect(StatusCode::OK, "Settings");

    let base = format!("/v1/patients/{}/records", pid.0);
    app.post(&format!("{base}/glucose"), Some(&ptoken), json!({"taken_at": AT, "value": 100}))
        .await
        .expect(StatusCode::CREATED, "Record");
    app.post(&format!("{base}/weight"), Some(&ptoken), json!({"measured_at": AT, "value": 100}))
        .await
        .expect(StatusCode::CREATED, "Record");

    let list = app.get(&format!("{base}/glucose"), Some(&stoken)).await;
    let g = &list.expect(StatusCode::OK, "RecordList")[0];
    assert_eq!(g["unit"], "mmol/L");
    let expected = 100.0 / 18.016;
    assert!((g["value"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!((g["value"].as_f64().unwrap() - 5.551).abs() < 1e-3);

    let list = app.get(&format!("{base}/weight"), Some(&stoken)).await;
    let w = &list.expect(StatusCode::OK, "RecordList")[0];
    assert_eq!(w["unit"], "lbs");
    assert!((w["value"].as_f64().unwrap() - 220.462).abs() < 1e-9);

    // The patient's own view and the stored value are unchanged.
    let list = app.get(&format!("{base}/glucose"), Some(&ptoken)).await;
    assert_eq!(list.body[0]["value"], 100.0);
    assert_eq!(list.body[0]["unit"], "mg/dL");
}

pub async fn supervision_rules_over_http() {
    let app = TestApp::new();
    let (pid, ptoken) = app.user("patient", "Pat").await;
    let (sid, stoken) = app.user("supervisor", "Doc").await;
    let (_, otoken) = app.user("supervisor", "Other Doc").await;
    let base = format!("/v1/patients/{}/records/glucose", pid.0);
    let g = app.post(&base, Some(&ptoken), sample_body("glucose", AT)).await;
    let one = format!("{base}/{}", g.body["id"]);

    app.get(&base, Some(&stoken)).await.expect_error(StatusCode::FORBIDDEN, "no_link");
    app.get(&base, None).await.expect_error(StatusCode::UNAUTHORIZED, "unauthenticated");

    app.link(&ptoken, sid).await;
    app.get(&base, Some(&stoken)).await.expect(StatusCode::OK, "RecordList");
    app.get(&one, Some(&stoken)).await.expect(StatusCode::OK, "Record");
    app.post(&base, Some(&stoken), sample_body("glucose", AT))
        .await
        .expect_error(StatusCode::FORBIDDEN, "supervisor_read_only");
    app.put(&one, Some(&stoken), sample_body("glucose", AT))
        .await
        .expect_error(StatusCode::FORBIDDEN, "supervisor_read_only");
    app.delete(&one, Some(&stoken))
        .await
        .expect_error(StatusCode::FORBIDDEN, "supervisor_read_only");
    app.get(&base, Some(&otoken)).await.expect_error(StatusCode::FORBIDDEN, "no_link");
    // An unknown patient id looks like an unlinked one.
    app.get("/v1/patients/9999/records/glucose", Some(&otoken))
        .await
        .expect_error(StatusCode::FORBIDDEN, "no_link");

    let profile = app.get(&format!("/v1/patients/{}/profile", pid.0), Some(&stoken)).await;
    assert_eq!(profile.expect(StatusCode::OK, "Profile")["display_name"], "Pat");

    let r = app.delete(&format!("/v1/me/supervised/{}", pid.0), Some(&stoken)).await;
    assert_eq!(r.status, StatusCode::NO_CONTENT);
    app.get(&base, Some(&stoken)).await.expect_error(StatusCode::FORBIDDEN, "no_link");
    assert_eq!(app.store.snapshot().unwrap().records.len(), 1);
}

pub async fn supervisor_management() {
    let app = TestApp::new();
    let (pid, ptoken) = app.user("patient", "Pat").await;
    let (sid, stoken) = app.user("supervisor", "Ana Perez").await;
    app.user("supervisor", "Juana Diaz").await;
    let pt = Some(ptoken.as_str());

    let hits = app.get("/v1/supervisors?q=ana", pt).await;
    let hits = hits.expect(StatusCode::OK, "UserSummaryList");
    let names: Vec<&str> = hits.as_array().unwrap().iter().map(|h| h["display_name"].as_str().unwrap()).collect();
    assert_eq!(names, ["Ana Perez", "Juana Diaz"]);
    let r = app.get("/v1/supervisors?q=a", pt).await;
    assert_eq!(r.detail_codes(), ["search.query_too_short"]);

    app.link(&ptoken, sid).await;
    app.post("/v1/me/supervisors", pt, json!({"supervisor_id": sid.0}))
        .await
        .expect_error(StatusCode::CONFLICT, "link_exists");
    app.post("/v1/me/supervisors", Some(&stoken), json!({"supervisor_id": sid.0}))
        .await
        .expect_error(StatusCode::UNPROCESSABLE_ENTITY, "validation");
    app.post("/v1/me/supervisors", pt, json!({"supervisor_id": 999}))
        .await
        .expect_error(StatusCode::NOT_FOUND, "not_found");

    let mine = app.get("/v1/me/supervisors", pt).await;
    assert_eq!(mine.expect(StatusCode::OK, "UserSummaryList")[0]["id"], sid.0);
    let theirs = app.get("/v1/me/supervised", Some(&stoken)).await;
    assert_eq!(theirs.expect(StatusCode::OK, "UserSummaryList")[0]["id"], pid.0);

    let r = app.delete(&format!("/v1/me/supervisors/{}", sid.0), pt).await;
    assert_eq!(r.status, StatusCode::NO_CONTENT);
    app.delete(&format!("/v1/me/supervisors/{}", sid.0), pt)
        .await
        .expect_error(StatusCode::NOT_FOUND, "not_found");
    let mine = app.get("/v1/me/supervisors", pt).await;
    assert_eq!(mine.body, json!([]));
    // Re-association after revocation is allowed.
    app.link(&ptoken, sid).await;
}

pub async fn stats_match_direct_analytics() {
    let app = TestApp::new();
    let (pid, token) = app.user("patient", "Pat").await;
    let t = Some(token.as_str());
    let base = format!("/v1/patients/{}/records", pid.0);
    let readings = [(55, "2025-01-13T07:00:00Z"), (120, "2025-01-13T09:00:00Z"), (250, "2025-01-14T13:00:00Z")];
    for (v, at) in readings {
        app.post(&format!("{base}/glucose"), t, json!({"taken_at": at, "value": v, "meal": "lunch", "relation": "after"}))
            .await
            .expect(StatusCode::CREATED, "Record");
    }
    app.post(&format!("{base}/weight"), t, json!({"measured_at": AT, "value": 70}))
        .await
        .expect(StatusCode::CREATED, "Record");
    app.post(&format!("{base}/blood_pressure"), t, json!({"measured_at": AT, "systolic": 135, "diastolic": 85}))
        .await
        .expect(StatusCode::CREATED, "Record");

    let (from, to) = ("2025-01-01T00:00:00Z", "2025-01-15T00:00:00Z");
    let window = Window::new(from.parse().unwrap(), to.parse().unwrap()).unwrap();
    let analytics = PatientAnalytics::new(app.store.as_ref());
    let q = format!("from={from}&to={to}");

    let r = app.get(&format!("/v1/patients/{}/stats/glucose?{q}", pid.0), t).await;
    let body = r.expect(StatusCode::OK, "GlucoseSeries");
    let (series, targets) = analytics.glucose_series(pid, &window, GlucoseUnit::MgPerDl).unwrap();
    assert_eq!(body["stats"], serde_json::to_value(&series.stats).unwrap());
    assert_eq!(body["points"].as_array().unwrap().len(), 3);
    for (p, s) in body["points"].as_array().unwrap().iter().zip(&series.points) {
        assert_eq!(p["value"], s.value);
        assert_eq!(p["classification"], serde_json::to_value(s.classification).unwrap());
    }
    assert_eq!(body["targets"]["glucose_low"], targets.glucose_low);

    let r = app.get(&format!("/v1/patients/{}/stats/weight?{q}", pid.0), t).await;
    let body = r.expect(StatusCode::OK, "WeightSeries");
    let (ws, _) = analytics.weight_bmi_series(pid, &window).unwrap();
    assert_eq!(body["stats"], serde_json::to_value(&ws.stats).unwrap());
    assert_eq!(body["points"][0]["bmi"], ws.points[0].bmi.unwrap());

    let r = app.get(&format!("/v1/patients/{}/stats/blood_pressure?{q}", pid.0), t).await;
    let body = r.expect(StatusCode::OK, "BloodPressureSeries");
    let (bs, _) = analytics.blood_pressure_series(pid, &window).unwrap();
    assert_eq!(body["systolic"], serde_json::to_value(&bs.systolic).unwrap());
    assert_eq!(body["points"][0]["classification"], "elevated");

    let r = app
        .get(&format!("/v1/patients/{}/stats/weekly?week_start=2025-01-13", pid.0), t)
        .await;
    let body = r.expect(StatusCode::OK, "Weekly");
    let weekly = analytics
        .weekly_summary(pid, "2025-01-13".parse().unwrap(), 0)
        .unwrap();
    for (d, wd) in body["days"].as_array().unwrap().iter().zip(&weekly.days) {
        for (c, wc) in d["cells"].as_array().unwrap().iter().zip(&wd.cells) {
            assert_eq!(c["glucose_after"], serde_json::to_value(wc.glucose_after).unwrap());
            assert_eq!(c["glucose_before"], serde_json::to_value(wc.glucose_before).unwrap());
        }
    }
    assert_eq!(body["days"][0]["cells"][1]["glucose_after"], 87.5);

    let r = app
        .get(&format!("/v1/patients/{}/stats/weekly?week_start=2025-01-14", pid.0), t)
        .await;
    assert_eq!(r.detail_codes(), ["week.start_not_monday"]);
    let r = app
        .get(&format!("/v1/patients/{}/stats/glucose?from={to}&to={from}", pid.0), t)
        .await;
    assert_eq!(r.detail_codes(), ["window.inverted"]);
}

pub async fn weekly_summary_for_linked_supervisor_only() {
    let app = TestApp::new();
    let (pid, ptoken) = app.user("patient", "Pat").await;
    let (sid, stoken) = app.user("supervisor", "Doc").await;
    let path = format!("/v1/patients/{}/stats/weekly?week_start=2025-01-13&tz_offset_min=-180", pid.0);
    app.get(&path, Some(&stoken)).await.expect_error(StatusCode::FORBIDDEN, "no_link");
    app.link(&ptoken, sid).await;
    let r = app.get(&path, Some(&stoken)).await;
    let body = r.expect(StatusCode::OK, "Weekly");
    assert_eq!(body["days"].as_array().unwrap().len(), 7);
    for d in body["days"].as_array().unwrap() {
        assert_eq!(d["cells"].as_array().unwrap().len(), 4);
    }
    // Default week is the current one (2025-01-15 is a Wednesday).
    let r = app.get(&format!("/v1/patients/{}/stats/weekly", pid.0), Some(&ptoken)).await;
    assert_eq!(r.expect(StatusCode::OK, "Weekly")["week_start"], "2025-01-13");
}

pub async fn stats_default_window_is_last_30_days() {
    let app = TestApp::new();
    let (pid, token) = app.user("patient", "Pat").await;
    let t = Some(token.as_str());
    let base = format!("/v1/patients/{}/records/glucose", pid.0);
    for at in ["2024-12-01T00:00:00Z", "2025-01-01T00:00:00Z", "2025-01-15T12:00:00Z"] {
        app.post(&base, t, sample_body("glucose", at)).await.expect(StatusCode::CREATED, "Record");
    }
    let r = app.get(&format!("/v1/patients/{}/stats/glucose", pid.0), t).await;
    let body = r.expect(StatusCode::OK, "GlucoseSeries");
    assert_eq!(body["stats"]["count"], 2);
    assert_eq!(body["window"]["to"], "2025-01-15T12:00:01Z");
}

pub async fn settings_apply_on_next_request() {
    let app = TestApp::new();
    let (pid, token) = app.user("patient", "Pat").await;
    let t = Some(token.as_str());
    let base = format!("/v1/patients/{}/records/glucose", pid.0);
    for v in [75, 100, 150] {
        app.post(&base, t, json!({"taken_at": AT, "value": v})).await.expect(StatusCode::CREATED, "Record");
    }
    let series = format!("/v1/patients/{}/stats/glucose", pid.0);
    let classes = |body: &serde_json::Value| -> Vec<String> {
        body["points"].as_array().unwrap().iter().map(|p| p["classification"].as_str().unwrap().to_string()).collect()
    };
    let before = app.get(&series, t).await;
    assert_eq!(classes(&before.body), ["in_range", "in_range", "in_range"]);

    let s = app
        .put("/v1/me/settings/targets", t, json!({"glucose_low": 80, "glucose_high": 140}))
        .await;
    assert_eq!(s.expect(StatusCode::OK, "Settings")["targets"]["glucose_low"], 80.0);
    let after = app.get(&series, t).await;
    assert_eq!(classes(&after.body), ["below", "in_range", "above"]);
    assert_eq!(after.body["targets"]["glucose_high"], 140.0);
    assert!((after.body["stats"]["pct_in_range"].as_f64().unwrap() - 100.0 / 3.0).abs() < 1e-9);

    let r = app
        .put("/v1/me/settings/targets", t, json!({"glucose_low": 150, "glucose_high": 140}))
        .await;
    r.expect_error(StatusCode::UNPROCESSABLE_ENTITY, "validation");
    assert_eq!(r.detail_codes(), ["targets.glucose_low_not_below_high"]);

    app.put("/v1/me/settings/units", t, json!({"glucose": "mmol/L"})).await.expect(StatusCode::OK, "Settings");
    let mmol = app.get(&series, t).await;
    assert_eq!(mmol.body["unit"], "mmol/L");
    assert_eq!(classes(&mmol.body), ["below", "in_range", "above"]);
    assert!((mmol.body["points"][1]["value"].as_f64().unwrap() - 100.0 / 18.016).abs() < 1e-12);
    assert!((mmol.body["targets"]["glucose_low"].as_f64().unwrap() - 80.0 / 18.016).abs() < 1e-12);

    app.put("/v1/me/settings/language", t, json!({"language": "es"})).await.expect(StatusCode::OK, "Settings");
    let r = app.get("/v1/patients/1/records/sleep", t).await;
    r.expect_error(StatusCode::NOT_FOUND, "not_found");
    assert_eq!(r.body["message"], "El recurso solicitado no existe.");
    assert_eq!(r.headers["content-language"], "es");

    let r = app.put("/v1/me/settings/height", t, json!({"height_m": 5.0})).await;
    assert_eq!(r.detail_codes(), ["profile.height_out_of_bounds"]);
    let s = app.get("/v1/me/settings", t).await;
    assert_eq!(s.expect(StatusCode::OK, "Settings")["height_m"], 1.75);
}

pub async fn supervisors_have_no_patient_settings() {
    let app = TestApp::new();
    let (_, token) = app.user("supervisor", "Doc").await;
    app.put("/v1/me/settings/targets", Some(&token), json!({"glucose_low": 80}))
        .await
        .expect_error(StatusCode::FORBIDDEN, "patient_only");
    app.put("/v1/me/settings/height", Some(&token), json!({"height_m": 1.7}))
        .await
        .expect_error(StatusCode::FORBIDDEN, "patient_only");
}

pub async fn error_language_without_profile_uses_accept_language() {
    let app = TestApp::new();
    let req = Request::builder()
        .uri("/v1/me")
        .header("accept-language", "es-AR,es;q=0.9")
        .body(Body::empty())
        .unwrap();
    let r = app.send(req).await;
    r.expect_error(StatusCode::UNAUTHORIZED, "unauthenticated");
    assert_eq!(r.body["message"], "Se requiere autenticación.");
    let r = app.get("/v1/me", None).await;
    assert_eq!(r.body["message"], "Authentication is required.");
}

pub async fn content_is_localized_with_fallback() {
    let app = TestApp::new();
    let es = app.get("/v1/content/faq?lang=es", None).await;
    let es = es.expect(StatusCode::OK, "Document");
    assert_eq!(es["language"], "es");
    assert!(es["title"].as_str().unwrap().contains("Preguntas"));
    let fallback = app.get("/v1/content/faq?lang=fr", None).await;
    assert_eq!(fallback.expect(StatusCode::OK, "Document")["language"], "en");
    let terms = app.get("/v1/content/terms?lang=en", None).await;
    let terms = terms.expect(StatusCode::OK, "Document");
    assert!(!terms["body"].as_str().unwrap().is_empty());
    assert!(!terms["version"].as_str().unwrap().is_empty());
    let req = Request::builder()
        .uri("/v1/content/terms")
        .header("accept-language", "es")
        .body(Body::empty())
        .unwrap();
    assert_eq!(app.send(req).await.body["language"], "es");
    app.get("/v1/content/recipes", None).await.expect_error(StatusCode::NOT_FOUND, "not_found");
}

pub async fn unit_flips_never_touch_stored_data() {
    let app = TestApp::new();
    let (pid, token) = app.user("patient", "Pat").await;
    let t = Some(token.as_str());
    let base = format!("/v1/patients/{}/records", pid.0);
    app.post(&format!("{base}/glucose"), t, json!({"taken_at": AT, "value": 123.4})).await;
    app.post(&format!("{base}/weight"), t, json!({"measured_at": AT, "value": 81.3})).await;
    let canonical = app.store.snapshot().unwrap().records;
    let flips = [("mmol/L", "lbs"), ("mg/dL", "lbs"), ("mmol/L", "kg"), ("mg/dL", "kg")];
    for (g, w) in flips {
        app.put("/v1/me/settings/units", t, json!({"glucose": g, "weight": w})).await;
        assert_eq!(app.store.snapshot().unwrap().records, canonical);
        let gv = app.get(&format!("{base}/glucose"), t).await.body[0]["value"].as_f64().unwrap();
        let wv = app.get(&format!("{base}/weight"), t).await.body[0]["value"].as_f64().unwrap();
        let g_expected = if g == "mmol/L" { 123.4 / 18.016 } else { 123.4 };
        let w_expected = if w == "lbs" { 81.3 * 2.20462 } else { 81.3 };
        assert_eq!(gv, g_expected);
        assert_eq!(wv, w_expected);
    }
    let kinds: Vec<RecordKind> = canonical.iter().map(|r| r.record.kind()).collect();
    assert_eq!(kinds, [RecordKind::Glucose, RecordKind::Weight]);
}
