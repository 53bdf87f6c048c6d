//! HTTP contract scenarios, shared by the `api` test target and the
//! acceptance runner.

#![allow(dead_code)]

use std::future::Future;
use std::pin::Pin;

pub mod http;

pub type Scenario = fn() -> Pin<Box<dyn Future<Output = ()>>>;

macro_rules! scenarios {
    ($($m:ident::$f:ident),* $(,)?) => {
        pub const SCENARIOS: &[(&str, Scenario)] = &[
            $((stringify!($f), || Box::pin($m::$f()))),*
        ];
    };
}

scenarios! {
    http::health_and_unknown_routes,
    http::registration_defaults_and_errors,
    http::login_logout_lifecycle,
    http::bad_credentials_are_indistinguishable,
    http::tokens_expire_after_ttl,
    http::crud_for_every_kind,
    http::validation_failures_are_422_and_store_unchanged,
    http::unknown_ids_and_kinds_are_404,
    http::list_window_is_half_open_and_validated,
    http::values_follow_the_requesters_units,
    http::supervision_rules_over_http,
    http::supervisor_management,
    http::stats_match_direct_analytics,
    http::weekly_summary_for_linked_supervisor_only,
    http::stats_default_window_is_last_30_days,
    http::settings_apply_on_next_request,
    http::supervisors_have_no_patient_settings,
    http::error_language_without_profile_uses_accept_language,
    http::content_is_localized_with_fallback,
    http::unit_flips_never_touch_stored_data,
    authorization::forbidden_exactly_where_the_rule_denies,
}
