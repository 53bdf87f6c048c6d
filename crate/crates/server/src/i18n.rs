//! Message catalog for API error texts.

use glycotrack_core::domain::Language;

/// Localized human text for an error code. Unknown codes fall back to a
/// generic message for their language.
pub fn message(code: &str, lang: Language) -> &'static str {
    use Language::{En, Es};
    match (code, lang) {
        ("unauthenticated", En) => "Authentication is required.",
        ("unauthenticated", Es) => "Se requiere autenticación.",
        ("invalid_token", En) => "The session is invalid or has expired. Please log in again.",
        ("invalid_token", Es) => "La sesión no es válida o ha expirado. Vuelva a iniciar sesión.",
        ("invalid_credentials", En) => "The email or password is incorrect.",
        ("invalid_credentials", Es) => "El correo electrónico o la contraseña son incorrectos.",
        ("no_link", En) => "You do not have access to this user's data.",
        ("no_link", Es) => "No tiene acceso a los datos de este usuario.",
        ("supervisor_read_only", En) => "Supervisors can view but not modify a patient's data.",
        ("supervisor_read_only", Es) => "Los supervisores pueden ver pero no modificar los datos del paciente.",
        ("not_link_owner", En) => "Only the patient can add a supervisor.",
        ("not_link_owner", Es) => "Solo el paciente puede agregar un supervisor.",
        ("not_link_party", En) => "Only the patient or the supervisor can remove this link.",
        ("not_link_party", Es) => "Solo el paciente o el supervisor pueden eliminar este vínculo.",
        ("patient_only", En) => "This setting is available to patients only.",
        ("patient_only", Es) => "Esta configuración está disponible solo para pacientes.",
        ("not_found", En) => "The requested resource does not exist.",
        ("not_found", Es) => "El recurso solicitado no existe.",
        ("method_not_allowed", En) => "This method is not allowed on this resource.",
        ("method_not_allowed", Es) => "Este método no está permitido para este recurso.",
        ("bad_request", En) => "The request could not be understood.",
        ("bad_request", Es) => "No se pudo interpretar la solicitud.",
        ("validation", En) => "Some values are not valid.",
        ("validation", Es) => "Algunos valores no son válidos.",
        ("invalid_body", En) => "The request body is malformed.",
        ("invalid_body", Es) => "El cuerpo de la solicitud tiene un formato incorrecto.",
        ("email_taken", En) => "An account with this email already exists.",
        ("email_taken", Es) => "Ya existe una cuenta con este correo electrónico.",
        ("link_exists", En) => "This supervisor is already linked.",
        ("link_exists", Es) => "Este supervisor ya está vinculado.",
        ("store_not_empty", En) => "The store already holds data.",
        ("store_not_empty", Es) => "El almacén ya contiene datos.",
        ("payload_too_large", En) => "The request body is too large.",
        ("payload_too_large", Es) => "El cuerpo de la solicitud es demasiado grande.",
        ("unsupported_media_type", En) => "Request bodies must be JSON.",
        ("unsupported_media_type", Es) => "El cuerpo de la solicitud debe ser JSON.",
        ("internal", En) => "An internal error occurred.",
        ("internal", Es) => "Se produjo un error interno.",
        (_, En) => "The request failed.",
        (_, Es) => "La solicitud falló.",
    }
}

/// Best supported language in an `Accept-Language` header, honoring q-values.
pub fn accept_language(header: &str) -> Option<Language> {
    let mut ranked: Vec<(f32, Language)> = header
        .split(',')
        .filter_map(|part| {
            let mut pieces = part.split(';');
            let lang = Language::from_tag(pieces.next()?)?;
            let q = pieces
                .find_map(|p| p.trim().strip_prefix("q="))
                .map_or(Some(1.0), |q| q.trim().parse::<f32>().ok())?;
            (q > 0.0).then_some((q, lang))
        })
        .collect();
    // Stable sort keeps header order among equal weights.
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    ranked.first().map(|&(_, lang)| lang)
}
