use url::Url;

use crate::CoreError;

/// Canonical form used to deduplicate sources.
///
/// Scheme and host are lowercased, the fragment and any trailing slash on
/// the path are dropped, the query string is kept verbatim. Only absolute
/// `http`/`https` urls are accepted.
pub fn normalize_url(raw: &str) -> Result<String, CoreError> {
    let parsed = Url::parse(raw.trim()).map_err(|e| CoreError::InvalidUrl(raw.to_string(), e.to_string()))?;
    let scheme = parsed.scheme();
    if scheme != "http" && scheme != "https" {
        return Err(CoreError::InvalidUrl(raw.to_string(), format!("unsupported scheme {scheme}")));
    }
    let host = parsed
        .host_str()
        .filter(|h| !h.is_empty())
        .ok_or_else(|| CoreError::InvalidUrl(raw.to_string(), "missing host".into()))?
        .to_ascii_lowercase();
    let port = parsed.port().map(|p| format!(":{p}")).unwrap_or_default();
    let path = parsed.path().trim_end_matches('/');
    let query = parsed.query().map(|q| format!("?{q}")).unwrap_or_default();
    Ok(format!("{scheme}://{host}{port}{path}{query}"))
}

/// Host part of an absolute url, lowercased.
pub fn host_of(raw: &str) -> Option<String> {
    Url::parse(raw.trim()).ok()?.host_str().map(str::to_ascii_lowercase)
}
