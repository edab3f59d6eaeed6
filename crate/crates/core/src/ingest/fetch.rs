//! Raw CSV download from a user-configured endpoint.
//!
//! No provider is built in. The endpoint is a URL template carrying the
//! `{symbol}`, `{start}` and `{end}` placeholders; dates are substituted in
//! ISO-8601 form.

use std::thread;
use std::time::Duration;

use rayon::prelude::*;

use super::IngestError;
use crate::dates::{format_date, Date};

const PLACEHOLDERS: [&str; 3] = ["{symbol}", "{start}", "{end}"];

#[derive(Debug, Clone)]
pub struct FetchOptions {
    /// Attempts after the first one for transient failures.
    pub retries: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
    pub timeout: Duration,
}

impl Default for FetchOptions {
    fn default() -> Self {
        Self {
            retries: 3,
            initial_backoff: Duration::from_millis(250),
            max_backoff: Duration::from_secs(4),
            timeout: Duration::from_secs(30),
        }
    }
}

pub fn render_url(template: &str, symbol: &str, start: Date, end: Date) -> Result<String, IngestError> {
    for p in PLACEHOLDERS {
        if !template.contains(p) {
            return Err(IngestError::Template(format!("missing placeholder {p}")));
        }
    }
    let encoded: String = url::form_urlencoded::byte_serialize(symbol.as_bytes()).collect();
    let rendered = template
        .replace("{symbol}", &encoded)
        .replace("{start}", &format_date(start))
        .replace("{end}", &format_date(end));
    let parsed = url::Url::parse(&rendered).map_err(|e| IngestError::Template(format!("{rendered}: {e}")))?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(IngestError::Template(format!("unsupported scheme {}", parsed.scheme())));
    }
    Ok(rendered)
}

/// Download the CSV body for one symbol, retrying transient failures
/// (transport errors, 429, 5xx) with capped exponential backoff.
pub fn fetch_history(
    template: &str,
    symbol: &str,
    start: Date,
    end: Date,
    opts: &FetchOptions,
) -> Result<String, IngestError> {
    let url = render_url(template, symbol, start, end)?;
    let agent = ureq::AgentBuilder::new().timeout(opts.timeout).build();
    let mut backoff = opts.initial_backoff;
    let mut attempt = 0;
    loop {
        let err = match agent.get(&url).call() {
            Ok(resp) => {
                return resp.into_string().map_err(|e| IngestError::Network(e.to_string()));
            }
            Err(ureq::Error::Status(code, _)) => {
                if !(code == 429 || (500..600).contains(&code)) {
                    return Err(IngestError::HttpStatus(code));
                }
                IngestError::HttpStatus(code)
            }
            Err(ureq::Error::Transport(t)) => IngestError::Network(t.to_string()),
        };
        if attempt >= opts.retries {
            return Err(err);
        }
        log::warn!("fetch {symbol}: {err}; retrying in {backoff:?}");
        thread::sleep(backoff);
        backoff = (backoff * 2).min(opts.max_backoff);
        attempt += 1;
    }
}

/// Fetch several symbols with at most `jobs` requests in flight. Results come
/// back in input order.
pub fn fetch_many(
    template: &str,
    symbols: &[String],
    start: Date,
    end: Date,
    opts: &FetchOptions,
    jobs: usize,
) -> Vec<(String, Result<String, IngestError>)> {
    let run = || {
        symbols
            .par_iter()
            .map(|s| (s.clone(), fetch_history(template, s, start, end, opts)))
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dates::parse_date;

    #[test]
    fn substitutes_all_placeholders() {
        let url = render_url(
            "https://example.test/q?s={symbol}&from={start}&to={end}&i=d",
            "PKO",
            parse_date("2021-02-24").unwrap(),
            parse_date("2023-02-23").unwrap(),
        )
        .unwrap();
        assert_eq!(url, "https://example.test/q?s=PKO&from=2021-02-24&to=2023-02-23&i=d");
        assert!(url::Url::parse(&url).is_ok());
    }

    #[test]
    fn missing_placeholder_is_template_error() {
        let d = parse_date("2022-01-01").unwrap();
        let err = render_url("https://example.test/q?from={start}&to={end}", "PKO", d, d).unwrap_err();
        assert!(matches!(err, IngestError::Template(_)));
    }

    #[test]
    fn non_http_scheme_rejected() {
        let d = parse_date("2022-01-01").unwrap();
        assert!(render_url("file:///{symbol}/{start}/{end}", "X", d, d).is_err());
    }
}
