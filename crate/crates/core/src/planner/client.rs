use std::time::Duration;

use serde::Serialize;

use super::{plan, region_catalog, PlanError, Rule, StructuredQuery};
use crate::checks;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlannerRequest {
    pub rule: String,
    pub regions: Vec<String>,
    pub functions: Vec<String>,
}

impl PlannerRequest {
    pub fn for_rule(rule: &Rule) -> Self {
        Self {
            rule: rule.text.clone(),
            regions: region_catalog(),
            functions: checks::function_ids().map(str::to_string).collect(),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("timed out")]
    Timeout,
    #[error("invalid response: {0}")]
    InvalidResponse(String),
}

impl ClientError {
    fn retryable(&self) -> bool {
        matches!(self, ClientError::Transport(_) | ClientError::Timeout)
    }
}

/// External planner seam.
pub trait PlannerClient: Send + Sync {
    fn request(&self, req: &PlannerRequest) -> Result<StructuredQuery, ClientError>;
}

/// JSON-over-HTTP planner. The key, if any, is sent as a bearer token.
#[derive(Debug, Clone)]
pub struct HttpPlannerClient {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpPlannerClient {
    pub fn new(endpoint: &str, api_key: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self {
            endpoint: endpoint.to_string(),
            api_key,
            agent,
        }
    }

    /// Credentials from `PLANNER_API_KEY`, default timeout.
    pub fn from_env(endpoint: &str) -> Self {
        let key = std::env::var("PLANNER_API_KEY").ok().filter(|k| !k.is_empty());
        Self::new(endpoint, key, DEFAULT_TIMEOUT)
    }
}

impl PlannerClient for HttpPlannerClient {
    fn request(&self, req: &PlannerRequest) -> Result<StructuredQuery, ClientError> {
        let mut call = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let response = call.send_json(req).map_err(|e| match e {
            ureq::Error::Timeout(_) => ClientError::Timeout,
            ureq::Error::StatusCode(code) => ClientError::InvalidResponse(format!("http status {code}")),
            other => ClientError::Transport(other.to_string()),
        })?;
        response
            .into_body()
            .read_json::<StructuredQuery>()
            .map_err(|e| ClientError::InvalidResponse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub query: Result<StructuredQuery, PlanError>,
    /// Client failures and fallbacks, in order.
    pub diagnostics: Vec<String>,
}

/// Ask the client first (one retry on transport failure), validate its
/// answer, and fall back to the template planner on any failure.
pub fn plan_with_client(rule: &Rule, client: Option<&dyn PlannerClient>) -> PlanResult {
    let Some(client) = client else {
        return PlanResult {
            query: plan(rule),
            diagnostics: Vec::new(),
        };
    };
    let req = PlannerRequest::for_rule(rule);
    let mut diagnostics = Vec::new();
    let mut response = client.request(&req);
    if let Err(e) = &response {
        if e.retryable() {
            diagnostics.push(format!("planner client: {e}; retrying"));
            response = client.request(&req);
        }
    }
    match response {
        Ok(q) => match q.validate() {
            Ok(()) => {
                return PlanResult {
                    query: Ok(q),
                    diagnostics,
                }
            }
            Err(e) => diagnostics.push(format!("planner client answer rejected: {e}")),
        },
        Err(e) => diagnostics.push(format!("planner client: {e}")),
    }
    diagnostics.push("fell back to template planner".to_string());
    PlanResult {
        query: plan(rule),
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    use super::*;
    use crate::planner::{default_rules, Category};

    struct Scripted {
        replies: Mutex<Vec<Result<StructuredQuery, ClientError>>>,
        calls: AtomicUsize,
    }

    impl Scripted {
        fn new(mut replies: Vec<Result<StructuredQuery, ClientError>>) -> Self {
            replies.reverse();
            Self {
                replies: Mutex::new(replies),
                calls: AtomicUsize::new(0),
            }
        }
    }

    impl PlannerClient for Scripted {
        fn request(&self, _req: &PlannerRequest) -> Result<StructuredQuery, ClientError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.replies
                .lock()
                .unwrap()
                .pop()
                .unwrap_or(Err(ClientError::Transport("no more replies".into())))
        }
    }

    fn grounding_rule() -> Rule {
        Rule::new("MP", "Every CT secondary must connect to exactly one ground", Category::Grounding)
    }

    #[test]
    fn no_client_equals_template_plan() {
        for rule in default_rules() {
            let r = plan_with_client(&rule, None);
            assert_eq!(r.query, plan(&rule));
            assert!(r.diagnostics.is_empty());
        }
    }

    #[test]
    fn valid_client_answer_is_used() {
        let answer = StructuredQuery::new("CT_secondary", "check_grounding_uniqueness");
        let client = Scripted::new(vec![Ok(answer.clone())]);
        let r = plan_with_client(&grounding_rule(), Some(&client));
        assert_eq!(r.query, Ok(answer));
        assert!(r.diagnostics.is_empty());
    }

    #[test]
    fn unknown_function_falls_back() {
        let client = Scripted::new(vec![Ok(StructuredQuery::new("whole", "check_magic"))]);
        let r = plan_with_client(&grounding_rule(), Some(&client));
        assert_eq!(r.query, plan(&grounding_rule()));
        assert!(r.diagnostics.iter().any(|d| d.contains("check_magic")));
    }

    #[test]
    fn transport_failure_retries_once_then_falls_back() {
        let client = Scripted::new(vec![
            Err(ClientError::Transport("refused".into())),
            Err(ClientError::Timeout),
        ]);
        let r = plan_with_client(&grounding_rule(), Some(&client));
        assert_eq!(client.calls.load(Ordering::SeqCst), 2);
        assert_eq!(r.query, plan(&grounding_rule()));
        assert_eq!(r.diagnostics.len(), 3);
    }

    #[test]
    fn retry_can_succeed() {
        let answer = StructuredQuery::new("whole", "check_polarity");
        let client = Scripted::new(vec![Err(ClientError::Timeout), Ok(answer.clone())]);
        let r = plan_with_client(&grounding_rule(), Some(&client));
        assert_eq!(r.query, Ok(answer));
    }

    #[test]
    fn invalid_response_is_not_retried() {
        let client = Scripted::new(vec![Err(ClientError::InvalidResponse("garbage".into()))]);
        plan_with_client(&grounding_rule(), Some(&client));
        assert_eq!(client.calls.load(Ordering::SeqCst), 1);
    }

    /// One-shot HTTP server returning `body`; yields the raw request text.
    fn serve_once(body: &'static str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/plan", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut head = String::new();
            let mut length = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = Some(v.trim().parse().unwrap());
                }
                head.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut payload = Vec::new();
            match length {
                Some(n) => {
                    payload.resize(n, 0);
                    reader.read_exact(&mut payload).unwrap();
                }
                None => loop {
                    // chunked transfer encoding
                    let mut size = String::new();
                    reader.read_line(&mut size).unwrap();
                    let n = usize::from_str_radix(size.trim(), 16).unwrap();
                    let mut chunk = vec![0; n + 2];
                    reader.read_exact(&mut chunk).unwrap();
                    if n == 0 {
                        break;
                    }
                    payload.extend_from_slice(&chunk[..n]);
                },
            }
            let reply = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            reader.get_mut().write_all(reply.as_bytes()).unwrap();
            head + &String::from_utf8(payload).unwrap()
        });
        (url, handle)
    }

    #[test]
    fn http_client_round_trip() {
        let (url, server) = serve_once(r#"{"region":"CT_secondary","function":"check_grounding_uniqueness"}"#);
        let client = HttpPlannerClient::new(&url, Some("k123".into()), DEFAULT_TIMEOUT);
        let r = plan_with_client(&grounding_rule(), Some(&client));
        assert_eq!(
            r.query,
            Ok(StructuredQuery::new("CT_secondary", "check_grounding_uniqueness"))
        );
        let request = server.join().unwrap();
        let (head, body) = request.split_once("\r\n\r\n").unwrap();
        assert!(head.contains("Bearer k123"));
        let body: serde_json::Value = serde_json::from_str(body).unwrap();
        assert_eq!(body["rule"], "Every CT secondary must connect to exactly one ground");
        assert_eq!(body["functions"].as_array().unwrap().len(), 10);
    }

    #[test]
    fn http_client_unreachable_falls_back() {
        let port = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().port()
        };
        let client = HttpPlannerClient::new(&format!("http://127.0.0.1:{port}/plan"), None, Duration::from_secs(2));
        let r = plan_with_client(&grounding_rule(), Some(&client));
        assert_eq!(r.query, plan(&grounding_rule()));
        assert!(r.diagnostics.last().unwrap().contains("fell back"));
    }
}
