use super::sections::{validate_sections, Sections, SECTION_TITLES};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

pub const MAX_IN_FLIGHT_LIMIT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmConfig {
    /// Chat-completions URL, or `mock://` for the built-in offline backend.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub timeout_s: f64,
    pub max_retries: u32,
    /// Concurrent requests, 1 to 4.
    pub max_in_flight: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "local-model".into(),
            temperature: 0.3,
            timeout_s: 120.0,
            max_retries: 1,
            max_in_flight: 1,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!("llm.temperature must be in [0, 2], got {}", self.temperature));
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(format!("llm.timeout_s must be positive, got {}", self.timeout_s));
        }
        if !(1..=MAX_IN_FLIGHT_LIMIT).contains(&self.max_in_flight) {
            return Err(format!("llm.max_in_flight must be in 1..=4, got {}", self.max_in_flight));
        }
        if self.endpoint.is_empty() {
            return Err("llm.endpoint is empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

pub trait LlmBackend: Sync {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<String, LlmError>;
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: [ChatMessage<'a>; 1],
}

/// Chat-completions JSON over HTTP.
pub struct HttpBackend {
    endpoint: String,
    model: String,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(cfg: &LlmConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_s)))
            .build()
            .into();
        Self { endpoint: cfg.endpoint.clone(), model: cfg.model.clone(), agent }
    }
}

/// Request body sent for `prompt`.
pub fn chat_request_json(model: &str, temperature: f64, prompt: &str) -> String {
    serde_json::to_string(&ChatRequest {
        model,
        temperature,
        messages: [ChatMessage { role: "user", content: prompt }],
    })
    .expect("request serializes")
}

/// `choices[0].message.content` of a chat-completions response.
pub fn parse_chat_response(body: &str) -> Result<String, LlmError> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(|e| LlmError::Malformed(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| LlmError::Malformed("no choices[0].message.content".into()))
}

impl LlmBackend for HttpBackend {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<String, LlmError> {
        let body = chat_request_json(&self.model, temperature, prompt);
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        parse_chat_response(&text)
    }
}

/// Offline backend that answers from the prompt's own statistics.
///
/// `mock://` replies with all five sections, `mock://four-sections` omits
/// the weaknesses section and `mock://fail` always errors.
pub struct MockBackend {
    mode: String,
}

impl MockBackend {
    pub fn new(endpoint: &str) -> Self {
        Self { mode: endpoint.trim_start_matches("mock://").to_string() }
    }
}

pub fn mock_reply(prompt: &str, omit: Option<usize>) -> String {
    let field = |key: &str| {
        prompt
            .lines()
            .find_map(|l| l.strip_prefix(key))
            .map(str::trim)
            .unwrap_or("")
            .to_string()
    };
    let feats: Vec<(String, f64)> = prompt
        .lines()
        .skip_while(|l| !l.starts_with("Key features"))
        .skip(1)
        .map_while(|l| l.strip_prefix("- "))
        .filter_map(|l| {
            let (n, z) = l.rsplit_once(": ")?;
            Some((n.to_string(), z.parse().ok()?))
        })
        .collect();
    let list = |pos: bool| {
        let v: Vec<String> = feats
            .iter()
            .filter(|f| (f.1 > 0.0) == pos && f.1 != 0.0)
            .map(|(n, z)| format!("{n} (z={z:.2})"))
            .collect();
        if v.is_empty() {
            "None of the listed features stands out in this direction.".to_string()
        } else {
            format!("{}.", v.join(", "))
        }
    };
    let lead = feats.first().map_or("no single feature".to_string(), |f| f.0.clone());
    let bodies = [
        format!(
            "Cluster {} groups {} bridges ({}). It is characterized mainly by {lead}.",
            field("Cluster ID:"),
            field("Number of bridges:"),
            field("City composition:")
        ),
        format!("Above the network average: {}", list(true)),
        format!("Below the network average: {}", list(false)),
        format!("Role type inferred from {lead}."),
        format!("Composition by city: {}.", field("City composition:")),
    ];
    let mut out = String::new();
    for (i, (t, b)) in SECTION_TITLES.iter().zip(bodies).enumerate() {
        if omit != Some(i) {
            out.push_str(&format!("{}. {t}\n{b}\n\n", i + 1));
        }
    }
    out
}

impl LlmBackend for MockBackend {
    fn complete(&self, prompt: &str, _temperature: f64) -> Result<String, LlmError> {
        match self.mode.as_str() {
            "fail" => Err(LlmError::Transport("mock endpoint configured to fail".into())),
            "four-sections" => Ok(mock_reply(prompt, Some(2))),
            _ => Ok(mock_reply(prompt, None)),
        }
    }
}

pub fn backend_for(cfg: &LlmConfig) -> Box<dyn LlmBackend> {
    if cfg.endpoint.starts_with("mock://") {
        Box::new(MockBackend::new(&cfg.endpoint))
    } else {
        Box::new(HttpBackend::new(cfg))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationReport {
    pub cluster_id: i64,
    pub sections: Option<Sections>,
    /// Why the last attempt failed, when `sections` is `None`.
    pub failure: Option<String>,
    /// Last reply received, if any.
    pub raw: Option<String>,
    pub char_count: usize,
    pub attempts: u32,
    pub generated_at: String,
    pub model: String,
    pub temperature: f64,
}

impl InterpretationReport {
    pub fn is_valid(&self) -> bool {
        self.sections.is_some()
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "# Cluster {}\n\n- model: {}\n- temperature: {}\n- generated_at: {}\n\n",
            self.cluster_id, self.model, self.temperature, self.generated_at
        );
        match &self.sections {
            Some(sec) => {
                for (i, (t, b)) in SECTION_TITLES.iter().zip(sec.bodies()).enumerate() {
                    s.push_str(&format!("## {}. {t}\n\n{b}\n\n", i + 1));
                }
            }
            None => {
                s.push_str(&format!(
                    "Interpretation failed after {} attempt(s): {}\n\n",
                    self.attempts,
                    self.failure.as_deref().unwrap_or("unknown")
                ));
                if let Some(raw) = &self.raw {
                    s.push_str("## Raw reply\n\n");
                    s.push_str(raw);
                    s.push('\n');
                }
            }
        }
        s
    }
}

/// Requests a report, retrying up to `cfg.max_retries` times on transport or
/// section-validation failure.
pub fn generate_report(
    backend: &dyn LlmBackend,
    cfg: &LlmConfig,
    cluster_id: i64,
    prompt: &str,
    temperature: f64,
) -> InterpretationReport {
    let mut report = InterpretationReport {
        cluster_id,
        sections: None,
        failure: None,
        raw: None,
        char_count: 0,
        attempts: 0,
        generated_at: String::new(),
        model: cfg.model.clone(),
        temperature,
    };
    for _ in 0..=cfg.max_retries {
        report.attempts += 1;
        match backend.complete(prompt, temperature) {
            Ok(text) => match validate_sections(&text) {
                Ok(sec) => {
                    report.char_count = sec.char_count();
                    report.sections = Some(sec);
                    report.failure = None;
                    report.raw = Some(text);
                    break;
                }
                Err(e) => {
                    report.failure = Some(e.to_string());
                    report.raw = Some(text);
                }
            },
            Err(e) => report.failure = Some(e.to_string()),
        }
        log::warn!(
            "cluster {cluster_id}: attempt {} failed: {}",
            report.attempts,
            report.failure.as_deref().unwrap_or("")
        );
    }
    report.generated_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    report
}

/// Runs `prompts` with at most `cfg.max_in_flight` concurrent requests;
/// reports come back in input order.
pub fn generate_reports(
    backend: &dyn LlmBackend,
    cfg: &LlmConfig,
    prompts: &[(i64, String)],
    temperature: f64,
) -> Vec<InterpretationReport> {
    let workers = cfg.max_in_flight.clamp(1, MAX_IN_FLIGHT_LIMIT).min(prompts.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<InterpretationReport>>> = Mutex::new(vec![None; prompts.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((id, prompt)) = prompts.get(i) else { break };
                let r = generate_report(backend, cfg, *id, prompt, temperature);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every slot filled")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicU32;

    struct Scripted {
        replies: Vec<Result<String, LlmError>>,
        calls: AtomicU32,
    }

    impl LlmBackend for Scripted {
        fn complete(&self, _: &str, _: f64) -> Result<String, LlmError> {
            let i = self.calls.fetch_add(1, Ordering::SeqCst) as usize;
            self.replies[i.min(self.replies.len() - 1)].clone()
        }
    }

    const PROMPT: &str = "Cluster ID: 3\nNumber of bridges: 22\nCity composition: a 100.0%\n\nKey features (z-scores):\n- hospital_access: 3.05\n- betweenness: -0.50\n\n";

    #[test]
    fn mock_reply_is_valid_and_grounded() {
        let text = MockBackend::new("mock://").complete(PROMPT, 0.3).unwrap();
        let s = validate_sections(&text).unwrap();
        assert!(s.strengths.contains("hospital_access (z=3.05)"));
        assert!(s.weaknesses.contains("betweenness (z=-0.50)"));
        assert!(validate_sections(&mock_reply(PROMPT, Some(2))).is_err());
    }

    #[test]
    fn retry_then_invalid() {
        let four = mock_reply(PROMPT, Some(2));
        let b = Scripted { replies: vec![Ok(four)], calls: AtomicU32::new(0) };
        let cfg = LlmConfig { max_retries: 1, ..Default::default() };
        let r = generate_report(&b, &cfg, 3, PROMPT, 0.3);
        assert_eq!(b.calls.load(Ordering::SeqCst), 2);
        assert!(!r.is_valid());
        assert_eq!(r.attempts, 2);
        assert!(r.failure.unwrap().contains("Weaknesses"));
    }

    #[test]
    fn retry_recovers_from_transport_error() {
        let b = Scripted {
            replies: vec![Err(LlmError::Transport("reset".into())), Ok(mock_reply(PROMPT, None))],
            calls: AtomicU32::new(0),
        };
        let r = generate_report(&b, &LlmConfig::default(), 3, PROMPT, 0.3);
        assert!(r.is_valid());
        assert_eq!(r.attempts, 2);
        assert!(r.to_markdown().contains("## 4. Bridge Role Type"));
    }

    #[test]
    fn zero_retries_means_one_request() {
        let b = Scripted { replies: vec![Err(LlmError::Transport("down".into()))], calls: AtomicU32::new(0) };
        let cfg = LlmConfig { max_retries: 0, ..Default::default() };
        let prompts: Vec<(i64, String)> = (0..5).map(|i| (i, PROMPT.to_string())).collect();
        let r = generate_reports(&b, &cfg, &prompts, 0.3);
        assert_eq!(b.calls.load(Ordering::SeqCst), 5);
        assert!(r.iter().all(|r| !r.is_valid()));
    }

    #[test]
    fn parallel_matches_sequential() {
        let mock = MockBackend::new("mock://");
        let prompts: Vec<(i64, String)> =
            (0..9).map(|i| (i, PROMPT.replace("Cluster ID: 3", &format!("Cluster ID: {i}")))).collect();
        let strip = |v: Vec<InterpretationReport>| -> Vec<_> { v.into_iter().map(|r| (r.cluster_id, r.sections)).collect() };
        let seq = generate_reports(&mock, &LlmConfig { max_in_flight: 1, ..Default::default() }, &prompts, 0.3);
        let par = generate_reports(&mock, &LlmConfig { max_in_flight: 4, ..Default::default() }, &prompts, 0.3);
        assert_eq!(strip(seq), strip(par));
    }

    #[test]
    fn chat_wire_format() {
        let body = chat_request_json("m", 0.3, "hi");
        assert_eq!(body, r#"{"model":"m","temperature":0.3,"messages":[{"role":"user","content":"hi"}]}"#);
        let reply = r#"{"choices":[{"message":{"role":"assistant","content":"ok"}}]}"#;
        assert_eq!(parse_chat_response(reply).unwrap(), "ok");
        assert!(parse_chat_response("{}").is_err());
    }

    #[test]
    fn config_bounds() {
        LlmConfig::default().validate().unwrap();
        assert!(LlmConfig { temperature: 2.5, ..Default::default() }.validate().is_err());
        assert!(LlmConfig { max_in_flight: 5, ..Default::default() }.validate().is_err());
    }
}
