//! Natural language to GeoLingua via a chat-completion endpoint.
//!
//! The prompt has four parts in a fixed order: role, language framework,
//! few-shot examples, and output requirements ending with the four-key JSON
//! schema. The framework section is generated from the parser's keyword
//! table, so the prompt and the validator cannot drift apart.
//!
//! Responses pass through a validation filter: extract the first JSON
//! object, parse it as a program, validate it. A response that fails any
//! step costs one attempt and the identical prompt is re-sent, up to three
//! attempts total. Every raw response is retained for audit.

use crate::ast::{Head, Section};
use crate::parse::{parse_json, to_json_string};
use crate::validate::{validate, Diagnostic, Location, Severity, ValidationReport};
use crate::ast::FormalProgram;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

/// Maximum filter attempts per formalization.
pub const MAX_ATTEMPTS: usize = 3;

/// One few-shot example: natural-language input and its program as a
/// four-key JSON string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FewShot {
    pub natural: String,
    pub formal: serde_json::Value,
}

/// The four prompt parts, rendered in order by [`build_prompt`].
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    pub role_preamble: String,
    pub framework: String,
    pub examples: Vec<FewShot>,
    pub requirements: String,
}

/// Short usage note per statement head for the prompt framework.
fn head_note(head: Head) -> &'static str {
    match head {
        Head::Circle => "circle with a named center and a positive radius",
        Head::Polygon => "triangle, trapezoid or any polygon listed by its vertices",
        Head::Parallelogram => "parallelogram listed by its vertices in order",
        Head::Rhombus => "rhombus listed by its vertices in order",
        Head::Square => "square listed by its vertices in order",
        Head::Rectangle => "rectangle listed by its vertices in order",
        Head::Sector => "sector named vertex-style (center is the middle letter), with its angle and radius",
        Head::StringOfCircle => "chord of the circle centered at the named point",
        Head::InscribedPolygon => "polygon whose vertices lie on the circle centered at the named point",
        Head::CircumscribedPolygon => "circle centered at the named point inscribed in the polygon (triangles only)",
        Head::PointAtLine => "point on a segment; ratio 0 means an unspecified position, r in (0,1] the proportional position",
        Head::LineIntersect => "intersection point of two lines",
        Head::PointAtArc => "point on a circle (second argument the center, arc type 0) or on an arc (second argument the arc name)",
        Head::ExtensionLine => "new point extending the segment beyond its second endpoint",
        Head::Tangent => "tangent to the circle: center, tangency point, outer tangent point",
        Head::DoPerpendicular => "perpendicular from the point to the line, naming the foot",
        Head::PointInShape => "point inside the polygon",
        Head::Length => "segment length in canvas units",
        Head::LengthRatio => "ratio between two segment lengths",
        Head::ArcRatio => "ratio between two arc lengths on their circles",
        Head::LengthAddandSub => "relation between sums/differences of segment lengths and numbers",
        Head::PointLineDistance => "distance from a point to a line",
        Head::ConnectPoints => "draw the segment between two existing points",
        Head::Parallel => "the two lines are parallel (third argument always 0)",
        Head::Perpendicular => "the two lines are perpendicular (third argument always 90)",
        Head::Angle => "angle value in degrees (vertex is the middle letter)",
        Head::TriFunction => "trigonometric value of an angle (sin, cos or tan)",
        Head::AngleRatio => "ratio between two angles",
        Head::AngleAddandSub => "relation between sums/differences of angles and degree values",
    }
}

/// Render the statement reference from the keyword table.
pub fn framework_markdown() -> String {
    let mut out = String::new();
    for section in Section::ALL {
        out.push_str(&format!("### {} statements\n", section.key()));
        for &head in Head::ALL.iter().filter(|h| h.section() == section) {
            let args: Vec<String> = head.signature().iter().map(|s| s.describe()).collect();
            out.push_str(&format!(
                "- `{}({})` — {}\n",
                head.name(),
                args.join(", "),
                head_note(head)
            ));
        }
        out.push('\n');
    }
    out
}

/// The literal output schema the model must produce.
pub const OUTPUT_SCHEMA: &str =
    r#"{ "shapes": [], "dependence": [], "length constraint": [], "angle constraint": [] }"#;

impl Default for PromptTemplate {
    fn default() -> Self {
        let examples: Vec<FewShot> = serde_json::from_str(include_str!("../assets/fewshot.json"))
            .expect("bundled few-shot examples parse");
        PromptTemplate {
            role_preamble: "You are a translator from plane-geometry problem descriptions to the \
                            GeoLingua formal language. Convert the user's natural-language \
                            description into GeoLingua statements, using only the statement \
                            forms defined below."
                .to_string(),
            framework: framework_markdown(),
            examples,
            requirements: format!(
                "Use only the statement forms listed above; any other statement is rejected. \
                 Point names are single uppercase letters (an optional prime mark is allowed). \
                 Name every shape by its points, introduce each point once, and put every \
                 statement in its section. Respond with a single JSON object and nothing else. \
                 The output JSON format is: {OUTPUT_SCHEMA}"
            ),
        }
    }
}

impl PromptTemplate {
    /// Replace the few-shot examples with ones loaded from a JSON file.
    pub fn with_examples(mut self, examples: Vec<FewShot>) -> Self {
        self.examples = examples;
        self
    }
}

/// Deterministic concatenation: role, framework, examples, requirements,
/// then the natural-language input.
pub fn build_prompt(template: &PromptTemplate, natural: &str) -> String {
    let mut out = String::new();
    out.push_str(&template.role_preamble);
    out.push_str("\n\n## GeoLingua reference\n\n");
    out.push_str(&template.framework);
    if !template.examples.is_empty() {
        out.push_str("## Examples\n\n");
        for example in &template.examples {
            out.push_str(&format!(
                "Input: {}\nOutput: {}\n\n",
                example.natural,
                serde_json::to_string(&example.formal).expect("example serializes")
            ));
        }
    }
    out.push_str("## Requirements\n\n");
    out.push_str(&template.requirements);
    out.push_str("\n\nInput: ");
    out.push_str(natural);
    out.push_str("\nOutput:");
    out
}

/// A chat-completion backend. `complete` returns the assistant text for a
/// prompt, or an error message for transport failures.
pub trait ChatEndpoint {
    fn complete(&self, prompt: &str) -> Result<String, String>;
}

/// Connection settings for an OpenAI-compatible chat endpoint.
#[derive(Debug, Clone)]
pub struct EndpointConfig {
    /// Service root, e.g. `https://api.deepseek.com`; `/chat/completions`
    /// is appended unless already present.
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub temperature: f64,
}

impl EndpointConfig {
    /// Read settings from `GEOLINGUA_BASE_URL`, `GEOLINGUA_MODEL` and
    /// `GEOLINGUA_API_KEY`.
    pub fn from_env() -> EndpointConfig {
        EndpointConfig {
            base_url: std::env::var("GEOLINGUA_BASE_URL")
                .unwrap_or_else(|_| "https://api.deepseek.com".to_string()),
            model: std::env::var("GEOLINGUA_MODEL").unwrap_or_else(|_| "deepseek-chat".to_string()),
            api_key: std::env::var("GEOLINGUA_API_KEY").ok(),
            timeout: Duration::from_secs(120),
            temperature: 0.2,
        }
    }

    fn url(&self) -> String {
        let base = self.base_url.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

/// Blocking HTTP endpoint speaking the OpenAI chat-completion shape.
pub struct HttpChatEndpoint {
    config: EndpointConfig,
    agent: ureq::Agent,
}

impl HttpChatEndpoint {
    /// Fails when no API credential is configured.
    pub fn new(config: EndpointConfig) -> Result<HttpChatEndpoint, String> {
        if config.api_key.as_deref().unwrap_or("").is_empty() {
            return Err(
                "no API credential: set GEOLINGUA_API_KEY in the environment".to_string()
            );
        }
        let agent = ureq::AgentBuilder::new()
            .timeout(config.timeout.max(Duration::from_secs(1)))
            .try_proxy_from_env(true)
            .build();
        Ok(HttpChatEndpoint { config, agent })
    }
}

impl ChatEndpoint for HttpChatEndpoint {
    fn complete(&self, prompt: &str) -> Result<String, String> {
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        });
        let response = self
            .agent
            .post(&self.config.url())
            .set(
                "Authorization",
                &format!("Bearer {}", self.config.api_key.as_deref().unwrap_or("")),
            )
            .set("Content-Type", "application/json")
            .send_json(body)
            .map_err(|e| format!("request failed: {e}"))?;
        let value: serde_json::Value = response
            .into_json()
            .map_err(|e| format!("malformed response body: {e}"))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(|s| s.to_string())
            .ok_or_else(|| "response has no choices[0].message.content".to_string())
    }
}

/// Scripted endpoint for tests and offline runs: pops one canned response
/// per call. `Err` entries simulate transport failures.
pub struct ScriptedEndpoint {
    responses: Mutex<VecDeque<Result<String, String>>>,
}

impl ScriptedEndpoint {
    pub fn new(responses: Vec<Result<String, String>>) -> ScriptedEndpoint {
        ScriptedEndpoint {
            responses: Mutex::new(responses.into()),
        }
    }
}

impl ChatEndpoint for ScriptedEndpoint {
    fn complete(&self, _prompt: &str) -> Result<String, String> {
        self.responses
            .lock()
            .expect("scripted endpoint lock")
            .pop_front()
            .unwrap_or_else(|| Err("scripted endpoint exhausted".to_string()))
    }
}

/// One filter attempt: the raw response (empty on transport failure) and the
/// validation outcome.
#[derive(Debug, Clone)]
pub struct Attempt {
    pub raw: String,
    pub report: ValidationReport,
    pub network_error: bool,
}

/// Outcome of [`formalize`].
#[derive(Debug, Clone, Default)]
pub struct FormalizationOutcome {
    pub program: Option<FormalProgram>,
    pub attempts: Vec<Attempt>,
    pub succeeded: bool,
}

impl FormalizationOutcome {
    /// All attempts failed at the transport layer (nothing to validate).
    pub fn all_network_failures(&self) -> bool {
        !self.attempts.is_empty() && self.attempts.iter().all(|a| a.network_error)
    }
}

/// Extract the first balanced JSON object from a response, tolerating code
/// fences and surrounding prose.
pub fn extract_first_json(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

fn failure_report(rule: &'static str, message: String) -> ValidationReport {
    ValidationReport {
        diagnostics: vec![Diagnostic {
            severity: Severity::Error,
            location: Location::Program,
            message,
            rule,
        }],
    }
}

/// Translate a natural-language description through the endpoint, filtering
/// each response by parse + validate, with up to [`MAX_ATTEMPTS`] identical
/// retries. With a deterministic endpoint the outcome is deterministic.
pub fn formalize(
    natural: &str,
    endpoint: &dyn ChatEndpoint,
    template: &PromptTemplate,
) -> FormalizationOutcome {
    let prompt = build_prompt(template, natural);
    let mut outcome = FormalizationOutcome::default();
    for _ in 0..MAX_ATTEMPTS {
        let response = endpoint.complete(&prompt);
        let (raw, network_error, report, program) = match response {
            Err(message) => (
                String::new(),
                true,
                failure_report("network", message),
                None,
            ),
            Ok(raw) => match extract_first_json(&raw) {
                None => {
                    let report =
                        failure_report("json-extract", "response contains no JSON object".into());
                    (raw, false, report, None)
                }
                Some(json) => match parse_json(json) {
                    Err(e) => (raw.clone(), false, failure_report("parse", e.to_string()), None),
                    Ok(program) => {
                        let report = validate(&program);
                        let ok = report.ok();
                        (raw.clone(), false, report, ok.then_some(program))
                    }
                },
            },
        };
        let succeeded = program.is_some();
        outcome.attempts.push(Attempt { raw, report, network_error });
        if succeeded {
            outcome.program = program;
            outcome.succeeded = true;
            break;
        }
    }
    outcome
}

/// Audit-file form of an outcome.
#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord {
    pub schema_version: u32,
    pub succeeded: bool,
    pub attempts: Vec<AuditAttempt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub program: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditAttempt {
    pub raw: String,
    pub ok: bool,
    pub network_error: bool,
    pub diagnostics: Vec<String>,
}

impl FormalizationOutcome {
    pub fn audit_record(&self) -> AuditRecord {
        AuditRecord {
            schema_version: 1,
            succeeded: self.succeeded,
            attempts: self
                .attempts
                .iter()
                .map(|a| AuditAttempt {
                    raw: a.raw.clone(),
                    ok: a.report.ok(),
                    network_error: a.network_error,
                    diagnostics: a
                        .report
                        .diagnostics
                        .iter()
                        .map(|d| format!("[{}] {}", d.rule, d.message))
                        .collect(),
                })
                .collect(),
            program: self
                .program
                .as_ref()
                .map(|p| serde_json::from_str(&to_json_string(p)).expect("program JSON")),
        }
    }
}
