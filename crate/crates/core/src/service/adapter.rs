use std::time::Duration;

use crate::narrative::{AdapterError, CopilotAdapter, CopilotReply, CopilotRequest};

/// Co-pilot adapter that POSTs the request as JSON to an external endpoint
/// and expects a reply in the same shape as the bundled one.
#[derive(Debug, Clone)]
pub struct HttpAdapter {
    url: String,
    agent: ureq::Agent,
}

impl HttpAdapter {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        Self { url: url.into(), agent }
    }
}

fn is_timeout(e: &ureq::Error) -> bool {
    match e {
        ureq::Error::Transport(t) => {
            let text = t.to_string().to_ascii_lowercase();
            text.contains("timed out") || text.contains("timeout")
        }
        ureq::Error::Status(..) => false,
    }
}

impl CopilotAdapter for HttpAdapter {
    fn respond(&self, request: &CopilotRequest) -> Result<CopilotReply, AdapterError> {
        let body = serde_json::to_string(request).map_err(|e| AdapterError::Unavailable(e.to_string()))?;
        let response = self
            .agent
            .post(&self.url)
            .set("content-type", "application/json")
            .send_string(&body)
            .map_err(|e| if is_timeout(&e) { AdapterError::Timeout } else { AdapterError::Unavailable(e.to_string()) })?;
        let text = response.into_string().map_err(|e| AdapterError::Unavailable(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| AdapterError::Unavailable(format!("unreadable reply: {e}")))
    }
}
