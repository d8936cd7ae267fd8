use sarfa_agents::{AgentError, ExternalSession, OracleConfig};
use sarfa_core::{QOracle, QProfile};

use crate::frame::Frame;

/// External agent fed frames as row-major bytes, one channel after another.
pub struct FrameAgent {
    session: ExternalSession,
}

impl FrameAgent {
    pub fn open(config: &OracleConfig) -> Result<Self, AgentError> {
        Ok(FrameAgent { session: ExternalSession::open(config)? })
    }

    pub fn from_session(session: ExternalSession) -> Self {
        FrameAgent { session }
    }
}

impl QOracle<Frame> for FrameAgent {
    type Error = AgentError;

    fn evaluate(&mut self, frame: &Frame) -> Result<QProfile, AgentError> {
        self.session.external_evaluate(&frame.to_bytes())
    }
}
