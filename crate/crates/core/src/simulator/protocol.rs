//! Line-delimited JSON: one request object per line in, one response
//! object per line out.
//!
//! ```text
//! {"op":"create_session","model_text":"...","network":"Pipe","seed":7}
//! {"op":"step","session":"s1","stimuli":[{"channel":"In","value":3}]}
//! {"op":"snapshot","session":"s1"}
//! {"op":"export_trace","session":"s1"}
//! {"op":"close","session":"s1"}
//! ```

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;

use serde::{Deserialize, Serialize};

use super::session::{create_session, SessionDelta, SimSession, Snapshot, Stimulus};
use super::SimError;
use crate::behavior::IdlePolicy;
use crate::consistency::Finding;
use crate::model::Model;
use crate::traces::EventTrace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Request {
    CreateSession {
        #[serde(default)]
        model_file: Option<PathBuf>,
        #[serde(default)]
        model_text: Option<String>,
        network: String,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        policy: IdlePolicy,
    },
    Step {
        session: String,
        #[serde(default)]
        stimuli: Vec<Stimulus>,
        #[serde(default)]
        branch: Option<usize>,
    },
    Snapshot {
        session: String,
    },
    ExportTrace {
        session: String,
    },
    Close {
        session: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub findings: Option<Vec<Finding>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Response {
    #[serde(default)]
    pub session: Option<String>,
    #[serde(default)]
    pub interval: Option<usize>,
    #[serde(default)]
    pub error: Option<ErrorBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<SessionDelta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Snapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<EventTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
}

impl Response {
    fn failure(session: Option<String>, code: &str, message: String, findings: Option<Vec<Finding>>) -> Self {
        Response {
            session,
            error: Some(ErrorBody {
                code: code.to_string(),
                message,
                findings,
            }),
            ..Response::default()
        }
    }

    fn from_error(session: Option<String>, e: SimError) -> Self {
        let findings = match &e {
            SimError::Rejected(f) => Some(f.clone()),
            _ => None,
        };
        Response::failure(session, e.code(), e.to_string(), findings)
    }
}

/// Holds the sessions of one server. Safe to share between connections.
#[derive(Debug, Default)]
pub struct SimService {
    sessions: Mutex<BTreeMap<String, SimSession>>,
    next_id: Mutex<u64>,
}

impl SimService {
    pub fn new() -> Self {
        SimService::default()
    }

    /// Handles one request line and returns one response line (no newline).
    pub fn handle(&self, line: &str) -> String {
        let response = match serde_json::from_str::<Request>(line) {
            Ok(req) => self.dispatch(req),
            Err(e) => Response::failure(None, "bad_request", e.to_string(), None),
        };
        serde_json::to_string(&response).expect("responses serialize")
    }

    pub fn dispatch(&self, req: Request) -> Response {
        match req {
            Request::CreateSession {
                model_file,
                model_text,
                network,
                seed,
                policy,
            } => self.create(model_file, model_text, &network, seed, policy),
            Request::Step {
                session,
                stimuli,
                branch,
            } => self.with_session(&session, |s| {
                let delta = s.step(&stimuli, branch)?;
                Ok(Response {
                    interval: Some(delta.interval),
                    delta: Some(delta),
                    ..Response::default()
                })
            }),
            Request::Snapshot { session } => self.with_session(&session, |s| {
                Ok(Response {
                    snapshot: Some(s.snapshot()?),
                    ..Response::default()
                })
            }),
            Request::ExportTrace { session } => self.with_session(&session, |s| {
                Ok(Response {
                    trace: Some(s.export_trace()?),
                    ..Response::default()
                })
            }),
            Request::Close { session } => self.with_session(&session, |s| {
                if s.is_closed() {
                    return Err(SimError::SessionClosed(s.id().to_string()));
                }
                s.close();
                Ok(Response {
                    closed: Some(true),
                    ..Response::default()
                })
            }),
        }
    }

    fn create(
        &self,
        model_file: Option<PathBuf>,
        model_text: Option<String>,
        network: &str,
        seed: u64,
        policy: IdlePolicy,
    ) -> Response {
        let model = match (model_file, model_text) {
            (Some(path), None) => Model::load(&path),
            (None, Some(text)) => Model::parse("<request>", &text),
            _ => {
                return Response::failure(
                    None,
                    "bad_request",
                    "exactly one of `model_file` and `model_text` is required".into(),
                    None,
                )
            }
        };
        let model = match model {
            Ok(m) => m,
            Err(e) => return Response::failure(None, "corpus", e.to_string(), None),
        };
        let id = {
            let mut n = self.next_id.lock().expect("id lock");
            *n += 1;
            format!("s{n}")
        };
        match create_session(&model, network, seed, policy, id.clone()) {
            Ok(s) => {
                let interval = s.interval();
                self.sessions.lock().expect("session lock").insert(id.clone(), s);
                Response {
                    session: Some(id),
                    interval: Some(interval),
                    ..Response::default()
                }
            }
            Err(e) => Response::from_error(None, e),
        }
    }

    fn with_session(&self, id: &str, f: impl FnOnce(&mut SimSession) -> Result<Response, SimError>) -> Response {
        let mut sessions = self.sessions.lock().expect("session lock");
        let Some(s) = sessions.get_mut(id) else {
            return Response::from_error(Some(id.to_string()), SimError::UnknownSession(id.to_string()));
        };
        let interval = s.interval();
        match f(s) {
            Ok(mut r) => {
                r.session = Some(id.to_string());
                r.interval = Some(r.interval.unwrap_or(interval));
                r
            }
            Err(e) => Response {
                interval: Some(interval),
                ..Response::from_error(Some(id.to_string()), e)
            },
        }
    }

    /// Serves one connection until the peer closes it.
    pub fn serve_connection(&self, stream: TcpStream) -> io::Result<()> {
        let mut out = stream.try_clone()?;
        for line in BufReader::new(stream).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            writeln!(out, "{}", self.handle(&line))?;
            out.flush()?;
        }
        Ok(())
    }
}

/// Accepts connections on `listener`, one thread per connection, sharing
/// one [`SimService`].
pub fn serve(listener: TcpListener, service: Arc<SimService>) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let service = Arc::clone(&service);
        thread::spawn(move || {
            let _ = service.serve_connection(stream);
        });
    }
    Ok(())
}
