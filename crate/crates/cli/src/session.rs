//! One interactive run driven by external answers.

use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use isneak::engine::{RunResult, Search, SearchConfig};
use isneak::preprocess::EncodedPool;
use isneak::ranking::{Choice, QuestionView};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    AwaitingAnswer,
    Running,
    Done,
    Aborted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub score: u8,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub solution: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Progress {
    pub asked: usize,
    pub live_candidates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatusView {
    pub session_id: String,
    pub state: SessionState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question: Option<QuestionView>,
    pub progress: Progress,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// What is needed to rebuild a session: the same inputs and answers replay
/// to the same state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub session_id: String,
    pub model_id: String,
    pub seed: u64,
    pub pool_size: usize,
    pub answers: Vec<Choice>,
    pub ratings: Vec<Rating>,
    pub state: SessionState,
    pub created_at: u64,
}

#[derive(Debug, PartialEq, Eq)]
pub enum SessionError {
    /// The session is not waiting for an answer.
    NotAwaiting(SessionState),
    NotDone(SessionState),
    /// The answer names a question other than the pending one.
    StaleQuestion { pending: usize, given: usize },
}

pub struct Session {
    pub id: String,
    pub model_id: String,
    pub seed: u64,
    pub pool_size: usize,
    pool: Arc<EncodedPool>,
    state: SessionState,
    search: Option<Search>,
    result: Option<RunResult>,
    answers: Vec<Choice>,
    ratings: Vec<Rating>,
    error: Option<String>,
    live_at_finish: usize,
    pub created_at: u64,
    pub last_active: Instant,
}

impl Session {
    /// Starts the engine and runs it to the first question.
    pub fn start(id: String, model_id: String, seed: u64, pool_size: usize, pool: Arc<EncodedPool>) -> Self {
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut s = Self {
            id,
            model_id,
            seed,
            pool_size,
            pool: pool.clone(),
            state: SessionState::Running,
            search: None,
            result: None,
            answers: Vec::new(),
            ratings: Vec::new(),
            error: None,
            live_at_finish: pool.len(),
            created_at,
            last_active: Instant::now(),
        };
        match Search::new(pool, SearchConfig::seeded(seed)) {
            Ok(search) => {
                s.search = Some(search);
                s.advance();
            }
            Err(e) => s.abort(e.to_string()),
        }
        s
    }

    /// Rebuilds a session from a snapshot by replaying its answers.
    pub fn restore(snap: &Snapshot, pool: Arc<EncodedPool>) -> Self {
        let mut s = Self::start(snap.session_id.clone(), snap.model_id.clone(), snap.seed, snap.pool_size, pool);
        for &c in &snap.answers {
            if s.answer(c).is_err() {
                s.abort("snapshot answers do not replay".into());
                break;
            }
        }
        s.ratings = snap.ratings.clone();
        s.created_at = snap.created_at;
        s
    }

    fn abort(&mut self, message: String) {
        self.state = SessionState::Aborted;
        self.search = None;
        self.error = Some(message);
    }

    /// Moves to the next question, or finishes the run when none is left.
    fn advance(&mut self) {
        let Some(search) = self.search.as_mut() else { return };
        if search.next_question().is_some() {
            self.state = SessionState::AwaitingAnswer;
            return;
        }
        let search = self.search.take().expect("checked above");
        self.live_at_finish = search.live_count();
        match search.finish() {
            Ok(r) => {
                self.result = Some(r.with_model(self.model_id.clone()));
                self.state = SessionState::Done;
            }
            Err(e) => self.abort(e.to_string()),
        }
    }

    pub fn answer(&mut self, choice: Choice) -> Result<(), SessionError> {
        self.last_active = Instant::now();
        if self.state != SessionState::AwaitingAnswer {
            return Err(SessionError::NotAwaiting(self.state));
        }
        self.state = SessionState::Running;
        let search = self.search.as_mut().expect("awaiting sessions hold a search");
        if let Err(e) = search.answer(choice) {
            self.abort(e.to_string());
            return Ok(());
        }
        self.answers.push(choice);
        self.advance();
        Ok(())
    }

    /// Like [`Session::answer`], but rejects answers aimed at a question
    /// other than the pending one (a repeated post for an earlier question).
    pub fn answer_question(&mut self, question_id: usize, choice: Choice) -> Result<(), SessionError> {
        if self.state != SessionState::AwaitingAnswer {
            return Err(SessionError::NotAwaiting(self.state));
        }
        match self.pending_id() {
            Some(p) if p != question_id => Err(SessionError::StaleQuestion {
                pending: p,
                given: question_id,
            }),
            _ => self.answer(choice),
        }
    }

    pub fn pending_id(&self) -> Option<usize> {
        self.search.as_ref()?.pending().map(|q| q.id)
    }

    pub fn rate(&mut self, rating: Rating) {
        self.last_active = Instant::now();
        self.ratings.push(rating);
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn answers(&self) -> &[Choice] {
        &self.answers
    }

    pub fn ratings(&self) -> &[Rating] {
        &self.ratings
    }

    pub fn result(&self) -> Result<&RunResult, SessionError> {
        self.result.as_ref().ok_or(SessionError::NotDone(self.state))
    }

    pub fn status(&self) -> StatusView {
        let (question, live) = match &self.search {
            Some(s) => (s.pending().map(|q| q.to_view(&self.pool)), s.live_count()),
            None => (None, self.live_at_finish),
        };
        StatusView {
            session_id: self.id.clone(),
            state: self.state,
            question,
            progress: Progress {
                asked: self.answers.len(),
                live_candidates: live,
            },
            error: self.error.clone(),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            session_id: self.id.clone(),
            model_id: self.model_id.clone(),
            seed: self.seed,
            pool_size: self.pool_size,
            answers: self.answers.clone(),
            ratings: self.ratings.clone(),
            state: self.state,
            created_at: self.created_at,
        }
    }
}
