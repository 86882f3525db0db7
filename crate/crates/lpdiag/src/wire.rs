//! JSON messages of the session service. Every message carries a `kind`
//! field; atoms are rendered with the canonical printer.

use lpdiag_core::diagnose::{Judgment, Move, TreeBrowser, Verdict};
use lpdiag_core::spec::{Question, Reply};
use serde::{Deserialize, Serialize};

use crate::diagnosis::Algorithm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Run,
    Trace,
    Tree,
    Alg4,
    Alg5,
    Missing,
}

impl Mode {
    pub fn algorithm(self) -> Option<Algorithm> {
        match self {
            Mode::Run | Mode::Trace => None,
            Mode::Tree => Some(Algorithm::Tree),
            Mode::Alg4 => Some(Algorithm::Alg4),
            Mode::Alg5 => Some(Algorithm::Alg5),
            Mode::Missing => Some(Algorithm::Missing),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// Questions are answered through `oracle.answer` steps; in tree mode
    /// the client navigates and judges nodes itself.
    #[default]
    Human,
    /// Questions are answered from a specification file.
    Spec,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsOverride {
    pub max_depth: Option<u32>,
    pub max_answers: Option<u32>,
    pub max_steps: Option<u64>,
}

/// Body of `POST /sessions`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "session.create")]
pub struct CreateSession {
    pub program: String,
    /// Specification text; the bundled one is used when absent.
    #[serde(default)]
    pub spec: Option<String>,
    pub mode: Mode,
    pub query: String,
    #[serde(default)]
    pub oracle: OracleMode,
    /// Tree mode with a human oracle: the answer whose proof tree is
    /// browsed. Defaults to the first answer.
    #[serde(default)]
    pub answer: Option<String>,
    /// Alg5: start the scan from the incorrect answer.
    #[serde(default)]
    pub from_answer: bool,
    #[serde(default)]
    pub bounds: BoundsOverride,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplyText {
    Yes,
    No,
    Defer,
}

impl From<ReplyText> for Reply {
    fn from(r: ReplyText) -> Reply {
        match r {
            ReplyText::Yes => Reply::Yes,
            ReplyText::No => Reply::No,
            ReplyText::Defer => Reply::Deferred,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgmentText {
    Correct,
    Incorrect,
}

impl From<JudgmentText> for Judgment {
    fn from(j: JudgmentText) -> Judgment {
        match j {
            JudgmentText::Correct => Judgment::Correct,
            JudgmentText::Incorrect => Judgment::Incorrect,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    /// `v`, `<`, `>` or `^`.
    Move {
        #[serde(rename = "move")]
        mv: String,
    },
    Judge { judgment: JudgmentText },
    ShowError,
    Answer { reply: ReplyText },
    Abort,
}

/// Body of `POST /sessions/{id}/step`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StepRequest {
    #[serde(rename = "session.step")]
    Step { action: Action },
    #[serde(rename = "oracle.answer")]
    Answer { reply: ReplyText },
}

impl StepRequest {
    pub fn into_action(self) -> Action {
        match self {
            StepRequest::Step { action } => action,
            StepRequest::Answer { reply } => Action::Answer { reply },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Run and trace sessions: results are in the view.
    Done,
    AwaitingAnswer,
    Navigating,
    Verdict,
    /// No verdict: not a symptom, inconclusive, aborted or failed.
    Stopped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswersView {
    pub answers: Vec<String>,
    pub truncated: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub call: String,
    pub answers: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceView {
    pub rows: Vec<TraceRow>,
    pub truncated: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeView {
    pub atom: String,
    pub builtin: bool,
    pub judgment: Option<JudgmentText>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgedView {
    pub path: Vec<usize>,
    pub atom: String,
    pub judgment: JudgmentText,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeView {
    /// Atom under the cursor.
    pub node: String,
    pub path: Vec<usize>,
    pub moves: Vec<String>,
    /// Deepest node judged incorrect.
    pub focus: String,
    pub children: Vec<NodeView>,
    pub judgments: Vec<JudgedView>,
}

fn judgment_text(j: Judgment) -> JudgmentText {
    match j {
        Judgment::Correct => JudgmentText::Correct,
        Judgment::Incorrect => JudgmentText::Incorrect,
    }
}

impl TreeView {
    pub fn of(b: &TreeBrowser) -> TreeView {
        let cursor = b.cursor().to_vec();
        TreeView {
            node: b.current().atom.to_string(),
            path: cursor.clone(),
            moves: b.moves().iter().map(|m: &Move| m.symbol().to_string()).collect(),
            focus: b.tree().at(b.focus()).map(|n| n.atom.to_string()).unwrap_or_default(),
            children: b
                .current()
                .children
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let mut p = cursor.clone();
                    p.push(i);
                    NodeView {
                        atom: c.atom.to_string(),
                        builtin: c.is_builtin(),
                        judgment: b.judgment(&p).map(judgment_text),
                    }
                })
                .collect(),
            judgments: b
                .judgments()
                .map(|(p, j)| JudgedView {
                    path: p.clone(),
                    atom: b.tree().at(p).map(|n| n.atom.to_string()).unwrap_or_default(),
                    judgment: judgment_text(*j),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "oracle.question")]
pub struct QuestionView {
    /// `correct`, `satisfiable` or `complete`.
    #[serde(rename = "type")]
    pub question: String,
    pub atom: String,
    pub answers: Vec<String>,
    /// Script-line text, `atom {a1, a2}` for answer sets.
    pub text: String,
    pub prompt: String,
}

impl QuestionView {
    pub fn of(q: &Question) -> QuestionView {
        QuestionView {
            question: q.kind.as_str().to_string(),
            atom: q.atom.to_string(),
            answers: q.answers.iter().map(|a| a.to_string()).collect(),
            text: q.text(),
            prompt: q.prompt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyView {
    pub atom: String,
    pub builtin: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseView {
    /// `insert/3 clause 3`.
    pub reference: String,
    pub index: usize,
    pub line: usize,
    pub column: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "verdict")]
pub struct VerdictView {
    /// `incorrect_clause` or `uncovered_atom`.
    #[serde(rename = "type")]
    pub verdict: String,
    pub procedure: String,
    pub clause: Option<ClauseView>,
    /// Head of the clause instance, or the uncovered atom.
    pub atom: String,
    pub body: Vec<BodyView>,
    pub witness: Option<String>,
    pub text: String,
    /// Outcome of the post-hoc validity check, when a specification is
    /// available.
    pub checked: Option<bool>,
}

impl VerdictView {
    pub fn of(v: &Verdict, checked: Option<bool>) -> VerdictView {
        let text = v.to_string();
        match v {
            Verdict::IncorrectClause { clause, head, body } => VerdictView {
                verdict: "incorrect_clause".into(),
                procedure: clause.origin.pred.to_string(),
                clause: Some(ClauseView {
                    reference: clause.origin.to_string(),
                    index: clause.origin.index,
                    line: clause.origin.line,
                    column: clause.origin.column,
                    text: clause.to_string(),
                }),
                atom: head.to_string(),
                body: body
                    .iter()
                    .map(|b| BodyView {
                        atom: b.atom.to_string(),
                        builtin: b.builtin,
                    })
                    .collect(),
                witness: None,
                text,
                checked,
            },
            Verdict::UncoveredAtom { atom, procedure, witness } => VerdictView {
                verdict: "uncovered_atom".into(),
                procedure: procedure.to_string(),
                clause: None,
                atom: atom.to_string(),
                body: Vec::new(),
                witness: witness.as_ref().map(|w| w.to_string()),
                text,
                checked,
            },
        }
    }
}

/// Why a session stopped without a verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopView {
    /// `not_a_symptom`, `inconclusive`, `aborted` or `failed`.
    pub reason: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "session.view")]
pub struct SessionView {
    pub id: String,
    pub mode: Mode,
    pub oracle: OracleMode,
    pub query: String,
    pub status: Status,
    pub answers: Option<AnswersView>,
    pub trace: Option<TraceView>,
    pub tree: Option<TreeView>,
    pub question: Option<QuestionView>,
    pub verdict: Option<VerdictView>,
    pub stopped: Option<StopView>,
    /// Number of transcript lines so far.
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "session.transcript")]
pub struct TranscriptView {
    pub id: String,
    pub lines: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "error")]
pub struct ErrorView {
    /// `bad_request`, `parse_error`, `unknown_session`, `busy`,
    /// `illegal_action`, `no_pending_question` or `engine_error`.
    pub code: String,
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn step_requests_decode() {
        let a: StepRequest = serde_json::from_value(json!({"kind": "session.step", "action": {"type": "move", "move": "v"}})).unwrap();
        assert_eq!(a.into_action(), Action::Move { mv: "v".into() });
        let a: StepRequest = serde_json::from_value(json!({"kind": "oracle.answer", "reply": "defer"})).unwrap();
        assert_eq!(a.into_action(), Action::Answer { reply: ReplyText::Defer });
        let a: StepRequest = serde_json::from_value(json!({"kind": "session.step", "action": {"type": "show_error"}})).unwrap();
        assert_eq!(a.into_action(), Action::ShowError);
        assert!(serde_json::from_value::<StepRequest>(json!({"kind": "session.view"})).is_err());
    }

    #[test]
    fn create_defaults() {
        let c: CreateSession =
            serde_json::from_value(json!({"kind": "session.create", "program": "p.", "mode": "tree", "query": "p"})).unwrap();
        assert_eq!(c.oracle, OracleMode::Human);
        assert_eq!(c.spec, None);
        assert_eq!(c.bounds, BoundsOverride::default());
    }

    #[test]
    fn kinds_are_tagged() {
        let e = serde_json::to_value(ErrorView {
            code: "busy".into(),
            message: "m".into(),
            line: None,
            column: None,
        })
        .unwrap();
        assert_eq!(e["kind"], "error");
    }
}
