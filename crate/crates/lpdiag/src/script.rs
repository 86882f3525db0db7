//! Oracle scripts: one `kind | question | reply` line per answer.
//!
//! ```text
//! # comments and blank lines are skipped
//! correct | isort([2,1,3],[2,3,1]) | no
//! satisfiable | insert(1,[],B) | yes
//! complete | isort([1],A) {isort([1],[1])} | yes
//! ```

use lpdiag_core::parser::{parse_atoms, parse_query};
use lpdiag_core::spec::{Asked, Question, QuestionKind, Reply, ScriptEntry};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

pub fn parse(text: &str) -> Result<Vec<ScriptEntry>, ScriptError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_line(line).map_err(|message| ScriptError { line: i + 1, message })?);
    }
    Ok(out)
}

/// Lists use `|` too, so the kind is split off at the first bar and the
/// reply at the last.
fn parse_line(line: &str) -> Result<ScriptEntry, String> {
    let (kind, rest) = line.split_once('|').ok_or("expected `kind | question | reply`")?;
    let (text, reply) = rest.rsplit_once('|').ok_or("expected `kind | question | reply`")?;
    let kind = QuestionKind::parse(kind.trim()).ok_or_else(|| format!("unknown question kind `{}`", kind.trim()))?;
    let reply = Reply::parse(reply.trim()).ok_or_else(|| format!("unknown reply `{}`", reply.trim()))?;
    let text = text.trim();
    let question = match kind {
        QuestionKind::Correct => Question::correct(parse_query(text).map_err(|e| e.to_string())?),
        QuestionKind::Satisfiable => Question::satisfiable(parse_query(text).map_err(|e| e.to_string())?),
        QuestionKind::Complete => {
            let open = text.find('{').ok_or("answer set `{...}` missing")?;
            let set = text[open..]
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or("unterminated answer set")?;
            // One variable scope for the atom and its answers.
            let joined = if set.trim().is_empty() {
                text[..open].trim().to_string()
            } else {
                format!("{}, {set}", text[..open].trim())
            };
            let mut atoms = parse_atoms(&joined).map_err(|e| e.to_string())?;
            let atom = atoms.remove(0);
            Question::complete(atom, atoms)
        }
    };
    Ok(ScriptEntry { question, reply })
}

/// Script line reproducing one logged answer.
pub fn line(asked: &Asked) -> String {
    format!("{} | {}", asked.question, asked.answered.reply)
}

/// A script that replays every fresh answer of an oracle log.
pub fn from_log(log: &[Asked]) -> String {
    log.iter().filter(|a| a.fresh).map(|a| line(a) + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpdiag_core::spec::Answered;
    use proptest::prelude::*;

    #[test]
    fn parses_all_kinds() {
        let s = parse(
            "# header\n\ncorrect | isort([2,1,3],[2,3,1]) | no\nsatisfiable | insert(1,[],B) | y\ncomplete | isort([X|Xs],A) {isort([1],[1]), isort([2],[2])} | defer\n",
        )
        .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].reply, Reply::No);
        assert_eq!(s[1].question.kind, QuestionKind::Satisfiable);
        assert_eq!(s[2].question.answers.len(), 2);
        assert_eq!(s[2].question.atom.to_string(), "isort([X|Xs],A)");
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse("correct | p | yes\nwrong | p | yes\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse("correct | p(").is_err());
        assert!(parse("complete | p(X) | yes").is_err());
    }

    fn atom_text() -> impl Strategy<Value = String> {
        let arg = prop_oneof![
            (-9i64..10).prop_map(|i| i.to_string()),
            Just("X".to_string()),
            Just("[]".to_string()),
            proptest::collection::vec(0i64..5, 1..4).prop_map(|v| format!("[{}|T]", v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))),
        ];
        proptest::collection::vec(arg, 1..4).prop_map(|args| format!("q({})", args.join(",")))
    }

    proptest! {
        #[test]
        fn logged_lines_parse_back(atom in atom_text(), answers in proptest::collection::vec(atom_text(), 0..3), k in 0usize..3, r in 0usize..3) {
            let mut atoms = parse_atoms(&std::iter::once(atom).chain(answers).collect::<Vec<_>>().join(", ")).unwrap();
            let atom = atoms.remove(0);
            let question = match k {
                0 => Question::correct(atom),
                1 => Question::satisfiable(atom),
                _ => Question::complete(atom, atoms),
            };
            let reply = [Reply::Yes, Reply::No, Reply::Deferred][r];
            let asked = Asked { question: question.clone(), answered: Answered::from(reply), fresh: true };
            let back = parse(&line(&asked)).unwrap();
            prop_assert_eq!(back.len(), 1);
            prop_assert_eq!(back[0].question.key(), question.key());
            prop_assert_eq!(back[0].reply, reply);
        }
    }
}
