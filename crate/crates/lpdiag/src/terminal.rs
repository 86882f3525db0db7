//! Terminal oracle: prints each question and reads `y`, `n` or `d`.

use std::io::{BufRead, Write};

use lpdiag_core::spec::{Answered, OracleBackend, OracleError, Question, Reply};

pub struct TerminalOracle<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead + Send, W: Write + Send> TerminalOracle<R, W> {
    pub fn new(input: R, output: W) -> Self {
        TerminalOracle { input, output }
    }
}

impl<R: BufRead + Send, W: Write + Send> OracleBackend for TerminalOracle<R, W> {
    /// End of input or `a` aborts; anything unrecognised asks again.
    fn answer(&mut self, question: &Question) -> Result<Answered, OracleError> {
        let io = |e: std::io::Error| OracleError::Backend(e.to_string());
        loop {
            write!(self.output, "{} (y/n/d) ", question.prompt()).map_err(io)?;
            self.output.flush().map_err(io)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io)? == 0 {
                return Err(OracleError::Aborted);
            }
            let reply = line.trim().to_ascii_lowercase();
            if reply == "a" || reply == "abort" {
                return Err(OracleError::Aborted);
            }
            if let Some(r) = Reply::parse(&reply) {
                return Ok(r.into());
            }
            writeln!(self.output, "please answer y (yes), n (no), d (defer) or a (abort)").map_err(io)?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpdiag_core::parse_query;
    use std::io::Cursor;

    #[test]
    fn reads_replies_and_reprompts() {
        let mut out = Vec::new();
        let mut o = TerminalOracle::new(Cursor::new("maybe\nN\n\n"), &mut out);
        let q = Question::correct(parse_query("insert(1,[3],[3,1])").unwrap());
        assert_eq!(o.answer(&q).unwrap().reply, Reply::No);
        // A blank line prompts again, then end of input aborts.
        assert_eq!(o.answer(&q).unwrap_err(), OracleError::Aborted);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.matches("Is insert(1,[3],[3,1]) correct? (y/n/d) ").count(), 4);
        assert_eq!(text.matches("please answer").count(), 2);
    }

    #[test]
    fn abort_command() {
        let mut o = TerminalOracle::new(Cursor::new("a\n"), Vec::new());
        let q = Question::satisfiable(parse_query("p(X)").unwrap());
        assert_eq!(o.answer(&q).unwrap_err(), OracleError::Aborted);
    }
}
