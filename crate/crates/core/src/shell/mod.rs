//! The input language: a line-oriented script of definitions, options and
//! commands, with a printer that parses back to the same tree.

pub mod ast;
pub mod eval;
pub mod lexer;
pub mod parser;

pub use ast::{Expr, Script, Stmt};
pub use eval::{run, RunFlags, RunOutput, Session, Value};
pub use parser::{parse, parse_expr};

/// Parses and runs; a syntax error gives exit code 2 with one error entry.
pub fn run_source(src: &str, flags: RunFlags) -> RunOutput {
    match parse(src) {
        Ok(s) => run(&s, flags),
        Err(e) => {
            let line = match &e {
                crate::MfError::SyntaxError { line, .. } => *line,
                _ => 0,
            };
            RunOutput {
                entries: vec![serde_json::json!({"line": line, "status": "error", "error": e.to_string()})],
                summary: vec![format!("error: {}", e)],
                exit_code: 2,
            }
        }
    }
}
