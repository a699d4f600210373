//! The bundled test corpus, written in the script language.

use crate::distrib::Dist;
use crate::error::{MfError, MfResult};
use crate::shell::{parse, Session, Stmt, Value};
use crate::wavefn::MotFn;

pub const FUNCTIONS: &str = include_str!("../corpus/functions.mf");
pub const DISTRIBUTIONS: &str = include_str!("../corpus/distributions.mf");
pub const WEIL: &str = include_str!("../corpus/weil/weil.mf");

fn definitions(src: &str) -> MfResult<Vec<(String, Value)>> {
    let script = parse(src)?;
    let mut s = Session::default();
    let mut out = Vec::new();
    for l in &script.lines {
        match &l.stmt {
            Stmt::Def { .. } => {
                let name = s.exec_def(&l.stmt)?;
                out.push((name.clone(), s.get(&name).cloned().expect("just defined")));
            }
            _ => return Err(MfError::Invalid(format!("line {}: corpus files hold definitions only", l.line))),
        }
    }
    Ok(out)
}

fn fns_of(src: &str) -> Vec<(String, MotFn)> {
    definitions(src)
        .expect("corpus parses")
        .into_iter()
        .filter_map(|(n, v)| match v {
            Value::Fn { f, .. } => Some((n, f)),
            _ => None,
        })
        .collect()
}

/// All named corpus functions, in file order.
pub fn functions() -> Vec<(String, MotFn)> {
    fns_of(FUNCTIONS)
}

/// Functions on VF^2 for the SL2 action.
pub fn weil_functions() -> Vec<(String, MotFn)> {
    fns_of(WEIL)
}

pub fn of_arity(n: usize) -> Vec<(String, MotFn)> {
    functions().into_iter().filter(|(_, f)| f.arity == n).collect()
}

/// Locally constant, integrable, bounded support.
pub fn schwartz() -> Vec<(String, MotFn)> {
    functions().into_iter().filter(|(_, f)| f.check().schwartz).collect()
}

pub fn distributions() -> Vec<(String, Dist)> {
    definitions(DISTRIBUTIONS)
        .expect("corpus parses")
        .into_iter()
        .filter_map(|(n, v)| match v {
            Value::Dist(d) => Some((n, d)),
            _ => None,
        })
        .collect()
}

pub fn get(name: &str) -> Option<MotFn> {
    functions().into_iter().find(|(n, _)| n == name).map(|(_, f)| f)
}
