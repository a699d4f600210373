//! Machine-readable verification reports.

use serde::Serialize;

use crate::error::MfResult;
use crate::motvalues::CElem;
use crate::wavefn::{fn_equal, EqMethod, MotFn, ProbeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub identity: String,
    pub lhs: String,
    pub rhs: String,
    pub status: Status,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Compares two functions; probing is the fallback to syntactic equality.
    pub fn functions(identity: &str, lhs: &MotFn, rhs: &MotFn, probes: ProbeConfig) -> MfResult<Report> {
        let m = fn_equal(lhs, rhs, probes)?;
        let detail = match &m {
            EqMethod::Differs { point, lhs, rhs } => Some(format!("at ({}): {} vs {}", point.join(", "), lhs, rhs)),
            _ => None,
        };
        Ok(Report {
            identity: identity.to_string(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            status: if m.holds() { Status::Pass } else { Status::Fail },
            method: m.label(),
            detail,
        })
    }

    /// Normal forms first, then the homogenized ring.
    pub fn values(identity: &str, lhs: &CElem, rhs: &CElem) -> Report {
        let (status, method) = if lhs == rhs {
            (Status::Pass, "syntactic")
        } else if lhs.homogenized_eq(rhs) {
            (Status::Pass, "homogenized")
        } else {
            (Status::Fail, "not syntactically equal")
        };
        Report {
            identity: identity.to_string(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            status,
            method: method.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Report {
        self.detail = Some(d.into());
        self
    }
}
