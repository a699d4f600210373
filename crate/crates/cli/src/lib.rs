//! Input files for the `motfourier` command line.

use std::fmt::Write as _;

use serde::Deserialize;

/// JSON input file. Expressions are in the script language; `defs` are
/// extra definition lines run first.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Input {
    #[serde(default)]
    pub defs: Vec<String>,
    #[serde(rename = "fn")]
    pub f: Option<String>,
    pub g: Option<String>,
    pub dist: Option<String>,
    pub dist2: Option<String>,
    pub subgroup: Option<String>,
    /// Constant volume form, a VF monomial.
    pub form: Option<String>,
}

impl Input {
    pub fn decode(text: &str) -> serde_json::Result<Input> {
        serde_json::from_str(text)
    }

    /// Definition lines binding `f`, `g`, `d`, `d2` and `H`.
    pub fn prelude(&self) -> String {
        let mut s = String::new();
        for d in &self.defs {
            writeln!(s, "{}", d).unwrap();
        }
        let named = [("fn f", &self.f), ("fn g", &self.g), ("dist d", &self.dist), ("dist d2", &self.dist2), ("H", &self.subgroup)];
        for (lhs, e) in named {
            if let Some(e) = e {
                writeln!(s, "{} = {}", lhs, e).unwrap();
            }
        }
        s
    }

    pub fn need(&self, what: &str) -> Result<(), String> {
        let ok = match what {
            "fn" => self.f.is_some(),
            "g" => self.g.is_some(),
            "dist" => self.dist.is_some(),
            _ => self.dist2.is_some(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("input needs a `{}` field", what))
        }
    }

    pub fn mod_clause(&self, flag: &Option<String>) -> String {
        match (flag, &self.subgroup) {
            (Some(h), _) => format!(" mod {}", h),
            (None, Some(_)) => " mod H".into(),
            _ => String::new(),
        }
    }
}
