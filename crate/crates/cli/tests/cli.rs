use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_motfourier"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("motfourier-cli-{}", std::process::id()));
    fs::create_dir_all(&d).unwrap();
    d.join(name)
}

fn write(name: &str, body: &str) -> PathBuf {
    let p = scratch(name);
    fs::write(&p, body).unwrap();
    p
}

fn go(args: &[&str]) -> (i32, Value, String) {
    let out: Output = bin().args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json, String::from_utf8(out.stderr).unwrap())
}

fn input(name: &str, v: Value) -> String {
    write(name, &v.to_string()).to_str().unwrap().to_string()
}

#[test]
fn run_inversion_script() {
    let s = write("inv.mf", "fn f = chi(oball(0, 1))\nverify inversion f\n");
    let (code, json, err) = go(&["run", s.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json[0]["status"], "pass");
    assert!(err.contains("pass"), "{err}");
}

#[test]
fn empty_script_gives_empty_report() {
    let s = write("empty.mf", "");
    let (code, json, _) = go(&["run", s.to_str().unwrap()]);
    assert_eq!((code, json), (0, Value::Array(vec![])));
}

#[test]
fn not_integrable_names_the_packet() {
    let s = write("bad.mf", "fn f = expchar(t*x1)\nintegrate f\n");
    let (code, json, _) = go(&["run", s.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(json[0]["error"].as_str().unwrap().contains("packet[1](all; t*x1"));
}

#[test]
fn syntax_error_reports_the_position() {
    let s = write("syntax.mf", "g = chi(oball(0,1,\n");
    let (code, json, _) = go(&["run", s.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(json[0]["line"], 1);
}

#[test]
fn json_flag_writes_a_file() {
    let s = write("j.mf", "print O[1]*C[-1]\n");
    let out = scratch("j.json");
    let (code, stdout, _) = go(&["run", s.to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert_eq!((code, stdout), (0, Value::Null));
    let report: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report[0]["value"], "(e)");
}

#[test]
fn integrate_orders_and_forms() {
    let f = input("dual.json", serde_json::json!({"fn": "chi(cball(0, -1) × oball(0, 0)) * expchar(x1*x2)"}));
    for order in ["1,2", "2,1"] {
        let (code, json, _) = go(&["integrate", &f, "--order", order]);
        assert_eq!(code, 0);
        assert_eq!(json[0]["value"], "(e)");
    }
    let f = input("form.json", serde_json::json!({"fn": "chi(oball(0, 0))", "form": "t"}));
    let (_, json, _) = go(&["integrate", &f, "--with-form"]);
    assert_eq!(json[0]["form"], "rv(1, 1)");
    assert_eq!(json[0]["value"], "(O[0])");
}

#[test]
fn fourier_and_convolve() {
    let f = input("oo.json", serde_json::json!({"fn": "chi(cball(0, 0))", "g": "chi(cball(0, 0))"}));
    let (_, json, _) = go(&["fourier", &f]);
    assert_eq!(json[0]["value"], "packet[1](in(x1, oball(0, 0)); 0; (C[0]))");
    let (_, json, _) = go(&["convolve", &f]);
    assert_eq!(json[0]["value"], "packet[1](in(x1, cball(0, 0)); 0; (C[0]))");
    for id in ["inversion", "convolution", "plancherel", "product", "poisson", "equal"] {
        let mut args = vec!["verify", id, "--input", &f];
        if id == "poisson" {
            args.extend(["--subgroup", "cball(0, 0)"]);
        }
        let (code, json, err) = go(&args);
        assert_eq!(code, 0, "{id}: {err}");
        assert_eq!(json[0]["status"], "pass", "{id}");
    }
}

#[test]
fn unary_identity_without_g_and_missing_g() {
    let f = input("only.json", serde_json::json!({"fn": "chi(oball(0, 1))"}));
    assert_eq!(go(&["verify", "inversion", "--input", &f]).0, 0);
    assert_eq!(go(&["verify", "convolution", "--input", &f]).0, 2);
    let bad = input("unknown.json", serde_json::json!({"fn": "chi(oball(0, 1))", "extra": 1}));
    let (code, _, err) = go(&["verify", "inversion", "--input", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("extra"), "{err}");
}

#[test]
fn distributions() {
    let d = input("d.json", serde_json::json!({"dist": "fourier(regular(chi(cball(0, 0))))", "fn": "chi(oball(0, 1))"}));
    let (_, json, _) = go(&["dist-eval", "--input", &d, "--point", "[0]", "--radius", "1"]);
    assert_eq!(json[0]["value"], "(O[1]*C[0])");
    let (_, json, _) = go(&["dist-apply", "--input", &d]);
    assert_eq!(json[0]["value"], "(O[1]*C[0])");
    let (code, json, _) = go(&["dist-support", "--input", &d]);
    assert_eq!(code, 0);
    assert!(json[0]["value"].is_object());
    let (code, _, err) = go(&["dist-verify", "coherence", "--input", &d, "--args", "[t], 0, 2"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn weil_commands() {
    let f = input("w.json", serde_json::json!({"fn": "chi(cball(0, 0) × cball(0, 0))"}));
    let (_, json, _) = go(&["weil", "--word", "w", "--input", &f]);
    assert_eq!(json[0]["form"], "rv(i, 0)");
    assert_eq!(json[0]["function"], "packet[2](in(x1, oball(0, 0)) & in(x2, oball(0, 0)); 0; (C[0]^2*e^-1))");
    let (_, json, _) = go(&["weil", "--word", "w,w", "--input", &f]);
    assert_eq!(json[0]["form"], "rv(-1, 0)");
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus");
    let dir = corpus.join("weil");
    let (code, json, err) = go(&["weil-verify", "--corpus", dir.to_str().unwrap(), "--params", "[t, i]"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json.as_array().unwrap().len(), 10);
    // skew supports in the main corpus pick up square phases
    assert_eq!(go(&["weil-verify", "--corpus", corpus.to_str().unwrap()]).0, 2);
}

#[test]
fn newton_and_jacobian() {
    assert_eq!(go(&["limit-set", "x*y - 1"]).1[0]["value"], "Escape");
    assert_eq!(go(&["limit-set", "y^2 - (1 + x)"]).1[0]["value"], "Limits{-1, 1}");
    let (_, json, _) = go(&["newton", "t*y^2 - y + t"]);
    assert_eq!(json[0]["segments"].as_array().unwrap().len(), 2);
    assert_eq!(go(&["jacobian", "[t*x, t*y]", "--at", "[1, 1]"]).1[0]["value"], "t^2");
}

#[test]
fn oracle_at_two_primes() {
    let f = input("or.json", serde_json::json!({"fn": "chi(cball(0, 0)) * expchar(t^-1*x1)"}));
    for p in ["5", "13"] {
        let (code, json, _) = go(&["oracle", "--input", &f, "--p", p, "--level", "2"]);
        assert_eq!(code, 0);
        assert_eq!(json[0]["report"]["abs_error"], 0.0);
    }
    assert_eq!(go(&["oracle", "--input", &f, "--p", "7"]).0, 2);
}

#[test]
fn show_script_prints_the_lowering() {
    let f = input("show.json", serde_json::json!({"fn": "chi(oball(0, 1))", "defs": ["vf a = t"]}));
    let out = bin().args(["fourier", &f, "--show-script"]).output().unwrap();
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("vf a = t") && s.contains("fourier f"), "{s}");
}

#[test]
fn thread_count_does_not_change_reports() {
    let s = write("threads.mf", "fn f = chi(cball(0, 0) × cball(0, -1)) * expchar(t^-1*x1 + x2)\noracle f\nintegrate f\n");
    let run = |n: &str| bin().env("MOTFOURIER_THREADS", n).args(["run", s.to_str().unwrap(), "--level", "3"]).output().unwrap().stdout;
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("4"));
    assert_eq!(one, run("2"));
}
