//! `motfourier`: command-line front end.
//!
//! Every subcommand is lowered to a script and run through the shell, so the
//! reports are the same whichever way a computation is requested.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use motfourier_core::shell::{parse, run_source, RunFlags, RunOutput, Session, Stmt, Value};
use motfourier_cli::Input;

#[derive(Parser)]
#[command(name = "motfourier", version, about = "Symbolic motivic integration with additive characters")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    level: Option<u32>,
    /// Print the generated script and exit.
    #[arg(long)]
    show_script: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a script.
    Run {
        script: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate `fn` over all variables.
    Integrate {
        input: PathBuf,
        /// 1-based variable order, e.g. 2,1,3.
        #[arg(long, value_delimiter = ',')]
        order: Vec<u32>,
        #[arg(long)]
        with_form: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Fourier transform of `fn`.
    Fourier {
        input: PathBuf,
        #[arg(long)]
        subgroup: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Convolution of `fn` with `g`.
    Convolve {
        input: PathBuf,
        #[arg(long)]
        subgroup: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// inversion, plancherel, plancherel-classical, convolution, product, poisson, equal
    Verify {
        identity: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        subgroup: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate `dist` on the ball of the given center and radius.
    DistEval {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        radius: String,
        #[command(flatten)]
        common: Common,
    },
    /// Apply `dist` to the test function `fn`.
    DistApply {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Certified support bound of `dist`.
    DistSupport {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// coherence, dist-fourier, tensor-fourier, conv-fourier; `--args` holds
    /// whatever follows the distribution.
    DistVerify {
        identity: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        args: String,
        #[command(flatten)]
        common: Common,
    },
    /// Act on (`fn`, form) by a word in the SL2 generators.
    Weil {
        /// Generators, leftmost applied last: "w,u(t),s(t^-1)".
        #[arg(long)]
        word: String,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Checks the SL2 relations on every function of arity 2 in the `.mf`
    /// files of a directory.
    WeilVerify {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        params: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Limit set of y as x goes to 0 on g(x, y) = 0.
    LimitSet {
        poly: String,
        #[command(flatten)]
        common: Common,
    },
    /// Newton polygon in one variable.
    Newton {
        poly: String,
        #[arg(long)]
        var: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Jacobian determinant of a polynomial map at a point.
    Jacobian {
        map: String,
        #[arg(long)]
        at: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the symbolic integral of `fn` with the p-adic character sum.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

type CliResult<T> = Result<T, String>;

fn read_input(path: &Path) -> CliResult<Input> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    Input::decode(&text).map_err(|e| format!("{}: {}", path.display(), e))
}

fn read_script(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))
}

/// Arity-2 function names defined in the `.mf` files under `dir`, with the
/// concatenated source.
fn weil_corpus(dir: &Path) -> CliResult<(String, Vec<String>)> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {}", dir.display(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mf"))
        .collect();
    files.sort();
    let mut src = String::new();
    let mut names = Vec::new();
    let mut session = Session::default();
    for path in files {
        let text = read_script(&path)?;
        let script = parse(&text).map_err(|e| format!("{}: {}", path.display(), e))?;
        for l in &script.lines {
            if let Stmt::Def { .. } = l.stmt {
                let name = session.exec_def(&l.stmt).map_err(|e| format!("{}:{}: {}", path.display(), l.line, e))?;
                if let Some(Value::Fn { f, .. }) = session.get(&name) {
                    if f.arity == 2 {
                        names.push(name);
                    }
                }
            }
        }
        src.push_str(&text);
        src.push('\n');
    }
    Ok((src, names))
}

const WEIL_PARAMS: &str = "[t^-2, t^-1, 1, t, t^2, i*t^-2, i*t^-1, i, i*t, i*t^2]";

fn script_for(cmd: &Cmd) -> CliResult<(String, Common)> {
    let mut s = String::new();
    let common = match cmd {
        Cmd::Run { script, common } => {
            s = read_script(script)?;
            common
        }
        Cmd::Integrate { input, order, with_form, common } => {
            let inp = read_input(input)?;
            inp.need("fn")?;
            s += &inp.prelude();
            s += "integrate f";
            if !order.is_empty() {
                let o: Vec<String> = order.iter().map(|k| k.to_string()).collect();
                write!(s, " order [{}]", o.join(", ")).unwrap();
            }
            if *with_form {
                write!(s, " form {}", inp.form.as_deref().unwrap_or("1")).unwrap();
            }
            common
        }
        Cmd::Fourier { input, subgroup, common } => {
            let inp = read_input(input)?;
            s += &inp.prelude();
            if inp.f.is_some() {
                writeln!(s, "fourier f{}", inp.mod_clause(subgroup)).unwrap();
            } else {
                inp.need("dist")?;
                writeln!(s, "print fourier(d)").unwrap();
            }
            common
        }
        Cmd::Convolve { input, subgroup, common } => {
            let inp = read_input(input)?;
            inp.need("fn")?;
            inp.need("g")?;
            s += &inp.prelude();
            writeln!(s, "convolve f, g{}", inp.mod_clause(subgroup)).unwrap();
            common
        }
        Cmd::Verify { identity, input, subgroup, common } => {
            let inp = read_input(input)?;
            inp.need("fn")?;
            s += &inp.prelude();
            let unary = matches!(identity.as_str(), "inversion" | "poisson" | "oracle" | "relations");
            if !unary {
                inp.need("g")?;
            }
            let args = if unary { "f" } else { "f, g" };
            writeln!(s, "verify {} {}{}", identity, args, inp.mod_clause(subgroup)).unwrap();
            common
        }
        Cmd::DistEval { input, point, radius, common } => {
            let inp = read_input(input)?;
            inp.need("dist")?;
            s += &inp.prelude();
            writeln!(s, "dist-eval d, {}, {}", point, radius).unwrap();
            common
        }
        Cmd::DistApply { input, common } => {
            let inp = read_input(input)?;
            inp.need("dist")?;
            inp.need("fn")?;
            s += &inp.prelude();
            writeln!(s, "dist-apply d, f").unwrap();
            common
        }
        Cmd::DistSupport { input, common } => {
            let inp = read_input(input)?;
            inp.need("dist")?;
            s += &inp.prelude();
            writeln!(s, "dist-support d").unwrap();
            common
        }
        Cmd::DistVerify { identity, input, args, common } => {
            let inp = read_input(input)?;
            inp.need("dist")?;
            s += &inp.prelude();
            let rest = args.trim();
            if rest.is_empty() {
                writeln!(s, "verify {} d", identity).unwrap();
            } else {
                writeln!(s, "verify {} d, {}", identity, rest).unwrap();
            }
            common
        }
        Cmd::Weil { word, input, common } => {
            let inp = read_input(input)?;
            inp.need("fn")?;
            s += &inp.prelude();
            writeln!(s, "weil [{}], f", word).unwrap();
            common
        }
        Cmd::WeilVerify { corpus, params, common } => {
            let (src, names) = weil_corpus(corpus)?;
            s += &src;
            let ps = params.as_deref().unwrap_or(WEIL_PARAMS);
            for n in names {
                writeln!(s, "verify relations {}, {}", n, ps).unwrap();
            }
            common
        }
        Cmd::LimitSet { poly, common } => {
            writeln!(s, "limit-set {}", poly).unwrap();
            common
        }
        Cmd::Newton { poly, var, common } => {
            match var {
                Some(v) => writeln!(s, "newton {}, {}", poly, v).unwrap(),
                None => writeln!(s, "newton {}", poly).unwrap(),
            }
            common
        }
        Cmd::Jacobian { map, at, common } => {
            writeln!(s, "jacobian {} at {}", map, at).unwrap();
            common
        }
        Cmd::Oracle { input, common } => {
            let inp = read_input(input)?;
            inp.need("fn")?;
            s += &inp.prelude();
            writeln!(s, "oracle f").unwrap();
            common
        }
    };
    Ok((s, common.clone()))
}

fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("MOTFOURIER_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| format!("MOTFOURIER_THREADS: not a number: {}", v))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("MOTFOURIER_THREADS: {}", e))?;
    }
    Ok(())
}

fn emit(out: &RunOutput, common: &Common) -> CliResult<()> {
    let json = out.to_json();
    match &common.json {
        Some(path) => fs::write(path, json + "\n").map_err(|e| format!("{}: {}", path.display(), e))?,
        None => println!("{}", json),
    }
    for line in &out.summary {
        eprintln!("{}", line);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = init_threads().and_then(|_| script_for(&cli.cmd)).and_then(|(src, common)| {
        if common.show_script {
            print!("{}", src);
            return Ok(0);
        }
        let flags = RunFlags { p: common.p, level: common.level, probes: None };
        let out = run_source(&src, flags);
        emit(&out, &common)?;
        Ok(out.exit_code)
    });
    match res {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("motfourier: {}", e);
            ExitCode::from(2)
        }
    }
}
