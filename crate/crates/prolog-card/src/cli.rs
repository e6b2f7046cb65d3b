//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when the analysis fails or the safety
//! check finds a violation, 2 on usage, I/O or parse errors.

use crate::absdom::AbsCfg;
use crate::ast::Program;
use crate::engine::safety::{check_safety, SafetyConfig};
use crate::engine::{analyze, Card, Domain, EngineConfig, Query, Sahlin};
use crate::report::Report;
use clap::{Parser, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    /// Abstract sequences over term patterns
    Card,
    /// Sahlin's six-atom cardinality domain
    Sahlin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Cardinality and determinacy analysis of Prolog programs with cut.
#[derive(Debug, Parser)]
#[command(name = "analyze", version)]
pub struct Args {
    /// Program source file
    pub file: PathBuf,
    /// Entry pattern such as `p(g,v)`; mode letters g, v, a, n, ng.
    /// Repeat for several entry points sharing one table.
    #[arg(short, long = "query", required = true)]
    pub queries: Vec<String>,
    #[arg(long, value_enum, default_value = "card")]
    pub domain: DomainArg,
    /// Pattern depth bound used by widening and call keys
    #[arg(long, default_value_t = 3)]
    pub widening_depth: usize,
    /// Turn off the arithmetic component of the card domain
    #[arg(long)]
    pub no_arith: bool,
    /// Iteration cap per table entry
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Check the result against the concrete interpreter
    #[arg(long)]
    pub check_safety: bool,
    /// Largest interpreter depth used by --check-safety
    #[arg(long, default_value_t = 6)]
    pub oracle_depth: usize,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            // --help and --version are not errors
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 2;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    match execute(&args) {
        Ok((text, ok)) => {
            let written = match &args.out {
                Some(p) => std::fs::write(p, &text).map_err(|e| format!("cannot write {}: {e}", p.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) if ok => 0,
                Ok(()) => {
                    let _ = writeln!(stderr, "error: safety check found violations");
                    1
                }
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    2
                }
            }
        }
        Err((code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

type Failure = (i32, String);

fn execute(args: &Args) -> Result<(String, bool), Failure> {
    let src =
        std::fs::read_to_string(&args.file).map_err(|e| (2, format!("cannot read {}: {e}", args.file.display())))?;
    let prog = Program::from_source(&src).map_err(|e| (2, format!("{}: {e}", args.file.display())))?;
    let queries =
        args.queries.iter().map(|q| Query::parse(q).map_err(|e| (2, e.to_string()))).collect::<Result<Vec<_>, _>>()?;
    for q in &queries {
        if prog.clauses(&q.pred).is_none() {
            return Err((2, format!("query {q}: no procedure {}", q.pred)));
        }
    }
    let name = args.file.display().to_string();
    match args.domain {
        DomainArg::Card => {
            let dom = Card::new(AbsCfg { depth: args.widening_depth, arith: !args.no_arith });
            report(args, &name, &prog, &dom, &queries)
        }
        DomainArg::Sahlin => report(args, &name, &prog, &Sahlin, &queries),
    }
}

fn report<D: Domain>(
    args: &Args,
    name: &str,
    prog: &Program,
    dom: &D,
    queries: &[Query],
) -> Result<(String, bool), Failure> {
    let an = analyze(prog, dom, queries, EngineConfig { max_iter: args.max_iter, ..EngineConfig::default() })
        .map_err(|e| (1, e.to_string()))?;
    let qnames: Vec<String> = queries.iter().map(Query::to_string).collect();
    let mut rep = Report::new(name, prog, dom, &qnames, &an);
    let mut ok = true;
    if args.check_safety {
        let cfg = SafetyConfig { depth: args.oracle_depth, ..SafetyConfig::default() };
        let rs = check_safety(prog, dom, &an, queries, &cfg);
        ok = rs.iter().all(|r| r.ok());
        rep.safety = Some(rs);
    }
    let text = match args.format {
        Format::Text => rep.to_text(),
        Format::Json => rep.to_json(),
    };
    Ok((text, ok))
}
