//! Human and machine reports for a finished analysis.

use crate::ast::Program;
use crate::cardseq::{Acf, Bound, TermInfo};
use crate::engine::safety::SafetyReport;
use crate::engine::{Analysis, Domain};
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Determinacy {
    FullyDeterministic,
    Deterministic,
    Nondeterministic,
}

impl Determinacy {
    pub fn name(self) -> &'static str {
        match self {
            Determinacy::FullyDeterministic => "fully-deterministic",
            Determinacy::Deterministic => "deterministic",
            Determinacy::Nondeterministic => "nondeterministic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryReport {
    pub predicate: String,
    pub arity: usize,
    pub input_pattern: String,
    pub output_pattern: String,
    pub m: u64,
    #[serde(rename = "M")]
    pub big_m: Bound,
    pub t: TermInfo,
    pub acf: Acf,
    pub deterministic: bool,
    pub fully_deterministic: bool,
    pub class: Determinacy,
    /// The whole abstract sequence as text.
    pub result: String,
    /// Entry point of some query.
    pub root: bool,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub np: usize,
    pub d: usize,
    pub pct_d: u32,
}

impl Summary {
    pub fn new(np: usize, d: usize) -> Summary {
        // round half up without floats
        let pct_d = if np == 0 { 0 } else { ((200 * d + np) / (2 * np)) as u32 };
        Summary { np, d, pct_d }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeadClause {
    pub predicate: String,
    pub arity: usize,
    /// 1-based position in the procedure.
    pub clause_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub program: String,
    pub domain: String,
    pub queries: Vec<String>,
    pub entries: Vec<EntryReport>,
    pub summary: Summary,
    pub dead_clauses: Vec<DeadClause>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safety: Option<Vec<SafetyReport>>,
}

impl Report {
    pub fn new<D: Domain>(program: &str, prog: &Program, dom: &D, queries: &[String], an: &Analysis<D>) -> Report {
        let entries = an
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let shape = dom.shape(&e.output);
                let det = dom.is_deterministic(&e.output);
                let full = dom.is_fully_deterministic(&e.output);
                EntryReport {
                    predicate: e.pred.name.clone(),
                    arity: e.pred.arity,
                    input_pattern: dom.render_input(&e.pred.name, &e.input),
                    output_pattern: dom.render_output(&e.pred.name, &e.output),
                    m: shape.lo,
                    big_m: shape.hi,
                    t: shape.t,
                    acf: e.acf,
                    deterministic: det,
                    fully_deterministic: full,
                    class: match (full, det) {
                        (true, _) => Determinacy::FullyDeterministic,
                        (_, true) => Determinacy::Deterministic,
                        _ => Determinacy::Nondeterministic,
                    },
                    result: dom.render(&e.pred.name, &e.output),
                    root: an.roots.contains(&i),
                    iterations: e.iterations,
                }
            })
            .collect();
        let (np, d) = an.determinacy(dom);
        let dead_clauses = an
            .dead_clauses(prog)
            .into_iter()
            .map(|(k, i)| DeadClause { predicate: k.name, arity: k.arity, clause_index: i + 1 })
            .collect();
        Report {
            program: program.to_string(),
            domain: dom.name().to_string(),
            queries: queries.to_vec(),
            entries,
            summary: Summary::new(np, d),
            dead_clauses,
            safety: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "% program {} (domain {})", self.program, self.domain);
        for q in &self.queries {
            let _ = writeln!(out, "% query {q}");
        }
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}{} -> {}  {} acf={}",
                if e.root { "" } else { "  " },
                e.input_pattern,
                e.result,
                e.class.name(),
                e.acf.name()
            );
        }
        let s = self.summary;
        let _ = writeln!(out, "% NP={} D={} %D={}", s.np, s.d, s.pct_d);
        if self.dead_clauses.is_empty() {
            let _ = writeln!(out, "% dead clauses: none");
        } else {
            let ds: Vec<String> =
                self.dead_clauses.iter().map(|d| format!("{}/{}#{}", d.predicate, d.arity, d.clause_index)).collect();
            let _ = writeln!(out, "% dead clauses: {}", ds.join(" "));
        }
        for r in self.safety.iter().flatten() {
            let _ = writeln!(
                out,
                "% safety {}: {} inputs, {} checks, {} skipped, {}{} violations",
                r.query,
                r.inputs,
                r.checks,
                r.skipped,
                if r.exhaustive { "" } else { "sampled, " },
                r.violations.len()
            );
            for v in &r.violations {
                let _ = writeln!(out, "%   k={} input {} gave {} outside {}", v.k, v.input, v.concrete, v.abstract_);
            }
        }
        out
    }
}
