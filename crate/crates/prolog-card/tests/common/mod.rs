#![allow(dead_code)]

pub mod gen;
pub mod props;
pub mod sld;

use prolog_card::absdom::AbsCfg;
use prolog_card::ast::Program;
use prolog_card::engine::{analyze, Card, Domain, EngineConfig, Query, Sahlin};
use prolog_card::report::Report;
use std::path::PathBuf;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn load(dir: &str, file: &str) -> Program {
    let src = std::fs::read_to_string(crate_dir().join(dir).join(file)).unwrap();
    Program::from_source(&src).unwrap()
}

pub fn corpus(file: &str) -> Program {
    load("corpus", file)
}

/// Every corpus program with the entry patterns it is checked under.
pub const CORPUS: &[(&str, &[&str])] = &[
    ("is_last.pl", &["is_last(v,g)", "is_last(g,g)"]),
    ("partition1.pl", &["partition(g,g,v,v)"]),
    ("partition2.pl", &["partition(g,g,v,v)"]),
    ("compress.pl", &["compress(g,v)", "compress(v,g)"]),
    ("repeat.pl", &["repeat"]),
    ("pq.pl", &["p(v)", "p(g)"]),
    ("append.pl", &["append(g,g,v)", "append(v,v,g)"]),
    ("qsort.pl", &["qsort(g,v)"]),
];

/// The micro-benchmark programs.
pub const BENCH: &[(&str, &[&str])] = &[
    ("nrev.pl", &["nrev(g,v)"]),
    ("member.pl", &["member(v,g)", "memberchk(g,g)"]),
    ("max.pl", &["max_cut(g,g,v)", "max_cmp(g,g,v)"]),
    ("len.pl", &["len(g,v)"]),
    ("fib.pl", &["fib(g,v)"]),
    ("perm.pl", &["perm(g,v)"]),
    ("tree.pl", &["ins(g,g,v)"]),
    ("hanoi.pl", &["hanoi(g,g,g,g,v)"]),
];

/// Both program sets with their directories.
pub fn golden_programs() -> Vec<(&'static str, &'static str, &'static [&'static str])> {
    let c = CORPUS.iter().map(|(f, q)| ("corpus", *f, *q));
    let b = BENCH.iter().map(|(f, q)| ("bench-programs", *f, *q));
    c.chain(b).collect()
}

pub fn card_no_arith() -> Card {
    Card::new(AbsCfg { arith: false, ..AbsCfg::default() })
}

pub fn report<D: Domain>(dir: &str, file: &str, prog: &Program, dom: &D, q: &str) -> Report {
    let qs = [Query::parse(q).unwrap()];
    let an = analyze(prog, dom, &qs, EngineConfig::default()).unwrap();
    Report::new(&format!("{dir}/{file}"), prog, dom, &[q.to_string()], &an)
}

/// Text reports of every query under the card domain with and without
/// arithmetic and under Sahlin's domain, and the JSON reports of the
/// card domain.
pub fn golden(dir: &str, file: &str, queries: &[&str]) -> (String, String) {
    let prog = load(dir, file);
    let (mut text, mut json) = (String::new(), String::new());
    for q in queries {
        let card = report(dir, file, &prog, &Card::default(), q);
        text += &card.to_text();
        text += "% -- arithmetic off\n";
        text += &report(dir, file, &prog, &card_no_arith(), q).to_text();
        text += &report(dir, file, &prog, &Sahlin, q).to_text();
        json += &card.to_json();
    }
    (text, json)
}

pub fn golden_dir() -> PathBuf {
    crate_dir().join("tests").join("golden")
}

/// Golden file names for a program.
pub fn golden_paths(file: &str) -> (PathBuf, PathBuf) {
    let stem = file.trim_end_matches(".pl");
    (golden_dir().join(format!("{stem}.txt")), golden_dir().join(format!("{stem}.json")))
}

/// Golden files the current reports differ from.
pub fn golden_mismatches() -> Vec<String> {
    let mut bad = Vec::new();
    for (dir, file, qs) in golden_programs() {
        let (text, json) = golden(dir, file, qs);
        let (tp, jp) = golden_paths(file);
        if std::fs::read_to_string(&tp).ok().as_deref() != Some(text.as_str()) {
            bad.push(tp.display().to_string());
        }
        if std::fs::read_to_string(&jp).ok().as_deref() != Some(json.as_str()) {
            bad.push(jp.display().to_string());
        }
    }
    bad
}
