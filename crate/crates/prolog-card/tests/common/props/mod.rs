//! Operation-level property suites. Each property is a function of the
//! number of cases so the per-suite tests and the acceptance run share
//! one definition.

pub mod absdom;
pub mod cardseq;
pub mod sahlin;

use proptest::test_runner::Config;

/// Cases per property in every suite.
pub const CASES: u32 = 10_000;

pub fn config(cases: u32) -> Config {
    Config { cases, failure_persistence: None, ..Config::default() }
}

/// A property run over the given number of cases; panics on failure.
pub type Prop = fn(u32);

/// Every property of every suite, with its suite name.
pub fn all() -> Vec<(&'static str, &'static str, Prop)> {
    let mut out = Vec::new();
    for (suite, props) in [("cardseq", cardseq::SUITE), ("sahlin", sahlin::SUITE), ("absdom", absdom::SUITE)] {
        out.extend(props.iter().map(|(name, f)| (suite, *name, *f)));
    }
    out
}
