//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.
//!
//! Each criterion produces an [`Outcome`]; [`report`] prints one
//! `PASS`/`FAIL` line per criterion followed by indented detail lines.

use std::time::{Duration, Instant};

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub details: Vec<String>,
}

impl Outcome {
    pub fn new() -> Self {
        Outcome {
            passed: true,
            ..Default::default()
        }
    }

    /// Record a sub-check; any failing sub-check fails the criterion.
    pub fn expect(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.details.push(format!("{} {line}", if ok { "ok  " } else { "BAD " }));
    }

    /// Record a number that does not affect the verdict.
    pub fn note(&mut self, line: String) {
        self.details.push(format!("info {line}"));
    }
}

pub struct Criterion {
    pub id: &'static str,
    pub name: &'static str,
    pub budget: Option<Duration>,
    pub run: fn() -> Outcome,
}

/// Run every criterion in order and return the ids of those that failed.
pub fn report(criteria: &[Criterion]) -> Vec<&'static str> {
    let mut failed = Vec::new();
    for c in criteria {
        let start = Instant::now();
        let mut out = (c.run)();
        let elapsed = start.elapsed();
        if let Some(b) = c.budget {
            out.expect(elapsed < b, format!("runtime {:.1}s < {}s", elapsed.as_secs_f64(), b.as_secs()));
        }
        let status = if out.passed { "PASS" } else { "FAIL" };
        println!("{status} {} {}: {} ({:.1}s)", c.id, c.name, out.summary, elapsed.as_secs_f64());
        for d in &out.details {
            println!("    {d}");
        }
        if !out.passed {
            failed.push(c.id);
        }
    }
    failed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_bad_subcheck_fails_the_criterion() {
        let mut o = Outcome::new();
        o.expect(true, "a".into());
        o.note("b".into());
        assert!(o.passed);
        o.expect(false, "c".into());
        assert!(!o.passed);
        assert_eq!(o.details, ["ok   a", "info b", "BAD  c"]);
    }

    #[test]
    fn runtime_budget_is_enforced() {
        fn slow() -> Outcome {
            std::thread::sleep(Duration::from_millis(20));
            Outcome::new()
        }
        let crit = |ms| Criterion {
            id: "X",
            name: "x",
            budget: Some(Duration::from_millis(ms)),
            run: slow,
        };
        assert!(report(&[crit(10_000)]).is_empty());
        assert_eq!(report(&[crit(1)]), ["X"]);
    }
}
