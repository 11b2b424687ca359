use std::fmt;

/// What a check compares its observation against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Inclusive window.
    Within { lo: f64, hi: f64 },
    AtMost(f64),
    AtLeast(f64),
}

impl Tolerance {
    pub fn around(centre: f64, half_width: f64) -> Self {
        Tolerance::Within {
            lo: centre - half_width,
            hi: centre + half_width,
        }
    }

    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Tolerance::Within { lo, hi } => v >= lo && v <= hi,
            Tolerance::AtMost(t) => v <= t,
            Tolerance::AtLeast(t) => v >= t,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Tolerance::Within { lo, hi } => write!(f, "in [{lo}, {hi}]"),
            Tolerance::AtMost(t) => write!(f, "<= {t:e}"),
            Tolerance::AtLeast(t) => write!(f, ">= {t:e}"),
        }
    }
}

/// One numerical check with enough context to locate a failure.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub operation: &'static str,
    pub quantity: String,
    pub observed: f64,
    pub tolerance: Tolerance,
}

impl Check {
    pub fn new(
        module: &'static str,
        operation: &'static str,
        quantity: impl Into<String>,
        observed: f64,
        tolerance: Tolerance,
    ) -> Self {
        Self {
            module,
            operation,
            quantity: quantity.into(),
            observed,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.tolerance.admits(self.observed)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}::{} {}: observed {}, expected {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.module,
            self.operation,
            self.quantity,
            self.observed,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckLog {
    pub checks: Vec<Check>,
}

impl CheckLog {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn failed(&self) -> usize {
        self.failures().count()
    }
}
