use serde::Serialize;

/// One named pass/fail check with its worst residual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
}

impl Check {
    /// Passes iff `residual <= tol`.
    pub fn within(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            passed: residual <= tol,
            residual,
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            passed,
            residual: if passed { 0.0 } else { 1.0 },
        }
    }
}

/// An ordered list of checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// Folds `residual` into the check called `name`, creating it if needed.
    pub(crate) fn accumulate(&mut self, name: &str, residual: f64, tol: f64) {
        match self.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => {
                c.residual = c.residual.max(residual);
                c.passed = c.residual <= tol;
            }
            None => self.checks.push(Check::within(name, residual, tol)),
        }
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<28} {:<4} {:.3e}",
                c.name,
                if c.passed { "ok" } else { "FAIL" },
                c.residual
            )?;
        }
        Ok(())
    }
}
