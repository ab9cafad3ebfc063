use std::ops::AddAssign;

/// Per-run instrumentation counters.
///
/// A tally is owned by the caller of a search (or any other operation that
/// evaluates the field) so that concurrent runs never share mutable state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    /// Cost-function calls (`wfunc` invocations).
    pub cfc: u64,
    /// Current-model calls (flow-field samples).
    pub cmc: u64,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, rhs: Self) {
        self.cfc += rhs.cfc;
        self.cmc += rhs.cmc;
    }
}
