//! Working-buffer accounting for filter evaluation.
//!
//! Every `n x F` buffer a filter holds across propagation hops is acquired
//! here as a *state* buffer; the single transient target used to flip a
//! propagation out-of-place is a *scratch* buffer. The caller's input and the
//! returned output are never counted. Peak state counts are the memory-class
//! metric (1 for coefficient chains, 2 for two-term recurrences, 3 for the
//! residual second-kind recurrence, summed per channel for lockstep banks);
//! byte totals include scratch.

use crate::matrix::SignalMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BufferReport {
    /// Peak number of simultaneously live state buffers.
    pub state_peak: usize,
    /// Peak number of simultaneously live scratch buffers.
    pub scratch_peak: usize,
    /// Peak bytes across state and scratch together.
    pub peak_bytes: usize,
}

/// Analytic buffer-count budget for a filter evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BufferBudget {
    pub state: usize,
    pub scratch: usize,
}

#[derive(Debug)]
pub struct Workspace {
    rows: usize,
    state_live: usize,
    state_peak: usize,
    scratch_live: usize,
    scratch_peak: usize,
    bytes_live: usize,
    bytes_peak: usize,
}

impl Workspace {
    pub fn new(rows: usize) -> Workspace {
        Workspace {
            rows,
            state_live: 0,
            state_peak: 0,
            scratch_live: 0,
            scratch_peak: 0,
            bytes_live: 0,
            bytes_peak: 0,
        }
    }

    fn bump_bytes(&mut self, cols: usize) {
        self.bytes_live += self.rows * cols * std::mem::size_of::<f64>();
        self.bytes_peak = self.bytes_peak.max(self.bytes_live);
    }

    fn drop_bytes(&mut self, m: &SignalMatrix) {
        self.bytes_live -= m.rows() * m.cols() * std::mem::size_of::<f64>();
    }

    /// Zeroed state buffer, counted until released.
    pub fn state(&mut self, cols: usize) -> SignalMatrix {
        self.state_live += 1;
        self.state_peak = self.state_peak.max(self.state_live);
        self.bump_bytes(cols);
        SignalMatrix::zeros(self.rows, cols)
    }

    /// State buffer initialised as a copy of `x`.
    pub fn state_copy_of(&mut self, x: &SignalMatrix) -> SignalMatrix {
        let mut m = self.state(x.cols());
        m.copy_from(x);
        m
    }

    pub fn release_state(&mut self, m: SignalMatrix) {
        debug_assert!(self.state_live > 0);
        self.state_live -= 1;
        self.drop_bytes(&m);
    }

    /// Release a state buffer and hand its storage out as the result, so the
    /// final recurrence value does not need a copy.
    pub fn release_state_into_output(&mut self, m: SignalMatrix) -> SignalMatrix {
        debug_assert!(self.state_live > 0);
        self.state_live -= 1;
        self.drop_bytes(&m);
        m
    }

    pub fn scratch(&mut self, cols: usize) -> SignalMatrix {
        self.scratch_live += 1;
        self.scratch_peak = self.scratch_peak.max(self.scratch_live);
        self.bump_bytes(cols);
        SignalMatrix::zeros(self.rows, cols)
    }

    pub fn release_scratch(&mut self, m: SignalMatrix) {
        debug_assert!(self.scratch_live > 0);
        self.scratch_live -= 1;
        self.drop_bytes(&m);
    }

    pub fn report(&self) -> BufferReport {
        BufferReport {
            state_peak: self.state_peak,
            scratch_peak: self.scratch_peak,
            peak_bytes: self.bytes_peak,
        }
    }

    /// All buffers must be back before the report is considered final.
    pub fn assert_drained(&self) {
        debug_assert_eq!(self.state_live, 0, "leaked state buffer");
        debug_assert_eq!(self.scratch_live, 0, "leaked scratch buffer");
    }
}
