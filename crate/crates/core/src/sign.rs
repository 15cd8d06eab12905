//! The Koszul sign engine.
//!
//! One rule governs every sign in the engine: when a graded operator jumps
//! over a prefix of a tensor expression, it picks up (-1)^(parity * sum of
//! displayed degrees in the prefix). Algebra entries are displayed in A[1]
//! and contribute their reduced degree |a| - 1; module entries contribute
//! their unreduced degree.

/// What kind of tensor factor an entry is, for degree bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    /// An algebra entry a, displayed in A[1]; contributes |a| - 1.
    Algebra,
    /// A module entry p; contributes |p|.
    Module,
    /// An entry whose displayed degree is given directly (shifted or
    /// t-weighted letters).
    Displayed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignEntry {
    pub kind: EntryKind,
    pub degree: i64,
}

impl SignEntry {
    pub fn algebra(degree: i64) -> SignEntry {
        SignEntry { kind: EntryKind::Algebra, degree }
    }

    pub fn module(degree: i64) -> SignEntry {
        SignEntry { kind: EntryKind::Module, degree }
    }

    pub fn displayed(degree: i64) -> SignEntry {
        SignEntry { kind: EntryKind::Displayed, degree }
    }

    pub fn displayed_degree(&self) -> i64 {
        match self.kind {
            EntryKind::Algebra => self.degree - 1,
            EntryKind::Module | EntryKind::Displayed => self.degree,
        }
    }
}

/// An ordered tensor context against which signs are computed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignContext {
    pub entries: Vec<SignEntry>,
}

impl SignContext {
    pub fn new(entries: Vec<SignEntry>) -> SignContext {
        SignContext { entries }
    }

    pub fn concat(&self, other: &SignContext) -> SignContext {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().copied());
        SignContext { entries }
    }

    /// Sum of displayed degrees of the entries strictly left of `block_start`.
    pub fn prefix_degree(&self, block_start: usize) -> i64 {
        self.entries[..block_start]
            .iter()
            .map(|e| e.displayed_degree())
            .sum()
    }

    pub fn total_degree(&self) -> i64 {
        self.prefix_degree(self.entries.len())
    }
}

/// (-1)^(operator_degree * prefix): the sign of commuting an operator of the
/// given degree past everything left of `block_start`.
pub fn koszul_sign(ctx: &SignContext, block_start: usize, operator_degree: i64) -> i64 {
    sign_pow(operator_degree * ctx.prefix_degree(block_start))
}

/// (-1)^k as an i64.
pub fn sign_pow(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_prefix_is_positive() {
        let ctx = SignContext::default();
        assert_eq!(koszul_sign(&ctx, 0, 1), 1);
        assert_eq!(koszul_sign(&ctx, 0, 5), 1);
    }

    #[test]
    fn single_algebra_entry() {
        // one algebra element of degree 2 (reduced degree 1), odd operator
        let ctx = SignContext::new(vec![SignEntry::algebra(2)]);
        assert_eq!(koszul_sign(&ctx, 1, 1), -1);
    }

    #[test]
    fn mixed_context_hand_evaluation() {
        // algebra degrees (1,2) and module degree 1: * = 0 + 1 + 1 = 2
        let ctx = SignContext::new(vec![
            SignEntry::algebra(1),
            SignEntry::algebra(2),
            SignEntry::module(1),
        ]);
        assert_eq!(koszul_sign(&ctx, 3, 1), 1);
    }

    #[test]
    fn multiplicative_over_concatenation() {
        let a = SignContext::new(vec![SignEntry::algebra(3), SignEntry::module(2)]);
        let b = SignContext::new(vec![SignEntry::algebra(0), SignEntry::displayed(1)]);
        let joined = a.concat(&b);
        for parity in 0..4 {
            let whole = koszul_sign(&joined, joined.entries.len(), parity);
            let parts = koszul_sign(&a, a.entries.len(), parity)
                * koszul_sign(&b, b.entries.len(), parity);
            assert_eq!(whole, parts);
        }
    }
}
