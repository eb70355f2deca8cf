//! Candidate pool: every predicate the pipeline is currently tracking,
//! with its dynamic counters and lifecycle status.

use crate::spec::{canonical_key, Predicate, Scope};
use std::collections::HashSet;

/// Lifecycle of a candidate.
///
/// Detection moves `Pending` candidates to `Likely`, `Partial`, or
/// `Discarded`. Verification moves `Likely` (and implication candidates
/// entering as `Pending`) to `Verified`, `Refuted`, or `Undetermined`;
/// `Undetermined` means the prover gave up, which disables the candidate
/// but never counts as verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CandidateStatus {
    Pending,
    Likely,
    Partial,
    Discarded,
    Verified,
    Refuted,
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub id: usize,
    pub scope: Scope,
    pub pred: Predicate,
    /// Successful records on which the predicate evaluated to true.
    pub support: usize,
    /// Successful records on which it evaluated to false.
    pub refutations: usize,
    /// Successful records on which it was undefined.
    pub undefined: usize,
    pub status: CandidateStatus,
}

impl Candidate {
    pub fn key(&self) -> String {
        canonical_key(&self.scope, &self.pred)
    }
}

/// Pool of candidates with a global seen-set over canonical forms.
///
/// A predicate that was ever inserted — whatever its current status —
/// occupies its canonical form forever, so re-deriving it later (for
/// example during implication weakening) is a no-op.
#[derive(Debug, Clone, Default)]
pub struct CandidatePool {
    candidates: Vec<Candidate>,
    seen: HashSet<String>,
}

impl CandidatePool {
    pub fn new() -> CandidatePool {
        CandidatePool::default()
    }

    /// Insert a candidate unless its canonical form was already seen.
    /// Returns the new candidate's id, or `None` on a duplicate.
    pub fn insert(&mut self, scope: Scope, pred: Predicate) -> Option<usize> {
        let key = canonical_key(&scope, &pred);
        if !self.seen.insert(key) {
            return None;
        }
        let id = self.candidates.len();
        self.candidates.push(Candidate {
            id,
            scope,
            pred,
            support: 0,
            refutations: 0,
            undefined: 0,
            status: CandidateStatus::Pending,
        });
        Some(id)
    }

    pub fn contains(&self, scope: &Scope, pred: &Predicate) -> bool {
        self.seen.contains(&canonical_key(scope, pred))
    }

    pub fn get(&self, id: usize) -> &Candidate {
        &self.candidates[id]
    }

    pub fn get_mut(&mut self, id: usize) -> &mut Candidate {
        &mut self.candidates[id]
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.candidates.iter().map(|c| c.id)
    }

    pub fn with_status(&self, status: CandidateStatus) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(move |c| c.status == status)
    }

    /// Verified candidates, in insertion order.
    pub fn verified(&self) -> impl Iterator<Item = &Candidate> {
        self.with_status(CandidateStatus::Verified)
    }
}
