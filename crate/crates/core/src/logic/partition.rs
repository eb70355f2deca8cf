//! Canonical concrete address assignments.
//!
//! A formula over addresses only observes which address terms are equal to
//! each other and to the literals it mentions, so instead of trying all
//! `(k+1)^n` assignments it suffices to try one representative per
//! equality pattern: a set partition of the address variables where each
//! block either carries a mentioned literal or the smallest address not
//! otherwise taken.

use std::collections::BTreeMap;

/// One representative assignment per equality pattern of `vars` relative
/// to each other and to `literals`, over the address space `a0..=aK`.
/// Patterns needing more distinct addresses than exist are skipped.
pub fn address_assignments(
    vars: &[String],
    literals: &[u32],
    k_addresses: u32,
) -> Vec<BTreeMap<String, u32>> {
    let mut lits: Vec<u32> = literals.to_vec();
    lits.sort_unstable();
    lits.dedup();
    let universe: Vec<u32> = (0..=k_addresses).collect();
    assert!(
        lits.iter().all(|l| universe.contains(l)),
        "address literal outside the configured address space"
    );

    let mut out = Vec::new();
    // Blocks are concrete addresses already in use; a variable may join an
    // existing block or open a fresh one with the smallest unused address.
    let mut blocks: Vec<u32> = lits.clone();
    let mut assignment: Vec<u32> = Vec::with_capacity(vars.len());

    fn recurse(
        vars: &[String],
        idx: usize,
        blocks: &mut Vec<u32>,
        assignment: &mut Vec<u32>,
        universe: &[u32],
        out: &mut Vec<BTreeMap<String, u32>>,
    ) {
        if idx == vars.len() {
            out.push(
                vars.iter()
                    .cloned()
                    .zip(assignment.iter().copied())
                    .collect(),
            );
            return;
        }
        for bi in 0..blocks.len() {
            assignment.push(blocks[bi]);
            recurse(vars, idx + 1, blocks, assignment, universe, out);
            assignment.pop();
        }
        if let Some(&fresh) = universe.iter().find(|a| !blocks.contains(a)) {
            blocks.push(fresh);
            assignment.push(fresh);
            recurse(vars, idx + 1, blocks, assignment, universe, out);
            assignment.pop();
            blocks.pop();
        }
    }

    recurse(vars, 0, &mut blocks, &mut assignment, &universe, &mut out);
    out
}
