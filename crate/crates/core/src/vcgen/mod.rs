//! Verification-condition generation.
//!
//! [`gen_vcs`] turns each candidate invariant into queries over the paths
//! of one public function. Primitive candidates get one obligation per
//! path and exit point. Implication-shaped postconditions instead follow
//! the single path their premise selects: at every branch the generator
//! asks the backend whether the collected assumptions decide the
//! condition, and gives up with a "premise-contingent" marker when they do
//! not — the weakening loop then strengthens the premise until they do.
//!
//! Obligations assume the enabled contract invariants at entry, plus — for
//! postconditions and invariants, never for precondition candidates
//! themselves — the enabled preconditions of the function. Precondition
//! obligations must not assume each other: two circular candidates would
//! otherwise "verify" each other with no execution ever establishing
//! either.

mod encode;
mod sym;

pub(crate) use encode::{encode_predicate, EncodeCx, StateView};
pub(crate) use sym::Vcx;

use crate::detect::templates::mentions_phase;
use crate::lang::ast::{Function, VarDecl};
use crate::lang::Contract;
use crate::logic::prover::visit_terms;
use crate::logic::{
    BackendConfig, Formula, MapTerm, ObligationSource, Sort, Term, VerificationQuery,
};
use crate::spec::{Phase, Predicate, Scope, SpecExpr};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use sym::{entry_state, exec_function, Flow, Mode};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VcError {
    #[error("no public function `{0}`")]
    UnknownFunction(String),
}

/// A pool candidate as the generator sees it: the id ties refutations back
/// to the pool entry.
#[derive(Clone, Copy)]
pub struct CandidateRef<'a> {
    pub id: usize,
    pub scope: &'a Scope,
    pub pred: &'a Predicate,
}

/// Sort and range registry for every symbol the generator mints. Ranges
/// become explicit bound assumptions on each query, since the formula
/// layer works over unbounded integers.
#[derive(Default)]
pub(crate) struct Symbols {
    pub vars: BTreeMap<String, Sort>,
    pub maps: BTreeMap<String, Sort>,
    var_ranges: BTreeMap<String, (Option<BigInt>, Option<BigInt>)>,
    map_ranges: BTreeMap<String, (Option<BigInt>, Option<BigInt>)>,
}

impl Symbols {
    pub fn int_var(&mut self, name: &str, lo: Option<BigInt>, hi: Option<BigInt>) {
        self.vars.insert(name.into(), Sort::Int);
        self.var_ranges.insert(name.into(), (lo, hi));
    }

    pub fn bool_var(&mut self, name: &str) {
        self.vars.insert(name.into(), Sort::Bool);
    }

    pub fn addr_var(&mut self, name: &str) {
        self.vars.insert(name.into(), Sort::Addr);
    }

    pub fn map(&mut self, base: &str, value: Sort, range: (Option<BigInt>, Option<BigInt>)) {
        self.maps.insert(base.into(), value);
        if value == Sort::Int {
            self.map_ranges.insert(base.into(), range);
        }
    }

    fn prime_var(&mut self, name: &str, primed: &str) {
        if let Some(sort) = self.vars.get(name).copied() {
            self.vars.insert(primed.into(), sort);
        }
        if let Some(r) = self.var_ranges.get(name).cloned() {
            self.var_ranges.insert(primed.into(), r);
        }
    }

    fn prime_map(&mut self, base: &str, primed: &str) {
        if let Some(sort) = self.maps.get(base).copied() {
            self.maps.insert(primed.into(), sort);
        }
        if let Some(r) = self.map_ranges.get(base).cloned() {
            self.map_ranges.insert(primed.into(), r);
        }
    }

    /// Range assumptions for every bounded symbol and integer mapping read
    /// occurring in the formulas.
    pub fn bounds(&self, fs: &[&Formula]) -> Vec<Formula> {
        let mut out = BTreeSet::new();
        let mut visit = |t: &Term| {
            let range = match t {
                Term::Var(n) => self.var_ranges.get(n),
                Term::Select(m, _) => self.map_ranges.get(m.base_name()),
                _ => None,
            };
            if let Some((lo, hi)) = range {
                if let Some(lo) = lo {
                    out.insert(Formula::cmp(
                        crate::spec::CmpOp::Ge,
                        t.clone(),
                        Term::Int(lo.clone()),
                    ));
                }
                if let Some(hi) = hi {
                    out.insert(Formula::cmp(
                        crate::spec::CmpOp::Le,
                        t.clone(),
                        Term::Int(hi.clone()),
                    ));
                }
            }
        };
        for f in fs {
            visit_terms(f, &mut visit);
        }
        out.into_iter().collect()
    }
}

fn implication_parts(p: &Predicate) -> Option<(&Predicate, &Predicate)> {
    match p {
        Predicate::Implies(a, b) => Some((a, b)),
        _ => None,
    }
}

fn pred_exprs<'p>(p: &'p Predicate, out: &mut Vec<&'p SpecExpr>) {
    match p {
        Predicate::False => {}
        Predicate::Atom(_, a, b) => out.extend([a, b]),
        Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|q| pred_exprs(q, out)),
        Predicate::Implies(a, b) => {
            pred_exprs(a, out);
            pred_exprs(b, out);
        }
    }
}

fn mentions_post(p: &Predicate) -> bool {
    let mut es = Vec::new();
    pred_exprs(p, &mut es);
    es.iter().any(|e| mentions_phase(e, Phase::Post))
}

fn finish_query(
    symbols: &Symbols,
    function: &str,
    tag: &str,
    mut assumptions: Vec<Formula>,
    obligation: Formula,
    source: ObligationSource,
) -> VerificationQuery {
    let refs: Vec<&Formula> = assumptions.iter().chain(std::iter::once(&obligation)).collect();
    let mut fs = symbols.bounds(&refs);
    fs.append(&mut assumptions);
    VerificationQuery {
        function: function.into(),
        path: tag.into(),
        vars: symbols.vars.clone(),
        maps: symbols.maps.clone(),
        assumptions: fs,
        obligation,
        source,
        blocked: None,
    }
}

fn blocked_query(
    symbols: &Symbols,
    function: &str,
    tag: &str,
    id: usize,
    reason: String,
) -> VerificationQuery {
    VerificationQuery {
        function: function.into(),
        path: tag.into(),
        vars: symbols.vars.clone(),
        maps: symbols.maps.clone(),
        assumptions: Vec::new(),
        obligation: Formula::True,
        source: ObligationSource::Candidate(id),
        blocked: Some(reason),
    }
}

/// Compiles the enabled candidates into verification queries over the
/// paths of one public function. `assumed` invariants are taken as given
/// (they survived earlier rounds) but produce no obligations here.
pub fn gen_vcs(
    contract: &Contract,
    function: &str,
    enabled: &[CandidateRef],
    assumed: &[(Scope, Predicate)],
    config: &BackendConfig,
) -> Result<Vec<VerificationQuery>, VcError> {
    let Some(f) = contract.public_functions().find(|g| g.name == function) else {
        return Err(VcError::UnknownFunction(function.into()));
    };

    let mut cinv = Vec::new();
    let mut reqs = Vec::new();
    let mut ens_prim = Vec::new();
    let mut ens_impl = Vec::new();
    for c in enabled {
        match c.scope {
            Scope::ContractInv => cinv.push(*c),
            Scope::Requires(g) if g == function => reqs.push(*c),
            Scope::Ensures(g) if g == function => match implication_parts(c.pred) {
                Some((h, _)) if !mentions_post(h) => ens_impl.push(*c),
                _ => ens_prim.push(*c),
            },
            _ => {}
        }
    }

    let mut vcx = Vcx::new(contract, config);
    let (entry, env) = entry_state(&f.params, &mut vcx);
    let entry_scalars = entry.scalars.clone();
    let entry_maps = entry.maps.clone();
    let no_writes = BTreeSet::new();
    let entry_view = StateView {
        scalars: &entry_scalars,
        maps: &entry_maps,
        written: &no_writes,
    };
    let umax = config.uint_max();
    let ecx_entry = EncodeCx {
        contract,
        pre: entry_view,
        post: entry_view,
        params: &env.params,
        param_types: &env.param_types,
        max: &umax,
    };

    // Entry-state assumptions. A candidate whose encoding fails is simply
    // not assumed, which only weakens the premises.
    let inv_preds = cinv
        .iter()
        .map(|c| c.pred)
        .chain(assumed.iter().filter(|(s, _)| *s == Scope::ContractInv).map(|(_, p)| p));
    let inv_entry: Vec<Formula> =
        inv_preds.filter_map(|p| encode_predicate(&ecx_entry, p).ok()).collect();
    let req_preds = reqs.iter().map(|c| c.pred).chain(
        assumed
            .iter()
            .filter(|(s, _)| matches!(s, Scope::Requires(g) if g == function))
            .map(|(_, p)| p),
    );
    let req_entry: Vec<Formula> =
        req_preds.filter_map(|p| encode_predicate(&ecx_entry, p).ok()).collect();

    let mut queries = Vec::new();
    vcx.collect_asserts = true;
    let flows = exec_function(entry.clone(), f, &mut vcx, Mode::All);
    vcx.collect_asserts = false;

    for flow in &flows {
        match flow {
            Flow::Exit(st) => {
                let exit_view = StateView {
                    scalars: &st.scalars,
                    maps: &st.maps,
                    written: &st.written,
                };
                let ecx_post = EncodeCx { pre: entry_view, post: exit_view, ..ecx_entry };
                let ecx_exit = EncodeCx { pre: exit_view, post: exit_view, ..ecx_entry };
                for c in &cinv {
                    queries.push(obligation_query(
                        &vcx, function, &st.tag, c,
                        encode_predicate(&ecx_exit, c.pred),
                        [&inv_entry, &req_entry, &st.path],
                    ));
                }
                for c in &reqs {
                    queries.push(obligation_query(
                        &vcx, function, &st.tag, c,
                        encode_predicate(&ecx_entry, c.pred),
                        [&inv_entry, &[], &st.path],
                    ));
                }
                for c in &ens_prim {
                    queries.push(obligation_query(
                        &vcx, function, &st.tag, c,
                        encode_predicate(&ecx_post, c.pred),
                        [&inv_entry, &req_entry, &st.path],
                    ));
                }
            }
            Flow::Blocked(st, reason) => {
                for c in cinv.iter().chain(&ens_prim) {
                    queries.push(blocked_query(&vcx.symbols, function, &st.tag, c.id, reason.clone()));
                }
                // Precondition obligations hold or fail at entry, so the
                // assumptions collected up to the block point still apply
                // to every execution passing through it.
                for c in &reqs {
                    queries.push(obligation_query(
                        &vcx, function, &st.tag, c,
                        encode_predicate(&ecx_entry, c.pred),
                        [&inv_entry, &[], &st.path],
                    ));
                }
            }
            Flow::Cont(_) => unreachable!("normalized by exec_function"),
        }
    }

    for a in std::mem::take(&mut vcx.asserts) {
        let mut assumptions = inv_entry.clone();
        assumptions.extend(req_entry.iter().cloned());
        assumptions.extend(a.path);
        queries.push(finish_query(
            &vcx.symbols,
            function,
            &a.tag,
            assumptions,
            a.check,
            ObligationSource::Assertion(a.label),
        ));
    }

    for c in &ens_impl {
        let (h, t) = implication_parts(c.pred).expect("classified as implication");
        let eta = match encode_predicate(&ecx_entry, h) {
            Ok(f) => f,
            Err(m) => {
                queries.push(blocked_query(
                    &vcx.symbols, function, "p", c.id,
                    format!("out-of-fragment: {m}"),
                ));
                continue;
            }
        };
        let mut base = inv_entry.clone();
        base.extend(req_entry.iter().cloned());
        base.push(eta);
        let dflows = exec_function(entry.clone(), f, &mut vcx, Mode::Directed { base: &base });
        if dflows.is_empty() {
            // Every execution satisfying the premise reverts; the
            // implication holds vacuously.
            queries.push(finish_query(
                &vcx.symbols, function, "p",
                base.clone(),
                Formula::True,
                ObligationSource::Candidate(c.id),
            ));
            continue;
        }
        for fl in dflows {
            match fl {
                Flow::Exit(st) => {
                    let exit_view = StateView {
                        scalars: &st.scalars,
                        maps: &st.maps,
                        written: &st.written,
                    };
                    let ecx_post = EncodeCx { pre: entry_view, post: exit_view, ..ecx_entry };
                    match encode_predicate(&ecx_post, t) {
                        Ok(ob) => {
                            let mut assumptions = base.clone();
                            assumptions.extend(st.path.iter().cloned());
                            queries.push(finish_query(
                                &vcx.symbols, function, &st.tag,
                                assumptions, ob,
                                ObligationSource::Candidate(c.id),
                            ));
                        }
                        Err(m) => queries.push(blocked_query(
                            &vcx.symbols, function, &st.tag, c.id,
                            format!("out-of-fragment: {m}"),
                        )),
                    }
                }
                Flow::Blocked(st, reason) => {
                    queries.push(blocked_query(&vcx.symbols, function, &st.tag, c.id, reason));
                }
                Flow::Cont(_) => unreachable!("normalized by exec_function"),
            }
        }
    }

    Ok(queries)
}

fn obligation_query(
    vcx: &Vcx,
    function: &str,
    tag: &str,
    c: &CandidateRef,
    encoded: Result<Formula, String>,
    assumption_sets: [&[Formula]; 3],
) -> VerificationQuery {
    match encoded {
        Ok(ob) => {
            let assumptions: Vec<Formula> =
                assumption_sets.iter().flat_map(|s| s.iter().cloned()).collect();
            finish_query(
                &vcx.symbols,
                function,
                tag,
                assumptions,
                ob,
                ObligationSource::Candidate(c.id),
            )
        }
        Err(m) => blocked_query(&vcx.symbols, function, tag, c.id, format!("out-of-fragment: {m}")),
    }
}

/// Unconstrained pre/post views over fresh symbols, for entailment checks
/// between predicates: the post state reads primed symbols that nothing
/// relates to the entry ones.
pub(crate) struct HavocEnv {
    pre_scalars: BTreeMap<String, Term>,
    pre_maps: BTreeMap<String, MapTerm>,
    post_scalars: BTreeMap<String, Term>,
    post_maps: BTreeMap<String, MapTerm>,
    params: BTreeMap<String, Term>,
    param_types: BTreeMap<String, crate::lang::Type>,
    pub symbols: Symbols,
    max: BigInt,
    no_writes: BTreeSet<String>,
}

pub(crate) fn havoc_env(
    contract: &Contract,
    function: Option<&Function>,
    two_state: bool,
    config: &BackendConfig,
) -> HavocEnv {
    let mut vcx = Vcx::new(contract, config);
    let params: &[VarDecl] = function.map(|f| f.params.as_slice()).unwrap_or(&[]);
    let (st, env) = entry_state(params, &mut vcx);
    let mut symbols = std::mem::take(&mut vcx.symbols);
    let (post_scalars, post_maps) = if two_state {
        let ps = st
            .scalars
            .iter()
            .map(|(k, v)| {
                let Term::Var(n) = v else { unreachable!("entry slots are symbols") };
                let pn = format!("{n}'");
                symbols.prime_var(n, &pn);
                (k.clone(), Term::Var(pn))
            })
            .collect();
        let pm = st
            .maps
            .iter()
            .map(|(k, m)| {
                let MapTerm::Base(n) = m else { unreachable!("entry maps are bases") };
                let pn = format!("{n}'");
                symbols.prime_map(n, &pn);
                (k.clone(), MapTerm::Base(pn))
            })
            .collect();
        (ps, pm)
    } else {
        (st.scalars.clone(), st.maps.clone())
    };
    HavocEnv {
        pre_scalars: st.scalars,
        pre_maps: st.maps,
        post_scalars,
        post_maps,
        params: env.params,
        param_types: env.param_types,
        symbols,
        max: config.uint_max(),
        no_writes: BTreeSet::new(),
    }
}

impl HavocEnv {
    pub fn cx<'a>(&'a self, contract: &'a Contract) -> EncodeCx<'a> {
        EncodeCx {
            contract,
            pre: StateView {
                scalars: &self.pre_scalars,
                maps: &self.pre_maps,
                written: &self.no_writes,
            },
            post: StateView {
                scalars: &self.post_scalars,
                maps: &self.post_maps,
                written: &self.no_writes,
            },
            params: &self.params,
            param_types: &self.param_types,
            max: &self.max,
        }
    }
}
