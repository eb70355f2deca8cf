//! External solver backend.
//!
//! Obligations go through the same address-grounding pipeline as the
//! builtin prover, then each grounded case is printed as an SMT-LIB 2
//! script and handed to an external solver process. The solver is any
//! executable that takes the script path as its single argument and
//! prints `sat`, `unsat`, or `unknown` on the first line of stdout.
//! The binary comes from the configured path or the `MINISOLVER`
//! environment variable.

use super::backend::{BackendConfig, ProofResult, VerificationQuery};
use super::formula::{Formula, Sort, Term};
use super::partition::address_assignments;
use super::prover::{address_symbols, ground, lower_bool_comparisons, visit_terms};
use num_bigint::BigInt;
use num_traits::Signed;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

pub fn discharge_external(query: &VerificationQuery, config: &BackendConfig) -> ProofResult {
    let Some(solver) = solver_path(config) else {
        return ProofResult::Unknown(
            "no external solver configured; set MINISOLVER or BackendConfig.solver".into(),
        );
    };

    let negated = query.negation();
    if negated == Formula::False {
        return ProofResult::Proved;
    }
    let (addr_vars, addr_lits) = address_symbols(&negated, &query.vars);
    let assignments = address_assignments(&addr_vars, &addr_lits, config.k_addresses);

    for assign in &assignments {
        let mut cells: BTreeMap<String, Sort> = BTreeMap::new();
        let grounded = match ground(&negated, assign, query, &mut cells) {
            Ok(g) => g,
            Err(reason) => return ProofResult::Unknown(reason),
        };
        if grounded == Formula::False {
            continue;
        }
        let mut sorts = query.vars.clone();
        sorts.extend(cells);
        let lowered = match lower_bool_comparisons(grounded, &sorts) {
            Ok(f) => f,
            Err(reason) => return ProofResult::Unknown(reason),
        };
        let script = match render_script(&lowered, &sorts) {
            Ok(s) => s,
            Err(reason) => return ProofResult::Unknown(reason),
        };
        match run_solver(&solver, &script, config.timeout_ms) {
            Ok(Verdict::Unsat) => continue,
            Ok(Verdict::Sat) => return ProofResult::Refuted(None),
            Ok(Verdict::Other(line)) => {
                return ProofResult::Unknown(format!("solver answered \"{line}\""));
            }
            Err(reason) => return ProofResult::Unknown(reason),
        }
    }
    ProofResult::Proved
}

fn solver_path(config: &BackendConfig) -> Option<PathBuf> {
    if let Some(p) = &config.solver {
        return Some(p.clone());
    }
    match std::env::var("MINISOLVER") {
        Ok(p) if !p.is_empty() => Some(PathBuf::from(p)),
        _ => None,
    }
}

/// Print one grounded case as a complete SMT-LIB 2 script.
fn render_script(f: &Formula, sorts: &BTreeMap<String, Sort>) -> Result<String, String> {
    let mut names = std::collections::BTreeSet::new();
    visit_terms(f, &mut |t| {
        if let Term::Var(n) = t {
            names.insert(n.clone());
        }
    });

    let mut out = String::new();
    let logic = if is_nonlinear(f) { "QF_NIA" } else { "QF_LIA" };
    let _ = writeln!(out, "(set-logic {logic})");
    for n in &names {
        let sort = match sorts.get(n) {
            Some(Sort::Int) => "Int",
            Some(Sort::Bool) => "Bool",
            Some(Sort::Addr) => return Err(format!("address symbol {n} survived grounding")),
            None => return Err(format!("symbol {n} has no declared sort")),
        };
        let _ = writeln!(out, "(declare-const {} {sort})", quote(n));
    }
    let _ = writeln!(out, "(assert {})", sexp(f)?);
    let _ = writeln!(out, "(check-sat)");
    Ok(out)
}

/// Mapping cells carry brackets, so every symbol is printed quoted.
fn quote(name: &str) -> String {
    format!("|{name}|")
}

fn sexp(f: &Formula) -> Result<String, String> {
    Ok(match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Holds(Term::Var(n)) => quote(n),
        Formula::Holds(t) => return Err(format!("holds on non-variable term {t:?}")),
        Formula::Cmp(op, a, b) => {
            let (a, b) = (term_sexp(a)?, term_sexp(b)?);
            match op {
                crate::spec::CmpOp::Eq => format!("(= {a} {b})"),
                crate::spec::CmpOp::Ne => format!("(not (= {a} {b}))"),
                crate::spec::CmpOp::Lt => format!("(< {a} {b})"),
                crate::spec::CmpOp::Le => format!("(<= {a} {b})"),
                crate::spec::CmpOp::Gt => format!("(> {a} {b})"),
                crate::spec::CmpOp::Ge => format!("(>= {a} {b})"),
            }
        }
        Formula::Not(g) => format!("(not {})", sexp(g)?),
        Formula::And(gs) => nary("and", gs, "true")?,
        Formula::Or(gs) => nary("or", gs, "false")?,
        Formula::Implies(a, b) => format!("(=> {} {})", sexp(a)?, sexp(b)?),
    })
}

fn nary(op: &str, gs: &[Formula], empty: &str) -> Result<String, String> {
    match gs {
        [] => Ok(empty.into()),
        [g] => sexp(g),
        _ => {
            let parts = gs.iter().map(sexp).collect::<Result<Vec<_>, _>>()?;
            Ok(format!("({op} {})", parts.join(" ")))
        }
    }
}

fn term_sexp(t: &Term) -> Result<String, String> {
    Ok(match t {
        Term::Int(n) => int_sexp(n),
        Term::Var(n) => quote(n),
        Term::Bool(_) | Term::Addr(_) => {
            return Err(format!("non-integer literal {t:?} in arithmetic position"));
        }
        Term::Add(a, b) => format!("(+ {} {})", term_sexp(a)?, term_sexp(b)?),
        Term::Sub(a, b) => format!("(- {} {})", term_sexp(a)?, term_sexp(b)?),
        Term::Mul(a, b) => format!("(* {} {})", term_sexp(a)?, term_sexp(b)?),
        Term::Select(..) => return Err("mapping read survived grounding".into()),
    })
}

fn int_sexp(n: &BigInt) -> String {
    if n.is_negative() {
        format!("(- {})", n.magnitude())
    } else {
        n.to_string()
    }
}

fn is_nonlinear(f: &Formula) -> bool {
    let mut found = false;
    visit_terms(f, &mut |t| {
        if let Term::Mul(a, b) = t {
            if has_var(a) && has_var(b) {
                found = true;
            }
        }
    });
    found
}

fn has_var(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::Int(_) | Term::Addr(_) | Term::Bool(_) => false,
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => has_var(a) || has_var(b),
        Term::Select(_, keys) => keys.iter().any(has_var),
    }
}

enum Verdict {
    Sat,
    Unsat,
    Other(String),
}

fn run_solver(solver: &Path, script: &str, timeout_ms: u64) -> Result<Verdict, String> {
    let path = write_script(script).map_err(|e| format!("cannot write query file: {e}"))?;
    let result = run_solver_on(solver, &path, timeout_ms);
    let _ = std::fs::remove_file(&path);
    result
}

fn write_script(script: &str) -> std::io::Result<PathBuf> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let path = std::env::temp_dir().join(format!(
        "minv-query-{}-{}.smt2",
        std::process::id(),
        n
    ));
    std::fs::write(&path, script)?;
    Ok(path)
}

fn run_solver_on(solver: &Path, script: &Path, timeout_ms: u64) -> Result<Verdict, String> {
    let mut child = Command::new(solver)
        .arg(script)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| format!("cannot start solver {}: {e}", solver.display()))?;

    let deadline = Instant::now() + Duration::from_millis(timeout_ms);
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(format!("solver timed out after {timeout_ms} ms"));
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(format!("cannot wait for solver: {e}")),
        }
    }

    let mut stdout = String::new();
    if let Some(mut pipe) = child.stdout.take() {
        let _ = pipe.read_to_string(&mut stdout);
    }
    let verdict = stdout
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or_default();
    Ok(match verdict {
        "sat" => Verdict::Sat,
        "unsat" => Verdict::Unsat,
        other => Verdict::Other(other.into()),
    })
}
