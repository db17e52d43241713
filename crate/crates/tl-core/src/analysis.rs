//! Dataflow analyses over whole tensors.
//!
//! Statements assign whole tensors, so definitions and uses are tracked per
//! variable, not per cell. Statement positions are 0-based indices into the
//! program's statement list; printers for people add 1.
//!
//! Because a statement reads all of its right-hand side before writing, the
//! assignment it makes never reaches its own uses; a use can only be
//! reached by an earlier statement or by the initial store.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::syntax::{Program, Qualifier};

/// Where a use gets its value from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefSite {
    /// The variable still holds whatever the store started with.
    InitialStore(String),
    /// The assignment at this statement index (defining this variable).
    StatementIndex(usize, String),
}

/// For every (statement, used variable) pair, the definition that reaches
/// it. Straight-line programs have exactly one.
pub fn reaching_definitions(program: &Program) -> HashMap<(usize, String), DefSite> {
    let mut last_def: HashMap<&str, usize> = HashMap::new();
    let mut reaching = HashMap::new();
    for (k, stmt) in program.statements.iter().enumerate() {
        for used in stmt.rhs.variables() {
            let site = match last_def.get(used) {
                Some(&j) => DefSite::StatementIndex(j, used.to_string()),
                None => DefSite::InitialStore(used.to_string()),
            };
            reaching.entry((k, used.to_string())).or_insert(site);
        }
        last_def.insert(&stmt.lhs, k);
    }
    reaching
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UninitReason {
    /// The variable is not input-qualified and no statement has assigned it
    /// yet, so the read sees uninitialized memory.
    NeverAssigned,
    /// The variable was assigned by a statement that itself read
    /// possibly-uninitialized data.
    TaintedBy(usize),
}

impl fmt::Display for UninitReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UninitReason::NeverAssigned => {
                write!(f, "read before any assignment and not an input")
            }
            UninitReason::TaintedBy(k) => {
                write!(f, "assigned by flagged statement {}", k + 1)
            }
        }
    }
}

/// One use of a possibly-uninitialized variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub statement: usize,
    pub identifier: String,
    pub reason: UninitReason,
}

/// Flags reads that may see uninitialized memory: a use whose reaching
/// definition is the initial store of a non-input variable, and
/// transitively a use of any variable defined by a flagged statement.
pub fn uninitialized_uses(program: &Program) -> Vec<Finding> {
    let mut dirty: HashMap<&str, UninitReason> = program
        .declarations
        .iter()
        .filter(|d| d.qualifier != Qualifier::Input)
        .map(|d| (d.name.as_str(), UninitReason::NeverAssigned))
        .collect();
    let mut findings = Vec::new();
    for (k, stmt) in program.statements.iter().enumerate() {
        let mut flagged_here = false;
        let mut seen: HashSet<&str> = HashSet::new();
        for used in stmt.rhs.variables() {
            if !seen.insert(used) {
                continue;
            }
            if let Some(reason) = dirty.get(used) {
                findings.push(Finding {
                    statement: k,
                    identifier: used.to_string(),
                    reason: reason.clone(),
                });
                flagged_here = true;
            }
        }
        // The assignment makes the target as trustworthy as what this
        // statement read.
        if flagged_here {
            dirty.insert(&stmt.lhs, UninitReason::TaintedBy(k));
        } else {
            dirty.remove(stmt.lhs.as_str());
        }
    }
    findings
}

/// Statements whose results cannot reach any output-qualified variable,
/// found by backward liveness. A program without output qualifiers keeps
/// everything: with no stated outputs there is nothing to prune against.
pub fn dead_statements(program: &Program) -> BTreeSet<usize> {
    let outputs: HashSet<&str> = program
        .declarations
        .iter()
        .filter(|d| d.qualifier == Qualifier::Output)
        .map(|d| d.name.as_str())
        .collect();
    if outputs.is_empty() {
        return BTreeSet::new();
    }
    let mut live: HashSet<&str> = outputs;
    let mut dead = BTreeSet::new();
    for (k, stmt) in program.statements.iter().enumerate().rev() {
        if live.contains(stmt.lhs.as_str()) {
            live.remove(stmt.lhs.as_str());
            live.extend(stmt.rhs.variables());
        } else {
            dead.insert(k);
        }
    }
    dead
}

/// Removes dead statements. Declarations stay: dropping a statement never
/// changes the store's domain, only which writes happen.
pub fn dead_code_eliminate(program: &Program) -> Program {
    let dead = dead_statements(program);
    Program {
        declarations: program.declarations.clone(),
        statements: program
            .statements
            .iter()
            .enumerate()
            .filter(|(k, _)| !dead.contains(k))
            .map(|(_, s)| s.clone())
            .collect(),
    }
}

/// Both analyses over one program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub uninitialized: Vec<Finding>,
    pub dead: BTreeSet<usize>,
}

pub fn analyze(program: &Program) -> AnalysisReport {
    AnalysisReport {
        uninitialized: uninitialized_uses(program),
        dead: dead_statements(program),
    }
}
