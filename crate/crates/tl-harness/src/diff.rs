//! Differential driver.
//!
//! For every seed the driver generates a program and an initial store,
//! runs the evaluator under test against the oracle, and then runs the
//! padded evaluator for each requested padding width, checking that the
//! logical region matches the unpadded run and that every padding cell is
//! exactly zero. The first disagreement for a seed is shrunk to a small
//! reproducer before it is recorded.
//!
//! A mutation can be injected into the padded pipeline to prove the
//! driver can see failures at all: skipping the zero fill leaves padding
//! cells undefined, which contractions over rounded extents then drag
//! into the logical region.

use std::collections::BTreeMap;

use tl_core::eval::{init_store, run, run_statements, RunError};
use tl_core::index::{TensorType, VectorLength};
use tl_core::padded::{round_context, run_padded};
use tl_core::store::{InitSpec, Store};
use tl_core::syntax::{pretty_print, Program};
use tl_core::typecheck::{check_program, StaticContext};
use tl_core::value::Value;

use crate::gen::{gen_init, gen_program, GenConfig};
use crate::oracle::{oracle_eval, Dense};

/// A deliberate fault injected into the padded pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Build the padded store without zero-filling, so padding cells start
    /// undefined. Padded runs sum over rounded extents, so this must leak
    /// into results and be caught.
    SkipZeroFill,
}

/// One disagreement, already shrunk. `pad` is the padding width of the
/// failing run, or `None` when the unpadded evaluator disagreed with the
/// oracle. The index is 1-based; `got` is the evaluator under test.
#[derive(Debug, Clone)]
pub struct Mismatch {
    pub seed: u64,
    pub pad: Option<usize>,
    pub id: String,
    pub index: Vec<usize>,
    pub got: String,
    pub want: String,
    pub program: Program,
    pub init: InitSpec,
}

impl Mismatch {
    pub fn program_text(&self) -> String {
        pretty_print(&self.program)
    }

    /// The shrunk initial store in store-file syntax.
    pub fn init_text(&self) -> String {
        let mut out = String::new();
        for decl in &self.program.declarations {
            let Some(entry) = self.init.get(&decl.name) else { continue };
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&decl.name);
            out.push_str(" : [");
            for (k, d) in decl.extents.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                out.push_str(&d.to_string());
            }
            out.push_str("]\n");
            let cells: Vec<String> = entry.values.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn render_repro(&self) -> String {
        let mut out = self.program_text();
        let init = self.init_text();
        if !init.is_empty() {
            out.push('\n');
            out.push_str(&init);
        }
        out
    }
}

#[derive(Debug, Default)]
pub struct DiffReport {
    pub programs_run: usize,
    pub mismatches: Vec<Mismatch>,
    /// Runs that aborted on an out-of-bounds access. The type system is
    /// supposed to make these impossible.
    pub traps: usize,
}

impl DiffReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.traps == 0
    }
}

/// Runs the full differential check over `num_seeds` consecutive seeds
/// starting at the config's seed.
pub fn check_simulation(
    base: &GenConfig,
    num_seeds: u64,
    pads: &[usize],
    mutation: Mutation,
) -> DiffReport {
    let mut report = DiffReport::default();
    for offset in 0..num_seeds {
        let cfg = GenConfig { seed: base.seed.wrapping_add(offset), ..base.clone() };
        let program = gen_program(&cfg);
        let init = gen_init(&cfg, &program);
        report.programs_run += 1;
        match examine(&program, &init, pads, mutation) {
            Outcome::Clean => {}
            Outcome::Trapped => report.traps += 1,
            Outcome::Invalid => panic!("seed {} generated an invalid program", cfg.seed),
            Outcome::Failed(_) => {
                let (small_p, small_i) = shrink(&program, &init, pads, mutation);
                let f = match examine(&small_p, &small_i, pads, mutation) {
                    Outcome::Failed(f) => f,
                    _ => unreachable!("shrinking preserves failure"),
                };
                report.mismatches.push(Mismatch {
                    seed: cfg.seed,
                    pad: f.pad,
                    id: f.id,
                    index: f.index,
                    got: f.got,
                    want: f.want,
                    program: small_p,
                    init: small_i,
                });
            }
        }
    }
    report
}

struct Failure {
    pad: Option<usize>,
    id: String,
    index: Vec<usize>,
    got: String,
    want: String,
}

enum Outcome {
    Clean,
    Trapped,
    /// The candidate cannot be run at all; only shrinking ever produces
    /// these and it treats them as dead ends.
    Invalid,
    Failed(Failure),
}

fn examine(program: &Program, init: &InitSpec, pads: &[usize], mutation: Mutation) -> Outcome {
    let Ok(ctx) = check_program(program) else { return Outcome::Invalid };
    let reference = match run(program, init) {
        Ok(store) => store,
        Err(RunError::Access(_)) => return Outcome::Trapped,
        Err(_) => return Outcome::Invalid,
    };
    let oracle = oracle_eval(program, init);
    if let Some(f) = first_oracle_failure(&ctx, &reference, &oracle) {
        return Outcome::Failed(f);
    }
    for &pad in pads {
        let m = VectorLength::new(pad).expect("padding widths are positive");
        let padded = match padded_run(program, init, m, mutation) {
            Ok(store) => store,
            Err(RunError::Access(_)) => return Outcome::Trapped,
            Err(_) => return Outcome::Invalid,
        };
        if let Some(f) = first_padded_failure(&ctx, &reference, &padded, pad, m) {
            return Outcome::Failed(f);
        }
    }
    Outcome::Clean
}

/// The padded pipeline, with the mutation applied. The healthy path is
/// the library's own; the mutated path rebuilds the initial store with
/// undefined padding and reuses the library evaluator from there.
fn padded_run(
    program: &Program,
    init: &InitSpec,
    m: VectorLength,
    mutation: Mutation,
) -> Result<Store, RunError> {
    match mutation {
        Mutation::None => run_padded(program, init, m),
        Mutation::SkipZeroFill => {
            let ctx = check_program(program)?;
            let logical_store = init_store(&ctx, init)?;
            let rounded_ctx = round_context(&ctx, m);
            let mut store = Store::empty();
            for (id, binding) in ctx.iter() {
                let logical = &binding.ty;
                let rounded = logical.round_up(m);
                let cells = rounded
                    .indices()
                    .map(|index| {
                        if logical.contains(&index) {
                            logical_store.read(id, &index).expect("logical cell").clone()
                        } else {
                            Value::Undefined
                        }
                    })
                    .collect();
                store.insert_tensor(id, rounded, cells);
            }
            run_statements(&rounded_ctx, &mut store, &program.statements)?;
            Ok(store)
        }
    }
}

fn first_oracle_failure(
    ctx: &StaticContext,
    reference: &Store,
    oracle: &BTreeMap<String, Dense>,
) -> Option<Failure> {
    for (id, binding) in ctx.iter() {
        let dense = &oracle[id];
        for index in binding.ty.indices() {
            let at: Vec<usize> = index.components().iter().map(|c| c - 1).collect();
            let want = dense.get(&at);
            let got = reference.read(id, &index).expect("declared cell");
            if got != want {
                return Some(Failure {
                    pad: None,
                    id: id.to_string(),
                    index: index.components().to_vec(),
                    got: got.to_string(),
                    want: want.to_string(),
                });
            }
        }
    }
    None
}

fn first_padded_failure(
    ctx: &StaticContext,
    reference: &Store,
    padded: &Store,
    pad: usize,
    m: VectorLength,
) -> Option<Failure> {
    for (id, binding) in ctx.iter() {
        let logical = &binding.ty;
        let rounded = logical.round_up(m);
        for index in rounded.indices() {
            let got = padded.read(id, &index).expect("rounded cell");
            if logical.contains(&index) {
                let want = reference.read(id, &index).expect("logical cell");
                if got != want {
                    return Some(Failure {
                        pad: Some(pad),
                        id: id.to_string(),
                        index: index.components().to_vec(),
                        got: got.to_string(),
                        want: want.to_string(),
                    });
                }
            } else if *got != Value::zero() {
                return Some(Failure {
                    pad: Some(pad),
                    id: id.to_string(),
                    index: index.components().to_vec(),
                    got: got.to_string(),
                    want: "0".to_string(),
                });
            }
        }
    }
    None
}

fn fails(program: &Program, init: &InitSpec, pads: &[usize], mutation: Mutation) -> bool {
    matches!(examine(program, init, pads, mutation), Outcome::Failed(_))
}

/// Greedy shrinking: drop statements, drop unused declarations, then walk
/// extents downward, keeping any change under which the failure persists.
/// Every kept change strictly shrinks the program, so this terminates.
fn shrink(
    program: &Program,
    init: &InitSpec,
    pads: &[usize],
    mutation: Mutation,
) -> (Program, InitSpec) {
    let mut p = program.clone();
    let mut i = restrict_init(init, &p);
    loop {
        let mut improved = false;
        let mut k = p.statements.len();
        while k > 0 {
            k -= 1;
            let mut cand = p.clone();
            cand.statements.remove(k);
            if fails(&cand, &i, pads, mutation) {
                p = cand;
                improved = true;
            }
        }
        let mut k = p.declarations.len();
        while k > 0 {
            k -= 1;
            let name = p.declarations[k].name.clone();
            let used = p
                .statements
                .iter()
                .any(|s| s.lhs == name || s.rhs.variables().iter().any(|v| *v == name));
            if used {
                continue;
            }
            let mut cand = p.clone();
            cand.declarations.remove(k);
            let cand_init = restrict_init(&i, &cand);
            if fails(&cand, &cand_init, pads, mutation) {
                p = cand;
                i = cand_init;
                improved = true;
            }
        }
        for k in 0..p.declarations.len() {
            for j in 0..p.declarations[k].extents.len() {
                while p.declarations[k].extents[j] > 1 {
                    let mut cand = p.clone();
                    cand.declarations[k].extents[j] -= 1;
                    if check_program(&cand).is_err() {
                        break;
                    }
                    let cand_init = truncate_init(&i, &p, &cand);
                    if fails(&cand, &cand_init, pads, mutation) {
                        p = cand;
                        i = cand_init;
                        improved = true;
                    } else {
                        break;
                    }
                }
            }
        }
        if !improved {
            return (p, i);
        }
    }
}

/// Keeps only entries for variables the program still declares.
fn restrict_init(init: &InitSpec, program: &Program) -> InitSpec {
    let mut out = InitSpec::empty();
    for decl in &program.declarations {
        if let Some(entry) = init.get(&decl.name) {
            out.set(&decl.name, entry.values.clone());
        }
    }
    out
}

/// Rebuilds init entries after extents changed: each cell of the new
/// shape takes the value it had at the same coordinate under the old
/// shape.
fn truncate_init(init: &InitSpec, old: &Program, new: &Program) -> InitSpec {
    let mut out = InitSpec::empty();
    for decl in &new.declarations {
        let Some(entry) = init.get(&decl.name) else { continue };
        let old_extents = &old
            .declarations
            .iter()
            .find(|d| d.name == decl.name)
            .expect("shrinking never renames")
            .extents;
        if *old_extents == decl.extents {
            out.set(&decl.name, entry.values.clone());
            continue;
        }
        let new_ty = TensorType::new(decl.extents.clone()).unwrap();
        let values = new_ty
            .indices()
            .map(|index| {
                let mut offset = 0;
                for (c, d) in index.components().iter().zip(old_extents) {
                    offset = offset * d + (c - 1);
                }
                entry.values[offset].clone()
            })
            .collect();
        out.set(&decl.name, values);
    }
    out
}
