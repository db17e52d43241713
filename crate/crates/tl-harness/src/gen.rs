//! Seeded random programs and initial stores.
//!
//! Generation is type-directed: a statement picks its target variable
//! first and then grows a right-hand side of exactly that type, so every
//! generated program typechecks by construction. Growth can dead-end (a
//! subgoal type with no matching variable and no depth budget left), in
//! which case the whole statement is redrawn; after enough failures the
//! statement falls back to assigning the target to itself, which always
//! types.
//!
//! Every compound subexpression is wrapped in an explicit paren node, so a
//! generated tree is its own parse: printing and reparsing reproduces it
//! exactly. One in five statements is drawn from a small set of shapes
//! that exercise aliasing and index shuffles (self-assignment, transposing
//! a variable onto itself, traces), which plain random growth produces
//! rarely.
//!
//! The corpus also minds one semantic boundary. Undefined absorbs
//! multiplication, so a padding zero multiplied by an undefined factor
//! stops being zero, and the zero-padding guarantee only holds when every
//! multiplicative factor paired against a padding cell is defined.
//! Division needs no such care: a zero numerator wins against any
//! denominator. The generator therefore tracks which variables might hold
//! undefined cells (never initialized, initialized with holes, or assigned
//! from a division) and requires the operands of an outer product and the
//! scalar of a scalar-times-tensor product to be built from clean
//! variables without division. Everything else, including denominators
//! that are zero or undefined, is unrestricted.

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tl_core::index::TensorType;
use tl_core::store::InitSpec;
use tl_core::syntax::{
    BinOp, Declaration, Expr, ExprKind, Pos, Program, Qualifier, Statement,
};
use tl_core::typecheck::{check_program, StaticContext};
use tl_core::value::Value;

const INIT_VALUES_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const INIT_SHAPE_SALT: u64 = 0x0ddc_0ffe_e0dd_f00d;

/// How likely a declaration is to carry each qualifier. The remainder is
/// unqualified. Must sum to at most 1.
#[derive(Debug, Clone)]
pub struct QualifierProbs {
    pub input: f64,
    pub output: f64,
}

impl Default for QualifierProbs {
    fn default() -> Self {
        QualifierProbs { input: 0.25, output: 0.25 }
    }
}

/// Shape of the random corpus. The seed picks the program; all other
/// fields bound its size.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    pub max_rank: usize,
    pub max_extent: usize,
    pub max_statements: usize,
    pub max_expr_depth: usize,
    pub qualifiers: QualifierProbs,
    /// Probability that an element-wise operator is a division. Zero gives
    /// a division-free corpus, on which defined values are closed under
    /// every operator.
    pub division_probability: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_rank: 3,
            max_extent: 5,
            max_statements: 6,
            max_expr_depth: 4,
            qualifiers: QualifierProbs::default(),
            division_probability: 0.25,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> GenConfig {
        GenConfig { seed, ..GenConfig::default() }
    }
}

/// The program for a seed. Deterministic: the same config yields the same
/// program on every platform.
pub fn gen_program(cfg: &GenConfig) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let num_decls = rng.random_range(2..=6usize);
    let scalar_at = rng.random_range(0..num_decls);
    let mut declarations = Vec::with_capacity(num_decls);
    for k in 0..num_decls {
        let name = ((b'a' + k as u8) as char).to_string();
        // One scalar is always declared so element-wise mixing and
        // contraction dead-ends have somewhere to land.
        let rank = if k == scalar_at { 0 } else { rng.random_range(0..=cfg.max_rank) };
        let extents = (0..rank).map(|_| rng.random_range(1..=cfg.max_extent)).collect();
        let roll: f64 = rng.random();
        let qualifier = if roll < cfg.qualifiers.input {
            Qualifier::Input
        } else if roll < cfg.qualifiers.input + cfg.qualifiers.output {
            Qualifier::Output
        } else {
            Qualifier::None
        };
        declarations.push(Declaration { name, qualifier, extents, pos: Pos::synthetic() });
    }

    let ctx = build_ctx(&declarations);
    let extent_pool: Vec<usize> =
        declarations.iter().flat_map(|d| d.extents.iter().copied()).collect();
    let mut tainted: HashMap<String, bool> = declarations
        .iter()
        .zip(init_definedness(cfg, &declarations))
        .map(|(d, defined)| (d.name.clone(), !defined))
        .collect();

    let mut statements = Vec::new();
    // A sliver of the corpus has no statements at all.
    if !rng.random_bool(0.05) {
        let num_stmts = rng.random_range(1..=cfg.max_statements);
        for _ in 0..num_stmts {
            let lhs = declarations[rng.random_range(0..declarations.len())].name.clone();
            let target = ctx.type_of(&lhs).unwrap().clone();
            let rhs =
                gen_statement_rhs(&mut rng, cfg, &ctx, &lhs, &target, &extent_pool, &tainted);
            tainted.insert(lhs.clone(), expr_tainted(&rhs, &tainted));
            statements.push(Statement { lhs, rhs, pos: Pos::synthetic() });
        }
    }

    let program = Program { declarations, statements };
    check_program(&program).expect("generated programs typecheck by construction");
    program
}

/// An initial store for the program, drawn from streams derived from the
/// same seed. Inputs and the variables the generator promised to keep
/// clean are fully defined. Other variables may be skipped entirely (they
/// then start undefined) or get cells that are undefined or zero with
/// modest probability; zeroes matter because they are the interesting
/// operands of division.
pub fn gen_init(cfg: &GenConfig, program: &Program) -> InitSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ INIT_VALUES_SALT);
    let mut spec = InitSpec::empty();
    for (decl, defined) in program.declarations.iter().zip(init_definedness(cfg, &program.declarations)) {
        if !defined && rng.random_bool(0.2) {
            continue;
        }
        let count: usize = decl.extents.iter().product();
        let values = (0..count)
            .map(|_| {
                if !defined && rng.random_bool(0.12) {
                    Value::Undefined
                } else if rng.random_bool(0.18) {
                    Value::zero()
                } else {
                    Value::ratio(rng.random_range(-9..=9), rng.random_range(1..=9))
                }
            })
            .collect();
        spec.set(&decl.name, values);
    }
    spec
}

/// Which variables start fully defined. Inputs always do; others flip a
/// coin on a stream both [`gen_program`] and [`gen_init`] can replay, so
/// the generator's cleanliness bookkeeping and the actual initial store
/// agree.
fn init_definedness(cfg: &GenConfig, declarations: &[Declaration]) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ INIT_SHAPE_SALT);
    declarations
        .iter()
        .map(|d| d.qualifier == Qualifier::Input || rng.random_bool(0.5))
        .collect()
}

/// Whether the expression might produce undefined cells: it divides
/// somewhere, or reads a variable that might hold undefined cells.
fn expr_tainted(expr: &Expr, tainted: &HashMap<String, bool>) -> bool {
    match &expr.kind {
        ExprKind::Var(name) => tainted[name.as_str()],
        ExprKind::Paren(inner) => expr_tainted(inner, tainted),
        ExprKind::Elem(BinOp::Div, _, _) => true,
        ExprKind::Elem(_, lhs, rhs) | ExprKind::OuterProduct(lhs, rhs) => {
            expr_tainted(lhs, tainted) || expr_tainted(rhs, tainted)
        }
        ExprKind::Contract(operand, _) | ExprKind::Transpose(operand, _) => {
            expr_tainted(operand, tainted)
        }
    }
}

fn build_ctx(declarations: &[Declaration]) -> StaticContext {
    check_program(&Program { declarations: declarations.to_vec(), statements: vec![] })
        .expect("generated declarations are distinct and positive")
}

#[allow(clippy::too_many_arguments)]
fn gen_statement_rhs(
    rng: &mut ChaCha8Rng,
    cfg: &GenConfig,
    ctx: &StaticContext,
    lhs: &str,
    target: &TensorType,
    pool: &[usize],
    tainted: &HashMap<String, bool>,
) -> Expr {
    if rng.random_bool(0.2) {
        if let Some(e) = gen_hard_case(rng, ctx, lhs, target) {
            return e;
        }
    }
    for _ in 0..64 {
        if let Some(e) = gen_expr(rng, cfg, ctx, target, cfg.max_expr_depth, pool, tainted, false)
        {
            return e;
        }
    }
    Expr::var(lhs)
}

/// Shapes that read and write the same storage, or shuffle indices of a
/// single variable. Self-assignment is always available; the others need
/// matching extents somewhere in the context.
fn gen_hard_case(
    rng: &mut ChaCha8Rng,
    ctx: &StaticContext,
    lhs: &str,
    target: &TensorType,
) -> Option<Expr> {
    let mut options = vec![Expr::var(lhs)];
    let extents = target.extents();
    for m in 1..=extents.len() {
        for n in m + 1..=extents.len() {
            if extents[m - 1] == extents[n - 1] {
                options.push(Expr::transpose(Expr::var(lhs), m, n));
            }
        }
    }
    for (name, binding) in ctx.iter() {
        let src = binding.ty.extents();
        if src.len() != extents.len() + 2 {
            continue;
        }
        for m in 1..=src.len() {
            for n in m + 1..=src.len() {
                if src[m - 1] != src[n - 1] {
                    continue;
                }
                let remaining: Vec<usize> = src
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| k + 1 != m && k + 1 != n)
                    .map(|(_, &d)| d)
                    .collect();
                if remaining == extents {
                    options.push(Expr::contract(Expr::var(name), m, n));
                }
            }
        }
    }
    options.choose(rng).cloned()
}

/// Grows an expression of exactly `target`'s type, or gives up when a
/// subgoal cannot be met. Children are paren-wrapped so the tree prints
/// and reparses to itself. With `defined_only` the expression is built to
/// produce defined cells on every run: clean variables at the leaves and
/// no division anywhere; outer products and tensor-scaling scalars demand
/// this of their operands.
#[allow(clippy::too_many_arguments)]
fn gen_expr(
    rng: &mut ChaCha8Rng,
    cfg: &GenConfig,
    ctx: &StaticContext,
    target: &TensorType,
    depth: usize,
    pool: &[usize],
    tainted: &HashMap<String, bool>,
    defined_only: bool,
) -> Option<Expr> {
    let usable: Vec<&str> = ctx
        .iter()
        .filter(|(name, b)| &b.ty == target && !(defined_only && tainted[*name]))
        .map(|(name, _)| name)
        .collect();
    if depth == 0 {
        return usable.choose(rng).map(|name| Expr::var(*name));
    }

    let rank = target.rank();
    let mut kinds: Vec<(Kind, u32)> = Vec::new();
    if !usable.is_empty() {
        // Leaves get likelier as the budget shrinks.
        kinds.push((Kind::Var, 3 + 2 * (cfg.max_expr_depth - depth) as u32));
    }
    kinds.push((Kind::Elem, 4));
    kinds.push((Kind::Outer, 2));
    if rank + 2 <= cfg.max_rank {
        kinds.push((Kind::Contract, 2));
    }
    if rank >= 2 {
        kinds.push((Kind::Transpose, 2));
    }
    let total: u32 = kinds.iter().map(|(_, w)| w).sum();
    let mut roll = rng.random_range(0..total);
    let kind = kinds
        .iter()
        .find(|(_, w)| {
            if roll < *w {
                true
            } else {
                roll -= w;
                false
            }
        })
        .map(|(k, _)| *k)
        .unwrap();

    match kind {
        Kind::Var => usable.choose(rng).map(|name| Expr::var(*name)),
        Kind::Elem => {
            let op = if !defined_only && rng.random_bool(cfg.division_probability) {
                BinOp::Div
            } else {
                *[BinOp::Add, BinOp::Sub, BinOp::Mul].choose(rng).unwrap()
            };
            let scalar = TensorType::scalar();
            if rank > 0 && op == BinOp::Mul && rng.random_bool(0.4) {
                // The scalar meets every cell of the tensor, padding
                // included, so it must be defined.
                let lhs = gen_expr(rng, cfg, ctx, &scalar, depth - 1, pool, tainted, true)?;
                let rhs =
                    gen_expr(rng, cfg, ctx, target, depth - 1, pool, tainted, defined_only)?;
                return Some(Expr::elem(op, wrap(lhs), wrap(rhs)));
            }
            if rank > 0 && op == BinOp::Div && rng.random_bool(0.4) {
                // Any scalar denominator is fair game: zero numerators win.
                let lhs =
                    gen_expr(rng, cfg, ctx, target, depth - 1, pool, tainted, defined_only)?;
                let rhs = gen_expr(rng, cfg, ctx, &scalar, depth - 1, pool, tainted, false)?;
                return Some(Expr::elem(op, wrap(lhs), wrap(rhs)));
            }
            let lhs = gen_expr(rng, cfg, ctx, target, depth - 1, pool, tainted, defined_only)?;
            let rhs = gen_expr(rng, cfg, ctx, target, depth - 1, pool, tainted, defined_only)?;
            Some(Expr::elem(op, wrap(lhs), wrap(rhs)))
        }
        Kind::Outer => {
            let split = rng.random_range(0..=rank);
            let lt = TensorType::new(target.extents()[..split].to_vec()).unwrap();
            let rt = TensorType::new(target.extents()[split..].to_vec()).unwrap();
            let lhs = gen_expr(rng, cfg, ctx, &lt, depth - 1, pool, tainted, true)?;
            let rhs = gen_expr(rng, cfg, ctx, &rt, depth - 1, pool, tainted, true)?;
            Some(Expr::outer(wrap(lhs), wrap(rhs)))
        }
        Kind::Contract => {
            let d = pick_extent(rng, cfg, pool);
            let m = rng.random_range(1..=rank + 1);
            let n = rng.random_range(m + 1..=rank + 2);
            let mut extents = target.extents().to_vec();
            extents.insert(m - 1, d);
            extents.insert(n - 1, d);
            let ot = TensorType::new(extents).unwrap();
            let operand = gen_expr(rng, cfg, ctx, &ot, depth - 1, pool, tainted, defined_only)?;
            let (m, n) = flip(rng, m, n);
            Some(Expr::contract(wrap(operand), m, n))
        }
        Kind::Transpose => {
            let m = rng.random_range(1..=rank - 1);
            let n = rng.random_range(m + 1..=rank);
            let mut extents = target.extents().to_vec();
            extents.swap(m - 1, n - 1);
            let ot = TensorType::new(extents).unwrap();
            let operand = gen_expr(rng, cfg, ctx, &ot, depth - 1, pool, tainted, defined_only)?;
            let (m, n) = flip(rng, m, n);
            Some(Expr::transpose(wrap(operand), m, n))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Var,
    Elem,
    Outer,
    Contract,
    Transpose,
}

/// Contracted dimensions prefer extents that already occur in the
/// declarations, which makes variable leaves reachable under the operand
/// type far more often.
fn pick_extent(rng: &mut ChaCha8Rng, cfg: &GenConfig, pool: &[usize]) -> usize {
    if !pool.is_empty() && rng.random_bool(0.7) {
        *pool.choose(rng).unwrap()
    } else {
        rng.random_range(1..=cfg.max_extent)
    }
}

/// Index pairs are valid in either written order; emit both.
fn flip(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (usize, usize) {
    if rng.random_bool(0.5) {
        (n, m)
    } else {
        (m, n)
    }
}

fn wrap(e: Expr) -> Expr {
    match e.kind {
        ExprKind::Var(_) | ExprKind::Paren(_) => e,
        _ => Expr::paren(e),
    }
}
