//! The acceptance gate. Each test drives one release criterion end to end
//! and prints a single PASS line with the measured numbers; a failure
//! trips an assertion with enough context to reproduce.

use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use tl_core::analysis::dead_code_eliminate;
use tl_core::eval::run;
use tl_core::index::VectorLength;
use tl_core::padded::{round_context, run_padded};
use tl_core::store::InitSpec;
use tl_core::syntax::{parse_program, pretty_print, BinOp, Program, Qualifier};
use tl_core::typecheck::{check_program, type_expr, TypeErrorKind};
use tl_core::value::{arith, ArithMode, Value};
use tl_harness::{check_simulation, gen_init, gen_program, GenConfig, Mutation};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// The corpus the differential criteria share.
fn corpus() -> GenConfig {
    GenConfig::with_seed(0)
}

#[test]
fn showcase_programs_typecheck_and_mutants_are_rejected() {
    let start = Instant::now();

    let cases = [
        ("matmul.tl", "C", vec![300, 500]),
        ("trace.tl", "s", vec![]),
        ("transpose.tl", "v", vec![200, 500, 400, 300, 600]),
    ];
    for (name, variable, extents) in cases {
        let program = parse_program(&fixture(name)).unwrap();
        let ctx = check_program(&program).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(
            ctx.type_of(variable).unwrap().extents(),
            &extents[..],
            "{name}: {variable} has the wrong type"
        );
        let rhs = &program.statements.last().unwrap().rhs;
        assert_eq!(type_expr(&ctx, rhs).unwrap().extents(), &extents[..], "{name}: rhs type");
    }

    let rejections = [
        ("bad_redeclaration.tl", TypeErrorKind::Redeclaration),
        ("bad_assign_undeclared.tl", TypeErrorKind::AssignToUndeclared),
        ("bad_assign_mismatch.tl", TypeErrorKind::AssignTypeMismatch),
        ("bad_use_undeclared.tl", TypeErrorKind::UseOfUndeclared),
        ("bad_expr_mismatch.tl", TypeErrorKind::ExprTypeMismatch),
    ];
    for (name, kind) in rejections {
        let program = parse_program(&fixture(name)).unwrap();
        let err = check_program(&program).expect_err(name);
        assert_eq!(err.kind, kind, "{name}");
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget is 1s");
    println!("PASS showcase programs + five rejections in {elapsed:?} (budget 1s)");
}

#[test]
fn evaluator_matches_the_oracle_on_a_large_corpus() {
    let start = Instant::now();
    let report = check_simulation(&corpus(), 1000, &[], Mutation::None);
    let elapsed = start.elapsed();
    assert_eq!(report.programs_run, 1000);
    assert!(
        report.ok(),
        "{} mismatches, {} traps; first repro:\n{}",
        report.mismatches.len(),
        report.traps,
        report.mismatches.first().map(|m| m.render_repro()).unwrap_or_default()
    );
    assert!(elapsed <= Duration::from_secs(300), "took {elapsed:?}, budget is 5min");
    println!("PASS 1000 programs agree with the oracle exactly in {elapsed:?} (budget 5min)");
}

#[test]
fn every_run_terminates_in_budget_and_stays_in_domain() {
    const SEEDS: u64 = 1000;
    const PER_PROGRAM: Duration = Duration::from_secs(10);

    let (tx, rx) = mpsc::channel();
    let worker = thread::spawn(move || {
        let base = corpus();
        for offset in 0..SEEDS {
            let cfg = GenConfig { seed: base.seed + offset, ..base.clone() };
            let program = gen_program(&cfg);
            let init = gen_init(&cfg, &program);
            let verdict = match run(&program, &init) {
                Ok(_) => Ok(()),
                Err(e) => Err(format!("seed {}: {e}", cfg.seed)),
            };
            if tx.send((cfg.seed, verdict)).is_err() {
                return;
            }
        }
    });

    let start = Instant::now();
    for k in 0..SEEDS {
        match rx.recv_timeout(PER_PROGRAM) {
            Ok((_, Ok(()))) => {}
            Ok((seed, Err(msg))) => panic!("seed {seed} violated the domain: {msg}"),
            Err(_) => panic!("program {k} exceeded the {PER_PROGRAM:?} timeout"),
        }
    }
    worker.join().unwrap();
    let elapsed = start.elapsed();
    println!("PASS 1000 runs terminated, zero out-of-domain accesses, in {elapsed:?}");
}

fn divisor_exprs<'a>(expr: &'a tl_core::syntax::Expr, out: &mut Vec<&'a tl_core::syntax::Expr>) {
    use tl_core::syntax::ExprKind;
    match &expr.kind {
        ExprKind::Var(_) => {}
        ExprKind::Paren(inner) => divisor_exprs(inner, out),
        ExprKind::Elem(op, lhs, rhs) => {
            if *op == BinOp::Div {
                out.push(rhs);
            }
            divisor_exprs(lhs, out);
            divisor_exprs(rhs, out);
        }
        ExprKind::OuterProduct(lhs, rhs) => {
            divisor_exprs(lhs, out);
            divisor_exprs(rhs, out);
        }
        ExprKind::Contract(operand, _) | ExprKind::Transpose(operand, _) => {
            divisor_exprs(operand, out)
        }
    }
}

/// How many of the first `seeds` runs divide by zero and by undefined:
/// every divisor subexpression is evaluated against the store the
/// statement will see. The simulation claim is only as strong as the
/// corpus, so these counts must both be positive.
fn divisor_census(seeds: u64) -> (usize, usize) {
    use tl_core::eval::{eval_expr, exec_stmt, init_store};
    let (mut by_zero, mut by_undefined) = (0, 0);
    for seed in 0..seeds {
        let cfg = GenConfig::with_seed(seed);
        let program = gen_program(&cfg);
        let init = gen_init(&cfg, &program);
        let ctx = check_program(&program).unwrap();
        let mut store = init_store(&ctx, &init).unwrap();
        let (mut zero_here, mut undefined_here) = (false, false);
        for stmt in &program.statements {
            let mut divisors = Vec::new();
            divisor_exprs(&stmt.rhs, &mut divisors);
            for divisor in divisors {
                let ty = type_expr(&ctx, divisor).unwrap();
                for index in ty.indices() {
                    match eval_expr(&ctx, &store, divisor, &index).unwrap() {
                        Value::Undefined => undefined_here = true,
                        v if v.is_zero() => zero_here = true,
                        _ => {}
                    }
                }
            }
            exec_stmt(&ctx, &mut store, stmt).unwrap();
        }
        by_zero += zero_here as usize;
        by_undefined += undefined_here as usize;
    }
    (by_zero, by_undefined)
}

#[test]
fn padded_runs_simulate_the_reference_exactly() {
    let start = Instant::now();
    let report = check_simulation(&corpus(), 1000, &[1, 2, 3, 4, 8], Mutation::None);
    let elapsed = start.elapsed();
    assert_eq!(report.programs_run, 1000);
    assert!(
        report.ok(),
        "{} mismatches, {} traps; first repro:\n{}",
        report.mismatches.len(),
        report.traps,
        report.mismatches.first().map(|m| m.render_repro()).unwrap_or_default()
    );
    let (by_zero, by_undefined) = divisor_census(200);
    assert!(by_zero > 0, "no run divided by zero; the corpus is too tame");
    assert!(by_undefined > 0, "no run divided by undefined; the corpus is too tame");
    println!(
        "PASS 1000 programs, widths 1/2/3/4/8: logical cells exact, padding all zero, in \
         {elapsed:?} ({by_zero}/200 early runs divide by zero, {by_undefined}/200 by undefined)"
    );
}

fn init_file_text(program: &Program, init: &InitSpec) -> String {
    let mut out = String::new();
    for decl in &program.declarations {
        let Some(entry) = init.get(&decl.name) else { continue };
        if !out.is_empty() {
            out.push('\n');
        }
        let extents: Vec<String> = decl.extents.iter().map(|d| d.to_string()).collect();
        out.push_str(&format!("{} : [{}]\n", decl.name, extents.join(" ")));
        let cells: Vec<String> = entry.values.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

#[test]
fn width_one_padding_is_observably_the_reference() {
    let one = VectorLength::new(1).unwrap();
    for seed in 0..100 {
        let cfg = GenConfig::with_seed(seed);
        let program = gen_program(&cfg);
        let init = gen_init(&cfg, &program);
        let plain = run(&program, &init).unwrap();
        let padded = run_padded(&program, &init, one).unwrap();
        assert_eq!(plain.len(), padded.len(), "seed {seed}: domains differ");
        for (id, shape) in plain.tensors() {
            assert_eq!(padded.shape_of(id), Some(shape), "seed {seed}: {id} shape");
            for index in shape.indices() {
                assert_eq!(
                    plain.read(id, &index).unwrap(),
                    padded.read(id, &index).unwrap(),
                    "seed {seed}: {id} at {index:?}"
                );
            }
        }
    }

    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5 {
        let cfg = GenConfig::with_seed(seed);
        let program = gen_program(&cfg);
        let init = gen_init(&cfg, &program);
        let program_path = dir.path().join(format!("p{seed}.tl"));
        let init_path = dir.path().join(format!("p{seed}.store"));
        fs::write(&program_path, pretty_print(&program)).unwrap();
        fs::write(&init_path, init_file_text(&program, &init)).unwrap();
        let out_plain = dir.path().join(format!("p{seed}.out"));
        let out_padded = dir.path().join(format!("p{seed}.pad.out"));
        for (pad, out_path) in [(None, &out_plain), (Some("1"), &out_padded)] {
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_tl"));
            cmd.arg("run").arg(&program_path).arg("--init").arg(&init_path).arg("-o").arg(out_path);
            if let Some(m) = pad {
                cmd.arg("--pad").arg(m);
            }
            let out = cmd.output().unwrap();
            assert!(
                out.status.success(),
                "seed {seed}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        let plain_bytes = fs::read(&out_plain).unwrap();
        let padded_bytes = fs::read(&out_padded).unwrap();
        assert_eq!(plain_bytes, padded_bytes, "seed {seed}: output files differ");
        assert!(!plain_bytes.is_empty(), "seed {seed}: empty dump");
    }
    println!("PASS width-1 padding: 100 stores identical, 5 output files byte-identical");
}

/// Integer-or-undefined model of a cell, from which the expected tables
/// are derived arithmetic-free of the implementation under test.
fn table_value(v: Option<(i64, i64)>) -> Value {
    match v {
        Some((p, q)) => Value::ratio(p, q),
        None => Value::Undefined,
    }
}

#[test]
fn arithmetic_follows_the_definitional_tables_exactly() {
    let operands: [Option<i64>; 6] = [None, Some(0), Some(1), Some(-1), Some(2), Some(-2)];
    let mut checked = 0;
    for &a in &operands {
        for &b in &operands {
            let va = table_value(a.map(|x| (x, 1)));
            let vb = table_value(b.map(|x| (x, 1)));
            for op in [BinOp::Add, BinOp::Sub, BinOp::Mul] {
                let expected = match (a, b) {
                    (Some(x), Some(y)) => {
                        let r = match op {
                            BinOp::Add => (x + y, 1),
                            BinOp::Sub => (x - y, 1),
                            BinOp::Mul => (x * y, 1),
                            BinOp::Div => unreachable!(),
                        };
                        table_value(Some(r))
                    }
                    _ => Value::Undefined,
                };
                for mode in [ArithMode::Extended, ArithMode::Controlled] {
                    assert_eq!(
                        arith(op, &va, &vb, mode),
                        expected,
                        "{a:?} {} {b:?} in {mode:?}",
                        op.symbol()
                    );
                    checked += 1;
                }
            }
            let extended = match (a, b) {
                (Some(x), Some(y)) if y != 0 => table_value(Some((x, y))),
                _ => Value::Undefined,
            };
            assert_eq!(arith(BinOp::Div, &va, &vb, ArithMode::Extended), extended, "{a:?}/{b:?}");
            let controlled = if a == Some(0) { Value::zero() } else { extended.clone() };
            assert_eq!(
                arith(BinOp::Div, &va, &vb, ArithMode::Controlled),
                controlled,
                "{a:?}/{b:?} controlled"
            );
            checked += 2;
        }
    }
    println!("PASS arithmetic tables: {checked} operator applications all exact");
}

#[test]
fn dead_code_elimination_is_sound_and_idempotent() {
    let four = VectorLength::new(4).unwrap();
    let mut eliminated_total = 0;
    for seed in 0..500 {
        let cfg = GenConfig::with_seed(seed);
        let program = gen_program(&cfg);
        let init = gen_init(&cfg, &program);
        let slim = dead_code_eliminate(&program);
        assert_eq!(dead_code_eliminate(&slim), slim, "seed {seed}: not idempotent");
        eliminated_total += program.statements.len() - slim.statements.len();
        let full_out = run(&program, &init).unwrap();
        let slim_out = run(&slim, &init).unwrap();
        let full_padded = run_padded(&program, &init, four).unwrap();
        let slim_padded = run_padded(&slim, &init, four).unwrap();
        for decl in &program.declarations {
            if decl.qualifier != Qualifier::Output {
                continue;
            }
            let shape = full_out.shape_of(&decl.name).unwrap().clone();
            for index in shape.indices() {
                assert_eq!(
                    full_out.read(&decl.name, &index).unwrap(),
                    slim_out.read(&decl.name, &index).unwrap(),
                    "seed {seed}: output {} at {index:?}",
                    decl.name
                );
                assert_eq!(
                    full_padded.read(&decl.name, &index).unwrap(),
                    slim_padded.read(&decl.name, &index).unwrap(),
                    "seed {seed}: padded output {} at {index:?}",
                    decl.name
                );
            }
        }
    }
    assert!(eliminated_total > 0, "the corpus never exercised elimination");
    println!(
        "PASS dead-code elimination: 500 programs, outputs preserved under both evaluators, \
         idempotent, {eliminated_total} statements removed in total"
    );
}

#[test]
fn typing_commutes_with_rounding() {
    let widths: Vec<VectorLength> =
        [1usize, 3, 8].iter().map(|&m| VectorLength::new(m).unwrap()).collect();
    let mut exprs = 0;
    let mut seed = 0u64;
    while exprs < 1000 {
        let program = gen_program(&GenConfig::with_seed(seed));
        let ctx = check_program(&program).unwrap();
        let rounded: Vec<_> = widths.iter().map(|&m| (m, round_context(&ctx, m))).collect();
        for stmt in &program.statements {
            let plain = type_expr(&ctx, &stmt.rhs).unwrap();
            for (m, rctx) in &rounded {
                assert_eq!(
                    type_expr(rctx, &stmt.rhs).unwrap(),
                    plain.round_up(*m),
                    "seed {seed}: {}",
                    pretty_print(&program)
                );
            }
            exprs += 1;
        }
        seed += 1;
    }
    println!("PASS typing under a rounded context is the rounded type: {exprs} expressions x 3 widths");
}

#[test]
fn textbook_spot_checks() {
    let matmul = parse_program(
        "var a : [2 2]\nvar b : [2 2]\nvar c : [2 2]\n\nc = (a # b) . [2 3]\n",
    )
    .unwrap();
    let mut init = InitSpec::empty();
    init.set("a", vec![Value::int(1), Value::int(2), Value::int(3), Value::int(4)]);
    init.set("b", vec![Value::int(5), Value::int(6), Value::int(7), Value::int(8)]);
    let store = run(&matmul, &init).unwrap();
    let want = [[19, 22], [43, 50]];
    for (i, row) in want.iter().enumerate() {
        for (j, &cell) in row.iter().enumerate() {
            let index = tl_core::index::MultiIndex::new(vec![i + 1, j + 1]).unwrap();
            assert_eq!(store.read("c", &index).unwrap(), &Value::int(cell), "c at {i},{j}");
        }
    }

    let trace = parse_program(
        "var a : [2 2]\nvar b : [2 2]\nvar t : []\n\nb = a ^ [1 2]\nt = ((a # b) . [2 3]) . [1 2]\n",
    )
    .unwrap();
    let mut init = InitSpec::empty();
    init.set("a", vec![Value::int(1), Value::int(2), Value::int(3), Value::int(4)]);
    let store = run(&trace, &init).unwrap();
    let unit = tl_core::index::MultiIndex::new(vec![]).unwrap();
    assert_eq!(store.read("t", &unit).unwrap(), &Value::int(30));

    println!("PASS 2x2 product is [[19,22],[43,50]] and the self-product trace is 30");
}
