//! Evaluation over padded storage.
//!
//! Padding models vectorized layouts: every extent is rounded up to a
//! multiple of a block size M, and the cells between a tensor's logical
//! box and its rounded box are filled with zeros. A padded run reuses the
//! one evaluator unchanged; the only difference is the context it runs
//! under. Handing it the rounded context widens every write loop, index
//! split, and contraction bound to the rounded extents.
//!
//! The zero fill and controlled division together make padding
//! self-sustaining: padding cells hold zero before the first statement and
//! after every statement, and logical cells compute exactly the values an
//! unpadded run computes, whatever M is. Sums pick up only zero terms from
//! padding, products with a zero padding operand stay zero, and a zero
//! numerator divided by a zero or undefined denominator is zero again.

use crate::eval::{check_init_ids, initial_cells, run_statements, RunError};
use crate::index::VectorLength;
use crate::store::{InitSpec, Store};
use crate::syntax::{Pos, Program};
use crate::typecheck::{check_program, StaticContext};
use crate::value::Value;

/// Rounds every declared type up to multiples of `m`, keeping order and
/// qualifiers.
pub fn round_context(ctx: &StaticContext, m: VectorLength) -> StaticContext {
    let mut rounded = StaticContext::empty();
    for (id, binding) in ctx.iter() {
        rounded
            .declare(id, binding.ty.round_up(m), binding.qualifier, Pos::synthetic())
            .expect("source context has no duplicates");
    }
    rounded
}

/// Builds the padded initial store: every variable gets its rounded box,
/// with logical cells taken from the init spec exactly as in an unpadded
/// run and every padding cell set to zero.
pub fn init_padded_store(
    ctx: &StaticContext,
    init: &InitSpec,
    m: VectorLength,
) -> Result<Store, RunError> {
    check_init_ids(ctx, init)?;
    let mut store = Store::empty();
    for (id, binding) in ctx.iter() {
        let logical = &binding.ty;
        let rounded = logical.round_up(m);
        // Row-major enumeration of the rounded box visits the logical cells
        // in their own row-major order (restricting a lexicographic order
        // to a sub-box keeps relative order), so one pass over the logical
        // list fills them as they come up.
        let mut logical_cells = initial_cells(ctx, init, id)?.into_iter();
        let cells: Vec<Value> = rounded
            .indices()
            .map(|index| {
                if logical.contains(&index) {
                    logical_cells.next().expect("logical cells cover the logical box")
                } else {
                    Value::zero()
                }
            })
            .collect();
        debug_assert!(logical_cells.next().is_none());
        store.insert_tensor(id, rounded, cells);
    }
    Ok(store)
}

/// Typechecks and runs a program over padded storage.
pub fn run_padded(program: &Program, init: &InitSpec, m: VectorLength) -> Result<Store, RunError> {
    let ctx = check_program(program)?;
    let rounded = round_context(&ctx, m);
    let mut store = init_padded_store(&ctx, init, m)?;
    run_statements(&rounded, &mut store, &program.statements)?;
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::run;
    use crate::index::{MultiIndex, TensorType};
    use crate::store::InitError;
    use crate::syntax::{parse_program, Qualifier};
    use crate::typecheck::build_context;

    fn m(v: usize) -> VectorLength {
        VectorLength::new(v).unwrap()
    }

    fn idx(cs: &[usize]) -> MultiIndex {
        MultiIndex::new(cs.to_vec()).unwrap()
    }

    fn ty(ds: &[usize]) -> TensorType {
        TensorType::new(ds.to_vec()).unwrap()
    }

    fn ints(vs: &[i64]) -> Vec<Value> {
        vs.iter().map(|&v| Value::int(v)).collect()
    }

    fn read(store: &Store, id: &str, cs: &[usize]) -> Value {
        store.read(id, &idx(cs)).unwrap().clone()
    }

    #[test]
    fn rounding_a_context() {
        let p = parse_program("var A : [3 5] var input s : []").unwrap();
        let ctx = build_context(&p.declarations).unwrap();
        let rounded = round_context(&ctx, m(4));
        assert_eq!(rounded.type_of("A"), Some(&ty(&[4, 8])));
        assert_eq!(rounded.type_of("s"), Some(&TensorType::scalar()));
        assert_eq!(rounded.qualifier_of("s"), Some(Qualifier::Input));
        // M = 1 changes nothing.
        assert_eq!(round_context(&ctx, m(1)).type_of("A"), Some(&ty(&[3, 5])));
    }

    #[test]
    fn padded_store_layout() {
        let p = parse_program("var x : [3]").unwrap();
        let ctx = build_context(&p.declarations).unwrap();
        let mut init = InitSpec::empty();
        init.set("x", ints(&[1, 2, 3]));
        let store = init_padded_store(&ctx, &init, m(4)).unwrap();
        assert_eq!(store.shape_of("x"), Some(&ty(&[4])));
        assert_eq!(read(&store, "x", &[3]), Value::int(3));
        assert_eq!(read(&store, "x", &[4]), Value::int(0));
        // Without initial values the logical cells are undefined but the
        // padding is still zero.
        let bare = init_padded_store(&ctx, &InitSpec::empty(), m(4)).unwrap();
        assert_eq!(read(&bare, "x", &[1]), Value::Undefined);
        assert_eq!(read(&bare, "x", &[4]), Value::int(0));
    }

    #[test]
    fn padded_store_interleaves_rows() {
        let p = parse_program("var x : [2 2]").unwrap();
        let ctx = build_context(&p.declarations).unwrap();
        let mut init = InitSpec::empty();
        init.set("x", ints(&[1, 2, 3, 4]));
        let store = init_padded_store(&ctx, &init, m(3)).unwrap();
        assert_eq!(store.shape_of("x"), Some(&ty(&[3, 3])));
        assert_eq!(read(&store, "x", &[1, 1]), Value::int(1));
        assert_eq!(read(&store, "x", &[1, 2]), Value::int(2));
        assert_eq!(read(&store, "x", &[1, 3]), Value::int(0));
        assert_eq!(read(&store, "x", &[2, 1]), Value::int(3));
        assert_eq!(read(&store, "x", &[2, 2]), Value::int(4));
        assert_eq!(read(&store, "x", &[3, 3]), Value::int(0));
    }

    #[test]
    fn input_validation_applies_to_padded_runs() {
        let p = parse_program("var input x : [2]").unwrap();
        let ctx = build_context(&p.declarations).unwrap();
        match init_padded_store(&ctx, &InitSpec::empty(), m(4)) {
            Err(RunError::Init(InitError::InputUninitialized { .. })) => {}
            other => panic!("expected an input error, got {other:?}"),
        }
    }

    #[test]
    fn matrix_product_padded_matches_reference() {
        let text = "var A : [2 2] var B : [2 2] var C : [2 2] C = (A # B) . [2 3]";
        let p = parse_program(text).unwrap();
        let mut init = InitSpec::empty();
        init.set("A", ints(&[1, 2, 3, 4]));
        init.set("B", ints(&[5, 6, 7, 8]));
        let reference = run(&p, &init).unwrap();
        let padded = run_padded(&p, &init, m(4)).unwrap();
        assert_eq!(padded.shape_of("C"), Some(&ty(&[4, 4])));
        for index in ty(&[2, 2]).indices() {
            assert_eq!(
                padded.read("C", &index).unwrap(),
                reference.read("C", &index).unwrap()
            );
        }
        // All 12 padding cells of C stay zero through the run.
        let mut padding_cells = 0;
        for index in ty(&[4, 4]).indices() {
            if index.in_interval(ty(&[2, 2]).as_index(), ty(&[4, 4]).as_index()) {
                assert_eq!(read(&padded, "C", index.components()), Value::int(0));
                padding_cells += 1;
            }
        }
        assert_eq!(padding_cells, 12);
    }

    #[test]
    fn division_keeps_padding_at_zero() {
        // Element-wise division with zero and undefined denominators in the
        // logical region; the padding cells divide 0 by 0 and must stay 0.
        let p = parse_program("var a : [3] var b : [3] var x : [3] x = a / b").unwrap();
        let mut init = InitSpec::empty();
        init.set("a", ints(&[1, 0, 5]));
        init.set("b", vec![Value::int(0), Value::Undefined, Value::int(2)]);
        let store = run_padded(&p, &init, m(4)).unwrap();
        assert_eq!(read(&store, "x", &[1]), Value::Undefined);
        assert_eq!(read(&store, "x", &[2]), Value::int(0));
        assert_eq!(read(&store, "x", &[3]), Value::ratio(5, 2));
        assert_eq!(read(&store, "x", &[4]), Value::int(0));
    }

    #[test]
    fn block_size_one_is_the_reference_run() {
        let text = "var A : [2 3] var B : [3 2] var C : [2 2] var s : [] \
                    C = (A # B) . [2 3] s = C . [1 2]";
        let p = parse_program(text).unwrap();
        let mut init = InitSpec::empty();
        init.set("A", ints(&[1, 2, 3, 4, 5, 6]));
        init.set("B", ints(&[6, 5, 4, 3, 2, 1]));
        let reference = run(&p, &init).unwrap();
        let padded = run_padded(&p, &init, m(1)).unwrap();
        assert_eq!(reference.domain(), padded.domain());
        for (id, shape) in reference.tensors() {
            for index in shape.indices() {
                assert_eq!(
                    reference.read(id, &index).unwrap(),
                    padded.read(id, &index).unwrap(),
                    "{id}{index}"
                );
            }
        }
    }

    #[test]
    fn contraction_over_padded_dimension_ignores_padding() {
        let p = parse_program("var A : [3 3] var s : [] s = A . [1 2]").unwrap();
        let mut init = InitSpec::empty();
        init.set("A", ints(&[1, 2, 3, 4, 5, 6, 7, 8, 9]));
        for block in [2, 3, 4, 8] {
            let store = run_padded(&p, &init, m(block)).unwrap();
            assert_eq!(read(&store, "s", &[]), Value::int(15), "M = {block}");
        }
    }

    /// The zero-padding guarantee needs every multiplicative factor to be
    /// defined: undefined absorbs multiplication, so an undefined scalar
    /// (or an undefined cell of an outer-product operand) overwrites the
    /// zero in a padding cell. Division is immune because a zero numerator
    /// wins outright. This pins the boundary; the differential harness
    /// keeps its corpus on the guaranteed side of it.
    #[test]
    fn undefined_factors_reach_padding_cells() {
        let p = parse_program("var s : [] var c : [3] var x : [3] x = s * c").unwrap();
        let mut init = InitSpec::empty();
        init.set("c", ints(&[1, 2, 3]));
        let store = run_padded(&p, &init, m(4)).unwrap();
        assert_eq!(read(&store, "x", &[4]), Value::Undefined);

        // The undefined factor does not even need an undefined input; a
        // division by zero manufactures one mid-run.
        let p = parse_program(
            "var a : [] var b : [] var c : [3] var x : [3] x = (a / b) * c",
        )
        .unwrap();
        let mut init = InitSpec::empty();
        init.set("a", ints(&[1]));
        init.set("b", ints(&[0]));
        init.set("c", ints(&[1, 2, 3]));
        let store = run_padded(&p, &init, m(4)).unwrap();
        assert_eq!(read(&store, "x", &[4]), Value::Undefined);

        // Division by that same undefined scalar keeps padding intact.
        let p = parse_program(
            "var a : [] var b : [] var c : [3] var x : [3] x = c / (a / b)",
        )
        .unwrap();
        let mut init = InitSpec::empty();
        init.set("a", ints(&[1]));
        init.set("b", ints(&[0]));
        init.set("c", ints(&[1, 2, 3]));
        let store = run_padded(&p, &init, m(4)).unwrap();
        assert_eq!(read(&store, "x", &[4]), Value::zero());
    }
}
