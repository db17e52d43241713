//! The store file format.
//!
//! One block per tensor: a header line `name : [d1 ... dk]` (empty brackets
//! for a scalar), then the cells in row-major order, whitespace-separated.
//! A cell is a decimal integer, a fraction `p/q`, or `_` for undefined.
//! Blocks are separated by blank lines. The same format serves as run input
//! (initial values) and run output, so a dumped store can seed another run.
//!
//! The writer breaks cells into one line per row (the last extent counts a
//! row) and lists tensors in declaration order; the reader accepts any
//! whitespace layout, since the header pins the cell count exactly.

use std::fmt::Write as _;

use num::BigInt;
use num::BigRational;
use thiserror::Error;

use crate::store::{InitSpec, Store};
use crate::syntax::Qualifier;
use crate::typecheck::StaticContext;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("store file error at line {line}: {message}")]
pub struct StoreFileError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> StoreFileError {
    StoreFileError { line, message: message.into() }
}

/// One parsed tensor block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreBlock {
    pub id: String,
    pub extents: Vec<usize>,
    pub values: Vec<Value>,
}

struct OpenBlock {
    block: StoreBlock,
    expected: usize,
    header_line: usize,
}

fn close_block(
    open: &mut Option<OpenBlock>,
    blocks: &mut Vec<StoreBlock>,
) -> Result<(), StoreFileError> {
    if let Some(o) = open.take() {
        if o.block.values.len() != o.expected {
            return Err(err(
                o.header_line,
                format!(
                    "tensor '{}' needs exactly {} cells, found {}",
                    o.block.id,
                    o.expected,
                    o.block.values.len()
                ),
            ));
        }
        blocks.push(o.block);
    }
    Ok(())
}

/// Parses store file text into blocks, checking each block's cell count
/// against its header.
pub fn parse_store_text(text: &str) -> Result<Vec<StoreBlock>, StoreFileError> {
    let mut blocks: Vec<StoreBlock> = Vec::new();
    let mut open: Option<OpenBlock> = None;

    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        if line.contains(':') {
            close_block(&mut open, &mut blocks)?;
            let (id, extents, rest) = parse_header(line, lineno)?;
            if blocks.iter().any(|b| b.id == id) {
                return Err(err(lineno, format!("tensor '{id}' appears twice")));
            }
            let expected = extents.iter().product::<usize>();
            let mut block = StoreBlock { id, extents, values: Vec::new() };
            for tok in rest.split_whitespace() {
                block.values.push(parse_value(tok, lineno)?);
            }
            open = Some(OpenBlock { block, expected, header_line: lineno });
        } else {
            for tok in line.split_whitespace() {
                match &mut open {
                    Some(o) => o.block.values.push(parse_value(tok, lineno)?),
                    None => return Err(err(lineno, "cell values before any tensor header")),
                }
            }
        }
    }
    close_block(&mut open, &mut blocks)?;
    Ok(blocks)
}

/// Parses store file text directly into an [`InitSpec`].
pub fn parse_init_spec(text: &str) -> Result<InitSpec, StoreFileError> {
    let mut spec = InitSpec::empty();
    for block in parse_store_text(text)? {
        spec.set_with_extents(&block.id, block.extents, block.values);
    }
    Ok(spec)
}

fn parse_header(
    line: &str,
    lineno: usize,
) -> Result<(String, Vec<usize>, &str), StoreFileError> {
    let (name_part, shape_part) =
        line.split_once(':').expect("caller found a ':' on this line");
    let id = name_part.trim();
    let valid = !id.is_empty()
        && id.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && id.chars().all(|c| c.is_ascii_alphanumeric());
    if !valid {
        return Err(err(lineno, format!("'{id}' is not a valid tensor name")));
    }
    let shape_part = shape_part.trim_start();
    let Some(shape_part) = shape_part.strip_prefix('[') else {
        return Err(err(lineno, "expected '[' after ':'"));
    };
    let Some((inside, rest)) = shape_part.split_once(']') else {
        return Err(err(lineno, "unterminated extent list, expected ']'"));
    };
    let mut extents = Vec::new();
    for tok in inside.split_whitespace() {
        let d: usize = tok
            .parse()
            .map_err(|_| err(lineno, format!("'{tok}' is not a valid extent")))?;
        if d == 0 {
            return Err(err(lineno, "tensor extents must be positive"));
        }
        extents.push(d);
    }
    Ok((id.to_string(), extents, rest))
}

fn parse_value(tok: &str, lineno: usize) -> Result<Value, StoreFileError> {
    if tok == "_" {
        return Ok(Value::Undefined);
    }
    let bad = || err(lineno, format!("'{tok}' is not a cell value (integer, p/q, or _)"));
    if let Some((p, q)) = tok.split_once('/') {
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(err(lineno, format!("'{tok}' has a zero denominator")));
        }
        return Ok(Value::Defined(BigRational::new(p, q)));
    }
    let n: BigInt = tok.parse().map_err(|_| bad())?;
    Ok(Value::Defined(BigRational::from_integer(n)))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DumpOptions {
    /// Restrict the dump to output-qualified variables.
    pub only_output: bool,
    /// Append each tensor's padding cells after its logical cells. Only
    /// meaningful for stores built with padding; the extra cells make the
    /// block wider than its header says, so such a dump is for inspection,
    /// not for feeding back in.
    pub dump_padding: bool,
}

/// Renders a store as text. The context supplies variable order (declaration
/// order), each variable's logical type, and qualifiers; the store may be
/// padded, in which case only the logical region is dumped unless
/// `dump_padding` asks for the rest.
pub fn dump_store(store: &Store, ctx: &StaticContext, opts: DumpOptions) -> String {
    let mut out = String::new();
    let mut first = true;
    for (id, binding) in ctx.iter() {
        if opts.only_output && binding.qualifier != Qualifier::Output {
            continue;
        }
        if !first {
            out.push('\n');
        }
        first = false;

        let logical = &binding.ty;
        writeln!(out, "{id} : {logical}").unwrap();
        let row = logical.extents().last().copied().unwrap_or(1);
        let mut cells_in_row = 0;
        for index in logical.indices() {
            let value = store.read(id, &index).expect("store covers the logical box");
            if cells_in_row > 0 {
                out.push(' ');
            }
            write!(out, "{value}").unwrap();
            cells_in_row += 1;
            if cells_in_row == row {
                out.push('\n');
                cells_in_row = 0;
            }
        }
        if opts.dump_padding {
            let stored = store.shape_of(id).expect("variable is in the store");
            let mut any = false;
            for index in stored.indices() {
                if index.in_interval(logical.as_index(), stored.as_index()) {
                    if any {
                        out.push(' ');
                    }
                    let value = store.read(id, &index).expect("index is in the stored box");
                    write!(out, "{value}").unwrap();
                    any = true;
                }
            }
            if any {
                out.push('\n');
            }
        }
    }
    out
}
