//! Average class mutual information (ACMI) of a class bigram matrix, in bits:
//!
//! ```text
//! ACMI = sum_{i,j : N(i,j) > 0} p(i,j) * log2( p(i,j) / (pl(i) * pr(j)) )
//! ```
//!
//! with `p(i,j) = N(i,j)/T` and `pl`, `pr` the row and column marginals
//! divided by `T`.
//!
//! A single-word move changes only rows and columns `from` and `to`, so
//! [`delta_acmi`] never looks at any other cell. It picks the cheaper of two
//! exact evaluations:
//!
//! * per-cell: every non-zero cell of the two rows and two columns, before
//!   and after, `8(C-1)` log terms at most;
//! * entropy form: since `ACMI = (sum N log N - sum r log r - sum c log c)/T
//!   + log T`, only the cells whose count actually changes plus the four
//!   touched marginals need a log term. This is proportional to the number
//!   of distinct classes in the word's context rather than to `C`.

use crate::bigram::{move_changes, ClassMatrix, ContextVectors};
use crate::{ClassId, Error, Result, WordId};

/// Improvement threshold in bits: deltas at or below it do not count as
/// improvements.
pub const EPSILON: f64 = 1e-12;

/// Exact change of ACMI caused by moving `word` from `from` to `to`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoveDelta {
    pub word: WordId,
    pub from: ClassId,
    pub to: ClassId,
    pub delta: f64,
    /// Number of `x log x` terms evaluated to obtain `delta`.
    pub log_terms: usize,
}

/// Upper bound on [`MoveDelta::log_terms`] for a `C`-class matrix.
pub fn log_term_budget(classes: usize) -> usize {
    8 * classes.saturating_sub(1)
}

#[inline]
fn xlogx(x: u64) -> f64 {
    if x == 0 {
        0.0
    } else {
        let x = x as f64;
        x * x.log2()
    }
}

/// Mutual information between the class of a token and the class of its
/// successor.
pub fn acmi(m: &ClassMatrix) -> Result<f64> {
    let total = m.total();
    if total == 0 {
        return Err(Error::UndefinedObjective);
    }
    let t = total as f64;
    let c = m.classes() as ClassId;
    let mut sum = 0.0;
    for i in 0..c {
        let row = m.row(i);
        if row == 0 {
            continue;
        }
        for j in 0..c {
            let n = m.get(i, j);
            if n > 0 {
                sum += cell_term(n, row, m.col(j), t);
            }
        }
    }
    Ok(sum)
}

#[inline]
fn cell_term(n: u64, row: u64, col: u64, t: f64) -> f64 {
    let n = n as f64;
    n / t * (n * t / (row as f64 * col as f64)).log2()
}

/// Change in ACMI if `ctx.word` moves from `from` to `to`. The matrix is
/// not modified.
pub fn delta_acmi(
    m: &ClassMatrix,
    ctx: &ContextVectors,
    from: ClassId,
    to: ClassId,
) -> Result<MoveDelta> {
    if m.total() == 0 {
        return Err(Error::UndefinedObjective);
    }
    let changes = move_changes(ctx, from, to, m.classes())?;
    let mut updated = Vec::with_capacity(changes.len());
    let mut cost = 0;
    for ch in &changes {
        let old = m.get(ch.row, ch.col);
        let new = ch.apply(old)?;
        cost += usize::from(old > 0) + usize::from(new > 0);
        updated.push((old, new));
    }
    let out = ctx.successor_total();
    let inc = ctx.predecessor_total();
    if m.row(from) < out || m.col(from) < inc {
        return Err(Error::Inconsistent(format!(
            "marginals of class {from} smaller than the context of word {}",
            ctx.word
        )));
    }
    let marginals = [
        (m.row(from), m.row(from) - out),
        (m.row(to), m.row(to) + out),
        (m.col(from), m.col(from) - inc),
        (m.col(to), m.col(to) + inc),
    ];
    for (k, &(old, new)) in marginals.iter().enumerate() {
        let moved = if k < 2 { out } else { inc };
        if moved > 0 {
            cost += usize::from(old > 0) + usize::from(new > 0);
        }
    }

    let (delta, log_terms) = if cost <= log_term_budget(m.classes()) {
        (entropy_form(m.total(), &updated, &marginals, out, inc), cost)
    } else {
        per_cell_form(m, ctx, from, to, &marginals)?
    };
    Ok(MoveDelta {
        word: ctx.word,
        from,
        to,
        delta,
        log_terms,
    })
}

fn entropy_form(total: u64, cells: &[(u64, u64)], marginals: &[(u64, u64); 4], out: u64, inc: u64) -> f64 {
    let mut sum = 0.0;
    for &(old, new) in cells {
        sum += xlogx(new) - xlogx(old);
    }
    for (k, &(old, new)) in marginals.iter().enumerate() {
        let moved = if k < 2 { out } else { inc };
        if moved > 0 {
            sum -= xlogx(new) - xlogx(old);
        }
    }
    sum / total as f64
}

/// Evaluates every non-zero cell of rows and columns `from`/`to` before and
/// after the move.
fn per_cell_form(
    m: &ClassMatrix,
    ctx: &ContextVectors,
    from: ClassId,
    to: ClassId,
    marginals: &[(u64, u64); 4],
) -> Result<(f64, usize)> {
    let c = m.classes();
    let t = m.total() as f64;
    // dense deltas: rows from/to, then columns from/to
    let mut d = vec![0i64; 4 * c];
    for ch in move_changes(ctx, from, to, c)? {
        let (r, k) = (ch.row, ch.col);
        if r == from {
            d[k as usize] += ch.delta;
        } else if r == to {
            d[c + k as usize] += ch.delta;
        } else if k == from {
            d[2 * c + r as usize] += ch.delta;
        } else {
            d[3 * c + r as usize] += ch.delta;
        }
    }
    let row_old = |i: ClassId| match i {
        _ if i == from => marginals[0].0,
        _ if i == to => marginals[1].0,
        _ => m.row(i),
    };
    let row_new = |i: ClassId| match i {
        _ if i == from => marginals[0].1,
        _ if i == to => marginals[1].1,
        _ => m.row(i),
    };
    let col_old = |j: ClassId| match j {
        _ if j == from => marginals[2].0,
        _ if j == to => marginals[3].0,
        _ => m.col(j),
    };
    let col_new = |j: ClassId| match j {
        _ if j == from => marginals[2].1,
        _ if j == to => marginals[3].1,
        _ => m.col(j),
    };

    let mut before = 0.0;
    let mut after = 0.0;
    let mut terms = 0;
    let mut visit = |i: ClassId, j: ClassId, dv: i64| -> Result<()> {
        let old = m.get(i, j);
        let new = old.checked_add_signed(dv).ok_or_else(|| {
            Error::Inconsistent(format!("cell ({i}, {j}) would become negative"))
        })?;
        if old > 0 {
            before += cell_term(old, row_old(i), col_old(j), t);
            terms += 1;
        }
        if new > 0 {
            after += cell_term(new, row_new(i), col_new(j), t);
            terms += 1;
        }
        Ok(())
    };
    for j in 0..c {
        visit(from, j as ClassId, d[j])?;
        visit(to, j as ClassId, d[c + j])?;
    }
    for i in 0..c as ClassId {
        if i != from && i != to {
            visit(i, from, d[2 * c + i as usize])?;
            visit(i, to, d[3 * c + i as usize])?;
        }
    }
    Ok((after - before, terms))
}
