//! Execution backends for data-parallel inner loops.
//!
//! Every hot loop in the crate routes through these helpers. With the
//! `parallel` feature (default) they fan out over rayon; without it they
//! fall back to plain loops. The `_seq` and `_par` variants stay public so
//! the bench suite can compare both paths in one binary.
//!
//! Reductions collect per-index partials and combine them in index order,
//! so results are bit-identical regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fills `out` (row-major, `out.len() % row_len == 0`) one row at a time.
pub fn fill_rows<F>(out: &mut [f64], row_len: usize, fill: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    #[cfg(feature = "parallel")]
    fill_rows_par(out, row_len, fill);
    #[cfg(not(feature = "parallel"))]
    fill_rows_seq(out, row_len, fill);
}

pub fn fill_rows_seq<F>(out: &mut [f64], row_len: usize, fill: F)
where
    F: Fn(usize, &mut [f64]),
{
    debug_assert!(row_len > 0 && out.len() % row_len == 0);
    for (i, row) in out.chunks_mut(row_len).enumerate() {
        fill(i, row);
    }
}

#[cfg(feature = "parallel")]
pub fn fill_rows_par<F>(out: &mut [f64], row_len: usize, fill: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    debug_assert!(row_len > 0 && out.len() % row_len == 0);
    out.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| fill(i, row));
}

/// Sum of `term(i)` for `i in 0..n`, accumulated in index order.
pub fn map_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    return map_sum_par(n, term);
    #[cfg(not(feature = "parallel"))]
    return map_sum_seq(n, term);
}

pub fn map_sum_seq<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64,
{
    let mut acc = 0.0;
    for i in 0..n {
        acc += term(i);
    }
    acc
}

#[cfg(feature = "parallel")]
pub fn map_sum_par<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials: Vec<f64> = (0..n).into_par_iter().map(term).collect();
    let mut acc = 0.0;
    for p in partials {
        acc += p;
    }
    acc
}

/// `(0..n).map(f)` collected in index order.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    return map_collect_par(n, f);
    #[cfg(not(feature = "parallel"))]
    return map_collect_seq(n, f);
}

pub fn map_collect_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_collect_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_rows_matches_seq() {
        let n = 37;
        let d = 5;
        let f = |i: usize, row: &mut [f64]| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (i * d + j) as f64 * 0.25;
            }
        };
        let mut a = vec![0.0; n * d];
        let mut b = vec![0.0; n * d];
        fill_rows(&mut a, d, f);
        fill_rows_seq(&mut b, d, f);
        assert_eq!(a, b);
    }

    #[test]
    fn map_sum_is_ordered() {
        // The terms are chosen so that reassociation would change the bits.
        let term = |i: usize| 1.0 / (i as f64 + 1.0).powi(3);
        assert_eq!(map_sum(1000, term), map_sum_seq(1000, term));
    }

    #[test]
    fn map_collect_preserves_order() {
        assert_eq!(map_collect(6, |i| i * i), vec![0, 1, 4, 9, 16, 25]);
    }
}
