//! Thin dispatch layer between rayon and plain iteration.
//!
//! Every parallel site in this crate routes through [`map_collect`], which
//! runs on the rayon pool when the `parallel` feature is enabled and falls
//! back to a sequential loop otherwise. Call sites must pass pure closures
//! whose outputs depend only on their input element; under that contract the
//! result vector is identical in both builds and for any thread count,
//! because results are collected in input order.

/// Maps `f` over `items` and collects results in input order.
#[cfg(feature = "parallel")]
pub fn map_collect<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items` and collects results in input order.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    map_collect_seq(items, f)
}

/// Sequential twin of [`map_collect`], available in every build. Benchmarks
/// compare the two directly; tests use it to pin down expected outputs.
pub fn map_collect_seq<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync,
{
    items.iter().map(f).collect()
}

/// Maps a fallible `f` over `items`, failing on the first error in input
/// order regardless of execution order.
pub fn try_map_collect<I, O, E, F>(items: &[I], f: F) -> Result<Vec<O>, E>
where
    I: Sync,
    O: Send,
    E: Send,
    F: Fn(&I) -> Result<O, E> + Sync + Send,
{
    map_collect(items, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_collect_preserves_input_order() {
        let items: Vec<u64> = (0..4096).collect();
        let out = map_collect(&items, |x| x * x);
        let expected = map_collect_seq(&items, |x| x * x);
        assert_eq!(out, expected);
    }

    #[test]
    fn try_map_collect_reports_first_error_by_index() {
        let items: Vec<i64> = (0..100).collect();
        let res = try_map_collect(&items, |&x| if x >= 7 { Err(x) } else { Ok(x) });
        assert_eq!(res, Err(7));
    }
}
