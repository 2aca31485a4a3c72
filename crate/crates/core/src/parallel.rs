//! Order-preserving parallel map over contiguous chunks.

use std::num::NonZeroUsize;
use std::thread;

/// Number of worker threads: `requested`, or the available cores when zero.
pub fn resolve_threads(requested: usize) -> usize {
    if requested > 0 {
        return requested;
    }
    thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
}

/// Applies `f` to `items` split into at most `threads` contiguous chunks and
/// concatenates the per-chunk outputs in input order.
///
/// The result is identical for every thread count as long as `f` treats its
/// chunk independently of where the chunk boundaries fall.
pub fn map_chunks<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> Vec<R> + Sync,
{
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 {
        return f(items);
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| scope.spawn(move || f(c)))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_order_is_independent_of_thread_count() {
        let items: Vec<u32> = (0..103).collect();
        let one = map_chunks(&items, 1, |c| c.iter().map(|x| x * 2).collect());
        let four = map_chunks(&items, 4, |c| c.iter().map(|x| x * 2).collect());
        assert_eq!(one, four);
        assert!(map_chunks(&[] as &[u32], 3, |c| c.to_vec()).is_empty());
    }
}
