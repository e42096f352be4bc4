use std::thread;

/// `items.iter().map(f)` on up to `threads` scoped workers, each taking a
/// contiguous chunk. The result is in input order.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = threads.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_input_order() {
        let items: Vec<u64> = (0..103).collect();
        for threads in [1, 2, 7, 200] {
            assert_eq!(parallel_map(&items, threads, |v| v * v), items.iter().map(|v| v * v).collect::<Vec<_>>());
        }
        assert!(parallel_map(&[] as &[u64], 4, |v| *v).is_empty());
    }
}
