//! Data-parallel helpers.
//!
//! With the `parallel` feature (on by default) batch evaluations fan out over
//! the rayon pool. Without it, or when [`Execution::Sequential`] is requested,
//! the same closures run on the calling thread. Output order always matches
//! input order, so results are identical between the two paths.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a batch of independent evaluations is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls back
    /// to sequential evaluation.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `items`, stopping at the first error.
pub fn try_map<T, R, E, F>(exec: Execution, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Infallible variant of [`try_map`].
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Caps the global rayon pool at `threads` workers. Returns `false` if the
/// pool was already initialised or the feature is disabled.
pub fn init_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree_and_keep_order() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        let a = map(Execution::Sequential, &xs, |x| x.sin());
        let b = map(Execution::Parallel, &xs, |x| x.sin());
        assert_eq!(a, b);
    }

    #[test]
    fn first_error_is_reported() {
        let xs = [1, 2, 3, -1, 5];
        let r: Result<Vec<i32>, String> = try_map(Execution::Parallel, &xs, |&x| {
            if x < 0 {
                Err(format!("negative {x}"))
            } else {
                Ok(x * 2)
            }
        });
        assert_eq!(r.unwrap_err(), "negative -1");
    }
}
