//! Execution policy for the data-parallel parts of the crate.
//!
//! Only embarrassingly parallel work is dispatched here: k-mer sorting during
//! graph construction and batches of independent verification cases. The
//! merge procedures themselves are sequential scans.

/// How to run a data-parallel section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, otherwise
    /// behaves like [`Exec::Sequential`].
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    pub fn sort_unstable<T: Ord + Send>(self, items: &mut [T]) {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::slice::ParallelSliceMut;
            items.par_sort_unstable();
            return;
        }
        items.sort_unstable();
    }

    /// Maps `f` over `items`, keeping input order in the output.
    pub fn map<T, R, F>(self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
        items.into_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_agree() {
        let data: Vec<u32> = (0..1000).map(|i| (i * 7919) % 1009).collect();
        let mut a = data.clone();
        let mut b = data.clone();
        Exec::Sequential.sort_unstable(&mut a);
        Exec::Parallel.sort_unstable(&mut b);
        assert_eq!(a, b);
        let sq = |x: u32| x as u64 * x as u64;
        assert_eq!(Exec::Sequential.map(data.clone(), sq), Exec::Parallel.map(data, sq));
    }
}
