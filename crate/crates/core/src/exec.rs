//! Execution backends for the data-parallel loops of the crate.
//!
//! Every loop that fans out over independent work items (Monte-Carlo
//! replications, simulation draws, lag-grid candidates, kernel rows) goes
//! through [`map_indexed`]. Items are addressed by index and results are
//! collected in index order, so the output does not depend on the backend
//! or on thread scheduling.
//!
//! With the `parallel` feature (on by default) the work is spread over the
//! rayon global pool; without it only [`Execution::Sequential`] exists.

/// How an indexed batch of independent work items is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    /// All backends compiled into this build.
    pub fn available() -> &'static [Execution] {
        #[cfg(feature = "parallel")]
        {
            &[Execution::Sequential, Execution::Parallel]
        }
        #[cfg(not(feature = "parallel"))]
        {
            &[Execution::Sequential]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Execution::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Execution::Parallel => "parallel",
        }
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
    }
}

/// Like [`map_indexed`] but short-circuits on the first error in index order.
pub fn try_map_indexed<T, E, F>(exec: Execution, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(exec, n, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backends_agree_and_preserve_order() {
        let reference: Vec<u64> = (0..1000u64).map(|i| i * i + 7).collect();
        for &exec in Execution::available() {
            let got = map_indexed(exec, 1000, |i| (i as u64) * (i as u64) + 7);
            assert_eq!(got, reference, "{}", exec.name());
        }
    }

    #[test]
    fn try_map_reports_first_error_by_index() {
        for &exec in Execution::available() {
            let r: Result<Vec<usize>, usize> =
                try_map_indexed(exec, 100, |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
            assert_eq!(r, Err(29));
        }
    }
}
