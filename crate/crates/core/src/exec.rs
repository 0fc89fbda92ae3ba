//! Order-preserving map over independent tasks.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it every schedule runs sequentially. Results always come back in
//! task-index order, and each task draws from its own random stream, so the
//! output does not depend on the schedule.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    Sequential,
    #[default]
    Parallel,
}

impl Schedule {
    /// Whether this schedule actually fans out in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Schedule::Parallel
    }
}

pub fn map_indexed<T, F>(n: usize, schedule: Schedule, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if schedule == Schedule::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = schedule;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_agree() {
        let seq = map_indexed(100, Schedule::Sequential, |i| i * i);
        let par = map_indexed(100, Schedule::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}
