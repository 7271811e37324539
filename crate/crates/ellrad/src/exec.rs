//! Execution strategy for embarrassingly parallel cell loops.
//!
//! Every expensive kernel in this crate is a map over independent output
//! cells, so the whole parallel story reduces to one helper: fill a slice
//! by evaluating a function of the flat index.  With the `parallel` feature
//! (default) the work is spread over a rayon pool; without it, or when the
//! global mode is set to [`Mode::Sequential`], a plain loop runs.  Results
//! are bit-identical either way because each cell is computed independently
//! and written exactly once.
//!
//! The `ELLRAD_THREADS` environment variable caps the rayon pool size; call
//! [`init_from_env`] once at startup (the CLI does) to apply it.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Parallel,
    Sequential,
}

static MODE: AtomicU8 = AtomicU8::new(0); // 0 = Parallel, 1 = Sequential

/// Set the process-wide execution mode.  [`Mode::Parallel`] is a no-op
/// without the `parallel` feature.
pub fn set_mode(mode: Mode) {
    MODE.store(if mode == Mode::Sequential { 1 } else { 0 }, Ordering::Relaxed);
}

pub fn mode() -> Mode {
    if MODE.load(Ordering::Relaxed) == 1 {
        Mode::Sequential
    } else {
        Mode::Parallel
    }
}

/// Apply the `ELLRAD_THREADS` override: `0` or `1` forces sequential
/// execution, a larger value sizes the rayon pool.  Returns the observed
/// setting, if any.
pub fn init_from_env() -> Option<usize> {
    let raw = std::env::var("ELLRAD_THREADS").ok()?;
    let count: usize = raw.trim().parse().ok()?;
    if count <= 1 {
        set_mode(Mode::Sequential);
    } else {
        set_mode(Mode::Parallel);
        #[cfg(feature = "parallel")]
        {
            // Ignore the error if a global pool already exists.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build_global();
        }
    }
    Some(count)
}

/// Fill `out[i] = f(i)` for every cell, in parallel when enabled.
pub fn fill_cells<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if mode() == Mode::Parallel {
            use rayon::prelude::*;
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = f(i));
            return;
        }
    }
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}

/// Same as [`fill_cells`] for complex-valued outputs.
pub fn fill_cells_complex<F>(out: &mut [rustfft::num_complex::Complex<f64>], f: F)
where
    F: Fn(usize) -> rustfft::num_complex::Complex<f64> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if mode() == Mode::Parallel {
            use rayon::prelude::*;
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = f(i));
            return;
        }
    }
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}

/// Run `f` with the mode temporarily forced, restoring the previous mode
/// afterwards.  Intended for tests and benchmarks.
pub fn with_mode<T>(mode_: Mode, f: impl FnOnce() -> T) -> T {
    let prev = mode();
    set_mode(mode_);
    let out = f();
    set_mode(prev);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.1).sin() * ((i as f64) + 0.5).sqrt();
        let mut a = vec![0.0; 1000];
        let mut b = vec![0.0; 1000];
        with_mode(Mode::Parallel, || fill_cells(&mut a, f));
        with_mode(Mode::Sequential, || fill_cells(&mut b, f));
        assert_eq!(a, b);
    }

    #[test]
    fn mode_roundtrip() {
        with_mode(Mode::Sequential, || {
            assert_eq!(mode(), Mode::Sequential);
        });
    }
}
