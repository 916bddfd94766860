//! Thin data-parallel layer.
//!
//! Every function here returns results in index order, so floating-point
//! reductions done afterwards are deterministic regardless of the feature.

/// Whether the rayon backend is compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map<T, U, F>(data: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    data.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(data: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    data.iter().map(f).collect()
}

/// Fills `out[i] = f(i)`, chunked so each task amortizes its setup.
#[cfg(feature = "parallel")]
pub fn fill<U, F>(out: &mut [U], f: F)
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    out.par_iter_mut()
        .with_min_len(256)
        .enumerate()
        .for_each(|(i, o)| *o = f(i));
}

#[cfg(not(feature = "parallel"))]
pub fn fill<U, F>(out: &mut [U], f: F)
where
    F: Fn(usize) -> U,
{
    out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
}

/// Index of the first element for which `pred` holds.
#[cfg(feature = "parallel")]
pub fn position_first<F>(count: usize, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().position_first(pred)
}

#[cfg(not(feature = "parallel"))]
pub fn position_first<F>(count: usize, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool,
{
    (0..count).position(pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let v = map_indexed(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        let mut out = vec![0usize; 777];
        fill(&mut out, |i| 2 * i);
        assert_eq!(out[776], 1552);
        assert_eq!(position_first(100, |i| i > 41), Some(42));
        assert_eq!(position_first(10, |_| false), None);
        assert_eq!(map(&[1, 2, 3], |x| x + 1), vec![2, 3, 4]);
    }
}
