//! Fourth-order quadrature over sampled time series.
//!
//! Each interval `[t_k, t_k+1]` is integrated exactly against the cubic that
//! interpolates the four nearest samples inside `[start, end]`.

use crate::scalar::{lit, Real};

fn stencil(k: usize, start: usize, end: usize) -> (usize, usize) {
    let hi = (k.saturating_sub(1).max(start) + 3).min(end);
    let lo = hi.saturating_sub(3).max(start);
    (lo, hi)
}

fn lagrange<T: Real>(ts: &[T], qs: &[T], x: T) -> T {
    let mut acc = T::zero();
    for j in 0..ts.len() {
        let mut w = T::one();
        for m in 0..ts.len() {
            if m != j {
                w = w * (x - ts[m]) / (ts[j] - ts[m]);
            }
        }
        acc = acc + w * qs[j];
    }
    acc
}

fn gauss3<T: Real>(ts: &[T], qs: &[T], a: T, b: T) -> T {
    let half = lit::<T>(0.5) * (b - a);
    let mid = lit::<T>(0.5) * (a + b);
    let r = lit::<T>(0.6).sqrt();
    let (w0, w1) = (lit::<T>(8.0 / 9.0), lit::<T>(5.0 / 9.0));
    half * (w0 * lagrange(ts, qs, mid)
        + w1 * (lagrange(ts, qs, mid - half * r) + lagrange(ts, qs, mid + half * r)))
}

/// Integral of `q` from `times[k]` to `t` (with `t` inside `[times[k], times[k+1]]`).
pub(crate) fn partial<T: Real>(times: &[T], q: &[T], start: usize, end: usize, k: usize, t: T) -> T {
    if end <= start || t == times[k] {
        return T::zero();
    }
    let (lo, hi) = stencil(k, start, end);
    gauss3(&times[lo..=hi], &q[lo..=hi], times[k], t)
}

/// Running integral of `q` from `times[start]`; entry `j` covers `[start, start + j]`.
pub(crate) fn cumulative<T: Real>(times: &[T], q: &[T], start: usize, end: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(end + 1 - start);
    let mut acc = T::zero();
    out.push(acc);
    for k in start..end {
        acc = acc + partial(times, q, start, end, k, times[k + 1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_integrated_exactly_on_uneven_grid() {
        let times = [0.0, 0.1, 0.25, 0.3, 0.47, 0.5];
        let f = |t: f64| 2.0 - t + 3.0 * t * t - 4.0 * t * t * t;
        let big_f = |t: f64| 2.0 * t - t * t / 2.0 + t.powi(3) - t.powi(4);
        let q: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let c = cumulative(&times, &q, 0, 5);
        for (j, &t) in times.iter().enumerate() {
            assert!((c[j] - big_f(t)).abs() < 1e-14, "{j}");
        }
        let p = partial(&times, &q, 0, 5, 2, 0.27);
        assert!((p - (big_f(0.27) - big_f(0.25))).abs() < 1e-14);
    }

    #[test]
    fn two_points_fall_back_to_trapezoid() {
        let c = cumulative(&[1.0, 2.0], &[1.0, 3.0], 0, 1);
        assert_eq!(c, vec![0.0, 2.0]);
    }

    #[test]
    fn fourth_order_convergence_on_sine() {
        let err = |n: usize| {
            let times: Vec<f64> = (0..=n).map(|k| k as f64 * 3.0 / n as f64).collect();
            let q: Vec<f64> = times.iter().map(|t| t.sin()).collect();
            let c = cumulative(&times, &q, 0, n);
            (c[n] - (1.0 - 3.0f64.cos())).abs()
        };
        let ratio = err(40) / err(80);
        assert!(ratio > 12.0, "ratio {ratio}");
    }
}
