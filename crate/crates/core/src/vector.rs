//! Small dense-vector helpers shared by the operators and solvers.

/// Plain Euclidean dot product.
#[inline]
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Discrete inner product weighted by the volume element, `sum(u_i v_i) * dv`.
#[inline]
pub fn inner(u: &[f64], v: &[f64], dv: f64) -> f64 {
    dot(u, v) * dv
}

/// Norm induced by [`inner`].
#[inline]
pub fn norm(v: &[f64], dv: f64) -> f64 {
    inner(v, v, dv).sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Index of the entry with the largest magnitude (first one on ties).
pub fn argmax_abs(v: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in v.iter().enumerate() {
        let a = x.abs();
        if best.map_or(true, |(_, b)| a > b) {
            best = Some((i, a));
        }
    }
    best.map(|(i, _)| i)
}
