use super::C64;

/// Central differences with step `h_rel * max(1, |x_i|)`; default `h_rel = 1e-6`.
pub fn fd_gradient(f: impl Fn(&[C64]) -> C64, x: &[C64]) -> Vec<C64> {
    fd_gradient_with(f, x, 1e-6)
}

/// Real steps give the complex derivative for holomorphic `f`.
pub fn fd_gradient_with(f: impl Fn(&[C64]) -> C64, x: &[C64], h_rel: f64) -> Vec<C64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = h_rel * x[i].norm().max(1.0);
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}
