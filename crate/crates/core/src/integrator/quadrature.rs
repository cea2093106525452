//! Quadrature on uniformly sampled data.

use crate::scalar::Scalar;

/// Running integral of `f` sampled with spacing `dt`, starting at zero.
///
/// Each interval uses the cubic through the four nearest samples
/// (one-sided near the ends), so the rule is exact for cubics and
/// fourth-order accurate overall. Two samples fall back to the trapezoid.
pub fn cumulative_integral<T: Scalar>(f: &[T], dt: T) -> Vec<T> {
    let n = f.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(T::zero());
    if n == 1 {
        return out;
    }
    let l = T::lit;
    let interval = |i: usize| -> T {
        match n {
            2 => dt * (f[0] + f[1]) / l(2.0),
            3 => {
                if i == 0 {
                    dt * (l(5.0) * f[0] + l(8.0) * f[1] - f[2]) / l(12.0)
                } else {
                    dt * (-f[0] + l(8.0) * f[1] + l(5.0) * f[2]) / l(12.0)
                }
            }
            _ => {
                if i == 0 {
                    dt * (l(9.0) * f[0] + l(19.0) * f[1] - l(5.0) * f[2] + f[3]) / l(24.0)
                } else if i == n - 2 {
                    dt * (l(9.0) * f[n - 1] + l(19.0) * f[n - 2] - l(5.0) * f[n - 3] + f[n - 4]) / l(24.0)
                } else {
                    dt * (-f[i - 1] + l(13.0) * (f[i] + f[i + 1]) - f[i + 2]) / l(24.0)
                }
            }
        }
    };
    let mut acc = T::zero();
    for i in 0..n - 1 {
        acc += interval(i);
        out.push(acc);
    }
    out
}

/// Composite trapezoid rule.
pub fn trapezoid<T: Scalar>(f: &[T], dt: T) -> T {
    if f.len() < 2 {
        return T::zero();
    }
    let inner: T = f[1..f.len() - 1].iter().copied().sum();
    dt * (inner + (f[0] + f[f.len() - 1]) / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        let dt = 0.1;
        for n in [3usize, 4, 5, 9, 40] {
            let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
            let f: Vec<f64> = t.iter().map(|&x| 1.0 - 2.0 * x + 3.0 * x * x - 0.5 * x * x * x).collect();
            let got = cumulative_integral(&f, dt);
            for (k, &x) in t.iter().enumerate() {
                let exact = x - x * x + x * x * x - 0.125 * x.powi(4);
                let tol = if n == 3 { 1e-3 } else { 1e-13 };
                assert!((got[k] - exact).abs() < tol, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn two_samples_trapezoid() {
        assert_eq!(cumulative_integral(&[1.0, 3.0], 0.5), vec![0.0, 1.0]);
        assert_eq!(trapezoid(&[1.0, 3.0], 0.5), 1.0);
        assert_eq!(cumulative_integral::<f64>(&[], 1.0), Vec::<f64>::new());
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let dt = 3.0 / (n - 1) as f64;
            let f: Vec<f64> = (0..n).map(|i| (i as f64 * dt).exp()).collect();
            (cumulative_integral(&f, dt)[n - 1] - (3.0f64.exp() - 1.0)).abs()
        };
        let ratio = err(101) / err(201);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }
}
