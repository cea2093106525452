//! Truncated Taylor series used to differentiate trajectories exactly.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Ring, Scalar};

/// `c[k]` is the k-th Taylor coefficient, i.e. `f^(k)(t) / k!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T, const N: usize> {
    pub c: [T; N],
}

impl<T: Scalar, const N: usize> Jet<T, N> {
    pub fn constant(v: T) -> Self {
        let mut c = [T::zero(); N];
        c[0] = v;
        Self { c }
    }

    /// The k-th derivative, `k! * c[k]`.
    pub fn derivative(&self, k: usize) -> T {
        let mut fact = T::one();
        for j in 2..=k {
            fact *= T::of_usize(j);
        }
        self.c[k] * fact
    }
}

impl<T: Scalar, const N: usize> Add for Jet<T, N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl<T: Scalar, const N: usize> Sub for Jet<T, N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl<T: Scalar, const N: usize> Neg for Jet<T, N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for v in self.c.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl<T: Scalar, const N: usize> Mul for Jet<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut c = [T::zero(); N];
        for (k, slot) in c.iter_mut().enumerate() {
            for j in 0..=k {
                *slot += self.c[j] * rhs.c[k - j];
            }
        }
        Self { c }
    }
}

impl<T: Scalar, const N: usize> Ring<T> for Jet<T, N> {
    fn constant(c: T) -> Self {
        Jet::constant(c)
    }

    fn scale(mut self, s: T) -> Self {
        for v in self.c.iter_mut() {
            *v *= s;
        }
        self
    }
}

/// Taylor expansion of the solution of the autonomous system `u' = f(u)`
/// through `u0`, truncated after `N` coefficients.
pub fn taylor_expand<T: Scalar, const D: usize, const N: usize>(
    u0: [T; D],
    f: impl Fn([Jet<T, N>; D]) -> [Jet<T, N>; D],
) -> [Jet<T, N>; D] {
    let mut u = u0.map(Jet::constant);
    for k in 0..N - 1 {
        // coefficient k of f(u) only involves coefficients 0..=k of u
        let du = f(u);
        for i in 0..D {
            u[i].c[k + 1] = du[i].c[k] / T::of_usize(k + 1);
        }
    }
    u
}
