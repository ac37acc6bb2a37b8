//! Floating-point helpers shared by the simulators.

/// Error-free transformation: `a + b = s + err` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Unevaluated sum `hi + lo` carrying roughly 106 significant bits.
///
/// Used for the running sums of the drift decomposition so that
/// `X_n - X_0 - A_n - Xi_n` can be checked far below f64 resolution of the
/// individual terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = two_sum(s, e + self.lo);
        Self { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl std::ops::Add for DoubleDouble {
    type Output = Self;

    #[inline]
    fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let (hi, lo) = two_sum(s, e + self.lo + other.lo);
        Self { hi, lo }
    }
}

impl std::ops::Neg for DoubleDouble {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Sub for DoubleDouble {
    type Output = Self;

    #[inline]
    fn sub(self, other: Self) -> Self {
        self + -other
    }
}

/// `base.powf(exp)` with exact shortcuts for the exponents that dominate runs.
#[inline]
pub fn pow(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        1.0
    } else if exp == 1.0 {
        base
    } else if exp == 2.0 {
        base * base
    } else if exp == 0.5 {
        base.sqrt()
    } else if exp == -0.5 {
        1.0 / base.sqrt()
    } else {
        base.powf(exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sum_is_exact() {
        let (s, e) = two_sum(1e16, 1.0);
        assert_eq!(s, 1e16);
        assert_eq!(e, 1.0);
    }

    #[test]
    fn double_double_keeps_small_terms() {
        let mut acc = DoubleDouble::from_f64(1e16);
        for _ in 0..1000 {
            acc = acc.add_f64(0.1);
        }
        let diff = acc - DoubleDouble::from_f64(1e16);
        assert!((diff.to_f64() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn pow_shortcuts_match_powf() {
        for &b in &[0.0, 0.3, 1.0, 7.5] {
            for &e in &[0.0, 0.5, 1.0, 2.0, 1.3] {
                assert!((pow(b, e) - b.powf(e)).abs() <= 1e-15 * b.powf(e).max(1.0));
            }
        }
        assert!((pow(4.0, -0.5) - 0.5).abs() < 1e-16);
    }
}
