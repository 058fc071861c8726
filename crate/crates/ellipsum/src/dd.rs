//! Double-double arithmetic: unevaluated sums `hi + lo` of two `f64`s,
//! giving roughly 31 significant decimal digits.
//!
//! Used wherever binary64 is not enough: irrational shift components,
//! phase reduction `m·α mod 1` for large `m`, and radii of shifted lattice
//! points near shell boundaries.

/// A double-double value, normalized so that `hi = fl(hi + lo)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Requires |a| >= |b| (or a == 0).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = f64::mul_add(a, b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// pi to double-double precision.
    pub const PI: Dd = Dd {
        hi: 3.141592653589793,
        lo: 1.2246467991473532e-16,
    };
    /// Euler's number e to double-double precision.
    pub const E: Dd = Dd {
        hi: 2.718281828459045,
        lo: 1.4456468917292502e-16,
    };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    /// Exact for |v| < 2^53; enumeration coordinates stay far below that.
    #[inline]
    pub fn from_i64(v: i64) -> Dd {
        debug_assert!(v.unsigned_abs() < (1u64 << 53));
        Dd {
            hi: v as f64,
            lo: 0.0,
        }
    }

    /// Exact for |v| < 2^106.
    pub fn from_i128(v: i128) -> Dd {
        let hi = v as f64;
        let rem = v - hi as i128;
        Dd::new(hi, rem as f64)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s1, e1) = two_sum(self.hi, o.hi);
        let (s2, e2) = two_sum(self.lo, o.lo);
        let lo = e1 + s2;
        let (s1, lo) = quick_two_sum(s1, lo);
        let lo = lo + e2;
        let (hi, lo) = quick_two_sum(s1, lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from_f64(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from_f64(q2)));
        let q3 = r.hi / o.hi;
        Dd::from_f64(q1)
            .add(Dd::from_f64(q2))
            .add(Dd::from_f64(q3))
    }

    /// Square root via one double-double Newton refinement of the binary64
    /// estimate; accurate to the full double-double precision.
    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        assert!(self.hi > 0.0, "sqrt of negative double-double");
        let y0 = self.hi.sqrt();
        let y = Dd::from_f64(y0);
        // y1 = y + (x - y^2) / (2 y)
        let y1 = y.add(self.sub(y.mul(y)).div(y.add(y)));
        // one more refinement to absorb the last ulp
        y1.add(self.sub(y1.mul(y1)).div(y1.add(y1)))
    }

    /// Nearest integer (ties away from zero on the hi part; inputs in this
    /// crate are never exactly half-integral).
    pub fn round(self) -> f64 {
        let r = self.hi.round();
        let d = self.sub(Dd::from_f64(r));
        if d.hi > 0.5 || (d.hi == 0.5 && d.lo > 0.0) {
            r + 1.0
        } else if d.hi < -0.5 || (d.hi == -0.5 && d.lo < 0.0) {
            r - 1.0
        } else {
            r
        }
    }

    /// Centered fractional part: `self - round(self)`, in [-1/2, 1/2].
    #[inline]
    pub fn fract_centered(self) -> Dd {
        self.sub(Dd::from_f64(self.round()))
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    /// Total-order comparison against an `f64`.
    pub fn le_f64(self, b: f64) -> bool {
        if self.hi != b {
            self.hi < b
        } else {
            self.lo <= 0.0
        }
    }

    /// self <= other, exact.
    pub fn le(self, other: Dd) -> bool {
        let d = self.sub(other);
        d.hi < 0.0 || (d.hi == 0.0 && d.lo <= 0.0)
    }
}

/// sqrt(k) for a non-negative integer k, to double-double precision.
pub fn sqrt_int(k: u64) -> Dd {
    Dd::from_i64(k as i64).sqrt()
}

/// Parse a plain decimal literal (optional sign, digits, optional fraction)
/// into a double-double exactly (up to ~30 fractional digits).
pub fn parse_decimal(s: &str) -> Option<Dd> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    if int_part.len() + frac_part.len() > 36 {
        return None;
    }
    let digits: i128 = format!("{int_part}{frac_part}").parse().ok()?;
    let mut v = Dd::from_i128(digits);
    for _ in 0..frac_part.len() {
        v = v.div(Dd::from_f64(10.0));
    }
    if neg {
        v = v.neg();
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_back() {
        let r = sqrt_int(2);
        let back = r.mul(r).sub(Dd::from_f64(2.0));
        assert!(back.to_f64().abs() < 1e-30, "residual {}", back.to_f64());
    }

    #[test]
    fn sqrt_hi_matches_f64() {
        for k in [2u64, 3, 5, 7, 11, 1_000_003] {
            assert_eq!(sqrt_int(k).hi, (k as f64).sqrt());
        }
    }

    #[test]
    fn pi_constant_consistent() {
        // sin(pi.lo) ≈ -sin(pi.hi) to first order: check hi is the f64 pi
        assert_eq!(Dd::PI.hi, std::f64::consts::PI);
        assert!((Dd::PI.lo - 1.2246467991473532e-16).abs() < 1e-31);
    }

    #[test]
    fn decimal_parse_exact_binary_fractions() {
        let v = parse_decimal("0.5").unwrap();
        assert_eq!(v.hi, 0.5);
        assert_eq!(v.lo, 0.0);
        let w = parse_decimal("-0.25").unwrap();
        assert_eq!(w.hi, -0.25);
    }

    #[test]
    fn decimal_parse_long() {
        // 1/3 to 30 digits; residual of 3*v - 1 must be ~1e-30
        let v = parse_decimal("0.333333333333333333333333333333").unwrap();
        let r = v.mul(Dd::from_f64(3.0)).sub(Dd::ONE);
        assert!(r.to_f64().abs() < 1e-29);
    }

    #[test]
    fn fract_centered_range() {
        let x = Dd::from_f64(12345.0).add(parse_decimal("0.75").unwrap());
        let f = x.fract_centered();
        assert!((f.to_f64() - (-0.25)).abs() < 1e-30);
    }

    #[test]
    fn mul_add_associate_small() {
        let a = sqrt_int(2);
        let b = sqrt_int(3);
        let p = a.mul(b);
        let q = p.mul(p).sub(Dd::from_f64(6.0));
        assert!(q.to_f64().abs() < 1e-29);
    }
}
