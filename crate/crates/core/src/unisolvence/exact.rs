//! Exact arithmetic on binary fractions `m 2^e`, enough for sums and
//! products of `f64` values.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Self {
            mant: BigInt::from(1),
            exp: 0,
        }
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64(x: f64) -> Self {
        assert!(
            x.is_finite(),
            "exact arithmetic needs finite input, got {x}"
        );
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let m = BigInt::from(m);
        Self {
            mant: if x < 0.0 { -m } else { m },
            exp: e,
        }
        .normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    fn normalized(mut self) -> Self {
        match self.mant.trailing_zeros() {
            Some(tz) if tz > 0 => {
                self.mant >>= tz;
                self.exp += tz as i64;
            }
            None => self.exp = 0,
            _ => {}
        }
        self
    }

    /// Correctly rounded (to nearest, ties to even) `f64`.
    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let negative = self.mant.sign() == Sign::Minus;
        let mag = self.mant.magnitude();
        let bits = mag.bits();
        let (top, shift) = if bits > 64 {
            let shift = bits - 64;
            let mut top = (mag >> shift).to_u64().expect("64 bits");
            if mag.trailing_zeros().unwrap_or(0) < shift {
                top |= 1;
            }
            (top, shift as i64)
        } else {
            (mag.to_u64().expect("at most 64 bits"), 0)
        };
        let v = scale_by_power_of_two(top as f64, self.exp + shift);
        if negative {
            -v
        } else {
            v
        }
    }
}

fn scale_by_power_of_two(mut v: f64, mut e: i64) -> f64 {
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let exp = self.exp.min(rhs.exp);
        let a = &self.mant << (self.exp - exp) as u64;
        let b = &rhs.mant << (rhs.exp - exp) as u64;
        Dyadic { mant: a + b, exp }.normalized()
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic {
            mant: &self.mant * &rhs.mant,
            exp: self.exp + rhs.exp,
        }
        .normalized()
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }
}
