//! Arithmetic in GF(2^4) with primitive polynomial x^4 + x + 1.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

/// Primitive polynomial x^4 + x + 1.
pub const PRIMITIVE_POLY: u8 = 0b1_0011;

/// An element of GF(16), stored as a polynomial in alpha with bit i holding
/// the coefficient of x^i.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Gf16(u8);

const fn build_tables() -> ([u8; 30], [u8; 16]) {
    let mut exp = [0u8; 30];
    let mut log = [0u8; 16];
    let mut x = 1u8;
    let mut i = 0;
    while i < 15 {
        exp[i] = x;
        exp[i + 15] = x;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x10 != 0 {
            x ^= PRIMITIVE_POLY;
        }
        i += 1;
    }
    (exp, log)
}

static TABLES: ([u8; 30], [u8; 16]) = build_tables();

impl Gf16 {
    pub const ZERO: Gf16 = Gf16(0);
    pub const ONE: Gf16 = Gf16(1);

    /// Wraps the low four bits of `v`.
    pub const fn new(v: u8) -> Self {
        Gf16(v & 0x0f)
    }

    pub const fn value(self) -> u8 {
        self.0
    }

    /// alpha^e for any integer exponent.
    pub fn alpha_pow(e: i32) -> Self {
        Gf16(TABLES.0[e.rem_euclid(15) as usize])
    }

    /// Discrete log base alpha. `None` for zero.
    pub fn log(self) -> Option<u8> {
        (self.0 != 0).then(|| TABLES.1[self.0 as usize])
    }

    pub fn inv(self) -> Option<Self> {
        self.log().map(|l| Gf16(TABLES.0[(15 - l as usize) % 15]))
    }

    pub fn pow(self, e: u32) -> Self {
        match self.log() {
            None if e == 0 => Gf16::ONE,
            None => Gf16::ZERO,
            Some(l) => Gf16(TABLES.0[(l as usize * e as usize) % 15]),
        }
    }
}

impl fmt::Debug for Gf16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

// field arithmetic, not integer arithmetic
#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for Gf16 {
    type Output = Gf16;
    fn add(self, rhs: Gf16) -> Gf16 {
        Gf16(self.0 ^ rhs.0)
    }
}

// field arithmetic, not integer arithmetic
#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Gf16 {
    type Output = Gf16;
    fn sub(self, rhs: Gf16) -> Gf16 {
        Gf16(self.0 ^ rhs.0)
    }
}

impl Mul for Gf16 {
    type Output = Gf16;
    fn mul(self, rhs: Gf16) -> Gf16 {
        gf16_mul(self, rhs)
    }
}

// field arithmetic, not integer arithmetic
#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Gf16 {
    type Output = Gf16;
    /// Panics on division by zero.
    fn div(self, rhs: Gf16) -> Gf16 {
        self * rhs.inv().expect("division by zero in GF(16)")
    }
}

pub fn gf16_mul(a: Gf16, b: Gf16) -> Gf16 {
    match (a.log(), b.log()) {
        (Some(la), Some(lb)) => Gf16(TABLES.0[(la + lb) as usize]),
        _ => Gf16::ZERO,
    }
}
