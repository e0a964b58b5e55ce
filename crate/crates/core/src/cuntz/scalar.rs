//! Coefficients that stay exact rational complex numbers until a floating
//! value enters, after which they are `f64` complex numbers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::C64;

/// Absolute size below which a floating coefficient counts as zero.
pub const FLOAT_ZERO: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    pub re: BigRational,
    pub im: BigRational,
}

impl Rational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn integer(v: i64) -> Self {
        Self::new(BigRational::from_integer(v.into()), BigRational::zero())
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(C64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rational::integer(0))
    }

    pub fn one() -> Self {
        Scalar::Exact(Rational::integer(1))
    }

    pub fn integer(v: i64) -> Self {
        Scalar::Exact(Rational::integer(v))
    }

    pub fn imaginary_unit() -> Self {
        Scalar::Exact(Rational::new(BigRational::zero(), BigRational::one()))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(Rational::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        ))
    }

    /// Integer-valued parts stay exact; anything else becomes floating.
    pub fn from_c64(z: C64) -> Self {
        let int = |v: f64| v.fract() == 0.0 && v.abs() < 9.0e15;
        if int(z.re) && int(z.im) {
            Scalar::Exact(Rational::new(
                BigRational::from_integer(BigInt::from(z.re as i64)),
                BigRational::from_integer(BigInt::from(z.im as i64)),
            ))
        } else {
            Scalar::Float(z)
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn to_c64(&self) -> C64 {
        match self {
            Scalar::Exact(q) => q.to_c64(),
            Scalar::Float(z) => *z,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.re.is_zero() && q.im.is_zero(),
            Scalar::Float(z) => z.norm() <= FLOAT_ZERO,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.re.is_one() && q.im.is_zero(),
            Scalar::Float(z) => *z == C64::new(1.0, 0.0),
        }
    }

    /// Exact equality between exact values, relative `1e-12` otherwise.
    pub fn approx_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_c64(), other.to_c64());
                (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(1.0)
            }
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(Rational::new(q.re.clone(), -q.im.clone())),
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(Rational::new(&a.re + &b.re, &a.im + &b.im)),
            _ => Scalar::Float(self.to_c64() + rhs.to_c64()),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(Rational::new(
                &a.re * &b.re - &a.im * &b.im,
                &a.re * &b.im + &a.im * &b.re,
            )),
            _ => Scalar::Float(self.to_c64() * rhs.to_c64()),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(Rational::new(-q.re.clone(), -q.im.clone())),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl Scalar {
    /// Rendering as a coefficient in front of a word: `None` when it is `1`,
    /// `Some("-")` for `-1`. Complex values are parenthesized.
    pub(crate) fn coefficient_text(&self) -> (bool, Option<String>) {
        match self {
            Scalar::Exact(q) => {
                if q.im.is_zero() {
                    let neg = q.re.is_negative();
                    let abs = q.re.abs();
                    (neg, (!abs.is_one()).then(|| fmt_rational(&abs)))
                } else if q.re.is_zero() {
                    let neg = q.im.is_negative();
                    let abs = q.im.abs();
                    (neg, Some(if abs.is_one() { "i".into() } else { format!("{} i", fmt_rational(&abs)) }))
                } else {
                    (false, Some(format!("({self})")))
                }
            }
            Scalar::Float(z) => {
                if z.im == 0.0 {
                    let abs = z.re.abs();
                    (z.re < 0.0, (abs != 1.0).then(|| format!("{abs}")))
                } else if z.re == 0.0 {
                    (z.im < 0.0, Some(format!("{} i", z.im.abs())))
                } else {
                    (false, Some(format!("({self})")))
                }
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im, re_zero, im_zero, im_neg) = match self {
            Scalar::Exact(q) => (
                fmt_rational(&q.re),
                fmt_rational(&q.im.abs()),
                q.re.is_zero(),
                q.im.is_zero(),
                q.im.is_negative(),
            ),
            Scalar::Float(z) => (
                format!("{}", z.re),
                format!("{}", z.im.abs()),
                z.re == 0.0,
                z.im == 0.0,
                z.im < 0.0,
            ),
        };
        match (re_zero, im_zero) {
            (_, true) => write!(f, "{re}"),
            (true, false) => write!(f, "{}{im} i", if im_neg { "-" } else { "" }),
            (false, false) => write!(f, "{re} {} {im} i", if im_neg { "-" } else { "+" }),
        }
    }
}

/// JSON form: exact parts as `"p/q"` strings, floating parts as numbers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarJson {
    Exact { re: String, im: String },
    Float { re: f64, im: f64 },
}

impl From<&Scalar> for ScalarJson {
    fn from(s: &Scalar) -> Self {
        match s {
            Scalar::Exact(q) => ScalarJson::Exact {
                re: fmt_rational(&q.re),
                im: fmt_rational(&q.im),
            },
            Scalar::Float(z) => ScalarJson::Float { re: z.re, im: z.im },
        }
    }
}

impl TryFrom<&ScalarJson> for Scalar {
    type Error = String;
    fn try_from(j: &ScalarJson) -> Result<Self, String> {
        match j {
            ScalarJson::Exact { re, im } => {
                let parse = |s: &str| s.trim().parse::<BigRational>().map_err(|e| format!("bad rational `{s}`: {e}"));
                Ok(Scalar::Exact(Rational::new(parse(re)?, parse(im)?)))
            }
            ScalarJson::Float { re, im } => Ok(Scalar::Float(C64::new(*re, *im))),
        }
    }
}
