//! Scalar field abstraction.
//!
//! Every algorithm in the crate is generic over [`Scalar`]. Two
//! implementations are provided: [`Rat`], an arbitrary-precision rational
//! with exact comparisons, and [`Flt`], an `f64` whose comparisons use the
//! per-thread tolerance set with [`set_eps`].

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{GptError, Result};

/// Default comparison tolerance for floating mode.
pub const DEFAULT_EPS: f64 = 1e-9;

thread_local! {
    static EPS: Cell<f64> = const { Cell::new(DEFAULT_EPS) };
}

/// Current floating-mode tolerance of this thread.
pub fn eps() -> f64 {
    EPS.with(Cell::get)
}

/// Sets the floating-mode tolerance for this thread. Must be strictly
/// positive and finite.
pub fn set_eps(value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(GptError::InvalidInput(format!(
            "tolerance must be positive, got {value}"
        )));
    }
    EPS.with(|e| e.set(value));
    Ok(())
}

/// Runs `f` with a temporarily different tolerance, restoring the old one.
pub fn with_eps<T>(value: f64, f: impl FnOnce() -> T) -> Result<T> {
    let old = eps();
    set_eps(value)?;
    let out = f();
    EPS.with(|e| e.set(old));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Exact,
    Float,
}

impl ScalarMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalarMode::Exact => "exact",
            ScalarMode::Float => "float",
        }
    }
}

impl FromStr for ScalarMode {
    type Err = GptError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ScalarMode::Exact),
            "float" => Ok(ScalarMode::Float),
            other => Err(GptError::InvalidInput(format!("unknown scalar mode `{other}`"))),
        }
    }
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered field element as used by the cone and LP kernels.
///
/// Sign tests (`is_zero`, `is_pos`, `is_neg`) are exact for [`Rat`] and
/// tolerance-based for [`Flt`]; all algorithms branch only through them.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Sum
{
    const MODE: ScalarMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
    /// Converts a float. Exact mode refuses, since the value is almost
    /// never the rational the caller meant.
    fn from_f64(v: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;

    fn is_zero(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool {
        (-self.clone()).is_pos()
    }
    fn is_nonneg(&self) -> bool {
        !self.is_neg()
    }
    fn abs(&self) -> Self {
        if self.is_neg() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    /// Tolerance-aware comparison.
    fn cmp_tol(&self, other: &Self) -> Ordering {
        let d = self.clone() - other.clone();
        if d.is_pos() {
            Ordering::Greater
        } else if d.is_neg() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn max_tol(self, other: Self) -> Self {
        if other.cmp_tol(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }
    fn min_tol(self, other: Self) -> Self {
        if other.cmp_tol(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }
    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }

    /// Rescales a nonzero direction to its canonical positive multiple:
    /// coprime integers in exact mode, unit max-norm in floating mode.
    fn canonicalize_ray(v: &mut [Self]);

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

// ---------------------------------------------------------------------------
// Exact rationals

/// Arbitrary-precision rational scalar.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rat(pub BigRational);

impl Rat {
    pub fn new(num: i64, den: i64) -> Self {
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || GptError::Parse(format!("malformed rational `{s}`"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rat(BigRational::new(n, d)))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Rat(BigRational::from_integer(n)))
            }
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! forward_binop {
    ($ty:ident, $tr:ident, $m:ident, $op:tt) => {
        impl $tr for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty {
                $ty(self.0 $op rhs.0)
            }
        }
    };
}

forward_binop!(Rat, Add, add, +);
forward_binop!(Rat, Sub, sub, -);
forward_binop!(Rat, Mul, mul, *);
forward_binop!(Rat, Div, div, /);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        self.0 -= rhs.0;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl Scalar for Rat {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn zero() -> Self {
        Rat(BigRational::zero())
    }
    fn one() -> Self {
        Rat(BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(v)))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rat::new(num, den)
    }
    fn from_f64(_v: f64) -> Option<Self> {
        None
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn is_pos(&self) -> bool {
        self.0.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.0.is_negative()
    }
    fn abs(&self) -> Self {
        Rat(self.0.abs())
    }
    fn cmp_tol(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }

    fn canonicalize_ray(v: &mut [Self]) {
        let mut lcm = BigInt::one();
        for x in v.iter() {
            lcm = lcm.lcm(x.0.denom());
        }
        let mut gcd = BigInt::zero();
        let ints: Vec<BigInt> = v.iter().map(|x| x.0.numer() * (&lcm / x.0.denom())).collect();
        for n in &ints {
            gcd = gcd.gcd(n);
        }
        if gcd.is_zero() {
            return;
        }
        for (x, n) in v.iter_mut().zip(ints) {
            *x = Rat(BigRational::from_integer(n / &gcd));
        }
    }

    fn to_json(&self) -> Value {
        if self.0.is_integer() {
            Value::String(self.0.numer().to_string())
        } else {
            Value::String(format!("{}/{}", self.0.numer(), self.0.denom()))
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Rat::parse(s),
            Value::Number(n) if n.is_i64() => Ok(Rat::from_i64(n.as_i64().unwrap_or_default())),
            other => Err(GptError::Parse(format!(
                "exact scalar must be a \"p/q\" string, got {other}"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Floats with tolerance

/// `f64` scalar with tolerance-based sign tests.
///
/// Equality is `|a - b| <= eps()`, so it is not transitive; the kernels
/// never rely on transitivity.
#[derive(Clone, Copy, Default)]
pub struct Flt(pub f64);

impl fmt::Debug for Flt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Flt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl PartialEq for Flt {
    fn eq(&self, other: &Flt) -> bool {
        (self.0 - other.0).abs() <= eps()
    }
}

forward_binop!(Flt, Add, add, +);
forward_binop!(Flt, Sub, sub, -);
forward_binop!(Flt, Mul, mul, *);
forward_binop!(Flt, Div, div, /);

impl Neg for Flt {
    type Output = Flt;
    fn neg(self) -> Flt {
        Flt(-self.0)
    }
}

impl AddAssign for Flt {
    fn add_assign(&mut self, rhs: Flt) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Flt {
    fn sub_assign(&mut self, rhs: Flt) {
        self.0 -= rhs.0;
    }
}

impl Sum for Flt {
    fn sum<I: Iterator<Item = Flt>>(iter: I) -> Flt {
        Flt(iter.map(|x| x.0).sum())
    }
}

impl Scalar for Flt {
    const MODE: ScalarMode = ScalarMode::Float;

    fn zero() -> Self {
        Flt(0.0)
    }
    fn one() -> Self {
        Flt(1.0)
    }
    fn from_i64(v: i64) -> Self {
        Flt(v as f64)
    }
    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(Flt(v))
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn is_zero(&self) -> bool {
        self.0.abs() <= eps()
    }
    fn is_pos(&self) -> bool {
        self.0 > eps()
    }
    fn is_neg(&self) -> bool {
        self.0 < -eps()
    }
    fn abs(&self) -> Self {
        Flt(self.0.abs())
    }

    fn canonicalize_ray(v: &mut [Self]) {
        let m = v.iter().fold(0.0f64, |m, x| m.max(x.0.abs()));
        if m > 0.0 {
            for x in v.iter_mut() {
                x.0 /= m;
                // flush tolerance-level noise to an exact zero
                if x.0.abs() <= eps() {
                    x.0 = 0.0;
                }
            }
        }
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(self.0)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .map(Flt)
                .ok_or_else(|| GptError::Parse(format!("bad float {n}"))),
            other => Err(GptError::Parse(format!("float scalar must be a number, got {other}"))),
        }
    }
}

/// Shorthand used throughout the tests and constructors.
pub fn s<S: Scalar>(v: i64) -> S {
    S::from_i64(v)
}

/// `num/den` as a scalar.
pub fn frac<S: Scalar>(num: i64, den: i64) -> S {
    S::from_ratio(num, den)
}
