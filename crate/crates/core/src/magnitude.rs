//! Certified magnitudes for quantities too large to hold as integers.
//!
//! A [`LogMagnitude`] at tower `t` stores an interval containing `ℓ_t(v)`,
//! where `ℓ_0(v) = v` and `ℓ_{t+1}(v) = log2(max(ℓ_t(v), 1))`. The clamp keeps
//! every `ℓ_t` defined and nondecreasing for `v ≥ 1`, so a strict separation of
//! intervals at any tower is a strict order of the underlying values. Bounds
//! are widened after every floating-point step.
//!
//! [`Quantity`] keeps a value exact as long as it fits in
//! [`EXACT_BITS`] bits and falls back to a magnitude afterwards. All
//! quantities are `≥ 1`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact integers are kept up to this many bits.
pub const EXACT_BITS: u64 = 1 << 16;

/// Intervals are lifted one tower once their upper end passes this.
const LIFT_AT: f64 = 1e300;

const REL: f64 = 4.0 * f64::EPSILON;

fn down(x: f64) -> f64 {
    if x == f64::INFINITY {
        return f64::MAX;
    }
    (x - x.abs() * REL).next_down()
}

fn up(x: f64) -> f64 {
    (x + x.abs() * REL).next_up()
}

/// `ℓ_tower(v) ∈ [lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMagnitude {
    pub tower: u32,
    pub lo: f64,
    pub hi: f64,
}

impl LogMagnitude {
    pub fn new(tower: u32, lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty magnitude interval [{lo}, {hi}]");
        let mut m = LogMagnitude { tower, lo, hi };
        m.normalize();
        m
    }

    /// The plain interval `[lo, hi]` (tower 0); used for real factors ≥ 1.
    pub fn real(lo: f64, hi: f64) -> Self {
        LogMagnitude::new(0, lo.max(1.0), hi.max(1.0))
    }

    pub fn from_biguint(v: &BigUint) -> Self {
        let bits = v.bits();
        if bits <= 53 {
            let f = v.to_f64().expect("small");
            return LogMagnitude::new(0, f.max(1.0), f.max(1.0));
        }
        let shift = bits - 64.min(bits);
        let top = (v >> shift).to_u64().expect("64 bits");
        let lo = (top as f64).log2() + shift as f64;
        let hi = ((top as f64) + 1.0).log2() + shift as f64;
        LogMagnitude::new(1, down(lo), up(hi))
    }

    fn normalize(&mut self) {
        while self.hi > LIFT_AT {
            *self = self.lifted();
        }
    }

    fn lifted(self) -> Self {
        LogMagnitude { tower: self.tower + 1, lo: down(self.lo.max(1.0).log2()), hi: up(self.hi.max(1.0).log2()) }
    }

    /// Lifts to tower `t ≥ self.tower`.
    pub fn lift_to(self, t: u32) -> Self {
        let mut m = self;
        while m.tower < t {
            m = m.lifted();
        }
        m
    }

    /// One tower down, possibly with infinite bounds.
    fn lowered(self) -> Self {
        debug_assert!(self.tower >= 1);
        let lo = if self.lo > 0.0 { down(self.lo.exp2()) } else { 0.0 };
        let hi = up(self.hi.max(0.0).exp2());
        LogMagnitude { tower: self.tower - 1, lo, hi }
    }

    fn lower_to(self, t: u32) -> Self {
        let mut m = self;
        while m.tower > t {
            m = m.lowered();
        }
        m
    }

    /// Strict order when the intervals separate at the higher tower or, with
    /// the higher one lowered, at the lower tower.
    pub fn try_cmp(&self, other: &LogMagnitude) -> Option<Ordering> {
        let sep = |a: &LogMagnitude, b: &LogMagnitude| {
            if a.hi < b.lo {
                Some(Ordering::Less)
            } else if a.lo > b.hi {
                Some(Ordering::Greater)
            } else {
                None
            }
        };
        let t = self.tower.max(other.tower);
        if let Some(o) = sep(&self.lift_to(t), &other.lift_to(t)) {
            return Some(o);
        }
        let t = self.tower.min(other.tower);
        sep(&self.lower_to(t), &other.lower_to(t))
    }

    pub fn mul(&self, other: &LogMagnitude) -> LogMagnitude {
        let t = self.tower.max(other.tower);
        let (a, b) = (self.lift_to(t), other.lift_to(t));
        let (lo, hi) = match t {
            0 => (down(a.lo * b.lo), up(a.hi * b.hi)),
            1 => (down(a.lo + b.lo), up(a.hi + b.hi)),
            2 => {
                let log_sum = |x: f64, y: f64| {
                    let (m, n) = if x >= y { (x, y) } else { (y, x) };
                    m + (n - m).exp2().ln_1p() / std::f64::consts::LN_2
                };
                let lo = if a.lo > 0.0 && b.lo > 0.0 { down(log_sum(a.lo, b.lo)) } else { a.lo.max(b.lo) };
                (lo, up(log_sum(a.hi.max(0.0), b.hi.max(0.0))))
            }
            _ => {
                let lo = a.lo.max(b.lo);
                let delta = if lo > 0.0 { (std::f64::consts::LOG2_E * (-lo).exp2()).min(1.0) } else { 1.0 };
                (lo, up(a.hi.max(b.hi) + delta))
            }
        };
        LogMagnitude::new(t, lo, hi)
    }

    /// `2^v`: the same interval one tower up.
    pub fn pow2(&self) -> LogMagnitude {
        LogMagnitude::new(self.tower + 1, self.lo, self.hi)
    }

    /// `log2 v` for `v ≥ 2`.
    pub fn log2(&self) -> LogMagnitude {
        if self.tower == 0 {
            LogMagnitude::real(down(self.lo.log2()), up(self.hi.log2()))
        } else {
            LogMagnitude { tower: self.tower - 1, ..*self }
        }
    }

    /// Bounds on `log2 v` when they fit in an `f64`.
    pub fn log2_bounds(&self) -> Option<(f64, f64)> {
        match self.tower {
            0 => Some((down(self.lo.log2()), up(self.hi.log2()))),
            1 => Some((self.lo, self.hi)),
            _ => {
                let m = self.lower_to(1);
                m.hi.is_finite().then_some((m.lo, m.hi))
            }
        }
    }

    /// Smallest interval containing `ℓ(self)` lower end and `ℓ(other)` upper
    /// end: the value is known to lie between the two.
    pub fn between(lower: &LogMagnitude, upper: &LogMagnitude) -> LogMagnitude {
        let t = lower.tower.max(upper.tower);
        let (a, b) = (lower.lift_to(t), upper.lift_to(t));
        LogMagnitude::new(t, a.lo.min(b.hi), b.hi)
    }
}

impl fmt::Display for LogMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let short = |x: f64| if x.abs() >= 1e12 { format!("{x:.6e}") } else { format!("{x}") };
        write!(f, "{}[{}, {}]", "2^".repeat(self.tower as usize), short(self.lo), short(self.hi))
    }
}

impl Serialize for LogMagnitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LogMagnitude", 3)?;
        st.serialize_field("tower", &self.tower)?;
        st.serialize_field("lo", &self.lo.to_string())?;
        st.serialize_field("hi", &self.hi.to_string())?;
        st.end()
    }
}

/// A positive quantity `≥ 1`, exact while it fits.
#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    Exact(BigUint),
    Mag(LogMagnitude),
}

impl Quantity {
    pub fn exact(v: BigUint) -> Self {
        assert!(!v.is_zero(), "quantities are at least 1");
        if v.bits() > EXACT_BITS {
            Quantity::Mag(LogMagnitude::from_biguint(&v))
        } else {
            Quantity::Exact(v)
        }
    }

    pub fn from_u64(v: u64) -> Self {
        Quantity::exact(BigUint::from(v))
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            Quantity::Exact(v) => Some(v),
            Quantity::Mag(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Quantity::Exact(_))
    }

    pub fn magnitude(&self) -> LogMagnitude {
        match self {
            Quantity::Exact(v) => LogMagnitude::from_biguint(v),
            Quantity::Mag(m) => *m,
        }
    }

    pub fn mul(&self, other: &Quantity) -> Quantity {
        match (self, other) {
            (Quantity::Exact(a), Quantity::Exact(b)) if a.bits() + b.bits() <= EXACT_BITS + 1 => Quantity::exact(a * b),
            _ => Quantity::Mag(self.magnitude().mul(&other.magnitude())),
        }
    }

    pub fn add(&self, other: &Quantity) -> Quantity {
        match (self, other) {
            (Quantity::Exact(a), Quantity::Exact(b)) => Quantity::exact(a + b),
            _ => {
                // max ≤ a + b ≤ 2·max
                let (a, b) = (self.magnitude(), other.magnitude());
                let t = a.tower.max(b.tower);
                let (a, b) = (a.lift_to(t), b.lift_to(t));
                let top = LogMagnitude { tower: t, lo: a.hi.max(b.hi), hi: a.hi.max(b.hi) };
                let doubled = top.mul(&LogMagnitude::real(2.0, 2.0));
                let lower = LogMagnitude { tower: t, lo: a.lo.max(b.lo), hi: a.lo.max(b.lo) };
                Quantity::Mag(LogMagnitude::between(&lower, &doubled))
            }
        }
    }

    /// `2^self`.
    pub fn pow2(&self) -> Quantity {
        match self {
            Quantity::Exact(e) if e.bits() <= 32 && e.to_u64().unwrap_or(u64::MAX) < EXACT_BITS => {
                Quantity::exact(BigUint::one() << e.to_u64().expect("small"))
            }
            _ => Quantity::Mag(self.magnitude().pow2()),
        }
    }

    /// `self^exp`.
    pub fn pow(&self, exp: &Quantity) -> Quantity {
        if let (Quantity::Exact(b), Quantity::Exact(e)) = (self, exp) {
            if let Some(e) = e.to_u64() {
                if b.bits().saturating_mul(e) <= EXACT_BITS {
                    return Quantity::exact(b.pow(e as u32));
                }
            }
        }
        if self.as_exact().is_some_and(|b| b.is_one()) {
            return Quantity::from_u64(1);
        }
        // self^e = 2^(e·log2 self)
        let log = self.magnitude().log2();
        Quantity::Mag(exp.magnitude().mul(&log).pow2())
    }

    /// Exact comparison when both sides are exact, otherwise a certified
    /// interval separation; overlap is an error rather than a guess.
    pub fn try_cmp(&self, other: &Quantity) -> Result<Ordering> {
        if let (Quantity::Exact(a), Quantity::Exact(b)) = (self, other) {
            return Ok(a.cmp(b));
        }
        self.magnitude()
            .try_cmp(&other.magnitude())
            .ok_or_else(|| Error::Indeterminate(format!("cannot separate {self} from {other} at available precision")))
    }

    /// `C(3k, k)`, exact for moderate `k`.
    pub fn central_third_binomial(k: &Quantity) -> Quantity {
        if let Some(kv) = k.as_exact().and_then(|v| v.to_u64()) {
            if kv <= 20_000 {
                return Quantity::exact(crate::exact::binomial(3 * kv, kv));
            }
        }
        // 2^{βk}/(3k+1) ≤ C(3k,k) ≤ 2^{βk}, β = 3·log2 3 − 2.
        let beta = 3.0 * 3f64.log2() - 2.0;
        let (b_lo, b_hi) = (down(beta), up(beta));
        let km = k.magnitude();
        let k0 = km.lower_to(0);
        let (lo, hi) = if k0.hi.is_finite() {
            let lo = down(b_lo * k0.lo - up((3.0 * k0.hi + 1.0).log2()));
            let l = LogMagnitude::real(lo, lo);
            (l, LogMagnitude::real(up(b_hi * k0.hi), up(b_hi * k0.hi)))
        } else {
            // k > 1e300: log2(3k+1) < 1e-12·βk
            let f = b_lo * (1.0 - 1e-12);
            (km.mul(&LogMagnitude::real(f, f)), km.mul(&LogMagnitude::real(b_hi, b_hi)))
        };
        Quantity::Mag(LogMagnitude::between(&lo, &hi).pow2())
    }

    /// Bounds on `log2` of the value when representable.
    pub fn log2_bounds(&self) -> Option<(f64, f64)> {
        self.magnitude().log2_bounds()
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(v) if v.bits() <= 200 => write!(f, "{v}"),
            Quantity::Exact(v) => write!(f, "{} ({} bits)", LogMagnitude::from_biguint(v), v.bits()),
            Quantity::Mag(m) => write!(f, "{m}"),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(rename_all = "snake_case")]
        enum Repr<'a> {
            Exact(String),
            Magnitude(&'a LogMagnitude),
        }
        match self {
            Quantity::Exact(v) => Repr::Exact(v.to_string()).serialize(s),
            Quantity::Mag(m) => Repr::Magnitude(m).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Mag {
            tower: u32,
            lo: String,
            hi: String,
        }
        #[derive(Deserialize)]
        #[serde(rename_all = "snake_case")]
        enum Repr {
            Exact(String),
            Magnitude(Mag),
        }
        match Repr::deserialize(d)? {
            Repr::Exact(v) => v.parse::<BigUint>().map(Quantity::exact).map_err(D::Error::custom),
            Repr::Magnitude(m) => {
                let lo: f64 = m.lo.parse().map_err(D::Error::custom)?;
                let hi: f64 = m.hi.parse().map_err(D::Error::custom)?;
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(D::Error::custom("empty magnitude interval"));
                }
                Ok(Quantity::Mag(LogMagnitude::new(m.tower, lo, hi)))
            }
        }
    }
}
