//! Base-size inequalities evaluated on concrete instances with outward
//! rounded logarithms.
//!
//! Logs of big integers are enclosed in `Interval`s: the top 53 bits of the
//! integer give the mantissa, the truncated tail is absorbed by rounding the
//! upper end up, and every floating-point step moves the endpoints one ulp
//! outward. An upper bound "holds" only when `b <= rhs.lo`, a lower bound
//! only when `b >= rhs.hi` (or `>` as stated).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    x.next_down()
}

fn up(x: f64) -> f64 {
    x.next_up()
}

impl Interval {
    pub fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Interval {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    /// Integer enclosure, exact for `|n| < 2^53`.
    pub fn int(n: i64) -> Interval {
        let x = n as f64;
        if x as i64 == n {
            Interval::point(x)
        } else {
            Interval::new(down(x), up(x))
        }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }

    pub fn sub(self, o: Interval) -> Interval {
        Interval::new(down(self.lo - o.hi), up(self.hi - o.lo))
    }

    pub fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }

    /// Division by an interval not containing zero.
    pub fn div(self, o: Interval) -> Interval {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by an interval containing zero");
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }

    pub fn scale(self, k: f64) -> Interval {
        self.mul(Interval::point(k))
    }

    /// Natural log of a positive interval.
    pub fn ln(self) -> Interval {
        assert!(self.lo > 0.0);
        Interval::new(down(down(self.lo.ln())), up(up(self.hi.ln())))
    }

    pub fn sqrt(self) -> Interval {
        Interval::new(down(self.lo.max(0.0).sqrt()), up(self.hi.sqrt()))
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6}, {:.6}]", self.lo, self.hi)
    }
}

const LN2: Interval = Interval { lo: 0.693_147_180_559_945_2, hi: 0.693_147_180_559_945_4 };

/// `log2 n` enclosed. `n` must be positive.
pub fn log2_big(n: &BigUint) -> Interval {
    assert!(!n.is_zero(), "log of zero");
    let bits = n.bits();
    if bits <= 53 {
        let x = n.to_u64().unwrap() as f64;
        let l = x.log2();
        return Interval::new(down(down(l)), up(up(l)));
    }
    let shift = bits - 53;
    let m = (n >> shift).to_u64().unwrap();
    let exact_tail = (n.clone() >> shift) << shift == *n;
    let lo = (m as f64).log2();
    let hi = if exact_tail { lo } else { ((m + 1) as f64).log2() };
    let s = shift as f64;
    Interval::new(down(down(lo + s)), up(up(hi + s)))
}

pub fn ln_big(n: &BigUint) -> Interval {
    log2_big(n).mul(LN2)
}

/// Midpoint of the `log2` enclosure, for display.
pub fn log2_f64(n: &BigUint) -> f64 {
    log2_big(n).mid()
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// Number of partitions of an `ab`-set into `a` parts of size `b`.
pub fn partition_count(a: u64, b: u64) -> BigUint {
    let fb = factorial(b);
    factorial(a * b) / (fb.pow(a as u32) * factorial(a))
}

/// Exact minimal base size of `Sym(m)` on `k`-subsets when `k^2 <= m`.
pub fn subset_exact_value(m: u64, k: u64) -> u64 {
    (2 * m - 2).div_ceil(k + 1)
}

/// `ceil(log_c(m)) * (c - 1)` with `c = ceil(m/k)`.
pub fn subset_digit_bound(m: u64, k: u64) -> u64 {
    let c = m.div_ceil(k);
    digits_needed(m, c) * (c - 1)
}

/// Least `L` with `c^L >= m`.
pub fn digits_needed(m: u64, c: u64) -> u64 {
    let mut l = 0;
    let mut p: u128 = 1;
    while p < m as u128 {
        p *= c as u128;
        l += 1;
    }
    l
}

/// Partition-action bound: 3 for `b = 2`, 6 for `a >= b >= 3`, else
/// `floor(log_a b) + 4`.
pub fn partition_bound(a: u64, b: u64) -> u64 {
    if b == 2 {
        3
    } else if a >= b {
        6
    } else {
        // largest j with a^j <= b
        let mut j = 0;
        let mut p = a;
        while p <= b {
            j += 1;
            p *= a;
        }
        j + 4
    }
}

/// What an instance acts on; selects the applicable inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionTag {
    Subsets { m: u64, k: u64 },
    Partitions { a: u64, b: u64 },
    Subspaces { family: String, d: u64, k: u64, q: u64, linear: bool },
    /// Linear group on its natural module.
    Vectors { d: u64, q: u64 },
    /// Affine group `V:H` on `V`.
    Affine { d: u64, q: u64 },
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInstance {
    pub id: String,
    pub family: String,
    #[serde(with = "decimal")]
    pub order: BigUint,
    #[serde(with = "decimal")]
    pub degree: BigUint,
    pub b_exact: Option<u64>,
    pub b_upper: Option<u64>,
    pub action: ActionTag,
    /// Whether the group contains `Alt(n)` in its action of degree `n`.
    #[serde(default)]
    pub contains_alt: bool,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Num {
            S(String),
            U(u64),
        }
        match Num::deserialize(d)? {
            Num::S(s) => s.parse().map_err(serde::de::Error::custom),
            Num::U(u) => Ok(BigUint::from(u)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    /// `b <= value`
    Upper,
    /// `b > value`
    StrictLower,
    /// `b == value`
    Exact,
    /// the ratio `log|G|/log n` is at least `value`
    RatioLower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub side: BoundSide,
    pub value: Interval,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub id: String,
    pub family: String,
    pub log2_order: Interval,
    pub log2_degree: Interval,
    pub b_exact: Option<u64>,
    pub b_upper: Option<u64>,
    pub bound_values: BTreeMap<String, BoundValue>,
    pub violations: Vec<String>,
}

impl BoundReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Ctx<'a> {
    inst: &'a BoundInstance,
    values: BTreeMap<String, BoundValue>,
    violations: Vec<String>,
}

impl Ctx<'_> {
    fn b(&self) -> u64 {
        self.inst.b_exact.or(self.inst.b_upper).unwrap()
    }

    fn record(&mut self, name: &str, side: BoundSide, value: Interval, holds: bool) {
        if !holds {
            self.violations.push(format!("{name}: b={} value={value}", self.b()));
        }
        self.values.insert(name.to_string(), BoundValue { side, value, holds });
    }

    fn upper(&mut self, name: &str, rhs: Interval) {
        let holds = (self.b() as f64) <= rhs.lo;
        self.record(name, BoundSide::Upper, rhs, holds);
    }
}

/// Evaluate every inequality applicable to the instance.
pub fn eval_bounds(inst: &BoundInstance) -> Result<BoundReport> {
    if inst.b_exact.is_none() && inst.b_upper.is_none() {
        return Err(Error::MissingField("b_exact or b_upper".into()));
    }
    if inst.order.is_zero() || inst.degree.is_zero() {
        return Err(Error::MissingField("order and degree must be positive".into()));
    }
    let lg = log2_big(&inst.order);
    let ln_deg = log2_big(&inst.degree);
    let mut cx = Ctx { inst, values: BTreeMap::new(), violations: Vec::new() };
    let nontrivial = inst.order > BigUint::one() && inst.degree > BigUint::one();
    let ratio = if nontrivial { Some(lg.div(ln_deg)) } else { None };

    if let Some(r) = ratio {
        // |G| <= n^b, strict once the group is nontrivial; decided exactly.
        for (name, b) in [("trivial_lower", inst.b_exact), ("trivial_lower_upper_b", inst.b_upper)] {
            if let Some(b) = b {
                let holds = inst.degree.pow(b as u32) > inst.order;
                cx.values.insert(name.into(), BoundValue { side: BoundSide::StrictLower, value: r, holds });
                if !holds {
                    cx.violations.push(format!("{name}: b={b} log|G|/log n={r}"));
                }
            }
        }
        cx.upper("two_log_ratio_plus_24", r.scale(2.0).add(Interval::int(24)));
        if !inst.contains_alt {
            let sq = Interval::new(down(inst.degree.to_f64().unwrap()), up(inst.degree.to_f64().unwrap())).sqrt();
            let rhs = if sq.lo >= 25.0 { sq } else { Interval::point(25.0) };
            cx.upper("sqrt_degree_or_25", rhs);
        }
    }

    match &inst.action {
        ActionTag::Subsets { m, k } => {
            let (m, k) = (*m, *k);
            if let Some(r) = ratio {
                cx.upper("two_ln_ratio_plus_16", r.scale(2.0).add(Interval::int(16)));
                if k * k <= m {
                    cx.upper("two_ln_ratio_plus_4", r.scale(2.0).add(Interval::int(4)));
                }
            }
            if k * k <= m {
                let v = subset_exact_value(m, k);
                if let Some(b) = inst.b_exact {
                    cx.record("subset_exact_value", BoundSide::Exact, Interval::int(v as i64), b == v);
                }
                cx.upper("subset_exact_value_upper", Interval::int(v as i64));
            }
            if k >= 1 && m >= 2 * k {
                cx.upper("subset_digit_bound", Interval::int(subset_digit_bound(m, k) as i64));
            }
        }
        ActionTag::Partitions { a, b } => {
            let m = a * b;
            let ln_sym = ln_big(&factorial(m));
            let ln_n = ln_big(&inst.degree);
            cx.upper("partition_ln_ratio_plus_5", ln_sym.div(ln_n).add(Interval::int(5)));
            cx.upper("partition_case_bound", Interval::int(partition_bound(*a, *b) as i64));
            if let Some(r) = ratio {
                cx.upper("two_ln_ratio_plus_16", r.scale(2.0).add(Interval::int(16)));
            }
        }
        ActionTag::Subspaces { d, k, q, linear, .. } => {
            let (d, k) = (*d, *k);
            if let Some(r) = ratio {
                if 2 * k <= d {
                    let t = if *linear { 1 } else { 2 };
                    let rhs = Interval::int(d as i64).div(Interval::int((t * k) as i64)).sub(Interval::int(1));
                    let holds = r.lo >= rhs.hi;
                    cx.record("subspace_ratio_lower", BoundSide::RatioLower, rhs, holds);
                    let _ = q;
                }
                cx.upper("two_log_ratio_plus_16", r.scale(2.0).add(Interval::int(16)));
            }
            if 2 * k <= d {
                cx.upper("d_over_k_plus_11", Interval::int(d as i64).div(Interval::int(k as i64)).add(Interval::int(11)));
            }
        }
        ActionTag::Vectors { .. } => {
            if let Some(r) = ratio {
                cx.upper("linear_two_log_plus_17", r.scale(2.0).add(Interval::int(17)));
                let v = r.scale(2.0).add(Interval::int(9));
                let rhs = if v.lo >= 15.0 { v } else { Interval::point(15.0) };
                cx.upper("primitive_linear_15_or_two_log_plus_9", rhs);
            }
        }
        ActionTag::Affine { .. } => {
            if let Some(r) = ratio {
                cx.upper("two_log_ratio_plus_16", r.scale(2.0).add(Interval::int(16)));
            }
        }
        ActionTag::Other => {}
    }

    Ok(BoundReport {
        id: inst.id.clone(),
        family: inst.family.clone(),
        log2_order: lg,
        log2_degree: ln_deg,
        b_exact: inst.b_exact,
        b_upper: inst.b_upper,
        bound_values: cx.values,
        violations: cx.violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaInterval {
    pub lower: Interval,
    pub upper: Interval,
    pub actual: Interval,
    pub holds: bool,
}

/// Enclosures of `(t/(ln t + 1))(ln m - 1)`, `(t/ln t) ln m` and
/// `ln m! / ln C(m,k)` with `t = m/k`; `holds` is rigorous.
pub fn ratio_lemma_interval(m: u64, k: u64) -> Result<LemmaInterval> {
    if k < 2 || 2 * k > m {
        return Err(Error::InvalidParameters(format!("need 2 <= k <= m/2, got m={m}, k={k}")));
    }
    let t = Interval::int(m as i64).div(Interval::int(k as i64));
    let ln_t = t.ln();
    let ln_m = Interval::int(m as i64).ln();
    let one = Interval::int(1);
    let lower = t.div(ln_t.add(one)).mul(ln_m.sub(one));
    let upper = t.div(ln_t).mul(ln_m);
    let actual = ln_big(&factorial(m)).div(ln_big(&binomial(m, k)));
    let holds = lower.hi < actual.lo && actual.hi < upper.lo;
    Ok(LemmaInterval { lower, upper, actual, holds })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub m: u64,
    pub b: u64,
    pub ratio: Interval,
    pub target: f64,
    pub deviation: f64,
}

/// `b(m,k) log C(m,k) / log m!` with `b` from the exact formula.
pub fn ratio_asymptotic(k: u64, ms: &[u64]) -> Result<Vec<RatioPoint>> {
    let mut out = Vec::new();
    for &m in ms {
        if k == 0 || k * k > m {
            return Err(Error::FormulaInapplicable(format!("k^2 > m for m={m}, k={k}")));
        }
        let b = subset_exact_value(m, k);
        let ratio = Interval::int(b as i64).mul(ln_big(&binomial(m, k))).div(ln_big(&factorial(m)));
        let target = 2.0 * k as f64 / (k + 1) as f64;
        let deviation = (ratio.lo - target).abs().max((ratio.hi - target).abs());
        out.push(RatioPoint { m, b, ratio, target, deviation });
    }
    Ok(out)
}

/// Order of `q^d : Sp(d,q)`.
pub fn sp_affine_order(d: u64, q: u64) -> BigUint {
    BigUint::from(q).pow(d as u32) * crate::classical::sp_order(d, q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpIdentity {
    pub d: u64,
    pub q: u64,
    pub b: u64,
    pub two_log_ratio: Interval,
    /// `None` when the enclosure straddles a half-integer.
    pub rounded: Option<i64>,
    pub holds: bool,
}

/// Checks `d + 1 = round(2 log|G| / log n) - 2` for the affine symplectic
/// group with `n = q^d`.
pub fn sp_floor_identity(d: u64, q: u64) -> Result<SpIdentity> {
    if d == 0 || d % 2 == 1 {
        return Err(Error::InvalidParameters(format!("d must be even and positive, got {d}")));
    }
    if crate::gf::prime_power(q).is_none() {
        return Err(Error::InvalidParameters(format!("{q} is not a prime power")));
    }
    let g = sp_affine_order(d, q);
    let n = BigUint::from(q).pow(d as u32);
    let x = log2_big(&g).div(log2_big(&n)).scale(2.0);
    let (a, b) = ((x.lo + 0.5).floor(), (x.hi + 0.5).floor());
    let rounded = if a == b { Some(a as i64) } else { None };
    let holds = rounded == Some(d as i64 + 3);
    Ok(SpIdentity { d, q, b: d + 1, two_log_ratio: x, rounded, holds })
}

/// Least scanned `q` from which the identity holds for every later scanned
/// prime power, with the per-`q` verdicts.
pub fn sp_floor_threshold(d: u64, qs: &[u64]) -> Result<(Option<u64>, Vec<SpIdentity>)> {
    let rows: Vec<SpIdentity> = qs
        .iter()
        .filter(|&&q| crate::gf::prime_power(q).is_some())
        .map(|&q| sp_floor_identity(d, q))
        .collect::<Result<_>>()?;
    let mut threshold = None;
    for r in rows.iter().rev() {
        if r.holds {
            threshold = Some(r.q);
        } else {
            break;
        }
    }
    Ok((threshold, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_enclosures() {
        for n in [1u64, 2, 3, 1000, 1 << 40, u64::MAX] {
            let i = log2_big(&BigUint::from(n));
            assert!(i.lo <= (n as f64).log2() && (n as f64).log2() <= i.hi);
            assert!(i.hi - i.lo < 1e-12);
        }
        let big = BigUint::from(3u32).pow(1000);
        let i = log2_big(&big);
        let exact = 1000.0 * 3f64.log2();
        assert!(i.lo <= exact && exact <= i.hi && i.hi - i.lo < 1e-9);
        let p = BigUint::one() << 300u32;
        assert!(log2_big(&p).contains(300.0));
    }

    #[test]
    fn combinatorics() {
        assert_eq!(binomial(9, 3), BigUint::from(84u32));
        assert_eq!(partition_count(2, 2), BigUint::from(3u32));
        assert_eq!(partition_count(3, 3), BigUint::from(280u32));
        assert_eq!(subset_exact_value(9, 3), 4);
        assert_eq!(subset_exact_value(5, 2), 3);
        assert_eq!(subset_digit_bound(20, 10), 5);
        assert_eq!(partition_bound(2, 4), 6);
        assert_eq!(partition_bound(3, 3), 6);
        assert_eq!(partition_bound(2, 2), 3);
    }

    #[test]
    fn sym9_on_3_subsets() {
        let inst = BoundInstance {
            id: "sym9-k3".into(),
            family: "Sym".into(),
            order: factorial(9),
            degree: binomial(9, 3),
            b_exact: Some(4),
            b_upper: Some(4),
            action: ActionTag::Subsets { m: 9, k: 3 },
            contains_alt: false,
        };
        let r = eval_bounds(&inst).unwrap();
        assert!(r.ok(), "{:?}", r.violations);
        let v = &r.bound_values["two_log_ratio_plus_24"].value;
        assert!((v.mid() - 29.78).abs() < 0.01, "{v}");
        let bad = BoundInstance { b_exact: Some(3), ..inst.clone() };
        assert!(!eval_bounds(&bad).unwrap().ok());
        let none = BoundInstance { b_exact: None, b_upper: None, ..inst };
        assert!(matches!(eval_bounds(&none), Err(Error::MissingField(_))));
    }

    #[test]
    fn subspace_ratio_sl42() {
        let inst = BoundInstance {
            id: "sl42-k1".into(),
            family: "SL".into(),
            order: BigUint::from(20160u32),
            degree: BigUint::from(15u32),
            b_exact: None,
            b_upper: Some(5),
            action: ActionTag::Subspaces { family: "SL".into(), d: 4, k: 1, q: 2, linear: true },
            contains_alt: false,
        };
        let r = eval_bounds(&inst).unwrap();
        assert!(r.bound_values["subspace_ratio_lower"].holds);
        assert_eq!(r.bound_values["subspace_ratio_lower"].value.mid(), 3.0);
    }

    #[test]
    fn lemma_interval() {
        for (m, k) in [(10, 2), (100, 10), (6, 3), (1000, 31)] {
            let l = ratio_lemma_interval(m, k).unwrap();
            assert!(l.holds, "{m} {k} {:?}", l);
        }
        let l = ratio_lemma_interval(10, 2).unwrap();
        assert!((l.actual.mid() - 3.967).abs() < 0.001);
        assert!(ratio_lemma_interval(5, 3).is_err());
    }

    #[test]
    fn ratio_k1_and_inapplicable() {
        let r = ratio_asymptotic(1, &[10, 100, 1000]).unwrap();
        assert_eq!(r[0].b, 9);
        assert!(r[2].deviation < r[0].deviation);
        assert!(matches!(ratio_asymptotic(4, &[10]), Err(Error::FormulaInapplicable(_))));
    }

    #[test]
    fn sp_identity() {
        let r = sp_floor_identity(4, 101).unwrap();
        assert!(r.holds);
        let (thr, rows) = sp_floor_threshold(2, &(2..=101).collect::<Vec<_>>()).unwrap();
        assert!(thr.is_some());
        assert!(rows.iter().all(|r| r.b == 3));
        assert!(sp_floor_identity(3, 2).is_err());
        sp_floor_identity(4, 2).unwrap();
    }
}
