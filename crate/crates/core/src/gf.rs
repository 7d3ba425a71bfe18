//! Finite fields `GF(p^e)` with table-driven arithmetic.
//!
//! Elements are stored as their canonical base-`p` encoding
//! `sum coeffs[i] * p^i`, where `coeffs` are the polynomial-basis
//! coordinates modulo the field's defining polynomial. Two elements are equal
//! exactly when their coordinate vectors are equal, so [`Fe`] can be hashed
//! and ordered directly.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the field size `q = p^e`.
pub const DEFAULT_FIELD_CAP: u64 = 1 << 20;

/// Add tables are only materialized for fields at most this large.
const ADD_TABLE_MAX_Q: u32 = 256;

/// A field element, encoded as an integer in `[0, q)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The arithmetic operations exposed through [`Field::apply`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
    Pow,
    Frobenius,
}

struct FieldData {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: Fe,
    /// `exp[i] = g^i` for `i < 2(q-1)`.
    exp: Vec<u32>,
    /// `log[a]` for `a != 0`; `log[0]` is unused.
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Option<Vec<u32>>,
}

/// A finite field `GF(p^e)`. Cheap to clone; all clones share tables.
#[derive(Clone)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.e == other.0.e
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.0.p, self.0.e)
    }
}

static FIELD_CACHE: Lazy<Mutex<HashMap<(u32, u32), Field>>> = Lazy::new(|| Mutex::new(HashMap::new()));

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// If `q` is a prime power `p^e`, returns `(p, e)`.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let mut e = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p as u32, e))
}

impl Field {
    /// The field with `p^e` elements, using the default size cap.
    pub fn new(p: u32, e: u32) -> Result<Field> {
        Self::with_cap(p, e, DEFAULT_FIELD_CAP)
    }

    /// The field with `q` elements; `q` must be a prime power.
    pub fn of_order(q: u64) -> Result<Field> {
        let (p, e) = prime_power(q).ok_or(Error::NotPrime(q))?;
        Self::new(p, e)
    }

    pub fn with_cap(p: u32, e: u32, cap: u64) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if e == 0 {
            return Err(Error::InvalidParameters("field degree must be positive".into()));
        }
        let q = (p as u64).checked_pow(e).filter(|&q| q <= cap);
        let Some(q) = q else {
            return Err(Error::SizeCapExceeded(format!("{p}^{e} exceeds field cap {cap}")));
        };
        if let Some(f) = FIELD_CACHE.lock().unwrap().get(&(p, e)) {
            return Ok(f.clone());
        }
        let field = Field(Arc::new(build_field(p, e, q as u32)));
        FIELD_CACHE.lock().unwrap().insert((p, e), field.clone());
        Ok(field)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.0.e
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }

    /// Monic defining polynomial, low degree first (length `e + 1`).
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// A fixed primitive element of the multiplicative group.
    pub fn generator(&self) -> Fe {
        self.0.generator
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    /// Element from its base-`p` encoding. Panics when out of range.
    pub fn elem(&self, n: u32) -> Fe {
        assert!(n < self.0.q, "element {n} out of range for {self:?}");
        Fe(n)
    }

    /// The prime-field element `n mod p`.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.0.p as i64) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.0.q).map(Fe)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fe> {
        (1..self.0.q).map(Fe)
    }

    pub fn coeffs(&self, a: Fe) -> Vec<u32> {
        let p = self.0.p;
        let mut n = a.0;
        (0..self.0.e)
            .map(|_| {
                let c = n % p;
                n /= p;
                c
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Fe {
        assert_eq!(coeffs.len(), self.0.e as usize);
        let p = self.0.p;
        Fe(coeffs.iter().rev().fold(0, |acc, &c| acc * p + c % p))
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let d = &*self.0;
        if d.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        if let Some(t) = &d.add {
            return Fe(t[(a.0 * d.q + b.0) as usize]);
        }
        if d.e == 1 {
            let s = a.0 + b.0;
            return Fe(if s >= d.p { s - d.p } else { s });
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0, 1);
        for _ in 0..d.e {
            out += ((x % d.p + y % d.p) % d.p) * place;
            x /= d.p;
            y /= d.p;
            place *= d.p;
        }
        Fe(out)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.0.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let d = &*self.0;
        Fe(d.exp[(d.log[a.0 as usize] + d.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = &*self.0;
        let l = d.log[a.0 as usize];
        Ok(Fe(d.exp[((d.q - 1 - l) % (d.q - 1)) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^n`; `0^0 = 1`.
    pub fn pow(&self, a: Fe, n: u64) -> Fe {
        if n == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let d = &*self.0;
        let l = d.log[a.0 as usize] as u64;
        Fe(d.exp[((l * (n % (d.q as u64 - 1))) % (d.q as u64 - 1)) as usize])
    }

    /// Signed exponent version of [`Field::pow`]; panics on `0^negative`.
    pub fn powi(&self, a: Fe, n: i64) -> Fe {
        if n >= 0 {
            self.pow(a, n as u64)
        } else {
            self.pow(self.inv(a).expect("inverse of zero"), n.unsigned_abs())
        }
    }

    /// The Frobenius automorphism `a -> a^p`.
    pub fn frobenius(&self, a: Fe) -> Fe {
        self.pow(a, self.0.p as u64)
    }

    /// Discrete logarithm to the base [`Field::generator`].
    pub fn log(&self, a: Fe) -> Option<u32> {
        (!a.is_zero()).then(|| self.0.log[a.0 as usize])
    }

    pub fn is_square(&self, a: Fe) -> bool {
        a.is_zero() || self.0.p == 2 || self.0.log[a.0 as usize].is_multiple_of(2)
    }

    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        if a.is_zero() {
            return Some(Fe::ZERO);
        }
        let d = &*self.0;
        let l = d.log[a.0 as usize];
        if d.p == 2 {
            // squaring is a bijection; l*(q/2) halves the exponent mod q-1
            let half = ((l as u64 * (d.q as u64 / 2)) % (d.q as u64 - 1)) as usize;
            return Some(Fe(d.exp[half]));
        }
        l.is_multiple_of(2).then(|| Fe(d.exp[(l / 2) as usize]))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: Fe) -> u32 {
        let l = self.0.log[a.0 as usize];
        let n = self.0.q - 1;
        n / gcd(l, n)
    }

    pub fn apply(&self, op: FieldOp, a: Fe, b: Fe) -> Result<Fe> {
        Ok(match op {
            FieldOp::Add => self.add(a, b),
            FieldOp::Sub => self.sub(a, b),
            FieldOp::Mul => self.mul(a, b),
            FieldOp::Inv => self.inv(a)?,
            FieldOp::Neg => self.neg(a),
            FieldOp::Pow => self.pow(a, b.0 as u64),
            FieldOp::Frobenius => self.frobenius(a),
        })
    }

    /// True when `a` lies in the subfield of order `p^sub_degree`.
    pub fn in_subfield(&self, a: Fe, sub_degree: u32) -> bool {
        self.pow(a, (self.0.p as u64).pow(sub_degree)) == a
    }

    /// All elements of the subfield of degree `sub_degree` over the prime field.
    pub fn subfield_elements(&self, sub_degree: u32) -> Result<Vec<Fe>> {
        if sub_degree == 0 || !self.0.e.is_multiple_of(sub_degree) {
            return Err(Error::NotADivisor(sub_degree, self.0.e));
        }
        Ok(self.elements().filter(|&a| self.in_subfield(a, sub_degree)).collect())
    }

    /// An `F_p`-basis of the subfield of degree `sub_degree`: powers of a
    /// primitive element of the subfield.
    pub fn subfield_prime_basis(&self, sub_degree: u32) -> Result<Vec<Fe>> {
        if sub_degree == 0 || !self.0.e.is_multiple_of(sub_degree) {
            return Err(Error::NotADivisor(sub_degree, self.0.e));
        }
        let q0 = (self.0.p as u64).pow(sub_degree);
        let zeta = self.pow(self.0.generator, (self.0.q as u64 - 1) / (q0 - 1));
        Ok((0..sub_degree).map(|i| self.pow(zeta, i as u64)).collect())
    }

    /// `r` elements forming a basis of this field over its subfield of index
    /// `r` (the subfield of order `p^(e/r)`).
    ///
    /// Chosen greedily among `1, g, g^2, ...`; independence is checked by an
    /// `F_p`-rank computation on the products with an `F_p`-basis of the
    /// subfield.
    pub fn basis_over_subfield(&self, r: u32) -> Result<Vec<Fe>> {
        if r == 0 || !self.0.e.is_multiple_of(r) {
            return Err(Error::NotADivisor(r, self.0.e));
        }
        let sub_basis = self.subfield_prime_basis(self.0.e / r)?;
        let mut chosen: Vec<Fe> = Vec::new();
        let mut power = Fe::ONE;
        for _ in 0..self.0.q {
            if chosen.len() == r as usize {
                break;
            }
            let mut trial = chosen.clone();
            trial.push(power);
            if self.subfield_rank(&trial, &sub_basis) == trial.len() * sub_basis.len() {
                chosen = trial;
            }
            power = self.mul(power, self.0.generator);
        }
        debug_assert_eq!(chosen.len(), r as usize);
        Ok(chosen)
    }

    fn subfield_rank(&self, elems: &[Fe], sub_basis: &[Fe]) -> usize {
        let rows: Vec<Vec<u32>> = elems
            .iter()
            .flat_map(|&l| sub_basis.iter().map(move |&b| (l, b)))
            .map(|(l, b)| self.coeffs(self.mul(l, b)))
            .collect();
        rank_mod_p(rows, self.0.p)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Rank of a matrix over the prime field `Z_p` given as rows.
pub fn rank_mod_p(mut rows: Vec<Vec<u32>>, p: u32) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| !rows[i][c].is_multiple_of(p)) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = inv_mod(rows[rank][c], p);
        for v in rows[rank].iter_mut() {
            *v = (*v * inv) % p;
        }
        for i in 0..rows.len() {
            if i != rank && !rows[i][c].is_multiple_of(p) {
                let f = rows[i][c];
                for j in 0..cols {
                    let sub = (f * rows[rank][j]) % p;
                    rows[i][j] = (rows[i][j] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut n = p - 2;
    while n > 0 {
        if n & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        n >>= 1;
    }
    r as u32
}

/// `a mod m` for polynomials over `Z_p` (low degree first, `m` monic).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r[r.len() - 1] % p;
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    // f is irreducible iff it has no monic factor of degree 1..=deg/2
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for n in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut x = n;
            for _ in 0..d {
                g.push((x % p as u64) as u32);
                x /= p as u64;
            }
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Lexicographically least monic irreducible polynomial of degree `e`,
/// comparing coefficients from the constant term upwards.
fn least_irreducible(p: u32, e: u32) -> Vec<u32> {
    if e == 1 {
        return vec![0, 1];
    }
    let count = (p as u64).pow(e);
    for n in 0..count {
        // c_0 is the most significant digit of the enumeration order
        let mut coeffs = vec![0u32; e as usize + 1];
        let mut x = n;
        for i in (0..e as usize).rev() {
            coeffs[i] = (x % p as u64) as u32;
            x /= p as u64;
        }
        coeffs[e as usize] = 1;
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn build_field(p: u32, e: u32, q: u32) -> FieldData {
    let modulus = least_irreducible(p, e);
    let el = e as usize;
    let decode = |mut n: u32| -> Vec<u32> {
        (0..el)
            .map(|_| {
                let c = n % p;
                n /= p;
                c
            })
            .collect()
    };
    let encode = |c: &[u32]| -> u32 { c.iter().rev().fold(0, |acc, &x| acc * p + x) };
    let poly_mul = |a: &[u32], b: &[u32]| -> Vec<u32> {
        let mut out = vec![0u32; 2 * el - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        let mut r = poly_rem(&out, &modulus, p);
        r.resize(el, 0);
        r
    };

    let mut neg = vec![0u32; q as usize];
    for n in 0..q {
        let c: Vec<u32> = decode(n).into_iter().map(|x| (p - x) % p).collect();
        neg[n as usize] = encode(&c);
    }

    let (generator, exp) = if q == 2 {
        (1, vec![1, 1])
    } else {
        let mut found = None;
        for g in 2..q {
            let gc = decode(g);
            let mut table = Vec::with_capacity(2 * (q as usize - 1));
            let mut cur = decode(1);
            let mut ok = true;
            for i in 0..(q - 1) {
                let enc = encode(&cur);
                if i > 0 && enc == 1 {
                    ok = false;
                    break;
                }
                table.push(enc);
                cur = poly_mul(&cur, &gc);
            }
            if ok {
                found = Some((g, table));
                break;
            }
        }
        let (g, mut table) = found.expect("multiplicative group is cyclic");
        let head = table.clone();
        table.extend(head);
        (g, table)
    };
    let mut exp = exp;
    if q == 2 {
        exp = vec![1, 1];
    }
    let mut log = vec![0u32; q as usize];
    for i in 0..(q - 1) {
        log[exp[i as usize] as usize] = i;
    }

    let add = (p != 2 && q <= ADD_TABLE_MAX_Q && e > 1).then(|| {
        let mut t = vec![0u32; (q * q) as usize];
        for a in 0..q {
            let ca = decode(a);
            for b in 0..q {
                let cb = decode(b);
                let s: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                t[(a * q + b) as usize] = encode(&s);
            }
        }
        t
    });

    FieldData { p, e, q, modulus, generator: Fe(generator), exp, log, neg, add }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_and_modulus_choice() {
        let f2 = Field::new(2, 1).unwrap();
        assert_eq!(f2.q(), 2);
        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        assert!(matches!(Field::new(4, 1), Err(Error::NotPrime(4))));
        assert!(matches!(Field::new(2, 30), Err(Error::SizeCapExceeded(_))));
        // x^2 + 1 is irreducible over F_3 and least in low-degree-first order
        assert_eq!(Field::new(3, 2).unwrap().modulus(), &[1, 0, 1]);
    }

    #[test]
    fn small_products() {
        let f4 = Field::new(2, 2).unwrap();
        let x = f4.elem(2);
        let x1 = f4.elem(3);
        assert_eq!(f4.mul(x, x1), Fe::ONE);
        for q in [2u64, 3, 4, 5, 7, 8, 9, 16, 25, 27] {
            let f = Field::of_order(q).unwrap();
            assert_eq!(f.inv(Fe::ONE).unwrap(), Fe::ONE);
            assert!(matches!(f.inv(Fe::ZERO), Err(Error::DivisionByZero)));
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2u64, 3, 4, 5, 8, 9, 16, 25, 27, 32, 49, 64] {
            let f = Field::of_order(q).unwrap();
            let els: Vec<Fe> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
                    assert_eq!(f.pow(a, q - 1), Fe::ONE);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                }
            }
            // associativity/distributivity on a stride of triples keeps q=64 fast
            let step = (els.len() / 16).max(1);
            for &a in els.iter().step_by(step) {
                for &b in &els {
                    for &c in els.iter().step_by(step) {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn multiplication_matches_polynomial_definition() {
        // independent check: schoolbook product reduced by the modulus
        for q in [4u64, 8, 9, 25, 27] {
            let f = Field::of_order(q).unwrap();
            let (p, e) = (f.p(), f.e() as usize);
            for a in f.elements() {
                for b in f.elements() {
                    let (ca, cb) = (f.coeffs(a), f.coeffs(b));
                    let mut prod = vec![0u32; 2 * e - 1];
                    for i in 0..e {
                        for j in 0..e {
                            prod[i + j] = (prod[i + j] + ca[i] * cb[j]) % p;
                        }
                    }
                    let mut r = poly_rem(&prod, f.modulus(), p);
                    r.resize(e, 0);
                    assert_eq!(f.mul(a, b), f.from_coeffs(&r));
                }
            }
        }
    }

    #[test]
    fn frobenius_is_an_automorphism_of_order_e() {
        let f9 = Field::new(3, 2).unwrap();
        for a in f9.elements() {
            assert_eq!(f9.frobenius(f9.frobenius(a)), a);
            if f9.in_subfield(a, 1) {
                assert_eq!(f9.frobenius(a), a);
            }
            for b in f9.elements() {
                assert_eq!(f9.frobenius(f9.mul(a, b)), f9.mul(f9.frobenius(a), f9.frobenius(b)));
                assert_eq!(f9.frobenius(f9.add(a, b)), f9.add(f9.frobenius(a), f9.frobenius(b)));
            }
        }
        let f16 = Field::new(2, 4).unwrap();
        let fixed = f16.elements().filter(|&a| f16.frobenius(a) == a).count();
        assert_eq!(fixed, 2);
    }

    #[test]
    fn basis_over_subfields() {
        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(f4.basis_over_subfield(2).unwrap(), vec![Fe(1), Fe(2)]);
        assert_eq!(f4.basis_over_subfield(1).unwrap(), vec![Fe(1)]);
        assert!(matches!(f4.basis_over_subfield(3), Err(Error::NotADivisor(3, 2))));

        // F_16 over F_4: span over the subfield must be the whole field
        let f16 = Field::new(2, 4).unwrap();
        let basis = f16.basis_over_subfield(2).unwrap();
        assert_eq!(basis.len(), 2);
        let sub = f16.subfield_elements(2).unwrap();
        assert_eq!(sub.len(), 4);
        let mut span = std::collections::HashSet::new();
        for &a in &sub {
            for &b in &sub {
                span.insert(f16.add(f16.mul(a, basis[0]), f16.mul(b, basis[1])));
            }
        }
        assert_eq!(span.len(), 16);
    }

    #[test]
    fn square_roots() {
        for q in [2u64, 4, 5, 9, 11, 16] {
            let f = Field::of_order(q).unwrap();
            for a in f.elements() {
                if let Some(r) = f.sqrt(a) {
                    assert_eq!(f.mul(r, r), a);
                } else {
                    assert!(!f.is_square(a));
                }
            }
        }
    }
}
