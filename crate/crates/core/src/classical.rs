//! Classical matrix groups: specifications, generating sets, orders, orbit
//! sizes, and the small auxiliary generating sets used by the subspace
//! constructions.
//!
//! Groups with a form are taken to be the full isometry group of the
//! standard form (`Sp`, `GU`, `GO`), which contains the corresponding simple
//! group; a base for the larger group is a base for every subgroup.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Form, FormKind, IsometryType, Sign};
use crate::gf::{Fe, Field};
use crate::linalg::{all_vectors, algebra_closure, is_zero_vec, normalize, unit_vector, vec_add, vec_scale, Matrix, Subspace, Vector};
use crate::permgrp::{matrix_on_vectors, vector_code, Perm, StabilizerChain};

/// Vector actions up to this degree are used to certify generating sets.
pub const VECTOR_CERT_MAX: u64 = 1 << 16;
/// Projective point actions up to this degree are used otherwise.
pub const POINT_CERT_MAX: u64 = 1 << 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    SL,
    GL,
    Sp,
    SU,
    #[serde(rename = "O+")]
    OmegaPlus,
    #[serde(rename = "O-")]
    OmegaMinus,
    #[serde(rename = "Oo")]
    OmegaOdd,
}

impl Family {
    pub fn parse(s: &str) -> Result<Family> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sl" => Family::SL,
            "gl" => Family::GL,
            "sp" => Family::Sp,
            "su" | "gu" | "u" => Family::SU,
            "o+" | "omegaplus" | "oplus" | "plus" => Family::OmegaPlus,
            "o-" | "omegaminus" | "ominus" | "minus" => Family::OmegaMinus,
            "oo" | "o" | "omegaodd" | "oodd" | "odd" => Family::OmegaOdd,
            _ => return Err(Error::InvalidParameters(format!("unknown family '{s}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::SL => "SL",
            Family::GL => "GL",
            Family::Sp => "Sp",
            Family::SU => "SU",
            Family::OmegaPlus => "O+",
            Family::OmegaMinus => "O-",
            Family::OmegaOdd => "Oo",
        }
    }

    pub fn form_kind(&self) -> FormKind {
        match self {
            Family::SL | Family::GL => FormKind::None,
            Family::Sp => FormKind::Symplectic,
            Family::SU => FormKind::Unitary,
            _ => FormKind::Quadratic,
        }
    }

    pub fn sign(&self) -> Option<Sign> {
        match self {
            Family::OmegaPlus => Some(Sign::Plus),
            Family::OmegaMinus => Some(Sign::Minus),
            Family::OmegaOdd => Some(Sign::Odd),
            _ => None,
        }
    }

    pub fn is_orthogonal(&self) -> bool {
        matches!(self, Family::OmegaPlus | Family::OmegaMinus | Family::OmegaOdd)
    }
}

#[derive(Clone, Debug)]
pub struct MatGroupSpec {
    pub family: Family,
    pub d: usize,
    pub field: Field,
    pub form: Form,
    pub projective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatGroupSpecJson {
    pub family: Family,
    pub d: usize,
    pub p: u32,
    pub e: u32,
    pub sign: Option<Sign>,
    pub projective: bool,
}

impl MatGroupSpec {
    pub fn new(family: Family, d: usize, field: &Field) -> Result<MatGroupSpec> {
        if d == 0 {
            return Err(Error::IncompatibleParameters("dimension must be positive".into()));
        }
        let form = Form::standard(family.form_kind(), d, field, family.sign())?;
        Ok(MatGroupSpec { family, d, field: field.clone(), form, projective: true })
    }

    pub fn of_order(family: Family, d: usize, q: u64) -> Result<MatGroupSpec> {
        Self::new(family, d, &Field::of_order(q)?)
    }

    pub fn q(&self) -> u64 {
        self.field.q() as u64
    }

    pub fn name(&self) -> String {
        format!("{}({},{})", self.family.name(), self.d, self.field.q())
    }

    pub fn to_json(&self) -> MatGroupSpecJson {
        MatGroupSpecJson {
            family: self.family,
            d: self.d,
            p: self.field.p(),
            e: self.field.e(),
            sign: self.family.sign(),
            projective: self.projective,
        }
    }

    pub fn from_json(j: &MatGroupSpecJson) -> Result<MatGroupSpec> {
        let mut s = Self::new(j.family, j.d, &Field::new(j.p, j.e)?)?;
        s.projective = j.projective;
        Ok(s)
    }

    /// Membership in the matrix group.
    pub fn contains(&self, g: &Matrix) -> bool {
        if g.rows() != self.d || g.cols() != self.d {
            return false;
        }
        match self.family {
            Family::SL => g.det() == Fe::ONE,
            Family::GL => !g.det().is_zero(),
            _ => !g.det().is_zero() && self.form.preserves(g),
        }
    }

    /// Scalars `c` with `cI` in the group.
    pub fn scalars(&self) -> Vec<Fe> {
        let f = &self.field;
        f.nonzero_elements().filter(|&c| self.contains(&Matrix::scalar(f, self.d, c))).collect()
    }
}

fn pow(b: u64, e: u64) -> BigUint {
    BigUint::from(b).pow(e as u32)
}

/// `|GL(d,q)|`.
pub fn gl_order(d: u64, q: u64) -> BigUint {
    let mut o = pow(q, d * (d.saturating_sub(1)) / 2);
    for i in 1..=d {
        o *= pow(q, i) - BigUint::one();
    }
    o
}

/// `|Sp(2l,q)|`.
pub fn sp_order(two_l: u64, q: u64) -> BigUint {
    let l = two_l / 2;
    let mut o = pow(q, l * l);
    for i in 1..=l {
        o *= pow(q, 2 * i) - BigUint::one();
    }
    o
}

/// `|GU(d,q0)|`.
pub fn gu_order(d: u64, q0: u64) -> BigUint {
    let mut o = pow(q0, d * (d.saturating_sub(1)) / 2);
    for i in 1..=d {
        let t = pow(q0, i);
        o *= if i % 2 == 0 { t - BigUint::one() } else { t + BigUint::one() };
    }
    o
}

/// `|GO^ε(n,q)|` with `witt_index` deciding the sign in even dimension.
pub fn go_order(n: u64, witt_index: u64, q: u64) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    let l = n / 2;
    if n % 2 == 1 {
        let mut o = BigUint::from(2u32) * pow(q, l * l);
        for i in 1..=l {
            o *= pow(q, 2 * i) - BigUint::one();
        }
        return o;
    }
    let plus = witt_index == l;
    let mut o = BigUint::from(2u32) * pow(q, l * (l - 1));
    o *= if plus { pow(q, l) - BigUint::one() } else { pow(q, l) + BigUint::one() };
    for i in 1..l {
        o *= pow(q, 2 * i) - BigUint::one();
    }
    o
}

/// Exact order of the matrix group (or of its quotient by scalars when
/// `projective` is set), with `log2`.
pub fn order(spec: &MatGroupSpec) -> (BigUint, f64) {
    let o = matrix_order(spec);
    let o = if spec.projective { o / BigUint::from(scalar_count(spec)) } else { o };
    let l = crate::bounds::log2_f64(&o);
    (o, l)
}

/// Order of the matrix group itself.
pub fn matrix_order(spec: &MatGroupSpec) -> BigUint {
    let (d, q) = (spec.d as u64, spec.q());
    match spec.family {
        Family::GL => gl_order(d, q),
        Family::SL => gl_order(d, q) / BigUint::from(q - 1),
        Family::Sp => sp_order(d, q),
        Family::SU => gu_order(d, spec.form.q0()),
        Family::OmegaPlus => go_order(d, d / 2, q),
        Family::OmegaMinus => go_order(d, d / 2 - 1, q),
        Family::OmegaOdd => go_order(d, d / 2, q),
    }
}

pub fn scalar_count(spec: &MatGroupSpec) -> u64 {
    let (d, q) = (spec.d as u64, spec.q());
    match spec.family {
        Family::GL => q - 1,
        Family::SL => d.gcd(&(q - 1)),
        Family::SU => spec.form.q0() + 1,
        _ => 2u64.gcd(&(q - 1)),
    }
}

/// Gaussian binomial coefficient: the number of `k`-subspaces of `F_q^d`.
pub fn gaussian_binomial(d: u64, k: u64, q: u64) -> BigUint {
    if k > d {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= pow(q, d - i) - BigUint::one();
        den *= pow(q, i + 1) - BigUint::one();
    }
    num / den
}

/// Order of the full isometry group of a nondegenerate space of the given
/// type under the same kind of form.
pub fn isometry_group_order(kind: FormKind, t: &IsometryType, q: u64, q0: u64) -> BigUint {
    let n = t.dim as u64;
    match kind {
        FormKind::Symplectic => sp_order(n, q),
        FormKind::Unitary => gu_order(n, q0),
        FormKind::Quadratic => go_order(n, t.witt_index as u64, q),
        FormKind::None => gl_order(n, q),
    }
}

/// Size of the orbit of a nondegenerate subspace `U` under the full isometry
/// group: `|I(V)| / (|I(U)| |I(U^⊥)|)`.
pub fn orbit_size_nondeg(spec: &MatGroupSpec, u: &Subspace) -> Result<BigUint> {
    let form = &spec.form;
    let tu = form.isometry_type(u)?;
    let tp = form.isometry_type(&form.perp(u))?;
    let whole = form.isometry_type(&Subspace::full(&spec.field, spec.d))?;
    let (q, q0) = (spec.q(), form.q0());
    let kind = form.kind;
    Ok(isometry_group_order(kind, &whole, q, q0)
        / (isometry_group_order(kind, &tu, q, q0) * isometry_group_order(kind, &tp, q, q0)))
}

/// Number of totally singular `k`-subspaces.
pub fn orbit_size_totsing(spec: &MatGroupSpec, k: usize) -> BigUint {
    let l = spec.d as u64 / 2;
    let k = k as u64;
    let (b, c, eta): (u64, u64, i64) = match spec.family {
        Family::Sp => (spec.q(), 1, 0),
        Family::OmegaPlus => (spec.q(), 1, -1),
        Family::OmegaOdd => (spec.q(), 1, 0),
        Family::OmegaMinus => (spec.q(), 1, 1),
        Family::SU => (spec.form.q0(), 2, if spec.d.is_multiple_of(2) { -1 } else { 1 }),
        _ => return gaussian_binomial(spec.d as u64, k, spec.q()),
    };
    let l = if spec.family == Family::OmegaMinus { l - 1 } else { l };
    if k > l {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        let e1 = c * (l - i);
        let e2 = (e1 as i64 + eta) as u64;
        num *= (pow(b, e1) - BigUint::one()) * (pow(b, e2) + BigUint::one());
        den *= pow(b, c * (i + 1)) - BigUint::one();
    }
    num / den
}

// ---------------------------------------------------------------------------
// Generating sets

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    /// Order of the action on `F_q^d` equals the group order.
    VectorAction,
    /// Order of the action on projective points equals `|G|/|Z(G)|`, so the
    /// generators together with the scalars give the group.
    ModuloScalars,
    /// Too large to certify here; the set is a standard root-element set.
    SmallCaseOnly,
}

#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub gens: Vec<Matrix>,
    pub certification: Certification,
}

static GEN_CACHE: Lazy<Mutex<HashMap<(Family, usize, u32), GeneratorSet>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// `x -> x + a [x, v] v`: a symplectic or unitary transvection.
pub fn form_transvection(form: &Form, v: &[Fe], a: Fe) -> Matrix {
    let f = &form.field;
    let d = form.d;
    Matrix::from_fn(f, d, d, |r, c| {
        // column c is the image of e_c
        let ec = unit_vector(d, c);
        let coef = f.mul(a, form.evaluate(&ec, v));
        let base = if r == c { Fe::ONE } else { Fe::ZERO };
        f.add(base, f.mul(coef, v[r]))
    })
}

/// Linear map with `e_c -> img(e_c)` given as a closure on basis vectors.
fn map_matrix(f: &Field, d: usize, img: impl Fn(&Vector) -> Vector) -> Matrix {
    let cols: Vec<Vector> = (0..d).map(|c| img(&unit_vector(d, c))).collect();
    Matrix::from_fn(f, d, d, |r, c| cols[c][r])
}

/// Reflection in a nonsingular vector of a quadratic space.
pub fn reflection(form: &Form, v: &[Fe]) -> Option<Matrix> {
    let f = &form.field;
    let qv = form.q_eval(v).ok()?;
    let inv = f.inv(qv).ok()?;
    Some(map_matrix(f, form.d, |x| {
        let c = f.mul(form.evaluate(x, v), inv);
        crate::linalg::vec_sub(f, x, &vec_scale(f, c, v))
    }))
}

/// Siegel transformation `x -> x + B(x,u) w - B(x,w) u - Q(w) B(x,u) u` for a
/// singular `u` and `w` perpendicular to `u`.
pub fn siegel(form: &Form, u: &[Fe], w: &[Fe]) -> Matrix {
    let f = &form.field;
    let qw = form.q_eval(w).unwrap();
    map_matrix(f, form.d, |x| {
        let bu = form.evaluate(x, u);
        let bw = form.evaluate(x, w);
        let mut y = vec_add(f, x, &vec_scale(f, bu, w));
        y = crate::linalg::vec_sub(f, &y, &vec_scale(f, bw, u));
        crate::linalg::vec_sub(f, &y, &vec_scale(f, f.mul(qw, bu), u))
    })
}

fn elementary(f: &Field, d: usize, i: usize, j: usize, a: Fe) -> Matrix {
    let mut m = Matrix::identity(f, d);
    m.set(i, j, a);
    m
}

fn random_vector(f: &Field, d: usize, rng: &mut ChaCha8Rng) -> Vector {
    loop {
        let v: Vector = (0..d).map(|_| Fe(rng.gen_range(0..f.q()))).collect();
        if !is_zero_vec(&v) {
            return v;
        }
    }
}

/// Deterministic root-element generators plus `extra` seeded random ones.
fn candidate_generators(spec: &MatGroupSpec, extra: usize, seed: u64) -> Vec<Matrix> {
    let f = &spec.field;
    let d = spec.d;
    let form = &spec.form;
    let basis = f.subfield_prime_basis(f.e()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gens = Vec::new();
    match spec.family {
        Family::SL | Family::GL => {
            for i in 0..d.saturating_sub(1) {
                for &w in &basis {
                    gens.push(elementary(f, d, i, i + 1, w));
                    gens.push(elementary(f, d, i + 1, i, w));
                }
            }
            if spec.family == Family::GL {
                let mut dg = vec![Fe::ONE; d];
                dg[0] = f.generator();
                gens.push(Matrix::diag(f, &dg));
            }
            for _ in 0..extra {
                let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
                if i != j {
                    gens.push(elementary(f, d, i, j, Fe(rng.gen_range(1..f.q()))));
                }
            }
        }
        Family::Sp => {
            for i in 0..d {
                for &w in &basis {
                    gens.push(form_transvection(form, &unit_vector(d, i), w));
                }
            }
            for i in 0..d.saturating_sub(2) {
                let v = vec_add(f, &unit_vector(d, i), &unit_vector(d, i + 2));
                gens.push(form_transvection(form, &v, Fe::ONE));
            }
            for _ in 0..extra {
                let v = random_vector(f, d, &mut rng);
                gens.push(form_transvection(form, &v, Fe::ONE));
            }
        }
        Family::SU => {
            // trace-zero multipliers a + σ(a) = 0, spanning over the fixed field
            let tz: Vec<Fe> = f.nonzero_elements().filter(|&a| f.add(a, form.sigma(a)).is_zero()).collect();
            let zeta_root = f
                .nonzero_elements()
                .find(|&z| f.mul(z, form.sigma(z)) == Fe::ONE && f.order(z) as u64 == form.q0() + 1)
                .unwrap();
            let c = f.mul(f.sub(zeta_root, Fe::ONE), f.inv(form.evaluate(&unit_vector(d, 0), &unit_vector(d, 0))).unwrap());
            gens.push(form_transvection(form, &unit_vector(d, 0), c));
            // isotropic vectors e_i + t e_j with t σ(t) = -1
            let t = f.nonzero_elements().find(|&t| f.mul(t, form.sigma(t)) == f.neg(Fe::ONE)).unwrap();
            for i in 0..d.saturating_sub(1) {
                let mut v = unit_vector(d, i);
                v[i + 1] = t;
                for &a in tz.iter().take(2) {
                    gens.push(form_transvection(form, &v, a));
                }
            }
            let mut added = 0;
            while added < extra {
                let v = random_vector(f, d, &mut rng);
                let n = form.evaluate(&v, &v);
                if n.is_zero() {
                    gens.push(form_transvection(form, &v, tz[rng.gen_range(0..tz.len())]));
                } else {
                    let z = f.nonzero_elements().filter(|&z| f.mul(z, form.sigma(z)) == Fe::ONE).nth(1).unwrap_or(Fe::ONE);
                    let c = f.mul(f.sub(z, Fe::ONE), f.inv(n).unwrap());
                    gens.push(form_transvection(form, &v, c));
                }
                added += 1;
            }
        }
        _ => {
            for i in 0..d {
                for j in i..d {
                    let v = if i == j { unit_vector(d, i) } else { vec_add(f, &unit_vector(d, i), &unit_vector(d, j)) };
                    if let Some(r) = reflection(form, &v) {
                        gens.push(r);
                        if gens.len() > 2 * d {
                            break;
                        }
                    }
                }
            }
            let wd = form.witt_decompose(None).unwrap();
            if let Some((x, _)) = wd.hyperbolic_pairs.first() {
                let perp = form.perp(&Subspace::span(f, d, std::slice::from_ref(x)));
                for w in perp.basis() {
                    for &a in &basis {
                        gens.push(siegel(form, x, &vec_scale(f, a, &w)));
                    }
                }
            }
            let mut added = 0;
            let mut tries = 0;
            while added < extra && tries < 10_000 {
                tries += 1;
                let v = random_vector(f, d, &mut rng);
                if let Some(r) = reflection(form, &v) {
                    gens.push(r);
                    added += 1;
                }
            }
        }
    }
    gens.retain(|g| !g.is_identity());
    gens.dedup();
    debug_assert!(gens.iter().all(|g| spec.contains(g)));
    gens
}

/// Permutations of the projective points induced by matrices.
pub fn matrices_on_points(gens: &[Matrix]) -> Result<(usize, Vec<Perm>)> {
    let f = gens[0].field();
    let d = gens[0].rows();
    let q = f.q();
    let points: Vec<Vector> = all_vectors(f, d).filter(|v| !is_zero_vec(v) && normalize(f, v) == *v).collect();
    let mut index: HashMap<u32, u32> = HashMap::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        index.insert(vector_code(p, q), i as u32);
    }
    let perms = gens
        .iter()
        .map(|g| {
            let img: Vec<u32> = points.iter().map(|p| index[&vector_code(&normalize(f, &g.mul_vec(p)), q)]).collect();
            Perm::from_images(img)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((points.len(), perms))
}

fn certify(spec: &MatGroupSpec, gens: &[Matrix], seed: u64) -> Option<Certification> {
    let qd = spec.q().checked_pow(spec.d as u32).unwrap_or(u64::MAX);
    if qd <= VECTOR_CERT_MAX {
        let perms: Vec<Perm> = gens.iter().map(|g| matrix_on_vectors(g).unwrap()).collect();
        let target = matrix_order(spec);
        StabilizerChain::try_known_order(qd as usize, &perms, &target, seed, 60).map(|_| Certification::VectorAction)
    } else if qd / (spec.q() - 1) <= POINT_CERT_MAX {
        let (n, perms) = matrices_on_points(gens).ok()?;
        let target = matrix_order(spec) / BigUint::from(scalar_count(spec));
        StabilizerChain::try_known_order(n, &perms, &target, seed, 60).map(|_| Certification::ModuloScalars)
    } else {
        Some(Certification::SmallCaseOnly)
    }
}

/// Generators of the group, certified by an order computation where the
/// natural module is small enough. Memoized per `(family, d, q)`.
pub fn generators(spec: &MatGroupSpec) -> Result<GeneratorSet> {
    let key = (spec.family, spec.d, spec.field.q());
    if let Some(g) = GEN_CACHE.lock().unwrap().get(&key) {
        return Ok(g.clone());
    }
    let mut extra = 0;
    let mut result = None;
    for round in 0..8u64 {
        let gens = candidate_generators(spec, extra, 1000 + round);
        if let Some(cert) = certify(spec, &gens, 7 + round) {
            result = Some(GeneratorSet { gens, certification: cert });
            break;
        }
        extra += 2;
    }
    let set = result.ok_or_else(|| Error::GenerationFailed(format!("no certified generating set for {}", spec.name())))?;
    GEN_CACHE.lock().unwrap().insert(key, set.clone());
    Ok(set)
}

// ---------------------------------------------------------------------------
// Auxiliary generating pairs

/// Two determinant-one matrices generating `SL(k,q)`, certified by the order
/// of their action on `F_q^k`.
pub fn sl_generating_pair(k: usize, field: &Field) -> Result<(Matrix, Matrix)> {
    let f = field;
    if k == 1 {
        return Ok((Matrix::identity(f, 1), Matrix::identity(f, 1)));
    }
    let q = f.q() as u64;
    let target = gl_order(k as u64, q) / BigUint::from(q - 1);
    let n = q.pow(k as u32);
    let check = |a: &Matrix, b: &Matrix, seed: u64| -> bool {
        if a.det() != Fe::ONE || b.det() != Fe::ONE {
            return false;
        }
        let perms = [matrix_on_vectors(a).unwrap(), matrix_on_vectors(b).unwrap()];
        StabilizerChain::try_known_order(n as usize, &perms, &target, seed, 40).is_some()
    };
    // signed cycle e_1 -> e_2 -> ... -> e_k -> ±e_1 with determinant one
    let sign = if k.is_multiple_of(2) { f.neg(Fe::ONE) } else { Fe::ONE };
    let cycle = Matrix::from_fn(f, k, k, |r, c| {
        if r == (c + 1) % k {
            if c == k - 1 {
                sign
            } else {
                Fe::ONE
            }
        } else {
            Fe::ZERO
        }
    });
    let mut candidates: Vec<(Matrix, Matrix)> = Vec::new();
    let t = elementary(f, k, 0, 1, Fe::ONE);
    candidates.push((t.clone(), cycle.clone()));
    let zeta = f.generator();
    let mut dg = vec![Fe::ONE; k];
    dg[0] = zeta;
    dg[1] = f.inv(zeta).unwrap();
    let h = Matrix::diag(f, &dg);
    candidates.push((h.mul(&t), cycle.clone()));
    candidates.push((t.clone(), cycle.mul(&h)));
    candidates.push((h.clone(), t.mul(&cycle)));
    for (i, (a, b)) in candidates.iter().enumerate() {
        if check(a, b, i as u64) {
            return Ok((a.clone(), b.clone()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for i in 0..200u64 {
        let a = random_sl(f, k, &mut rng);
        let b = random_sl(f, k, &mut rng);
        if check(&a, &b, 100 + i) {
            return Ok((a, b));
        }
    }
    Err(Error::GenerationFailed(format!("no generating pair for SL({k},{})", f.q())))
}

fn random_sl(f: &Field, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let mut m = Matrix::from_fn(f, k, k, |_, _| Fe(rng.gen_range(0..f.q())));
        let det = m.det();
        if det.is_zero() {
            continue;
        }
        let inv = f.inv(det).unwrap();
        for c in 0..k {
            let v = m.get(0, c);
            m.set(0, c, f.mul(inv, v));
        }
        return m;
    }
}

fn path_matrix(f: &Field, k: usize) -> Matrix {
    Matrix::from_fn(f, k, k, |r, c| if r + 1 == c || c + 1 == r { Fe::ONE } else { Fe::ZERO })
}

fn pair_search(
    f: &Field,
    k: usize,
    candidates: Vec<(Matrix, Matrix)>,
    symmetric: bool,
    what: &str,
) -> Result<(Matrix, Matrix)> {
    for (c, d) in candidates {
        if algebra_closure(f, k, &[c.clone(), d.clone()]).is_full() {
            return Ok((c, d));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..500 {
        let mut c = Matrix::from_fn(f, k, k, |_, _| Fe(rng.gen_range(0..f.q())));
        let mut d = Matrix::from_fn(f, k, k, |_, _| Fe(rng.gen_range(0..f.q())));
        if symmetric {
            c = c.add(&c.transpose());
            d = d.add(&d.transpose());
            if f.p() == 2 {
                // c + c^T has zero diagonal in characteristic 2; restore one
                let v = c.get(0, 0);
                c.set(0, 0, f.add(v, Fe::ONE));
            }
        }
        if algebra_closure(f, k, &[c.clone(), d.clone()]).is_full() {
            return Ok((c, d));
        }
    }
    Err(Error::GenerationFailed(format!("no {what} pair for k={k}, q={}", f.q())))
}

/// Symmetric `C, D` generating the full matrix algebra `M(k,q)`.
pub fn full_algebra_symmetric_pair(k: usize, field: &Field) -> Result<(Matrix, Matrix)> {
    let f = field;
    if k == 1 {
        return Ok((Matrix::identity(f, 1), Matrix::identity(f, 1)));
    }
    let e11 = Matrix::unit(f, k, 0, 0);
    let path = path_matrix(f, k);
    let mut dg = Matrix::zeros(f, k, k);
    for i in 0..k {
        dg.set(i, i, f.from_int(i as i64));
    }
    let candidates = vec![(e11.clone(), path.clone()), (dg, path.clone()), (e11.add(&path), path)];
    pair_search(f, k, candidates, true, "symmetric")
}

/// `φ, ψ` generating `M(k,q)` as an algebra.
pub fn endo_generating_pair(k: usize, field: &Field) -> Result<(Matrix, Matrix)> {
    let f = field;
    if k == 1 {
        return Ok((Matrix::identity(f, 1), Matrix::identity(f, 1)));
    }
    let cyc = Matrix::from_fn(f, k, k, |r, c| if r == (c + 1) % k { Fe::ONE } else { Fe::ZERO });
    let e11 = Matrix::unit(f, k, 0, 0);
    let shift = Matrix::from_fn(f, k, k, |r, c| if c == r + 1 { Fe::ONE } else { Fe::ZERO });
    let candidates = vec![(cyc, e11.clone()), (shift.add(&shift.transpose()), e11)];
    pair_search(f, k, candidates, false, "endomorphism")
}

/// `t` of the order estimate `|G| > q^(d^2/t - d)`: 1 for linear groups,
/// 2 otherwise.
pub fn order_exponent_t(family: Family) -> u64 {
    match family {
        Family::SL | Family::GL => 1,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgrp::{induce_subspace_orbit, schreier_sims};

    fn spec(f: Family, d: usize, q: u64) -> MatGroupSpec {
        MatGroupSpec::of_order(f, d, q).unwrap()
    }

    #[test]
    fn order_formulas() {
        let s = spec(Family::SL, 2, 3);
        assert_eq!(matrix_order(&s), BigUint::from(24u32));
        assert_eq!(matrix_order(&spec(Family::Sp, 2, 2)), BigUint::from(6u32));
        assert_eq!(matrix_order(&spec(Family::SL, 2, 2)), BigUint::from(6u32));
        assert_eq!(matrix_order(&spec(Family::OmegaPlus, 2, 3)), BigUint::from(4u32));
        assert_eq!(matrix_order(&spec(Family::OmegaMinus, 2, 3)), BigUint::from(8u32));
        assert_eq!(matrix_order(&spec(Family::SU, 2, 4)), BigUint::from(18u32));
        assert_eq!(matrix_order(&spec(Family::OmegaOdd, 3, 3)), BigUint::from(48u32));
        let (o, l) = order(&spec(Family::SL, 2, 3));
        assert_eq!(o, BigUint::from(12u32));
        assert!((l - 12f64.log2()).abs() < 1e-9);
    }

    fn brute_count(s: &MatGroupSpec) -> usize {
        let d = s.d;
        all_vectors(&s.field, d * d)
            .filter(|data| {
                let m = Matrix::from_fn(&s.field, d, d, |r, c| data[r * d + c]);
                s.contains(&m)
            })
            .count()
    }

    #[test]
    fn orders_match_brute_force_membership() {
        for s in [
            spec(Family::SL, 2, 3),
            spec(Family::Sp, 2, 2),
            spec(Family::SU, 2, 4),
            spec(Family::OmegaPlus, 2, 5),
            spec(Family::OmegaMinus, 2, 5),
            spec(Family::OmegaOdd, 3, 3),
            spec(Family::SL, 3, 2),
            spec(Family::OmegaMinus, 4, 2),
        ] {
            assert_eq!(BigUint::from(brute_count(&s)), matrix_order(&s), "{}", s.name());
        }
    }

    #[test]
    fn generators_are_members_and_certified() {
        for (fam, d, q) in [
            (Family::SL, 2, 2),
            (Family::SL, 3, 4),
            (Family::GL, 3, 3),
            (Family::Sp, 4, 3),
            (Family::Sp, 6, 2),
            (Family::SU, 3, 4),
            (Family::SU, 4, 4),
            (Family::OmegaPlus, 4, 2),
            (Family::OmegaPlus, 4, 3),
            (Family::OmegaMinus, 4, 3),
            (Family::OmegaMinus, 6, 2),
            (Family::OmegaOdd, 5, 3),
        ] {
            let s = spec(fam, d, q);
            let g = generators(&s).unwrap();
            assert!(g.gens.iter().all(|m| s.contains(m)), "{}", s.name());
            assert_eq!(g.certification, Certification::VectorAction, "{}", s.name());
        }
        // closure of SL(2,2) generators by brute force
        let s = spec(Family::SL, 2, 2);
        let g = generators(&s).unwrap();
        let perms: Vec<Perm> = g.gens.iter().map(|m| matrix_on_vectors(m).unwrap()).collect();
        let c = schreier_sims(&crate::permgrp::PermGroupSpec::new(4, perms, "SL(2,2)")).unwrap();
        assert_eq!(c.order(), BigUint::from(6u32));
    }

    #[test]
    fn sp2_equals_sl2() {
        for q in [2u64, 3, 4] {
            let sp = generators(&spec(Family::Sp, 2, q)).unwrap();
            let sl = spec(Family::SL, 2, q);
            assert!(sp.gens.iter().all(|m| sl.contains(m)));
            assert_eq!(matrix_order(&spec(Family::Sp, 2, q)), matrix_order(&sl));
        }
    }

    #[test]
    fn order_lower_estimate() {
        for fam in [Family::SL, Family::Sp, Family::SU, Family::OmegaPlus, Family::OmegaMinus, Family::OmegaOdd] {
            for d in 2..=8usize {
                for q in [2u64, 3, 4, 5] {
                    let Ok(s) = MatGroupSpec::of_order(fam, d, q) else { continue };
                    let t = order_exponent_t(fam);
                    let qf = q as f64;
                    let (_, l) = order(&s);
                    let rhs = ((d * d) as f64 / t as f64 - d as f64) * qf.log2();
                    assert!(l > rhs, "{} {l} {rhs}", s.name());
                }
            }
        }
    }

    #[test]
    fn sl_pairs() {
        let f3 = Field::new(3, 1).unwrap();
        let (a, b) = sl_generating_pair(1, &f3).unwrap();
        assert!(a.is_identity() && b.is_identity());
        for (k, q) in [(2usize, 2u64), (2, 3), (3, 2), (2, 4), (3, 3), (4, 2), (2, 5)] {
            let f = Field::of_order(q).unwrap();
            let (a, b) = sl_generating_pair(k, &f).unwrap();
            assert_eq!((a.det(), b.det()), (Fe::ONE, Fe::ONE));
            let perms = vec![matrix_on_vectors(&a).unwrap(), matrix_on_vectors(&b).unwrap()];
            let c = schreier_sims(&crate::permgrp::PermGroupSpec::new(perms[0].degree(), perms, "pair")).unwrap();
            assert_eq!(c.order(), gl_order(k as u64, q) / BigUint::from(q - 1));
        }
    }

    #[test]
    fn algebra_pairs() {
        let f3 = Field::new(3, 1).unwrap();
        let (c, d) = full_algebra_symmetric_pair(3, &f3).unwrap();
        assert_eq!(c, Matrix::unit(&f3, 3, 0, 0));
        assert!(c.is_symmetric() && d.is_symmetric());
        for q in [2u64, 3, 4, 5] {
            let f = Field::of_order(q).unwrap();
            for k in 1..=4 {
                let (c, d) = full_algebra_symmetric_pair(k, &f).unwrap();
                assert!(c.is_symmetric() && d.is_symmetric());
                assert_eq!(algebra_closure(&f, k, &[c, d]).dim(), k * k);
                let (a, b) = endo_generating_pair(k, &f).unwrap();
                assert_eq!(algebra_closure(&f, k, &[a, b]).dim(), k * k);
            }
        }
        let f2 = Field::new(2, 1).unwrap();
        let (a, b) = endo_generating_pair(2, &f2).unwrap();
        assert_eq!(a, Matrix::from_ints(&f2, &[&[0, 1], &[1, 0]]));
        assert_eq!(b, Matrix::unit(&f2, 2, 0, 0));
    }

    #[test]
    fn orbit_sizes_match_enumeration() {
        use crate::linalg::unit_vector;
        // totally singular spaces
        for (fam, d, q, k) in [
            (Family::Sp, 4, 2, 1),
            (Family::Sp, 4, 3, 2),
            (Family::OmegaPlus, 6, 2, 2),
            (Family::OmegaMinus, 6, 2, 2),
            (Family::OmegaOdd, 5, 3, 2),
            (Family::SU, 4, 4, 2),
            (Family::SU, 5, 4, 2),
            (Family::SU, 3, 4, 1),
        ] {
            let s = spec(fam, d, q);
            let gens = generators(&s).unwrap().gens;
            let wd = s.form.witt_decompose(None).unwrap();
            let xs: Vec<Vector> = wd.hyperbolic_pairs.iter().take(k).map(|p| p.0.clone()).collect();
            let seed = Subspace::span(&s.field, d, &xs);
            let ind = induce_subspace_orbit(&gens, &seed, 100_000).unwrap();
            assert_eq!(BigUint::from(ind.group.degree), orbit_size_totsing(&s, k), "{}", s.name());
        }
        // nondegenerate spaces
        for (fam, d, q, vecs) in [
            (Family::Sp, 4, 3, vec![0usize, 1]),
            (Family::OmegaOdd, 3, 3, vec![2]),
            (Family::OmegaPlus, 4, 3, vec![3]),
            (Family::SU, 3, 4, vec![0]),
        ] {
            let s = spec(fam, d, q);
            let gens = generators(&s).unwrap().gens;
            let f = &s.field;
            let mut basis: Vec<Vector> = vecs.iter().map(|&i| unit_vector(d, i)).collect();
            if fam == Family::OmegaPlus {
                // e_2 + e_3 is nonsingular in the second hyperbolic plane
                basis = vec![vec_add(f, &unit_vector(d, 2), &unit_vector(d, 3))];
            }
            let u = Subspace::span(f, d, &basis);
            let ind = induce_subspace_orbit(&gens, &u, 100_000).unwrap();
            assert_eq!(BigUint::from(ind.group.degree), orbit_size_nondeg(&s, &u).unwrap(), "{}", s.name());
        }
        assert_eq!(gaussian_binomial(3, 1, 2), BigUint::from(7u32));
        assert_eq!(gaussian_binomial(4, 2, 2), BigUint::from(35u32));
    }
}
