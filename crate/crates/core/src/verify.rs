//! Certification of base candidates by engines that share no code with the
//! constructions: membership-pattern cells for subsets, stabilizing
//! algebras and unit enumeration for subspaces and vectors, stabilizer
//! chains for everything that can be induced.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::classical::{self, Family, MatGroupSpec};
use crate::error::{Error, Result};
use crate::forms::{Form, FormKind};
use crate::gf::{Fe, Field};
use crate::linalg::{
    all_vectors, is_zero_vec, lin_comb, solve_linear, stabilizing_algebra_in, LinearSolution, Matrix, MatrixAlgebra,
    Subspace, Vector,
};
use crate::permgrp::{
    partition_image, pointwise_stabilizer, stabilizer_of_objects, subset_image, PartitionCode, Perm, PermGroupSpec,
    StabilizerChain, INDUCED_DEGREE_CAP,
};

/// Largest number of algebra elements enumerated in tier 2.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Status {
    StrongBase,
    GroupBase,
    AltOnlyBase,
    NotABase,
    Inconclusive(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CellOracle,
    StabilizingAlgebra,
    UnitEnumeration,
    StabilizerChain,
    SpanCheck,
    SubfieldSolve,
    TensorSolve,
    PartitionSearch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Witness {
    /// Permutation in 1-indexed cycle notation.
    Permutation(String),
    /// Matrix rows as field-element codes.
    Matrix(Vec<Vec<u32>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseCertificate {
    #[serde(flatten)]
    pub status: Status,
    pub method: Method,
    pub witness: Option<Witness>,
    pub algebra_dim: Option<usize>,
    /// Order of the pointwise stabilizer, when computed.
    pub stabilizer_order: Option<String>,
}

impl BaseCertificate {
    fn new(status: Status, method: Method) -> BaseCertificate {
        BaseCertificate { status, method, witness: None, algebra_dim: None, stabilizer_order: None }
    }

    /// Base for the group (strong bases included).
    pub fn is_base(&self) -> bool {
        matches!(self.status, Status::StrongBase | Status::GroupBase)
    }

    pub fn is_not_a_base(&self) -> bool {
        self.status == Status::NotABase
    }
}

fn matrix_witness(m: &Matrix) -> Witness {
    Witness::Matrix(m.row_vecs().iter().map(|r| r.iter().map(|x| x.0).collect()).collect())
}

fn perm_witness(p: &Perm) -> Witness {
    Witness::Permutation(p.to_cycles())
}

// ---------------------------------------------------------------------------
// Subsets

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymOrAlt {
    Sym,
    Alt,
}

/// Cells of points with equal membership patterns; points are `0..m`.
pub fn membership_cells(m: usize, sets: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut by_pattern: HashMap<Vec<bool>, Vec<u32>> = HashMap::new();
    for x in 0..m as u32 {
        let pat: Vec<bool> = sets.iter().map(|s| s.contains(&x)).collect();
        by_pattern.entry(pat).or_default().push(x);
    }
    let mut cells: Vec<Vec<u32>> = by_pattern.into_values().collect();
    cells.sort();
    cells
}

/// Subsets are 0-indexed point lists.
pub fn verify_subset_base(m: usize, sets: &[Vec<u32>], group: SymOrAlt) -> Result<BaseCertificate> {
    if let Some(x) = sets.iter().flatten().find(|&&x| x as usize >= m) {
        return Err(Error::InvalidParameters(format!("point {x} outside 0..{m}")));
    }
    let cells = membership_cells(m, sets);
    let big: Vec<&Vec<u32>> = cells.iter().filter(|c| c.len() > 1).collect();
    let mut cert = BaseCertificate::new(Status::GroupBase, Method::CellOracle);
    if big.is_empty() {
        return Ok(cert);
    }
    let witness = match group {
        SymOrAlt::Sym => Some(Perm::from_cycle_list(m, &[vec![big[0][0], big[0][1]]])?),
        SymOrAlt::Alt => {
            if big.len() == 1 && big[0].len() == 2 {
                cert.status = Status::AltOnlyBase;
                None
            } else if big[0].len() >= 3 {
                Some(Perm::from_cycle_list(m, &[big[0][..3].to_vec()])?)
            } else {
                Some(Perm::from_cycle_list(m, &[big[0].clone(), big[1][..2].to_vec()])?)
            }
        }
    };
    if let Some(w) = witness {
        debug_assert!(sets.iter().all(|s| subset_image(s, &w) == sorted(s)));
        cert.status = Status::NotABase;
        cert.witness = Some(perm_witness(&w));
    }
    Ok(cert)
}

fn sorted(s: &[u32]) -> Vec<u32> {
    let mut v = s.to_vec();
    v.sort();
    v
}

// ---------------------------------------------------------------------------
// Generic permutation groups

/// Pointwise stabilizer of `points` in the group; `order` speeds up the
/// chain when known.
pub fn verify_generic(g: &PermGroupSpec, order: Option<&BigUint>, points: &[u32]) -> Result<BaseCertificate> {
    if g.degree as u64 > INDUCED_DEGREE_CAP.max(crate::permgrp::NATURAL_DEGREE_CAP) {
        return Err(Error::DegreeCapExceeded(g.degree as u64, crate::permgrp::NATURAL_DEGREE_CAP));
    }
    let chain = match order {
        Some(o) => StabilizerChain::with_known_order(g.degree, &g.generators, &[], o, 3)?,
        None => StabilizerChain::from_spec(g)?,
    };
    verify_with_chain(&chain, points)
}

pub fn verify_with_chain(chain: &StabilizerChain, points: &[u32]) -> Result<BaseCertificate> {
    let ps = pointwise_stabilizer(chain, points)?;
    let mut cert = BaseCertificate::new(Status::GroupBase, Method::StabilizerChain);
    cert.stabilizer_order = Some(ps.order.to_string());
    if !ps.order.is_one() {
        let w = ps
            .group
            .generators
            .iter()
            .find(|g| !g.is_identity())
            .cloned()
            .ok_or_else(|| Error::GenerationFailed("nontrivial stabilizer without a generator".into()))?;
        debug_assert!(points.iter().all(|&p| w.image(p) == p));
        cert.status = Status::NotABase;
        cert.witness = Some(perm_witness(&w));
    }
    Ok(cert)
}

// ---------------------------------------------------------------------------
// Partitions

/// Generators of the stabilizer in `Sym(ab)` of the partition into
/// consecutive blocks of size `b`, with its order.
fn block_stabilizer(a: usize, b: usize) -> (Vec<Perm>, BigUint) {
    let m = a * b;
    let mut gens = Vec::new();
    for blk in 0..a {
        let o = (blk * b) as u32;
        if b >= 2 {
            gens.push(Perm::from_cycle_list(m, &[vec![o, o + 1]]).unwrap());
            gens.push(Perm::from_cycle_list(m, &[(o..o + b as u32).collect()]).unwrap());
        }
    }
    if a >= 2 {
        let swap: Vec<Vec<u32>> = (0..b as u32).map(|i| vec![i, b as u32 + i]).collect();
        gens.push(Perm::from_cycle_list(m, &swap).unwrap());
        let cyc: Vec<Vec<u32>> = (0..b as u32).map(|i| (0..a as u32).map(|j| j * b as u32 + i).collect()).collect();
        gens.push(Perm::from_cycle_list(m, &cyc).unwrap());
    }
    let fb = crate::bounds::factorial(b as u64);
    (gens, fb.pow(a as u32) * crate::bounds::factorial(a as u64))
}

/// Chain of `Sym(ab)_{P_1, ..., P_t}` computed without listing the
/// partition domain.
pub fn partition_family_stabilizer(a: usize, b: usize, parts: &[PartitionCode], seed: u64) -> Result<StabilizerChain> {
    let m = a * b;
    if parts.is_empty() {
        let s = PermGroupSpec::symmetric(m);
        return StabilizerChain::with_known_order(m, &s.generators, &[], &crate::bounds::factorial(m as u64), seed);
    }
    // conjugate the block stabilizer onto the first partition
    let (gens, order) = block_stabilizer(a, b);
    let first = &parts[0];
    let mut to: Vec<u32> = Vec::with_capacity(m);
    for part in crate::permgrp::partition_parts(first) {
        to.extend(part);
    }
    let pi = Perm::from_images(to)?;
    let pinv = pi.inverse();
    let conj: Vec<Perm> = gens.iter().map(|g| pinv.then(g).then(&pi)).collect();
    let h = StabilizerChain::with_known_order(m, &conj, &[], &order, seed)?;
    stabilizer_of_objects(&h, &parts[1..], |p, g| partition_image(p, g), seed ^ 0x9e37)
}

/// Order of the permutation group induced by `Sym(ab)` on partitions. The
/// action is faithful except for `(2,2)`, where the Klein four-group acts
/// trivially.
pub fn partition_action_order(a: usize, b: usize) -> BigUint {
    let full = crate::bounds::factorial((a * b) as u64);
    if (a, b) == (2, 2) {
        full / BigUint::from(4u32)
    } else {
        full
    }
}

/// Partitions given as labels `0..a` per point. Uses the induced action
/// when its degree is within `degree_cap`, otherwise the lazy chain.
pub fn verify_partition_base(a: usize, b: usize, parts: &[PartitionCode], degree_cap: u64) -> Result<BaseCertificate> {
    let m = a * b;
    for p in parts {
        if p.len() != m {
            return Err(Error::DimensionMismatch("partition length must be a*b".into()));
        }
    }
    let parts: Vec<PartitionCode> = parts.iter().map(|p| crate::permgrp::normalize_partition(p)).collect();
    let n = crate::bounds::partition_count(a as u64, b as u64);
    if n <= BigUint::from(degree_cap.min(INDUCED_DEGREE_CAP)) || (a, b) == (2, 2) {
        let ind = crate::permgrp::induce_partitions(&PermGroupSpec::symmetric(m), a, b)?;
        let pts: Vec<u32> = parts.iter().map(|p| ind.point_of(p).unwrap()).collect();
        return verify_generic(&ind.group, Some(&partition_action_order(a, b)), &pts);
    }
    let chain = partition_family_stabilizer(a, b, &parts, 11)?;
    let mut cert = BaseCertificate::new(Status::GroupBase, Method::StabilizerChain);
    cert.stabilizer_order = Some(chain.order().to_string());
    if !chain.order().is_one() {
        let w = chain.strong_generators().iter().find(|g| !g.is_identity()).cloned().unwrap();
        cert.status = Status::NotABase;
        cert.witness = Some(perm_witness(&w));
    }
    Ok(cert)
}

// ---------------------------------------------------------------------------
// Subspaces

/// Scalars of the group fixing everything are ignored: triviality means
/// "scalar".
pub fn verify_subspace_base(spec: &MatGroupSpec, subspaces: &[Subspace], enum_cap: u64) -> Result<BaseCertificate> {
    for u in subspaces {
        if u.ambient_dim() != spec.d || u.field() != &spec.field {
            return Err(Error::DimensionMismatch("subspace outside the natural module".into()));
        }
    }
    let alg = stabilizing_algebra_in(&spec.field, spec.d, subspaces)?;
    let s = alg.dim();
    if s == 1 {
        let mut c = BaseCertificate::new(Status::StrongBase, Method::StabilizingAlgebra);
        c.algebra_dim = Some(1);
        return Ok(c);
    }
    let mut c = unit_search(spec, &alg, enum_cap, |g| g.as_scalar().is_some());
    c.algebra_dim = Some(s);
    Ok(c)
}

/// Tier 2: the elements of `alg` lying in the group, found column by
/// column. Column `j` of `g = Σ c_i B_i` is linear in `c`; each choice of
/// its value fixes `c` on a subspace, and the form conditions
/// `[g e_i, g e_j] = [e_i, e_j]`, `Q(g e_j) = Q(e_j)` prune as soon as a
/// column is chosen. Reports the first non-trivial element as a witness.
/// `enum_cap` bounds the number of search nodes.
fn unit_search(spec: &MatGroupSpec, alg: &MatrixAlgebra, enum_cap: u64, trivial: impl Fn(&Matrix) -> bool) -> BaseCertificate {
    let mut search = UnitSearch { spec, alg, cols: Vec::new(), nodes: 0, cap: enum_cap };
    let s = alg.dim();
    let f = &spec.field;
    let identity: Vec<Vector> = (0..s).map(|i| crate::linalg::unit_vector(s, i)).collect();
    match search.descend(0, vec![Fe::ZERO; s], identity, &trivial) {
        Ok(None) => BaseCertificate::new(Status::GroupBase, Method::UnitEnumeration),
        Ok(Some(g)) => {
            let mut cert = BaseCertificate::new(Status::NotABase, Method::UnitEnumeration);
            cert.witness = Some(matrix_witness(&g));
            cert
        }
        Err(()) => BaseCertificate::new(
            Status::Inconclusive(format!("unit search over the algebra of dimension {s} (q = {}) exceeded {enum_cap} nodes", f.q())),
            Method::UnitEnumeration,
        ),
    }
}

struct UnitSearch<'a> {
    spec: &'a MatGroupSpec,
    alg: &'a MatrixAlgebra,
    /// Columns chosen so far.
    cols: Vec<Vector>,
    nodes: u64,
    cap: u64,
}

impl UnitSearch<'_> {
    /// `c = c0 + Σ t_l k_l` with `k_l` the columns of `kern`.
    fn descend(
        &mut self,
        j: usize,
        c0: Vector,
        kern: Vec<Vector>,
        trivial: &impl Fn(&Matrix) -> bool,
    ) -> std::result::Result<Option<Matrix>, ()> {
        let spec = self.spec;
        let f = &spec.field;
        let d = spec.d;
        if j == d {
            if !kern.is_empty() {
                return self.leaves(&c0, &kern, trivial);
            }
            let g = self.alg.element(&c0);
            return Ok((!trivial(&g) && !g.det().is_zero() && spec.contains(&g)).then_some(g));
        }
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(());
        }
        // column j as an affine function of t
        let col_of = |c: &[Fe]| -> Vector {
            let mut v = vec![Fe::ZERO; d];
            for (ci, b) in c.iter().zip(&self.alg.basis) {
                if ci.is_zero() {
                    continue;
                }
                for (r, x) in v.iter_mut().enumerate() {
                    *x = f.add(*x, f.mul(*ci, b.get(r, j)));
                }
            }
            v
        };
        let base = col_of(&c0);
        let images: Vec<Vector> = kern.iter().map(|k| col_of(k)).collect();
        let a = Matrix::from_fn(f, d, kern.len(), |r, l| images[l][r]);
        let (_, rank, pivots) = a.rref();
        let null: Vec<Vector> = a.kernel();
        let next_kern: Vec<Vector> = null.iter().map(|t| lin_comb(f, t, &kern, self.alg.dim())).collect();
        let form = &spec.form;
        let checks_form = form.kind != FormKind::None;
        for u in all_vectors(f, rank) {
            let mut v = base.clone();
            let mut c = c0.clone();
            for (l, &ul) in u.iter().enumerate() {
                if ul.is_zero() {
                    continue;
                }
                let p = pivots[l];
                for (x, y) in v.iter_mut().zip(&images[p]) {
                    *x = f.add(*x, f.mul(ul, *y));
                }
                for (x, y) in c.iter_mut().zip(&kern[p]) {
                    *x = f.add(*x, f.mul(ul, *y));
                }
            }
            if is_zero_vec(&v) {
                continue;
            }
            if checks_form {
                if form.evaluate(&v, &v) != form.gram.get(j, j) {
                    continue;
                }
                if form.kind == FormKind::Quadratic && form.q_eval(&v).ok() != Some(form.quad_coeff(j, j)) {
                    continue;
                }
                let ok = self
                    .cols
                    .iter()
                    .enumerate()
                    .all(|(i, w)| form.evaluate(w, &v) == form.gram.get(i, j) && form.evaluate(&v, w) == form.gram.get(j, i));
                if !ok {
                    continue;
                }
            }
            self.cols.push(v);
            let r = self.descend(j + 1, c, next_kern.clone(), trivial);
            self.cols.pop();
            if let Some(g) = r? {
                return Ok(Some(g));
            }
        }
        Ok(None)
    }

    /// Remaining free coefficients after all columns are fixed (only when
    /// the algebra basis is dependent); enumerated directly.
    fn leaves(&mut self, c0: &[Fe], kern: &[Vector], trivial: &impl Fn(&Matrix) -> bool) -> std::result::Result<Option<Matrix>, ()> {
        let f = &self.spec.field;
        for t in all_vectors(f, kern.len()) {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(());
            }
            let c: Vector = lin_comb(f, &t, kern, c0.len()).iter().zip(c0).map(|(a, b)| f.add(*a, *b)).collect();
            let g = self.alg.element(&c);
            if !trivial(&g) && !g.det().is_zero() && self.spec.contains(&g) {
                return Ok(Some(g));
            }
        }
        Ok(None)
    }
}

/// The same question answered by a stabilizer chain on the induced orbit of
/// the first subspace. All subspaces must lie in that orbit.
pub fn verify_subspace_base_induced(spec: &MatGroupSpec, subspaces: &[Subspace], cap: u64) -> Result<BaseCertificate> {
    let first = subspaces.first().ok_or(Error::EmptyInput)?;
    let gens = classical::generators(spec)?;
    let ind = crate::permgrp::induce_subspace_orbit(&gens.gens, first, cap)?;
    let mut pts = Vec::new();
    for u in subspaces {
        pts.push(ind.point_of(u).ok_or_else(|| Error::OrbitNotClosed("subspace outside the orbit of the first".into()))?);
    }
    let chain = if gens.certification == classical::Certification::SmallCaseOnly {
        StabilizerChain::from_spec(&ind.group)?
    } else {
        let order = classical::matrix_order(spec) / BigUint::from(spec.scalars().len());
        StabilizerChain::with_known_order(ind.group.degree, &ind.group.generators, &[], &order, 5)?
    };
    verify_with_chain(&chain, &pts)
}

// ---------------------------------------------------------------------------
// Vectors

/// Base for the group acting on vectors: triviality means "identity".
pub fn verify_vector_base(spec: &MatGroupSpec, vectors: &[Vector], enum_cap: u64) -> Result<BaseCertificate> {
    let f = &spec.field;
    let d = spec.d;
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch("vector length".into()));
    }
    let span = Subspace::span(f, d, vectors);
    if span.dim() == d {
        return Ok(BaseCertificate::new(Status::StrongBase, Method::SpanCheck));
    }
    if spec.family == Family::Sp && span.dim() == d - 1 {
        let a = symplectic_insufficiency_witness(&span, &spec.form)?;
        let mut c = BaseCertificate::new(Status::NotABase, Method::SpanCheck);
        c.witness = Some(matrix_witness(&a));
        return Ok(c);
    }
    // g = I + N with N v = 0 for every v in the span
    let ann = Matrix::from_rows(f, d, &span.basis()).kernel();
    let mut basis = Vec::new();
    for r in 0..d {
        for w in &ann {
            let mut n = Matrix::zeros(f, d, d);
            for c in 0..d {
                n.set(r, c, w[c]);
            }
            basis.push(n);
        }
    }
    let s = basis.len();
    let total = (f.q() as u64).checked_pow(s as u32);
    if total.is_none_or(|t| t > enum_cap) {
        let mut c = BaseCertificate::new(
            Status::Inconclusive(format!("solution space dimension {s} exceeds the enumeration cap")),
            Method::UnitEnumeration,
        );
        c.algebra_dim = Some(s);
        return Ok(c);
    }
    let id = Matrix::identity(f, d);
    for c in all_vectors(f, s).skip(1) {
        let mut g = id.clone();
        for (ci, b) in c.iter().zip(&basis) {
            if !ci.is_zero() {
                g = g.add(&b.scale(*ci));
            }
        }
        if !g.det().is_zero() && spec.contains(&g) {
            let mut cert = BaseCertificate::new(Status::NotABase, Method::UnitEnumeration);
            cert.witness = Some(matrix_witness(&g));
            cert.algebra_dim = Some(s);
            return Ok(cert);
        }
    }
    let mut cert = BaseCertificate::new(Status::GroupBase, Method::UnitEnumeration);
    cert.algebra_dim = Some(s);
    Ok(cert)
}

/// For a hyperplane `U` of a symplectic space, the transvection
/// `v -> v + ([v,x]/[y,x]) x` with `<x> = U^⊥` and any `y` outside `U`. It
/// fixes `U` pointwise and maps `y` to `y + x`.
pub fn symplectic_insufficiency_witness(u: &Subspace, form: &Form) -> Result<Matrix> {
    let f = &form.field;
    let d = form.d;
    if form.kind != FormKind::Symplectic {
        return Err(Error::KindMismatch("symplectic".into()));
    }
    if u.dim() + 1 != d {
        return Err(Error::DimensionMismatch("U must be a hyperplane".into()));
    }
    let perp = form.perp(u);
    let rad = u.intersect(&perp)?;
    if rad.dim() != 1 {
        return Err(Error::RadicalNotFound);
    }
    let x = rad.basis().remove(0);
    let y = (0..d).map(|i| crate::linalg::unit_vector(d, i)).find(|e| !u.contains(e)).unwrap();
    let yx = f.inv(form.evaluate(&y, &x)).map_err(|_| Error::RadicalNotFound)?;
    let a = Matrix::from_fn(f, d, d, |r, c| {
        let e = crate::linalg::unit_vector(d, c);
        let coef = f.mul(form.evaluate(&e, &x), yx);
        let base = if r == c { Fe::ONE } else { Fe::ZERO };
        f.add(base, f.mul(coef, x[r]))
    });
    debug_assert!(form.preserves(&a) && !a.is_identity());
    debug_assert!(u.basis().iter().all(|b| a.mul_vec(b) == *b));
    Ok(a)
}

/// Base check for `GL_d(q0)` inside `GL_d(q)`, `q = q0^r`: only the
/// identity of `GL_d(q0)` fixes all vectors exactly when their coordinate
/// vectors over `F_q0` span `F_q0^d`. Returns the certificate and that rank.
pub fn verify_subfield_vectors(field: &Field, r: u32, vectors: &[Vector]) -> Result<BaseCertificate> {
    let f = field;
    if r == 0 || !f.e().is_multiple_of(r) {
        return Err(Error::NotADivisor(r, f.e()));
    }
    let d = vectors.first().map_or(0, |v| v.len());
    let sub_deg = f.e() / r;
    let lambdas = f.basis_over_subfield(r)?;
    // coordinates of each field element over the lambda basis, found by a
    // lookup over all F_q0-combinations
    let sub = f.subfield_elements(sub_deg)?;
    let mut coords: HashMap<Fe, Vec<Fe>> = HashMap::new();
    for c in all_vectors(f, r as usize) {
        if c.iter().all(|x| sub.contains(x)) {
            let v = c.iter().zip(&lambdas).fold(Fe::ZERO, |acc, (&ci, &l)| f.add(acc, f.mul(ci, l)));
            coords.insert(v, c);
        }
    }
    let mut rows: Vec<Vector> = Vec::new();
    for v in vectors {
        for j in 0..r as usize {
            rows.push(v.iter().map(|x| coords[x][j]).collect());
        }
    }
    let rank = Subspace::span(f, d, &rows).dim();
    let mut c = BaseCertificate::new(if rank == d { Status::GroupBase } else { Status::NotABase }, Method::SubfieldSolve);
    c.algebra_dim = Some(d - rank);
    if rank < d {
        // a non-identity F_q0-matrix fixing all components: I + w z^T with
        // z orthogonal to every row and w an F_q0 vector
        let m = Matrix::from_rows(f, d, &rows);
        let z = m.kernel().into_iter().find(|k| k.iter().all(|x| sub.contains(x)));
        if let Some(z) = z {
            let g = Matrix::from_fn(f, d, d, |i, j| {
                let base = if i == j { Fe::ONE } else { Fe::ZERO };
                if i == 0 {
                    f.add(base, z[j])
                } else {
                    base
                }
            });
            if !g.det().is_zero() {
                c.witness = Some(matrix_witness(&g));
            }
        }
    }
    Ok(c)
}

/// Exhaustive check over `GL(n1,q) x GL(n2,q)` acting on `V1 ⊗ V2` (vector
/// index `a*n2 + b` for `x_a ⊗ y_b`): the only `h1 ⊗ h2` fixing every vector
/// is the identity. For each `h1` the condition on `h2` is linear.
pub fn verify_tensor_base(field: &Field, n1: usize, n2: usize, vectors: &[Vector], enum_cap: u64) -> Result<BaseCertificate> {
    let f = field;
    let q = f.q() as u64;
    let gl1 = q.checked_pow((n1 * n1) as u32).filter(|&t| t <= enum_cap);
    let Some(_) = gl1 else {
        return Ok(BaseCertificate::new(Status::Inconclusive("GL(n1,q) too large to enumerate".into()), Method::TensorSolve));
    };
    if vectors.iter().any(|v| v.len() != n1 * n2) {
        return Err(Error::DimensionMismatch("tensor vector length".into()));
    }
    for h1d in all_vectors(f, n1 * n1) {
        let h1 = Matrix::from_fn(f, n1, n1, |r, c| h1d[r * n1 + c]);
        if h1.det().is_zero() {
            continue;
        }
        // unknown h2 (n2*n2 entries, row-major); X -> h1 X h2^T must fix X
        let mut eqs: Vec<Vector> = Vec::new();
        let mut rhs: Vec<Fe> = Vec::new();
        for v in vectors {
            let x = Matrix::from_fn(f, n1, n2, |a, b| v[a * n2 + b]);
            let hx = h1.mul(&x);
            for a in 0..n1 {
                for b in 0..n2 {
                    // (h1 X h2^T)_{ab} = sum_c (h1 X)_{ac} h2_{bc}
                    let mut row = vec![Fe::ZERO; n2 * n2];
                    for c in 0..n2 {
                        row[b * n2 + c] = hx.get(a, c);
                    }
                    eqs.push(row);
                    rhs.push(x.get(a, b));
                }
            }
        }
        let sys = Matrix::from_rows(f, n2 * n2, &eqs);
        let sol = solve_linear(&sys, &rhs)?;
        let LinearSolution::Affine { particular, kernel } = sol else { continue };
        let s = kernel.len();
        if (q).checked_pow(s as u32).is_none_or(|t| t > enum_cap) {
            return Ok(BaseCertificate::new(Status::Inconclusive("solution space too large".into()), Method::TensorSolve));
        }
        for c in all_vectors(f, s) {
            let h2v = crate::linalg::vec_add(f, &particular, &lin_comb(f, &c, &kernel, n2 * n2));
            let h2 = Matrix::from_fn(f, n2, n2, |r, cc| h2v[r * n2 + cc]);
            if h2.det().is_zero() {
                continue;
            }
            let g = h1.kron(&h2);
            if !g.is_identity() {
                let mut cert = BaseCertificate::new(Status::NotABase, Method::TensorSolve);
                cert.witness = Some(matrix_witness(&g));
                return Ok(cert);
            }
        }
    }
    Ok(BaseCertificate::new(Status::GroupBase, Method::TensorSolve))
}

/// True when every listed vector is nonzero.
pub fn all_nonzero(vs: &[Vector]) -> bool {
    vs.iter().all(|v| !is_zero_vec(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit_vector;
    use crate::permgrp::{induce_k_subsets, k_subsets};

    /// Every algebra element, filtered by group membership.
    fn brute_units(spec: &MatGroupSpec, alg: &MatrixAlgebra) -> Vec<Matrix> {
        all_vectors(&spec.field, alg.dim())
            .map(|c| alg.element(&c))
            .filter(|g| !g.det().is_zero() && spec.contains(g))
            .collect()
    }

    #[test]
    fn unit_search_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for (fam, d, q) in [(Family::Sp, 4, 2), (Family::OmegaPlus, 4, 3), (Family::SU, 3, 4), (Family::OmegaOdd, 3, 5), (Family::SL, 3, 2)] {
            let spec = MatGroupSpec::of_order(fam, d, q).unwrap();
            let f = &spec.field;
            for _ in 0..40 {
                let n = rng.gen_range(1..=3);
                let subs: Vec<Subspace> = (0..n)
                    .map(|_| {
                        let k = rng.gen_range(1..d);
                        let vs: Vec<Vector> = (0..k).map(|_| (0..d).map(|_| Fe(rng.gen_range(0..f.q()))).collect()).collect();
                        Subspace::span(f, d, &vs)
                    })
                    .filter(|u| u.dim() > 0)
                    .collect();
                let alg = stabilizing_algebra_in(f, d, &subs).unwrap();
                if (f.q() as u64).pow(alg.dim() as u32) > 1 << 16 {
                    continue;
                }
                let brute = brute_units(&spec, &alg).into_iter().any(|g| g.as_scalar().is_none());
                let cert = unit_search(&spec, &alg, 1 << 20, |g| g.as_scalar().is_some());
                assert_eq!(cert.is_not_a_base(), brute, "{} {:?}", spec.name(), subs);
                if let Some(Witness::Matrix(rows)) = &cert.witness {
                    let g = Matrix::from_ints(f, &rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
                    assert!(spec.contains(&g) && g.as_scalar().is_none());
                    assert!(subs.iter().all(|u| u.image(&g).unwrap() == *u));
                }
            }
        }
    }

    #[test]
    fn subset_cells() {
        let c = verify_subset_base(4, &[vec![0, 1], vec![0, 2]], SymOrAlt::Sym).unwrap();
        assert_eq!(c.status, Status::GroupBase);
        let c = verify_subset_base(4, &[vec![0, 1]], SymOrAlt::Sym).unwrap();
        assert_eq!(c.status, Status::NotABase);
        assert_eq!(c.witness, Some(Witness::Permutation("(1 2)".into())));
        // {1,2},{1,3} on 5 points: cells {1},{2},{3},{4,5}
        let c = verify_subset_base(5, &[vec![0, 1], vec![0, 2]], SymOrAlt::Alt).unwrap();
        assert_eq!(c.status, Status::AltOnlyBase);
        let c = verify_subset_base(5, &[vec![0, 1], vec![0, 2]], SymOrAlt::Sym).unwrap();
        assert_eq!(c.status, Status::NotABase);
    }

    #[test]
    fn cells_agree_with_chain() {
        for m in 4..=6usize {
            for k in 2..=m / 2 {
                let ind = induce_k_subsets(&PermGroupSpec::symmetric(m), k).unwrap();
                let alt = induce_k_subsets(&PermGroupSpec::alternating(m), k).unwrap();
                let all = k_subsets(m, k);
                let sym_chain = StabilizerChain::from_spec(&ind.group).unwrap();
                let alt_chain = StabilizerChain::from_spec(&alt.group).unwrap();
                for i in 0..all.len() {
                    for j in i..all.len().min(i + 6) {
                        let fam = vec![all[i].clone(), all[j].clone(), all[(i * 7 + j) % all.len()].clone()];
                        let pts: Vec<u32> = fam.iter().map(|s| ind.point_of(s).unwrap()).collect();
                        let s = verify_subset_base(m, &fam, SymOrAlt::Sym).unwrap();
                        let c = verify_with_chain(&sym_chain, &pts).unwrap();
                        assert_eq!(s.is_base(), c.is_base());
                        let a = verify_subset_base(m, &fam, SymOrAlt::Alt).unwrap();
                        let apts: Vec<u32> = fam.iter().map(|s| alt.point_of(s).unwrap()).collect();
                        let ac = verify_with_chain(&alt_chain, &apts).unwrap();
                        assert_eq!(a.is_base() || a.status == Status::AltOnlyBase, ac.is_base());
                    }
                }
            }
        }
    }

    #[test]
    fn generic_examples() {
        let s5 = PermGroupSpec::symmetric(5);
        let ind = induce_k_subsets(&s5, 2).unwrap();
        let pts: Vec<u32> = [vec![0, 1], vec![1, 2], vec![3, 4]].iter().map(|s| ind.point_of(s).unwrap()).collect();
        let c = verify_generic(&ind.group, None, &pts).unwrap();
        let cells = verify_subset_base(5, &[vec![0, 1], vec![1, 2], vec![3, 4]], SymOrAlt::Sym).unwrap();
        assert_eq!(c.is_base(), cells.is_base());
        let c = verify_generic(&s5, None, &[]).unwrap();
        assert_eq!(c.status, Status::NotABase);
        assert!(c.witness.is_some());
    }

    #[test]
    fn partitions_small_and_lazy_agree() {
        let p1: PartitionCode = vec![0, 0, 1, 1, 2, 2];
        let p2: PartitionCode = vec![0, 1, 0, 2, 1, 2];
        let p3: PartitionCode = vec![0, 1, 2, 0, 1, 2];
        for fam in [vec![p1.clone()], vec![p1.clone(), p2.clone()], vec![p1.clone(), p2.clone(), p3.clone()]] {
            let a = verify_partition_base(3, 2, &fam, INDUCED_DEGREE_CAP).unwrap();
            let b = verify_partition_base(3, 2, &fam, 1).unwrap();
            assert_eq!(a.is_base(), b.is_base());
            assert_eq!(a.stabilizer_order, b.stabilizer_order);
        }
    }

    #[test]
    fn subspace_tiers() {
        let s = MatGroupSpec::of_order(Family::Sp, 4, 2).unwrap();
        let f = &s.field;
        let u = Subspace::span(f, 4, &[unit_vector(4, 0), unit_vector(4, 1)]);
        let c = verify_subspace_base(&s, std::slice::from_ref(&u), DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(c.status, Status::NotABase);
        let Some(Witness::Matrix(rows)) = c.witness else { panic!() };
        let g = Matrix::from_fn(f, 4, 4, |r, cc| f.elem(rows[r][cc]));
        assert!(s.contains(&g) && g.as_scalar().is_none());
        assert_eq!(u.image(&g).unwrap(), u);
        let i = verify_subspace_base_induced(&s, &[u], 10_000).unwrap();
        assert_eq!(i.status, Status::NotABase);
    }

    #[test]
    fn vector_bases() {
        for (d, q) in [(2usize, 2u64), (4, 3)] {
            let s = MatGroupSpec::of_order(Family::Sp, d, q).unwrap();
            let basis: Vec<Vector> = (0..d).map(|i| unit_vector(d, i)).collect();
            assert_eq!(verify_vector_base(&s, &basis, DEFAULT_ENUM_CAP).unwrap().status, Status::StrongBase);
            let c = verify_vector_base(&s, &basis[..d - 1], DEFAULT_ENUM_CAP).unwrap();
            assert_eq!(c.status, Status::NotABase);
        }
        let s = MatGroupSpec::of_order(Family::SL, 3, 2).unwrap();
        let c = verify_vector_base(&s, &[unit_vector(3, 0), unit_vector(3, 1)], DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(c.status, Status::NotABase);
        let s = MatGroupSpec::of_order(Family::Sp, 2, 2).unwrap();
        let u = Subspace::span(&s.field, 2, &[unit_vector(2, 0)]);
        let a = symplectic_insufficiency_witness(&u, &s.form).unwrap();
        assert_eq!(a, Matrix::from_ints(&s.field, &[&[1, 1], &[0, 1]]));
    }

    #[test]
    fn tensor_exhaustive() {
        let f = Field::new(2, 1).unwrap();
        // x1⊗y1 + x2⊗y2 and x1⊗y3 alone leave a stabilizer
        let mut v1 = vec![Fe::ZERO; 6];
        v1[0] = Fe::ONE;
        v1[4] = Fe::ONE;
        let mut v2 = vec![Fe::ZERO; 6];
        v2[2] = Fe::ONE;
        let c = verify_tensor_base(&f, 2, 3, &[v1.clone(), v2.clone()], DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(c.status, Status::NotABase);
        let all: Vec<Vector> = (0..6).map(|i| unit_vector(6, i)).collect();
        let c = verify_tensor_base(&f, 2, 3, &all, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(c.status, Status::GroupBase);
    }

    #[test]
    fn subfield_rank() {
        let f = Field::of_order(4).unwrap();
        let l = f.basis_over_subfield(2).unwrap();
        let v1 = vec![l[0], l[1], Fe::ZERO];
        let v2 = vec![Fe::ZERO, Fe::ZERO, l[0]];
        assert_eq!(verify_subfield_vectors(&f, 2, &[v1.clone(), v2]).unwrap().status, Status::GroupBase);
        assert_eq!(verify_subfield_vectors(&f, 2, &[v1]).unwrap().status, Status::NotABase);
    }
}
