//! Explicit base constructions. Every candidate records its claimed size
//! bound, the seed of any random choice and a step log; candidates that
//! needed search or completion beyond the explicit recipe are flagged.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds;
use crate::classical::{self, Family, MatGroupSpec};
use crate::error::{Error, Result};
use crate::forms::{Form, FormKind, IsometryType};
use crate::gf::{Fe, Field};
use crate::linalg::{
    is_zero_vec, lin_comb, stabilizing_algebra_in, unit_vector, vec_add, vec_scale, Matrix, Subspace, Vector,
};
use crate::permgrp::{
    greedy_base, induce_partitions, induce_subspace_orbit, InducedAction, min_base_with_chain, partition_from_parts,
    partition_image, stabilizer_of_objects, PartitionCode, Perm, PermGroupSpec, StabilizerChain, INDUCED_DEGREE_CAP,
};
use crate::verify::{self, partition_action_order, SymOrAlt, DEFAULT_ENUM_CAP};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Subsets { m: usize, k: usize },
    Partitions { a: usize, b: usize },
    Subspaces { group: String, d: usize, k: usize, orbit: OrbitKind },
    Pairs { d: usize, k: usize, q: u64, pair: PairKind },
    Vectors { group: String, d: usize },
    Subfield { d: usize, q: u64, r: u32 },
    Tensor { n1: usize, n2: usize, q: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    All,
    Nondeg,
    Totsing,
    Pairs,
}

impl OrbitKind {
    pub fn parse(s: &str) -> Result<OrbitKind> {
        match s {
            "all" => Ok(OrbitKind::All),
            "nondeg" => Ok(OrbitKind::Nondeg),
            "totsing" => Ok(OrbitKind::Totsing),
            "pairs" => Ok(OrbitKind::Pairs),
            _ => Err(Error::Parse(format!("unknown orbit kind {s}"))),
        }
    }
}

/// `U ⊂ W` (flag) or `V = U ⊕ W` (complement).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Flag,
    Complement,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Elements {
    /// 0-indexed points.
    Subsets(Vec<Vec<u32>>),
    Partitions(Vec<PartitionCode>),
    Subspaces(Vec<Subspace>),
    Pairs(Vec<(Subspace, Subspace)>),
    Vectors(Vec<Vector>),
}

impl Elements {
    pub fn len(&self) -> usize {
        match self {
            Elements::Subsets(v) => v.len(),
            Elements::Partitions(v) => v.len(),
            Elements::Subspaces(v) => v.len(),
            Elements::Pairs(v) => v.len(),
            Elements::Vectors(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn subspaces(&self) -> Option<&[Subspace]> {
        match self {
            Elements::Subspaces(v) => Some(v),
            _ => None,
        }
    }

    /// JSON form: subsets and partition blocks 1-indexed, subspaces as
    /// basis rows of field-element codes.
    pub fn to_json(&self) -> Value {
        let rows = |u: &Subspace| -> Vec<Vec<u32>> { u.basis().iter().map(|v| v.iter().map(|x| x.0).collect()).collect() };
        match self {
            Elements::Subsets(v) => json!(v.iter().map(|s| s.iter().map(|x| x + 1).collect::<Vec<_>>()).collect::<Vec<_>>()),
            Elements::Partitions(v) => json!(v
                .iter()
                .map(|p| crate::permgrp::partition_parts(p)
                    .into_iter()
                    .map(|b| b.into_iter().map(|x| x + 1).collect::<Vec<_>>())
                    .collect::<Vec<_>>())
                .collect::<Vec<_>>()),
            Elements::Subspaces(v) => json!(v.iter().map(rows).collect::<Vec<_>>()),
            Elements::Pairs(v) => json!(v.iter().map(|(u, w)| json!({"u": rows(u), "w": rows(w)})).collect::<Vec<_>>()),
            Elements::Vectors(v) => json!(v.iter().map(|x| x.iter().map(|e| e.0).collect::<Vec<_>>()).collect::<Vec<_>>()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BaseCandidate {
    pub action: Action,
    pub elements: Elements,
    pub claimed_bound: usize,
    /// Which bound `claimed_bound` comes from.
    pub bound_ref: String,
    pub seed: u64,
    pub log: Vec<String>,
    /// Set when the explicit recipe had to be completed or replaced by search.
    pub flagged: bool,
}

impl BaseCandidate {
    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "action": self.action,
            "elements": self.elements.to_json(),
            "size": self.size(),
            "claimed_bound": self.claimed_bound,
            "bound_ref": self.bound_ref,
            "seed": self.seed,
            "flagged": self.flagged,
            "log": self.log,
        })
    }
}

// ---------------------------------------------------------------------------
// Subsets

fn check_subset_params(m: usize, k: usize) -> Result<()> {
    if k < 2 || 2 * k > m {
        return Err(Error::InvalidParameters(format!("need 2 <= k <= m/2, got m={m}, k={k}")));
    }
    Ok(())
}

/// Family of k-subsets of `0..m` whose membership patterns separate all
/// points. For `k^2 <= m` the size is exactly `⌈(2m-2)/(k+1)⌉`; otherwise the
/// digit construction is used.
pub fn subset_base(m: usize, k: usize) -> Result<BaseCandidate> {
    check_subset_params(m, k)?;
    let mut log = Vec::new();
    let (mk, kk) = (m as u64, k as u64);
    if k * k <= m {
        let target = bounds::subset_exact_value(mk, kk) as usize;
        if let Some(sets) = graph_subsets(m, k, target) {
            log.push(format!("pattern graph on {target} sets: one empty pattern, singletons and edges"));
            return Ok(BaseCandidate {
                action: Action::Subsets { m, k },
                elements: Elements::Subsets(sets),
                claimed_bound: target,
                bound_ref: "subset_exact_value".into(),
                seed: 0,
                log,
                flagged: false,
            });
        }
        log.push("pattern graph not realizable; digit construction".into());
        let mut c = digit_subsets(m, k, log)?;
        c.flagged = true;
        return Ok(c);
    }
    digit_subsets(m, k, log)
}

/// Points get distinct membership patterns of weight 0, 1 or 2 in
/// `b` sets: one empty pattern, `s = 2m-2-bk` singletons and
/// `e = bk-m+1` pairs forming a simple graph where set `i` has degree
/// `k - s_i`.
fn graph_subsets(m: usize, k: usize, b: usize) -> Option<Vec<Vec<u32>>> {
    let bk = b * k;
    if bk + 1 < m || bk > 2 * m - 2 {
        return None;
    }
    let s = 2 * m - 2 - bk;
    if s > b {
        return None;
    }
    // sets 0..s get one singleton point each
    let mut deg: Vec<(usize, usize)> = (0..b).map(|i| (k - usize::from(i < s), i)).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    // Havel-Hakimi
    loop {
        deg.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        if deg[0].0 == 0 {
            break;
        }
        let (dv, v) = deg[0];
        if dv >= deg.len() {
            return None;
        }
        deg[0].0 = 0;
        for item in deg.iter_mut().skip(1).take(dv) {
            if item.0 == 0 {
                return None;
            }
            item.0 -= 1;
            edges.push((v.min(item.1), v.max(item.1)));
        }
    }
    if edges.len() != bk + 1 - m {
        return None;
    }
    let mut sets: Vec<Vec<u32>> = vec![Vec::new(); b];
    let mut next = 1u32; // point 0 has the empty pattern
    for set in sets.iter_mut().take(s) {
        set.push(next);
        next += 1;
    }
    edges.sort();
    for (u, v) in edges {
        sets[u].push(next);
        sets[v].push(next);
        next += 1;
    }
    debug_assert_eq!(next as usize, m);
    for s in sets.iter_mut() {
        s.sort();
    }
    sets.sort();
    Some(sets)
}

fn cell_count(m: usize, sets: &[Vec<u32>]) -> usize {
    verify::membership_cells(m, sets).len()
}

/// Base-`c` digit construction, `c = ⌈m/k⌉`: one set per (position, nonzero
/// digit), then each set is brought to size exactly `k` by swaps that keep
/// the number of membership cells as large as possible.
fn digit_subsets(m: usize, k: usize, mut log: Vec<String>) -> Result<BaseCandidate> {
    let c = m.div_ceil(k);
    let len = bounds::digits_needed(m as u64, c as u64) as usize;
    let claimed = bounds::subset_digit_bound(m as u64, k as u64) as usize;
    let mut sets: Vec<Vec<u32>> = Vec::new();
    for pos in 0..len {
        for digit in 1..c {
            let s: Vec<u32> =
                (0..m as u32).filter(|&x| (x as usize / c.pow(pos as u32)) % c == digit).collect();
            sets.push(s);
        }
    }
    log.push(format!("digits base {c}, length {len}: {} raw sets", sets.len()));
    let seed = (m * 1000 + k) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // trim and pad
    for i in 0..sets.len() {
        while sets[i].len() > k {
            let best = (0..sets[i].len())
                .max_by_key(|&j| {
                    let mut t = sets.clone();
                    t[i].remove(j);
                    (cell_count(m, &t), usize::MAX - j)
                })
                .unwrap();
            sets[i].remove(best);
        }
        while sets[i].len() < k {
            let outside: Vec<u32> = (0..m as u32).filter(|x| !sets[i].contains(x)).collect();
            let best = outside
                .iter()
                .copied()
                .max_by_key(|&x| {
                    let mut t = sets.clone();
                    t[i].push(x);
                    (cell_count(m, &t), u32::MAX - x)
                })
                .unwrap();
            sets[i].push(best);
        }
    }
    // swap repair
    let mut cells = cell_count(m, &sets);
    let mut iters = 0u64;
    let max_iters = 200_000u64;
    while cells < m && iters < max_iters {
        iters += 1;
        let i = rng.gen_range(0..sets.len());
        let j = rng.gen_range(0..k);
        let outside: Vec<u32> = (0..m as u32).filter(|x| !sets[i].contains(x)).collect();
        let x = outside[rng.gen_range(0..outside.len())];
        let old = sets[i][j];
        sets[i][j] = x;
        let nc = cell_count(m, &sets);
        if nc >= cells || rng.gen_bool(0.01) {
            cells = nc;
        } else {
            sets[i][j] = old;
        }
    }
    for s in sets.iter_mut() {
        s.sort();
    }
    log.push(format!("padded to size {k}; {iters} repair swaps (seed {seed})"));
    let flagged = cells < m;
    if flagged {
        log.push(format!("repair stopped with {cells} of {m} cells"));
    }
    Ok(BaseCandidate {
        action: Action::Subsets { m, k },
        elements: Elements::Subsets(sets),
        claimed_bound: claimed,
        bound_ref: "subset_digit_bound".into(),
        seed,
        log,
        flagged,
    })
}

/// Subset family certified by the cell oracle for `Sym(m)`.
pub fn subset_certified(m: usize, sets: &[Vec<u32>]) -> bool {
    verify::verify_subset_base(m, sets, SymOrAlt::Sym).map(|c| c.is_base()).unwrap_or(false)
}

// ---------------------------------------------------------------------------
// Partitions

/// Partition bound as a size: 3 for `b = 2`, 6 for `a >= b`, else
/// `⌊log_a b⌋ + 4`.
pub fn partition_claimed_bound(a: usize, b: usize) -> usize {
    bounds::partition_bound(a as u64, b as u64) as usize
}

/// First partition: consecutive blocks. Second: a transversal shift. Then
/// greedy choices, on the induced action when its degree allows and with
/// seeded random candidates otherwise; exact search if greedy overshoots.
pub fn partition_base(a: usize, b: usize, node_budget: u64) -> Result<BaseCandidate> {
    if a < 2 || b < 2 {
        return Err(Error::InvalidParameters("partitions need a, b >= 2".into()));
    }
    let m = a * b;
    let claimed = partition_claimed_bound(a, b);
    let seed = (a * 100 + b) as u64;
    let mut log = Vec::new();
    let n = bounds::partition_count(a as u64, b as u64);
    let mut flagged = false;
    let parts: Vec<PartitionCode> = if n <= BigUint::from(INDUCED_DEGREE_CAP) {
        let ind = induce_partitions(&PermGroupSpec::symmetric(m), a, b)?;
        let order = partition_action_order(a, b);
        let chain = StabilizerChain::with_known_order(ind.group.degree, &ind.group.generators, &[], &order, seed)?;
        let first = blocks_partition(a, b);
        let second = transversal_partition(a, b);
        let mut prefix = vec![ind.point_of(&first).unwrap()];
        if (a, b) != (2, 2) {
            prefix.push(ind.point_of(&second).unwrap());
        }
        let fixed = crate::permgrp::pointwise_stabilizer(&chain, &prefix)?;
        let rest_chain = StabilizerChain::with_known_order(
            ind.group.degree,
            &fixed.group.generators,
            &[],
            &fixed.order,
            seed + 1,
        )?;
        let mut pts = prefix.clone();
        pts.extend(greedy_base(&rest_chain)?);
        log.push(format!("blocks, transversal, then greedy on the induced action of degree {n}: {} partitions", pts.len()));
        if pts.len() > claimed {
            match min_base_with_chain(&chain, node_budget) {
                Ok(mb) => {
                    log.push(format!("greedy exceeded {claimed}; exact search found {}", mb.b));
                    pts = mb.witness;
                    flagged = true;
                }
                Err(e) => log.push(format!("exact search failed: {e}")),
            }
        }
        pts.iter().map(|&p| ind.domain[p as usize].clone()).collect()
    } else {
        lazy_partition_greedy(a, b, seed, &mut log)?
    };
    Ok(BaseCandidate {
        action: Action::Partitions { a, b },
        elements: Elements::Partitions(parts),
        claimed_bound: claimed,
        bound_ref: "partition_case_bound".into(),
        seed,
        log,
        flagged,
    })
}

fn blocks_partition(a: usize, b: usize) -> PartitionCode {
    (0..a * b).map(|x| (x / b) as u8).collect()
}

/// Point `i*b + j` goes to part `(i + j) mod a`; each part meets every
/// residue of `j` once per block, so parts have size `b`.
fn transversal_partition(a: usize, b: usize) -> PartitionCode {
    let lab = (0..a * b).map(|x| ((x / b + x % b) % a) as u8).collect::<Vec<u8>>();
    crate::permgrp::normalize_partition(&lab)
}

fn random_partition(a: usize, b: usize, rng: &mut ChaCha8Rng) -> PartitionCode {
    let mut pts: Vec<u32> = (0..(a * b) as u32).collect();
    for i in (1..pts.len()).rev() {
        let j = rng.gen_range(0..=i);
        pts.swap(i, j);
    }
    let parts: Vec<Vec<u32>> = pts.chunks(b).map(|c| c.to_vec()).collect();
    partition_from_parts(a * b, &parts)
}

/// Greedy over random candidates using stabilizer chains in `Sym(ab)`,
/// without listing the partition domain.
fn lazy_partition_greedy(a: usize, b: usize, seed: u64, log: &mut Vec<String>) -> Result<Vec<PartitionCode>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = vec![blocks_partition(a, b), transversal_partition(a, b)];
    let mut chain = verify::partition_family_stabilizer(a, b, &parts, seed)?;
    let mut rounds = 0;
    while !chain.order().is_one() {
        rounds += 1;
        if rounds > 64 {
            return Err(Error::BudgetExceeded { lower: 0, upper: Some(parts.len()) });
        }
        let mut best: Option<(BigUint, PartitionCode, StabilizerChain)> = None;
        for t in 0..24u64 {
            // images of a random partition under the current stabilizer are
            // equivalent, so sample fresh partitions
            let cand = random_partition(a, b, &mut rng);
            let c = stabilizer_of_objects(&chain, std::slice::from_ref(&cand), |p, g: &Perm| partition_image(p, g), seed + t)?;
            let o = c.order();
            if best.as_ref().is_none_or(|(bo, _, _)| o < *bo) {
                best = Some((o, cand, c));
            }
        }
        let (_, p, c) = best.unwrap();
        parts.push(p);
        chain = c;
    }
    log.push(format!("blocks, transversal, then greedy over random partitions (seed {seed}): {} partitions", parts.len()));
    Ok(parts)
}

// ---------------------------------------------------------------------------
// Subspace helpers

fn zero(d: usize) -> Vector {
    vec![Fe::ZERO; d]
}

fn vsum(f: &Field, d: usize, vs: &[&Vector]) -> Vector {
    vs.iter().fold(zero(d), |acc, v| vec_add(f, &acc, v))
}

fn span(f: &Field, d: usize, vs: &[Vector]) -> Subspace {
    Subspace::span(f, d, vs)
}

fn random_in(f: &Field, basis: &[Vector], d: usize, rng: &mut ChaCha8Rng) -> Vector {
    let c: Vector = (0..basis.len()).map(|_| Fe(rng.gen_range(0..f.q()))).collect();
    lin_comb(f, &c, basis, d)
}

/// Vectors of `span(basis)` orthogonal to every vector in `vs`.
fn perp_within(form: &Form, basis: &[Vector], vs: &[Vector]) -> Vec<Vector> {
    let f = &form.field;
    if vs.is_empty() {
        return basis.to_vec();
    }
    let rows: Vec<Vector> = basis.iter().map(|c| vs.iter().map(|v| form.evaluate(c, v)).collect()).collect();
    let m = Matrix::from_rows(f, vs.len(), &rows).transpose();
    let ker = m.kernel();
    let vecs: Vec<Vector> = ker.iter().map(|k| lin_comb(f, k, basis, form.d)).collect();
    span(f, form.d, &vecs).basis()
}

/// `count` hyperbolic pairs chosen at random inside the nondegenerate span of
/// `basis`, and a basis of their perp there.
fn random_hyperbolic_pairs(
    form: &Form,
    basis: &[Vector],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(Vec<(Vector, Vector)>, Vec<Vector>)> {
    let f = &form.field;
    let d = form.d;
    let mut current = basis.to_vec();
    let mut pairs = Vec::new();
    for _ in 0..count {
        let mut found = None;
        for _ in 0..2000 {
            let x = random_in(f, &current, d, rng);
            if is_zero_vec(&x) || !form.is_singular(&x) {
                continue;
            }
            let b = (0..50).map(|_| random_in(f, &current, d, rng)).find(|b| !form.evaluate(&x, b).is_zero());
            let Some(b) = b else { continue };
            found = Some((x.clone(), form.hyperbolic_partner(&x, &b)));
            break;
        }
        let (x, y) = found?;
        current = perp_within(form, &current, &[x.clone(), y.clone()]);
        pairs.push((x, y));
    }
    Some((pairs, current))
}

pub fn random_subspace(f: &Field, d: usize, k: usize, rng: &mut ChaCha8Rng) -> Subspace {
    let full: Vec<Vector> = (0..d).map(|i| unit_vector(d, i)).collect();
    loop {
        let vs: Vec<Vector> = (0..k).map(|_| random_in(f, &full, d, rng)).collect();
        let u = span(f, d, &vs);
        if u.dim() == k {
            return u;
        }
    }
}

/// Random nondegenerate `k`-subspace of `span(within)` of isometry type `ty`.
fn random_nondeg(form: &Form, within: &[Vector], ty: &IsometryType, rng: &mut ChaCha8Rng) -> Option<Subspace> {
    let f = &form.field;
    for _ in 0..4000 {
        let vs: Vec<Vector> = (0..ty.dim).map(|_| random_in(f, within, form.d, rng)).collect();
        let u = span(f, form.d, &vs);
        if u.dim() != ty.dim || !form.is_nondegenerate_on(&u) {
            continue;
        }
        if form.isometry_type(&u).ok().as_ref() == Some(ty) {
            return Some(u);
        }
    }
    None
}

/// Random totally singular `k`-subspace.
fn random_totsing(form: &Form, k: usize, rng: &mut ChaCha8Rng) -> Option<Subspace> {
    let f = &form.field;
    let d = form.d;
    let full: Vec<Vector> = (0..d).map(|i| unit_vector(d, i)).collect();
    'outer: for _ in 0..50 {
        let mut s: Vec<Vector> = Vec::new();
        for _ in 0..k {
            let p = perp_within(form, &full, &s);
            let cur = span(f, d, &s);
            let x = (0..1000).map(|_| random_in(f, &p, d, rng)).find(|x| !cur.contains(x) && form.is_singular(x));
            match x {
                Some(x) => s.push(x),
                None => continue 'outer,
            }
        }
        let u = span(f, d, &s);
        if form.is_totally_singular(&u) {
            return Some(u);
        }
    }
    None
}

/// Isometry types of nondegenerate `k`-subspaces, found by seeded sampling.
pub fn nondeg_types(spec: &MatGroupSpec, k: usize, seed: u64) -> Vec<IsometryType> {
    let form = &spec.form;
    if form.kind == FormKind::None || k == 0 || k > spec.d {
        return vec![];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut types: Vec<IsometryType> = Vec::new();
    for _ in 0..1500 {
        let u = random_subspace(&spec.field, spec.d, k, &mut rng);
        if let Ok(t) = form.isometry_type(&u) {
            if !types.contains(&t) {
                types.push(t);
            }
        }
    }
    types.sort_by_key(|t| (t.witt_index, t.disc_square));
    types
}

/// Which orbit of `k`-subspaces a construction targets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "orbit", rename_all = "lowercase")]
pub enum OrbitChoice {
    All,
    Nondeg { ty: IsometryType },
    Totsing,
}

impl OrbitChoice {
    pub fn kind(&self) -> OrbitKind {
        match self {
            OrbitChoice::All => OrbitKind::All,
            OrbitChoice::Nondeg { .. } => OrbitKind::Nondeg,
            OrbitChoice::Totsing => OrbitKind::Totsing,
        }
    }
}

/// Applicable orbits of `k`-subspaces, `k <= d/2`.
pub fn applicable_orbits(spec: &MatGroupSpec, k: usize, seed: u64) -> Vec<OrbitChoice> {
    if spec.form.kind == FormKind::None {
        return vec![OrbitChoice::All];
    }
    let mut out: Vec<OrbitChoice> = nondeg_types(spec, k, seed).into_iter().map(|ty| OrbitChoice::Nondeg { ty }).collect();
    if spec.form.witt_decompose(None).map(|w| w.witt_index >= k).unwrap_or(false) {
        out.push(OrbitChoice::Totsing);
    }
    out
}

/// Whether `u` lies in the chosen orbit (for O+ with `d = 2k`, the orbit of
/// `reference`).
pub fn in_orbit(spec: &MatGroupSpec, orbit: &OrbitChoice, reference: Option<&Subspace>, u: &Subspace) -> bool {
    let form = &spec.form;
    match orbit {
        OrbitChoice::All => true,
        OrbitChoice::Nondeg { ty } => form.isometry_type(u).ok().as_ref() == Some(ty),
        OrbitChoice::Totsing => {
            if !form.is_totally_singular(u) {
                return false;
            }
            match reference {
                Some(r) if spec.family == Family::OmegaPlus && 2 * u.dim() == spec.d => {
                    r.intersect(u).map(|i| (u.dim() - i.dim()).is_multiple_of(2)).unwrap_or(false)
                }
                _ => true,
            }
        }
    }
}

fn sample_orbit(
    spec: &MatGroupSpec,
    orbit: &OrbitChoice,
    k: usize,
    reference: Option<&Subspace>,
    rng: &mut ChaCha8Rng,
) -> Option<Subspace> {
    let full: Vec<Vector> = (0..spec.d).map(|i| unit_vector(spec.d, i)).collect();
    for _ in 0..200 {
        let u = match orbit {
            OrbitChoice::All => Some(random_subspace(&spec.field, spec.d, k, rng)),
            OrbitChoice::Nondeg { ty } => random_nondeg(&spec.form, &full, ty, rng),
            OrbitChoice::Totsing => random_totsing(&spec.form, k, rng),
        }?;
        if in_orbit(spec, orbit, reference, &u) {
            return Some(u);
        }
    }
    None
}

/// Orbit length of the chosen orbit.
pub fn orbit_length(spec: &MatGroupSpec, orbit: &OrbitChoice, k: usize, seed: u64) -> Result<BigUint> {
    match orbit {
        OrbitChoice::All => Ok(classical::gaussian_binomial(spec.d as u64, k as u64, spec.q())),
        OrbitChoice::Nondeg { ty } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full: Vec<Vector> = (0..spec.d).map(|i| unit_vector(spec.d, i)).collect();
            let u = random_nondeg(&spec.form, &full, ty, &mut rng).ok_or_else(no_sample)?;
            classical::orbit_size_nondeg(spec, &u)
        }
        OrbitChoice::Totsing => {
            let n = classical::orbit_size_totsing(spec, k);
            if spec.family == Family::OmegaPlus && 2 * k == spec.d {
                Ok(n / BigUint::from(2u32))
            } else {
                Ok(n)
            }
        }
    }
}

fn dedup_subspaces(v: Vec<Subspace>) -> Vec<Subspace> {
    let mut seen = HashSet::new();
    v.into_iter().filter(|u| seen.insert(u.encoding())).collect()
}

/// Largest `q^s` for which greedy completion runs the unit enumeration.
const GREEDY_ENUM_CAP: u64 = 1 << 12;
/// Largest orbit on which the fallback runs the exact base search.
pub const FALLBACK_BRUTE_DEGREE: u64 = 3000;

fn certified(spec: &MatGroupSpec, elems: &[Subspace], enum_cap: u64) -> bool {
    verify::verify_subspace_base(spec, elems, enum_cap).map(|c| c.is_base()).unwrap_or(false)
}

/// Adds orbit elements chosen among random samples to minimize the
/// stabilizing-algebra dimension until the list certifies or `limit` is
/// reached.
fn complete_greedy(
    spec: &MatGroupSpec,
    orbit: &OrbitChoice,
    k: usize,
    elems: &mut Vec<Subspace>,
    limit: usize,
    rng: &mut ChaCha8Rng,
) -> Result<bool> {
    let f = &spec.field;
    let reference = elems.first().cloned();
    loop {
        let alg = stabilizing_algebra_in(f, spec.d, elems)?;
        let s = alg.dim();
        // the unit search gets slow for large algebras
        if s == 1 || (s <= 2 * spec.d && certified(spec, elems, GREEDY_ENUM_CAP)) {
            return Ok(true);
        }
        if elems.len() >= limit {
            return Ok(false);
        }
        let mut best: Option<(usize, Subspace)> = None;
        for _ in 0..12 {
            let Some(u) = sample_orbit(spec, orbit, k, reference.as_ref(), rng) else { continue };
            if elems.contains(&u) {
                continue;
            }
            let mut t = elems.clone();
            t.push(u.clone());
            let s = stabilizing_algebra_in(f, spec.d, &t)?.dim();
            if best.as_ref().is_none_or(|(bs, _)| s < *bs) {
                best = Some((s, u));
            }
        }
        let Some((_, u)) = best else { return Ok(false) };
        elems.push(u);
    }
}

/// Checks the recipe output, completing it greedily when it does not
/// certify.
#[allow(clippy::too_many_arguments)]
fn finish_subspaces(
    spec: &MatGroupSpec,
    orbit: &OrbitChoice,
    k: usize,
    elems: Vec<Subspace>,
    claimed: usize,
    bound_ref: &str,
    seed: u64,
    mut log: Vec<String>,
) -> Result<BaseCandidate> {
    let mut elems = dedup_subspaces(elems);
    let reference = elems.first().cloned();
    for u in &elems {
        if u.dim() != k || !in_orbit(spec, orbit, reference.as_ref(), u) {
            return Err(Error::GenerationFailed(format!("{} produced a subspace outside the orbit", spec.name())));
        }
    }
    let mut flagged = false;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    if !certified(spec, &elems, DEFAULT_ENUM_CAP) {
        let before = elems.len();
        let limit = claimed.max(before) * 2;
        let ok = complete_greedy(spec, orbit, k, &mut elems, limit, &mut rng)?;
        flagged = true;
        log.push(format!(
            "recipe output ({before} subspaces) did not certify; greedy completion to {} (seed {}){}",
            elems.len(),
            seed ^ 0x5eed,
            if ok { "" } else { ", not certified" }
        ));
    }
    Ok(BaseCandidate {
        action: Action::Subspaces { group: spec.name(), d: spec.d, k, orbit: orbit.kind() },
        elements: Elements::Subspaces(elems),
        claimed_bound: claimed,
        bound_ref: bound_ref.into(),
        seed,
        log,
        flagged,
    })
}

/// Permutation action on the orbit of a sampled representative; for O+ with
/// `d = 2k` the family-preserving subgroup on one family.
pub fn orbit_action(spec: &MatGroupSpec, orbit: &OrbitChoice, k: usize, seed: u64, cap: u64) -> Result<InducedAction<Subspace>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = sample_orbit(spec, orbit, k, None, &mut rng).ok_or_else(no_sample)?;
    let gens = classical::generators(spec)?;
    let gens = family_generators(spec, orbit, &gens.gens, &first)?;
    induce_subspace_orbit(&gens, &first, cap)
}

/// Generators of the subgroup preserving the family of `first` (O+ with
/// `d = 2k`, where the full isometry group swaps the two families);
/// Schreier generators for the index-2 subgroup. Other cases: `gens`.
fn family_generators(spec: &MatGroupSpec, orbit: &OrbitChoice, gens: &[Matrix], first: &Subspace) -> Result<Vec<Matrix>> {
    if !(spec.family == Family::OmegaPlus && *orbit == OrbitChoice::Totsing && 2 * first.dim() == spec.d) {
        return Ok(gens.to_vec());
    }
    let mut keep = Vec::new();
    let mut swap = Vec::new();
    for g in gens {
        if in_orbit(spec, orbit, Some(first), &first.image(g)?) {
            keep.push(g.clone());
        } else {
            swap.push(g.clone());
        }
    }
    let Some(t) = swap.first().cloned() else { return Ok(keep) };
    let ti = t.inverse().ok_or_else(|| Error::GenerationFailed("singular generator".into()))?;
    let mut out = Vec::new();
    for s in &keep {
        out.push(s.clone());
        out.push(t.mul(s).mul(&ti));
    }
    for s in &swap {
        out.push(s.mul(&ti));
        out.push(t.mul(s));
    }
    Ok(out)
}

/// Exact search on the induced orbit when it is small, greedy completion
/// from a random element otherwise.
fn fallback(
    spec: &MatGroupSpec,
    orbit: &OrbitChoice,
    k: usize,
    start: Vec<Subspace>,
    why: &str,
    seed: u64,
    node_budget: u64,
) -> Result<BaseCandidate> {
    let claimed = spec.d / k + 11;
    let mut log = vec![format!("{why}; fallback")];
    let n = orbit_length(spec, orbit, k, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = match start.first() {
        Some(u) => u.clone(),
        None => sample_orbit(spec, orbit, k, None, &mut rng).ok_or_else(no_sample)?,
    };
    if n <= BigUint::from(FALLBACK_BRUTE_DEGREE) {
        let gens = classical::generators(spec)?;
        let gens = family_generators(spec, orbit, &gens.gens, &first)?;
        let ind = induce_subspace_orbit(&gens, &first, FALLBACK_BRUTE_DEGREE)?;
        if !certified(spec, &ind.domain, DEFAULT_ENUM_CAP) {
            return Err(Error::UnfaithfulAction(format!("{} on an orbit of length {n}", spec.name())));
        }
        let chain = StabilizerChain::from_spec(&ind.group)?;
        if let Ok(mb) = min_base_with_chain(&chain, node_budget) {
            let elems: Vec<Subspace> = mb.witness.iter().map(|&p| ind.domain[p as usize].clone()).collect();
            log.push(format!("exact search on the induced orbit of length {n}: b = {}", mb.b));
            let mut c = finish_subspaces(spec, orbit, k, elems, claimed, "d_over_k_plus_11", seed, log)?;
            c.flagged = true;
            return Ok(c);
        }
        log.push("exact search over budget".into());
    }
    let mut elems = if start.is_empty() { vec![first] } else { start };
    let ok = complete_greedy(spec, orbit, k, &mut elems, 2 * claimed, &mut rng)?;
    log.push(format!("greedy on orbit of length {n}: {} subspaces (seed {seed}){}", elems.len(), if ok { "" } else { ", not certified" }));
    let mut c = finish_subspaces(spec, orbit, k, elems, claimed, "d_over_k_plus_11", seed, log)?;
    c.flagged = true;
    Ok(c)
}

// ---------------------------------------------------------------------------
// All k-subspaces

/// `V_1..V_a`, the diagonal `W_1`, the twisted `W_2, W_3` and, when `k` does
/// not divide `d`, `W_4, W_5`; standard coordinates with `V_i` on block `i`.
pub fn all_subspace_elements(d: usize, k: usize, field: &Field) -> Result<Vec<Subspace>> {
    if k == 0 || 2 * k > d {
        return Err(Error::InvalidParameters(format!("need 1 <= k <= d/2, got d={d}, k={k}")));
    }
    let f = field;
    let a = d / k;
    let r = d % k;
    let x = |i: usize, s: usize| unit_vector(d, i * k + s);
    let fv = |j: usize| unit_vector(d, a * k + j);
    let mut out = Vec::new();
    for i in 0..a {
        out.push(span(f, d, &(0..k).map(|s| x(i, s)).collect::<Vec<_>>()));
    }
    let w1: Vec<Vector> = (0..k).map(|s| vsum(f, d, &(0..a).map(|i| x(i, s)).collect::<Vec<_>>().iter().collect::<Vec<_>>())).collect();
    out.push(span(f, d, &w1));
    let (c, dm) = classical::sl_generating_pair(k, f)?;
    for m in [&c, &dm] {
        // x_s^(1) + γ(x_s^(2)), γ(x_s) = Σ_t m[t][s] x_t
        let w: Vec<Vector> = (0..k)
            .map(|s| {
                let g = (0..k).fold(zero(d), |acc, t| vec_add(f, &acc, &vec_scale(f, m.get(t, s), &x(1, t))));
                vec_add(f, &x(0, s), &g)
            })
            .collect();
        out.push(span(f, d, &w));
    }
    if r > 0 {
        let mut w4: Vec<Vector> = (0..r).map(fv).collect();
        w4.extend((r..k).map(|s| x(0, s)));
        out.push(span(f, d, &w4));
        let mut w5: Vec<Vector> = (0..r).map(|j| vec_add(f, &fv(j), &x(1, j))).collect();
        w5.extend((r..k).map(|s| x(1, s)));
        out.push(span(f, d, &w5));
    }
    Ok(dedup_subspaces(out))
}

pub fn subspace_base_all(d: usize, k: usize, field: &Field) -> Result<BaseCandidate> {
    let elems = all_subspace_elements(d, k, field)?;
    let a = d / k;
    let log = vec![format!("d = {a}*{k} + {}: V_1..V_{a}, W_1, W_2, W_3{}", d % k, if !d.is_multiple_of(k) { ", W_4, W_5" } else { "" })];
    Ok(BaseCandidate {
        action: Action::Subspaces { group: format!("SL({d},{})", field.q()), d, k, orbit: OrbitKind::All },
        elements: Elements::Subspaces(elems),
        claimed_bound: a + 5,
        bound_ref: "a_plus_5".into(),
        seed: 0,
        log,
        flagged: false,
    })
}

/// Annihilator of `u` under the standard dot product.
pub fn annihilator(u: &Subspace) -> Subspace {
    let f = u.field();
    let d = u.ambient_dim();
    if u.dim() == 0 {
        return Subspace::full(f, d);
    }
    let ker = Matrix::from_rows(f, d, &u.basis()).kernel();
    span(f, d, &ker)
}

/// All `k`-subspaces for any `1 <= k < d`; `k > d/2` goes through
/// annihilators of the `(d-k)` construction.
pub fn subspace_base_all_any(d: usize, k: usize, field: &Field) -> Result<BaseCandidate> {
    if k == 0 || k >= d {
        return Err(Error::InvalidParameters(format!("need 1 <= k < d, got d={d}, k={k}")));
    }
    if 2 * k <= d {
        return subspace_base_all(d, k, field);
    }
    let mut c = subspace_base_all(d, d - k, field)?;
    if let Elements::Subspaces(v) = &c.elements {
        c.elements = Elements::Subspaces(v.iter().map(annihilator).collect());
    }
    c.action = Action::Subspaces { group: format!("SL({d},{})", field.q()), d, k, orbit: OrbitKind::All };
    c.log.push(format!("annihilators of the construction for {}-subspaces", d - k));
    Ok(c)
}

/// `(U, W)` pairs with `dim U = k < d/2`: `U_i` from the all-subspaces base
/// and any `W_i` in the right relation. A group element fixing every pair
/// fixes every `U_i`, so the pairs inherit the base property.
pub fn pairs_base(d: usize, k: usize, field: &Field, kind: PairKind) -> Result<BaseCandidate> {
    if 2 * k >= d {
        return Err(Error::InvalidParameters(format!("pairs need k < d/2, got d={d}, k={k}")));
    }
    let c = subspace_base_all(d, k, field)?;
    let us = c.elements.subspaces().unwrap().to_vec();
    let f = field;
    let mut pairs = Vec::new();
    for u in us {
        let mut basis = u.basis();
        let mut extra = Vec::new();
        for i in 0..d {
            let e = unit_vector(d, i);
            if !span(f, d, &basis).contains(&e) {
                basis.push(e.clone());
                extra.push(e);
            }
        }
        let w = match kind {
            PairKind::Complement => span(f, d, &extra),
            PairKind::Flag => {
                let mut b = u.basis();
                b.extend(extra.into_iter().take(d - 2 * k));
                span(f, d, &b)
            }
        };
        pairs.push((u, w));
    }
    let mut log = c.log.clone();
    log.push("pair stabilizers lie in the stabilizers of their first components".into());
    Ok(BaseCandidate {
        action: Action::Pairs { d, k, q: f.q() as u64, pair: kind },
        elements: Elements::Pairs(pairs),
        claimed_bound: d / k + 5,
        bound_ref: "a_plus_5".into(),
        seed: 0,
        log,
        flagged: false,
    })
}

// ---------------------------------------------------------------------------
// Nondegenerate orbits

/// One orthogonal summand: hyperbolic pairs and a basis of their perp in it.
#[derive(Clone, Debug)]
struct Block {
    space: Vec<Vector>,
    pairs: Vec<(Vector, Vector)>,
    rest: Vec<Vector>,
}

impl Block {
    fn x(&self, i: usize, d: usize) -> Vector {
        self.pairs.get(i).map_or_else(|| zero(d), |p| p.0.clone())
    }

    fn y(&self, i: usize, d: usize) -> Vector {
        self.pairs.get(i).map_or_else(|| zero(d), |p| p.1.clone())
    }
}

/// Orthogonal decomposition `V_1 ⊥ ... ⊥ V_a ⊥ V_{a+1}` with each `V_s`,
/// `s <= a`, of type `ty`.
fn orthogonal_blocks(form: &Form, ty: &IsometryType, a: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Vector>>> {
    let d = form.d;
    let mut remaining: Vec<Vector> = (0..d).map(|i| unit_vector(d, i)).collect();
    let mut out = Vec::new();
    for _ in 0..a {
        let v = random_nondeg(form, &remaining, ty, rng).ok_or_else(no_sample)?;
        remaining = perp_within(form, &remaining, &v.basis());
        out.push(v.basis());
    }
    out.push(remaining);
    Ok(out)
}

fn witt_block(form: &Form, space: Vec<Vector>, count: usize, rng: &mut ChaCha8Rng) -> Result<Block> {
    let (pairs, rest) = random_hyperbolic_pairs(form, &space, count, rng)
        .ok_or_else(|| Error::GenerationFailed("no hyperbolic pairs in block".into()))?;
    Ok(Block { space, pairs, rest })
}

/// `W_1..W_4` from the sums `u_i`, `v_i` over all blocks, each completed by
/// `tail` (the non-hyperbolic part of the first block).
fn sync_four(f: &Field, d: usize, l: usize, blocks: &[Block], tail: &[Vector]) -> Vec<Subspace> {
    let u: Vec<Vector> = (0..l).map(|i| blocks.iter().fold(zero(d), |acc, b| vec_add(f, &acc, &b.x(i, d)))).collect();
    let v: Vec<Vector> = (0..l).map(|i| blocks.iter().fold(zero(d), |acc, b| vec_add(f, &acc, &b.y(i, d)))).collect();
    let b1 = &blocks[0];
    let b2 = &blocks[1];
    let make = |first: &[Vector], second: Vec<Vector>| {
        let mut vs = first.to_vec();
        vs.extend(second);
        vs.extend(tail.iter().cloned());
        span(f, d, &vs)
    };
    vec![
        make(&u, (0..l).map(|i| b1.y(i, d)).collect()),
        make(&v, (0..l).map(|i| b1.x(i, d)).collect()),
        make(&u, (0..l).map(|i| b2.y(i, d)).collect()),
        make(&v, (0..l).map(|i| b2.x(i, d)).collect()),
    ]
}

/// Nondegenerate `k`-subspaces of isometry type `ty`.
pub fn subspace_base_nondeg(spec: &MatGroupSpec, k: usize, ty: &IsometryType, seed: u64, node_budget: u64) -> Result<BaseCandidate> {
    let form = &spec.form;
    let f = &spec.field;
    let d = spec.d;
    if form.kind == FormKind::None {
        return Err(Error::KindMismatch("a form is needed for nondegenerate orbits".into()));
    }
    if ty.dim != k || k == 0 || 2 * k > d {
        return Err(Error::InvalidParameters(format!("need 1 <= k <= d/2 and a type of dimension k, got d={d}, k={k}")));
    }
    let orbit = OrbitChoice::Nondeg { ty: *ty };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full: Vec<Vector> = (0..d).map(|i| unit_vector(d, i)).collect();
    if 2 * k == d {
        let u = random_nondeg(form, &full, ty, &mut rng).ok_or_else(no_sample)?;
        let pty = form.isometry_type(&form.perp(&u))?;
        if ty.witt_index > pty.witt_index {
            let mut c = subspace_base_nondeg(spec, k, &pty, seed, node_budget)?;
            if let Elements::Subspaces(v) = &c.elements {
                let perps: Vec<Subspace> = v.iter().map(|w| form.perp(w)).collect();
                c.elements = Elements::Subspaces(perps);
            }
            c.log.push("Witt index exceeds that of the perp orbit: perps of the perp-orbit construction".into());
            c.action = Action::Subspaces { group: spec.name(), d, k, orbit: OrbitKind::Nondeg };
            return Ok(c);
        }
    }
    let a = (d - 1) / k;
    let r = d - a * k;
    let l = ty.witt_index;
    if l == 0 {
        if k == 2 && spec.family.is_orthogonal() && a >= 3 {
            return nondeg_anisotropic_planes(spec, ty, a, seed, &mut rng);
        }
        return fallback(spec, &orbit, k, vec![], "no hyperbolic part and no planar recipe (ProofCaseInapplicable)", seed, node_budget);
    }
    let mut log = vec![format!("d = {a}*{k} + {r}, Witt index {l}, seed {seed}")];
    let spaces = orthogonal_blocks(form, ty, a, &mut rng)?;
    let last = span(f, d, &spaces[a]);
    let l_last = form.witt_decompose(Some(&last))?.witt_index.min(l);
    let mut blocks = Vec::new();
    for (s, sp) in spaces.into_iter().enumerate() {
        let count = if s < a { l } else { l_last };
        blocks.push(witt_block(form, sp, count, &mut rng)?);
    }
    let mut elems: Vec<Subspace> = blocks[..a].iter().map(|b| span(f, d, &b.space)).collect();
    let tail = blocks[0].rest.clone();
    elems.extend(sync_four(f, d, l, &blocks, &tail));
    log.push("V_1..V_a and W_1..W_4 from the sums u_i, v_i".into());
    let with_tail = |mut vs: Vec<Vector>| {
        vs.extend(tail.iter().cloned());
        span(f, d, &vs)
    };
    // W_5 synchronizes the two halves of the hyperbolic part
    let mut w5 = Vec::new();
    for i in 0..l {
        w5.push(blocks[0].x(i, d));
        w5.push(vec_add(f, &blocks[0].y(i, d), &blocks[1].x(i, d)));
    }
    elems.push(with_tail(w5));
    let (phi, psi) = classical::endo_generating_pair(l, f)?;
    for m in [&phi, &psi] {
        let mut w = Vec::new();
        for i in 0..l {
            let img = (0..l).fold(zero(d), |acc, t| vec_add(f, &acc, &vec_scale(f, m.get(t, i), &blocks[1].x(t, d))));
            w.push(vec_add(f, &blocks[0].x(i, d), &img));
            w.push(blocks[0].y(i, d));
        }
        elems.push(with_tail(w));
    }
    log.push("W_5 and the endomorphism twists W_6, W_7".into());
    if !tail.is_empty() {
        let mut primed = Vec::new();
        for b in &blocks {
            let old = span(f, d, &b.pairs.iter().flat_map(|p| [p.0.clone(), p.1.clone()]).collect::<Vec<_>>());
            let whole = span(f, d, &b.space);
            let mut pick = None;
            for _ in 0..200 {
                let nb = witt_block(form, b.space.clone(), b.pairs.len(), &mut rng)?;
                let new = span(f, d, &nb.pairs.iter().flat_map(|p| [p.0.clone(), p.1.clone()]).collect::<Vec<_>>());
                let covers = old.sum(&new)? == whole;
                if covers || pick.is_none() {
                    pick = Some(nb);
                }
                if covers {
                    break;
                }
            }
            primed.push(pick.unwrap());
        }
        let tail2 = primed[0].rest.clone();
        elems.extend(sync_four(f, d, l, &primed, &tail2));
        log.push("second decomposition V_s^(h)' and its four synchronizers".into());
    }
    finish_subspaces(spec, &orbit, k, elems, a + 11, "a_plus_11", seed, log)
}

/// Witt index 0, `k = 2`: bases `x, y` with `Q(x) = 1`, `Q(y) = α`,
/// `[x, y] = 1` in each block and the eight planes built from the
/// Q-normalized sums `u_1, v_1, u_2, v_2`.
fn nondeg_anisotropic_planes(
    spec: &MatGroupSpec,
    ty: &IsometryType,
    a: usize,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<BaseCandidate> {
    let form = &spec.form;
    let f = &spec.field;
    let d = spec.d;
    let alpha = crate::forms::find_anisotropic_alpha(f);
    let spaces = orthogonal_blocks(form, ty, a, rng)?;
    let q = |v: &Vector| form.q_eval(v).unwrap();
    let vectors_of = |sp: &[Vector]| -> Vec<Vector> { crate::linalg::all_vectors(f, sp.len()).map(|c| lin_comb(f, &c, sp, d)).collect() };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for sp in &spaces[..a] {
        let all = vectors_of(sp);
        let x = all.iter().find(|v| q(v) == Fe::ONE).cloned().ok_or_else(no_sample)?;
        let y = all
            .iter()
            .find(|v| q(v) == alpha && form.evaluate(&x, v) == Fe::ONE)
            .cloned()
            .ok_or_else(|| Error::GenerationFailed("no normalized basis in anisotropic plane".into()))?;
        xs.push(x);
        ys.push(y);
    }
    let last = &spaces[a];
    let xl = last[0].clone();
    let yl = last.get(1).cloned().unwrap_or_else(|| zero(d));
    let with_value = |sp: &[Vector], t: Fe| vectors_of(sp).into_iter().find(|v| q(v) == t);
    let am1 = f.from_int(a as i64 - 1);
    // u_1 = x^(2) + ... + x^(a+1) + z^(1), Q(u_1) = 1
    let t = f.sub(f.sub(Fe::ONE, am1), q(&xl));
    let z1 = with_value(&spaces[0], t).ok_or_else(no_sample)?;
    let t = f.sub(f.sub(alpha, f.mul(am1, alpha)), q(&yl));
    let w1 = with_value(&spaces[0], t).ok_or_else(no_sample)?;
    let u1 = vsum(f, d, &xs[1..].iter().chain([&xl, &z1]).collect::<Vec<_>>());
    let v1 = vsum(f, d, &ys[1..].iter().chain([&yl, &w1]).collect::<Vec<_>>());
    let za = with_value(&spaces[a - 1], f.sub(Fe::ONE, am1)).ok_or_else(no_sample)?;
    let wa = with_value(&spaces[a - 1], f.sub(alpha, f.mul(am1, alpha))).ok_or_else(no_sample)?;
    let u2 = vsum(f, d, &xs[..a - 1].iter().chain([&za]).collect::<Vec<_>>());
    let v2 = vsum(f, d, &ys[..a - 1].iter().chain([&wa]).collect::<Vec<_>>());
    let mut elems: Vec<Subspace> = spaces[..a].iter().map(|s| span(f, d, s)).collect();
    let pl = |p: &Vector, r: &Vector| span(f, d, &[p.clone(), r.clone()]);
    elems.extend([
        pl(&u1, &ys[1]),
        pl(&u1, &ys[2]),
        pl(&xs[1], &v1),
        pl(&xs[2], &v1),
        pl(&u2, &ys[0]),
        pl(&u2, &ys[1]),
        pl(&xs[0], &v2),
        pl(&xs[1], &v2),
    ]);
    let log = vec![format!("anisotropic planes: V_1..V_{a} and W_1..W_8 (alpha = {}), seed {seed}", alpha.0)];
    finish_subspaces(spec, &OrbitChoice::Nondeg { ty: *ty }, 2, elems, d / 2 + 8, "d_over_k_plus_8", seed, log)
}

// ---------------------------------------------------------------------------
// Totally singular orbits

/// Antisymmetric `C, D` for the twisted subspaces. For `k <= 4`,
/// `C = E12 - E21` and `D` the path `2-3-...-k`; their support graph is
/// bipartite, so `diag(c, 1/c, c, ...)` keeps both and the pair only pins
/// down scalars when `c = 1/c` for all `c`, i.e. `q <= 3`; a random search
/// over 0/±1 pairs found none better for `k = 3, 4`. For `k >= 5`: `C`
/// the path `1-2-...-k`, `D = E13 - E31`.
fn antisym_pair(f: &Field, k: usize) -> (Matrix, Matrix) {
    let mut c = Matrix::zeros(f, k, k);
    let mut dm = Matrix::zeros(f, k, k);
    let edge = |m: &mut Matrix, i: usize, j: usize| {
        m.set(i, j, Fe::ONE);
        m.set(j, i, f.neg(Fe::ONE));
    };
    if k >= 5 {
        for i in 0..k - 1 {
            edge(&mut c, i, i + 1);
        }
        edge(&mut dm, 0, 2);
    } else if k >= 2 {
        edge(&mut c, 0, 1);
        for i in 1..k.saturating_sub(1) {
            edge(&mut dm, i, i + 1);
        }
    }
    (c, dm)
}

/// Hyperbolic frame: block `s` holds pairs `(x_i^(s), y_i^(s))`, missing
/// ones read as zero.
struct Frame<'a> {
    f: &'a Field,
    d: usize,
    k: usize,
    blocks: Vec<Vec<(Vector, Vector)>>,
}

impl Frame<'_> {
    fn x(&self, s: usize, i: usize) -> Vector {
        self.blocks[s].get(i).map_or_else(|| zero(self.d), |p| p.0.clone())
    }

    fn y(&self, s: usize, i: usize) -> Vector {
        self.blocks[s].get(i).map_or_else(|| zero(self.d), |p| p.1.clone())
    }

    /// `W^(x)(C)` (`x_side`) or `W^(y)(C)`: `⟨Σ_s (x_j + Σ_i c_ij y_i)⟩`,
    /// summed over the full blocks only; a partial last block would spoil
    /// singularity and is already tied to the first block by `u_i`, `v_i`.
    fn twisted(&self, m: &Matrix, x_side: bool) -> Subspace {
        let f = self.f;
        let full: Vec<usize> = (0..self.blocks.len()).filter(|&s| self.blocks[s].len() == self.k).collect();
        let vs: Vec<Vector> = (0..self.k)
            .map(|j| {
                let mut acc = zero(self.d);
                for &s in &full {
                    let (a, b): (Vector, Box<dyn Fn(usize) -> Vector>) = if x_side {
                        (self.x(s, j), Box::new(move |i| self.y(s, i)))
                    } else {
                        (self.y(s, j), Box::new(move |i| self.x(s, i)))
                    };
                    acc = vec_add(f, &acc, &a);
                    for i in 0..self.k {
                        let c = m.get(i, j);
                        if !c.is_zero() {
                            acc = vec_add(f, &acc, &vec_scale(f, c, &b(i)));
                        }
                    }
                }
                acc
            })
            .collect();
        span(f, self.d, &vs)
    }

    fn side(&self, s: usize, x_side: bool) -> Subspace {
        let vs: Vec<Vector> = (0..self.k).map(|i| if x_side { self.x(s, i) } else { self.y(s, i) }).collect();
        span(self.f, self.d, &vs)
    }
}

fn parity_ok(k: usize, elems: &[Subspace]) -> bool {
    for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            match elems[i].intersect(&elems[j]) {
                Ok(x) if x.dim() % 2 == k % 2 => {}
                _ => return false,
            }
        }
    }
    true
}

/// Totally singular `k`-subspaces.
pub fn subspace_base_totsing(spec: &MatGroupSpec, k: usize, seed: u64, node_budget: u64) -> Result<BaseCandidate> {
    let form = &spec.form;
    let f = &spec.field;
    let d = spec.d;
    if form.kind == FormKind::None {
        return Err(Error::KindMismatch("a form is needed for totally singular orbits".into()));
    }
    let wd = form.witt_decompose(None)?;
    let l = wd.witt_index;
    if k == 0 || k > l {
        return Err(Error::OrbitEmpty(format!("no totally singular {k}-subspaces (Witt index {l})")));
    }
    let orbit = OrbitChoice::Totsing;
    if k == 1 {
        if form.kind == FormKind::Symplectic {
            let elems = all_subspace_elements(d, 1, f)?;
            let log = vec!["every point is isotropic: all-subspaces construction for k = 1".into()];
            return finish_subspaces(spec, &orbit, 1, elems, d + 5, "a_plus_5", seed, log);
        }
        return fallback(spec, &orbit, 1, vec![], "singular points (ProofCaseInapplicable)", seed, node_budget);
    }
    let pairs = wd.hyperbolic_pairs.clone();
    if spec.family == Family::OmegaPlus && 2 * k == d {
        return totsing_o_plus_half(spec, k, &pairs, seed, node_budget);
    }
    let a = l / k;
    let r = l % k;
    let mut blocks: Vec<Vec<(Vector, Vector)>> = (0..a).map(|s| pairs[s * k..(s + 1) * k].to_vec()).collect();
    blocks.push(pairs[a * k..a * k + r].to_vec());
    let fr = Frame { f, d, k, blocks };
    let mut log = vec![format!("Witt index {l} = {a}*{k} + {r}, defect {}", wd.witt_defect)];
    let mut elems = Vec::new();
    for s in 0..a {
        elems.push(fr.side(s, true));
        elems.push(fr.side(s, false));
    }
    if r > 0 {
        for x_side in [true, false] {
            let vs: Vec<Vector> = (0..k)
                .map(|i| {
                    let s = if i < r { a } else { 0 };
                    if x_side {
                        fr.x(s, i)
                    } else {
                        fr.y(s, i)
                    }
                })
                .collect();
            elems.push(span(f, d, &vs));
        }
    }
    let u: Vec<Vector> = (0..k).map(|i| (0..=a).fold(zero(d), |acc, s| vec_add(f, &acc, &fr.x(s, i)))).collect();
    let v: Vec<Vector> = (0..k).map(|i| (0..=a).fold(zero(d), |acc, s| vec_add(f, &acc, &fr.y(s, i)))).collect();
    elems.push(span(f, d, &u));
    elems.push(span(f, d, &v));
    let mut inapplicable = None;
    if form.kind == FormKind::Symplectic {
        let (c, dm) = classical::full_algebra_symmetric_pair(k, f)?;
        for m in [&Matrix::identity(f, k), &c, &dm] {
            elems.push(fr.twisted(m, false));
        }
        log.push("W^(y)(I), W^(y)(C), W^(y)(D) with symmetric C, D".into());
    } else {
        let (c, dm) = antisym_pair(f, k);
        elems.push(fr.twisted(&c, true));
        elems.push(fr.twisted(&c, false));
        if dm.is_zero() {
            inapplicable = Some("D vanishes for k = 2 (ProofCaseInapplicable)");
        } else {
            elems.push(fr.twisted(&dm, true));
            elems.push(fr.twisted(&dm, false));
        }
        log.push("W^(x)(C), W^(y)(C), W^(x)(D), W^(y)(D) with antisymmetric C, D".into());
        if wd.witt_defect > 0 {
            elems.extend(anisotropic_handles(form, &fr, &wd.anisotropic_basis, &mut log));
        }
    }
    if let Some(why) = inapplicable {
        return fallback(spec, &orbit, k, dedup_subspaces(elems), why, seed, node_budget);
    }
    finish_subspaces(spec, &orbit, k, elems, 2 * a + 10, "two_a_plus_10", seed, log)
}

/// `V_{a+2}^(x) ≤ V_1 ⊕ U` spanned by
/// `z_j = f_j + Σ_{i<j} γ_ij x_i + α_j x_j + y_j` (`j < dim U`) and `x_j` (otherwise), plus `⟨z_j + y_j⟩` when that is
/// totally singular.
fn anisotropic_handles(form: &Form, fr: &Frame<'_>, aniso: &[Vector], log: &mut Vec<String>) -> Vec<Subspace> {
    let f = fr.f;
    let d = fr.d;
    let k = fr.k;
    let m = aniso.len();
    if m > k {
        return vec![];
    }
    let mut z: Vec<Vector> = Vec::new();
    for j in 0..k {
        if j >= m {
            z.push(fr.x(0, j));
            continue;
        }
        let fj = &aniso[j];
        let alpha = match form.kind {
            FormKind::Quadratic => f.neg(form.q_eval(fj).unwrap()),
            _ => {
                let t = f.neg(form.evaluate(fj, fj));
                f.elements().find(|&c| f.add(c, form.sigma(c)) == t).unwrap_or(Fe::ZERO)
            }
        };
        let mut zj = vec_add(f, fj, &fr.y(0, j));
        zj = vec_add(f, &zj, &vec_scale(f, alpha, &fr.x(0, j)));
        for (i, fi) in aniso.iter().enumerate().take(j) {
            let yx = form.evaluate(&fr.y(0, i), &fr.x(0, i));
            let g = form.sigma(f.neg(f.div(form.evaluate(fi, fj), yx).unwrap()));
            zj = vec_add(f, &zj, &vec_scale(f, g, &fr.x(0, i)));
        }
        z.push(zj);
    }
    let mut out = Vec::new();
    let vz = span(f, d, &z);
    if vz.dim() == k && form.is_totally_singular(&vz) {
        out.push(vz);
        let w: Vec<Vector> = (0..k).map(|j| vec_add(f, &z[j], &fr.y(0, j))).collect();
        let ws = span(f, d, &w);
        if ws.dim() == k && form.is_totally_singular(&ws) {
            out.push(ws);
            log.push("V_{a+2}^(x) and its y-shift for the anisotropic part".into());
        } else {
            log.push("V_{a+2}^(x) for the anisotropic part (y-shift not singular, omitted)".into());
        }
    } else {
        log.push("anisotropic handle not singular; omitted".into());
    }
    out
}

/// O+ with `d = 2k`: six subspaces for even `k`; for odd `k` the even
/// construction on `⟨x, y⟩^⊥` extended by `x`, then `W_1, W_2, W_3`.
fn totsing_o_plus_half(
    spec: &MatGroupSpec,
    k: usize,
    pairs: &[(Vector, Vector)],
    seed: u64,
    node_budget: u64,
) -> Result<BaseCandidate> {
    let f = &spec.field;
    let d = spec.d;
    let orbit = OrbitChoice::Totsing;
    let even_six = |kk: usize, ps: &[(Vector, Vector)]| -> Vec<Subspace> {
        let fr = Frame { f, d, k: kk, blocks: vec![ps.to_vec()] };
        let (c, dm) = antisym_pair(f, kk);
        let mut v = vec![fr.side(0, true), fr.side(0, false), fr.twisted(&c, true), fr.twisted(&c, false)];
        if !dm.is_zero() {
            v.push(fr.twisted(&dm, true));
            v.push(fr.twisted(&dm, false));
        }
        v
    };
    let (elems, claimed, bound_ref, log) = if k.is_multiple_of(2) {
        (even_six(k, &pairs[..k]), 6, "o_plus_even_6", vec!["even k: six subspaces of one family".to_string()])
    } else {
        let (x, y) = pairs[0].clone();
        let inner = &pairs[1..k];
        let mut out: Vec<Subspace> = even_six(k - 1, inner)
            .into_iter()
            .map(|us| {
                let mut b = us.basis();
                b.push(x.clone());
                span(f, d, &b)
            })
            .collect();
        let xi = |i: usize| inner[i].0.clone();
        let yi = |i: usize| inner[i].1.clone();
        let mut w1 = vec![y.clone(), yi(0)];
        w1.extend((1..k - 1).map(xi));
        let mut w2 = vec![y.clone(), xi(0)];
        w2.extend((1..k - 1).map(yi));
        // x_{k-1} swapped for y_{k-1}: with all of x_2..x_{k-1} the span meets
        // V_1 in even dimension and lies in the other family
        let mut w3 = vec![vec_add(f, &x, &xi(0)), crate::linalg::vec_sub(f, &y, &yi(0))];
        w3.extend((1..k - 2).map(xi));
        w3.push(yi(k - 2));
        out.extend([span(f, d, &w1), span(f, d, &w2), span(f, d, &w3)]);
        (out, 9, "o_plus_odd_9", vec!["odd k: <x> + U_s from the even case on <x,y>^perp, then W_1, W_2, W_3".to_string()])
    };
    let elems = dedup_subspaces(elems);
    if !parity_ok(k, &elems) {
        return Err(Error::GenerationFailed("pairwise intersection parity differs from k".into()));
    }
    let mut log = log;
    let short = if k.is_multiple_of(2) { k == 2 } else { k == 3 };
    if short {
        if k == 2 {
            return fallback(spec, &orbit, k, elems, "D vanishes in the even step (ProofCaseInapplicable)", seed, node_budget);
        }
        log.push("D vanishes in the even step: recipe is short, completed greedily".into());
    }
    finish_subspaces(spec, &orbit, k, elems, claimed, bound_ref, seed, log)
}

/// Dispatch on the orbit kind.
pub fn construct_subspace(spec: &MatGroupSpec, k: usize, orbit: &OrbitChoice, seed: u64, node_budget: u64) -> Result<BaseCandidate> {
    match orbit {
        OrbitChoice::All => {
            if spec.form.kind != FormKind::None {
                return Err(Error::InvalidParameters("all k-subspaces is not an orbit of a form-preserving group".into()));
            }
            let mut c = subspace_base_all_any(spec.d, k, &spec.field)?;
            c.action = Action::Subspaces { group: spec.name(), d: spec.d, k, orbit: OrbitKind::All };
            Ok(c)
        }
        OrbitChoice::Nondeg { ty } => subspace_base_nondeg(spec, k, ty, seed, node_budget),
        OrbitChoice::Totsing => subspace_base_totsing(spec, k, seed, node_budget),
    }
}

// ---------------------------------------------------------------------------
// Vectors

/// Standard basis of a symplectic space.
pub fn symplectic_vector_base(d: usize, field: &Field) -> Result<BaseCandidate> {
    if d == 0 || d % 2 == 1 {
        return Err(Error::InvalidParameters("symplectic dimension must be even and positive".into()));
    }
    Ok(BaseCandidate {
        action: Action::Vectors { group: format!("Sp({d},{})", field.q()), d },
        elements: Elements::Vectors((0..d).map(|i| unit_vector(d, i)).collect()),
        claimed_bound: d,
        bound_ref: "symplectic_vectors_d".into(),
        seed: 0,
        log: vec!["standard basis".into()],
        flagged: false,
    })
}

/// `v_i = Σ_j λ_j e_{(i-1)r+j}` over blocks of `r` coordinates, `λ` an
/// `F_q0`-basis of `F_q`, `q = q0^r`.
pub fn subfield_base(d: usize, field: &Field, r: u32) -> Result<BaseCandidate> {
    let f = field;
    if r == 0 || !f.e().is_multiple_of(r) {
        return Err(Error::NotADivisor(r, f.e()));
    }
    let lam = f.basis_over_subfield(r)?;
    let r = r as usize;
    let k = d / r;
    let mut vs = Vec::new();
    for i in 0..=k {
        let mut v = zero(d);
        for j in i * r..((i + 1) * r).min(d) {
            v[j] = lam[j - i * r];
        }
        if !is_zero_vec(&v) {
            vs.push(v);
        }
    }
    Ok(BaseCandidate {
        action: Action::Subfield { d, q: f.q() as u64, r: r as u32 },
        elements: Elements::Vectors(vs),
        claimed_bound: k + 2,
        bound_ref: "d_over_r_plus_2".into(),
        seed: 0,
        log: vec![format!("d = {k}*{r} + {}; the scalar quotient contributes the +2", d % r)],
        flagged: false,
    })
}

/// Vectors of `V_1 ⊗ V_2` (`x_a ⊗ y` at coordinates `a*n2..`) built from a
/// linearly independent strong base `y_1..y_b` of `V_2`: `v_1..v_{r+1}`
/// with `b = r*n1 + s`, then `v = Σ (C⊗1) v_i` and `w = Σ (D⊗1) v_i` for an
/// `SL(n1,q)` generating pair `C, D`.
pub fn tensor_base(ys: &[Vector], n1: usize, field: &Field) -> Result<BaseCandidate> {
    let f = field;
    let b = ys.len();
    let n2 = ys.first().map_or(0, |y| y.len());
    if n1 == 0 || n1 > b {
        return Err(Error::InvalidParameters(format!("need 1 <= n1 <= {b}")));
    }
    if span(f, n2, ys).dim() != b {
        return Err(Error::IndependenceViolated);
    }
    let dim = n1 * n2;
    let tensor = |a: usize, y: &Vector| {
        let mut v = zero(dim);
        v[a * n2..(a + 1) * n2].copy_from_slice(y);
        v
    };
    let action = Action::Tensor { n1, n2, q: f.q() as u64 };
    if n1 == 1 {
        return Ok(BaseCandidate {
            action,
            elements: Elements::Vectors(ys.iter().map(|y| tensor(0, y)).collect()),
            claimed_bound: b,
            bound_ref: "strong_base_size".into(),
            seed: 0,
            log: vec!["n1 = 1: the strong base itself".into()],
            flagged: false,
        });
    }
    let r = b / n1;
    let s = b % n1;
    let mut vs: Vec<Vector> = Vec::new();
    for i in 0..r {
        vs.push((0..n1).fold(zero(dim), |acc, kk| vec_add(f, &acc, &tensor(kk, &ys[i * n1 + kk]))));
    }
    if s > 0 {
        vs.push((0..s).fold(zero(dim), |acc, kk| vec_add(f, &acc, &tensor(kk, &ys[r * n1 + kk]))));
    }
    let total = vsum(f, dim, &vs.iter().collect::<Vec<_>>());
    let (c, dm) = classical::sl_generating_pair(n1, f)?;
    let id2 = Matrix::identity(f, n2);
    vs.push(c.kron(&id2).mul_vec(&total));
    vs.push(dm.kron(&id2).mul_vec(&total));
    Ok(BaseCandidate {
        action,
        elements: Elements::Vectors(vs),
        claimed_bound: b / n1 + 3,
        bound_ref: "strong_over_n1_plus_3".into(),
        seed: 0,
        log: vec![format!("b = {r}*{n1} + {s}: v_1..v_{}, then v, w", r + usize::from(s > 0))],
        flagged: false,
    })
}

fn no_sample() -> Error {
    Error::OrbitEmpty("no element of the requested orbit found by sampling".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Status;

    fn subspaces(c: &BaseCandidate) -> &[Subspace] {
        c.elements.subspaces().unwrap()
    }

    #[test]
    fn subset_examples() {
        let c = subset_base(4, 2).unwrap();
        assert_eq!(c.size(), 2);
        let Elements::Subsets(s) = &c.elements else { panic!() };
        assert!(subset_certified(4, s));

        let c = subset_base(9, 3).unwrap();
        assert_eq!(c.size(), 4);
        let Elements::Subsets(s) = &c.elements else { panic!() };
        assert!(subset_certified(9, s));

        let c = subset_base(20, 10).unwrap();
        assert!(c.size() <= 5);
        let Elements::Subsets(s) = &c.elements else { panic!() };
        assert!(subset_certified(20, s));
        assert!(s.iter().all(|x| x.len() == 10));
    }

    #[test]
    fn subset_exact_grid() {
        for m in 4..=30usize {
            for k in 2..=m / 2 {
                if k * k > m {
                    continue;
                }
                let c = subset_base(m, k).unwrap();
                assert_eq!(c.size(), (2 * m - 2).div_ceil(k + 1), "({m},{k})");
                let Elements::Subsets(s) = &c.elements else { panic!() };
                assert!(subset_certified(m, s), "({m},{k})");
            }
        }
    }

    #[test]
    fn partition_examples() {
        for (a, b, cap) in [(2, 2, 3), (3, 3, 6), (2, 4, 6)] {
            let c = partition_base(a, b, 200_000).unwrap();
            assert!(c.size() <= cap, "({a},{b}) size {}", c.size());
            assert!(c.size() <= c.claimed_bound);
            let Elements::Partitions(p) = &c.elements else { panic!() };
            let cert = verify::verify_partition_base(a, b, p, 100_000).unwrap();
            assert!(cert.is_base(), "({a},{b}) {:?}", cert.status);
        }
    }

    #[test]
    fn all_subspace_examples() {
        for (d, k, q) in [(4, 2, 2), (5, 2, 3), (2, 1, 5), (7, 3, 2), (6, 2, 4)] {
            let f = Field::of_order(q).unwrap();
            let c = subspace_base_all(d, k, &f).unwrap();
            assert!(c.size() <= d / k + 5);
            assert_eq!(stabilizing_algebra_in(&f, d, subspaces(&c)).unwrap().dim(), 1, "d={d} k={k} q={q}");
        }
        let f = Field::of_order(2).unwrap();
        assert!(subspace_base_all(4, 2, &f).unwrap().size() <= 7);
    }

    #[test]
    fn dual_side() {
        let f = Field::of_order(3).unwrap();
        let c = subspace_base_all_any(5, 3, &f).unwrap();
        assert!(subspaces(&c).iter().all(|u| u.dim() == 3));
        assert_eq!(stabilizing_algebra_in(&f, 5, subspaces(&c)).unwrap().dim(), 1);
    }

    #[test]
    fn pairs_examples() {
        let f2 = Field::of_order(2).unwrap();
        let c = pairs_base(5, 2, &f2, PairKind::Flag).unwrap();
        assert!(c.size() <= 7);
        let c = pairs_base(4, 1, &f2, PairKind::Complement).unwrap();
        assert!(c.size() <= 9);
        assert!(pairs_base(6, 3, &f2, PairKind::Flag).is_err());
    }

    #[test]
    fn nondeg_sp62() {
        let spec = MatGroupSpec::of_order(Family::Sp, 6, 2).unwrap();
        let ty = nondeg_types(&spec, 2, 1)[0];
        let c = subspace_base_nondeg(&spec, 2, &ty, 3, 200_000).unwrap();
        assert!(c.size() <= 13);
        let orbit = OrbitChoice::Nondeg { ty };
        assert!(subspaces(&c).iter().all(|u| in_orbit(&spec, &orbit, None, u)));
        assert!(verify::verify_subspace_base(&spec, subspaces(&c), DEFAULT_ENUM_CAP).unwrap().is_base());
    }

    #[test]
    fn nondeg_anisotropic_planes_o_minus() {
        // a = 2 at d = 6: documented fallback
        let spec = MatGroupSpec::of_order(Family::OmegaMinus, 6, 3).unwrap();
        let ty = nondeg_types(&spec, 2, 1).into_iter().find(|t| t.witt_index == 0).unwrap();
        let c = subspace_base_nondeg(&spec, 2, &ty, 5, 200_000).unwrap();
        assert!(c.flagged);
        assert!(verify::verify_subspace_base(&spec, subspaces(&c), DEFAULT_ENUM_CAP).unwrap().is_base());

        let spec = MatGroupSpec::of_order(Family::OmegaMinus, 8, 3).unwrap();
        let ty = nondeg_types(&spec, 2, 1).into_iter().find(|t| t.witt_index == 0).unwrap();
        let c = subspace_base_nondeg(&spec, 2, &ty, 5, 200_000).unwrap();
        assert_eq!(c.bound_ref, "d_over_k_plus_8");
        assert_eq!(c.size(), 3 + 8);
        let orbit = OrbitChoice::Nondeg { ty };
        assert!(subspaces(&c).iter().all(|u| in_orbit(&spec, &orbit, None, u)));
        let v = verify::verify_subspace_base(&spec, subspaces(&c), DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(v.status, Status::GroupBase);
        assert!(v.algebra_dim.unwrap() > 1);
    }

    #[test]
    fn totsing_sp82() {
        let spec = MatGroupSpec::of_order(Family::Sp, 8, 2).unwrap();
        let c = subspace_base_totsing(&spec, 2, 3, 200_000).unwrap();
        assert!(c.size() <= 14);
        assert!(subspaces(&c).iter().all(|u| spec.form.is_totally_singular(u) && u.dim() == 2));
        assert!(verify::verify_subspace_base(&spec, subspaces(&c), DEFAULT_ENUM_CAP).unwrap().is_base());
    }

    fn pairwise_parity(k: usize, v: &[Subspace]) -> bool {
        v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| a.intersect(b).unwrap().dim() % 2 == k % 2))
    }

    #[test]
    fn o_plus_half_even() {
        let spec = MatGroupSpec::of_order(Family::OmegaPlus, 8, 3).unwrap();
        let c = subspace_base_totsing(&spec, 4, 1, 200_000).unwrap();
        assert_eq!(c.size(), 6);
        assert!(!c.flagged);
        assert!(pairwise_parity(4, subspaces(&c)));
        assert!(verify::verify_subspace_base(&spec, subspaces(&c), DEFAULT_ENUM_CAP).unwrap().is_base());
    }

    #[test]
    fn o_plus_half_odd() {
        let spec = MatGroupSpec::of_order(Family::OmegaPlus, 6, 2).unwrap();
        let c = subspace_base_totsing(&spec, 3, 1, 200_000).unwrap();
        assert!(c.size() <= 9);
        assert!(pairwise_parity(3, subspaces(&c)));
        assert!(verify::verify_subspace_base(&spec, subspaces(&c), DEFAULT_ENUM_CAP).unwrap().is_base());
    }

    #[test]
    fn antisym_pair_pins_scalars_for_k_at_least_5() {
        for k in 5..=6usize {
            for q in [2u64, 4, 5] {
                let spec = MatGroupSpec::of_order(Family::OmegaPlus, 2 * k, q).unwrap();
                let f = &spec.field;
                let wd = spec.form.witt_decompose(None).unwrap();
                let xs: Vec<Vector> = wd.hyperbolic_pairs.iter().map(|p| p.0.clone()).collect();
                let ys: Vec<Vector> = wd.hyperbolic_pairs.iter().map(|p| p.1.clone()).collect();
                let (c, dm) = antisym_pair(f, k);
                let graph = |m: &Matrix, a: &[Vector], b: &[Vector]| {
                    let vs: Vec<Vector> = (0..k)
                        .map(|j| (0..k).fold(a[j].clone(), |acc, i| crate::linalg::vec_add(f, &acc, &crate::linalg::vec_scale(f, m.get(i, j), &b[i]))))
                        .collect();
                    Subspace::span(f, 2 * k, &vs)
                };
                let six = vec![
                    Subspace::span(f, 2 * k, &xs),
                    Subspace::span(f, 2 * k, &ys),
                    graph(&c, &xs, &ys),
                    graph(&c, &ys, &xs),
                    graph(&dm, &xs, &ys),
                    graph(&dm, &ys, &xs),
                ];
                assert_eq!(stabilizing_algebra_in(f, 2 * k, &six).unwrap().dim(), 1, "k={k} q={q}");
            }
        }
    }

    #[test]
    fn o_plus_eight_family_min_base() {
        for (q, b) in [(2u64, 6usize), (4, 7)] {
            let spec = MatGroupSpec::of_order(Family::OmegaPlus, 8, q).unwrap();
            let wd = spec.form.witt_decompose(None).unwrap();
            let xs: Vec<Vector> = wd.hyperbolic_pairs.iter().map(|p| p.0.clone()).collect();
            let first = Subspace::span(&spec.field, 8, &xs);
            let gens = classical::generators(&spec).unwrap();
            let fg = family_generators(&spec, &OrbitChoice::Totsing, &gens.gens, &first).unwrap();
            let ind = induce_subspace_orbit(&fg, &first, 10_000).unwrap();
            let order = classical::matrix_order(&spec) / BigUint::from(2 * spec.scalars().len());
            let chain = StabilizerChain::with_known_order(ind.group.degree, &ind.group.generators, &[], &order, 3).unwrap();
            assert_eq!(min_base_with_chain(&chain, 1_000_000).unwrap().b, b, "q={q}");
        }
    }

    #[test]
    fn o_plus_four_has_no_base_on_a_family() {
        let spec = MatGroupSpec::of_order(Family::OmegaPlus, 4, 3).unwrap();
        assert!(matches!(subspace_base_totsing(&spec, 2, 1, 200_000), Err(Error::UnfaithfulAction(_))));
    }

    #[test]
    fn symplectic_vectors() {
        let f = Field::of_order(3).unwrap();
        let c = symplectic_vector_base(4, &f).unwrap();
        assert_eq!(c.size(), 4);
        assert!(symplectic_vector_base(3, &f).is_err());

        let spec = MatGroupSpec::of_order(Family::Sp, 6, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..50 {
            let u = random_subspace(&spec.field, 6, 5, &mut rng);
            let w = verify::symplectic_insufficiency_witness(&u, &spec.form).unwrap();
            assert!(!w.is_identity());
            assert!(spec.form.preserves(&w));
            assert!(u.basis().iter().all(|v| w.mul_vec(v) == *v));
        }
    }

    #[test]
    fn subfield_examples() {
        let f4 = Field::of_order(4).unwrap();
        let c = subfield_base(4, &f4, 2).unwrap();
        assert_eq!(c.size(), 2);
        assert_eq!(c.claimed_bound, 4);
        let Elements::Vectors(v) = &c.elements else { panic!() };
        assert!(verify::verify_subfield_vectors(&f4, 2, v).unwrap().is_base());

        let c = subfield_base(3, &f4, 2).unwrap();
        assert_eq!(c.size(), 2);
        let Elements::Vectors(v) = &c.elements else { panic!() };
        assert!(verify::verify_subfield_vectors(&f4, 2, v).unwrap().is_base());

        let f9 = Field::of_order(9).unwrap();
        assert_eq!(subfield_base(3, &f9, 1).unwrap().size(), 3);
        assert!(matches!(subfield_base(3, &f9, 3), Err(Error::NotADivisor(3, 2))));
    }

    #[test]
    fn tensor_examples() {
        let f = Field::of_order(2).unwrap();
        let ys: Vec<Vector> = (0..3).map(|i| unit_vector(3, i)).collect();
        let c = tensor_base(&ys, 2, &f).unwrap();
        assert!(c.size() <= c.claimed_bound);
        let Elements::Vectors(v) = &c.elements else { panic!() };
        let cert = verify::verify_tensor_base(&f, 2, 3, v, DEFAULT_ENUM_CAP).unwrap();
        assert!(cert.is_base(), "{:?}", cert.status);

        let c = tensor_base(&ys, 1, &f).unwrap();
        assert_eq!(c.size(), 3);

        let dep = vec![unit_vector(3, 0), unit_vector(3, 0)];
        assert!(matches!(tensor_base(&dep, 1, &f), Err(Error::IndependenceViolated)));
    }

    #[test]
    fn unfaithful_orbit_rejected() {
        let spec = MatGroupSpec::of_order(Family::OmegaOdd, 3, 3).unwrap();
        let ty = nondeg_types(&spec, 1, 7).into_iter().find(|t| t.disc_square == Some(true)).unwrap();
        let r = subspace_base_nondeg(&spec, 1, &ty, 1, 200_000);
        assert!(matches!(r, Err(Error::UnfaithfulAction(_))));
    }

    #[test]
    fn candidates_are_deterministic() {
        let spec = MatGroupSpec::of_order(Family::SU, 6, 4).unwrap();
        let a = construct_subspace(&spec, 2, &OrbitChoice::Totsing, 9, 100_000).unwrap();
        let b = construct_subspace(&spec, 2, &OrbitChoice::Totsing, 9, 100_000).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let v = verify::verify_subspace_base(&spec, subspaces(&a), DEFAULT_ENUM_CAP).unwrap();
        assert!(matches!(v.status, Status::StrongBase | Status::GroupBase));
    }
}
