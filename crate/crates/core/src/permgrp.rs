//! Permutation groups: stabilizer chains, induced actions, pointwise
//! stabilizers and an exhaustive minimal-base search.
//!
//! Permutations act on the right: `x^(gh) = (x^g)^h`, so `g.then(h)` is the
//! product `gh`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Subspace, Vector};

/// Default cap on natural-action degrees.
pub const NATURAL_DEGREE_CAP: u64 = 1_000_000;
/// Default cap on induced-action degrees.
pub const INDUCED_DEGREE_CAP: u64 = 100_000;
/// Default node budget of the minimal-base search.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;
/// Random elements tried before a known-order chain build falls back to the
/// deterministic algorithm.
const RANDOM_SIFT_CAP: usize = 4000;

const NOT_IN_ORBIT: u32 = u32::MAX;
const ROOT: u32 = u32::MAX - 1;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm(pub Vec<u32>);

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycles())
    }
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm((0..n as u32).collect())
    }

    /// Checks the images form a bijection of `0..n`.
    pub fn from_images(images: Vec<u32>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x as usize >= n || seen[x as usize] {
                return Err(Error::Parse("images do not form a permutation".into()));
            }
            seen[x as usize] = true;
        }
        Ok(Perm(images))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn image(&self, x: u32) -> u32 {
        self.0[x as usize]
    }

    /// The product `self * other`: apply `self`, then `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&x| other.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn first_moved_point(&self) -> Option<u32> {
        self.0.iter().enumerate().find(|(i, &x)| *i as u32 != x).map(|(i, _)| i as u32)
    }

    /// A permutation of degree `n` from cycles of 0-indexed points.
    pub fn from_cycle_list(n: usize, cycles: &[Vec<u32>]) -> Result<Perm> {
        let mut img: Vec<u32> = (0..n as u32).collect();
        let mut used = vec![false; n];
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                if x as usize >= n || used[x as usize] {
                    return Err(Error::Parse(format!("bad cycle point {}", x + 1)));
                }
                used[x as usize] = true;
                img[x as usize] = c[(i + 1) % c.len()];
            }
        }
        Ok(Perm(img))
    }

    /// Parses disjoint cycle notation with 1-indexed points, e.g. `(1 2 3)(4 5)`.
    pub fn parse_cycles(n: usize, s: &str) -> Result<Perm> {
        let s = s.trim();
        if s.is_empty() || s == "()" {
            return Ok(Perm::identity(n));
        }
        let mut cycles = Vec::new();
        for part in s.split(')') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let body = part.strip_prefix('(').ok_or_else(|| Error::Parse(format!("malformed cycle '{part}'")))?;
            let pts: std::result::Result<Vec<u32>, _> =
                body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).map(|t| t.parse::<u32>()).collect();
            let pts = pts.map_err(|e| Error::Parse(e.to_string()))?;
            if pts.contains(&0) {
                return Err(Error::Parse("cycle points are 1-indexed".into()));
            }
            cycles.push(pts.into_iter().map(|p| p - 1).collect());
        }
        Self::from_cycle_list(n, &cycles)
    }

    /// Disjoint cycle notation, 1-indexed; `()` for the identity.
    pub fn to_cycles(&self) -> String {
        let mut seen = vec![false; self.0.len()];
        let mut out = String::new();
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] as usize == start {
                continue;
            }
            let mut c = vec![start + 1];
            seen[start] = true;
            let mut x = self.0[start] as usize;
            while x != start {
                seen[x] = true;
                c.push(x + 1);
                x = self.0[x] as usize;
            }
            let body: Vec<String> = c.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("({})", body.join(" ")));
        }
        if out.is_empty() {
            "()".into()
        } else {
            out
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PermGroupSpec {
    pub degree: usize,
    pub generators: Vec<Perm>,
    pub name: String,
}

impl PermGroupSpec {
    pub fn new(degree: usize, generators: Vec<Perm>, name: impl Into<String>) -> PermGroupSpec {
        PermGroupSpec { degree, generators, name: name.into() }
    }

    pub fn symmetric(m: usize) -> PermGroupSpec {
        let mut gens = Vec::new();
        if m >= 2 {
            gens.push(Perm::from_cycle_list(m, &[vec![0, 1]]).unwrap());
        }
        if m >= 3 {
            gens.push(Perm::from_cycle_list(m, &[(0..m as u32).collect()]).unwrap());
        }
        PermGroupSpec::new(m, gens, format!("Sym({m})"))
    }

    pub fn alternating(m: usize) -> PermGroupSpec {
        let mut gens = Vec::new();
        if m >= 3 {
            gens.push(Perm::from_cycle_list(m, &[vec![0, 1, 2]]).unwrap());
        }
        if m >= 4 {
            let cyc: Vec<u32> = if m % 2 == 1 { (0..m as u32).collect() } else { (1..m as u32).collect() };
            gens.push(Perm::from_cycle_list(m, &[cyc]).unwrap());
        }
        PermGroupSpec::new(m, gens, format!("Alt({m})"))
    }

    /// Orbits on `0..degree`, each sorted, listed by least element.
    pub fn orbits(&self) -> Vec<Vec<u32>> {
        orbits_of(self.degree, &self.generators)
    }
}

pub fn orbits_of(n: usize, gens: &[Perm]) -> Vec<Vec<u32>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut orb = vec![s as u32];
        let mut i = 0;
        while i < orb.len() {
            let y = orb[i];
            for g in gens {
                let z = g.image(y);
                if !seen[z as usize] {
                    seen[z as usize] = true;
                    orb.push(z);
                }
            }
            i += 1;
        }
        orb.sort_unstable();
        out.push(orb);
    }
    out
}

#[derive(Clone, Debug)]
struct Level {
    base: u32,
    /// Indices into the chain's generator pool.
    gens: Vec<usize>,
    orbit: Vec<u32>,
    /// Schreier vector: pool index of the edge label, `ROOT`, or `NOT_IN_ORBIT`.
    sv: Vec<u32>,
    /// Per orbit position, how many level generators were checked.
    checked: Vec<usize>,
}

/// A base and strong generating set with Schreier-vector transversals.
#[derive(Clone, Debug)]
pub struct StabilizerChain {
    degree: usize,
    pool: Vec<Perm>,
    pool_inv: Vec<Perm>,
    levels: Vec<Level>,
    input: Vec<Perm>,
}

/// Product-replacement random element generator.
struct ProductReplacement {
    state: Vec<Perm>,
    acc: Perm,
    rng: ChaCha8Rng,
}

impl ProductReplacement {
    fn new(gens: &[Perm], degree: usize, seed: u64) -> ProductReplacement {
        let mut state: Vec<Perm> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        if state.is_empty() {
            state.push(Perm::identity(degree));
        }
        let base = state.clone();
        while state.len() < 10 {
            state.push(base[state.len() % base.len()].clone());
        }
        let mut pr = ProductReplacement { state, acc: Perm::identity(degree), rng: ChaCha8Rng::seed_from_u64(seed) };
        for _ in 0..50 {
            pr.next();
        }
        pr
    }

    fn next(&mut self) -> Perm {
        let n = self.state.len();
        let i = self.rng.gen_range(0..n);
        let mut j = self.rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let prod = if self.rng.gen_bool(0.5) {
            self.state[i].then(&self.state[j])
        } else {
            self.state[i].then(&self.state[j].inverse())
        };
        self.state[i] = prod;
        self.acc = self.acc.then(&self.state[i]);
        self.acc.clone()
    }
}

impl StabilizerChain {
    fn empty(degree: usize, prefix: &[u32]) -> StabilizerChain {
        let mut c = StabilizerChain { degree, pool: vec![], pool_inv: vec![], levels: vec![], input: vec![] };
        for &b in prefix {
            c.push_level(b);
        }
        c
    }

    fn push_level(&mut self, base: u32) {
        let mut sv = vec![NOT_IN_ORBIT; self.degree];
        sv[base as usize] = ROOT;
        self.levels.push(Level { base, gens: vec![], orbit: vec![base], sv, checked: vec![0] });
    }

    /// Deterministic Schreier-Sims; base points are the smallest moved points.
    pub fn new(degree: usize, gens: &[Perm]) -> Result<StabilizerChain> {
        Self::with_base_prefix(degree, gens, &[])
    }

    pub fn from_spec(g: &PermGroupSpec) -> Result<StabilizerChain> {
        Self::new(g.degree, &g.generators)
    }

    /// Deterministic Schreier-Sims with a prescribed initial segment of the base.
    pub fn with_base_prefix(degree: usize, gens: &[Perm], prefix: &[u32]) -> Result<StabilizerChain> {
        check_degree(degree, gens, NATURAL_DEGREE_CAP)?;
        let mut c = Self::empty(degree, prefix);
        c.add_input(gens);
        c.complete_deterministic();
        Ok(c)
    }

    /// Chain for a group of known order, built from seeded random elements.
    /// The chain order never exceeds the group order, so reaching the target
    /// proves the chain complete; otherwise the deterministic algorithm
    /// finishes the job.
    pub fn with_known_order(
        degree: usize,
        gens: &[Perm],
        prefix: &[u32],
        order: &BigUint,
        seed: u64,
    ) -> Result<StabilizerChain> {
        check_degree(degree, gens, NATURAL_DEGREE_CAP)?;
        let mut c = Self::empty(degree, prefix);
        c.add_input(gens);
        if c.order() != *order {
            let mut pr = ProductReplacement::new(gens, degree, seed);
            c.sift_until(order, || pr.next());
        }
        if c.order() != *order {
            c.complete_deterministic();
        }
        if c.order() != *order {
            return Err(Error::GenerationFailed(format!("generators give order {}, expected {}", c.order(), order)));
        }
        Ok(c)
    }

    /// Random Schreier-Sims aimed at `order` that gives up after `stall`
    /// consecutive random elements sift through without progress. Returns
    /// `None` when the target is not reached, which happens in particular
    /// when the generators span a proper subgroup.
    pub fn try_known_order(degree: usize, gens: &[Perm], order: &BigUint, seed: u64, stall: usize) -> Option<StabilizerChain> {
        check_degree(degree, gens, NATURAL_DEGREE_CAP).ok()?;
        let mut c = Self::empty(degree, &[]);
        c.add_input(gens);
        let mut pr = ProductReplacement::new(gens, degree, seed);
        let mut idle = 0;
        while c.order() < *order && idle < stall {
            let (h, j) = c.sift_from(pr.next(), 0);
            if h.is_identity() {
                idle += 1;
            } else {
                idle = 0;
                c.add_strong(h, 0, j);
            }
        }
        (c.order() == *order).then_some(c)
    }

    /// Builds a chain from an arbitrary element source of a group of known
    /// order. Fails when the target is not reached within the cap.
    pub fn from_element_source(
        degree: usize,
        prefix: &[u32],
        order: &BigUint,
        cap: usize,
        mut source: impl FnMut() -> Perm,
    ) -> Result<StabilizerChain> {
        let mut c = Self::empty(degree, prefix);
        for _ in 0..cap {
            if c.order() == *order {
                break;
            }
            let g = source();
            c.sift_and_add(g);
        }
        if c.order() != *order {
            return Err(Error::GenerationFailed(format!("reached order {} of {}", c.order(), order)));
        }
        c.input = c.pool.clone();
        Ok(c)
    }

    fn sift_until(&mut self, order: &BigUint, mut next: impl FnMut() -> Perm) {
        for _ in 0..RANDOM_SIFT_CAP {
            if self.order() == *order {
                return;
            }
            let g = next();
            self.sift_and_add(g);
        }
    }

    fn sift_and_add(&mut self, g: Perm) {
        let (h, j) = self.sift_from(g, 0);
        if !h.is_identity() {
            self.add_strong(h, 0, j);
        }
    }

    fn add_input(&mut self, gens: &[Perm]) {
        self.input = gens.to_vec();
        for g in gens {
            if g.is_identity() {
                continue;
            }
            let k = self.levels.iter().take_while(|l| g.image(l.base) == l.base).count();
            self.add_strong(g.clone(), 0, k);
        }
    }

    /// Adds `h` to the generator lists of levels `from..=to`, creating level
    /// `to` if needed, and extends the orbits.
    fn add_strong(&mut self, h: Perm, from: usize, to: usize) {
        if to == self.levels.len() {
            let b = h.first_moved_point().expect("nontrivial residue");
            self.push_level(b);
        }
        let idx = self.pool.len();
        self.pool_inv.push(h.inverse());
        self.pool.push(h);
        for l in from..=to {
            self.levels[l].gens.push(idx);
            self.extend_orbit(l, idx);
        }
    }

    fn extend_orbit(&mut self, l: usize, new_gen: usize) {
        let lvl = &mut self.levels[l];
        let old = lvl.orbit.len();
        let g = &self.pool[new_gen];
        for i in 0..old {
            let z = g.image(lvl.orbit[i]);
            if lvl.sv[z as usize] == NOT_IN_ORBIT {
                lvl.sv[z as usize] = new_gen as u32;
                lvl.orbit.push(z);
                lvl.checked.push(0);
            }
        }
        let mut i = old;
        while i < lvl.orbit.len() {
            let y = lvl.orbit[i];
            for &s in &lvl.gens {
                let z = self.pool[s].image(y);
                if lvl.sv[z as usize] == NOT_IN_ORBIT {
                    lvl.sv[z as usize] = s as u32;
                    lvl.orbit.push(z);
                    lvl.checked.push(0);
                }
            }
            i += 1;
        }
    }

    /// `g * u_y^{-1}` where `u_y` is the transversal element of level `l`
    /// mapping the base point to `y`.
    fn strip_transversal(&self, l: usize, mut g: Perm, mut y: u32) -> Perm {
        let lvl = &self.levels[l];
        while lvl.sv[y as usize] != ROOT {
            let s = lvl.sv[y as usize] as usize;
            g = g.then(&self.pool_inv[s]);
            y = self.pool_inv[s].image(y);
        }
        g
    }

    /// Transversal element of level `l` mapping the base point to `y`.
    pub fn transversal(&self, l: usize, y: u32) -> Option<Perm> {
        let lvl = &self.levels[l];
        if lvl.sv[y as usize] == NOT_IN_ORBIT {
            return None;
        }
        let mut labels = Vec::new();
        let mut z = y;
        while lvl.sv[z as usize] != ROOT {
            let s = lvl.sv[z as usize] as usize;
            labels.push(s);
            z = self.pool_inv[s].image(z);
        }
        let mut u = Perm::identity(self.degree);
        for &s in labels.iter().rev() {
            u = u.then(&self.pool[s]);
        }
        Some(u)
    }

    /// Sifts `g` starting at level `start`; returns the residue and the
    /// level at which sifting stopped (`levels.len()` if it went through).
    fn sift_from(&self, mut g: Perm, start: usize) -> (Perm, usize) {
        for l in start..self.levels.len() {
            let y = g.image(self.levels[l].base);
            if self.levels[l].sv[y as usize] == NOT_IN_ORBIT {
                return (g, l);
            }
            g = self.strip_transversal(l, g, y);
        }
        (g, self.levels.len())
    }

    fn complete_deterministic(&mut self) {
        if self.levels.is_empty() {
            return;
        }
        let mut i = self.levels.len() - 1;
        loop {
            let mut added = None;
            'scan: for idx in 0..self.levels[i].orbit.len() {
                while self.levels[i].checked[idx] < self.levels[i].gens.len() {
                    let s = self.levels[i].gens[self.levels[i].checked[idx]];
                    self.levels[i].checked[idx] += 1;
                    let y = self.levels[i].orbit[idx];
                    let uy = self.transversal(i, y).unwrap();
                    let ys = self.pool[s].image(y);
                    let sg = uy.then(&self.pool[s]);
                    let sg = self.strip_transversal(i, sg, ys);
                    let (h, j) = self.sift_from(sg, i + 1);
                    if !h.is_identity() {
                        added = Some((h, j));
                        break 'scan;
                    }
                }
            }
            match added {
                Some((h, j)) => {
                    self.add_strong(h, i + 1, j);
                    i = j.min(self.levels.len() - 1);
                }
                None => {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn orbit_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn basic_orbit(&self, l: usize) -> &[u32] {
        &self.levels[l].orbit
    }

    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    /// Generators of the input group.
    pub fn generators(&self) -> &[Perm] {
        &self.input
    }

    /// Strong generators of the stabilizer of the first `l` base points.
    pub fn level_generators(&self, l: usize) -> Vec<Perm> {
        if l >= self.levels.len() {
            return vec![];
        }
        self.levels[l].gens.iter().map(|&s| self.pool[s].clone()).collect()
    }

    pub fn strong_generators(&self) -> &[Perm] {
        &self.pool
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.degree() == self.degree && self.sift_from(g.clone(), 0).0.is_identity()
    }

    /// Uniformly random element.
    pub fn random_element(&self, rng: &mut impl Rng) -> Perm {
        let mut g = Perm::identity(self.degree);
        for l in (0..self.levels.len()).rev() {
            let orb = &self.levels[l].orbit;
            let y = orb[rng.gen_range(0..orb.len())];
            g = g.then(&self.transversal(l, y).unwrap());
        }
        g
    }

    /// All elements; only for small groups.
    pub fn elements(&self) -> Vec<Perm> {
        let mut out = vec![Perm::identity(self.degree)];
        for l in (0..self.levels.len()).rev() {
            let ts: Vec<Perm> = self.levels[l].orbit.iter().map(|&y| self.transversal(l, y).unwrap()).collect();
            out = out.iter().flat_map(|g| ts.iter().map(move |t| g.then(t))).collect();
        }
        out
    }
}

fn check_degree(degree: usize, gens: &[Perm], cap: u64) -> Result<()> {
    if degree as u64 > cap {
        return Err(Error::DegreeCapExceeded(degree as u64, cap));
    }
    if let Some(g) = gens.iter().find(|g| g.degree() != degree) {
        return Err(Error::DimensionMismatch(format!("generator of degree {} in group of degree {}", g.degree(), degree)));
    }
    Ok(())
}

/// Deterministic Schreier-Sims on a group spec.
pub fn schreier_sims(g: &PermGroupSpec) -> Result<StabilizerChain> {
    StabilizerChain::from_spec(g)
}

/// Result of a pointwise stabilizer computation.
#[derive(Clone, Debug)]
pub struct PointwiseStabilizer {
    pub group: PermGroupSpec,
    pub order: BigUint,
}

/// Generators and order of the pointwise stabilizer of `points`, via a
/// change of base to a chain starting with `points`.
pub fn pointwise_stabilizer(chain: &StabilizerChain, points: &[u32]) -> Result<PointwiseStabilizer> {
    if let Some(&p) = points.iter().find(|&&p| p as usize >= chain.degree) {
        return Err(Error::InvalidParameters(format!("point {p} outside domain")));
    }
    let c = rebase(chain, points)?;
    let l = points.len();
    let order = c.levels[l.min(c.levels.len())..].iter().fold(BigUint::one(), |acc, lv| acc * BigUint::from(lv.orbit.len()));
    let gens = c.level_generators(l);
    Ok(PointwiseStabilizer {
        group: PermGroupSpec::new(chain.degree, gens, "pointwise stabilizer"),
        order,
    })
}

/// A chain for the same group whose base starts with `prefix`.
pub fn rebase(chain: &StabilizerChain, prefix: &[u32]) -> Result<StabilizerChain> {
    let mut seed = 0x5eed_u64;
    for &p in prefix {
        seed = seed.wrapping_mul(1_000_003).wrapping_add(p as u64);
    }
    let order = chain.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = StabilizerChain::empty(chain.degree, prefix);
    c.input = chain.input.clone();
    for g in chain.strong_generators() {
        c.sift_and_add(g.clone());
    }
    c.sift_until(&order, || chain.random_element(&mut rng));
    if c.order() != order {
        c.complete_deterministic();
    }
    debug_assert_eq!(c.order(), order);
    Ok(c)
}

// ---------------------------------------------------------------------------
// Induced actions

/// The domain of an action, as used for inducing permutation groups.
#[derive(Clone, Debug)]
pub enum ActionSpec {
    Natural,
    KSubsets { m: usize, k: usize },
    Partitions { a: usize, b: usize },
    SubspaceOrbit { seed: Subspace },
    Vectors,
}

/// A permutation group induced on an explicitly listed, sorted domain.
#[derive(Clone, Debug)]
pub struct InducedAction<T> {
    pub group: PermGroupSpec,
    pub domain: Vec<T>,
    pub index: HashMap<T, u32>,
}

impl<T: Clone + Eq + Hash> InducedAction<T> {
    pub fn point_of(&self, x: &T) -> Option<u32> {
        self.index.get(x).copied()
    }
}

/// Induces generators on a sorted domain through an action closure.
pub fn induce_on<T, F>(domain: Vec<T>, ngens: usize, name: &str, act: F) -> Result<InducedAction<T>>
where
    T: Clone + Eq + Hash + Ord,
    F: Fn(&T, usize) -> T,
{
    let n = domain.len();
    if n as u64 > INDUCED_DEGREE_CAP {
        return Err(Error::DegreeCapExceeded(n as u64, INDUCED_DEGREE_CAP));
    }
    let index: HashMap<T, u32> = domain.iter().cloned().enumerate().map(|(i, x)| (x, i as u32)).collect();
    let mut gens = Vec::with_capacity(ngens);
    for g in 0..ngens {
        let mut img = Vec::with_capacity(n);
        for x in &domain {
            let y = act(x, g);
            let i = *index.get(&y).ok_or_else(|| Error::OrbitNotClosed("image outside domain".into()))?;
            img.push(i);
        }
        gens.push(Perm::from_images(img).map_err(|_| Error::OrbitNotClosed("induced map not bijective".into()))?);
    }
    Ok(InducedAction { group: PermGroupSpec::new(n, gens, name), domain, index })
}

/// Orbit of `seed` under the generators, sorted.
pub fn orbit_closure<T, F>(seed: T, ngens: usize, cap: u64, act: F) -> Result<Vec<T>>
where
    T: Clone + Eq + Hash + Ord,
    F: Fn(&T, usize) -> T,
{
    let mut seen: std::collections::HashSet<T> = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(seed.clone());
    queue.push_back(seed);
    while let Some(x) = queue.pop_front() {
        for g in 0..ngens {
            let y = act(&x, g);
            if !seen.contains(&y) {
                if seen.len() as u64 >= cap {
                    return Err(Error::DegreeCapExceeded(seen.len() as u64 + 1, cap));
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    let mut v: Vec<T> = seen.into_iter().collect();
    v.sort();
    Ok(v)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Number of partitions of `ab` points into `a` parts of size `b`.
pub fn partition_count(a: u64, b: u64) -> BigUint {
    factorial(a * b) / (factorial(b).pow(a as u32) * factorial(a))
}

/// All `k`-subsets of `0..m` as sorted tuples, in lexicographic order.
pub fn k_subsets(m: usize, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..m {
            if m - x < k - cur.len() {
                break;
            }
            cur.push(x as u32);
            rec(x + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Image of a sorted subset under a permutation, sorted.
pub fn subset_image(s: &[u32], g: &Perm) -> Vec<u32> {
    let mut v: Vec<u32> = s.iter().map(|&x| g.image(x)).collect();
    v.sort_unstable();
    v
}

/// A partition encoded by the part label of each point, labels numbered in
/// order of first appearance.
pub type PartitionCode = Vec<u8>;

pub fn normalize_partition(labels: &[u8]) -> PartitionCode {
    let mut map = [u8::MAX; 256];
    let mut next = 0u8;
    labels
        .iter()
        .map(|&l| {
            if map[l as usize] == u8::MAX {
                map[l as usize] = next;
                next += 1;
            }
            map[l as usize]
        })
        .collect()
}

pub fn partition_image(p: &[u8], g: &Perm) -> PartitionCode {
    let mut lab = vec![0u8; p.len()];
    for (x, &l) in p.iter().enumerate() {
        lab[g.image(x as u32) as usize] = l;
    }
    normalize_partition(&lab)
}

/// Parts of a partition as sorted point lists.
pub fn partition_parts(p: &[u8]) -> Vec<Vec<u32>> {
    let a = p.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut parts = vec![vec![]; a];
    for (x, &l) in p.iter().enumerate() {
        parts[l as usize].push(x as u32);
    }
    parts
}

pub fn partition_from_parts(m: usize, parts: &[Vec<u32>]) -> PartitionCode {
    let mut lab = vec![0u8; m];
    for (i, part) in parts.iter().enumerate() {
        for &x in part {
            lab[x as usize] = i as u8;
        }
    }
    normalize_partition(&lab)
}

/// All partitions of `0..ab` into `a` parts of size `b`, in lexicographic
/// order of their codes.
pub fn all_partitions(a: usize, b: usize) -> Vec<PartitionCode> {
    let m = a * b;
    let mut out = Vec::new();
    let mut lab = vec![0u8; m];
    let mut sizes = vec![0usize; a];
    fn rec(i: usize, used: usize, a: usize, b: usize, lab: &mut Vec<u8>, sizes: &mut Vec<usize>, out: &mut Vec<PartitionCode>) {
        if i == lab.len() {
            out.push(lab.clone());
            return;
        }
        let limit = (used + 1).min(a);
        for l in 0..limit {
            if sizes[l] == b {
                continue;
            }
            lab[i] = l as u8;
            sizes[l] += 1;
            let nu = if l == used { used + 1 } else { used };
            rec(i + 1, nu, a, b, lab, sizes, out);
            sizes[l] -= 1;
        }
    }
    rec(0, 0, a, b, &mut lab, &mut sizes, &mut out);
    debug_assert_eq!(BigUint::from(out.len()), partition_count(a as u64, b as u64));
    let _ = m;
    out
}

/// Induces a natural-degree permutation group on `k`-subsets.
pub fn induce_k_subsets(g: &PermGroupSpec, k: usize) -> Result<InducedAction<Vec<u32>>> {
    let n = binomial(g.degree as u64, k as u64);
    if n > BigUint::from(INDUCED_DEGREE_CAP) {
        return Err(Error::DegreeCapExceeded(n.to_u64().unwrap_or(u64::MAX), INDUCED_DEGREE_CAP));
    }
    let domain = k_subsets(g.degree, k);
    induce_on(domain, g.generators.len(), &format!("{} on {}-subsets", g.name, k), |s, i| {
        subset_image(s, &g.generators[i])
    })
}

/// Induces a natural-degree permutation group on partitions into `a` parts
/// of size `b`.
pub fn induce_partitions(g: &PermGroupSpec, a: usize, b: usize) -> Result<InducedAction<PartitionCode>> {
    if g.degree != a * b {
        return Err(Error::DimensionMismatch("group degree must equal a*b".into()));
    }
    let n = partition_count(a as u64, b as u64);
    if n > BigUint::from(INDUCED_DEGREE_CAP) {
        return Err(Error::DegreeCapExceeded(n.to_u64().unwrap_or(u64::MAX), INDUCED_DEGREE_CAP));
    }
    let domain = all_partitions(a, b);
    induce_on(domain, g.generators.len(), &format!("{} on partitions({a},{b})", g.name), |p, i| {
        partition_image(p, &g.generators[i])
    })
}

/// Induces a matrix group on the orbit of a subspace.
pub fn induce_subspace_orbit(gens: &[Matrix], seed: &Subspace, cap: u64) -> Result<InducedAction<Subspace>> {
    let domain = orbit_closure(seed.clone(), gens.len(), cap.min(INDUCED_DEGREE_CAP), |u, i| u.image(&gens[i]).unwrap())?;
    induce_on(domain, gens.len(), "subspace orbit", |u, i| u.image(&gens[i]).unwrap())
}

/// Encodes a vector as `sum v_i q^i`.
pub fn vector_code(v: &[crate::gf::Fe], q: u32) -> u32 {
    v.iter().rev().fold(0u32, |acc, x| acc * q + x.0)
}

pub fn vector_decode(mut n: u32, q: u32, d: usize) -> Vector {
    (0..d)
        .map(|_| {
            let c = n % q;
            n /= q;
            crate::gf::Fe(c)
        })
        .collect()
}

/// Permutation of `F_q^d` (points numbered by [`vector_code`]) induced by a
/// matrix acting on column vectors.
pub fn matrix_on_vectors(g: &Matrix) -> Result<Perm> {
    let q = g.field().q();
    let d = g.rows();
    let n = (q as u64).checked_pow(d as u32).filter(|&n| n <= INDUCED_DEGREE_CAP.max(1 << 20));
    let Some(n) = n else {
        return Err(Error::DegreeCapExceeded(u64::MAX, INDUCED_DEGREE_CAP));
    };
    let f = g.field();
    // columns of g, combined incrementally: image of v = sum v_i g e_i
    let cols: Vec<Vector> = (0..d).map(|i| g.col(i)).collect();
    let mut img = vec![0u32; n as usize];
    for code in 0..n as u32 {
        let v = vector_decode(code, q, d);
        let mut w = vec![crate::gf::Fe::ZERO; d];
        for (i, &c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (x, &y) in w.iter_mut().zip(&cols[i]) {
                *x = f.add(*x, f.mul(c, y));
            }
        }
        img[code as usize] = vector_code(&w, q);
    }
    Perm::from_images(img)
}

/// Induces a matrix group on all of `F_q^d`.
pub fn induce_vectors(gens: &[Matrix]) -> Result<PermGroupSpec> {
    let perms: Result<Vec<Perm>> = gens.iter().map(matrix_on_vectors).collect();
    let perms = perms?;
    let n = perms.first().map_or(0, |p| p.degree());
    Ok(PermGroupSpec::new(n, perms, "vectors"))
}

// ---------------------------------------------------------------------------
// Stabilizers of objects under a natural-degree group

/// Chain of the subgroup of `chain`'s group fixing every object, for objects
/// on which the group acts through `act`. Works without listing the full
/// induced domain: only the orbit of each object under the current
/// stabilizer is enumerated.
pub fn stabilizer_of_objects<T, F>(chain: &StabilizerChain, objects: &[T], act: F, seed: u64) -> Result<StabilizerChain>
where
    T: Clone + Eq + Hash,
    F: Fn(&T, &Perm) -> T,
{
    let mut current = chain.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in objects {
        if current.order().is_one() {
            break;
        }
        let gens: Vec<Perm> = current.level_generators(0);
        // orbit with Schreier labels
        let mut index: HashMap<T, usize> = HashMap::new();
        let mut orbit: Vec<T> = vec![x.clone()];
        let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX)];
        index.insert(x.clone(), 0);
        let mut i = 0;
        while i < orbit.len() {
            for (gi, g) in gens.iter().enumerate() {
                let y = act(&orbit[i], g);
                if !index.contains_key(&y) {
                    index.insert(y.clone(), orbit.len());
                    orbit.push(y);
                    parent.push((i, gi));
                }
            }
            i += 1;
        }
        if orbit.len() == 1 {
            continue;
        }
        let target = current.order() / BigUint::from(orbit.len());
        let inv: Vec<Perm> = gens.iter().map(|g| g.inverse()).collect();
        let degree = current.degree();
        let cur = current.clone();
        let next = StabilizerChain::from_element_source(degree, &[], &target, 20_000, || {
            let r = cur.random_element(&mut rng);
            let y = act(x, &r);
            let mut j = index[&y];
            let mut s = r;
            while parent[j].0 != usize::MAX {
                let (p, gi) = parent[j];
                s = s.then(&inv[gi]);
                j = p;
            }
            s
        })?;
        current = next;
    }
    Ok(current)
}

// ---------------------------------------------------------------------------
// Minimal base search

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MinBase {
    pub b: usize,
    pub witness: Vec<u32>,
    pub nodes: u64,
}

struct Search {
    degree: usize,
    budget: u64,
    nodes: u64,
    seed: u64,
}

impl Search {
    /// Looks for a base of length at most `r` for the group `(gens, order)`
    /// extending `prefix`, avoiding excluded points.
    fn dfs(&mut self, gens: &[Perm], order: &BigUint, r: usize, excluded: &mut Vec<bool>, prefix: &mut Vec<u32>) -> Result<bool> {
        if order.is_one() {
            return Ok(true);
        }
        if r == 0 {
            return Ok(false);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { lower: 0, upper: None });
        }
        let orbits: Vec<Vec<u32>> =
            orbits_of(self.degree, gens).into_iter().filter(|o| o.len() > 1 && !excluded[o[0] as usize]).collect();
        if orbits.is_empty() {
            return Ok(false);
        }
        let max_orbit = orbits.iter().map(|o| o.len()).max().unwrap();
        if BigUint::from(max_orbit).pow(r as u32) < *order {
            return Ok(false);
        }
        if r == 1 {
            // need a regular orbit
            if let Some(o) = orbits.iter().find(|o| BigUint::from(o.len()) == *order) {
                prefix.push(o[0]);
                return Ok(true);
            }
            return Ok(false);
        }
        let mut order_idx: Vec<usize> = (0..orbits.len()).collect();
        order_idx.sort_by(|&a, &b| orbits[b].len().cmp(&orbits[a].len()).then(orbits[a][0].cmp(&orbits[b][0])));
        let mut newly_excluded: Vec<u32> = Vec::new();
        let mut found = false;
        for &oi in &order_idx {
            let o = &orbits[oi];
            let w = o[0];
            let child_order = order / BigUint::from(o.len());
            let chain = StabilizerChain::with_known_order(self.degree, gens, &[w], order, self.seed ^ self.nodes)?;
            let child_gens = chain.level_generators(1);
            prefix.push(w);
            if self.dfs(&child_gens, &child_order, r - 1, excluded, prefix)? {
                found = true;
                break;
            }
            prefix.pop();
            for &x in o {
                excluded[x as usize] = true;
                newly_excluded.push(x);
            }
        }
        for x in newly_excluded {
            excluded[x as usize] = false;
        }
        Ok(found)
    }
}

/// Greedy base: repeatedly fix a point in a largest orbit.
pub fn greedy_base(chain: &StabilizerChain) -> Result<Vec<u32>> {
    let mut gens = chain.generators().to_vec();
    let mut order = chain.order();
    let mut base = Vec::new();
    let n = chain.degree();
    while !order.is_one() {
        let orbits = orbits_of(n, &gens);
        let o = orbits.iter().max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0]))).unwrap();
        let w = o[0];
        let c = StabilizerChain::with_known_order(n, &gens, &[w], &order, 17 + base.len() as u64)?;
        order /= BigUint::from(o.len());
        gens = c.level_generators(1);
        base.push(w);
    }
    Ok(base)
}

/// Exact minimal base size by iterative deepening with orbit-representative
/// branching, exclusion of already-explored orbits, and the `|H| <= M^r`
/// cutoff.
pub fn min_base_bruteforce(g: &PermGroupSpec, order: Option<&BigUint>, budget: u64) -> Result<MinBase> {
    let chain = match order {
        Some(o) => StabilizerChain::with_known_order(g.degree, &g.generators, &[], o, 1)?,
        None => StabilizerChain::from_spec(g)?,
    };
    min_base_with_chain(&chain, budget)
}

pub fn min_base_with_chain(chain: &StabilizerChain, budget: u64) -> Result<MinBase> {
    let order = chain.order();
    let n = chain.degree();
    if order.is_one() {
        return Ok(MinBase { b: 0, witness: vec![], nodes: 0 });
    }
    let greedy = greedy_base(chain)?;
    // |G| <= n^b
    let mut lower = 1usize;
    while BigUint::from(n).pow(lower as u32) < order {
        lower += 1;
    }
    let mut search = Search { degree: n, budget, nodes: 0, seed: 99 };
    let gens = chain.generators().to_vec();
    for r in lower..greedy.len() {
        let mut excluded = vec![false; n];
        let mut prefix = Vec::new();
        match search.dfs(&gens, &order, r, &mut excluded, &mut prefix) {
            Ok(true) => return Ok(MinBase { b: prefix.len(), witness: prefix, nodes: search.nodes }),
            Ok(false) => {}
            Err(Error::BudgetExceeded { .. }) => {
                return Err(Error::BudgetExceeded { lower: r, upper: Some(greedy.len()) });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MinBase { b: greedy.len(), witness: greedy, nodes: search.nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn perm_basics() {
        let g = Perm::parse_cycles(5, "(1 2 3)(4 5)").unwrap();
        assert_eq!(g.0, vec![1, 2, 0, 4, 3]);
        assert_eq!(g.to_cycles(), "(1 2 3)(4 5)");
        assert!(g.then(&g.inverse()).is_identity());
        let h = Perm::parse_cycles(5, "(1 2)").unwrap();
        // right action: 1 -> 2 under g, then 2 -> 1 under h
        assert_eq!(g.then(&h).image(0), 0);
        assert!(Perm::parse_cycles(3, "(1 4)").is_err());
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert_eq!(Perm::identity(3).to_cycles(), "()");
    }

    #[test]
    fn orders_of_standard_groups() {
        assert_eq!(schreier_sims(&PermGroupSpec::symmetric(4)).unwrap().order(), big(24));
        assert_eq!(schreier_sims(&PermGroupSpec::alternating(5)).unwrap().order(), big(60));
        assert_eq!(schreier_sims(&PermGroupSpec::alternating(6)).unwrap().order(), big(360));
        assert_eq!(schreier_sims(&PermGroupSpec::symmetric(8)).unwrap().order(), big(40320));
        let s5 = PermGroupSpec::symmetric(5);
        let ind = induce_k_subsets(&s5, 2).unwrap();
        assert_eq!(ind.group.degree, 10);
        assert_eq!(schreier_sims(&ind.group).unwrap().order(), big(120));
    }

    #[test]
    fn order_matches_element_count() {
        for g in [PermGroupSpec::symmetric(5), PermGroupSpec::alternating(6)] {
            let c = schreier_sims(&g).unwrap();
            let els = c.elements();
            let set: std::collections::HashSet<Perm> = els.iter().cloned().collect();
            assert_eq!(BigUint::from(set.len()), c.order());
            // closure by BFS gives the same count
            let mut seen: std::collections::HashSet<Perm> = std::collections::HashSet::new();
            let mut queue = vec![Perm::identity(g.degree)];
            seen.insert(queue[0].clone());
            while let Some(x) = queue.pop() {
                for s in &g.generators {
                    let y = x.then(s);
                    if seen.insert(y.clone()) {
                        queue.push(y);
                    }
                }
            }
            assert_eq!(seen.len(), set.len());
            assert!(els.iter().all(|e| c.contains(e)));
        }
    }

    #[test]
    fn known_order_chain_matches_deterministic() {
        let s7 = PermGroupSpec::symmetric(7);
        let ind = induce_k_subsets(&s7, 3).unwrap();
        let det = schreier_sims(&ind.group).unwrap();
        let rnd = StabilizerChain::with_known_order(ind.group.degree, &ind.group.generators, &[5], &big(5040), 3).unwrap();
        assert_eq!(det.order(), rnd.order());
        assert_eq!(rnd.base()[0], 5);
        // a wrong target is reported rather than silently accepted
        assert!(StabilizerChain::with_known_order(7, &s7.generators, &[], &big(10080), 3).is_err());
    }

    #[test]
    fn pointwise_stabilizers() {
        let c3 = schreier_sims(&PermGroupSpec::symmetric(3)).unwrap();
        assert!(pointwise_stabilizer(&c3, &[0, 1]).unwrap().order.is_one());
        let c4 = schreier_sims(&PermGroupSpec::symmetric(4)).unwrap();
        assert_eq!(pointwise_stabilizer(&c4, &[0]).unwrap().order, big(6));
        let s5 = PermGroupSpec::symmetric(5);
        let ind = induce_k_subsets(&s5, 2).unwrap();
        let c = schreier_sims(&ind.group).unwrap();
        let pts: Vec<u32> =
            [vec![0, 1], vec![1, 2], vec![3, 4]].iter().map(|s| ind.point_of(s).unwrap()).collect();
        // cells {0},{1},{2},{3,4}: only the transposition (3 4) survives
        assert_eq!(pointwise_stabilizer(&c, &pts).unwrap().order, big(2));
    }

    #[test]
    fn induced_degrees() {
        let s4 = PermGroupSpec::symmetric(4);
        assert_eq!(induce_k_subsets(&s4, 2).unwrap().group.degree, 6);
        assert_eq!(induce_partitions(&s4, 2, 2).unwrap().group.degree, 3);
        for (a, b) in [(2usize, 3usize), (3, 2), (2, 4), (4, 2), (3, 3)] {
            assert_eq!(BigUint::from(all_partitions(a, b).len()), partition_count(a as u64, b as u64));
        }
    }

    #[test]
    fn subspace_orbit_of_points() {
        use crate::gf::Field;
        use crate::linalg::unit_vector;
        let f2 = Field::new(2, 1).unwrap();
        // SL(3,2) by two elementary transvections and a cyclic shift
        let t = Matrix::from_ints(&f2, &[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]);
        let c = Matrix::from_ints(&f2, &[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]);
        let seed = Subspace::span(&f2, 3, &[unit_vector(3, 0)]);
        let ind = induce_subspace_orbit(&[t, c], &seed, 1000).unwrap();
        assert_eq!(ind.group.degree, 7);
        assert_eq!(schreier_sims(&ind.group).unwrap().order(), big(168));
    }

    #[test]
    fn min_base_examples() {
        let s4 = PermGroupSpec::symmetric(4);
        assert_eq!(min_base_bruteforce(&s4, None, DEFAULT_NODE_BUDGET).unwrap().b, 3);
        let s5 = PermGroupSpec::symmetric(5);
        let ind = induce_k_subsets(&s5, 2).unwrap();
        let mb = min_base_bruteforce(&ind.group, None, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(mb.b, 3);
        let c = schreier_sims(&ind.group).unwrap();
        assert!(pointwise_stabilizer(&c, &mb.witness).unwrap().order.is_one());

        // Sym(4) on partitions (2,2): check against all subsets of the 3 points
        let part = induce_partitions(&s4, 2, 2).unwrap();
        let c = schreier_sims(&part.group).unwrap();
        let mb = min_base_bruteforce(&part.group, None, DEFAULT_NODE_BUDGET).unwrap();
        let mut best = usize::MAX;
        for mask in 0u32..8 {
            let pts: Vec<u32> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
            if pointwise_stabilizer(&c, &pts).unwrap().order.is_one() {
                best = best.min(pts.len());
            }
        }
        assert_eq!(mb.b, best);
    }

    #[test]
    fn search_budget_is_enforced() {
        let s8 = PermGroupSpec::symmetric(8);
        let ind = induce_k_subsets(&s8, 2).unwrap();
        match min_base_bruteforce(&ind.group, None, 1) {
            Err(Error::BudgetExceeded { upper, .. }) => assert!(upper.is_some()),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn object_stabilizers_without_induced_domain() {
        let s6 = PermGroupSpec::symmetric(6);
        let chain = schreier_sims(&s6).unwrap();
        let p1 = partition_from_parts(6, &[vec![0, 1, 2], vec![3, 4, 5]]);
        let st = stabilizer_of_objects(&chain, std::slice::from_ref(&p1), |p, g| partition_image(p, g), 5).unwrap();
        assert_eq!(st.order(), big(72));
        let p2 = partition_from_parts(6, &[vec![0, 3, 4], vec![1, 2, 5]]);
        let st2 = stabilizer_of_objects(&chain, &[p1.clone(), p2.clone()], |p, g| partition_image(p, g), 5).unwrap();
        // compare with the induced action
        let ind = induce_partitions(&s6, 2, 3).unwrap();
        let c = schreier_sims(&ind.group).unwrap();
        let pts = [ind.point_of(&p1).unwrap(), ind.point_of(&p2).unwrap()];
        assert_eq!(pointwise_stabilizer(&c, &pts).unwrap().order, st2.order());
    }

    #[test]
    fn trivial_lower_bound_holds() {
        for m in 5..=7 {
            let ind = induce_k_subsets(&PermGroupSpec::symmetric(m), 2).unwrap();
            let mb = min_base_bruteforce(&ind.group, None, DEFAULT_NODE_BUDGET).unwrap();
            let order = factorial(m as u64);
            assert!(BigUint::from(ind.group.degree).pow(mb.b as u32) > order);
        }
    }
}
