//! Dense matrices, canonical subspaces and matrix algebras over `GF(q)`.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Fe, Field};

pub type Vector = Vec<Fe>;

#[derive(Clone)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data && self.field == other.field
    }
}

impl Eq for Matrix {}

impl Hash for Matrix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(|x| x.0.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// JSON form of a matrix; entries use the base-`p` integer encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub p: u32,
    pub e: u32,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<u32>,
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix { field: field.clone(), rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn scalar(field: &Field, n: usize, c: Fe) -> Matrix {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, c);
        }
        m
    }

    pub fn from_fn(field: &Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Fe) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { field: field.clone(), rows, cols, data }
    }

    pub fn from_rows(field: &Field, cols: usize, rows: &[Vector]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "row length mismatch");
            data.extend_from_slice(r);
        }
        Matrix { field: field.clone(), rows: rows.len(), cols, data }
    }

    /// Matrix from base-`p` integer entries given row by row.
    pub fn from_ints(field: &Field, rows: &[&[u32]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vector> = rows.iter().map(|r| r.iter().map(|&x| field.elem(x)).collect()).collect();
        Self::from_rows(field, cols, &rows)
    }

    /// Diagonal matrix.
    pub fn diag(field: &Field, entries: &[Fe]) -> Matrix {
        let n = entries.len();
        Self::from_fn(field, n, n, |r, c| if r == c { entries[r] } else { Fe::ZERO })
    }

    /// The matrix unit `E_{ij}` of size `n`.
    pub fn unit(field: &Field, n: usize, i: usize, j: usize) -> Matrix {
        let mut m = Self::zeros(field, n, n);
        m.set(i, j, Fe::ONE);
        m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Fe] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vector> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col(&self, c: usize) -> Vector {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_fn(&self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn map(&self, f: impl Fn(Fe) -> Fe) -> Matrix {
        Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                let base = i * other.cols;
                for (j, &b) in orow.iter().enumerate() {
                    if !b.is_zero() {
                        out.data[base + j] = f.add(out.data[base + j], f.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Matrix { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Matrix { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: Fe) -> Matrix {
        let f = self.field.clone();
        self.map(|x| f.mul(c, x))
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Fe]) -> Vector {
        assert_eq!(v.len(), self.cols);
        let f = &self.field;
        (0..self.rows).map(|r| dot(f, self.row(r), v)).collect()
    }

    /// `v * self` for a row vector `v`.
    pub fn vec_mul(&self, v: &[Fe]) -> Vector {
        assert_eq!(v.len(), self.rows);
        let f = &self.field;
        let mut out = vec![Fe::ZERO; self.cols];
        for (r, &a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o = f.add(*o, f.mul(a, self.get(r, c)));
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let f = &self.field;
        Self::from_fn(f, self.rows * other.rows, self.cols * other.cols, |r, c| {
            f.mul(self.get(r / other.rows, c / other.cols), other.get(r % other.rows, c % other.cols))
        })
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Matrix) -> Matrix {
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        Self::from_fn(&self.field, r, c, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j)
            } else if i >= self.rows && j >= self.cols {
                other.get(i - self.rows, j - self.cols)
            } else {
                Fe::ZERO
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(&self.field, self.rows)
    }

    /// Returns the scalar `c` if `self = c * I`.
    pub fn as_scalar(&self) -> Option<Fe> {
        if !self.is_square() || self.rows == 0 {
            return None;
        }
        let c = self.get(0, 0);
        (*self == Self::scalar(&self.field, self.rows, c)).then_some(c)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    /// Reduced row echelon form, rank and pivot columns.
    pub fn rref(&self) -> (Matrix, usize, Vec<usize>) {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
                continue;
            };
            m.swap_rows(rank, p);
            let inv = f.inv(m.get(rank, c)).unwrap();
            if inv != Fe::ONE {
                for j in c..m.cols {
                    let v = m.get(rank, j);
                    m.set(rank, j, f.mul(inv, v));
                }
            }
            for r in 0..m.rows {
                if r == rank {
                    continue;
                }
                let factor = m.get(r, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.sub(m.get(r, j), f.mul(factor, m.get(rank, j)));
                    m.set(r, j, v);
                }
            }
            pivots.push(c);
            rank += 1;
        }
        (m, rank, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    /// Basis of the right kernel `{x : self * x = 0}`.
    pub fn kernel(&self) -> Vec<Vector> {
        let f = &self.field;
        let (r, rank, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut x = vec![Fe::ZERO; self.cols];
                x[fc] = Fe::ONE;
                for (i, &pc) in pivots.iter().enumerate().take(rank) {
                    x[pc] = f.neg(r.get(i, fc));
                }
                x
            })
            .collect()
    }

    pub fn det(&self) -> Fe {
        assert!(self.is_square());
        let f = &self.field;
        let mut m = self.clone();
        let n = m.rows;
        let mut det = Fe::ONE;
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !m.get(r, c).is_zero()) else {
                return Fe::ZERO;
            };
            if p != c {
                m.swap_rows(p, c);
                det = f.neg(det);
            }
            let pv = m.get(c, c);
            det = f.mul(det, pv);
            let inv = f.inv(pv).unwrap();
            for r in c + 1..n {
                let factor = f.mul(m.get(r, c), inv);
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = f.sub(m.get(r, j), f.mul(factor, m.get(c, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = Self::from_fn(&self.field, n, 2 * n, |r, c| {
            if c < n {
                self.get(r, c)
            } else if c - n == r {
                Fe::ONE
            } else {
                Fe::ZERO
            }
        });
        let (red, _, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Self::from_fn(&self.field, n, n, |r, c| red.get(r, n + c)))
    }

    pub fn pow(&self, mut n: u64) -> Matrix {
        let mut base = self.clone();
        let mut acc = Self::identity(&self.field, self.rows);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            p: self.field.p(),
            e: self.field.e(),
            rows: self.rows,
            cols: self.cols,
            entries: self.data.iter().map(|x| x.0).collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Matrix> {
        let field = Field::new(j.p, j.e)?;
        if j.entries.len() != j.rows * j.cols {
            return Err(Error::DimensionMismatch(format!("{} entries for {}x{}", j.entries.len(), j.rows, j.cols)));
        }
        if let Some(&bad) = j.entries.iter().find(|&&x| x >= field.q()) {
            return Err(Error::Parse(format!("entry {bad} not in GF({})", field.q())));
        }
        Ok(Matrix { field, rows: j.rows, cols: j.cols, data: j.entries.iter().map(|&x| Fe(x)).collect() })
    }
}

pub fn dot(f: &Field, a: &[Fe], b: &[Fe]) -> Fe {
    a.iter().zip(b).fold(Fe::ZERO, |acc, (&x, &y)| if x.is_zero() || y.is_zero() { acc } else { f.add(acc, f.mul(x, y)) })
}

pub fn vec_add(f: &Field, a: &[Fe], b: &[Fe]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

pub fn vec_sub(f: &Field, a: &[Fe], b: &[Fe]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

pub fn vec_scale(f: &Field, c: Fe, a: &[Fe]) -> Vector {
    a.iter().map(|&x| f.mul(c, x)).collect()
}

/// `sum c_i v_i`.
pub fn lin_comb(f: &Field, coeffs: &[Fe], vecs: &[Vector], dim: usize) -> Vector {
    let mut out = vec![Fe::ZERO; dim];
    for (&c, v) in coeffs.iter().zip(vecs) {
        if c.is_zero() {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(v) {
            *o = f.add(*o, f.mul(c, x));
        }
    }
    out
}

pub fn unit_vector(d: usize, i: usize) -> Vector {
    let mut v = vec![Fe::ZERO; d];
    v[i] = Fe::ONE;
    v
}

pub fn is_zero_vec(v: &[Fe]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Scales a nonzero vector so that its first nonzero entry is 1.
pub fn normalize(f: &Field, v: &[Fe]) -> Vector {
    match v.iter().find(|x| !x.is_zero()) {
        Some(&lead) => vec_scale(f, f.inv(lead).unwrap(), v),
        None => v.to_vec(),
    }
}

/// Enumerates all vectors of `F_q^d` in encoding order (first coordinate
/// varies fastest).
pub fn all_vectors(f: &Field, d: usize) -> impl Iterator<Item = Vector> + '_ {
    let q = f.q() as u64;
    let total = q.checked_pow(d as u32).expect("vector space too large to enumerate");
    (0..total).map(move |mut n| {
        (0..d)
            .map(|_| {
                let c = (n % q) as u32;
                n /= q;
                Fe(c)
            })
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    NoSolution,
    Affine { particular: Vector, kernel: Vec<Vector> },
}

/// Solves `A x = b`.
pub fn solve_linear(a: &Matrix, b: &[Fe]) -> Result<LinearSolution> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!("rhs length {} for {} rows", b.len(), a.rows())));
    }
    let f = a.field();
    let n = a.cols();
    let aug = Matrix::from_fn(f, a.rows(), n + 1, |r, c| if c < n { a.get(r, c) } else { b[r] });
    let (red, rank, pivots) = aug.rref();
    if pivots.last() == Some(&n) {
        return Ok(LinearSolution::NoSolution);
    }
    let mut particular = vec![Fe::ZERO; n];
    for (i, &pc) in pivots.iter().enumerate().take(rank) {
        particular[pc] = red.get(i, n);
    }
    Ok(LinearSolution::Affine { particular, kernel: a.kernel() })
}

/// A subspace of `F_q^d`, stored by the RREF of a row basis.
#[derive(Clone)]
pub struct Subspace {
    basis: Matrix,
    pivots: Vec<usize>,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis
    }
}

impl Eq for Subspace {}

impl Hash for Subspace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.basis.hash(state);
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.encoding().cmp(&other.encoding())
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{:?}>", self.basis)
    }
}

impl Subspace {
    /// Span of the given vectors in `F_q^d`.
    pub fn span(field: &Field, d: usize, vecs: &[Vector]) -> Subspace {
        let m = Matrix::from_rows(field, d, vecs);
        Self::from_matrix(&m)
    }

    /// Row space of `m`.
    pub fn from_matrix(m: &Matrix) -> Subspace {
        let (r, rank, pivots) = m.rref();
        let basis = Matrix::from_fn(m.field(), rank, m.cols(), |i, j| r.get(i, j));
        Subspace { basis, pivots }
    }

    pub fn zero(field: &Field, d: usize) -> Subspace {
        Subspace { basis: Matrix::zeros(field, 0, d), pivots: vec![] }
    }

    pub fn full(field: &Field, d: usize) -> Subspace {
        Subspace { basis: Matrix::identity(field, d), pivots: (0..d).collect() }
    }

    pub fn field(&self) -> &Field {
        self.basis.field()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    /// The RREF basis matrix.
    pub fn basis_matrix(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis(&self) -> Vec<Vector> {
        self.basis.row_vecs()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical integer encoding `(dim, entries...)`, used for ordering.
    pub fn encoding(&self) -> Vec<u32> {
        let mut e = Vec::with_capacity(1 + self.basis.data().len());
        e.push(self.dim() as u32);
        e.extend(self.basis.data().iter().map(|x| x.0));
        e
    }

    fn check(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() || self.field() != other.field() {
            return Err(Error::DimensionMismatch(format!(
                "ambient {} vs {}",
                self.ambient_dim(),
                other.ambient_dim()
            )));
        }
        Ok(())
    }

    pub fn contains(&self, v: &[Fe]) -> bool {
        let f = self.field();
        let mut w = v.to_vec();
        for (i, &pc) in self.pivots.iter().enumerate() {
            let c = w[pc];
            if c.is_zero() {
                continue;
            }
            for (j, x) in w.iter_mut().enumerate() {
                *x = f.sub(*x, f.mul(c, self.basis.get(i, j)));
            }
        }
        is_zero_vec(&w)
    }

    /// Coordinates of `v` in the RREF basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[Fe]) -> Option<Vector> {
        let coords: Vector = self.pivots.iter().map(|&p| v[p]).collect();
        let back = lin_comb(self.field(), &coords, &self.basis(), self.ambient_dim());
        (back == v).then_some(coords)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        self.check(other)?;
        Ok(other.basis().iter().all(|v| self.contains(v)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        let mut rows = self.basis();
        rows.extend(other.basis());
        Ok(Subspace::span(self.field(), self.ambient_dim(), &rows))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        let f = self.field();
        let d = self.ambient_dim();
        let (a, b) = (self.basis(), other.basis());
        if a.is_empty() || b.is_empty() {
            return Ok(Subspace::zero(f, d));
        }
        // columns u_i and -w_j; kernel vectors give sum a_i u_i = sum b_j w_j
        let m = Matrix::from_fn(f, d, a.len() + b.len(), |r, c| {
            if c < a.len() {
                a[c][r]
            } else {
                f.neg(b[c - a.len()][r])
            }
        });
        let vecs: Vec<Vector> = m.kernel().iter().map(|k| lin_comb(f, &k[..a.len()], &a, d)).collect();
        Ok(Subspace::span(f, d, &vecs))
    }

    /// Image `{g v : v in U}` under a square matrix acting on column vectors.
    pub fn image(&self, g: &Matrix) -> Result<Subspace> {
        if g.rows() != self.ambient_dim() || g.cols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch("matrix does not match ambient dimension".into()));
        }
        let img = self.basis.mul(&g.transpose());
        Ok(Subspace::from_matrix(&img))
    }

    /// Image of the row vectors under `v -> v * g`.
    pub fn image_right(&self, g: &Matrix) -> Subspace {
        Subspace::from_matrix(&self.basis.mul(g))
    }

    pub fn to_json(&self) -> MatrixJson {
        self.basis.to_json()
    }

    pub fn from_json(j: &MatrixJson) -> Result<Subspace> {
        Ok(Subspace::from_matrix(&Matrix::from_json(j)?))
    }
}

/// The lattice operations on subspaces, dispatched by name.
#[derive(Clone, Debug)]
pub enum SubspaceOp<'a> {
    Sum(&'a Subspace),
    Intersect(&'a Subspace),
    Contains(&'a Subspace),
    Equals(&'a Subspace),
    ImageUnder(&'a Matrix),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubspaceOpResult {
    Space(Subspace),
    Bool(bool),
}

pub fn subspace_op(u: &Subspace, op: SubspaceOp<'_>) -> Result<SubspaceOpResult> {
    Ok(match op {
        SubspaceOp::Sum(w) => SubspaceOpResult::Space(u.sum(w)?),
        SubspaceOp::Intersect(w) => SubspaceOpResult::Space(u.intersect(w)?),
        SubspaceOp::Contains(w) => SubspaceOpResult::Bool(u.contains_subspace(w)?),
        SubspaceOp::Equals(w) => {
            u.check(w)?;
            SubspaceOpResult::Bool(u == w)
        }
        SubspaceOp::ImageUnder(g) => SubspaceOpResult::Space(u.image(g)?),
    })
}

/// Incrementally maintained reduced basis of a span of flat vectors.
#[derive(Clone)]
pub struct SpanTracker {
    field: Field,
    len: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl SpanTracker {
    pub fn new(field: &Field, len: usize) -> SpanTracker {
        SpanTracker { field: field.clone(), len, rows: vec![], pivots: vec![] }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the current rows.
    pub fn reduce(&self, v: &[Fe]) -> Vector {
        let f = &self.field;
        let mut w = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = w[p];
            if c.is_zero() {
                continue;
            }
            for (x, &y) in w.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Fe]) -> bool {
        is_zero_vec(&self.reduce(v))
    }

    /// Adds `v`; returns true if the span grew.
    pub fn insert(&mut self, v: &[Fe]) -> bool {
        assert_eq!(v.len(), self.len);
        let f = self.field.clone();
        let w = self.reduce(v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let w = vec_scale(&f, f.inv(w[p]).unwrap(), &w);
        for row in self.rows.iter_mut() {
            let c = row[p];
            if !c.is_zero() {
                for (x, &y) in row.iter_mut().zip(&w) {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        self.rows.push(w);
        self.pivots.push(p);
        true
    }
}

/// A subspace of `M(n, q)` closed under multiplication.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    pub field: Field,
    pub n: usize,
    pub basis: Vec<Matrix>,
}

impl MatrixAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.n * self.n
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        let mut t = SpanTracker::new(&self.field, self.n * self.n);
        for b in &self.basis {
            t.insert(b.data());
        }
        t.contains(m.data())
    }

    /// Checks closure under products of basis pairs.
    pub fn is_closed(&self) -> bool {
        let mut t = SpanTracker::new(&self.field, self.n * self.n);
        for b in &self.basis {
            t.insert(b.data());
        }
        self.basis.iter().all(|a| self.basis.iter().all(|b| t.contains(a.mul(b).data())))
    }

    /// The element `sum c_i basis_i`.
    pub fn element(&self, coeffs: &[Fe]) -> Matrix {
        let f = &self.field;
        let mut data = vec![Fe::ZERO; self.n * self.n];
        for (&c, b) in coeffs.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (x, &y) in data.iter_mut().zip(b.data()) {
                *x = f.add(*x, f.mul(c, y));
            }
        }
        Matrix { field: f.clone(), rows: self.n, cols: self.n, data }
    }
}

/// Algebra of all `x` in `M(d,q)` with `x U ⊆ U` for every listed subspace.
pub fn stabilizing_algebra(subspaces: &[Subspace]) -> Result<MatrixAlgebra> {
    let first = subspaces.first().ok_or(Error::EmptyInput)?;
    stabilizing_algebra_in(first.field(), first.ambient_dim(), subspaces)
}

/// As [`stabilizing_algebra`], with the ambient space given explicitly so an
/// empty list yields the full matrix algebra.
pub fn stabilizing_algebra_in(field: &Field, d: usize, subspaces: &[Subspace]) -> Result<MatrixAlgebra> {
    let f = field;
    let mut eqs: Vec<Vector> = Vec::new();
    for u in subspaces {
        if u.ambient_dim() != d || u.field() != f {
            return Err(Error::DimensionMismatch("subspaces must share field and ambient space".into()));
        }
        let piv = u.pivots();
        let basis = u.basis();
        let nonpivot: Vec<usize> = (0..d).filter(|c| !piv.contains(c)).collect();
        for b in &basis {
            // (x b)_j - sum_t (x b)_{p_t} (u_t)_j = 0 for every non-pivot j
            for &j in &nonpivot {
                let mut row = vec![Fe::ZERO; d * d];
                for (c, &bc) in b.iter().enumerate() {
                    if bc.is_zero() {
                        continue;
                    }
                    row[j * d + c] = f.add(row[j * d + c], bc);
                    for (t, &pt) in piv.iter().enumerate() {
                        let coef = basis[t][j];
                        if !coef.is_zero() {
                            row[pt * d + c] = f.sub(row[pt * d + c], f.mul(bc, coef));
                        }
                    }
                }
                eqs.push(row);
            }
        }
    }
    let sys = Matrix::from_rows(f, d * d, &eqs);
    let basis = sys
        .kernel()
        .into_iter()
        .map(|k| Matrix { field: f.clone(), rows: d, cols: d, data: k })
        .collect();
    Ok(MatrixAlgebra { field: f.clone(), n: d, basis })
}

/// Smallest algebra containing the identity and the seeds.
pub fn algebra_closure(field: &Field, n: usize, seeds: &[Matrix]) -> MatrixAlgebra {
    let mut tracker = SpanTracker::new(field, n * n);
    let mut basis: Vec<Matrix> = Vec::new();
    for m in std::iter::once(Matrix::identity(field, n)).chain(seeds.iter().cloned()) {
        assert_eq!((m.rows(), m.cols()), (n, n));
        if tracker.insert(m.data()) {
            basis.push(m);
        }
    }
    // products of every new element with every generator suffice
    let gens: Vec<Matrix> = basis.clone();
    let mut frontier = 0;
    while frontier < basis.len() && basis.len() < n * n {
        let a = basis[frontier].clone();
        frontier += 1;
        for g in &gens {
            for prod in [a.mul(g), g.mul(&a)] {
                if tracker.insert(prod.data()) {
                    basis.push(prod);
                }
            }
        }
    }
    if basis.len() == n * n {
        // a full algebra has a cleaner basis: the matrix units
        basis = (0..n * n).map(|i| Matrix::unit(field, n, i / n, i % n)).collect();
    }
    MatrixAlgebra { field: field.clone(), n, basis }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> Field {
        Field::of_order(q).unwrap()
    }

    #[test]
    fn rref_examples() {
        let f2 = f(2);
        let m = Matrix::from_ints(&f2, &[&[1, 1, 0], &[0, 1, 1]]);
        let (r, rank, piv) = m.rref();
        assert_eq!(r, Matrix::from_ints(&f2, &[&[1, 0, 1], &[0, 1, 1]]));
        assert_eq!((rank, piv), (2, vec![0, 1]));
        let z = Matrix::zeros(&f2, 3, 3);
        assert_eq!(z.rref().1, 0);
        let i = Matrix::identity(&f(5), 4);
        assert_eq!(i.rref().0, i);
        // idempotent
        assert_eq!(r.rref().0, r);
    }

    #[test]
    fn solve_examples() {
        let f2 = f(2);
        let i = Matrix::identity(&f2, 3);
        let b = vec![Fe(1), Fe(0), Fe(1)];
        assert_eq!(solve_linear(&i, &b).unwrap(), LinearSolution::Affine { particular: b.clone(), kernel: vec![] });
        let z = Matrix::zeros(&f2, 2, 2);
        assert_eq!(solve_linear(&z, &[Fe(1), Fe(0)]).unwrap(), LinearSolution::NoSolution);
        let a = Matrix::from_ints(&f2, &[&[1, 1]]);
        assert_eq!(
            solve_linear(&a, &[Fe(1)]).unwrap(),
            LinearSolution::Affine { particular: vec![Fe(1), Fe(0)], kernel: vec![vec![Fe(1), Fe(1)]] }
        );
    }

    #[test]
    fn subspace_lattice() {
        let f2 = f(2);
        let e = |i| unit_vector(3, i);
        let u = Subspace::span(&f2, 3, &[e(0), e(1)]);
        let w = Subspace::span(&f2, 3, &[e(1), e(2)]);
        assert_eq!(u.intersect(&w).unwrap(), Subspace::span(&f2, 3, &[e(1)]));
        assert_eq!(u.sum(&u).unwrap(), u);
        assert_eq!(u.intersect(&u).unwrap(), u);
        let swap = Matrix::from_ints(&f2, &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        let l = Subspace::span(&f2, 3, &[e(0)]);
        assert_eq!(l.image(&swap).unwrap(), Subspace::span(&f2, 3, &[e(1)]));
        let bad = Subspace::full(&f2, 2);
        assert!(matches!(u.sum(&bad), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn random_subspace_properties() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for q in [2u64, 3, 4] {
            let fq = f(q);
            let d = 4;
            let rand_space = |rng: &mut rand_chacha::ChaCha8Rng| {
                let k = rng.gen_range(0..=d);
                let vecs: Vec<Vector> =
                    (0..k).map(|_| (0..d).map(|_| Fe(rng.gen_range(0..fq.q()))).collect()).collect();
                Subspace::span(&fq, d, &vecs)
            };
            for _ in 0..1000 {
                let u = rand_space(&mut rng);
                let w = rand_space(&mut rng);
                let s = u.sum(&w).unwrap();
                let i = u.intersect(&w).unwrap();
                assert_eq!(s.dim() + i.dim(), u.dim() + w.dim());
                let mutual = u.contains_subspace(&w).unwrap() && w.contains_subspace(&u).unwrap();
                assert_eq!(mutual, u == w);
            }
        }
    }

    /// Counts matrices stabilizing all subspaces by brute force.
    fn brute_stab_count(fq: &Field, d: usize, subs: &[Subspace]) -> usize {
        all_vectors(fq, d * d)
            .filter(|data| {
                let x = Matrix { field: fq.clone(), rows: d, cols: d, data: data.clone() };
                subs.iter().all(|u| u.basis().iter().all(|b| u.contains(&x.mul_vec(b))))
            })
            .count()
    }

    #[test]
    fn stabilizing_algebra_examples() {
        let f2 = f(2);
        let full = stabilizing_algebra_in(&f2, 2, &[]).unwrap();
        assert_eq!(full.dim(), 4);
        assert!(matches!(stabilizing_algebra(&[]), Err(Error::EmptyInput)));

        let f3 = f(3);
        let subs = vec![
            Subspace::span(&f3, 2, &[vec![Fe(1), Fe(0)]]),
            Subspace::span(&f3, 2, &[vec![Fe(0), Fe(1)]]),
            Subspace::span(&f3, 2, &[vec![Fe(1), Fe(1)]]),
        ];
        let alg = stabilizing_algebra(&subs).unwrap();
        assert_eq!(alg.dim(), 1);
        assert_eq!(brute_stab_count(&f3, 2, &subs), 3);

        let l = vec![Subspace::span(&f2, 2, &[vec![Fe(1), Fe(0)]])];
        let alg = stabilizing_algebra(&l).unwrap();
        assert_eq!(alg.dim(), 3);
        assert_eq!(brute_stab_count(&f2, 2, &l), 8);
    }

    #[test]
    fn stabilizing_algebra_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (q, d) in [(2u64, 3usize), (2, 4), (3, 2), (4, 2), (5, 2)] {
            let fq = f(q);
            for _ in 0..6 {
                let count = rng.gen_range(1..=3);
                let subs: Vec<Subspace> = (0..count)
                    .map(|_| {
                        let k = rng.gen_range(1..d);
                        let vecs: Vec<Vector> =
                            (0..k).map(|_| (0..d).map(|_| Fe(rng.gen_range(0..fq.q()))).collect()).collect();
                        Subspace::span(&fq, d, &vecs)
                    })
                    .collect();
                let alg = stabilizing_algebra(&subs).unwrap();
                for x in &alg.basis {
                    for u in &subs {
                        assert!(u.basis().iter().all(|b| u.contains(&x.mul_vec(b))));
                    }
                }
                assert!(alg.is_closed());
                assert_eq!((q as usize).pow(alg.dim() as u32), brute_stab_count(&fq, d, &subs));
            }
        }
    }

    #[test]
    fn closure_examples() {
        let f3 = f(3);
        assert_eq!(algebra_closure(&f3, 3, &[Matrix::identity(&f3, 3)]).dim(), 1);
        let e11 = Matrix::unit(&f3, 3, 0, 0);
        let path = Matrix::from_ints(&f3, &[&[0, 1, 0], &[1, 0, 1], &[0, 1, 0]]);
        let alg = algebra_closure(&f3, 3, &[e11.clone(), path.clone()]);
        assert_eq!(alg.dim(), 9);
        assert!(alg.is_full());

        // cross-check by naive span growth over all words
        let mut t = SpanTracker::new(&f3, 9);
        let mut words = vec![Matrix::identity(&f3, 3)];
        t.insert(words[0].data());
        for _ in 0..4 {
            let mut next = vec![];
            for w in &words {
                for g in [&e11, &path] {
                    let p = w.mul(g);
                    t.insert(p.data());
                    next.push(p);
                }
            }
            words = next;
        }
        assert_eq!(t.dim(), 9);

        let f5 = f(5);
        let dg = Matrix::diag(&f5, &[Fe(1), Fe(2)]);
        let alg = algebra_closure(&f5, 2, &[dg]);
        assert_eq!(alg.dim(), 2);
        assert!(alg.is_closed());
    }

    #[test]
    fn det_and_inverse() {
        let f5 = f(5);
        let m = Matrix::from_ints(&f5, &[&[1, 2], &[3, 4]]);
        assert_eq!(m.det(), f5.from_int(-2));
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        let sing = Matrix::from_ints(&f5, &[&[1, 2], &[2, 4]]);
        assert!(sing.inverse().is_none());
        assert_eq!(sing.det(), Fe::ZERO);
    }

    #[test]
    fn json_roundtrip() {
        let f9 = f(9);
        let m = Matrix::from_ints(&f9, &[&[1, 8], &[3, 0]]);
        let j = serde_json::to_string(&m.to_json()).unwrap();
        let back = Matrix::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
