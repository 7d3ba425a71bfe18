//! Symplectic, unitary and quadratic forms on `F_q^d`, Witt decompositions
//! and isometry tests.
//!
//! The form is `[u, v] = u^T G v^σ`, with `σ` the identity except in the
//! unitary case, where `σ(a) = a^(p^(e/2))`. Quadratic forms carry their own
//! upper-triangular coefficients so characteristic 2 needs no special path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::linalg::{all_vectors, is_zero_vec, lin_comb, vec_add, vec_scale, Matrix, MatrixJson, Subspace, Vector};

/// Spaces with at most this many vectors are searched exhaustively.
pub const EXHAUSTIVE_SEARCH_MAX: u64 = 1 << 16;
/// Trial cap for randomized singular-vector search.
pub const RANDOM_SEARCH_TRIALS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    None,
    Symplectic,
    Unitary,
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "o")]
    Odd,
}

#[derive(Clone, Debug)]
pub struct Form {
    pub kind: FormKind,
    pub field: Field,
    pub d: usize,
    pub gram: Matrix,
    /// Coefficients `c_ij`, `i <= j`, of `Q(v) = sum c_ij v_i v_j`, row by row.
    pub quad: Option<Vec<Fe>>,
    pub sign: Option<Sign>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormJson {
    pub kind: FormKind,
    pub sign: Option<Sign>,
    pub gram: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad: Option<Vec<u32>>,
}

#[derive(Clone, Debug)]
pub struct WittDecomposition {
    pub witt_index: usize,
    pub witt_defect: usize,
    pub hyperbolic_pairs: Vec<(Vector, Vector)>,
    pub anisotropic_basis: Vec<Vector>,
}

/// Isometry class of a nondegenerate subspace. Two nondegenerate subspaces
/// lie in the same orbit of the full isometry group exactly when their keys
/// agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IsometryType {
    pub dim: usize,
    pub witt_index: usize,
    /// Whether the discriminant is a square (orthogonal forms, odd `q`).
    pub disc_square: Option<bool>,
}

/// Least-encoded `α` with `t^2 + t + α` irreducible over the field.
pub fn find_anisotropic_alpha(field: &Field) -> Fe {
    field
        .elements()
        .find(|&a| field.elements().all(|t| !field.add(field.add(field.mul(t, t), t), a).is_zero()))
        .expect("an irreducible monic quadratic of this shape exists over every finite field")
}

impl Form {
    /// The standard form of the given kind; `sign` is only read for
    /// quadratic forms.
    pub fn standard(kind: FormKind, d: usize, field: &Field, sign: Option<Sign>) -> Result<Form> {
        let f = field;
        let incompatible = |msg: &str| Err(Error::IncompatibleParameters(msg.to_string()));
        match kind {
            FormKind::None => Ok(Form { kind, field: f.clone(), d, gram: Matrix::zeros(f, d, d), quad: None, sign: None }),
            FormKind::Symplectic => {
                if !d.is_multiple_of(2) || d == 0 {
                    return incompatible("symplectic forms need even positive dimension");
                }
                let mut g = Matrix::zeros(f, d, d);
                for i in 0..d / 2 {
                    g.set(2 * i, 2 * i + 1, Fe::ONE);
                    g.set(2 * i + 1, 2 * i, f.neg(Fe::ONE));
                }
                Ok(Form { kind, field: f.clone(), d, gram: g, quad: None, sign: None })
            }
            FormKind::Unitary => {
                if !f.e().is_multiple_of(2) || d == 0 {
                    return incompatible("unitary forms need a field of square order");
                }
                Ok(Form { kind, field: f.clone(), d, gram: Matrix::identity(f, d), quad: None, sign: None })
            }
            FormKind::Quadratic => {
                let sign = sign.ok_or_else(|| Error::IncompatibleParameters("quadratic form needs a sign".into()))?;
                let mut coeffs = vec![Fe::ZERO; d * (d + 1) / 2];
                let mut put = |i: usize, j: usize, c: Fe| coeffs[tri_pos(d, i, j)] = c;
                match sign {
                    Sign::Plus | Sign::Minus => {
                        if !d.is_multiple_of(2) || d == 0 {
                            return incompatible("plus/minus type needs even dimension");
                        }
                        let planes = d / 2;
                        let hyper = if sign == Sign::Plus { planes } else { planes - 1 };
                        for i in 0..hyper {
                            put(2 * i, 2 * i + 1, Fe::ONE);
                        }
                        if sign == Sign::Minus {
                            let alpha = find_anisotropic_alpha(f);
                            put(d - 2, d - 2, Fe::ONE);
                            put(d - 2, d - 1, Fe::ONE);
                            put(d - 1, d - 1, alpha);
                        }
                    }
                    Sign::Odd => {
                        if d % 2 != 1 || f.p() == 2 {
                            return incompatible("odd type needs odd dimension and odd characteristic");
                        }
                        for i in 0..d / 2 {
                            put(2 * i, 2 * i + 1, Fe::ONE);
                        }
                        put(d - 1, d - 1, Fe::ONE);
                    }
                }
                Ok(Self::from_quadratic(f, d, coeffs, Some(sign)))
            }
        }
    }

    /// Quadratic form from upper-triangular coefficients; the Gram matrix is
    /// the polarization.
    pub fn from_quadratic(field: &Field, d: usize, coeffs: Vec<Fe>, sign: Option<Sign>) -> Form {
        let f = field;
        let mut g = Matrix::zeros(f, d, d);
        for i in 0..d {
            for j in i..d {
                let c = coeffs[tri_pos(d, i, j)];
                if i == j {
                    g.set(i, i, f.add(c, c));
                } else {
                    g.set(i, j, c);
                    g.set(j, i, c);
                }
            }
        }
        Form { kind: FormKind::Quadratic, field: f.clone(), d, gram: g, quad: Some(coeffs), sign }
    }

    pub fn quad_coeff(&self, i: usize, j: usize) -> Fe {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.quad.as_ref().map_or(Fe::ZERO, |q| q[tri_pos(self.d, i, j)])
    }

    /// `σ(a)`; the identity unless the form is unitary.
    pub fn sigma(&self, a: Fe) -> Fe {
        if self.kind == FormKind::Unitary {
            let f = &self.field;
            f.pow(a, (f.p() as u64).pow(f.e() / 2))
        } else {
            a
        }
    }

    pub fn sigma_vec(&self, v: &[Fe]) -> Vector {
        v.iter().map(|&a| self.sigma(a)).collect()
    }

    pub fn sigma_matrix(&self, m: &Matrix) -> Matrix {
        m.map(|a| self.sigma(a))
    }

    /// Order of the fixed field of `σ` (`q` itself when `σ` is trivial).
    pub fn q0(&self) -> u64 {
        let f = &self.field;
        if self.kind == FormKind::Unitary {
            (f.p() as u64).pow(f.e() / 2)
        } else {
            f.q() as u64
        }
    }

    /// `[u, v]`.
    pub fn evaluate(&self, u: &[Fe], v: &[Fe]) -> Fe {
        let f = &self.field;
        let sv = self.sigma_vec(v);
        let mut acc = Fe::ZERO;
        for (i, &ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, &vj) in sv.iter().enumerate() {
                let g = self.gram.get(i, j);
                if !g.is_zero() && !vj.is_zero() {
                    acc = f.add(acc, f.mul(ui, f.mul(g, vj)));
                }
            }
        }
        acc
    }

    /// `Q(v)`.
    pub fn q_eval(&self, v: &[Fe]) -> Result<Fe> {
        let quad = self.quad.as_ref().ok_or_else(|| Error::KindMismatch("quadratic".into()))?;
        let f = &self.field;
        let mut acc = Fe::ZERO;
        let mut idx = 0;
        for i in 0..self.d {
            for j in i..self.d {
                let c = quad[idx];
                idx += 1;
                if !c.is_zero() && !v[i].is_zero() && !v[j].is_zero() {
                    acc = f.add(acc, f.mul(c, f.mul(v[i], v[j])));
                }
            }
        }
        Ok(acc)
    }

    /// Singular in the sense relevant to the form: `Q(v) = 0` for quadratic
    /// forms, `[v, v] = 0` otherwise.
    pub fn is_singular(&self, v: &[Fe]) -> bool {
        match self.kind {
            FormKind::Quadratic => self.q_eval(v).unwrap().is_zero(),
            _ => self.evaluate(v, v).is_zero(),
        }
    }

    /// `g^T G g^σ = G`, and `Q(g e_i) = Q(e_i)` for quadratic forms.
    pub fn preserves(&self, g: &Matrix) -> bool {
        if g.rows() != self.d || g.cols() != self.d {
            return false;
        }
        if self.kind == FormKind::None {
            return true;
        }
        let lhs = g.transpose().mul(&self.gram).mul(&self.sigma_matrix(g));
        if lhs != self.gram {
            return false;
        }
        if self.kind == FormKind::Quadratic {
            for i in 0..self.d {
                let col = g.col(i);
                if self.q_eval(&col).unwrap() != self.quad_coeff(i, i) {
                    return false;
                }
            }
        }
        true
    }

    /// `{v : [v, u] = 0 for all u in U}`.
    pub fn perp(&self, u: &Subspace) -> Subspace {
        let f = &self.field;
        if u.dim() == 0 {
            return Subspace::full(f, self.d);
        }
        let rows: Vec<Vector> = u.basis().iter().map(|b| self.gram.mul_vec(&self.sigma_vec(b))).collect();
        let m = Matrix::from_rows(f, self.d, &rows);
        Subspace::span(f, self.d, &m.kernel())
    }

    /// `U ∩ U^⊥`.
    pub fn radical(&self, u: &Subspace) -> Subspace {
        u.intersect(&self.perp(u)).unwrap()
    }

    /// Gram matrix of the form restricted to the given vectors.
    pub fn restricted_gram(&self, basis: &[Vector]) -> Matrix {
        Matrix::from_fn(&self.field, basis.len(), basis.len(), |i, j| self.evaluate(&basis[i], &basis[j]))
    }

    pub fn is_nondegenerate_on(&self, u: &Subspace) -> bool {
        self.restricted_gram(&u.basis()).rank() == u.dim()
    }

    pub fn is_totally_singular(&self, u: &Subspace) -> bool {
        let b = u.basis();
        b.iter().all(|v| self.is_singular(v)) && self.restricted_gram(&b).is_zero()
    }

    pub fn is_totally_isotropic(&self, u: &Subspace) -> bool {
        self.restricted_gram(&u.basis()).is_zero()
    }

    /// Isometry class of a nondegenerate subspace.
    pub fn isometry_type(&self, u: &Subspace) -> Result<IsometryType> {
        if !self.is_nondegenerate_on(u) {
            return Err(Error::DegenerateRestriction);
        }
        let wd = self.witt_decompose(Some(u))?;
        let disc_square = (self.kind == FormKind::Quadratic && self.field.p() != 2)
            .then(|| self.field.is_square(self.restricted_gram(&u.basis()).det()));
        Ok(IsometryType { dim: u.dim(), witt_index: wd.witt_index, disc_square })
    }

    /// Finds `c` with `c + σ(c) = t` (unitary case; `t` must be σ-fixed).
    fn trace_preimage(&self, t: Fe) -> Fe {
        let f = &self.field;
        f.elements().find(|&c| f.add(c, self.sigma(c)) == t).expect("trace map onto the fixed field")
    }

    /// Finds a nonzero singular vector in the span of `basis`, deterministic
    /// for a given seed.
    pub fn find_singular(&self, basis: &[Vector], seed: u64) -> Option<Vector> {
        let f = &self.field;
        let n = basis.len();
        if n == 0 {
            return None;
        }
        let total = (f.q() as u64).checked_pow(n as u32);
        if total.is_some_and(|t| t <= EXHAUSTIVE_SEARCH_MAX) {
            return all_vectors(f, n).skip(1).map(|c| lin_comb(f, &c, basis, self.d)).find(|v| self.is_singular(v));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RANDOM_SEARCH_TRIALS {
            let c: Vector = (0..n).map(|_| Fe(rng.gen_range(0..f.q()))).collect();
            let v = lin_comb(f, &c, basis, self.d);
            if !is_zero_vec(&v) && self.is_singular(&v) {
                return Some(v);
            }
        }
        None
    }

    /// Given a singular `x` and a vector `b` with `[x, b] != 0`, returns a
    /// singular `y` in `⟨x, b⟩` with `[x, y] = 1`.
    pub fn hyperbolic_partner(&self, x: &[Fe], b: &[Fe]) -> Vector {
        let f = &self.field;
        let s = self.evaluate(x, b);
        // [x, c b] = σ(c) [x, b]
        let c = self.sigma(f.inv(s).expect("b must pair nontrivially with x"));
        let y = vec_scale(f, c, b);
        match self.kind {
            FormKind::Quadratic => {
                let qy = self.q_eval(&y).unwrap();
                vec_add(f, &y, &vec_scale(f, f.neg(qy), x))
            }
            FormKind::Unitary => {
                let t = f.neg(self.evaluate(&y, &y));
                let c = self.trace_preimage(t);
                vec_add(f, &y, &vec_scale(f, c, x))
            }
            _ => y,
        }
    }

    /// Witt decomposition of the whole space or of a nondegenerate subspace.
    pub fn witt_decompose(&self, within: Option<&Subspace>) -> Result<WittDecomposition> {
        self.witt_decompose_seeded(within, 0)
    }

    pub fn witt_decompose_seeded(&self, within: Option<&Subspace>, seed: u64) -> Result<WittDecomposition> {
        if self.kind == FormKind::None {
            return Err(Error::KindMismatch("nondegenerate".into()));
        }
        let f = &self.field;
        let space = within.cloned().unwrap_or_else(|| Subspace::full(f, self.d));
        if !self.is_nondegenerate_on(&space) {
            return Err(Error::DegenerateRestriction);
        }
        let mut current = space.basis();
        let mut pairs = Vec::new();
        let mut round = 0u64;
        while let Some(x) = self.find_singular(&current, seed.wrapping_add(round)) {
            round += 1;
            let b = current
                .iter()
                .find(|b| !self.evaluate(&x, b).is_zero())
                .expect("nondegenerate restriction pairs x with some basis vector")
                .clone();
            let y = self.hyperbolic_partner(&x, &b);
            // remaining space: vectors of `current` orthogonal to x and y
            let rows: Vec<Vector> = current
                .iter()
                .map(|c| vec![self.evaluate(c, &x), self.evaluate(c, &y)])
                .collect();
            let m = Matrix::from_rows(f, 2, &rows).transpose();
            let ker = m.kernel();
            let next: Vec<Vector> = ker.iter().map(|k| lin_comb(f, k, &current, self.d)).collect();
            current = Subspace::span(f, self.d, &next).basis();
            pairs.push((x, y));
        }
        let witt_index = pairs.len();
        Ok(WittDecomposition { witt_index, witt_defect: current.len(), hyperbolic_pairs: pairs, anisotropic_basis: current })
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            kind: self.kind,
            sign: self.sign,
            gram: self.gram.to_json(),
            quad: self.quad.as_ref().map(|q| q.iter().map(|x| x.0).collect()),
        }
    }

    pub fn from_json(j: &FormJson) -> Result<Form> {
        let gram = Matrix::from_json(&j.gram)?;
        let field = gram.field().clone();
        let d = gram.rows();
        match &j.quad {
            Some(q) => {
                if q.len() != d * (d + 1) / 2 {
                    return Err(Error::DimensionMismatch("quadratic coefficient count".into()));
                }
                Ok(Form::from_quadratic(&field, d, q.iter().map(|&x| field.elem(x)).collect(), j.sign))
            }
            None => Ok(Form { kind: j.kind, field, d, gram, quad: None, sign: j.sign }),
        }
    }
}

/// Position of `(i, j)`, `i <= j`, in the row-major upper triangle of size `d`.
pub fn tri_pos(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < d);
    i * d - i * i.saturating_sub(1) / 2 + j - i
}

impl WittDecomposition {
    /// Re-checks all pairing equations.
    pub fn verify(&self, form: &Form) -> bool {
        let f = &form.field;
        let pairs = &self.hyperbolic_pairs;
        for (i, (xi, yi)) in pairs.iter().enumerate() {
            if !form.is_singular(xi) || !form.is_singular(yi) {
                return false;
            }
            for (j, (xj, yj)) in pairs.iter().enumerate() {
                let want = if i == j { Fe::ONE } else { Fe::ZERO };
                if !form.evaluate(xi, xj).is_zero() || !form.evaluate(yi, yj).is_zero() || form.evaluate(xi, yj) != want {
                    return false;
                }
            }
            for a in &self.anisotropic_basis {
                if !form.evaluate(xi, a).is_zero() || !form.evaluate(yi, a).is_zero() {
                    return false;
                }
            }
        }
        let aniso = &self.anisotropic_basis;
        if !aniso.is_empty() {
            let n = aniso.len();
            if (f.q() as u64).pow(n as u32) <= EXHAUSTIVE_SEARCH_MAX
                && all_vectors(f, n).skip(1).any(|c| form.is_singular(&lin_comb(f, &c, aniso, form.d)))
            {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit_vector;

    fn fq(q: u64) -> Field {
        Field::of_order(q).unwrap()
    }

    #[test]
    fn tri_positions_are_consecutive() {
        for d in 1..7 {
            let mut k = 0;
            for i in 0..d {
                for j in i..d {
                    assert_eq!(tri_pos(d, i, j), k);
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn anisotropic_alpha() {
        assert_eq!(find_anisotropic_alpha(&fq(2)), Fe(1));
        assert_eq!(find_anisotropic_alpha(&fq(4)), Fe(2));
        let f3 = fq(3);
        let a = find_anisotropic_alpha(&f3);
        assert!(f3.elements().all(|t| !f3.add(f3.add(f3.mul(t, t), t), a).is_zero()));
        assert_eq!(a, Fe(2));
    }

    #[test]
    fn standard_forms() {
        let f2 = fq(2);
        let sp = Form::standard(FormKind::Symplectic, 2, &fq(3), None).unwrap();
        assert_eq!(sp.gram, Matrix::from_ints(&fq(3), &[&[0, 1], &[2, 0]]));
        let e1 = unit_vector(2, 0);
        let e2 = unit_vector(2, 1);
        assert_eq!(sp.evaluate(&e1, &e2), Fe::ONE);
        assert_eq!(sp.evaluate(&e1, &e1), Fe::ZERO);

        let op = Form::standard(FormKind::Quadratic, 2, &f2, Some(Sign::Plus)).unwrap();
        assert_eq!(op.q_eval(&e1).unwrap(), Fe::ZERO);
        assert_eq!(op.q_eval(&[Fe(1), Fe(1)]).unwrap(), Fe::ONE);
        assert_eq!(op.witt_decompose(None).unwrap().witt_index, 1);

        let om = Form::standard(FormKind::Quadratic, 2, &f2, Some(Sign::Minus)).unwrap();
        assert!(all_vectors(&f2, 2).skip(1).all(|v| !om.is_singular(&v)));

        assert!(Form::standard(FormKind::Symplectic, 3, &f2, None).is_err());
        assert!(Form::standard(FormKind::Unitary, 2, &fq(3), None).is_err());
        assert!(Form::standard(FormKind::Quadratic, 3, &f2, Some(Sign::Odd)).is_err());
        assert!(Form::standard(FormKind::Quadratic, 3, &fq(3), Some(Sign::Plus)).is_err());
        assert!(sp.q_eval(&e1).is_err());
        assert_eq!(sp.evaluate(&[Fe(0), Fe(0)], &e2), Fe::ZERO);
    }

    #[test]
    fn polarization_identity() {
        for (q, d, s) in [(2u64, 4, Sign::Minus), (3, 3, Sign::Odd), (4, 4, Sign::Plus), (5, 4, Sign::Minus), (3, 5, Sign::Odd)] {
            let f = fq(q);
            let form = Form::standard(FormKind::Quadratic, d, &f, Some(s)).unwrap();
            let vs: Vec<Vector> = all_vectors(&f, d).collect();
            for u in vs.iter().step_by(7) {
                for v in vs.iter().step_by(5) {
                    let lhs = form.evaluate(u, v);
                    let rhs = f.sub(
                        f.sub(form.q_eval(&vec_add(&f, u, v)).unwrap(), form.q_eval(u).unwrap()),
                        form.q_eval(v).unwrap(),
                    );
                    assert_eq!(lhs, rhs);
                }
                for c in f.elements() {
                    let qv = form.q_eval(&vec_scale(&f, c, u)).unwrap();
                    assert_eq!(qv, f.mul(f.mul(c, c), form.q_eval(u).unwrap()));
                }
            }
        }
    }

    #[test]
    fn witt_defects_by_type() {
        for q in [2u64, 3, 4, 5] {
            let f = fq(q);
            for d in 1..=10usize {
                let mut cases = vec![];
                if d % 2 == 0 {
                    cases.push((FormKind::Quadratic, Some(Sign::Plus), 0));
                    cases.push((FormKind::Quadratic, Some(Sign::Minus), 2));
                    cases.push((FormKind::Symplectic, None, 0));
                } else if q % 2 == 1 {
                    cases.push((FormKind::Quadratic, Some(Sign::Odd), 1));
                }
                if q == 4 {
                    cases.push((FormKind::Unitary, None, d % 2));
                }
                for (kind, sign, defect) in cases {
                    let form = Form::standard(kind, d, &f, sign).unwrap();
                    let w = form.witt_decompose(None).unwrap();
                    assert_eq!(w.witt_defect, defect, "{kind:?} {sign:?} d={d} q={q}");
                    assert_eq!(2 * w.witt_index + w.witt_defect, d);
                    assert!(w.verify(&form));
                }
            }
        }
    }

    #[test]
    fn witt_examples() {
        let sp = Form::standard(FormKind::Symplectic, 4, &fq(3), None).unwrap();
        let w = sp.witt_decompose(None).unwrap();
        assert_eq!((w.witt_index, w.witt_defect), (2, 0));
        let om = Form::standard(FormKind::Quadratic, 4, &fq(2), Some(Sign::Minus)).unwrap();
        let w = om.witt_decompose(None).unwrap();
        assert_eq!((w.witt_index, w.witt_defect), (1, 2));
        let oo = Form::standard(FormKind::Quadratic, 3, &fq(3), Some(Sign::Odd)).unwrap();
        let w = oo.witt_decompose(None).unwrap();
        assert_eq!((w.witt_index, w.witt_defect), (1, 1));
        // degenerate restriction
        let f3 = fq(3);
        let iso = Subspace::span(&f3, 4, &[unit_vector(4, 0)]);
        assert!(matches!(sp.witt_decompose(Some(&iso)), Err(Error::DegenerateRestriction)));
    }

    #[test]
    fn perp_properties() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f2 = fq(2);
        let sp2 = Form::standard(FormKind::Symplectic, 2, &f2, None).unwrap();
        let l = Subspace::span(&f2, 2, &[unit_vector(2, 0)]);
        assert_eq!(sp2.perp(&l), l);
        assert_eq!(sp2.perp(&Subspace::full(&f2, 2)).dim(), 0);
        let forms = [
            Form::standard(FormKind::Symplectic, 6, &fq(3), None).unwrap(),
            Form::standard(FormKind::Unitary, 4, &fq(4), None).unwrap(),
            Form::standard(FormKind::Quadratic, 5, &fq(5), Some(Sign::Odd)).unwrap(),
            Form::standard(FormKind::Quadratic, 6, &fq(2), Some(Sign::Minus)).unwrap(),
        ];
        for form in &forms {
            let f = &form.field;
            for _ in 0..200 {
                let k = rng.gen_range(0..=form.d);
                let vecs: Vec<Vector> = (0..k).map(|_| (0..form.d).map(|_| Fe(rng.gen_range(0..f.q()))).collect()).collect();
                let u = Subspace::span(f, form.d, &vecs);
                let p = form.perp(&u);
                assert_eq!(u.dim() + p.dim(), form.d);
                for a in p.basis() {
                    for b in u.basis() {
                        assert!(form.evaluate(&a, &b).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn preserves_examples() {
        let f3 = fq(3);
        let sp = Form::standard(FormKind::Symplectic, 2, &f3, None).unwrap();
        assert!(sp.preserves(&Matrix::identity(&f3, 2)));
        let swap = Matrix::from_ints(&f3, &[&[0, 1], &[1, 0]]);
        assert!(!sp.preserves(&swap));
        let f4 = fq(4);
        let u = Form::standard(FormKind::Unitary, 2, &f4, None).unwrap();
        assert!(u.preserves(&Matrix::from_ints(&f4, &[&[0, 1], &[1, 0]])));
        // x -> x with Q(x,y)=xy: swap preserves the plus-type plane
        let op = Form::standard(FormKind::Quadratic, 2, &f3, Some(Sign::Plus)).unwrap();
        assert!(op.preserves(&swap));
    }

    #[test]
    fn isometry_types_of_lines() {
        // O(3,3): nonsingular points split by discriminant into two orbits
        let f3 = fq(3);
        let form = Form::standard(FormKind::Quadratic, 3, &f3, Some(Sign::Odd)).unwrap();
        let mut counts = std::collections::HashMap::new();
        for v in all_vectors(&f3, 3).skip(1) {
            let l = Subspace::span(&f3, 3, &[v]);
            if form.is_nondegenerate_on(&l) {
                *counts.entry(form.isometry_type(&l).unwrap()).or_insert(0) += 1;
            }
        }
        // 13 points: 4 singular, 9 split 6 + 3 (each counted q-1 = 2 times)
        let mut sizes: Vec<usize> = counts.values().map(|c| c / 2).collect();
        sizes.sort();
        assert_eq!(sizes, vec![3, 6]);
    }

    #[test]
    fn json_roundtrip() {
        let form = Form::standard(FormKind::Quadratic, 4, &fq(5), Some(Sign::Minus)).unwrap();
        let s = serde_json::to_string(&form.to_json()).unwrap();
        let back = Form::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back.gram, form.gram);
        assert_eq!(back.quad, form.quad);
    }
}
