//! Prime-field arithmetic and the dense/sparse linear algebra built on it.
//!
//! Vectors over GF(q) are plain `Vec<usize>` slices with every entry `< q`.
//! Matrices keep sparse rows; elimination works on a dense copy, which is
//! plenty at the block lengths this crate targets (n up to about 24).

use std::fmt;

use crate::error::{Error, Result};
use crate::seq;

pub fn is_prime(q: usize) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// GF(q) for a prime q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    q: usize,
}

impl Field {
    pub fn new(q: usize) -> Result<Self> {
        if is_prime(q) {
            Ok(Self { q })
        } else {
            Err(Error::NotPrime(q))
        }
    }

    pub fn order(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn add(&self, x: usize, y: usize) -> usize {
        (x + y) % self.q
    }

    #[inline]
    pub fn sub(&self, x: usize, y: usize) -> usize {
        (x + self.q - y) % self.q
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        (x * y) % self.q
    }

    #[inline]
    pub fn neg(&self, x: usize) -> usize {
        (self.q - x) % self.q
    }

    pub fn inv(&self, x: usize) -> Result<usize> {
        if x.is_multiple_of(self.q) {
            return Err(Error::InverseOfZero);
        }
        // Fermat: x^(q-2)
        let mut base = x % self.q;
        let mut exp = self.q - 2;
        let mut acc = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        Ok(acc)
    }
}

/// A single element of GF(q) carrying its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: usize,
    field: Field,
}

impl FieldElement {
    pub fn new(value: usize, q: usize) -> Result<Self> {
        let field = Field::new(q)?;
        Ok(Self { value: value % q, field })
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn modulus(&self) -> usize {
        self.field.q
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            Err(Error::ModulusMismatch(self.field.q, other.field.q))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self { value: self.field.add(self.value, other.value), field: self.field })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self { value: self.field.mul(self.value, other.value), field: self.field })
    }

    pub fn neg(&self) -> Self {
        Self { value: self.field.neg(self.value), field: self.field }
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(Self { value: self.field.inv(self.value)?, field: self.field })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.field.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Neg,
    Inv,
}

/// Dispatches one field operation; binary ops need `y`.
pub fn field_arith(op: ArithOp, x: FieldElement, y: Option<FieldElement>) -> Result<FieldElement> {
    let need_y = || y.ok_or_else(|| Error::InvalidParameter(format!("{op:?} needs two operands")));
    match op {
        ArithOp::Add => x.add(&need_y()?),
        ArithOp::Mul => x.mul(&need_y()?),
        ArithOp::Neg => Ok(x.neg()),
        ArithOp::Inv => x.inv(),
    }
}

/// An `rows x cols` matrix over GF(q) with sparse row storage.
///
/// Each row holds `(col, value)` pairs sorted by column, values nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldMatrix {
    q: usize,
    rows: usize,
    cols: usize,
    row_entries: Vec<Vec<(usize, usize)>>,
}

impl FieldMatrix {
    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Rejects zero values, values `>= q`, out-of-range indices and
    /// duplicate positions.
    pub fn new(
        q: usize,
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        Field::new(q)?;
        let mut row_entries = vec![Vec::new(); rows];
        for (r, c, v) in entries {
            if r >= rows || c >= cols {
                return Err(Error::InvalidEntry(format!("({r}, {c}) outside {rows}x{cols}")));
            }
            if v == 0 || v >= q {
                return Err(Error::InvalidEntry(format!("value {v} at ({r}, {c}) not in 1..{q}")));
            }
            row_entries[r].push((c, v));
        }
        for (r, row) in row_entries.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidEntry(format!("duplicate entry in row {r}")));
            }
        }
        Ok(Self { q, rows, cols, row_entries })
    }

    pub fn zeros(q: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::new(q, rows, cols, std::iter::empty())
    }

    pub fn identity(q: usize, n: usize) -> Result<Self> {
        Self::new(q, n, n, (0..n).map(|i| (i, i, 1)))
    }

    /// Builds from dense rows, reducing every value mod q.
    pub fn from_dense(q: usize, dense: &[Vec<usize>]) -> Result<Self> {
        let cols = dense.first().map_or(0, Vec::len);
        if dense.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged dense rows".into()));
        }
        Self::from_dense_with_cols(q, cols, dense)
    }

    /// Like [`from_dense`](Self::from_dense) but keeps `cols` when there are no rows.
    pub fn from_dense_with_cols(q: usize, cols: usize, dense: &[Vec<usize>]) -> Result<Self> {
        if dense.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged dense rows".into()));
        }
        let entries = dense.iter().enumerate().flat_map(|(r, row)| {
            row.iter().enumerate().filter_map(move |(c, &v)| (v % q != 0).then_some((r, c, v % q)))
        });
        Self::new(q, dense.len(), cols, entries.collect::<Vec<_>>())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn field(&self) -> Field {
        Field { q: self.q }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[(usize, usize)] {
        &self.row_entries[r]
    }

    pub fn nnz(&self) -> usize {
        self.row_entries.iter().map(Vec::len).sum()
    }

    /// Entries sorted by `(row, col)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.row_entries
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> usize {
        self.row_entries[r]
            .binary_search_by_key(&c, |&(col, _)| col)
            .map_or(0, |i| self.row_entries[r][i].1)
    }

    pub fn to_dense(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![0; self.cols]; self.rows];
        for (r, c, v) in self.entries() {
            out[r][c] = v;
        }
        out
    }

    /// Nonzero count per column.
    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for (_, c, _) in self.entries() {
            w[c] += 1;
        }
        w
    }

    pub fn matvec(&self, u: &[usize]) -> Result<Vec<usize>> {
        if u.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                u.len(),
                self.cols
            )));
        }
        if let Some(&bad) = u.iter().find(|&&s| s >= self.q) {
            return Err(Error::Dimension(format!("symbol {bad} outside GF({})", self.q)));
        }
        Ok(self.apply(u))
    }

    /// Unchecked product; callers guarantee length and range.
    #[inline]
    pub fn apply(&self, u: &[usize]) -> Vec<usize> {
        self.row_entries
            .iter()
            .map(|row| row.iter().fold(0, |acc, &(c, v)| (acc + v * u[c]) % self.q))
            .collect()
    }

    /// Vertical concatenation `[self; other]`.
    pub fn stack(&self, other: &FieldMatrix) -> Result<Self> {
        if self.q != other.q {
            return Err(Error::ModulusMismatch(self.q, other.q));
        }
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "stacking {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut row_entries = self.row_entries.clone();
        row_entries.extend(other.row_entries.iter().cloned());
        Ok(Self { q: self.q, rows: self.rows + other.rows, cols: self.cols, row_entries })
    }

    /// Rows reordered so that row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.rows];
        if perm.len() != self.rows || perm.iter().any(|&p| p >= self.rows || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter("not a row permutation".into()));
        }
        Ok(Self {
            q: self.q,
            rows: self.rows,
            cols: self.cols,
            row_entries: perm.iter().map(|&p| self.row_entries[p].clone()).collect(),
        })
    }

    fn echelon(&self, rhs: Option<&[usize]>) -> Echelon {
        Echelon::reduce(self, rhs)
    }

    pub fn rank(&self) -> usize {
        self.echelon(None).pivots.len()
    }

    /// `(rank, q^rank)`.
    pub fn rank_and_image_size(&self) -> (usize, u128) {
        let rank = self.rank();
        (rank, seq::pow(self.q, rank))
    }

    /// Whether `a` lies in the column space.
    pub fn in_image(&self, a: &[usize]) -> Result<bool> {
        if a.len() != self.rows {
            return Err(Error::Dimension(format!("syndrome of length {} for {} rows", a.len(), self.rows)));
        }
        Ok(self.echelon(Some(a)).consistent)
    }

    /// All vectors of `Im A`, sorted lexicographically.
    pub fn image_vectors(&self) -> Vec<Vec<usize>> {
        let ech = self.echelon(None);
        let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
        let radix = vec![self.q; pivot_cols.len()];
        let mut digits = vec![0; pivot_cols.len()];
        let mut u = vec![0; self.cols];
        let mut out = Vec::new();
        loop {
            for (&c, &d) in pivot_cols.iter().zip(&digits) {
                u[c] = d;
            }
            out.push(self.apply(&u));
            if !seq::advance(&mut digits, &radix) {
                break;
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_dense() {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Row echelon form with pivots chosen from the rightmost column leftwards.
///
/// With this pivot order every pivot variable depends only on free variables
/// to its left, so enumerating free variables lexicographically enumerates
/// solutions lexicographically.
struct Echelon {
    q: usize,
    cols: usize,
    /// Reduced rows (only the first `pivots.len()` are nonzero), dense.
    rows: Vec<Vec<usize>>,
    rhs: Vec<usize>,
    /// `(row index, pivot column)` in row order.
    pivots: Vec<(usize, usize)>,
    consistent: bool,
}

impl Echelon {
    fn reduce(a: &FieldMatrix, rhs: Option<&[usize]>) -> Self {
        let field = a.field();
        let mut rows = a.to_dense();
        let mut b: Vec<usize> = rhs.map_or_else(|| vec![0; a.rows], <[usize]>::to_vec);
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in (0..a.cols).rev() {
            if next == rows.len() {
                break;
            }
            let Some(p) = (next..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(next, p);
            b.swap(next, p);
            let inv = field.inv(rows[next][col]).expect("nonzero pivot");
            for x in rows[next].iter_mut() {
                *x = field.mul(*x, inv);
            }
            b[next] = field.mul(b[next], inv);
            for r in 0..rows.len() {
                if r == next || rows[r][col] == 0 {
                    continue;
                }
                let factor = rows[r][col];
                for c in 0..a.cols {
                    let sub = field.mul(factor, rows[next][c]);
                    rows[r][c] = field.sub(rows[r][c], sub);
                }
                let sub = field.mul(factor, b[next]);
                b[r] = field.sub(b[r], sub);
            }
            pivots.push((next, col));
            next += 1;
        }
        let consistent = b[next..].iter().all(|&x| x == 0);
        Self { q: a.q, cols: a.cols, rows, rhs: b, pivots, consistent }
    }
}

/// A coset `C_A(a) = {u : Au = a}` described by a matrix and a syndrome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSpec {
    pub matrix: FieldMatrix,
    pub syndrome: Vec<usize>,
}

impl CosetSpec {
    pub fn new(matrix: FieldMatrix, syndrome: Vec<usize>) -> Result<Self> {
        if syndrome.len() != matrix.rows() {
            return Err(Error::Dimension(format!(
                "syndrome of length {} for {} rows",
                syndrome.len(),
                matrix.rows()
            )));
        }
        if let Some(&bad) = syndrome.iter().find(|&&s| s >= matrix.q()) {
            return Err(Error::Dimension(format!("syndrome symbol {bad} outside GF({})", matrix.q())));
        }
        Ok(Self { matrix, syndrome })
    }
}

/// Affine solution set: particular solution plus null-space span.
#[derive(Clone, Debug)]
pub struct Coset {
    q: usize,
    n: usize,
    particular: Option<Vec<usize>>,
    /// Free columns ascending, with their null-space basis vectors.
    free: Vec<(usize, Vec<usize>)>,
}

impl Coset {
    pub fn is_empty(&self) -> bool {
        self.particular.is_none()
    }

    /// Number of members; zero when inconsistent.
    pub fn size(&self) -> u128 {
        if self.is_empty() {
            0
        } else {
            seq::pow(self.q, self.free.len())
        }
    }

    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    pub fn len_n(&self) -> usize {
        self.n
    }

    /// Members in lexicographic order.
    pub fn iter(&self) -> CosetIter<'_> {
        CosetIter {
            coset: self,
            digits: vec![0; self.free.len()],
            current: self.particular.clone(),
        }
    }

    pub fn to_vec(&self) -> Vec<Vec<usize>> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<Vec<usize>> {
        self.particular.clone()
    }
}

pub struct CosetIter<'a> {
    coset: &'a Coset,
    digits: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl Iterator for CosetIter<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let q = self.coset.q;
        // Odometer over free coordinates, rightmost fastest; each step adds
        // one basis vector, or subtracts (q-1) copies on wrap-around.
        let mut advanced = false;
        let cur = self.current.as_mut().expect("checked above");
        for pos in (0..self.digits.len()).rev() {
            let basis = &self.coset.free[pos].1;
            if self.digits[pos] + 1 < q {
                self.digits[pos] += 1;
                for (x, &b) in cur.iter_mut().zip(basis) {
                    *x = (*x + b) % q;
                }
                advanced = true;
                break;
            }
            // wrap: digit q-1 -> 0 means adding the basis vector once more
            self.digits[pos] = 0;
            for (x, &b) in cur.iter_mut().zip(basis) {
                *x = (*x + b) % q;
            }
        }
        if !advanced {
            self.current = None;
        }
        Some(out)
    }
}

/// Solves `Au = a`, returning the coset in lexicographic enumeration order.
pub fn solve_affine(spec: &CosetSpec) -> Coset {
    let a = &spec.matrix;
    let ech = a.echelon(Some(&spec.syndrome));
    let field = a.field();
    let pivot_of_col: Vec<Option<usize>> = {
        let mut v = vec![None; ech.cols];
        for &(r, c) in &ech.pivots {
            v[c] = Some(r);
        }
        v
    };
    if !ech.consistent {
        return Coset { q: ech.q, n: ech.cols, particular: None, free: Vec::new() };
    }
    let mut particular = vec![0; ech.cols];
    for &(r, c) in &ech.pivots {
        particular[c] = ech.rhs[r];
    }
    let free = (0..ech.cols)
        .filter(|&c| pivot_of_col[c].is_none())
        .map(|f| {
            let mut basis = vec![0; ech.cols];
            basis[f] = 1;
            for &(r, c) in &ech.pivots {
                basis[c] = field.neg(ech.rows[r][f]);
            }
            (f, basis)
        })
        .collect();
    Coset { q: ech.q, n: ech.cols, particular: Some(particular), free }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(v: usize, q: usize) -> FieldElement {
        FieldElement::new(v, q).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(field_arith(ArithOp::Add, el(1, 2), Some(el(1, 2))).unwrap().value(), 0);
        assert_eq!(field_arith(ArithOp::Mul, el(2, 5), Some(el(3, 5))).unwrap().value(), 1);
        assert_eq!(field_arith(ArithOp::Inv, el(3, 7), None).unwrap().value(), 5);
        assert_eq!(field_arith(ArithOp::Neg, el(3, 7), None).unwrap().value(), 4);
    }

    #[test]
    fn arithmetic_errors() {
        assert!(matches!(el(0, 7).inv(), Err(Error::InverseOfZero)));
        assert!(matches!(el(1, 5).add(&el(1, 7)), Err(Error::ModulusMismatch(5, 7))));
        assert!(matches!(FieldElement::new(1, 4), Err(Error::NotPrime(4))));
        assert!(field_arith(ArithOp::Add, el(1, 3), None).is_err());
    }

    #[test]
    fn inverses_are_inverses() {
        for q in [2, 3, 5, 7, 11] {
            let f = Field::new(q).unwrap();
            for x in 1..q {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
            }
        }
    }

    #[test]
    fn matvec_examples() {
        let a = FieldMatrix::from_dense(2, &[vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(a.matvec(&[1, 1]).unwrap(), vec![1, 0]);
        let z = FieldMatrix::zeros(3, 2, 3).unwrap();
        assert_eq!(z.matvec(&[1, 2, 0]).unwrap(), vec![0, 0]);
        let b = FieldMatrix::from_dense(3, &[vec![1, 2], vec![0, 1]]).unwrap();
        assert_eq!(b.matvec(&[2, 2]).unwrap(), vec![0, 2]);
    }

    #[test]
    fn matvec_rejects_bad_input() {
        let a = FieldMatrix::identity(2, 2).unwrap();
        assert!(a.matvec(&[1]).is_err());
        assert!(a.matvec(&[1, 2]).is_err());
    }

    #[test]
    fn construction_rejects_bad_entries() {
        assert!(FieldMatrix::new(2, 1, 2, [(0, 0, 0)]).is_err());
        assert!(FieldMatrix::new(3, 1, 2, [(0, 0, 3)]).is_err());
        assert!(FieldMatrix::new(2, 1, 2, [(0, 0, 1), (0, 0, 1)]).is_err());
        assert!(FieldMatrix::new(2, 1, 2, [(1, 0, 1)]).is_err());
        assert!(FieldMatrix::new(4, 1, 2, []).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(FieldMatrix::zeros(2, 2, 2).unwrap().rank_and_image_size(), (0, 1));
        assert_eq!(FieldMatrix::identity(3, 4).unwrap().rank_and_image_size(), (4, 81));
        let ones = FieldMatrix::from_dense(2, &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(ones.rank_and_image_size(), (1, 2));
    }

    #[test]
    fn solve_affine_examples() {
        let a = FieldMatrix::from_dense(2, &[vec![1, 1]]).unwrap();
        let c = solve_affine(&CosetSpec::new(a, vec![1]).unwrap());
        assert_eq!(c.to_vec(), vec![vec![0, 1], vec![1, 0]]);

        let id = FieldMatrix::identity(3, 3).unwrap();
        let c = solve_affine(&CosetSpec::new(id, vec![2, 0, 1]).unwrap());
        assert_eq!(c.to_vec(), vec![vec![2, 0, 1]]);

        let ones = FieldMatrix::from_dense(2, &[vec![1, 1], vec![1, 1]]).unwrap();
        let c = solve_affine(&CosetSpec::new(ones, vec![0, 1]).unwrap());
        assert!(c.is_empty());
        assert_eq!(c.size(), 0);
        assert_eq!(c.iter().count(), 0);
    }

    #[test]
    fn empty_matrix_coset_is_everything() {
        let a = FieldMatrix::zeros(3, 0, 2).unwrap();
        let c = solve_affine(&CosetSpec::new(a, vec![]).unwrap());
        assert_eq!(c.size(), 9);
        assert_eq!(c.to_vec(), seq::all_sequences(3, 2, 100).unwrap());
    }

    #[test]
    fn image_vectors_of_rank_one() {
        let ones = FieldMatrix::from_dense(3, &[vec![1, 1], vec![2, 2]]).unwrap();
        assert_eq!(ones.image_vectors(), vec![vec![0, 0], vec![1, 2], vec![2, 1]]);
        assert!(ones.in_image(&[2, 1]).unwrap());
        assert!(!ones.in_image(&[1, 1]).unwrap());
    }

    fn all_matrices(q: usize, l: usize, n: usize) -> Vec<FieldMatrix> {
        seq::all_sequences(q, l * n, 1 << 20)
            .unwrap()
            .into_iter()
            .map(|flat| {
                let dense: Vec<Vec<usize>> = flat.chunks(n).map(<[usize]>::to_vec).collect();
                FieldMatrix::from_dense_with_cols(q, n, &dense).unwrap()
            })
            .collect()
    }

    /// Cosets partition U^n into q^rank classes of size q^(n-rank), each
    /// enumerated lexicographically. Exhaustive over small shapes.
    #[test]
    fn cosets_partition_space_exhaustively() {
        for (q, l, n) in [(2, 1, 3), (2, 2, 3), (2, 2, 4), (3, 1, 3), (3, 2, 2), (2, 3, 2)] {
            let space = seq::all_sequences(q, n, 1 << 12).unwrap();
            let mats = all_matrices(q, l, n);
            let step = (mats.len() / 40).max(1);
            for a in mats.iter().step_by(step) {
                let (rank, img) = a.rank_and_image_size();
                let mut covered = 0u128;
                let mut hits = vec![0usize; space.len()];
                for syn in seq::all_sequences(q, l, 1 << 12).unwrap() {
                    let coset = solve_affine(&CosetSpec::new(a.clone(), syn.clone()).unwrap());
                    let members = coset.to_vec();
                    let brute: Vec<Vec<usize>> =
                        space.iter().filter(|u| a.apply(u) == syn).cloned().collect();
                    assert_eq!(members, brute, "q={q} a={a:?} syn={syn:?}");
                    if !members.is_empty() {
                        assert_eq!(coset.size(), seq::pow(q, n - rank));
                        covered += 1;
                    }
                    for m in &members {
                        hits[seq::vec_to_index(m, q)] += 1;
                    }
                }
                assert_eq!(covered, img);
                assert!(hits.iter().all(|&h| h == 1));
                assert_eq!(a.image_vectors().len() as u128, img);
            }
        }
    }

    fn arb_matrix() -> impl Strategy<Value = FieldMatrix> {
        (prop_oneof![Just(2usize), Just(3), Just(5)], 1usize..5, 1usize..6).prop_flat_map(|(q, l, n)| {
            proptest::collection::vec(proptest::collection::vec(0..q, n), l)
                .prop_map(move |d| FieldMatrix::from_dense(q, &d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matvec_is_linear(a in arb_matrix(), seed in any::<u64>()) {
            let q = a.q();
            let n = a.cols();
            let u: Vec<usize> = (0..n).map(|i| ((seed >> (i * 3)) as usize) % q).collect();
            let v: Vec<usize> = (0..n).map(|i| ((seed >> (i * 5 + 1)) as usize) % q).collect();
            let sum: Vec<usize> = u.iter().zip(&v).map(|(x, y)| (x + y) % q).collect();
            let lhs = a.matvec(&sum).unwrap();
            let rhs: Vec<usize> = a.matvec(&u).unwrap().iter()
                .zip(a.matvec(&v).unwrap()).map(|(x, y)| (x + y) % q).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn rank_invariant_under_row_permutation(a in arb_matrix(), rot in 0usize..5) {
            let l = a.rows();
            let perm: Vec<usize> = (0..l).map(|i| (i + rot) % l).rev().collect();
            prop_assert_eq!(a.rank(), a.permute_rows(&perm).unwrap().rank());
            prop_assert!(a.rank() <= a.rows().min(a.cols()));
        }
    }
}
