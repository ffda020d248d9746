//! Dense matrices and canonical subspaces over an exact scalar.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::Scalar;

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> std::fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl<T: Scalar> Mat<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        Mat { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[Vec<T>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "row length mismatch");
            data.extend(r.iter().cloned());
        }
        Mat { rows: rows.len(), cols, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&v| T::from_i64(v)).collect()).collect();
        Self::from_rows(cols, &rows)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(rows: usize, cols: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, o.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn add(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &T) -> Mat<T> {
        let data = self.data.iter().map(|a| a.clone() * s.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat<T> {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    /// Reduced row echelon form, pivot columns and rank.
    pub fn rref(&self) -> (Mat<T>, Vec<usize>, usize) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let rank = pivots.len();
        (m, pivots, rank)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = self.get(r, c).inv().expect("pivot is nonzero");
            for j in c..cols {
                let v = self.get(r, j).clone() * inv.clone();
                self.set(r, j, v);
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..cols {
                    let rv = self.get(r, j).clone();
                    if rv.is_zero() {
                        continue;
                    }
                    let v = self.get(i, j).clone() - f.clone() * rv;
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().2
    }

    pub fn inverse(&self) -> Option<Mat<T>> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, T::one());
        }
        let pivots = aug.rref_in_place();
        if pivots.len() < n || (n > 0 && pivots[n - 1] != n - 1) {
            return None;
        }
        let idx: Vec<usize> = (0..n).collect();
        let right: Vec<usize> = (n..2 * n).collect();
        Some(aug.submatrix(&idx, &right))
    }

    /// Basis of the right null space {x : self·x = 0}.
    pub fn kernel(&self) -> Vec<Vec<T>> {
        let (r, pivots, _) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![T::zero(); self.cols];
                x[f] = T::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    x[pc] = -r.get(row, f).clone();
                }
                x
            })
            .collect()
    }

    /// One solution x of self·x = b, if any.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let pivots = aug.rref_in_place();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![T::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(row, self.cols).clone();
        }
        Some(x)
    }

    /// Text form: "rows cols p" followed by one line per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.rows, self.cols, T::characteristic());
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mat<T>> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let m = Self::parse_block(&mut lines)?;
        if lines.next().is_some() {
            return Err(Error::Parse("trailing content after matrix".into()));
        }
        Ok(m)
    }

    /// Parse one matrix block from a line iterator (used by flag files).
    pub fn parse_block<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<Mat<T>> {
        let header = lines.next().ok_or_else(|| Error::Parse("missing matrix header".into()))?;
        let nums: Vec<&str> = header.split_whitespace().collect();
        if nums.len() != 3 {
            return Err(Error::Parse(format!("matrix header must be 'rows cols p', got {header:?}")));
        }
        let parse = |s: &str| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad header field {s:?}")));
        let (rows, cols, p) = (parse(nums[0])? as usize, parse(nums[1])? as usize, parse(nums[2])?);
        if p != T::characteristic() {
            return Err(Error::FieldMismatch { expected: T::characteristic(), found: p });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {i}")))?;
            let entries: Vec<&str> = line.split_whitespace().collect();
            if entries.len() != cols {
                return Err(Error::Parse(format!("row {i} has {} entries, expected {cols}", entries.len())));
            }
            for e in entries {
                data.push(T::parse_canonical(e)?);
            }
        }
        Ok(Mat { rows, cols, data })
    }
}

pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

pub fn axpy<T: Scalar>(a: &T, x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(xi, yi)| a.clone() * xi.clone() + yi.clone()).collect()
}

pub fn unit<T: Scalar>(len: usize, i: usize) -> Vec<T> {
    let mut v = vec![T::zero(); len];
    v[i] = T::one();
    v
}

/// A subspace of T^N stored by its reduced row echelon basis. Equality and
/// hashing are structural, which is subspace equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace<T> {
    basis: Mat<T>,
}

impl<T: Scalar> std::fmt::Debug for Subspace<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subspace(dim {} in {}) ", self.dim(), self.ambient())?;
        let rows: Vec<String> = (0..self.dim())
            .map(|i| {
                let r: Vec<String> = self.basis.row(i).iter().map(|x| x.to_string()).collect();
                format!("[{}]", r.join(" "))
            })
            .collect();
        write!(f, "{}", rows.join(" "))
    }
}

impl<T: Scalar> Subspace<T> {
    pub fn zero(ambient: usize) -> Self {
        Subspace { basis: Mat::zeros(0, ambient) }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { basis: Mat::identity(ambient) }
    }

    /// Row space of a matrix.
    pub fn row_space(m: &Mat<T>) -> Self {
        let (r, _, rank) = m.rref();
        let idx: Vec<usize> = (0..rank).collect();
        let cols: Vec<usize> = (0..m.cols()).collect();
        Subspace { basis: r.submatrix(&idx, &cols) }
    }

    pub fn span(ambient: usize, vectors: &[Vec<T>]) -> Self {
        if vectors.is_empty() {
            return Self::zero(ambient);
        }
        Self::row_space(&Mat::from_rows(ambient, vectors))
    }

    /// Span of the coordinate vectors with the given 0-based indices.
    pub fn coordinate(ambient: usize, idx: &[usize]) -> Self {
        let vs: Vec<Vec<T>> = idx.iter().map(|&i| unit(ambient, i)).collect();
        Self::span(ambient, &vs)
    }

    /// Wrap a matrix already known to be in RREF with full row rank.
    pub fn from_rref_unchecked(basis: Mat<T>) -> Self {
        Subspace { basis }
    }

    pub fn ambient(&self) -> usize {
        self.basis.cols()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Mat<T> {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<Vec<T>> {
        self.basis.row_vecs()
    }

    pub fn pivots(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|i| self.basis.row(i).iter().position(|x| !x.is_zero()).expect("basis rows are nonzero"))
            .collect()
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.ambient() != o.ambient() {
            return Err(Error::Dimension(format!("ambient {} vs {}", self.ambient(), o.ambient())));
        }
        Ok(())
    }

    pub fn sum(&self, o: &Self) -> Self {
        self.check(o).expect("sum of subspaces in different ambient spaces");
        let mut vs = self.vectors();
        vs.extend(o.vectors());
        Self::span(self.ambient(), &vs)
    }

    pub fn intersect(&self, o: &Self) -> Self {
        self.check(o).expect("intersection of subspaces in different ambient spaces");
        let n = self.ambient();
        if self.dim() == 0 || o.dim() == 0 {
            return Self::zero(n);
        }
        if self.dim() == n {
            return o.clone();
        }
        if o.dim() == n {
            return self.clone();
        }
        // Columns: basis of self, then negated basis of o; kernel gives a·S = b·T.
        let mut cols = self.vectors();
        cols.extend(o.vectors().into_iter().map(|v| v.into_iter().map(|x| -x).collect()));
        let m = Mat::from_cols(n, &cols);
        let vs: Vec<Vec<T>> = m
            .kernel()
            .into_iter()
            .map(|k| {
                let mut v = vec![T::zero(); n];
                for (i, a) in k.iter().take(self.dim()).enumerate() {
                    if !a.is_zero() {
                        v = axpy(a, self.basis.row(i), &v);
                    }
                }
                v
            })
            .collect();
        Self::span(n, &vs)
    }

    /// Coefficients of v in the stored basis, if v lies in the subspace.
    pub fn coordinates(&self, v: &[T]) -> Option<Vec<T>> {
        let piv = self.pivots();
        let coeffs: Vec<T> = piv.iter().map(|&p| v[p].clone()).collect();
        let mut w = v.to_vec();
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                w = axpy(&-c.clone(), self.basis.row(i), &w);
            }
        }
        if w.iter().all(|x| x.is_zero()) {
            Some(coeffs)
        } else {
            None
        }
    }

    pub fn contains_vec(&self, v: &[T]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains(&self, o: &Self) -> bool {
        o.dim() <= self.dim() && (0..o.dim()).all(|i| self.contains_vec(o.basis.row(i)))
    }

    /// g·S for a square matrix g acting on column vectors.
    pub fn image(&self, g: &Mat<T>) -> Self {
        if self.dim() == 0 {
            return self.clone();
        }
        Self::row_space(&self.basis.mul(&g.transpose()))
    }

    /// Extend a basis of `self` by coordinate vectors to a basis of the
    /// ambient space; returns only the added vectors.
    pub fn complement_coords(&self) -> Vec<usize> {
        let piv = self.pivots();
        (0..self.ambient()).filter(|c| !piv.contains(c)).collect()
    }

    /// Basis of self extended by vectors so that the first `inner.dim()`
    /// vectors span `inner`. Requires inner ⊆ self.
    pub fn adapted_basis(&self, inner: &Self) -> Vec<Vec<T>> {
        assert!(self.contains(inner), "inner subspace must be contained");
        let mut out = inner.vectors();
        let mut cur = inner.clone();
        for v in self.vectors() {
            if !cur.contains_vec(&v) {
                cur = cur.sum(&Self::span(self.ambient(), std::slice::from_ref(&v)));
                out.push(v);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.basis.to_text()
    }
}

/// Gaussian binomial coefficient [n choose k]_q.
pub fn gaussian_binomial(n: usize, k: usize, q: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= q.pow((n - i) as u32) - 1;
        den *= q.pow((i + 1) as u32) - 1;
    }
    num / den
}

/// Every k-dimensional subspace of GF(p)^n, each exactly once, in RREF.
pub fn enumerate_subspaces<T: Scalar>(n: usize, k: usize, budget: u128) -> Result<Vec<Subspace<T>>> {
    let elems = T::elements().ok_or_else(|| Error::Invalid("enumeration needs a finite field".into()))?;
    let q = elems.len() as u128;
    let count = gaussian_binomial(n, k, q);
    if count > budget {
        return Err(Error::Budget { what: format!("subspaces of dim {k} in GF({q})^{n}"), needed: count, budget });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        // Free positions: (row, col) with col > pivot[row] and col not a pivot.
        let free: Vec<(usize, usize)> = (0..k)
            .flat_map(|r| ((pivots[r] + 1)..n).filter(|c| !pivots.contains(c)).map(move |c| (r, c)))
            .collect();
        let mut digits = vec![0usize; free.len()];
        loop {
            let mut m = Mat::zeros(k, n);
            for (r, &p) in pivots.iter().enumerate() {
                m.set(r, p, T::one());
            }
            for (&(r, c), &d) in free.iter().zip(&digits) {
                m.set(r, c, elems[d].clone());
            }
            out.push(Subspace::from_rref_unchecked(m));
            let mut i = 0;
            while i < digits.len() {
                digits[i] += 1;
                if digits[i] < elems.len() {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
        // Next combination of pivot columns.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if pivots[i] < n - k + i {
                pivots[i] += 1;
                for j in i + 1..k {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf3, Gf5, Rational};

    #[test]
    fn identity_is_its_own_rref() {
        let m = Mat::<Gf3>::identity(3);
        let (r, piv, rank) = m.rref();
        assert_eq!(r, m);
        assert_eq!(piv, vec![0, 1, 2]);
        assert_eq!(rank, 3);
    }

    #[test]
    fn dependent_rows_over_gf5() {
        let m = Mat::<Gf5>::from_i64(&[&[1, 2], &[2, 4]]);
        let (r, _, rank) = m.rref();
        assert_eq!(r, Mat::from_i64(&[&[1, 2], &[0, 0]]));
        assert_eq!(rank, 1);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let m = Mat::<Gf3>::zeros(2, 3);
        let (r, piv, rank) = m.rref();
        assert!(r.is_zero() && piv.is_empty() && rank == 0);
    }

    #[test]
    fn coordinate_intersections() {
        let s = Subspace::<Gf3>::coordinate(3, &[0, 1]);
        let t = Subspace::<Gf3>::coordinate(3, &[1, 2]);
        assert_eq!(s.intersect(&t), Subspace::coordinate(3, &[1]));
        assert_eq!(s.sum(&t), Subspace::full(3));
        let e1 = Subspace::<Gf3>::coordinate(3, &[0]);
        assert_eq!(e1.intersect(&e1), e1);
    }

    #[test]
    fn transverse_lines_over_gf3() {
        let s = Subspace::<Gf3>::span(2, &[vec![Gf3::new(1), Gf3::new(1)]]);
        let t = Subspace::<Gf3>::span(2, &[vec![Gf3::new(1), Gf3::new(2)]]);
        assert_eq!(s.intersect(&t).dim(), 0);
        assert_eq!(s.sum(&t), Subspace::full(2));
    }

    #[test]
    fn subspace_counts() {
        assert_eq!(enumerate_subspaces::<Gf3>(2, 1, 1000).unwrap().len(), 4);
        assert_eq!(enumerate_subspaces::<Gf3>(3, 3, 1000).unwrap().len(), 1);
        assert_eq!(enumerate_subspaces::<Gf3>(4, 2, 1000).unwrap().len(), 130);
        match enumerate_subspaces::<Gf3>(4, 2, 100) {
            Err(Error::Budget { needed, .. }) => assert_eq!(needed, 130),
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn inverse_and_solve() {
        let m = Mat::<Rational>::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(2));
        let b = vec![Rational::from_i64(3), Rational::from_i64(2)];
        assert_eq!(m.solve(&b).unwrap(), vec![Rational::from_i64(1), Rational::from_i64(1)]);
        assert!(Mat::<Rational>::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn text_round_trip() {
        let m = Mat::<Rational>::new(
            1,
            3,
            vec![Rational::from_i64(1), Rational::half(), -Rational::from_i64(7)],
        );
        let t = m.to_text();
        assert_eq!(t, "1 3 0\n1 1/2 -7\n");
        assert_eq!(Mat::<Rational>::from_text(&t).unwrap(), m);
        assert!(matches!(Mat::<Gf3>::from_text(&t), Err(Error::FieldMismatch { .. })));
    }
}
