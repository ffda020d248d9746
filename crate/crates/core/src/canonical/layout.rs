//! Index sets I₍ⱼ₎, their partner maps, and the representative V(b, ε).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::form::{bar, is_isotropic};
use crate::invariants::{InvariantTuple, PairShape};
use crate::linalg::{unit, Subspace};

/// Index sets and maps (0-based) that place each summand of V(b, ε).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexLayout {
    pub n: usize,
    /// `sets[j]` is I₍ⱼ₎ for j = 1..=15; `sets[0]` is unused.
    pub sets: Vec<Vec<usize>>,
    /// `eta[j][k]` is the partner of `sets[j][k]` for j ∈ {7, 8, 9, 13, 15}.
    pub eta: Vec<Vec<usize>>,
    pub kappa: Vec<usize>,
    pub lambda: Vec<usize>,
    /// Center index c of the b₁₅ block, if b₁₅ > 0.
    pub center: Option<usize>,
    /// I₍₁₅₎⁺, the first ⌈b₁₅/2⌉ indices of I₍₁₅₎.
    pub plus_half: Vec<usize>,
    pub d: usize,
    pub dp: usize,
}

fn range(start: usize, len: usize) -> Vec<usize> {
    (start..start + len).collect()
}

impl IndexLayout {
    pub fn new(shape: &PairShape, t: &InvariantTuple) -> Result<Self> {
        t.check(shape)?;
        let b = |j: usize| t.get(j);
        let (a0, ap, d, dp, a1) = (shape.a0, shape.ap, shape.d, shape.dp, shape.a1);
        let mut sets = vec![Vec::new(); 16];
        let mut eta = vec![Vec::new(); 16];
        sets[1] = range(0, b(1));
        sets[2] = range(b(1), b(2));
        sets[3] = range(a0, b(3));
        sets[4] = range(a0 + ap, b(4));
        sets[5] = range(d, b(5));
        sets[6] = range(dp, b(6));
        sets[10] = range(a0 + ap - b(10), b(10));
        sets[11] = range(d - b(11), b(11));
        sets[14] = range(d + a1, b(14));
        sets[7] = range(a0 + b(3), b(7));
        eta[7] = range(a0 + ap + b(4), b(7));
        sets[8] = range(a0 + b(3) + b(7), b(8));
        eta[8] = range(dp + b(6), b(8));
        sets[9] = range(a0 + ap + b(4) + b(7), b(9));
        eta[9] = range(d + b(5), b(9));
        sets[13] = range(d + b(5) + b(9) + b(12) + b(15), b(13));
        eta[13] = range(d + a1 + b(14) + b(12), b(13));
        sets[12] = range(d + b(5) + b(9), b(12));
        let kappa = range(dp + b(6) + b(8), b(12));
        let lambda = range(d + a1 + b(14), b(12));
        sets[15] = range(d + b(5) + b(9) + b(12), b(15));
        eta[15] = range(dp + b(6) + b(8) + b(12) + b(13), b(15));
        let (center, plus_half) = if b(15) > 0 {
            let half = b(15).div_ceil(2);
            (Some(d + b(5) + b(9) + b(12) + half - 1), range(d + b(5) + b(9) + b(12), half))
        } else {
            (None, Vec::new())
        };
        let layout = IndexLayout { n: shape.n, sets, eta, kappa, lambda, center, plus_half, d, dp };
        layout.check_disjoint()?;
        Ok(layout)
    }

    pub fn set(&self, j: usize) -> &[usize] {
        &self.sets[j]
    }

    /// All indices touched by the summand of block j, with partners.
    pub fn touched(&self, j: usize) -> Vec<usize> {
        let n = self.n;
        let mut base: Vec<usize> = self.sets[j].clone();
        match j {
            7 | 8 | 9 | 13 => base.extend(self.eta[j].iter().copied()),
            12 => {
                base.extend(self.kappa.iter().copied());
                base.extend(self.lambda.iter().copied());
            }
            _ => {}
        }
        let mut all = base.clone();
        all.extend(base.iter().map(|&i| bar(n, i)));
        if j == 15 && !self.sets[15].is_empty() {
            all.push(n);
            all.sort();
            all.dedup();
        }
        all
    }

    fn check_disjoint(&self) -> Result<()> {
        let big = 2 * self.n + 1;
        let mut seen = vec![0usize; big];
        for j in 1..=15 {
            for i in self.touched(j) {
                if i >= big {
                    return Err(Error::Invalid(format!("block {j} index {i} outside ambient space")));
                }
                seen[i] += 1;
            }
        }
        if let Some(i) = seen.iter().position(|&c| c > 1) {
            return Err(Error::Invalid(format!("index {i} used by two blocks")));
        }
        Ok(())
    }
}

/// Spanning vectors of the summand V₍ⱼ₎ of the representative.
pub fn block_vectors<T: Scalar>(l: &IndexLayout, j: usize, eps: u8) -> Vec<Vec<T>> {
    let n = l.n;
    let big = 2 * n + 1;
    let e = |i: usize| unit::<T>(big, i);
    let comb = |terms: &[(usize, T)]| {
        let mut v = vec![T::zero(); big];
        for (i, c) in terms {
            v[*i] = v[*i].clone() + c.clone();
        }
        v
    };
    let one = T::one;
    let m1 = || -T::one();
    match j {
        1 | 3 | 4 | 5 | 6 | 14 => l.sets[j].iter().map(|&i| e(i)).collect(),
        2 | 10 | 11 => l.sets[j].iter().map(|&i| e(bar(n, i))).collect(),
        7 | 8 | 9 | 13 => {
            let mut out = Vec::new();
            for (&i, &h) in l.sets[j].iter().zip(&l.eta[j]) {
                out.push(comb(&[(i, one()), (h, one())]));
            }
            for (&i, &h) in l.sets[j].iter().zip(&l.eta[j]) {
                out.push(comb(&[(bar(n, i), one()), (bar(n, h), m1())]));
            }
            out
        }
        12 => {
            let mut out = Vec::new();
            let it = || l.sets[12].iter().zip(&l.kappa).zip(&l.lambda);
            for ((&i, &k), _) in it() {
                out.push(comb(&[(i, one()), (k, one())]));
            }
            for ((&i, _), &la) in it() {
                out.push(comb(&[(i, one()), (la, one())]));
            }
            for ((&i, &k), &la) in it() {
                out.push(comb(&[(bar(n, i), one()), (bar(n, k), m1()), (bar(n, la), m1())]));
            }
            out
        }
        15 => {
            let Some(c) = l.center else { return Vec::new() };
            let b15 = l.sets[15].len();
            let eta_of = |i: usize| {
                let pos = l.sets[15].iter().position(|&x| x == i).expect("index in block");
                l.eta[15][pos]
            };
            let mut out = Vec::new();
            for &i in l.plus_half.iter().filter(|&&i| i != c) {
                let h = eta_of(i);
                out.push(comb(&[(i, one()), (h, one())]));
                out.push(comb(&[(bar(n, i), one()), (bar(n, h), m1())]));
            }
            let h = eta_of(c);
            let half = T::half();
            if b15.is_multiple_of(2) {
                out.push(comb(&[(c, one()), (h, one())]));
                if eps == 0 {
                    out.push(comb(&[(bar(n, c), one()), (bar(n, h), m1())]));
                } else {
                    out.push(comb(&[(bar(n, c), one()), (bar(n, h), m1()), (c, -half), (n, one())]));
                }
            } else {
                out.push(comb(&[(bar(n, c), one()), (c, -half), (n, one())]));
            }
            out
        }
        _ => panic!("block index {j} out of range"),
    }
}

/// The representative V(b, ε) of the orbit with the given invariants.
pub fn representative<T: Scalar>(shape: &PairShape, t: &InvariantTuple) -> Result<Subspace<T>> {
    let l = IndexLayout::new(shape, t)?;
    let mut vs = Vec::new();
    for j in 1..=15 {
        vs.extend(block_vectors::<T>(&l, j, t.eps));
    }
    let v = Subspace::span(2 * shape.n + 1, &vs);
    if v.dim() != shape.n || !is_isotropic(&v) {
        return Err(Error::Invalid(format!(
            "representative has dim {} (expected {}) or is not isotropic",
            v.dim(),
            shape.n
        )));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf3, Rational};
    use crate::invariants::enumerate_tuples;

    fn tuple(pairs: &[(usize, usize)], eps: u8) -> InvariantTuple {
        let mut b = [0; 15];
        for &(j, v) in pairs {
            b[j - 1] = v;
        }
        InvariantTuple { b, eps }
    }

    #[test]
    fn empty_layout_for_rank_zero_blocks() {
        let s = PairShape::new(1, 0, 0, 0, 0).unwrap();
        let l = IndexLayout::new(&s, &tuple(&[(14, 1)], 0)).unwrap();
        for j in 1..=13 {
            assert!(l.set(j).is_empty());
        }
        assert_eq!(l.set(14), &[0]);
    }

    #[test]
    fn odd_block_layout_n1() {
        let s = PairShape::new(1, 0, 0, 0, 1).unwrap();
        let l = IndexLayout::new(&s, &tuple(&[(15, 1)], 1)).unwrap();
        assert_eq!(l.set(15), &[0]);
        assert_eq!(l.center, Some(0));
        assert_eq!(l.plus_half, vec![0]);
        // d = 0, d′ = 2 (1-based), so η₁₅ sends label 1 to label 3.
        assert_eq!(l.eta[15], vec![2]);
    }

    #[test]
    fn small_representatives() {
        let s = PairShape::new(1, 1, 0, 0, 0).unwrap();
        let v = representative::<Gf3>(&s, &tuple(&[(1, 1)], 0)).unwrap();
        assert_eq!(v, Subspace::coordinate(3, &[0]));
        let v = representative::<Gf3>(&s, &tuple(&[(2, 1)], 0)).unwrap();
        assert_eq!(v, Subspace::coordinate(3, &[2]));
        let s = PairShape::new(1, 0, 0, 0, 1).unwrap();
        let v = representative::<Rational>(&s, &tuple(&[(15, 1)], 1)).unwrap();
        let w = vec![-Rational::half(), Rational::from_i64(1), Rational::from_i64(1)];
        assert_eq!(v, Subspace::span(3, &[w]));
    }

    #[test]
    fn every_layout_is_disjoint_and_isotropic() {
        for n in 1..=4 {
            for alpha in 0..=n {
                for beta in 0..=n {
                    for s in PairShape::all(n, alpha, beta) {
                        for t in enumerate_tuples(&s) {
                            representative::<Gf3>(&s, &t).unwrap();
                        }
                    }
                }
            }
        }
    }
}
