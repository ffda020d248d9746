//! Direct enumeration of {g ∈ O_{2n+1}(p) : gS = S for every S} by
//! backtracking over images of an adapted basis.
//!
//! The basis b₀, b₁, … lists the configuration subspaces from small to large.
//! The image of b_k is searched in the intersection of all configuration
//! subspaces containing b_k, subject to (g b_k, g b_j) = (b_k, b_j) for j < k.
//! That is an affine condition, so the candidates are enumerated directly.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::form::{pair, perp};
use crate::linalg::{unit, Mat, Subspace};

const MAX_CONFIG: usize = 48;

/// Close the configuration under ⊥, ∩ and + (a stabilizer of the input
/// stabilizes all of these), keeping at most a few dozen subspaces.
fn saturate<T: Scalar>(input: &[Subspace<T>]) -> Vec<Subspace<T>> {
    let big = input.first().map_or(0, |s| s.ambient());
    let mut seen: HashSet<Subspace<T>> = HashSet::new();
    let mut out: Vec<Subspace<T>> = Vec::new();
    let mut add = |s: Subspace<T>, out: &mut Vec<Subspace<T>>| {
        if s.dim() > 0 && s.dim() < big && out.len() < MAX_CONFIG && seen.insert(s.clone()) {
            out.push(s);
        }
    };
    for s in input {
        add(s.clone(), &mut out);
    }
    for _ in 0..2 {
        let cur = out.clone();
        for s in &cur {
            add(perp(s), &mut out);
        }
        let cur = out.clone();
        for (i, a) in cur.iter().enumerate() {
            for b in &cur[i + 1..] {
                add(a.intersect(b), &mut out);
                add(a.sum(b), &mut out);
            }
        }
    }
    out
}

struct Search<'a, T> {
    basis: Vec<Vec<T>>,
    containers: Vec<Vec<Vec<T>>>,
    gram: Vec<Vec<T>>,
    elems: Vec<T>,
    check: &'a [Subspace<T>],
    binv: Mat<T>,
    images: Vec<Vec<T>>,
    found: Vec<Mat<T>>,
    nodes: u128,
    budget: u128,
}

impl<T: Scalar> Search<'_, T> {
    fn run(&mut self, k: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Budget { what: "stabilizer search nodes".into(), needed: self.nodes, budget: self.budget });
        }
        let big = self.basis.len();
        if k == big {
            let y = Mat::from_cols(big, &self.images);
            let g = y.mul(&self.binv);
            if self.check.iter().all(|s| &s.image(&g) == s) {
                self.found.push(g);
            }
            return Ok(());
        }
        let cs = self.containers[k].clone();
        let t = cs.len();
        // Σ a_s (c_s, y_j) = (b_k, b_j) for j < k.
        let rows: Vec<Vec<T>> = (0..k).map(|j| cs.iter().map(|c| pair(c, &self.images[j])).collect()).collect();
        let rhs: Vec<T> = (0..k).map(|j| self.gram[k][j].clone()).collect();
        let (part, ker) = if k == 0 {
            (vec![T::zero(); t], (0..t).map(|i| unit(t, i)).collect::<Vec<_>>())
        } else {
            let m = Mat::from_rows(t, &rows);
            match m.solve(&rhs) {
                Some(x) => (x, m.kernel()),
                None => return Ok(()),
            }
        };
        let q = self.elems.len();
        let count = (q as u128).checked_pow(ker.len() as u32).unwrap_or(u128::MAX);
        if count > self.budget {
            return Err(Error::Budget { what: "stabilizer search candidates".into(), needed: count, budget: self.budget });
        }
        let target = self.gram[k][k].clone();
        for code in 0..count {
            let mut a = part.clone();
            let mut c = code;
            for kv in &ker {
                let lam = &self.elems[(c % q as u128) as usize];
                c /= q as u128;
                if !lam.is_zero() {
                    for (x, y) in a.iter_mut().zip(kv) {
                        *x = x.clone() + lam.clone() * y.clone();
                    }
                }
            }
            let mut y = vec![T::zero(); big];
            for (coef, cv) in a.iter().zip(&cs) {
                if !coef.is_zero() {
                    for (yi, ci) in y.iter_mut().zip(cv) {
                        *yi = yi.clone() + coef.clone() * ci.clone();
                    }
                }
            }
            if pair(&y, &y) != target {
                continue;
            }
            self.images.push(y);
            let r = self.run(k + 1);
            self.images.pop();
            r?;
        }
        Ok(())
    }
}

/// Every g ∈ O_{2n+1}(p) with gS = S for all listed S, sorted. `budget`
/// bounds the number of search nodes.
pub fn enumerate_stabilizer<T: Scalar>(n: usize, subspaces: &[Subspace<T>], budget: u128) -> Result<Vec<Mat<T>>> {
    let big = 2 * n + 1;
    let elems = T::elements().ok_or_else(|| Error::Invalid("stabilizer enumeration needs a finite field".into()))?;
    if subspaces.iter().any(|s| s.ambient() != big) {
        return Err(Error::Dimension("configuration subspace in the wrong ambient space".into()));
    }
    let mut config = saturate(subspaces);
    config.sort_by_key(|s| s.dim());
    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut cur = Subspace::zero(big);
    let mut add = |v: Vec<T>, basis: &mut Vec<Vec<T>>| {
        if !cur.contains_vec(&v) {
            cur = cur.sum(&Subspace::span(big, std::slice::from_ref(&v)));
            basis.push(v);
        }
    };
    for s in &config {
        for v in s.vectors() {
            add(v, &mut basis);
        }
    }
    for i in 0..big {
        add(unit(big, i), &mut basis);
    }
    let containers: Vec<Vec<Vec<T>>> = basis
        .iter()
        .map(|b| {
            config
                .iter()
                .filter(|s| s.contains_vec(b))
                .fold(Subspace::full(big), |acc, s| acc.intersect(s))
                .vectors()
        })
        .collect();
    let gram: Vec<Vec<T>> = basis.iter().map(|u| basis.iter().map(|v| pair(u, v)).collect()).collect();
    let binv = Mat::from_cols(big, &basis).inverse().expect("basis");
    let mut search = Search {
        basis,
        containers,
        gram,
        elems,
        check: subspaces,
        binv,
        images: Vec::new(),
        found: Vec::new(),
        nodes: 0,
        budget,
    };
    search.run(0)?;
    let mut found = search.found;
    found.sort();
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Gf3;
    use crate::form::is_orthogonal;
    use crate::stabilizer::orthogonal_order;

    #[test]
    fn whole_group_orders() {
        assert_eq!(enumerate_stabilizer::<Gf3>(0, &[], 1000).unwrap().len(), 2);
        assert_eq!(enumerate_stabilizer::<Gf3>(1, &[], 10_000).unwrap().len() as u128, orthogonal_order(1, 3));
        let all = enumerate_stabilizer::<Gf3>(2, &[], 10_000_000).unwrap();
        assert_eq!(all.len() as u128, orthogonal_order(2, 3));
        assert!(all.iter().take(50).all(is_orthogonal));
    }

    #[test]
    fn stabilizer_of_an_isotropic_line() {
        let line = Subspace::<Gf3>::coordinate(3, &[0]);
        assert_eq!(enumerate_stabilizer(1, &[line], 10_000).unwrap().len(), 12);
    }
}
