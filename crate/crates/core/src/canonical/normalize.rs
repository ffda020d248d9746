//! Constructive normalization: a pair (U₊, U₋) to its coordinate model, and
//! a maximal isotropic V to its representative V(b, ε) by an element of
//! R = P_{U₊} ∩ P_{U₋}, in nine stages.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::form::{antidiag, bar, ell, ell0, element_from_isotropic_vectors, pair, perp, unipotent_xz, z_free_len, OrthElement};
use crate::invariants::{compute_b_with, pair_shape, require_normalized, InvariantTuple, PairShape, PairSpaces};
use crate::linalg::{unit, Mat, Subspace};

use super::b15::b15_block_normalize;
use super::layout::{block_vectors, representative, IndexLayout};
use super::tools::{
    block_identity, embed_orthogonal, extend_to_basis, find_with_coords, local_part, nondegenerate_pair_element,
    pair_adapted_basis, projection, restrict, straighten_isotropic,
};

/// ℓ(A) with the identity for d = 0.
pub fn ell_w<T: Scalar>(a: &Mat<T>, n: usize) -> OrthElement<T> {
    if a.rows() == 0 {
        OrthElement::identity(n)
    } else {
        ell(a, n)
    }
}

/// ℓ₀₀(D, D′) = ℓ₀(diag(D, D′, J ᵗD⁻¹ J)); D′ defaults to the identity.
pub fn ell00<T: Scalar>(shape: &PairShape, d: &Mat<T>, d_mid: Option<&Mat<T>>) -> Result<OrthElement<T>> {
    let a1 = shape.a1;
    let mid = shape.m - 2 * a1;
    let dinv = d.inverse().ok_or_else(|| Error::Invalid("ℓ₀₀ needs an invertible D".into()))?;
    let j = antidiag::<T>(a1);
    let low = j.mul(&dinv.transpose()).mul(&j);
    let mut b = Mat::identity(shape.m);
    for r in 0..a1 {
        for c in 0..a1 {
            b.set(r, c, d.get(r, c).clone());
            b.set(a1 + mid + r, a1 + mid + c, low.get(r, c).clone());
        }
    }
    if let Some(dm) = d_mid {
        for r in 0..mid {
            for c in 0..mid {
                b.set(a1 + r, a1 + c, dm.get(r, c).clone());
            }
        }
    }
    ell0(&b, shape.n)
}

/// M with M·vecs[i] = e_i; refuses dependent input.
fn units_map<T: Scalar>(vecs: Vec<Vec<T>>, dim: usize, stage: &str) -> Result<Mat<T>> {
    if Subspace::span(dim, &vecs).dim() != vecs.len() {
        return Err(stage_err(stage, "projection is not injective"));
    }
    Ok(Mat::from_cols(dim, &extend_to_basis(vecs, dim)).inverse().expect("basis"))
}

fn stage_err(stage: &str, detail: impl Into<String>) -> Error {
    Error::Stage { stage: stage.into(), detail: detail.into() }
}

fn zeros_z<T: Scalar>(d: usize) -> Vec<T> {
    vec![T::zero(); z_free_len(d)]
}

/// Normalization of an isotropic pair: g with g·U₊ and g·U₋
/// equal to the coordinate model of their shape. Built from an isotropic
/// straightening of W₊+W₋, a GL(d) alignment of W₊ and W₋, an element of
/// O(U) opposing the quotient pair, and a unipotent correction g(X, Z) with
/// zero free Z entries.
pub fn normalize_pair<T: Scalar>(up: &Subspace<T>, um: &Subspace<T>) -> Result<(OrthElement<T>, PairShape)> {
    let shape = pair_shape(up, um)?;
    let n = shape.n;
    let (d, a0, ap, a1, dp) = (shape.d, shape.a0, shape.ap, shape.a1, shape.dp);
    let wp = up.intersect(&perp(um));
    let wm = um.intersect(&perp(up));
    let g1 = straighten_isotropic(&wp.sum(&wm), n)?;
    let wcoords: Vec<usize> = (0..d).collect();
    let p = local_part(&g1.apply(&wp), &wcoords);
    let q = local_part(&g1.apply(&wm), &wcoords);
    let a = if d == 0 {
        Mat::identity(0)
    } else {
        Mat::from_cols(d, &pair_adapted_basis(&p, &q)).inverse().expect("basis")
    };
    let g = ell_w(&a, n).compose(&g1);
    let ucoords: Vec<usize> = (d..d + shape.m).collect();
    let pp = projection(&g.apply(up), &ucoords);
    let pm = projection(&g.apply(um), &ucoords);
    let h = nondegenerate_pair_element(&pp, &pm, (shape.m - 1) / 2)?;
    let g = ell0(h.mat(), n)?.compose(&g);
    let up3 = g.apply(up);
    let um3 = g.apply(um);
    let mut x = Mat::zeros(d, shape.m);
    let mut cols_p: Vec<usize> = (0..a0 + ap).collect();
    cols_p.extend(d..d + a1);
    let mut cols_m: Vec<usize> = (0..a0).collect();
    cols_m.extend(a0 + ap..d);
    cols_m.extend(dp..dp + a1);
    for j in 0..a1 {
        let mut t = vec![T::zero(); a0 + ap];
        t.extend(unit::<T>(a1, j));
        let v = find_with_coords(&up3, &cols_p, &t).ok_or_else(|| stage_err("pair", "U+ is not a graph over U(+)"))?;
        for i in a0 + ap..d {
            x.set(i, j, v[i].clone());
        }
        let mut t = vec![T::zero(); a0 + shape.am];
        t.extend(unit::<T>(a1, j));
        let v = find_with_coords(&um3, &cols_m, &t).ok_or_else(|| stage_err("pair", "U- is not a graph over U(-)"))?;
        for i in a0..a0 + ap {
            x.set(i, dp - d + j, v[i].clone());
        }
    }
    let g4 = if d == 0 { OrthElement::identity(n) } else { unipotent_xz(&x, &zeros_z(d), n)? };
    let g = g4.inverse().compose(&g);
    let (mp, mm) = shape.model_pair::<T>();
    if g.apply(up) != mp || g.apply(um) != mm {
        return Err(stage_err("pair", "normalized pair differs from the coordinate model"));
    }
    Ok((g, shape))
}

/// One recorded stage: its label, the element applied and the resulting V.
#[derive(Clone, Debug)]
pub struct StageRecord<T: Scalar> {
    pub label: String,
    pub element: OrthElement<T>,
    pub v: Subspace<T>,
}

/// Audit trail of [`canonicalize`]; composing the stage elements in order
/// gives the total element.
#[derive(Clone, Debug)]
pub struct NormalizationTrace<T: Scalar> {
    pub stages: Vec<StageRecord<T>>,
}

impl<T: Scalar> NormalizationTrace<T> {
    pub fn composed(&self, n: usize) -> OrthElement<T> {
        self.stages.iter().fold(OrthElement::identity(n), |acc, s| s.element.compose(&acc))
    }

    pub fn labels(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.label.as_str()).collect()
    }
}

/// Summary of a stage for JSON output.
#[derive(Clone, Debug, Serialize)]
pub struct StageSummary {
    pub label: String,
    pub identity: bool,
    pub v_dim: usize,
}

struct Ctx<T: Scalar> {
    shape: PairShape,
    layout: IndexLayout,
    tuple: InvariantTuple,
    n: usize,
    big: usize,
    up: Subspace<T>,
    um: Subspace<T>,
    v: Subspace<T>,
    trace: Vec<StageRecord<T>>,
}

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..b).collect()
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.contains(x)).collect()
}

impl<T: Scalar> Ctx<T> {
    fn b(&self, j: usize) -> usize {
        self.tuple.get(j)
    }

    fn wplus(&self) -> Vec<usize> {
        range(self.shape.a0, self.shape.a0 + self.shape.ap)
    }

    fn wminus(&self) -> Vec<usize> {
        range(self.shape.a0 + self.shape.ap, self.shape.d)
    }

    fn uplus(&self) -> Vec<usize> {
        range(self.shape.d, self.shape.d + self.shape.a1)
    }

    fn uminus(&self) -> Vec<usize> {
        range(self.shape.dp, self.shape.dp + self.shape.a1)
    }

    fn zcoords(&self) -> Vec<usize> {
        range(self.shape.d + self.shape.a1, self.shape.dp)
    }

    fn wbar(&self) -> Vec<usize> {
        range(self.shape.dp + self.shape.a1, self.big)
    }

    /// Coordinates not touched by the blocks 1..=k.
    fn rest(&self, k: usize) -> Vec<usize> {
        let mut used = vec![false; self.big];
        for j in 1..=k {
            for i in self.layout.touched(j) {
                used[i] = true;
            }
        }
        (0..self.big).filter(|&i| !used[i]).collect()
    }

    fn v_on(&self, idx: &[usize]) -> Subspace<T> {
        self.v.intersect(&Subspace::coordinate(self.big, idx))
    }

    fn in_r(&self, g: &OrthElement<T>) -> bool {
        g.apply(&self.up) == self.up && g.apply(&self.um) == self.um
    }

    fn check_r(&self, stage: &str, what: &str, g: &OrthElement<T>) -> Result<()> {
        if self.in_r(g) {
            Ok(())
        } else {
            Err(stage_err(stage, format!("{what} does not stabilize the pair")))
        }
    }

    fn blocks_span(&self, js: &[usize]) -> Subspace<T> {
        let mut vs = Vec::new();
        for &j in js {
            vs.extend(block_vectors::<T>(&self.layout, j, self.tuple.eps));
        }
        Subspace::span(self.big, &vs)
    }

    fn finish_stage(&mut self, label: &str, g: OrthElement<T>, done: usize) -> Result<()> {
        self.check_r(label, "stage element", &g)?;
        self.v = g.apply(&self.v);
        let blocks: Vec<usize> = (1..=done).collect();
        if !self.v.contains(&self.blocks_span(&blocks)) {
            return Err(stage_err(label, "normalized blocks are not contained in V"));
        }
        self.trace.push(StageRecord { label: label.into(), element: g, v: self.v.clone() });
        Ok(())
    }

    /// (i) GL(a₀) moves W₀ ∩ V onto V₍₁₎.
    fn stage_i(&mut self) -> Result<()> {
        let a0 = self.shape.a0;
        let s = local_part(&self.v, &range(0, a0));
        if s.dim() != self.b(1) {
            return Err(stage_err("i", "dim W0 ∩ V differs from b1"));
        }
        let a = units_map(s.vectors(), a0, "i")?;
        let g = ell_w(&block_identity(self.shape.d, 0, &a), self.n);
        self.finish_stage("i", g, 1)
    }

    /// (ii) An isotropic-vector element fixing e_i (i ∈ I₍₂₎) moves V₍₂₎ into V.
    fn stage_ii(&mut self) -> Result<()> {
        let v1 = self.v_on(&self.rest(1));
        let k_set: Vec<usize> = self.layout.set(2).iter().map(|&i| bar(self.n, i)).collect();
        let mut vecs = Vec::new();
        for t in 0..k_set.len() {
            let v = find_with_coords(&v1, &k_set, &unit(k_set.len(), t))
                .ok_or_else(|| stage_err("ii", "projection onto V(2) is not onto"))?;
            vecs.push(v);
        }
        let g1 = element_from_isotropic_vectors(&k_set, &vecs, self.n).map_err(|e| stage_err("ii", e.to_string()))?;
        self.finish_stage("ii", g1.inverse(), 2)
    }

    /// (iii) GL(a₊) × GL(a₋) moves W₊ ∩ V and W₋ ∩ V onto V₍₃₎ and V₍₄₎.
    fn stage_iii(&mut self) -> Result<()> {
        let s3 = local_part(&self.v, &self.wplus());
        let s4 = local_part(&self.v, &self.wminus());
        if s3.dim() != self.b(3) || s4.dim() != self.b(4) {
            return Err(stage_err("iii", "dimensions differ from b3, b4"));
        }
        let a = units_map(s3.vectors(), self.shape.ap, "iii")?;
        let b = units_map(s4.vectors(), self.shape.am, "iii")?;
        let m = block_identity(self.shape.d, self.shape.a0, &a);
        let m = block_identity(self.shape.d, self.shape.a0 + self.shape.ap, &b).mul(&m);
        let g = ell_w(&m, self.n);
        self.finish_stage("iii", g, 4)
    }

    /// (iv) ℓ₀₀(A, I) places p(V ∩ U₊) and p(V ∩ U₋), then g(X, 0) removes
    /// their W components.
    fn stage_iv(&mut self) -> Result<()> {
        let (d, a1, dp) = (self.shape.d, self.shape.a1, self.shape.dp);
        let r4 = self.rest(4);
        let mut cp = intersect_sorted(&self.wplus(), &r4);
        let wp_rest = cp.clone();
        cp.extend(self.uplus());
        let mut cm = intersect_sorted(&self.wminus(), &r4);
        let wm_rest = cm.clone();
        cm.extend(self.uminus());
        let p5 = projection(&self.v_on(&cp), &self.uplus());
        let p6 = projection(&self.v_on(&cm), &self.uminus());
        if p5.dim() != self.b(5) || p6.dim() != self.b(6) {
            return Err(stage_err("iv", "projections differ from b5, b6"));
        }
        // Q = U(+)^{⊥ p6} in local coordinates: local x_a pairs with y_{a1−1−a}.
        let rows: Vec<Vec<T>> = p6.vectors().iter().map(|y| y.iter().rev().cloned().collect()).collect();
        let q = if rows.is_empty() {
            Subspace::full(a1)
        } else {
            Subspace::span(a1, &Mat::from_rows(a1, &rows).kernel())
        };
        if !q.contains(&p5) {
            return Err(stage_err("iv", "p(V ∩ U+) is not orthogonal to p(V ∩ U-)"));
        }
        let basis = extend_to_basis(q.adapted_basis(&p5), a1);
        let dmat = Mat::from_cols(a1, &basis).inverse().expect("basis");
        let g3 = ell00(&self.shape, &dmat, None)?;
        self.check_r("iv", "ℓ00", &g3)?;
        let v3 = g3.apply(&self.v);
        let tp = v3.intersect(&Subspace::coordinate(self.big, &cp));
        let tm = v3.intersect(&Subspace::coordinate(self.big, &cm));
        let mut x = Mat::zeros(d, self.shape.m);
        for j in 0..self.b(5) {
            let v = find_with_coords(&tp, &self.uplus(), &unit(a1, j)).ok_or_else(|| stage_err("iv", "V(5) not reached"))?;
            for &i in &wp_rest {
                x.set(i, j, v[i].clone());
            }
        }
        for j in 0..self.b(6) {
            let v = find_with_coords(&tm, &self.uminus(), &unit(a1, j)).ok_or_else(|| stage_err("iv", "V(6) not reached"))?;
            for &i in &wm_rest {
                x.set(i, dp - d + j, v[i].clone());
            }
        }
        let g4 = if d == 0 { OrthElement::identity(self.n) } else { unipotent_xz(&x, &zeros_z(d), self.n)? };
        self.check_r("iv", "g(X,0)", &g4)?;
        self.finish_stage("iv", g4.inverse().compose(&g3), 6)
    }

    /// The v_j^± splitting shared by stages (v)–(vii). `ir` are the rest
    /// coordinates before the stage, `side` the U(±) coordinates that go to
    /// v_j^+. Returns the isotropic-vector element g with
    /// g e_j̄ = v_j^-, g e_{η(j)‾} = −v_j^+.
    fn split_element(&self, label: &str, j: usize, ir: &[usize], side: &[usize]) -> Result<OrthElement<T>> {
        let n = self.n;
        let set = self.layout.set(j).to_vec();
        let eta = self.layout.eta[j].clone();
        let vr = self.v_on(ir);
        let eta_bars: Vec<usize> = eta.iter().map(|&h| bar(n, h)).collect();
        // The η(I)‾ entries are forced to −1 by isotropy, so they stay free.
        let wb: Vec<usize> = intersect_sorted(&self.wbar(), ir).into_iter().filter(|c| !eta_bars.contains(c)).collect();
        let mut vj = Vec::new();
        for &i in &set {
            let mut t = vec![T::zero(); wb.len()];
            t[wb.iter().position(|&c| c == bar(n, i)).expect("bar of I_j is free")] = T::one();
            let v = find_with_coords(&vr, &wb, &t).ok_or_else(|| stage_err(label, "projection to the opposite of W is not onto"))?;
            vj.push(v);
        }
        for (v, &hb) in vj.iter().zip(&eta_bars) {
            if v[hb] != -T::one() {
                return Err(stage_err(label, "v_j has the wrong partner coefficient"));
            }
        }
        let side: Vec<usize> = intersect_sorted(side, ir).into_iter().filter(|c| !eta_bars.contains(c)).collect();
        let mut plus = Vec::new();
        for (v, &hb) in vj.iter().zip(&eta_bars) {
            let mut u = vec![T::zero(); self.big];
            u[hb] = -T::one();
            for &c in &side {
                u[c] = v[c].clone();
            }
            let mut vp = u.clone();
            for (&i, vi) in set.iter().zip(&vj) {
                let c = pair(&u, vi);
                vp[i] = vp[i].clone() - c;
            }
            plus.push(vp);
        }
        let mut k_set: Vec<usize> = set.iter().map(|&i| bar(n, i)).collect();
        k_set.extend(eta_bars.iter().copied());
        let mut vecs: Vec<Vec<T>> = vj
            .iter()
            .zip(&plus)
            .map(|(v, p)| v.iter().zip(p).map(|(a, b)| a.clone() - b.clone()).collect())
            .collect();
        vecs.extend(plus.iter().map(|p| p.iter().map(|x| -x.clone()).collect::<Vec<T>>()));
        let g = element_from_isotropic_vectors(&k_set, &vecs, n).map_err(|e| stage_err(label, e.to_string()))?;
        self.check_r(label, "splitting element", &g)?;
        Ok(g)
    }

    /// (v) GL alignment of V ∩ W to V₍₇₎¹, then the splitting element.
    fn stage_v(&mut self) -> Result<()> {
        let r6 = self.rest(6);
        let wp = intersect_sorted(&self.wplus(), &r6);
        let wm = intersect_sorted(&self.wminus(), &r6);
        let mut wc = wp.clone();
        wc.extend(wm.iter().copied());
        let s = self.v_on(&wc);
        if s.dim() != self.b(7) {
            return Err(stage_err("v", "dim V ∩ W differs from b7"));
        }
        let xs: Vec<Vec<T>> = s.vectors().iter().map(|v| restrict(v, &wp)).collect();
        let ys: Vec<Vec<T>> = s.vectors().iter().map(|v| restrict(v, &wm)).collect();
        let a = units_map(xs, wp.len(), "v")?;
        let b = units_map(ys, wm.len(), "v")?;
        let d = self.shape.d;
        let mut m = Mat::identity(d);
        if !wp.is_empty() {
            m = block_identity(d, wp[0], &a);
        }
        if !wm.is_empty() {
            m = block_identity(d, wm[0], &b).mul(&m);
        }
        let g5 = ell_w(&m, self.n);
        self.check_r("v", "ℓ(A, B)", &g5)?;
        let saved = self.v.clone();
        self.v = g5.apply(&self.v);
        let g6 = self.split_element("v", 7, &r6, &self.uplus());
        self.v = saved;
        self.finish_stage("v", g6?.inverse().compose(&g5), 7)
    }

    /// (vi) and (vii): `own` is the W side holding I₍ⱼ₎, `other` the W side
    /// holding the W-components, `u_side` the U side holding η(I₍ⱼ₎) and
    /// `split_side` the U side collected into v_j^+.
    fn stage_graph_block(&mut self, label: &str, j: usize, prev: usize) -> Result<()> {
        let (d, a1) = (self.shape.d, self.shape.a1);
        let ir = self.rest(prev);
        let plus_side = j == 8;
        let (own, other, u_side, split_side) = if plus_side {
            (self.wplus(), self.wminus(), self.uminus(), self.uplus())
        } else {
            (self.wminus(), self.wplus(), self.uplus(), self.uminus())
        };
        let own = intersect_sorted(&own, &ir);
        let other = intersect_sorted(&other, &ir);
        let u_rest = intersect_sorted(&u_side, &ir);
        let mut c = own.clone();
        c.extend(other.iter().copied());
        c.extend(u_rest.iter().copied());
        c.sort();
        let s = self.v_on(&c);
        if s.dim() != self.b(j) {
            return Err(stage_err(label, format!("graph part has dim {} (expected b{j})", s.dim())));
        }
        let xs: Vec<Vec<T>> = s.vectors().iter().map(|v| restrict(v, &own)).collect();
        let zs: Vec<Vec<T>> = s.vectors().iter().map(|v| restrict(v, &u_rest)).collect();
        let a = units_map(xs, own.len(), label)?;
        let mloc = units_map(zs, u_rest.len(), label)?;
        let gw = if own.is_empty() { OrthElement::identity(self.n) } else { ell_w(&block_identity(d, own[0], &a), self.n) };
        let off = if u_rest.is_empty() { 0 } else { u_rest[0] - u_side[0] };
        let full = block_identity(a1, off, &mloc);
        let dplus = if plus_side {
            // The U(-) action of ℓ₀₀(D) is J ᵗD⁻¹ J, so D = J ᵗM⁻¹ J.
            let j = antidiag::<T>(a1);
            j.mul(&full.inverse().expect("invertible").transpose()).mul(&j)
        } else {
            full
        };
        let gu = ell00(&self.shape, &dplus, None)?;
        let g1 = gu.compose(&gw);
        self.check_r(label, "GL alignment", &g1)?;
        let v1 = g1.apply(&self.v);
        let s1 = v1.intersect(&Subspace::coordinate(self.big, &c));
        let set = self.layout.set(j).to_vec();
        let eta = self.layout.eta[j].clone();
        let mut keys = own.clone();
        keys.extend(u_rest.iter().copied());
        let mut x = Mat::zeros(d, self.shape.m);
        for (&i, &h) in set.iter().zip(&eta) {
            let mut t = vec![T::zero(); keys.len()];
            t[keys.iter().position(|&k| k == i).expect("own index")] = T::one();
            t[keys.iter().position(|&k| k == h).expect("partner index")] = T::one();
            let w = find_with_coords(&s1, &keys, &t).ok_or_else(|| stage_err(label, "graph part not aligned"))?;
            for &r in &other {
                x.set(r, h - d, w[r].clone());
            }
        }
        let gn = if d == 0 { OrthElement::identity(self.n) } else { unipotent_xz(&x, &zeros_z(d), self.n)? };
        self.check_r(label, "g(X,0)", &gn)?;
        let g2 = gn.inverse().compose(&g1);
        let saved = self.v.clone();
        self.v = g2.apply(&self.v);
        let gs = self.split_element(label, j, &ir, &split_side);
        self.v = saved;
        self.finish_stage(label, gs?.inverse().compose(&g2), j)
    }

    /// (viii) h ∈ N_W with h(u) = u + φ̃±(u), then an isotropic-vector element
    /// h₂ moving V₍₁₀₎ ⊕ V₍₁₁₎ into V. φ̃± is extended by zero on the
    /// coordinate complement chosen by [`extend_to_basis`].
    fn stage_viii(&mut self) -> Result<()> {
        let (d, n) = (self.shape.d, self.n);
        let r9 = self.rest(9);
        let i10 = intersect_sorted(&self.wplus(), &r9);
        let i11 = intersect_sorted(&self.wminus(), &r9);
        let up9 = intersect_sorted(&self.uplus(), &r9);
        let um9 = intersect_sorted(&self.uminus(), &r9);
        let mut sumc = i10.clone();
        sumc.extend(up9.iter().copied());
        sumc.extend(um9.iter().copied());
        sumc.extend(i11.iter().copied());
        sumc.sort();
        let xp = perp(&self.v).intersect(&Subspace::coordinate(self.big, &sumc));
        let mut x = Mat::zeros(d, self.shape.m);
        for (w_idx, u_idx) in [(&i10, &up9), (&i11, &um9)] {
            let pis: Vec<Vec<T>> = xp.vectors().iter().map(|v| restrict(v, u_idx)).collect();
            let phis: Vec<Vec<T>> = xp.vectors().iter().map(|v| restrict(v, w_idx)).collect();
            if Subspace::span(u_idx.len(), &pis).dim() != pis.len() {
                return Err(stage_err("viii", "projection of X' ∩ U9 is not injective"));
            }
            let basis = extend_to_basis(pis, u_idx.len());
            let mut phicols = phis;
            while phicols.len() < basis.len() {
                phicols.push(vec![T::zero(); w_idx.len()]);
            }
            if u_idx.is_empty() || w_idx.is_empty() {
                continue;
            }
            let f = Mat::from_cols(w_idx.len(), &phicols).mul(&Mat::from_cols(u_idx.len(), &basis).inverse().expect("basis"));
            for (r, &wi) in w_idx.iter().enumerate() {
                for (c, &ui) in u_idx.iter().enumerate() {
                    x.set(wi, ui - d, f.get(r, c).clone());
                }
            }
        }
        let h = if d == 0 { OrthElement::identity(n) } else { unipotent_xz(&x, &zeros_z(d), n)? };
        self.check_r("viii", "h", &h)?;
        let v1 = h.inverse().apply(&self.v);
        let v9 = v1.intersect(&Subspace::coordinate(self.big, &r9));
        let z = self.zcoords();
        // Entries on Z and on I₍₁₀₎ ∪ I₍₁₁₎ stay free; h₂ absorbs them.
        let nonz: Vec<usize> = r9
            .iter()
            .copied()
            .filter(|c| !z.contains(c) && !i10.contains(c) && !i11.contains(c))
            .collect();
        let mut k_set: Vec<usize> = i10.iter().chain(&i11).map(|&i| bar(n, i)).collect();
        k_set.sort();
        let mut vecs = Vec::new();
        for &k in &k_set {
            let mut t = vec![T::zero(); nonz.len()];
            t[nonz.iter().position(|&c| c == k).expect("free bar index")] = T::one();
            let v = find_with_coords(&v9, &nonz, &t).ok_or_else(|| stage_err("viii", "e_i is not in V + Z + W"))?;
            vecs.push(v);
        }
        let h2 = element_from_isotropic_vectors(&k_set, &vecs, n).map_err(|e| stage_err("viii", e.to_string()))?;
        self.check_r("viii", "h2", &h2)?;
        self.finish_stage("viii", h2.inverse().compose(&h.inverse()), 11)
    }

    /// (ix) ℓ₁, ℓ₂, ℓ₃ in GL on U₍₊₎, ℓ₄ and ℓ₅ in O on the Z coordinates,
    /// and the b₁₅ block normal form ℓ₆.
    fn stage_ix(&mut self) -> Result<()> {
        let n = self.n;
        let shape = self.shape;
        let a1 = shape.a1;
        let r11 = self.rest(11);
        let xs = intersect_sorted(&self.uplus(), &r11);
        let ys = intersect_sorted(&self.uminus(), &r11);
        let p = xs.len();
        let (b12, b13, b14, b15) = (self.b(12), self.b(13), self.b(14), self.b(15));
        let off = if p == 0 { 0 } else { xs[0] - shape.d };
        let mut xy = xs.clone();
        xy.extend(ys.iter().copied());
        let yprime = |v: &Subspace<T>| perp(v).intersect(&Subspace::coordinate(self.big, &xy));
        let mut g = OrthElement::identity(n);
        let mut v = self.v.clone();
        if p > 0 {
            // ℓ₁: align π₊(Y′), its ⊥ of π₋(Y′) and their intersection.
            let yp = yprime(&v);
            let pp = projection(&yp, &xs);
            let rows: Vec<Vec<T>> = projection(&yp, &ys).vectors().iter().map(|y| y.iter().rev().cloned().collect()).collect();
            let q = if rows.is_empty() { Subspace::full(p) } else { Subspace::span(p, &Mat::from_rows(p, &rows).kernel()) };
            if pp.dim() != b12 + b15 || q.dim() != b12 + b13 || pp.intersect(&q).dim() != b12 {
                return Err(stage_err("ix", "projections of Y' have the wrong dimensions"));
            }
            let a = Mat::from_cols(p, &pair_adapted_basis(&pp, &q)).inverse().expect("basis");
            let l1 = ell00(&shape, &block_identity(a1, off, &a), None)?;
            v = l1.apply(&v);
            g = l1.compose(&g);
            // ℓ₂: A e_i = f(e_κ(i)) on I₍₁₂₎, so ℓ₂⁻¹ takes Y₁ to V₍₁₂₎¹.
            let yp = yprime(&v);
            let mut a2 = Mat::identity(p);
            for (k, &kap) in self.layout.kappa.iter().enumerate() {
                let mut t = vec![T::zero(); ys.len()];
                t[ys.iter().position(|&c| c == kap).expect("kappa in U(-)")] = T::one();
                let w = find_with_coords(&yp, &ys, &t).ok_or_else(|| stage_err("ix", "κ(I12) not in π-(Y')"))?;
                for (r, &c) in xs.iter().enumerate() {
                    a2.set(r, k, w[c].clone());
                }
            }
            let l2 = ell00(&shape, &block_identity(a1, off, &a2), None)?.inverse();
            v = l2.apply(&v);
            g = l2.compose(&g);
            // ℓ₃: remove the I₍₁₂₎ components of f(U₍₁₅₎⁻).
            let yp = yprime(&v);
            let i15 = self.layout.set(15).to_vec();
            let bars15: Vec<usize> = i15.iter().map(|&i| bar(n, i)).collect();
            let mut c = Mat::identity(p);
            let i12 = self.layout.set(12);
            let mut keys: Vec<usize> = xs.iter().copied().filter(|x| !i12.contains(x)).collect();
            keys.extend(ys.iter().copied().filter(|y| !bars15.contains(y)));
            for &i in &i15 {
                // Fix the x entries off I₁₂ to e_i; the I₁₂ entries are what ℓ₃ removes.
                let t: Vec<T> = keys.iter().map(|&x| if x == i { T::one() } else { T::zero() }).collect();
                let w = find_with_coords(&yp, &keys, &t).ok_or_else(|| stage_err("ix", "f(U15-) is not a graph over I15"))?;
                let col = xs.iter().position(|&x| x == i).expect("I15 in U(+)");
                for (r, &x) in xs.iter().enumerate() {
                    c.set(r, col, w[x].clone());
                }
            }
            let l3 = ell00(&shape, &block_identity(a1, off, &c), None)?.inverse();
            v = l3.apply(&v);
            g = l3.compose(&g);
        }
        // ℓ₄: Z ∩ V onto V₍₁₄₎.
        let z = self.zcoords();
        let s14 = local_part(&v, &z);
        if s14.dim() != b14 {
            return Err(stage_err("ix", "dim Z ∩ V differs from b14"));
        }
        let h = straighten_isotropic(&s14, shape.a2)?;
        let l4 = embed_orthogonal(&z, h.mat(), n)?;
        v = l4.apply(&v);
        g = l4.compose(&g);
        // ℓ₅: the Z-components of the complement vectors u_i.
        let i14: Vec<usize> = self.layout.set(14).to_vec();
        let zp: Vec<usize> = z.iter().copied().filter(|c| !i14.contains(c) && !i14.contains(&bar(n, *c))).collect();
        let vu = v.intersect(&Subspace::coordinate(self.big, &r11));
        let mut srcs: Vec<Vec<T>> = Vec::new();
        let mut tgts: Vec<Vec<T>> = Vec::new();
        let zlocal = |i: usize, s: i64| {
            let mut t = vec![T::zero(); zp.len()];
            t[zp.iter().position(|&c| c == i).expect("target in Z'")] = T::from_i64(s);
            t
        };
        let mut items: Vec<(Vec<T>, Vec<T>)> = Vec::new();
        for (k, &i) in self.layout.set(12).iter().enumerate() {
            items.push((unit(self.big, i), zlocal(self.layout.lambda[k], 1)));
        }
        for (k, &i) in self.layout.set(13).iter().enumerate() {
            items.push((unit(self.big, i), zlocal(self.layout.eta[13][k], 1)));
        }
        for (k, &i) in self.layout.set(13).iter().enumerate() {
            items.push((unit(self.big, bar(n, i)), zlocal(bar(n, self.layout.eta[13][k]), -1)));
        }
        for (k, &i) in self.layout.set(12).iter().enumerate() {
            let mut u = unit::<T>(self.big, bar(n, i));
            u[bar(n, self.layout.kappa[k])] = -T::one();
            items.push((u, zlocal(bar(n, self.layout.lambda[k]), -1)));
        }
        for (u, tgt) in items {
            let w = find_with_coords(&vu, &xy, &restrict(&u, &xy)).ok_or_else(|| stage_err("ix", "complement vector not in π(V)"))?;
            for &c in &i14 {
                if !w[bar(n, c)].is_zero() {
                    return Err(stage_err("ix", "V meets the opposite of V(14)"));
                }
            }
            srcs.push(restrict(&w, &zp));
            tgts.push(tgt);
        }
        // The line orthogonal to the v_i in Z′ carries a square norm.
        let zn = zp.len();
        let local = Subspace::span(zn, &srcs);
        let rows: Vec<Vec<T>> = local.vectors().iter().map(|v| v.iter().rev().cloned().collect()).collect();
        let comp = if rows.is_empty() { Subspace::full(zn) } else { Subspace::span(zn, &Mat::from_rows(zn, &rows).kernel()) };
        if comp.dim() != 1 || local.dim() != srcs.len() {
            return Err(stage_err("ix", "complement vectors do not span a hyperplane of Z'"));
        }
        let w0 = comp.vectors().remove(0);
        let c = pair(&w0, &w0);
        let s = c.sqrt().filter(|s| !s.is_zero()).ok_or_else(|| stage_err("ix", "center norm is not a nonzero square"))?;
        let sinv = s.inv().expect("nonzero");
        srcs.push(w0.iter().map(|x| x.clone() * sinv.clone()).collect());
        tgts.push(zlocal(n, 1));
        let b = Mat::from_cols(zn, &tgts).mul(&Mat::from_cols(zn, &srcs).inverse().ok_or_else(|| stage_err("ix", "Z' basis is dependent"))?);
        let l5 = embed_orthogonal(&zp, &b, n).map_err(|e| stage_err("ix", format!("ℓ5: {e}")))?;
        v = l5.apply(&v);
        g = l5.compose(&g);
        // ℓ₆ on U₍₁₅₎.
        let mut u15: Vec<usize> = self.layout.set(15).to_vec();
        u15.extend(self.layout.set(15).iter().map(|&i| bar(n, i)));
        u15.push(n);
        u15.sort();
        let block = v.intersect(&Subspace::coordinate(self.big, &u15));
        let l6 = b15_block_normalize(&block, &shape, &self.layout, self.tuple.eps)?;
        g = l6.compose(&g);
        self.finish_stage("ix", g, 15)
    }
}

/// Result of [`canonicalize`].
#[derive(Clone, Debug)]
pub struct Canonicalization<T: Scalar> {
    pub element: OrthElement<T>,
    pub tuple: InvariantTuple,
    pub shape: PairShape,
    pub representative: Subspace<T>,
    pub trace: NormalizationTrace<T>,
}

/// g ∈ R with g·V = V(b, ε), following stages (i)–(ix). The pair must be in
/// coordinate position; every stage re-checks that its element stabilizes
/// the pair and that the blocks normalized so far lie in the new V.
pub fn canonicalize<T: Scalar>(up: &Subspace<T>, um: &Subspace<T>, v: &Subspace<T>) -> Result<Canonicalization<T>> {
    let shape = require_normalized(up, um)?;
    let ps = PairSpaces::new(up, um);
    let tuple = compute_b_with(&shape, &ps, v)?;
    let layout = IndexLayout::new(&shape, &tuple)?;
    let n = shape.n;
    let mut ctx = Ctx {
        shape,
        layout,
        tuple,
        n,
        big: 2 * n + 1,
        up: up.clone(),
        um: um.clone(),
        v: v.clone(),
        trace: Vec::new(),
    };
    ctx.stage_i()?;
    ctx.stage_ii()?;
    ctx.stage_iii()?;
    ctx.stage_iv()?;
    ctx.stage_v()?;
    ctx.stage_graph_block("vi", 8, 7)?;
    ctx.stage_graph_block("vii", 9, 8)?;
    ctx.stage_viii()?;
    ctx.stage_ix()?;
    let rep = representative::<T>(&shape, &tuple)?;
    if ctx.v != rep {
        return Err(stage_err("ix", "final subspace differs from the representative"));
    }
    let trace = NormalizationTrace { stages: ctx.trace };
    let element = trace.composed(n);
    if element.apply(v) != rep {
        return Err(stage_err("ix", "composed element does not reach the representative"));
    }
    Ok(Canonicalization { element, tuple, shape, representative: rep, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf3, Gf5};
    use crate::form::is_isotropic;
    use crate::linalg::enumerate_subspaces;
    use rand::rngs::StdRng;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};

    fn max_isotropic<T: Scalar>(n: usize) -> Vec<Subspace<T>> {
        enumerate_subspaces::<T>(2 * n + 1, n, 10_000_000)
            .unwrap()
            .into_iter()
            .filter(is_isotropic)
            .collect()
    }

    fn check_all_shapes<T: Scalar>(n: usize) {
        let vs = max_isotropic::<T>(n);
        for alpha in 0..=n {
            for beta in 0..=n {
                for shape in PairShape::all(n, alpha, beta) {
                    let (up, um) = shape.model_pair::<T>();
                    let mut seen = std::collections::BTreeSet::new();
                    for v in &vs {
                        let c = canonicalize(&up, &um, v).unwrap_or_else(|e| panic!("{shape:?} {v:?}: {e}"));
                        assert_eq!(c.element.apply(v), c.representative);
                        assert_eq!(c.element.apply(&up), up);
                        assert_eq!(c.element.apply(&um), um);
                        assert_eq!(c.trace.labels(), ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix"]);
                        seen.insert(c.tuple);
                    }
                    let all: std::collections::BTreeSet<_> = crate::invariants::enumerate_tuples(&shape).into_iter().collect();
                    assert_eq!(seen, all, "{shape:?}");
                }
            }
        }
    }

    #[test]
    fn canonicalize_every_v_over_gf3_small_n() {
        for n in 1..=2 {
            check_all_shapes::<Gf3>(n);
        }
    }

    #[test]
    fn canonicalize_every_v_over_gf3_n3() {
        check_all_shapes::<Gf3>(3);
    }

    #[test]
    fn canonicalize_every_v_over_gf5_n2() {
        check_all_shapes::<Gf5>(2);
    }

    fn random_isotropic(n: usize, k: usize, rng: &mut StdRng) -> Subspace<Gf5> {
        let big = 2 * n + 1;
        let mut s = Subspace::zero(big);
        while s.dim() < k {
            let basis = perp(&s).vectors();
            let mut v = vec![Gf5::zero(); big];
            for b in &basis {
                let c = Gf5::from_i64(rng.gen_range(0..5));
                v = crate::linalg::axpy(&c, b, &v);
            }
            if pair(&v, &v).is_zero() && !s.contains_vec(&v) {
                s = s.sum(&Subspace::span(big, &[v]));
            }
        }
        s
    }

    #[test]
    fn random_pairs_reach_the_model() {
        let n = 3;
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let ka = rng.gen_range(0..=n);
            let kb = rng.gen_range(0..=n);
            let up = random_isotropic(n, ka, &mut rng);
            let um = random_isotropic(n, kb, &mut rng);
            let (g, shape) = normalize_pair(&up, &um).unwrap();
            let (mp, mm) = shape.model_pair::<Gf5>();
            assert_eq!(g.apply(&up), mp);
            assert_eq!(g.apply(&um), mm);
        }
    }

    #[test]
    fn random_rational_flags_reach_the_representative() {
        use crate::field::Rational;
        use crate::sampling::{random_element, random_isotropic};
        let mut rng = StdRng::seed_from_u64(11);
        for n in 1..=4 {
            for _ in 0..25 {
                let ka = rng.gen_range(0..=n);
                let kb = rng.gen_range(0..=n);
                let up = random_isotropic::<Rational, _>(n, ka, &mut rng);
                let um = random_isotropic::<Rational, _>(n, kb, &mut rng);
                let v = random_isotropic::<Rational, _>(n, n, &mut rng);
                let (g, _) = normalize_pair(&up, &um).unwrap();
                let (up1, um1, v1) = (g.apply(&up), g.apply(&um), g.apply(&v));
                let c = canonicalize(&up1, &um1, &v1).unwrap();
                assert_eq!(c.element.apply(&v1), c.representative);
                // Invariance under the stabilizer: moving V by h ∈ R keeps the tuple.
                let h = random_element::<Rational, _>(n, &mut rng);
                if h.apply(&up1) == up1 && h.apply(&um1) == um1 {
                    assert_eq!(canonicalize(&up1, &um1, &h.apply(&v1)).unwrap().tuple, c.tuple);
                }
            }
        }
    }
}
