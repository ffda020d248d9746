//! Elements of R_V for V = V(b, ε): block Levi elements h₍ⱼ₎(A), the
//! transvection-type families g_{i,k}(μ) built from maps φ: W_⟨k⟩ → W_⟨i⟩,
//! their quadratic variants for k ∈ I₍₁₅₎, and a sweep of root elements.
//!
//! The maps φ are kept symbolic: each node of the diagram has a fixed list
//! of slots (the basis of W_⟨i⟩ in a fixed order), each arrow carries a slot
//! matrix, and composites multiply slot matrices along a path. No block
//! needs to be nonempty for a composite through it to make sense.

use serde::Serialize;

use crate::canonical::IndexLayout;
use crate::error::Result;
use crate::field::Scalar;
use crate::form::bar;
use crate::invariants::{InvariantTuple, PairShape};
use crate::linalg::{Mat, Subspace};

use super::{gl_generators, GeneratorContext, GeneratorSet};

/// A node of the diagram on I₊: a block I₍ⱼ₎ or one of the barred blocks
/// ¯6 = bar I₍₆₎, ¯8 = bar η₈(I₍₈₎), ¯12 = bar κ(I₍₁₂₎).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Block(usize),
    BarSix,
    BarEight,
    BarTwelve,
}

use Node::{BarEight, BarSix, BarTwelve, Block};

/// Listing order of the nodes; paths are chosen greedily by this rank.
pub const ORDER: [Node; 14] = [
    Block(1),
    Block(2),
    Block(3),
    Block(7),
    Block(8),
    Block(10),
    Block(5),
    Block(9),
    Block(12),
    Block(15),
    Block(13),
    BarTwelve,
    BarEight,
    BarSix,
];

/// Arrows (target, source) of the diagram: I_target ← I_source.
pub const ARROWS: [(Node, Node); 18] = [
    (Block(1), Block(2)),
    (Block(1), Block(3)),
    (Block(2), Block(7)),
    (Block(3), Block(7)),
    (Block(7), Block(8)),
    (Block(8), Block(10)),
    (Block(3), Block(5)),
    (Block(7), Block(9)),
    (Block(5), Block(9)),
    (Block(9), Block(12)),
    (Block(8), Block(12)),
    (Block(12), Block(13)),
    (Block(10), Block(13)),
    (Block(12), Block(15)),
    (Block(13), BarTwelve),
    (Block(15), BarTwelve),
    (BarTwelve, BarEight),
    (BarEight, BarSix),
];

fn rank(node: Node) -> usize {
    ORDER.iter().position(|&x| x == node).expect("node in the listing")
}

fn nslots(node: Node) -> usize {
    match node {
        Block(7 | 8 | 9 | 13) | BarEight => 2,
        Block(12) | BarTwelve => 3,
        _ => 1,
    }
}

fn positions(l: &IndexLayout, node: Node) -> usize {
    match node {
        Block(j) => l.sets[j].len(),
        BarSix => l.sets[6].len(),
        BarEight => l.sets[8].len(),
        BarTwelve => l.sets[12].len(),
    }
}

/// Indices of W_⟨i⟩ in slot order, for the t-th index i of the node.
fn slots(l: &IndexLayout, node: Node, t: usize) -> Vec<usize> {
    let n = l.n;
    match node {
        // For block 9 the U₊ index is the partner.
        Block(9) => vec![l.eta[9][t], l.sets[9][t]],
        Block(j @ (7 | 8 | 13)) => vec![l.sets[j][t], l.eta[j][t]],
        Block(12) => vec![l.sets[12][t], l.kappa[t], l.lambda[t]],
        Block(j) => vec![l.sets[j][t]],
        BarSix => vec![bar(n, l.sets[6][t])],
        BarEight => vec![bar(n, l.eta[8][t]), bar(n, l.sets[8][t])],
        BarTwelve => vec![bar(n, l.kappa[t]), bar(n, l.sets[12][t]), bar(n, l.lambda[t])],
    }
}

/// Slot matrix (rows: target slots, columns: source slots) of the map
/// attached to an arrow. The first slot always goes to the first slot.
fn direct(target: Node, source: Node) -> Option<Vec<Vec<i64>>> {
    if !ARROWS.contains(&(target, source)) || source == Block(15) || target == Block(15) {
        return None;
    }
    let mut m = vec![vec![0i64; nslots(source)]; nslots(target)];
    m[0][0] = 1;
    match (target, source) {
        (Block(2), Block(7)) | (Block(10), Block(13)) => m[0][1] = -1,
        (Block(7), Block(8)) | (Block(7), Block(9)) => m[1][1] = 1,
        (Block(8), Block(12)) => {
            m[1][1] = 1;
            m[0][2] = -1;
        }
        (Block(9), Block(12)) => {
            m[1][1] = 1;
            m[1][2] = 1;
        }
        (Block(12), Block(13)) => m[1][1] = 1,
        (Block(13), BarTwelve) => m[1][2] = 1,
        (BarTwelve, BarEight) => {
            m[1][1] = 1;
            m[2][1] = -1;
        }
        _ => {}
    }
    Some(m)
}

/// Whether `source` lies below `target` along arrows avoiding block 15.
fn reaches(target: Node, source: Node) -> bool {
    target == source
        || ARROWS
            .iter()
            .any(|&(t, s)| t == target && s != Block(15) && reaches(s, source))
}

/// The lexicographically smallest path target ← … ← source avoiding 15.
pub fn path(target: Node, source: Node) -> Option<Vec<Node>> {
    if target == Block(15) || source == Block(15) || !reaches(target, source) {
        return None;
    }
    let mut out = vec![target];
    let mut cur = target;
    while cur != source {
        cur = ARROWS
            .iter()
            .filter(|&&(t, s)| t == cur && s != Block(15) && reaches(s, source))
            .map(|&(_, s)| s)
            .min_by_key(|&s| rank(s))
            .expect("reachable");
        out.push(cur);
    }
    Some(out)
}

fn mul_i64(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let cols = b[0].len();
    a.iter()
        .map(|row| (0..cols).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum()).collect())
        .collect()
}

/// Composite slot matrix φ_{target,source} along [`path`].
pub fn composite(target: Node, source: Node) -> Option<Vec<Vec<i64>>> {
    let p = path(target, source)?;
    if p.len() < 2 {
        return None;
    }
    let mut m = direct(p[0], p[1])?;
    for w in p[1..].windows(2) {
        m = mul_i64(&m, &direct(w[0], w[1])?);
    }
    Some(m)
}

fn to_mat<T: Scalar>(m: &[Vec<i64>]) -> Mat<T> {
    let rows = m.len();
    let cols = m[0].len();
    Mat::new(rows, cols, m.iter().flat_map(|r| r.iter().map(|&x| T::from_i64(x))).collect())
}

/// g with g e_ℓ = e_ℓ + μ φ(e_ℓ) on the source indices and
/// g e_ℓ = e_ℓ − μ φ*(e_ℓ) [− μ²/2 φφ*(e_ℓ)] on the bars of the target
/// indices; φ is given by its matrix in the two index lists.
pub fn transvection<T: Scalar>(n: usize, target: &[usize], source: &[usize], phi: &Mat<T>, mu: &T, quadratic: bool) -> Mat<T> {
    let big = 2 * n + 1;
    let mut g = Mat::identity(big);
    let bump = |g: &mut Mat<T>, r: usize, c: usize, v: T| {
        let x = g.get(r, c).clone() + v;
        g.set(r, c, x);
    };
    for (s, &col) in source.iter().enumerate() {
        for (r, &row) in target.iter().enumerate() {
            let f = phi.get(r, s);
            if !f.is_zero() {
                bump(&mut g, row, col, mu.clone() * f.clone());
            }
        }
    }
    let half_sq = mu.clone() * mu.clone() * T::half();
    for (r, &a) in target.iter().enumerate() {
        let col = bar(n, a);
        for (s, &b) in source.iter().enumerate() {
            let f = phi.get(r, s).clone();
            if f.is_zero() {
                continue;
            }
            bump(&mut g, bar(n, b), col, -(mu.clone() * f.clone()));
            if quadratic {
                let s2 = source.iter().position(|&x| x == bar(n, b)).expect("source closed under bar");
                for (r2, &row) in target.iter().enumerate() {
                    let f2 = phi.get(r2, s2);
                    if !f2.is_zero() {
                        bump(&mut g, row, col, -(half_sq.clone() * f.clone() * f2.clone()));
                    }
                }
            }
        }
    }
    g
}

/// I_⟨k⟩ for the `u`-th index k of I₍₁₅₎, with the slot matrix (rows:
/// the node-12 slots e_i, e_κ(i), e_λ(i)) of φ_{i,k} for i ∈ I₍₁₂₎.
fn fifteen_map<T: Scalar>(l: &IndexLayout, u: usize, eps: u8) -> (Vec<usize>, Mat<T>) {
    let n = l.n;
    let set = &l.sets[15];
    let b15 = set.len();
    let c = l.center.expect("b15 > 0");
    let cpos = set.iter().position(|&x| x == c).expect("center in block");
    let eta_c = l.eta[15][cpos];
    let pc = bar(n, eta_c);
    let k = set[u];
    let eta_k = l.eta[15][u];
    let delta = if l.plus_half.contains(&k) { T::one() } else { -T::one() };
    let half = T::half();
    let col = |src: &[usize], i: usize| src.iter().position(|&x| x == i).expect("index in I⟨k⟩");
    if k != c && k != pc {
        let src = vec![k, eta_k, bar(n, k), bar(n, eta_k)];
        let mut m = Mat::zeros(3, 4);
        m.set(0, 0, T::one());
        m.set(1, 1, delta);
        return (src, m);
    }
    if b15 % 2 == 1 {
        let src = vec![c, bar(n, c), n];
        let mut m = Mat::zeros(3, 3);
        m.set(0, 0, T::one());
        m.set(1, 1, half);
        m.set(2, 2, -T::one());
        return (src, m);
    }
    let src = vec![c, eta_c, bar(n, c), pc, n];
    let mut m = Mat::zeros(3, 5);
    if eps == 0 {
        m.set(0, col(&src, k), T::one());
        m.set(1, col(&src, eta_k), delta);
    } else if k == c {
        m.set(0, 0, T::one());
        m.set(1, 1, T::one());
        m.set(1, 2, half);
        m.set(2, 4, -T::one());
    } else {
        m.set(0, col(&src, pc), T::one());
        m.set(1, col(&src, bar(n, c)), -T::one());
    }
    (src, m)
}

/// Family elements that failed their stabilizer check, if any.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RvReport {
    pub family_elements: usize,
    pub root_elements: usize,
    pub rejected: Vec<String>,
}

fn mus<T: Scalar>() -> Vec<T> {
    let mut out = vec![T::one()];
    if let Some(z) = T::primitive_root() {
        if z != T::one() {
            out.push(z);
        }
    }
    out
}

fn node_name(node: Node) -> String {
    match node {
        Block(j) => j.to_string(),
        BarSix => "bar6".into(),
        BarEight => "bar8".into(),
        BarTwelve => "bar12".into(),
    }
}

/// h₍ⱼ₎(A): A on I₍ⱼ₎ (and on the partner indices), ᵗA⁻¹ on the bars.
pub fn block_levi<T: Scalar>(l: &IndexLayout, j: usize, a: &Mat<T>) -> Mat<T> {
    let n = l.n;
    let big = 2 * n + 1;
    let binv_t = a.inverse().expect("invertible block").transpose();
    let mut lists: Vec<Vec<usize>> = vec![l.sets[j].clone()];
    match j {
        7 | 8 | 9 | 13 => lists.push(l.eta[j].clone()),
        12 => {
            lists.push(l.kappa.clone());
            lists.push(l.lambda.clone());
        }
        _ => {}
    }
    let mut g = Mat::identity(big);
    for idx in &lists {
        for (kk, &col) in idx.iter().enumerate() {
            for (ii, &row) in idx.iter().enumerate() {
                g.set(row, col, a.get(ii, kk).clone());
                g.set(bar(n, row), bar(n, col), binv_t.get(ii, kk).clone());
            }
        }
    }
    g
}

/// Generators of R_V for V = representative(shape, tuple), with a report.
pub fn rv_generators_report<T: Scalar>(shape: &PairShape, tuple: &InvariantTuple) -> Result<(GeneratorSet<T>, RvReport)> {
    let l = IndexLayout::new(shape, tuple)?;
    let n = shape.n;
    let big = shape.ambient();
    let (up, um) = shape.model_pair::<T>();
    let v = crate::canonical::representative::<T>(shape, tuple)?;
    let mut set = GeneratorSet::new(
        big,
        GeneratorContext::TripleStabilizer { shape: *shape, tuple: *tuple },
        true,
        vec![up, um, v],
    )?;
    let mut report = RvReport::default();
    set.push_checked("minus identity", Mat::identity(big).scale(&-T::one()));
    let offer = |set: &mut GeneratorSet<T>, report: &mut RvReport, tag: String, g: Mat<T>| {
        if set.admits(&g) {
            set.push_checked(tag, g);
            report.family_elements += 1;
        } else {
            report.rejected.push(tag);
        }
    };

    for j in 1..=14 {
        for a in gl_generators::<T>(l.sets[j].len()) {
            let g = block_levi(&l, j, &a);
            offer(&mut set, &mut report, format!("h({j})"), g);
        }
    }

    let mu_list = mus::<T>();
    for &target in &ORDER {
        for &source in &ORDER {
            let Some(phi) = composite(target, source) else { continue };
            let phi = to_mat::<T>(&phi);
            for t in 0..positions(&l, target) {
                let ti = slots(&l, target, t);
                for u in 0..positions(&l, source) {
                    let si = slots(&l, source, u);
                    let mut tb: Vec<usize> = ti.iter().map(|&x| bar(n, x)).collect();
                    let mut ss = si.clone();
                    tb.sort();
                    ss.sort();
                    if tb == ss {
                        continue;
                    }
                    for mu in &mu_list {
                        let g = transvection(n, &ti, &si, &phi, mu, false);
                        offer(&mut set, &mut report, format!("g({},{})", node_name(target), node_name(source)), g);
                    }
                }
            }
        }
    }

    let one = Mat::new(1, 1, vec![T::one()]);
    for mu in &mu_list {
        for t in 0..l.sets[12].len() {
            let g = transvection(n, &[l.sets[12][t]], &[bar(n, l.kappa[t])], &one, mu, false);
            offer(&mut set, &mut report, "g(12,bar kappa)".into(), g);
        }
        for t in 0..l.sets[8].len() {
            let g = transvection(n, &[l.sets[8][t]], &[bar(n, l.eta[8][t])], &one, mu, false);
            offer(&mut set, &mut report, "g(8,bar eta8)".into(), g);
        }
        for &i in &l.sets[15] {
            for &k6 in &l.sets[6] {
                let g = transvection(n, &[i], &[bar(n, k6)], &one, mu, false);
                offer(&mut set, &mut report, "g(15,bar6)".into(), g);
            }
        }
    }

    if !l.sets[15].is_empty() {
        let c = l.center.expect("b15 > 0");
        for &target in &[Block(1), Block(2), Block(3), Block(5), Block(7), Block(8), Block(9), Block(12)] {
            let lift: Mat<T> = if target == Block(12) {
                Mat::identity(3)
            } else {
                match composite(target, Block(12)) {
                    Some(m) => to_mat(&m),
                    None => continue,
                }
            };
            for t in 0..positions(&l, target) {
                let ti = slots(&l, target, t);
                for u in 0..l.sets[15].len() {
                    let (si, m12) = fifteen_map::<T>(&l, u, tuple.eps);
                    let phi = lift.mul(&m12);
                    for mu in &mu_list {
                        let g = transvection(n, &ti, &si, &phi, mu, true);
                        let tag = format!("g'({},15)", node_name(target));
                        // The corrected element of the paired family.
                        let k = l.sets[15][u];
                        if tuple.eps == 1 && k == c && (target == Block(12) || target == Block(8)) {
                            let partner = if target == Block(12) { bar(n, l.kappa[t]) } else { bar(n, l.eta[8][t]) };
                            let nu = mu.clone() * mu.clone() * T::half() * T::half();
                            let corr = transvection(n, &[ti[0]], &[partner], &one, &nu, false);
                            offer(&mut set, &mut report, format!("{tag} corrected"), corr.mul(&g));
                        }
                        offer(&mut set, &mut report, tag, g);
                    }
                }
            }
        }
    }

    // Root elements that happen to lie in R_V.
    for mu in &mu_list {
        for i in (0..big).filter(|&i| i != n) {
            for k in 0..big {
                if k == i || k == bar(n, i) {
                    continue;
                }
                let g = transvection(n, &[i], &[k], &one, mu, k == n);
                if set.admits(&g) && set.push_checked("root", g) {
                    report.root_elements += 1;
                }
            }
        }
    }
    for g in eichler_candidates::<T>(n) {
        if set.admits(&g) && set.push_checked("eichler", g) {
            report.root_elements += 1;
        }
    }
    Ok((set, report))
}

/// E(u, w): x ↦ x + (x,u)w − (x,w)u − ½(w,w)(x,u)u for isotropic u ⊥ w,
/// with u and w ranging over vectors with at most two entries ±1 (w also
/// scaled by a primitive root).
pub fn eichler_candidates<T: Scalar>(n: usize) -> Vec<Mat<T>> {
    let big = 2 * n + 1;
    let mut short: Vec<Vec<T>> = (0..big).map(|i| crate::linalg::unit(big, i)).collect();
    for i in 0..big {
        for j in i + 1..big {
            for c in [T::one(), -T::one()] {
                let mut v = crate::linalg::unit::<T>(big, i);
                v[j] = c;
                short.push(v);
            }
        }
    }
    let pair = crate::form::pair::<T>;
    let mut out = Vec::new();
    for u in short.iter().filter(|u| pair(u, u).is_zero()) {
        let ju: Vec<T> = (0..big).map(|i| u[bar(n, i)].clone()).collect();
        for w0 in &short {
            if !pair(u, w0).is_zero() || Subspace::span(big, &[u.clone(), w0.clone()]).dim() < 2 {
                continue;
            }
            for mu in mus::<T>() {
                let w: Vec<T> = w0.iter().map(|x| x.clone() * mu.clone()).collect();
                let jw: Vec<T> = (0..big).map(|i| w[bar(n, i)].clone()).collect();
                let hq = pair(&w, &w) * T::half();
                let mut g: Mat<T> = Mat::identity(big);
                for r in 0..big {
                    for c in 0..big {
                        let v = g.get(r, c).clone() + w[r].clone() * ju[c].clone()
                            - u[r].clone() * jw[c].clone()
                            - hq.clone() * u[r].clone() * ju[c].clone();
                        g.set(r, c, v);
                    }
                }
                out.push(g);
            }
        }
    }
    out
}

/// Generators of R_V; every element was checked to stabilize U₊, U₋, V.
pub fn rv_generators<T: Scalar>(shape: &PairShape, tuple: &InvariantTuple) -> Result<GeneratorSet<T>> {
    Ok(rv_generators_report(shape, tuple)?.0)
}

/// Orbit of a vector under the group generated by `gens`.
pub fn vector_orbit<T: Scalar>(start: &[T], gens: &[Mat<T>], budget: usize) -> Result<std::collections::HashSet<Vec<T>>> {
    let mut seen = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    seen.insert(start.to_vec());
    queue.push_back(start.to_vec());
    while let Some(v) = queue.pop_front() {
        for g in gens {
            let w = g.mul_vec(&v);
            if !seen.contains(&w) {
                if seen.len() >= budget {
                    return Err(crate::Error::Budget { what: "vector orbit".into(), needed: seen.len() as u128 + 1, budget: budget as u128 });
                }
                seen.insert(w.clone());
                queue.push_back(w);
            }
        }
    }
    Ok(seen)
}

/// Coordinates of U₊ for the model pair.
pub fn plus_indices(shape: &PairShape) -> Vec<usize> {
    let mut v: Vec<usize> = (0..shape.a0 + shape.ap).collect();
    v.extend(shape.d..shape.d + shape.a1);
    v
}

/// Whether the subspace is spanned by coordinate vectors of the listed indices.
pub fn is_coordinate<T: Scalar>(s: &Subspace<T>, idx: &[usize]) -> bool {
    s == &Subspace::coordinate(s.ambient(), idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::field::{Gf3, Gf5};
    use crate::invariants::enumerate_tuples;
    use crate::linalg::unit;
    use crate::stabilizer::{enumerate_stabilizer, group_closure};

    fn all_cases(max_n: usize) -> Vec<(PairShape, InvariantTuple)> {
        let mut out = Vec::new();
        for n in 1..=max_n {
            for a in 0..=n {
                for b in 0..=n {
                    for s in PairShape::all(n, a, b) {
                        for t in enumerate_tuples(&s) {
                            out.push((s, t));
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn paths_follow_the_listing_rank() {
        assert_eq!(path(Block(1), Block(7)).unwrap(), vec![Block(1), Block(2), Block(7)]);
        assert!(path(Block(12), Block(15)).is_none());
        assert!(path(Block(5), Block(8)).is_none());
        // 8 ← 12 ← 13 ← ¯12 reaches the bar blocks without passing 15.
        assert_eq!(path(Block(8), BarSix).unwrap()[..3], [Block(8), Block(10), Block(13)]);
    }

    #[test]
    fn every_family_element_stabilizes() {
        for (s, t) in all_cases(3) {
            let (_, rep) = rv_generators_report::<Gf3>(&s, &t).unwrap();
            assert!(rep.rejected.is_empty(), "{s:?} {t:?}: {:?}", rep.rejected);
        }
        for (s, t) in all_cases(2) {
            let (_, rep) = rv_generators_report::<Gf5>(&s, &t).unwrap();
            assert!(rep.rejected.is_empty(), "{s:?} {t:?}: {:?}", rep.rejected);
        }
    }

    #[test]
    fn only_fourteen_block_for_pure_b14() {
        let s = PairShape::new(2, 0, 0, 0, 0).unwrap();
        let mut b = [0; 15];
        b[13] = 2;
        let t = InvariantTuple { b, eps: 0 };
        let (set, _) = rv_generators_report::<Gf3>(&s, &t).unwrap();
        assert!(set.tags().iter().all(|x| matches!(x.as_str(), "h(14)" | "root" | "eichler" | "minus identity")));
        assert!(set.tags().iter().any(|x| x == "h(14)"));
    }

    #[test]
    fn odd_fifteen_block_generators_fix_the_line() {
        let s = PairShape::new(1, 0, 0, 0, 1).unwrap();
        let mut b = [0; 15];
        b[14] = 1;
        let t = InvariantTuple { b, eps: 1 };
        let set = rv_generators::<Gf3>(&s, &t).unwrap();
        let half = Gf3::half();
        let v = Subspace::span(3, &[vec![-half, Gf3::one(), Gf3::one()]]);
        for g in set.mats() {
            assert_eq!(v.image(g), v);
        }
    }

    #[test]
    fn eight_twelve_transvection_formula() {
        // b₈ = b₁₂ = 1 first fits at rank 5.
        let (s, t) = (0..=5)
            .flat_map(|a| (0..=5).map(move |b| (a, b)))
            .flat_map(|(a, b)| PairShape::all(5, a, b))
            .find_map(|s| enumerate_tuples(&s).into_iter().find(|t| t.get(8) == 1 && t.get(12) == 1).map(|t| (s, t)))
            .expect("a case with b8 = b12 = 1");
        let l = IndexLayout::new(&s, &t).unwrap();
        let n = s.n;
        let (i, k) = (l.sets[8][0], l.sets[12][0]);
        let phi = to_mat::<Gf3>(&composite(Block(8), Block(12)).unwrap());
        let mu = Gf3::from_i64(2);
        let g = transvection(n, &slots(&l, Block(8), 0), &slots(&l, Block(12), 0), &phi, &mu, false);
        let big = 2 * n + 1;
        let col = |c: usize| g.col(c);
        let mut want = unit::<Gf3>(big, k);
        want[i] = mu;
        assert_eq!(col(k), want);
        let e8 = bar(n, l.eta[8][0]);
        let mut want = unit::<Gf3>(big, e8);
        want[bar(n, l.kappa[0])] = -mu;
        assert_eq!(col(e8), want);
        let set = rv_generators::<Gf3>(&s, &t).unwrap();
        assert!(set.admits(&g));
    }

    #[test]
    fn bar_six_vectors_are_straightened() {
        // For k ∈ bar I₍₆₎ and u in the other U₊ coordinates, some g ∈ R_V
        // sends e_k + u to e_k.
        let mut checked = 0;
        for (s, t) in all_cases(3).into_iter().filter(|(_, t)| t.get(6) == 1) {
            let l = IndexLayout::new(&s, &t).unwrap();
            let n = s.n;
            let k = bar(n, l.sets[6][0]);
            let others: Vec<usize> = plus_indices(&s).into_iter().filter(|&i| i != k).collect();
            let set = rv_generators::<Gf3>(&s, &t).unwrap();
            let ek = unit::<Gf3>(2 * n + 1, k);
            let orbit = vector_orbit(&ek, set.mats(), 1_000_000).unwrap();
            let q = 3usize.pow(others.len() as u32);
            for code in 0..q {
                let mut v = ek.clone();
                let mut c = code;
                for &i in &others {
                    v[i] = Gf3::from_i64((c % 3) as i64);
                    c /= 3;
                }
                assert!(orbit.contains(&v), "{s:?} {t:?} {v:?}");
            }
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn generation_on_u_plus_at_small_rank() {
        // The families are built to act on U₊ like all of R_V; compare the
        // restrictions to U₊ with the directly enumerated stabilizer.
        let mut deficits = Vec::new();
        let mut skipped = 0;
        let max_n: usize = std::env::var("RV_MAX_N").ok().and_then(|x| x.parse().ok()).unwrap_or(2);
        for (s, t) in all_cases(max_n) {
            let set = rv_generators::<Gf3>(&s, &t).unwrap();
            let Ok(direct) = enumerate_stabilizer(s.n, set.fixed(), 3_000_000) else {
                skipped += 1;
                continue;
            };
            let basis: Vec<Vec<Gf3>> = plus_indices(&s).iter().map(|&i| unit(s.ambient(), i)).collect();
            let generated: std::collections::BTreeSet<Mat<Gf3>> =
                crate::stabilizer::restricted_stabilizer(&basis, set.mats(), 200_000).unwrap().elements.into_iter().collect();
            let on_plus: std::collections::BTreeSet<Mat<Gf3>> =
                direct.iter().map(|g| crate::stabilizer::restrict_to(g, &basis).unwrap()).collect();
            assert_eq!(generated, on_plus, "{s:?} {t:?}");
            if direct.len() <= 50_000 {
                let closed = group_closure(s.ambient(), set.mats(), 200_000).unwrap();
                assert_eq!(direct.len() % closed.len(), 0);
                if closed.len() != direct.len() {
                    deficits.push((s, t, closed.len(), direct.len()));
                }
            }
        }
        eprintln!("skipped {skipped}");
        assert!(deficits.is_empty(), "{deficits:?}");
    }
}
