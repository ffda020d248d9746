//! Acceptance criteria 1-9. Every comparison is exact (tolerance 0): orbit
//! counts, tuples and matrices are compared as integers or field elements.
//! One line per criterion is printed; the test fails if any criterion does.

use std::time::Instant;

use isoflag::oracle::Budget;
use isoflag::suites;
use isoflag::witness::{stabilizer_rigidity, verify_separation, FamilyName};
use isoflag::{Gf3, Gf5, Gf7, Result};

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Line {
    let t = Instant::now();
    let (pass, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let line = Line { id, name, pass, detail: format!("{detail} [{:.1}s]", t.elapsed().as_secs_f64()) };
    println!("criterion {}: {} {}: {}", line.id, if line.pass { "PASS" } else { "FAIL" }, line.name, line.detail);
    line
}

fn pair_orbits() -> Result<(bool, String)> {
    let b = Budget::default();
    let mut pass = true;
    let mut shapes = 0;
    let mut bad = Vec::new();
    for n in 1..=3 {
        for r in [suites::pair_orbits::<Gf3>(n, &b)?, suites::pair_orbits::<Gf5>(n, &b)?] {
            shapes += r.shapes.len();
            pass &= r.pass;
            bad.extend(r.shapes.iter().filter(|s| !s.matches).map(|s| format!("{} p={}", s.config, s.p)));
        }
    }
    Ok((pass, format!("{shapes} shape/field cases, orbit count = tuple count and canonical form = representative; mismatches {bad:?}")))
}

fn round_trip() -> Result<(bool, String)> {
    let mut tuples = 0;
    let mut failures = 0;
    for n in 1..=3 {
        let r = suites::round_trip::<Gf3>(n)?;
        tuples += r.tuples;
        failures += r.failures.len();
    }
    Ok((failures == 0, format!("{tuples} tuples, {failures} failures")))
}

fn sweep() -> Result<(bool, String)> {
    let b = Budget::default();
    let mut checked = 0;
    let mut failures = Vec::new();
    for n in 1..=2 {
        let r = suites::canonicalize_sweep::<Gf3>(n, &b)?;
        checked += r.checked;
        failures.extend(r.failures.into_iter().take(3));
    }
    Ok((failures.is_empty(), format!("{checked} (pair, V) configurations over GF(3); failures {failures:?}")))
}

fn catalogue() -> Result<(bool, String)> {
    let r = suites::catalogue(8);
    Ok((r.pass, format!("n ≤ 8: {} triples, missing {:?}, extras {:?}, dims equal {}", r.computed.len(), r.missing, r.extras, r.dims_equal)))
}

fn double_cosets() -> Result<(bool, String)> {
    let b = Budget::default();
    let h = suites::double_cosets::<Gf3>(3, &b)?.hashimoto;
    let par = suites::double_cosets::<Gf3>(4, &b)?.parabolic;
    let par_ok = par.iter().all(|x| x.matches);
    Ok((
        h.matches && h.count == 9 && par_ok,
        format!("GL₃ instance {} = {}; {} parabolic checks at n ≤ 4 all match: {par_ok}", h.count, h.formula, par.len()),
    ))
}

fn rank_one() -> Result<(bool, String)> {
    let r = suites::rank_one::<Gf3>(&Budget::default())?;
    let summary: Vec<String> = r
        .cases
        .iter()
        .map(|c| format!("{}(b₃={}) n_H={}{}", c.case, c.b3, c.n_h, c.n_h_tilde.map(|t| format!(" H̃={t}")).unwrap_or_default()))
        .collect();
    Ok((r.pass, summary.join(", ")))
}

fn separation() -> Result<(bool, String)> {
    let b = Budget::default();
    let mut pass = true;
    let mut notes = Vec::new();
    for name in [FamilyName::O6U3, FamilyName::O6U4, FamilyName::SquareClass] {
        let reports = [verify_separation::<Gf3>(name, &b)?, verify_separation::<Gf5>(name, &b)?, verify_separation::<Gf7>(name, &b)?];
        for r in reports {
            let ok = r.equivalence && r.predicate_match;
            pass &= ok;
            if !ok {
                notes.push(format!(
                    "{} p={}: classes {:?}, implication holds {}, unpredicted splits {:?}",
                    name, r.p, r.classes, r.implication_holds, r.exceptions
                ));
            }
        }
    }
    for name in [FamilyName::O3W, FamilyName::O5Fix, FamilyName::O7Fix] {
        let r = stabilizer_rigidity::<Gf3>(name, &b)?;
        pass &= r.plus_minus_identity;
        notes.push(format!("{name} stabilizer order {}", r.stabilizer_order));
    }
    Ok((pass, notes.join("; ")))
}

fn dichotomy() -> Result<(bool, String)> {
    let r = suites::dichotomy(&Budget::default())?;
    Ok((r.pass, format!("(2)(2)(11) counts {:?}; (2)(2)(2) counts {:?}", r.finite_counts, r.infinite_counts)))
}

fn grassmann() -> Result<(bool, String)> {
    let r = suites::grassmann::<Gf3>(5, &Budget::default())?;
    let missing: Vec<String> = r
        .reports
        .iter()
        .filter(|x| x.report.h1_orbits_with_normal_form != x.report.orbit_count)
        .map(|x| format!("H₁={} m={} n₂={} s={}", x.h1, x.report.m, x.report.n2, x.report.s))
        .collect();
    let gl_missing = r.reports.iter().any(|x| x.h1 == "GL" && x.report.h1_orbits_with_normal_form != x.report.orbit_count);
    Ok((
        r.pass,
        format!(
            "{} Grassmann cases; G₁×B₂ normal forms {}; counts match {}; projection {} ({} cases); H₁×B₂ orbits without a normal form in {} cases (H₁ = GL among them: {}), first {:?}",
            r.reports.len(),
            r.g1b2_normal_forms,
            r.counts_match,
            r.projection_holds,
            r.projections.len(),
            missing.len(),
            gl_missing,
            missing.first()
        ),
    ))
}

#[test]
fn acceptance() {
    let lines = vec![
        run(1, "pair orbits vs tuples, n ≤ 3, p ∈ {3,5}", pair_orbits),
        run(2, "representative round trip, n ≤ 3", round_trip),
        run(3, "canonicalize soundness sweep, GF(3), n ≤ 2", sweep),
        run(4, "dim 𝒯 = dim G catalogue", catalogue),
        run(5, "double coset counts", double_cosets),
        run(6, "rank-one reduction counts, GF(3)", rank_one),
        run(7, "separation laws and stabilizer rigidity", separation),
        run(8, "finite/infinite dichotomy", dichotomy),
        run(9, "Grassmann normal forms and projection", grassmann),
    ];
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("acceptance: {}/{} criteria pass", lines.len() - failed.len(), lines.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
