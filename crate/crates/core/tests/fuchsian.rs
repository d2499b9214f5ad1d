use hypcount::fuchsian::{
    bridge_norm_bound, canonical_rep, count_n, coset_table, detect_zero_diagonal, enumerate_ball,
    same_double_coset, CountOptions, EnumerationOptions, Gamma1, GroupPresentation, BOLZA_JSON,
};
use hypcount::numerics::{Mat2, PrecisionContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

/// Twist search: g1 ~ g2 iff m^(k+l) a1 = a2, m^(k-l) b1 = b2, ... for some |k|,|l| <= kmax.
fn twist_equivalent(g1: &[f64; 4], g2: &[f64; 4], m: f64, kmax: i32) -> bool {
    for k in -kmax..=kmax {
        for l in -kmax..=kmax {
            let u = m.powi(k + l);
            let v = m.powi(k - l);
            let t = [g1[0] * u, g1[1] * v, g1[2] / v, g1[3] / u];
            for sign in [1.0, -1.0] {
                if t.iter().zip(g2).all(|(x, y)| (sign * x - y).abs() <= 1e-9 * y.abs().max(1.0)) {
                    return true;
                }
            }
        }
    }
    false
}

/// Pairwise reduction oracle: union of ball elements with |B| <= x under twist equivalence.
fn brute_count(group: &GroupPresentation, x: f64, margin: f64) -> usize {
    let bound = bridge_norm_bound(x, group.len_l().to_f64(), margin);
    let ball = enumerate_ball(group, bound, &EnumerationOptions::default()).unwrap();
    let m = group.m().to_f64();
    let mats: Vec<[f64; 4]> = ball
        .elements
        .iter()
        .filter(|e| e.mat.b_invariant().to_f64().abs() <= x + 1e-12)
        .map(|e| e.mat.to_f64())
        .collect();
    let mut classes: Vec<[f64; 4]> = Vec::new();
    for g in &mats {
        if !classes.iter().any(|h| twist_equivalent(h, g, m, 12)) {
            classes.push(*g);
        }
    }
    classes.len()
}

fn random_element(group: &GroupPresentation, rng: &mut ChaCha8Rng, max_len: usize) -> Mat2 {
    let c = *group.ctx();
    let n = group.generators().len();
    let len = rng.gen_range(1..=max_len);
    let mut g = Mat2::identity(&c);
    for _ in 0..len {
        g = g.mul(&group.generators()[rng.gen_range(0..n)], &c).unwrap();
    }
    g
}

#[test]
fn count_matches_pairwise_oracle() {
    let c = ctx();
    let g = GroupPresentation::bolza(&c).unwrap();
    for x in [10.0, 25.0, 50.0] {
        let n = count_n(&g, x, &CountOptions::default()).unwrap();
        let oracle = brute_count(&g, x, 4.0);
        assert_eq!(n.count, oracle, "X = {x}");
        assert_eq!(n.certified_count, Some(n.count));
    }
}

#[test]
fn bolza_count_fixtures() {
    let c = ctx();
    let g = GroupPresentation::bolza(&c).unwrap();
    let table = coset_table(&g, 200.0, &CountOptions::default()).unwrap();
    let tol = c.tol_eq();
    let got: Vec<usize> = [1.0, 10.0, 25.0, 50.0, 100.0, 200.0]
        .iter()
        .map(|&x| table.count(x, tol))
        .collect();
    assert_eq!(got, vec![1, 5, 17, 25, 37, 77]);
}

#[test]
fn count_is_independent_of_conjugate_gamma1() {
    let c = ctx();
    let g1 = GroupPresentation::bolza(&c).unwrap();
    let text = BOLZA_JSON.replace("\"generator\": 1", "\"generator\": 0");
    let g0 = GroupPresentation::from_json_str(&c, &text, "variant").unwrap();
    assert!(g0.conjugator().approx_eq(&Mat2::identity(&c), c.tol_eq()));
    assert!((g0.m().to_f64() - g1.m().to_f64()).abs() < 1e-14);
    for x in [10.0, 40.0] {
        let a = count_n(&g0, x, &CountOptions::default()).unwrap().count;
        let b = count_n(&g1, x, &CountOptions::default()).unwrap().count;
        assert_eq!(a, b);
    }
}

#[test]
fn count_monotone_in_x_and_margin() {
    let c = ctx();
    let g = GroupPresentation::bolza(&c).unwrap();
    let table = coset_table(&g, 60.0, &CountOptions::default()).unwrap();
    let mut last = 0;
    for i in 0..=59 {
        let n = table.count(1.0 + i as f64, c.tol_eq());
        assert!(n >= last);
        last = n;
    }
    assert!(table.count(1.0, c.tol_eq()) >= 1);
    let mut prev = 0;
    for margin in [0.0, 1.0, 2.0, 3.0] {
        let opts = CountOptions {
            margin,
            certify: false,
            ..CountOptions::default()
        };
        let n = count_n(&g, 30.0, &opts).unwrap().count;
        assert!(n >= prev);
        prev = n;
    }
}

#[test]
fn ball_stabilizes_under_deeper_search() {
    let c = ctx();
    let g = GroupPresentation::bolza(&c).unwrap();
    let bound = 2.0 * 3f64.cosh();
    let base = enumerate_ball(&g, bound, &EnumerationOptions::default()).unwrap();
    let depth = base.layer_counts.len() - 1;
    let deeper = EnumerationOptions {
        max_word_len: depth + 4,
        safety_factor: 16.0,
    };
    let oracle = enumerate_ball(&g, bound, &deeper).unwrap();
    assert_eq!(base.elements.len(), oracle.elements.len());
}

#[test]
fn ball_elements_are_distinct_and_match_words() {
    let c = ctx();
    let g = GroupPresentation::bolza(&c).unwrap();
    let ball = enumerate_ball(&g, 200.0, &EnumerationOptions::default()).unwrap();
    for (i, e) in ball.elements.iter().enumerate() {
        let w = g.evaluate_word(&e.word).unwrap();
        assert!(w.approx_eq(&e.mat, c.tol_eq() * (e.word.len().max(1) as f64) * 8.0));
        for f in &ball.elements[..i] {
            assert!(!f.mat.approx_eq(&e.mat, c.tol_eq()));
        }
    }
}

#[test]
fn truncated_search_reports_non_stabilized() {
    let c = ctx();
    let g = GroupPresentation::bolza(&c).unwrap();
    let opts = EnumerationOptions {
        max_word_len: 2,
        safety_factor: 4.0,
    };
    let err = enumerate_ball(&g, 1e4, &opts).unwrap_err();
    assert_eq!(err.code(), "NON_STABILIZED");
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn canonical_rep_invariant_under_twists() {
    let c = ctx();
    let g = GroupPresentation::bolza(&c).unwrap();
    let m = g.m().clone();
    let gamma = g.gamma1();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let h = random_element(&g, &mut rng, 6);
        let r = canonical_rep(&h, &m, &c).unwrap();
        let rr = canonical_rep(&r, &m, &c).unwrap();
        assert_eq!(r.grid_key(&c), rr.grid_key(&c));
        for (k, l) in [(2i64, 5i64), (-3, 1), (0, -4)] {
            let t = gamma.pow(k, &c).unwrap().mul(&h, &c).unwrap().mul(&gamma.pow(l, &c).unwrap(), &c).unwrap();
            let rt = canonical_rep(&t, &m, &c).unwrap();
            assert!(rt.approx_eq(&r, c.tol_eq()), "k={k} l={l}");
            assert!(same_double_coset(&h, &t, &m, &c).unwrap());
        }
    }
}

#[test]
fn same_double_coset_examples() {
    let c = ctx();
    let g = GroupPresentation::bolza(&c).unwrap();
    let m = g.m().clone();
    let gamma = g.gamma1();
    let h = g.generators()[2].clone();
    let conj = gamma.mul(&h, &c).unwrap().mul(&gamma.inverse(&c), &c).unwrap();
    assert!(same_double_coset(&h, &conj, &m, &c).unwrap());
    assert!(same_double_coset(&Mat2::identity(&c), &gamma, &m, &c).unwrap());

    // B is invariant but not complete: find two cosets sharing a B value.
    let table = coset_table(&g, 50.0, &CountOptions::default()).unwrap();
    let mut found = false;
    'outer: for (i, x) in table.cosets.iter().enumerate() {
        for y in &table.cosets[i + 1..] {
            let bx = x.b_value.to_f64();
            if (bx - y.b_value.to_f64()).abs() < 1e-12 * bx.abs() {
                assert!(!same_double_coset(&x.rep, &y.rep, &m, &c).unwrap());
                found = true;
                break 'outer;
            }
        }
    }
    assert!(found);
}

#[test]
fn b_invariant_constant_on_double_cosets() {
    // Twists up to m^40 exceed the 128-bit overflow limit, so work at 256 bits.
    let wide = PrecisionContext::new(256).unwrap();
    let g = GroupPresentation::bolza(&wide).unwrap();
    let gamma = g.gamma1();
    let tol = ctx().tol_eq();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let h = random_element(&g, &mut rng, 5);
        let k = rng.gen_range(-20..=20);
        let l = rng.gen_range(-20..=20);
        let t = gamma.pow(k, &wide).unwrap().mul(&h, &wide).unwrap().mul(&gamma.pow(l, &wide).unwrap(), &wide).unwrap();
        let b0 = h.b_invariant().to_f64();
        let b1 = t.b_invariant().to_f64();
        assert!((b0 - b1).abs() <= 10.0 * tol * b0.abs().max(1.0), "{b0} {b1}");
    }
}

#[test]
fn zero_diagonal_detection() {
    let c = ctx();
    let bolza = GroupPresentation::bolza(&c).unwrap();
    let rep = detect_zero_diagonal(&bolza, 2.0 * 8f64.cosh(), &EnumerationOptions::default()).unwrap();
    assert!(!rep.found);
    assert!(rep.bounded_search);

    let cyc = GroupPresentation::cyclic(&c, &c.float(2), 1.0).unwrap();
    assert!(!detect_zero_diagonal(&cyc, 100.0, &EnumerationOptions::default()).unwrap().found);

    let s = Mat2::from_f64(&c, 0.0, 1.0, -1.0, 0.0).unwrap();
    let h = Mat2::diag(&c, &c.float(2)).unwrap();
    let grp = GroupPresentation::new(
        &c,
        "with-involution",
        vec![("h".into(), h), ("s".into(), s)],
        Gamma1::Generator(0),
        1.0,
    )
    .unwrap();
    let opts = EnumerationOptions {
        max_word_len: 4,
        safety_factor: 1.0,
    };
    assert!(detect_zero_diagonal(&grp, 10.0, &opts).unwrap().found);
}

#[test]
fn missing_group_file_is_reported() {
    let c = ctx();
    let err = GroupPresentation::load(&c, std::path::Path::new("/nonexistent/group.json")).unwrap_err();
    assert_eq!(err.code(), "FILE_NOT_FOUND");
    assert_eq!(err.exit_code(), 2);
}
