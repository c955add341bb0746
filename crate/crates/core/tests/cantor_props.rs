use horseshoe_lab::cantor::{
    gap_lemma, intersect, refine, refine_domain, selfsimilar_thickness, thickness, thickness_ifs, Affine1, GapVerdict,
    IfsPair,
};
use horseshoe_lab::Interval;
use proptest::prelude::*;

/// Equal-scale pair on `[lo, lo+len]` with images at relative offsets
/// `left` and `1 − right − λ`, each with its own orientation. λ stays above
/// 0.2 so depth-12 intervals remain far from rounding noise.
fn equal_scale_ifs() -> impl Strategy<Value = IfsPair> {
    (
        -1.0f64..1.0,
        0.1f64..3.0,
        0.2f64..0.45,
        0.0f64..1.0,
        0.0f64..1.0,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(at, len, lam, a, b, f0, f1)| {
            // offset proportional to the length keeps endpoints well conditioned
            let lo = at * len;
            let dom = Interval::new(lo, lo + len).unwrap();
            // split the free room 1 − 2λ between the margins and the gap
            let room = 1.0 - 2.0 * lam;
            let (ml, mr) = (0.3 * room * a, 0.3 * room * b);
            let l = Interval::new(lo + ml * len, lo + (ml + lam) * len).unwrap();
            let r = Interval::new(lo + (1.0 - mr - lam) * len, lo + (1.0 - mr) * len).unwrap();
            let s = |f: bool| if f { -1 } else { 1 };
            IfsPair::new(Affine1::onto(dom, l, s(f0)), Affine1::onto(dom, r, s(f1)), dom)
        })
}

/// Gap created at every node of the word tree, paired with its depth.
fn tree_gaps(ifs: &IfsPair, depth: usize) -> Vec<(usize, f64, (f64, f64))> {
    fn walk(ifs: &IfsPair, g: Affine1, level: usize, depth: usize, out: &mut Vec<(usize, f64, (f64, f64))>) {
        if level == depth {
            return;
        }
        let compose = |h: Affine1| Affine1 { scale: g.scale * h.scale, offset: g.scale * h.offset + g.offset };
        let (c0, c1) = (compose(ifs.g0), compose(ifs.g1));
        let rest = depth - level - 1;
        let sub = refine_domain(ifs, rest).unwrap().hull().unwrap();
        let (h0, h1) = (c0.apply_pair(sub), c1.apply_pair(sub));
        let (left, right) = if h0.0 <= h1.0 { (h0, h1) } else { (h1, h0) };
        out.push((level + 1, right.0 - left.1, (left.1, right.0)));
        walk(ifs, c0, level + 1, depth, out);
        walk(ifs, c1, level + 1, depth, out);
    }
    let mut out = Vec::new();
    walk(ifs, Affine1 { scale: 1.0, offset: 0.0 }, 0, depth, &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn thickness_is_affine_invariant(ifs in equal_scale_ifs(), alpha in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0], shift in -2.0f64..2.0) {
        // 1e-12 is only meaningful while the smallest gap is well above one
        // ulp of the coordinates: shallow depth, translation on the scale of α
        let beta = alpha.abs() * shift;
        let s = refine(&ifs, 4).unwrap();
        let t0 = thickness(&s).unwrap().tau;
        let t1 = thickness(&s.map_affine(alpha, beta)).unwrap().tau;
        prop_assert!((t0 - t1).abs() <= 1e-12 * t0.max(1.0), "{t0} vs {t1}");
    }

    #[test]
    fn equal_scale_thickness_is_stable(ifs in equal_scale_ifs()) {
        let rep = thickness_ifs(&ifs, 8).unwrap();
        prop_assert!(rep.stabilized);
        let closed = ifs.scales()[0] / (1.0 - 2.0 * ifs.scales()[0]);
        for &(d, t) in &rep.per_depth[1..] {
            prop_assert!((t - closed).abs() <= 1e-9 * closed, "depth {d}: {t} vs {closed}");
        }
        if let Ok(ss) = selfsimilar_thickness(&ifs) {
            prop_assert!((ss - closed).abs() <= 1e-12 * closed);
        }
    }

    #[test]
    fn gaps_shrink_down_the_tree(ifs in equal_scale_ifs()) {
        let lam = ifs.scales()[0];
        prop_assume!(lam * (1.0 + ifs.trim_ratio()) < 1.0);
        let depth = 10;
        let gaps = tree_gaps(&ifs, depth);
        // the tree accounts for exactly the gaps of the interval list
        let listed = refine_domain(&ifs, depth).unwrap().gaps();
        prop_assert_eq!(listed.len(), gaps.len());
        let mut a: Vec<f64> = listed.iter().map(|g| g.1 - g.0).collect();
        let mut b: Vec<f64> = gaps.iter().map(|g| g.1).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * ifs.domain.length());
        }
        // every gap beats every deeper gap inside its cylinder
        let min_at: Vec<f64> = (1..=depth)
            .map(|d| gaps.iter().filter(|g| g.0 == d).map(|g| g.1).fold(f64::INFINITY, f64::min))
            .collect();
        let max_at: Vec<f64> = (1..=depth)
            .map(|d| gaps.iter().filter(|g| g.0 == d).map(|g| g.1).fold(0.0, f64::max))
            .collect();
        for d in 0..depth - 1 {
            prop_assert!(min_at[d] > max_at[d + 1..].iter().cloned().fold(0.0, f64::max), "depth {}", d + 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn gap_lemma_forces_intersection(a in equal_scale_ifs(), b in equal_scale_ifs()) {
        let s1 = refine(&a, 12).unwrap();
        let s2 = refine(&b, 12).unwrap();
        let rep = gap_lemma(&s1, &s2).unwrap();
        prop_assume!(rep.verdict == GapVerdict::Applies);
        for d in 0..=12 {
            let x = intersect(&refine(&a, d).unwrap(), &refine(&b, d).unwrap());
            prop_assert!(!x.is_empty(), "empty at depth {d}");
        }
    }
}

#[test]
fn middle_alpha_family() {
    let unit = Interval::new(0.0, 1.0).unwrap();
    for alpha in [0.1, 1.0 / 3.0, 0.5] {
        let ifs = IfsPair::symmetric((1.0 - alpha) / 2.0, unit);
        let tau = thickness(&refine(&ifs, 12).unwrap()).unwrap().tau;
        let expect = (1.0 - alpha) / (2.0 * alpha);
        assert!((tau - expect).abs() <= 1e-9, "alpha {alpha}: {tau} vs {expect}");
    }
}
