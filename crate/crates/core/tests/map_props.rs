use horseshoe_lab::fixtures::{self, Signs};
use horseshoe_lab::map::{build_map, CoupledMap, Perturbation, Point};
use proptest::prelude::*;

fn sign() -> impl Strategy<Value = i8> {
    prop_oneof![Just(1i8), Just(-1i8)]
}

fn signs() -> impl Strategy<Value = Signs> {
    prop::array::uniform4(prop::array::uniform3(sign()))
}

/// Point in domain block `k` at relative position `t`.
fn in_domain(m: &CoupledMap, k: usize, t: [f64; 3]) -> Point {
    let b = m.branches[k].domain;
    [0, 1, 2].map(|j| {
        let iv = b.axis(j);
        iv.lo + t[j] * iv.length()
    })
}

fn dist(a: Point, b: Point) -> f64 {
    (0..3).map(|j| (a[j] - b[j]).abs()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn affine_determinant_matches_signs(s in signs()) {
        let m = build_map(&fixtures::ref0(), &s, None).unwrap();
        for (k, b) in m.branches.iter().enumerate() {
            let r = b.rates();
            let expect: f64 = (0..3).map(|j| f64::from(s[k][j]) * r[j]).product();
            prop_assert!((b.determinant() - expect).abs() <= 1e-12 * expect.abs());
            let jac = m.jacobian(in_domain(&m, k, [0.5; 3])).unwrap();
            prop_assert!((jac.determinant() - expect).abs() <= 1e-12 * expect.abs());
            let sign: i8 = s[k].iter().product();
            prop_assert_eq!(m.determinant_signs()[k], sign);
        }
    }

    #[test]
    fn round_trip(s in signs(), k in 0usize..4, t in prop::array::uniform3(0.0f64..=1.0), amp in prop_oneof![Just(0.0), 1e-5f64..1e-3], seed in 0u64..50) {
        let sys = fixtures::ref0();
        let pert = (amp > 0.0).then(|| Perturbation::generated(&sys, amp, seed));
        let m = build_map(&sys, &s, pert).unwrap();
        let p = in_domain(&m, k, t);
        let q = m.apply(p).unwrap();
        let back = m.apply_inverse(q).unwrap().unwrap();
        prop_assert!(dist(p, back) <= 1e-12, "{p:?} -> {q:?} -> {back:?}");
    }

    #[test]
    fn corners_go_to_corners(s in signs(), k in 0usize..4) {
        let m = build_map(&fixtures::ref0(), &s, None).unwrap();
        let img = m.branches[k].image.corners();
        for c in m.branches[k].domain.corners() {
            let q = m.branch_apply(k, c);
            prop_assert!(img.iter().any(|&x| dist(x, q) <= 1e-15), "{c:?} -> {q:?}");
        }
    }

    #[test]
    fn itinerary_shifts(k in 0usize..4, t in prop::array::uniform3(0.0f64..1.0), shift in 1usize..4) {
        let m = build_map(&fixtures::ref0(), &fixtures::ALL_PLUS, None).unwrap();
        let p = in_domain(&m, k, t);
        let n = 8;
        let long = m.itinerary(p, 0, n + shift);
        let mut q = p;
        for _ in 0..shift {
            match m.apply(q) {
                Some(x) => q = x,
                None => return Ok(()),
            }
        }
        let short = m.itinerary(q, 0, n);
        let tail: String = long.forward.chars().skip(shift).collect();
        let common = tail.len().min(short.forward.len());
        prop_assert_eq!(&tail[..common], &short.forward[..common]);
        // backward word of f^k(p) starts with the reversed prefix of p's forward word
        let back = m.itinerary(q, shift, 0);
        let prefix: String = long.forward.chars().take(shift).collect::<Vec<_>>().into_iter().rev().collect();
        prop_assert_eq!(back.backward, prefix);
    }
}
