use horseshoe_lab::fixtures;
use horseshoe_lab::geometry::{
    dimension_reducible, epsilon_margin, penetrates, rates, shape_constants, validate_system, Block, Interval,
};
use proptest::prelude::*;

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..0.9, 0.02f64..0.5).prop_map(|(lo, len)| (lo, (lo + len).min(1.0)))
}

fn block() -> impl Strategy<Value = Block> {
    (interval(), interval(), interval()).prop_map(|(u, c, s)| Block::from_bounds([[u.0, u.1], [c.0, c.1], [s.0, s.1]]).unwrap())
}

/// Pairs where `x` strictly spans `y` on one axis and is strictly inside on the others.
fn penetrating_pair() -> impl Strategy<Value = (Block, Block, usize)> {
    (0usize..3, prop::array::uniform3((0.05f64..0.45, 0.55f64..0.95)), prop::array::uniform3((0.01f64..0.04, 0.01f64..0.04)))
        .prop_map(|(axis, y, shrink)| {
            let mut yb = [[0.0; 2]; 3];
            let mut xb = [[0.0; 2]; 3];
            for j in 0..3 {
                yb[j] = [y[j].0, y[j].1];
                xb[j] = if j == axis {
                    [y[j].0 - shrink[j].0, y[j].1 + shrink[j].1]
                } else {
                    [y[j].0 + shrink[j].0, y[j].1 - shrink[j].1]
                };
            }
            (Block::from_bounds(xb).unwrap(), Block::from_bounds(yb).unwrap(), axis)
        })
}

proptest! {
    #[test]
    fn penetration_splits_into_two_pieces((x, y, axis) in penetrating_pair(), t in prop::array::uniform3(0.0f64..1.0)) {
        prop_assert!(penetrates(&x, &y));
        prop_assert!(x.intersects(&y));
        // X \ Y is the two slabs of X below and above Y along the spanning axis
        let (xa, ya) = (x.axis(axis), y.axis(axis));
        let below = Interval::new(xa.lo, ya.lo).unwrap();
        let above = Interval::new(ya.hi, xa.hi).unwrap();
        prop_assert!(below.length() > 0.0 && above.length() > 0.0);
        let mut p = [0.0; 3];
        for j in 0..3 {
            let iv = x.axis(j);
            p[j] = iv.lo + t[j] * iv.length();
        }
        if !y.contains(p) {
            prop_assert!(below.contains(p[axis]) || above.contains(p[axis]));
            prop_assert!(!(below.contains(p[axis]) && above.contains(p[axis])));
        }
    }

    #[test]
    fn penetration_is_not_symmetric(x in block(), y in block()) {
        prop_assert!(!(penetrates(&x, &y) && penetrates(&y, &x)));
        if penetrates(&x, &y) {
            prop_assert!(x.intersects(&y));
        }
    }

    #[test]
    fn shape_constants_ignore_c_reparametrization(alpha in 0.05f64..20.0, beta in -5.0f64..5.0) {
        let sys = fixtures::ref0();
        let k0 = shape_constants(&sys).unwrap();
        let k1 = shape_constants(&sys.map_axis(1, alpha, beta)).unwrap();
        for (a, b) in [(k0.a1, k1.a1), (k0.a2, k1.a2), (k0.b1, k1.b1), (k0.b2, k1.b2)] {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn nonnegative_b_iff_containment(lo1 in 0.0f64..0.2, hi1 in 0.8f64..1.0, lo2 in 0.0f64..0.2, hi2 in 0.8f64..1.0) {
        // squeeze the c-data into [0.1, 0.9], then move A_c and B*_c around it
        let mut sys = fixtures::ref0().map_axis(1, 0.8, 0.1);
        sys.a.c = Interval::new(lo1, hi1).unwrap();
        sys.d.c = sys.a.c;
        sys.b_star.c = Interval::new(lo2, hi2).unwrap();
        sys.c_star.c = sys.b_star.c;
        if !validate_system(&sys).valid_up_to_contact {
            return Ok(());
        }
        let k = shape_constants(&sys).unwrap();
        prop_assert_eq!(k.b1 >= 0.0, sys.e_star().c.within(&sys.a.c));
        prop_assert_eq!(k.b2 >= 0.0, sys.f_block().c.within(&sys.b_star.c));
    }
}

#[test]
fn margin_implies_reducible() {
    let sys = fixtures::ref0();
    let r = rates(&sys);
    let k = shape_constants(&sys).unwrap();
    assert!(epsilon_margin(&r, &k).is_some());
    assert!(dimension_reducible(&r));
}
