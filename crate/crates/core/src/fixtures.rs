//! Reference block systems used by tests, examples and the CLI.

use crate::geometry::{Block, BlockSystem};

fn blk(b: [[f64; 2]; 3]) -> Block {
    Block::from_bounds(b).expect("fixture block")
}

/// The reference configuration: separated c-gaps, `a1 = a2 = 3.5`,
/// `b1 = b2 = 0`, rates `λ = (3, 0.45, 0.15)`, `μ = (6, 1/0.45, 0.2)`.
pub fn ref0() -> BlockSystem {
    BlockSystem {
        a: blk([[5.0 / 32.0, 13.0 / 32.0], [0.0, 1.0], [0.0, 1.0]]),
        d: blk([[14.0 / 32.0, 22.0 / 32.0], [0.0, 1.0], [0.0, 1.0]]),
        b: blk([[23.0 / 32.0, 27.0 / 32.0], [0.0, 0.45], [0.0, 1.0]]),
        c: blk([[23.0 / 32.0, 27.0 / 32.0], [0.55, 1.0], [0.0, 1.0]]),
        a_star: blk([[0.125, 0.875], [0.0, 0.45], [0.1, 0.25]]),
        d_star: blk([[0.125, 0.875], [0.55, 1.0], [0.1, 0.25]]),
        b_star: blk([[0.125, 0.875], [0.0, 1.0], [0.4, 0.6]]),
        c_star: blk([[0.125, 0.875], [0.0, 1.0], [0.7, 0.9]]),
    }
}

/// Reference configuration with the A*/D* c-intervals pulled inward so that
/// `b1 = b2 = 1`, `a1 = a2 = 7`, `a_eff = 3.5`.
pub fn ref0_b1_one() -> BlockSystem {
    let mut s = ref0();
    s.a_star.c = crate::Interval { lo: 0.05, hi: 0.5 };
    s.d_star.c = crate::Interval { lo: 0.55, hi: 1.0 };
    s.b.c = crate::Interval { lo: 0.05, hi: 0.5 };
    s.c.c = crate::Interval { lo: 0.55, hi: 1.0 };
    s
}

/// Literal block list of the numerical figure (approximate blocks on thirds).
pub fn figure4() -> BlockSystem {
    let t = 1.0 / 3.0;
    BlockSystem {
        a: blk([[0.0, t], [0.0, 1.0], [0.0, 1.0]]),
        b: blk([[2.0 * t, 1.0], [0.0, 0.5], [0.0, 1.0]]),
        c: blk([[2.0 * t, 1.0], [0.5, 1.0], [0.0, 1.0]]),
        d: blk([[t, 2.0 * t], [0.0, 1.0], [0.0, 1.0]]),
        a_star: blk([[0.0, 1.0], [0.0, 0.5], [0.0, 2.0 * t]]),
        b_star: blk([[0.0, 1.0], [0.0, 1.0], [2.0 * t, 5.0 / 6.0]]),
        c_star: blk([[0.0, 1.0], [0.0, 1.0], [5.0 / 6.0, 1.0]]),
        d_star: blk([[0.0, 1.0], [0.5, 1.0], [0.0, 2.0 * t]]),
    }
}

pub type Signs = [[i8; 3]; 4];

pub const ALL_PLUS: Signs = [[1, 1, 1]; 4];

/// Flip of the s-coordinate on A only.
pub const FLIP_A_S: Signs = [[1, 1, -1], [1, 1, 1], [1, 1, 1], [1, 1, 1]];

/// Orientation-preserving assignment under which the figure's blocks carry a
/// non-trivial section of the invariant set on `{x_u = 1}`.
pub const FIGURE4_LINKED: Signs = [[-1, -1, 1], [1, -1, -1], [1, -1, -1], [-1, -1, 1]];
