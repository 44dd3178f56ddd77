//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use limla::mapping::{DirectedState, SegmentMap, LOOP};
use limla::model::Move;
use rand_core::RngCore;
use rand_xoshiro::SplitMix64;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Follows the head between the blocks of `f` (left) and `g` (right),
/// starting inside `side` with `s`, without memoization. The walk has at
/// most `4|Q|` distinct configurations, so more steps than that is a loop.
fn walk(
    f: &SegmentMap,
    g: &SegmentMap,
    mut side: Side,
    mut s: DirectedState,
) -> Option<DirectedState> {
    let limit = 4 * f.q_count() + 2;
    for _ in 0..limit {
        let r = match side {
            Side::Left => f.apply(s)?,
            Side::Right => g.apply(s)?,
        };
        match (side, r.dir) {
            (Side::Left, Move::Left) | (Side::Right, Move::Right) => return Some(r),
            (Side::Left, Move::Right) => side = Side::Right,
            (Side::Right, Move::Left) => side = Side::Left,
        }
        s = r;
    }
    None
}

/// Oracle for the composed map: `->q` enters `f` from the left, `<-q`
/// enters `g` from the right.
pub fn oracle_compose(f: &SegmentMap, g: &SegmentMap) -> SegmentMap {
    SegmentMap::from_fn(f.q_count(), |s| {
        let side = if s.dir == Move::Right {
            Side::Left
        } else {
            Side::Right
        };
        walk(f, g, side, s)
    })
}

/// Oracle for the departure table: `->p` crosses the inner boundary into
/// `g`, `<-p` crosses it into `f`.
pub fn oracle_departure(f: &SegmentMap, g: &SegmentMap, s: DirectedState) -> Option<DirectedState> {
    let side = if s.dir == Move::Right {
        Side::Right
    } else {
        Side::Left
    };
    walk(f, g, side, s)
}

/// Random map on `q` states; about one entry in eight is `LOOP`.
pub fn random_map(rng: &mut SplitMix64, q: usize) -> SegmentMap {
    let table = (0..2 * q)
        .map(|_| {
            if rng.next_u64().is_multiple_of(8) {
                LOOP
            } else {
                (rng.next_u64() % (2 * q) as u64) as u32
            }
        })
        .collect();
    SegmentMap::from_table(table)
}

pub fn below(rng: &mut SplitMix64, k: usize) -> usize {
    (rng.next_u64() % k as u64) as usize
}
