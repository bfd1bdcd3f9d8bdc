#![allow(dead_code)]

use pacman_core::measure::{Atom, Segment};
use pacman_core::ProbabilityMeasure;
use proptest::prelude::*;

/// Measures built on unit cells `[i, i+1]`: each cell is empty, holds an
/// atom at `i`, a uniform segment over the cell, or both.
pub fn measure() -> impl Strategy<Value = ProbabilityMeasure> {
    prop::collection::vec((0u8..4, 1u32..9, 1u32..9), 1..6)
        .prop_filter("needs mass", |cells| cells.iter().any(|c| c.0 != 0))
        .prop_map(|cells| {
            let total: u32 = cells
                .iter()
                .map(|&(k, a, s)| match k {
                    1 => a,
                    2 => s,
                    3 => a + s,
                    _ => 0,
                })
                .sum();
            let total = f64::from(total);
            let mut atoms = Vec::new();
            let mut segments = Vec::new();
            for (i, &(k, a, s)) in cells.iter().enumerate() {
                let x = i as f64;
                if k == 1 || k == 3 {
                    atoms.push(Atom {
                        location: x,
                        mass: f64::from(a) / total,
                    });
                }
                if k == 2 || k == 3 {
                    segments.push(Segment {
                        left: x,
                        right: x + 1.0,
                        mass: f64::from(s) / total,
                    });
                }
            }
            ProbabilityMeasure::new(atoms, segments).unwrap()
        })
}

pub fn non_degenerate() -> impl Strategy<Value = ProbabilityMeasure> {
    measure().prop_filter("degenerate", |m| !m.is_degenerate())
}

/// Purely atomic measures with at most `max` atoms on the integers.
pub fn atomic(max: usize) -> impl Strategy<Value = ProbabilityMeasure> {
    prop::collection::btree_map(0u8..6, 1u32..9, 2..=max).prop_map(|m| {
        let total: u32 = m.values().sum();
        let atoms: Vec<(f64, f64)> = m
            .iter()
            .map(|(&x, &w)| (f64::from(x), f64::from(w) / f64::from(total)))
            .collect();
        ProbabilityMeasure::atomic(&atoms).unwrap()
    })
}

pub fn interior_p() -> impl Strategy<Value = f64> {
    0.01f64..0.99
}
