//! Seeded table and mask generators for tests, benchmarks and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mask::CareMask;
use crate::table::{low_mask, Table};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform values in `[0, 2^w_out)`.
pub fn random_table(rng: &mut impl Rng, w_in: u32, w_out: u32) -> Result<Table> {
    let top = low_mask(w_out);
    Table::from_fn(w_in, w_out, |_| rng.gen_range(0..=top))
}

/// Each entry is a don't care with probability `dont_care`.
pub fn random_mask(rng: &mut impl Rng, len: usize, dont_care: f64) -> CareMask {
    CareMask::new(
        (0..len)
            .map(|_| !rng.gen_bool(dont_care.clamp(0.0, 1.0)))
            .collect(),
    )
}

/// A table whose sub-tables are biased right shifts of `bases` random base
/// sub-tables, with every don't-care entry overwritten by noise. The noise
/// never drops below the sub-table minimum, whose entry is always a care,
/// so the planted shift structure survives underneath it.
pub fn planted_table(
    rng: &mut impl Rng,
    w_in: u32,
    w_out: u32,
    w_lb_in: u32,
    bases: usize,
    dont_care: f64,
) -> Result<(Table, CareMask)> {
    if w_lb_in == 0 || w_lb_in >= w_in || w_out < 2 || bases == 0 {
        return Err(Error::Config(format!(
            "planted table needs 0 < w_lb_in < w_in, w_out >= 2 and at least one base (got {w_lb_in}, {w_in}, {w_out}, {bases})"
        )));
    }
    let m = 1usize << w_lb_in;
    let n = 1usize << (w_in - w_lb_in);
    let w_st = w_out - 1;
    let base_set: Vec<Vec<u64>> = (0..bases)
        .map(|_| {
            let mut b: Vec<u64> = (0..m).map(|_| rng.gen_range(0..=low_mask(w_st))).collect();
            let lo = *b.iter().min().unwrap();
            b.iter_mut().for_each(|v| *v -= lo);
            b
        })
        .collect();
    let top = low_mask(w_out);
    let mut values = Vec::with_capacity(n * m);
    let mut flags = Vec::with_capacity(n * m);
    for _ in 0..n {
        let base = base_set.choose(rng).unwrap();
        let t = rng.gen_range(0..=w_st);
        let sub: Vec<u64> = base.iter().map(|v| v >> t).collect();
        let peak = *sub.iter().max().unwrap();
        let bias = rng.gen_range(0..=top - peak);
        let anchor = sub.iter().position(|&v| v == 0).unwrap();
        for (k, v) in sub.iter().enumerate() {
            let care = k == anchor || !rng.gen_bool(dont_care.clamp(0.0, 1.0));
            flags.push(care);
            values.push(if care {
                v + bias
            } else {
                rng.gen_range(bias..=top)
            });
        }
    }
    Ok((Table::new(w_in, w_out, values)?, CareMask::new(flags)))
}

/// Four-sub-table example whose single don't care lets one stored
/// sub-table generate all the others.
pub fn motivating_family() -> (Table, CareMask) {
    const RESIDUALS: [[u64; 4]; 4] = [[0, 3, 2, 3], [0, 3, 4, 7], [0, 6, 8, 15], [0, 0, 1, 1]];
    const BIAS: [u64; 4] = [3, 10, 1, 7];
    let values = (0..4)
        .flat_map(|i| RESIDUALS[i].iter().map(move |r| r + BIAS[i]))
        .collect();
    let mut flags = vec![true; 16];
    flags[1] = false;
    (
        Table::new(4, 5, values).expect("family fits 4x5"),
        CareMask::new(flags),
    )
}
