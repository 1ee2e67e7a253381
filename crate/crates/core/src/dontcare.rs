//! Don't-care driven elimination of unique sub-tables.
//!
//! After the greedy selection, each unique sub-table with few dependents is
//! offered up for removal: its unfrozen (don't-care) entries may be
//! rewritten so that it becomes a right shift of another unique sub-table.
//! Removal only sticks if every one of its dependents can be regenerated
//! from the remaining uniques, again possibly by rewriting their own
//! unfrozen entries. Otherwise every provisional write is rolled back.

use std::cmp::Reverse;

use crate::decompose::{Dep, Selection, SimilarityState, Split};
use crate::error::{Error, Result};
use crate::mask::CareMask;
use crate::table::low_mask;

/// Per-entry modifiability. Cares start frozen; entries that took part in a
/// committed match are frozen afterwards. A frozen entry never changes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreezeMask {
    frozen: Vec<bool>,
}

impl FreezeMask {
    pub fn from_care(mask: &CareMask) -> Self {
        FreezeMask {
            frozen: mask.flags().to_vec(),
        }
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frozen.is_empty()
    }

    pub fn frozen_count(&self) -> usize {
        self.frozen.iter().filter(|&&f| f).count()
    }
}

/// Finds the smallest shift `t <= w_st` such that `generator >> t` agrees
/// with `target` on every frozen entry, and returns the target rewritten to
/// `generator >> t`. A rewrite is rejected if `rewritten + bias` would not
/// fit in `w_out_hb` bits.
pub fn match_with_dontcares(
    target: &[u64],
    target_frozen: &[bool],
    generator: &[u64],
    w_st: u32,
    w_out_hb: u32,
    bias: u64,
) -> Option<(u32, Vec<u64>)> {
    debug_assert_eq!(target.len(), generator.len());
    debug_assert_eq!(target.len(), target_frozen.len());
    let limit = low_mask(w_out_hb);
    let shift = (0..=w_st).find(|&t| {
        target
            .iter()
            .zip(target_frozen)
            .zip(generator)
            .all(|((&v, &frozen), &g)| {
                let shifted = g >> t;
                if frozen {
                    shifted == v
                } else {
                    shifted <= limit.saturating_sub(bias) && bias <= limit
                }
            })
    })?;
    Some((shift, generator.iter().map(|g| g >> shift).collect()))
}

/// Outcome of one elimination attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attempt {
    /// Not a unique sub-table, or above the exiguity threshold.
    Ineligible,
    /// No other unique can generate it, even with rewrites.
    NoMatch,
    /// A match existed but some dependent could not be re-homed; rolled back.
    RehomeFailed,
    Eliminated {
        generator: usize,
        shift: u32,
    },
}

/// Working state for the don't-care stage of one configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reducer {
    split: Split,
    selection: Selection,
    freeze: FreezeMask,
    w_out_hb: u32,
}

impl Reducer {
    pub fn new(
        split: Split,
        selection: Selection,
        freeze: FreezeMask,
        w_out_hb: u32,
    ) -> Result<Self> {
        if freeze.len() != split.residuals.len() {
            return Err(Error::SizeMismatch {
                table: split.residuals.len(),
                mask: freeze.len(),
            });
        }
        if selection.sub_table_count() != split.sub_table_count() || !selection.is_partition() {
            return Err(Error::Invariant(
                "selection does not partition the sub-tables".into(),
            ));
        }
        Ok(Reducer {
            split,
            selection,
            freeze,
            w_out_hb,
        })
    }

    pub fn split(&self) -> &Split {
        &self.split
    }

    pub fn selection(&self) -> &Selection {
        &self.selection
    }

    pub fn freeze(&self) -> &FreezeMask {
        &self.freeze
    }

    pub fn into_parts(self) -> (Split, Selection, FreezeMask) {
        (self.split, self.selection, self.freeze)
    }

    fn range(&self, i: usize) -> std::ops::Range<usize> {
        let m = self.split.sub_table_len;
        i * m..(i + 1) * m
    }

    /// Uniques other than `skip`, most dependents first, then lower index.
    fn ranked_generators(&self, skip: usize) -> Vec<usize> {
        let mut order: Vec<usize> = self
            .selection
            .i_ust
            .iter()
            .copied()
            .filter(|&u| u != skip)
            .collect();
        order.sort_by_key(|&u| (Reverse(self.selection.dependency_count(u)), u));
        order
    }

    /// Tries to rewrite sub-table `j` (if needed) so some generator in
    /// `order` produces it. Exact matches are preferred over rewrites.
    /// Rewrites are logged into `undo`.
    fn rehome(
        &mut self,
        j: usize,
        order: &[usize],
        undo: &mut Vec<(usize, Vec<u64>)>,
    ) -> Option<(usize, u32)> {
        let w_st = self.split.w_st;
        let target = self.range(j);
        for &g in order {
            let gen = &self.split.residuals[self.range(g)];
            let tgt = &self.split.residuals[target.clone()];
            if let Some(t) = (0..=w_st).find(|&t| gen.iter().zip(tgt).all(|(&a, &b)| a >> t == b)) {
                return Some((g, t));
            }
        }
        for &g in order {
            let found = match_with_dontcares(
                &self.split.residuals[target.clone()],
                &self.freeze.frozen[target.clone()],
                &self.split.residuals[self.range(g)],
                w_st,
                self.w_out_hb,
                self.split.bias[j],
            );
            if let Some((t, rewritten)) = found {
                undo.push((j, self.split.residuals[target.clone()].to_vec()));
                self.split.residuals[target].copy_from_slice(&rewritten);
                return Some((g, t));
            }
        }
        None
    }

    fn roll_back(&mut self, undo: Vec<(usize, Vec<u64>)>) {
        for (i, old) in undo.into_iter().rev() {
            let r = self.range(i);
            self.split.residuals[r].copy_from_slice(&old);
        }
    }

    /// One elimination attempt for unique `u`. On anything but
    /// [`Attempt::Eliminated`] the state is exactly as before the call.
    pub fn try_eliminate(&mut self, u: usize, exiguity: usize) -> Attempt {
        if !self.selection.i_ust.contains(&u) || self.selection.dependency_count(u) > exiguity {
            return Attempt::Ineligible;
        }
        let order = self.ranked_generators(u);
        let own = self.range(u);
        let mut matched = false;

        for &g in &order {
            let found = match_with_dontcares(
                &self.split.residuals[own.clone()],
                &self.freeze.frozen[own.clone()],
                &self.split.residuals[self.range(g)],
                self.split.w_st,
                self.w_out_hb,
                self.split.bias[u],
            );
            let Some((shift, rewritten)) = found else {
                continue;
            };
            matched = true;

            let mut undo = vec![(u, self.split.residuals[own.clone()].to_vec())];
            self.split.residuals[own.clone()].copy_from_slice(&rewritten);

            let dependents: Vec<usize> =
                self.selection.deps[u].iter().map(|d| d.sub_table).collect();
            let mut placed = Vec::with_capacity(dependents.len());
            for &j in &dependents {
                match self.rehome(j, &order, &mut undo) {
                    Some((home, t)) => placed.push((j, home, t)),
                    None => break,
                }
            }
            if placed.len() < dependents.len() {
                self.roll_back(undo);
                continue;
            }

            self.commit(u, g, shift, &placed);
            return Attempt::Eliminated {
                generator: g,
                shift,
            };
        }

        if matched {
            Attempt::RehomeFailed
        } else {
            Attempt::NoMatch
        }
    }

    fn commit(&mut self, u: usize, generator: usize, shift: u32, placed: &[(usize, usize, u32)]) {
        self.selection.i_ust.retain(|&x| x != u);
        self.selection.deps[u].clear();
        insert_dep(
            &mut self.selection.deps[generator],
            Dep {
                sub_table: u,
                shift,
            },
        );
        for &(j, home, t) in placed {
            insert_dep(
                &mut self.selection.deps[home],
                Dep {
                    sub_table: j,
                    shift: t,
                },
            );
        }
        for i in std::iter::once(u).chain(placed.iter().map(|p| p.0)) {
            let r = self.range(i);
            self.freeze.frozen[r].fill(true);
        }
    }

    /// One traversal of the unique list, fewest dependents first. Returns
    /// how many uniques were eliminated.
    pub fn run_pass(&mut self, exiguity: usize) -> usize {
        let mut candidates = self.selection.i_ust.clone();
        candidates.sort_by_key(|&u| (self.selection.dependency_count(u), u));
        candidates
            .into_iter()
            .filter(|&u| matches!(self.try_eliminate(u, exiguity), Attempt::Eliminated { .. }))
            .count()
    }

    /// Runs up to `passes` traversals, stopping early once a pass removes
    /// nothing.
    pub fn reduce(&mut self, exiguity: usize, passes: usize) -> usize {
        let mut removed = 0;
        for _ in 0..passes {
            let r = self.run_pass(exiguity);
            removed += r;
            if r == 0 {
                break;
            }
        }
        removed
    }
}

fn insert_dep(list: &mut Vec<Dep>, dep: Dep) {
    let at = list.partition_point(|d| d.sub_table < dep.sub_table);
    list.insert(at, dep);
}

/// Single-pass don't-care reduction over a completed greedy selection.
pub fn reduce_unique(
    mut state: SimilarityState,
    split: Split,
    freeze: FreezeMask,
    exiguity: usize,
    w_out_hb: u32,
) -> Result<(SimilarityState, Split, FreezeMask)> {
    let mut reducer = Reducer::new(split, state.selection.clone(), freeze, w_out_hb)?;
    reducer.run_pass(exiguity);
    let (split, selection, freeze) = reducer.into_parts();
    state.selection = selection;
    Ok((state, split, freeze))
}
