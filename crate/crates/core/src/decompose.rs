//! Bias extraction, right-shift self-similarity and greedy unique sub-table
//! selection.
//!
//! A table of `2^w_in` entries is cut into `n = 2^(w_in - w_lb_in)`
//! sub-tables of `M = 2^w_lb_in` consecutive entries. Each sub-table's
//! minimum goes to the bias table; the residuals are compared pairwise:
//! `ST_i` generates `ST_j` at shift `t` when `ST_i[k] >> t == ST_j[k]` for
//! every `k`. A greedy cover then picks the unique sub-tables to store.
//!
//! Identical sub-tables are grouped into classes before the pairwise scan.
//! Because a right shift is a function, each class generates at most
//! `w_st + 1` classes, so the similarity relation is held as sparse rows
//! over classes rather than a dense `n x n` matrix.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::table::{bit_length, low_mask, Decomposition, DecompositionParts, Table};

/// Residual sub-tables after bias extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    /// Concatenated residuals, `n * M` entries.
    pub residuals: Vec<u64>,
    pub bias: Vec<u64>,
    /// Bit-width of the widest residual; 0 for a piecewise-constant table.
    pub w_st: u32,
    pub sub_table_len: usize,
}

impl Split {
    pub fn sub_table_count(&self) -> usize {
        self.bias.len()
    }

    pub fn sub_table(&self, i: usize) -> &[u64] {
        let m = self.sub_table_len;
        &self.residuals[i * m..(i + 1) * m]
    }
}

/// Splits `table` into sub-tables of `2^w_lb_in` entries and subtracts each
/// sub-table's minimum.
pub fn split_bias(table: &Table, w_lb_in: u32) -> Result<Split> {
    if w_lb_in == 0 || w_lb_in >= table.w_in() {
        return Err(Error::Config(format!(
            "sub-table width {w_lb_in} outside [1, {}]",
            table.w_in() - 1
        )));
    }
    let m = 1usize << w_lb_in;
    let mut bias = Vec::with_capacity(table.len() / m);
    let mut residuals = Vec::with_capacity(table.len());
    let mut widest = 0u64;
    for chunk in table.values().chunks(m) {
        let min = chunk.iter().copied().min().unwrap_or(0);
        bias.push(min);
        for &v in chunk {
            let r = v - min;
            widest |= r;
            residuals.push(r);
        }
    }
    Ok(Split {
        residuals,
        bias,
        w_st: bit_length(widest),
        sub_table_len: m,
    })
}

/// One sub-table assigned to a unique sub-table, regenerated at `shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dep {
    pub sub_table: usize,
    pub shift: u32,
}

/// Which sub-tables are stored and which are regenerated from them.
///
/// `deps[u]` lists the dependents of unique `u` (never `u` itself) in
/// ascending sub-table order; it is empty for non-unique sub-tables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Selection {
    pub i_ust: Vec<usize>,
    pub deps: Vec<Vec<Dep>>,
}

impl Selection {
    /// Every sub-table is its own unique entry.
    pub fn identity(n: usize) -> Self {
        Selection {
            i_ust: (0..n).collect(),
            deps: vec![Vec::new(); n],
        }
    }

    pub fn sub_table_count(&self) -> usize {
        self.deps.len()
    }

    pub fn unique_count(&self) -> usize {
        self.i_ust.len()
    }

    /// Dependents of `u` plus `u` itself.
    pub fn dependency_count(&self, u: usize) -> usize {
        1 + self.deps[u].len()
    }

    /// For each sub-table, the unique it is read from and the shift.
    pub fn assignment(&self) -> Vec<(usize, u32)> {
        let mut out = vec![(usize::MAX, 0); self.deps.len()];
        for &u in &self.i_ust {
            out[u] = (u, 0);
            for d in &self.deps[u] {
                out[d.sub_table] = (u, d.shift);
            }
        }
        out
    }

    /// Every sub-table is either unique or listed under exactly one unique.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![false; self.deps.len()];
        for &u in &self.i_ust {
            if u >= seen.len() || std::mem::replace(&mut seen[u], true) {
                return false;
            }
        }
        for (owner, list) in self.deps.iter().enumerate() {
            if !list.is_empty() && !self.i_ust.contains(&owner) {
                return false;
            }
            for d in list {
                if d.sub_table >= seen.len() || std::mem::replace(&mut seen[d.sub_table], true) {
                    return false;
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Right-shift similarity between sub-tables plus the greedy selection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilarityState {
    sub_table_len: usize,
    w_st: u32,
    class_of: Vec<usize>,
    class_members: Vec<Vec<usize>>,
    /// Per class: the classes it generates with the smallest shift, sorted
    /// by shift. Always starts with `(self, 0)`.
    generates: Vec<Vec<(usize, u32)>>,
    sv: Vec<usize>,
    pub selection: Selection,
}

impl SimilarityState {
    pub fn sub_table_count(&self) -> usize {
        self.class_of.len()
    }

    pub fn sub_table_len(&self) -> usize {
        self.sub_table_len
    }

    pub fn w_st(&self) -> u32 {
        self.w_st
    }

    /// `Some(t)` iff sub-table `i` generates sub-table `j` with smallest
    /// right shift `t`.
    pub fn similarity(&self, i: usize, j: usize) -> Option<u32> {
        let target = self.class_of[j];
        self.generates[self.class_of[i]]
            .iter()
            .find(|(c, _)| *c == target)
            .map(|&(_, t)| t)
    }

    /// Row sums of the initial similarity matrix: how many sub-tables each
    /// sub-table can generate, itself included.
    pub fn sv(&self) -> &[usize] {
        &self.sv
    }

    pub fn i_ust(&self) -> &[usize] {
        &self.selection.i_ust
    }

    pub fn deps(&self, u: usize) -> &[Dep] {
        &self.selection.deps[u]
    }

    /// Number of distinct sub-table contents.
    pub fn class_count(&self) -> usize {
        self.class_members.len()
    }
}

/// Builds the similarity relation over `residuals` (concatenated sub-tables
/// of `sub_table_len` entries, each below `2^w_st`). The selection starts
/// out as the identity.
pub fn similarity_matrix(residuals: &[u64], sub_table_len: usize, w_st: u32) -> SimilarityState {
    let m = sub_table_len;
    assert!(m > 0 && residuals.len().is_multiple_of(m));
    let n = residuals.len() / m;

    let mut class_of = Vec::with_capacity(n);
    let mut class_members: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<&[u64], usize> = HashMap::new();
    for (i, st) in residuals.chunks(m).enumerate() {
        let next = class_members.len();
        let c = *index.entry(st).or_insert(next);
        if c == next {
            class_members.push(Vec::new());
        }
        class_members[c].push(i);
        class_of.push(c);
    }

    let generates: Vec<Vec<(usize, u32)>> = class_members
        .par_iter()
        .map(|members| {
            let rep = &residuals[members[0] * m..(members[0] + 1) * m];
            let top = bit_length(rep.iter().fold(0, |a, &v| a | v)).min(w_st);
            let mut row: Vec<(usize, u32)> = Vec::new();
            let mut shifted = vec![0u64; m];
            for t in 0..=top {
                for (s, &v) in shifted.iter_mut().zip(rep) {
                    *s = v >> t;
                }
                if let Some(&c) = index.get(shifted.as_slice()) {
                    if !row.iter().any(|&(seen, _)| seen == c) {
                        row.push((c, t));
                    }
                }
            }
            row
        })
        .collect();

    let class_sv: Vec<usize> = generates
        .iter()
        .map(|row| row.iter().map(|&(c, _)| class_members[c].len()).sum())
        .collect();
    let sv = class_of.iter().map(|&c| class_sv[c]).collect();

    SimilarityState {
        sub_table_len: m,
        w_st,
        class_of,
        class_members,
        generates,
        sv,
        selection: Selection::identity(n),
    }
}

/// Greedy cover: repeatedly take the sub-table that generates the most
/// still-uncovered sub-tables (lowest index on ties), assign everything it
/// generates to it, and drop those rows and columns.
pub fn select_unique(mut state: SimilarityState) -> SimilarityState {
    let classes = state.class_members.len();
    let n = state.class_of.len();

    let mut generated_by: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (c, row) in state.generates.iter().enumerate() {
        for &(target, _) in row {
            generated_by[target].push(c);
        }
    }

    let size = |c: usize| state.class_members[c].len();
    let mut score: Vec<usize> = state
        .generates
        .iter()
        .map(|row| row.iter().map(|&(c, _)| size(c)).sum())
        .collect();
    let mut alive = vec![true; classes];
    let mut heap: BinaryHeap<(usize, Reverse<usize>, usize)> = (0..classes)
        .map(|c| (score[c], Reverse(state.class_members[c][0]), c))
        .collect();

    let mut i_ust = Vec::new();
    let mut deps: Vec<Vec<Dep>> = vec![Vec::new(); n];
    while let Some((s, _, c)) = heap.pop() {
        if !alive[c] || s != score[c] {
            continue;
        }
        let unique = state.class_members[c][0];
        i_ust.push(unique);
        let mut covered = Vec::new();
        for &(target, t) in &state.generates[c] {
            if !alive[target] {
                continue;
            }
            alive[target] = false;
            for &j in &state.class_members[target] {
                if j != unique {
                    covered.push(Dep {
                        sub_table: j,
                        shift: t,
                    });
                }
            }
            for &g in &generated_by[target] {
                if alive[g] {
                    score[g] -= size(target);
                    heap.push((score[g], Reverse(state.class_members[g][0]), g));
                }
            }
        }
        covered.sort_unstable();
        deps[unique] = covered;
    }

    state.selection = Selection { i_ust, deps };
    state
}

/// Builds the final decomposition from a (possibly don't-care-patched)
/// split of the higher bits of `table` and a selection over it. Fails if
/// any dependent does not equal its generator shifted by its recorded shift.
pub fn assemble(
    table: &Table,
    w_lb_out: u32,
    split: &Split,
    selection: &Selection,
) -> Result<Decomposition> {
    let m = split.sub_table_len;
    let n = split.sub_table_count();
    if selection.sub_table_count() != n || !selection.is_partition() {
        return Err(Error::Invariant(
            "selection does not partition the sub-tables".into(),
        ));
    }

    let mut slot = vec![usize::MAX; n];
    let mut t_ust = Vec::with_capacity(selection.unique_count() * m);
    for (pos, &u) in selection.i_ust.iter().enumerate() {
        slot[u] = pos;
        t_ust.extend_from_slice(split.sub_table(u));
    }

    let mut t_idx = vec![0u32; n];
    let mut t_rsh = vec![0u32; n];
    for (j, (u, shift)) in selection.assignment().into_iter().enumerate() {
        let generator = split.sub_table(u);
        let target = split.sub_table(j);
        if generator.iter().zip(target).any(|(&g, &v)| g >> shift != v) {
            return Err(Error::Invariant(format!(
                "sub-table {j} is not sub-table {u} shifted right by {shift}"
            )));
        }
        t_idx[j] = slot[u] as u32;
        t_rsh[j] = shift;
    }

    let t_lb = (w_lb_out > 0).then(|| {
        let mask = low_mask(w_lb_out);
        table.values().iter().map(|v| v & mask).collect()
    });

    Decomposition::from_parts(DecompositionParts {
        w_in: table.w_in(),
        w_out: table.w_out(),
        w_lb_out,
        w_lb_in: m.trailing_zeros(),
        w_st: split.w_st,
        t_lb,
        t_bias: split.bias.clone(),
        t_idx,
        t_rsh,
        t_ust,
    })
}
