//! Block-diagonal (separable) structure of a rectangular matrix.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Row groups `α_i` and column groups `β_i` such that `P[α_i, β_j] = 0` for
/// `i ≠ j`, with the diagonal blocks `P_i = P[α_i, β_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparablePartition<T> {
    pub rows: usize,
    pub cols: usize,
    pub row_groups: Vec<Vec<usize>>,
    pub col_groups: Vec<Vec<usize>>,
    #[serde(skip)]
    pub blocks: Vec<Mat<T>>,
}

impl<T: Real> SeparablePartition<T> {
    pub fn len(&self) -> usize {
        self.row_groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_groups.is_empty()
    }

    /// Reassembles `P` from the diagonal blocks.
    pub fn matrix(&self) -> Mat<T> {
        let mut p = Mat::zeros(self.rows, self.cols);
        for ((alpha, beta), blk) in self.row_groups.iter().zip(&self.col_groups).zip(&self.blocks) {
            for (a, &r) in alpha.iter().enumerate() {
                for (b, &c) in beta.iter().enumerate() {
                    p[(r, c)] = blk[(a, b)];
                }
            }
        }
        p
    }

    /// Group sizes agree with the blocks, the groups cover both index sets
    /// exactly once, and `p` vanishes off the diagonal blocks.
    pub fn validate(&self, p: &Mat<T>) -> Result<()> {
        if p.shape() != (self.rows, self.cols) {
            return invalid("partition and matrix shapes differ");
        }
        if self.col_groups.len() != self.len() || self.blocks.len() != self.len() {
            return invalid("partition group counts differ");
        }
        check_cover(&self.row_groups, self.rows)?;
        check_cover(&self.col_groups, self.cols)?;
        let mut row_of = vec![0; self.rows];
        let mut col_of = vec![0; self.cols];
        for (g, alpha) in self.row_groups.iter().enumerate() {
            alpha.iter().for_each(|&r| row_of[r] = g);
        }
        for (g, beta) in self.col_groups.iter().enumerate() {
            beta.iter().for_each(|&c| col_of[c] = g);
        }
        for r in 0..self.rows {
            for c in 0..self.cols {
                if row_of[r] != col_of[c] && p[(r, c)] != T::zero() {
                    return invalid(format!("entry ({r}, {c}) couples groups {} and {}", row_of[r], col_of[c]));
                }
            }
        }
        for (g, blk) in self.blocks.iter().enumerate() {
            if blk.shape() != (self.row_groups[g].len(), self.col_groups[g].len())
                || *blk != p.select(&self.row_groups[g], &self.col_groups[g])
            {
                return invalid(format!("block {g} does not match the matrix"));
            }
        }
        Ok(())
    }

    /// Rebuilds the blocks of `p` under fixed groups.
    pub fn with_groups(p: &Mat<T>, row_groups: Vec<Vec<usize>>, col_groups: Vec<Vec<usize>>) -> Result<Self> {
        if row_groups.len() != col_groups.len() {
            return invalid("row and column group counts differ");
        }
        let blocks = row_groups.iter().zip(&col_groups).map(|(a, b)| p.select(a, b)).collect();
        let part = Self { rows: p.rows(), cols: p.cols(), row_groups, col_groups, blocks };
        part.validate(p)?;
        Ok(part)
    }
}

fn check_cover(groups: &[Vec<usize>], total: usize) -> Result<()> {
    let mut seen = vec![false; total];
    for &i in groups.iter().flatten() {
        if i >= total || seen[i] {
            return invalid(format!("index {i} is out of range or repeated"));
        }
        seen[i] = true;
    }
    if seen.iter().any(|s| !s) {
        return invalid("groups do not cover every index");
    }
    Ok(())
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Finest separable partition: connected components of the bipartite graph
/// linking row `r` and column `c` whenever `P[r, c] ≠ 0`.
///
/// Groups are ordered by their smallest row index (components without rows
/// come last, by smallest column). Zero rows and zero columns join the first
/// group; a zero matrix yields a single group.
pub fn find_partition<T: Real>(p: &Mat<T>) -> SeparablePartition<T> {
    let (k, d) = p.shape();
    // nodes: rows 0..k, columns k..k+d
    let mut parent: Vec<usize> = (0..k + d).collect();
    let mut row_used = vec![false; k];
    let mut col_used = vec![false; d];
    for r in 0..k {
        for c in 0..d {
            if p[(r, c)] != T::zero() {
                row_used[r] = true;
                col_used[c] = true;
                let (a, b) = (find(&mut parent, r), find(&mut parent, k + c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut row_groups: Vec<Vec<usize>> = Vec::new();
    let mut col_groups: Vec<Vec<usize>> = Vec::new();
    let group_of = |root: usize, roots: &mut Vec<usize>, rg: &mut Vec<Vec<usize>>, cg: &mut Vec<Vec<usize>>| {
        roots.iter().position(|&x| x == root).unwrap_or_else(|| {
            roots.push(root);
            rg.push(Vec::new());
            cg.push(Vec::new());
            roots.len() - 1
        })
    };
    for r in (0..k).filter(|&r| row_used[r]) {
        let root = find(&mut parent, r);
        let g = group_of(root, &mut roots, &mut row_groups, &mut col_groups);
        row_groups[g].push(r);
    }
    for c in (0..d).filter(|&c| col_used[c]) {
        let root = find(&mut parent, k + c);
        let g = group_of(root, &mut roots, &mut row_groups, &mut col_groups);
        col_groups[g].push(c);
    }
    if row_groups.is_empty() {
        row_groups.push(Vec::new());
        col_groups.push(Vec::new());
    }
    row_groups[0].extend((0..k).filter(|&r| !row_used[r]));
    col_groups[0].extend((0..d).filter(|&c| !col_used[c]));
    row_groups[0].sort_unstable();
    col_groups[0].sort_unstable();
    let blocks = row_groups.iter().zip(&col_groups).map(|(a, b)| p.select(a, b)).collect();
    SeparablePartition { rows: k, cols: d, row_groups, col_groups, blocks }
}
