//! Block-sparse arrays: each dimension is split into subspaces and only
//! selected blocks (one subspace per dimension) are stored.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::dense::{contract_planned, permutedims, plan_labels, DenseTensor};
use crate::error::{Result, TensorError};
use crate::scalar::Scalar;

/// Subspace ordinals, one per dimension.
pub type BlockCoord = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSparseTensor<T> {
    blockdims: Vec<Vec<usize>>,
    blocks: BTreeMap<BlockCoord, DenseTensor<T>>,
}

impl<T: Scalar> BlockSparseTensor<T> {
    /// An empty tensor; `blockdims[d]` lists the subspace sizes of dimension `d`.
    pub fn new(blockdims: Vec<Vec<usize>>) -> Self {
        BlockSparseTensor {
            blockdims,
            blocks: BTreeMap::new(),
        }
    }

    pub fn blockdims(&self) -> &[Vec<usize>] {
        &self.blockdims
    }

    pub fn rank(&self) -> usize {
        self.blockdims.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.blockdims.iter().map(|d| d.iter().sum()).collect()
    }

    pub fn block_shape(&self, coord: &[usize]) -> Vec<usize> {
        coord.iter().zip(&self.blockdims).map(|(&b, dims)| dims[b]).collect()
    }

    pub fn blocks(&self) -> &BTreeMap<BlockCoord, DenseTensor<T>> {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> impl Iterator<Item = (&BlockCoord, &mut DenseTensor<T>)> {
        self.blocks.iter_mut()
    }

    pub fn block(&self, coord: &[usize]) -> Option<&DenseTensor<T>> {
        self.blocks.get(coord)
    }

    pub fn block_mut(&mut self, coord: &[usize]) -> Option<&mut DenseTensor<T>> {
        self.blocks.get_mut(coord)
    }

    fn check_coord(&self, coord: &[usize]) -> Result<()> {
        if coord.len() != self.rank() {
            return Err(TensorError::Shape(format!(
                "block coordinate {coord:?} for rank {}",
                self.rank()
            )));
        }
        for (d, (&b, dims)) in coord.iter().zip(&self.blockdims).enumerate() {
            if b >= dims.len() {
                return Err(TensorError::BlockStructure(d));
            }
        }
        Ok(())
    }

    /// Stores `block` at `coord`, replacing any existing block.
    pub fn insert_block(&mut self, coord: BlockCoord, block: DenseTensor<T>) -> Result<()> {
        self.check_coord(&coord)?;
        if block.shape() != self.block_shape(&coord) {
            return Err(TensorError::Shape(format!(
                "block {coord:?} has shape {:?}, expected {:?}",
                block.shape(),
                self.block_shape(&coord)
            )));
        }
        self.blocks.insert(coord, block);
        Ok(())
    }

    /// The block at `coord`, allocated as zeros if absent.
    pub fn block_or_zero(&mut self, coord: &[usize]) -> Result<&mut DenseTensor<T>> {
        self.check_coord(coord)?;
        let shape = self.block_shape(coord);
        Ok(self
            .blocks
            .entry(coord.to_vec())
            .or_insert_with(|| DenseTensor::zeros(&shape)))
    }

    pub fn remove_block(&mut self, coord: &[usize]) -> Option<DenseTensor<T>> {
        self.blocks.remove(coord)
    }

    pub fn nnzblocks(&self) -> usize {
        self.blocks.len()
    }

    /// Number of stored elements.
    pub fn nnz(&self) -> usize {
        self.blocks.values().map(DenseTensor::len).sum()
    }

    /// Start of each subspace of dimension `d` within the full range.
    pub fn offsets(&self, d: usize) -> Vec<usize> {
        let mut acc = 0;
        self.blockdims[d]
            .iter()
            .map(|&n| {
                let o = acc;
                acc += n;
                o
            })
            .collect()
    }

    /// Block ordinal and in-block offset of `pos` along dimension `d`.
    pub fn locate(&self, d: usize, mut pos: usize) -> Option<(usize, usize)> {
        for (b, &n) in self.blockdims[d].iter().enumerate() {
            if pos < n {
                return Some((b, pos));
            }
            pos -= n;
        }
        None
    }

    fn split(&self, idx: &[usize]) -> Option<(BlockCoord, Vec<usize>)> {
        let mut coord = Vec::with_capacity(idx.len());
        let mut inner = Vec::with_capacity(idx.len());
        for (d, &i) in idx.iter().enumerate() {
            let (b, o) = self.locate(d, i)?;
            coord.push(b);
            inner.push(o);
        }
        Some((coord, inner))
    }

    /// Element at full-range position `idx`; unstored blocks read as zero.
    pub fn get(&self, idx: &[usize]) -> T {
        match self.split(idx) {
            Some((coord, inner)) => self.blocks.get(&coord).map_or(T::zero(), |b| b.get(&inner)),
            None => T::zero(),
        }
    }

    pub fn to_dense(&self) -> DenseTensor<T> {
        let mut out = DenseTensor::zeros(&self.shape());
        let offsets: Vec<Vec<usize>> = (0..self.rank()).map(|d| self.offsets(d)).collect();
        let mut full = vec![0; self.rank()];
        for (coord, block) in &self.blocks {
            let shape = block.shape().to_vec();
            let mut idx = vec![0; shape.len()];
            for &x in block.data() {
                for d in 0..idx.len() {
                    full[d] = offsets[d][coord[d]] + idx[d];
                }
                out.set(&full, x);
                for d in (0..shape.len()).rev() {
                    idx[d] += 1;
                    if idx[d] < shape[d] {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        }
        out
    }

    /// Copies the blocks of `dense` whose coordinates satisfy `keep`.
    pub fn from_dense(
        dense: &DenseTensor<T>,
        blockdims: Vec<Vec<usize>>,
        mut keep: impl FnMut(&[usize]) -> bool,
    ) -> Result<Self> {
        let mut out = BlockSparseTensor::new(blockdims);
        if out.shape() != dense.shape() {
            return Err(TensorError::Shape(format!(
                "block structure {:?} does not cover shape {:?}",
                out.shape(),
                dense.shape()
            )));
        }
        let counts: Vec<usize> = out.blockdims.iter().map(Vec::len).collect();
        let offsets: Vec<Vec<usize>> = (0..out.rank()).map(|d| out.offsets(d)).collect();
        for_each_coord(&counts, |coord| {
            if !keep(coord) {
                return;
            }
            let shape = out.block_shape(coord);
            let block = DenseTensor::from_fn(&shape, |i| {
                let full: Vec<usize> = (0..i.len()).map(|d| offsets[d][coord[d]] + i[d]).collect();
                dense.get(&full)
            });
            out.blocks.insert(coord.to_vec(), block);
        });
        Ok(out)
    }

    pub fn permutedims(&self, perm: &[usize]) -> Result<Self> {
        let mut out = BlockSparseTensor::new(perm.iter().map(|&p| self.blockdims[p].clone()).collect());
        for (coord, block) in &self.blocks {
            let c: BlockCoord = perm.iter().map(|&p| coord[p]).collect();
            out.blocks.insert(c, permutedims(block, perm)?.into_owned());
        }
        Ok(out)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> BlockSparseTensor<U> {
        BlockSparseTensor {
            blockdims: self.blockdims.clone(),
            blocks: self.blocks.iter().map(|(c, b)| (c.clone(), b.map(&f))).collect(),
        }
    }

    pub fn scale(&mut self, s: T) {
        self.blocks.values_mut().for_each(|b| b.scale(s));
    }

    /// `self += s * other`; block structures must agree.
    pub fn axpy(&mut self, s: T, other: &BlockSparseTensor<T>) -> Result<()> {
        if self.blockdims != other.blockdims {
            return Err(TensorError::BlockStructure(0));
        }
        for (coord, block) in &other.blocks {
            match self.blocks.get_mut(coord) {
                Some(mine) => mine.axpy(s, block),
                None => {
                    let mut b = block.clone();
                    b.scale(s);
                    self.blocks.insert(coord.clone(), b);
                }
            }
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> T::Real {
        self.blocks.values().fold(T::Real::zero(), |acc, b| acc + b.norm_sqr())
    }
}

/// Visits every coordinate of a grid with `counts[d]` entries per dimension,
/// in row-major order.
pub(crate) fn for_each_coord(counts: &[usize], mut f: impl FnMut(&[usize])) {
    if counts.contains(&0) {
        return;
    }
    let mut coord = vec![0; counts.len()];
    loop {
        f(&coord);
        let mut d = counts.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            coord[d] += 1;
            if coord[d] < counts[d] {
                break;
            }
            coord[d] = 0;
        }
    }
}

/// Contracts two block-sparse tensors over their negative labels.
///
/// Every pair of stored blocks agreeing on the contracted coordinates is
/// contracted densely; contributions to the same output block are summed.
pub fn blocksparse_contract<T: Scalar>(
    a: &BlockSparseTensor<T>,
    la: &[i32],
    b: &BlockSparseTensor<T>,
    lb: &[i32],
) -> Result<(BlockSparseTensor<T>, Vec<i32>)> {
    let plan = plan_labels(&a.shape(), la, &b.shape(), lb)?;
    for (&pa, &pb) in plan.ca.iter().zip(&plan.cb) {
        if a.blockdims[pa] != b.blockdims[pb] {
            return Err(TensorError::BlockStructure(pa));
        }
    }
    let blockdims: Vec<Vec<usize>> = plan
        .fa
        .iter()
        .map(|&p| a.blockdims[p].clone())
        .chain(plan.fb.iter().map(|&p| b.blockdims[p].clone()))
        .collect();
    let mut out = BlockSparseTensor::new(blockdims);

    let mut by_key: HashMap<Vec<usize>, Vec<(&BlockCoord, &DenseTensor<T>)>> = HashMap::new();
    for (coord, block) in &b.blocks {
        let key: Vec<usize> = plan.cb.iter().map(|&p| coord[p]).collect();
        by_key.entry(key).or_default().push((coord, block));
    }
    let mut partial: BTreeMap<BlockCoord, Vec<DenseTensor<T>>> = BTreeMap::new();
    for (ca, ba) in &a.blocks {
        let key: Vec<usize> = plan.ca.iter().map(|&p| ca[p]).collect();
        let Some(matches) = by_key.get(&key) else {
            continue;
        };
        for (cb, bb) in matches {
            let coord: BlockCoord = plan
                .fa
                .iter()
                .map(|&p| ca[p])
                .chain(plan.fb.iter().map(|&p| cb[p]))
                .collect();
            partial.entry(coord).or_default().push(contract_planned(ba, bb, &plan));
        }
    }
    for (coord, parts) in partial {
        let mut it = parts.into_iter();
        let mut acc = it.next().expect("nonempty by construction");
        for p in it {
            acc.axpy(T::one(), &p);
        }
        out.blocks.insert(coord, acc);
    }
    Ok((out, plan.out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::dense_contract;

    fn filled(blockdims: Vec<Vec<usize>>, coords: &[&[usize]], seed: f64) -> BlockSparseTensor<f64> {
        let mut t = BlockSparseTensor::new(blockdims);
        let mut x = seed;
        for c in coords {
            let shape = t.block_shape(c);
            let b = DenseTensor::from_fn(&shape, |_| {
                x += 0.731;
                x.sin()
            });
            t.insert_block(c.to_vec(), b).unwrap();
        }
        t
    }

    #[test]
    fn dense_round_trip_and_lookup() {
        let t = filled(vec![vec![1, 2], vec![2, 1]], &[&[0, 1], &[1, 0]], 0.0);
        let d = t.to_dense();
        assert_eq!(d.shape(), &[3, 3]);
        assert_eq!(d.get(&[0, 0]), 0.0);
        assert_eq!(d.get(&[0, 2]), t.get(&[0, 2]));
        let back = BlockSparseTensor::from_dense(&d, t.blockdims().to_vec(), |c| t.block(c).is_some()).unwrap();
        assert_eq!(back, t);
        assert_eq!(t.nnz(), 1 + 4);
    }

    #[test]
    fn single_block_matches_dense_kernel() {
        let a = filled(vec![vec![2], vec![3]], &[&[0, 0]], 0.1);
        let b = filled(vec![vec![3], vec![4]], &[&[0, 0]], 0.2);
        let (c, _) = blocksparse_contract(&a, &[1, -1], &b, &[-1, 2]).unwrap();
        let (d, _) = dense_contract(a.block(&[0, 0]).unwrap(), &[1, -1], b.block(&[0, 0]).unwrap(), &[-1, 2]).unwrap();
        assert_eq!(c.block(&[0, 0]).unwrap(), &d);
    }

    #[test]
    fn unmatched_blocks_give_empty_output() {
        let a = filled(vec![vec![1, 1], vec![2, 2]], &[&[0, 0]], 0.0);
        let b = filled(vec![vec![2, 2], vec![3]], &[&[1, 0]], 0.0);
        let (c, _) = blocksparse_contract(&a, &[1, -1], &b, &[-1, 2]).unwrap();
        assert_eq!(c.nnzblocks(), 0);
        assert_eq!(c.shape(), vec![2, 3]);
    }

    #[test]
    fn accumulates_and_matches_densified() {
        let a = filled(
            vec![vec![1, 2], vec![2, 1], vec![1, 1]],
            &[&[0, 0, 0], &[0, 1, 1], &[1, 1, 0], &[1, 0, 1]],
            0.3,
        );
        let b = filled(
            vec![vec![1, 1], vec![2, 1], vec![3]],
            &[&[0, 0, 0], &[1, 1, 0], &[0, 1, 0]],
            0.9,
        );
        let (c, l) = blocksparse_contract(&a, &[1, -2, -1], &b, &[-1, -2, 2]).unwrap();
        let (d, ld) = dense_contract(&a.to_dense(), &[1, -2, -1], &b.to_dense(), &[-1, -2, 2]).unwrap();
        assert_eq!(l, ld);
        let cd = c.to_dense();
        for (x, y) in cd.data().iter().zip(d.data()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn mismatched_structure_is_an_error() {
        let a = filled(vec![vec![1, 2]], &[&[0]], 0.0);
        let b = filled(vec![vec![2, 1]], &[&[0]], 0.0);
        assert!(matches!(
            blocksparse_contract(&a, &[-1], &b, &[-1]),
            Err(TensorError::BlockStructure(0))
        ));
    }

    #[test]
    fn permutation_moves_coordinates() {
        let t = filled(vec![vec![1, 2], vec![3]], &[&[1, 0]], 0.0);
        let p = t.permutedims(&[1, 0]).unwrap();
        assert_eq!(p.blockdims(), &[vec![3], vec![1, 2]]);
        assert_eq!(p.get(&[2, 1]), t.get(&[1, 2]));
    }
}
