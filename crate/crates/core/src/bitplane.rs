//! Bit-plane slicing and the four block-based rearrangement orders.

use crate::error::{Error, Result};
use crate::predictor::ErrorImage;

/// One binary plane of an error image, raster order. `k = 1` is the LSB plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitPlane {
    rows: usize,
    cols: usize,
    k: u8,
    bits: Vec<bool>,
}

impl BitPlane {
    pub fn new(rows: usize, cols: usize, k: u8, bits: Vec<bool>) -> Result<Self> {
        if !(1..=8).contains(&k) {
            return Err(Error::Parameter(format!("plane index {k} outside 1..=8")));
        }
        if bits.len() != rows * cols {
            return Err(Error::Size(format!(
                "plane of {} bits for {rows}x{cols}",
                bits.len()
            )));
        }
        Ok(BitPlane {
            rows,
            cols,
            k,
            bits,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn index(&self) -> u8 {
        self.k
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }
}

/// The eight planes of `eprime`, ordered `k = 1..=8`.
pub fn extract_planes(err: &ErrorImage) -> Vec<BitPlane> {
    (1..=8u8)
        .map(|k| BitPlane {
            rows: err.rows(),
            cols: err.cols(),
            k,
            bits: err
                .eprime()
                .iter()
                .map(|&v| (v >> (k - 1)) & 1 == 1)
                .collect(),
        })
        .collect()
}

/// Inverse of [`extract_planes`]: recombines planes `k = 1..=8` into bytes.
pub fn combine_planes(planes: &[BitPlane]) -> Result<Vec<u8>> {
    if planes.len() != 8 {
        return Err(Error::Size(format!(
            "{} planes supplied, need 8",
            planes.len()
        )));
    }
    let count = planes[0].bits.len();
    let mut bytes = vec![0u8; count];
    for plane in planes {
        if plane.bits.len() != count {
            return Err(Error::Size("planes differ in length".into()));
        }
        for (b, &bit) in bytes.iter_mut().zip(&plane.bits) {
            *b |= (bit as u8) << (plane.k - 1);
        }
    }
    Ok(bytes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScanOrder {
    RowByRow,
    ColumnByColumn,
}

/// How a plane is linearised: scan order inside each `t x t` block, and the
/// order in which blocks are visited. Serialised as two bits, within-block first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RearrangeMode {
    pub within_block: ScanOrder,
    pub between_blocks: ScanOrder,
}

impl RearrangeMode {
    /// All four modes in ascending `(within, between)` order.
    pub const ALL: [RearrangeMode; 4] = [
        RearrangeMode::from_bits(0b00),
        RearrangeMode::from_bits(0b01),
        RearrangeMode::from_bits(0b10),
        RearrangeMode::from_bits(0b11),
    ];

    pub const RASTER: RearrangeMode = RearrangeMode::from_bits(0);

    /// `bits` is the two-bit code: high bit within-block, low bit between-blocks.
    pub const fn from_bits(bits: u8) -> Self {
        const fn order(b: u8) -> ScanOrder {
            if b & 1 == 0 {
                ScanOrder::RowByRow
            } else {
                ScanOrder::ColumnByColumn
            }
        }
        RearrangeMode {
            within_block: order(bits >> 1),
            between_blocks: order(bits),
        }
    }

    pub const fn to_bits(self) -> u8 {
        ((matches!(self.within_block, ScanOrder::ColumnByColumn) as u8) << 1)
            | matches!(self.between_blocks, ScanOrder::ColumnByColumn) as u8
    }
}

/// A precomputed linearisation: `order[k]` is the raster index of the k-th output bit.
#[derive(Clone, Debug)]
pub struct Rearrangement {
    rows: usize,
    cols: usize,
    order: Vec<u32>,
}

impl Rearrangement {
    pub fn new(rows: usize, cols: usize, t: usize, mode: RearrangeMode) -> Result<Self> {
        if t == 0 {
            return Err(Error::Parameter("block side t must be at least 1".into()));
        }
        let block_rows = rows.div_ceil(t);
        let block_cols = cols.div_ceil(t);
        let mut order = Vec::with_capacity(rows * cols);
        let mut visit_block = |bi: usize, bj: usize| {
            let (r0, r1) = (bi * t, ((bi + 1) * t).min(rows));
            let (c0, c1) = (bj * t, ((bj + 1) * t).min(cols));
            match mode.within_block {
                ScanOrder::RowByRow => {
                    for i in r0..r1 {
                        for j in c0..c1 {
                            order.push((i * cols + j) as u32);
                        }
                    }
                }
                ScanOrder::ColumnByColumn => {
                    for j in c0..c1 {
                        for i in r0..r1 {
                            order.push((i * cols + j) as u32);
                        }
                    }
                }
            }
        };
        match mode.between_blocks {
            ScanOrder::RowByRow => {
                for bi in 0..block_rows {
                    for bj in 0..block_cols {
                        visit_block(bi, bj);
                    }
                }
            }
            ScanOrder::ColumnByColumn => {
                for bj in 0..block_cols {
                    for bi in 0..block_rows {
                        visit_block(bi, bj);
                    }
                }
            }
        }
        debug_assert_eq!(order.len(), rows * cols);
        Ok(Rearrangement { rows, cols, order })
    }

    /// The four rearrangements of a `rows x cols` plane, in [`RearrangeMode::ALL`] order.
    pub fn all_modes(rows: usize, cols: usize, t: usize) -> Result<[Rearrangement; 4]> {
        let [a, b, c, d] = RearrangeMode::ALL;
        Ok([
            Rearrangement::new(rows, cols, t, a)?,
            Rearrangement::new(rows, cols, t, b)?,
            Rearrangement::new(rows, cols, t, c)?,
            Rearrangement::new(rows, cols, t, d)?,
        ])
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn apply(&self, raster: &[bool]) -> Vec<bool> {
        assert_eq!(raster.len(), self.order.len());
        self.order.iter().map(|&idx| raster[idx as usize]).collect()
    }

    pub fn invert(&self, seq: &[bool]) -> Result<Vec<bool>> {
        if seq.len() != self.order.len() {
            return Err(Error::Size(format!(
                "sequence of {} bits for a {}x{} plane",
                seq.len(),
                self.rows,
                self.cols
            )));
        }
        let mut raster = vec![false; seq.len()];
        for (&idx, &bit) in self.order.iter().zip(seq) {
            raster[idx as usize] = bit;
        }
        Ok(raster)
    }
}

pub fn rearrange(plane: &BitPlane, t: usize, mode: RearrangeMode) -> Result<Vec<bool>> {
    Ok(Rearrangement::new(plane.rows, plane.cols, t, mode)?.apply(&plane.bits))
}

pub fn inverse_rearrange(
    seq: &[bool],
    t: usize,
    mode: RearrangeMode,
    rows: usize,
    cols: usize,
    k: u8,
) -> Result<BitPlane> {
    let bits = Rearrangement::new(rows, cols, t, mode)?.invert(seq)?;
    BitPlane::new(rows, cols, k, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plane(rows: usize, cols: usize, bits: &[bool]) -> BitPlane {
        BitPlane::new(rows, cols, 1, bits.to_vec()).unwrap()
    }

    /// Rearrangement written as nested loops over explicit coordinates.
    fn oracle_order(rows: usize, cols: usize, t: usize, mode: RearrangeMode) -> Vec<usize> {
        let mut blocks = Vec::new();
        let br = rows.div_ceil(t);
        let bc = cols.div_ceil(t);
        for a in 0..(br * bc) {
            let (bi, bj) = match mode.between_blocks {
                ScanOrder::RowByRow => (a / bc, a % bc),
                ScanOrder::ColumnByColumn => (a % br, a / br),
            };
            blocks.push((bi, bj));
        }
        let mut out = Vec::new();
        for (bi, bj) in blocks {
            for a in 0..(t * t) {
                let (di, dj) = match mode.within_block {
                    ScanOrder::RowByRow => (a / t, a % t),
                    ScanOrder::ColumnByColumn => (a % t, a / t),
                };
                let (i, j) = (bi * t + di, bj * t + dj);
                if i < rows && j < cols {
                    out.push(i * cols + j);
                }
            }
        }
        out
    }

    #[test]
    fn mode_bits() {
        for (i, m) in RearrangeMode::ALL.iter().enumerate() {
            assert_eq!(m.to_bits() as usize, i);
        }
        let m = RearrangeMode::from_bits(0b10);
        assert_eq!(m.within_block, ScanOrder::ColumnByColumn);
        assert_eq!(m.between_blocks, ScanOrder::RowByRow);
    }

    #[test]
    fn single_block_orders() {
        let p = plane(2, 2, &[true, false, true, true]);
        assert_eq!(
            rearrange(&p, 2, RearrangeMode::from_bits(0b00)).unwrap(),
            vec![true, false, true, true]
        );
        assert_eq!(
            rearrange(&p, 2, RearrangeMode::from_bits(0b10)).unwrap(),
            vec![true, true, false, true]
        );
        let r = Rearrangement::new(2, 2, 2, RearrangeMode::from_bits(0b10)).unwrap();
        assert_eq!(r.order(), &[0, 2, 1, 3]);
    }

    #[test]
    fn four_modes_distinct_on_4x4() {
        let orders: Vec<Vec<u32>> = RearrangeMode::ALL
            .iter()
            .map(|&m| Rearrangement::new(4, 4, 2, m).unwrap().order().to_vec())
            .collect();
        for a in 0..4 {
            for b in (a + 1)..4 {
                assert_ne!(orders[a], orders[b]);
            }
            let mode = RearrangeMode::ALL[a];
            let expect: Vec<u32> = oracle_order(4, 4, 2, mode)
                .into_iter()
                .map(|x| x as u32)
                .collect();
            assert_eq!(orders[a], expect);
        }
        // A random-looking plane: every mode is a permutation of the same multiset.
        let bits: Vec<bool> = (0..16).map(|i| (i * 7 + 3) % 5 < 2).collect();
        let p = plane(4, 4, &bits);
        let ones = bits.iter().filter(|&&b| b).count();
        let seqs: Vec<Vec<bool>> = RearrangeMode::ALL
            .iter()
            .map(|&m| rearrange(&p, 2, m).unwrap())
            .collect();
        for s in &seqs {
            assert_eq!(s.iter().filter(|&&b| b).count(), ones);
        }
    }

    #[test]
    fn raster_mode_t1_is_identity() {
        let r = Rearrangement::new(5, 7, 1, RearrangeMode::RASTER).unwrap();
        assert!(r.order().iter().enumerate().all(|(k, &v)| v as usize == k));
        // (0,0) with t >= cols is also plain raster order.
        let r = Rearrangement::new(1, 7, 7, RearrangeMode::RASTER).unwrap();
        assert!(r.order().iter().enumerate().all(|(k, &v)| v as usize == k));
    }

    #[test]
    fn zero_block_size_rejected() {
        assert!(matches!(
            Rearrangement::new(4, 4, 0, RearrangeMode::RASTER),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn inverse_length_mismatch() {
        assert!(matches!(
            inverse_rearrange(&[true; 5], 2, RearrangeMode::RASTER, 2, 2, 1),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn large_plane_roundtrip() {
        let bits: Vec<bool> = (0..512 * 512u64)
            .map(|i| (i.wrapping_mul(2654435761) >> 7) & 1 == 1)
            .collect();
        let p = plane(512, 512, &bits);
        for &mode in &RearrangeMode::ALL {
            let seq = rearrange(&p, 4, mode).unwrap();
            assert_eq!(inverse_rearrange(&seq, 4, mode, 512, 512, 1).unwrap(), p);
        }
    }

    #[test]
    fn planes_split_and_recombine() {
        let img = crate::image_io::GrayImage::from_fn(5, 6, |i, j| (i * 40 + j * 3) as u8).unwrap();
        let err = crate::predictor::compute_error_image(&img);
        let planes = extract_planes(&err);
        assert_eq!(planes.len(), 8);
        assert_eq!(planes[7].index(), 8);
        assert_eq!(combine_planes(&planes).unwrap(), err.eprime());
    }

    proptest! {
        #[test]
        fn rearrangement_is_a_bijection_matching_oracle(rows in 1usize..20, cols in 1usize..20, t in 1usize..9, m in 0u8..4) {
            let mode = RearrangeMode::from_bits(m);
            let r = Rearrangement::new(rows, cols, t, mode).unwrap();
            let mut seen = vec![false; rows * cols];
            for &idx in r.order() {
                prop_assert!(!seen[idx as usize]);
                seen[idx as usize] = true;
            }
            prop_assert!(seen.iter().all(|&s| s));
            let oracle: Vec<u32> = oracle_order(rows, cols, t, mode).into_iter().map(|x| x as u32).collect();
            prop_assert_eq!(r.order(), &oracle[..]);
        }

        #[test]
        fn partial_block_roundtrip(bits in proptest::collection::vec(any::<bool>(), 35), m in 0u8..4) {
            let p = plane(7, 5, &bits);
            let mode = RearrangeMode::from_bits(m);
            let seq = rearrange(&p, 3, mode).unwrap();
            prop_assert_eq!(inverse_rearrange(&seq, 3, mode, 7, 5, 1).unwrap(), p);
        }
    }
}
