//! Layout of the compressed image inside its own `8 * m * n`-bit buffer.
//!
//! ```text
//! | l(A) | l(P_c1) .. l(P_c8) | A | P_c1 .. P_c8 | reserved room | c |
//!   L_len    8 x L_len                                              8 x L_len
//! ```
//!
//! All length fields are `L_len = ceil(log2(m * n))` bits, MSB first. The plane
//! length fields carry the compressed payload size of each record (0 for raw
//! records, whose size is implied by the image). The auxiliary block `A` is
//!
//! ```text
//! | t:8 | l_fix:8 | l_run:8 | code length:8 x 2^l_fix | overflow count:L_len | positions:L_len each |
//! ```
//!
//! and the capacity `c` occupies the last `8 * L_len` bits, which are the LSBs
//! of the last `8 * L_len` pixels.

use std::ops::Range;

use crate::bitplane::{combine_planes, extract_planes, Rearrangement};
use crate::codec::{
    build_huffman, compress_candidates, count_symbols, CodecParams, CompressedPlane, HuffmanTable,
};
use crate::error::{corrupt, Error, Result};
use crate::image_io::{length_field_bits, BitBuffer, BitReader};
use crate::predictor::ErrorImage;

/// Decoder side information.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxInfo {
    pub params: CodecParams,
    pub code_lengths: Vec<u8>,
    pub overflow_positions: Vec<usize>,
}

impl AuxInfo {
    pub fn serialized_len(&self, l_len: usize) -> usize {
        24 + 8 * self.code_lengths.len() + l_len * (1 + self.overflow_positions.len())
    }

    fn write_to(&self, out: &mut BitBuffer, l_len: usize) {
        out.push_bits(self.params.t as u64, 8);
        out.push_bits(self.params.l_fix as u64, 8);
        out.push_bits(self.params.l_run as u64, 8);
        for &len in &self.code_lengths {
            out.push_bits(len as u64, 8);
        }
        out.push_bits(self.overflow_positions.len() as u64, l_len);
        for &p in &self.overflow_positions {
            out.push_bits(p as u64, l_len);
        }
    }

    fn read_from(reader: &mut BitReader<'_>, l_len: usize) -> Result<(Self, HuffmanTable)> {
        let t = reader.read_bits(8)? as usize;
        let l_fix = reader.read_bits(8)? as u8;
        let l_run = reader.read_bits(8)? as u8;
        let params = CodecParams::new(t, l_fix, l_run)
            .map_err(|e| Error::Corruption(format!("auxiliary parameters: {e}")))?;
        let code_lengths = (0..params.symbol_count())
            .map(|_| reader.read_bits(8).map(|v| v as u8))
            .collect::<Result<Vec<u8>>>()?;
        let table = HuffmanTable::from_code_lengths(&code_lengths)
            .map_err(|e| Error::Corruption(format!("Huffman rules: {e}")))?;
        let count = reader.read_bits(l_len)? as usize;
        if count > reader.remaining() / l_len.max(1) {
            return corrupt(format!("overflow count {count} exceeds the container"));
        }
        let overflow_positions = (0..count)
            .map(|_| reader.read_bits(l_len).map(|v| v as usize))
            .collect::<Result<Vec<usize>>>()?;
        Ok((
            AuxInfo {
                params,
                code_lengths,
                overflow_positions,
            },
            table,
        ))
    }
}

/// The compressed image before it is flattened into bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Container {
    rows: usize,
    cols: usize,
    aux: AuxInfo,
    table: HuffmanTable,
    /// Records for planes `k = 1..=8`.
    planes: Vec<CompressedPlane>,
    capacity: usize,
}

/// Net embedding capacity: whatever is left of `8 * m * n` bits after the
/// plane records, `A`, nine header fields and the `8 * L_len`-bit capacity field.
pub fn compute_capacity(
    planes: &[CompressedPlane],
    aux: &AuxInfo,
    rows: usize,
    cols: usize,
) -> Result<usize> {
    let mn = rows * cols;
    let l_len = length_field_bits(mn);
    let records: usize = planes.iter().map(CompressedPlane::serialized_len).sum();
    let used = records + aux.serialized_len(l_len) + 17 * l_len;
    (8 * mn).checked_sub(used).ok_or_else(|| {
        Error::Incompressible(format!(
            "{used} bits of records and overhead exceed the {} available",
            8 * mn
        ))
    })
}

impl Container {
    /// Compresses an error image: one shared Huffman table from the symbol
    /// statistics of all 32 candidate sequences, then the best record per plane.
    pub fn build(err: &ErrorImage, params: &CodecParams) -> Result<Self> {
        params.validate()?;
        let (rows, cols) = (err.rows(), err.cols());
        let mn = rows * cols;
        let l_len = length_field_bits(mn);
        let planes = extract_planes(err);
        let rearrangements = Rearrangement::all_modes(rows, cols, params.t)?;

        let mut candidates: Vec<Vec<Vec<bool>>> = planes
            .iter()
            .map(|p| rearrangements.iter().map(|r| r.apply(p.bits())).collect())
            .collect();
        let table = build_huffman(&count_symbols(
            candidates.iter().flatten().map(|s| &s[..]),
            params,
        ));

        let records = planes
            .iter()
            .zip(candidates.iter_mut())
            .map(|(p, c)| compress_candidates(p.bits(), std::mem::take(c), params, &table))
            .collect::<Result<Vec<_>>>()?;
        let aux = AuxInfo {
            params: *params,
            code_lengths: table.code_lengths(),
            overflow_positions: err.overflow_positions().to_vec(),
        };
        let aux_len = aux.serialized_len(l_len);
        if aux_len >> l_len != 0 {
            return Err(Error::Incompressible(format!(
                "auxiliary information of {aux_len} bits does not fit a {l_len}-bit length field"
            )));
        }
        let capacity = compute_capacity(&records, &aux, rows, cols)?;
        Ok(Container {
            rows,
            cols,
            aux,
            table,
            planes: records,
            capacity,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn aux(&self) -> &AuxInfo {
        &self.aux
    }

    pub fn table(&self) -> &HuffmanTable {
        &self.table
    }

    /// Records for planes `k = 1..=8`.
    pub fn planes(&self) -> &[CompressedPlane] {
        &self.planes
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn length_field_bits(&self) -> usize {
        length_field_bits(self.rows * self.cols)
    }

    /// Compressed payload size of plane `k` (1-based), or `None` if it is stored raw.
    pub fn plane_payload_len(&self, k: u8) -> Option<usize> {
        let rec = &self.planes[k as usize - 1];
        rec.is_compressed().then(|| rec.payload().len())
    }

    /// Bits occupied by the header, `A` and the plane records.
    pub fn packed_len(&self) -> usize {
        let l_len = self.length_field_bits();
        9 * l_len
            + self.aux.serialized_len(l_len)
            + self
                .planes
                .iter()
                .map(CompressedPlane::serialized_len)
                .sum::<usize>()
    }

    /// Buffer span of the reserved room.
    pub fn room(&self) -> Range<usize> {
        let start = self.packed_len();
        start..start + self.capacity
    }

    /// Flattens into `8 * m * n` bits with a zeroed room and the capacity field at the tail.
    pub fn to_bits(&self) -> BitBuffer {
        let mn = self.rows * self.cols;
        let l_len = self.length_field_bits();
        let mut out = BitBuffer::with_capacity(8 * mn);
        out.push_bits(self.aux.serialized_len(l_len) as u64, l_len);
        for rec in &self.planes {
            let len = if rec.is_compressed() {
                rec.payload().len()
            } else {
                0
            };
            out.push_bits(len as u64, l_len);
        }
        self.aux.write_to(&mut out, l_len);
        for rec in &self.planes {
            rec.write_to(&mut out);
        }
        debug_assert_eq!(out.len(), self.packed_len());
        out.extend_from_slice(&vec![false; self.capacity]);
        out.push_bits(self.capacity as u64, 8 * l_len);
        debug_assert_eq!(out.len(), 8 * mn);
        out
    }

    /// Parses a buffer produced by [`Container::to_bits`]. The room and the
    /// capacity field are not read; the capacity is derived from the layout.
    pub fn from_bits(buf: &BitBuffer, rows: usize, cols: usize) -> Result<Self> {
        let mn = rows * cols;
        if buf.len() != 8 * mn {
            return Err(Error::Size(format!(
                "buffer of {} bits for {rows}x{cols}",
                buf.len()
            )));
        }
        let l_len = length_field_bits(mn);
        let usable = 8 * mn - 8 * l_len;
        let mut reader = BitReader::new(&buf.as_slice()[..usable]);
        let aux_len = reader.read_bits(l_len)? as usize;
        let payload_lens = (0..8)
            .map(|_| reader.read_bits(l_len).map(|v| v as usize))
            .collect::<Result<Vec<usize>>>()?;

        let aux_start = reader.position();
        let (aux, table) = AuxInfo::read_from(&mut reader, l_len)?;
        if reader.position() - aux_start != aux_len {
            return corrupt(format!(
                "auxiliary information spans {} bits, header says {aux_len}",
                reader.position() - aux_start
            ));
        }

        let mut planes = Vec::with_capacity(8);
        for &len in &payload_lens {
            let rec = CompressedPlane::read_from(&mut reader, mn, len)?;
            match &rec {
                CompressedPlane::Raw { .. } if len != 0 => {
                    return corrupt("raw plane record with a nonzero length field");
                }
                CompressedPlane::Compressed { .. } if 3 + len > mn => {
                    return corrupt("compressed record is not smaller than a raw one");
                }
                _ => {}
            }
            planes.push(rec);
        }
        let capacity = usable - reader.position();
        Ok(Container {
            rows,
            cols,
            aux,
            table,
            planes,
            capacity,
        })
    }

    /// Decodes every plane and rebuilds the error image.
    pub fn error_image(&self) -> Result<ErrorImage> {
        let planes = self
            .planes
            .iter()
            .enumerate()
            .map(|(i, rec)| {
                rec.decompress(
                    &self.aux.params,
                    &self.table,
                    self.rows,
                    self.cols,
                    i as u8 + 1,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let eprime = combine_planes(&planes)?;
        ErrorImage::from_parts(
            self.rows,
            self.cols,
            eprime,
            self.aux.overflow_positions.clone(),
        )
    }
}

/// Output of [`disassemble`].
#[derive(Clone, Debug)]
pub struct Disassembled {
    pub error_image: ErrorImage,
    pub capacity: usize,
    pub room: Range<usize>,
    pub container: Container,
}

/// Builds the compressed image buffer and returns it with its capacity.
pub fn assemble(err: &ErrorImage, params: &CodecParams) -> Result<(BitBuffer, usize)> {
    let container = Container::build(err, params)?;
    Ok((container.to_bits(), container.capacity()))
}

pub fn disassemble(buf: &BitBuffer, rows: usize, cols: usize) -> Result<Disassembled> {
    let container = Container::from_bits(buf, rows, cols)?;
    let error_image = container.error_image()?;
    Ok(Disassembled {
        error_image,
        capacity: container.capacity(),
        room: container.room(),
        container,
    })
}
