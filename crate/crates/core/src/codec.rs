//! Storage accounting and the `STPZ` container.
//!
//! Counts are numbers of stored scalars (a complex entry and a singular value
//! each count as one), matching how the decompositions are compared. For an
//! `m × n × l` tensor with `m = m1·m2`, `n = n1·n2`:
//!
//! | method            | stored scalars                      |
//! |-------------------|-------------------------------------|
//! | raw               | `m·n·l`                             |
//! | full t-SVD        | `(m + n + 1)·p·l`, `p = min(m, n)`  |
//! | truncated t-SVD   | `(m + n + 1)·r·l`                   |
//! | full STP-SVD      | `[(m1 + n1 + 1)·q + m2·n2]·l`, `q = min(m1, n1)` |
//! | truncated STP-SVD | `[(m1 + n1 + 1)·r + m2·n2]·l`       |
//!
//! # Container layout
//!
//! Little-endian, no padding:
//!
//! ```text
//! "STPZ"  u8 version=1  u8 flags  u8[2] reserved=0
//! u32 m1  u32 m2  u32 n1  u32 n2  u32 l
//! u32 R[l]
//! per slice i: U_i (m1×R_i complex) sigma_i (R_i f64) C_i (m2×n2 complex) V_i (n1×R_i complex)
//! ```
//!
//! Complex values are `(re: f64, im: f64)`; matrices are column-major. Flag
//! bit 0 marks a real-valued source tensor; the other bits must be zero.

use num_complex::Complex64;
use num_rational::Ratio;

use crate::decomp::{BlockRank, MatStpSvd, SplitDims, TensorStpSvd};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub const MAGIC: [u8; 4] = *b"STPZ";
pub const VERSION: u8 = 1;
pub const FLAG_REAL_INPUT: u8 = 0b1;

const HEADER_LEN: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    FullTSvd,
    FullStpSvd,
    TruncTSvd,
    TruncStpSvd,
    Raw,
}

impl Method {
    pub fn is_truncated(self) -> bool {
        matches!(self, Method::TruncTSvd | Method::TruncStpSvd)
    }
}

/// Scalar count and compression rate of one storage scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorageReport {
    pub method: Method,
    pub count: u64,
    /// `count / (m·n·l)`, exact.
    pub cr: Ratio<u64>,
}

/// Stored scalars for `method` on an `(m1·m2) × (n1·n2) × l` tensor with a
/// uniform truncation rank `r` (required for truncated methods only).
pub fn storage_count(method: Method, dims: SplitDims, l: usize, r: Option<usize>) -> Result<u64> {
    let SplitDims { m1, m2, n1, n2 } = dims;
    let (m, n) = (m1 * m2, n1 * n2);
    let rank = |max: usize| -> Result<u64> {
        match r {
            None => Err(Error::domain(format!(
                "{method:?} requires a truncation rank"
            ))),
            Some(r) if r == 0 || r > max => Err(Error::domain(format!(
                "rank {r} outside 1..={max} for {method:?}"
            ))),
            Some(r) => Ok(r as u64),
        }
    };
    let (m1, m2, n1, n2, m, n, l) = (
        m1 as u64, m2 as u64, n1 as u64, n2 as u64, m as u64, n as u64, l as u64,
    );
    Ok(match method {
        Method::Raw => m * n * l,
        Method::FullTSvd => (m + n + 1) * m.min(n) * l,
        Method::TruncTSvd => (m + n + 1) * rank(m.min(n) as usize)? * l,
        Method::FullStpSvd => ((m1 + n1 + 1) * m1.min(n1) + m2 * n2) * l,
        Method::TruncStpSvd => ((m1 + n1 + 1) * rank(m1.min(n1) as usize)? + m2 * n2) * l,
    })
}

/// `storage_count / (m·n·l)` as an exact fraction.
pub fn compression_rate(
    method: Method,
    dims: SplitDims,
    l: usize,
    r: Option<usize>,
) -> Result<Ratio<u64>> {
    let count = storage_count(method, dims, l, r)?;
    Ok(Ratio::new(count, raw_count(dims, l)))
}

pub fn storage_report(
    method: Method,
    dims: SplitDims,
    l: usize,
    r: Option<usize>,
) -> Result<StorageReport> {
    let count = storage_count(method, dims, l, r)?;
    Ok(StorageReport {
        method,
        count,
        cr: Ratio::new(count, raw_count(dims, l)),
    })
}

fn raw_count(dims: SplitDims, l: usize) -> u64 {
    (dims.rows() * dims.cols() * l) as u64
}

/// Truncated STP-SVD count with a per-slice rank: `Σ_i [(m1 + n1 + 1)·R_i + m2·n2]`.
pub fn stp_count_per_slice(dims: SplitDims, ranks: &BlockRank) -> u64 {
    let per_block = (dims.m1 + dims.n1 + 1) as u64;
    let c = (dims.m2 * dims.n2) as u64;
    ranks
        .as_slice()
        .iter()
        .map(|&r| per_block * r as u64 + c)
        .sum()
}

/// Truncated t-SVD count with a per-slice rank: `Σ_i (m + n + 1)·R_i`.
pub fn tsvd_count_per_slice(m: usize, n: usize, ranks: &BlockRank) -> u64 {
    ranks
        .as_slice()
        .iter()
        .map(|&r| ((m + n + 1) * r) as u64)
        .sum()
}

/// Scalars stored for a decomposition; equals the factor payload of its container.
pub fn factor_count(f: &TensorStpSvd) -> u64 {
    stp_count_per_slice(f.dims, &f.block_rank)
}

/// Payload size in bytes of the container for `dims` and `ranks`, or `None`
/// on overflow.
fn container_len(dims: SplitDims, ranks: &[usize]) -> Option<usize> {
    let SplitDims { m1, m2, n1, n2 } = dims;
    let c_bytes = m2.checked_mul(n2)?.checked_mul(16)?;
    let mut total = HEADER_LEN.checked_add(ranks.len().checked_mul(4)?)?;
    for &r in ranks {
        let uv = m1.checked_add(n1)?.checked_mul(r)?.checked_mul(16)?;
        total = total
            .checked_add(uv)?
            .checked_add(r.checked_mul(8)?)?
            .checked_add(c_bytes)?;
    }
    Some(total)
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::domain(format!("{what} = {v} does not fit in u32")))
}

fn put_complex(out: &mut Vec<u8>, values: &[Complex64]) {
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
}

/// Encodes a decomposition as an `STPZ` container.
pub fn serialize(f: &TensorStpSvd) -> Result<Vec<u8>> {
    let dims = f.dims;
    let ranks = f.block_rank.as_slice();
    if ranks.len() != f.slices.len() {
        return Err(Error::domain("block rank length differs from slice count"));
    }
    let len =
        container_len(dims, ranks).ok_or_else(|| Error::domain("container size overflows"))?;
    let mut out = Vec::with_capacity(len);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(if f.real_input { FLAG_REAL_INPUT } else { 0 });
    out.extend_from_slice(&[0, 0]);
    for (v, name) in [
        (dims.m1, "m1"),
        (dims.m2, "m2"),
        (dims.n1, "n1"),
        (dims.n2, "n2"),
        (f.slices.len(), "l"),
    ] {
        out.extend_from_slice(&to_u32(v, name)?.to_le_bytes());
    }
    for &r in ranks {
        out.extend_from_slice(&to_u32(r, "rank")?.to_le_bytes());
    }
    for (i, s) in f.slices.iter().enumerate() {
        let r = ranks[i];
        if s.sigma.len() != r
            || s.u.shape() != (dims.m1, r)
            || s.v.shape() != (dims.n1, r)
            || s.c.shape() != (dims.m2, dims.n2)
        {
            return Err(Error::domain(format!(
                "slice {i} factors disagree with the header"
            )));
        }
        put_complex(&mut out, s.u.as_slice());
        for x in &s.sigma {
            out.extend_from_slice(&x.to_le_bytes());
        }
        put_complex(&mut out, s.c.as_slice());
        put_complex(&mut out, s.v.as_slice());
    }
    debug_assert_eq!(out.len(), len);
    Ok(out)
}

/// Parsed container header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub dims: SplitDims,
    pub block_rank: BlockRank,
    pub flags: u8,
}

impl Header {
    pub fn l(&self) -> usize {
        self.block_rank.len()
    }

    pub fn real_input(&self) -> bool {
        self.flags & FLAG_REAL_INPUT != 0
    }

    pub fn storage_count(&self) -> u64 {
        stp_count_per_slice(self.dims, &self.block_rank)
    }

    pub fn compression_rate(&self) -> Ratio<u64> {
        Ratio::new(self.storage_count(), raw_count(self.dims, self.l()))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(
                self.bytes.len(),
                format!("truncated while reading {what}"),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, what)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(
            self.take(8, "f64")
                .expect("length checked")
                .try_into()
                .expect("8 bytes"),
        )
    }

    fn complex(&mut self, count: usize) -> Vec<Complex64> {
        (0..count)
            .map(|_| {
                let re = self.f64();
                Complex64::new(re, self.f64())
            })
            .collect()
    }
}

fn read_header(r: &mut Reader<'_>) -> Result<Header> {
    if r.bytes.len() < MAGIC.len() || r.bytes[..4] != MAGIC {
        return Err(Error::format(0, "bad magic, expected \"STPZ\""));
    }
    r.pos = 4;
    let version = r.u8("version")?;
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let flags = r.u8("flags")?;
    if flags & !FLAG_REAL_INPUT != 0 {
        return Err(Error::format(
            5,
            format!("reserved flag bits set: {flags:#04x}"),
        ));
    }
    let reserved = r.take(2, "reserved bytes")?;
    if reserved != [0, 0] {
        return Err(Error::format(6, "reserved bytes must be zero"));
    }
    let mut fields = [0usize; 5];
    for (i, (slot, name)) in fields
        .iter_mut()
        .zip(["m1", "m2", "n1", "n2", "l"])
        .enumerate()
    {
        let v = r.u32(name)? as usize;
        if v == 0 {
            return Err(Error::format(8 + 4 * i, format!("{name} must be positive")));
        }
        *slot = v;
    }
    let [m1, m2, n1, n2, l] = fields;
    let dims = SplitDims { m1, m2, n1, n2 };
    if m1.checked_mul(m2).is_none() || n1.checked_mul(n2).is_none() {
        return Err(Error::format(8, "dimensions overflow"));
    }
    let max_rank = m1.min(n1);
    let available = (r.bytes.len() - r.pos) / 4;
    if l > available {
        return Err(Error::format(
            r.bytes.len(),
            "truncated while reading block ranks",
        ));
    }
    let mut ranks = Vec::with_capacity(l);
    for _ in 0..l {
        let at = r.pos;
        let v = r.u32("block rank")? as usize;
        if v == 0 || v > max_rank {
            return Err(Error::format(
                at,
                format!("block rank {v} outside 1..={max_rank}"),
            ));
        }
        ranks.push(v);
    }
    Ok(Header {
        dims,
        block_rank: BlockRank::new(ranks)?,
        flags,
    })
}

/// Parses only the container header, without requiring the payload.
pub fn read_container_header(bytes: &[u8]) -> Result<Header> {
    read_header(&mut Reader { bytes, pos: 0 })
}

/// Decodes an `STPZ` container.
pub fn deserialize(bytes: &[u8]) -> Result<TensorStpSvd> {
    let mut r = Reader { bytes, pos: 0 };
    let header = read_header(&mut r)?;
    let dims = header.dims;
    let ranks = header.block_rank.as_slice();
    let expected =
        container_len(dims, ranks).ok_or_else(|| Error::format(8, "declared sizes overflow"))?;
    if bytes.len() < expected {
        return Err(Error::format(
            bytes.len(),
            format!(
                "truncated payload: expected {expected} bytes, found {}",
                bytes.len()
            ),
        ));
    }
    if bytes.len() > expected {
        return Err(Error::format(
            expected,
            format!("{} trailing bytes", bytes.len() - expected),
        ));
    }
    let mut slices = Vec::with_capacity(ranks.len());
    for &rank in ranks {
        let u = DenseMatrix::from_col_major(dims.m1, rank, r.complex(dims.m1 * rank))?;
        let sigma = (0..rank).map(|_| r.f64()).collect();
        let c = DenseMatrix::from_col_major(dims.m2, dims.n2, r.complex(dims.m2 * dims.n2))?;
        let v = DenseMatrix::from_col_major(dims.n1, rank, r.complex(dims.n1 * rank))?;
        slices.push(MatStpSvd {
            u,
            sigma,
            c,
            v,
            dims,
        });
    }
    TensorStpSvd::from_parts(slices, dims, header.real_input())
}
