//! Self-describing per-node chunk files for byte data under GF(256).
//!
//! A chunk is a 24-byte little-endian header followed by the node's stored
//! symbols, one byte each. Source files are padded with `0x80` and then
//! zeros up to a whole number of stripes.

use crate::cluster::{encode_stripes, read_stripes, repair_stripes};
use crate::error::{Error, Result};
use crate::gf::Elem;
use crate::par::Exec;
use crate::reconstruct::ReconstructionPlan;
use crate::repair::{RepairPlan, RepairTrace};
use crate::transform::MsrCode;

pub const MAGIC: &[u8; 4] = b"MSRF";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkHeader {
    pub q: u16,
    pub k: u8,
    pub r: u8,
    pub n: u16,
    pub stripes: u32,
    pub node: u8,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::ChunkFormat(msg.into())
}

impl ChunkHeader {
    /// Header for node `node` of a code storing `stripes` stripes.
    pub fn for_code(msr: &MsrCode, stripes: usize, node: usize) -> Result<Self> {
        let too_big = |what: &str| format_err(format!("{what} does not fit the header"));
        Ok(Self {
            q: u16::try_from(msr.field().order()).map_err(|_| too_big("q"))?,
            k: u8::try_from(msr.k()).map_err(|_| too_big("k"))?,
            r: u8::try_from(msr.r()).map_err(|_| too_big("r"))?,
            n: u16::try_from(msr.n()).map_err(|_| too_big("N"))?,
            stripes: u32::try_from(stripes).map_err(|_| too_big("stripe count"))?,
            node: u8::try_from(node).map_err(|_| too_big("node id"))?,
        })
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(MAGIC);
        out[4] = VERSION;
        out[5..7].copy_from_slice(&self.q.to_le_bytes());
        out[7] = self.k;
        out[8] = self.r;
        out[9..11].copy_from_slice(&self.n.to_le_bytes());
        out[11..15].copy_from_slice(&self.stripes.to_le_bytes());
        out[15] = self.node;
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(format_err("truncated header"));
        }
        if &bytes[0..4] != MAGIC {
            return Err(format_err("bad magic"));
        }
        if bytes[4] != VERSION {
            return Err(format_err(format!("unsupported version {}", bytes[4])));
        }
        if bytes[16..HEADER_LEN].iter().any(|&b| b != 0) {
            return Err(format_err("nonzero header padding"));
        }
        Ok(Self {
            q: u16::from_le_bytes([bytes[5], bytes[6]]),
            k: bytes[7],
            r: bytes[8],
            n: u16::from_le_bytes([bytes[9], bytes[10]]),
            stripes: u32::from_le_bytes([bytes[11], bytes[12], bytes[13], bytes[14]]),
            node: bytes[15],
        })
    }

    /// Fails unless the header describes a chunk of `msr`.
    pub fn check_code(&self, msr: &MsrCode) -> Result<()> {
        let expected = Self::for_code(msr, self.stripes as usize, self.node as usize)?;
        if *self != expected {
            return Err(format_err(format!(
                "chunk parameters (q={}, k={}, r={}, N={}) do not match the code",
                self.q, self.k, self.r, self.n
            )));
        }
        if self.node as usize >= msr.node_count() {
            return Err(format_err(format!("node id {} out of range", self.node)));
        }
        Ok(())
    }
}

/// `<prefix>.node<id>.bin`
pub fn chunk_file_name(prefix: &str, node: usize) -> String {
    format!("{prefix}.node{node}.bin")
}

fn require_bytes(msr: &MsrCode) -> Result<()> {
    if msr.field().order() != 256 {
        return Err(Error::UnsupportedMapping(format!(
            "byte files need GF(256), code uses GF({})",
            msr.field().order()
        )));
    }
    Ok(())
}

/// Appends `0x80` and zeros up to a multiple of `block`.
pub fn pad(data: &[u8], block: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() + block);
    out.extend_from_slice(data);
    out.push(0x80);
    while out.len() % block != 0 {
        out.push(0);
    }
    out
}

/// Inverse of [`pad`].
pub fn unpad(mut data: Vec<u8>) -> Result<Vec<u8>> {
    while data.last() == Some(&0) {
        data.pop();
    }
    if data.pop() != Some(0x80) {
        return Err(format_err("missing padding marker"));
    }
    Ok(data)
}

/// Serialized chunk with header.
pub fn chunk_bytes(header: &ChunkHeader, symbols: &[Elem]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + symbols.len());
    out.extend_from_slice(&header.to_bytes());
    out.extend(symbols.iter().map(|&s| s as u8));
    out
}

/// Parses and validates one chunk against `msr`.
pub fn parse_chunk(msr: &MsrCode, bytes: &[u8]) -> Result<(ChunkHeader, Vec<Elem>)> {
    require_bytes(msr)?;
    let header = ChunkHeader::from_bytes(bytes)?;
    header.check_code(msr)?;
    let body = &bytes[HEADER_LEN..];
    let expected = header.stripes as usize * msr.capacity();
    if body.len() != expected {
        return Err(format_err(format!(
            "chunk body holds {} bytes, expected {expected}",
            body.len()
        )));
    }
    Ok((header, body.iter().map(|&b| Elem::from(b)).collect()))
}

/// Splits a file into `k + r` chunks.
pub fn encode_file(msr: &MsrCode, data: &[u8], exec: Exec) -> Result<Vec<Vec<u8>>> {
    require_bytes(msr)?;
    let stripe_len = msr.k() * msr.capacity();
    let padded = pad(data, stripe_len);
    let stripes = padded.len() / stripe_len;
    let source: Vec<Elem> = padded.iter().map(|&b| Elem::from(b)).collect();
    let nodes = encode_stripes(msr, &source, exec)?;
    nodes
        .iter()
        .enumerate()
        .map(|(id, symbols)| Ok(chunk_bytes(&ChunkHeader::for_code(msr, stripes, id)?, symbols)))
        .collect()
}

/// Stripe count plus the symbols of each `(node, chunk)` pair.
type Parsed = (usize, Vec<(usize, Vec<Elem>)>);

fn parse_all(msr: &MsrCode, chunks: &[(usize, &[u8])]) -> Result<Parsed> {
    let mut stripes = None;
    let mut out = Vec::with_capacity(chunks.len());
    for &(id, bytes) in chunks {
        let (header, symbols) = parse_chunk(msr, bytes)?;
        if header.node as usize != id {
            return Err(format_err(format!("chunk for node {id} claims node {}", header.node)));
        }
        if *stripes.get_or_insert(header.stripes) != header.stripes {
            return Err(format_err("chunks disagree on the stripe count"));
        }
        out.push((id, symbols));
    }
    Ok((stripes.unwrap_or(0) as usize, out))
}

/// Regenerates the chunk of `node` from the chunks of all other nodes.
pub fn repair_chunk(
    msr: &MsrCode,
    helpers: &[(usize, &[u8])],
    node: usize,
    exec: Exec,
) -> Result<(Vec<u8>, RepairTrace)> {
    let (stripes, parsed) = parse_all(msr, helpers)?;
    let plan = RepairPlan::new(msr, node)?;
    let mut view: Vec<Option<&[Elem]>> = vec![None; msr.node_count()];
    for (id, symbols) in &parsed {
        view[*id] = Some(symbols);
    }
    let (content, trace) = repair_stripes(&plan, msr.capacity(), &view, exec)?;
    let header = ChunkHeader::for_code(msr, stripes, node)?;
    Ok((chunk_bytes(&header, &content), trace))
}

/// Rebuilds the original file from exactly `k` chunks.
pub fn decode_file(msr: &MsrCode, chunks: &[(usize, &[u8])], exec: Exec) -> Result<Vec<u8>> {
    let (_, parsed) = parse_all(msr, chunks)?;
    let ids: Vec<usize> = parsed.iter().map(|(id, _)| *id).collect();
    let plan = ReconstructionPlan::new(msr, &ids)?;
    let contents: Vec<&[Elem]> = parsed.iter().map(|(_, c)| c.as_slice()).collect();
    let symbols = read_stripes(&plan, msr.capacity(), &contents, exec)?;
    unpad(symbols.into_iter().map(|s| s as u8).collect())
}
