//! Versioned container for indices, tensors, chains and run metadata.
//!
//! Layout: the 8-byte magic `TNKARCH\0`, a little-endian `u32` header
//! length, a JSON header, then the payload. The header describes every
//! record's structure and points into the payload, which holds the numeric
//! arrays as little-endian `f64` (complex values as re, im pairs). The
//! header carries a SHA-256 digest of the payload.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tnkit_core::{
    Arrow, BlockSparseTensor, Data, DenseTensor, ITensor, Index, Scalar, Storage, TagSet, TensorError, C64, QN,
};
use tnkit_mps::{Chain, Mpo, Mps};

pub const MAGIC: &[u8; 8] = b"TNKARCH\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("archive version {found}, this build reads version {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt archive: {0}")]
    Corrupt(String),
    #[error("no record named `{0}`")]
    Missing(String),
    #[error("record `{name}` is a {found}, not a {wanted}")]
    WrongKind {
        name: String,
        found: &'static str,
        wanted: &'static str,
    },
}

pub type Result<T, E = ArchiveError> = std::result::Result<T, E>;

fn corrupt(e: impl std::fmt::Display) -> ArchiveError {
    ArchiveError::Corrupt(e.to_string())
}

impl From<TensorError> for ArchiveError {
    fn from(e: TensorError) -> Self {
        corrupt(e)
    }
}

impl From<tnkit_mps::MpsError> for ArchiveError {
    fn from(e: tnkit_mps::MpsError) -> Self {
        corrupt(e)
    }
}

#[derive(Clone, Debug)]
pub enum Record {
    Index(Index),
    Qn(QN),
    Tensor(ITensor),
    Mps(Mps),
    Mpo(Mpo),
    Meta(serde_json::Value),
}

impl Record {
    pub fn kind(&self) -> &'static str {
        match self {
            Record::Index(_) => "index",
            Record::Qn(_) => "qn",
            Record::Tensor(_) => "tensor",
            Record::Mps(_) => "mps",
            Record::Mpo(_) => "mpo",
            Record::Meta(_) => "meta",
        }
    }
}

/// Named records in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Archive {
    pub records: Vec<(String, Record)>,
}

macro_rules! getter {
    ($name:ident, $variant:ident, $ty:ty, $kind:literal) => {
        pub fn $name(&self, name: &str) -> Result<&$ty> {
            match self.get(name)? {
                Record::$variant(x) => Ok(x),
                r => Err(ArchiveError::WrongKind {
                    name: name.to_string(),
                    found: r.kind(),
                    wanted: $kind,
                }),
            }
        }
    };
}

impl Archive {
    pub fn new() -> Self {
        Archive::default()
    }

    /// Adds or replaces a record.
    pub fn insert(&mut self, name: &str, r: Record) {
        match self.records.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = r,
            None => self.records.push((name.to_string(), r)),
        }
    }

    pub fn get(&self, name: &str) -> Result<&Record> {
        self.records
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r)
            .ok_or_else(|| ArchiveError::Missing(name.to_string()))
    }

    getter!(index, Index, Index, "index");
    getter!(qn, Qn, QN, "qn");
    getter!(tensor, Tensor, ITensor, "tensor");
    getter!(mps, Mps, Mps, "mps");
    getter!(mpo, Mpo, Mpo, "mpo");
    getter!(meta, Meta, serde_json::Value, "meta");

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut payload = Payload::default();
        let records = self
            .records
            .iter()
            .map(|(name, r)| RecordJson {
                name: name.clone(),
                body: encode_record(r, &mut payload),
            })
            .collect();
        let header = Header {
            format: "tnkit-archive".into(),
            version: VERSION,
            payload_len: payload.bytes.len() as u64,
            sha256: hex_digest(&payload.bytes),
            records,
        };
        let h = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(12 + h.len() + payload.bytes.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(h.len() as u32).to_le_bytes());
        out.extend_from_slice(&h);
        out.extend_from_slice(&payload.bytes);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(corrupt("missing magic bytes"));
        }
        let hlen = u32::from_le_bytes(bytes[8..12].try_into().expect("four bytes")) as usize;
        let hend = 12usize
            .checked_add(hlen)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| corrupt("truncated header"))?;
        let probe: VersionProbe = serde_json::from_slice(&bytes[12..hend]).map_err(corrupt)?;
        if probe.version != VERSION {
            return Err(ArchiveError::VersionMismatch {
                found: probe.version,
                expected: VERSION,
            });
        }
        let header: Header = serde_json::from_slice(&bytes[12..hend]).map_err(corrupt)?;
        let payload = &bytes[hend..];
        if payload.len() as u64 != header.payload_len {
            return Err(corrupt(format!(
                "payload is {} bytes, header says {}",
                payload.len(),
                header.payload_len
            )));
        }
        if hex_digest(payload) != header.sha256 {
            return Err(corrupt("payload digest mismatch"));
        }
        let records = header
            .records
            .into_iter()
            .map(|r| Ok((r.name, decode_record(r.body, payload)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Archive { records })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Archive::from_bytes(&fs::read(path)?)
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Deserialize)]
struct VersionProbe {
    version: u32,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    payload_len: u64,
    sha256: String,
    records: Vec<RecordJson>,
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    name: String,
    body: BodyJson,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum BodyJson {
    Index(IndexJson),
    Qn { qn: QnJson },
    Tensor(TensorJson),
    Mps(ChainJson),
    Mpo(ChainJson),
    Meta { value: serde_json::Value },
}

/// `(name, value, modulus)` triples.
type QnJson = Vec<(String, i32, i32)>;

#[derive(Serialize, Deserialize)]
struct IndexJson {
    id: u64,
    dim: usize,
    tags: String,
    plev: u32,
    dir: ArrowJson,
    space: Option<Vec<(QnJson, usize)>>,
}

#[derive(Serialize, Deserialize)]
enum ArrowJson {
    In,
    Out,
    Neither,
}

/// A run of `len` scalars starting at byte `offset` of the payload.
#[derive(Serialize, Deserialize)]
struct ArrayRef {
    offset: u64,
    len: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ElJson {
    Real,
    Complex,
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    coord: Vec<usize>,
    shape: Vec<usize>,
    data: ArrayRef,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "storage", rename_all = "lowercase")]
enum StorageJson {
    Dense {
        el: ElJson,
        shape: Vec<usize>,
        data: ArrayRef,
    },
    Diag {
        el: ElJson,
        data: ArrayRef,
    },
    Uniform {
        el: ElJson,
        data: ArrayRef,
    },
    Blocks {
        el: ElJson,
        flux: Option<QnJson>,
        blockdims: Vec<Vec<usize>>,
        blocks: Vec<BlockJson>,
    },
    Combiner,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    inds: Vec<IndexJson>,
    #[serde(flatten)]
    store: StorageJson,
}

#[derive(Serialize, Deserialize)]
struct ChainJson {
    llim: usize,
    rlim: usize,
    tensors: Vec<TensorJson>,
}

#[derive(Default)]
struct Payload {
    bytes: Vec<u8>,
}

impl Payload {
    fn push<T: Scalar>(&mut self, xs: &[T]) -> ArrayRef {
        let offset = self.bytes.len() as u64;
        for x in xs {
            let c = x.to_c64();
            self.bytes.extend_from_slice(&c.re.to_le_bytes());
            if T::IS_COMPLEX {
                self.bytes.extend_from_slice(&c.im.to_le_bytes());
            }
        }
        ArrayRef {
            offset,
            len: xs.len() as u64,
        }
    }
}

fn read_f64s(payload: &[u8], a: &ArrayRef, per: usize) -> Result<Vec<f64>> {
    let n = (a.len as usize)
        .checked_mul(per)
        .ok_or_else(|| corrupt("array length overflows"))?;
    let start = a.offset as usize;
    let end = n
        .checked_mul(8)
        .and_then(|b| b.checked_add(start))
        .filter(|&e| e <= payload.len());
    let end = end.ok_or_else(|| corrupt("array outside payload"))?;
    Ok(payload[start..end]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
        .collect())
}

fn read_real(payload: &[u8], a: &ArrayRef) -> Result<Vec<f64>> {
    read_f64s(payload, a, 1)
}

fn read_complex(payload: &[u8], a: &ArrayRef) -> Result<Vec<C64>> {
    Ok(read_f64s(payload, a, 2)?
        .chunks_exact(2)
        .map(|c| C64::new(c[0], c[1]))
        .collect())
}

fn encode_qn(q: &QN) -> QnJson {
    q.entries()
        .iter()
        .map(|e| (e.name().to_string(), e.val(), e.modulus()))
        .collect()
}

fn decode_qn(q: &QnJson) -> Result<QN> {
    Ok(QN::from_entries(q.iter().map(|(n, v, m)| (n.as_str(), *v, *m)))?)
}

fn encode_index(i: &Index) -> IndexJson {
    IndexJson {
        id: i.id(),
        dim: i.dim(),
        tags: i.tags().to_string(),
        plev: i.plev(),
        dir: match i.dir() {
            Arrow::In => ArrowJson::In,
            Arrow::Out => ArrowJson::Out,
            Arrow::Neither => ArrowJson::Neither,
        },
        space: i.space().map(|s| s.iter().map(|(q, d)| (encode_qn(q), *d)).collect()),
    }
}

fn decode_index(j: &IndexJson) -> Result<Index> {
    let space = match &j.space {
        Some(s) => Some(
            s.iter()
                .map(|(q, d)| Ok((decode_qn(q)?, *d)))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let dir = match j.dir {
        ArrowJson::In => Arrow::In,
        ArrowJson::Out => Arrow::Out,
        ArrowJson::Neither => Arrow::Neither,
    };
    Ok(Index::from_parts(
        j.id,
        TagSet::parse(&j.tags)?,
        j.plev,
        j.dim,
        space,
        dir,
    )?)
}

fn encode_data<T: Scalar>(d: &Data<T>, el: fn() -> ElJson, p: &mut Payload) -> StorageJson {
    match d {
        Data::Dense(t) => StorageJson::Dense {
            el: el(),
            shape: t.shape().to_vec(),
            data: p.push(t.data()),
        },
        Data::Diag(v) => StorageJson::Diag {
            el: el(),
            data: p.push(v),
        },
        Data::Uniform(x) => StorageJson::Uniform {
            el: el(),
            data: p.push(std::slice::from_ref(x)),
        },
        Data::Blocks(b, flux) => StorageJson::Blocks {
            el: el(),
            flux: flux.as_ref().map(encode_qn),
            blockdims: b.blockdims().to_vec(),
            blocks: b
                .blocks()
                .iter()
                .map(|(c, t)| BlockJson {
                    coord: c.clone(),
                    shape: t.shape().to_vec(),
                    data: p.push(t.data()),
                })
                .collect(),
        },
    }
}

fn encode_tensor(t: &ITensor, p: &mut Payload) -> TensorJson {
    let store = match t.store() {
        Storage::Real(d) => encode_data(d, || ElJson::Real, p),
        Storage::Complex(d) => encode_data(d, || ElJson::Complex, p),
        Storage::Combiner => StorageJson::Combiner,
    };
    TensorJson {
        inds: t.inds().iter().map(encode_index).collect(),
        store,
    }
}

fn decode_data<T: Scalar>(
    s: &StorageJson,
    payload: &[u8],
    read: fn(&[u8], &ArrayRef) -> Result<Vec<T>>,
) -> Result<Data<T>> {
    Ok(match s {
        StorageJson::Dense { shape, data, .. } => Data::Dense(DenseTensor::from_vec(shape, read(payload, data)?)?),
        StorageJson::Diag { data, .. } => Data::Diag(read(payload, data)?),
        StorageJson::Uniform { data, .. } => {
            let v = read(payload, data)?;
            if v.len() != 1 {
                return Err(corrupt("uniform diagonal needs one value"));
            }
            Data::Uniform(v[0])
        }
        StorageJson::Blocks {
            flux,
            blockdims,
            blocks,
            ..
        } => {
            let mut b = BlockSparseTensor::new(blockdims.clone());
            for blk in blocks {
                b.insert_block(
                    blk.coord.clone(),
                    DenseTensor::from_vec(&blk.shape, read(payload, &blk.data)?)?,
                )?;
            }
            Data::Blocks(b, flux.as_ref().map(decode_qn).transpose()?)
        }
        StorageJson::Combiner => unreachable!("handled by the caller"),
    })
}

fn decode_tensor(j: &TensorJson, payload: &[u8]) -> Result<ITensor> {
    let inds = j.inds.iter().map(decode_index).collect::<Result<Vec<_>>>()?;
    let el = match &j.store {
        StorageJson::Dense { el, .. }
        | StorageJson::Diag { el, .. }
        | StorageJson::Uniform { el, .. }
        | StorageJson::Blocks { el, .. } => el,
        StorageJson::Combiner => return Ok(ITensor::from_parts(inds, Storage::Combiner)?),
    };
    let store = match el {
        ElJson::Real => Storage::Real(decode_data(&j.store, payload, read_real)?),
        ElJson::Complex => Storage::Complex(decode_data(&j.store, payload, read_complex)?),
    };
    Ok(ITensor::from_parts(inds, store)?)
}

fn encode_chain<K>(c: &Chain<K>, p: &mut Payload) -> ChainJson {
    ChainJson {
        llim: c.llim(),
        rlim: c.rlim(),
        tensors: c.tensors().iter().map(|t| encode_tensor(t, p)).collect(),
    }
}

fn decode_chain<K>(j: &ChainJson, payload: &[u8]) -> Result<Chain<K>> {
    let ts = j
        .tensors
        .iter()
        .map(|t| decode_tensor(t, payload))
        .collect::<Result<Vec<_>>>()?;
    let mut c = Chain::new(ts)?;
    if !(j.llim < j.rlim && j.rlim <= c.len() + 1) {
        return Err(corrupt("invalid orthogonality limits"));
    }
    c.set_ortho_lims(j.llim, j.rlim);
    Ok(c)
}

fn encode_record(r: &Record, p: &mut Payload) -> BodyJson {
    match r {
        Record::Index(i) => BodyJson::Index(encode_index(i)),
        Record::Qn(q) => BodyJson::Qn { qn: encode_qn(q) },
        Record::Tensor(t) => BodyJson::Tensor(encode_tensor(t, p)),
        Record::Mps(c) => BodyJson::Mps(encode_chain(c, p)),
        Record::Mpo(c) => BodyJson::Mpo(encode_chain(c, p)),
        Record::Meta(v) => BodyJson::Meta { value: v.clone() },
    }
}

fn decode_record(b: BodyJson, payload: &[u8]) -> Result<Record> {
    Ok(match b {
        BodyJson::Index(i) => Record::Index(decode_index(&i)?),
        BodyJson::Qn { qn } => Record::Qn(decode_qn(&qn)?),
        BodyJson::Tensor(t) => Record::Tensor(decode_tensor(&t, payload)?),
        BodyJson::Mps(c) => Record::Mps(decode_chain(&c, payload)?),
        BodyJson::Mpo(c) => Record::Mpo(decode_chain(&c, payload)?),
        BodyJson::Meta { value } => Record::Meta(value),
    })
}

/// Field-by-field equality, including the arrow and id that `Index`
/// equality leaves out.
pub fn same_index(a: &Index, b: &Index) -> bool {
    a.id() == b.id()
        && a.dim() == b.dim()
        && a.tags() == b.tags()
        && a.plev() == b.plev()
        && a.dir() == b.dir()
        && a.space() == b.space()
}

/// Identical indices in the same order and bit-identical storage.
pub fn same_tensor(a: &ITensor, b: &ITensor) -> bool {
    a.inds().len() == b.inds().len()
        && a.inds().iter().zip(b.inds()).all(|(x, y)| same_index(x, y))
        && bit_equal(a.store(), b.store())
}

fn bit_equal(a: &Storage, b: &Storage) -> bool {
    fn bits<T: Scalar>(xs: &[T]) -> Vec<(u64, u64)> {
        xs.iter()
            .map(|x| (x.to_c64().re.to_bits(), x.to_c64().im.to_bits()))
            .collect()
    }
    fn data<T: Scalar>(a: &Data<T>, b: &Data<T>) -> bool {
        match (a, b) {
            (Data::Dense(x), Data::Dense(y)) => x.shape() == y.shape() && bits(x.data()) == bits(y.data()),
            (Data::Diag(x), Data::Diag(y)) => bits(x) == bits(y),
            (Data::Uniform(x), Data::Uniform(y)) => bits(&[*x]) == bits(&[*y]),
            (Data::Blocks(x, fx), Data::Blocks(y, fy)) => {
                fx == fy
                    && x.blockdims() == y.blockdims()
                    && x.blocks().len() == y.blocks().len()
                    && x.blocks().iter().zip(y.blocks()).all(|((cx, tx), (cy, ty))| {
                        cx == cy && tx.shape() == ty.shape() && bits(tx.data()) == bits(ty.data())
                    })
            }
            _ => false,
        }
    }
    match (a, b) {
        (Storage::Real(x), Storage::Real(y)) => data(x, y),
        (Storage::Complex(x), Storage::Complex(y)) => data(x, y),
        (Storage::Combiner, Storage::Combiner) => true,
        _ => false,
    }
}

pub fn same_chain<K>(a: &Chain<K>, b: &Chain<K>) -> bool {
    a.len() == b.len()
        && a.llim() == b.llim()
        && a.rlim() == b.rlim()
        && a.tensors().iter().zip(b.tensors()).all(|(x, y)| same_tensor(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tnkit_core::ElType;

    #[test]
    fn qn_index_round_trip() {
        let i = Index::with_qns(
            vec![(QN::one("Sz", 1).unwrap(), 2), (QN::one("Sz", -1).unwrap(), 3)],
            "a,b",
            Arrow::In,
        )
        .unwrap()
        .prime();
        let mut a = Archive::new();
        a.insert("i", Record::Index(i.clone()));
        let b = Archive::from_bytes(&a.to_bytes()).unwrap();
        assert!(same_index(b.index("i").unwrap(), &i));
    }

    #[test]
    fn version_and_corruption_are_reported() {
        let i = Index::new(3, "x").unwrap();
        let mut a = Archive::new();
        a.insert(
            "t",
            Record::Tensor(ITensor::random(ElType::Real, &[i], &mut rand::rng()).unwrap()),
        );
        let bytes = a.to_bytes();
        let key = b"\"version\":1";
        let at = bytes.windows(key.len()).position(|w| w == key).unwrap();
        let mut bumped = bytes.clone();
        bumped[at + key.len() - 1] = b'2';
        assert!(matches!(
            Archive::from_bytes(&bumped),
            Err(ArchiveError::VersionMismatch { found: 2, .. })
        ));
        let mut flipped = bytes.clone();
        *flipped.last_mut().unwrap() ^= 1;
        assert!(matches!(Archive::from_bytes(&flipped), Err(ArchiveError::Corrupt(_))));
        assert!(matches!(
            Archive::from_bytes(&bytes[..bytes.len() - 1]),
            Err(ArchiveError::Corrupt(_))
        ));
        assert!(matches!(Archive::from_bytes(b"nope"), Err(ArchiveError::Corrupt(_))));
        assert!(matches!(a.mps("t"), Err(ArchiveError::WrongKind { .. })));
        assert!(matches!(a.get("u"), Err(ArchiveError::Missing(_))));
    }
}
