//! Binary and armored encodings for parameters, keys, ciphertexts and proofs.
//!
//! Every object is one TLV record (`tag: u8`, `len: u32 BE`, value) whose
//! value is a sequence of field records. Field tags are numbered from 1 in
//! declaration order; integers are minimal big-endian with zero as the empty
//! string. Unknown, duplicate, and missing fields are all rejected.
//!
//! Ciphertexts additionally have a packed form with no framing: `c` takes
//! exactly `ceil(|p|/8)` bytes (raw bytes for the improved scheme) and `r`,
//! `s` take `ceil(|q|/8)` bytes each.

use std::fmt;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::group::{GroupParams, KeyPair, PublicKey};
use crate::hashing::DIGEST_LEN;
use crate::improved::{ImprovedCiphertext, PublicProof, SchnorrSignature};
use crate::machen::{MaChenCiphertext, MaChenProof};
use crate::numeric::to_fixed_be;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("input truncated")]
    Truncated,
    #[error("{0} trailing bytes after record")]
    TrailingBytes(usize),
    #[error("expected record tag {expected:#04x}, found {found:#04x}")]
    BadTag { expected: u8, found: u8 },
    #[error("unknown field tag {0:#04x}")]
    UnknownField(u8),
    #[error("duplicate field {0}")]
    DuplicateField(&'static str),
    #[error("missing field {0}")]
    MissingField(&'static str),
    #[error("field {0} is not minimally encoded")]
    NonCanonical(&'static str),
    #[error("field {0} out of range")]
    OutOfRange(&'static str),
    #[error("field {0} is not valid UTF-8")]
    InvalidUtf8(&'static str),
    #[error("armor: {0}")]
    Armor(String),
}

pub type Result<T> = std::result::Result<T, CodecError>;

/// Object kinds, each with a record tag and an armor label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    GroupParams,
    PublicKey,
    SecretKey,
    McCiphertext,
    ImpCiphertext,
    Proof,
    McProof,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::GroupParams,
        Kind::PublicKey,
        Kind::SecretKey,
        Kind::McCiphertext,
        Kind::ImpCiphertext,
        Kind::Proof,
        Kind::McProof,
    ];

    pub fn tag(self) -> u8 {
        match self {
            Kind::GroupParams => 0x10,
            Kind::PublicKey => 0x11,
            Kind::SecretKey => 0x12,
            Kind::McCiphertext => 0x13,
            Kind::ImpCiphertext => 0x14,
            Kind::Proof => 0x15,
            Kind::McProof => 0x16,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Kind::GroupParams => "GROUP PARAMS",
            Kind::PublicKey => "PUBLIC KEY",
            Kind::SecretKey => "SECRET KEY",
            Kind::McCiphertext => "MC CIPHERTEXT",
            Kind::ImpCiphertext => "IMP CIPHERTEXT",
            Kind::Proof => "PROOF",
            Kind::McProof => "MC PROOF",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A proof bound to the parameter set and the claimed sender.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofEnvelope<P> {
    pub params_fingerprint: [u8; 32],
    pub sender: String,
    pub proof: P,
}

/// An object with a TLV encoding.
pub trait Record: Sized {
    const KIND: Kind;

    fn encode_fields(&self, out: &mut Vec<u8>);
    fn decode_fields(fields: Fields<'_>) -> Result<Self>;

    fn encode(&self) -> Vec<u8> {
        let mut body = Vec::new();
        self.encode_fields(&mut body);
        let mut out = Vec::with_capacity(body.len() + 5);
        push_tlv(&mut out, Self::KIND.tag(), &body);
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut reader = Reader { buf: bytes };
        let (tag, body) = reader.next()?.ok_or(CodecError::Truncated)?;
        if tag != Self::KIND.tag() {
            return Err(CodecError::BadTag {
                expected: Self::KIND.tag(),
                found: tag,
            });
        }
        if !reader.buf.is_empty() {
            return Err(CodecError::TrailingBytes(reader.buf.len()));
        }
        Self::decode_fields(Fields::parse(body)?)
    }
}

fn push_tlv(out: &mut Vec<u8>, tag: u8, value: &[u8]) {
    out.push(tag);
    out.extend_from_slice(&(value.len() as u32).to_be_bytes());
    out.extend_from_slice(value);
}

fn int_bytes(v: &BigUint) -> Vec<u8> {
    if v.is_zero() {
        Vec::new()
    } else {
        v.to_bytes_be()
    }
}

struct Writer<'a> {
    out: &'a mut Vec<u8>,
    next: u8,
}

impl<'a> Writer<'a> {
    fn new(out: &'a mut Vec<u8>) -> Self {
        Self { out, next: 1 }
    }

    fn bytes(&mut self, v: &[u8]) -> &mut Self {
        push_tlv(self.out, self.next, v);
        self.next += 1;
        self
    }

    fn int(&mut self, v: &BigUint) -> &mut Self {
        self.bytes(&int_bytes(v))
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<Option<(u8, &'a [u8])>> {
        if self.buf.is_empty() {
            return Ok(None);
        }
        if self.buf.len() < 5 {
            return Err(CodecError::Truncated);
        }
        let tag = self.buf[0];
        let len = u32::from_be_bytes([self.buf[1], self.buf[2], self.buf[3], self.buf[4]]) as usize;
        let rest = &self.buf[5..];
        if rest.len() < len {
            return Err(CodecError::Truncated);
        }
        let (value, tail) = rest.split_at(len);
        self.buf = tail;
        Ok(Some((tag, value)))
    }
}

/// Field records of one object, indexed by tag.
pub struct Fields<'a> {
    slots: [Option<&'a [u8]>; 16],
    dup: Option<u8>,
}

impl<'a> Fields<'a> {
    fn parse(body: &'a [u8]) -> Result<Self> {
        let mut slots = [None; 16];
        let mut dup = None;
        let mut reader = Reader { buf: body };
        while let Some((tag, value)) = reader.next()? {
            let idx = tag as usize;
            if idx == 0 || idx >= slots.len() {
                return Err(CodecError::UnknownField(tag));
            }
            if slots[idx].is_some() && dup.is_none() {
                dup = Some(tag);
            }
            slots[idx] = Some(value);
        }
        Ok(Self { slots, dup })
    }

    /// Checks that exactly the tags `1..=names.len()` are present.
    fn expect(&self, names: &[&'static str]) -> Result<()> {
        if let Some(i) = (names.len() + 1..self.slots.len()).find(|&i| self.slots[i].is_some()) {
            return Err(CodecError::UnknownField(i as u8));
        }
        if let Some(tag) = self.dup {
            return Err(CodecError::DuplicateField(names[tag as usize - 1]));
        }
        for (i, name) in names.iter().enumerate() {
            if self.slots[i + 1].is_none() {
                return Err(CodecError::MissingField(name));
            }
        }
        Ok(())
    }

    fn raw(&self, tag: u8) -> &'a [u8] {
        self.slots[tag as usize].unwrap_or_default()
    }

    fn int(&self, tag: u8, name: &'static str) -> Result<BigUint> {
        let raw = self.raw(tag);
        if raw.first() == Some(&0) {
            return Err(CodecError::NonCanonical(name));
        }
        Ok(BigUint::from_bytes_be(raw))
    }

    fn digest(&self, tag: u8, name: &'static str) -> Result<[u8; DIGEST_LEN]> {
        self.raw(tag)
            .try_into()
            .map_err(|_| CodecError::OutOfRange(name))
    }

    fn string(&self, tag: u8, name: &'static str) -> Result<String> {
        String::from_utf8(self.raw(tag).to_vec()).map_err(|_| CodecError::InvalidUtf8(name))
    }
}

impl Record for GroupParams {
    const KIND: Kind = Kind::GroupParams;

    fn encode_fields(&self, out: &mut Vec<u8>) {
        Writer::new(out).int(&self.p).int(&self.q).int(&self.g);
    }

    fn decode_fields(f: Fields<'_>) -> Result<Self> {
        f.expect(&["p", "q", "g"])?;
        let params = GroupParams {
            p: f.int(1, "p")?,
            q: f.int(2, "q")?,
            g: f.int(3, "g")?,
        };
        params
            .validate()
            .map_err(|_| CodecError::OutOfRange("params"))?;
        Ok(params)
    }
}

impl Record for PublicKey {
    const KIND: Kind = Kind::PublicKey;

    fn encode_fields(&self, out: &mut Vec<u8>) {
        Writer::new(out).int(&self.y);
    }

    fn decode_fields(f: Fields<'_>) -> Result<Self> {
        f.expect(&["y"])?;
        let y = f.int(1, "y")?;
        if y.is_zero() {
            return Err(CodecError::OutOfRange("y"));
        }
        Ok(PublicKey::new(y))
    }
}

impl Record for KeyPair {
    const KIND: Kind = Kind::SecretKey;

    fn encode_fields(&self, out: &mut Vec<u8>) {
        Writer::new(out).int(self.secret()).int(&self.public().y);
    }

    fn decode_fields(f: Fields<'_>) -> Result<Self> {
        f.expect(&["x", "y"])?;
        let x = f.int(1, "x")?;
        let y = f.int(2, "y")?;
        if x.is_zero() {
            return Err(CodecError::OutOfRange("x"));
        }
        Ok(KeyPair::from_raw(x, PublicKey::new(y)))
    }
}

impl Record for MaChenCiphertext {
    const KIND: Kind = Kind::McCiphertext;

    fn encode_fields(&self, out: &mut Vec<u8>) {
        Writer::new(out).int(&self.c).int(&self.r).int(&self.s);
    }

    fn decode_fields(f: Fields<'_>) -> Result<Self> {
        f.expect(&["c", "r", "s"])?;
        Ok(MaChenCiphertext {
            c: f.int(1, "c")?,
            r: f.int(2, "r")?,
            s: f.int(3, "s")?,
        })
    }
}

impl Record for ImprovedCiphertext {
    const KIND: Kind = Kind::ImpCiphertext;

    fn encode_fields(&self, out: &mut Vec<u8>) {
        Writer::new(out)
            .bytes(&self.c)
            .int(&self.sig.r)
            .int(&self.sig.s);
    }

    fn decode_fields(f: Fields<'_>) -> Result<Self> {
        f.expect(&["c", "r", "s"])?;
        Ok(ImprovedCiphertext {
            c: f.raw(1).to_vec(),
            sig: SchnorrSignature {
                r: f.int(2, "r")?,
                s: f.int(3, "s")?,
            },
        })
    }
}

impl Record for ProofEnvelope<PublicProof> {
    const KIND: Kind = Kind::Proof;

    fn encode_fields(&self, out: &mut Vec<u8>) {
        Writer::new(out)
            .bytes(&self.params_fingerprint)
            .bytes(self.sender.as_bytes())
            .bytes(&self.proof.m)
            .int(&self.proof.sig.r)
            .int(&self.proof.sig.s);
    }

    fn decode_fields(f: Fields<'_>) -> Result<Self> {
        f.expect(&["fingerprint", "sender", "m", "r", "s"])?;
        Ok(ProofEnvelope {
            params_fingerprint: f.digest(1, "fingerprint")?,
            sender: f.string(2, "sender")?,
            proof: PublicProof {
                m: f.raw(3).to_vec(),
                sig: SchnorrSignature {
                    r: f.int(4, "r")?,
                    s: f.int(5, "s")?,
                },
            },
        })
    }
}

impl Record for ProofEnvelope<MaChenProof> {
    const KIND: Kind = Kind::McProof;

    fn encode_fields(&self, out: &mut Vec<u8>) {
        Writer::new(out)
            .bytes(&self.params_fingerprint)
            .bytes(self.sender.as_bytes())
            .bytes(&self.proof.m_digest)
            .int(&self.proof.k1)
            .int(&self.proof.r)
            .int(&self.proof.s);
    }

    fn decode_fields(f: Fields<'_>) -> Result<Self> {
        f.expect(&["fingerprint", "sender", "m_digest", "k1", "r", "s"])?;
        Ok(ProofEnvelope {
            params_fingerprint: f.digest(1, "fingerprint")?,
            sender: f.string(2, "sender")?,
            proof: MaChenProof {
                m_digest: f.digest(3, "m_digest")?,
                k1: f.int(4, "k1")?,
                r: f.int(5, "r")?,
                s: f.int(6, "s")?,
            },
        })
    }
}

/// Any decodable object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Object {
    GroupParams(GroupParams),
    PublicKey(PublicKey),
    SecretKey(KeyPair),
    McCiphertext(MaChenCiphertext),
    ImpCiphertext(ImprovedCiphertext),
    Proof(ProofEnvelope<PublicProof>),
    McProof(ProofEnvelope<MaChenProof>),
}

impl Object {
    pub fn kind(&self) -> Kind {
        match self {
            Object::GroupParams(_) => Kind::GroupParams,
            Object::PublicKey(_) => Kind::PublicKey,
            Object::SecretKey(_) => Kind::SecretKey,
            Object::McCiphertext(_) => Kind::McCiphertext,
            Object::ImpCiphertext(_) => Kind::ImpCiphertext,
            Object::Proof(_) => Kind::Proof,
            Object::McProof(_) => Kind::McProof,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        match self {
            Object::GroupParams(o) => o.encode(),
            Object::PublicKey(o) => o.encode(),
            Object::SecretKey(o) => o.encode(),
            Object::McCiphertext(o) => o.encode(),
            Object::ImpCiphertext(o) => o.encode(),
            Object::Proof(o) => o.encode(),
            Object::McProof(o) => o.encode(),
        }
    }
}

/// Decodes a TLV record of the given kind.
pub fn decode(kind: Kind, bytes: &[u8]) -> Result<Object> {
    Ok(match kind {
        Kind::GroupParams => Object::GroupParams(Record::decode(bytes)?),
        Kind::PublicKey => Object::PublicKey(Record::decode(bytes)?),
        Kind::SecretKey => Object::SecretKey(Record::decode(bytes)?),
        Kind::McCiphertext => Object::McCiphertext(Record::decode(bytes)?),
        Kind::ImpCiphertext => Object::ImpCiphertext(Record::decode(bytes)?),
        Kind::Proof => Object::Proof(Record::decode(bytes)?),
        Kind::McProof => Object::McProof(Record::decode(bytes)?),
    })
}

fn fixed(v: &BigUint, width: usize, name: &'static str) -> Result<Vec<u8>> {
    to_fixed_be(v, width).ok_or(CodecError::OutOfRange(name))
}

fn unpack_int(raw: &[u8], bound: &BigUint, name: &'static str) -> Result<BigUint> {
    let v = BigUint::from_bytes_be(raw);
    if v >= *bound {
        return Err(CodecError::OutOfRange(name));
    }
    Ok(v)
}

/// Packed Ma-Chen ciphertext: exactly `|p| + 2|q|` bits rounded up per field.
pub fn pack_machen(ct: &MaChenCiphertext, params: &GroupParams) -> Result<Vec<u8>> {
    let mut out = fixed(&ct.c, params.p_bytes(), "c")?;
    out.extend(fixed(&ct.r, params.q_bytes(), "r")?);
    out.extend(fixed(&ct.s, params.q_bytes(), "s")?);
    Ok(out)
}

pub fn unpack_machen(bytes: &[u8], params: &GroupParams) -> Result<MaChenCiphertext> {
    let (pb, qb) = (params.p_bytes(), params.q_bytes());
    let want = pb + 2 * qb;
    if bytes.len() < want {
        return Err(CodecError::Truncated);
    }
    if bytes.len() > want {
        return Err(CodecError::TrailingBytes(bytes.len() - want));
    }
    let c = unpack_int(&bytes[..pb], &params.p, "c")?;
    if c.is_zero() {
        return Err(CodecError::OutOfRange("c"));
    }
    Ok(MaChenCiphertext {
        c,
        r: unpack_int(&bytes[pb..pb + qb], &params.q, "r")?,
        s: unpack_int(&bytes[pb + qb..], &params.q, "s")?,
    })
}

/// Packed improved ciphertext: raw `c` followed by fixed-width `r`, `s`.
pub fn pack_improved(ct: &ImprovedCiphertext, params: &GroupParams) -> Result<Vec<u8>> {
    let mut out = ct.c.clone();
    out.extend(fixed(&ct.sig.r, params.q_bytes(), "r")?);
    out.extend(fixed(&ct.sig.s, params.q_bytes(), "s")?);
    Ok(out)
}

pub fn unpack_improved(bytes: &[u8], params: &GroupParams) -> Result<ImprovedCiphertext> {
    let qb = params.q_bytes();
    if bytes.len() < 2 * qb {
        return Err(CodecError::Truncated);
    }
    let split = bytes.len() - 2 * qb;
    Ok(ImprovedCiphertext {
        c: bytes[..split].to_vec(),
        sig: SchnorrSignature {
            r: unpack_int(&bytes[split..split + qb], &params.q, "r")?,
            s: unpack_int(&bytes[split + qb..], &params.q, "s")?,
        },
    })
}

const ARMOR_WIDTH: usize = 64;

/// PEM-style text: header, base64 body in 64-column lines, footer.
pub fn armor(kind: Kind, bytes: &[u8]) -> String {
    let body = STANDARD.encode(bytes);
    let mut out = format!("-----BEGIN {}-----\n", kind.label());
    for line in body.as_bytes().chunks(ARMOR_WIDTH) {
        out.push_str(std::str::from_utf8(line).expect("base64 is ascii"));
        out.push('\n');
    }
    out.push_str(&format!("-----END {}-----\n", kind.label()));
    out
}

/// Inverse of [`armor`]. Any run of trailing line breaks (LF or CRLF) is
/// accepted; everything else must match exactly.
pub fn dearmor(kind: Kind, text: &str) -> Result<Vec<u8>> {
    let bad = |msg: &str| CodecError::Armor(msg.to_owned());
    let trimmed = text.trim_end_matches(['\n', '\r']);
    let lines: Vec<&str> = trimmed
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    if lines.len() < 2 {
        return Err(bad("missing header or footer"));
    }
    let header = format!("-----BEGIN {}-----", kind.label());
    let footer = format!("-----END {}-----", kind.label());
    if lines[0] != header {
        return Err(CodecError::Armor(format!("expected header {header:?}")));
    }
    if lines[lines.len() - 1] != footer {
        return Err(CodecError::Armor(format!("expected footer {footer:?}")));
    }
    let body = &lines[1..lines.len() - 1];
    for (i, line) in body.iter().enumerate() {
        let last = i + 1 == body.len();
        if line.is_empty() || line.len() > ARMOR_WIDTH || (!last && line.len() != ARMOR_WIDTH) {
            return Err(bad("body lines must be 64 columns wide"));
        }
    }
    STANDARD
        .decode(body.concat())
        .map_err(|e| CodecError::Armor(e.to_string()))
}

/// The kind named by an armor header, if any.
pub fn sniff_armor(text: &str) -> Option<Kind> {
    let first = text.lines().next()?;
    Kind::ALL
        .into_iter()
        .find(|k| first.trim_end() == format!("-----BEGIN {}-----", k.label()))
}
