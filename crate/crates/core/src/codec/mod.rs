//! Binary encoding of every key, ciphertext and proxy message.
//!
//! ```text
//! "PIR1" | tag: u8 | version: u8 | body
//! ```
//!
//! Group elements and scalars are written compressed behind a big-endian
//! `u16` length, as are UTF-8 strings. Counts, thresholds and leaf ids are
//! `u32`, key versions `u64`. Trees are written in preorder: `0` then the
//! attribute for a leaf, `1` then threshold and child count for a gate.
//! Decoding checks subgroup membership, canonical scalars and every type
//! invariant, and rejects trailing bytes.

mod hybrid;
mod size;

use std::collections::{BTreeMap, BTreeSet};

use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};

use crate::algebra::{scalar_from_bytes, scalar_to_bytes, BilinearContext, Gt, Polynomial, Scalar, Share, G1, G2, SCALAR_BYTES};
use crate::attr::{AttrConversionBundle, AttrConversionRequest, AttrMasterKey, AttrProxyKey, LeafOutcome};
use crate::bsw;
use crate::ciphertext::{Ciphertext, LeafComponent, PublicKey};
use crate::delegation::{DelegatedKeyMulti, DelegatedKeySingle, MultiAttributeKey};
use crate::error::{Error, Result};
use crate::policy::{AccessTree, Node};
use crate::revocation::{
    AttributeKey, ConversionBundle, ConversionRequest, MasterKey, ProxyKey, Registry, RevocationList, SecretKey,
};

pub use hybrid::{open_hybrid, open_with, seal_hybrid, HybridContainer};
pub use size::SizeModel;

pub const MAGIC: &[u8; 4] = b"PIR1";
pub const FORMAT_VERSION: u8 = 1;
/// Magic, tag and version.
pub const HEADER_BYTES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Tag {
    PublicKey = 1,
    MasterKey = 2,
    SecretKey = 3,
    Ciphertext = 4,
    ProxyKey = 5,
    BundleRequest = 6,
    BundleResponse = 7,
    DelegatedSingle = 8,
    DelegatedMulti = 9,
    HybridContainer = 10,
    BswMasterKey = 11,
    BswSecretKey = 12,
    AttrMasterKey = 13,
    AttrProxyKey = 14,
    AttrBundleRequest = 15,
    AttrBundleResponse = 16,
}

impl Tag {
    const ALL: [Tag; 16] = [
        Tag::PublicKey,
        Tag::MasterKey,
        Tag::SecretKey,
        Tag::Ciphertext,
        Tag::ProxyKey,
        Tag::BundleRequest,
        Tag::BundleResponse,
        Tag::DelegatedSingle,
        Tag::DelegatedMulti,
        Tag::HybridContainer,
        Tag::BswMasterKey,
        Tag::BswSecretKey,
        Tag::AttrMasterKey,
        Tag::AttrProxyKey,
        Tag::AttrBundleRequest,
        Tag::AttrBundleResponse,
    ];

    pub fn from_byte(b: u8) -> Result<Tag> {
        Tag::ALL
            .into_iter()
            .find(|t| *t as u8 == b)
            .ok_or_else(|| Error::MalformedInput(format!("unknown component tag {b}")))
    }

    /// Conventional file extension.
    pub fn extension(self) -> &'static str {
        match self {
            Tag::PublicKey => "pk",
            Tag::MasterKey | Tag::BswMasterKey | Tag::AttrMasterKey => "mk",
            Tag::SecretKey | Tag::BswSecretKey => "sk",
            Tag::Ciphertext | Tag::HybridContainer => "ct",
            Tag::ProxyKey | Tag::AttrProxyKey => "pxk",
            Tag::DelegatedSingle | Tag::DelegatedMulti => "dk",
            Tag::BundleRequest | Tag::AttrBundleRequest => "req",
            Tag::BundleResponse | Tag::AttrBundleResponse => "bundle",
        }
    }
}

/// A value with a wire body.
pub trait Wire: Sized {
    const TAG: Tag;
    fn write_body(&self, w: &mut Writer);
    fn read_body(r: &mut Reader<'_>) -> Result<Self>;
}

pub fn encode<T: Wire>(value: &T) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend_from_slice(MAGIC);
    w.u8(T::TAG as u8);
    w.u8(FORMAT_VERSION);
    value.write_body(&mut w);
    w.buf
}

pub fn decode<T: Wire>(bytes: &[u8]) -> Result<T> {
    let tag = peek_tag(bytes)?;
    if tag != T::TAG {
        return Err(Error::MalformedInput(format!(
            "expected component {:?}, found {:?}",
            T::TAG,
            tag
        )));
    }
    let mut r = Reader::new(&bytes[HEADER_BYTES..]);
    let value = T::read_body(&mut r)?;
    r.finish()?;
    Ok(value)
}

/// Validates the header and returns the component tag.
pub fn peek_tag(bytes: &[u8]) -> Result<Tag> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::MalformedInput("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::MalformedInput("bad magic".into()));
    }
    let tag = Tag::from_byte(bytes[4])?;
    if bytes[5] != FORMAT_VERSION {
        return Err(Error::MalformedInput(format!("unsupported format version {}", bytes[5])));
    }
    Ok(tag)
}

#[derive(Debug, Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("count fits in u32");
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn bytes16(&mut self, b: &[u8]) {
        let len = u16::try_from(b.len()).expect("field fits in u16 length");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(b);
    }

    pub fn bytes32(&mut self, b: &[u8]) {
        self.u32(b.len());
        self.buf.extend_from_slice(b);
    }

    pub fn str(&mut self, s: &str) {
        self.bytes16(s.as_bytes());
    }

    pub fn elem<T: CanonicalSerialize>(&mut self, e: &T) {
        let mut out = Vec::with_capacity(e.compressed_size());
        e.serialize_compressed(&mut out).expect("writing to a Vec cannot fail");
        self.bytes16(&out);
    }

    pub fn scalar(&mut self, s: &Scalar) {
        self.bytes16(&scalar_to_bytes(s));
    }
}

#[derive(Debug)]
pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::MalformedInput(format!(
                "truncated input: need {n} bytes at offset {}",
                self.pos
            )));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    pub fn u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        Ok(u64::from_be_bytes(b.try_into().expect("8 bytes")))
    }

    /// A count of items that each occupy at least `min_item` bytes; rejects
    /// counts the remaining input cannot hold.
    pub fn count(&mut self, min_item: usize) -> Result<usize> {
        let n = self.u32()?;
        if n.saturating_mul(min_item.max(1)) > self.data.len() - self.pos {
            return Err(Error::MalformedInput(format!("count {n} exceeds remaining input")));
        }
        Ok(n)
    }

    pub fn bytes16(&mut self) -> Result<&'a [u8]> {
        let b = self.take(2)?;
        let len = u16::from_be_bytes([b[0], b[1]]) as usize;
        self.take(len)
    }

    pub fn bytes32(&mut self) -> Result<&'a [u8]> {
        let len = self.u32()?;
        self.take(len)
    }

    pub fn str(&mut self) -> Result<String> {
        let b = self.bytes16()?;
        String::from_utf8(b.to_vec()).map_err(|_| Error::MalformedInput("string is not UTF-8".into()))
    }

    pub fn elem<T: CanonicalDeserialize>(&mut self) -> Result<T> {
        let b = self.bytes16()?;
        let mut cursor = b;
        let e = T::deserialize_compressed(&mut cursor)
            .map_err(|e| Error::InvalidComponent(format!("group element: {e}")))?;
        if !cursor.is_empty() {
            return Err(Error::MalformedInput("trailing bytes in group element".into()));
        }
        Ok(e)
    }

    pub fn g1(&mut self) -> Result<G1> {
        self.elem::<ark_bls12_381::G1Affine>().map(Into::into)
    }

    pub fn g2(&mut self) -> Result<G2> {
        self.elem::<ark_bls12_381::G2Affine>().map(Into::into)
    }

    pub fn gt(&mut self) -> Result<Gt> {
        self.elem::<Gt>()
    }

    pub fn scalar(&mut self) -> Result<Scalar> {
        let b = self.bytes16()?;
        if b.len() != SCALAR_BYTES {
            return Err(Error::MalformedInput(format!("scalar of {} bytes", b.len())));
        }
        scalar_from_bytes(b)
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos == self.data.len() {
            Ok(())
        } else {
            Err(Error::MalformedInput(format!(
                "{} trailing bytes",
                self.data.len() - self.pos
            )))
        }
    }
}

fn write_g1(w: &mut Writer, p: &G1) {
    w.elem(&ark_bls12_381::G1Affine::from(*p));
}

fn write_g2(w: &mut Writer, p: &G2) {
    w.elem(&ark_bls12_381::G2Affine::from(*p));
}

fn write_node(w: &mut Writer, node: &Node) {
    match node {
        Node::Leaf { attribute } => {
            w.u8(0);
            w.str(attribute);
        }
        Node::Gate { threshold, children } => {
            w.u8(1);
            w.u32(*threshold);
            w.u32(children.len());
            children.iter().for_each(|c| write_node(w, c));
        }
    }
}

const MAX_TREE_DEPTH: usize = 64;

fn read_node(r: &mut Reader<'_>, depth: usize) -> Result<Node> {
    if depth > MAX_TREE_DEPTH {
        return Err(Error::MalformedInput("policy tree too deep".into()));
    }
    match r.u8()? {
        0 => Ok(Node::Leaf { attribute: r.str()? }),
        1 => {
            let threshold = r.u32()?;
            let n = r.count(3)?;
            let children = (0..n).map(|_| read_node(r, depth + 1)).collect::<Result<_>>()?;
            Ok(Node::Gate { threshold, children })
        }
        other => Err(Error::MalformedInput(format!("unknown tree node kind {other}"))),
    }
}

pub fn write_tree(w: &mut Writer, tree: &AccessTree) {
    write_node(w, tree.root());
}

pub fn read_tree(r: &mut Reader<'_>) -> Result<AccessTree> {
    let root = read_node(r, 0)?;
    AccessTree::new(root).map_err(|e| Error::InvalidComponent(format!("policy: {e}")))
}

fn invalid(e: Error) -> Error {
    match e {
        Error::MalformedInput(_) | Error::InvalidComponent(_) => e,
        other => Error::InvalidComponent(other.to_string()),
    }
}

fn write_poly(w: &mut Writer, p: &Polynomial<Scalar>) {
    w.u32(p.coefficients().len());
    p.coefficients().iter().for_each(|c| w.scalar(c));
}

fn read_poly(r: &mut Reader<'_>) -> Result<Polynomial<Scalar>> {
    let n = r.count(2 + SCALAR_BYTES)?;
    let coeffs = (0..n).map(|_| r.scalar()).collect::<Result<Vec<_>>>()?;
    Polynomial::from_coefficients(coeffs).map_err(invalid)
}

fn write_registry(w: &mut Writer, reg: &Registry) {
    w.u32(reg.users().len());
    for (name, id) in reg.users() {
        w.str(name);
        w.scalar(id);
    }
    w.u32(reg.dummy_digests().len());
    reg.dummy_digests().iter().for_each(|d| w.bytes16(d));
}

fn read_registry(r: &mut Reader<'_>) -> Result<Registry> {
    let n = r.count(4 + SCALAR_BYTES)?;
    let mut users = BTreeMap::new();
    for _ in 0..n {
        let name = r.str()?;
        if users.insert(name, r.scalar()?).is_some() {
            return Err(Error::InvalidComponent("duplicate user name".into()));
        }
    }
    let n = r.count(34)?;
    let mut dummies = BTreeSet::new();
    for _ in 0..n {
        let d: [u8; 32] = r
            .bytes16()?
            .try_into()
            .map_err(|_| Error::MalformedInput("digest must be 32 bytes".into()))?;
        dummies.insert(d);
    }
    Registry::from_parts(users, dummies).map_err(invalid)
}

fn write_ids(w: &mut Writer, ids: &[Scalar]) {
    w.u32(ids.len());
    ids.iter().for_each(|u| w.scalar(u));
}

fn read_revocation_list(r: &mut Reader<'_>) -> Result<RevocationList> {
    let n = r.count(2 + SCALAR_BYTES)?;
    let ids = (0..n).map(|_| r.scalar()).collect::<Result<Vec<_>>>()?;
    RevocationList::new(ids).map_err(invalid)
}

fn write_shares(w: &mut Writer, shares: &[Share<Scalar>]) {
    w.u32(shares.len());
    for s in shares {
        w.scalar(&s.x);
        w.scalar(&s.y);
    }
}

fn read_shares(r: &mut Reader<'_>) -> Result<Vec<Share<Scalar>>> {
    let n = r.count(2 * (2 + SCALAR_BYTES))?;
    (0..n)
        .map(|_| Share::new(r.scalar()?, r.scalar()?))
        .collect::<Result<Vec<_>>>()
        .map_err(invalid)
}

fn read_leaf_id(r: &mut Reader<'_>) -> Result<usize> {
    r.u32()
}

impl Wire for PublicKey {
    const TAG: Tag = Tag::PublicKey;

    fn write_body(&self, w: &mut Writer) {
        w.str(BilinearContext::default().name());
        write_g1(w, &self.h);
        write_g2(w, &self.f);
        w.elem(&self.egg_alpha);
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        BilinearContext::default().check_name(&r.str()?)?;
        let pk = PublicKey {
            h: r.g1()?,
            f: r.g2()?,
            egg_alpha: r.gt()?,
        };
        if !pk.is_consistent() {
            return Err(Error::InvalidComponent("public key fails e(h, f) = e(g1, g2)".into()));
        }
        Ok(pk)
    }
}

impl Wire for bsw::MasterKey {
    const TAG: Tag = Tag::BswMasterKey;

    fn write_body(&self, w: &mut Writer) {
        w.scalar(self.beta());
        write_g2(w, self.g2_alpha());
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let beta = r.scalar()?;
        bsw::MasterKey::new(beta, r.g2()?).map_err(invalid)
    }
}

impl Wire for bsw::SecretKey {
    const TAG: Tag = Tag::BswSecretKey;

    fn write_body(&self, w: &mut Writer) {
        write_g2(w, self.d());
        w.u32(self.components().len());
        for (attr, k) in self.components() {
            w.str(attr);
            write_g2(w, &k.d);
            write_g1(w, &k.d_prime);
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let d = r.g2()?;
        let n = r.count(6)?;
        let mut components = BTreeMap::new();
        for _ in 0..n {
            let attr = r.str()?;
            let key = bsw::AttributeKey {
                d: r.g2()?,
                d_prime: r.g1()?,
            };
            if components.insert(attr, key).is_some() {
                return Err(Error::InvalidComponent("duplicate attribute".into()));
            }
        }
        bsw::SecretKey::new(d, components).map_err(invalid)
    }
}

impl Wire for MasterKey {
    const TAG: Tag = Tag::MasterKey;

    fn write_body(&self, w: &mut Writer) {
        w.scalar(&self.beta);
        write_g2(w, &self.g2_alpha);
        write_poly(w, &self.poly);
        write_registry(w, &self.registry);
        write_ids(w, self.revoked.ids());
        w.u64(self.version);
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let beta = r.scalar()?;
        let g2_alpha = r.g2()?;
        let poly = read_poly(r)?;
        let registry = read_registry(r)?;
        let revoked = read_revocation_list(r)?;
        let version = r.u64()?;
        MasterKey::from_parts(beta, g2_alpha, poly, registry, revoked, version).map_err(invalid)
    }
}

fn write_attribute_keys(w: &mut Writer, components: &BTreeMap<String, AttributeKey>) {
    w.u32(components.len());
    for (attr, k) in components {
        w.str(attr);
        write_g2(w, &k.d);
        write_g1(w, &k.d_prime);
        write_g1(w, &k.d_dprime);
    }
}

fn read_attribute_keys(r: &mut Reader<'_>) -> Result<BTreeMap<String, AttributeKey>> {
    let n = r.count(8)?;
    let mut components = BTreeMap::new();
    for _ in 0..n {
        let attr = r.str()?;
        let key = AttributeKey {
            d: r.g2()?,
            d_prime: r.g1()?,
            d_dprime: r.g1()?,
        };
        if components.insert(attr, key).is_some() {
            return Err(Error::InvalidComponent("duplicate attribute".into()));
        }
    }
    Ok(components)
}

impl Wire for SecretKey {
    const TAG: Tag = Tag::SecretKey;

    fn write_body(&self, w: &mut Writer) {
        w.scalar(self.user_id());
        write_g2(w, self.d());
        write_attribute_keys(w, self.components());
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let user_id = r.scalar()?;
        let d = r.g2()?;
        SecretKey::new(user_id, d, read_attribute_keys(r)?).map_err(invalid)
    }
}

impl Wire for Ciphertext {
    const TAG: Tag = Tag::Ciphertext;

    fn write_body(&self, w: &mut Writer) {
        write_tree(w, self.policy());
        w.elem(self.c_tilde());
        write_g1(w, self.c());
        w.u32(self.leaves().len());
        for leaf in self.leaves() {
            write_g1(w, &leaf.c);
            write_g2(w, &leaf.c_prime);
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let policy = read_tree(r)?;
        let c_tilde = r.gt()?;
        let c = r.g1()?;
        let n = r.count(4)?;
        let leaves = (0..n)
            .map(|_| {
                Ok(LeafComponent {
                    c: r.g1()?,
                    c_prime: r.g2()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ciphertext::new(policy, c_tilde, c, leaves).map_err(invalid)
    }
}

impl Wire for ProxyKey {
    const TAG: Tag = Tag::ProxyKey;

    fn write_body(&self, w: &mut Writer) {
        w.u64(self.version());
        write_shares(w, self.shares());
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let version = r.u64()?;
        ProxyKey::new(version, read_shares(r)?).map_err(invalid)
    }
}

impl Wire for ConversionRequest {
    const TAG: Tag = Tag::BundleRequest;

    fn write_body(&self, w: &mut Writer) {
        w.scalar(&self.user_id);
        w.u32(self.leaves.len());
        for (id, c) in &self.leaves {
            w.u32(*id);
            write_g2(w, c);
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let user_id = r.scalar()?;
        let n = r.count(6)?;
        let leaves = (0..n)
            .map(|_| Ok((read_leaf_id(r)?, r.g2()?)))
            .collect::<Result<_>>()?;
        Ok(ConversionRequest { user_id, leaves })
    }
}

impl Wire for ConversionBundle {
    const TAG: Tag = Tag::BundleResponse;

    fn write_body(&self, w: &mut Writer) {
        w.u64(self.version);
        w.scalar(&self.lambda_k);
        w.u32(self.converted.len());
        for (id, c) in &self.converted {
            w.u32(*id);
            write_g2(w, c);
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let version = r.u64()?;
        let lambda_k = r.scalar()?;
        let n = r.count(6)?;
        let converted = (0..n)
            .map(|_| Ok((read_leaf_id(r)?, r.g2()?)))
            .collect::<Result<_>>()?;
        Ok(ConversionBundle {
            version,
            lambda_k,
            converted,
        })
    }
}

impl Wire for DelegatedKeySingle {
    const TAG: Tag = Tag::DelegatedSingle;

    fn write_body(&self, w: &mut Writer) {
        w.scalar(self.delegator_id());
        write_g2(w, self.d());
        write_attribute_keys(w, self.components());
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let id = r.scalar()?;
        let d = r.g2()?;
        DelegatedKeySingle::new(id, d, read_attribute_keys(r)?).map_err(invalid)
    }
}

impl Wire for DelegatedKeyMulti {
    const TAG: Tag = Tag::DelegatedMulti;

    fn write_body(&self, w: &mut Writer) {
        w.scalar(self.delegator_id());
        w.scalar(self.delegatee_id());
        write_g2(w, self.d());
        w.u32(self.components().len());
        for (attr, k) in self.components() {
            w.str(attr);
            write_g2(w, &k.d);
            write_g1(w, &k.d_prime);
            write_g1(w, &k.d_dprime);
            write_g1(w, &k.d_tprime);
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let b = r.scalar()?;
        let c = r.scalar()?;
        let d = r.g2()?;
        let n = r.count(10)?;
        let mut components = BTreeMap::new();
        for _ in 0..n {
            let attr = r.str()?;
            let key = MultiAttributeKey {
                d: r.g2()?,
                d_prime: r.g1()?,
                d_dprime: r.g1()?,
                d_tprime: r.g1()?,
            };
            if components.insert(attr, key).is_some() {
                return Err(Error::InvalidComponent("duplicate attribute".into()));
            }
        }
        DelegatedKeyMulti::new(b, c, d, components).map_err(invalid)
    }
}

impl Wire for AttrMasterKey {
    const TAG: Tag = Tag::AttrMasterKey;

    fn write_body(&self, w: &mut Writer) {
        w.scalar(&self.beta);
        write_g2(w, &self.g2_alpha);
        w.u32(self.t);
        w.u32(self.polys.len());
        for (attr, p) in &self.polys {
            w.str(attr);
            write_poly(w, p);
        }
        write_registry(w, &self.registry);
        w.u32(self.revoked.len());
        for (attr, rl) in &self.revoked {
            w.str(attr);
            write_ids(w, rl.ids());
        }
        w.u64(self.version);
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let beta = r.scalar()?;
        let g2_alpha = r.g2()?;
        let t = r.u32()?;
        let n = r.count(6)?;
        let mut polys = BTreeMap::new();
        for _ in 0..n {
            let attr = r.str()?;
            if polys.insert(attr, read_poly(r)?).is_some() {
                return Err(Error::InvalidComponent("duplicate attribute".into()));
            }
        }
        let registry = read_registry(r)?;
        let n = r.count(6)?;
        let mut revoked = BTreeMap::new();
        for _ in 0..n {
            let attr = r.str()?;
            if revoked.insert(attr, read_revocation_list(r)?).is_some() {
                return Err(Error::InvalidComponent("duplicate attribute".into()));
            }
        }
        let version = r.u64()?;
        AttrMasterKey::from_parts(beta, g2_alpha, t, polys, registry, revoked, version).map_err(invalid)
    }
}

impl Wire for AttrProxyKey {
    const TAG: Tag = Tag::AttrProxyKey;

    fn write_body(&self, w: &mut Writer) {
        w.u64(self.version());
        w.u32(self.shares().len());
        for (attr, shares) in self.shares() {
            w.str(attr);
            write_shares(w, shares);
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let version = r.u64()?;
        let n = r.count(6)?;
        let mut shares = BTreeMap::new();
        for _ in 0..n {
            let attr = r.str()?;
            if shares.insert(attr, read_shares(r)?).is_some() {
                return Err(Error::InvalidComponent("duplicate attribute".into()));
            }
        }
        AttrProxyKey::new(version, shares).map_err(invalid)
    }
}

impl Wire for AttrConversionRequest {
    const TAG: Tag = Tag::AttrBundleRequest;

    fn write_body(&self, w: &mut Writer) {
        w.scalar(&self.user_id);
        w.u32(self.leaves.len());
        for (id, attr, c) in &self.leaves {
            w.u32(*id);
            w.str(attr);
            write_g2(w, c);
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let user_id = r.scalar()?;
        let n = r.count(8)?;
        let leaves = (0..n)
            .map(|_| Ok((read_leaf_id(r)?, r.str()?, r.g2()?)))
            .collect::<Result<_>>()?;
        Ok(AttrConversionRequest { user_id, leaves })
    }
}

impl Wire for AttrConversionBundle {
    const TAG: Tag = Tag::AttrBundleResponse;

    fn write_body(&self, w: &mut Writer) {
        w.u64(self.version);
        w.u32(self.leaves.len());
        for (id, outcome) in &self.leaves {
            w.u32(*id);
            match outcome {
                LeafOutcome::Converted { c_dprime, lambda_k } => {
                    w.u8(0);
                    write_g2(w, c_dprime);
                    w.scalar(lambda_k);
                }
                LeafOutcome::Revoked => w.u8(1),
                LeafOutcome::Unprovisioned => w.u8(2),
            }
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let version = r.u64()?;
        let n = r.count(5)?;
        let leaves = (0..n)
            .map(|_| {
                let id = read_leaf_id(r)?;
                let outcome = match r.u8()? {
                    0 => LeafOutcome::Converted {
                        c_dprime: r.g2()?,
                        lambda_k: r.scalar()?,
                    },
                    1 => LeafOutcome::Revoked,
                    2 => LeafOutcome::Unprovisioned,
                    other => return Err(Error::MalformedInput(format!("unknown leaf status {other}"))),
                };
                Ok((id, outcome))
            })
            .collect::<Result<_>>()?;
        Ok(AttrConversionBundle { version, leaves })
    }
}

#[cfg(test)]
mod tests;
