use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::algebra::random_gt;
use crate::attr::{attr_convert, attr_keygen, attr_proxy_rekey, attr_setup};
use crate::delegation::{delegate_multi, delegate_single};
use crate::policy::parse_policy;
use crate::revocation::{self, convert, keygen, proxy_rekey, setup};

fn rng() -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(90)
}

fn roundtrip<T: Wire + PartialEq + std::fmt::Debug>(value: &T) -> Vec<u8> {
    let bytes = encode(value);
    let back: T = decode(&bytes).unwrap();
    assert_eq!(&back, value);
    assert_eq!(encode(&back), bytes);
    bytes
}

fn sizes() -> SizeModel {
    SizeModel::new(BilinearContext::default().descriptor())
}

#[test]
fn all_components_roundtrip() {
    let mut rng = rng();
    let ctx = BilinearContext::default();
    let (pk, mut mk) = setup(&ctx, 3, &mut rng).unwrap();
    let sk = keygen(&mut mk, "alice", ["friend", "neighbor"], &mut rng).unwrap();
    keygen(&mut mk, "bob", ["friend"], &mut rng).unwrap();
    let rl = mk.revocation_list(["bob"]).unwrap();
    let pxk = proxy_rekey(&pk, &mut mk, &rl, &mut rng).unwrap();
    roundtrip(&pk);
    roundtrip(&mk);
    roundtrip(&sk);
    roundtrip(&pxk);
    let m = random_gt(&mut rng);
    let ct = revocation::encrypt(&pk, &m, &parse_policy("friend and (neighbor or 2 of (a, b, c))").unwrap(), &mut rng).unwrap();
    roundtrip(&ct);
    let leaves = revocation::conversion_request(&ct, &sk).unwrap();
    let req = ConversionRequest { user_id: *sk.user_id(), leaves: leaves.clone() };
    roundtrip(&req);
    let bundle = convert(&pxk, &leaves, sk.user_id()).unwrap();
    roundtrip(&bundle);
    let dk = delegate_single(&sk, ["friend"], &pk, &bundle.lambda_k, &mut rng).unwrap();
    roundtrip(&dk);
    let c_id = mk.identity("bob").unwrap();
    roundtrip(&delegate_multi(&sk, ["friend"], &mk, &c_id).unwrap());

    let (bpk, bmk) = bsw::setup(&ctx, &mut rng);
    roundtrip(&bpk);
    roundtrip(&bmk);
    roundtrip(&bsw::keygen(&bmk, ["x", "y"], &mut rng).unwrap());

    let (_, mut amk) = attr_setup(&ctx, 2, ["friend", "colleague"], &mut rng).unwrap();
    let ask = attr_keygen(&mut amk, "carol", ["friend", "colleague"], &mut rng).unwrap();
    let revs = amk.revocation_map([("carol", "friend")]).unwrap();
    let apxk = attr_proxy_rekey(&pk, &mut amk, &revs, &mut rng).unwrap();
    roundtrip(&amk);
    roundtrip(&apxk);
    let areq = AttrConversionRequest {
        user_id: *ask.user_id(),
        leaves: vec![(0, "friend".into(), ct.leaves()[0].c_prime), (1, "colleague".into(), ct.leaves()[1].c_prime), (2, "zzz".into(), ct.leaves()[1].c_prime)],
    };
    roundtrip(&areq);
    roundtrip(&attr_convert(&apxk, &areq.leaves, &areq.user_id).unwrap());

    let container = seal_hybrid(&pk, b"hello", &parse_policy("friend").unwrap(), &mut rng).unwrap();
    roundtrip(&container);
}

#[test]
fn header_and_truncation_errors() {
    let mut rng = rng();
    let (pk, mut mk) = setup(&BilinearContext::default(), 2, &mut rng).unwrap();
    let sk = keygen(&mut mk, "alice", ["friend"], &mut rng).unwrap();
    let bytes = encode(&sk);
    for cut in [0, 3, HEADER_BYTES, bytes.len() / 2, bytes.len() - 1] {
        assert!(matches!(decode::<SecretKey>(&bytes[..cut]), Err(Error::MalformedInput(_))), "cut {cut}");
    }
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(decode::<SecretKey>(&bad), Err(Error::MalformedInput(_))));
    let mut bad = bytes.clone();
    bad[5] = 9;
    assert!(matches!(decode::<SecretKey>(&bad), Err(Error::MalformedInput(_))));
    assert!(matches!(decode::<PublicKey>(&bytes), Err(Error::MalformedInput(_))));
    let mut long = bytes.clone();
    long.push(0);
    assert!(matches!(decode::<SecretKey>(&long), Err(Error::MalformedInput(_))));
    assert_eq!(peek_tag(&encode(&pk)).unwrap(), Tag::PublicKey);
}

#[test]
fn invalid_components_rejected() {
    let mut rng = rng();
    let (pk, mut mk) = setup(&BilinearContext::default(), 2, &mut rng).unwrap();
    let sk = keygen(&mut mk, "alice", ["friend"], &mut rng).unwrap();
    // User id is the first field: overwrite it with p itself.
    let mut bytes = encode(&sk);
    let p = BilinearContext::default().field_order();
    bytes[HEADER_BYTES + 2..HEADER_BYTES + 34].copy_from_slice(&p);
    assert!(matches!(decode::<SecretKey>(&bytes), Err(Error::InvalidComponent(_))));
    // Corrupt a G2 point.
    let mut bytes = encode(&sk);
    bytes[HEADER_BYTES + 34 + 2 + 10] ^= 0xff;
    assert!(decode::<SecretKey>(&bytes).is_err());
    // Mismatched context name.
    let mut bytes = encode(&pk);
    bytes[HEADER_BYTES + 2] = b'X';
    assert!(matches!(decode::<PublicKey>(&bytes), Err(Error::ContextMismatch(_))));
    // Threshold out of range inside a policy.
    let ct = revocation::encrypt(&pk, &random_gt(&mut rng), &parse_policy("a and b").unwrap(), &mut rng).unwrap();
    let mut bytes = encode(&ct);
    bytes[HEADER_BYTES + 4] = 3;
    assert!(matches!(decode::<Ciphertext>(&bytes), Err(Error::InvalidComponent(_))));
}

#[test]
fn size_model_is_exact() {
    let mut rng = rng();
    let s = sizes();
    let ctx = BilinearContext::default();
    let (pk, mut mk) = setup(&ctx, 4, &mut rng).unwrap();
    assert_eq!(encode(&pk).len(), s.public_key());
    assert_eq!(encode(&mk).len(), s.master_key(4));
    let (_, bmk) = bsw::setup(&ctx, &mut rng);
    assert_eq!(encode(&bmk).len(), s.bsw_master_key());
    for n in [1usize, 10, 100] {
        let attrs: Vec<String> = (0..n).map(|i| format!("attr{i}")).collect();
        let a: usize = attrs.iter().map(String::len).sum();
        let sk = keygen(&mut mk, &format!("u{n}"), &attrs, &mut rng).unwrap();
        assert_eq!(encode(&sk).len(), s.private_key(n, a));
        let bsk = bsw::keygen(&bmk, &attrs, &mut rng).unwrap();
        assert_eq!(encode(&bsk).len(), s.bsw_private_key(n, a));
        assert_eq!(s.private_key_slope() - s.bsw_private_key_slope(), 2 + ctx.descriptor().g1_bytes);
    }
    for policy in ["a", "a and bb", "2 of (a, b, (c or dd))"] {
        let tree = parse_policy(policy).unwrap();
        let a: usize = tree.leaves().iter().map(String::len).sum();
        let ct = revocation::encrypt(&pk, &random_gt(&mut rng), &tree, &mut rng).unwrap();
        assert_eq!(encode(&ct).len(), s.ciphertext(tree.internal_count(), tree.leaf_count(), a));
    }
    for t in [1usize, 5, 50] {
        let (pk, mut mk) = setup(&ctx, t, &mut rng).unwrap();
        let pxk = proxy_rekey(&pk, &mut mk, &revocation::RevocationList::empty(), &mut rng).unwrap();
        assert_eq!(encode(&pxk).len(), s.proxy_key(t));
    }
    let leaves: Vec<(usize, crate::algebra::G2)> = (0..7).map(|i| (i, crate::algebra::G2::default())).collect();
    let req = ConversionRequest { user_id: Scalar::from(5u64), leaves: leaves.clone() };
    assert_eq!(encode(&req).len(), s.bundle_request(7));
    let bundle = ConversionBundle { version: 1, lambda_k: Scalar::from(5u64), converted: leaves };
    assert_eq!(encode(&bundle).len(), s.bundle_response(7));
}

#[test]
fn hybrid_roundtrip_revocation_and_tamper() {
    let mut rng = rng();
    let (pk, mut mk) = setup(&BilinearContext::default(), 2, &mut rng).unwrap();
    let alice = keygen(&mut mk, "alice", ["friend"], &mut rng).unwrap();
    let bob = keygen(&mut mk, "bob", ["friend"], &mut rng).unwrap();
    let pxk = proxy_rekey(&pk, &mut mk, &revocation::RevocationList::empty(), &mut rng).unwrap();
    let payload: Vec<u8> = (0..(1 << 20)).map(|i| (i * 31 % 251) as u8).collect();
    let container = seal_hybrid(&pk, &payload, &parse_policy("friend").unwrap(), &mut rng).unwrap();
    let req = revocation::conversion_request(container.ciphertext(), &alice).unwrap();
    let bundle = convert(&pxk, &req, alice.user_id()).unwrap();
    assert_eq!(open_hybrid(&container, &alice, &bundle).unwrap(), payload);

    let rl = mk.revocation_list(["bob"]).unwrap();
    let pxk = proxy_rekey(&pk, &mut mk, &rl, &mut rng).unwrap();
    // Bob cannot get a bundle; one issued for Alice only yields garbage.
    assert_eq!(convert(&pxk, &req, bob.user_id()), Err(Error::RequesterRevoked));
    let borrowed = convert(&pxk, &req, alice.user_id()).unwrap();
    assert_eq!(open_hybrid(&container, &bob, &borrowed), Err(Error::DecryptionFailed));

    let mut tampered = container.clone();
    tampered.tamper(1000);
    assert_eq!(open_hybrid(&tampered, &alice, &borrowed), Err(Error::DecryptionFailed));
}

#[test]
fn revocation_map_encoding_is_sorted() {
    let mut rng = rng();
    let (pk, mut amk) = attr_setup(&BilinearContext::default(), 1, ["b", "a"], &mut rng).unwrap();
    let pxk = attr_proxy_rekey(&pk, &mut amk, &BTreeMap::new(), &mut rng).unwrap();
    let bytes = encode(&pxk);
    let mut r = Reader::new(&bytes[HEADER_BYTES..]);
    r.u64().unwrap();
    r.u32().unwrap();
    assert_eq!(r.str().unwrap(), "a");
}
