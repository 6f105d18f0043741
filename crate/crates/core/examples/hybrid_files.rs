//! Arbitrary payloads: the ABE layer protects a random group element that
//! keys an AEAD over the data.

use piratte::algebra::BilinearContext;
use piratte::codec::{decode, encode, open_hybrid, seal_hybrid, HybridContainer};
use piratte::policy::parse_policy;
use piratte::revocation::{conversion_request, convert, keygen, proxy_rekey, setup, RevocationList};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> piratte::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let (pk, mut mk) = setup(&BilinearContext::default(), 2, &mut rng)?;
    let sk = keygen(&mut mk, "alice", ["finance"], &mut rng)?;
    let pxk = proxy_rekey(&pk, &mut mk, &RevocationList::empty(), &mut rng)?;

    let payload = b"quarterly numbers, do not forward".repeat(100);
    let container = seal_hybrid(&pk, &payload, &parse_policy("finance or audit")?, &mut rng)?;
    let bytes = encode(&container);
    println!("{} byte payload -> {} byte container", payload.len(), bytes.len());

    let container: HybridContainer = decode(&bytes)?;
    let bundle = convert(&pxk, &conversion_request(container.ciphertext(), &sk)?, sk.user_id())?;
    assert_eq!(open_hybrid(&container, &sk, &bundle)?, payload);
    println!("opened");

    let mut damaged = container.clone();
    damaged.tamper(10);
    println!("tampered container: {:?}", open_hybrid(&damaged, &sk, &bundle).err());
    Ok(())
}
