//! Setup, key issue, encryption and proxy-assisted decryption.

use piratte::algebra::{random_gt, BilinearContext};
use piratte::policy::parse_policy;
use piratte::revocation::{conversion_request, convert, decrypt, encrypt, keygen, proxy_rekey, setup, RevocationList};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> piratte::Result<()> {
    let mut rng = ChaCha20Rng::from_entropy();
    // up to 4 users can be revoked at once
    let (pk, mut mk) = setup(&BilinearContext::default(), 4, &mut rng)?;
    let alice = keygen(&mut mk, "alice", ["doctor", "cardiology"], &mut rng)?;
    let pxk = proxy_rekey(&pk, &mut mk, &RevocationList::empty(), &mut rng)?;

    let policy = parse_policy("doctor and (cardiology or oncology)")?;
    let m = random_gt(&mut rng);
    let ct = encrypt(&pk, &m, &policy, &mut rng)?;

    // the user sends only the leaf components their key needs
    let request = conversion_request(&ct, &alice)?;
    let bundle = convert(&pxk, &request, alice.user_id())?;
    assert_eq!(decrypt(&ct, &alice, &bundle)?, m);
    println!("alice decrypted a {}-leaf ciphertext using {} converted leaves", ct.policy().leaf_count(), request.len());
    Ok(())
}
