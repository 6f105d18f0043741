//! Per-attribute revocation: each attribute has its own polynomial, so a
//! user can lose one attribute and keep the rest.

use piratte::algebra::{random_gt, BilinearContext};
use piratte::attr::{attr_conversion_request, attr_convert, attr_decrypt, attr_keygen, attr_proxy_rekey, attr_setup};
use piratte::policy::parse_policy;
use piratte::revocation::encrypt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> piratte::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let attrs = ["friend", "colleague"];
    let (pk, mut mk) = attr_setup(&BilinearContext::default(), 2, attrs, &mut rng)?;
    let alice = attr_keygen(&mut mk, "alice", attrs, &mut rng)?;
    let map = mk.revocation_map([("alice", "friend")])?;
    let pxk = attr_proxy_rekey(&pk, &mut mk, &map, &mut rng)?;

    let m = random_gt(&mut rng);
    for policy in ["friend", "colleague", "friend or colleague", "friend and colleague"] {
        let ct = encrypt(&pk, &m, &parse_policy(policy)?, &mut rng)?;
        let bundle = attr_convert(&pxk, &attr_conversion_request(&ct, &alice)?, alice.user_id())?;
        let result = attr_decrypt(&ct, &alice, &bundle);
        println!(
            "{policy:<22} revoked leaves {:?} -> {}",
            bundle.revoked_leaves(),
            match result {
                Ok(g) if g == m => "decrypts".to_string(),
                Ok(_) => "wrong plaintext".to_string(),
                Err(e) => format!("denied ({e})"),
            }
        );
    }
    Ok(())
}
