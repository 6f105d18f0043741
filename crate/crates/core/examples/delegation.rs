//! A user hands a subset of their attributes to someone else. The delegated
//! key still decrypts through the proxy under the delegator's identity, so
//! revoking the delegator also revokes it.

use piratte::algebra::{random_gt, BilinearContext};
use piratte::delegation::{decrypt_delegated_single, delegate_single, delegated_single_request};
use piratte::policy::parse_policy;
use piratte::revocation::{conversion_request, convert, encrypt, keygen, proxy_rekey, setup, RevocationList};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> piratte::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let (pk, mut mk) = setup(&BilinearContext::default(), 2, &mut rng)?;
    let bob = keygen(&mut mk, "bob", ["friend", "colleague", "admin"], &mut rng)?;
    let pxk = proxy_rekey(&pk, &mut mk, &RevocationList::empty(), &mut rng)?;

    let m = random_gt(&mut rng);
    let ct = encrypt(&pk, &m, &parse_policy("friend or admin")?, &mut rng)?;
    // λ_k for bob comes back with any conversion
    let lambda_k = convert(&pxk, &conversion_request(&ct, &bob)?, bob.user_id())?.lambda_k;
    let dk = delegate_single(&bob, ["friend"], &pk, &lambda_k, &mut rng)?;

    let bundle = convert(&pxk, &delegated_single_request(&ct, &dk)?, dk.delegator_id())?;
    assert_eq!(decrypt_delegated_single(&ct, &dk, &bundle)?, m);
    println!("delegated key with {:?} decrypts", dk.attributes());

    let admin_only = encrypt(&pk, &m, &parse_policy("admin")?, &mut rng)?;
    println!("admin-only ciphertext: {:?}", delegated_single_request(&admin_only, &dk).err());

    let rl = mk.revocation_list(["bob"])?;
    let pxk = proxy_rekey(&pk, &mut mk, &rl, &mut rng)?;
    println!("after revoking bob: {:?}", convert(&pxk, &delegated_single_request(&ct, &dk)?, dk.delegator_id()).err());
    Ok(())
}
