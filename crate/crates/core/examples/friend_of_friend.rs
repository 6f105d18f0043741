//! Two authorities. A issues bob a key with "friend"; bob rewraps it for
//! carol, who is registered with B. Carol decrypts A's data with the help of
//! both proxies, and either authority can cut her off.

use piratte::algebra::{random_gt, BilinearContext};
use piratte::delegation::{decrypt_delegated_multi, delegate_multi, delegated_multi_request};
use piratte::policy::parse_policy;
use piratte::revocation::{convert, encrypt, keygen, proxy_rekey, setup, RevocationList};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> piratte::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let ctx = BilinearContext::default();
    let (pk_a, mut mk_a) = setup(&ctx, 2, &mut rng)?;
    let (pk_b, mut mk_b) = setup(&ctx, 2, &mut rng)?;
    let bob = keygen(&mut mk_a, "bob", ["friend"], &mut rng)?;
    keygen(&mut mk_b, "carol", ["member"], &mut rng)?;
    let carol = mk_b.identity("carol")?;
    let dk = delegate_multi(&bob, ["friend"], &mk_b, &carol)?;

    let m = random_gt(&mut rng);
    let ct = encrypt(&pk_a, &m, &parse_policy("family or friend")?, &mut rng)?;
    let leaves = delegated_multi_request(&ct, &dk)?;

    for (a_revokes, b_revokes) in [(false, false), (true, false), (false, true)] {
        let rl_a = if a_revokes { mk_a.revocation_list(["bob"])? } else { RevocationList::empty() };
        let rl_b = if b_revokes { mk_b.revocation_list(["carol"])? } else { RevocationList::empty() };
        let pxk_a = proxy_rekey(&pk_a, &mut mk_a, &rl_a, &mut rng)?;
        let pxk_b = proxy_rekey(&pk_b, &mut mk_b, &rl_b, &mut rng)?;
        let outcome = convert(&pxk_a, &leaves, dk.delegator_id())
            .and_then(|ba| Ok((ba, convert(&pxk_b, &leaves, dk.delegatee_id())?)))
            .and_then(|(ba, bb)| decrypt_delegated_multi(&ct, &dk, &ba, &bb));
        println!(
            "A revokes bob: {a_revokes:<5} B revokes carol: {b_revokes:<5} -> {}",
            match outcome {
                Ok(g) if g == m => "carol decrypts".to_string(),
                Ok(_) => "wrong plaintext".to_string(),
                Err(e) => format!("denied ({e})"),
            }
        );
    }
    Ok(())
}
