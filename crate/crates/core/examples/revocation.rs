//! Immediate revocation: one proxy rekey cuts a user off from old and new
//! ciphertexts, and an empty list restores them.

use piratte::algebra::{random_gt, BilinearContext};
use piratte::policy::parse_policy;
use piratte::revocation::{conversion_request, convert, decrypt, encrypt, keygen, proxy_rekey, setup, RevocationList};
use piratte::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> piratte::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let (pk, mut mk) = setup(&BilinearContext::default(), 2, &mut rng)?;
    let users: Vec<_> = ["alice", "bob", "carol"]
        .into_iter()
        .map(|u| Ok((u, keygen(&mut mk, u, ["staff"], &mut rng)?)))
        .collect::<piratte::Result<_>>()?;
    let m = random_gt(&mut rng);
    let ct = encrypt(&pk, &m, &parse_policy("staff")?, &mut rng)?;

    for revoke in [vec![], vec!["bob"], vec!["bob", "carol"], vec![]] {
        let rl = if revoke.is_empty() { RevocationList::empty() } else { mk.revocation_list(&revoke)? };
        let pxk = proxy_rekey(&pk, &mut mk, &rl, &mut rng)?;
        let mut line = format!("v{} revoked {:?}:", pxk.version(), revoke);
        for (name, sk) in &users {
            let outcome = match convert(&pxk, &conversion_request(&ct, sk)?, sk.user_id()) {
                Ok(bundle) if decrypt(&ct, sk, &bundle)? == m => "ok",
                Ok(_) => "wrong",
                Err(Error::RequesterRevoked) => "refused",
                Err(e) => return Err(e),
            };
            line.push_str(&format!(" {name}={outcome}"));
        }
        println!("{line}");
    }
    Ok(())
}
