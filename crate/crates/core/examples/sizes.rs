//! Encoded sizes of keys and ciphertexts against the closed-form model.

use piratte::algebra::{random_gt, BilinearContext};
use piratte::codec::{encode, SizeModel};
use piratte::policy::random::{attribute_universe, random_tree};
use piratte::revocation::{encrypt, keygen, proxy_rekey, setup, RevocationList};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> piratte::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let ctx = BilinearContext::default();
    let model = SizeModel::new(ctx.descriptor());
    println!("{}: per-attribute key growth {} bytes, per-leaf ciphertext growth {} bytes", ctx.name(), model.private_key_slope(), model.ciphertext_leaf_slope());

    let universe = attribute_universe(64);
    let (pk, mut mk) = setup(&ctx, 1, &mut rng)?;
    for n in [1, 8, 32, 64] {
        let attrs = &universe[..n];
        let sk = keygen(&mut mk, &format!("user{n}"), attrs, &mut rng)?;
        let a = attrs.iter().map(|s| s.len()).sum();
        println!("key with {n:>2} attributes: {:>6} bytes (model {})", encode(&sk).len(), model.private_key(n, a));
    }
    let m = random_gt(&mut rng);
    for l in [1, 8, 32, 64] {
        let ct = encrypt(&pk, &m, &random_tree(l, &universe, &mut rng), &mut rng)?;
        println!("ciphertext with {l:>2} leaves: {:>6} bytes", encode(&ct).len());
    }
    for t in [1, 10, 100] {
        let (pk, mut mk) = setup(&ctx, t, &mut rng)?;
        let pxk = proxy_rekey(&pk, &mut mk, &RevocationList::empty(), &mut rng)?;
        println!("proxy key for t={t:>3}: {:>6} bytes (model {})", encode(&pxk).len(), model.proxy_key(t));
    }
    Ok(())
}
