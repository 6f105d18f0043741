//! Runs the HTTP proxy in-process, converts over the wire, then pushes a
//! rekey through the admin endpoint.

use std::sync::Arc;

use piratte::algebra::{random_gt, BilinearContext};
use piratte::codec::encode;
use piratte::policy::parse_policy;
use piratte::proxy::{spawn, ProxyClient, ProxyService, ServedState};
use piratte::revocation::{conversion_request, decrypt, encrypt, keygen, proxy_rekey, setup, ConversionRequest, RevocationList};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> piratte::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let (pk, mut mk) = setup(&BilinearContext::default(), 3, &mut rng)?;
    let alice = keygen(&mut mk, "alice", ["ops"], &mut rng)?;
    let pxk = proxy_rekey(&pk, &mut mk, &RevocationList::empty(), &mut rng)?;

    let server = spawn(Arc::new(ProxyService::new(ServedState::from_key(pxk), "admin-secret")), "127.0.0.1:0")?;
    let client = ProxyClient::new(server.url())?;
    println!("proxy at {} serving {:?}", server.url(), client.info()?);

    let m = random_gt(&mut rng);
    let ct = encrypt(&pk, &m, &parse_policy("ops")?, &mut rng)?;
    let req = ConversionRequest {
        user_id: *alice.user_id(),
        leaves: conversion_request(&ct, &alice)?,
    };
    let bundle = client.convert(&req)?;
    assert_eq!(decrypt(&ct, &alice, &bundle)?, m);
    println!("converted at version {}", bundle.version);

    let rl = mk.revocation_list(["alice"])?;
    let next = proxy_rekey(&pk, &mut mk, &rl, &mut rng)?;
    println!("rekey with a bad token: {:?}", client.rekey("guess", &encode(&next)).err());
    println!("rekey installed version {}", client.rekey("admin-secret", &encode(&next))?);
    println!("convert after revocation: {:?}", client.convert(&req).err());
    server.stop();
    Ok(())
}
