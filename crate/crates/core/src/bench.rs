//! Timing suites emitting `suite,param,value,impl,mean_s,ci95_s` rows.
//!
//! Implementations and sweep points are timed interleaved, so drift hits
//! every row alike. Each point gets warmup runs and then `iterations`
//! measured runs; iteration `i` uses random policy `i % 10`.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use ark_ec::PrimeGroup;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::statistics::{Data, Median};

use crate::algebra::{random_gt, random_nonzero_scalar, BilinearContext, Gt, G2};
use crate::ciphertext::Ciphertext;
use crate::delegation::{decrypt_delegated_single, delegate_single, delegated_single_request};
use crate::error::{Error, Result};
use crate::policy::random::{attribute_universe, random_tree};
use crate::policy::AccessTree;
use crate::proxy::{convert_precomputed, Precomputed};
use crate::revocation::{self, conversion_request, convert, proxy_rekey, RevocationList};
use crate::bsw;

pub const SUITES: [&str; 7] = ["keygen", "encrypt", "decrypt", "rekey", "convert", "precalc", "delegated-decrypt"];

const POLICIES_PER_POINT: usize = 10;
const UNIVERSE: usize = 100;

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub warmup: usize,
    pub iterations: usize,
    /// Attribute and leaf counts.
    pub sizes: Vec<usize>,
    /// Revoked-user counts for `rekey` and `precalc`.
    pub thresholds: Vec<usize>,
    /// Proxy key size for `convert` and the decrypt suites.
    pub convert_t: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        let mut sizes = vec![1];
        sizes.extend((5..=100).step_by(5));
        let mut thresholds = vec![1];
        thresholds.extend((100..=1000).step_by(100));
        BenchOptions {
            warmup: 2,
            iterations: 10,
            sizes,
            thresholds,
            convert_t: 500,
            seed: 2024,
        }
    }
}

impl BenchOptions {
    /// A reduced sweep that finishes in seconds.
    pub fn quick() -> Self {
        BenchOptions {
            warmup: 1,
            iterations: 10,
            sizes: vec![1, 5, 10, 25],
            thresholds: vec![1, 50, 100, 200],
            convert_t: 50,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub suite: String,
    pub param: String,
    pub value: usize,
    pub implementation: String,
    pub mean_s: f64,
    pub ci95_s: f64,
    /// Not written to CSV.
    pub median_s: f64,
}

pub const CSV_HEADER: &str = "suite,param,value,impl,mean_s,ci95_s";

pub fn write_csv<W: Write>(rows: &[Row], mut out: W) -> Result<()> {
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for r in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{:.9},{:.9}",
            r.suite, r.param, r.value, r.implementation, r.mean_s, r.ci95_s
        );
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Mean and half-width of the two-sided 95% Student-t interval.
pub fn mean_ci95(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)` points.
pub fn affine_fit(points: &[(f64, f64)]) -> AffineFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    AffineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Fit of one implementation's means against the swept value.
pub fn fit_rows(rows: &[Row], suite: &str, implementation: &str) -> AffineFit {
    fit_by(rows, suite, implementation, |r| r.mean_s)
}

/// Same over per-point medians, which shrug off bursts of outside load.
pub fn fit_medians(rows: &[Row], suite: &str, implementation: &str) -> AffineFit {
    fit_by(rows, suite, implementation, |r| r.median_s)
}

fn fit_by(rows: &[Row], suite: &str, implementation: &str, y: impl Fn(&Row) -> f64) -> AffineFit {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.suite == suite && r.implementation == implementation)
        .map(|r| (r.value as f64, y(r)))
        .collect();
    affine_fit(&pts)
}

type Job<'a> = (&'a str, Box<dyn FnMut(usize) -> Result<()> + 'a>);

/// Times every job at every sweep point. Iterations run round-robin over
/// all points, so a slow stretch of the machine is spread across the sweep
/// instead of landing on one point.
fn measure(suite: &str, param: &str, opts: &BenchOptions, mut points: Vec<(usize, Vec<Job<'_>>)>) -> Result<Vec<Row>> {
    for i in 0..opts.warmup {
        for (_, jobs) in points.iter_mut() {
            for (_, f) in jobs.iter_mut() {
                f(i)?;
            }
        }
    }
    let mut samples: Vec<Vec<Vec<f64>>> = points
        .iter()
        .map(|(_, jobs)| vec![Vec::with_capacity(opts.iterations); jobs.len()])
        .collect();
    for i in 0..opts.iterations {
        for ((_, jobs), out) in points.iter_mut().zip(samples.iter_mut()) {
            for ((_, f), out) in jobs.iter_mut().zip(out.iter_mut()) {
                let start = Instant::now();
                f(i)?;
                out.push(start.elapsed().as_secs_f64());
            }
        }
    }
    let mut rows = Vec::new();
    for ((value, jobs), samples) in points.iter().zip(samples) {
        for ((name, _), s) in jobs.iter().zip(samples) {
            let (mean_s, ci95_s) = mean_ci95(&s);
            let median_s = Data::new(s).median();
            log::debug!("{suite} {param}={value} {name}: {mean_s:.6}s ± {ci95_s:.6}");
            rows.push(Row {
                suite: suite.into(),
                param: param.into(),
                value: *value,
                implementation: (*name).into(),
                mean_s,
                ci95_s,
                median_s,
            });
        }
    }
    Ok(rows)
}

pub fn run_suite(name: &str, opts: &BenchOptions) -> Result<Vec<Row>> {
    if opts.iterations < 2 || opts.sizes.len() < 2 || opts.thresholds.len() < 2 {
        return Err(Error::MalformedInput("need at least 2 iterations and 2 sweep points".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let ctx = BilinearContext::default();
    let universe = attribute_universe(UNIVERSE);
    let policies = |l: usize, rng: &mut ChaCha20Rng| -> Vec<AccessTree> {
        (0..POLICIES_PER_POINT).map(|_| random_tree(l, &universe, rng)).collect()
    };
    match name {
        "keygen" => {
            let (_, bmk) = bsw::setup(&ctx, &mut rng);
            let mut mks = opts
                .sizes
                .iter()
                .map(|_| revocation::setup(&ctx, opts.convert_t.max(1), &mut rng).map(|(_, mk)| mk))
                .collect::<Result<Vec<_>>>()?;
            let bmk = &bmk;
            let points = opts
                .sizes
                .iter()
                .zip(mks.iter_mut())
                .map(|(&n, mk)| {
                    let attrs = &universe[..n.min(UNIVERSE)];
                    let mut r1 = ChaCha20Rng::seed_from_u64(opts.seed ^ n as u64);
                    let mut r2 = r1.clone();
                    let jobs: Vec<Job<'_>> = vec![
                        ("piratte", Box::new(move |_| revocation::keygen(mk, "bench", attrs, &mut r1).map(drop))),
                        ("bsw", Box::new(move |_| bsw::keygen(bmk, attrs, &mut r2).map(drop))),
                    ];
                    (n, jobs)
                })
                .collect();
            measure(name, "attributes", opts, points)
        }
        "encrypt" => {
            let (pk, _) = revocation::setup(&ctx, 1, &mut rng)?;
            let (bpk, _) = bsw::setup(&ctx, &mut rng);
            let m = random_gt(&mut rng);
            let trees: Vec<Vec<AccessTree>> = opts.sizes.iter().map(|&l| policies(l, &mut rng)).collect();
            let (pk, bpk, m) = (&pk, &bpk, &m);
            let points = opts
                .sizes
                .iter()
                .zip(&trees)
                .map(|(&l, trees)| {
                    let mut r1 = ChaCha20Rng::seed_from_u64(opts.seed ^ l as u64);
                    let mut r2 = r1.clone();
                    let jobs: Vec<Job<'_>> = vec![
                        (
                            "piratte",
                            Box::new(move |i| revocation::encrypt(pk, m, &trees[i % POLICIES_PER_POINT], &mut r1).map(drop)),
                        ),
                        (
                            "bsw",
                            Box::new(move |i| bsw::encrypt(bpk, m, &trees[i % POLICIES_PER_POINT], &mut r2).map(drop)),
                        ),
                    ];
                    (l, jobs)
                })
                .collect();
            measure(name, "leaves", opts, points)
        }
        "decrypt" | "delegated-decrypt" => {
            let (pk, mut mk) = revocation::setup(&ctx, opts.convert_t, &mut rng)?;
            let sk = revocation::keygen(&mut mk, "reader", &universe, &mut rng)?;
            let pxk = proxy_rekey(&pk, &mut mk, &RevocationList::empty(), &mut rng)?;
            let (bpk, bmk) = bsw::setup(&ctx, &mut rng);
            let bsk = bsw::keygen(&bmk, &universe, &mut rng)?;
            let lambda_k = convert(&pxk, &[(0, G2::generator())], sk.user_id())?.lambda_k;
            let dk = delegate_single(&sk, &universe, &pk, &lambda_k, &mut rng)?;
            let mut fixtures = Vec::new();
            for &l in &opts.sizes {
                let cts: Vec<(Gt, Ciphertext, Ciphertext)> = policies(l, &mut rng)
                    .iter()
                    .map(|t| {
                        let m = random_gt(&mut rng);
                        Ok((m, revocation::encrypt(&pk, &m, t, &mut rng)?, bsw::encrypt(&bpk, &m, t, &mut rng)?))
                    })
                    .collect::<Result<_>>()?;
                let bundles = cts
                    .iter()
                    .map(|(_, ct, _)| convert(&pxk, &conversion_request(ct, &sk)?, sk.user_id()))
                    .collect::<Result<Vec<_>>>()?;
                let dbundles = cts
                    .iter()
                    .map(|(_, ct, _)| convert(&pxk, &delegated_single_request(ct, &dk)?, dk.delegator_id()))
                    .collect::<Result<Vec<_>>>()?;
                fixtures.push((l, cts, bundles, dbundles));
            }
            let check = |got: Gt, want: &Gt| if &got == want { Ok(()) } else { Err(Error::DecryptionFailed) };
            let (sk, dk, bsk) = (&sk, &dk, &bsk);
            let points = fixtures
                .iter()
                .map(|(l, cts, bundles, dbundles)| {
                    let piratte: Job<'_> = (
                        "piratte",
                        Box::new(move |i| {
                            let k = i % POLICIES_PER_POINT;
                            check(revocation::decrypt(&cts[k].1, sk, &bundles[k])?, &cts[k].0)
                        }),
                    );
                    let other: Job<'_> = if name == "decrypt" {
                        (
                            "bsw",
                            Box::new(move |i| {
                                let k = i % POLICIES_PER_POINT;
                                check(bsw::decrypt(&cts[k].2, bsk)?, &cts[k].0)
                            }),
                        )
                    } else {
                        (
                            "delegated",
                            Box::new(move |i| {
                                let k = i % POLICIES_PER_POINT;
                                check(decrypt_delegated_single(&cts[k].1, dk, &dbundles[k])?, &cts[k].0)
                            }),
                        )
                    };
                    (*l, vec![piratte, other])
                })
                .collect();
            measure(name, "leaves", opts, points)
        }
        "rekey" => {
            let mut states = Vec::new();
            for &t in &opts.thresholds {
                let (pk, mut mk) = revocation::setup(&ctx, t, &mut rng)?;
                let ids: Vec<_> = (0..t)
                    .map(|i| mk.registry.enroll(&format!("user{i}"), &mut rng))
                    .collect::<Result<_>>()?;
                let rl = RevocationList::new(ids)?;
                states.push((t, pk, mk, rl));
            }
            let points = states
                .iter_mut()
                .map(|(t, pk, mk, rl)| {
                    let mut r = ChaCha20Rng::seed_from_u64(opts.seed ^ *t as u64);
                    let (pk, rl) = (&*pk, &*rl);
                    let jobs: Vec<Job<'_>> = vec![("piratte", Box::new(move |_| proxy_rekey(pk, mk, rl, &mut r).map(drop)))];
                    (*t, jobs)
                })
                .collect();
            measure(name, "revoked", opts, points)
        }
        "precalc" => {
            let keys = opts
                .thresholds
                .iter()
                .map(|&t| {
                    let (pk, mut mk) = revocation::setup(&ctx, t, &mut rng)?;
                    proxy_rekey(&pk, &mut mk, &RevocationList::empty(), &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let points = opts
                .thresholds
                .iter()
                .zip(&keys)
                .map(|(&t, pxk)| {
                    let jobs: Vec<Job<'_>> = vec![(
                        "piratte",
                        Box::new(move |_| {
                            std::hint::black_box(Precomputed::new(pxk.shares()));
                            Ok(())
                        }),
                    )];
                    (t, jobs)
                })
                .collect();
            measure(name, "revoked", opts, points)
        }
        "convert" => {
            let (pk, mut mk) = revocation::setup(&ctx, opts.convert_t, &mut rng)?;
            let pxk = proxy_rekey(&pk, &mut mk, &RevocationList::empty(), &mut rng)?;
            let pre = Precomputed::new(pxk.shares());
            let user = random_nonzero_scalar(&mut rng);
            let leaf_sets: Vec<Vec<(usize, G2)>> = opts
                .sizes
                .iter()
                .map(|&l| (0..l).map(|i| (i, G2::generator() * random_nonzero_scalar(&mut rng))).collect())
                .collect();
            let (pxk, pre, user) = (&pxk, &pre, &user);
            let points = opts
                .sizes
                .iter()
                .zip(&leaf_sets)
                .map(|(&l, leaves)| {
                    let jobs: Vec<Job<'_>> = vec![
                        (
                            "precomputed",
                            Box::new(move |_| convert_precomputed(pxk.version(), pre, leaves, user).map(drop)),
                        ),
                        ("direct", Box::new(move |_| convert(pxk, leaves, user).map(drop))),
                    ];
                    (l, jobs)
                })
                .collect();
            measure(name, "leaves", opts, points)
        }
        other => Err(Error::MalformedInput(format!("unknown suite {other:?}; expected one of {SUITES:?}"))),
    }
}
