//! The `piratte` command line.
//!
//! Exit codes: 0 success, 1 usage or policy syntax, 2 cryptographic
//! failure (revoked, unsatisfied policy, failed authentication), 3 I/O,
//! undecodable files or an unreachable proxy.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::rngs::OsRng;
use rand::RngCore;

use crate::algebra::{BilinearContext, Scalar, G2};
use crate::attr::{
    attr_conversion_request, attr_decrypt, attr_keygen, attr_proxy_rekey, attr_setup, AttrConversionBundle,
    AttrConversionRequest, AttrMasterKey,
};
use crate::bench::{run_suite, write_csv, BenchOptions, SUITES};
use crate::ciphertext::PublicKey;
use crate::codec::{self, open_with, seal_hybrid, HybridContainer, Tag, Wire};
use crate::delegation::{
    decrypt_delegated_multi, decrypt_delegated_single, delegate_multi, delegate_single, delegated_multi_request,
    delegated_single_request, DelegatedKeyMulti, DelegatedKeySingle,
};
use crate::error::{Error, Result};
use crate::policy::parse_policy;
use crate::proxy::{self, Mode, ProxyClient, ProxyConfig, ServedState};
use crate::revocation::{
    conversion_request, decrypt, keygen, proxy_rekey, setup, ConversionBundle, ConversionRequest, MasterKey,
    RevocationList, SecretKey,
};

#[derive(Debug, Parser)]
#[command(name = "piratte", version, about = "Attribute-based encryption with proxy-mediated revocation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create public, master and initial proxy keys plus a proxy config.
    Setup {
        /// Maximum number of simultaneously revoked users (polynomial degree).
        #[arg(long)]
        max_revoked: usize,
        #[arg(long, default_value = "key")]
        mode: Mode,
        /// Attributes to provision up front (attribute mode).
        #[arg(long, value_delimiter = ',')]
        attrs: Vec<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Issue a secret key; the master key file is updated in place.
    Keygen {
        #[arg(long)]
        mk: PathBuf,
        #[arg(long)]
        user: String,
        #[arg(long, value_delimiter = ',', required = true)]
        attrs: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a file under a policy.
    Enc {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        policy: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a file, converting through a proxy or a local proxy key.
    Dec {
        /// Secret key or delegated key.
        #[arg(long)]
        sk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, conflicts_with = "pxk", required_unless_present = "pxk")]
        proxy: Option<String>,
        #[arg(long)]
        pxk: Option<PathBuf>,
        /// Second authority's proxy for cross-authority delegated keys.
        #[arg(long, conflicts_with = "pxk_b")]
        proxy_b: Option<String>,
        #[arg(long)]
        pxk_b: Option<PathBuf>,
    },
    /// Rekey the proxy with the complete revoked set.
    Revoke {
        #[arg(long)]
        mk: PathBuf,
        #[arg(long)]
        pk: Option<PathBuf>,
        /// `user` in key mode, `user:attribute` in attribute mode. Empty un-revokes everyone.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        users: Vec<String>,
        #[arg(long, conflicts_with = "out", required_unless_present = "out")]
        push: Option<String>,
        /// Admin token; defaults to PIRATTE_PROXY_ADMIN_TOKEN.
        #[arg(long)]
        token: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Delegate a subset of a key, within one authority or to another authority's user.
    Delegate {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        attrs: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Public key, needed for same-authority delegation.
        #[arg(long, required_unless_present = "mk_b")]
        pk: Option<PathBuf>,
        /// Proxy to fetch the current coefficient from (same authority).
        #[arg(long, conflicts_with = "pxk")]
        proxy: Option<String>,
        #[arg(long)]
        pxk: Option<PathBuf>,
        /// Second authority's master key (cross-authority).
        #[arg(long, requires = "to")]
        mk_b: Option<PathBuf>,
        #[arg(long)]
        to: Option<String>,
    },
    /// Run the conversion service.
    Proxy {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a timing suite and write CSV.
    Bench {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long)]
        out: PathBuf,
        /// Reduced sweep.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        iterations: Option<usize>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::InvalidAttribute(_)
        | Error::InvalidAttributeSet
        | Error::InvalidDegree(_)
        | Error::Threshold { .. }
        | Error::NotASubset
        | Error::UnknownUser(_)
        | Error::RevocationCapacityExceeded { .. }
        | Error::ModeMismatch(_) => 1,
        Error::Io(_) | Error::MalformedInput(_) | Error::InvalidComponent(_) | Error::ContextMismatch(_) | Error::Transport(_) => 3,
        _ => 2,
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load<T: Wire>(path: &Path) -> Result<T> {
    codec::decode(&read(path)?)
}

fn save<T: Wire>(path: &Path, value: &T) -> Result<()> {
    write(path, &codec::encode(value))
}

fn execute(cmd: Command) -> Result<()> {
    let mut rng = OsRng;
    let ctx = BilinearContext::default();
    match cmd {
        Command::Setup {
            max_revoked,
            mode,
            attrs,
            out_dir,
        } => {
            fs::create_dir_all(&out_dir)?;
            let pk = match mode {
                Mode::Key => {
                    let (pk, mut mk) = setup(&ctx, max_revoked, &mut rng)?;
                    let pxk = proxy_rekey(&pk, &mut mk, &RevocationList::empty(), &mut rng)?;
                    save(&out_dir.join("master.mk"), &mk)?;
                    save(&out_dir.join("proxy.pxk"), &pxk)?;
                    pk
                }
                Mode::Attr => {
                    let (pk, mut mk) = attr_setup(&ctx, max_revoked, &attrs, &mut rng)?;
                    let pxk = attr_proxy_rekey(&pk, &mut mk, &BTreeMap::new(), &mut rng)?;
                    save(&out_dir.join("master.mk"), &mk)?;
                    save(&out_dir.join("proxy.pxk"), &pxk)?;
                    pk
                }
            };
            save(&out_dir.join("public.pk"), &pk)?;
            let mut token = [0u8; 16];
            rng.fill_bytes(&mut token);
            let token: String = token.iter().map(|b| format!("{b:02x}")).collect();
            let config = format!(
                "listen = \"127.0.0.1:8700\"\nmode = \"{mode}\"\nadmin_token = \"{token}\"\nproxy_key_path = \"proxy.pxk\"\n"
            );
            write(&out_dir.join("proxy.toml"), config.as_bytes())?;
            println!("wrote public.pk, master.mk, proxy.pxk and proxy.toml to {}", out_dir.display());
        }
        Command::Keygen { mk, user, attrs, out } => {
            let bytes = read(&mk)?;
            let sk = match codec::peek_tag(&bytes)? {
                Tag::MasterKey => {
                    let mut key: MasterKey = codec::decode(&bytes)?;
                    let sk = keygen(&mut key, &user, &attrs, &mut rng)?;
                    save(&mk, &key)?;
                    sk
                }
                Tag::AttrMasterKey => {
                    let mut key: AttrMasterKey = codec::decode(&bytes)?;
                    let sk = attr_keygen(&mut key, &user, &attrs, &mut rng)?;
                    save(&mk, &key)?;
                    sk
                }
                other => return Err(Error::MalformedInput(format!("{other:?} is not a master key"))),
            };
            save(&out, &sk)?;
            println!("issued key for {user} to {}", out.display());
        }
        Command::Enc { pk, policy, input, out } => {
            let tree = parse_policy(&policy)?;
            let pk: PublicKey = load(&pk)?;
            let payload = read(&input)?;
            let container = seal_hybrid(&pk, &payload, &tree, &mut rng)?;
            save(&out, &container)?;
        }
        Command::Dec {
            sk,
            input,
            out,
            proxy,
            pxk,
            proxy_b,
            pxk_b,
        } => {
            let container: HybridContainer = load(&input)?;
            let a = Converter::new(proxy, pxk)?;
            let key_bytes = read(&sk)?;
            let plain = match codec::peek_tag(&key_bytes)? {
                Tag::SecretKey => {
                    let sk: SecretKey = codec::decode(&key_bytes)?;
                    open_with(&container, |ct| match a.mode()? {
                        Mode::Key => decrypt(ct, &sk, &a.convert(*sk.user_id(), conversion_request(ct, &sk)?)?),
                        Mode::Attr => attr_decrypt(ct, &sk, &a.convert_attr(*sk.user_id(), attr_conversion_request(ct, &sk)?)?),
                    })?
                }
                Tag::DelegatedSingle => {
                    let dk: DelegatedKeySingle = codec::decode(&key_bytes)?;
                    open_with(&container, |ct| {
                        let bundle = a.convert(*dk.delegator_id(), delegated_single_request(ct, &dk)?)?;
                        decrypt_delegated_single(ct, &dk, &bundle)
                    })?
                }
                Tag::DelegatedMulti => {
                    let dk: DelegatedKeyMulti = codec::decode(&key_bytes)?;
                    let b = Converter::new(proxy_b, pxk_b)?;
                    open_with(&container, |ct| {
                        let leaves = delegated_multi_request(ct, &dk)?;
                        let bundle_a = a.convert(*dk.delegator_id(), leaves.clone())?;
                        let bundle_b = b.convert(*dk.delegatee_id(), leaves)?;
                        decrypt_delegated_multi(ct, &dk, &bundle_a, &bundle_b)
                    })?
                }
                other => return Err(Error::MalformedInput(format!("{other:?} is not a decryption key"))),
            };
            write(&out, &plain)?;
        }
        Command::Revoke {
            mk,
            pk,
            users,
            push,
            token,
            out,
        } => {
            let pk: PublicKey = match pk {
                Some(p) => load(&p)?,
                None => load(&mk.with_file_name("public.pk"))?,
            };
            let users: Vec<String> = users.into_iter().filter(|u| !u.is_empty()).collect();
            let bytes = read(&mk)?;
            let (pxk_bytes, version, mk_bytes) = match codec::peek_tag(&bytes)? {
                Tag::MasterKey => {
                    let mut key: MasterKey = codec::decode(&bytes)?;
                    let rl = key.revocation_list(&users)?;
                    let pxk = proxy_rekey(&pk, &mut key, &rl, &mut rng)?;
                    (codec::encode(&pxk), pxk.version(), codec::encode(&key))
                }
                Tag::AttrMasterKey => {
                    let mut key: AttrMasterKey = codec::decode(&bytes)?;
                    let pairs = users
                        .iter()
                        .map(|u| {
                            u.split_once(':')
                                .ok_or_else(|| Error::MalformedInput(format!("expected user:attribute, got {u:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let map = key.revocation_map(pairs)?;
                    let pxk = attr_proxy_rekey(&pk, &mut key, &map, &mut rng)?;
                    (codec::encode(&pxk), pxk.version(), codec::encode(&key))
                }
                other => return Err(Error::MalformedInput(format!("{other:?} is not a master key"))),
            };
            if let Some(path) = out {
                write(&path, &pxk_bytes)?;
            }
            if let Some(url) = push {
                let token = token
                    .or_else(|| std::env::var("PIRATTE_PROXY_ADMIN_TOKEN").ok())
                    .ok_or_else(|| Error::MalformedInput("--token or PIRATTE_PROXY_ADMIN_TOKEN required".into()))?;
                ProxyClient::new(url)?.rekey(&token, &pxk_bytes)?;
            }
            write(&mk, &mk_bytes)?;
            println!("proxy key version {version}");
        }
        Command::Delegate {
            sk,
            attrs,
            out,
            pk,
            proxy,
            pxk,
            mk_b,
            to,
        } => {
            let sk: SecretKey = load(&sk)?;
            match (mk_b, to) {
                (Some(mk_b), Some(to)) => {
                    let mk_b: MasterKey = load(&mk_b)?;
                    let c = mk_b.identity(&to)?;
                    save(&out, &delegate_multi(&sk, &attrs, &mk_b, &c)?)?;
                }
                _ => {
                    let pk: PublicKey = load(&pk.ok_or_else(|| Error::MalformedInput("--pk required".into()))?)?;
                    let conv = Converter::new(proxy, pxk)?;
                    let lambda_k = conv.convert(*sk.user_id(), vec![(0, G2::default())])?.lambda_k;
                    save(&out, &delegate_single(&sk, &attrs, &pk, &lambda_k, &mut rng)?)?;
                }
            }
        }
        Command::Proxy { config } => {
            let cfg = ProxyConfig::load(config.as_deref())?;
            let service = cfg.build_service()?;
            log::info!("serving {} mode, version {}", cfg.mode, service.info().version);
            proxy::serve(service, &cfg.listen)?;
        }
        Command::Bench {
            suite,
            out,
            quick,
            iterations,
        } => {
            let mut opts = if quick { BenchOptions::quick() } else { BenchOptions::default() };
            if let Some(n) = iterations {
                opts.iterations = n;
            }
            let rows = run_suite(&suite, &opts)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            write(&out, &buf)?;
        }
    }
    Ok(())
}

/// Conversion through a remote proxy or a local proxy key file.
enum Converter {
    Remote(ProxyClient),
    Local(ServedState),
    Missing,
}

impl Converter {
    fn new(url: Option<String>, pxk: Option<PathBuf>) -> Result<Self> {
        Ok(match (url, pxk) {
            (Some(u), _) => Converter::Remote(ProxyClient::new(u)?),
            (None, Some(p)) => Converter::Local(ServedState::from_bytes(&read(&p)?)?),
            (None, None) => Converter::Missing,
        })
    }

    fn missing() -> Error {
        Error::MalformedInput("a proxy URL or proxy key file is required".into())
    }

    fn mode(&self) -> Result<Mode> {
        match self {
            Converter::Remote(c) => Ok(c.info()?.mode),
            Converter::Local(s) => Ok(s.mode()),
            Converter::Missing => Err(Self::missing()),
        }
    }

    fn convert(&self, user_id: Scalar, leaves: Vec<(usize, G2)>) -> Result<ConversionBundle> {
        let req = ConversionRequest { user_id, leaves };
        match self {
            Converter::Remote(c) => c.convert(&req),
            Converter::Local(s) => s.convert(&req),
            Converter::Missing => Err(Self::missing()),
        }
    }

    fn convert_attr(
        &self,
        user_id: Scalar,
        leaves: Vec<(usize, String, G2)>,
    ) -> Result<AttrConversionBundle> {
        let req = AttrConversionRequest { user_id, leaves };
        match self {
            Converter::Remote(c) => c.convert_attr(&req),
            Converter::Local(s) => s.convert_attr(&req),
            Converter::Missing => Err(Self::missing()),
        }
    }
}
