//! Command-line front end. [`run`] is the whole program minus process exit,
//! so it can be driven from tests.
//!
//! Exit status: 0 on success or acceptance, 1 on a domain rejection (printed
//! as a single `REJECT <Reason>` line), 2 on usage or I/O errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cert::{parse_certificates, write_certificates, Certificate, FailureMode, ResumptionPolicy};
use crate::crypto::{derive_seed, KeyPair, SignatureScheme};
use crate::dc::{issue_dc, validate_dc, DcIssueError, DelegatedCredential};
use crate::encoding;
use crate::fixtures::{self, CertBuilder, FixtureError, FixtureSpec};
use crate::issuance::{issue_proxy, CertificateServer, IssuanceError, IssuanceSchedule, ProxyCsr};
use crate::keyfile;
use crate::matrix::{Matrix, MatrixError};
use crate::names::{DnsName, NameSet};
use crate::path;
use crate::session::{self, ScenarioContext, ScriptError};
use crate::time::{Instant, ValidityPeriod};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "proxycert", version, about = "Proxy-certificate PKI toolkit with simulated time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive a key pair deterministically from a seed and a label.
    Keygen {
        #[arg(long, default_value = "ed25519")]
        scheme: SignatureScheme,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        label: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the public key here.
        #[arg(long)]
        public_out: Option<PathBuf>,
    },
    /// Issue a self-signed trust anchor.
    IssueRoot {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        subject: String,
        #[command(flatten)]
        common: IssueArgs,
    },
    /// Issue an intermediate CA certificate.
    IssueCa {
        #[command(flatten)]
        issuer: IssuerArgs,
        /// Key of the new CA (public or private key document).
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        subject: String,
        /// Comma-separated permitted subtrees, e.g. `.example.com`.
        #[arg(long)]
        name_constraints: Option<String>,
        #[command(flatten)]
        common: IssueArgs,
    },
    /// Issue an end-entity certificate.
    IssueEe {
        #[command(flatten)]
        issuer: IssuerArgs,
        #[arg(long)]
        key: PathBuf,
        /// Common name (exact or `*.` wildcard).
        #[arg(long)]
        subject: String,
        /// Comma-separated subject alternative names.
        #[arg(long)]
        san: Option<String>,
        #[arg(long)]
        delegation_usage: bool,
        #[arg(long)]
        resumption_policy: Option<ResumptionPolicy>,
        #[command(flatten)]
        common: IssueArgs,
    },
    /// Create a proxy certificate signing request.
    Csr {
        #[arg(long)]
        key: PathBuf,
        /// Comma-separated requested names.
        #[arg(long)]
        names: String,
        #[arg(long)]
        resumption_policy: Option<ResumptionPolicy>,
        #[arg(long)]
        failure_mode: Option<FailureMode>,
        #[arg(long)]
        path_len: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Issue a proxy certificate below the last certificate of `--parent`.
    IssueProxy {
        #[arg(long)]
        parent: PathBuf,
        #[arg(long)]
        parent_key: PathBuf,
        #[arg(long)]
        csr: PathBuf,
        #[arg(long)]
        not_before: u64,
        #[arg(long)]
        not_after: u64,
        #[arg(long, default_value_t = 1)]
        serial: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Issue a delegated credential for the last certificate of `--ee`.
    IssueDc {
        #[arg(long)]
        ee: PathBuf,
        #[arg(long)]
        ee_key: PathBuf,
        #[arg(long)]
        dc_key: PathBuf,
        /// Seconds from `--at`.
        #[arg(long)]
        ttl: u64,
        #[arg(long)]
        scheme: SignatureScheme,
        #[arg(long)]
        at: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a certification path.
    ValidateChain {
        chain: PathBuf,
        /// Anchor file or directory of `.pcert` files.
        #[arg(long)]
        anchors: PathBuf,
        #[arg(long)]
        target: DnsName,
        #[arg(long)]
        at: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Validate a delegated credential against the last certificate of `--ee`.
    ValidateDc {
        dc: PathBuf,
        #[arg(long)]
        ee: PathBuf,
        /// Scheme the handshake signature uses.
        #[arg(long)]
        scheme: SignatureScheme,
        #[arg(long)]
        at: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Certificate server operations.
    Server {
        #[command(subcommand)]
        command: ServerCommand,
    },
    /// Run a session scenario script and print a tab-separated trace.
    Simulate {
        script: PathBuf,
        #[arg(long)]
        anchors: PathBuf,
        #[command(flatten)]
        server: ServerArgs,
    },
    /// Query the scheme comparison matrix.
    Matrix {
        /// Alternative data file.
        #[arg(long, global = true)]
        data: Option<PathBuf>,
        #[command(subcommand)]
        command: MatrixCommand,
    },
    /// Generate the deterministic test PKI.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Records,
}

#[derive(Debug, Args)]
pub struct IssuerArgs {
    /// Issuer certificate (the last certificate in the file is used).
    #[arg(long)]
    issuer: PathBuf,
    #[arg(long)]
    issuer_key: PathBuf,
}

#[derive(Debug, Args)]
pub struct IssueArgs {
    #[arg(long)]
    not_before: u64,
    #[arg(long)]
    not_after: u64,
    #[arg(long, default_value_t = 1)]
    serial: u64,
    #[arg(long)]
    path_len: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServerArgs {
    /// Parent chain ending in the certificate proxies are issued under.
    #[arg(long, requires_all = ["parent_key", "csr"])]
    parent: Option<PathBuf>,
    #[arg(long)]
    parent_key: Option<PathBuf>,
    #[arg(long)]
    csr: Option<PathBuf>,
    /// Schedule document; alternatively give --period and --validity.
    #[arg(long, conflicts_with_all = ["start", "period", "validity"])]
    schedule: Option<PathBuf>,
    /// First emission instant (with --period/--validity).
    #[arg(long, requires_all = ["period", "validity"])]
    start: Option<u64>,
    /// Seconds between emissions.
    #[arg(long, requires = "validity")]
    period: Option<u64>,
    /// Lifetime of each emitted certificate in seconds.
    #[arg(long, requires = "period")]
    validity: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum ServerCommand {
    /// Issue every certificate due up to `--until`, writing full chains to `--out`.
    Run {
        #[command(flatten)]
        server: ServerArgs,
        #[arg(long)]
        until: u64,
        /// Terminate the lease at this instant.
        #[arg(long)]
        terminate_at: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum MatrixCommand {
    /// Print the 19 levels of a scheme or combination label.
    Show {
        scheme: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Predict the profile of schemes deployed together.
    Combine {
        #[arg(required = true)]
        schemes: Vec<String>,
    },
    /// Check the data file and the combination calculus.
    Check,
}

#[derive(Debug, Subcommand)]
pub enum FixturesCommand {
    Generate {
        #[arg(long)]
        seed: Option<u64>,
        /// Spec file (`seed N` / `shapes ...`); `--seed` overrides its seed.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    /// Domain rejection; `run` prints the `REJECT` line.
    Reject(String),
    /// Domain rejection whose report has already been printed.
    Rejected,
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<IssuanceError> for Failure {
    fn from(e: IssuanceError) -> Self {
        match e {
            IssuanceError::NameEscalation { .. } => Failure::Reject("NameEscalation".into()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<DcIssueError> for Failure {
    fn from(e: DcIssueError) -> Self {
        match e {
            DcIssueError::Rejected(r) => Failure::Reject(r.to_string()),
            DcIssueError::Other(e) => e.into(),
        }
    }
}

impl From<MatrixError> for Failure {
    fn from(e: MatrixError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<FixtureError> for Failure {
    fn from(e: FixtureError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<ScriptError> for Failure {
    fn from(e: ScriptError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn load_chain(path: &Path) -> Result<Vec<Certificate>, Error> {
    parse_certificates(&read(path)?)
}

fn load_last(path: &Path) -> Result<Certificate, Error> {
    load_chain(path)?
        .pop()
        .ok_or_else(|| Error::Malformed(format!("{}: no certificate", path.display())))
}

fn load_key(path: &Path) -> Result<KeyPair, Error> {
    keyfile::parse_private_key(&read(path)?)
}

/// Anchors from a file, or from every `.pcert` in a directory (sorted).
pub fn load_anchors(path: &Path) -> Result<Vec<Certificate>, Error> {
    if !path.is_dir() {
        return load_chain(path);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pcert"))
        .collect();
    files.sort();
    let mut anchors = Vec::new();
    for f in files {
        anchors.extend(load_chain(f.as_path())?);
    }
    Ok(anchors)
}

fn window(not_before: u64, not_after: u64) -> Result<ValidityPeriod, Error> {
    ValidityPeriod::new(Instant(not_before), Instant(not_after))
}

#[derive(Serialize)]
struct ChainRecord {
    verdict: &'static str,
    reason: Option<&'static str>,
    effective_names: NameSet,
    path_split: usize,
    pst_trace: Vec<NameSet>,
}

#[derive(Serialize)]
struct DcRecord {
    verdict: &'static str,
    reason: Option<&'static str>,
    expiry: Option<Instant>,
}

type LoadedServer = (Vec<Certificate>, CertificateServer<KeyPair>);

fn load_server(args: &ServerArgs) -> Result<Option<LoadedServer>, Failure> {
    let (Some(parent), Some(key), Some(csr)) = (&args.parent, &args.parent_key, &args.csr) else {
        return Ok(None);
    };
    let schedule = match (&args.schedule, args.period, args.validity) {
        (Some(path), _, _) => IssuanceSchedule::from_document(&read(path)?)?,
        (None, Some(period), Some(validity)) => {
            IssuanceSchedule::new(Instant(args.start.unwrap_or(0)), period, validity)?
        }
        _ => return Err(Failure::Usage("--parent needs --schedule or --period and --validity".into())),
    };
    let chain = load_chain(parent)?;
    let last = chain
        .last()
        .cloned()
        .ok_or_else(|| Failure::Usage(format!("{}: no certificate", parent.display())))?;
    let csr = ProxyCsr::from_document(&read(csr)?)?;
    let server = CertificateServer::new(last, load_key(key)?, schedule, csr)?;
    Ok(Some((chain, server)))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Keygen { scheme, seed, label, out: path, public_out } => {
            let key = KeyPair::from_seed(scheme, derive_seed(seed, &label));
            write(&path, &keyfile::private_key_document(&key))?;
            if let Some(p) = public_out {
                write(&p, &keyfile::public_key_document(key.public_key()))?;
            }
            writeln!(out, "{}", key.public_key())?;
        }
        Command::IssueRoot { key, subject, common } => {
            let key = load_key(&key)?;
            let cert = CertBuilder::new(&subject, &key, common.not_before, common.not_after)
                .ca(common.path_len)
                .serial(common.serial)
                .self_signed(&key)?;
            write(&common.out, &cert.to_document())?;
            writeln!(out, "{}", cert.fingerprint_hex())?;
        }
        Command::IssueCa { issuer, key, subject, name_constraints, common } => {
            let parent = load_last(&issuer.issuer)?;
            let signer = load_key(&issuer.issuer_key)?;
            let public = keyfile::parse_public_key(&read(&key)?)?;
            let mut builder = CertBuilder::new(&subject, &signer, common.not_before, common.not_after)
                .ca(common.path_len)
                .serial(common.serial);
            if let Some(nc) = name_constraints {
                builder = builder.name_constraints(&nc);
            }
            let mut tbs = builder.tbs(&parent.subject_label(), signer.scheme())?;
            tbs.public_key = public;
            let cert = crate::sign_certificate(tbs, &signer)?;
            write(&common.out, &cert.to_document())?;
            writeln!(out, "{}", cert.fingerprint_hex())?;
        }
        Command::IssueEe { issuer, key, subject, san, delegation_usage, resumption_policy, common } => {
            let parent = load_last(&issuer.issuer)?;
            let signer = load_key(&issuer.issuer_key)?;
            let public = keyfile::parse_public_key(&read(&key)?)?;
            let sans: Vec<&str> = san.as_deref().map(|s| s.split(',').map(str::trim).collect()).unwrap_or_default();
            let mut builder = CertBuilder::new(&subject, &signer, common.not_before, common.not_after)
                .serial(common.serial)
                .sans(&sans);
            if let Some(n) = common.path_len {
                builder = builder.path_len(n);
            }
            if delegation_usage {
                builder = builder.delegation_usage();
            }
            if let Some(p) = resumption_policy {
                builder = builder.resumption_policy(p);
            }
            let mut tbs = builder.tbs(&parent.subject_label(), signer.scheme())?;
            tbs.public_key = public;
            let cert = crate::sign_certificate(tbs, &signer)?;
            write(&common.out, &cert.to_document())?;
            writeln!(out, "{}", cert.fingerprint_hex())?;
        }
        Command::Csr { key, names, resumption_policy, failure_mode, path_len, out: path } => {
            let public = keyfile::parse_public_key(&read(&key)?)?;
            let mut csr = ProxyCsr::new(public, NameSet::parse_list(&names)?)?;
            csr.resumption_policy = resumption_policy;
            csr.failure_mode = failure_mode;
            csr.path_len = path_len;
            write(&path, &csr.to_document())?;
            writeln!(out, "{}", csr.requested_names)?;
        }
        Command::IssueProxy { parent, parent_key, csr, not_before, not_after, serial, out: path } => {
            let parent = load_last(&parent)?;
            let signer = load_key(&parent_key)?;
            let csr = ProxyCsr::from_document(&read(&csr)?)?;
            let cert = issue_proxy(&parent, &signer, &csr, window(not_before, not_after)?, serial)?;
            write(&path, &cert.to_document())?;
            writeln!(out, "{}", cert.fingerprint_hex())?;
        }
        Command::IssueDc { ee, ee_key, dc_key, ttl, scheme, at, out: path } => {
            let ee = load_last(&ee)?;
            let signer = load_key(&ee_key)?;
            let dc_public = keyfile::parse_public_key(&read(&dc_key)?)?;
            let dc = issue_dc(&ee, &signer, dc_public, ttl, scheme, Instant(at))?;
            write(&path, &dc.to_document(&ee))?;
            writeln!(out, "expiry={}", dc.expiry(&ee))?;
        }
        Command::ValidateChain { chain, anchors, target, at, format } => {
            let certs = load_chain(&chain)?;
            let anchors = load_anchors(&anchors)?;
            let outcome = path::validate(&certs, &anchors, Instant(at), &target);
            match format {
                Format::Text => writeln!(out, "{}", outcome.report_line())?,
                Format::Records => {
                    let record = ChainRecord {
                        verdict: if outcome.is_accept() { "ACCEPT" } else { "REJECT" },
                        reason: outcome.reason.map(|r| r.code()),
                        effective_names: outcome.effective_names.clone(),
                        path_split: outcome.path_split,
                        pst_trace: outcome.pst_trace.clone(),
                    };
                    writeln!(out, "{}", encoding::canonical_string(&record))?;
                }
            }
            if !outcome.is_accept() {
                return Err(Failure::Rejected);
            }
        }
        Command::ValidateDc { dc, ee, scheme, at, format } => {
            let ee = load_last(&ee)?;
            let (credential, fingerprint) = DelegatedCredential::from_document(&read(&dc)?)?;
            let result = if fingerprint != ee.fingerprint_hex() {
                Err(crate::dc::DcReject::BadDcSignature)
            } else {
                validate_dc(&credential, &ee, Instant(at), scheme)
            };
            match format {
                Format::Text => match result {
                    Ok(()) => writeln!(out, "ACCEPT expiry={}", credential.expiry(&ee))?,
                    Err(r) => writeln!(out, "REJECT {r}")?,
                },
                Format::Records => {
                    let record = DcRecord {
                        verdict: if result.is_ok() { "ACCEPT" } else { "REJECT" },
                        reason: result.err().map(|r| r.code()),
                        expiry: result.is_ok().then(|| credential.expiry(&ee)),
                    };
                    writeln!(out, "{}", encoding::canonical_string(&record))?;
                }
            }
            if result.is_err() {
                return Err(Failure::Rejected);
            }
        }
        Command::Server { command: ServerCommand::Run { server, until, terminate_at, out: dir } } => {
            let (parent_chain, mut server) =
                load_server(&server)?.ok_or_else(|| Failure::Usage("server run needs --parent".into()))?;
            loop {
                let due = server.next_due();
                if terminate_at.is_some_and(|t| due.secs() >= t) {
                    server.terminate_lease();
                    writeln!(out, "LEASE terminated at={}", terminate_at.unwrap_or_default())?;
                    break;
                }
                if due.secs() > until {
                    break;
                }
                let Some(cert) = server.tick(due)? else { break };
                let mut chain = parent_chain.clone();
                chain.push(cert.clone());
                let file = dir.join(format!("proxy-{:04}.pcert", cert.tbs().serial));
                write(&file, &write_certificates(&chain))?;
                writeln!(
                    out,
                    "ISSUED serial={} window=[{},{}) file={}",
                    cert.tbs().serial,
                    cert.validity().not_before(),
                    cert.validity().not_after(),
                    file.display()
                )?;
            }
            if let Some(last) = server.latest() {
                writeln!(out, "last_not_after={}", last.not_after())?;
            }
        }
        Command::Simulate { script, anchors, server } => {
            let text = read(&script)?;
            let events = session::parse_script(&text)?;
            let base = script.parent().unwrap_or(Path::new("."));
            let mut ctx: ScenarioContext<KeyPair> = ScenarioContext::new(load_anchors(&anchors)?);
            for name in session::referenced_chains(&events) {
                let certs = load_chain(&base.join(&name))?;
                ctx.chains.insert(name, certs);
            }
            ctx.server = load_server(&server)?;
            let trace = session::run_scenario(&events, &mut ctx)?;
            write!(out, "{}", trace.to_tsv())?;
        }
        Command::Matrix { data, command } => {
            let owned;
            let matrix = match data {
                Some(p) => {
                    owned = Matrix::from_data(&read(&p)?)?;
                    &owned
                }
                None => Matrix::builtin(),
            };
            match command {
                MatrixCommand::Show { scheme, format } => {
                    let profile = match matrix.scheme(&scheme) {
                        Ok(s) => s.profile.clone(),
                        Err(e) => matrix.combination(&scheme).map(|c| c.profile.clone()).map_err(|_| e)?,
                    };
                    match format {
                        Format::Text => write!(out, "{}", profile.report())?,
                        Format::Records => writeln!(out, "{}", encoding::canonical_string(&(&profile.key, profile.glyphs())))?,
                    }
                }
                MatrixCommand::Combine { schemes } => {
                    let profile = matrix.combine(&schemes)?;
                    write!(out, "{}", profile.report())?;
                    writeln!(out, "R1\t{}", if profile.satisfies_r1() { "satisfied" } else { "not satisfied" })?;
                    writeln!(out, "R2\t{}", if profile.satisfies_r2() { "satisfied" } else { "not satisfied" })?;
                }
                MatrixCommand::Check => {
                    let report = matrix.check();
                    write!(out, "{}", report.report())?;
                    if !report.passed() {
                        return Err(Failure::Rejected);
                    }
                }
            }
        }
        Command::Fixtures { command: FixturesCommand::Generate { seed, spec, out: dir } } => {
            let mut spec = match (&spec, seed) {
                (Some(p), _) => FixtureSpec::parse(&read(p)?)?,
                (None, Some(seed)) => FixtureSpec::with_seed(seed),
                (None, None) => return Err(Failure::Usage("fixtures generate needs --seed or --spec".into())),
            };
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let set = fixtures::generate(&spec)?;
            set.write_to(&dir)?;
            writeln!(out, "wrote {} files to {}", set.files.len(), dir.display())?;
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Reject(r)) => {
            let _ = writeln!(out, "REJECT {r}");
            EXIT_REJECT
        }
        Err(Failure::Rejected) => EXIT_REJECT,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}
