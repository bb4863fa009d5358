use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use umeb_core::channels::{self, WhReport};
use umeb_core::hadamard::{self, HadamardMatrix};
use umeb_core::packing::{self, EquiangularReport, IdentityReconstruction, ProjectionFamily};
use umeb_core::umeb::{self, FeasibilityReport, LineFeasibility, UmebCertificate, UnitaryFamily};
use umeb_core::{Tolerance, UmebPrime};

use crate::output::{read_file, to_json, to_pretty, write_file, Envelope};
use crate::{Cli, Command, Format, PrimeArgs, Verdict};

pub fn run(cli: &Cli, tol: &Tolerance) -> Result<Verdict> {
    match &cli.command {
        Command::Generate { prime, out } => generate(cli, tol, prime, out.as_deref()),
        Command::Umeb {
            prime,
            dual,
            out,
            cert,
        } => umeb_cmd(cli, tol, prime, *dual, out.as_deref(), cert.as_deref()),
        Command::Verify { input, report } => verify(cli, tol, input, report.as_deref()),
        Command::Feasibility { r, dmax, lines } => feasibility(cli, *r, *dmax, *lines),
        Command::WhCheck {
            prime,
            trials,
            seed,
            report,
        } => wh_check(cli, tol, prime, *trials, *seed, report.as_deref()),
        Command::Hadamard { order, out } => hadamard_cmd(cli, *order, out.as_deref()),
        Command::DemoIcosahedron { out, cert } => demo(cli, tol, out.as_deref(), cert.as_deref()),
    }
}

fn emit<T: Serialize>(cli: &Cli, envelope: &Envelope<T>, text: impl FnOnce() -> String) -> Result<()> {
    let rendered = match cli.format {
        Format::Json => to_pretty(envelope)? + "\n",
        Format::Text => text(),
    };
    let mut stdout = io::stdout().lock();
    match stdout.write_all(rendered.as_bytes()).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e).context("writing to stdout"),
        _ => Ok(()),
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn load_prime(args: &PrimeArgs) -> Result<UmebPrime> {
    let prime = match args.k {
        Some(k) => UmebPrime::with_nonresidue(args.p, k),
        None => UmebPrime::new(args.p),
    };
    prime.with_context(|| format!("invalid prime parameter p = {}", args.p))
}

/// Hadamard matrix of order `(p+1)/2` from a file or the built-in constructions.
fn load_hadamard(prime: &UmebPrime, path: Option<&Path>) -> Result<(HadamardMatrix, String)> {
    let order = prime.half() + 1;
    match path {
        Some(path) => {
            let bytes = read_file(path)?;
            let h: HadamardMatrix = serde_json::from_slice(&bytes)
                .with_context(|| format!("parsing Hadamard matrix from {}", path.display()))?;
            if h.order() != order {
                return Err(umeb_core::Error::HadamardOrderMismatch {
                    expected: order,
                    found: h.order(),
                })
                .with_context(|| format!("Hadamard matrix from {}", path.display()));
            }
            Ok((h, format!("file {}", path.display())))
        }
        None => {
            let plan = hadamard::plan(order).with_context(|| {
                format!("no built-in Hadamard construction for order {order}; supply one with --hadamard FILE")
            })?;
            Ok((plan.build()?, plan.to_string()))
        }
    }
}

fn build_family(args: &PrimeArgs) -> Result<(UmebPrime, ProjectionFamily, String)> {
    let prime = load_prime(args)?;
    let (h, how) = load_hadamard(&prime, args.hadamard.as_deref())?;
    let family = packing::build_chrss_family(&prime, &h)?;
    Ok((prime, family, how))
}

#[derive(Serialize)]
struct FamilyCheck {
    equiangular: EquiangularReport,
    identity: IdentityReconstruction,
    identity_passed: bool,
    verdict: bool,
}

fn check_family(family: &ProjectionFamily, tol: &Tolerance) -> Result<FamilyCheck> {
    let equiangular = packing::verify_equiangular(family, tol)?;
    let identity = packing::identity_reconstruction(family)?;
    let identity_passed = identity.max_dev <= tol.eps * family.len().max(1) as f64;
    Ok(FamilyCheck {
        verdict: equiangular.passed && identity_passed,
        equiangular,
        identity,
        identity_passed,
    })
}

fn family_text(check: &FamilyCheck) -> String {
    let e = &check.equiangular;
    format!(
        "projections: {} (d = {}, rank {})\n\
         target trace: {}/{}\n\
         pairs checked: {}\n\
         max |tr(PiPj) - beta|: {:.3e}\n\
         max idempotency dev: {:.3e}\n\
         max |tr(P) - r|: {:.3e}\n\
         Gram rank: {} (condition {:.3e})\n\
         identity: x = {}/{}, max |x*sum(P) - I|: {:.3e}\n\
         verdict: {}\n",
        e.count,
        e.d,
        e.r,
        e.beta_num,
        e.beta_den,
        e.pairs,
        e.max_angle_dev,
        e.max_idempotency_dev,
        e.max_rank_dev,
        e.gram_rank,
        e.gram_condition,
        check.identity.x_num,
        check.identity.x_den,
        check.identity.max_dev,
        mark(check.verdict),
    )
}

#[derive(Serialize)]
struct GenerateReport {
    p: u64,
    k: u64,
    hadamard: String,
    #[serde(flatten)]
    check: FamilyCheck,
}

fn generate(cli: &Cli, tol: &Tolerance, args: &PrimeArgs, out: Option<&Path>) -> Result<Verdict> {
    let (prime, family, how) = build_family(args)?;
    let bytes = to_json(&family)?;
    if let Some(out) = out {
        write_file(out, &bytes)?;
    }
    let check = check_family(&family, tol)?;
    let verdict = check.verdict;
    let report = GenerateReport {
        p: prime.p(),
        k: prime.k(),
        hadamard: how.clone(),
        check,
    };
    let env = Envelope::new("generate", &bytes, !cli.no_timestamp, report);
    emit(cli, &env, || {
        format!(
            "p = {}, k = {}, Hadamard: {how}\n{}",
            prime.p(),
            prime.k(),
            family_text(&env.body.check)
        )
    })?;
    Ok(verdict.into())
}

fn certificate_text(uf: &UnitaryFamily, cert: &UmebCertificate) -> String {
    let z = uf.z();
    let re = uf
        .re_z()
        .map(|r| r.to_string())
        .unwrap_or_else(|| format!("{}", z.re));
    let mut s = format!(
        "d = {}, cardinality {}\n\
         z = {re} + {:.17}i\n\
         max unitarity dev: {:.3e}\n\
         max |tr(Ui*Uj)|: {:.3e}\n\
         span rank: {} (symmetric span: {})\n\
         max antisymmetric overlap: {:.3e} (complement antisymmetric: {})\n\
         d odd: {}\n\
         CJ orthonormality dev: {:.3e}\n\
         unextendible: {}\n\
         verdict: {}\n",
        cert.d,
        cert.cardinality,
        z.im,
        cert.max_unitarity_dev,
        cert.max_orthogonality_dev,
        cert.span_rank,
        cert.symmetric_span,
        cert.max_complement_overlap,
        cert.complement_antisymmetric,
        cert.d_odd,
        cert.cj_orthonormality_dev,
        cert.unextendible_verdict,
        mark(cert.passed()),
    );
    for note in &cert.notes {
        s.push_str(&format!("note: {note}\n"));
    }
    s
}

#[derive(Serialize)]
struct CertificateBody<'a> {
    z: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    re_z: Option<String>,
    #[serde(flatten)]
    certificate: &'a UmebCertificate,
}

fn certificate_body<'a>(uf: &UnitaryFamily, cert: &'a UmebCertificate) -> CertificateBody<'a> {
    let z: Complex64 = uf.z();
    CertificateBody {
        z: [z.re, z.im],
        re_z: uf.re_z().map(|r| r.to_string()),
        certificate: cert,
    }
}

fn umeb_cmd(
    cli: &Cli,
    tol: &Tolerance,
    args: &PrimeArgs,
    dual: bool,
    out: Option<&Path>,
    cert_path: Option<&Path>,
) -> Result<Verdict> {
    let (_, mut family, _) = build_family(args)?;
    if dual {
        family = packing::dual_family(&family);
    }
    let uf = UnitaryFamily::from_family(&family)?;
    let bytes = to_json(&uf)?;
    if let Some(out) = out {
        write_file(out, &bytes)?;
    }
    let cert = umeb::certify_umeb(&uf, tol)?;
    let env = Envelope::new("umeb", &bytes, !cli.no_timestamp, certificate_body(&uf, &cert));
    if let Some(path) = cert_path {
        write_file(path, to_pretty(&env)?.as_bytes())?;
    }
    emit(cli, &env, || certificate_text(&uf, &cert))?;
    Ok(cert.passed().into())
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum VerifyBody<'a> {
    ProjectionFamily {
        #[serde(flatten)]
        check: FamilyCheck,
    },
    UnitaryFamily {
        #[serde(flatten)]
        certificate: CertificateBody<'a>,
    },
    Hadamard {
        order: usize,
        valid: bool,
    },
}

fn verify(cli: &Cli, tol: &Tolerance, input: &Path, report: Option<&Path>) -> Result<Verdict> {
    let bytes = read_file(input)?;
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", input.display()))?;
    let parse_err = || format!("importing {}", input.display());
    let (body, text, verdict);
    let (uf, cert);
    if value.get("projections").is_some() {
        let family: ProjectionFamily = serde_json::from_value(value).with_context(parse_err)?;
        let check = check_family(&family, tol)?;
        text = family_text(&check);
        verdict = check.verdict;
        body = VerifyBody::ProjectionFamily { check };
    } else if value.get("unitaries").is_some() {
        uf = serde_json::from_value::<UnitaryFamily>(value).with_context(parse_err)?;
        cert = umeb::certify_umeb(&uf, tol)?;
        text = certificate_text(&uf, &cert);
        verdict = cert.passed();
        body = VerifyBody::UnitaryFamily {
            certificate: certificate_body(&uf, &cert),
        };
    } else if value.get("rows").is_some() && value.get("order").is_some() {
        // Import re-validates H·Hᵀ = nI; an invalid matrix is a failed verdict.
        let (order, valid) = match serde_json::from_value::<HadamardMatrix>(value.clone()) {
            Ok(h) => (h.order(), h.is_valid()),
            Err(_) => (value["order"].as_u64().unwrap_or(0) as usize, false),
        };
        text = format!("Hadamard order {order}: {}\nverdict: {}\n", if valid { "valid" } else { "invalid" }, mark(valid));
        verdict = valid;
        body = VerifyBody::Hadamard { order, valid };
    } else {
        bail!(
            "{} is not a projection family, unitary family or Hadamard matrix",
            input.display()
        );
    }
    let env = Envelope::new("verify", &bytes, !cli.no_timestamp, body);
    if let Some(path) = report {
        write_file(path, to_pretty(&env)?.as_bytes())?;
    }
    emit(cli, &env, || text)?;
    Ok(verdict.into())
}

#[derive(Serialize)]
#[serde(untagged)]
enum FeasibilityTable {
    Ranks { r: u64, rows: Vec<FeasibilityReport> },
    Lines { rows: Vec<LineFeasibility> },
}

fn feasibility(cli: &Cli, r: Option<u64>, dmax: u64, lines: bool) -> Result<Verdict> {
    let (table, text) = if lines {
        let rows = umeb::line_feasibility_sweep(dmax)?;
        let mut text = String::from("rank-one lines\n   d  Re(z)        feasible\n");
        for row in &rows {
            text.push_str(&format!("{:>4}  {:<11}  {}\n", row.d, row.re_z.to_string(), row.feasible));
        }
        (FeasibilityTable::Lines { rows }, text)
    } else {
        let r = r.context("--r is required unless --lines is given")?;
        if r == 0 || dmax <= r {
            bail!("need 1 <= r < dmax (got r = {r}, dmax = {dmax})");
        }
        let rows = (r + 1..=dmax)
            .map(|d| umeb::feasibility(d, r))
            .collect::<umeb_core::Result<Vec<_>>>()?;
        let allowed = rows.first().map(|x| x.allowed_d_for_r.clone()).unwrap_or_default();
        let mut text = format!("rank r = {r}, allowed d = {allowed:?}\n   d  Re(z)        feasible\n");
        for row in &rows {
            text.push_str(&format!("{:>4}  {:<11}  {}\n", row.d, row.re_z.to_string(), row.feasible));
        }
        (FeasibilityTable::Ranks { r, rows }, text)
    };
    let key = format!("feasibility r={r:?} dmax={dmax} lines={lines}");
    let env = Envelope::new("feasibility", key.as_bytes(), !cli.no_timestamp, table);
    emit(cli, &env, || text)?;
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct WhCheckBody {
    #[serde(flatten)]
    report: WhReport,
    choi_rank: usize,
    symmetric_dimension: usize,
    rank_verdict: bool,
    overall: bool,
}

fn wh_check(
    cli: &Cli,
    tol: &Tolerance,
    args: &PrimeArgs,
    trials: usize,
    seed: u64,
    report_path: Option<&Path>,
) -> Result<Verdict> {
    let (_, family, _) = build_family(args)?;
    let uf = UnitaryFamily::from_family(&family)?;
    let cert = umeb::certify_umeb(&uf, tol)?;
    let dec = channels::umeb_decomposition(&uf, &cert)?;
    let report = channels::verify_decomposition(&dec, trials, seed, tol)?;
    let d = uf.d();
    let choi_rank = channels::choi_rank(
        |x| channels::wh_plus_apply(x).expect("square input"),
        d,
        tol,
    )?;
    let symmetric_dimension = d * (d + 1) / 2;
    let rank_verdict = choi_rank == symmetric_dimension && dec.len() == choi_rank;
    let body = WhCheckBody {
        overall: report.verdict && rank_verdict,
        report,
        choi_rank,
        symmetric_dimension,
        rank_verdict,
    };
    let bytes = to_json(&uf)?;
    let env = Envelope::new("wh-check", &bytes, !cli.no_timestamp, body);
    if let Some(path) = report_path {
        write_file(path, to_pretty(&env)?.as_bytes())?;
    }
    let b = &env.body;
    emit(cli, &env, || {
        format!(
            "d = {}, {} unitaries, weights 2/(d(d+1))\n\
             Choi deviation: {:.3e} (reference check {:.3e}) {}\n\
             max apply deviation over {} trials (seed {}): {:.3e} {}\n\
             Choi rank of WH+: {} (decomposition size {}) {}\n\
             verdict: {}\n",
            b.report.d,
            b.report.terms,
            b.report.choi_dev,
            b.report.choi_reference_dev,
            mark(b.report.choi_verdict),
            b.report.trials,
            b.report.seed,
            b.report.apply_dev_max,
            mark(b.report.apply_verdict),
            b.choi_rank,
            b.report.terms,
            mark(b.rank_verdict),
            mark(b.overall),
        )
    })?;
    Ok(env.body.overall.into())
}

#[derive(Serialize)]
struct HadamardBody {
    order: usize,
    construction: String,
    valid: bool,
}

fn hadamard_cmd(cli: &Cli, order: usize, out: Option<&Path>) -> Result<Verdict> {
    let plan = hadamard::plan(order).ok_or(umeb_core::Error::UnsupportedOrder(order))?;
    let h = plan.build()?;
    let bytes = to_json(&h)?;
    if let Some(out) = out {
        write_file(out, &bytes)?;
    }
    let valid = h.is_valid();
    let body = HadamardBody {
        order,
        construction: plan.to_string(),
        valid,
    };
    let env = Envelope::new("hadamard", &bytes, !cli.no_timestamp, body);
    emit(cli, &env, || {
        format!("order {order} via {plan}\n{h}verdict: {}\n", mark(valid))
    })?;
    Ok(valid.into())
}

#[derive(Serialize)]
struct DemoBody<'a> {
    family: FamilyCheck,
    certificate: CertificateBody<'a>,
    werner_holevo: WhReport,
    verdict: bool,
}

fn demo(cli: &Cli, tol: &Tolerance, out: Option<&Path>, cert_path: Option<&Path>) -> Result<Verdict> {
    let family = packing::icosahedron_lines();
    let check = check_family(&family, tol)?;
    let uf = UnitaryFamily::from_family(&family)?;
    let bytes = to_json(&uf)?;
    if let Some(out) = out {
        write_file(out, &bytes)?;
    }
    let cert = umeb::certify_umeb(&uf, tol)?;
    let wh = match channels::umeb_decomposition(&uf, &cert) {
        Ok(dec) => channels::verify_decomposition(&dec, 20, 42, tol)?,
        Err(e) => bail!("decomposition unavailable: {e}"),
    };
    let verdict = check.verdict && cert.passed() && wh.verdict;
    let text = format!(
        "icosahedron lines in d = 3\n{}{}Werner-Holevo: Choi dev {:.3e}, apply dev {:.3e} {}\nverdict: {}\n",
        family_text(&check),
        certificate_text(&uf, &cert),
        wh.choi_dev,
        wh.apply_dev_max,
        mark(wh.verdict),
        mark(verdict),
    );
    let body = DemoBody {
        family: check,
        certificate: certificate_body(&uf, &cert),
        werner_holevo: wh,
        verdict,
    };
    let env = Envelope::new("demo-icosahedron", &bytes, !cli.no_timestamp, body);
    if let Some(path) = cert_path {
        write_file(path, to_pretty(&env)?.as_bytes())?;
    }
    emit(cli, &env, || text)?;
    Ok(verdict.into())
}
