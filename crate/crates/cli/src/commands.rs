use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rdkit_core::audit::{audit_compare, AuditRecord, SingularLimitRow};
use rdkit_core::channel::{synthesize_encoder_decoder_si, StructureReport};
use rdkit_core::verify::{
    check_conditional_mean, gray_check, mi_identities, sample_joint, GrayReport, McConfig, McReport,
    MiIdentities, IDENTITY_TOL,
};
use rdkit_core::waterfill::{rate_at, rd_curve, rdf_conditional};
use serde::Serialize;

use crate::record::{CommandEcho, RealizationRecord, RunRecord};
use crate::scenario::{parse_scenario, Scenario, Units};
use crate::{CliError, Command, Common, Mode};

const THREADS_VAR: &str = "RDKIT_THREADS";
const GRAY_TOL: f64 = 1e-9;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn load(common: &Common) -> Result<(Scenario, Units), CliError> {
    let text = fs::read_to_string(&common.scenario).map_err(|e| io_err(&common.scenario, e))?;
    let scenario = parse_scenario(&text)
        .map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", common.scenario.display())),
            other => other,
        })?;
    let units = common.units.unwrap_or(scenario.units);
    Ok((scenario, units))
}

fn positive(flag: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Input(format!("--{flag} must be a positive finite number, got {value}")))
    }
}

/// Write `text` to `path`, or to `stdout` when no path is given.
fn emit(out: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_err(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

fn say(stdout: &mut dyn Write, line: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(stdout, "{line}").map_err(|e| CliError::Input(format!("stdout: {e}")))
}

fn thread_cap() -> Result<usize, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(0),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Input(format!("{THREADS_VAR} must be a positive integer, got {s:?}"))),
        },
        Err(e) => Err(CliError::Input(format!("{THREADS_VAR}: {e}"))),
    }
}

pub(crate) fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Rdf { common, distortion, mode } => rdf(&common, distortion, mode, stdout),
        Command::Realize { common, distortion } => realize(&common, distortion, stdout),
        Command::Sweep { common, dmin, dmax, points, mode } => sweep(&common, dmin, dmax, points, mode, stdout),
        Command::Verify { common, distortion, samples, seed } => verify(&common, distortion, samples, seed, stdout),
        Command::Audit { common, distortion } => audit(&common, distortion, stdout),
    }
}

#[derive(Serialize)]
struct RdfOutput {
    mode: &'static str,
    distortion: f64,
    rate_nats: f64,
    rate_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditional_rate_nats: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equality_gap_nats: Option<f64>,
}

fn rdf(common: &Common, distortion: f64, mode: Mode, stdout: &mut dyn Write) -> Result<(), CliError> {
    let d = positive("distortion", distortion)?;
    let (scenario, units) = load(common)?;
    let spec = &scenario.spec;
    let rate = rate_at(spec, d, mode.curve_mode())?;
    say(stdout, format_args!("{} [{}] R({d}) = {} {units}", scenario.name, mode.as_str(), units.convert(rate)))?;

    let mut output = RdfOutput {
        mode: mode.as_str(),
        distortion: d,
        rate_nats: rate,
        rate_bits: Units::Bits.convert(rate),
        conditional_rate_nats: None,
        equality_gap_nats: None,
    };
    let mut equality_fails = false;
    if mode == Mode::DecoderOnly {
        let conditional = rdf_conditional(spec, d)?.0.rate_nats();
        let gap = (rate - conditional).abs();
        equality_fails = gap > IDENTITY_TOL * conditional.max(1.0);
        say(
            stdout,
            format_args!(
                "decoder-only rate I(X;Z) - I(Y;Z) = {} {units} equals conditional rate R_X|Y = {} {units}: {} (|difference| = {gap:.3e} nats)",
                units.convert(rate),
                units.convert(conditional),
                if equality_fails { "NO" } else { "yes" },
            ),
        )?;
        output.conditional_rate_nats = Some(conditional);
        output.equality_gap_nats = Some(gap);
    }
    let echo = CommandEcho {
        name: "rdf".into(),
        distortion: Some(d),
        mode: Some(mode.as_str().into()),
        units: Some(units.as_str().into()),
        ..Default::default()
    };
    emit(common.out.as_ref(), &RunRecord::new(echo, &scenario, None, output).to_json(), stdout)?;
    if equality_fails {
        return Err(CliError::ChecksFailed("decoder-only rate differs from the conditional rate".into()));
    }
    Ok(())
}

fn realize(common: &Common, distortion: f64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let d = positive("distortion", distortion)?;
    let (scenario, units) = load(common)?;
    let real = synthesize_encoder_decoder_si(&scenario.spec, d)?;
    let echo = CommandEcho {
        name: "realize".into(),
        distortion: Some(d),
        units: Some(units.as_str().into()),
        ..Default::default()
    };
    let record = RunRecord::new(echo, &scenario, None, RealizationRecord::from_realization(&real, d)?);
    let text = record.to_json();

    // Validate what will actually be written, after a parse round trip.
    let reparsed: RunRecord<RealizationRecord> =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("realization round trip: {e}")))?;
    let report = reparsed.outputs.validate()?;

    say(
        stdout,
        format_args!(
            "{} realization at distortion {d}: rate {} {units}, {} active coordinate(s), worst structural residual {:.3e}",
            scenario.name,
            units.convert(real.rate_nats),
            real.gains.iter().filter(|&&h| h > 0.0).count(),
            report.worst()
        ),
    )?;
    emit(common.out.as_ref(), &text, stdout)
}

fn sweep(
    common: &Common,
    dmin: f64,
    dmax: f64,
    points: usize,
    mode: Mode,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let dmin = positive("dmin", dmin)?;
    let dmax = positive("dmax", dmax)?;
    if dmin > dmax {
        return Err(CliError::Input(format!("--dmin {dmin} exceeds --dmax {dmax}")));
    }
    if points < 2 {
        return Err(CliError::Input(format!("--points must be at least 2, got {points}")));
    }
    let (scenario, _) = load(common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap()?)
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let curve = pool.install(|| rd_curve(&scenario.spec, dmin, dmax, points, mode.curve_mode()))?;
    if curve.convexity_warning {
        eprintln!("warning: sampled curve is not convex to within 1e-9");
    }
    let mut csv = String::from("distortion,rate_nats,rate_bits\n");
    for p in &curve.points {
        csv.push_str(&format!("{},{},{}\n", p.distortion, p.rate_nats, Units::Bits.convert(p.rate_nats)));
    }
    emit(common.out.as_ref(), &csv, stdout)?;
    if let Some(path) = &common.out {
        say(stdout, format_args!("wrote {} point(s) to {}", curve.points.len(), path.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Checks {
    structure: bool,
    mi_identities: bool,
    gray: bool,
    monte_carlo: bool,
}

#[derive(Serialize)]
struct VerifyOutput {
    distortion: f64,
    rate_nats: f64,
    rate_bits: f64,
    structure: StructureReport,
    mi_identities: MiIdentities,
    gray: GrayReport,
    monte_carlo: McReport,
    checks: Checks,
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "[PASS]"
    } else {
        "[FAIL]"
    }
}

fn verify(
    common: &Common,
    distortion: f64,
    samples: usize,
    seed: u64,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let d = positive("distortion", distortion)?;
    let cfg = McConfig {
        n_samples: samples,
        seed,
        ..McConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Input(format!("--samples: {e}")))?;
    let (scenario, units) = load(common)?;
    let spec = &scenario.spec;

    let real = synthesize_encoder_decoder_si(spec, d)?;
    let structure = real.structure_report();
    let ids = mi_identities(spec, &real)?;
    let gray = gray_check(spec, d)?;
    let draws = sample_joint(spec, &real.auxiliary(), &cfg)?;
    let mc = check_conditional_mean(&draws, real.sigma_delta.trace(), cfg.confidence_sigmas)?;

    let checks = Checks {
        structure: structure.holds(),
        mi_identities: ids.holds(),
        gray: gray.gap >= -GRAY_TOL && (!gray.in_region || gray.gap.abs() <= GRAY_TOL),
        monte_carlo: mc.pass.all(),
    };
    say(stdout, format_args!("{} at distortion {d}: rate {} {units}", scenario.name, units.convert(real.rate_nats)))?;
    say(stdout, format_args!("{} structure: worst residual {:.3e}", mark(checks.structure), structure.worst()))?;
    say(
        stdout,
        format_args!("{} information identities: spread {:.3e} nats", mark(checks.mi_identities), ids.spread()),
    )?;
    say(
        stdout,
        format_args!(
            "{} gray bound: gap {:.3e} nats ({} equality region, bound {})",
            mark(checks.gray),
            gray.gap,
            if gray.in_region { "inside" } else { "outside" },
            gray.region_bound
        ),
    )?;
    say(
        stdout,
        format_args!(
            "{} monte carlo (N = {}, seed {seed}): distortion {:.6} vs {:.6} (se {:.2e}); E[X | X^, Y] = X^: {}, no Y term: {}{}",
            mark(checks.monte_carlo),
            mc.n_samples,
            mc.empirical_distortion,
            mc.target_distortion,
            mc.distortion_se,
            mc.pass.xhat_identity,
            mc.pass.y_zero,
            if mc.rank_deficient { " (regressors rank deficient)" } else { "" }
        ),
    )?;

    let all = checks.structure && checks.mi_identities && checks.gray && checks.monte_carlo;
    let output = VerifyOutput {
        distortion: d,
        rate_nats: real.rate_nats,
        rate_bits: Units::Bits.convert(real.rate_nats),
        structure,
        mi_identities: ids,
        gray,
        monte_carlo: mc,
        checks,
    };
    let echo = CommandEcho {
        name: "verify".into(),
        distortion: Some(d),
        units: Some(units.as_str().into()),
        samples: Some(samples),
        ..Default::default()
    };
    emit(common.out.as_ref(), &RunRecord::new(echo, &scenario, Some(seed), output).to_json(), stdout)?;
    if !all {
        return Err(CliError::ChecksFailed("one or more checks did not pass".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct AuditRow {
    #[serde(flatten)]
    record: AuditRecord,
    rate_bits: f64,
}

#[derive(Serialize)]
struct AuditOutput {
    distortion_target: f64,
    wyner_rate_nats: f64,
    wyner_rate_bits: f64,
    records: Vec<AuditRow>,
    singular_limit: Vec<SingularLimitRow>,
}

fn audit(common: &Common, distortion: f64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let d = positive("distortion", distortion)?;
    let (scenario, units) = load(common)?;
    let report = audit_compare(&scenario.spec, d)?;

    say(stdout, format_args!("{} audit at distortion {d} (rates in {units})", scenario.name))?;
    say(
        stdout,
        format_args!(
            "{:<18} {:>12} {:>12} {:>8} {:>14}  noise variances",
            "channel", "rate", "mmse", "meets", "gap vs wyner"
        ),
    )?;
    for r in &report.records {
        let noise: Vec<String> = r.noise_vars.iter().map(|v| format!("{v:.6}")).collect();
        say(
            stdout,
            format_args!(
                "{:<18} {:>12.6} {:>12.6} {:>8} {:>+14.6}  [{}]",
                r.label.as_str(),
                units.convert(r.rate_nats),
                r.achieved_mmse,
                if r.meets_distortion { "yes" } else { "no" },
                units.convert(r.rate_gap_vs_wyner),
                noise.join(", ")
            ),
        )?;
    }
    say(stdout, "singular limit (Sigma_Delta = fraction * Q_X|Y):")?;
    say(
        stdout,
        format_args!("{:>10} {:>14} {:>20} {:>28}", "fraction", "wyner max H", "tian_chen min noise", "zahedi_ostergaard min noise"),
    )?;
    for row in &report.singular_limit {
        say(
            stdout,
            format_args!(
                "{:>10} {:>14.6} {:>20.3} {:>28.3}",
                row.fraction, row.wyner_max_gain, row.tian_chen_min_noise, row.zahedi_ostergaard_min_noise
            ),
        )?;
    }

    let output = AuditOutput {
        distortion_target: report.distortion_target,
        wyner_rate_nats: report.wyner_rate_nats,
        wyner_rate_bits: Units::Bits.convert(report.wyner_rate_nats),
        records: report
            .records
            .into_iter()
            .map(|record| AuditRow {
                rate_bits: Units::Bits.convert(record.rate_nats),
                record,
            })
            .collect(),
        singular_limit: report.singular_limit,
    };
    let echo = CommandEcho {
        name: "audit".into(),
        distortion: Some(d),
        units: Some(units.as_str().into()),
        ..Default::default()
    };
    emit(common.out.as_ref(), &RunRecord::new(echo, &scenario, None, output).to_json(), stdout)
}
