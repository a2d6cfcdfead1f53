use rayon::prelude::*;
use serde::Serialize;

use weil_core::catmap::{
    hecke_que_experiment, rank_density_sweep, sieve_odd_primes, statistical_state_experiment, QueOptions,
};
use weil_core::gfq::FieldCtx;
use weil_core::heiwei::{restrict_to_extension, RestrictionOptions, WeilRep};
use weil_core::spectra::{decompose, expected_multiplicity_for_kinds, MultiplicityRow};
use weil_core::sums::{bound_report, BoundOptions, SumReport, VRange};
use weil_core::symp::{build_maximal_torus, module_structure, BlockKind, SympSpace, Torus, TorusDescriptor};
use weil_core::Error;

use crate::config::RunConfig;
use crate::report::Reporter;
use crate::{selftest, Fail};

pub fn run(cfg: &RunConfig) -> Result<String, Fail> {
    let rep = Reporter::new(cfg)?;
    match cfg.subcommand.as_str() {
        "verify-bounds" => verify_bounds(cfg, &rep),
        "multiplicities" => multiplicities(cfg, &rep),
        "self-reducibility" => self_reducibility(cfg, &rep),
        "que" => que(cfg, &rep),
        "statistical" => statistical(cfg, &rep),
        "rank-density" => rank_density(cfg, &rep),
        "selftest" => selftest::run(cfg, &rep),
        other => unreachable!("unknown subcommand {other}"),
    }
}

/// One `(q, torus type)` work item.
struct Case {
    p: u64,
    space: SympSpace,
    desc: TorusDescriptor,
}

impl Case {
    fn torus(&self) -> weil_core::Result<Torus> {
        build_maximal_torus(&self.space, &self.desc)
    }

    fn kinds(&self) -> Vec<BlockKind> {
        self.desc.blocks.iter().map(|b| b.kind).collect()
    }
}

fn cases(cfg: &RunConfig) -> Result<Vec<Case>, Fail> {
    let mut out = Vec::new();
    for &p in &cfg.p {
        let f = FieldCtx::new(p, cfg.m)?;
        let space = SympSpace::standard(&f, cfg.n)?;
        let descs = if cfg.torus == "all" {
            TorusDescriptor::all_types(cfg.n).into_iter().map(|b| TorusDescriptor::new(&f, b)).collect()
        } else {
            let d = TorusDescriptor::parse(&cfg.torus, &f, cfg.n)?;
            if d.half_dim() != cfg.n {
                return Err(Fail::Config(format!("torus {:?} has total degree {}, not N = {}", cfg.torus, d.half_dim(), cfg.n)));
            }
            vec![d]
        };
        out.extend(descs.into_iter().map(|desc| Case { p, space: space.clone(), desc }));
    }
    Ok(out)
}

fn par_collect<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R, Fail> + Sync + Send) -> Result<Vec<R>, Fail> {
    items.par_iter().map(f).collect()
}

fn verify_bounds(cfg: &RunConfig, rep: &Reporter) -> Result<String, Fail> {
    let opts = BoundOptions { range: VRange::Auto { seed: cfg.seed, samples: cfg.samples }, keep_rows: true };
    let reports: Vec<SumReport> = par_collect(&cases(cfg)?, |c| Ok(bound_report(&c.space, &c.torus()?, &opts)?))?;
    let rows: Vec<_> = reports.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    rep.csv(&rows)?;
    rep.json(&reports)?;
    if let Some(r) = reports.iter().find(|r| r.violations() > 0) {
        return Err(Fail::Violation(format!(
            "q = {}^{}, torus {}: |c| = {:.6} > bound {:.6} at {}",
            r.p,
            r.m,
            r.torus,
            r.max_abs,
            r.bound,
            serde_json::to_string(&r.argmax).unwrap_or_default()
        )));
    }
    let worst = reports.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    Ok(format!("{} cases, {} rows, max ratio {worst:.6}", reports.len(), rows.len()))
}

#[derive(Serialize)]
struct MultSummary {
    cases: usize,
    characters: usize,
    mismatches: Vec<MultMismatch>,
}

#[derive(Serialize)]
struct MultMismatch {
    row: MultiplicityRow,
    expected: u64,
}

fn multiplicities(cfg: &RunConfig, rep: &Reporter) -> Result<String, Fail> {
    let cases = cases(cfg)?;
    let per_case: Vec<Vec<(MultiplicityRow, u64)>> = par_collect(&cases, |c| {
        let t = c.torus()?;
        let dec = decompose(&WeilRep::new(&c.space)?, &t)?;
        let kinds = c.kinds();
        Ok(dec
            .characters()
            .iter()
            .zip(dec.multiplicities())
            .map(|(chi, &m)| {
                let row = MultiplicityRow {
                    p: c.p,
                    m: cfg.m,
                    n: cfg.n,
                    torus_descriptor: c.desc.label(),
                    chi_exponents: chi.label(),
                    multiplicity: m,
                };
                (row, expected_multiplicity_for_kinds(&kinds, chi))
            })
            .collect())
    })?;
    let all: Vec<_> = per_case.into_iter().flatten().collect();
    let rows: Vec<_> = all.iter().map(|(r, _)| r.clone()).collect();
    rep.csv(&rows)?;
    let mismatches: Vec<MultMismatch> = all
        .iter()
        .filter(|(r, e)| r.multiplicity as u64 != *e)
        .map(|(r, e)| MultMismatch { row: r.clone(), expected: *e })
        .collect();
    let witness = mismatches.first().map(|w| serde_json::to_string(w).unwrap_or_default());
    rep.json(&MultSummary { cases: cases.len(), characters: rows.len(), mismatches })?;
    if let Some(w) = witness {
        return Err(Fail::Violation(w));
    }
    Ok(format!("{} cases, {} characters, all multiplicities as predicted", cases.len(), rows.len()))
}

#[derive(Serialize, Clone)]
struct RestrictRow {
    p: u64,
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    torus: String,
    trace_checked: usize,
    trace_mismatches: usize,
    psi_checked: usize,
    psi_mismatches: usize,
    operator_samples: usize,
    operator_distance: Option<f64>,
    skipped_reason: String,
}

fn self_reducibility(cfg: &RunConfig, rep: &Reporter) -> Result<String, Fail> {
    let opts = RestrictionOptions { samples: cfg.samples, seed: cfg.seed };
    let rows: Vec<RestrictRow> = par_collect(&cases(cfg)?, |c| {
        let mut row = RestrictRow {
            p: c.p,
            m: cfg.m,
            n: cfg.n,
            torus: c.desc.label(),
            trace_checked: 0,
            trace_mismatches: 0,
            psi_checked: 0,
            psi_mismatches: 0,
            operator_samples: 0,
            operator_distance: None,
            skipped_reason: String::new(),
        };
        let t = c.torus()?;
        let ms = match module_structure(&t) {
            Ok(ms) => ms,
            Err(e @ Error::NotMaximal(_)) => {
                row.skipped_reason = e.to_string();
                return Ok(row);
            }
            Err(e) => return Err(e.into()),
        };
        let r = restrict_to_extension(&WeilRep::new(&c.space)?, &ms, &t, &opts)?;
        row.trace_checked = r.trace_checked;
        row.trace_mismatches = r.trace_mismatches.len();
        row.psi_checked = r.psi_checked;
        row.psi_mismatches = r.psi_mismatches;
        row.operator_samples = r.operator_samples;
        row.operator_distance = r.operator_distance;
        row.skipped_reason = r.operator_skipped.clone().unwrap_or_default();
        if !r.passed() {
            return Err(Fail::Violation(serde_json::to_string(&r).unwrap_or_default()));
        }
        Ok(row)
    })?;
    rep.csv(&rows)?;
    rep.json(&rows)?;
    Ok(format!("{} cases, traces and operators agree", rows.len()))
}

fn que_primes(cfg: &RunConfig) -> Vec<u64> {
    sieve_odd_primes(cfg.max_prime)
}

#[derive(Serialize)]
struct QueSummary {
    primes: usize,
    skipped: usize,
    violations: usize,
    trend: Vec<TrendRow>,
    outcomes: Vec<weil_core::catmap::QueOutcome>,
}

#[derive(Serialize)]
struct TrendRow {
    p: u64,
    max_wigner_ratio: Option<f64>,
    strict_max_ratio: Option<f64>,
}

fn que(cfg: &RunConfig, rep: &Reporter) -> Result<String, Fail> {
    let a = cfg.automorphism()?;
    let opts = QueOptions { xi_max: cfg.xi_max };
    let outcomes = par_collect(&que_primes(cfg), |&p| Ok(hecke_que_experiment(&a, p, &opts)?))?;
    let rows: Vec<_> = outcomes.iter().map(|o| o.row.clone()).collect();
    rep.csv(&rows)?;
    let trend = outcomes
        .iter()
        .filter(|o| o.row.skipped_reason.is_empty())
        .map(|o| TrendRow { p: o.row.p, max_wigner_ratio: o.row.max_wigner_ratio, strict_max_ratio: o.strict_max_ratio })
        .collect();
    let violations: usize = outcomes.iter().map(|o| o.violations.len()).sum();
    let skipped = rows.iter().filter(|r| !r.skipped_reason.is_empty()).count();
    let witness = outcomes.iter().find_map(|o| o.violations.first().map(|v| (o.row.p, v.clone())));
    rep.json(&QueSummary { primes: rows.len(), skipped, violations, trend, outcomes })?;
    if let Some((p, v)) = witness {
        return Err(Fail::Violation(format!("p = {p}: {}", serde_json::to_string(&v).unwrap_or_default())));
    }
    Ok(format!("{} primes ({skipped} skipped), no violations", rows.len()))
}

fn statistical(cfg: &RunConfig, rep: &Reporter) -> Result<String, Fail> {
    let a = cfg.automorphism()?;
    let opts = QueOptions { xi_max: cfg.xi_max };
    let outcomes = par_collect(&que_primes(cfg), |&p| Ok(statistical_state_experiment(&a, p, &opts)?))?;
    let rows: Vec<_> = outcomes.iter().flat_map(|o| o.rows.iter().cloned()).collect();
    rep.csv(&rows)?;
    rep.json(&outcomes)?;
    if let Some(o) = outcomes.iter().find(|o| o.violations > 0) {
        let worst = o.rows.iter().max_by(|x, y| x.max_ratio.total_cmp(&y.max_ratio));
        return Err(Fail::Violation(format!(
            "p = {}: {} violations, worst {}",
            o.p,
            o.violations,
            serde_json::to_string(&worst).unwrap_or_default()
        )));
    }
    let skipped = outcomes.iter().filter(|o| !o.skipped_reason.is_empty()).count();
    Ok(format!("{} primes ({skipped} skipped), {} eigenvalues, no violations", outcomes.len(), rows.len()))
}

#[derive(Serialize)]
struct DensitySummary {
    genericity: weil_core::catmap::Genericity,
    #[serde(flatten)]
    report: weil_core::catmap::DensityReport,
}

fn rank_density(cfg: &RunConfig, rep: &Reporter) -> Result<String, Fail> {
    let a = cfg.automorphism()?;
    let genericity = a.genericity()?;
    let report = rank_density_sweep(&a, cfg.max_prime)?;
    rep.csv(&report.rows)?;
    let line = report.delta.iter().map(|(r, d)| format!("delta({r}) = {d:.4}")).collect::<Vec<_>>().join(", ");
    let used = report.primes_used;
    rep.json(&DensitySummary { genericity, report })?;
    Ok(format!("{used} primes: {line}"))
}
