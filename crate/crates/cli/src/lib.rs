//! Batch runner for the gspkit verification suites.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use gspkit::analytic::analytic_sanity;
use gspkit::bruhat::{
    bruhat_partition, generation_check, parabolic_conjugate_census,
    parahoric_bruhat_decomposition, tits_axioms_check, BorelSubgroup, ParabolicSubgroup,
};
use gspkit::finalg::is_prime;
use gspkit::lattice::{al_weyl_noncommutation, involution_check, square_commutes};
use gspkit::levelstruct::{enumerate_structures, fiber_equivalence_check, predicted_count, StructureKind};
use gspkit::oldforms::{
    composition_lemma_check, copy_independence_analog, double_coset_dimensions,
    eigen_pullback_with, CorrespondenceSystem,
};
use gspkit::sympgrp::{enumerate_sp, group_order, group_order_mod, DEFAULT_CAP};
use gspkit::weyl::{all_elements, sign_vectors, WeylElement};
use serde::Serialize;

pub const CSV_HEADER: &str = "suite,g,p,n,check,predicted,measured,status";

/// Residual bound for the analytic suite.
pub const ANALYTIC_BOUND: f64 = 1e-8;
pub const ANALYTIC_INSTANCES: usize = 1000;
pub const ANALYTIC_WEIGHT: i32 = 6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("suite {0} produced no checks")]
    EmptyReport(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Orders,
    Tits,
    Bruhat,
    Census,
    Generation,
    Levelcounts,
    Fibers,
    Doublecosets,
    Correspondences,
    Atkinlehner,
    Analytic,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Orders,
        Suite::Tits,
        Suite::Bruhat,
        Suite::Census,
        Suite::Generation,
        Suite::Levelcounts,
        Suite::Fibers,
        Suite::Doublecosets,
        Suite::Correspondences,
        Suite::Atkinlehner,
        Suite::Analytic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Orders => "orders",
            Suite::Tits => "tits",
            Suite::Bruhat => "bruhat",
            Suite::Census => "census",
            Suite::Generation => "generation",
            Suite::Levelcounts => "levelcounts",
            Suite::Fibers => "fibers",
            Suite::Doublecosets => "doublecosets",
            Suite::Correspondences => "correspondences",
            Suite::Atkinlehner => "atkinlehner",
            Suite::Analytic => "analytic",
        }
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(CliError::Usage(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub suites: Vec<Suite>,
    pub g_max: usize,
    pub p_list: Vec<u32>,
    pub n_list: Vec<u32>,
    pub cap: u128,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            g_max: 2,
            p_list: vec![2, 3],
            n_list: Vec::new(),
            cap: DEFAULT_CAP,
            seed: 42,
            out: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    /// Suite names are parsed here; "all" expands to every suite.
    pub fn with_suites<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self, CliError> {
        if names.is_empty() {
            return Ok(self);
        }
        let mut suites = Vec::new();
        for name in names {
            if name.as_ref() == "all" {
                suites.extend(Suite::ALL);
            } else {
                suites.push(name.as_ref().parse()?);
            }
        }
        suites.sort();
        suites.dedup();
        self.suites = suites;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.suites.is_empty() {
            return Err(CliError::Usage("no suites selected".into()));
        }
        if !(1..=3).contains(&self.g_max) {
            return Err(CliError::Usage(format!("--g must lie in 1..=3, got {}", self.g_max)));
        }
        if self.p_list.is_empty() {
            return Err(CliError::Usage("--p needs at least one prime".into()));
        }
        if let Some(p) = self.p_list.iter().find(|&&p| !is_prime(p)) {
            return Err(CliError::Usage(format!("--p {p} is not prime")));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 2) {
            return Err(CliError::Usage(format!("--n {n} must be at least 2")));
        }
        Ok(())
    }

    fn grid(&self, g_from: usize) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for g in g_from..=self.g_max {
            for &p in &self.p_list {
                out.push((g, p));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    SkippedCap,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::SkippedCap => "skipped-cap",
        }
    }

    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Where a predicted value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// A closed formula.
    ClosedForm,
    /// An independent computation by another route.
    Independent,
    /// The expected qualitative outcome.
    Expected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predicted {
    pub value: String,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub g: usize,
    pub p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub predicted: Predicted,
    pub measured: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub params: RunConfig,
    pub checks: Vec<Check>,
    pub wall_time_ms: u64,
}

impl SuiteReport {
    pub fn failed(&self) -> usize {
        self.count(Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }
}

#[derive(Debug, Serialize)]
struct Document<'a> {
    config: &'a RunConfig,
    reports: &'a [SuiteReport],
}

struct Sink {
    g: usize,
    p: u32,
    n: Option<u32>,
    checks: Vec<Check>,
}

impl Sink {
    fn new(g: usize, p: u32) -> Self {
        Self {
            g,
            p,
            n: None,
            checks: Vec::new(),
        }
    }

    fn at(&mut self, g: usize, p: u32, n: Option<u32>) -> &mut Self {
        self.g = g;
        self.p = p;
        self.n = n;
        self
    }

    fn push(
        &mut self,
        name: impl Into<String>,
        predicted: impl ToString,
        source: Source,
        measured: impl ToString,
        ok: bool,
    ) -> &mut Check {
        self.checks.push(Check {
            name: name.into(),
            g: self.g,
            p: self.p,
            n: self.n,
            predicted: Predicted {
                value: predicted.to_string(),
                source,
            },
            measured: measured.to_string(),
            status: Status::of(ok),
            detail: None,
        });
        self.checks.last_mut().expect("just pushed")
    }

    /// Cap overruns become `skipped-cap`; other errors fail the check.
    fn guard(&mut self, name: &str, r: gspkit::Result<()>) {
        if let Err(e) = r {
            let status = match e {
                gspkit::Error::EnumerationTooLarge { .. } => Status::SkippedCap,
                _ => Status::Fail,
            };
            self.checks.push(Check {
                name: name.to_string(),
                g: self.g,
                p: self.p,
                n: self.n,
                predicted: Predicted {
                    value: "-".into(),
                    source: Source::Expected,
                },
                measured: e.to_string(),
                status,
                detail: None,
            });
        }
    }
}

pub fn weyl_label(w: &WeylElement) -> String {
    let word = w.reduced_word();
    if word.is_empty() {
        "id".into()
    } else {
        word.iter().map(|i| format!("s{i}")).collect()
    }
}

fn orders(cfg: &RunConfig, s: &mut Sink) {
    for (g, p) in cfg.grid(1) {
        s.at(g, p, None);
        let r = enumerate_sp(g, p, cfg.cap).map(|e| {
            let order = group_order(g, p);
            s.push("order", order, Source::ClosedForm, e.len(), e.len() as u128 == order);
        });
        s.guard("order", r);
    }
    for g in 1..=cfg.g_max {
        for &n in &cfg.n_list {
            s.at(g, n, Some(n));
            let r = enumerate_sp(g, n, cfg.cap).map(|e| {
                let order = group_order_mod(g, n);
                s.push("order mod n", order, Source::ClosedForm, e.len(), e.len() as u128 == order);
            });
            s.guard("order mod n", r);
        }
    }
}

fn tits(cfg: &RunConfig, s: &mut Sink) {
    for (g, p) in cfg.grid(1) {
        s.at(g, p, None);
        let r = tits_axioms_check(g, p, cfg.cap).map(|t| {
            s.push(
                format!("T1 over {} products", t.t1_checked),
                "0 failures",
                Source::Expected,
                format!("{} failures", t.t1_failures.len()),
                t.t1_failures.is_empty(),
            );
            for (i, &moved) in t.t2.iter().enumerate() {
                s.push(
                    format!("T2 s{} B s{} != B", i + 1, i + 1),
                    true,
                    Source::Expected,
                    moved,
                    moved,
                );
            }
        });
        s.guard("tits axioms", r);
    }
}

fn bruhat(cfg: &RunConfig, s: &mut Sink) {
    for (g, p) in cfg.grid(1) {
        s.at(g, p, None);
        let r = enumerate_sp(g, p, cfg.cap).and_then(|e| bruhat_partition(&e)).map(|b| {
            for c in &b.cells {
                s.push(
                    format!("cell {} size", weyl_label(&c.w)),
                    c.predicted,
                    Source::ClosedForm,
                    c.measured,
                    c.measured as u128 == c.predicted,
                );
            }
            let total: u128 = b.cells.iter().map(|c| c.measured as u128).sum();
            s.push("cells sum to |G|", b.group_order, Source::ClosedForm, total, total == b.group_order);
            s.push("cells disjoint and covering", true, Source::Expected, b.disjoint_cover, b.disjoint_cover);
            s.push(
                "rank-profile cell agrees with enumeration",
                true,
                Source::Independent,
                b.fast_path_agrees,
                b.fast_path_agrees,
            );
        });
        s.guard("bruhat partition", r);
        let r = parahoric_bruhat_decomposition(g, p, cfg.cap).map(|d| {
            let ok = d.disjoint && d.covers && d.sizes.len() == 1 << g;
            s.push(
                "B sigma P double cosets partition G",
                format!("{} disjoint covering", 1u32 << g),
                Source::ClosedForm,
                format!("{} (disjoint {}, covering {})", d.sizes.len(), d.disjoint, d.covers),
                ok,
            );
        });
        s.guard("parahoric decomposition", r);
    }
}

fn census(cfg: &RunConfig, s: &mut Sink) {
    for g in 2..=3 {
        for &p in &cfg.p_list {
            s.at(g, p, None);
            for k in 0..g {
                let r = parabolic_conjugate_census(g, p, k, cfg.cap).map(|c| {
                    s.push(
                        format!("distinct conjugates of P_I{k}"),
                        c.predicted_distinct,
                        Source::ClosedForm,
                        c.distinct_conjugates,
                        c.distinct_matches(),
                    );
                    if !c.next_is_whole_group {
                        s.push(
                            format!("conjugates of P_I{k} inside P_I{}", k + 1),
                            c.predicted_k_plus_2,
                            Source::Independent,
                            format!(
                                "{} (k+1 reading gives {})",
                                c.contained_in_next, c.predicted_k_plus_1
                            ),
                            c.matches_k_plus_2(),
                        );
                    }
                });
                s.guard(&format!("census k={k}"), r);
            }
        }
    }
}

fn generation(cfg: &RunConfig, s: &mut Sink) {
    for (g, p) in cfg.grid(1) {
        s.at(g, p, None);
        for sigma in sign_vectors(g) {
            let label = weyl_label(&sigma);
            let r = generation_check(g, p, &sigma).map(|r| {
                let expect = !sigma.is_identity();
                let predicted = if expect {
                    r.group_order
                } else {
                    ParabolicSubgroup::siegel(g, p).predicted_order()
                };
                s.push(
                    format!("<P, {label} P {label}^-1>"),
                    predicted,
                    Source::ClosedForm,
                    r.closure_size,
                    r.closure_size as u128 == predicted,
                );
            });
            s.guard(&format!("generation {label}"), r);
        }
    }
}

fn levelcounts(cfg: &RunConfig, s: &mut Sink) {
    for (g, p) in cfg.grid(1) {
        s.at(g, p, None);
        let order = group_order(g, p);
        for (kind, label) in [
            (StructureKind::P, "P"),
            (StructureKind::B, "B"),
            (StructureKind::T, "T"),
        ] {
            let name = format!("#{label}-levels");
            let r = (|| {
                let stabilizer = match kind {
                    StructureKind::P => ParabolicSubgroup::siegel(g, p).enumerate(cfg.cap)?.len() as u128,
                    StructureKind::B => BorelSubgroup::new(g, p).enumerate(cfg.cap)?.len() as u128,
                    _ => (p as u128 - 1).pow(g as u32),
                };
                let measured = enumerate_structures(&kind, g, p, cfg.cap)?.len() as u128;
                let formula = predicted_count(&kind, g, p);
                let index = order / stabilizer;
                s.push(
                    format!("{name} vs closed form"),
                    formula,
                    Source::ClosedForm,
                    measured,
                    measured == formula,
                );
                s.push(
                    format!("{name} vs coset index"),
                    index,
                    Source::Independent,
                    measured,
                    measured == index,
                );
                Ok(())
            })();
            s.guard(&name, r);
        }
    }
}

fn fibers(cfg: &RunConfig, s: &mut Sink) {
    for (g, p) in cfg.grid(1) {
        s.at(g, p, None);
        let r = fiber_equivalence_check(g, p, cfg.cap).map(|f| {
            for c in &f.checks {
                s.push(
                    c.name.clone(),
                    format!("{} fibers", c.fibers),
                    Source::Independent,
                    format!("{} classes", c.classes),
                    c.equal,
                );
            }
        });
        s.guard("fiber equivalence", r);
    }
}

fn doublecosets(cfg: &RunConfig, s: &mut Sink) {
    for (g, p) in cfg.grid(1) {
        s.at(g, p, None);
        let r = double_coset_dimensions(g, p, cfg.cap).map(|d| {
            let (pb, bb) = d.predicted();
            s.push("#(P\\G/B)", pb, Source::ClosedForm, d.parabolic_borel, d.parabolic_borel == pb);
            s.push("#(B\\G/B)", bb, Source::ClosedForm, d.borel_borel, d.borel_borel == bb);
            s.push(
                "|W/W_P| and |W|",
                format!("{pb} {bb}"),
                Source::ClosedForm,
                format!("{} {}", d.weyl_counts.0, d.weyl_counts.1),
                d.weyl_counts == (pb, bb),
            );
        });
        s.guard("double cosets", r);
    }
}

fn correspondences(cfg: &RunConfig, s: &mut Sink) {
    for (g, p) in cfg.grid(1) {
        s.at(g, p, None);
        let r = composition_lemma_check(g, p, cfg.cap).map(|c| {
            s.push(
                format!("D^a D^b against D^(ab) image over {} pairs", c.pairs_checked),
                "0 failures",
                Source::Expected,
                format!("{} failures", c.failures.len()),
                c.failures.is_empty(),
            );
            let sigmas = all_elements(g).len();
            s.push("invertible D^sigma", sigmas, Source::Expected, c.invertible, c.invertible == sigmas);
            s.push(
                "constant row sums",
                format!("degree {}", c.degree),
                Source::Expected,
                c.row_sums_constant,
                c.row_sums_constant,
            );
        });
        s.guard("composition", r);
        let r = CorrespondenceSystem::new(StructureKind::B, g, p, cfg.cap).and_then(|sys| {
            for sigma in all_elements(g) {
                let e = eigen_pullback_with(&sys, &sigma, cfg.cap)?;
                s.push(
                    format!("deg-eigenvectors of D^{} pulled back from P_{:?}", e.sigma, e.parabolic),
                    format!("contained, pullback dim {}", e.pullback_dim),
                    Source::Expected,
                    format!("+{} / -{} eigen dims, contained {}", e.plus_dim, e.minus_dim, e.contained),
                    e.contained,
                );
            }
            Ok(())
        });
        s.guard("eigen pullback", r);
        let r = copy_independence_analog(g, p, cfg.seed, cfg.cap).map(|c| {
            s.at(g, p, Some(c.n));
            s.push(
                "D^sigma copies coincide",
                c.sigmas,
                Source::Expected,
                format!(
                    "{} (base dim {}, generic span {}, bi-invariant {})",
                    c.coinciding, c.base_dim, c.generic_span_dim, c.bi_invariant_dim
                ),
                c.all_coincide(),
            );
            s.at(g, p, None);
        });
        s.guard("copy independence", r);
    }
}

fn atkinlehner(cfg: &RunConfig, s: &mut Sink) {
    let cap = usize::try_from(cfg.cap).unwrap_or(usize::MAX);
    for (g, p) in cfg.grid(1) {
        s.at(g, p, None);
        let r = involution_check(g, p, cap).map(|r| {
            s.push(
                "al on pairs is an involution",
                format!("{} pairs", r.pairs),
                Source::Expected,
                format!("{} ({} fixed)", r.pair_involution, r.pair_fixed_points),
                r.pair_involution,
            );
            s.push(
                "al on chains is a valid involution",
                format!("{} chains", r.chains),
                Source::Expected,
                r.chain_involution && r.chain_validity,
                r.chain_involution && r.chain_validity,
            );
            s.push(
                "lattice counts at L0 against level counts",
                "#P-levels, #B-levels",
                Source::Independent,
                format!("{} {}", r.pairs_at_standard, r.chains_at_standard),
                r.counts_match_levels,
            );
        });
        s.guard("al involution", r);
        let r = square_commutes(g, p, cap).map(|q| {
            s.push(
                format!("square commutes with al on {} chains", q.chains),
                "0 failures",
                Source::Expected,
                format!("{} failures", q.failures),
                q.passed(),
            );
        });
        s.guard("al square", r);
        let r = al_weyl_noncommutation(g, p, cap).map(|n| {
            s.push(
                "identity commutes with al",
                true,
                Source::Expected,
                n.identity_commutes(),
                n.identity_commutes(),
            );
            let commuting: Vec<String> = n
                .outcomes
                .iter()
                .filter(|o| o.commutes)
                .map(|o| weyl_label(&o.sigma))
                .collect();
            let witness = n.outcomes.iter().find_map(|o| o.witness.as_ref());
            let partnerless = n.outcomes.iter().filter(|o| o.partners.is_empty()).count();
            let check = s.push(
                format!("al against V^sigma over {} chains", n.chains),
                "a witness for some sigma != id",
                Source::Expected,
                format!(
                    "commuting: {}; {} of {} sigma without partner",
                    commuting.join(" "),
                    partnerless,
                    n.outcomes.len()
                ),
                n.witness_found(),
            );
            let outcomes: Vec<serde_json::Value> = n
                .outcomes
                .iter()
                .map(|o| {
                    serde_json::json!({
                        "sigma": weyl_label(&o.sigma),
                        "commutes": o.commutes,
                        "partners": o.partners.iter().map(weyl_label).collect::<Vec<_>>(),
                    })
                })
                .collect();
            check.detail = Some(serde_json::json!({
                "outcomes": outcomes,
                "witness": witness,
            }));
        });
        s.guard("al weyl", r);
    }
}

fn analytic(cfg: &RunConfig, s: &mut Sink) {
    for g in 1..=cfg.g_max.min(2) {
        s.at(g, 0, None);
        let r = analytic_sanity(g, ANALYTIC_INSTANCES, ANALYTIC_WEIGHT, cfg.seed).map(|a| {
            let bound = format!("< {ANALYTIC_BOUND:e}");
            for (name, v) in [
                ("moebius composition residual", a.max_moebius),
                ("automorphy cocycle residual", a.max_cocycle),
                ("slash action residual", a.max_slash),
            ] {
                s.push(
                    format!("{name}, {} instances, k={}", a.instances, a.weight),
                    &bound,
                    Source::Expected,
                    format!("{v:.3e}"),
                    v < ANALYTIC_BOUND,
                );
            }
            s.push(
                "images stay in the Siegel space",
                0,
                Source::Expected,
                a.invalid_images,
                a.invalid_images == 0,
            );
        });
        s.guard("analytic sanity", r);
    }
}

pub fn run_suite(cfg: &RunConfig, suite: Suite) -> SuiteReport {
    let start = Instant::now();
    let mut sink = Sink::new(cfg.g_max, cfg.p_list[0]);
    match suite {
        Suite::Orders => orders(cfg, &mut sink),
        Suite::Tits => tits(cfg, &mut sink),
        Suite::Bruhat => bruhat(cfg, &mut sink),
        Suite::Census => census(cfg, &mut sink),
        Suite::Generation => generation(cfg, &mut sink),
        Suite::Levelcounts => levelcounts(cfg, &mut sink),
        Suite::Fibers => fibers(cfg, &mut sink),
        Suite::Doublecosets => doublecosets(cfg, &mut sink),
        Suite::Correspondences => correspondences(cfg, &mut sink),
        Suite::Atkinlehner => atkinlehner(cfg, &mut sink),
        Suite::Analytic => analytic(cfg, &mut sink),
    }
    SuiteReport {
        suite,
        params: cfg.clone(),
        checks: sink.checks,
        wall_time_ms: start.elapsed().as_millis() as u64,
    }
}

/// Runs the selected suites on a small worker pool. Reports come back in suite order.
pub fn run(cfg: &RunConfig) -> Result<Vec<SuiteReport>, CliError> {
    cfg.validate()?;
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(cfg.suites.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SuiteReport>>> = Mutex::new(vec![None; cfg.suites.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&suite) = cfg.suites.get(i) else {
                    break;
                };
                let report = run_suite(cfg, suite);
                slots.lock().expect("no worker panicked")[i] = Some(report);
            });
        }
    });
    let reports: Vec<SuiteReport> = slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every suite ran"))
        .collect();
    if let Some(r) = reports.iter().find(|r| r.checks.is_empty()) {
        return Err(CliError::EmptyReport(r.suite.name().into()));
    }
    Ok(reports)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(cfg: &RunConfig, reports: &[SuiteReport], format: Format) -> Result<String, CliError> {
    if let Some(r) = reports.iter().find(|r| r.checks.is_empty()) {
        return Err(CliError::EmptyReport(r.suite.name().into()));
    }
    let mut out = String::new();
    match format {
        Format::Json => {
            out = serde_json::to_string_pretty(&Document {
                config: cfg,
                reports,
            })?;
            out.push('\n');
        }
        Format::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in reports {
                for c in &r.checks {
                    let n = c.n.map(|n| n.to_string()).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        r.suite.name(),
                        c.g,
                        c.p,
                        n,
                        csv_field(&c.name),
                        csv_field(&c.predicted.value),
                        csv_field(&c.measured),
                        c.status.as_str()
                    );
                }
            }
        }
        Format::Text => {
            for r in reports {
                let _ = writeln!(
                    out,
                    "== {} ({} pass, {} fail, {} skipped-cap, {} ms)",
                    r.suite.name(),
                    r.count(Status::Pass),
                    r.count(Status::Fail),
                    r.count(Status::SkippedCap),
                    r.wall_time_ms
                );
                let width = r.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
                for c in &r.checks {
                    let at = match c.n {
                        Some(n) => format!("g={} p={} n={n}", c.g, c.p),
                        None => format!("g={} p={}", c.g, c.p),
                    };
                    let _ = writeln!(
                        out,
                        "  {:<11} {at:<12} {:<width$}  predicted {}  measured {}",
                        c.status.as_str(),
                        c.name,
                        c.predicted.value,
                        c.measured,
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Writes to `<out>/report.<ext>` when an output directory is set, else returns the text.
pub fn emit(cfg: &RunConfig, reports: &[SuiteReport]) -> Result<Option<String>, CliError> {
    let text = render(cfg, reports, cfg.format)?;
    match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("report.{}", cfg.format.extension())), text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

pub fn exit_code(reports: &[SuiteReport]) -> i32 {
    if reports.iter().any(|r| r.failed() > 0) {
        1
    } else {
        0
    }
}
