use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use pml_core::adversary::g_leakage;
use pml_core::channel_ops::{
    compose_adaptive, compose_eml_bounds, compose_pml_bounds, reduce, EmlComposition,
    PmlComposition, PrivacyParams,
};
use pml_core::comparisons::{
    approx_ldp_holds, approx_max_information, f_info_pml_bound, f_information, implied_pml_bound,
    ldi_epsilon, ldp_epsilon, lip_epsilon, max_information, mutual_information,
    total_variation_privacy, tv_bounds, FDivergence, LocalNotion, MeasureValue, TvRegime,
};
use pml_core::guarantees::{
    check_eps_delta_eml, check_eps_delta_pml, check_eps_pml, eml_implies_pml_check, eml_kappa,
    min_eps_for_delta_pml,
};
use pml_core::io::{GainFile, ModelFile, StageFile};
use pml_core::leakage::leakage_distribution;
use pml_core::oracles::random_model;
use pml_core::{Error, Joint, Mode, Prior, Scalar};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::{Command, Common};
use crate::report::*;
use crate::CliError;

pub const DEFAULT_MEASURES: [&str; 6] = ["ldp", "lip", "ldi", "mi", "tv", "maxinfo"];

/// Everything a command can print.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(untagged)]
pub enum Body {
    Pml(LeakageReport),
    Eml(Box<EmlReport>),
    Guarantee(GuaranteeSet),
    Reduce(ReduceReport),
    Compose(Box<ComposeReport>),
    Compare(Vec<MeasureReportDto>),
    Audit(Box<AuditReport>),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// A model file, or a previous audit report with the model embedded.
pub fn load_model(path: &Path) -> Result<ModelFile, CliError> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let model = match value.get("result").and_then(|r| r.get("model")) {
        Some(m) => m.clone(),
        None => value,
    };
    serde_json::from_value(model).map_err(|e| CliError::Input(format!("model file: {e}")))
}

fn random_model_file(seed: u64, shape: &str, mode: Mode) -> Result<ModelFile, CliError> {
    let bad = || CliError::Input(format!("shape `{shape}` is not INPUTSxOUTPUTS"));
    let (a, b) = shape.split_once('x').ok_or_else(bad)?;
    let nx: usize = a.trim().parse().map_err(|_| bad())?;
    let ny: usize = b.trim().parse().map_err(|_| bad())?;
    if nx == 0 || ny == 0 {
        return Err(bad());
    }
    Ok(match mode {
        Mode::Rational => {
            let j = random_model::<pml_core::Rational>(seed, (nx, ny));
            ModelFile::from_model(j.prior(), j.channel())
        }
        Mode::Float => {
            let j = random_model::<f64>(seed, (nx, ny));
            ModelFile::from_model(j.prior(), j.channel())
        }
    })
}

pub fn resolve_model(args: &Common) -> Result<(ModelFile, Mode), CliError> {
    match (&args.input, args.seed) {
        (Some(path), _) => {
            let m = load_model(path)?;
            let mode = args.mode.map(Mode::from).unwrap_or_else(|| m.mode());
            Ok((m, mode))
        }
        (None, Some(seed)) => {
            let mode = args.mode.map(Mode::from).unwrap_or(Mode::Rational);
            Ok((random_model_file(seed, &args.shape, mode)?, mode))
        }
        (None, None) => Err(CliError::Input("no model: pass -i FILE or --seed N".into())),
    }
}

pub fn parse_epsilon<S: Scalar>(text: &str) -> Result<S, CliError> {
    let eps = match text.trim().strip_prefix("log:") {
        Some(nats) => {
            let v: f64 = nats
                .trim()
                .parse()
                .map_err(|_| Error::Parse(text.to_string()))?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidEpsilon(text.to_string()).into());
            }
            S::from_f64(v.exp()).ok_or_else(|| Error::InvalidEpsilon(text.to_string()))?
        }
        None => S::parse(text)?,
    };
    if eps < S::one() {
        return Err(Error::InvalidEpsilon(text.to_string()).into());
    }
    Ok(eps)
}

pub fn parse_delta<S: Scalar>(text: &str) -> Result<S, CliError> {
    let d = S::parse(text)?;
    if d < S::zero() || d > S::one() {
        return Err(Error::InvalidDelta(text.to_string()).into());
    }
    Ok(d)
}

struct Ctx<S> {
    file: ModelFile,
    prior: Prior<S>,
    joint: Joint<S>,
    deltas: Vec<S>,
    epsilons: Vec<S>,
}

impl<S: Scalar> Ctx<S> {
    fn new(file: ModelFile, args: &Common) -> Result<Self, CliError> {
        let (prior, channel) = file.parts::<S>()?;
        let joint = Joint::new(prior.clone(), channel.clone())?;
        Ok(Ctx {
            file: ModelFile::from_model(&prior, &channel),
            prior,
            joint,
            deltas: args.delta.iter().map(|d| parse_delta(d)).collect::<Result<_, _>>()?,
            epsilons: args.epsilon.iter().map(|e| parse_epsilon(e)).collect::<Result<_, _>>()?,
        })
    }

    fn single_delta(&self, name: &str) -> Result<Option<S>, CliError> {
        match self.deltas.len() {
            0 => Ok(None),
            1 => Ok(Some(self.deltas[0].clone())),
            _ => Err(CliError::Input(format!("`{name}` takes a single --delta"))),
        }
    }

    fn single_epsilon(&self, name: &str) -> Result<Option<S>, CliError> {
        match self.epsilons.len() {
            0 => Ok(None),
            1 => Ok(Some(self.epsilons[0].clone())),
            _ => Err(CliError::Input(format!("`{name}` takes a single --epsilon"))),
        }
    }
}

pub fn run<S: Scalar>(command: &Command, args: &Common, file: ModelFile) -> Result<Body, CliError> {
    let ctx = Ctx::<S>::new(file, args)?;
    match command {
        Command::Pml(_) => pml(&ctx, args),
        Command::Eml(_) => eml(&ctx),
        Command::Guarantee(_) => guarantee(&ctx),
        Command::Reduce(_) => Ok(Body::Reduce(reduce_report(&ctx))),
        Command::Compose(_) => compose(&ctx, args),
        Command::Compare(_) => {
            let names = measure_names(args);
            let eps = ctx.single_epsilon("compare")?;
            let delta = ctx.single_delta("compare")?;
            let reports = names
                .iter()
                .map(|n| measure(&ctx.joint, n, eps.as_ref(), delta.as_ref()))
                .collect::<Result<_, _>>()?;
            Ok(Body::Compare(reports))
        }
        Command::Audit(_) => audit(&ctx, args),
    }
}

fn measure_names(args: &Common) -> Vec<String> {
    if args.against.is_empty() {
        DEFAULT_MEASURES.iter().map(|s| s.to_string()).collect()
    } else {
        args.against.iter().map(|s| s.trim().to_lowercase()).collect()
    }
}

fn pml<S: Scalar>(ctx: &Ctx<S>, args: &Common) -> Result<Body, CliError> {
    let j = &ctx.joint;
    let mut report = LeakageReport::new(j, &leakage_distribution(j));
    if let Some(path) = &args.gain {
        let g = GainFile::from_json(&read(path)?)?.gain(&ctx.prior)?;
        for row in &mut report.outputs {
            let y = j
                .channel()
                .labels_y()
                .iter()
                .position(|l| *l == row.output)
                .expect("reported outputs exist");
            row.g_leakage = Some(Ratio::of(&g_leakage(j, &g, y)?));
        }
    }
    Ok(Body::Pml(report))
}

fn eml_report<S: Scalar>(j: &Joint<S>, delta: &S) -> Result<EmlReport, CliError> {
    let sol = eml_kappa(j, delta)?;
    Ok(EmlReport {
        delta: delta.to_repr(),
        kappa: Ratio::of(&sol.kappa),
        h: sol
            .h
            .iter()
            .enumerate()
            .map(|(x, v)| InputValue {
                input: j.label_x(x).to_string(),
                value: Ratio::of(v),
            })
            .collect(),
        worst_event: WitnessReport::event(&sol.worst),
        guarantee: None,
    })
}

fn eml<S: Scalar>(ctx: &Ctx<S>) -> Result<Body, CliError> {
    let delta = ctx
        .single_delta("eml")?
        .ok_or_else(|| CliError::Input("`eml` needs --delta".into()))?;
    let mut report = eml_report(&ctx.joint, &delta)?;
    if let Some(eps) = ctx.single_epsilon("eml")? {
        report.guarantee = Some(GuaranteeDto::new(
            &ctx.joint,
            &check_eps_delta_eml(&ctx.joint, &eps, &delta)?,
        ));
    }
    Ok(Body::Eml(Box::new(report)))
}

fn guarantee_reports<S: Scalar>(j: &Joint<S>, eps: &S, delta: &S) -> Result<Vec<GuaranteeDto>, CliError> {
    let mut out = Vec::new();
    if delta.is_zero() {
        out.push(GuaranteeDto::new(j, &check_eps_pml(j, eps)?));
    } else {
        out.push(GuaranteeDto::new(j, &check_eps_delta_pml(j, eps, delta)?));
    }
    out.push(GuaranteeDto::new(j, &check_eps_delta_eml(j, eps, delta)?));
    Ok(out)
}

fn guarantee<S: Scalar>(ctx: &Ctx<S>) -> Result<Body, CliError> {
    let j = &ctx.joint;
    let eps = ctx
        .single_epsilon("guarantee")?
        .ok_or_else(|| CliError::Input("`guarantee` needs --epsilon".into()))?;
    let delta = ctx.single_delta("guarantee")?.unwrap_or_else(S::zero);
    let reports = guarantee_reports(j, &eps, &delta)?;
    let eml_to_pml = if delta.is_zero() {
        None
    } else {
        let c = eml_implies_pml_check(j, &eps, &delta)?;
        Some(EmlToPmlReport {
            eml_holds: c.eml_holds,
            high_leakage: c.high_leakage.iter().map(|&y| j.label_y(y).to_string()).collect(),
            high_leakage_mass: c.high_leakage_mass.to_repr(),
            common_maximizer: c.common_maximizer.map(|x| j.label_x(x).to_string()),
            pml_follows: c.pml_follows,
            pml_holds: c.pml_holds,
            diagnostic: c.diagnostic,
        })
    };
    Ok(Body::Guarantee(GuaranteeSet { reports, eml_to_pml }))
}

fn reduce_report<S: Scalar>(ctx: &Ctx<S>) -> ReduceReport {
    let j = &ctx.joint;
    let map = reduce(j);
    let reduced = &map.joint;
    ReduceReport {
        classes: map
            .merge_map
            .iter()
            .enumerate()
            .map(|(c, members)| Class {
                output: reduced.label_y(c).to_string(),
                members: members.iter().map(|&y| j.label_y(y).to_string()).collect(),
            })
            .collect(),
        dropped: map.dropped.iter().map(|&y| j.label_y(y).to_string()).collect(),
        model: ModelFile::from_model(reduced.prior(), reduced.channel()),
    }
}

fn max_over<S: Scalar>(values: impl IntoIterator<Item = Result<S, CliError>>) -> Result<S, CliError> {
    let mut best = S::one();
    for v in values {
        let v = v?;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

fn rule<S: Scalar>(
    name: &str,
    first: &PrivacyParams<S>,
    second: &PrivacyParams<S>,
    bound: &PrivacyParams<S>,
    achieved: S,
) -> RuleReport {
    RuleReport {
        rule: name.to_string(),
        first: Params::of(&first.eps_ratio, &first.delta),
        second: Params::of(&second.eps_ratio, &second.delta),
        bound: Params::of(&bound.eps_ratio, &bound.delta),
        holds: pml_core::scalar::le(&achieved, &bound.eps_ratio),
        achieved: Ratio::of(&achieved),
    }
}

fn compose<S: Scalar>(ctx: &Ctx<S>, args: &Common) -> Result<Body, CliError> {
    let path = args
        .second
        .as_ref()
        .ok_or_else(|| CliError::Input("`compose` needs --second FILE".into()))?;
    let (_, first_channel) = ctx.file.parts::<S>()?;
    let stage_file = StageFile::from_json(&read(path)?)?;
    let stages = stage_file.stages(&ctx.prior, &first_channel)?;
    let comp = compose_adaptive(&ctx.prior, &first_channel, &stages)?;
    let first = &comp.first;
    let composed = &comp.joint;
    let support: Vec<usize> = first.support_y().to_vec();
    let stage_joints: Vec<Joint<S>> = support
        .iter()
        .map(|&y| comp.stage_joint(y))
        .collect::<Result<_, _>>()?;

    let mut rules = Vec::new();
    let e1 = leakage_distribution(first).max_ratio();
    let e2 = max_over(stage_joints.iter().map(|s| Ok(leakage_distribution(s).max_ratio())))?;
    let p1 = PrivacyParams::pure(e1)?;
    let pure_second = PrivacyParams::pure(e2)?;
    let bound = compose_pml_bounds(PmlComposition::AlmostSure, &p1, &pure_second)?;
    let achieved = leakage_distribution(composed).max_ratio();
    rules.push(rule("pml", &p1, &pure_second, &bound, achieved));

    if let Some(delta) = ctx.single_delta("compose")?.filter(|d| !d.is_zero()) {
        let (t1, _) = min_eps_for_delta_pml(first, &delta)?;
        let t2 = max_over(stage_joints.iter().map(|s| Ok(min_eps_for_delta_pml(s, &delta)?.0)))?;
        let p1 = PrivacyParams::new(t1, delta.clone())?;
        let p2 = PrivacyParams::new(t2, delta.clone())?;
        let bound = compose_pml_bounds(PmlComposition::PerOutputTail, &p1, &p2)?;
        let (achieved, _) = min_eps_for_delta_pml(composed, &bound.delta)?;
        rules.push(rule("delta_pml", &p1, &p2, &bound, achieved));

        let k1 = eml_kappa(first, &delta)?.kappa;
        let q1 = PrivacyParams::new(k1, delta.clone())?;
        let bound = compose_eml_bounds(EmlComposition::PmlSecondStage, &q1, &pure_second, &ctx.prior)?;
        let achieved = eml_kappa(composed, &bound.delta)?.kappa;
        rules.push(rule("eml_then_pml", &q1, &pure_second, &bound, achieved));

        let k2 = max_over(stage_joints.iter().map(|s| Ok(eml_kappa(s, &delta)?.kappa)))?;
        let q2 = PrivacyParams::new(k2, delta.clone())?;
        let bound = compose_eml_bounds(EmlComposition::EmlSecondStage, &q1, &q2, &ctx.prior)?;
        let achieved = eml_kappa(composed, &bound.delta)?.kappa;
        rules.push(rule("eml", &q1, &q2, &bound, achieved));
    }
    Ok(Body::Compose(Box::new(ComposeReport {
        outputs: composed.n_y(),
        leakage: LeakageReport::new(composed, &leakage_distribution(composed)),
        rules,
    })))
}

fn value_report<S: Scalar>(name: &str, v: &MeasureValue<S>) -> MeasureReportDto {
    let (value, nats) = match v {
        MeasureValue::Exact(r) => (r.to_repr(), Some(r.ln())),
        MeasureValue::Float(f) => (format!("{f}"), Some(*f)),
        MeasureValue::Infinite => ("inf".to_string(), None),
        MeasureValue::Holds(b) => (b.to_string(), None),
    };
    MeasureReportDto {
        measure: name.to_string(),
        value,
        nats,
        implied_pml_bound: None,
        bounds: BTreeMap::new(),
        note: None,
    }
}

fn local<S: Scalar>(name: &str, kind: LocalNotion, v: MeasureValue<S>, prior: &Prior<S>) -> Result<MeasureReportDto, CliError> {
    let mut r = value_report(name, &v);
    r.implied_pml_bound = match implied_pml_bound(kind, &v, prior) {
        Ok(b) => Some(Ratio::of(&b)),
        Err(Error::InfiniteInput) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(r)
}

fn float_report(name: &str, value: f64) -> MeasureReportDto {
    MeasureReportDto {
        measure: name.to_string(),
        value: format!("{value}"),
        nats: Some(value),
        implied_pml_bound: None,
        bounds: BTreeMap::new(),
        note: None,
    }
}

pub fn measure<S: Scalar>(j: &Joint<S>, name: &str, eps: Option<&S>, delta: Option<&S>) -> Result<MeasureReportDto, CliError> {
    let delta_or_zero = delta.cloned().unwrap_or_else(S::zero);
    let report = match name {
        "ldp" => local("ldp", LocalNotion::Ldp, ldp_epsilon(j.channel()), j.prior())?,
        "lip" => local("lip", LocalNotion::Lip, lip_epsilon(j), j.prior())?,
        "ldi" => local("ldi", LocalNotion::Ldi, ldi_epsilon(j), j.prior())?,
        "approx_ldp" => {
            let (Some(e), Some(d)) = (eps, delta) else {
                return Err(CliError::Input("approx_ldp needs --epsilon and --delta".into()));
            };
            let mut r = value_report("approx_ldp", &MeasureValue::<S>::Holds(approx_ldp_holds(j.channel(), e, d)));
            r.note = Some(format!("at ({}, {})", e.to_repr(), d.to_repr()));
            r
        }
        "mi" => {
            let mut r = float_report("mi", mutual_information(j));
            let el = leakage_distribution(j).expected_leakage();
            r.bounds.insert("expected_pml_nats".into(), format!("{el}"));
            r
        }
        "tv" => {
            let t = total_variation_privacy(j);
            let e = match eps {
                Some(e) => e.clone(),
                None => min_eps_for_delta_pml(j, &delta_or_zero)?.0,
            };
            let b = tv_bounds(j, &PrivacyParams::new(e.clone(), delta_or_zero.clone())?)?;
            let mut r = value_report("tv", &MeasureValue::Exact(t));
            r.nats = None;
            r.bounds.insert("maximal_leakage".into(), b.maximal_leakage.to_repr());
            r.bounds.insert("pml_average".into(), b.pml_average.to_repr());
            if b.guarantee_holds {
                r.bounds.insert("guarantee".into(), b.guarantee.to_repr());
            }
            r.bounds.insert("cardinality".into(), b.cardinality.to_repr());
            let regime = match b.regime {
                TvRegime::Small => "ε ≤ log 3/2",
                TvRegime::Middle => "log 3/2 < ε ≤ log 2",
                TvRegime::Large => "ε > log 2",
            };
            r.note = Some(format!(
                "guarantee bound at ({}, {}), {regime}{}; cardinality bound is not a tightness target",
                e.to_repr(),
                delta_or_zero.to_repr(),
                if b.guarantee_holds { "" } else { ", not satisfied" }
            ));
            r
        }
        "maxinfo" => {
            let mut r = value_report("maxinfo", &MeasureValue::Exact(max_information(j)));
            if let Some(d) = delta.filter(|d| !d.is_zero()) {
                match approx_max_information(j, d) {
                    Ok(v) => {
                        r.bounds.insert(format!("approx_at_{}", d.to_repr()), v.to_repr());
                    }
                    Err(Error::TooLargeForBruteForce { fallback, .. }) => {
                        r.bounds.insert(format!("approx_at_{}_upper", d.to_repr()), fallback);
                        r.note = Some("support too large for exhaustive events; tail bound reported".into());
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            r
        }
        other => match other.strip_prefix("fdiv:") {
            Some(f) => {
                let f: FDivergence = f.parse()?;
                let mut r = float_report(other, f_information(j, f));
                r.nats = None;
                r.bounds.insert("pml_bound".into(), format!("{}", f_info_pml_bound(j, f)));
                r
            }
            None => return Err(CliError::Input(format!("unknown measure `{other}`"))),
        },
    };
    Ok(report)
}

pub fn digest(model: &ModelFile) -> String {
    let canonical = serde_json::to_string(model).expect("model serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn audit<S: Scalar>(ctx: &Ctx<S>, args: &Common) -> Result<Body, CliError> {
    let start = Instant::now();
    let j = &ctx.joint;
    let deltas = if ctx.deltas.is_empty() {
        vec![S::zero(), S::frac(1, 10), S::frac(1, 2)]
    } else {
        ctx.deltas.clone()
    };
    let levels = deltas
        .iter()
        .map(|d| {
            let (p, _) = min_eps_for_delta_pml(j, d)?;
            let e = if d.is_zero() {
                leakage_distribution(j).max_ratio()
            } else {
                eml_kappa(j, d)?.kappa
            };
            Ok(Level {
                delta: d.to_repr(),
                delta_pml: Ratio::of(&p),
                eml: Ratio::of(&e),
            })
        })
        .collect::<Result<_, CliError>>()?;
    let mut guarantees = Vec::new();
    for e in &ctx.epsilons {
        for d in &deltas {
            guarantees.extend(guarantee_reports(j, e, d)?);
        }
    }
    let eps = ctx.epsilons.first();
    let delta = deltas.iter().find(|d| !d.is_zero());
    let measures = measure_names(args)
        .iter()
        .map(|n| measure(j, n, eps, delta))
        .collect::<Result<_, _>>()?;
    Ok(Body::Audit(Box::new(AuditReport {
        model_digest: digest(&ctx.file),
        model: ctx.file.clone(),
        leakage: LeakageReport::new(j, &leakage_distribution(j)),
        levels,
        guarantees,
        measures,
        timing_ms: args.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })))
}
