//! One function per subcommand. Each fills a report and sets its verdict.

use std::sync::Arc;

use obslab_core::cochain::{brute_force_counts, coboundary, cocycles, cohomology as snf_cohomology, is_coboundary, Cochain};
use obslab_core::group::{find_isomorphism, quotient, CrossSection, FiniteGroup};
use obslab_core::heisenberg::{antisymmetry_invariant, build_heisenberg_demo, necessary_witness, splitting_test, Splitting};
use obslab_core::hjr::{
    change_section, delta_hjr as hjr, delta_mod as modular, obstruction_equal, partial_map, verify_exactness,
    AssertionResult, ModularObstruction, SectionTower,
};
use obslab_core::module::{AbelianModule, FlowData, ModuleAut};
use obslab_core::resolution::{resolve_obstruction as realize, resolve_three_cocycle};
use obslab_core::standard::{is_standard_coboundary, StandardThree};
use obslab_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::oracle;
use crate::problem::{explicit_obstruction, parse_nu, Context};
use crate::report::{
    class_json, coboundary_witness, cochain_json, flow_json, group_json, standard_witness, Report, Status, Witness,
};
use crate::CliError;

fn superscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string().chars().map(|c| DIGITS[c.to_digit(10).unwrap() as usize]).collect()
}

fn describe_group(g: &FiniteGroup) -> String {
    if find_isomorphism(g, &FiniteGroup::cyclic(g.order())).is_some() {
        format!("Z/{}", g.order())
    } else {
        g.label().to_string()
    }
}

fn obstruction_summary(report: &mut Report, ob: &ModularObstruction) {
    report.set("quotient order", ob.flow_q().group().order());
    report.set_json("c", cochain_json(&ob.cocycle().c));
    report.set_json("d1", cochain_json(&ob.cocycle().d1));
    report.set_json("nu", ob.nu());
}

/// Heisenberg flags, then `[obstruction]`, then `delta_mod` of `[chi]`.
fn load_obstruction(ctx: &Context) -> Result<ModularObstruction, CliError> {
    let heis = ctx.problem.heisenberg.as_ref();
    if let Some(k) = ctx.ov.k.or(heis.map(|h| h.k)) {
        let nu = ctx.ov.nu.clone().or(heis.and_then(|h| h.nu.clone())).unwrap_or_else(|| "injective".into());
        let data = match &ctx.ov.module {
            Some(m) => {
                let md = AbelianModule::parse(m).map_err(CliError::Input)?;
                let id = ModuleAut::identity(&md);
                FlowData::new(md, id, 1)
            }
            None => FlowData::trivial_cyclic(k as u64),
        };
        return Ok(build_heisenberg_demo(k, data, parse_nu(&nu)?)?.1);
    }
    if let Some(o) = &ctx.problem.obstruction {
        return explicit_obstruction(ctx, o);
    }
    let (flow, l, m) = ctx.tower_data()?;
    let (sh, sq) = ctx.sections();
    let tower = SectionTower::with_sections(&flow, &l, &m, sh, sq)?;
    let chi = ctx.chi(&flow, &l)?;
    Ok(modular(&chi, &tower)?.obstruction)
}

pub fn group_check(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let g = ctx.group()?;
    report.set_json("group", json!({ "label": g.label(), "order": g.order() }));
    report.set("abelian", g.is_abelian());
    report.set_json("element orders", g.elements().map(|x| g.element_order(x)).collect::<Vec<_>>());
    report.verdict("VALID GROUP", Status::Ok);
    Ok(())
}

pub fn cohomology(ctx: &Context, degree: usize, report: &mut Report) -> Result<(), CliError> {
    let f = ctx.flow()?;
    let h = snf_cohomology(&f, degree, &ctx.budget)?;
    let line = format!("H{} ≅ {}", superscript(degree), h.describe());
    report.set("group", f.group().label());
    report.set("module", f.module().label());
    report.set("degree", degree);
    report.set("class", class_json(&h.invariant_factors));
    report.set("cohomology", line.clone());
    for b in &h.basis {
        report.witness(Witness::Cocycle {
            flow: flow_json(&f),
            target: cochain_json(b),
        });
    }
    report.verdict(line, Status::Ok);
    Ok(())
}

pub fn delta_hjr(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let (flow, l, _) = ctx.tower_data()?;
    let chi = ctx.chi(&flow, &l)?;
    let qd = Arc::new(quotient(flow.group(), &l)?);
    let s = match ctx.sections().1 {
        Some(t) => CrossSection::new(&qd, t)?,
        None => CrossSection::minimal(&qd),
    };
    let c = hjr(&chi, &s)?;
    report.set("quotient order", qd.quot().order());
    report.set_json("cochain", cochain_json(&c));
    match is_coboundary(&c)? {
        Some(e) => {
            report.witness(coboundary_witness(&c, &e));
            report.verdict("TRIVIAL", Status::Ok);
        }
        None => report.verdict("NONTRIVIAL", Status::Ok),
    }
    Ok(())
}

pub fn delta_mod(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let ob = {
        let mut ctx2 = Context::new(ctx.problem.clone(), ctx.ov.clone());
        ctx2.problem.obstruction = None;
        ctx2.problem.heisenberg = None;
        load_obstruction(&ctx2)?
    };
    obstruction_summary(report, &ob);
    match is_standard_coboundary(ob.cocycle()) {
        Some(a) if ob.nu().iter().all(|&v| v == 0) => {
            report.witness(standard_witness(ob.cocycle(), &a));
            report.verdict("OBSTRUCTION TRIVIAL", Status::Ok);
        }
        _ => report.verdict("OBSTRUCTION NONTRIVIAL", Status::Ok),
    }
    Ok(())
}

pub fn partial(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let ob = load_obstruction(ctx)?;
    let p = partial_map(&ob)?;
    report.set("group order", ob.flow_g().group().order());
    report.set_json("c_G", cochain_json(&p.c_g));
    match is_coboundary(&p.c_g)? {
        Some(e) => {
            report.witness(coboundary_witness(&p.c_g, &e));
            report.verdict("PARTIAL TRIVIAL", Status::Ok);
        }
        None => report.verdict("PARTIAL NONTRIVIAL", Status::Ok),
    }
    Ok(())
}

/// Resolves `c` and checks `delta_HJR(chi) ~ c`; returns the witness if it holds.
fn round_trip(c: &Cochain, ctx: &Context) -> Result<(obslab_core::resolution::ResolutionSystem, Option<Witness>), CliError> {
    let r = resolve_three_cocycle(c, &ctx.budget)?;
    let diff = hjr(r.chi(), r.section())?.sub(c);
    let w = is_coboundary(&diff)?.map(|e| coboundary_witness(&diff, &e));
    Ok((r, w))
}

pub fn resolve(ctx: &Context, samples: usize, seed: u64, report: &mut Report) -> Result<(), CliError> {
    let f = ctx.flow()?;
    let mut ok = true;
    if ctx.problem.cochain.is_some() {
        let c = ctx.cochain(&f)?;
        let (r, w) = round_trip(&c, ctx)?;
        report.set("resolution order", r.big().order());
        report.set("resolution group", describe_group(r.big()));
        report.set("kernel order", r.kernel().order());
        report.set("kernel abelian", r.kernel().is_abelian());
        let pulled = c.pullback(r.flow(), r.projection().projection());
        report.witness(coboundary_witness(&pulled, r.cobounding()));
        match w {
            Some(w) => report.witness(w),
            None => ok = false,
        }
    } else if samples == 0 {
        return Err(CliError::Input("field `cochain`: no cochain given and --samples is 0".into()));
    }
    if samples > 0 {
        let all = cocycles(&f, 3, &ctx.budget)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = 0;
        for _ in 0..samples {
            let c = &all[rng.gen_range(0..all.len())];
            if round_trip(c, ctx)?.1.is_none() {
                failures += 1;
            }
        }
        report.set("samples", samples);
        report.set("sample failures", failures);
        ok &= failures == 0;
    }
    if ok {
        report.verdict("RESOLVED", Status::Ok);
    } else {
        report.verdict("NOT RESOLVED", Status::Violation);
    }
    Ok(())
}

pub fn resolve_obstruction(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let ob = load_obstruction(ctx)?;
    let res = realize(&ob, &ctx.budget)?;
    let again = modular(&res.chi, &res.tower)?.obstruction;
    report.set("resolution order", res.tower.flow_h().group().order());
    report.set("L order", res.l.order());
    report.set("M order", res.m.order());
    obstruction_summary(report, &ob);
    match obstruction_equal(&again, &ob)? {
        Some(a) => {
            report.witness(standard_witness(&again.cocycle().sub(ob.cocycle()), &a));
            report.verdict("REALIZED", Status::Ok);
        }
        None => report.verdict("NOT REALIZED", Status::Violation),
    }
    Ok(())
}

pub fn fiber_check(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    match load_obstruction(ctx) {
        Ok(ob) => {
            report.set("quotient order", ob.flow_q().group().order());
            report.verdict("FIBER OK", Status::Ok);
        }
        Err(CliError::Core(Error::FiberViolated { q, r })) => {
            report.set_json("failing pair", [q, r]);
            report.verdict(format!("FIBER VIOLATED at ({q}, {r})"), Status::Violation);
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

pub fn section_change(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let ob = load_obstruction(ctx)?;
    let qd = ob.section().quotient().clone();
    let targets = match ctx.target_section() {
        Some(t) => vec![CrossSection::new(&qd, t)?],
        None => CrossSection::all(&qd),
    };
    let mut round = AssertionResult::default();
    let mut chain = 0usize;
    let mut chain_failures = 0usize;
    let moved: Vec<ModularObstruction> = targets.iter().map(|s| change_section(&ob, s)).collect::<Result<_, _>>()?;
    for (s, ob2) in targets.iter().zip(&moved) {
        let back = change_section(ob2, ob.section())?;
        round.checked += 1;
        match obstruction_equal(&back, &ob)? {
            Some(a) => report.witness(standard_witness(&back.cocycle().sub(ob.cocycle()), &a)),
            None => round.failures.push(format!("{:?}", s.table())),
        }
        for (s2, direct) in targets.iter().zip(&moved) {
            chain += 1;
            let composed = change_section(ob2, s2)?;
            if obstruction_equal(&composed, direct)?.is_none() {
                chain_failures += 1;
            }
        }
    }
    report.set("sections", targets.len());
    if let [only] = moved.as_slice() {
        obstruction_summary(report, only);
    }
    report.set("round trips", round.checked);
    report.set("round trip failures", round.failures.len());
    report.set("chain rule triples", chain);
    report.set("chain rule failures", chain_failures);
    if round.passed() && chain_failures == 0 {
        report.verdict("TRANSPORT CONSISTENT", Status::Ok);
    } else {
        report.verdict("TRANSPORT INCONSISTENT", Status::Violation);
    }
    Ok(())
}

fn assertion_json(a: &AssertionResult) -> serde_json::Value {
    json!({ "checked": a.checked, "failures": a.failures })
}

pub fn exactness(ctx: &Context, report: &mut Report) -> Result<(), CliError> {
    let (flow, l, m) = ctx.tower_data()?;
    let r = verify_exactness(&flow, &l, &m, &ctx.budget)?;
    report.set("characteristic cocycles", r.characteristic_total);
    report.set("torus 2-cocycles", r.torus_cocycles);
    report.set("(a) res in kernel", assertion_json(&r.res_in_ker));
    for (name, reading) in [("strict", &r.strict), ("class", &r.class)] {
        report.set(&format!("{name} members"), reading.members);
        report.set(&format!("{name} kernel"), reading.kernel);
        report.set(&format!("{name} (b) kernel in res"), assertion_json(&reading.ker_in_res));
        report.set(&format!("{name} (c) inf kills image"), assertion_json(&reading.inf_kills_image));
        report.set(&format!("{name} (d) sublemma"), assertion_json(&reading.sublemma));
    }
    if r.passed() {
        report.verdict("EXACT", Status::Ok);
    } else {
        report.verdict("EXACTNESS VIOLATED", Status::Violation);
    }
    Ok(())
}

pub fn heisenberg(ctx: &Context, k: usize, nu: &str, report: &mut Report) -> Result<(), CliError> {
    let w = parse_nu(nu)?;
    let data = match &ctx.ov.module {
        Some(m) => {
            let md = AbelianModule::parse(m).map_err(CliError::Input)?;
            let id = ModuleAut::identity(&md);
            FlowData::new(md, id, 1)
        }
        None => FlowData::trivial_cyclic(k as u64),
    };
    let (fx, ob) = build_heisenberg_demo(k, data, w)?;
    let split = splitting_test(&ob, &ctx.budget)?;
    let necessary = necessary_witness(&ob);
    let pairing = antisymmetry_invariant(&ob);
    report.set("k", k);
    report.set("w", w);
    report.set_json("group", json!({ "label": fx.group.label(), "order": fx.group.order() }));
    report.set("module", fx.flow.module().label());
    report.set("necessary condition", necessary.is_some());
    report.set("antisymmetry nonzero pairs", pairing.iter().filter(|&&v| v != 0).count());
    if let Some(e) = &necessary {
        let fq = ob.flow_q();
        let target = Cochain::from_fn(fq, 2, |t| ob.zeta(ob.n_n(t[0], t[1])));
        report.witness(Witness::ThetaCoboundary {
            flow: flow_json(fq),
            target: cochain_json(&target),
            primitive: cochain_json(e),
        });
    }
    let verdict = match &split {
        Splitting::Split { b, f } => {
            report.set_json("b", cochain_json(b));
            let twisted = StandardThree {
                c: ob.cocycle().c.clone(),
                d1: ob.cocycle().d1.add(&coboundary(b)),
            };
            report.witness(standard_witness(&twisted, f));
            "SPLIT"
        }
        Splitting::Obstructed { candidates, exhaustive } => {
            report.set("candidates", candidates.to_string());
            report.set("exhaustive", *exhaustive);
            "OBSTRUCTED"
        }
    };
    if split.is_split() && necessary.is_none() {
        report.verdict("SPLIT WITHOUT NECESSARY CONDITION", Status::Violation);
    } else {
        report.verdict(verdict, Status::Ok);
    }
    Ok(())
}

pub fn oracle_report(text: &str, report: &mut Report) -> Result<(), CliError> {
    let original: Report =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("report: {e}")))?;
    let mut failures = Vec::new();
    for (i, w) in original.witnesses.iter().enumerate() {
        if let Some(why) = oracle::verify(w)? {
            failures.push(format!("witness {i}: {why}"));
        }
    }
    report.set("report command", original.command.clone());
    report.set("witnesses", original.witnesses.len());
    report.set_json("failures", &failures);
    if failures.is_empty() {
        report.verdict("ALL WITNESSES VERIFIED", Status::Ok);
    } else {
        report.verdict("WITNESS REJECTED", Status::Violation);
    }
    Ok(())
}

pub fn oracle_cohomology(ctx: &Context, degree: Option<usize>, report: &mut Report) -> Result<(), CliError> {
    let f = ctx.flow()?;
    let degrees = match degree {
        Some(d) => vec![d],
        None => vec![1, 2],
    };
    report.set_json("group", group_json(f.group()));
    report.set("module", f.module().label());
    let mut agree = true;
    for d in degrees {
        let h = snf_cohomology(&f, d, &ctx.budget)?;
        let (z, b) = brute_force_counts(&f, d, &ctx.budget)?;
        let same = z % b == 0 && z / b == h.order();
        agree &= same;
        report.set(
            &format!("degree {d}"),
            json!({ "snf": class_json(&h.invariant_factors), "cocycles": z.to_string(), "coboundaries": b.to_string(), "agree": same }),
        );
    }
    if agree {
        report.verdict("ORACLES AGREE", Status::Ok);
    } else {
        report.verdict("ORACLES DISAGREE", Status::Violation);
    }
    Ok(())
}
